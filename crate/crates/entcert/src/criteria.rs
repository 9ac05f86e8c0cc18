//! Separability conditions on antidiagonal coherences, in operator and
//! matrix-element form.
//!
//! Every condition reduces to two numbers per label x: xy_x = <X_x>^2 + <Y_x>^2
//! and iz_x = <I_x>^2 - <Z_x>^2. With Pauli triples these equal 4|rho_{j,jbar}|^2
//! and 4 rho_{j,j} rho_{jbar,jbar} for the row j attached to x.

use crate::observables::{mermin_operator, LocalTriple, ObservableError, OperatorFamily};
use crate::partitions::{antidiag_index, bipartite_label, enumerate_splits, solution_sets, PartitionError, SolutionSet, Split, SplitLevel};
use crate::qmat::{expectation, DensityMatrix, QmatError};
use crate::states::{dc_depolarize, StateError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("level k={k} out of range {min}..={n}")]
    Level { k: usize, n: usize, min: usize },
    #[error("split is for {split} qubits, state has {state}")]
    QubitMismatch { split: usize, state: usize },
    #[error("matrix-element form requires Pauli triples")]
    NonPauli,
    #[error("criterion needs at least 2 qubits")]
    TooSmall,
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// One evaluated inequality lhs <= min(rhs, bound).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub criterion: String,
    pub target: String,
    pub lhs: f64,
    pub rhs: Option<f64>,
    pub bound: Option<f64>,
    pub violated: bool,
    pub margin: f64,
}

impl CriterionVerdict {
    pub fn new(criterion: &str, target: String, lhs: f64, rhs: Option<f64>, bound: Option<f64>, tol: f64) -> Self {
        let limit = match (rhs, bound) {
            (Some(r), Some(b)) => r.min(b),
            (Some(r), None) => r,
            (None, Some(b)) => b,
            (None, None) => f64::INFINITY,
        };
        let margin = lhs - limit;
        Self { criterion: criterion.to_string(), target, lhs, rhs, bound, violated: margin > tol, margin }
    }
}

/// Per-label expectation values of the operator family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantities {
    pub n_qubits: usize,
    pub tol: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub i: Vec<f64>,
}

impl Quantities {
    /// Expectations of the explicitly built operators.
    pub fn from_operators(rho: &DensityMatrix, family: &OperatorFamily) -> Result<Self, CriteriaError> {
        let n = rho.n_qubits();
        if family.n_qubits() != n {
            return Err(CriteriaError::QubitMismatch { split: family.n_qubits(), state: n });
        }
        let labels = family.labels();
        let mut q = Self::empty(n, rho.tolerance(), labels);
        for x in 0..labels {
            let quad = family.quadruple(x)?;
            q.x.push(expectation(rho, &quad.x)?);
            q.y.push(expectation(rho, &quad.y)?);
            q.z.push(expectation(rho, &quad.z)?);
            q.i.push(expectation(rho, &quad.i)?);
        }
        Ok(q)
    }

    /// The same values read directly off the matrix entries (Pauli triples).
    pub fn from_matrix(rho: &DensityMatrix) -> Result<Self, CriteriaError> {
        let n = rho.n_qubits();
        if n < 2 {
            return Err(CriteriaError::TooSmall);
        }
        let labels = 1usize << (n - 1);
        let mut q = Self::empty(n, rho.tolerance(), labels);
        for x in 0..labels {
            let idx = antidiag_index(n, x)?;
            let (b, bb) = (idx.row0(), idx.col0());
            let coh = rho.entry(b, bb);
            q.x.push(2.0 * coh.re);
            q.y.push(-2.0 * coh.im);
            q.z.push(rho.entry(b, b).re - rho.entry(bb, bb).re);
            q.i.push(rho.entry(b, b).re + rho.entry(bb, bb).re);
        }
        Ok(q)
    }

    /// Operator path for any family; matrix path only for Pauli families.
    pub fn for_family(rho: &DensityMatrix, family: &OperatorFamily, path: EvalPath) -> Result<Self, CriteriaError> {
        match path {
            EvalPath::Operators => Self::from_operators(rho, family),
            EvalPath::Matrix if family.is_pauli(1e-12) => Self::from_matrix(rho),
            EvalPath::Matrix => Err(CriteriaError::NonPauli),
        }
    }

    fn empty(n: usize, tol: f64, labels: usize) -> Self {
        Self {
            n_qubits: n,
            tol,
            x: Vec::with_capacity(labels),
            y: Vec::with_capacity(labels),
            z: Vec::with_capacity(labels),
            i: Vec::with_capacity(labels),
        }
    }

    pub fn labels(&self) -> usize {
        self.x.len()
    }

    pub fn xy(&self, x: usize) -> f64 {
        self.x[x] * self.x[x] + self.y[x] * self.y[x]
    }

    pub fn iz(&self, x: usize) -> f64 {
        (self.i[x] * self.i[x] - self.z[x] * self.z[x]).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalPath {
    Operators,
    Matrix,
}

fn check_level(k: usize, n: usize, min: usize) -> Result<(), CriteriaError> {
    if k < min || k > n {
        return Err(CriteriaError::Level { k, n, min });
    }
    Ok(())
}

fn max_antidiagonal(rho: &DensityMatrix) -> (f64, usize) {
    let d = rho.dim();
    (0..d / 2).map(|r| (rho.entry(r, d - 1 - r).norm(), r + 1)).fold((0.0, 1), |best, cur| if cur.0 > best.0 { cur } else { best })
}

/// max_j |rho_{j,jbar}| <= (1/2)^k for k-separable states.
pub fn lz_condition(rho: &DensityMatrix, k: usize) -> Result<CriterionVerdict, CriteriaError> {
    let n = rho.n_qubits();
    check_level(k, n, 1)?;
    let (lhs, _) = max_antidiagonal(rho);
    Ok(CriterionVerdict::new("lz", format!("k={k}"), lhs, None, Some(0.5f64.powi(k as i32)), rho.tolerance()))
}

/// The same bound on the single element probed by label x.
pub fn lz_element(rho: &DensityMatrix, k: usize, x: usize) -> Result<CriterionVerdict, CriteriaError> {
    let n = rho.n_qubits();
    check_level(k, n, 1)?;
    let idx = antidiag_index(n, x)?;
    let lhs = rho.entry(idx.row0(), idx.col0()).norm();
    Ok(CriterionVerdict::new("lz", format!("k={k},x={x}"), lhs, None, Some(0.5f64.powi(k as i32)), rho.tolerance()))
}

/// Largest k with max_j |rho_{j,jbar}| <= (1/2)^k: the state is then at most
/// k-separable. `None` when every antidiagonal element vanishes.
pub fn lz_level(rho: &DensityMatrix) -> Option<usize> {
    let (lhs, _) = max_antidiagonal(rho);
    if lhs <= rho.tolerance() {
        return None;
    }
    let k = (1.0 / lhs).log2().floor() as usize;
    Some(k.clamp(1, rho.n_qubits()))
}

fn mermin_pair(rho: &DensityMatrix, triples: &[LocalTriple]) -> Result<(f64, f64), CriteriaError> {
    let (m, mp) = mermin_operator(rho.n_qubits(), triples)?;
    Ok((expectation(rho, &m)?, expectation(rho, &mp)?))
}

/// <M>^2 + <M'>^2 <= 2^(N+3) (1/4)^k.
pub fn mermin_quadratic(rho: &DensityMatrix, k: usize, triples: &[LocalTriple]) -> Result<CriterionVerdict, CriteriaError> {
    let n = rho.n_qubits();
    check_level(k, n, 1)?;
    let (m, mp) = mermin_pair(rho, triples)?;
    let bound = 2f64.powi(n as i32 + 3) * 0.25f64.powi(k as i32);
    Ok(CriterionVerdict::new("mermin-quadratic", format!("k={k}"), m * m + mp * mp, None, Some(bound), rho.tolerance()))
}

/// |<M>| <= 2^((N+3)/2) (1/2)^k.
pub fn mermin_linear(rho: &DensityMatrix, k: usize, triples: &[LocalTriple]) -> Result<CriterionVerdict, CriteriaError> {
    let n = rho.n_qubits();
    check_level(k, n, 1)?;
    let (m, _) = mermin_pair(rho, triples)?;
    let bound = 2f64.powf((n as f64 + 3.0) / 2.0) * 0.5f64.powi(k as i32);
    Ok(CriterionVerdict::new("mermin-linear", format!("k={k}"), m.abs(), None, Some(bound), rho.tolerance()))
}

/// Fidelity with the best generalized GHZ state (rho_11 + rho_dd)/2 + |rho_1d|.
pub fn fidelity_ghz(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    (rho.entry(0, 0).re + rho.entry(d - 1, d - 1).re) / 2.0 + rho.entry(0, d - 1).norm()
}

/// 2 |rho_{j,jbar}| <= sum of diagonal entries outside {j, jbar}, at the
/// label where the difference is largest. Violation rules out biseparability.
pub fn fidelity_from(q: &Quantities) -> CriterionVerdict {
    let (x, lhs, rhs) = (0..q.labels()).map(|x| (x, q.xy(x).sqrt(), 1.0 - q.i[x])).fold((0, f64::NEG_INFINITY, 0.0), |best, cur| {
        if cur.1 - cur.2 > best.1 - best.2 {
            cur
        } else {
            best
        }
    });
    CriterionVerdict::new("fidelity", format!("x={x}"), lhs, Some(rhs), None, q.tol)
}

pub fn fidelity_criterion(rho: &DensityMatrix) -> Result<CriterionVerdict, CriteriaError> {
    Ok(fidelity_from(&Quantities::from_matrix(rho)?))
}

/// Condition for separability under a bipartite split after twirling into the
/// GHZ-diagonal family: |lambda0^+ - lambda0^-| <= 2 lambda_j.
pub fn dc_condition(rho: &DensityMatrix, split: &Split) -> Result<CriterionVerdict, CriteriaError> {
    if split.n_qubits() != rho.n_qubits() {
        return Err(CriteriaError::QubitMismatch { split: split.n_qubits(), state: rho.n_qubits() });
    }
    let j = bipartite_label(split)?;
    let dc = dc_depolarize(rho)?;
    let lhs = (dc.lambda0_plus - dc.lambda0_minus).abs();
    Ok(CriterionVerdict::new("dc", split.label(), lhs, Some(2.0 * dc.lambda(j.value)), None, rho.tolerance()))
}

/// One verdict per solution set:
/// max_{x in z} xy_x <= min_{x in z} iz_x <= (1/4)^(k-1).
pub fn alpha_split_from(q: &Quantities, sets: &SolutionSet) -> Vec<CriterionVerdict> {
    let k = sets.split.k();
    let bound = 0.25f64.powi(k as i32 - 1);
    let label = sets.split.label();
    sets.sets
        .iter()
        .map(|set| {
            let lhs = set.iter().map(|&x| q.xy(x)).fold(0.0, f64::max);
            let rhs = set.iter().map(|&x| q.iz(x)).fold(f64::INFINITY, f64::min);
            let members: Vec<String> = set.iter().map(usize::to_string).collect();
            CriterionVerdict::new("alpha-split", format!("{label}:{{{}}}", members.join(",")), lhs, Some(rhs), Some(bound), q.tol)
        })
        .collect()
}

pub fn alpha_split_condition(rho: &DensityMatrix, split: &Split, family: &OperatorFamily) -> Result<Vec<CriterionVerdict>, CriteriaError> {
    if split.n_qubits() != rho.n_qubits() {
        return Err(CriteriaError::QubitMismatch { split: split.n_qubits(), state: rho.n_qubits() });
    }
    let q = Quantities::from_operators(rho, family)?;
    Ok(alpha_split_from(&q, &solution_sets(split)?))
}

/// The verdict with the largest margin, standing for the conjunction.
pub fn worst(verdicts: &[CriterionVerdict]) -> Option<&CriterionVerdict> {
    verdicts.iter().max_by(|a, b| a.margin.total_cmp(&b.margin))
}

/// Strong k-separability condition, one verdict per label x:
/// sqrt(xy_x) <= sum over k-splits of min_{y in set(x), y != x} sqrt(iz_y).
pub fn ksep_per_label(q: &Quantities, level: &SplitLevel) -> Vec<CriterionVerdict> {
    let labels = q.labels();
    let root: Vec<f64> = (0..labels).map(|y| q.iz(y).sqrt()).collect();
    let mut rhs = vec![0.0; labels];
    for entry in &level.entries {
        for set in &entry.sets {
            let (mut m1, mut a1, mut m2) = (f64::INFINITY, usize::MAX, f64::INFINITY);
            for &y in set {
                if root[y] < m1 {
                    m2 = m1;
                    m1 = root[y];
                    a1 = y;
                } else if root[y] < m2 {
                    m2 = root[y];
                }
            }
            for &x in set {
                rhs[x] += if x == a1 { m2 } else { m1 };
            }
        }
    }
    (0..labels).map(|x| CriterionVerdict::new("ksep", format!("k={},x={x}", level.k), q.xy(x).sqrt(), Some(rhs[x]), None, q.tol)).collect()
}

pub fn ksep_strong_from(q: &Quantities, level: &SplitLevel) -> CriterionVerdict {
    let per = ksep_per_label(q, level);
    let mut v = worst(&per).cloned().expect("at least one label");
    v.target = format!("k={}", level.k);
    v
}

/// Weak form: xy_x <= (1/4)^(k-1) for every x.
pub fn ksep_weak_from(q: &Quantities, k: usize) -> CriterionVerdict {
    let lhs = (0..q.labels()).map(|x| q.xy(x)).fold(0.0, f64::max);
    CriterionVerdict::new("ksep-weak", format!("k={k}"), lhs, None, Some(0.25f64.powi(k as i32 - 1)), q.tol)
}

/// Strong and weak k-separability verdicts, reported side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsepVerdict {
    pub k: usize,
    pub strong: CriterionVerdict,
    pub weak: CriterionVerdict,
    /// Lower bound ceil(N/k) on the number of parties sharing entanglement
    /// when the condition at level k is violated.
    pub min_partite: Option<usize>,
}

pub fn ksep_from(q: &Quantities, level: &SplitLevel) -> KsepVerdict {
    let strong = ksep_strong_from(q, level);
    let weak = ksep_weak_from(q, level.k);
    let violated = strong.violated || weak.violated;
    // Violating level k leaves at most (k-1)-separability.
    let min_partite = violated.then(|| q.n_qubits.div_ceil(level.k - 1));
    KsepVerdict { k: level.k, strong, weak, min_partite }
}

pub fn ksep_condition(rho: &DensityMatrix, k: usize, family: &OperatorFamily) -> Result<KsepVerdict, CriteriaError> {
    let n = rho.n_qubits();
    check_level(k, n, 2)?;
    let q = Quantities::from_operators(rho, family)?;
    Ok(ksep_from(&q, &SplitLevel::new(n, k)?))
}

/// Conditions addressable by id, evaluated from either path.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CriterionSpec {
    Fidelity,
    AlphaSplit {
        split: Split,
    },
    Ksep {
        k: usize,
    },
    KsepWeak {
        k: usize,
    },
    /// The single N-partite split, including its bound (1/4)^(N-1).
    FullSep,
}

pub fn evaluate(q: &Quantities, spec: &CriterionSpec) -> Result<Vec<CriterionVerdict>, CriteriaError> {
    let n = q.n_qubits;
    Ok(match spec {
        CriterionSpec::Fidelity => vec![fidelity_from(q)],
        CriterionSpec::AlphaSplit { split } => {
            if split.n_qubits() != n {
                return Err(CriteriaError::QubitMismatch { split: split.n_qubits(), state: n });
            }
            alpha_split_from(q, &solution_sets(split)?)
        }
        CriterionSpec::Ksep { k } => {
            check_level(*k, n, 2)?;
            ksep_per_label(q, &SplitLevel::new(n, *k)?)
        }
        CriterionSpec::KsepWeak { k } => {
            check_level(*k, n, 2)?;
            vec![ksep_weak_from(q, *k)]
        }
        CriterionSpec::FullSep => {
            let split = enumerate_splits(n, n)?.remove(0);
            alpha_split_from(q, &solution_sets(&split)?)
        }
    })
}

/// Evaluate from matrix entries; assumes Pauli triples.
pub fn matrix_form(rho: &DensityMatrix, spec: &CriterionSpec) -> Result<Vec<CriterionVerdict>, CriteriaError> {
    evaluate(&Quantities::from_matrix(rho)?, spec)
}

pub fn operator_form(rho: &DensityMatrix, family: &OperatorFamily, spec: &CriterionSpec) -> Result<Vec<CriterionVerdict>, CriteriaError> {
    evaluate(&Quantities::from_operators(rho, family)?, spec)
}

/// The four expressions of the chain
/// 4|r| - (r_ll + r_lbar) <= 2|r| <= 2 sum_pairs sqrt(r_nn r_nbar) <= sum_{n != l, lbar} r_nn
/// for the antidiagonal element r = rho_{l,lbar} probed by label x.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub x: usize,
    pub row: usize,
    pub expressions: [f64; 4],
    pub lz_violated: bool,
    pub fidelity_violated: bool,
    pub biseparability_violated: bool,
}

impl ChainReport {
    /// The two inequalities that hold for every state.
    pub fn always_holds(&self, tol: f64) -> bool {
        self.expressions[0] <= self.expressions[1] + tol && self.expressions[2] <= self.expressions[3] + tol
    }
}

pub fn chain_from(q: &Quantities, x: usize) -> Result<ChainReport, CriteriaError> {
    let idx = antidiag_index(q.n_qubits, x)?;
    let two_r = q.xy(x).sqrt();
    let e1 = 2.0 * two_r - q.i[x];
    let e2 = two_r;
    let e3: f64 = (0..q.labels()).filter(|&y| y != x).map(|y| q.iz(y).sqrt()).sum();
    let e4 = 1.0 - q.i[x];
    let tol = q.tol;
    Ok(ChainReport {
        x,
        row: idx.row(),
        expressions: [e1, e2, e3, e4],
        lz_violated: e1 > e4 + tol,
        fidelity_violated: e2 > e4 + tol,
        biseparability_violated: e2 > e3 + tol,
    })
}

pub fn chain_check(rho: &DensityMatrix, x: usize) -> Result<ChainReport, CriteriaError> {
    chain_from(&Quantities::from_matrix(rho)?, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{pauli_family, pauli_triple};
    use crate::partitions::enumerate_splits;
    use crate::qmat::{PureState, C64};
    use crate::sampling::{random_density, random_pure_state};
    use crate::states::{self, apply_channel, ghz, NoiseChannel, NoiseKind};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ghz_rho(n: usize) -> DensityMatrix {
        ghz(n, 0.0).unwrap().projector()
    }

    fn white(rho: &DensityMatrix, p: f64) -> DensityMatrix {
        apply_channel(rho, &NoiseChannel::new(NoiseKind::White, p).unwrap()).unwrap()
    }

    #[test]
    fn lz_basic() {
        assert!(lz_condition(&ghz_rho(3), 2).unwrap().violated);
        assert!((lz_condition(&ghz_rho(3), 2).unwrap().lhs - 0.5).abs() < 1e-15);
        for k in 1..=4 {
            assert!(!lz_condition(&DensityMatrix::maximally_mixed(4), k).unwrap().violated);
        }
        for n in 2..=5 {
            for p in [0.1, 0.4, 0.7, 0.95] {
                let v = lz_condition(&white(&ghz_rho(n), p), n).unwrap();
                let expect = (1.0 - p) / 2.0 > 0.5f64.powi(n as i32);
                assert_eq!(v.violated, expect, "n={n} p={p}");
            }
        }
        assert_eq!(lz_level(&ghz_rho(4)), Some(1));
        assert_eq!(lz_level(&DensityMatrix::maximally_mixed(3)), None);
    }

    #[test]
    fn fidelity_values() {
        for n in 2..=5 {
            assert!((fidelity_ghz(&ghz_rho(n)) - 1.0).abs() < 1e-15);
            let prod = PureState::basis(n, 0).unwrap().projector();
            assert!((fidelity_ghz(&prod) - 0.5).abs() < 1e-15);
            assert!(!fidelity_criterion(&prod).unwrap().violated);
            let p0 = 1.0 / (2.0 * (1.0 - 0.5f64.powi(n as i32)));
            assert!(fidelity_criterion(&white(&ghz_rho(n), p0 - 1e-6)).unwrap().violated);
            assert!(!fidelity_criterion(&white(&ghz_rho(n), p0 + 1e-6)).unwrap().violated);
        }
    }

    #[test]
    fn dc_on_three_qubit_members() {
        let split = |s: &str| Split::parse(3, s).unwrap();
        let r1 = states::rho3_member(true).density();
        assert!(!dc_condition(&r1, &split("a-(bc)")).unwrap().violated);
        assert!(dc_condition(&r1, &split("b-(ac)")).unwrap().violated);
        assert!(dc_condition(&r1, &split("(ab)-c")).unwrap().violated);
        let mix = states::rho3_mix(0.5).unwrap();
        for s in enumerate_splits(3, 2).unwrap() {
            assert!(dc_condition(&mix, &s).unwrap().violated);
            assert!(!dc_condition(&DensityMatrix::maximally_mixed(3), &s).unwrap().violated);
        }
    }

    #[test]
    fn alpha_split_examples() {
        let fam3 = pauli_family(3).unwrap();
        let b3 = states::bound_3q();
        let a = alpha_split_condition(&b3, &Split::parse(3, "a-(bc)").unwrap(), &fam3).unwrap();
        assert!(worst(&a).unwrap().violated);
        for s in ["b-(ac)", "(ab)-c"] {
            let v = alpha_split_condition(&b3, &Split::parse(3, s).unwrap(), &fam3).unwrap();
            assert!(!worst(&v).unwrap().violated, "{s}");
        }
        let fam4 = pauli_family(4).unwrap();
        let sm = states::smolin();
        for s in enumerate_splits(4, 2).unwrap() {
            let v = alpha_split_condition(&sm, &s, &fam4).unwrap();
            let one_vs_three = s.largest_part() == 3;
            assert_eq!(worst(&v).unwrap().violated, one_vs_three, "{s}");
        }
        let prod = PureState::basis(3, 0).unwrap().projector();
        for s in enumerate_splits(3, 2).unwrap() {
            assert!(!worst(&alpha_split_condition(&prod, &s, &fam3).unwrap()).unwrap().violated);
        }
    }

    #[test]
    fn ksep_examples() {
        for n in 3..=6 {
            let fam = pauli_family(n).unwrap();
            for theta in [0.1, 0.5, 1.2] {
                let rho = states::theta_state(n, theta).unwrap().projector();
                assert!(ksep_condition(&rho, 2, &fam).unwrap().strong.violated);
            }
            let rho = states::theta_state(n, 0.0).unwrap().projector();
            assert!(!ksep_condition(&rho, 2, &fam).unwrap().strong.violated);
        }
        let fam4 = pauli_family(4).unwrap();
        let b = states::bound_dur(4, 0.0).unwrap();
        assert!(ksep_condition(&b, 4, &fam4).unwrap().strong.violated);
        assert!(ksep_condition(&b, 3, &fam4).unwrap().strong.violated);
        assert!(!ksep_condition(&b, 2, &fam4).unwrap().strong.violated);
        assert_eq!(ksep_condition(&ghz_rho(4), 2, &fam4).unwrap().min_partite, Some(4));
    }

    #[test]
    fn tuple_minimum_equals_sum_of_set_minima() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let level = SplitLevel::new(4, 3).unwrap();
        for _ in 0..5 {
            let q = Quantities::from_matrix(&random_density(4, 2, &mut rng).unwrap()).unwrap();
            let fast = ksep_per_label(&q, &level);
            for x in 0..8 {
                let choices: Vec<Vec<usize>> =
                    (0..level.entries.len()).map(|s| level.set_containing(s, x).iter().copied().filter(|&y| y != x).collect()).collect();
                assert_eq!(choices.len(), 6);
                let mut best = f64::INFINITY;
                let mut idx = vec![0usize; choices.len()];
                loop {
                    let total: f64 = choices.iter().zip(&idx).map(|(c, &i)| q.iz(c[i]).sqrt()).sum();
                    best = best.min(total);
                    let mut pos = 0;
                    while pos < idx.len() {
                        idx[pos] += 1;
                        if idx[pos] < choices[pos].len() {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                    if pos == idx.len() {
                        break;
                    }
                }
                assert!((fast[x].rhs.unwrap() - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mermin_examples() {
        let t = vec![pauli_triple(); 3];
        let g = ghz_rho(3);
        let (m, mp) = mermin_pair(&g, &t).unwrap();
        assert!((m * m + mp * mp - 16.0).abs() < 1e-12);
        assert!(mermin_quadratic(&g, 2, &t).unwrap().violated);
        // The linear form is phase sensitive; one of the GHZ phases 0, pi/2 aligns with M.
        let best = [0.0, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2]
            .iter()
            .map(|&a| mermin_linear(&ghz(3, a).unwrap().projector(), 2, &t).unwrap().lhs)
            .fold(0.0, f64::max);
        assert!((best - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mermin_bound_for_singleton_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 4;
        let t = vec![pauli_triple(); n];
        for kappa in 0..n {
            let bound = 2f64.powf((n as f64 - 2.0 * kappa as f64 + 1.0) / 2.0);
            for _ in 0..30 {
                let mut psi = if kappa < n { random_pure_state(n - kappa, &mut rng).unwrap() } else { unreachable!() };
                for _ in 0..kappa {
                    psi = random_pure_state(1, &mut rng).unwrap().kron(&psi);
                }
                let (m, _) = mermin_pair(&psi.projector(), &t).unwrap();
                assert!(m.abs() <= bound + 1e-9, "kappa={kappa} m={m}");
            }
        }
    }

    #[test]
    fn rho_prime_chain_pattern() {
        let n = 3;
        for delta in [0.02, 0.1, 0.3] {
            let lambdas = [0.2, 0.2, 0.2];
            let sum: f64 = lambdas.iter().sum();
            let l0p = (1.0 - sum + delta) / 2.0;
            let l0m = (1.0 - sum - delta) / 2.0;
            let rho = states::rho_prime(n, l0p, l0m, &lambdas).unwrap();
            let c = chain_check(&rho, 0).unwrap();
            assert!(c.biseparability_violated);
            assert_eq!(c.fidelity_violated, delta > sum);
            for s in enumerate_splits(n, 2).unwrap() {
                let j = bipartite_label(&s).unwrap().value;
                assert_eq!(dc_condition(&rho, &s).unwrap().violated, delta > lambdas[j - 1]);
            }
        }
        let c = chain_check(&ghz_rho(4), 0).unwrap();
        assert!(c.lz_violated && c.fidelity_violated && c.biseparability_violated);
    }

    #[test]
    fn white_noise_margin_floor() {
        for n in 2..=5 {
            let q = Quantities::from_matrix(&DensityMatrix::maximally_mixed(n)).unwrap();
            let v = evaluate(&q, &CriterionSpec::FullSep).unwrap();
            for verdict in v {
                assert!(verdict.margin <= -0.25f64.powi(n as i32 - 1) + 1e-9);
            }
        }
    }

    #[test]
    fn non_pauli_matrix_path_rejected() {
        let theta: f64 = 0.3;
        let u = crate::qmat::ComplexMatrix::new(
            2,
            2,
            vec![C64::new(theta.cos(), 0.0), C64::new(-theta.sin(), 0.0), C64::new(theta.sin(), 0.0), C64::new(theta.cos(), 0.0)],
        )
        .unwrap();
        let t = pauli_triple().rotated(&u).unwrap();
        let fam = crate::observables::build_family(vec![t, pauli_triple()]).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        assert_eq!(Quantities::for_family(&rho, &fam, EvalPath::Matrix), Err(CriteriaError::NonPauli));
        assert!(Quantities::for_family(&rho, &fam, EvalPath::Operators).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn chain_inequalities_always_hold(seed in any::<u64>(), n in 2usize..=4, rank in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(n, rank, &mut rng).unwrap();
            let q = Quantities::from_matrix(&rho).unwrap();
            for x in 0..q.labels() {
                let c = chain_from(&q, x).unwrap();
                prop_assert!(c.always_holds(1e-12));
                prop_assert!(!c.lz_violated || c.fidelity_violated);
                prop_assert!(!c.fidelity_violated || c.biseparability_violated);
            }
        }

        #[test]
        fn levels_are_monotone(seed in any::<u64>(), n in 3usize..=5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(n, 1, &mut rng).unwrap();
            let q = Quantities::from_matrix(&rho).unwrap();
            let mut prev_violated = true;
            for k in (2..=n).rev() {
                let v = ksep_weak_from(&q, k);
                // Bounds shrink by 4 per level, so a satisfied level stays satisfied below.
                prop_assert!(prev_violated || !v.violated);
                prev_violated = v.violated;
            }
        }

        #[test]
        fn alpha_split_implies_dc_on_ghz_diagonal(l0p in 0.0f64..1.0, w in proptest::collection::vec(0.0f64..1.0, 3)) {
            let total: f64 = w.iter().sum::<f64>() + 1e-9;
            let rest = 1.0 - l0p;
            let lambdas: Vec<f64> = w.iter().map(|v| rest * v / total / 2.0).collect();
            let l0m = 1.0 - l0p - 2.0 * lambdas.iter().sum::<f64>();
            prop_assume!(l0m >= 0.0);
            let s = states::GHZDiagonalState::new(3, l0p, l0m, lambdas, 1e-9).unwrap();
            let rho = s.density();
            let q = Quantities::from_matrix(&rho).unwrap();
            for split in enumerate_splits(3, 2).unwrap() {
                let alpha = alpha_split_from(&q, &solution_sets(&split).unwrap());
                if !worst(&alpha).unwrap().violated {
                    prop_assert!(!dc_condition(&rho, &split).unwrap().violated);
                }
            }
        }
    }
}
