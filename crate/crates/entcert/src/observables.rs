//! Local observable triples, the recursive operator families built from them,
//! Mermin operators and measurement settings.

use crate::partitions::antidiag_index;
use crate::qmat::{expectation, pauli, ComplexMatrix, DensityMatrix, QmatError, C64};
use crate::sampling;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("invalid local triple: {0}")]
    InvalidTriple(String),
    #[error("qubit {qubit} has orientation {orientation}; every triple must have orientation +1")]
    Orientation { qubit: usize, orientation: i8 },
    #[error("need at least {min} qubits, got {n}")]
    TooFewQubits { n: usize, min: usize },
    #[error("expected {expected} triples, got {got}")]
    TripleCount { expected: usize, got: usize },
    #[error("setting index l={l} out of range 1..={n}")]
    SettingIndex { l: usize, n: usize },
    #[error("row index j={j} out of range 1..={max}")]
    RowIndex { j: usize, max: usize },
    #[error("label x={x} out of range for N={n}")]
    Label { x: usize, n: usize },
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

/// Three anticommuting, traceless, involutory 2x2 observables on one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTriple {
    x: ComplexMatrix,
    y: ComplexMatrix,
    z: ComplexMatrix,
}

impl LocalTriple {
    pub fn new(x: ComplexMatrix, y: ComplexMatrix, z: ComplexMatrix, tol: f64) -> Result<Self, ObservableError> {
        let id = pauli::identity();
        for (name, m) in [("X", &x), ("Y", &y), ("Z", &z)] {
            if m.rows() != 2 || m.cols() != 2 {
                return Err(ObservableError::InvalidTriple(format!("{name} is not 2x2")));
            }
            if m.hermitian_deviation() > tol {
                return Err(ObservableError::InvalidTriple(format!("{name} is not Hermitian")));
            }
            if m.trace()?.norm() > tol {
                return Err(ObservableError::InvalidTriple(format!("{name} is not traceless")));
            }
            if m.mul(m).max_abs_diff(&id) > tol {
                return Err(ObservableError::InvalidTriple(format!("{name} does not square to identity")));
            }
        }
        for (name, a, b) in [("X,Y", &x, &y), ("Y,Z", &y, &z), ("X,Z", &x, &z)] {
            if a.anticommutator(b).max_abs() > tol {
                return Err(ObservableError::InvalidTriple(format!("{{{name}}} does not vanish")));
            }
        }
        Ok(Self { x, y, z })
    }

    pub fn x(&self) -> &ComplexMatrix {
        &self.x
    }

    pub fn y(&self) -> &ComplexMatrix {
        &self.y
    }

    pub fn z(&self) -> &ComplexMatrix {
        &self.z
    }

    /// +1 when X Y = i Z (right-handed, as for the Pauli matrices), -1 otherwise.
    pub fn orientation(&self) -> i8 {
        let t = crate::qmat::trace_product(&self.x.mul(&self.y), &self.z);
        if t.im >= 0.0 {
            1
        } else {
            -1
        }
    }

    /// The triple `u (X, Y, Z) u^dagger`.
    pub fn rotated(&self, u: &ComplexMatrix) -> Result<Self, ObservableError> {
        Self::new(self.x.conjugate_by(u), self.y.conjugate_by(u), self.z.conjugate_by(u), 1e-9)
    }

    /// Same triple with Y negated, which reverses the orientation.
    pub fn with_y_negated(&self) -> Self {
        Self { x: self.x.clone(), y: self.y.scale_real(-1.0), z: self.z.clone() }
    }

    pub fn is_pauli(&self, tol: f64) -> bool {
        self.x.max_abs_diff(&pauli::x()) <= tol && self.y.max_abs_diff(&pauli::y()) <= tol && self.z.max_abs_diff(&pauli::z()) <= tol
    }
}

pub fn pauli_triple() -> LocalTriple {
    LocalTriple { x: pauli::x(), y: pauli::y(), z: pauli::z() }
}

/// The four operators attached to one label x.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadruple {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub z: ComplexMatrix,
    pub i: ComplexMatrix,
}

/// The recursively generated operators X_x, Y_x, Z_x, I_x for x in 0..2^(N-1).
/// Quadruples are built on demand from the per-qubit triples.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFamily {
    triples: Vec<LocalTriple>,
}

impl OperatorFamily {
    pub fn n_qubits(&self) -> usize {
        self.triples.len()
    }

    pub fn triples(&self) -> &[LocalTriple] {
        &self.triples
    }

    pub fn labels(&self) -> usize {
        1 << (self.triples.len() - 1)
    }

    pub fn is_pauli(&self, tol: f64) -> bool {
        self.triples.iter().all(|t| t.is_pauli(tol))
    }

    /// The quadruple for label x. The newest qubit is prepended on the left,
    /// so the recursion starts from the last qubit.
    pub fn quadruple(&self, x: usize) -> Result<Quadruple, ObservableError> {
        let n = self.n_qubits();
        if x >= self.labels() {
            return Err(ObservableError::Label { x, n });
        }
        let last = &self.triples[n - 1];
        let mut q = Quadruple { x: last.x.clone(), y: last.y.clone(), z: last.z.clone(), i: pauli::identity() };
        let id = pauli::identity();
        let half = C64::new(0.5, 0.0);
        for m in 2..=n {
            let t = &self.triples[n - m];
            let odd = (x >> (n - m)) & 1 == 1;
            let sign = if odd { -1.0 } else { 1.0 };
            let s = C64::new(sign, 0.0);
            let nx = t.x.kron(&q.x).sub(&t.y.kron(&q.y).scale(s)).scale(half);
            let ny = t.y.kron(&q.x).add(&t.x.kron(&q.y).scale(s)).scale(half);
            let nz = t.z.kron(&q.i).add(&id.kron(&q.z).scale(s)).scale(half);
            let ni = id.kron(&q.i).add(&t.z.kron(&q.z).scale(s)).scale(half);
            q = Quadruple { x: nx, y: ny, z: nz, i: ni };
        }
        Ok(q)
    }

    pub fn quadruples(&self) -> Result<Vec<Quadruple>, ObservableError> {
        (0..self.labels()).map(|x| self.quadruple(x)).collect()
    }
}

fn check_triple_count(triples: &[LocalTriple]) -> Result<(), ObservableError> {
    if triples.len() < 2 {
        return Err(ObservableError::TooFewQubits { n: triples.len(), min: 2 });
    }
    if triples.len() > 8 {
        return Err(ObservableError::TripleCount { expected: 8, got: triples.len() });
    }
    Ok(())
}

/// Build the family from one triple per qubit. Every triple must be
/// right-handed (orientation +1).
pub fn build_family(triples: Vec<LocalTriple>) -> Result<OperatorFamily, ObservableError> {
    check_triple_count(&triples)?;
    for (qubit, t) in triples.iter().enumerate() {
        let orientation = t.orientation();
        if orientation != 1 {
            return Err(ObservableError::Orientation { qubit, orientation });
        }
    }
    Ok(OperatorFamily { triples })
}

/// Build a family without the orientation requirement. Only for diagnosing
/// what breaks when orientations differ; criteria reject such families.
pub fn build_family_any_orientation(triples: Vec<LocalTriple>) -> Result<OperatorFamily, ObservableError> {
    check_triple_count(&triples)?;
    Ok(OperatorFamily { triples })
}

pub fn pauli_family(n: usize) -> Result<OperatorFamily, ObservableError> {
    build_family(vec![pauli_triple(); n])
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub n_qubits: usize,
    pub anticommutation_residue: f64,
    pub square_residue: f64,
    pub commutator_residue: f64,
    pub spin_identity_excess: f64,
    pub pure_saturation_residue: f64,
    pub sampled_states: usize,
    pub anticommutation_ok: bool,
    pub squares_ok: bool,
    pub commutator_ok: bool,
    pub spin_identity_ok: bool,
    pub saturation_ok: bool,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.anticommutation_ok && self.squares_ok && self.commutator_ok && self.spin_identity_ok && self.saturation_ok
    }
}

/// Verify the algebraic relations of a family and the spin identity
/// <X>^2 + <Y>^2 + <Z>^2 <= <I>^2 on `samples` random mixed states and the same
/// number of random pure product states.
pub fn check_family(family: &OperatorFamily, samples: usize, tol: f64) -> Result<FamilyReport, ObservableError> {
    let n = family.n_qubits();
    let quads = family.quadruples()?;
    let two_i = C64::new(0.0, 2.0);

    let mut anti: f64 = 0.0;
    let mut square: f64 = 0.0;
    let mut comm: f64 = 0.0;
    let xy: Vec<&ComplexMatrix> = quads.iter().flat_map(|q| [&q.x, &q.y]).collect();
    for a in 0..xy.len() {
        for b in (a + 1)..xy.len() {
            anti = anti.max(xy[a].anticommutator(xy[b]).max_abs());
        }
    }
    for q in &quads {
        for m in [&q.x, &q.y, &q.z, &q.i] {
            square = square.max(m.mul(m).max_abs_diff(&q.i));
        }
        comm = comm.max(q.x.commutator(&q.y).max_abs_diff(&q.z.scale(two_i)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + n as u64);
    let mut excess = f64::NEG_INFINITY;
    let mut saturation: f64 = 0.0;
    for s in 0..samples {
        let rank = 1 + s % 3;
        let mixed = sampling::random_density(n, rank, &mut rng)?;
        let product = sampling::random_product_state(n, &mut rng)?.projector();
        for q in &quads {
            let spin = |rho: &DensityMatrix| -> Result<f64, QmatError> {
                let ex = expectation(rho, &q.x)?;
                let ey = expectation(rho, &q.y)?;
                let ez = expectation(rho, &q.z)?;
                let ei = expectation(rho, &q.i)?;
                Ok(ex * ex + ey * ey + ez * ez - ei * ei)
            };
            excess = excess.max(spin(&mixed)?);
            saturation = saturation.max(spin(&product)?.abs());
        }
    }
    if samples == 0 {
        excess = 0.0;
    }
    Ok(FamilyReport {
        n_qubits: n,
        anticommutation_residue: anti,
        square_residue: square,
        commutator_residue: comm,
        spin_identity_excess: excess,
        pure_saturation_residue: saturation,
        sampled_states: samples,
        anticommutation_ok: anti <= tol,
        squares_ok: square <= tol,
        commutator_ok: comm <= tol,
        spin_identity_ok: excess <= tol,
        saturation_ok: saturation <= 1e-10_f64.max(tol),
    })
}

/// Mermin operator M and its partner M' (X and Y interchanged), built from
/// the two-qubit base XX + XY + YX - YY by appending one qubit at a time on
/// the right.
pub fn mermin_operator(n: usize, triples: &[LocalTriple]) -> Result<(ComplexMatrix, ComplexMatrix), ObservableError> {
    if n < 2 {
        return Err(ObservableError::TooFewQubits { n, min: 2 });
    }
    if triples.len() != n {
        return Err(ObservableError::TripleCount { expected: n, got: triples.len() });
    }
    let (a, b) = (&triples[0], &triples[1]);
    let mut m = a.x.kron(&b.x).add(&a.x.kron(&b.y)).add(&a.y.kron(&b.x)).sub(&a.y.kron(&b.y));
    let mut mp = a.y.kron(&b.y).add(&a.y.kron(&b.x)).add(&a.x.kron(&b.y)).sub(&a.x.kron(&b.x));
    for t in &triples[2..] {
        let plus = t.x.add(&t.y);
        let minus = t.x.sub(&t.y);
        let next_m = m.kron(&plus).add(&mp.kron(&minus)).scale_real(0.5);
        let next_mp = mp.kron(&plus).sub(&m.kron(&minus)).scale_real(0.5);
        m = next_m;
        mp = next_mp;
    }
    Ok((m, mp))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub fn observable(&self) -> ComplexMatrix {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        pauli::x().scale_real(st * cp).add(&pauli::y().scale_real(st * sp)).add(&pauli::z().scale_real(ct))
    }
}

/// A product of single-qubit observables measured in one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementSetting {
    pub label: String,
    pub angles: Vec<BlochAngles>,
}

impl MeasurementSetting {
    pub fn n_qubits(&self) -> usize {
        self.angles.len()
    }

    pub fn observables(&self) -> Vec<ComplexMatrix> {
        self.angles.iter().map(BlochAngles::observable).collect()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        pauli::kron_all(&self.observables())
    }
}

fn equatorial_setting(label: String, n: usize, phi: f64) -> MeasurementSetting {
    MeasurementSetting { label, angles: vec![BlochAngles { theta: PI / 2.0, phi }; n] }
}

/// (cos(l pi/N) sigma_x + sin(l pi/N) sigma_y) on every qubit.
pub fn settings_real(n: usize, l: usize) -> Result<MeasurementSetting, ObservableError> {
    if l == 0 || l > n {
        return Err(ObservableError::SettingIndex { l, n });
    }
    Ok(equatorial_setting(format!("M_{l}"), n, l as f64 * PI / n as f64))
}

/// As [`settings_real`] with angle (l pi + pi/2)/N.
pub fn settings_imag(n: usize, l: usize) -> Result<MeasurementSetting, ObservableError> {
    if l == 0 || l > n {
        return Err(ObservableError::SettingIndex { l, n });
    }
    Ok(equatorial_setting(format!("Mt_{l}"), n, (l as f64 * PI + PI / 2.0) / n as f64))
}

pub fn sigma_z_setting(n: usize) -> MeasurementSetting {
    MeasurementSetting { label: "Z".into(), angles: vec![BlochAngles { theta: 0.0, phi: 0.0 }; n] }
}

fn wrap_angle(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Conjugate by U_j, which applies sigma_x to every qubit whose bit in j-1
/// (N bits, qubit 0 first) is 1. Row j = 1 is the identity.
pub fn rotate_setting(setting: &MeasurementSetting, j: usize) -> Result<MeasurementSetting, ObservableError> {
    let n = setting.n_qubits();
    let max = 1usize << n;
    if j == 0 || j > max {
        return Err(ObservableError::RowIndex { j, max });
    }
    let bits = j - 1;
    let angles = setting
        .angles
        .iter()
        .enumerate()
        .map(|(q, a)| if bits >> (n - 1 - q) & 1 == 1 { BlochAngles { theta: PI - a.theta, phi: wrap_angle(-a.phi) } } else { *a })
        .collect();
    let label = if bits == 0 { setting.label.clone() } else { format!("U_{j}({})", setting.label) };
    Ok(MeasurementSetting { label, angles })
}

/// The local unitary U_j itself.
pub fn row_rotation(n: usize, j: usize) -> Result<ComplexMatrix, ObservableError> {
    let max = 1usize << n;
    if j == 0 || j > max {
        return Err(ObservableError::RowIndex { j, max });
    }
    let factors: Vec<ComplexMatrix> =
        (0..n).map(|q| if (j - 1) >> (n - 1 - q) & 1 == 1 { pauli::x() } else { pauli::identity() }).collect();
    Ok(pauli::kron_all(&factors))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingsProfile {
    /// One target antidiagonal element known to be real.
    RealElement,
    /// One target antidiagonal element known to be imaginary.
    ImaginaryElement,
    /// One target antidiagonal element of unknown phase.
    GeneralElement,
    /// Every criterion for an unknown state.
    AllCriteria,
}

pub fn settings_count(n: usize, profile: SettingsProfile) -> usize {
    match profile {
        SettingsProfile::RealElement | SettingsProfile::ImaginaryElement => n + 1,
        SettingsProfile::GeneralElement => 2 * n + 1,
        SettingsProfile::AllCriteria => (1 << n) + 1,
    }
}

/// The settings for a profile. `target_row` selects the antidiagonal element
/// rho_{j, j-bar} (one-based row j) for single-element profiles.
pub fn settings_plan(n: usize, profile: SettingsProfile, target_row: usize) -> Result<Vec<MeasurementSetting>, ObservableError> {
    if n == 0 {
        return Err(ObservableError::TooFewQubits { n, min: 1 });
    }
    let mut plan = Vec::new();
    match profile {
        SettingsProfile::RealElement | SettingsProfile::ImaginaryElement | SettingsProfile::GeneralElement => {
            for l in 1..=n {
                if profile != SettingsProfile::ImaginaryElement {
                    plan.push(rotate_setting(&settings_real(n, l)?, target_row)?);
                }
                if profile != SettingsProfile::RealElement {
                    plan.push(rotate_setting(&settings_imag(n, l)?, target_row)?);
                }
            }
        }
        SettingsProfile::AllCriteria => {
            for word in 0..(1usize << n) {
                let angles = (0..n)
                    .map(|q| {
                        let phi = if word >> (n - 1 - q) & 1 == 1 { PI / 2.0 } else { 0.0 };
                        BlochAngles { theta: PI / 2.0, phi }
                    })
                    .collect();
                let label: String = (0..n).map(|q| if word >> (n - 1 - q) & 1 == 1 { 'Y' } else { 'X' }).collect();
                plan.push(MeasurementSetting { label, angles });
            }
        }
    }
    plan.push(sigma_z_setting(n));
    Ok(plan)
}

/// Index of the largest-modulus antidiagonal element as a one-based row in
/// the upper half.
pub fn strongest_row(rho: &DensityMatrix) -> usize {
    let n = rho.n_qubits();
    let d = rho.dim();
    let mut best = (0.0, 1);
    for x in 0..(1usize << (n - 1)) {
        let idx = antidiag_index(n, x).expect("label in range");
        let v = rho.entry(idx.row0(), d - 1 - idx.row0()).norm();
        if v > best.0 + 1e-12 {
            best = (v, idx.row());
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::PureState;

    fn ket(bits: &str) -> Vec<C64> {
        let n = bits.len();
        let idx = usize::from_str_radix(bits, 2).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 1 << n];
        v[idx] = C64::new(1.0, 0.0);
        v
    }

    fn flip_op(bits: &str) -> ComplexMatrix {
        let comp: String = bits.chars().map(|c| if c == '0' { '1' } else { '0' }).collect();
        ComplexMatrix::outer(&ket(bits), &ket(&comp)).add(&ComplexMatrix::outer(&ket(&comp), &ket(bits)))
    }

    #[test]
    fn pauli_triple_properties() {
        let t = pauli_triple();
        assert_eq!(t.orientation(), 1);
        let xy = t.x().mul(t.y());
        assert!(xy.max_abs_diff(&t.z().scale(C64::new(0.0, 1.0))) < 1e-15);
        assert_eq!(t.with_y_negated().orientation(), -1);
        assert!(LocalTriple::new(pauli::x(), pauli::x(), pauli::z(), 1e-9).is_err());
    }

    #[test]
    fn family_small_cases() {
        let f2 = pauli_family(2).unwrap();
        assert!(f2.quadruple(0).unwrap().x.max_abs_diff(&flip_op("00")) < 1e-15);
        assert!(f2.quadruple(1).unwrap().x.max_abs_diff(&flip_op("01")) < 1e-15);
        let f3 = pauli_family(3).unwrap();
        assert!(f3.quadruple(0).unwrap().x.max_abs_diff(&flip_op("000")) < 1e-15);
        for n in 2..=5 {
            let f = pauli_family(n).unwrap();
            let zeros = "0".repeat(n);
            let ones = "1".repeat(n);
            let i0 = ComplexMatrix::outer(&ket(&zeros), &ket(&zeros)).add(&ComplexMatrix::outer(&ket(&ones), &ket(&ones)));
            assert!(f.quadruple(0).unwrap().i.max_abs_diff(&i0) < 1e-15);
        }
    }

    #[test]
    fn flip_operators_follow_antidiagonal_bitstrings() {
        for n in 2..=5 {
            let f = pauli_family(n).unwrap();
            for x in 0..f.labels() {
                let bits = antidiag_index(n, x).unwrap().bitstring().to_string();
                let q = f.quadruple(x).unwrap();
                assert!(q.x.max_abs_diff(&flip_op(&bits)) < 1e-14, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn two_qubit_family_matches_explicit_products() {
        let f = pauli_family(2).unwrap();
        let (x, y, z, i) = (pauli::x(), pauli::y(), pauli::z(), pauli::identity());
        let q0 = f.quadruple(0).unwrap();
        let q1 = f.quadruple(1).unwrap();
        let h = 0.5;
        assert!(q0.x.max_abs_diff(&x.kron(&x).sub(&y.kron(&y)).scale_real(h)) < 1e-15);
        assert!(q1.x.max_abs_diff(&x.kron(&x).add(&y.kron(&y)).scale_real(h)) < 1e-15);
        assert!(q0.y.max_abs_diff(&y.kron(&x).add(&x.kron(&y)).scale_real(h)) < 1e-15);
        assert!(q1.y.max_abs_diff(&y.kron(&x).sub(&x.kron(&y)).scale_real(h)) < 1e-15);
        assert!(q0.z.max_abs_diff(&z.kron(&i).add(&i.kron(&z)).scale_real(h)) < 1e-15);
        assert!(q1.z.max_abs_diff(&z.kron(&i).sub(&i.kron(&z)).scale_real(h)) < 1e-15);
        assert!(q0.i.max_abs_diff(&i.kron(&i).add(&z.kron(&z)).scale_real(h)) < 1e-15);
        assert!(q1.i.max_abs_diff(&i.kron(&i).sub(&z.kron(&z)).scale_real(h)) < 1e-15);
    }

    #[test]
    fn family_rejects_mixed_orientation() {
        let t = vec![pauli_triple(), pauli_triple().with_y_negated(), pauli_triple()];
        assert!(matches!(build_family(t.clone()), Err(ObservableError::Orientation { qubit: 1, .. })));
        assert!(build_family_any_orientation(t).is_ok());
        assert!(matches!(build_family(vec![pauli_triple()]), Err(ObservableError::TooFewQubits { .. })));
    }

    #[test]
    fn flipped_orientation_breaks_only_the_commutator() {
        let t = vec![pauli_triple().with_y_negated(), pauli_triple()];
        let f = build_family_any_orientation(t).unwrap();
        let report = check_family(&f, 5, 1e-9).unwrap();
        assert!(report.anticommutation_ok);
        assert!(!report.commutator_ok);
    }

    #[test]
    fn pauli_families_pass_checks() {
        for n in 2..=4 {
            let r = check_family(&pauli_family(n).unwrap(), 20, 1e-9).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn rotated_triples_pass_checks() {
        let theta: f64 = 0.7;
        let u = ComplexMatrix::new(
            2,
            2,
            vec![C64::new(theta.cos(), 0.0), C64::new(0.0, -theta.sin()), C64::new(0.0, -theta.sin()), C64::new(theta.cos(), 0.0)],
        )
        .unwrap();
        let t = pauli_triple().rotated(&u).unwrap();
        assert_eq!(t.orientation(), 1);
        let f = build_family(vec![t.clone(), pauli_triple(), t]).unwrap();
        assert!(check_family(&f, 10, 1e-9).unwrap().passed());
    }

    #[test]
    fn mermin_base_cases() {
        let p = vec![pauli_triple(); 3];
        let (x, y) = (pauli::x(), pauli::y());
        let (m2, _) = mermin_operator(2, &p[..2]).unwrap();
        let expect2 = x.kron(&x).add(&x.kron(&y)).add(&y.kron(&x)).sub(&y.kron(&y));
        assert!(m2.max_abs_diff(&expect2) < 1e-15);
        let (m3, _) = mermin_operator(3, &p).unwrap();
        let k3 = |a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix| a.kron(b).kron(c);
        let expect3 = k3(&x, &x, &y).add(&k3(&y, &x, &x)).add(&k3(&x, &y, &x)).sub(&k3(&y, &y, &y));
        assert!(m3.max_abs_diff(&expect3) < 1e-15);
    }

    #[test]
    fn setting_sums_reproduce_family_operators() {
        for n in 1..=4 {
            let mut sx = ComplexMatrix::zeros(1 << n, 1 << n);
            let mut sy = sx.clone();
            for l in 1..=n {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                sx = sx.add(&settings_real(n, l).unwrap().matrix().scale_real(sign));
                sy = sy.add(&settings_imag(n, l).unwrap().matrix().scale_real(sign));
            }
            let zeros = "0".repeat(n);
            let x0 = flip_op(&zeros);
            assert!(sx.max_abs_diff(&x0.scale_real(n as f64)) < 1e-10);
            if n >= 2 {
                let y0 = pauli_family(n).unwrap().quadruple(0).unwrap().y;
                assert!(sy.max_abs_diff(&y0.scale_real(n as f64)) < 1e-10);
            }
        }
        let m = settings_real(1, 1).unwrap().matrix();
        assert!(m.max_abs_diff(&pauli::x().scale_real(-1.0)) < 1e-15);
        assert!(settings_real(3, 0).is_err() && settings_imag(3, 4).is_err());
    }

    #[test]
    fn row_rotation_bits() {
        let u = row_rotation(4, 6).unwrap();
        let (i, x) = (pauli::identity(), pauli::x());
        assert!(u.max_abs_diff(&i.kron(&x).kron(&i).kron(&x)) < 1e-15);
        assert_eq!(row_rotation(3, 1).unwrap(), ComplexMatrix::identity(8));
        assert!(row_rotation(2, 5).is_err());
        let s = settings_real(3, 2).unwrap();
        assert_eq!(rotate_setting(&s, 1).unwrap().angles, s.angles);
    }

    #[test]
    fn rotated_settings_track_conjugation() {
        for j in 1..=16 {
            let u = row_rotation(4, j).unwrap();
            for l in 1..=4 {
                let s = settings_real(4, l).unwrap();
                let direct = s.matrix().conjugate_by(&u);
                assert!(rotate_setting(&s, j).unwrap().matrix().max_abs_diff(&direct) < 1e-12);
            }
        }
    }

    #[test]
    fn settings_counts() {
        assert_eq!(settings_count(4, SettingsProfile::RealElement), 5);
        assert_eq!(settings_count(4, SettingsProfile::GeneralElement), 9);
        assert_eq!(settings_count(4, SettingsProfile::AllCriteria), 17);
        for p in
            [SettingsProfile::RealElement, SettingsProfile::ImaginaryElement, SettingsProfile::GeneralElement, SettingsProfile::AllCriteria]
        {
            assert_eq!(settings_plan(4, p, 1).unwrap().len(), settings_count(4, p));
        }
    }

    #[test]
    fn strongest_row_of_ghz() {
        let s = 1.0 / 2f64.sqrt();
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[0] = C64::new(s, 0.0);
        amps[7] = C64::new(s, 0.0);
        let rho = PureState::new(3, amps, 1e-12).unwrap().projector();
        assert_eq!(strongest_row(&rho), 1);
    }
}
