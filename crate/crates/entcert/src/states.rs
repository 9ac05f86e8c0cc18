//! Named states, the GHZ-diagonal family and single-qubit noise channels.

use crate::qmat::{pauli, validate_density, ComplexMatrix, DensityMatrix, PureState, QmatError, C64, VALIDATION_TOL};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("unknown state '{0}'")]
    UnknownName(String),
    #[error("unknown parameter '{key}' for state '{name}'")]
    UnknownParam { name: String, key: String },
    #[error("missing parameter '{key}' for state '{name}'")]
    MissingParam { name: String, key: String },
    #[error("invalid value '{value}' for parameter '{key}': {reason}")]
    InvalidParam { key: String, value: String, reason: String },
    #[error("noise strength p={0} outside [0, 1]")]
    Probability(f64),
    #[error("unknown noise channel '{0}'")]
    UnknownChannel(String),
    #[error("GHZ-diagonal weights invalid: {0}")]
    Weights(String),
    #[error(transparent)]
    Matrix(#[from] QmatError),
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn check_n(n: usize, min: usize) -> Result<(), StateError> {
    if n < min || n > 8 {
        return Err(StateError::InvalidParam { key: "n".into(), value: n.to_string(), reason: format!("need {min} <= n <= 8") });
    }
    Ok(())
}

/// (|0...0> + e^{i alpha} |1...1>)/sqrt(2).
pub fn ghz(n: usize, alpha: f64) -> Result<PureState, StateError> {
    check_n(n, 1)?;
    let mut amps = vec![zero(); 1 << n];
    amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[(1 << n) - 1] = C64::from_polar(FRAC_1_SQRT_2, alpha);
    Ok(PureState::new(n, amps, VALIDATION_TOL)?)
}

/// (|j0> + sign |j'1>)/sqrt(2) for an (N-1)-bit string j, j' its complement.
pub fn ghz_basis(n: usize, j: usize, plus: bool) -> Result<PureState, StateError> {
    check_n(n, 2)?;
    let half = 1usize << (n - 1);
    if j >= half {
        return Err(StateError::InvalidParam { key: "j".into(), value: j.to_string(), reason: format!("need j < {half}") });
    }
    let jp = !j & (half - 1);
    let mut amps = vec![zero(); 1 << n];
    amps[j << 1] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[(jp << 1) | 1] = C64::new(if plus { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 }, 0.0);
    Ok(PureState::new(n, amps, VALIDATION_TOL)?)
}

/// States diagonal in the GHZ basis with equal weight on |psi_j^+> and |psi_j^->
/// for j != 0: lambda0_plus + lambda0_minus + 2 sum_j lambda_j = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GHZDiagonalState {
    pub n_qubits: usize,
    pub lambda0_plus: f64,
    pub lambda0_minus: f64,
    /// `lambdas[j - 1]` is lambda_j for j = 1..2^(N-1)-1.
    pub lambdas: Vec<f64>,
}

impl GHZDiagonalState {
    pub fn new(n: usize, lambda0_plus: f64, lambda0_minus: f64, lambdas: Vec<f64>, tol: f64) -> Result<Self, StateError> {
        check_n(n, 2)?;
        let expected = (1usize << (n - 1)) - 1;
        if lambdas.len() != expected {
            return Err(StateError::Weights(format!("expected {expected} values of lambda_j, got {}", lambdas.len())));
        }
        if lambda0_plus < -tol || lambda0_minus < -tol || lambdas.iter().any(|&l| l < -tol) {
            return Err(StateError::Weights("negative weight".into()));
        }
        let total = lambda0_plus + lambda0_minus + 2.0 * lambdas.iter().sum::<f64>();
        if (total - 1.0).abs() > tol {
            return Err(StateError::Weights(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { n_qubits: n, lambda0_plus, lambda0_minus, lambdas })
    }

    pub fn lambda(&self, j: usize) -> f64 {
        self.lambdas[j - 1]
    }

    pub fn density(&self) -> DensityMatrix {
        let n = self.n_qubits;
        let d = 1usize << n;
        let mut m = ComplexMatrix::zeros(d, d);
        let (a, b) = (0usize, d - 1);
        let s = (self.lambda0_plus + self.lambda0_minus) / 2.0;
        let c = (self.lambda0_plus - self.lambda0_minus) / 2.0;
        m.set(a, a, C64::new(s, 0.0));
        m.set(b, b, C64::new(s, 0.0));
        m.set(a, b, C64::new(c, 0.0));
        m.set(b, a, C64::new(c, 0.0));
        let half = 1usize << (n - 1);
        for j in 1..half {
            let jp = !j & (half - 1);
            let l = C64::new(self.lambdas[j - 1], 0.0);
            m.set(j << 1, j << 1, l);
            m.set((jp << 1) | 1, (jp << 1) | 1, l);
        }
        DensityMatrix::from_trusted(m, n)
    }
}

/// Twirl into the GHZ-diagonal family, keeping lambda0^+-, and averaging the
/// +- weights for every j != 0.
pub fn dc_depolarize(rho: &DensityMatrix) -> Result<GHZDiagonalState, StateError> {
    let n = rho.n_qubits();
    check_n(n, 2)?;
    let weight = |j: usize, plus: bool| -> Result<f64, StateError> {
        let psi = ghz_basis(n, j, plus)?;
        let v = rho.matrix().mul(&ComplexMatrix::new(1 << n, 1, psi.amplitudes().to_vec())?);
        Ok(psi.amplitudes().iter().zip(v.data()).map(|(a, b)| a.conj() * b).sum::<C64>().re)
    };
    let lambda0_plus = weight(0, true)?;
    let lambda0_minus = weight(0, false)?;
    let half = 1usize << (n - 1);
    let lambdas = (1..half).map(|j| Ok((weight(j, true)? + weight(j, false)?) / 2.0)).collect::<Result<Vec<_>, StateError>>()?;
    GHZDiagonalState::new(n, lambda0_plus, lambda0_minus, lambdas, 1e-7)
}

/// Whether rho already lies in the GHZ-diagonal family.
pub fn is_ghz_diagonal(rho: &DensityMatrix, tol: f64) -> Result<bool, StateError> {
    let dc = dc_depolarize(rho)?;
    Ok(dc.density().matrix().max_abs_diff(rho.matrix()) <= tol)
}

fn basis_projector(n: usize, index: usize) -> ComplexMatrix {
    let d = 1usize << n;
    let mut m = ComplexMatrix::zeros(d, d);
    m.set(index, index, C64::new(1.0, 0.0));
    m
}

/// Symmetric Dicke state with `l` excitations.
pub fn dicke(n: usize, l: usize) -> Result<PureState, StateError> {
    check_n(n, 1)?;
    if l > n {
        return Err(StateError::InvalidParam { key: "l".into(), value: l.to_string(), reason: format!("need l <= {n}") });
    }
    let amps = (0..1usize << n).map(|i| if i.count_ones() as usize == l { C64::new(1.0, 0.0) } else { zero() }).collect();
    Ok(PureState::normalized(n, amps)?)
}

pub fn w_state(n: usize) -> Result<PureState, StateError> {
    dicke(n, 1)
}

/// (|0011> + |1100> - (|01> + |10>)(|01> + |10>)/2)/sqrt(3).
pub fn four_singlet() -> PureState {
    let mut amps = vec![zero(); 16];
    amps[0b0011] = C64::new(1.0, 0.0);
    amps[0b1100] = C64::new(1.0, 0.0);
    for i in [0b0101, 0b0110, 0b1001, 0b1010] {
        amps[i] = C64::new(-0.5, 0.0);
    }
    PureState::normalized(4, amps).expect("non-zero vector")
}

fn bell_states() -> [PureState; 4] {
    let s = FRAC_1_SQRT_2;
    let mk = |a: usize, b: usize, sign: f64| {
        let mut amps = vec![zero(); 4];
        amps[a] = C64::new(s, 0.0);
        amps[b] = C64::new(sign * s, 0.0);
        PureState::new(2, amps, VALIDATION_TOL).expect("normalized")
    };
    [mk(0, 3, 1.0), mk(0, 3, -1.0), mk(1, 2, 1.0), mk(1, 2, -1.0)]
}

/// Four-qubit Smolin state: equal mixture of |Bell_j>_ab |Bell_j>_cd.
pub fn smolin() -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(16, 16);
    for b in bell_states() {
        let p = b.projector();
        m = m.add(&p.matrix().kron(p.matrix()).scale_real(0.25));
    }
    DensityMatrix::from_trusted(m, 4)
}

/// (|GHZ_alpha><GHZ_alpha| + (1/2) sum_l (P_l + Pbar_l))/(N+1), where P_l
/// projects on the string with a single 1 at qubit l.
pub fn bound_dur(n: usize, alpha: f64) -> Result<DensityMatrix, StateError> {
    check_n(n, 2)?;
    let d = 1usize << n;
    let mut m = ghz(n, alpha)?.projector().into_matrix();
    for l in 0..n {
        let idx = 1usize << (n - 1 - l);
        m = m.add(&basis_projector(n, idx).scale_real(0.5));
        m = m.add(&basis_projector(n, (d - 1) ^ idx).scale_real(0.5));
    }
    Ok(DensityMatrix::from_trusted(m.scale_real(1.0 / (n as f64 + 1.0)), n))
}

/// Three-qubit PPT entangled state: GHZ/3 plus 1/6 on |001>, |010>, |101>, |110>.
pub fn bound_3q() -> DensityMatrix {
    let mut m = ghz(3, 0.0).expect("n=3").projector().into_matrix().scale_real(1.0 / 3.0);
    for i in [0b001, 0b010, 0b101, 0b110] {
        m = m.add(&basis_projector(3, i).scale_real(1.0 / 6.0));
    }
    DensityMatrix::from_trusted(m, 3)
}

/// cos(theta)|0...0> + sin(theta)|1...1>.
pub fn theta_state(n: usize, theta: f64) -> Result<PureState, StateError> {
    check_n(n, 1)?;
    let mut amps = vec![zero(); 1 << n];
    amps[0] = C64::new(theta.cos(), 0.0);
    amps[(1 << n) - 1] += C64::new(theta.sin(), 0.0);
    Ok(PureState::new(n, amps, VALIDATION_TOL)?)
}

/// lambda0^+ |psi_0^+><psi_0^+| + lambda0^- |psi_0^-><psi_0^-| + sum_j lambda_j |j0><j0|
/// with the weights summing to one.
pub fn rho_prime(n: usize, lambda0_plus: f64, lambda0_minus: f64, lambdas: &[f64]) -> Result<DensityMatrix, StateError> {
    check_n(n, 2)?;
    let half = 1usize << (n - 1);
    if lambdas.len() != half - 1 {
        return Err(StateError::Weights(format!("expected {} values of lambda_j, got {}", half - 1, lambdas.len())));
    }
    if lambda0_plus < 0.0 || lambda0_minus < 0.0 || lambdas.iter().any(|&l| l < 0.0) {
        return Err(StateError::Weights("negative weight".into()));
    }
    let total = lambda0_plus + lambda0_minus + lambdas.iter().sum::<f64>();
    if (total - 1.0).abs() > 1e-9 {
        return Err(StateError::Weights(format!("weights sum to {total}, expected 1")));
    }
    let mut m = ghz_basis(n, 0, true)?.projector().into_matrix().scale_real(lambda0_plus);
    m = m.add(&ghz_basis(n, 0, false)?.projector().matrix().scale_real(lambda0_minus));
    for (j, &l) in (1..half).zip(lambdas) {
        m = m.add(&basis_projector(n, j << 1).scale_real(l));
    }
    Ok(validate_density(&m, n, VALIDATION_TOL)?)
}

/// The two three-qubit GHZ-diagonal states separable under exactly one
/// bipartite split: a-(bc) (`first`) or c-(ab).
pub fn rho3_member(first: bool) -> GHZDiagonalState {
    let lambdas = if first { vec![0.0, 0.25, 0.0] } else { vec![0.0, 0.0, 0.25] };
    GHZDiagonalState::new(3, 0.5, 0.0, lambdas, 1e-12).expect("valid weights")
}

pub fn rho3_mix(alpha: f64) -> Result<DensityMatrix, StateError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(StateError::InvalidParam { key: "alpha".into(), value: alpha.to_string(), reason: "need 0 <= alpha <= 1".into() });
    }
    let a = rho3_member(true);
    let b = rho3_member(false);
    let mix =
        GHZDiagonalState::new(3, 0.5, 0.0, a.lambdas.iter().zip(&b.lambdas).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect(), 1e-12)?;
    Ok(mix.density())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    White,
    Colored,
    Depolarize,
    Dephase,
    Dissipate,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 5] = [NoiseKind::White, NoiseKind::Colored, NoiseKind::Depolarize, NoiseKind::Dephase, NoiseKind::Dissipate];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::White => "white",
            NoiseKind::Colored => "colored",
            NoiseKind::Depolarize => "depolarize",
            NoiseKind::Dephase => "dephase",
            NoiseKind::Dissipate => "dissipate",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NoiseKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| StateError::UnknownChannel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseChannel {
    pub kind: NoiseKind,
    pub p: f64,
}

impl NoiseChannel {
    pub fn new(kind: NoiseKind, p: f64) -> Result<Self, StateError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(StateError::Probability(p));
        }
        Ok(Self { kind, p })
    }
}

/// Single-qubit Kraus operators for the three decoherence channels.
pub fn kraus_operators(kind: NoiseKind, p: f64) -> Option<Vec<ComplexMatrix>> {
    let c = |v: f64| C64::new(v, 0.0);
    match kind {
        NoiseKind::White | NoiseKind::Colored => None,
        NoiseKind::Depolarize => Some(vec![
            pauli::identity().scale_real((1.0 - 0.75 * p).sqrt()),
            pauli::x().scale_real((p / 4.0).sqrt()),
            pauli::y().scale_real((p / 4.0).sqrt()),
            pauli::z().scale_real((p / 4.0).sqrt()),
        ]),
        NoiseKind::Dephase => Some(vec![
            pauli::identity().scale_real((1.0 - p).sqrt()),
            pauli::projector(0).scale_real(p.sqrt()),
            pauli::projector(1).scale_real(p.sqrt()),
        ]),
        NoiseKind::Dissipate => Some(vec![
            ComplexMatrix::diagonal(&[c(1.0), c((1.0 - p).sqrt())]),
            ComplexMatrix::new(2, 2, vec![c(0.0), c(p.sqrt()), c(0.0), c(0.0)]).expect("2x2"),
        ]),
    }
}

/// sum_K K rho K^dagger with each K acting on `qubit` only.
pub fn apply_local_kraus(m: &ComplexMatrix, n: usize, qubit: usize, kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let d = 1usize << n;
    let bit = 1usize << (n - 1 - qubit);
    let mut out = ComplexMatrix::zeros(d, d);
    for r in (0..d).filter(|r| r & bit == 0) {
        for c in (0..d).filter(|c| c & bit == 0) {
            let idx = [[(r, c), (r, c | bit)], [(r | bit, c), (r | bit, c | bit)]];
            let block = [[m.get(r, c), m.get(r, c | bit)], [m.get(r | bit, c), m.get(r | bit, c | bit)]];
            let mut acc = [[zero(); 2]; 2];
            for k in kraus {
                for (a, row) in acc.iter_mut().enumerate() {
                    for (b, cell) in row.iter_mut().enumerate() {
                        let mut s = zero();
                        for x in 0..2 {
                            for y in 0..2 {
                                s += k.get(a, x) * block[x][y] * k.get(b, y).conj();
                            }
                        }
                        *cell += s;
                    }
                }
            }
            for a in 0..2 {
                for b in 0..2 {
                    let (i, j) = idx[a][b];
                    out.set(i, j, acc[a][b]);
                }
            }
        }
    }
    out
}

pub fn apply_channel(rho: &DensityMatrix, channel: &NoiseChannel) -> Result<DensityMatrix, StateError> {
    let NoiseChannel { kind, p } = *channel;
    if !(0.0..=1.0).contains(&p) {
        return Err(StateError::Probability(p));
    }
    let n = rho.n_qubits();
    let d = rho.dim();
    let m = match kind {
        NoiseKind::White => rho.matrix().scale_real(1.0 - p).add(&ComplexMatrix::identity(d).scale_real(p / d as f64)),
        NoiseKind::Colored => {
            let corners = basis_projector(n, 0).add(&basis_projector(n, d - 1));
            rho.matrix().scale_real(1.0 - p).add(&corners.scale_real(p / 2.0))
        }
        _ => {
            let kraus = kraus_operators(kind, p).expect("decoherence channel");
            let mut m = rho.matrix().clone();
            for q in 0..n {
                m = apply_local_kraus(&m, n, q, &kraus);
            }
            m
        }
    };
    Ok(DensityMatrix::from_trusted(m, n).with_tolerance(rho.tolerance()))
}

/// Conjugate every qubit by exp(-i angle sigma_x / 2).
pub fn x_rotate_all(rho: &DensityMatrix, angle: f64) -> DensityMatrix {
    let (s, c) = (angle / 2.0).sin_cos();
    let u = ComplexMatrix::new(2, 2, vec![C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)]).expect("2x2");
    let n = rho.n_qubits();
    let mut m = rho.matrix().clone();
    for q in 0..n {
        m = apply_local_kraus(&m, n, q, std::slice::from_ref(&u));
    }
    DensityMatrix::from_trusted(m, n).with_tolerance(rho.tolerance())
}

/// Parameters of a named state, as key=value strings. Every key must be used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateParams(pub BTreeMap<String, String>);

impl StateParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }
}

struct ParamReader<'a> {
    name: &'a str,
    params: &'a StateParams,
    used: Vec<&'a str>,
}

impl<'a> ParamReader<'a> {
    fn raw(&mut self, key: &'a str) -> Option<&'a str> {
        let v = self.params.0.get(key)?;
        self.used.push(key);
        Some(v.as_str())
    }

    fn invalid(key: &str, value: &str, reason: &str) -> StateError {
        StateError::InvalidParam { key: key.into(), value: value.into(), reason: reason.into() }
    }

    fn float(&mut self, key: &'a str) -> Result<Option<f64>, StateError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| Self::invalid(key, v, "expected a finite number")),
        }
    }

    fn angle(&mut self, key: &'a str) -> Result<Option<f64>, StateError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let t = v.trim();
        let value = if let Some(mult) = t.strip_suffix("pi") {
            let mult = mult.trim().trim_end_matches('*');
            let (num, den) = match mult.split_once('/') {
                Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()),
                None => (mult, Some(1.0)),
            };
            let num = match num {
                "" => Some(1.0),
                "-" => Some(-1.0),
                s => s.parse::<f64>().ok(),
            };
            num.zip(den).map(|(a, b)| a * PI / b)
        } else if let Some((a, b)) = t.strip_prefix("pi/").map(|b| ("1", b)) {
            a.parse::<f64>().ok().zip(b.trim().parse::<f64>().ok()).map(|(a, b)| a * PI / b)
        } else {
            t.parse::<f64>().ok()
        };
        value.filter(|x| x.is_finite()).map(Some).ok_or_else(|| Self::invalid(key, v, "expected radians, e.g. 0.3, pi/4 or 0.25pi"))
    }

    fn count(&mut self, key: &'a str) -> Result<Option<usize>, StateError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.trim().parse::<usize>().map(Some).map_err(|_| Self::invalid(key, v, "expected a non-negative integer")),
        }
    }

    fn flag(&mut self, key: &'a str) -> Result<bool, StateError> {
        match self.raw(key) {
            None => Ok(false),
            Some(v) => match v.trim() {
                "true" | "1" | "yes" | "" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Self::invalid(key, v, "expected true or false")),
            },
        }
    }

    fn list(&mut self, key: &'a str) -> Result<Option<Vec<f64>>, StateError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Self::invalid(key, v, "expected comma-separated numbers")))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    fn require<T>(&self, key: &str, v: Option<T>) -> Result<T, StateError> {
        v.ok_or_else(|| StateError::MissingParam { name: self.name.into(), key: key.into() })
    }

    fn finish(&self) -> Result<(), StateError> {
        for key in self.params.0.keys() {
            if !self.used.contains(&key.as_str()) {
                return Err(StateError::UnknownParam { name: self.name.into(), key: key.clone() });
            }
        }
        Ok(())
    }
}

pub const NAMED_STATES: [&str; 16] = [
    "ghz",
    "white",
    "product",
    "w",
    "dicke",
    "four_singlet",
    "smolin",
    "bound_dur",
    "bound_3q",
    "theta",
    "rho_prime",
    "rho3_i",
    "rho3_ii",
    "rho3_mix",
    "ghz_noisy",
    "bell",
];

/// Build a catalog state by name. Every catalog state accepts `rotated=true`,
/// which applies a 90 degree x-rotation to every qubit.
pub fn named_state(name: &str, params: &StateParams) -> Result<DensityMatrix, StateError> {
    let mut r = ParamReader { name, params, used: Vec::new() };
    let rho = match name {
        "ghz" => {
            let n = r.count("n")?.unwrap_or(3);
            ghz(n, r.angle("alpha")?.unwrap_or(0.0))?.projector()
        }
        "bell" => ghz(2, 0.0)?.projector(),
        "white" => {
            let n = r.count("n")?.unwrap_or(3);
            check_n(n, 1)?;
            DensityMatrix::maximally_mixed(n)
        }
        "product" => {
            let n = r.count("n")?.unwrap_or(3);
            check_n(n, 1)?;
            PureState::basis(n, 0)?.projector()
        }
        "w" => w_state(r.count("n")?.unwrap_or(3))?.projector(),
        "dicke" => {
            let n = r.count("n")?.unwrap_or(4);
            let l = r.count("l")?.unwrap_or(n / 2);
            dicke(n, l)?.projector()
        }
        "four_singlet" => four_singlet().projector(),
        "smolin" => smolin(),
        "bound_dur" => bound_dur(r.count("n")?.unwrap_or(4), r.angle("alpha")?.unwrap_or(0.0))?,
        "bound_3q" => bound_3q(),
        "theta" => {
            let n = r.count("n")?.unwrap_or(3);
            let theta = r.angle("theta")?;
            theta_state(n, r.require("theta", theta)?)?.projector()
        }
        "rho_prime" => {
            let n = r.count("n")?.unwrap_or(3);
            check_n(n, 2)?;
            let l0p = r.float("lambda0p")?;
            let l0p = r.require("lambda0p", l0p)?;
            let l0m = r.float("lambda0m")?.unwrap_or(0.0);
            let count = (1usize << (n - 1)) - 1;
            let lambdas = match r.list("lambdas")? {
                Some(v) => v,
                None => vec![(1.0 - l0p - l0m) / count as f64; count],
            };
            rho_prime(n, l0p, l0m, &lambdas)?
        }
        "rho3_i" => rho3_member(true).density(),
        "rho3_ii" => rho3_member(false).density(),
        "rho3_mix" => rho3_mix(r.float("alpha")?.unwrap_or(0.5))?,
        "ghz_noisy" => {
            let n = r.count("n")?.unwrap_or(3);
            let p = r.float("p")?.unwrap_or(0.0);
            let kind = match r.raw("noise") {
                Some(s) => s.parse()?,
                None => NoiseKind::White,
            };
            apply_channel(&ghz(n, 0.0)?.projector(), &NoiseChannel::new(kind, p)?)?
        }
        other => return Err(StateError::UnknownName(other.to_string())),
    };
    let rotated = r.flag("rotated")?;
    r.finish()?;
    let rho = validate_density(rho.matrix(), rho.n_qubits(), VALIDATION_TOL)?;
    Ok(if rotated { x_rotate_all(&rho, PI / 2.0) } else { rho })
}
