//! Noise thresholds p0 below which a criterion still detects the state, plus
//! the GHZ threshold grid and figure series.

use crate::criteria::{alpha_split_from, fidelity_from, ksep_per_label, CriteriaError, Quantities};
use crate::partitions::{enumerate_splits, solution_sets, PartitionError, SolutionSet, SplitLevel};
use crate::qmat::DensityMatrix;
use crate::states::{apply_channel, ghz, NoiseChannel, NoiseKind, StateError};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const BISECTION_STEPS: usize = 60;
pub const MONOTONE_SAMPLES: usize = 64;
pub const VERIFY_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobustnessError {
    #[error("criterion '{0}' is not violated at p=0")]
    NeverViolated(String),
    #[error("margin changes sign {changes} times over [0,1]; threshold is not unique")]
    NonMonotone { changes: usize },
    #[error("threshold p0={p0} failed verification at p0 +- {step}")]
    Verification { p0: f64, step: f64 },
    #[error("unknown criterion '{0}' (expected full, some, all-splits or fidelity)")]
    UnknownCriterion(String),
    #[error("unknown figure '{0}' (expected lhv-gap or ghz-noise)")]
    UnknownFigure(String),
    #[error("need N >= {min}, got {n}")]
    QubitCount { n: usize, min: usize },
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// What a threshold detects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobustCriterion {
    /// Strong biseparability condition: violation means full N-partite entanglement.
    Full,
    /// The single N-partite split with its numeric bound: violation means some entanglement.
    Some,
    /// Every bipartite split condition violated at once.
    AllSplits,
    /// Fidelity with the best generalized GHZ state.
    Fidelity,
}

impl RobustCriterion {
    pub const ALL: [RobustCriterion; 4] =
        [RobustCriterion::Full, RobustCriterion::Some, RobustCriterion::AllSplits, RobustCriterion::Fidelity];

    pub fn name(self) -> &'static str {
        match self {
            RobustCriterion::Full => "full",
            RobustCriterion::Some => "some",
            RobustCriterion::AllSplits => "all-splits",
            RobustCriterion::Fidelity => "fidelity",
        }
    }
}

impl fmt::Display for RobustCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RobustCriterion {
    type Err = RobustnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RobustCriterion::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| RobustnessError::UnknownCriterion(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Bisection,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::Bisection => "bisection",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub state: String,
    pub channel: NoiseKind,
    pub criterion: RobustCriterion,
    pub p0: f64,
    pub method: Method,
    pub bracket_width: f64,
    pub closed_form: Option<f64>,
    pub bisection: Option<f64>,
    /// Set when the criterion is already satisfied at p=0; p0 is then 0.
    pub never_violated: bool,
}

/// Margin evaluator with the split data for one qubit count cached.
pub struct MarginEvaluator {
    criterion: RobustCriterion,
    pairs: Option<SplitLevel>,
    full: Option<SolutionSet>,
    bipartite: Vec<SolutionSet>,
}

impl MarginEvaluator {
    pub fn new(n: usize, criterion: RobustCriterion) -> Result<Self, RobustnessError> {
        if n < 2 {
            return Err(RobustnessError::QubitCount { n, min: 2 });
        }
        let mut ev = Self { criterion, pairs: None, full: None, bipartite: Vec::new() };
        match criterion {
            RobustCriterion::Full => ev.pairs = Some(SplitLevel::new(n, 2)?),
            RobustCriterion::Some => ev.full = Some(solution_sets(&enumerate_splits(n, n)?.remove(0))?),
            RobustCriterion::AllSplits => ev.bipartite = enumerate_splits(n, 2)?.iter().map(solution_sets).collect::<Result<_, _>>()?,
            RobustCriterion::Fidelity => {}
        }
        Ok(ev)
    }

    /// Positive exactly when the criterion is violated (before tolerance).
    pub fn margin(&self, rho: &DensityMatrix) -> Result<f64, RobustnessError> {
        let q = Quantities::from_matrix(rho)?;
        let max_margin = |v: Vec<crate::criteria::CriterionVerdict>| v.iter().map(|v| v.margin).fold(f64::NEG_INFINITY, f64::max);
        Ok(match self.criterion {
            RobustCriterion::Full => max_margin(ksep_per_label(&q, self.pairs.as_ref().expect("cached"))),
            RobustCriterion::Some => max_margin(alpha_split_from(&q, self.full.as_ref().expect("cached"))),
            RobustCriterion::AllSplits => self.bipartite.iter().map(|s| max_margin(alpha_split_from(&q, s))).fold(f64::INFINITY, f64::min),
            RobustCriterion::Fidelity => fidelity_from(&q).margin,
        })
    }
}

/// Root of a margin that is positive at p=0, by sampling for a single sign
/// change and bisecting it. Returns (p0, bracket width).
pub fn bisect_threshold(mut margin: impl FnMut(f64) -> Result<f64, RobustnessError>, label: &str) -> Result<(f64, f64), RobustnessError> {
    let grid: Vec<f64> = (0..MONOTONE_SAMPLES).map(|i| i as f64 / (MONOTONE_SAMPLES - 1) as f64).collect();
    let signs: Vec<bool> = grid.iter().map(|&p| margin(p).map(|m| m > 0.0)).collect::<Result<_, _>>()?;
    if !signs[0] {
        return Err(RobustnessError::NeverViolated(label.to_string()));
    }
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if changes > 1 {
        return Err(RobustnessError::NonMonotone { changes });
    }
    if changes == 0 {
        return Ok((1.0, 0.0));
    }
    let first_off = signs.iter().position(|s| !s).expect("one sign change");
    let (mut lo, mut hi) = (grid[first_off - 1], grid[first_off]);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if margin(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), hi - lo))
}

fn verify(mut margin: impl FnMut(f64) -> Result<f64, RobustnessError>, p0: f64) -> Result<(), RobustnessError> {
    let below = p0 - VERIFY_STEP;
    let above = p0 + VERIFY_STEP;
    let ok_below = below < 0.0 || margin(below)? > 0.0;
    let ok_above = above > 1.0 || margin(above)? <= 0.0;
    if ok_below && ok_above {
        Ok(())
    } else {
        Err(RobustnessError::Verification { p0, step: VERIFY_STEP })
    }
}

/// Largest root in [0,1] of the pairwise white-noise condition
/// (1-p) a > sqrt(((1-p) d1 + p c)((1-p) d2 + p c)), with c = 1/dim.
fn pair_root(a: f64, d1: f64, d2: f64, c: f64) -> Option<f64> {
    // In u = 1 - p: u^2 (a^2 - al be) - u c (al + be) - c^2 = 0 with al = d1 - c, be = d2 - c.
    let (al, be) = (d1 - c, d2 - c);
    let qa = a * a - al * be;
    let qb = -c * (al + be);
    let qc = -c * c;
    let mut roots = Vec::new();
    if qa.abs() < 1e-15 {
        if qb.abs() > 1e-15 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let s = disc.sqrt();
            roots.push((-qb + s) / (2.0 * qa));
            roots.push((-qb - s) / (2.0 * qa));
        }
    }
    // Smallest u in (0,1] where the condition turns on gives the largest p.
    roots
        .into_iter()
        .filter(|u| *u > 0.0 && *u <= 1.0 + 1e-12)
        .filter(|u| {
            let t = (u + 1e-9).min(1.0);
            a * t > (((t * al + c) * (t * be + c)).max(0.0)).sqrt()
        })
        .fold(None, |best: Option<f64>, u| Some(best.map_or(u, |b| b.min(u))))
        .map(|u| (1.0 - u).clamp(0.0, 1.0))
}

/// Largest p with (1-p) a > limit, the numeric bound condition.
fn bound_root(a: f64, limit: f64) -> Option<f64> {
    (a > limit).then(|| 1.0 - limit / a)
}

struct WhiteData {
    n: usize,
    c: f64,
    /// |rho_{j,jbar}| per label.
    coh: Vec<f64>,
    /// (rho_jj, rho_jbar jbar) per label.
    diag: Vec<(f64, f64)>,
}

impl WhiteData {
    fn new(rho: &DensityMatrix) -> Result<Self, RobustnessError> {
        let q = Quantities::from_matrix(rho)?;
        let n = rho.n_qubits();
        let coh = (0..q.labels()).map(|x| q.xy(x).sqrt() / 2.0).collect();
        let diag = (0..q.labels()).map(|x| ((q.i[x] + q.z[x]) / 2.0, (q.i[x] - q.z[x]) / 2.0)).collect();
        Ok(Self { n, c: 1.0 / rho.dim() as f64, coh, diag })
    }

    /// sup p at which some x violates against some y != x within `set`, or the bound.
    fn set_root(&self, set: &[usize], bound_abs: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        let mut take = |r: Option<f64>| {
            if let Some(r) = r {
                best = Some(best.map_or(r, |b: f64| b.max(r)));
            }
        };
        for &x in set {
            for &y in set {
                if x != y {
                    take(pair_root(self.coh[x], self.diag[y].0, self.diag[y].1, self.c));
                }
            }
            take(bound_root(self.coh[x], bound_abs));
        }
        best
    }

    fn closed_form(&self, criterion: RobustCriterion) -> Result<Option<f64>, RobustnessError> {
        let n = self.n;
        let labels = self.coh.len();
        Ok(match criterion {
            RobustCriterion::Fidelity => {
                // 2(1-p)a - 1 + (1-p) I + 2p c > 0 is linear in p.
                (0..labels)
                    .filter_map(|x| {
                        let i = self.diag[x].0 + self.diag[x].1;
                        let num = 2.0 * self.coh[x] + i - 1.0;
                        let den = 2.0 * self.coh[x] + i - 2.0 * self.c;
                        (num > 0.0 && den > 0.0).then(|| (num / den).min(1.0))
                    })
                    .fold(None, |b: Option<f64>, r| Some(b.map_or(r, |b| b.max(r))))
                    .or(Some(0.0))
            }
            RobustCriterion::Some => {
                let all: Vec<usize> = (0..labels).collect();
                Some(self.set_root(&all, 0.5f64.powi(n as i32)).unwrap_or(0.0))
            }
            RobustCriterion::AllSplits => {
                let mut worst = f64::INFINITY;
                for split in enumerate_splits(n, 2)? {
                    let sets = solution_sets(&split)?;
                    let r = sets.sets.iter().filter_map(|s| self.set_root(s, 0.25)).fold(0.0, f64::max);
                    worst = worst.min(r);
                }
                Some(worst)
            }
            RobustCriterion::Full => {
                // Linear when every other pair has equal diagonal entries, so that
                // sqrt(rho_yy rho_ybar) stays linear in p.
                let mut best: Option<f64> = None;
                for x in 0..labels {
                    if self.coh[x] <= 0.0 {
                        continue;
                    }
                    let mut s = 0.0;
                    for y in (0..labels).filter(|&y| y != x) {
                        let (d1, d2) = self.diag[y];
                        if (d1 - d2).abs() > 1e-12 {
                            return Ok(None);
                        }
                        s += d1;
                    }
                    let others = (labels - 1) as f64 * self.c;
                    // (1-p) a <= (1-p)(s - others) + others.
                    let den = self.coh[x] - s + others;
                    if den > 0.0 {
                        let u = others / den;
                        if u <= 1.0 {
                            let p = 1.0 - u;
                            best = Some(best.map_or(p, |b| b.max(p)));
                        }
                    }
                }
                Some(best.unwrap_or(0.0))
            }
        })
    }
}

fn white_mix(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix, RobustnessError> {
    Ok(apply_channel(rho, &NoiseChannel::new(NoiseKind::White, p.clamp(0.0, 1.0))?)?)
}

/// White-noise threshold: closed form where available, always cross-checked
/// by bisection. A state that never violates the criterion gets p0 = 0 and
/// the `never_violated` flag.
pub fn threshold_white(rho: &DensityMatrix, criterion: RobustCriterion, state: &str) -> Result<ThresholdResult, RobustnessError> {
    let ev = MarginEvaluator::new(rho.n_qubits(), criterion)?;
    let margin = |p: f64| white_mix(rho, p).and_then(|r| ev.margin(&r));
    let closed = WhiteData::new(rho)?.closed_form(criterion)?;
    let base = ThresholdResult {
        state: state.to_string(),
        channel: NoiseKind::White,
        criterion,
        p0: 0.0,
        method: Method::Bisection,
        bracket_width: 0.0,
        closed_form: closed,
        bisection: None,
        never_violated: false,
    };
    let (bis, width) = match bisect_threshold(margin, criterion.name()) {
        Ok(v) => v,
        Err(RobustnessError::NeverViolated(_)) => return Ok(ThresholdResult { never_violated: true, ..base }),
        Err(e) => return Err(e),
    };
    verify(margin, bis)?;
    let (p0, method) = match closed {
        Some(c) if (c - bis).abs() <= 1e-8 => (c, Method::ClosedForm),
        _ => (bis, Method::Bisection),
    };
    Ok(ThresholdResult { p0, method, bracket_width: width, bisection: Some(bis), ..base })
}

/// Threshold under any channel, by bisection.
pub fn threshold_channel(
    rho: &DensityMatrix,
    kind: NoiseKind,
    criterion: RobustCriterion,
    state: &str,
) -> Result<ThresholdResult, RobustnessError> {
    if kind == NoiseKind::White {
        let r = threshold_white(rho, criterion, state)?;
        if r.never_violated {
            return Err(RobustnessError::NeverViolated(criterion.name().to_string()));
        }
        return Ok(r);
    }
    let ev = MarginEvaluator::new(rho.n_qubits(), criterion)?;
    let margin = |p: f64| -> Result<f64, RobustnessError> {
        let noisy = apply_channel(rho, &NoiseChannel::new(kind, p.clamp(0.0, 1.0))?)?;
        ev.margin(&noisy)
    };
    let (p0, width) = bisect_threshold(margin, criterion.name())?;
    verify(margin, p0)?;
    Ok(ThresholdResult {
        state: state.to_string(),
        channel: kind,
        criterion,
        p0,
        method: Method::Bisection,
        bracket_width: width,
        closed_form: None,
        bisection: Some(p0),
        never_violated: false,
    })
}

/// Root in (0,1) of (1-p)^N = (1-p/2)^a (p/2)^(N-a) + (1-p/2)^(N-a) (p/2)^a,
/// the depolarized-GHZ condition for a diagonal pair with `a` flipped qubits.
pub fn depolarization_equation(n: usize, alpha: usize) -> Result<f64, RobustnessError> {
    if n < 2 || alpha == 0 || alpha >= n {
        return Err(RobustnessError::QubitCount { n, min: 2 });
    }
    let h = |p: f64| {
        let (a, b) = (1.0 - p / 2.0, p / 2.0);
        (1.0 - p).powi(n as i32) - a.powi(alpha as i32) * b.powi((n - alpha) as i32) - a.powi((n - alpha) as i32) * b.powi(alpha as i32)
    };
    let (p0, _) = bisect_threshold(|p| Ok(h(p)), "depolarization equation")?;
    Ok(p0)
}

/// Noise-free GHZ threshold on the some / all-splits / full criteria.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhzTableRow {
    pub n: usize,
    pub state: String,
    pub channel: NoiseKind,
    pub criterion: RobustCriterion,
    pub p0: f64,
    pub method: Method,
}

/// The 5-channel grid of GHZ thresholds for some entanglement, all-splits
/// inseparability and full entanglement.
pub fn ghz_tables(ns: impl IntoIterator<Item = usize>) -> Result<Vec<GhzTableRow>, RobustnessError> {
    let mut rows = Vec::new();
    for n in ns {
        if n < 2 {
            return Err(RobustnessError::QubitCount { n, min: 2 });
        }
        let rho = ghz(n, 0.0)?.projector();
        let state = format!("ghz{n}");
        for kind in NoiseKind::ALL {
            for criterion in [RobustCriterion::Some, RobustCriterion::AllSplits, RobustCriterion::Full] {
                let (p0, method) = match (kind, criterion) {
                    (NoiseKind::Depolarize, RobustCriterion::Some) => (depolarization_equation(n, n / 2)?, Method::Bisection),
                    (NoiseKind::Depolarize, RobustCriterion::AllSplits) => (depolarization_equation(n, 1)?, Method::Bisection),
                    _ => {
                        let r = threshold_channel(&rho, kind, criterion, &state)?;
                        (r.p0, r.method)
                    }
                };
                rows.push(GhzTableRow { n, state: state.clone(), channel: kind, criterion, p0, method });
            }
        }
    }
    Ok(rows)
}

/// Threshold of the N-partite split condition for the PPT bound state.
pub fn bound_state_robustness(n: usize) -> Result<ThresholdResult, RobustnessError> {
    if n < 3 {
        return Err(RobustnessError::QubitCount { n, min: 3 });
    }
    let rho = crate::states::bound_dur(n, 0.0)?;
    threshold_white(&rho, RobustCriterion::Some, &format!("bound_dur{n}"))
}

pub fn bound_state_closed_form(n: usize) -> f64 {
    let p = 2f64.powi(n as i32);
    p / (2.0 + 2.0 * n as f64 + p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    LhvGap,
    GhzNoise,
}

impl FromStr for Figure {
    type Err = RobustnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lhv-gap" => Ok(Figure::LhvGap),
            "ghz-noise" => Ok(Figure::GhzNoise),
            other => Err(RobustnessError::UnknownFigure(other.to_string())),
        }
    }
}

/// Column names and rows of numeric series, one row per N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureData {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// lhv-gap: maximal <X_0>^2 + <Y_0>^2 for entangled, fully separable and LHV
/// states. ghz-noise: white-noise thresholds for full entanglement and all
/// splits next to the stabilizer-witness constants.
pub fn figure_data(which: Figure, ns: impl IntoIterator<Item = usize>) -> FigureData {
    match which {
        Figure::LhvGap => FigureData {
            columns: vec!["N", "entangled", "separable", "lhv"],
            rows: ns
                .into_iter()
                .map(|n| {
                    let n_f = n as f64;
                    vec![n_f, 1.0, 0.25f64.powi(n as i32 - 1), 2f64.powf(2.0 - n_f)]
                })
                .collect(),
        },
        Figure::GhzNoise => FigureData {
            columns: vec!["N", "full", "all_splits", "stabilizer_full", "stabilizer_some"],
            rows: ns
                .into_iter()
                .map(|n| {
                    let n_f = n as f64;
                    vec![
                        n_f,
                        1.0 / (2.0 * (1.0 - 2f64.powf(-n_f))),
                        1.0 / (1.0 + 2f64.powf(1.0 - n_f)),
                        1.0 / (3.0 - 2f64.powf(2.0 - n_f)),
                        2.0 / 3.0,
                    ]
                })
                .collect(),
        },
    }
}
