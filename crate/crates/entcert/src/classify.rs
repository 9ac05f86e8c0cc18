//! Map criterion verdicts onto the partial-separability hierarchy. Every
//! class ends up either excluded or consistent; nothing here asserts
//! membership, since all conditions are only necessary.

use crate::criteria::{alpha_split_from, dc_condition, ksep_from, CriteriaError, CriterionVerdict, Quantities};
use crate::observables::OperatorFamily;
use crate::partitions::{contains, enumerate_splits, solution_sets, Split, SplitLevel};
use crate::qmat::DensityMatrix;
use crate::states::is_ghz_diagonal;
use serde::Serialize;
use std::collections::BTreeMap;

pub const CAVEAT: &str = "Violated conditions exclude classes. A consistent class is one no evaluated \
condition rules out, not an established membership. Irreducible m-partite entanglement and \
properties of reduced states are not assessed.";

/// The ten three-qubit classes: 1 is fully entangled, 2.x biseparable, 3 fully separable.
pub const THREE_QUBIT_CLASSES: [&str; 10] = ["1", "2.1", "2.2", "2.3", "2.4", "2.5", "2.6", "2.7", "2.8", "3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Excluded,
    Consistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassFinding {
    pub class: String,
    pub status: Status,
    /// Which violated condition (or propagation) excluded the class.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitFinding {
    pub split: String,
    pub k: usize,
    pub violated: bool,
    /// Largest margin over the split's conditions; positive when violated.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelFinding {
    pub k: usize,
    pub violated: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub n_qubits: usize,
    pub method: &'static str,
    pub splits: Vec<SplitFinding>,
    pub levels: Vec<LevelFinding>,
    pub classes: Vec<ClassFinding>,
    /// Range for k in "k-separable entangled".
    pub k_bracket: [usize; 2],
    /// Range for m in "m-partite entangled".
    pub m_bracket: [usize; 2],
    /// The input was not GHZ-diagonal and was depolarized into the family first.
    pub depolarized: bool,
    pub caveat: &'static str,
}

impl ClassificationReport {
    pub fn excluded(&self) -> Vec<&str> {
        self.with_status(Status::Excluded)
    }

    pub fn consistent(&self) -> Vec<&str> {
        self.with_status(Status::Consistent)
    }

    fn with_status(&self, s: Status) -> Vec<&str> {
        self.classes.iter().filter(|c| c.status == s).map(|c| c.class.as_str()).collect()
    }

    pub fn status(&self, class: &str) -> Option<Status> {
        self.classes.iter().find(|c| c.class == class).map(|c| c.status)
    }
}

fn brackets(n: usize, first_violated_level: Option<usize>) -> ([usize; 2], [usize; 2]) {
    // Violating level k rules out k-separability, hence every level above it.
    let k_hi = first_violated_level.map_or(n, |k| k - 1).max(1);
    ([1, k_hi], [n.div_ceil(k_hi), n])
}

fn max_margin(v: &[CriterionVerdict]) -> f64 {
    v.iter().map(|v| v.margin).fold(f64::NEG_INFINITY, f64::max)
}

fn finding(class: &str, reasons: Vec<&str>) -> ClassFinding {
    let status = if reasons.is_empty() { Status::Consistent } else { Status::Excluded };
    ClassFinding { class: class.to_string(), status, reason: (!reasons.is_empty()).then(|| reasons.join(", ")) }
}

/// The ten three-qubit classes against the split, biseparability and full
/// separability conditions.
pub fn classify3(rho: &DensityMatrix, family: &OperatorFamily) -> Result<ClassificationReport, CriteriaError> {
    let n = rho.n_qubits();
    if n != 3 {
        return Err(CriteriaError::Level { k: 3, n, min: 3 });
    }
    let q = Quantities::from_operators(rho, family)?;
    let mut splits = Vec::new();
    let mut split_violated = BTreeMap::new();
    for (key, label) in [("a", "a-(bc)"), ("b", "b-(ac)"), ("c", "c-(ab)")] {
        let split = Split::parse(3, label)?;
        let v = alpha_split_from(&q, &solution_sets(&split)?);
        let violated = v.iter().any(|v| v.violated);
        split_violated.insert(key, violated);
        splits.push(SplitFinding { split: split.label(), k: 2, violated, margin: max_margin(&v) });
    }
    let bisep = ksep_from(&q, &SplitLevel::new(3, 2)?);
    let bisep_violated = bisep.strong.violated || bisep.weak.violated;

    // All labels tied together, once with the bipartite bound 1/4 and once with 1/16.
    let lhs = (0..q.labels()).map(|x| q.xy(x)).fold(0.0, f64::max);
    let rhs = (0..q.labels()).map(|x| q.iz(x)).fold(f64::INFINITY, f64::min);
    let all_quarter = CriterionVerdict::new("all-splits", "all".into(), lhs, Some(rhs), Some(0.25), q.tol);
    let full_sep = CriterionVerdict::new("full-sep", "all".into(), lhs, Some(rhs), Some(1.0 / 16.0), q.tol);

    let (a, b, c) = (split_violated["a"], split_violated["b"], split_violated["c"]);
    let pick = |conds: &[(bool, &'static str)]| conds.iter().filter(|c| c.0).map(|c| c.1).collect::<Vec<_>>();
    let bs = (bisep_violated, "biseparability");
    let sa = (a, "split a-(bc)");
    let sb = (b, "split b-(ac)");
    let sc = (c, "split c-(ab)");
    let q4 = (all_quarter.violated, "all splits (bound 1/4)");
    let fs = (full_sep.violated, "full separability");
    let classes = vec![
        finding("1", vec![]),
        finding("2.1", pick(&[bs])),
        finding("2.2", pick(&[bs, sa])),
        finding("2.3", pick(&[bs, sb])),
        finding("2.4", pick(&[bs, sc])),
        finding("2.5", pick(&[bs, sa, sb])),
        finding("2.6", pick(&[bs, sa, sc])),
        finding("2.7", pick(&[bs, sb, sc])),
        finding("2.8", pick(&[bs, sa, sb, sc, q4])),
        finding("3", pick(&[bs, sa, sb, sc, q4, fs])),
    ];
    let full_level = a || b || c || all_quarter.violated || full_sep.violated;
    let levels = vec![
        LevelFinding { k: 2, violated: bisep_violated, margin: bisep.strong.margin.max(bisep.weak.margin) },
        LevelFinding { k: 3, violated: bisep_violated || full_level, margin: full_sep.margin },
    ];
    let first = levels.iter().find(|l| l.violated).map(|l| l.k);
    let (k_bracket, m_bracket) = brackets(3, first);
    Ok(ClassificationReport {
        n_qubits: 3,
        method: "three-qubit",
        splits,
        levels,
        classes,
        k_bracket,
        m_bracket,
        depolarized: false,
        caveat: CAVEAT,
    })
}

/// Bipartite-split verdicts from the GHZ-diagonal condition, which decides
/// split separability exactly within that family. Other inputs are first
/// depolarized into the family and the report is flagged.
pub fn classify_dc(rho: &DensityMatrix) -> Result<ClassificationReport, CriteriaError> {
    let n = rho.n_qubits();
    let depolarized = !is_ghz_diagonal(rho, rho.tolerance())?;
    let mut splits = Vec::new();
    let mut classes = Vec::new();
    for split in enumerate_splits(n, 2)? {
        let v = dc_condition(rho, &split)?;
        let label = split.label();
        classes.push(ClassFinding {
            class: format!("split:{label}"),
            status: if v.violated { Status::Excluded } else { Status::Consistent },
            reason: v.violated.then(|| "dc".to_string()),
        });
        splits.push(SplitFinding { split: label, k: 2, violated: v.violated, margin: v.margin });
    }
    // Full separability implies separability under every bipartite split.
    let any = splits.iter().any(|s| s.violated);
    let levels = vec![LevelFinding { k: n, violated: any, margin: splits.iter().map(|s| s.margin).fold(f64::NEG_INFINITY, f64::max) }];
    for k in 1..=n {
        let excluded = k == n && any;
        classes.push(ClassFinding {
            class: format!("{k}-separable"),
            status: if excluded { Status::Excluded } else { Status::Consistent },
            reason: excluded.then(|| "some bipartite split".to_string()),
        });
    }
    let (k_bracket, m_bracket) = brackets(n, any.then_some(n));
    Ok(ClassificationReport { n_qubits: n, method: "dc", splits, levels, classes, k_bracket, m_bracket, depolarized, caveat: CAVEAT })
}

/// Every split condition at every level plus every k-separability condition,
/// with nesting and containment propagated.
pub fn exclusion_scan(rho: &DensityMatrix, family: &OperatorFamily) -> Result<ClassificationReport, CriteriaError> {
    let n = rho.n_qubits();
    let q = Quantities::from_operators(rho, family)?;

    let mut all_splits = Vec::new();
    let mut splits = Vec::new();
    for k in 2..=n {
        for split in enumerate_splits(n, k)? {
            let v = alpha_split_from(&q, &solution_sets(&split)?);
            splits.push(SplitFinding { split: split.label(), k, violated: v.iter().any(|v| v.violated), margin: max_margin(&v) });
            all_splits.push(split);
        }
    }

    let mut levels = vec![LevelFinding { k: 1, violated: false, margin: f64::NEG_INFINITY }];
    for k in 2..=n {
        let kv = ksep_from(&q, &SplitLevel::new(n, k)?);
        levels.push(LevelFinding { k, violated: kv.strong.violated || kv.weak.violated, margin: kv.strong.margin.max(kv.weak.margin) });
    }

    // Split exclusions: direct, then to every finer split contained in a violated one.
    let mut split_reason: Vec<Option<String>> = splits.iter().map(|s| s.violated.then(|| "violated".to_string())).collect();
    for (i, coarse) in all_splits.iter().enumerate() {
        if !splits[i].violated {
            continue;
        }
        for (j, fine) in all_splits.iter().enumerate() {
            if i != j && split_reason[j].is_none() && contains(fine, coarse)? {
                split_reason[j] = Some(format!("contained in {}", splits[i].split));
            }
        }
    }
    // The single N-partite split is the fully separable class.
    let full_idx = all_splits.len() - 1;
    if split_reason[full_idx].is_some() && !levels[n - 1].violated {
        levels[n - 1].violated = true;
    }

    let first = levels.iter().find(|l| l.violated).map(|l| l.k);
    let mut classes = Vec::new();
    for l in &levels {
        let reason = match first {
            Some(f) if l.k == f => Some("violated".to_string()),
            Some(f) if l.k > f => Some(format!("nested under level {f}")),
            _ => None,
        };
        classes.push(ClassFinding {
            class: format!("{}-separable", l.k),
            status: if reason.is_some() { Status::Excluded } else { Status::Consistent },
            reason,
        });
    }
    for (s, reason) in splits.iter().zip(split_reason) {
        let reason = reason.or_else(|| first.filter(|&f| s.k >= f).map(|f| format!("nested under level {f}")));
        classes.push(ClassFinding {
            class: format!("split:{}", s.split),
            status: if reason.is_some() { Status::Excluded } else { Status::Consistent },
            reason,
        });
    }

    let (k_bracket, m_bracket) = brackets(n, first);
    Ok(ClassificationReport {
        n_qubits: n,
        method: "scan",
        splits,
        levels,
        classes,
        k_bracket,
        m_bracket,
        depolarized: false,
        caveat: CAVEAT,
    })
}
