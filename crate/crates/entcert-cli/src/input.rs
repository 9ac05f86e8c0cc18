//! State ingestion: JSON state files and `named:<name> key=value` tokens.

use crate::CliError;
use entcert::qmat::{validate_density, ComplexMatrix, DensityMatrix, C64, VALIDATION_TOL};
use entcert::states::{named_state, StateError, StateParams};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Names whose size is set by an `n` parameter; the rest have a fixed size.
const SIZED_STATES: [&str; 9] = ["ghz", "white", "product", "w", "dicke", "bound_dur", "theta", "rho_prime", "ghz_noisy"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub n_qubits: usize,
    #[serde(flatten)]
    pub body: StateBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateBody {
    /// Row-major entries as [re, im] pairs, 4^N of them.
    Dense { entries: Vec<[f64; 2]> },
    Named {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, serde_json::Value>,
    },
}

impl StateFile {
    #[cfg(test)]
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let entries = rho.matrix().data().iter().map(|c| [c.re, c.im]).collect();
        Self { n_qubits: rho.n_qubits(), body: StateBody::Dense { entries } }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("state file: {e}")))
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state file serializes")
    }

    pub fn load(&self) -> Result<DensityMatrix, CliError> {
        let n = self.n_qubits;
        match &self.body {
            StateBody::Dense { entries } => {
                if n == 0 || n > entcert::partitions::MAX_QUBITS {
                    return Err(CliError::Validation(format!("n_qubits={n} outside 1..={}", entcert::partitions::MAX_QUBITS)));
                }
                let d = 1usize << n;
                if entries.len() != d * d {
                    return Err(CliError::Validation(format!("expected {} entries for {n} qubits, got {}", d * d, entries.len())));
                }
                let m = ComplexMatrix::from_fn(d, d, |r, c| {
                    let [re, im] = entries[r * d + c];
                    C64::new(re, im)
                });
                validate_density(&m, n, VALIDATION_TOL).map_err(|e| CliError::Validation(e.to_string()))
            }
            StateBody::Named { name, params } => {
                let mut p = StateParams::new();
                for (k, v) in params {
                    let s = match v {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    p = p.with(k, s);
                }
                if SIZED_STATES.contains(&name.as_str()) && !p.0.contains_key("n") {
                    p = p.with("n", n);
                }
                let rho = build_named(name, &p)?;
                if rho.n_qubits() != n {
                    return Err(CliError::Validation(format!("state '{name}' has {} qubits, file says {n}", rho.n_qubits())));
                }
                Ok(rho)
            }
        }
    }
}

pub fn build_named(name: &str, params: &StateParams) -> Result<DensityMatrix, CliError> {
    named_state(name, params).map_err(|e| match e {
        StateError::UnknownName(_)
        | StateError::UnknownParam { .. }
        | StateError::MissingParam { .. }
        | StateError::InvalidParam { .. }
        | StateError::UnknownChannel(_) => CliError::Usage(e.to_string()),
        other => CliError::Validation(other.to_string()),
    })
}

/// A loaded state plus a short description for reports.
pub struct Input {
    pub description: String,
    pub rho: DensityMatrix,
    /// True for file-supplied dense matrices, whose structure is unknown.
    pub dense: bool,
}

/// Either a single JSON path, or a name (optionally prefixed `named:`)
/// followed by key=value tokens. A bare token is a boolean flag.
pub fn read_state(tokens: &[String], tol: Option<f64>) -> Result<Input, CliError> {
    let (first, rest) = tokens.split_first().ok_or_else(|| CliError::Usage("missing state".into()))?;
    let input = if first.ends_with(".json") || Path::new(first).is_file() {
        if !rest.is_empty() {
            return Err(CliError::Usage("parameters are not accepted after a state file".into()));
        }
        let text = std::fs::read_to_string(first).map_err(|e| CliError::Usage(format!("{first}: {e}")))?;
        let file = StateFile::parse(&text)?;
        let dense = matches!(file.body, StateBody::Dense { .. });
        Input { description: first.clone(), rho: file.load()?, dense }
    } else {
        let name = first.strip_prefix("named:").unwrap_or(first);
        let mut params = StateParams::new();
        for t in rest {
            params = match t.split_once('=') {
                Some((k, v)) => params.with(k, v),
                None => params.with(t, "true"),
            };
        }
        let description = std::iter::once(name.to_string()).chain(rest.iter().cloned()).collect::<Vec<_>>().join(" ");
        Input { description, rho: build_named(name, &params)?, dense: false }
    };
    Ok(match tol {
        Some(t) => Input { rho: input.rho.with_tolerance(t), ..input },
        None => input,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use entcert::states::ghz;

    #[test]
    fn dense_round_trip_is_exact() {
        let rho =
            entcert::states::named_state("ghz_noisy", &StateParams::new().with("n", 3).with("p", 0.37).with("noise", "dissipate")).unwrap();
        let file = StateFile::from_density(&rho);
        let again = StateFile::parse(&file.to_json()).unwrap();
        assert_eq!(again, file);
        let loaded = again.load().unwrap();
        assert_eq!(loaded.matrix().data(), rho.matrix().data());
        assert_eq!(StateFile::parse(&StateFile::from_density(&loaded).to_json()).unwrap(), file);
    }

    #[test]
    fn named_file_gets_size_from_header() {
        let file = StateFile::parse(r#"{"n_qubits": 4, "kind": "named", "name": "ghz", "params": {"alpha": 0}}"#).unwrap();
        let rho = file.load().unwrap();
        assert_eq!(rho.matrix().data(), ghz(4, 0.0).unwrap().projector().matrix().data());
        let bad = StateFile::parse(r#"{"n_qubits": 3, "kind": "named", "name": "smolin"}"#).unwrap();
        assert!(matches!(bad.load(), Err(CliError::Validation(_))));
    }

    #[test]
    fn invalid_inputs_are_classified() {
        let not_psd = r#"{"n_qubits": 1, "kind": "dense", "entries": [[1.5,0],[0,0],[0,0],[-0.5,0]]}"#;
        assert!(matches!(StateFile::parse(not_psd).unwrap().load(), Err(CliError::Validation(_))));
        let short = r#"{"n_qubits": 1, "kind": "dense", "entries": [[1,0]]}"#;
        assert!(matches!(StateFile::parse(short).unwrap().load(), Err(CliError::Validation(_))));
        assert!(matches!(StateFile::parse("{"), Err(CliError::Usage(_))));
        let toks = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert!(matches!(read_state(&toks(&["named:ghz", "m=3"]), None), Err(CliError::Usage(_))));
        assert!(matches!(read_state(&toks(&["nosuch"]), None), Err(CliError::Usage(_))));
        let ok = read_state(&toks(&["dicke", "n=4", "l=2", "rotated"]), Some(1e-6)).unwrap();
        assert_eq!(ok.rho.tolerance(), 1e-6);
    }
}
