//! Report assembly for each subcommand.

use crate::input::Input;
use crate::CliError;
use entcert::classify::{classify3, classify_dc, exclusion_scan, ClassificationReport};
use entcert::criteria::{
    alpha_split_from, chain_from, fidelity_from, ksep_from, ksep_per_label, lz_condition, ChainReport, CriterionVerdict, KsepVerdict,
    Quantities,
};
use entcert::observables::{pauli_family, settings_count, settings_plan, strongest_row, MeasurementSetting, SettingsProfile};
use entcert::partitions::{enumerate_splits, solution_sets, SplitLevel};
use entcert::qmat::{ALGEBRAIC_TOL, VALIDATION_TOL};
use entcert::robustness::{figure_data, ghz_tables, threshold_channel, Figure, RobustCriterion, ThresholdResult};
use entcert::states::NoiseKind;
use serde::Serialize;
use serde_json::Value;

#[derive(Serialize)]
pub struct Tolerances {
    pub validation: f64,
    pub algebraic: f64,
    pub criterion: f64,
}

/// Common header of every JSON report.
#[derive(Serialize)]
pub struct Header {
    pub engine: &'static str,
    pub version: &'static str,
    pub tolerances: Tolerances,
    pub state: String,
    pub n_qubits: usize,
}

/// The header followed by the body's fields. Body fields that repeat a header
/// key (the state description, the qubit count) are dropped.
pub fn wrap<T: Serialize>(input: &Input, body: T) -> Result<Value, CliError> {
    let header = Header {
        engine: "entcert",
        version: entcert::VERSION,
        tolerances: Tolerances { validation: VALIDATION_TOL, algebraic: ALGEBRAIC_TOL, criterion: input.rho.tolerance() },
        state: input.description.clone(),
        n_qubits: input.rho.n_qubits(),
    };
    let (Value::Object(mut out), Value::Object(fields)) = (to_value(header)?, to_value(body)?) else {
        return Err(CliError::Validation("report is not a JSON object".into()));
    };
    for (k, v) in fields {
        out.entry(k).or_insert(v);
    }
    Ok(Value::Object(out))
}

fn to_value(value: impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(value).map_err(engine_err)
}

fn engine_err(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn need_two(input: &Input) -> Result<usize, CliError> {
    let n = input.rho.n_qubits();
    if n < 2 {
        return Err(CliError::Validation(format!("criteria need at least 2 qubits, state has {n}")));
    }
    Ok(n)
}

pub enum AnalyzeMode {
    Overview,
    Level(usize),
    AllSplits,
    Chain,
}

#[derive(Serialize, Default)]
pub struct Analysis {
    pub mode: String,
    pub verdicts: Vec<CriterionVerdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<KsepVerdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub chain: Vec<ChainReport>,
    pub violated: bool,
    pub classification: Option<ClassificationReport>,
}

pub fn analyze(input: &Input, mode: AnalyzeMode) -> Result<Analysis, CliError> {
    let n = need_two(input)?;
    let q = Quantities::from_matrix(&input.rho).map_err(engine_err)?;
    let mut out = Analysis::default();
    match mode {
        AnalyzeMode::Overview => {
            out.mode = "overview".into();
            out.verdicts.push(fidelity_from(&q));
            out.verdicts.push(lz_condition(&input.rho, 2).map_err(engine_err)?);
            for k in 2..=n {
                out.levels.push(ksep_from(&q, &SplitLevel::new(n, k).map_err(engine_err)?));
            }
        }
        AnalyzeMode::Level(k) => {
            if !(2..=n).contains(&k) {
                return Err(CliError::Usage(format!("--level must be in 2..={n}")));
            }
            out.mode = format!("level {k}");
            let level = SplitLevel::new(n, k).map_err(engine_err)?;
            out.verdicts.extend(ksep_per_label(&q, &level));
            out.verdicts.push(lz_condition(&input.rho, k).map_err(engine_err)?);
            for split in enumerate_splits(n, k).map_err(engine_err)? {
                out.verdicts.extend(alpha_split_from(&q, &solution_sets(&split).map_err(engine_err)?));
            }
            out.levels.push(ksep_from(&q, &level));
        }
        AnalyzeMode::AllSplits => {
            out.mode = "splits".into();
            for k in 2..=n {
                for split in enumerate_splits(n, k).map_err(engine_err)? {
                    out.verdicts.extend(alpha_split_from(&q, &solution_sets(&split).map_err(engine_err)?));
                }
            }
        }
        AnalyzeMode::Chain => {
            out.mode = "chain".into();
            for x in 0..q.labels() {
                out.chain.push(chain_from(&q, x).map_err(engine_err)?);
            }
        }
    }
    out.violated = out.verdicts.iter().any(|v| v.violated)
        || out.levels.iter().any(|l| l.strong.violated || l.weak.violated)
        || out.chain.iter().any(|c| c.biseparability_violated);
    let family = pauli_family(n).map_err(engine_err)?;
    out.classification = Some(exclusion_scan(&input.rho, &family).map_err(engine_err)?);
    Ok(out)
}

pub fn classify(input: &Input, method: &str) -> Result<ClassificationReport, CliError> {
    let n = need_two(input)?;
    let family = pauli_family(n).map_err(engine_err)?;
    match method {
        "auto" if n == 3 => classify3(&input.rho, &family),
        "auto" | "scan" => exclusion_scan(&input.rho, &family),
        "three-qubit" => classify3(&input.rho, &family),
        "dc" => classify_dc(&input.rho),
        other => return Err(CliError::Usage(format!("unknown method '{other}' (auto, three-qubit, dc, scan)"))),
    }
    .map_err(engine_err)
}

pub fn robustness(input: &Input, noise: &str, criterion: &str) -> Result<ThresholdResult, CliError> {
    need_two(input)?;
    let kind: NoiseKind = noise.parse().map_err(|e: entcert::states::StateError| CliError::Usage(e.to_string()))?;
    let criterion: RobustCriterion = criterion.parse().map_err(|e: entcert::robustness::RobustnessError| CliError::Usage(e.to_string()))?;
    threshold_channel(&input.rho, kind, criterion, &input.description).map_err(engine_err)
}

pub fn robustness_csv(r: &ThresholdResult, n: usize) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row = |w: &mut csv::Writer<Vec<u8>>, cells: &[String]| w.write_record(cells).map_err(engine_err);
    row(&mut w, &["N", "state", "channel", "criterion", "p0", "method"].map(String::from))?;
    row(&mut w, &[n.to_string(), r.state.clone(), r.channel.to_string(), r.criterion.to_string(), r.p0.to_string(), r.method.to_string()])?;
    finish(w)
}

#[derive(Serialize)]
pub struct SettingsReport {
    pub profile: SettingsProfile,
    pub target_row: usize,
    pub count: usize,
    pub settings: Vec<MeasurementSetting>,
}

pub fn parse_profile(s: &str) -> Result<SettingsProfile, CliError> {
    Ok(match s {
        "real" => SettingsProfile::RealElement,
        "imaginary" => SettingsProfile::ImaginaryElement,
        "general" => SettingsProfile::GeneralElement,
        "all" => SettingsProfile::AllCriteria,
        other => return Err(CliError::Usage(format!("unknown profile '{other}' (real, imaginary, general, all)"))),
    })
}

/// Dense file input with no profile gets the every-criterion plan; otherwise
/// the strongest antidiagonal element picks the row and its phase the profile.
pub fn settings(input: &Input, profile: Option<SettingsProfile>, row: Option<usize>) -> Result<SettingsReport, CliError> {
    let rho = &input.rho;
    let n = rho.n_qubits();
    let rows = 1usize << n.saturating_sub(1);
    let target_row = match row {
        Some(r) if r == 0 || r > rows => return Err(CliError::Usage(format!("--row must be in 1..={rows}"))),
        Some(r) => r,
        None if n >= 2 => strongest_row(rho),
        None => 1,
    };
    let profile = match profile {
        Some(p) => p,
        None if input.dense => SettingsProfile::AllCriteria,
        None => {
            let d = rho.dim();
            let e = rho.entry(target_row - 1, d - target_row);
            let tol = rho.tolerance().max(1e-12);
            if e.im.abs() <= tol {
                SettingsProfile::RealElement
            } else if e.re.abs() <= tol {
                SettingsProfile::ImaginaryElement
            } else {
                SettingsProfile::GeneralElement
            }
        }
    };
    let settings = settings_plan(n, profile, target_row).map_err(engine_err)?;
    debug_assert_eq!(settings.len(), settings_count(n, profile));
    Ok(SettingsReport { profile, target_row, count: settings.len(), settings })
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Validation(e.to_string()))?;
    String::from_utf8(bytes).map_err(engine_err)
}

fn set_cell(set: &[usize]) -> String {
    let items: Vec<String> = set.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(","))
}

/// Solution sets of the four-qubit splits at level k: one column per split,
/// one row per set.
pub fn solution_table(k: usize) -> Result<String, CliError> {
    let columns: Vec<_> =
        enumerate_splits(4, k).map_err(engine_err)?.iter().map(solution_sets).collect::<Result<_, _>>().map_err(engine_err)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["set".to_string()];
    header.extend(columns.iter().map(|c| c.split.label()));
    w.write_record(&header).map_err(engine_err)?;
    for i in 0..columns[0].sets.len() {
        let mut row = vec![format!("z{}", i + 1)];
        row.extend(columns.iter().map(|c| set_cell(&c.sets[i])));
        w.write_record(&row).map_err(engine_err)?;
    }
    finish(w)
}

pub fn ghz_table() -> Result<String, CliError> {
    let rows = ghz_tables(2..=8).map_err(engine_err)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["N", "state", "channel", "criterion", "p0", "method"]).map_err(engine_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.state,
            r.channel.to_string(),
            r.criterion.to_string(),
            format!("{:.10}", r.p0),
            r.method.to_string(),
        ])
        .map_err(engine_err)?;
    }
    finish(w)
}

pub fn figure_csv(which: Figure) -> Result<String, CliError> {
    let data = figure_data(which, 2..=8);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&data.columns).map_err(engine_err)?;
    for row in data.rows {
        let mut cells = vec![(row[0] as usize).to_string()];
        cells.extend(row[1..].iter().map(|v| v.to_string()));
        w.write_record(&cells).map_err(engine_err)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_have_expected_shape() {
        let t1 = solution_table(2).unwrap();
        let lines: Vec<&str> = t1.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("z1,"));
        assert!(t1.contains("\"{0,1}\""));
        let t2 = solution_table(3).unwrap();
        assert_eq!(t2.lines().count(), 3);
        assert!(t2.contains("\"{0,1,2,3}\""));
    }

    #[test]
    fn figure_csv_is_stable() {
        let a = figure_csv(Figure::LhvGap).unwrap();
        assert_eq!(a, figure_csv(Figure::LhvGap).unwrap());
        assert!(a.starts_with("N,entangled,separable,lhv\n2,1,0.25,1\n"));
    }
}
