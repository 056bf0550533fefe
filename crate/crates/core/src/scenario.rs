//! Scenario documents (JSON schema version "1"), report documents, and batch
//! evaluation over scenario files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curve::CurveSet;
use crate::deal::{ensure_valid, DealParameters, Finding};
use crate::engine::{evaluate, ConditionId, EvalOptions, Evaluation};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub name: String,
    /// Free-text lifecycle tag, e.g. "stage one: decision to lease".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifecycle_stage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Verbatim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOptions {
    #[serde(default)]
    pub mode: Mode,
    /// Breakeven stops once |N_sl - N_b| < tolerance * max(1, |N_b|).
    #[serde(default = "default_tolerance")]
    pub solver_tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub solver_max_iterations: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

fn default_tolerance() -> f64 {
    1e-6
}

fn default_max_iterations() -> u32 {
    200
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Verbatim,
            solver_tolerance: default_tolerance(),
            solver_max_iterations: default_max_iterations(),
            fd_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: String,
    pub meta: Meta,
    pub deal: DealParameters,
    #[serde(default)]
    pub curves: CurveSet,
    #[serde(default)]
    pub options: ScenarioOptions,
}

impl Scenario {
    pub fn new(name: impl Into<String>, deal: DealParameters, curves: CurveSet) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            meta: Meta { name: name.into(), ..Meta::default() },
            deal,
            curves,
            options: ScenarioOptions::default(),
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions { fd_step: self.options.fd_step }
    }

    pub fn evaluate(&self) -> Result<Evaluation> {
        evaluate(&self.deal, &self.curves, &self.eval_options())
    }

    /// Deal bounds plus solver and step options.
    pub fn validate(&self) -> Vec<Finding> {
        let mut out = self.deal.validate();
        let o = &self.options;
        if !(o.solver_tolerance.is_finite() && o.solver_tolerance > 0.0) {
            out.push(Finding::violation("options.solver_tolerance", format!("solver_tolerance must be > 0, got {}", o.solver_tolerance)));
        }
        if o.solver_max_iterations == 0 {
            out.push(Finding::violation("options.solver_max_iterations", "solver_max_iterations must be >= 1"));
        }
        if let Some(h) = o.fd_step {
            if !(h.is_finite() && h > 0.0) {
                out.push(Finding::violation("options.fd_step", format!("fd_step must be > 0, got {h}")));
            }
        }
        out
    }
}

/// Deserializes `T` from JSON text, mapping failures to syntax errors with a
/// line and column or schema errors with a dotted field path.
pub fn from_json_text<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        json_error(path, e.into_inner())
    })?;
    de.end().map_err(|e| json_error(String::new(), e))?;
    Ok(value)
}

fn json_error(path: String, e: serde_json::Error) -> Error {
    if e.is_syntax() || e.is_eof() {
        return Error::Syntax { line: e.line(), column: e.column(), message: strip_position(&e.to_string()) };
    }
    let message = strip_position(&e.to_string());
    let mut path = if path == "." { String::new() } else { path };
    if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
        if !path.is_empty() {
            path.push('.');
        }
        path.push_str(field);
    }
    Error::Schema { path: if path.is_empty() { ".".into() } else { path }, message }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Parses a scenario without bounds validation.
pub fn parse_scenario_unchecked(text: &str) -> Result<Scenario> {
    let scenario: Scenario = from_json_text(text)?;
    if scenario.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema {
            path: "schema_version".into(),
            message: format!("unsupported schema version {:?}, expected {SCHEMA_VERSION:?}", scenario.schema_version),
        });
    }
    Ok(scenario)
}

/// Parses and validates a scenario. Warnings pass; violations fail.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario = parse_scenario_unchecked(text)?;
    ensure_valid(&scenario.validate())?;
    Ok(scenario)
}

/// Canonical text: fixed key order, shortest round-trip number formatting,
/// two-space indentation, trailing newline.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    to_canonical_json(scenario)
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("model types serialize to JSON");
    text.push('\n');
    text
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self { name: crate::TOOL_NAME.to_string(), version: crate::VERSION.to_string() }
    }
}

/// Everything needed to audit or reproduce one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: ToolInfo,
    pub generated_at: String,
    pub scenario: Scenario,
    #[serde(flatten)]
    pub evaluation: Evaluation,
}

impl ReportDocument {
    pub fn build(scenario: Scenario, generated_at: impl Into<String>) -> Result<Self> {
        let evaluation = scenario.evaluate()?;
        Ok(Self { tool: ToolInfo::default(), generated_at: generated_at.into(), scenario, evaluation })
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

pub const CSV_HEADER: [&str; 17] = [
    "scenario_name", "N_sl", "N_b", "B1", "B2", "B3", "B4", "B5", "B6", "S1", "S2", "S3", "S4", "S5", "S6",
    "S7", "recommendation",
];

/// Writes the batch table; one row per report in input order.
pub fn write_csv<W: std::io::Write>(out: W, reports: &[ReportDocument]) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for doc in reports {
        let report = &doc.evaluation.report;
        let mut row = vec![
            doc.scenario.meta.name.clone(),
            report.n_sl.value.to_string(),
            report.n_b.value.to_string(),
        ];
        for id in ConditionId::ALL {
            let holds = report.conditions.iter().find(|c| c.id == id).is_some_and(|c| c.holds);
            row.push(holds.to_string());
        }
        row.push(report.recommendation.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub reports: Vec<(PathBuf, ReportDocument)>,
    pub failures: Vec<(PathBuf, Error)>,
    pub written: Vec<PathBuf>,
}

impl BatchOutcome {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn evaluate_file(path: &Path, generated_at: &str) -> Result<ReportDocument> {
    ReportDocument::build(read_scenario(path)?, generated_at)
}

/// Evaluates every file; per-file failures are collected, not fatal. JSON
/// output writes `<stem>.report.json` per scenario, CSV writes `batch.csv`.
pub fn run_batch(paths: &[PathBuf], format: OutputFormat, out_dir: &Path, generated_at: &str) -> Result<BatchOutcome> {
    #[cfg(feature = "parallel")]
    let results: Vec<Result<ReportDocument>> = {
        use rayon::prelude::*;
        paths.par_iter().map(|p| evaluate_file(p, generated_at)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<ReportDocument>> = paths.iter().map(|p| evaluate_file(p, generated_at)).collect();

    let mut outcome = BatchOutcome::default();
    for (path, result) in paths.iter().zip(results) {
        match result {
            Ok(doc) => outcome.reports.push((path.clone(), doc)),
            Err(e) => outcome.failures.push((path.clone(), e)),
        }
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    match format {
        OutputFormat::Json => {
            for (path, doc) in &outcome.reports {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
                let target = out_dir.join(format!("{stem}.report.json"));
                fs::write(&target, doc.to_json()).map_err(|e| Error::Io(format!("{}: {e}", target.display())))?;
                outcome.written.push(target);
            }
        }
        OutputFormat::Csv => {
            let target = out_dir.join("batch.csv");
            let file = fs::File::create(&target).map_err(|e| Error::Io(format!("{}: {e}", target.display())))?;
            let docs: Vec<_> = outcome.reports.iter().map(|(_, d)| d.clone()).collect();
            write_csv(file, &docs)?;
            outcome.written.push(target);
        }
    }
    Ok(outcome)
}
