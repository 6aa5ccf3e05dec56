use std::path::Path;

use formalism_core::scenarios::{run_scenario, QueryResult, Scenario};
use formalism_dsl::{load, Diagnostic};
use serde::Serialize;

use crate::report::{csv_records, json_result, text_result, QueryJson};
use crate::{Output, OutputFormat};

pub const RUN_SCHEMA: &str = "formalism-lab/run/1";

#[derive(Debug, Serialize)]
struct DiagnosticJson {
    severity: &'static str,
    line: usize,
    column: usize,
    message: String,
    hint: Option<String>,
}

impl From<&Diagnostic> for DiagnosticJson {
    fn from(d: &Diagnostic) -> Self {
        DiagnosticJson {
            severity: d.severity.as_str(),
            line: d.line,
            column: d.column,
            message: d.message.clone(),
            hint: d.hint.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct FileJson {
    path: String,
    scenario: Option<String>,
    status: &'static str,
    diagnostics: Vec<DiagnosticJson>,
    queries: Vec<QueryJson>,
}

#[derive(Debug, Serialize)]
struct RunJson {
    schema: &'static str,
    tolerance: f64,
    files: Vec<FileJson>,
}

enum FileOutcome {
    Ran(Scenario, Vec<QueryResult>),
    Failed(Vec<Diagnostic>),
}

fn stem(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map_or_else(|| path.to_string(), |s| s.to_string_lossy().into_owned())
}

fn process(path: &str, tolerance: f64, stderr: &mut String) -> FileOutcome {
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            let d = Diagnostic::error(format!("cannot read file: {e}"), 1, 1);
            stderr.push_str(&format!("{path}: error: cannot read file: {e}\n"));
            return FileOutcome::Failed(vec![d]);
        }
    };
    let mut scenario = match load(&source, &stem(path)) {
        Ok(s) => s,
        Err(diags) => {
            for d in &diags {
                stderr.push_str(&d.render(path, &source));
            }
            return FileOutcome::Failed(diags);
        }
    };
    scenario.tolerance = tolerance;
    match run_scenario(&scenario) {
        Ok(results) => FileOutcome::Ran(scenario, results),
        Err(e) => {
            stderr.push_str(&format!("{path}: error: {e}\n"));
            FileOutcome::Failed(vec![Diagnostic::error(e.to_string(), 1, 1)])
        }
    }
}

/// Parses, elaborates and runs every file. Exit code 2 when any file could
/// not be run, else 1 when any expectation failed, else 0.
pub fn cmd_run(paths: &[String], format: OutputFormat, tolerance: f64) -> Output {
    let mut out = Output::default();
    if !(tolerance.is_finite() && tolerance > 0.0) {
        out.stderr = format!("error: tolerance must be a positive number, got {tolerance}\n");
        out.code = 2;
        return out;
    }
    let outcomes: Vec<(&String, FileOutcome)> = paths
        .iter()
        .map(|p| (p, process(p, tolerance, &mut out.stderr)))
        .collect();
    let (mut errors, mut failed, mut passed, mut unchecked) = (0, 0, 0, 0);
    for (_, o) in &outcomes {
        match o {
            FileOutcome::Failed(_) => errors += 1,
            FileOutcome::Ran(_, rs) => {
                for r in rs {
                    match r.passed() {
                        Some(true) => passed += 1,
                        Some(false) => failed += 1,
                        None => unchecked += 1,
                    }
                }
            }
        }
    }
    out.code = if errors > 0 {
        2
    } else if failed > 0 {
        1
    } else {
        0
    };
    out.stdout = match format {
        OutputFormat::Table => {
            let mut s = String::new();
            for (path, o) in &outcomes {
                if let FileOutcome::Ran(scenario, rs) = o {
                    s.push_str(&format!("{} ({path})\n", scenario.name));
                    for r in rs {
                        s.push_str(&text_result(r));
                    }
                    s.push('\n');
                }
            }
            s.push_str(&format!(
                "{passed} passed, {failed} failed, {unchecked} unchecked, {errors} file error{}\n",
                if errors == 1 { "" } else { "s" }
            ));
            s
        }
        OutputFormat::Json => {
            let files = outcomes
                .iter()
                .map(|(path, o)| match o {
                    FileOutcome::Ran(scenario, rs) => FileJson {
                        path: path.to_string(),
                        scenario: Some(scenario.name.clone()),
                        status: if rs.iter().any(|r| r.passed() == Some(false)) {
                            "fail"
                        } else {
                            "pass"
                        },
                        diagnostics: Vec::new(),
                        queries: rs
                            .iter()
                            .zip(&scenario.queries)
                            .map(|(r, q)| json_result(r, q, tolerance))
                            .collect(),
                    },
                    FileOutcome::Failed(diags) => FileJson {
                        path: path.to_string(),
                        scenario: None,
                        status: "error",
                        diagnostics: diags.iter().map(DiagnosticJson::from).collect(),
                        queries: Vec::new(),
                    },
                })
                .collect();
            let report = RunJson {
                schema: RUN_SCHEMA,
                tolerance,
                files,
            };
            let mut s = serde_json::to_string_pretty(&report).expect("serializable report");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["file", "scenario", "query", "kind", "row", "column", "value", "expected", "status"])
                .expect("in-memory writer");
            for (path, o) in &outcomes {
                if let FileOutcome::Ran(scenario, rs) = o {
                    for (r, q) in rs.iter().zip(&scenario.queries) {
                        for rec in csv_records(r, q) {
                            let mut row = vec![path.to_string(), scenario.name.clone(), r.title.clone()];
                            row.extend(rec);
                            w.write_record(&row).expect("in-memory writer");
                        }
                    }
                }
            }
            String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
        }
    };
    out
}
