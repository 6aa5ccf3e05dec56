use formalism_core::formalisms::{ProbabilityTable, TableComparison, COMPLETION_PREFIX};
use formalism_core::scenarios::{Expectation, Query, QueryResult, QueryValue};
use serde::Serialize;

use crate::numfmt::{deviation, human, round_sig, sig, MACHINE_DIGITS};

/// Columns worth showing: completion outcomes are dropped when they carry
/// no weight.
fn visible_columns(t: &ProbabilityTable) -> Vec<usize> {
    (0..t.column_labels().len())
        .filter(|&j| {
            !t.column_labels()[j].starts_with(COMPLETION_PREFIX)
                || t.entries().iter().any(|row| row[j].abs() >= 1e-13)
        })
        .collect()
}

/// Aligned text rendering of a table, one row per line, each prefixed by
/// `indent`.
pub fn text_table(t: &ProbabilityTable, indent: &str) -> String {
    let cols = visible_columns(t);
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(cols.iter().map(|&j| t.column_labels()[j].clone()));
    grid.push(header);
    for (i, label) in t.row_labels().iter().enumerate() {
        let mut row = vec![label.clone()];
        if t.is_row_defined(i) {
            row.extend(cols.iter().map(|&j| human(t.entries()[i][j])));
        } else {
            row.push("undefined".into());
        }
        grid.push(row);
    }
    let width = grid.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|j| grid.iter().filter_map(|r| r.get(j)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in grid {
        let mut line = indent.to_string();
        for (j, cell) in row.iter().enumerate() {
            if j == 0 {
                line.push_str(&format!("{cell:<w$}", w = widths[0]));
            } else {
                line.push_str(&format!("  {cell:>w$}", w = widths[j]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn status(r: &QueryResult) -> &'static str {
    match r.passed() {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "unchecked",
    }
}

fn mismatch_lines(c: &TableComparison, indent: &str) -> String {
    let mut out = String::new();
    let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| sig(x, MACHINE_DIGITS));
    for m in &c.mismatches {
        let at = if m.row.is_empty() && m.column.is_empty() {
            String::new()
        } else {
            format!(" {} / {}", m.row, m.column)
        };
        out.push_str(&format!(
            "{indent}mismatch{at}: expected {}, got {}\n",
            show(m.expected),
            show(m.actual)
        ));
    }
    out
}

/// Human-readable block for one query result.
pub fn text_result(r: &QueryResult) -> String {
    let mut out = String::new();
    let describe = r.kind.describe();
    let heading = if r.title == describe {
        describe
    } else {
        format!("{}: {describe}", r.title)
    };
    match &r.value {
        QueryValue::Scalar(v) => out.push_str(&format!("  {heading} = {}\n", human(*v))),
        QueryValue::Table(t) => {
            out.push_str(&format!("  {heading}\n"));
            out.push_str(&text_table(t, "    "));
        }
        QueryValue::Comparison {
            collapse,
            relative,
            gap,
            witness,
        } => {
            out.push_str(&format!("  {heading}\n    via collapse\n"));
            out.push_str(&text_table(collapse, "      "));
            out.push_str("    via relative\n");
            out.push_str(&text_table(relative, "      "));
            let at = witness
                .as_ref()
                .map_or_else(String::new, |(row, col)| format!(" at {row} / {col}"));
            out.push_str(&format!("    largest gap {}{at}\n", human(*gap)));
        }
    }
    if let Some(c) = &r.comparison {
        out.push_str(&format!(
            "    {}: max deviation {}\n",
            status(r),
            deviation(c.max_deviation)
        ));
        out.push_str(&mismatch_lines(c, "    "));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct TableJson {
    pub kind: &'static str,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// `null` for a row whose conditioning outcome has probability zero.
    pub cells: Vec<Option<Vec<f64>>>,
}

impl TableJson {
    pub fn new(t: &ProbabilityTable) -> Self {
        let kind = match t.kind() {
            formalism_core::formalisms::TableKind::Joint => "joint",
            formalism_core::formalisms::TableKind::ConditionalByRow => "conditional",
        };
        TableJson {
            kind,
            rows: t.row_labels().to_vec(),
            columns: t.column_labels().to_vec(),
            cells: (0..t.row_labels().len())
                .map(|i| {
                    t.is_row_defined(i)
                        .then(|| t.entries()[i].iter().map(|&x| round_sig(x, MACHINE_DIGITS)).collect())
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MismatchJson {
    pub row: String,
    pub column: String,
    pub expected: Option<f64>,
    pub actual: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub tolerance: f64,
    pub max_deviation: Option<f64>,
    pub mismatches: Vec<MismatchJson>,
}

#[derive(Debug, Serialize)]
pub struct QueryJson {
    pub name: String,
    pub query: String,
    pub kind: &'static str,
    pub status: &'static str,
    pub value: Option<f64>,
    pub table: Option<TableJson>,
    pub collapse: Option<TableJson>,
    pub relative: Option<TableJson>,
    pub gap: Option<f64>,
    pub witness: Option<[String; 2]>,
    pub expected: Option<ExpectedJson>,
    pub check: Option<CheckJson>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum ExpectedJson {
    Scalar(f64),
    Table(TableJson),
}

pub fn json_result(r: &QueryResult, q: &Query, tol: f64) -> QueryJson {
    let round = |x: f64| round_sig(x, MACHINE_DIGITS);
    let mut out = QueryJson {
        name: r.title.clone(),
        query: r.kind.describe(),
        kind: "scalar",
        status: status(r),
        value: None,
        table: None,
        collapse: None,
        relative: None,
        gap: None,
        witness: None,
        expected: q.expected.as_ref().map(|e| match e {
            Expectation::Scalar(v) => ExpectedJson::Scalar(round(*v)),
            Expectation::Table(t) => ExpectedJson::Table(TableJson::new(t)),
        }),
        check: r.comparison.as_ref().map(|c| CheckJson {
            tolerance: q.tolerance.unwrap_or(tol),
            max_deviation: c.max_deviation.is_finite().then(|| round(c.max_deviation)),
            mismatches: c
                .mismatches
                .iter()
                .map(|m| MismatchJson {
                    row: m.row.clone(),
                    column: m.column.clone(),
                    expected: m.expected.map(round),
                    actual: m.actual.map(round),
                })
                .collect(),
        }),
    };
    match &r.value {
        QueryValue::Scalar(v) => out.value = Some(round(*v)),
        QueryValue::Table(t) => {
            out.kind = "table";
            out.table = Some(TableJson::new(t));
        }
        QueryValue::Comparison {
            collapse,
            relative,
            gap,
            witness,
        } => {
            out.kind = "comparison";
            out.collapse = Some(TableJson::new(collapse));
            out.relative = Some(TableJson::new(relative));
            out.gap = Some(round(*gap));
            out.witness = witness.as_ref().map(|(a, b)| [a.clone(), b.clone()]);
        }
    }
    out
}

/// One CSV record per cell: `kind` is `scalar`, `table`, `collapse`,
/// `relative` or `gap`.
pub fn csv_records(r: &QueryResult, q: &Query) -> Vec<[String; 6]> {
    let num = |x: f64| sig(x, MACHINE_DIGITS);
    let failed = |row: &str, col: &str| {
        r.comparison
            .as_ref()
            .is_some_and(|c| c.mismatches.iter().any(|m| m.row == row && m.column == col))
    };
    let cell_status = |row: &str, col: &str, expected: &Option<f64>| -> String {
        if failed(row, col) {
            "fail".into()
        } else if expected.is_some() {
            "pass".into()
        } else {
            String::new()
        }
    };
    let mut out = Vec::new();
    let mut table_cells = |kind: &str, t: &ProbabilityTable, with_expectation: bool| {
        for (i, row) in t.row_labels().iter().enumerate() {
            for (j, col) in t.column_labels().iter().enumerate() {
                let value = if t.is_row_defined(i) {
                    num(t.entries()[i][j])
                } else {
                    "undefined".into()
                };
                let expected = match (&q.expected, with_expectation) {
                    (Some(Expectation::Table(e)), true) => e.row_index(row).and_then(|_| e.get(row, col)),
                    _ => None,
                };
                out.push([
                    kind.to_string(),
                    row.clone(),
                    col.clone(),
                    value,
                    expected.map(num).unwrap_or_default(),
                    cell_status(row, col, &expected),
                ]);
            }
        }
    };
    match &r.value {
        QueryValue::Scalar(v) => {
            let expected = match &q.expected {
                Some(Expectation::Scalar(e)) => Some(*e),
                _ => None,
            };
            let s = cell_status("", "", &expected);
            out.push([
                "scalar".into(),
                String::new(),
                String::new(),
                num(*v),
                expected.map(num).unwrap_or_default(),
                s,
            ]);
        }
        QueryValue::Table(t) => table_cells("table", t, true),
        QueryValue::Comparison {
            collapse,
            relative,
            gap,
            witness,
        } => {
            table_cells("collapse", collapse, false);
            table_cells("relative", relative, false);
            let (row, col) = witness.clone().unwrap_or_default();
            out.push(["gap".into(), row, col, num(*gap), String::new(), String::new()]);
        }
    }
    out
}
