use crate::error::{Error, Result};

/// Tolerance on table normalization.
pub const TABLE_SUM_TOL: f64 = 1e-10;
/// Slack allowed below 0 or above 1 for a single entry before rejection.
const ENTRY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Joint,
    ConditionalByRow,
}

/// One row of a conditional table: the distribution of the target's
/// outcomes given `condition`, or `None` when the conditioning event has
/// probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub condition: String,
    pub columns: Vec<String>,
    pub values: Option<Vec<f64>>,
    /// The unnormalized weights before division by their sum.
    pub weights: Vec<f64>,
}

impl TableRow {
    pub fn get(&self, column: &str) -> Option<f64> {
        let i = self.columns.iter().position(|c| c == column)?;
        self.values.as_ref().map(|v| v[i])
    }

    pub fn is_defined(&self) -> bool {
        self.values.is_some()
    }
}

/// A cell whose value differs from the expected one.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMismatch {
    pub row: String,
    pub column: String,
    pub expected: Option<f64>,
    pub actual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableComparison {
    pub passed: bool,
    pub max_deviation: f64,
    pub mismatches: Vec<CellMismatch>,
}

/// Labeled joint or row-conditional probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    kind: TableKind,
    row_labels: Vec<String>,
    column_labels: Vec<String>,
    entries: Vec<Vec<f64>>,
    defined: Vec<bool>,
}

fn check_entries(entries: &[f64]) -> Result<()> {
    for &e in entries {
        if !e.is_finite() || !(-ENTRY_SLACK..=1.0 + ENTRY_SLACK).contains(&e) {
            return Err(Error::InvalidTable(format!("entry {e} is not a probability")));
        }
    }
    Ok(())
}

fn check_shape(rows: &[String], cols: &[String], entries: &[Vec<f64>]) -> Result<()> {
    if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
        return Err(Error::InvalidTable(format!(
            "entries do not form a {}x{} array",
            rows.len(),
            cols.len()
        )));
    }
    Ok(())
}

impl ProbabilityTable {
    pub fn joint(row_labels: Vec<String>, column_labels: Vec<String>, entries: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(&row_labels, &column_labels, &entries)?;
        let mut total = 0.0;
        for row in &entries {
            check_entries(row)?;
            total += row.iter().sum::<f64>();
        }
        if (total - 1.0).abs() > TABLE_SUM_TOL {
            return Err(Error::InvalidTable(format!("joint entries sum to {total}")));
        }
        let defined = vec![true; row_labels.len()];
        Ok(ProbabilityTable {
            kind: TableKind::Joint,
            row_labels,
            column_labels,
            entries,
            defined,
        })
    }

    /// Rows given as `None` are undefined (conditioning event of
    /// probability zero); they are stored as zeros and flagged.
    pub fn conditional(
        row_labels: Vec<String>,
        column_labels: Vec<String>,
        rows: Vec<Option<Vec<f64>>>,
    ) -> Result<Self> {
        let defined: Vec<bool> = rows.iter().map(Option::is_some).collect();
        let entries: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|r| r.unwrap_or_else(|| vec![0.0; column_labels.len()]))
            .collect();
        check_shape(&row_labels, &column_labels, &entries)?;
        for (i, row) in entries.iter().enumerate() {
            check_entries(row)?;
            let sum: f64 = row.iter().sum();
            if defined[i] && (sum - 1.0).abs() > TABLE_SUM_TOL {
                return Err(Error::InvalidTable(format!(
                    "row `{}` sums to {sum}",
                    row_labels[i]
                )));
            }
        }
        Ok(ProbabilityTable {
            kind: TableKind::ConditionalByRow,
            row_labels,
            column_labels,
            entries,
            defined,
        })
    }

    /// Conditional table assembled from rows sharing one column set.
    pub fn from_rows(rows: Vec<TableRow>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidTable("no rows".into()));
        };
        let columns = first.columns.clone();
        if rows.iter().any(|r| r.columns != columns) {
            return Err(Error::InvalidTable("rows have different columns".into()));
        }
        let labels = rows.iter().map(|r| r.condition.clone()).collect();
        Self::conditional(labels, columns, rows.into_iter().map(|r| r.values).collect())
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn column_labels(&self) -> &[String] {
        &self.column_labels
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn is_row_defined(&self, row: usize) -> bool {
        self.defined[row]
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.row_labels.iter().position(|r| r == label)
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.column_labels.iter().position(|c| c == label)
    }

    /// Entry by labels; `None` for unknown labels or an undefined row.
    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let (r, c) = (self.row_index(row)?, self.column_index(column)?);
        self.defined[r].then(|| self.entries[r][c])
    }

    pub fn row(&self, label: &str) -> Option<&[f64]> {
        let r = self.row_index(label)?;
        self.defined[r].then(|| self.entries[r].as_slice())
    }

    /// Row-major entries.
    pub fn flatten(&self) -> Vec<f64> {
        self.entries.iter().flatten().copied().collect()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().flatten().sum()
    }

    /// Sub-table over the named rows and columns, in the order given. The
    /// result must still satisfy the table invariants.
    pub fn restrict<S: AsRef<str>>(&self, rows: &[S], columns: &[S]) -> Result<Self> {
        let ri = rows
            .iter()
            .map(|r| {
                self.row_index(r.as_ref())
                    .ok_or_else(|| Error::InvalidTable(format!("no row `{}`", r.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        let ci = columns
            .iter()
            .map(|c| {
                self.column_index(c.as_ref())
                    .ok_or_else(|| Error::InvalidTable(format!("no column `{}`", c.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        let row_labels: Vec<String> = rows.iter().map(|r| r.as_ref().to_string()).collect();
        let column_labels: Vec<String> = columns.iter().map(|c| c.as_ref().to_string()).collect();
        let pick = |r: usize| ci.iter().map(|&c| self.entries[r][c]).collect::<Vec<_>>();
        match self.kind {
            TableKind::Joint => Self::joint(row_labels, column_labels, ri.iter().map(|&r| pick(r)).collect()),
            TableKind::ConditionalByRow => Self::conditional(
                row_labels,
                column_labels,
                ri.iter().map(|&r| self.defined[r].then(|| pick(r))).collect(),
            ),
        }
    }

    /// Compares label-aligned cells against `expected`. Cells in undefined
    /// rows match only undefined rows.
    pub fn compare(&self, expected: &ProbabilityTable, tol: f64) -> TableComparison {
        let mut mismatches = Vec::new();
        let mut max_deviation: f64 = 0.0;
        for (er, row) in expected.row_labels.iter().enumerate() {
            for (ec, col) in expected.column_labels.iter().enumerate() {
                let want = expected.defined[er].then(|| expected.entries[er][ec]);
                let got = self.get(row, col);
                let ok = match (want, got) {
                    (Some(w), Some(g)) => {
                        let d = (w - g).abs();
                        max_deviation = max_deviation.max(d);
                        d <= tol
                    }
                    (None, None) => self.row_index(row).is_some(),
                    _ => false,
                };
                if !ok {
                    if want.is_none() || got.is_none() {
                        max_deviation = f64::INFINITY;
                    }
                    mismatches.push(CellMismatch {
                        row: row.clone(),
                        column: col.clone(),
                        expected: want,
                        actual: got,
                    });
                }
            }
        }
        TableComparison {
            passed: mismatches.is_empty(),
            max_deviation,
            mismatches,
        }
    }

    /// `max |self - other|` over cells present and defined in both, with the
    /// labels of the worst cell.
    pub fn max_abs_diff(&self, other: &ProbabilityTable) -> Option<(f64, String, String)> {
        let mut best: Option<(f64, String, String)> = None;
        for row in &self.row_labels {
            for col in &self.column_labels {
                if let (Some(a), Some(b)) = (self.get(row, col), other.get(row, col)) {
                    let d = (a - b).abs();
                    if best.as_ref().is_none_or(|(m, _, _)| d > *m) {
                        best = Some((d, row.clone(), col.clone()));
                    }
                }
            }
        }
        best
    }
}
