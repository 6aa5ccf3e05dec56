//! Standard (Born + update rule) and relative-state measurement calculi,
//! the general Kraus case, and classical records.

mod kraus;
mod measurement;
mod records;
mod relative;
mod standard;
mod table;

pub use kraus::{
    dilated_sequence_conditional, kraus_dilation, kraus_probability, kraus_sequence_conditional, kraus_update,
    KrausDilation,
};
pub use measurement::{
    ClassicalRegister, KrausMeasurement, ObserverMemory, ProjectiveMeasurement, ProjectiveOutcome, COMPLETION_PREFIX,
};
pub use records::{classical_record_isometry, partial_map_isometry_check, recorded_conditional, ExtensionVerdict};
pub use relative::{
    apply_relative_measurement, measurement_isometry, product_basis_condition, relative_conditional,
    relative_conditional_table, relative_joint_probability, relative_outcome_probability,
};
pub use standard::{born_probability, collapse_update, standard_conditional, subjective_collapse_conditional};
pub(crate) use standard::normalize_row;
pub use table::{CellMismatch, ProbabilityTable, TableComparison, TableKind, TableRow, TABLE_SUM_TOL};

/// Probabilities at or below this are treated as zero when conditioning.
pub const ZERO_PROBABILITY: f64 = 1e-14;
