//! Two measurement calculi side by side: the standard Born rule with the
//! measurement-update (collapse) rule, and the relative-state formalism in
//! which measurements are isometries and probabilities are read off observer
//! memories by projection.

pub mod checks;
pub mod error;
pub mod formalisms;
pub mod random;
pub mod scenarios;
pub mod tensor;

pub use error::{Error, Result};
