//! Minimization, oscillating sequences and the example experiments.

mod conditions;
mod gap;
mod minimize;
pub mod random;
mod search;
mod sequences;
pub mod verify;

pub use conditions::{check_minhat_condition, check_ness_condition, MinhatReport, NessReport, Verdict};
pub use gap::{default_gap_grid, gap_experiment_diamond_boundary, GapReport};
pub use minimize::{min_bounds, minimize_discrete, minimize_sequence, MinimizationReport, MinimizeOptions};
pub use search::SearchTrace;
pub use sequences::{cartesian_sc_envelope, recovery_sequence_cartesian, zigzag_sequence, Recovery};
pub use verify::{verify, Finding, Preset, VerifyOptions, VerifyReport};
