//! Instance generators, the truthfulness auditor, Monte Carlo experiments
//! and report writers. Everything is a pure function of its seed.

pub mod audit;
pub mod experiment;
pub mod generate;
pub mod report;
pub mod stats;

pub use audit::{
    audit_truthfulness, deviation_grid, AuditConfig, AuditEntry, AuditReport, MIN_DEVIATIONS,
};
pub use experiment::{
    measure_psi, welfare_experiment, welfare_floor_factor, PsiRow, PsiTable, TrialRecord,
    WelfareConfig, WelfareStats, CONFIDENCE_Z,
};
pub use generate::{
    derive_seed, dominant_values, generate_instance, generate_values, GeneratorSpec,
};
pub use stats::Summary;
