//! Configuration, corpus generation, experiments and report emission.

pub mod config;
pub mod corpus;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, Resolved};
pub use corpus::{build_corpus, FieldSpec};
pub use experiments::{
    hardy_corpus, run_experiment, run_hardy, run_norm, run_sqfn, run_young, run_zygmund, with_workers, ExperimentKind,
};
pub use report::{emit, Cell, Check, Format, Status, Table, VerificationReport};
