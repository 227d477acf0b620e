//! Experiment runners, oracle checks, baselines and result serialization.

mod baselines;
mod experiment;
pub mod oracles;
mod records;
mod report;

pub use baselines::{perceptron_baseline, Perceptron};
pub use experiment::{
    run_bandit_experiment, run_halfspace_experiment, run_seeds, BanditExperiment,
    HalfspaceExperiment, RunOutput,
};
pub use oracles::{
    log_log_slope, ogd_regret_curve, verify_oracles, FakeRewardFn, OracleCheck, OracleReport,
    OracleSuite,
};
pub use records::{RoundRecord, TranscriptWriter, CSV_HEADER};
pub use report::{
    aggregate, Aggregate, Baselines, BoundCheck, ClampFlags, Diagnostics, ExperimentKind,
    MultiSeedReport, RunReport,
};
