//! Configuration, seeding, ensemble orchestration and result files.

mod config;
mod ensemble;
mod output;
mod seed;

pub use config::{
    load_config, parse_config, ExperimentConfig, ModelConfig, MoneyConfig, OutputPaths,
    RunConfig, SweepConfig, SweepParam,
};
pub use ensemble::{
    run_ensemble, EnsembleOptions, EnsembleResult, ResultRow, SweepPoint, TraceLine,
};
pub use output::{
    write_lowhigh, write_per_degree, write_results, write_summary, write_trace, LOWHIGH_HEADER,
    PER_DEGREE_HEADER, SUMMARY_HEADER,
};
pub use seed::derive_seed;
