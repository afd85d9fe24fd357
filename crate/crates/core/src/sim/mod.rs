//! Synthetic spiked data, Monte Carlo replicates and the curve experiments.

pub mod experiments;
pub mod model;
pub mod replicates;
pub mod rng;
pub mod table;

pub use experiments::{
    parse_config, run_blp_convergence, run_experiment, run_ratio_sweep, run_shrinker_curves,
    Experiment, ExperimentConfig, DEFAULT_SEED,
};
pub use model::{
    generate_spiked, sample_spiked, FactorLaw, SignalModel, SpikedModelConfig, SpikedSample,
};
pub use replicates::{run_replicates, RankRule, ReplicateOutcome};
pub use table::{read_curve_table, write_curve_table, CurveTable};
