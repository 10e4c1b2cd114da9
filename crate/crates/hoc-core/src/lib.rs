//! Discovery of correlation patterns among arbitrary numbers of variables.
//!
//! The core idea: score a Boolean feature by comparing how often it is
//! TRUE on the real dataset (qr) against how often it is TRUE on a
//! marginal-preserving scrambled dataset (qs). The hyper-occurrence
//! score `hoc = 1 - qs/qr` generalises pairwise correlation to rules
//! over any number of variables. Features are threshold (quorum) rules
//! arranged in a layered network, and their parameters are trained by
//! an evolutionary search that maximises a coverage objective.
//!
//! Row-level work (propagation, scrambled sampling, population fitness)
//! is data-parallel via rayon when the default `parallel` feature is
//! enabled; results are identical for any worker count, and with the
//! feature disabled the same code paths run sequentially.

pub mod dataset;
pub mod error;
pub mod metrics;
pub mod network;
pub mod objective;
pub mod packed;
pub mod parallel;
pub mod rng;
pub mod scramble;
pub mod search;

#[cfg(test)]
pub(crate) mod testutil;

pub use dataset::{
    generate_planted, generate_planted_exhaustive, generate_planted_multi, ColumnMarginal,
    DataSource, Dataset, PlantSpec,
};
pub use error::{Error, Result};
pub use metrics::{
    hoc, hoc_scores, mutual_information, pearson_binary, score_network, true_probability,
    HocReport,
};
pub use network::{
    eval_rule, ActivationTable, FeatureNetwork, NetworkDoc, NetworkNode, NodeRef, ThresholdRule,
};
pub use objective::{coverage, CoverageConfig, CoverageReport, NodeScope};
pub use scramble::{
    enumerate_exact, sample_mc, ScrambleSource, SdsMode, SdsSample, DEFAULT_EXACT_CAP,
    DEFAULT_MC_SAMPLE_SIZE,
};
pub use search::{
    decode_grid, evolve, evolve_baseline_ga, evolve_with, params_to_network, Algo, ChangeEvent,
    Checkpoint, EvolveOptions, GenerationStat, NetworkShape, PoetGenome, PoetGrid,
    RuleConstraints, SearchConfig, SearchOutcome,
};
