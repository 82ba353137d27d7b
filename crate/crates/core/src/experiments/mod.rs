//! Study drivers: each runs one sweep, returns tables plus named checks, and
//! can write CSVs and a JSON manifest.

mod config;
mod output;
mod studies;

pub use config::{
    default_base, default_perturbation, CgoConfig, DomainConfig, ExperimentConfig, GridConfig, HolonomyConfig,
    SweepConfig,
};
pub use output::{config_hash, Check, StudyReport, Table};
pub use studies::*;
