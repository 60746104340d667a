//! Batch experiments over generated designs and their factorial analysis.

mod algorithm;
pub mod anova;
mod experiment;

pub use algorithm::Algorithm;
pub use anova::{
    anova, anova_effects, anova_effects_at, effect_to_ratio, EffectReport, Factor, FactorEffect,
    InteractionEffect,
};
pub use experiment::{log_tardiness, read_csv, run_experiment, solve, write_csv, Observation};
