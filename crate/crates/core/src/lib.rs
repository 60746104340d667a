//! Total-tardiness scheduling for flexible parallel machines.
//!
//! The problem: jobs made of independent operations must be placed on eligible
//! machines. Each operation belongs to a family that names the column type it
//! needs; switching family on a machine costs a setup, setups may only start
//! inside operator calendar windows, and every column type has a limited number
//! of units shared by all machines. The objective is the sum of job tardiness.
//!
//! The crate provides:
//!  - [`model`]: instances, schedules, the objective and a full feasibility check,
//!  - [`calendar`]: interval sets and multi-unit capacity profiles,
//!  - [`rules`] and [`lta`]: the list treatment heuristic and its priority rules
//!    (ATC, ATCS, ATCOEE, ATCOEEF, EDD, LFO, random),
//!  - [`sa`]: simulated annealing with operation and pack neighborhoods,
//!  - [`generator`]: seeded instance generation for factorial experiments,
//!  - [`harness`]: batch runs, CSV results and a factorial analysis of variance.
//!
//! Score and statistics code is generic over the floating point type through
//! [`Real`]; the aliases below fix it to `f64` for everyday use.

pub mod calendar;
pub mod error;
pub mod generator;
pub mod harness;
pub mod lta;
pub mod model;
pub mod num;
pub mod rules;
pub mod sa;

pub use error::{Error, Result};
pub use num::Real;

pub use calendar::{CapacityProfile, TimeWindowSet};
pub use generator::{generate_design, generate_instance, GenConfig};
pub use harness::{anova_effects, effect_to_ratio, run_experiment, Algorithm, Observation};
pub use lta::run_lta;

pub use model::{
    total_tardiness, validate_schedule, FamilyId, Instance, Job, JobId, MachineId, Minute,
    Operation, OperationId, PlacedOperation, Schedule, Violation,
};
pub use rules::{MachinePolicy, Rule};
pub use sa::{run_sa, SaParams, Structure};

/// Priority rule parameters with `f64` scores.
pub type RuleParams = rules::RuleParams<f64>;
/// Priority rule parameters with `f32` scores.
pub type RuleParams32 = rules::RuleParams<f32>;
/// Candidate placement used by the `f64` rules.
pub type Candidate = rules::Candidate;

/// Factorial analysis report over `f64` responses.
pub type EffectReport = harness::EffectReport<f64>;
