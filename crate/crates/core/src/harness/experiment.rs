use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::algorithm::Algorithm;
use crate::error::{Error, Result};
use crate::generator::{generate_instance, GenConfig};
use crate::lta::run_lta;
use crate::model::{total_tardiness, validate_schedule, Instance, Minute, Schedule};
use crate::sa::run_sa;

/// One solver run in an experiment. Failed runs keep their row with `error` set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Observation {
    pub load: usize,
    pub n_routings: usize,
    pub setup_ratio: f64,
    pub flex_mean: u32,
    pub algorithm: String,
    pub seed: u64,
    pub tardiness: Option<Minute>,
    pub log_tardiness: Option<f64>,
    pub runtime_ms: f64,
    pub error: Option<String>,
}

/// `log10(max(t, 1))`, so optimal runs stay in the analysis at 0.
pub fn log_tardiness(tardiness: Minute) -> f64 {
    (tardiness.max(1) as f64).log10()
}

/// Runs one algorithm on one instance.
pub fn solve(instance: &Instance, algorithm: &Algorithm, seed: u64) -> Result<Schedule> {
    match algorithm {
        Algorithm::Lta(params) => run_lta(instance, params, seed),
        Algorithm::Sa { params, initial } => {
            let start = run_lta(instance, initial, seed)?;
            run_sa(instance, &start, params, seed)
        }
    }
}

fn observe(
    cfg: &GenConfig,
    instance: std::result::Result<&Instance, &Error>,
    algorithm: &Algorithm,
) -> Observation {
    let mut row = Observation {
        load: cfg.jobs,
        n_routings: cfg.routings,
        setup_ratio: cfg.setup_ratio,
        flex_mean: cfg.flex_mean,
        algorithm: algorithm.label(),
        seed: cfg.seed,
        tardiness: None,
        log_tardiness: None,
        runtime_ms: 0.0,
        error: None,
    };
    let instance = match instance {
        Ok(i) => i,
        Err(e) => {
            row.error = Some(format!("generation failed: {e}"));
            return row;
        }
    };
    let clock = Instant::now();
    let solved = solve(instance, algorithm, cfg.seed);
    row.runtime_ms = clock.elapsed().as_secs_f64() * 1000.0;
    let outcome = solved.and_then(|schedule| {
        let violations = validate_schedule(instance, &schedule);
        match violations.first() {
            Some(v) => Err(Error::Internal(format!(
                "{} violations, first: {v}",
                violations.len()
            ))),
            None => total_tardiness(&schedule, instance),
        }
    });
    match outcome {
        Ok(t) => {
            row.tardiness = Some(t);
            row.log_tardiness = Some(log_tardiness(t));
        }
        Err(e) => {
            log::warn!("{} on seed {} failed: {e}", row.algorithm, row.seed);
            row.error = Some(e.to_string());
        }
    }
    row
}

/// One observation per (design entry, algorithm), in design order then algorithm order.
/// Design entries run on `threads` worker threads; the output does not depend on it.
pub fn run_experiment(
    design: &[GenConfig],
    algorithms: &[Algorithm],
    threads: usize,
) -> Result<Vec<Observation>> {
    if design.is_empty() || algorithms.is_empty() {
        return Err(Error::InvalidConfig(
            "empty design or algorithm list".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let rows: Vec<Vec<Observation>> = pool.install(|| {
        design
            .par_iter()
            .map(|cfg| {
                let instance = generate_instance(cfg);
                algorithms
                    .iter()
                    .map(|a| observe(cfg, instance.as_ref(), a))
                    .collect()
            })
            .collect()
    });
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_csv<W: Write>(writer: W, observations: &[Observation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for o in observations {
        w.serialize(o)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<Observation>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
