//! Seeded random instances following the laboratory experimental design:
//! 10 machines, 20 column types, Monday to Friday 08:00-18:00 operators, routings of
//! 1 to 3 operations reused across jobs.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::calendar::{WeeklyPattern, MINUTES_PER_DAY};
use crate::error::{Error, Result};
use crate::model::{
    ColumnType, FamilyId, Instance, Job, JobId, MachineId, Minute, Operation, OperationId,
};

pub const LOADS: [usize; 2] = [70, 140];
pub const ROUTINGS: [usize; 2] = [10, 20];
pub const SETUP_RATIOS: [f64; 2] = [0.50, 0.75];
pub const FLEX_MEANS: [u32; 4] = [2, 4, 6, 10];

const MIN_TOTAL_DURATION: Minute = 120;
const MAX_TOTAL_DURATION: Minute = 1440;
const RELEASE_MIN: Minute = -8 * MINUTES_PER_DAY;
const RELEASE_MAX: Minute = 5 * MINUTES_PER_DAY;
const LEAD_TIME_MEAN: f64 = 10.0 * MINUTES_PER_DAY as f64;
const LEAD_TIME_SD: f64 = MINUTES_PER_DAY as f64;
const FLEX_SD: f64 = 0.5;
const WINDOW_TAIL: Minute = 60 * MINUTES_PER_DAY;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub jobs: usize,
    pub routings: usize,
    /// `s / (s + p)` of every operation.
    pub setup_ratio: f64,
    /// Mean number of eligible machines per routing operation.
    pub flex_mean: u32,
    pub machines: usize,
    pub column_types: usize,
    pub seed: u64,
    /// Accept values outside the experimental levels.
    #[serde(default)]
    pub unchecked: bool,
}

impl GenConfig {
    pub fn new(jobs: usize, routings: usize, setup_ratio: f64, flex_mean: u32, seed: u64) -> Self {
        Self {
            jobs,
            routings,
            setup_ratio,
            flex_mean,
            machines: 10,
            column_types: 20,
            seed,
            unchecked: false,
        }
    }

    /// Same design cell with a different job count, outside the checked levels.
    pub fn scaled(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self.unchecked = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.machines == 0 || self.column_types == 0 || self.routings == 0 {
            return bad("machines, column types and routings must be positive".into());
        }
        if !(0.0..1.0).contains(&self.setup_ratio) {
            return bad(format!("setup ratio {} outside [0, 1)", self.setup_ratio));
        }
        if self.flex_mean == 0 || self.flex_mean as usize > self.machines {
            return bad(format!(
                "flex mean {} outside [1, {}]",
                self.flex_mean, self.machines
            ));
        }
        if self.unchecked {
            return Ok(());
        }
        if !LOADS.contains(&self.jobs) {
            return bad(format!("jobs {} not in {LOADS:?}", self.jobs));
        }
        if !ROUTINGS.contains(&self.routings) {
            return bad(format!("routings {} not in {ROUTINGS:?}", self.routings));
        }
        if !SETUP_RATIOS.contains(&self.setup_ratio) {
            return bad(format!(
                "setup ratio {} not in {SETUP_RATIOS:?}",
                self.setup_ratio
            ));
        }
        if !FLEX_MEANS.contains(&self.flex_mean) {
            return bad(format!(
                "flex mean {} not in {FLEX_MEANS:?}",
                self.flex_mean
            ));
        }
        if self.machines != 10 || self.column_types != 20 {
            return bad("the checked design uses 10 machines and 20 column types".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct RoutingOp {
    family: usize,
    processing: Minute,
    setup: Minute,
    eligible: Vec<usize>,
}

fn draw_routing(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Vec<RoutingOp> {
    let flex = Normal::new(cfg.flex_mean as f64, FLEX_SD).expect("valid normal");
    let n_ops = rng.random_range(1..=3);
    (0..n_ops)
        .map(|_| {
            let family = rng.random_range(0..cfg.column_types);
            let total = rng.random_range(MIN_TOTAL_DURATION..=MAX_TOTAL_DURATION);
            let mut setup = (cfg.setup_ratio * total as f64).round() as Minute;
            if total - setup < 1 {
                setup = total - 1;
            }
            let count = if cfg.flex_mean as usize >= cfg.machines {
                cfg.machines
            } else {
                (flex.sample(rng).round() as i64).clamp(1, cfg.machines as i64) as usize
            };
            let mut eligible = sample(rng, cfg.machines, count).into_vec();
            eligible.sort_unstable();
            RoutingOp {
                family,
                processing: total - setup,
                setup,
                eligible,
            }
        })
        .collect()
}

/// Column units by usage rank (total processing minutes, ties by family id): the top
/// 10% of types get 3 units, the next 30% get 2, the rest 1.
pub fn column_units(usage: &[Minute]) -> Vec<u32> {
    let n = usage.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&f| (std::cmp::Reverse(usage[f]), f));
    let three = (n as f64 * 0.1).round() as usize;
    let two_or_more = (n as f64 * 0.4).round() as usize;
    let mut units = vec![1; n];
    for (rank, &f) in order.iter().enumerate() {
        units[f] = if rank < three {
            3
        } else if rank < two_or_more {
            2
        } else {
            1
        };
    }
    units
}

pub fn generate_instance(cfg: &GenConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let routings: Vec<Vec<RoutingOp>> = (0..cfg.routings)
        .map(|_| draw_routing(cfg, &mut rng))
        .collect();

    let lead = Normal::new(LEAD_TIME_MEAN, LEAD_TIME_SD).expect("valid normal");
    let mut usage = vec![0; cfg.column_types];
    let mut next_op = 0u32;
    let mut jobs = Vec::with_capacity(cfg.jobs);
    for j in 0..cfg.jobs {
        let routing = &routings[rng.random_range(0..cfg.routings)];
        let release = rng.random_range(RELEASE_MIN..=RELEASE_MAX);
        let due = release + (lead.sample(&mut rng).round() as Minute).max(0);
        let operations = routing
            .iter()
            .map(|r| {
                usage[r.family] += r.processing;
                next_op += 1;
                Operation {
                    id: OperationId(next_op - 1),
                    job: JobId(j as u32),
                    family: FamilyId(r.family as u32),
                    processing: r.processing,
                    setup: r.setup,
                    eligible: r.eligible.iter().map(|&m| MachineId(m as u32)).collect(),
                }
            })
            .collect();
        jobs.push(Job {
            id: JobId(j as u32),
            release,
            due,
            operations,
        });
    }

    let last_release = jobs.iter().map(|j| j.release).max().unwrap_or(RELEASE_MAX);
    let windows = WeeklyPattern::office_hours().expand(RELEASE_MIN, last_release + WINDOW_TAIL);
    let column_types = column_units(&usage)
        .into_iter()
        .enumerate()
        .map(|(f, units)| ColumnType {
            family: FamilyId(f as u32),
            units,
        })
        .collect();
    Instance::new(
        (0..cfg.machines as u32).map(MachineId).collect(),
        column_types,
        windows,
        jobs,
    )
}

/// Full factorial design: routings × setup ratio × flexibility for each load, with
/// `seeds_per_cell` replicates whose seeds are drawn from `master_seed`.
pub fn generate_design(loads: &[usize], seeds_per_cell: usize, master_seed: u64) -> Vec<GenConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    let mut out = Vec::with_capacity(loads.len() * 16 * seeds_per_cell);
    for &jobs in loads {
        for routings in ROUTINGS {
            for ratio in SETUP_RATIOS {
                for flex in FLEX_MEANS {
                    for _ in 0..seeds_per_cell {
                        let mut cfg = GenConfig::new(jobs, routings, ratio, flex, rng.random());
                        cfg.unchecked = !LOADS.contains(&jobs);
                        out.push(cfg);
                    }
                }
            }
        }
    }
    out
}
