use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encoding::{decode_dense, Decoded, Encoding};
use super::neighborhood::{propose_neighbor, Mechanism, ProposalFailure, MECHANISMS};
use crate::error::{Error, Result};
use crate::model::{total_tardiness, validate_schedule, Instance, Minute, Schedule};

/// Neighborhood structure: which mechanisms are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Simple,
    Op,
    OpPa,
}

impl Structure {
    pub const ALL: [Structure; 3] = [Structure::Simple, Structure::Op, Structure::OpPa];

    pub fn mechanism_ids(self) -> &'static [u8] {
        match self {
            Structure::Simple => &[0],
            Structure::Op => &[1, 2, 3],
            Structure::OpPa => &[1, 2, 3, 4, 5, 6, 7],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Structure::Simple => "simple",
            Structure::Op => "op",
            Structure::OpPa => "op_pa",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '+'], "_").as_str() {
            "simple" => Ok(Structure::Simple),
            "op" | "operation" => Ok(Structure::Op),
            "op_pa" | "oppa" | "operation_pack" => Ok(Structure::OpPa),
            _ => Err(Error::InvalidConfig(format!("unknown structure `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaParams {
    pub structure: Structure,
    /// Overrides the structure's mechanism set when present.
    pub mechanisms: Option<Vec<Mechanism>>,
    pub cooling: f64,
    pub descent_iterations: usize,
    pub plateau_iterations: usize,
    pub plateau_acceptances: usize,
    pub initial_accept_prob: f64,
    /// `None` runs until the dead-level rule stops the search.
    pub max_iterations: Option<usize>,
    pub dead_levels: usize,
    pub resample_limit: usize,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            structure: Structure::OpPa,
            mechanisms: None,
            cooling: 0.95,
            descent_iterations: 100,
            plateau_iterations: 400,
            plateau_acceptances: 80,
            initial_accept_prob: 0.8,
            max_iterations: Some(15_000),
            dead_levels: 3,
            resample_limit: 50,
        }
    }
}

impl SaParams {
    pub fn new(structure: Structure) -> Self {
        Self {
            structure,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.cooling) {
            return Err(Error::InvalidConfig(format!(
                "cooling factor {} not in (0,1)",
                self.cooling
            )));
        }
        if !open_unit(self.initial_accept_prob) {
            return Err(Error::InvalidConfig(format!(
                "initial acceptance probability {} not in (0,1)",
                self.initial_accept_prob
            )));
        }
        if self.plateau_iterations == 0 || self.plateau_acceptances == 0 || self.dead_levels == 0 {
            return Err(Error::InvalidConfig(
                "plateau and dead-level counts must be positive".into(),
            ));
        }
        if self.mechanisms.as_ref().is_some_and(Vec::is_empty) {
            return Err(Error::InvalidConfig("empty mechanism set".into()));
        }
        Ok(())
    }

    pub fn mechanism_set(&self) -> Vec<Mechanism> {
        self.mechanisms.clone().unwrap_or_else(|| {
            self.structure
                .mechanism_ids()
                .iter()
                .map(|&id| MECHANISMS[id as usize])
                .collect()
        })
    }
}

/// Temperature at which a move worsening by `mean_delta` is accepted with probability `p0`.
pub fn initial_temperature(mean_delta: f64, p0: f64) -> f64 {
    mean_delta / -p0.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub temperature: f64,
    pub current: Minute,
    pub best: Minute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Optimal,
    MaxIterations,
    DeadLevels,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MechanismStats {
    pub id: u8,
    pub proposed: usize,
    pub failed: usize,
    pub accepted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaStats {
    pub initial_tardiness: Minute,
    pub best_tardiness: Minute,
    pub iterations: usize,
    pub accepted: usize,
    pub improved: usize,
    pub failed_proposals: usize,
    pub decode_failures: usize,
    pub levels: usize,
    pub initial_temperature: f64,
    pub final_temperature: f64,
    pub mean_descent_delta: f64,
    pub stop_reason: StopReason,
    pub mechanisms: Vec<MechanismStats>,
}

#[derive(Debug, Clone)]
pub struct SaReport {
    pub schedule: Schedule,
    pub trace: Vec<TracePoint>,
    pub stats: SaStats,
}

/// Writes a trace as CSV with columns `iteration,temperature,current,best`.
pub fn write_trace<W: std::io::Write>(writer: W, trace: &[TracePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for point in trace {
        w.serialize(point)?;
    }
    w.flush()?;
    Ok(())
}

/// Anneals from `initial` and returns the best schedule seen.
pub fn run_sa(
    instance: &Instance,
    initial: &Schedule,
    params: &SaParams,
    seed: u64,
) -> Result<Schedule> {
    Ok(run_sa_detailed(instance, initial, params, seed)?.schedule)
}

struct Search<'a> {
    instance: &'a Instance,
    params: &'a SaParams,
    mechanisms: Vec<Mechanism>,
    stats: Vec<MechanismStats>,
    rng: ChaCha8Rng,
    current: (Encoding, Decoded),
    best: Option<(Encoding, Decoded)>,
    best_tardiness: Minute,
    failed: usize,
    decode_failures: usize,
}

enum Step {
    Optimal,
    Failed,
    Evaluated {
        delta: Minute,
        candidate: (Encoding, Decoded),
        slot: usize,
    },
}

impl Search<'_> {
    fn current_tardiness(&self) -> Minute {
        self.current.1.total_tardiness
    }

    fn propose(&mut self) -> Step {
        let slot = self.rng.random_range(0..self.mechanisms.len());
        let mech = self.mechanisms[slot];
        self.stats[slot].proposed += 1;
        let (enc, dec) = &self.current;
        match propose_neighbor(
            self.instance,
            enc,
            dec,
            &mech,
            self.params.resample_limit,
            &mut self.rng,
        ) {
            Err(ProposalFailure::Optimal) => Step::Optimal,
            Err(ProposalFailure::NoSecondItem) => {
                self.failed += 1;
                self.stats[slot].failed += 1;
                Step::Failed
            }
            Ok(next) => match decode_dense(&next, self.instance) {
                Ok(decoded) => Step::Evaluated {
                    delta: decoded.total_tardiness - self.current_tardiness(),
                    candidate: (next, decoded),
                    slot,
                },
                Err(e) => {
                    log::debug!("neighbor rejected, decode failed: {e}");
                    self.decode_failures += 1;
                    self.stats[slot].failed += 1;
                    Step::Failed
                }
            },
        }
    }

    fn accept(&mut self, candidate: (Encoding, Decoded), slot: usize) -> bool {
        self.stats[slot].accepted += 1;
        self.current = candidate;
        if self.current_tardiness() < self.best_tardiness {
            self.best_tardiness = self.current_tardiness();
            self.best = Some(self.current.clone());
            true
        } else {
            false
        }
    }
}

/// Anneals from `initial`, also returning the per-iteration trace and run statistics.
pub fn run_sa_detailed(
    instance: &Instance,
    initial: &Schedule,
    params: &SaParams,
    seed: u64,
) -> Result<SaReport> {
    params.validate()?;
    let violations = validate_schedule(instance, initial);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidInstance(format!(
            "initial schedule is infeasible ({} violations, first: {v})",
            violations.len()
        )));
    }
    let initial_tardiness = total_tardiness(initial, instance)?;
    let encoding = Encoding::from_schedule(instance, initial)?;
    let decoded = decode_dense(&encoding, instance)?;
    let mechanisms = params.mechanism_set();
    let mut search = Search {
        instance,
        params,
        stats: mechanisms
            .iter()
            .map(|m| MechanismStats {
                id: m.id,
                ..Default::default()
            })
            .collect(),
        mechanisms,
        rng: ChaCha8Rng::seed_from_u64(seed),
        best_tardiness: initial_tardiness,
        best: None,
        current: (encoding, decoded),
        failed: 0,
        decode_failures: 0,
    };
    if search.current_tardiness() < search.best_tardiness {
        search.best_tardiness = search.current_tardiness();
        search.best = Some(search.current.clone());
    }

    let mut iterations = 0usize;
    let mut accepted = 0usize;
    let mut improved = 0usize;
    let mut trace = Vec::new();
    let mut stop = None;

    // descent: improvements only, measuring the typical move size
    let mut delta_sum = 0.0;
    let mut delta_count = 0usize;
    for _ in 0..params.descent_iterations {
        match search.propose() {
            Step::Optimal => {
                stop = Some(StopReason::Optimal);
                break;
            }
            Step::Failed => {}
            Step::Evaluated {
                delta,
                candidate,
                slot,
            } => {
                delta_sum += delta.abs() as f64;
                delta_count += 1;
                if delta < 0 {
                    accepted += 1;
                    improved += usize::from(search.accept(candidate, slot));
                }
            }
        }
    }
    let mean_delta = if delta_count > 0 {
        delta_sum / delta_count as f64
    } else {
        0.0
    };
    let t0 = if mean_delta > 0.0 {
        initial_temperature(mean_delta, params.initial_accept_prob)
    } else {
        1.0
    };

    let mut temperature = t0;
    let mut levels = 1usize;
    let mut level_iterations = 0usize;
    let mut level_acceptances = 0usize;
    let mut dead = 0usize;
    while stop.is_none() {
        if params.max_iterations.is_some_and(|max| iterations >= max) {
            stop = Some(StopReason::MaxIterations);
            break;
        }
        iterations += 1;
        level_iterations += 1;
        match search.propose() {
            Step::Optimal => {
                stop = Some(StopReason::Optimal);
            }
            Step::Failed => {}
            Step::Evaluated {
                delta,
                candidate,
                slot,
            } => {
                let take = delta <= 0
                    || search.rng.random::<f64>() < (-(delta as f64) / temperature).exp();
                if take {
                    accepted += 1;
                    level_acceptances += 1;
                    improved += usize::from(search.accept(candidate, slot));
                }
            }
        }
        trace.push(TracePoint {
            iteration: iterations,
            temperature,
            current: search.current_tardiness(),
            best: search.best_tardiness,
        });
        if level_iterations >= params.plateau_iterations
            || level_acceptances >= params.plateau_acceptances
        {
            dead = if level_acceptances == 0 { dead + 1 } else { 0 };
            if dead >= params.dead_levels {
                stop = Some(StopReason::DeadLevels);
                break;
            }
            temperature *= params.cooling;
            levels += 1;
            level_iterations = 0;
            level_acceptances = 0;
        }
    }

    let schedule = match &search.best {
        Some((enc, dec)) => dec.to_schedule(instance, enc),
        None => initial.clone(),
    };
    debug_assert!(validate_schedule(instance, &schedule).is_empty());
    let stats = SaStats {
        initial_tardiness,
        best_tardiness: search.best_tardiness,
        iterations,
        accepted,
        improved,
        failed_proposals: search.failed,
        decode_failures: search.decode_failures,
        levels,
        initial_temperature: t0,
        final_temperature: temperature,
        mean_descent_delta: mean_delta,
        stop_reason: stop.unwrap_or(StopReason::MaxIterations),
        mechanisms: search.stats,
    };
    Ok(SaReport {
        schedule,
        trace,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_instance, GenConfig};
    use crate::lta::run_lta;
    use crate::rules::RuleParams;
    use approx::assert_abs_diff_eq;

    #[test]
    fn initial_temperature_example() {
        assert_abs_diff_eq!(initial_temperature(100.0, 0.8), 448.14, epsilon = 0.01);
    }

    #[test]
    fn structures_parse_and_map() {
        assert_eq!("op_pa".parse::<Structure>().unwrap(), Structure::OpPa);
        assert_eq!("OP+PA".parse::<Structure>().unwrap(), Structure::OpPa);
        assert_eq!(Structure::Simple.mechanism_ids(), &[0]);
        assert!("tabu".parse::<Structure>().is_err());
        assert!(SaParams {
            cooling: 1.0,
            ..SaParams::default()
        }
        .validate()
        .is_err());
    }

    fn small(seed: u64) -> (Instance, Schedule) {
        let cfg = GenConfig::new(140, 20, 0.75, 4, seed).scaled(25);
        let inst = generate_instance(&cfg).unwrap();
        let init = run_lta(&inst, &RuleParams::<f64>::default(), seed).unwrap();
        (inst, init)
    }

    #[test]
    fn never_worse_than_initial_and_feasible() {
        for seed in 0..3 {
            let (inst, init) = small(seed);
            for s in Structure::ALL {
                let params = SaParams {
                    max_iterations: Some(800),
                    ..SaParams::new(s)
                };
                let rep = run_sa_detailed(&inst, &init, &params, seed).unwrap();
                assert!(validate_schedule(&inst, &rep.schedule).is_empty());
                let t = total_tardiness(&rep.schedule, &inst).unwrap();
                assert_eq!(t, rep.stats.best_tardiness);
                assert!(t <= total_tardiness(&init, &inst).unwrap());
                assert!(rep.trace.windows(2).all(|w| w[1].best <= w[0].best));
                assert!(rep
                    .trace
                    .windows(2)
                    .all(|w| w[1].temperature <= w[0].temperature));
            }
        }
    }

    #[test]
    fn reproducible() {
        let (inst, init) = small(9);
        let params = SaParams {
            max_iterations: Some(500),
            ..SaParams::new(Structure::Simple)
        };
        let a = run_sa_detailed(&inst, &init, &params, 4).unwrap();
        let b = run_sa_detailed(&inst, &init, &params, 4).unwrap();
        assert_eq!(a.schedule, b.schedule);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn trace_csv_header() {
        let mut out = Vec::new();
        let point = TracePoint {
            iteration: 1,
            temperature: 2.5,
            current: 10,
            best: 7,
        };
        write_trace(&mut out, &[point]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "iteration,temperature,current,best\n1,2.5,10,7\n"
        );
    }

    #[test]
    fn rejects_infeasible_start() {
        let (inst, init) = small(1);
        let mut broken = init.clone();
        broken.placements.pop();
        assert!(run_sa(&inst, &broken, &SaParams::default(), 0).is_err());
    }
}
