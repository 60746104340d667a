//! List treatment algorithm: at every loop compute the earliest placement of each
//! schedulable (machine, operation) pair, let the priority rule pick one, commit
//! it, and update machine clocks, families and column availability.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calendar::{
    earliest_start_with_setup_within, earliest_start_without_setup_within, CapacityProfile,
    DEFAULT_SEARCH_HORIZON,
};
use crate::error::{Error, Result};
use crate::model::{Instance, Minute, PlacedOperation, Schedule};
use crate::rules::{select_assignment, Candidate, RuleParams, SelectionContext};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct MachineState {
    /// `L_m`: unscheduled operations eligible on the machine, ascending op index.
    pub schedulable: Vec<usize>,
    /// `t_m`.
    pub clock: Minute,
    /// `F_m`, dense family index of the last assigned operation.
    pub last_family: Option<usize>,
    /// `LAW_m = t_m + Σ p / |ME|` over `L_m`. Diagnostic only.
    pub law: f64,
}

/// Mutable state of one run. Owns its column profiles.
#[derive(Debug, Clone)]
pub struct LtaState<'a> {
    instance: &'a Instance,
    machines: Vec<MachineState>,
    profiles: Vec<CapacityProfile>,
    scheduled: Vec<bool>,
    remaining: usize,
    sum_processing: Minute,
    sum_setup: Minute,
    placements: Vec<PlacedOperation>,
    horizon: Minute,
}

fn potential_load(instance: &Instance, clock: Minute, ops: &[usize]) -> f64 {
    clock as f64
        + ops
            .iter()
            .map(|&k| {
                let op = instance.op(k);
                op.processing as f64 / op.eligible.len() as f64
            })
            .sum::<f64>()
}

impl<'a> LtaState<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let origin = instance.horizon_origin();
        let mut machines: Vec<MachineState> = (0..instance.machine_count())
            .map(|_| MachineState {
                schedulable: Vec::new(),
                clock: origin,
                last_family: None,
                law: 0.0,
            })
            .collect();
        for (k, op) in instance.ops().iter().enumerate() {
            for &m in &op.eligible {
                machines[m].schedulable.push(k);
            }
        }
        for m in &mut machines {
            m.law = potential_load(instance, m.clock, &m.schedulable);
        }
        Self {
            instance,
            machines,
            profiles: instance
                .column_types()
                .iter()
                .map(|ct| CapacityProfile::new(ct.units))
                .collect(),
            scheduled: vec![false; instance.op_count()],
            remaining: instance.op_count(),
            sum_processing: instance.ops().iter().map(|o| o.processing).sum(),
            sum_setup: instance.ops().iter().map(|o| o.setup).sum(),
            placements: Vec::with_capacity(instance.op_count()),
            horizon: DEFAULT_SEARCH_HORIZON,
        }
    }

    pub fn with_horizon(mut self, horizon: Minute) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn machines(&self) -> &[MachineState] {
        &self.machines
    }

    pub fn profile(&self, family: usize) -> &CapacityProfile {
        &self.profiles[family]
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn is_done(&self) -> bool {
        self.remaining == 0
    }

    /// Mean processing and setup time of the unscheduled operations.
    pub fn means<F: Real>(&self) -> (F, F) {
        if self.remaining == 0 {
            return (F::zero(), F::zero());
        }
        let n = F::from_count(self.remaining);
        (
            F::from_minutes(self.sum_processing) / n,
            F::from_minutes(self.sum_setup) / n,
        )
    }

    pub fn placements(&self) -> &[PlacedOperation] {
        &self.placements
    }

    pub fn into_schedule(self) -> Schedule {
        Schedule::new(self.placements)
    }

    /// Earliest placement of every schedulable pair. Pairs without a slot inside the
    /// search horizon are skipped for this loop only.
    pub fn candidate_times(&self) -> Result<Vec<Candidate>> {
        let inst = self.instance;
        let mut out = Vec::new();
        let mut dropped = 0usize;
        for (m, ms) in self.machines.iter().enumerate() {
            for &k in &ms.schedulable {
                let op = inst.op(k);
                let t_min = ms.clock.max(op.release);
                let profile = &self.profiles[op.family];
                let setup_required = ms.last_family != Some(op.family);
                let placed = if setup_required {
                    earliest_start_with_setup_within(
                        t_min,
                        op.setup,
                        op.processing,
                        inst.operator_windows(),
                        profile,
                        self.horizon,
                    )
                    .map(|t| (t, t + op.setup + op.processing))
                } else {
                    earliest_start_without_setup_within(t_min, op.processing, profile, self.horizon)
                        .map(|t| (t, t + op.processing))
                };
                let (start, completion) = match placed {
                    Ok(v) => v,
                    Err(Error::NoSlot { from, horizon }) => {
                        log::warn!(
                            "operation {} has no slot on machine {} from minute {from} within {horizon} minutes",
                            op.id,
                            inst.machines()[m]
                        );
                        dropped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                out.push(Candidate {
                    op: k,
                    operation: op.id,
                    job: inst.jobs()[op.job].id,
                    machine: m,
                    machine_id: inst.machines()[m],
                    start,
                    completion,
                    setup_required,
                    machine_clock: ms.clock,
                    processing: op.processing,
                    setup: op.setup,
                    due: op.due,
                    eligible_count: op.eligible.len(),
                });
            }
        }
        if out.is_empty() && dropped > 0 {
            return Err(Error::AllCandidatesInfeasible);
        }
        Ok(out)
    }

    /// Assigns the chosen pair and updates the shop state.
    pub fn commit_assignment(&mut self, chosen: &Candidate) -> Result<PlacedOperation> {
        let inst = self.instance;
        let k = chosen.op;
        if self.scheduled[k] {
            return Err(Error::Internal(format!(
                "operation {} committed twice",
                chosen.operation
            )));
        }
        let op = inst.op(k);
        self.profiles[op.family]
            .reserve(chosen.start, chosen.completion)
            .map_err(|e| {
                Error::Internal(format!(
                    "column reservation for operation {} failed: {e}",
                    op.id
                ))
            })?;

        let ms = &mut self.machines[chosen.machine];
        debug_assert!(chosen.completion >= ms.clock);
        ms.clock = chosen.completion;
        ms.last_family = Some(op.family);

        self.scheduled[k] = true;
        self.remaining -= 1;
        self.sum_processing -= op.processing;
        self.sum_setup -= op.setup;
        for &m in &op.eligible {
            let ms = &mut self.machines[m];
            if let Ok(pos) = ms.schedulable.binary_search(&k) {
                ms.schedulable.remove(pos);
            }
            ms.law = potential_load(inst, ms.clock, &ms.schedulable);
        }

        let placed = PlacedOperation {
            operation: op.id,
            machine: chosen.machine_id,
            setup: chosen.setup_required,
            start: chosen.start,
            completion: chosen.completion,
        };
        self.placements.push(placed);
        Ok(placed)
    }

    /// One loop of the algorithm. Returns `None` once every operation is placed.
    pub fn step<F: Real>(
        &mut self,
        params: &RuleParams<F>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<PlacedOperation>> {
        if self.is_done() {
            return Ok(None);
        }
        let candidates = self.candidate_times()?;
        let (p_bar, s_bar) = self.means::<F>();
        let remaining: Vec<usize> = self.machines.iter().map(|m| m.schedulable.len()).collect();
        let ctx = SelectionContext {
            p_bar,
            s_bar,
            machine_count: self.instance.machine_count(),
            remaining: &remaining,
        };
        let chosen = *select_assignment(&candidates, &ctx, params, rng)?;
        self.commit_assignment(&chosen).map(Some)
    }
}

/// Builds a complete schedule with the list treatment algorithm.
pub fn run_lta<F: Real>(
    instance: &Instance,
    params: &RuleParams<F>,
    seed: u64,
) -> Result<Schedule> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = LtaState::new(instance);
    while state.step(params, &mut rng)?.is_some() {}
    Ok(state.into_schedule())
}
