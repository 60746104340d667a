//! Priority rules and machine-selection policies for the list algorithm.
//!
//! With `p̄` the mean processing time and `s̄` the mean setup time of the operations
//! still to schedule, and `slack = max(d_j - p - t_m, 0)`:
//!
//! | rule      | score                                                      |
//! |-----------|------------------------------------------------------------|
//! | `ATC`     | `(1/p) · exp(-slack / (k1·p̄))`                              |
//! | `ATCS`    | `ATC · exp(-s_eff / (k2·s̄))`                               |
//! | `ATCOEE`  | `ATC · exp(OEE / k2)`, `OEE = p / (c - t_m)`                |
//! | `ATCOEEF` | `ATCOEE · exp(-Fl / k3)`, `Fl = |ME| / |M|`                 |
//!
//! `s_eff` is the setup time when the candidate needs one, 0 otherwise. The
//! greatest score wins; `EDD`, `LFO` and `RANDOM` pick by due date, by eligibility
//! count and uniformly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{JobId, MachineId, Minute, OperationId};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Random,
    Edd,
    Atc,
    Atcs,
    Atcoee,
    Atcoeef,
    Lfo,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::Random,
        Rule::Edd,
        Rule::Atc,
        Rule::Atcs,
        Rule::Atcoee,
        Rule::Atcoeef,
        Rule::Lfo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Random => "random",
            Rule::Edd => "edd",
            Rule::Atc => "atc",
            Rule::Atcs => "atcs",
            Rule::Atcoee => "atcoee",
            Rule::Atcoeef => "atcoeef",
            Rule::Lfo => "lfo",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown rule `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MachinePolicy {
    /// First freed machine: only machines with the smallest clock compete.
    Ffm,
    /// Least flexible machine: among the first freed machines, the one with the fewest
    /// schedulable operations.
    Lfm,
}

impl fmt::Display for MachinePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MachinePolicy::Ffm => "ffm",
            MachinePolicy::Lfm => "lfm",
        })
    }
}

impl FromStr for MachinePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ffm" => Ok(MachinePolicy::Ffm),
            "lfm" => Ok(MachinePolicy::Lfm),
            other => Err(Error::InvalidConfig(format!(
                "unknown machine policy `{other}`"
            ))),
        }
    }
}

/// Sign of the setup term of ATCS. `Penalty` (`exp(-s/(k2·s̄))`) is the default;
/// `Reward` evaluates the printed positive exponent for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SetupExponent {
    #[default]
    Penalty,
    Reward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleParams<F> {
    pub k1: F,
    pub k2: F,
    pub k3: F,
    pub rule: Rule,
    pub machine_policy: MachinePolicy,
    #[serde(default)]
    pub setup_exponent: SetupExponent,
}

impl<F: Real> Default for RuleParams<F> {
    fn default() -> Self {
        Self {
            k1: F::lit(10.0),
            k2: F::lit(1.0),
            k3: F::lit(10.0),
            rule: Rule::Atcoee,
            machine_policy: MachinePolicy::Ffm,
            setup_exponent: SetupExponent::Penalty,
        }
    }
}

impl<F: Real> RuleParams<F> {
    pub fn new(rule: Rule, machine_policy: MachinePolicy) -> Self {
        Self {
            rule,
            machine_policy,
            ..Self::default()
        }
    }

    pub fn with_k(mut self, k1: F, k2: F, k3: F) -> Self {
        self.k1 = k1;
        self.k2 = k2;
        self.k3 = k3;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, k) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3)] {
            if !k.is_finite() || k <= F::zero() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {k}"
                )));
            }
        }
        Ok(())
    }
}

/// One (machine, operation) pair with its earliest placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    /// Dense operation index.
    pub op: usize,
    pub operation: OperationId,
    pub job: JobId,
    /// Dense machine index.
    pub machine: usize,
    pub machine_id: MachineId,
    pub start: Minute,
    pub completion: Minute,
    pub setup_required: bool,
    /// Availability date `t_m` of the machine.
    pub machine_clock: Minute,
    pub processing: Minute,
    pub setup: Minute,
    pub due: Minute,
    pub eligible_count: usize,
}

impl Candidate {
    fn tie_key(&self) -> (MachineId, JobId, OperationId) {
        (self.machine_id, self.job, self.operation)
    }

    /// `max(d_j - p - t_m, 0)`.
    pub fn slack(&self) -> Minute {
        (self.due - self.processing - self.machine_clock).max(0)
    }
}

pub fn atc_priority<F: Real>(c: &Candidate, p_bar: F, params: &RuleParams<F>) -> F {
    let slack = F::from_minutes(c.slack());
    (-slack / (params.k1 * p_bar)).exp() / F::from_minutes(c.processing)
}

pub fn atcs_priority<F: Real>(c: &Candidate, p_bar: F, s_bar: F, params: &RuleParams<F>) -> F {
    let s_eff = if c.setup_required { c.setup } else { 0 };
    let atc = atc_priority(c, p_bar, params);
    if s_eff == 0 {
        return atc;
    }
    let x = F::from_minutes(s_eff) / (params.k2 * s_bar);
    match params.setup_exponent {
        SetupExponent::Penalty => atc * (-x).exp(),
        SetupExponent::Reward => atc * x.exp(),
    }
}

/// `p / (c - t_m)`, in `(0, 1]` for well-formed candidates.
pub fn oee<F: Real>(c: &Candidate) -> Result<F> {
    if c.completion <= c.machine_clock {
        return Err(Error::MalformedCandidate {
            op: c.operation,
            completion: c.completion,
            clock: c.machine_clock,
        });
    }
    Ok(F::from_minutes(c.processing) / F::from_minutes(c.completion - c.machine_clock))
}

pub fn atcoee_priority<F: Real>(c: &Candidate, p_bar: F, params: &RuleParams<F>) -> Result<F> {
    Ok(atc_priority(c, p_bar, params) * (oee::<F>(c)? / params.k2).exp())
}

pub fn atcoeef_priority<F: Real>(
    c: &Candidate,
    p_bar: F,
    machine_count: usize,
    params: &RuleParams<F>,
) -> Result<F> {
    let flex = F::from_count(c.eligible_count) / F::from_count(machine_count);
    Ok(atcoee_priority(c, p_bar, params)? * (-flex / params.k3).exp())
}

/// Shop-level figures the rules and policies need besides the candidate itself.
#[derive(Debug, Clone, Copy)]
pub struct SelectionContext<'a, F> {
    /// Mean processing time over unscheduled operations.
    pub p_bar: F,
    /// Mean setup time over unscheduled operations.
    pub s_bar: F,
    /// `card(M)`.
    pub machine_count: usize,
    /// `|L_m|` per dense machine index.
    pub remaining: &'a [usize],
}

/// Score of a candidate under a score-based rule; `None` for EDD, LFO and RANDOM.
pub fn score<F: Real>(
    c: &Candidate,
    ctx: &SelectionContext<'_, F>,
    params: &RuleParams<F>,
) -> Result<Option<F>> {
    Ok(Some(match params.rule {
        Rule::Atc => atc_priority(c, ctx.p_bar, params),
        Rule::Atcs => atcs_priority(c, ctx.p_bar, ctx.s_bar, params),
        Rule::Atcoee => atcoee_priority(c, ctx.p_bar, params)?,
        Rule::Atcoeef => atcoeef_priority(c, ctx.p_bar, ctx.machine_count, params)?,
        Rule::Random | Rule::Edd | Rule::Lfo => return Ok(None),
    }))
}

/// Picks the assignment to commit: the machine policy narrows the candidate set,
/// then the rule chooses. Ties go to the smallest (machine id, job id, operation id).
pub fn select_assignment<'c, F: Real, R: Rng + ?Sized>(
    candidates: &'c [Candidate],
    ctx: &SelectionContext<'_, F>,
    params: &RuleParams<F>,
    rng: &mut R,
) -> Result<&'c Candidate> {
    let clock = candidates
        .iter()
        .map(|c| c.machine_clock)
        .min()
        .ok_or(Error::NoCandidates)?;
    let freed = candidates.iter().filter(|c| c.machine_clock == clock);
    let mut pool: Vec<&Candidate> = match params.machine_policy {
        MachinePolicy::Ffm => freed.collect(),
        // among the first freed machines, the one with the fewest schedulable ops
        MachinePolicy::Lfm => {
            let load = |c: &&Candidate| ctx.remaining[c.machine];
            let least = freed.clone().map(|c| load(&c)).min().expect("non-empty");
            freed.filter(|c| load(c) == least).collect()
        }
    };
    pool.sort_by_key(|c| c.tie_key());

    let chosen = match params.rule {
        Rule::Random => pool[rng.random_range(0..pool.len())],
        Rule::Edd => *pool.iter().min_by_key(|c| c.due).expect("non-empty pool"),
        Rule::Lfo => *pool
            .iter()
            .min_by_key(|c| c.eligible_count)
            .expect("non-empty pool"),
        _ => {
            let mut best: Option<(F, &Candidate)> = None;
            for &c in &pool {
                let s = score(c, ctx, params)?.expect("score-based rule");
                // strict comparison keeps the first (smallest key) among equal scores
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, c));
                }
            }
            best.expect("non-empty pool").1
        }
    };
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cand(p: Minute, due: Minute, clock: Minute) -> Candidate {
        Candidate {
            op: 0,
            operation: OperationId(0),
            job: JobId(0),
            machine: 0,
            machine_id: MachineId(0),
            start: clock,
            completion: clock + p,
            setup_required: false,
            machine_clock: clock,
            processing: p,
            setup: 0,
            due,
            eligible_count: 1,
        }
    }

    fn params(k1: f64, k2: f64, k3: f64) -> RuleParams<f64> {
        RuleParams::default().with_k(k1, k2, k3)
    }

    #[test]
    fn atc_examples() {
        let p = params(1.0, 1.0, 1.0);
        // critical job: slack clamps to zero
        assert_eq!(atc_priority(&cand(100, 50, 0), 100.0, &p), 0.01);
        assert_relative_eq!(
            atc_priority(&cand(100, 300, 0), 100.0, &p),
            (-2.0f64).exp() / 100.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            atc_priority(&cand(100, 300, 0), 100.0, &p),
            0.0013534,
            epsilon = 1e-7
        );
        assert_eq!(atc_priority(&cand(50, 0, 0), 80.0, &p), 0.02);
        assert_eq!(atc_priority(&cand(100, 0, 0), 80.0, &p), 0.01);
    }

    #[test]
    fn atcs_examples() {
        let p = params(1.0, 1.0, 1.0);
        let mut c = cand(100, 300, 0);
        c.setup = 40;
        assert_eq!(
            atcs_priority(&c, 100.0, 40.0, &p),
            atc_priority(&c, 100.0, &p)
        );
        c.setup_required = true;
        c.completion += 40;
        assert_relative_eq!(
            atcs_priority(&c, 100.0, 40.0, &p),
            atc_priority(&c, 100.0, &p) * (-1.0f64).exp(),
            max_relative = 1e-15
        );
        let mut longer = c;
        longer.setup = 80;
        assert!(atcs_priority(&longer, 100.0, 40.0, &p) < atcs_priority(&c, 100.0, 40.0, &p));

        let reward = RuleParams {
            setup_exponent: SetupExponent::Reward,
            ..p
        };
        assert_relative_eq!(
            atcs_priority(&c, 100.0, 40.0, &reward),
            atc_priority(&c, 100.0, &p) * 1.0f64.exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn atcoee_examples() {
        let p = params(10.0, 2.0, 10.0);
        let c = cand(60, 1000, 0);
        assert_eq!(oee::<f64>(&c).unwrap(), 1.0);
        assert_relative_eq!(
            atcoee_priority(&c, 100.0, &p).unwrap(),
            atc_priority(&c, 100.0, &p) * 0.5f64.exp(),
            max_relative = 1e-15
        );
        let mut with_setup = c;
        with_setup.setup = 60;
        with_setup.setup_required = true;
        with_setup.completion = 120;
        assert_eq!(oee::<f64>(&with_setup).unwrap(), 0.5);
        let mut waiting = c;
        waiting.start += 30;
        waiting.completion += 30;
        assert!(
            atcoee_priority(&waiting, 100.0, &p).unwrap() < atcoee_priority(&c, 100.0, &p).unwrap()
        );

        let mut broken = c;
        broken.completion = broken.machine_clock;
        assert!(matches!(
            atcoee_priority(&broken, 100.0, &p),
            Err(Error::MalformedCandidate { .. })
        ));
    }

    #[test]
    fn atcoeef_examples() {
        let p = params(10.0, 1.0, 4.0);
        let mut c = cand(60, 1000, 0);
        c.eligible_count = 10;
        let base = atcoee_priority(&c, 100.0, &p).unwrap();
        assert_relative_eq!(
            atcoeef_priority(&c, 100.0, 10, &p).unwrap(),
            base * (-0.25f64).exp(),
            max_relative = 1e-15
        );
        c.eligible_count = 2;
        assert_relative_eq!(
            atcoeef_priority(&c, 100.0, 10, &p).unwrap(),
            base * (-0.2f64 / 4.0).exp(),
            max_relative = 1e-15
        );
        let huge = params(10.0, 1.0, 1e15);
        assert_relative_eq!(
            atcoeef_priority(&c, 100.0, 10, &huge).unwrap(),
            atcoee_priority(&c, 100.0, &huge).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn generic_over_f32() {
        let p = RuleParams::<f32>::default().with_k(1.0, 1.0, 1.0);
        let got = atc_priority(&cand(100, 300, 0), 100.0f32, &p);
        assert!((got - 0.0013534).abs() < 1e-6);
    }

    fn ctx(remaining: &[usize]) -> SelectionContext<'_, f64> {
        SelectionContext {
            p_bar: 100.0,
            s_bar: 10.0,
            machine_count: remaining.len(),
            remaining,
        }
    }

    fn on(machine: usize, job: u32, mut c: Candidate) -> Candidate {
        c.machine = machine;
        c.machine_id = MachineId(machine as u32);
        c.job = JobId(job);
        c.operation = OperationId(job);
        c
    }

    #[test]
    fn selection_singleton_and_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let one = [cand(10, 100, 0)];
        let r = [1];
        assert_eq!(
            select_assignment(&one, &ctx(&r), &RuleParams::default(), &mut rng).unwrap(),
            &one[0]
        );
        assert!(matches!(
            select_assignment(&[], &ctx(&r), &RuleParams::<f64>::default(), &mut rng),
            Err(Error::NoCandidates)
        ));
    }

    #[test]
    fn ffm_restricts_to_first_freed_machine() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // machine 1 has a much more urgent job but its clock is later
        let cands = [on(0, 1, cand(100, 10_000, 0)), on(1, 2, cand(10, 0, 50))];
        let r = [1, 1];
        for rule in Rule::ALL {
            let p = RuleParams::new(rule, MachinePolicy::Ffm);
            assert_eq!(
                select_assignment(&cands, &ctx(&r), &p, &mut rng)
                    .unwrap()
                    .machine,
                0,
                "{rule}"
            );
        }
    }

    #[test]
    fn lfm_lfo_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut a = on(0, 1, cand(10, 100, 0));
        a.eligible_count = 1;
        let mut b = on(1, 2, cand(10, 100, 0));
        b.eligible_count = 4;
        let mut c = on(1, 3, cand(10, 100, 0));
        c.eligible_count = 2;
        let r = [3, 1];
        let p = RuleParams::new(Rule::Lfo, MachinePolicy::Lfm);
        let cands = [a, b, c];
        let got = select_assignment(&cands, &ctx(&r), &p, &mut rng).unwrap();
        assert_eq!(got.job, JobId(3));
    }

    #[test]
    fn lfm_only_looks_at_first_freed_machines() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut a = on(0, 1, cand(10, 100, 0));
        a.eligible_count = 4;
        let mut b = on(1, 2, cand(10, 100, 50));
        b.eligible_count = 1;
        let r = [3, 1];
        let p = RuleParams::new(Rule::Lfo, MachinePolicy::Lfm);
        let cands = [a, b];
        let got = select_assignment(&cands, &ctx(&r), &p, &mut rng).unwrap();
        assert_eq!(got.job, JobId(1));
    }

    #[test]
    fn edd_and_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cands = [
            on(1, 5, cand(10, 100, 0)),
            on(0, 7, cand(10, 100, 0)),
            on(0, 6, cand(10, 300, 0)),
        ];
        let r = [2, 1];
        let p = RuleParams::new(Rule::Edd, MachinePolicy::Ffm);
        // due 100 ties between (m1, j5) and (m0, j7): machine id decides
        assert_eq!(
            select_assignment(&cands, &ctx(&r), &p, &mut rng)
                .unwrap()
                .job,
            JobId(7)
        );
        let p = RuleParams::new(Rule::Atc, MachinePolicy::Ffm);
        assert_eq!(
            select_assignment(&cands, &ctx(&r), &p, &mut rng)
                .unwrap()
                .job,
            JobId(7)
        );
    }

    #[test]
    fn random_rule_is_seeded() {
        let cands: Vec<_> = (0..20).map(|j| on(0, j, cand(10, 100, 0))).collect();
        let r = [20];
        let p = RuleParams::new(Rule::Random, MachinePolicy::Ffm);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10)
                .map(|_| {
                    select_assignment(&cands, &ctx(&r), &p, &mut rng)
                        .unwrap()
                        .job
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    fn arb_candidate() -> impl Strategy<Value = Candidate> {
        (
            1i64..1500,
            0i64..1500,
            0i64..20_000,
            0i64..5000,
            0i64..500,
            any::<bool>(),
            1usize..11,
        )
            .prop_map(|(p, s, due, clock, wait, setup_required, el)| {
                let start = clock + wait;
                Candidate {
                    start,
                    completion: start + p + if setup_required { s } else { 0 },
                    setup_required,
                    setup: s,
                    eligible_count: el,
                    ..cand(p, due, clock)
                }
            })
    }

    proptest! {
        #[test]
        fn scores_are_positive_and_reduce_to_atc(c in arb_candidate(), k1 in 0.1f64..20.0) {
            let p = params(k1, 1.0, 1.0);
            let atc = atc_priority(&c, 300.0, &p);
            prop_assert!(atc > 0.0 && atc.is_finite());
            for v in [
                atcs_priority(&c, 300.0, 200.0, &p),
                atcoee_priority(&c, 300.0, &p).unwrap(),
                atcoeef_priority(&c, 300.0, 10, &p).unwrap(),
            ] {
                prop_assert!(v > 0.0 && v.is_finite());
            }
            let mut no_setup = c;
            no_setup.setup_required = false;
            prop_assert_eq!(atcs_priority(&no_setup, 300.0, 200.0, &p), atc_priority(&no_setup, 300.0, &p));
            let flat = params(k1, 1e15, 1e15);
            let a = atc_priority(&c, 300.0, &flat);
            prop_assert!((atcoee_priority(&c, 300.0, &flat).unwrap() / a - 1.0).abs() < 1e-12);
            prop_assert!((atcoeef_priority(&c, 300.0, 10, &flat).unwrap() / a - 1.0).abs() < 1e-12);
        }

        #[test]
        fn atc_decreases_in_slack(c in arb_candidate(), extra in 1i64..5000) {
            let p = params(2.0, 1.0, 1.0);
            let mut later_due = c;
            later_due.due = c.machine_clock + c.processing + c.slack() + extra;
            let mut base = c;
            base.due = c.machine_clock + c.processing + c.slack();
            prop_assert!(atc_priority(&later_due, 300.0, &p) < atc_priority(&base, 300.0, &p));
        }

        #[test]
        fn argmax_is_scale_invariant(cs in prop::collection::vec(arb_candidate(), 1..8), scale in 0.001f64..1000.0) {
            let p = params(10.0, 1.0, 10.0);
            let scores: Vec<f64> = cs.iter().map(|c| atcoee_priority(c, 300.0, &p).unwrap()).collect();
            let argmax = |v: &[f64]| (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b });
            let scaled: Vec<f64> = scores.iter().map(|s| s * scale).collect();
            prop_assert_eq!(argmax(&scores), argmax(&scaled));
        }
    }
}
