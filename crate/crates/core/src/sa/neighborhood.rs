use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::encoding::{job_tardiness, Decoded, Encoding};
use super::packs::packs_of_sequence;
use crate::model::{Instance, Minute};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveType {
    Insert,
    Exchange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Item {
    Op,
    Pack,
}

/// Where the second item is looked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineChoice {
    /// The first item's machine.
    Idem,
    /// Every eligible machine of the first item.
    Eligible,
    /// One eligible machine drawn uniformly.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DateChoice {
    Uniform,
    Late,
}

/// One neighbor generation mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mechanism {
    pub id: u8,
    pub move_type: MoveType,
    pub item: Item,
    pub same_family: bool,
    pub machine: MachineChoice,
    pub date: DateChoice,
}

const fn mech(
    id: u8,
    move_type: MoveType,
    item: Item,
    same_family: bool,
    machine: MachineChoice,
    date: DateChoice,
) -> Mechanism {
    Mechanism {
        id,
        move_type,
        item,
        same_family,
        machine,
        date,
    }
}

use DateChoice::{Late, Uniform as UnifDate};
use Item::{Op, Pack as PackItem};
use MachineChoice::{Eligible, Idem, Uniform as UnifMachine};
use MoveType::{Exchange, Insert};

/// The eight mechanisms, indexed by id.
pub const MECHANISMS: [Mechanism; 8] = [
    mech(0, Insert, Op, false, UnifMachine, UnifDate),
    mech(1, Insert, Op, true, Eligible, UnifDate),
    mech(2, Exchange, Op, true, Eligible, UnifDate),
    mech(3, Insert, Op, false, UnifMachine, UnifDate),
    mech(4, Insert, PackItem, true, Eligible, UnifDate),
    mech(5, Exchange, PackItem, true, Eligible, UnifDate),
    mech(6, Insert, PackItem, false, UnifMachine, UnifDate),
    mech(7, Exchange, PackItem, false, Idem, Late),
];

/// Why no neighbor was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalFailure {
    /// Total tardiness is zero: nothing to improve.
    Optimal,
    /// No admissible second item was found within the resample limit.
    NoSecondItem,
}

/// The item picked for moving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstItem {
    pub machine: usize,
    /// Member operations in sequence order.
    pub ops: Vec<usize>,
    pub family: usize,
    /// Earliest release among the members.
    pub ready: Minute,
    pub start: Minute,
}

/// Tardiness attributed to each operation: a late job's tardiness is split over its
/// ops in proportion to how far each finishes past the due date.
pub fn item_shares(instance: &Instance, decoded: &Decoded) -> Vec<f64> {
    let tardiness = job_tardiness(instance, &decoded.completion);
    let mut lateness_sum = vec![0i64; tardiness.len()];
    for (k, op) in instance.ops().iter().enumerate() {
        lateness_sum[op.job] += (decoded.completion[k] - op.due).max(0);
    }
    instance
        .ops()
        .iter()
        .enumerate()
        .map(|(k, op)| {
            let late = (decoded.completion[k] - op.due).max(0);
            if late == 0 {
                0.0
            } else {
                tardiness[op.job] as f64 * late as f64 / lateness_sum[op.job] as f64
            }
        })
        .collect()
}

struct View<'a> {
    instance: &'a Instance,
    encoding: &'a Encoding,
    decoded: &'a Decoded,
    sequences: Vec<Vec<usize>>,
    position: Vec<usize>,
}

impl<'a> View<'a> {
    fn new(instance: &'a Instance, encoding: &'a Encoding, decoded: &'a Decoded) -> Self {
        let sequences = encoding.machine_sequences(instance.machine_count());
        let mut position = vec![0; instance.op_count()];
        for seq in &sequences {
            for (pos, &k) in seq.iter().enumerate() {
                position[k] = pos;
            }
        }
        Self {
            instance,
            encoding,
            decoded,
            sequences,
            position,
        }
    }

    fn item(&self, ops: Vec<usize>) -> FirstItem {
        let first = ops[0];
        FirstItem {
            machine: self.encoding.machine_of(first),
            family: self.instance.op(first).family,
            ready: ops
                .iter()
                .map(|&k| self.instance.op(k).release)
                .min()
                .unwrap_or(Minute::MIN),
            start: self.decoded.start[first],
            ops,
        }
    }

    fn pack_around(&self, op: usize) -> Vec<usize> {
        let m = self.encoding.machine_of(op);
        let seq = &self.sequences[m];
        let pos = self.position[op];
        packs_of_sequence(self.instance, seq, m, self.decoded)
            .into_iter()
            .find(|p| p.range.contains(&pos))
            .map(|p| seq[p.range].to_vec())
            .unwrap_or_else(|| vec![op])
    }

    /// Second-item groups on machine `m`, in sequence order.
    fn items_on(&self, m: usize, kind: Item) -> Vec<Vec<usize>> {
        let seq = &self.sequences[m];
        match kind {
            Item::Op => seq.iter().map(|&k| vec![k]).collect(),
            Item::Pack => packs_of_sequence(self.instance, seq, m, self.decoded)
                .into_iter()
                .map(|p| seq[p.range].to_vec())
                .collect(),
        }
    }
}

/// Draws an operation with probability proportional to its tardiness share and
/// returns it, or the pack containing it.
pub fn select_first_item<R: Rng + ?Sized>(
    instance: &Instance,
    encoding: &Encoding,
    decoded: &Decoded,
    kind: Item,
    rng: &mut R,
) -> Option<FirstItem> {
    let view = View::new(instance, encoding, decoded);
    let shares = item_shares(instance, decoded);
    let dist = WeightedIndex::new(&shares).ok()?;
    Some(first_item(&view, dist.sample(rng), kind))
}

fn first_item(view: &View<'_>, op: usize, kind: Item) -> FirstItem {
    match kind {
        Item::Op => view.item(vec![op]),
        Item::Pack => view.item(view.pack_around(op)),
    }
}

enum Second {
    Before(Vec<usize>),
    End(usize),
}

struct Target {
    machine: usize,
    second: Second,
    date: Minute,
}

/// Builds a neighbor of `encoding` with mechanism `mech`.
pub fn propose_neighbor<R: Rng + ?Sized>(
    instance: &Instance,
    encoding: &Encoding,
    decoded: &Decoded,
    mech: &Mechanism,
    resample_limit: usize,
    rng: &mut R,
) -> Result<Encoding, ProposalFailure> {
    let view = View::new(instance, encoding, decoded);
    let shares = item_shares(instance, decoded);
    let dist = WeightedIndex::new(&shares).map_err(|_| ProposalFailure::Optimal)?;
    for _ in 0..resample_limit.max(1) {
        let first = first_item(&view, dist.sample(rng), mech.item);
        if first.ready >= first.start {
            continue;
        }
        let targets = targets(&view, &first, mech, rng);
        let pick = match mech.date {
            _ if targets.is_empty() => continue,
            DateChoice::Uniform => &targets[rng.random_range(0..targets.len())],
            DateChoice::Late => targets
                .iter()
                .reduce(|best, t| if t.date > best.date { t } else { best })
                .expect("non-empty"),
        };
        let next = apply(&view, &first, pick, mech.move_type);
        debug_assert!(next.check(instance).is_ok());
        return Ok(next);
    }
    Err(ProposalFailure::NoSecondItem)
}

fn targets<R: Rng + ?Sized>(
    view: &View<'_>,
    first: &FirstItem,
    mech: &Mechanism,
    rng: &mut R,
) -> Vec<Target> {
    let instance = view.instance;
    let eligible: Vec<usize> = (0..instance.machine_count())
        .filter(|&m| first.ops.iter().all(|&k| instance.op(k).is_eligible(m)))
        .collect();
    let machines = match mech.machine {
        MachineChoice::Idem => vec![first.machine],
        MachineChoice::Eligible => eligible,
        MachineChoice::Uniform if eligible.is_empty() => Vec::new(),
        MachineChoice::Uniform => vec![eligible[rng.random_range(0..eligible.len())]],
    };
    let in_window = |t: Minute| first.ready <= t && t < first.start;
    let mut out = Vec::new();
    for m in machines {
        for group in view.items_on(m, mech.item) {
            let head = group[0];
            let date = view.decoded.start[head];
            if !in_window(date) || group.contains(&first.ops[0]) {
                continue;
            }
            if mech.same_family && instance.op(head).family != first.family {
                continue;
            }
            if mech.move_type == MoveType::Exchange
                && !group
                    .iter()
                    .all(|&k| instance.op(k).is_eligible(first.machine))
            {
                continue;
            }
            out.push(Target {
                machine: m,
                second: Second::Before(group),
                date,
            });
        }
        if mech.move_type == MoveType::Insert && m != first.machine {
            let last = view.sequences[m].last().copied();
            let free = last.map_or(instance.horizon_origin(), |k| view.decoded.completion[k]);
            let family_ok =
                !mech.same_family || last.is_some_and(|k| instance.op(k).family == first.family);
            if free < first.start && family_ok {
                out.push(Target {
                    machine: m,
                    second: Second::End(m),
                    date: free.max(first.ready),
                });
            }
        }
    }
    out
}

fn apply(view: &View<'_>, first: &FirstItem, target: &Target, move_type: MoveType) -> Encoding {
    let encoding = view.encoding;
    let mut machine = encoding.machines().to_vec();
    let moving = |k: &usize| first.ops.contains(k);
    let order = match (&target.second, move_type) {
        (Second::End(m), _) => {
            let mut order: Vec<usize> = encoding
                .order()
                .iter()
                .copied()
                .filter(|k| !moving(k))
                .collect();
            let at = order
                .iter()
                .rposition(|&k| machine[k] == *m)
                .map_or(order.len(), |p| p + 1);
            order.splice(at..at, first.ops.iter().copied());
            order
        }
        (Second::Before(group), MoveType::Insert) => {
            let mut order: Vec<usize> = encoding
                .order()
                .iter()
                .copied()
                .filter(|k| !moving(k))
                .collect();
            let at = order
                .iter()
                .position(|&k| k == group[0])
                .expect("second item present");
            order.splice(at..at, first.ops.iter().copied());
            order
        }
        (Second::Before(group), MoveType::Exchange) => {
            let mut order = Vec::with_capacity(encoding.order().len());
            for &k in encoding.order() {
                if k == first.ops[0] {
                    order.extend_from_slice(group);
                } else if k == group[0] {
                    order.extend_from_slice(&first.ops);
                } else if !moving(&k) && !group.contains(&k) {
                    order.push(k);
                }
            }
            for &k in group {
                machine[k] = first.machine;
            }
            order
        }
    };
    for &k in &first.ops {
        machine[k] = target.machine;
    }
    Encoding::from_parts_unchecked(order, machine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::TimeWindowSet;
    use crate::model::{ColumnType, FamilyId, Job, JobId, MachineId, Operation, OperationId};
    use crate::sa::{decode_dense, packs_of};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// One single-op job per entry: (family, due, eligible machines).
    fn inst(machines: u32, ops: &[(u32, Minute, &[u32])]) -> Instance {
        let jobs = ops
            .iter()
            .enumerate()
            .map(|(j, &(f, d, el))| Job {
                id: JobId(j as u32),
                release: -100,
                due: d,
                operations: vec![Operation {
                    id: OperationId(j as u32),
                    job: JobId(j as u32),
                    family: FamilyId(f),
                    processing: 10,
                    setup: 5,
                    eligible: el.iter().map(|&m| MachineId(m)).collect(),
                }],
            })
            .collect();
        Instance::new(
            (0..machines).map(MachineId).collect(),
            (0..3)
                .map(|f| ColumnType {
                    family: FamilyId(f),
                    units: 3,
                })
                .collect(),
            TimeWindowSet::always(),
            jobs,
        )
        .unwrap()
    }

    #[test]
    fn table_rows() {
        let rows = [
            (Insert, Op, false, UnifMachine, UnifDate),
            (Insert, Op, true, Eligible, UnifDate),
            (Exchange, Op, true, Eligible, UnifDate),
            (Insert, Op, false, UnifMachine, UnifDate),
            (Insert, PackItem, true, Eligible, UnifDate),
            (Exchange, PackItem, true, Eligible, UnifDate),
            (Insert, PackItem, false, UnifMachine, UnifDate),
            (Exchange, PackItem, false, Idem, Late),
        ];
        for (id, (row, m)) in rows.iter().zip(MECHANISMS.iter()).enumerate() {
            assert_eq!(m.id as usize, id);
            assert_eq!(
                *row,
                (m.move_type, m.item, m.same_family, m.machine, m.date)
            );
        }
    }

    #[test]
    fn shares_split_by_lateness() {
        let i = inst(1, &[(0, 0, &[0]), (0, 0, &[0]), (0, 100, &[0])]);
        let e = Encoding::from_sequences(&i, &[vec![0, 1, 2]]).unwrap();
        let d = decode_dense(&e, &i).unwrap();
        // completions 15, 25, 35; job 2 is on time
        assert_eq!(item_shares(&i, &d), vec![15.0, 25.0, 0.0]);
    }

    #[test]
    fn shares_within_a_job() {
        let jobs = vec![Job {
            id: JobId(0),
            release: 0,
            due: 20,
            operations: (0..2)
                .map(|k| Operation {
                    id: OperationId(k),
                    job: JobId(0),
                    family: FamilyId(0),
                    processing: 10,
                    setup: 5,
                    eligible: vec![MachineId(0)],
                })
                .collect(),
        }];
        let i = Instance::new(
            vec![MachineId(0)],
            vec![ColumnType {
                family: FamilyId(0),
                units: 1,
            }],
            TimeWindowSet::always(),
            jobs,
        )
        .unwrap();
        let e = Encoding::from_sequences(&i, &[vec![0, 1]]).unwrap();
        let d = decode_dense(&e, &i).unwrap();
        // completions 15 and 25: only the second op is late, it carries all 5 minutes
        assert_eq!(item_shares(&i, &d), vec![0.0, 5.0]);
    }

    #[test]
    fn selection_frequencies_follow_shares() {
        // lateness 10, 30, 60 on three machines
        let i = Instance::new(
            (0..3).map(MachineId).collect(),
            vec![ColumnType {
                family: FamilyId(0),
                units: 3,
            }],
            TimeWindowSet::always(),
            [5, -15, -45]
                .iter()
                .enumerate()
                .map(|(j, &due)| Job {
                    id: JobId(j as u32),
                    release: -100,
                    due,
                    operations: vec![Operation {
                        id: OperationId(j as u32),
                        job: JobId(j as u32),
                        family: FamilyId(0),
                        processing: 10,
                        setup: 5,
                        eligible: vec![MachineId(j as u32)],
                    }],
                })
                .collect(),
        )
        .unwrap();
        let e = Encoding::new(&i, vec![0, 1, 2], vec![0, 1, 2]).unwrap();
        let d = decode_dense(&e, &i).unwrap();
        assert_eq!(item_shares(&i, &d), vec![10.0, 30.0, 60.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hits = [0usize; 3];
        let n = 20_000;
        for _ in 0..n {
            hits[select_first_item(&i, &e, &d, Item::Op, &mut rng)
                .unwrap()
                .ops[0]] += 1;
        }
        for (h, p) in hits.iter().zip([0.1, 0.3, 0.6]) {
            assert!((*h as f64 / n as f64 - p).abs() < 0.015, "{hits:?}");
        }
    }

    #[test]
    fn zero_tardiness_signals_optimum() {
        let i = inst(1, &[(0, 1000, &[0])]);
        let e = Encoding::from_sequences(&i, &[vec![0]]).unwrap();
        let d = decode_dense(&e, &i).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(select_first_item(&i, &e, &d, Item::Op, &mut rng).is_none());
        assert_eq!(
            propose_neighbor(&i, &e, &d, &MECHANISMS[0], 10, &mut rng),
            Err(ProposalFailure::Optimal)
        );
    }

    #[test]
    fn mechanism_zero_reverses_two_ops() {
        let i = inst(1, &[(0, 100, &[0]), (1, 0, &[0])]);
        let e = Encoding::from_sequences(&i, &[vec![0, 1]]).unwrap();
        let d = decode_dense(&e, &i).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let next = propose_neighbor(&i, &e, &d, &MECHANISMS[0], 10, &mut rng).unwrap();
        assert_eq!(next.machine_sequences(1), vec![vec![1, 0]]);
    }

    #[test]
    fn mechanism_seven_swaps_adjacent_packs() {
        let i = inst(1, &[(0, 100, &[0]), (0, 100, &[0]), (1, 0, &[0])]);
        let e = Encoding::from_sequences(&i, &[vec![0, 1, 2]]).unwrap();
        let d = decode_dense(&e, &i).unwrap();
        let before: Vec<_> = packs_of(&i, &e, 0, &d)
            .into_iter()
            .map(|p| p.range)
            .collect();
        assert_eq!(before, vec![0..2, 2..3]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let next = propose_neighbor(&i, &e, &d, &MECHANISMS[7], 10, &mut rng).unwrap();
        assert_eq!(next.machine_sequences(1), vec![vec![2, 0, 1]]);
    }

    #[test]
    fn insert_can_target_end_of_other_machine() {
        let i = inst(2, &[(0, 0, &[0, 1]), (0, 0, &[0, 1])]);
        let e = Encoding::from_sequences(&i, &[vec![0, 1], vec![]]).unwrap();
        let d = decode_dense(&e, &i).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let seen: Vec<_> = (0..50)
            .filter_map(|_| propose_neighbor(&i, &e, &d, &MECHANISMS[0], 10, &mut rng).ok())
            .map(|n| n.machine_sequences(2))
            .collect();
        assert!(seen.contains(&vec![vec![0], vec![1]]));
        assert!(seen.contains(&vec![vec![1, 0], vec![]]));
    }

    #[test]
    fn empty_window_fails() {
        // the only late op already starts at its release
        let i = inst(1, &[(0, 0, &[0])]);
        let e = Encoding::from_sequences(&i, &[vec![0]]).unwrap();
        let d = decode_dense(&e, &i).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in &MECHANISMS {
            assert_eq!(
                propose_neighbor(&i, &e, &d, m, 5, &mut rng),
                Err(ProposalFailure::NoSecondItem)
            );
        }
    }

    fn family_profile(i: &Instance, e: &Encoding) -> Vec<Vec<usize>> {
        e.machine_sequences(i.machine_count())
            .iter()
            .map(|s| s.iter().map(|&k| i.op(k).family).collect())
            .collect()
    }

    proptest! {
        #[test]
        fn moves_keep_encoding_valid(
            spec in prop::collection::vec((0u32..3, -20i64..60, 0u8..7), 2..12),
            seed in any::<u64>(),
        ) {
            let ops: Vec<(u32, Minute, Vec<u32>)> = spec
                .iter()
                .map(|&(f, d, mask)| {
                    let el: Vec<u32> = (0..3).filter(|b| mask & (1 << b) != 0).collect();
                    (f, d, if el.is_empty() { vec![0] } else { el })
                })
                .collect();
            let refs: Vec<(u32, Minute, &[u32])> = ops.iter().map(|(f, d, e)| (*f, *d, e.as_slice())).collect();
            let i = inst(3, &refs);
            let mut seqs = vec![Vec::new(); 3];
            for (k, (_, _, el)) in ops.iter().enumerate() {
                seqs[el[k % el.len()] as usize].push(k);
            }
            let e = Encoding::from_sequences(&i, &seqs).unwrap();
            let d = decode_dense(&e, &i).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for m in &MECHANISMS {
                if let Ok(next) = propose_neighbor(&i, &e, &d, m, 20, &mut rng) {
                    prop_assert!(next.check(&i).is_ok());
                    prop_assert_ne!(&next, &e);
                    if m.id == 2 {
                        prop_assert_eq!(family_profile(&i, &next), family_profile(&i, &e));
                    }
                }
            }
        }
    }
}
