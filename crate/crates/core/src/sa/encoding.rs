use crate::calendar::{earliest_start_with_setup, earliest_start_without_setup, CapacityProfile};
use crate::error::{Error, Result};
use crate::model::{Instance, Minute, PlacedOperation, Schedule};

/// A solution as machine sequences.
///
/// Operations are kept in one global decoding order together with their machine;
/// the sequence of machine `m` is the order restricted to the operations assigned
/// to `m`. The global order also decides which operation claims a column first when
/// two machines compete for it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Encoding {
    order: Vec<usize>,
    machine: Vec<usize>,
}

impl Encoding {
    pub fn new(instance: &Instance, order: Vec<usize>, machine: Vec<usize>) -> Result<Self> {
        let enc = Self { order, machine };
        enc.check(instance)?;
        Ok(enc)
    }

    pub(crate) fn from_parts_unchecked(order: Vec<usize>, machine: Vec<usize>) -> Self {
        Self { order, machine }
    }

    /// Interleaves per-machine sequences (given as dense op indices) rank by rank.
    pub fn from_sequences(instance: &Instance, sequences: &[Vec<usize>]) -> Result<Self> {
        let n = instance.op_count();
        let mut machine = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let longest = sequences.iter().map(Vec::len).max().unwrap_or(0);
        for rank in 0..longest {
            for (m, seq) in sequences.iter().enumerate() {
                if let Some(&k) = seq.get(rank) {
                    if k >= n {
                        return Err(Error::Internal(format!("operation index {k} out of range")));
                    }
                    machine[k] = m;
                    order.push(k);
                }
            }
        }
        Self::new(instance, order, machine)
    }

    /// Encodes a schedule by start time. Decoding the result never starts an
    /// operation later than the schedule did.
    pub fn from_schedule(instance: &Instance, schedule: &Schedule) -> Result<Self> {
        let n = instance.op_count();
        let mut machine = vec![usize::MAX; n];
        let mut keyed = Vec::with_capacity(n);
        for p in &schedule.placements {
            let k = instance
                .op_index(p.operation)
                .ok_or(Error::UnknownOperation(p.operation))?;
            let m = instance
                .machine_index(p.machine)
                .ok_or_else(|| Error::Internal(format!("unknown machine {}", p.machine)))?;
            machine[k] = m;
            keyed.push((p.start, m, k));
        }
        keyed.sort_unstable();
        Self::new(
            instance,
            keyed.into_iter().map(|(_, _, k)| k).collect(),
            machine,
        )
    }

    pub fn check(&self, instance: &Instance) -> Result<()> {
        let n = instance.op_count();
        if self.order.len() != n || self.machine.len() != n {
            return Err(Error::Internal(format!(
                "encoding covers {} operations, instance has {n}",
                self.order.len()
            )));
        }
        let mut seen = vec![false; n];
        for &k in &self.order {
            if k >= n || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Internal(format!(
                    "operation index {k} repeated or out of range"
                )));
            }
            if !instance.op(k).is_eligible(self.machine[k]) {
                return Err(Error::Internal(format!(
                    "operation {} assigned to ineligible machine index {}",
                    instance.op(k).id,
                    self.machine[k]
                )));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn machine_of(&self, op: usize) -> usize {
        self.machine[op]
    }

    pub fn machines(&self) -> &[usize] {
        &self.machine
    }

    /// Per-machine processing sequences.
    pub fn machine_sequences(&self, machine_count: usize) -> Vec<Vec<usize>> {
        let mut seqs = vec![Vec::new(); machine_count];
        for &k in &self.order {
            seqs[self.machine[k]].push(k);
        }
        seqs
    }
}

/// Dense decoding result, indexed by operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub start: Vec<Minute>,
    pub completion: Vec<Minute>,
    pub setup: Vec<bool>,
    pub total_tardiness: Minute,
}

impl Decoded {
    pub fn to_schedule(&self, instance: &Instance, encoding: &Encoding) -> Schedule {
        Schedule::new(
            encoding
                .order()
                .iter()
                .map(|&k| PlacedOperation {
                    operation: instance.op(k).id,
                    machine: instance.machines()[encoding.machine_of(k)],
                    setup: self.setup[k],
                    start: self.start[k],
                    completion: self.completion[k],
                })
                .collect(),
        )
    }

    /// `max(C_j - d_j, 0)` per job.
    pub fn job_tardiness(&self, instance: &Instance) -> Vec<Minute> {
        job_tardiness(instance, &self.completion)
    }
}

pub(crate) fn job_tardiness(instance: &Instance, completion: &[Minute]) -> Vec<Minute> {
    let mut finish = vec![Minute::MIN; instance.jobs().len()];
    for (k, op) in instance.ops().iter().enumerate() {
        finish[op.job] = finish[op.job].max(completion[k]);
    }
    finish
        .iter()
        .zip(instance.jobs())
        .map(|(&c, j)| (c - j.due).max(0))
        .collect()
}

/// Forward placement in encoding order: each operation goes to the earliest slot on
/// its machine after the machine's previous operation, with a setup whenever the
/// family changes (or the machine is still empty).
pub fn decode_dense(encoding: &Encoding, instance: &Instance) -> Result<Decoded> {
    let n = instance.op_count();
    let origin = instance.horizon_origin();
    let mut clock = vec![origin; instance.machine_count()];
    let mut last_family: Vec<Option<usize>> = vec![None; instance.machine_count()];
    let mut profiles: Vec<CapacityProfile> = instance
        .column_types()
        .iter()
        .map(|ct| CapacityProfile::new(ct.units))
        .collect();
    let mut start = vec![0; n];
    let mut completion = vec![0; n];
    let mut setup = vec![false; n];

    for &k in encoding.order() {
        let op = instance.op(k);
        let m = encoding.machine_of(k);
        let t_min = clock[m].max(op.release);
        let profile = &mut profiles[op.family];
        let needs_setup = last_family[m] != Some(op.family);
        let (t, c) = if needs_setup {
            let t = earliest_start_with_setup(
                t_min,
                op.setup,
                op.processing,
                instance.operator_windows(),
                profile,
            )?;
            (t, t + op.setup + op.processing)
        } else {
            let t = earliest_start_without_setup(t_min, op.processing, profile)?;
            (t, t + op.processing)
        };
        profile.reserve(t, c)?;
        clock[m] = c;
        last_family[m] = Some(op.family);
        start[k] = t;
        completion[k] = c;
        setup[k] = needs_setup;
    }
    let total_tardiness = job_tardiness(instance, &completion).iter().sum();
    Ok(Decoded {
        start,
        completion,
        setup,
        total_tardiness,
    })
}

/// Re-times an encoding into a full schedule.
pub fn decode(encoding: &Encoding, instance: &Instance) -> Result<Schedule> {
    Ok(decode_dense(encoding, instance)?.to_schedule(instance, encoding))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::TimeWindowSet;
    use crate::model::{
        total_tardiness, validate_schedule, ColumnType, FamilyId, Job, JobId, MachineId, Operation,
        OperationId,
    };

    fn inst(families: &[u32], due: &[Minute], units: u32) -> Instance {
        let jobs = families
            .iter()
            .zip(due)
            .enumerate()
            .map(|(j, (&f, &d))| Job {
                id: JobId(j as u32),
                release: 0,
                due: d,
                operations: vec![Operation {
                    id: OperationId(j as u32),
                    job: JobId(j as u32),
                    family: FamilyId(f),
                    processing: 10,
                    setup: 5,
                    eligible: vec![MachineId(0), MachineId(1)],
                }],
            })
            .collect();
        Instance::new(
            vec![MachineId(0), MachineId(1)],
            (0..3)
                .map(|f| ColumnType {
                    family: FamilyId(f),
                    units,
                })
                .collect(),
            TimeWindowSet::always(),
            jobs,
        )
        .unwrap()
    }

    #[test]
    fn same_family_pair_needs_one_setup() {
        let i = inst(&[0, 0], &[100, 100], 1);
        let enc = Encoding::from_sequences(&i, &[vec![0, 1], vec![]]).unwrap();
        let s = decode(&enc, &i).unwrap();
        assert_eq!(s.placements.iter().filter(|p| p.setup).count(), 1);
        assert_eq!(s.placements[1].start, 15);
        assert!(validate_schedule(&i, &s).is_empty());
    }

    #[test]
    fn swapping_same_family_neighbours_keeps_setups() {
        let i = inst(&[0, 0, 1], &[10, 100, 100], 1);
        let a = Encoding::from_sequences(&i, &[vec![0, 1, 2], vec![]]).unwrap();
        let b = Encoding::from_sequences(&i, &[vec![1, 0, 2], vec![]]).unwrap();
        let (da, db) = (decode_dense(&a, &i).unwrap(), decode_dense(&b, &i).unwrap());
        assert_eq!(
            da.setup.iter().filter(|&&s| s).count(),
            db.setup.iter().filter(|&&s| s).count()
        );
        assert_ne!(da.completion, db.completion);
        assert_eq!(da.total_tardiness, 5);
        assert_eq!(db.total_tardiness, 15);
    }

    #[test]
    fn global_order_decides_column_contention() {
        // one column unit, two machines: whichever comes first in the order gets it
        let i = inst(&[0, 0], &[15, 15], 1);
        let first = Encoding::new(&i, vec![0, 1], vec![0, 1]).unwrap();
        let second = Encoding::new(&i, vec![1, 0], vec![0, 1]).unwrap();
        let d1 = decode_dense(&first, &i).unwrap();
        let d2 = decode_dense(&second, &i).unwrap();
        assert_eq!((d1.start[0], d1.start[1]), (0, 15));
        assert_eq!((d2.start[0], d2.start[1]), (15, 0));
    }

    #[test]
    fn encoding_invariants() {
        let i = inst(&[0, 1], &[10, 10], 1);
        assert!(Encoding::new(&i, vec![0, 0], vec![0, 0]).is_err());
        assert!(Encoding::new(&i, vec![0], vec![0, 0]).is_err());
        assert!(Encoding::new(&i, vec![1, 0], vec![0, 2]).is_err());
        let e = Encoding::new(&i, vec![1, 0], vec![1, 0]).unwrap();
        assert_eq!(e.machine_sequences(2), vec![vec![1], vec![0]]);
    }

    #[test]
    fn roundtrip_through_schedule() {
        let i = inst(&[0, 1, 0, 2], &[10, 20, 30, 40], 1);
        let e = Encoding::from_sequences(&i, &[vec![0, 2], vec![1, 3]]).unwrap();
        let s = decode(&e, &i).unwrap();
        let back = Encoding::from_schedule(&i, &s).unwrap();
        let again = decode(&back, &i).unwrap();
        assert_eq!(
            total_tardiness(&again, &i).unwrap(),
            total_tardiness(&s, &i).unwrap()
        );
        assert_eq!(back.machine_sequences(2), e.machine_sequences(2));
    }
}
