use std::collections::HashMap;

use crate::calendar::TimeWindowSet;
use crate::error::{Error, Result};

use super::{FamilyId, JobId, MachineId, Minute, OperationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ColumnType {
    pub family: FamilyId,
    pub units: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub id: OperationId,
    pub job: JobId,
    pub family: FamilyId,
    pub processing: Minute,
    pub setup: Minute,
    /// Sorted, without duplicates.
    pub eligible: Vec<MachineId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub id: JobId,
    pub release: Minute,
    pub due: Minute,
    pub operations: Vec<Operation>,
}

/// Dense view of one operation, indexed the way the solvers use it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpInfo {
    pub id: OperationId,
    /// Index into [`Instance::jobs`].
    pub job: usize,
    /// Index into [`Instance::column_types`].
    pub family: usize,
    pub processing: Minute,
    pub setup: Minute,
    pub release: Minute,
    pub due: Minute,
    /// Machine indices, ascending.
    pub eligible: Vec<usize>,
}

impl OpInfo {
    pub fn is_eligible(&self, machine: usize) -> bool {
        self.eligible.binary_search(&machine).is_ok()
    }
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    machines: Vec<MachineId>,
    column_types: Vec<ColumnType>,
    operator_windows: TimeWindowSet,
    jobs: Vec<Job>,
    horizon_origin: Minute,

    ops: Vec<OpInfo>,
    op_index: HashMap<OperationId, usize>,
    machine_index: HashMap<MachineId, usize>,
    family_index: HashMap<FamilyId, usize>,
}

impl Instance {
    pub fn new(
        machines: Vec<MachineId>,
        column_types: Vec<ColumnType>,
        operator_windows: TimeWindowSet,
        mut jobs: Vec<Job>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidInstance(msg));

        let mut machine_index = HashMap::new();
        for (k, &m) in machines.iter().enumerate() {
            if machine_index.insert(m, k).is_some() {
                return invalid(format!("machines: duplicate machine id {m}"));
            }
        }
        let mut family_index = HashMap::new();
        for (k, ct) in column_types.iter().enumerate() {
            if ct.units == 0 {
                return invalid(format!("column_types: family {} has units = 0", ct.family));
            }
            if family_index.insert(ct.family, k).is_some() {
                return invalid(format!("column_types: duplicate family {}", ct.family));
            }
        }

        let mut ops = Vec::new();
        let mut op_index = HashMap::new();
        let mut job_ids = HashMap::new();
        for (j, job) in jobs.iter_mut().enumerate() {
            if job_ids.insert(job.id, j).is_some() {
                return invalid(format!("jobs: duplicate job id {}", job.id));
            }
            if job.due < job.release {
                return invalid(format!(
                    "jobs[{}].due: due date {} precedes release {}",
                    job.id, job.due, job.release
                ));
            }
            if job.operations.is_empty() {
                return invalid(format!(
                    "jobs[{}].operations: a job needs at least one operation",
                    job.id
                ));
            }
            for op in &mut job.operations {
                let at = format!("jobs[{}].operations[{}]", job.id, op.id);
                op.job = job.id;
                op.eligible.sort_unstable();
                op.eligible.dedup();
                if op.processing <= 0 {
                    return invalid(format!("{at}.p: processing time must be positive"));
                }
                if op.setup < 0 {
                    return invalid(format!("{at}.s: setup time must be non-negative"));
                }
                let Some(&family) = family_index.get(&op.family) else {
                    return invalid(format!(
                        "{at}.family: family {} has no column type",
                        op.family
                    ));
                };
                if op.eligible.is_empty() {
                    return invalid(format!("{at}.eligible: no eligible machine"));
                }
                let mut eligible = Vec::with_capacity(op.eligible.len());
                for m in &op.eligible {
                    match machine_index.get(m) {
                        Some(&k) => eligible.push(k),
                        None => return invalid(format!("{at}.eligible: unknown machine {m}")),
                    }
                }
                eligible.sort_unstable();
                if op_index.insert(op.id, ops.len()).is_some() {
                    return invalid(format!("{at}: duplicate operation id {}", op.id));
                }
                ops.push(OpInfo {
                    id: op.id,
                    job: j,
                    family,
                    processing: op.processing,
                    setup: op.setup,
                    release: job.release,
                    due: job.due,
                    eligible,
                });
            }
        }

        Ok(Self {
            machines,
            column_types,
            operator_windows,
            jobs,
            horizon_origin: 0,
            ops,
            op_index,
            machine_index,
            family_index,
        })
    }

    pub fn with_horizon_origin(mut self, origin: Minute) -> Self {
        self.horizon_origin = origin;
        self
    }

    pub fn machines(&self) -> &[MachineId] {
        &self.machines
    }

    pub fn column_types(&self) -> &[ColumnType] {
        &self.column_types
    }

    pub fn operator_windows(&self) -> &TimeWindowSet {
        &self.operator_windows
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    /// Minute at which machines become available.
    pub fn horizon_origin(&self) -> Minute {
        self.horizon_origin
    }

    /// All operations, job by job, in declaration order.
    pub fn ops(&self) -> &[OpInfo] {
        &self.ops
    }

    pub fn op(&self, k: usize) -> &OpInfo {
        &self.ops[k]
    }

    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    pub fn op_index(&self, id: OperationId) -> Option<usize> {
        self.op_index.get(&id).copied()
    }

    pub fn machine_index(&self, id: MachineId) -> Option<usize> {
        self.machine_index.get(&id).copied()
    }

    pub fn family_index(&self, id: FamilyId) -> Option<usize> {
        self.family_index.get(&id).copied()
    }

    pub fn units(&self, family: FamilyId) -> Option<u32> {
        self.family_index(family)
            .map(|k| self.column_types[k].units)
    }

    /// Indices of the operations of job `j`.
    pub fn job_ops(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.jobs[j].operations.iter().map(|o| self.op_index[&o.id])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(id: u32, family: u32, eligible: &[u32]) -> Operation {
        Operation {
            id: OperationId(id),
            job: JobId(0),
            family: FamilyId(family),
            processing: 10,
            setup: 5,
            eligible: eligible.iter().map(|&m| MachineId(m)).collect(),
        }
    }

    fn build(jobs: Vec<Job>) -> Result<Instance> {
        Instance::new(
            vec![MachineId(0), MachineId(1)],
            vec![ColumnType {
                family: FamilyId(7),
                units: 1,
            }],
            TimeWindowSet::always(),
            jobs,
        )
    }

    fn job(id: u32, ops: Vec<Operation>) -> Job {
        Job {
            id: JobId(id),
            release: 0,
            due: 100,
            operations: ops,
        }
    }

    #[test]
    fn dense_view_follows_declaration_order() {
        let inst = build(vec![
            job(3, vec![op(10, 7, &[1, 0]), op(11, 7, &[1])]),
            job(4, vec![op(12, 7, &[0])]),
        ])
        .unwrap();
        assert_eq!(inst.op_count(), 3);
        assert_eq!(inst.op(0).eligible, vec![0, 1]);
        assert_eq!(inst.op(2).job, 1);
        assert_eq!(inst.op_index(OperationId(11)), Some(1));
        assert_eq!(inst.jobs()[0].operations[0].job, JobId(3));
        assert_eq!(inst.job_ops(0).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn invariant_violations_are_rejected() {
        let cases = vec![
            vec![job(0, vec![op(1, 8, &[0])])],
            vec![job(0, vec![op(1, 7, &[])])],
            vec![job(0, vec![op(1, 7, &[5])])],
            vec![job(0, vec![])],
            vec![job(0, vec![op(1, 7, &[0])]), job(1, vec![op(1, 7, &[0])])],
            vec![Job {
                id: JobId(0),
                release: 10,
                due: 5,
                operations: vec![op(1, 7, &[0])],
            }],
        ];
        for jobs in cases {
            assert!(matches!(build(jobs), Err(Error::InvalidInstance(_))));
        }
        let zero_units = Instance::new(
            vec![MachineId(0)],
            vec![ColumnType {
                family: FamilyId(7),
                units: 0,
            }],
            TimeWindowSet::always(),
            vec![],
        );
        assert!(zero_units.is_err());
    }
}
