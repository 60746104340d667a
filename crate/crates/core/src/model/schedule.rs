use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Instance, Job, MachineId, Minute, OperationId};

/// One operation placed on a machine. `start` is the setup start when a setup is
/// performed, the processing start otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedOperation {
    pub operation: OperationId,
    pub machine: MachineId,
    pub setup: bool,
    pub start: Minute,
    pub completion: Minute,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub placements: Vec<PlacedOperation>,
}

impl Schedule {
    pub fn new(placements: Vec<PlacedOperation>) -> Self {
        Self { placements }
    }

    fn completions(&self) -> HashMap<OperationId, Minute> {
        self.placements
            .iter()
            .map(|p| (p.operation, p.completion))
            .collect()
    }

    /// Placements sorted by (machine, start, operation), the order in which they are
    /// written out.
    pub fn sorted(mut self) -> Self {
        self.placements
            .sort_by_key(|p| (p.machine, p.start, p.completion, p.operation));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn metrics(&self, instance: &Instance) -> Result<Metrics> {
        let completions = self.completions();
        let mut total = 0;
        let mut late = 0;
        for job in instance.jobs() {
            let t = (completion_in(&completions, job)? - job.due).max(0);
            total += t;
            late += usize::from(t > 0);
        }
        Ok(Metrics {
            total_tardiness: total,
            late_jobs: late,
            setups: self.placements.iter().filter(|p| p.setup).count(),
            makespan: self
                .placements
                .iter()
                .map(|p| p.completion)
                .max()
                .unwrap_or(instance.horizon_origin()),
        })
    }
}

fn completion_in(completions: &HashMap<OperationId, Minute>, job: &Job) -> Result<Minute> {
    job.operations
        .iter()
        .map(|o| {
            completions
                .get(&o.id)
                .copied()
                .ok_or(Error::MissingPlacement(o.id))
        })
        .try_fold(Minute::MIN, |acc, c| c.map(|c| acc.max(c)))
}

/// Completion of the last operation of `job`.
pub fn job_completion(schedule: &Schedule, job: &Job) -> Result<Minute> {
    completion_in(&schedule.completions(), job)
}

/// Sum over jobs of `max(C_j - d_j, 0)`.
pub fn total_tardiness(schedule: &Schedule, instance: &Instance) -> Result<Minute> {
    Ok(schedule.metrics(instance)?.total_tardiness)
}

/// Summary figures reported after every solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub total_tardiness: Minute,
    pub late_jobs: usize,
    pub setups: usize,
    pub makespan: Minute,
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total_tardiness={} late_jobs={} setups={} makespan={}",
            self.total_tardiness, self.late_jobs, self.setups, self.makespan
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::TimeWindowSet;
    use crate::model::{ColumnType, FamilyId, JobId, Operation};

    fn job(id: u32, due: Minute, ops: &[u32]) -> Job {
        Job {
            id: JobId(id),
            release: 0,
            due,
            operations: ops
                .iter()
                .map(|&o| Operation {
                    id: OperationId(o),
                    job: JobId(id),
                    family: FamilyId(0),
                    processing: 10,
                    setup: 0,
                    eligible: vec![MachineId(0)],
                })
                .collect(),
        }
    }

    fn placed(op: u32, completion: Minute) -> PlacedOperation {
        PlacedOperation {
            operation: OperationId(op),
            machine: MachineId(0),
            setup: true,
            start: completion - 10,
            completion,
        }
    }

    fn instance(jobs: Vec<Job>) -> Instance {
        Instance::new(
            vec![MachineId(0)],
            vec![ColumnType {
                family: FamilyId(0),
                units: 1,
            }],
            TimeWindowSet::always(),
            jobs,
        )
        .unwrap()
    }

    #[test]
    fn job_completion_is_max_over_operations() {
        let s = Schedule::new(vec![placed(1, 100)]);
        assert_eq!(job_completion(&s, &job(0, 0, &[1])).unwrap(), 100);
        let s = Schedule::new(vec![placed(1, 100), placed(2, 250)]);
        assert_eq!(job_completion(&s, &job(0, 0, &[1, 2])).unwrap(), 250);
        assert!(matches!(
            job_completion(&s, &job(0, 0, &[1, 3])),
            Err(Error::MissingPlacement(OperationId(3)))
        ));
    }

    #[test]
    fn tardiness_examples() {
        let inst = instance(vec![job(0, 500, &[1]), job(1, 500, &[2])]);
        let early = Schedule::new(vec![placed(1, 100), placed(2, 200)]);
        assert_eq!(total_tardiness(&early, &inst).unwrap(), 0);

        let inst = instance(vec![job(0, 100, &[1])]);
        assert_eq!(
            total_tardiness(&Schedule::new(vec![placed(1, 110)]), &inst).unwrap(),
            10
        );

        let inst = instance(vec![job(0, 100, &[1]), job(1, 200, &[2])]);
        let late = Schedule::new(vec![placed(1, 110), placed(2, 210)]);
        let m = late.metrics(&inst).unwrap();
        assert_eq!(m.total_tardiness, 20);
        assert_eq!(m.late_jobs, 2);
        assert_eq!(m.setups, 2);
        assert_eq!(m.makespan, 210);
        assert_eq!(
            m.to_string(),
            "total_tardiness=20 late_jobs=2 setups=2 makespan=210"
        );

        assert!(total_tardiness(&Schedule::new(vec![placed(1, 110)]), &inst).is_err());
    }

    #[test]
    fn schedule_json_field_names() {
        let s = Schedule::new(vec![placed(4, 30)]);
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(
            v,
            serde_json::json!([{"operation": 4, "machine": 0, "setup": true, "start": 20, "completion": 30}])
        );
        assert_eq!(Schedule::from_json(&s.to_json()).unwrap(), s);
    }
}
