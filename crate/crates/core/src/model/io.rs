//! JSON layout of instance files.

use serde::{Deserialize, Serialize};

use crate::calendar::{TimeWindowSet, WeeklyPattern, UNBOUNDED};
use crate::error::{Error, Result};

use super::{
    ColumnType, FamilyId, Instance, Job, JobId, MachineId, Minute, Operation, OperationId,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub machines: Vec<MachineId>,
    pub column_types: Vec<ColumnType>,
    pub operator_windows: OperatorWindowsFile,
    pub jobs: Vec<JobFile>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub horizon_origin: Minute,
}

fn is_zero(m: &Minute) -> bool {
    *m == 0
}

/// Either explicit `[start, end]` pairs (a `null` end never closes) or a weekly
/// pattern expanded over `[from, to)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorWindowsFile {
    Explicit(Vec<(Minute, Option<Minute>)>),
    Weekly {
        weekly: WeeklyPattern,
        from: Minute,
        to: Minute,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    pub id: JobId,
    pub release: Minute,
    pub due: Minute,
    pub operations: Vec<OperationFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationFile {
    pub id: OperationId,
    pub family: FamilyId,
    pub p: Minute,
    pub s: Minute,
    pub eligible: Vec<MachineId>,
}

impl OperatorWindowsFile {
    pub fn to_set(&self) -> Result<TimeWindowSet> {
        match self {
            Self::Explicit(pairs) => {
                for &(a, b) in pairs {
                    if b.is_some_and(|b| b <= a) {
                        return Err(Error::InvalidInstance(format!(
                            "operator_windows: window [{a}, {}) is empty",
                            b.unwrap_or(UNBOUNDED)
                        )));
                    }
                }
                Ok(TimeWindowSet::new(
                    pairs.iter().map(|&(a, b)| (a, b.unwrap_or(UNBOUNDED))),
                ))
            }
            Self::Weekly { weekly, from, to } => weekly.try_expand(*from, *to),
        }
    }

    pub fn from_set(set: &TimeWindowSet) -> Self {
        Self::Explicit(
            set.windows()
                .iter()
                .map(|&(a, b)| (a, (b != UNBOUNDED).then_some(b)))
                .collect(),
        )
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let windows = file.operator_windows.to_set()?;
        let jobs = file
            .jobs
            .into_iter()
            .map(|j| Job {
                id: j.id,
                release: j.release,
                due: j.due,
                operations: j
                    .operations
                    .into_iter()
                    .map(|o| Operation {
                        id: o.id,
                        job: j.id,
                        family: o.family,
                        processing: o.p,
                        setup: o.s,
                        eligible: o.eligible,
                    })
                    .collect(),
            })
            .collect();
        Ok(
            Instance::new(file.machines, file.column_types, windows, jobs)?
                .with_horizon_origin(file.horizon_origin),
        )
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        Self {
            machines: inst.machines().to_vec(),
            column_types: inst.column_types().to_vec(),
            operator_windows: OperatorWindowsFile::from_set(inst.operator_windows()),
            jobs: inst
                .jobs()
                .iter()
                .map(|j| JobFile {
                    id: j.id,
                    release: j.release,
                    due: j.due,
                    operations: j
                        .operations
                        .iter()
                        .map(|o| OperationFile {
                            id: o.id,
                            family: o.family,
                            p: o.processing,
                            s: o.setup,
                            eligible: o.eligible.clone(),
                        })
                        .collect(),
                })
                .collect(),
            horizon_origin: inst.horizon_origin(),
        }
    }
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }
}
