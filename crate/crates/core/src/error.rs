use crate::model::{FamilyId, Minute, OperationId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("no feasible slot at or after minute {from} within a horizon of {horizon} minutes")]
    NoSlot { from: Minute, horizon: Minute },

    #[error("no column unit available at minute {at}")]
    Capacity { at: Minute },

    #[error("capacity profile level {level} outside [0, {units}] at minute {at}")]
    ProfileLevel { at: Minute, level: i64, units: u32 },

    #[error("family {0} has no column type")]
    UnknownFamily(FamilyId),

    #[error("operation {0} is not placed in the schedule")]
    MissingPlacement(OperationId),

    #[error("unknown operation {0}")]
    UnknownOperation(OperationId),

    #[error("empty candidate list")]
    NoCandidates,

    #[error("malformed candidate for operation {op}: completion {completion} not after machine clock {clock}")]
    MalformedCandidate {
        op: OperationId,
        completion: Minute,
        clock: Minute,
    },

    #[error("every remaining (machine, operation) pair is infeasible within the search horizon")]
    AllCandidatesInfeasible,

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unbalanced design: {0}; subset the observations to a balanced factorial")]
    Unbalanced(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
