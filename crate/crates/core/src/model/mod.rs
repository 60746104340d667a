//! Instances, schedules and the total tardiness objective.

mod instance;
mod io;
mod schedule;
mod validate;

pub use instance::{ColumnType, Instance, Job, OpInfo, Operation};
pub use io::{InstanceFile, JobFile, OperationFile, OperatorWindowsFile};
pub use schedule::{job_completion, total_tardiness, Metrics, PlacedOperation, Schedule};
pub use validate::{validate_schedule, Violation};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Integer minutes from the plan origin. Release dates may be negative.
pub type Minute = i64;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

id_type!(MachineId);
id_type!(
    /// Family of an operation, which is also the column type it needs.
    FamilyId
);
id_type!(JobId);
id_type!(
    /// Operation ids are unique across the whole instance.
    OperationId
);
