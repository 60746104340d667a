//! Full feasibility check of a schedule against its instance.

use std::fmt;

use super::{FamilyId, Instance, MachineId, Minute, OperationId, PlacedOperation, Schedule};

/// A broken constraint, naming the placements involved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownOperation(OperationId),
    DuplicatePlacement(OperationId),
    NotPlaced(OperationId),
    UnknownMachine {
        op: OperationId,
        machine: MachineId,
    },
    IneligibleMachine {
        op: OperationId,
        machine: MachineId,
    },
    /// Completion disagrees with start + (setup) + processing.
    WrongCompletion {
        op: OperationId,
        expected: Minute,
        actual: Minute,
    },
    BeforeRelease {
        op: OperationId,
        start: Minute,
        release: Minute,
    },
    MachineOverlap {
        machine: MachineId,
        first: OperationId,
        second: OperationId,
    },
    SetupMismatch {
        op: OperationId,
        expected: bool,
    },
    SetupOutsideOperatorWindow {
        op: OperationId,
        start: Minute,
    },
    ColumnCapacity {
        family: FamilyId,
        at: Minute,
        units: u32,
        ops: Vec<OperationId>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnknownOperation(op) => write!(f, "operation {op} is not part of the instance"),
            Self::DuplicatePlacement(op) => write!(f, "operation {op} is placed more than once"),
            Self::NotPlaced(op) => write!(f, "operation {op} is not placed"),
            Self::UnknownMachine { op, machine } => {
                write!(f, "operation {op} placed on unknown machine {machine}")
            }
            Self::IneligibleMachine { op, machine } => {
                write!(f, "operation {op} placed on ineligible machine {machine}")
            }
            Self::WrongCompletion { op, expected, actual } => {
                write!(f, "operation {op} completes at {actual}, expected {expected}")
            }
            Self::BeforeRelease { op, start, release } => {
                write!(f, "operation {op} starts at {start} before its release {release}")
            }
            Self::MachineOverlap { machine, first, second } => {
                write!(f, "operations {first} and {second} overlap on machine {machine}")
            }
            Self::SetupMismatch { op, expected } => {
                write!(f, "operation {op}: setup flag should be {expected}")
            }
            Self::SetupOutsideOperatorWindow { op, start } => {
                write!(f, "operation {op}: setup starts at {start} outside operator windows")
            }
            Self::ColumnCapacity { family, at, units, ops } => write!(
                f,
                "family {family}: {} placements at minute {at} exceed {units} column unit(s): {ops:?}",
                ops.len()
            ),
        }
    }
}

/// Returns every violated constraint; an empty list means the schedule is feasible.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = vec![false; instance.op_count()];
    // (op index, placement) for placements whose op and machine are known
    let mut known: Vec<(usize, usize, &PlacedOperation)> = Vec::new();

    for p in &schedule.placements {
        let Some(k) = instance.op_index(p.operation) else {
            out.push(Violation::UnknownOperation(p.operation));
            continue;
        };
        if std::mem::replace(&mut seen[k], true) {
            out.push(Violation::DuplicatePlacement(p.operation));
            continue;
        }
        let op = instance.op(k);
        let Some(m) = instance.machine_index(p.machine) else {
            out.push(Violation::UnknownMachine {
                op: p.operation,
                machine: p.machine,
            });
            continue;
        };
        if !op.is_eligible(m) {
            out.push(Violation::IneligibleMachine {
                op: p.operation,
                machine: p.machine,
            });
        }
        let expected = p.start + op.processing + if p.setup { op.setup } else { 0 };
        if p.completion != expected {
            out.push(Violation::WrongCompletion {
                op: p.operation,
                expected,
                actual: p.completion,
            });
        }
        if p.start < op.release {
            out.push(Violation::BeforeRelease {
                op: p.operation,
                start: p.start,
                release: op.release,
            });
        }
        if p.setup && !instance.operator_windows().contains(p.start) {
            out.push(Violation::SetupOutsideOperatorWindow {
                op: p.operation,
                start: p.start,
            });
        }
        known.push((k, m, p));
    }
    for (k, placed) in seen.iter().enumerate() {
        if !placed {
            out.push(Violation::NotPlaced(instance.op(k).id));
        }
    }

    // Machine sequences: disjointness and setup flags.
    let mut by_machine: Vec<Vec<(usize, &PlacedOperation)>> =
        vec![Vec::new(); instance.machine_count()];
    for &(k, m, p) in &known {
        by_machine[m].push((k, p));
    }
    for seq in &mut by_machine {
        seq.sort_by_key(|(_, p)| (p.start, p.completion, p.operation));
        let mut latest: Option<&PlacedOperation> = None;
        let mut prev_family = None;
        for &(k, p) in seq.iter() {
            if let Some(l) = latest {
                if p.start < l.completion {
                    out.push(Violation::MachineOverlap {
                        machine: p.machine,
                        first: l.operation,
                        second: p.operation,
                    });
                }
            }
            if latest.is_none_or(|l| p.completion > l.completion) {
                latest = Some(p);
            }
            let family = instance.op(k).family;
            let expected = prev_family != Some(family);
            if p.setup != expected {
                out.push(Violation::SetupMismatch {
                    op: p.operation,
                    expected,
                });
            }
            prev_family = Some(family);
        }
    }

    // Column units: sweep [start, completion) per family.
    let mut by_family: Vec<Vec<(Minute, bool, OperationId)>> =
        vec![Vec::new(); instance.column_types().len()];
    for &(k, _, p) in &known {
        if p.start < p.completion {
            let f = instance.op(k).family;
            by_family[f].push((p.start, true, p.operation));
            by_family[f].push((p.completion, false, p.operation));
        }
    }
    for (f, events) in by_family.iter_mut().enumerate() {
        let ct = instance.column_types()[f];
        // ends (false) sort before starts (true) at the same instant: half-open intervals
        events.sort_unstable();
        let mut active: Vec<OperationId> = Vec::new();
        for &(t, is_start, op) in events.iter() {
            if is_start {
                active.push(op);
                if active.len() > ct.units as usize {
                    let mut ops = active.clone();
                    ops.sort_unstable();
                    out.push(Violation::ColumnCapacity {
                        family: ct.family,
                        at: t,
                        units: ct.units,
                        ops,
                    });
                }
            } else if let Some(i) = active.iter().position(|&a| a == op) {
                active.swap_remove(i);
            }
        }
    }
    out
}
