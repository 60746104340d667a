//! Simulated annealing over machine sequences with operation and pack neighborhoods.

mod anneal;
mod encoding;
mod neighborhood;
mod packs;

pub use anneal::{
    initial_temperature, run_sa, run_sa_detailed, write_trace, MechanismStats, SaParams, SaReport,
    SaStats, StopReason, Structure, TracePoint,
};
pub use encoding::{decode, decode_dense, Decoded, Encoding};
pub use neighborhood::{
    item_shares, propose_neighbor, select_first_item, DateChoice, FirstItem, Item, MachineChoice,
    Mechanism, MoveType, ProposalFailure, MECHANISMS,
};
pub use packs::{packs_of, Pack};
