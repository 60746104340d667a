use std::ops::Range;

use super::encoding::{Decoded, Encoding};
use crate::model::Instance;

/// A maximal run of same-family operations processed back to back on one machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pack {
    pub machine: usize,
    /// Positions in the machine sequence.
    pub range: Range<usize>,
    pub family: usize,
}

/// Splits the sequence of `machine` at every setup and every idle gap.
pub fn packs_of(
    instance: &Instance,
    encoding: &Encoding,
    machine: usize,
    decoded: &Decoded,
) -> Vec<Pack> {
    let seq: Vec<usize> = encoding
        .order()
        .iter()
        .copied()
        .filter(|&k| encoding.machine_of(k) == machine)
        .collect();
    packs_of_sequence(instance, &seq, machine, decoded)
}

pub(crate) fn packs_of_sequence(
    instance: &Instance,
    seq: &[usize],
    machine: usize,
    decoded: &Decoded,
) -> Vec<Pack> {
    let mut packs: Vec<Pack> = Vec::new();
    for (pos, &k) in seq.iter().enumerate() {
        let joins = pos > 0 && {
            let prev = seq[pos - 1];
            !decoded.setup[k] && decoded.start[k] == decoded.completion[prev]
        };
        match packs.last_mut() {
            Some(p) if joins => p.range.end = pos + 1,
            _ => packs.push(Pack {
                machine,
                range: pos..pos + 1,
                family: instance.op(k).family,
            }),
        }
    }
    packs
}
