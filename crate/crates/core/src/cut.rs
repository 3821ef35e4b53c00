//! Party subsets and canonical bipartitions.
//!
//! Parties are indexed from 0 internally. Display forms use 1-based labels to
//! match the usual `A_1 ... A_N` naming.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{GmeError, Result};

/// Largest party count representable by a [`PartySet`].
pub const MAX_PARTIES: usize = 24;

/// A subset of parties out of `n`, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartySet {
    mask: u32,
    n: u8,
}

impl PartySet {
    pub fn new(n: usize, parties: &[usize]) -> Result<Self> {
        if n == 0 || n > MAX_PARTIES {
            return Err(GmeError::InvalidDims(format!("{n} parties is unsupported")));
        }
        let mut mask = 0u32;
        for &p in parties {
            if p >= n {
                return Err(GmeError::PartyOutOfRange { party: p, parties: n });
            }
            mask |= 1 << p;
        }
        Ok(Self { mask, n: n as u8 })
    }

    pub fn from_mask(n: usize, mask: u32) -> Self {
        debug_assert!(n <= MAX_PARTIES && mask >> n == 0);
        Self { mask, n: n as u8 }
    }

    pub fn singleton(n: usize, party: usize) -> Self {
        Self::from_mask(n, 1 << party)
    }

    pub fn full(n: usize) -> Self {
        Self::from_mask(n, (1u32 << n) - 1)
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn n_parties(&self) -> usize {
        self.n as usize
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn is_full(&self) -> bool {
        self.mask == (1u32 << self.n) - 1
    }

    pub fn contains(&self, party: usize) -> bool {
        party < self.n as usize && self.mask & (1 << party) != 0
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(self.n as usize, !self.mask & ((1u32 << self.n) - 1))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_mask(self.n as usize, self.mask | other.mask)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self::from_mask(self.n as usize, self.mask & other.mask)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.mask & other.mask == 0
    }

    /// Ascending party indices.
    pub fn parties(&self) -> Vec<usize> {
        (0..self.n as usize).filter(|&p| self.contains(p)).collect()
    }

    /// 1-based labels, e.g. `[1, 3]`.
    pub fn labels(&self) -> Vec<usize> {
        self.parties().into_iter().map(|p| p + 1).collect()
    }

    /// Every subset of `n` parties of exactly `size` elements, in increasing mask order.
    pub fn subsets_of_size(n: usize, size: usize) -> impl Iterator<Item = PartySet> {
        (0u32..(1u32 << n))
            .filter(move |m| m.count_ones() as usize == size)
            .map(move |m| PartySet::from_mask(n, m))
    }
}

impl fmt::Debug for PartySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PartySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels().iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// Serialized as its sorted 1-based labels.
impl Serialize for PartySet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels().serialize(s)
    }
}

/// A bipartition `S | S^c`, stored as whichever side contains party 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut(PartySet);

impl Cut {
    pub fn new(side: PartySet) -> Result<Self> {
        if side.is_empty() || side.is_full() {
            return Err(GmeError::ImproperBipartition(format!(
                "{side} is not a proper subset of {} parties",
                side.n_parties()
            )));
        }
        Ok(if side.contains(0) { Cut(side) } else { Cut(side.complement()) })
    }

    pub fn from_parties(n: usize, parties: &[usize]) -> Result<Self> {
        Self::new(PartySet::new(n, parties)?)
    }

    /// The canonical side (the one holding party 0).
    pub fn side(&self) -> PartySet {
        self.0
    }

    /// The side with fewer parties; ties resolve to the side without party 0.
    pub fn smaller_side(&self) -> PartySet {
        let other = self.0.complement();
        if self.0.len() < other.len() { self.0 } else { other }
    }

    pub fn n_parties(&self) -> usize {
        self.0.n_parties()
    }

    /// Does this cut separate the two sets (each lying wholly on one side)?
    pub fn separates(&self, a: &PartySet, b: &PartySet) -> bool {
        let s = self.0;
        let a_in = a.intersection(&s) == *a;
        let a_out = a.is_disjoint(&s);
        let b_in = b.intersection(&s) == *b;
        let b_out = b.is_disjoint(&s);
        (a_in && b_out) || (a_out && b_in)
    }

    /// All `2^(n-1) - 1` bipartitions of `n` parties.
    pub fn all(n: usize) -> impl Iterator<Item = Cut> {
        // Every mask holding party 0, except the full set.
        (0u32..(1u32 << (n - 1)) - 1).map(move |m| Cut(PartySet::from_mask(n, (m << 1) | 1)))
    }
}

impl fmt::Debug for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let small = self.smaller_side();
        write!(f, "{}|{}", small, small.complement())
    }
}

impl Serialize for Cut {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
