//! Subsets of the process-id set `[n] = {0, ..., n}` as 16-bit masks.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported `n`; process ids live in `0..=MAX_N`.
pub const MAX_N: u8 = 15;

/// A set of process ids, bit `i` set iff process `i` is a member.
///
/// The derived order compares raw mask values; for sets forming a chain under
/// inclusion it agrees with the inclusion order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ProcSet(u16);

impl ProcSet {
    pub const EMPTY: ProcSet = ProcSet(0);

    pub const fn from_bits(bits: u16) -> Self {
        ProcSet(bits)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    /// The full set `[n]`.
    pub fn full(n: u8) -> Self {
        debug_assert!(n <= MAX_N);
        ProcSet(((1u32 << (n as u32 + 1)) - 1) as u16)
    }

    pub fn singleton(pid: u8) -> Self {
        debug_assert!(pid <= MAX_N);
        ProcSet(1 << pid)
    }

    pub fn from_ids<I: IntoIterator<Item = u8>>(ids: I) -> Self {
        ids.into_iter().fold(ProcSet::EMPTY, |acc, id| acc.with(id))
    }

    pub fn contains(self, pid: u8) -> bool {
        pid <= MAX_N && self.0 & (1 << pid) != 0
    }

    #[must_use]
    pub fn with(self, pid: u8) -> Self {
        ProcSet(self.0 | (1 << pid))
    }

    #[must_use]
    pub fn without(self, pid: u8) -> Self {
        ProcSet(self.0 & !(1 << pid))
    }

    pub fn union(self, other: Self) -> Self {
        ProcSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        ProcSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        ProcSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_strict_subset(self, other: Self) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Whether every member is a process id of `[n]`.
    pub fn within(self, n: u8) -> bool {
        self.is_subset(ProcSet::full(n))
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = u8> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let low = rest.trailing_zeros() as u8;
                rest &= rest - 1;
                Some(low)
            }
        })
    }

    /// All subsets of `self`, starting with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = ProcSet> {
        let mask = self.0;
        let mut next = Some(0u16);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask { None } else { Some((cur.wrapping_sub(mask)) & mask) };
            Some(ProcSet(cur))
        })
    }
}

impl fmt::Debug for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, id) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<u8> for ProcSet {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        ProcSet::from_ids(iter)
    }
}

impl Serialize for ProcSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ProcSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let ids = Vec::<u8>::deserialize(deserializer)?;
        if let Some(bad) = ids.iter().find(|&&id| id > MAX_N) {
            return Err(serde::de::Error::custom(format!("process id {bad} exceeds {MAX_N}")));
        }
        Ok(ProcSet::from_ids(ids))
    }
}
