//! The action of the permutation group `S_[n]` by renaming process ids.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::procset::{ProcSet, MAX_N};
use crate::view::{Column, LocalView, SimplexKey, View};

/// A bijection of `[n]`, stored as its image table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Permutation {
    images: Vec<u8>,
}

impl TryFrom<Vec<u8>> for Permutation {
    type Error = Error;

    fn try_from(images: Vec<u8>) -> Result<Self> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<u8> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl Permutation {
    pub fn new(images: Vec<u8>) -> Result<Self> {
        let len = images.len();
        let mut seen = ProcSet::EMPTY;
        let ok = (1..=MAX_N as usize + 1).contains(&len)
            && images.iter().all(|&i| {
                let fresh = (i as usize) < len && !seen.contains(i);
                seen = seen.with(i.min(MAX_N));
                fresh
            });
        if ok {
            Ok(Permutation { images })
        } else {
            Err(Error::InvalidPermutation(images))
        }
    }

    pub fn identity(n: u8) -> Self {
        Permutation { images: (0..=n).collect() }
    }

    /// All `(n+1)!` permutations of `[n]` in lexicographic order.
    pub fn all(n: u8) -> Vec<Permutation> {
        let mut cur: Vec<u8> = (0..=n).collect();
        let mut out = vec![Permutation { images: cur.clone() }];
        while next_permutation(&mut cur) {
            out.push(Permutation { images: cur.clone() });
        }
        out
    }

    pub fn n(&self) -> u8 {
        (self.images.len() - 1) as u8
    }

    pub fn images(&self) -> &[u8] {
        &self.images
    }

    pub fn image(&self, pid: u8) -> u8 {
        self.images[pid as usize]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&i| self.image(i)).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j as usize] = i as u8;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j as usize)
    }
}

fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else { return false };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Relabeling by a permutation of the process ids.
pub trait Relabel {
    fn relabel(&self, pi: &Permutation) -> Self;
}

impl Relabel for ProcSet {
    fn relabel(&self, pi: &Permutation) -> Self {
        self.iter().map(|x| pi.image(x)).collect()
    }
}

impl Relabel for LocalView {
    fn relabel(&self, pi: &Permutation) -> Self {
        LocalView::new(self.snap().relabel(pi), pi.image(self.pid())).expect("bijection keeps pid in snap")
    }
}

impl Relabel for View {
    fn relabel(&self, pi: &Permutation) -> Self {
        debug_assert_eq!(pi.n(), self.n());
        let cols = self
            .columns()
            .iter()
            .map(|c| Column::new(c.snap.relabel(pi), c.group.relabel(pi)))
            .collect();
        View::from_presentation(self.n(), cols)
    }
}

impl Relabel for SimplexKey {
    fn relabel(&self, pi: &Permutation) -> Self {
        self.iter().map(|lv| lv.relabel(pi)).collect()
    }
}

pub fn apply<T: Relabel>(pi: &Permutation, x: &T) -> T {
    x.relabel(pi)
}

/// The relabeled complex `π(K)`.
pub fn apply_complex(pi: &Permutation, c: &Complex) -> Complex {
    if c.is_void() {
        return c.clone();
    }
    let set: HashSet<_> = c
        .simplices()
        .map(|s| c.simplex_of(&c.key_of(s).relabel(pi)).expect("relabeling stays in [n]"))
        .collect();
    c.derive(c.kind(), Some(set))
}

/// The orbit `S_[n](W)`, deduplicated and sorted canonically.
pub fn orbit(w: &View) -> Vec<View> {
    let mut out: Vec<View> = Permutation::all(w.n()).iter().map(|pi| w.relabel(pi)).collect();
    out.sort();
    out.dedup();
    out
}

/// The canonically smallest member of the orbit.
pub fn canonical_rep(w: &View) -> View {
    orbit(w).swap_remove(0)
}

pub fn stabilizer_size(w: &View) -> usize {
    Permutation::all(w.n()).iter().filter(|pi| &w.relabel(pi) == w).count()
}

/// `σ` is free and its upper set misses the upper set of every distinct
/// translate `π(σ)`.
pub fn is_g_free(c: &Complex, key: &SimplexKey) -> Result<bool> {
    if !c.is_free(key)? {
        return Ok(false);
    }
    // Two upper sets meet iff the union of their bottoms is a simplex.
    Ok(Permutation::all(c.n()).iter().all(|pi| {
        let moved = key.relabel(pi);
        moved == *key || !c.contains_key(&key.union(&moved))
    }))
}
