//! n-views, local views and the face structure of the view complex.
//!
//! An n-view is a chain of snapshots `V_1 ⊂ ... ⊂ V_{t-1} ⊂ [n]` paired with
//! disjoint groups `I_1, ..., I_t` of processes, where group `I_k` is the set of
//! processes whose snapshot returned exactly `V_k`. Every view is kept in
//! canonical form: all groups except possibly the last are nonempty. A view is
//! the same thing as a simplex of `View^n`, whose vertices are the local views
//! `(V_k, x)` with `x ∈ I_k`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::procset::{ProcSet, MAX_N};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViewError {
    #[error("n = {0} exceeds the maximum of {MAX_N}")]
    NTooLarge(u8),
    #[error("a view needs at least one column")]
    NoColumns,
    #[error("column {column} mentions a process outside [n]")]
    OutOfRange { column: usize },
    #[error("the last snapshot must be the full set [n]")]
    LastColumnNotFull,
    #[error("snapshots are not a strict chain starting from a nonempty set at column {column}")]
    ChainViolation { column: usize },
    #[error("group of column {column} is empty")]
    EmptyGroup { column: usize },
    #[error("group of column {column} is not contained in its snapshot")]
    ContainmentViolation { column: usize },
    #[error("process {pid} appears in more than one group")]
    DisjointnessViolation { pid: u8 },
    #[error("local view ({snap}, {pid}) is invalid for n = {n}")]
    InvalidLocalView { snap: ProcSet, pid: u8, n: u8 },
    #[error("vertex set is not a simplex: {0}")]
    NotASimplex(NotASimplexReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NotASimplexReason {
    #[error("snapshots are not totally ordered by inclusion")]
    ChainViolation,
    #[error("process {0} occurs twice")]
    DuplicatePid(u8),
}

/// A vertex of `View^n`: process `pid` whose snapshot returned `snap`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawLocalView")]
pub struct LocalView {
    snap: ProcSet,
    pid: u8,
}

#[derive(Deserialize)]
struct RawLocalView {
    snap: ProcSet,
    pid: u8,
}

impl TryFrom<RawLocalView> for LocalView {
    type Error = ViewError;

    fn try_from(raw: RawLocalView) -> Result<Self, ViewError> {
        LocalView::new(raw.snap, raw.pid)
    }
}

impl LocalView {
    pub fn new(snap: ProcSet, pid: u8) -> Result<Self, ViewError> {
        if pid > MAX_N || !snap.contains(pid) {
            return Err(ViewError::InvalidLocalView { snap, pid, n: MAX_N });
        }
        Ok(LocalView { snap, pid })
    }

    pub fn snap(&self) -> ProcSet {
        self.snap
    }

    pub fn pid(&self) -> u8 {
        self.pid
    }

    pub fn is_within(&self, n: u8) -> bool {
        self.snap.within(n)
    }
}

impl fmt::Debug for LocalView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.snap, self.pid)
    }
}

/// A set of local views in canonical (strictly increasing) order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<LocalView>")]
pub struct SimplexKey(Vec<LocalView>);

impl From<Vec<LocalView>> for SimplexKey {
    fn from(mut v: Vec<LocalView>) -> Self {
        v.sort_unstable();
        v.dedup();
        SimplexKey(v)
    }
}

impl FromIterator<LocalView> for SimplexKey {
    fn from_iter<I: IntoIterator<Item = LocalView>>(iter: I) -> Self {
        SimplexKey::from(iter.into_iter().collect::<Vec<_>>())
    }
}

impl SimplexKey {
    pub fn empty() -> Self {
        SimplexKey(Vec::new())
    }

    pub fn as_slice(&self) -> &[LocalView] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &LocalView> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> i32 {
        self.0.len() as i32 - 1
    }

    pub fn contains(&self, lv: &LocalView) -> bool {
        self.0.binary_search(lv).is_ok()
    }

    pub fn is_subset(&self, other: &SimplexKey) -> bool {
        self.0.iter().all(|lv| other.contains(lv))
    }

    pub fn union(&self, other: &SimplexKey) -> SimplexKey {
        self.0.iter().chain(other.0.iter()).copied().collect()
    }
}

/// One column `(V_k, I_k)` of a view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Column {
    pub snap: ProcSet,
    pub group: ProcSet,
}

impl Column {
    pub fn new(snap: ProcSet, group: ProcSet) -> Self {
        Column { snap, group }
    }
}

/// A validated n-view in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawView")]
pub struct View {
    n: u8,
    columns: Vec<Column>,
}

#[derive(Deserialize)]
struct RawView {
    n: u8,
    columns: Vec<Column>,
}

impl TryFrom<RawView> for View {
    type Error = ViewError;

    fn try_from(raw: RawView) -> Result<Self, ViewError> {
        validate_view(&raw.columns, raw.n)
    }
}

/// Checks the n-view conditions on a raw `2 × t` matrix and returns the view.
pub fn validate_view(raw: &[Column], n: u8) -> Result<View, ViewError> {
    if n > MAX_N {
        return Err(ViewError::NTooLarge(n));
    }
    let (last, inner) = raw.split_last().ok_or(ViewError::NoColumns)?;
    if let Some(column) = raw.iter().position(|c| !c.snap.within(n) || !c.group.within(n)) {
        return Err(ViewError::OutOfRange { column });
    }
    if last.snap != ProcSet::full(n) {
        return Err(ViewError::LastColumnNotFull);
    }
    let mut prev = ProcSet::EMPTY;
    for (k, c) in raw.iter().enumerate() {
        if !prev.is_strict_subset(c.snap) {
            return Err(ViewError::ChainViolation { column: k });
        }
        prev = c.snap;
    }
    if let Some(column) = inner.iter().position(|c| c.group.is_empty()) {
        return Err(ViewError::EmptyGroup { column });
    }
    if let Some(column) = inner.iter().position(|c| !c.group.is_subset(c.snap)) {
        return Err(ViewError::ContainmentViolation { column });
    }
    let mut seen = ProcSet::EMPTY;
    for c in raw {
        if let Some(pid) = seen.intersection(c.group).iter().next() {
            return Err(ViewError::DisjointnessViolation { pid });
        }
        seen = seen.union(c.group);
    }
    Ok(View { n, columns: raw.to_vec() })
}

impl View {
    pub fn new(n: u8, columns: &[(ProcSet, ProcSet)]) -> Result<Self, ViewError> {
        let cols: Vec<Column> = columns.iter().map(|&(s, g)| Column::new(s, g)).collect();
        validate_view(&cols, n)
    }

    /// The unique view of dimension −1, `([n]; ∅)`.
    pub fn empty(n: u8) -> Self {
        View { n, columns: vec![Column::new(ProcSet::full(n), ProcSet::EMPTY)] }
    }

    /// Builds a view from a presentation that may carry empty internal
    /// groups, dropping those columns. The remaining conditions must hold.
    pub(crate) fn from_presentation(n: u8, mut columns: Vec<Column>) -> Self {
        let t = columns.len();
        let mut k = 0;
        columns.retain(|c| {
            k += 1;
            k == t || !c.group.is_empty()
        });
        debug_assert!(validate_view(&columns, n).is_ok(), "bad presentation {columns:?}");
        View { n, columns }
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// Number of columns `t`.
    pub fn t(&self) -> usize {
        self.columns.len()
    }

    pub fn dim(&self) -> i32 {
        self.columns.iter().map(|c| c.group.len() as i32).sum::<i32>() - 1
    }

    /// Number of local views, `dim + 1`.
    pub fn vertex_count(&self) -> usize {
        self.columns.iter().map(|c| c.group.len()).sum()
    }

    pub fn last_group(&self) -> ProcSet {
        self.columns[self.columns.len() - 1].group
    }

    /// `V_{t-1}`, or `∅` when `t = 1`.
    pub fn penultimate_snap(&self) -> ProcSet {
        match self.columns.len() {
            1 => ProcSet::EMPTY,
            t => self.columns[t - 2].snap,
        }
    }

    /// All processes that appear in some group.
    pub fn participants(&self) -> ProcSet {
        self.columns.iter().fold(ProcSet::EMPTY, |acc, c| acc.union(c.group))
    }

    /// The vertex set `V(W)`.
    pub fn local_views(&self) -> SimplexKey {
        // Columns are in inclusion order and groups iterate ascending, so the
        // output is already canonical.
        SimplexKey(
            self.columns
                .iter()
                .flat_map(|c| c.group.iter().map(move |pid| LocalView { snap: c.snap, pid }))
                .collect(),
        )
    }

    /// Reconstructs the view whose vertex set is `key`.
    pub fn from_local_views(key: &SimplexKey, n: u8) -> Result<View, ViewError> {
        if n > MAX_N {
            return Err(ViewError::NTooLarge(n));
        }
        let full = ProcSet::full(n);
        let mut columns: Vec<Column> = Vec::new();
        let mut seen = ProcSet::EMPTY;
        for lv in key.iter() {
            if !lv.snap.within(n) {
                return Err(ViewError::InvalidLocalView { snap: lv.snap, pid: lv.pid, n });
            }
            if seen.contains(lv.pid) {
                return Err(ViewError::NotASimplex(NotASimplexReason::DuplicatePid(lv.pid)));
            }
            seen = seen.with(lv.pid);
            match columns.last_mut() {
                Some(c) if c.snap == lv.snap => c.group = c.group.with(lv.pid),
                Some(c) if !c.snap.is_strict_subset(lv.snap) => {
                    return Err(ViewError::NotASimplex(NotASimplexReason::ChainViolation))
                }
                _ => columns.push(Column::new(lv.snap, ProcSet::singleton(lv.pid))),
            }
        }
        if columns.last().map_or(true, |c| c.snap != full) {
            columns.push(Column::new(full, ProcSet::EMPTY));
        }
        Ok(View { n, columns })
    }

    /// The codimension-one faces, one per local view removed.
    pub fn facets(&self) -> Vec<View> {
        let mut out = Vec::with_capacity(self.vertex_count());
        for (k, col) in self.columns.iter().enumerate() {
            for pid in col.group.iter() {
                let mut cols = self.columns.clone();
                cols[k].group = col.group.without(pid);
                out.push(View::from_presentation(self.n, cols));
            }
        }
        out.sort();
        out
    }

    /// `true` iff `small` is a face of `self`.
    pub fn contains(&self, small: &View) -> bool {
        self.n == small.n
            && small.columns.iter().filter(|c| !c.group.is_empty()).all(|sc| {
                self.columns.iter().any(|bc| bc.snap == sc.snap && sc.group.is_subset(bc.group))
            })
    }

    /// `I_k ∩ V_{k-1} = ∅` for every `k ≥ 2`.
    pub fn is_immediate_snapshot(&self) -> bool {
        self.columns.windows(2).all(|w| w[1].group.is_disjoint(w[0].snap))
    }

    pub(crate) fn with_last_group(&self, group: ProcSet) -> View {
        let mut columns = self.columns.clone();
        let t = columns.len();
        columns[t - 1].group = group;
        View::from_presentation(self.n, columns)
    }
}

impl Ord for View {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.local_views().cmp(&other.local_views()))
    }
}

impl PartialOrd for View {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, c) in self.columns.iter().enumerate() {
            if k > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{} {}", c.snap, c.group)?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
