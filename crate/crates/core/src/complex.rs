//! Finite abstract simplicial complexes over local views.
//!
//! A [`Complex`] is either void (no simplices at all) or a downward-closed set
//! of simplices that always contains the empty simplex. Simplices are stored
//! as sorted arrays of dense vertex ids; ids are assigned in the canonical
//! local-view order, so sorting ids and sorting local views agree.
//!
//! Every complex built here is a subcomplex of `View^n`, which lets coface
//! searches skip candidate vertices whose process already occurs.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate::{chains, views_over_chain};
use crate::error::{Error, Result};
use crate::procset::{ProcSet, MAX_N};
use crate::view::{LocalView, SimplexKey, View, ViewError};

/// Default cap on the number of simplices a build may produce.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    View,
    Chromatic,
    Derived,
}

impl fmt::Display for ComplexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ComplexKind::View => "view",
            ComplexKind::Chromatic => "chromatic",
            ComplexKind::Derived => "derived",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub budget: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { budget: DEFAULT_BUDGET }
    }
}

/// Bijection between the local views of `[n]` and `0..(n+1)·2^n`.
#[derive(Debug)]
pub struct VertexDict {
    n: u8,
    vertices: Vec<LocalView>,
    index: Vec<u32>,
}

impl VertexDict {
    pub fn new(n: u8) -> Self {
        let width = n as usize + 1;
        let masks = 1usize << width;
        let mut vertices = Vec::new();
        let mut index = vec![u32::MAX; masks * width];
        for mask in 1..masks {
            let snap = ProcSet::from_bits(mask as u16);
            for pid in snap.iter() {
                index[mask * width + pid as usize] = vertices.len() as u32;
                vertices.push(LocalView::new(snap, pid).expect("pid in snap"));
            }
        }
        VertexDict { n, vertices, index }
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn id(&self, lv: &LocalView) -> Option<u32> {
        if !lv.is_within(self.n) {
            return None;
        }
        let width = self.n as usize + 1;
        let id = self.index[lv.snap().bits() as usize * width + lv.pid() as usize];
        (id != u32::MAX).then_some(id)
    }

    pub fn local_view(&self, id: u32) -> LocalView {
        self.vertices[id as usize]
    }

    pub fn vertices(&self) -> &[LocalView] {
        &self.vertices
    }
}

/// A simplex as a strictly increasing list of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<u32>);

impl Simplex {
    pub fn from_sorted(ids: Vec<u32>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        Simplex(ids)
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
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

    fn with(&self, v: u32) -> Simplex {
        let mut ids = self.0.clone();
        let pos = ids.binary_search(&v).unwrap_err();
        ids.insert(pos, v);
        Simplex(ids)
    }

    fn union_ids(&self, extra: &[u32]) -> Simplex {
        let mut ids: Vec<u32> = self.0.iter().chain(extra).copied().collect();
        ids.sort_unstable();
        ids.dedup();
        Simplex(ids)
    }
}

/// Order used for every listing: by dimension, then lexicographically.
pub fn listing_order(a: &Simplex, b: &Simplex) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0))
}

/// Simplex counts by dimension, starting at dimension −1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FVector {
    counts: Vec<u64>,
}

impl FVector {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        FVector { counts }
    }

    /// `f_d`, zero outside the stored range.
    pub fn get(&self, dim: i32) -> u64 {
        usize::try_from(dim + 1).ok().and_then(|i| self.counts.get(i)).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Largest dimension with a nonzero count.
    pub fn top_dim(&self) -> i32 {
        self.counts.iter().rposition(|&c| c > 0).map_or(-2, |i| i as i32 - 1)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `Σ_{d≥0} (−1)^d f_d`.
    pub fn euler_characteristic(&self) -> i64 {
        self.counts
            .iter()
            .skip(1)
            .enumerate()
            .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Simplices of odd dimension, the empty simplex included.
    pub fn odd_count(&self) -> u64 {
        self.counts.iter().step_by(2).sum()
    }

    pub fn even_count(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).sum()
    }

    /// Necessary condition for collapsibility.
    pub fn is_parity_balanced(&self) -> bool {
        self.odd_count() == self.even_count()
    }
}

impl fmt::Display for FVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (first, rest) = self.counts.split_first().map_or((0, &[][..]), |(a, b)| (*a, b));
        write!(f, "({first};")?;
        for (i, c) in rest.iter().enumerate() {
            write!(f, "{}{c}", if i == 0 { " " } else { ", " })?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PseudomanifoldReport {
    pub pure: bool,
    pub dim: i32,
    /// Number of top simplices containing a ridge ↦ number of such ridges.
    pub ridge_histogram: BTreeMap<usize, usize>,
    /// A ridge lying in the most top simplices, when that is more than two;
    /// ties go to the canonically smallest.
    pub witness: Option<SimplexKey>,
}

impl PseudomanifoldReport {
    pub fn is_pseudomanifold(&self) -> bool {
        self.pure && self.ridge_histogram.keys().all(|&c| c <= 2)
    }
}

/// Closed formulas for the vertex and edge counts of `View^n`.
pub fn count_formulas(n: u8) -> (u64, u64) {
    let n = n as u64;
    let vertices = (n + 1) << n;
    let three = 3u64.pow((n as u32).saturating_sub(1));
    let edges = (n + 1) * n * 2 * three - ((n + 1) * n * (1u64 << n)) / 4;
    (vertices, edges)
}

#[derive(Clone)]
pub struct Complex {
    n: u8,
    kind: ComplexKind,
    dict: Arc<VertexDict>,
    simplices: Option<HashSet<Simplex>>,
}

impl PartialEq for Complex {
    /// Equality of simplex sets; `kind` is a label and does not take part.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.simplices == other.simplices
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Complex")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("len", &self.len())
            .finish()
    }
}

fn check_n(n: u8) -> Result<()> {
    if (1..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidN(n, "1..=15"))
    }
}

/// The view complex `View^n`.
pub fn build_view_complex(n: u8) -> Result<Complex> {
    build_view_complex_with(n, &BuildOptions::default())
}

pub fn build_view_complex_with(n: u8, opts: &BuildOptions) -> Result<Complex> {
    build(n, ComplexKind::View, opts)
}

/// The standard chromatic subdivision `χ(Δ^n)`: the immediate snapshot views.
pub fn build_chromatic(n: u8) -> Result<Complex> {
    build_chromatic_with(n, &BuildOptions::default())
}

pub fn build_chromatic_with(n: u8, opts: &BuildOptions) -> Result<Complex> {
    build(n, ComplexKind::Chromatic, opts)
}

fn build(n: u8, kind: ComplexKind, opts: &BuildOptions) -> Result<Complex> {
    check_n(n)?;
    let budget = opts.budget;
    let chains = chains(n, budget)?;
    let dict = Arc::new(VertexDict::new(n));
    let produced = AtomicU64::new(0);
    let parts: Vec<Result<Vec<Simplex>>> = chains
        .par_iter()
        .map(|chain| {
            let mut views = Vec::new();
            views_over_chain(n, chain, &mut views);
            if kind == ComplexKind::Chromatic {
                views.retain(View::is_immediate_snapshot);
            }
            let total = produced.fetch_add(views.len() as u64, Ordering::Relaxed) + views.len() as u64;
            if total > budget {
                return Err(Error::ResourceLimit { budget });
            }
            Ok(views.iter().map(|w| ids_of(&dict, &w.local_views())).collect())
        })
        .collect();
    let mut simplices = HashSet::with_capacity(produced.load(Ordering::Relaxed) as usize);
    for part in parts {
        simplices.extend(part?);
    }
    Ok(Complex { n, kind, dict, simplices: Some(simplices) })
}

fn ids_of(dict: &VertexDict, key: &SimplexKey) -> Simplex {
    Simplex(key.iter().map(|lv| dict.id(lv).expect("local view within [n]")).collect())
}

impl Complex {
    /// The void complex: no simplices, not even the empty one.
    pub fn void(n: u8) -> Self {
        Complex { n, kind: ComplexKind::Derived, dict: Arc::new(VertexDict::new(n)), simplices: None }
    }

    /// The empty complex `{∅}`.
    pub fn empty_complex(n: u8) -> Self {
        let mut set = HashSet::new();
        set.insert(Simplex::default());
        Complex { n, kind: ComplexKind::Derived, dict: Arc::new(VertexDict::new(n)), simplices: Some(set) }
    }

    /// Downward closure of the given simplices of `View^n`.
    pub fn closure(n: u8, tops: &[SimplexKey]) -> Result<Self> {
        check_n(n)?;
        let dict = Arc::new(VertexDict::new(n));
        let mut set = HashSet::new();
        set.insert(Simplex::default());
        for top in tops {
            View::from_local_views(top, n)?;
            let ids = ids_of(&dict, top);
            let k = ids.len();
            for mask in 0u64..(1u64 << k) {
                let sub = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| ids.0[i]).collect();
                set.insert(Simplex(sub));
            }
        }
        Ok(Complex { n, kind: ComplexKind::Derived, dict, simplices: Some(set) })
    }

    /// Assembles a complex from raw simplices, checking ids and downward closure.
    pub fn from_simplices(
        n: u8,
        kind: ComplexKind,
        simplices: impl IntoIterator<Item = Simplex>,
    ) -> Result<Self> {
        check_n(n)?;
        let dict = Arc::new(VertexDict::new(n));
        let set: HashSet<Simplex> = simplices.into_iter().collect();
        let c = Complex { n, kind, dict, simplices: Some(set) };
        let set = c.simplices.as_ref().expect("nonvoid");
        for s in set {
            if s.0.windows(2).any(|w| w[0] >= w[1]) || s.0.iter().any(|&v| v as usize >= c.dict.len()) {
                return Err(Error::CacheFormat("bad vertex ids".into()));
            }
        }
        if !set.contains(&Simplex::default()) || !c.is_downward_closed() {
            return Err(Error::CacheFormat("not downward closed".into()));
        }
        Ok(c)
    }

    pub(crate) fn derive(&self, kind: ComplexKind, simplices: Option<HashSet<Simplex>>) -> Complex {
        Complex { n: self.n, kind, dict: Arc::clone(&self.dict), simplices }
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn kind(&self) -> ComplexKind {
        self.kind
    }

    pub fn dict(&self) -> &VertexDict {
        &self.dict
    }

    pub fn is_void(&self) -> bool {
        self.simplices.is_none()
    }

    /// Number of simplices, the empty simplex included.
    pub fn len(&self) -> usize {
        self.simplices.as_ref().map_or(0, HashSet::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn set(&self) -> Result<&HashSet<Simplex>> {
        self.simplices.as_ref().ok_or(Error::VoidComplex)
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().flatten()
    }

    /// All simplices in listing order (dimension, then ids).
    pub fn sorted_simplices(&self) -> Vec<Simplex> {
        let mut v: Vec<Simplex> = self.simplices().cloned().collect();
        v.sort_by(listing_order);
        v
    }

    pub fn simplex_of(&self, key: &SimplexKey) -> Option<Simplex> {
        key.iter().map(|lv| self.dict.id(lv)).collect::<Option<Vec<_>>>().map(Simplex)
    }

    pub fn key_of(&self, s: &Simplex) -> SimplexKey {
        SimplexKey::from(s.0.iter().map(|&v| self.dict.local_view(v)).collect::<Vec<_>>())
    }

    pub fn view_of(&self, s: &Simplex) -> Result<View, ViewError> {
        View::from_local_views(&self.key_of(s), self.n)
    }

    /// Every simplex as a view, in canonical order.
    pub fn views(&self) -> Result<Vec<View>, ViewError> {
        let mut out = self.simplices().map(|s| self.view_of(s)).collect::<Result<Vec<_>, _>>()?;
        out.sort();
        Ok(out)
    }

    pub fn contains_simplex(&self, s: &Simplex) -> bool {
        self.simplices.as_ref().is_some_and(|set| set.contains(s))
    }

    pub fn contains_key(&self, key: &SimplexKey) -> bool {
        self.simplex_of(key).is_some_and(|s| self.contains_simplex(&s))
    }

    pub fn contains_view(&self, w: &View) -> bool {
        w.n() == self.n && self.contains_key(&w.local_views())
    }

    fn resolve(&self, key: &SimplexKey) -> Result<Simplex> {
        self.set()?;
        self.simplex_of(key).filter(|s| self.contains_simplex(s)).ok_or(Error::SimplexAbsent)
    }

    /// Vertices `v ∉ s` with `s ∪ {v}` in the complex.
    pub(crate) fn link_vertices(&self, s: &Simplex) -> Vec<u32> {
        let Some(set) = self.simplices.as_ref() else { return Vec::new() };
        let used: ProcSet = s.0.iter().map(|&v| self.dict.local_view(v).pid()).collect();
        (0..self.dict.len() as u32)
            .filter(|&v| !used.contains(self.dict.local_view(v).pid()))
            .filter(|&v| set.contains(&s.with(v)))
            .collect()
    }

    /// All `τ ⊇ s` in the complex.
    pub(crate) fn coface_simplices(&self, s: &Simplex) -> Vec<Simplex> {
        let Some(set) = self.simplices.as_ref() else { return Vec::new() };
        if !set.contains(s) {
            return Vec::new();
        }
        let extra = self.link_vertices(s);
        let mut out = Vec::new();
        let mut stack = vec![(s.clone(), 0usize)];
        while let Some((cur, from)) = stack.pop() {
            for i in from..extra.len() {
                let next = cur.with(extra[i]);
                if set.contains(&next) {
                    stack.push((next, i + 1));
                }
            }
            out.push(cur);
        }
        out.sort_by(listing_order);
        out
    }

    pub(crate) fn is_free_simplex(&self, s: &Simplex) -> bool {
        let extra = self.link_vertices(s);
        !extra.is_empty() && self.contains_simplex(&s.union_ids(&extra))
    }

    /// The upper set `F(K)_{≥σ}`.
    pub fn cofaces(&self, key: &SimplexKey) -> Result<Vec<SimplexKey>> {
        let s = self.resolve(key)?;
        Ok(self.coface_simplices(&s).iter().map(|t| self.key_of(t)).collect())
    }

    /// `lk(σ) = {τ : τ ∩ σ = ∅, τ ∪ σ ∈ K}`, sharing this complex's vertex ids.
    pub fn link(&self, key: &SimplexKey) -> Result<Complex> {
        let s = self.resolve(key)?;
        let link: HashSet<Simplex> = self
            .coface_simplices(&s)
            .into_iter()
            .map(|t| Simplex(t.0.into_iter().filter(|v| s.0.binary_search(v).is_err()).collect()))
            .collect();
        Ok(self.derive(ComplexKind::Derived, Some(link)))
    }

    /// `σ` is free iff its link is a nonempty full simplex.
    pub fn is_free(&self, key: &SimplexKey) -> Result<bool> {
        let s = self.resolve(key)?;
        Ok(self.is_free_simplex(&s))
    }

    /// `K ↓ σ`.
    pub fn collapse_at(&self, key: &SimplexKey) -> Result<Complex> {
        let mut next = self.clone();
        next.kind = ComplexKind::Derived;
        next.collapse_in_place(key)?;
        Ok(next)
    }

    /// Collapses at a free `σ`, returning the number of simplices removed.
    pub fn collapse_in_place(&mut self, key: &SimplexKey) -> Result<usize> {
        let s = self.resolve(key)?;
        if !self.is_free_simplex(&s) {
            return Err(Error::NotFree);
        }
        let doomed = self.coface_simplices(&s);
        let set = self.simplices.as_mut().expect("resolved");
        for t in &doomed {
            set.remove(t);
        }
        if set.is_empty() {
            self.simplices = None;
        }
        Ok(doomed.len())
    }

    pub fn f_vector(&self) -> Result<FVector> {
        let set = self.set()?;
        let top = set.iter().map(Simplex::len).max().unwrap_or(0);
        let mut counts = vec![0u64; top + 1];
        for s in set {
            counts[s.len()] += 1;
        }
        Ok(FVector { counts })
    }

    pub fn euler_characteristic(&self) -> Result<i64> {
        Ok(self.f_vector()?.euler_characteristic())
    }

    pub fn is_maximal(&self, s: &Simplex) -> bool {
        self.link_vertices(s).is_empty()
    }

    pub fn maximal_simplices(&self) -> Vec<SimplexKey> {
        let mut out: Vec<SimplexKey> =
            self.simplices().filter(|s| self.is_maximal(s)).map(|s| self.key_of(s)).collect();
        out.sort();
        out
    }

    pub fn is_downward_closed(&self) -> bool {
        let Some(set) = self.simplices.as_ref() else { return true };
        set.iter().all(|s| {
            (0..s.len()).all(|i| {
                let mut ids = s.0.clone();
                ids.remove(i);
                set.contains(&Simplex(ids))
            })
        })
    }

    pub fn pseudomanifold_report(&self) -> Result<PseudomanifoldReport> {
        let set = self.set()?;
        let top_len = set.iter().map(Simplex::len).max().unwrap_or(0);
        let pure = set.iter().filter(|s| self.is_maximal(s)).all(|s| s.len() == top_len);
        let mut ridge_histogram = BTreeMap::new();
        let mut witness: Option<(usize, Simplex)> = None;
        if top_len > 0 {
            for ridge in set.iter().filter(|s| s.len() == top_len - 1) {
                let count = self.link_vertices(ridge).len();
                *ridge_histogram.entry(count).or_insert(0) += 1;
                let better = witness.as_ref().map_or(true, |(c, w)| count > *c || (count == *c && ridge < w));
                if count > 2 && better {
                    witness = Some((count, ridge.clone()));
                }
            }
        }
        Ok(PseudomanifoldReport {
            pure,
            dim: top_len as i32 - 1,
            ridge_histogram,
            witness: witness.map(|(_, w)| self.key_of(&w)),
        })
    }
}
