//! One-round executions, enumerated operationally, as a cross-check on the
//! combinatorial construction.
//!
//! In one round every process writes its id to shared memory and then takes a
//! snapshot. An execution is summarized by its profile: the set each process's
//! snapshot returned. A map `pid ↦ snap` is a profile of some execution iff
//!
//! - `pid ∈ snap` (a process writes before it reads),
//! - the snapshots are totally ordered by inclusion (snapshots are atomic),
//! - the largest snapshot is `[n]` (the last reader sees every write).
//!
//! Given such a map with distinct snapshots `S_1 ⊂ ... ⊂ S_m`, the schedule
//! "write `S_k ∖ S_{k-1}`, then let every process with snapshot `S_k` read",
//! for `k = 1..m`, realizes it. [`raw_snapshot_profiles`] checks this
//! characterization for small `n` by running every interleaving.
//!
//! In the immediate snapshot model processes run in concurrency classes: a
//! block writes together and then reads together, so profiles correspond to
//! ordered set partitions of `[n]`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complex::{build_chromatic, build_view_complex, Complex};
use crate::error::{Error, Result};
use crate::procset::ProcSet;
use crate::symmetry::{Permutation, Relabel};
use crate::view::{Column, View};

pub const MAX_ORACLE_N: u8 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Snapshot,
    Immediate,
}

/// What each process's snapshot returned, indexed by process id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExecutionProfile {
    n: u8,
    views: Vec<ProcSet>,
}

impl ExecutionProfile {
    pub fn new(n: u8, views: Vec<ProcSet>) -> Result<Self> {
        let full = ProcSet::full(n.min(crate::MAX_N));
        if n > crate::MAX_N || views.len() != n as usize + 1 {
            return Err(Error::InvalidProfile(format!("expected {} snapshots", n as usize + 1)));
        }
        for (pid, snap) in views.iter().enumerate() {
            if !snap.within(n) || !snap.contains(pid as u8) {
                return Err(Error::InvalidProfile(format!("process {pid} did not see itself")));
            }
        }
        let chain = views.iter().all(|a| views.iter().all(|b| a.is_subset(*b) || b.is_subset(*a)));
        if !chain {
            return Err(Error::InvalidProfile("snapshots are not totally ordered".into()));
        }
        if !views.contains(&full) {
            return Err(Error::InvalidProfile("no process saw every write".into()));
        }
        Ok(ExecutionProfile { n, views })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn snap(&self, pid: u8) -> ProcSet {
        self.views[pid as usize]
    }

    pub fn views(&self) -> &[ProcSet] {
        &self.views
    }
}

impl Relabel for ExecutionProfile {
    fn relabel(&self, pi: &Permutation) -> Self {
        let mut views = vec![ProcSet::EMPTY; self.views.len()];
        for (pid, snap) in self.views.iter().enumerate() {
            views[pi.image(pid as u8) as usize] = snap.relabel(pi);
        }
        ExecutionProfile { n: self.n, views }
    }
}

impl Serialize for ExecutionProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Views<'a>(&'a [ProcSet]);
        impl Serialize for Views<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (pid, snap) in self.0.iter().enumerate() {
                    map.serialize_entry(&pid.to_string(), snap)?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("n", &self.n)?;
        map.serialize_entry("views", &Views(&self.views))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for ExecutionProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: u8,
            views: BTreeMap<String, ProcSet>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut views = vec![ProcSet::EMPTY; raw.n as usize + 1];
        for (pid, snap) in raw.views {
            let pid: usize = pid.parse().map_err(D::Error::custom)?;
            *views.get_mut(pid).ok_or_else(|| D::Error::custom("process id out of range"))? = snap;
        }
        ExecutionProfile::new(raw.n, views).map_err(D::Error::custom)
    }
}

fn check_oracle_n(n: u8) -> Result<()> {
    if (1..=MAX_ORACLE_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidN(n, "1..=5"))
    }
}

pub fn enumerate_profiles(n: u8, model: Model) -> Result<Vec<ExecutionProfile>> {
    enumerate_profiles_with(n, model, crate::complex::DEFAULT_BUDGET)
}

/// All profiles of the model, sorted.
pub fn enumerate_profiles_with(n: u8, model: Model, budget: u64) -> Result<Vec<ExecutionProfile>> {
    check_oracle_n(n)?;
    let mut out = Vec::new();
    let mut views = vec![ProcSet::EMPTY; n as usize + 1];
    match model {
        Model::Snapshot => snapshot_profiles(n, 0, &mut views, &mut out, budget)?,
        Model::Immediate => {
            ordered_partitions(n, ProcSet::full(n), ProcSet::EMPTY, &mut views, &mut out, budget)?
        }
    }
    out.sort();
    Ok(out)
}

fn snapshot_profiles(
    n: u8,
    pid: u8,
    views: &mut Vec<ProcSet>,
    out: &mut Vec<ExecutionProfile>,
    budget: u64,
) -> Result<()> {
    let full = ProcSet::full(n);
    if pid > n {
        if views.contains(&full) {
            if out.len() as u64 >= budget {
                return Err(Error::ResourceLimit { budget });
            }
            out.push(ExecutionProfile { n, views: views.clone() });
        }
        return Ok(());
    }
    for snap in full.subsets().filter(|s| s.contains(pid)) {
        let comparable = views[..pid as usize].iter().all(|v| v.is_subset(snap) || snap.is_subset(*v));
        if comparable {
            views[pid as usize] = snap;
            snapshot_profiles(n, pid + 1, views, out, budget)?;
        }
    }
    Ok(())
}

fn ordered_partitions(
    n: u8,
    remaining: ProcSet,
    written: ProcSet,
    views: &mut Vec<ProcSet>,
    out: &mut Vec<ExecutionProfile>,
    budget: u64,
) -> Result<()> {
    if remaining.is_empty() {
        if out.len() as u64 >= budget {
            return Err(Error::ResourceLimit { budget });
        }
        out.push(ExecutionProfile { n, views: views.clone() });
        return Ok(());
    }
    for block in remaining.subsets().filter(|b| !b.is_empty()) {
        let snap = written.union(block);
        for pid in block.iter() {
            views[pid as usize] = snap;
        }
        ordered_partitions(n, remaining.difference(block), snap, views, out, budget)?;
    }
    Ok(())
}

/// Profiles reached by running every interleaving of the `2(n+1)` write and
/// snapshot events. Factorial cost, so limited to `n ≤ 3`.
pub fn raw_snapshot_profiles(n: u8) -> Result<Vec<ExecutionProfile>> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidN(n, "1..=3"));
    }
    fn run(
        n: u8,
        written: ProcSet,
        done: ProcSet,
        views: &mut Vec<ProcSet>,
        out: &mut BTreeSet<ExecutionProfile>,
    ) {
        if done == ProcSet::full(n) {
            out.insert(ExecutionProfile { n, views: views.clone() });
            return;
        }
        for pid in 0..=n {
            if !written.contains(pid) {
                run(n, written.with(pid), done, views, out);
            } else if !done.contains(pid) {
                views[pid as usize] = written;
                run(n, written, done.with(pid), views, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    run(n, ProcSet::EMPTY, ProcSet::EMPTY, &mut vec![ProcSet::EMPTY; n as usize + 1], &mut out);
    Ok(out.into_iter().collect())
}

/// Groups processes by identical snapshots.
pub fn profile_to_view(p: &ExecutionProfile) -> View {
    let snaps: BTreeSet<(usize, ProcSet)> = p.views.iter().map(|s| (s.len(), *s)).collect();
    let mut columns: Vec<Column> = snaps
        .into_iter()
        .map(|(_, snap)| {
            let group = (0..=p.n).filter(|&pid| p.snap(pid) == snap).collect();
            Column::new(snap, group)
        })
        .collect();
    if columns.last().map(|c| c.snap) != Some(ProcSet::full(p.n)) {
        columns.push(Column::new(ProcSet::full(p.n), ProcSet::EMPTY));
    }
    crate::view::validate_view(&columns, p.n).expect("profiles satisfy the view conditions")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub n: u8,
    pub snapshot_profiles: usize,
    pub view_tops: usize,
    pub immediate_profiles: usize,
    pub chromatic_tops: usize,
    /// Symmetric difference between profile images and top simplices.
    pub snapshot_diff: Vec<View>,
    pub immediate_diff: Vec<View>,
}

impl OracleReport {
    pub fn matches(&self) -> bool {
        self.snapshot_diff.is_empty()
            && self.immediate_diff.is_empty()
            && self.snapshot_profiles == self.view_tops
            && self.immediate_profiles == self.chromatic_tops
    }

    pub fn summary(&self) -> String {
        format!(
            "snapshot {} = {}, immediate {} = {}, {}",
            self.snapshot_profiles,
            self.view_tops,
            self.immediate_profiles,
            self.chromatic_tops,
            if self.matches() { "MATCH" } else { "MISMATCH" }
        )
    }
}

fn top_views(c: &Complex) -> Result<HashSet<View>> {
    Ok(c.maximal_simplices().iter().map(|k| View::from_local_views(k, c.n())).collect::<Result<_, _>>()?)
}

fn sym_diff(a: &HashSet<View>, b: &HashSet<View>) -> Vec<View> {
    let mut d: Vec<View> = a.symmetric_difference(b).cloned().collect();
    d.sort();
    d
}

/// Compares profile images with the top simplices of both complexes.
pub fn cross_validate(n: u8) -> Result<OracleReport> {
    let snapshot = enumerate_profiles(n, Model::Snapshot)?;
    let immediate = enumerate_profiles(n, Model::Immediate)?;
    let view_tops = top_views(&build_view_complex(n)?)?;
    let chromatic_tops = top_views(&build_chromatic(n)?)?;
    let snap_views: HashSet<View> = snapshot.iter().map(profile_to_view).collect();
    let imm_views: HashSet<View> = immediate.iter().map(profile_to_view).collect();
    Ok(OracleReport {
        n,
        snapshot_profiles: snapshot.len(),
        view_tops: view_tops.len(),
        immediate_profiles: immediate.len(),
        chromatic_tops: chromatic_tops.len(),
        snapshot_diff: sym_diff(&snap_views, &view_tops),
        immediate_diff: sym_diff(&imm_views, &chromatic_tops),
    })
}
