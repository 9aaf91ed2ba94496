//! The Φ/Ψ interval partition of the face poset of `View^n` and the
//! collapsing sequences it induces.
//!
//! `Φ` trims the last group of a view to `I_t ∩ V_{t-1}` and `Ψ` extends it by
//! `[n] ∖ V_{t-1}`. The closed intervals `[Φ(W), Ψ(W)]` are Boolean and
//! partition all simplices, the empty one included. Collapsing the interval
//! bottoms in order of decreasing size, non-immediate-snapshot intervals
//! first, takes `View^n` to `χ(Δ^n)` and then to the void complex.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::complex::{build_chromatic, Complex, ComplexKind};
use crate::error::{Error, Result};
use crate::procset::ProcSet;
use crate::symmetry::{is_g_free, orbit};
use crate::view::{SimplexKey, View};

pub const SEQUENCE_FORMAT_VERSION: u32 = 1;

pub fn phi(w: &View) -> View {
    w.with_last_group(w.last_group().intersection(w.penultimate_snap()))
}

pub fn psi(w: &View) -> View {
    let outside = ProcSet::full(w.n()).difference(w.penultimate_snap());
    w.with_last_group(w.last_group().union(outside))
}

/// A Boolean interval `[lo, hi]` of the face poset; `rep = lo` is Φ-fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub rep: View,
    pub lo: View,
    pub hi: View,
    pub rank: usize,
}

impl Interval {
    pub fn contains(&self, u: &View) -> bool {
        u.contains(&self.lo) && self.hi.contains(u)
    }

    /// Number of members, `2^rank`.
    pub fn size(&self) -> usize {
        1 << self.rank
    }

    /// All members in canonical order.
    pub fn members(&self) -> Vec<View> {
        let base = self.lo.last_group();
        let free = self.hi.last_group().difference(base);
        let mut out: Vec<View> = free.subsets().map(|s| self.lo.with_last_group(base.union(s))).collect();
        out.sort();
        out
    }
}

pub fn interval_of(w: &View) -> Interval {
    let lo = phi(w);
    let hi = psi(w);
    let rank = hi.vertex_count() - lo.vertex_count();
    Interval { rep: lo.clone(), lo, hi, rank }
}

fn require_view_kind(c: &Complex) -> Result<()> {
    match c.kind() {
        ComplexKind::View | ComplexKind::Chromatic if !c.is_void() => Ok(()),
        _ => Err(Error::NotAViewComplex),
    }
}

/// The intervals covering `c`, sorted by representative.
pub fn partition(c: &Complex) -> Result<Vec<Interval>> {
    require_view_kind(c)?;
    let mut reps: Vec<View> = c.views()?.into_iter().filter(|w| &phi(w) == w).collect();
    reps.sort();
    Ok(reps.iter().map(interval_of).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseMode {
    Plain,
    Equivariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Chromatic,
    Void,
}

/// Batches of interval representatives. Batches before `phase_boundary` take
/// the complex down to `χ(Δ^n)`; the rest continue to the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseSequence {
    pub format_version: u32,
    pub n: u8,
    pub source: ComplexKind,
    pub mode: CollapseMode,
    pub target: Target,
    pub phase_boundary: usize,
    pub batches: Vec<Vec<View>>,
}

impl CollapseSequence {
    pub fn batch_sizes(&self) -> Vec<usize> {
        self.batches.iter().map(Vec::len).collect()
    }
}

/// Representatives split into the non-chromatic phase and the chromatic
/// phase, each in schedule order: larger simplices first, then canonical.
fn phased_reps(c: &Complex, target: Target) -> Result<(Vec<View>, Vec<View>)> {
    let (mut outside, mut inside): (Vec<View>, Vec<View>) =
        partition(c)?.into_iter().map(|i| i.rep).partition(|w| !w.is_immediate_snapshot());
    let order = |w: &View| (Reverse(w.vertex_count()), w.clone());
    outside.sort_by_key(order);
    inside.sort_by_key(order);
    if target == Target::Chromatic {
        inside.clear();
    }
    Ok((outside, inside))
}

pub fn plain_sequence(c: &Complex, target: Target) -> Result<CollapseSequence> {
    let (outside, inside) = phased_reps(c, target)?;
    let phase_boundary = outside.len();
    let batches = outside.into_iter().chain(inside).map(|w| vec![w]).collect();
    Ok(CollapseSequence {
        format_version: SEQUENCE_FORMAT_VERSION,
        n: c.n(),
        source: c.kind(),
        mode: CollapseMode::Plain,
        target,
        phase_boundary,
        batches,
    })
}

/// Groups representatives into orbits, largest first, ties by the
/// canonically smallest member.
fn orbit_batches(reps: &[View]) -> Vec<Vec<View>> {
    let mut seen: HashSet<&View> = HashSet::new();
    let mut keyed: BTreeMap<(Reverse<usize>, View), Vec<View>> = BTreeMap::new();
    for w in reps {
        if seen.contains(w) {
            continue;
        }
        let members = orbit(w);
        for m in &members {
            debug_assert!(reps.contains(m), "orbit of a representative leaves its phase");
        }
        seen.extend(reps.iter().filter(|r| members.contains(r)));
        keyed.insert((Reverse(w.vertex_count()), members[0].clone()), members);
    }
    keyed.into_values().collect()
}

pub fn equivariant_sequence(c: &Complex, target: Target) -> Result<CollapseSequence> {
    let (outside, inside) = phased_reps(c, target)?;
    let first = orbit_batches(&outside);
    let phase_boundary = first.len();
    let batches: Vec<Vec<View>> = first.into_iter().chain(orbit_batches(&inside)).collect();

    let mut work = c.clone();
    for (i, batch) in batches.iter().enumerate() {
        if !is_g_free(&work, &batch[0].local_views())? {
            return Err(Error::GFreeViolation { step: i + 1 });
        }
        for w in batch {
            work.collapse_in_place(&w.local_views())?;
        }
    }
    Ok(CollapseSequence {
        format_version: SEQUENCE_FORMAT_VERSION,
        n: c.n(),
        source: c.kind(),
        mode: CollapseMode::Equivariant,
        target,
        phase_boundary,
        batches,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NMismatch,
    BadPhaseBoundary,
    EmptyBatch,
    BatchNotSingleton,
    OrbitMismatch,
    RepAbsent,
    NotFree,
    GFreeViolation,
    IntervalMismatch,
    PhaseViolation,
    PhaseMismatch,
    FinalStateMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// 1-based batch number, absent for whole-sequence checks.
    pub step: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub rep: View,
    pub batch_size: usize,
    pub removed_count: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub steps: Vec<StepRecord>,
    pub removed_total: usize,
    pub violation: Option<Violation>,
}

impl VerifyReport {
    pub fn failing_step(&self) -> Option<usize> {
        self.violation.as_ref().and_then(|v| v.step)
    }
}

/// Replays `seq` on `c` and checks every step by brute force.
///
/// Upper sets are found by scanning the whole working set, with no reuse of
/// the complex's coface machinery, so a pass here does not depend on the
/// generator being right.
pub fn verify_sequence(c: &Complex, seq: &CollapseSequence) -> VerifyReport {
    let mut replay = Replay { steps: Vec::new(), removed_total: 0 };
    let violation = replay.run(c, seq).err();
    VerifyReport { ok: violation.is_none(), steps: replay.steps, removed_total: replay.removed_total, violation }
}

struct Replay {
    steps: Vec<StepRecord>,
    removed_total: usize,
}

fn fail(step: Option<usize>, kind: ViolationKind, detail: impl Into<String>) -> Violation {
    Violation { step, kind, detail: detail.into() }
}

fn upper_set(cur: &HashSet<SimplexKey>, bottom: &SimplexKey) -> HashSet<SimplexKey> {
    cur.iter().filter(|t| bottom.is_subset(t)).cloned().collect()
}

fn is_chromatic_key(key: &SimplexKey, n: u8) -> bool {
    View::from_local_views(key, n).is_ok_and(|w| w.is_immediate_snapshot())
}

impl Replay {
    fn run(&mut self, c: &Complex, seq: &CollapseSequence) -> Result<(), Violation> {
        let n = c.n();
        if seq.n != n {
            return Err(fail(None, ViolationKind::NMismatch, format!("sequence n = {}, complex n = {n}", seq.n)));
        }
        if seq.phase_boundary > seq.batches.len() {
            return Err(fail(None, ViolationKind::BadPhaseBoundary, "phase boundary past the last batch"));
        }
        let mut cur: HashSet<SimplexKey> = c.simplices().map(|s| c.key_of(s)).collect();
        let middle: HashSet<SimplexKey> = match c.kind() {
            ComplexKind::View => match build_chromatic(n) {
                Ok(chi) => chi.simplices().map(|s| chi.key_of(s)).collect(),
                Err(e) => return Err(fail(None, ViolationKind::PhaseMismatch, e.to_string())),
            },
            _ => cur.iter().filter(|k| is_chromatic_key(k, n)).cloned().collect(),
        };
        let check_middle = |cur: &HashSet<SimplexKey>, step: usize| {
            if *cur == middle {
                Ok(())
            } else {
                Err(fail(
                    Some(step),
                    ViolationKind::PhaseMismatch,
                    format!("{} simplices at the phase boundary, expected {}", cur.len(), middle.len()),
                ))
            }
        };

        for (i, batch) in seq.batches.iter().enumerate() {
            let step = i + 1;
            if i == seq.phase_boundary {
                check_middle(&cur, step)?;
            }
            let removed = self.step(&mut cur, seq, batch, step, i < seq.phase_boundary, n)?;
            self.removed_total += removed;
        }
        if seq.phase_boundary == seq.batches.len() {
            check_middle(&cur, seq.batches.len())?;
        }

        let final_ok = match seq.target {
            Target::Void => cur.is_empty(),
            Target::Chromatic => seq.phase_boundary == seq.batches.len() && cur == middle,
        };
        if !final_ok {
            return Err(fail(
                None,
                ViolationKind::FinalStateMismatch,
                format!("{} simplices remain after the last batch", cur.len()),
            ));
        }
        Ok(())
    }

    fn step(
        &mut self,
        cur: &mut HashSet<SimplexKey>,
        seq: &CollapseSequence,
        batch: &[View],
        step: usize,
        first_phase: bool,
        n: u8,
    ) -> Result<usize, Violation> {
        let at = Some(step);
        let Some(head) = batch.first() else {
            return Err(fail(at, ViolationKind::EmptyBatch, "batch has no representatives"));
        };
        let mut record = StepRecord { step, rep: head.clone(), batch_size: batch.len(), removed_count: 0, ok: false };
        let result = self.check_batch(cur, seq, batch, at, first_phase, n);
        if let Ok(removed) = result {
            record.removed_count = removed;
            record.ok = true;
        }
        self.steps.push(record);
        result
    }

    fn check_batch(
        &self,
        cur: &mut HashSet<SimplexKey>,
        seq: &CollapseSequence,
        batch: &[View],
        at: Option<usize>,
        first_phase: bool,
        n: u8,
    ) -> Result<usize, Violation> {
        if let Some(w) = batch.iter().find(|w| w.n() != n) {
            return Err(fail(at, ViolationKind::NMismatch, format!("{w} is not an {n}-view")));
        }
        match seq.mode {
            CollapseMode::Plain if batch.len() != 1 => {
                return Err(fail(at, ViolationKind::BatchNotSingleton, format!("{} representatives", batch.len())));
            }
            CollapseMode::Equivariant => {
                let claimed: HashSet<&View> = batch.iter().collect();
                let full = orbit(&batch[0]);
                if claimed.len() != batch.len() || claimed != full.iter().collect() {
                    return Err(fail(at, ViolationKind::OrbitMismatch, format!("batch is not the orbit of {}", batch[0])));
                }
            }
            CollapseMode::Plain => {}
        }

        let mut uppers = Vec::with_capacity(batch.len());
        for w in batch {
            let key = w.local_views();
            if !cur.contains(&key) {
                return Err(fail(at, ViolationKind::RepAbsent, format!("{w} is not in the complex")));
            }
            let up = upper_set(cur, &key);
            let apex = up.iter().fold(SimplexKey::empty(), |acc, t| acc.union(t));
            let free_vertices = apex.len() - key.len();
            if free_vertices == 0 || free_vertices >= usize::BITS as usize || up.len() != 1 << free_vertices {
                return Err(fail(at, ViolationKind::NotFree, format!("{w} is not free")));
            }
            uppers.push(up);
        }

        if seq.mode == CollapseMode::Equivariant {
            for (w, up) in batch.iter().zip(&uppers).skip(1) {
                if !uppers[0].is_disjoint(up) {
                    return Err(fail(
                        at,
                        ViolationKind::GFreeViolation,
                        format!("upper sets of {} and {w} meet", batch[0]),
                    ));
                }
            }
        }

        for (w, up) in batch.iter().zip(&uppers) {
            let claimed: HashSet<SimplexKey> = interval_of(w).members().iter().map(View::local_views).collect();
            if *up != claimed {
                return Err(fail(at, ViolationKind::IntervalMismatch, format!("upper set of {w} is not its interval")));
            }
        }

        let doomed: HashSet<SimplexKey> = uppers.into_iter().flatten().collect();
        if first_phase {
            if let Some(k) = doomed.iter().find(|k| is_chromatic_key(k, n)) {
                return Err(fail(
                    at,
                    ViolationKind::PhaseViolation,
                    format!("first phase removes a chromatic simplex {:?}", k.as_slice()),
                ));
            }
        }
        for k in &doomed {
            cur.remove(k);
        }
        Ok(doomed.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_chromatic, build_view_complex};

    fn s(ids: &[u8]) -> ProcSet {
        ProcSet::from_ids(ids.iter().copied())
    }

    fn view(n: u8, cols: &[(&[u8], &[u8])]) -> View {
        let cols: Vec<_> = cols.iter().map(|(a, b)| (s(a), s(b))).collect();
        View::new(n, &cols).unwrap()
    }

    #[test]
    fn phi_psi_examples() {
        let tri = view(2, &[(&[0, 1], &[0]), (&[0, 1, 2], &[1, 2])]);
        assert_eq!(phi(&tri), view(2, &[(&[0, 1], &[0]), (&[0, 1, 2], &[1])]));
        assert_eq!(psi(&tri), tri);
        for g in ProcSet::full(2).subsets() {
            let w = view(2, &[(&[0, 1, 2], &g.iter().collect::<Vec<_>>())]);
            assert_eq!(phi(&w), View::empty(2));
            assert_eq!(psi(&w), view(2, &[(&[0, 1, 2], &[0, 1, 2])]));
        }
    }

    #[test]
    fn interval_examples() {
        let tri = view(2, &[(&[0, 1], &[0]), (&[0, 1, 2], &[1, 2])]);
        let i = interval_of(&tri);
        assert_eq!(i.rank, 1);
        assert_eq!(i.members(), vec![phi(&tri), tri.clone()]);

        let e = interval_of(&View::empty(3));
        assert_eq!((e.lo.clone(), e.rank), (View::empty(3), 4));
        assert_eq!(e.hi, view(3, &[(&[0, 1, 2, 3], &[0, 1, 2, 3])]));

        let v = view(1, &[(&[0], &[0]), (&[0, 1], &[])]);
        let i = interval_of(&v);
        assert_eq!(i.rank, 1);
        assert_eq!(i.members(), vec![v.clone(), view(1, &[(&[0], &[0]), (&[0, 1], &[1])])]);
        assert!(i.contains(&v) && !i.contains(&View::empty(1)));
    }

    #[test]
    fn partition_examples() {
        let v1 = build_view_complex(1).unwrap();
        let p = partition(&v1).unwrap();
        let mut ranks: Vec<_> = p.iter().map(|i| i.rank).collect();
        ranks.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(ranks, vec![2, 1, 1]);
        assert_eq!(p.iter().map(Interval::size).sum::<usize>(), 8);

        let v2 = build_view_complex(2).unwrap();
        assert_eq!(partition(&v2).unwrap().iter().map(Interval::size).sum::<usize>(), 62);
        let lk = v2.link(&SimplexKey::empty()).unwrap();
        assert!(matches!(partition(&lk), Err(Error::NotAViewComplex)));
    }

    #[test]
    fn plain_examples() {
        let v1 = build_view_complex(1).unwrap();
        let seq = plain_sequence(&v1, Target::Void).unwrap();
        assert_eq!(seq.batch_sizes(), vec![1, 1, 1]);
        assert_eq!(seq.batches[0][0].vertex_count(), 1);
        assert_eq!(seq.batches[1][0].vertex_count(), 1);
        assert_eq!(seq.batches[2][0], View::empty(1));
        let report = verify_sequence(&v1, &seq);
        assert!(report.ok, "{report:?}");
        assert_eq!(report.steps.last().unwrap().removed_count, 4);

        let v2 = build_view_complex(2).unwrap();
        let seq = plain_sequence(&v2, Target::Chromatic).unwrap();
        assert_eq!(seq.batches.len(), 6);
        assert_eq!(seq.phase_boundary, 6);
        let report = verify_sequence(&v2, &seq);
        assert!(report.ok, "{report:?}");
        assert_eq!(report.removed_total, 12);
        assert!(report.steps.iter().all(|s| s.removed_count == 2));
    }

    #[test]
    fn equivariant_examples() {
        let v2 = build_view_complex(2).unwrap();
        let seq = equivariant_sequence(&v2, Target::Chromatic).unwrap();
        assert_eq!(seq.batch_sizes(), vec![6]);
        assert!(verify_sequence(&v2, &seq).ok);

        let v1 = build_view_complex(1).unwrap();
        let seq = equivariant_sequence(&v1, Target::Void).unwrap();
        assert_eq!(seq.batch_sizes(), vec![2, 1]);
        assert_eq!(seq.batches[1][0], View::empty(1));
        assert!(verify_sequence(&v1, &seq).ok);

        let c2 = build_chromatic(2).unwrap();
        let seq = equivariant_sequence(&c2, Target::Void).unwrap();
        assert_eq!(seq.phase_boundary, 0);
        assert!(verify_sequence(&c2, &seq).ok);
    }

    #[test]
    fn verifier_rejects_merged_swap_batch() {
        let edge = view(1, &[(&[0, 1], &[0, 1])]);
        let k = Complex::closure(1, &[edge.local_views()]).unwrap();
        let seq = CollapseSequence {
            format_version: SEQUENCE_FORMAT_VERSION,
            n: 1,
            source: ComplexKind::Derived,
            mode: CollapseMode::Equivariant,
            target: Target::Void,
            phase_boundary: 0,
            batches: vec![vec![view(1, &[(&[0, 1], &[0])]), view(1, &[(&[0, 1], &[1])])]],
        };
        let report = verify_sequence(&k, &seq);
        assert!(!report.ok);
        let v = report.violation.unwrap();
        assert_eq!((v.step, v.kind), (Some(1), ViolationKind::GFreeViolation));
    }

    #[test]
    fn verifier_rejects_truncation_and_corruption() {
        let v2 = build_view_complex(2).unwrap();
        let mut seq = plain_sequence(&v2, Target::Void).unwrap();
        seq.batches.pop();
        let v = verify_sequence(&v2, &seq).violation.unwrap();
        assert_eq!((v.step, v.kind), (None, ViolationKind::FinalStateMismatch));

        let mut seq = plain_sequence(&v2, Target::Void).unwrap();
        seq.batches.swap(0, 10);
        let report = verify_sequence(&v2, &seq);
        assert_eq!(report.violation.as_ref().unwrap().step, Some(1));

        let mut seq = equivariant_sequence(&v2, Target::Void).unwrap();
        seq.batches[0].pop();
        let v = verify_sequence(&v2, &seq).violation.unwrap();
        assert_eq!((v.step, v.kind), (Some(1), ViolationKind::OrbitMismatch));

        let mut seq = plain_sequence(&v2, Target::Void).unwrap();
        seq.phase_boundary = 3;
        let v = verify_sequence(&v2, &seq).violation.unwrap();
        assert_eq!((v.step, v.kind), (Some(4), ViolationKind::PhaseMismatch));

        let mut seq = plain_sequence(&v2, Target::Void).unwrap();
        seq.n = 3;
        assert_eq!(verify_sequence(&v2, &seq).violation.unwrap().kind, ViolationKind::NMismatch);
    }
}
