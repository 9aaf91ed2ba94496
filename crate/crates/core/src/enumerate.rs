//! Direct generation of views: pick a snapshot chain, then place processes.

use crate::error::{Error, Result};
use crate::procset::ProcSet;
use crate::view::{Column, View};

/// Every chain `∅ ≠ V_1 ⊂ ... ⊂ V_{t-1} ⊂ [n]`, the empty chain included,
/// in depth-first order. Fails once more than `budget` chains exist; each chain
/// carries at least one view, so this bounds the work before any view is built.
pub(crate) fn chains(n: u8, budget: u64) -> Result<Vec<Vec<ProcSet>>> {
    fn grow(
        prev: ProcSet,
        full: ProcSet,
        cur: &mut Vec<ProcSet>,
        out: &mut Vec<Vec<ProcSet>>,
        budget: u64,
    ) -> Result<()> {
        if out.len() as u64 >= budget {
            return Err(Error::ResourceLimit { budget });
        }
        out.push(cur.clone());
        let free = full.difference(prev);
        for extra in free.subsets() {
            if extra.is_empty() || extra == free {
                continue;
            }
            cur.push(prev.union(extra));
            grow(prev.union(extra), full, cur, out, budget)?;
            cur.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    grow(ProcSet::EMPTY, ProcSet::full(n), &mut Vec::new(), &mut out, budget)?;
    Ok(out)
}

/// Appends every view whose snapshot chain is `chain` followed by `[n]`.
pub(crate) fn views_over_chain(n: u8, chain: &[ProcSet], out: &mut Vec<View>) {
    let mut columns: Vec<Column> = chain.iter().map(|&s| Column::new(s, ProcSet::EMPTY)).collect();
    columns.push(Column::new(ProcSet::full(n), ProcSet::EMPTY));
    place(n, 0, &mut columns, out);
}

fn place(n: u8, pid: u8, columns: &mut Vec<Column>, out: &mut Vec<View>) {
    if pid > n {
        let t = columns.len();
        if columns[..t - 1].iter().all(|c| !c.group.is_empty()) {
            out.push(View::from_presentation(n, columns.clone()));
        }
        return;
    }
    // Absent from the simplex.
    place(n, pid + 1, columns, out);
    for k in 0..columns.len() {
        if columns[k].snap.contains(pid) {
            columns[k].group = columns[k].group.with(pid);
            place(n, pid + 1, columns, out);
            columns[k].group = columns[k].group.without(pid);
        }
    }
}

/// Every n-view of every dimension, sorted canonically.
pub fn all_views(n: u8) -> Vec<View> {
    let mut out = Vec::new();
    for chain in chains(n, u64::MAX).expect("unbounded budget") {
        views_over_chain(n, &chain, &mut out);
    }
    out.sort();
    out
}
