#![allow(dead_code)]

use std::collections::HashSet;

use viewcx::morse::partition;
use viewcx::{validate_view, Column, Complex, ProcSet, SimplexKey, View};

/// Every simplex key of `c`.
pub fn keys(c: &Complex) -> HashSet<SimplexKey> {
    c.simplices().map(|s| c.key_of(s)).collect()
}

/// All subsets of the given vertex sets.
pub fn closure_keys<'a>(tops: impl IntoIterator<Item = &'a SimplexKey>) -> HashSet<SimplexKey> {
    let mut out = HashSet::new();
    for top in tops {
        let lvs = top.as_slice();
        for mask in 0u32..(1 << lvs.len()) {
            out.insert((0..lvs.len()).filter(|i| mask >> i & 1 == 1).map(|i| lvs[i]).collect());
        }
    }
    out
}

/// Vertex sets of every raw `2 × t` matrix over `[n]` accepted by the n-view
/// conditions. Exponential in `n`; used for `n ≤ 2`.
pub fn brute_force_simplices(n: u8) -> HashSet<SimplexKey> {
    let subsets: Vec<ProcSet> = ProcSet::full(n).subsets().collect();
    let mut out = HashSet::new();
    let mut cols = Vec::new();
    fn rec(n: u8, subsets: &[ProcSet], cols: &mut Vec<Column>, out: &mut HashSet<SimplexKey>) {
        if let Ok(w) = validate_view(cols, n) {
            out.insert(w.local_views());
        }
        if cols.len() > n as usize {
            return;
        }
        for &snap in subsets {
            for &group in subsets {
                cols.push(Column::new(snap, group));
                rec(n, subsets, cols, out);
                cols.pop();
            }
        }
    }
    rec(n, &subsets, &mut cols, &mut out);
    out
}

/// Checks that the Φ/Ψ intervals of `c` are disjoint, cover every simplex
/// exactly once, have Φ-fixed representatives, and that Σ 2^rank = |F(c)|.
pub fn check_partition(c: &Complex) -> Result<usize, String> {
    let intervals = partition(c).map_err(|e| e.to_string())?;
    let all = keys(c);
    let mut seen: HashSet<SimplexKey> = HashSet::with_capacity(all.len());
    let mut size_sum = 0usize;
    for i in &intervals {
        if viewcx::morse::phi(&i.rep) != i.rep {
            return Err(format!("representative {} is not Φ-fixed", i.rep));
        }
        let members = i.members();
        if members.len() != i.size() {
            return Err(format!("interval of {} has {} members, rank {}", i.rep, members.len(), i.rank));
        }
        size_sum += i.size();
        for m in members {
            let k = m.local_views();
            if !all.contains(&k) {
                return Err(format!("interval of {} leaves the complex at {m}", i.rep));
            }
            if !seen.insert(k) {
                return Err(format!("{m} lies in two intervals"));
            }
        }
    }
    if seen.len() != all.len() {
        return Err(format!("intervals cover {} of {} simplices", seen.len(), all.len()));
    }
    if size_sum != all.len() {
        return Err(format!("Σ 2^rank = {size_sum}, expected {}", all.len()));
    }
    Ok(intervals.len())
}

pub fn set(ids: &[u8]) -> ProcSet {
    ProcSet::from_ids(ids.iter().copied())
}

pub fn view(n: u8, cols: &[(&[u8], &[u8])]) -> View {
    let cols: Vec<_> = cols.iter().map(|(a, b)| (set(a), set(b))).collect();
    View::new(n, &cols).unwrap()
}
