mod common;

use std::collections::{BTreeSet, HashMap, HashSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force_simplices, check_partition, closure_keys, keys};
use viewcx::morse::{
    equivariant_sequence, interval_of, partition, phi, plain_sequence, psi, verify_sequence, CollapseSequence, Target,
};
use viewcx::oracle::{enumerate_profiles, profile_to_view, Model};
use viewcx::symmetry::{apply, orbit, stabilizer_size, Permutation};
use viewcx::{all_views, build_chromatic, build_view_complex, count_formulas, Complex, SimplexKey, View};

fn factorial(n: u8) -> usize {
    (1..=n as usize + 1).product()
}

fn random_face(rng: &mut impl Rng, w: &View) -> View {
    let key: SimplexKey = w.local_views().iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    View::from_local_views(&key, w.n()).unwrap()
}

fn random_perm(rng: &mut impl Rng, n: u8) -> Permutation {
    let mut images: Vec<u8> = (0..=n).collect();
    for i in (1..images.len()).rev() {
        images.swap(i, rng.gen_range(0..=i));
    }
    Permutation::new(images).unwrap()
}

#[test]
fn round_trip_exhaustive_small_n() {
    for n in 1..=3 {
        for w in all_views(n) {
            assert_eq!(View::from_local_views(&w.local_views(), n).unwrap(), w);
        }
    }
}

#[test]
fn facets_are_valid_views() {
    for n in 1..=3 {
        for w in all_views(n) {
            let facets = w.facets();
            assert_eq!(facets.len() as i32, w.dim() + 1, "{w}");
            for f in facets {
                assert_eq!(viewcx::validate_view(f.columns(), n).unwrap(), f);
                assert!(w.contains(&f));
                assert_eq!(f.vertex_count() + 1, w.vertex_count());
            }
        }
    }
}

#[test]
fn immediate_snapshot_is_closed_under_faces() {
    for n in 1..=3 {
        for w in all_views(n).into_iter().filter(View::is_immediate_snapshot) {
            for f in w.facets() {
                assert!(f.is_immediate_snapshot(), "{f} ⊂ {w}");
            }
        }
    }
}

#[test]
fn dimension_bounds() {
    for n in 1..=4 {
        let views = all_views(n);
        assert!(views.iter().all(|w| (-1..=n as i32).contains(&w.dim())));
        assert_eq!(views.iter().filter(|w| w.dim() == -1).count(), 1);
    }
}

#[test]
fn enumeration_agrees_with_brute_force_matrices() {
    for n in 1..=2 {
        let brute = brute_force_simplices(n);
        assert_eq!(keys(&build_view_complex(n).unwrap()), brute, "n = {n}");
    }
}

#[test]
fn complexes_are_closures_of_execution_views() {
    for n in 1..=3 {
        let snap: Vec<_> = enumerate_profiles(n, Model::Snapshot).unwrap().iter().map(|p| profile_to_view(p).local_views()).collect();
        let imm: Vec<_> = enumerate_profiles(n, Model::Immediate).unwrap().iter().map(|p| profile_to_view(p).local_views()).collect();
        assert_eq!(keys(&build_view_complex(n).unwrap()), closure_keys(&snap), "n = {n}");
        assert_eq!(keys(&build_chromatic(n).unwrap()), closure_keys(&imm), "n = {n}");
    }
}

#[test]
fn built_complexes_are_closed_pure_and_nested() {
    for n in 1..=3 {
        let v = build_view_complex(n).unwrap();
        let c = build_chromatic(n).unwrap();
        for k in [&v, &c] {
            assert!(k.is_downward_closed());
            assert!(k.maximal_simplices().iter().all(|m| m.dim() == n as i32));
            let f = k.f_vector().unwrap();
            assert!(f.is_parity_balanced());
            assert_eq!(f.euler_characteristic(), 1);
        }
        assert!(c.simplices().all(|s| v.contains_key(&c.key_of(s))));
    }
}

#[test]
fn vertex_and_edge_formulas() {
    for n in 1..=4 {
        let f = build_view_complex(n).unwrap().f_vector().unwrap();
        assert_eq!((f.get(0), f.get(1)), count_formulas(n), "n = {n}");
    }
}

#[test]
fn collapses_preserve_downward_closure() {
    for n in 1..=3 {
        let v = build_view_complex(n).unwrap();
        let seq = plain_sequence(&v, Target::Void).unwrap();
        let mut work = v.clone();
        for batch in &seq.batches {
            for rep in batch {
                work = work.collapse_at(&rep.local_views()).unwrap();
                assert!(work.is_void() || work.is_downward_closed());
            }
        }
        assert!(work.is_void());
    }
}

#[test]
fn facets_commute_with_relabeling() {
    let check = |w: &View, pi: &Permutation| {
        let lhs: BTreeSet<View> = w.facets().iter().map(|f| apply(pi, f)).collect();
        let rhs: BTreeSet<View> = apply(pi, w).facets().into_iter().collect();
        assert_eq!(lhs, rhs, "{w} under {pi:?}");
    };
    for n in 1..=2 {
        for w in all_views(n) {
            for pi in Permutation::all(n) {
                check(&w, &pi);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let views = all_views(3);
    for _ in 0..20_000 {
        let w = &views[rng.gen_range(0..views.len())];
        check(w, &random_perm(&mut rng, 3));
    }
}

#[test]
fn phi_psi_commute_with_relabeling() {
    let check = |w: &View, pi: &Permutation| {
        let pw = apply(pi, w);
        assert_eq!(apply(pi, &phi(w)), phi(&pw));
        assert_eq!(apply(pi, &psi(w)), psi(&pw));
    };
    for n in 1..=2 {
        for w in all_views(n) {
            for pi in Permutation::all(n) {
                check(&w, &pi);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 3..=4 {
        let views = all_views(n);
        for _ in 0..20_000 {
            let w = &views[rng.gen_range(0..views.len())];
            check(w, &random_perm(&mut rng, n));
        }
    }
}

#[test]
fn orbit_stabilizer() {
    for n in 1..=3 {
        for w in all_views(n) {
            assert_eq!(orbit(&w).len() * stabilizer_size(&w), factorial(n), "{w}");
        }
    }
}

#[test]
fn moved_intervals_are_disjoint() {
    for n in 1..=2 {
        for w in all_views(n) {
            let members: HashSet<View> = interval_of(&w).members().into_iter().collect();
            for pi in Permutation::all(n) {
                let pw = apply(&pi, &w);
                if phi(&w) != apply(&pi, &phi(&w)) {
                    assert!(interval_of(&pw).members().iter().all(|u| !members.contains(u)), "{w}");
                }
            }
        }
    }
}

#[test]
fn phi_psi_bracket_and_rank() {
    for n in 1..=3 {
        for w in all_views(n) {
            let (lo, hi) = (phi(&w), psi(&w));
            assert!(w.contains(&lo) && hi.contains(&w), "{w}");
            assert!(interval_of(&w).rank >= 1);
            if lo.is_immediate_snapshot() {
                assert!(w.is_immediate_snapshot(), "{w}");
            }
        }
    }
}

#[test]
fn phi_psi_constant_on_intervals() {
    let check = |w: &View| {
        let i = interval_of(w);
        for u in i.members() {
            assert_eq!((phi(&u), psi(&u)), (i.lo.clone(), i.hi.clone()), "{u} in I({w})");
        }
    };
    for n in 1..=3 {
        all_views(n).iter().for_each(check);
    }
}

#[test]
fn phi_is_monotone() {
    for n in 1..=2 {
        for w in all_views(n) {
            for u in all_views(n).iter().filter(|u| w.contains(u)) {
                assert!(phi(&w).contains(&phi(u)), "{u} ⊆ {w}");
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let views = all_views(3);
    for _ in 0..20_000 {
        let w = &views[rng.gen_range(0..views.len())];
        let u = random_face(&mut rng, w);
        assert!(phi(w).contains(&phi(&u)), "{u} ⊆ {w}");
    }
}

#[test]
fn partitions_cover_exactly() {
    for n in 1..=3 {
        check_partition(&build_view_complex(n).unwrap()).unwrap();
        let c = build_chromatic(n).unwrap();
        check_partition(&c).unwrap();
        for i in partition(&c).unwrap() {
            assert!(i.members().iter().all(View::is_immediate_snapshot));
        }
    }
}

fn removed_multiset(c: &Complex, seq: &CollapseSequence) -> HashMap<SimplexKey, usize> {
    let mut out = HashMap::new();
    let mut work = c.clone();
    for rep in seq.batches.iter().flatten() {
        for up in work.cofaces(&rep.local_views()).unwrap() {
            *out.entry(up).or_insert(0) += 1;
        }
        work.collapse_in_place(&rep.local_views()).unwrap();
    }
    out
}

#[test]
fn generated_sequences_verify() {
    for n in 1..=3 {
        for c in [build_view_complex(n).unwrap(), build_chromatic(n).unwrap()] {
            for target in [Target::Chromatic, Target::Void] {
                let plain = plain_sequence(&c, target).unwrap();
                let equi = equivariant_sequence(&c, target).unwrap();
                for seq in [&plain, &equi] {
                    let report = verify_sequence(&c, seq);
                    assert!(report.ok, "n = {n}, {:?}, {target:?}: {:?}", c.kind(), report.violation);
                }
                for batch in &equi.batches {
                    let members: BTreeSet<View> = batch.iter().cloned().collect();
                    assert_eq!(members.len(), batch.len());
                    for pi in Permutation::all(n) {
                        assert!(batch.iter().all(|w| members.contains(&apply(&pi, w))));
                    }
                    assert_eq!(members, orbit(&batch[0]).into_iter().collect());
                }
                let a = removed_multiset(&c, &plain);
                assert_eq!(a, removed_multiset(&c, &equi));
                assert!(a.values().all(|&k| k == 1));
            }
        }
    }
}

#[test]
fn profiles_map_injectively_to_tops() {
    for n in 1..=3 {
        let snap = enumerate_profiles(n, Model::Snapshot).unwrap();
        let images: HashSet<View> = snap.iter().map(profile_to_view).collect();
        assert_eq!(images.len(), snap.len());
        assert!(images.iter().all(|w| w.dim() == n as i32));

        let imm: HashSet<_> = enumerate_profiles(n, Model::Immediate).unwrap().into_iter().collect();
        let filtered: HashSet<_> = snap.into_iter().filter(|p| profile_to_view(p).is_immediate_snapshot()).collect();
        assert_eq!(imm, filtered, "n = {n}");
    }
}

#[test]
fn raw_interleavings_match_profiles() {
    for n in 1..=3 {
        let raw: HashSet<_> = viewcx::oracle::raw_snapshot_profiles(n).unwrap().into_iter().collect();
        let profiles: HashSet<_> = enumerate_profiles(n, Model::Snapshot).unwrap().into_iter().collect();
        assert_eq!(raw, profiles, "n = {n}");
    }
}

fn view_strategy(n: u8) -> impl Strategy<Value = View> {
    let views = all_views(n);
    (0..views.len()).prop_map(move |i| views[i].clone())
}

fn perm_strategy(n: u8) -> impl Strategy<Value = Permutation> {
    Just((0..=n).collect::<Vec<u8>>()).prop_shuffle().prop_map(|v| Permutation::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn round_trip_sampled_n4(w in view_strategy(4)) {
        prop_assert_eq!(View::from_local_views(&w.local_views(), 4).unwrap(), w);
    }

    #[test]
    fn relabeling_profiles_commutes(i in 0usize..207, pi in perm_strategy(3)) {
        let profiles = enumerate_profiles(3, Model::Snapshot).unwrap();
        let p = &profiles[i];
        prop_assert_eq!(profile_to_view(&apply(&pi, p)), apply(&pi, &profile_to_view(p)));
    }

    #[test]
    fn relabeling_inverts(w in view_strategy(4), pi in perm_strategy(4)) {
        prop_assert_eq!(apply(&pi.inverse(), &apply(&pi, &w)), w.clone());
        prop_assert_eq!(apply(&pi, &w).vertex_count(), w.vertex_count());
    }
}
