use deskalg::patching::{
    build_level_complex, cg_check, cg_instance, compact_select, composition_law, limit_pi, random_inverse_system, transition,
    CgDiagnosis, CgFamily, FiniteInverseSystem, PatchScenario, Verdict,
};
use deskalg::resolution::binom;
use deskalg::zmod::Zmod;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn one_killed_coordinate_is_periodic_at_each_level() {
    for p in [2, 3] {
        let sc = PatchScenario::new(p, 1, 1, vec![1, 2, 3], 4);
        for n in [1, 2, 3] {
            let lvl = build_level_complex(&sc, n).unwrap();
            assert_eq!(lvl.groups(), vec![vec![n]; 5], "p = {}, n = {}", p, n);
            assert!(lvl.descent_holds());
        }
    }
}

#[test]
fn transitions_compose_on_homology() {
    let sc = PatchScenario::new(2, 1, 1, vec![1, 2, 3], 4);
    let zm = Zmod::new(2, 1).unwrap();
    let e32 = transition(&sc, 3, 2).unwrap();
    let e21 = transition(&sc, 2, 1).unwrap();
    let e31 = transition(&sc, 3, 1).unwrap();
    for i in 0..=4 {
        let comp = e32.homotopy[i].then(zm, &e21.homotopy[i]);
        let direct = &e31.homotopy[i];
        assert_eq!(comp.target, direct.target);
        for (x, y) in comp.columns.iter().zip(&direct.columns) {
            let x: Vec<u64> = x.iter().map(|v| v % 2).collect();
            let y: Vec<u64> = y.iter().map(|v| v % 2).collect();
            assert_eq!(x, y, "degree {}", i);
        }
    }
    assert_eq!(composition_law(&sc).unwrap(), None);
}

#[test]
fn swap_system_has_a_thread() {
    let sys = FiniteInverseSystem::new(vec![2; 5], vec![vec![1, 0]; 4]).unwrap();
    let images = sys.eventual_images();
    assert!(images.iter().all(|e| e == &vec![true, true]));
    let thread = compact_select(&sys).unwrap().unwrap();
    assert!(sys.is_thread(&thread));
    assert_eq!(thread, vec![0, 1, 0, 1, 0]);
}

#[test]
fn empty_level_gives_no_thread() {
    let sys = FiniteInverseSystem::new(vec![2, 0, 0], vec![vec![], vec![]]).unwrap();
    assert_eq!(compact_select(&sys).unwrap(), None);
}

#[test]
fn limit_for_one_of_two_coordinates_is_exterior_on_one_generator() {
    let sc = PatchScenario::new(3, 2, 1, vec![1, 2, 3], 3);
    let lim = limit_pi(&sc).unwrap();
    assert_eq!(lim.limit.ranks(), vec![1, 1, 0, 0]);
    assert_eq!(lim.koszul_ranks, lim.limit.ranks());
    assert!(lim.exterior.matches);
    assert_eq!(lim.verdict, Verdict::Pass);
    assert_eq!(lim.euler, 0);
}

#[test]
fn limit_ranks_are_binomial() {
    for p in [2, 3] {
        for delta in 0..=3 {
            let sc = PatchScenario::new(p, 3, delta, vec![1, 2, 3], delta + 1);
            let lim = limit_pi(&sc).unwrap();
            let expected: Vec<usize> = (0..=delta + 1).map(|i| binom(delta, i)).collect();
            assert_eq!(lim.limit.ranks(), expected, "p = {}, δ = {}", p, delta);
            assert_eq!(lim.koszul_ranks, expected);
            assert_eq!(lim.verdict, Verdict::Pass);
        }
    }
}

#[test]
fn free_module_passes_and_non_free_module_fails_freeness() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let rep = cg_check(&cg_instance(&mut rng, CgFamily::Free).unwrap()).unwrap();
        assert!(rep.passed(), "{:?}", rep);
        assert!(rep.free && rep.concentrated);
        let bad = cg_check(&cg_instance(&mut rng, CgFamily::NonFree).unwrap()).unwrap();
        assert!(!bad.free);
        assert!(bad.tor1 > 0);
        assert!(matches!(bad.diagnosis, Some(CgDiagnosis::Freeness { tor1 }) if tor1 > 0));
        let spread = cg_check(&cg_instance(&mut rng, CgFamily::Unconcentrated).unwrap()).unwrap();
        assert!(matches!(spread.diagnosis, Some(CgDiagnosis::Concentration { .. })));
    }
}

/// Thread existence by exhaustive search over all sequences.
fn has_thread(sys: &FiniteInverseSystem) -> bool {
    fn go(sys: &FiniteInverseSystem, k: usize, prev: Option<usize>) -> bool {
        if k == sys.sizes.len() {
            return true;
        }
        (0..sys.sizes[k]).any(|x| prev.is_none_or(|y| sys.maps[k - 1][x] == y) && go(sys, k + 1, Some(x)))
    }
    go(sys, 0, None)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn selected_thread_exists_exactly_when_brute_force_finds_one(
        seed in any::<u64>(),
        length in 1usize..7,
        max_size in 1usize..5,
        allow_empty in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_inverse_system(&mut rng, length, max_size, allow_empty);
        match compact_select(&sys).unwrap() {
            Some(thread) => prop_assert!(sys.is_thread(&thread)),
            None => prop_assert!(!has_thread(&sys)),
        }
        prop_assert_eq!(compact_select(&sys).unwrap().is_some(), has_thread(&sys));
    }
}

#[test]
fn too_few_levels_are_inconclusive() {
    let sc = PatchScenario::new(2, 1, 1, vec![1, 2], 3);
    assert_eq!(limit_pi(&sc).unwrap().verdict, Verdict::Inconclusive);
}
