use std::collections::HashSet;

use deskalg::complex::ModComplex;
use deskalg::error::Error;
use deskalg::resolution::{
    binom, cyclic_resolution, exterior_compare, exterior_compat_check, exterior_model, group_algebra_identification, koszul,
    koszul_h1_witness, limit_tor_algebra, periodic_resolution, periodic_tor_algebra, periodic_tor_system, subsets, tor, wedge,
    PolyQuotientRing, SModule, TorStrategy,
};
use deskalg::ring::{Ring, RingSpec};
use deskalg::zmod::Zmod;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BUDGET: u128 = 1 << 40;

/// All vectors of (Z/q)^len.
fn vectors(len: usize, q: u64) -> Vec<Vec<u64>> {
    (0..(q as usize).pow(len as u32))
        .map(|mut k| {
            (0..len)
                .map(|_| {
                    let d = (k % q as usize) as u64;
                    k /= q as usize;
                    d
                })
                .collect()
        })
        .collect()
}

/// |ker d_h| and |im d_{h+1}| by enumeration.
fn kernel_image(c: &ModComplex, h: i64, q: u64) -> (usize, usize) {
    let ker = if h == c.lo() {
        q.pow(c.dim(h) as u32) as usize
    } else {
        let d = c.d(h);
        vectors(c.dim(h), q).into_iter().filter(|v| d.apply(v).iter().all(|x| x % q == 0)).count()
    };
    let img: HashSet<Vec<u64>> = if h < c.hi() {
        let d = c.d(h + 1);
        vectors(c.dim(h + 1), q).into_iter().map(|v| d.apply(&v).iter().map(|x| x % q).collect()).collect()
    } else {
        [vec![0; c.dim(h)]].into_iter().collect()
    };
    (ker, img.len())
}

#[test]
fn periodic_resolution_over_f2_z2_is_exact_by_enumeration() {
    let res = cyclic_resolution(2, 1, 1, 4).unwrap();
    let c = res.complex.restrict_scalars();
    // Augmentation kernel in degree 0: the image must be exactly it.
    let (_, im0) = kernel_image(&c, 0, 2);
    assert_eq!(im0, 2);
    for h in 1..4 {
        let (ker, im) = kernel_image(&c, h, 2);
        assert_eq!(ker, im, "degree {}", h);
    }
}

#[test]
fn tensor_of_cyclic_resolutions_for_two_factors() {
    for p in [2, 3] {
        let ring = Ring::new(RingSpec::new(p, 1, vec![1, 1])).unwrap();
        let a = periodic_resolution(&ring, 0, 4).unwrap();
        let b = periodic_resolution(&ring, 1, 4).unwrap();
        let t = a.tensor(&b).unwrap();
        let c = &t.complex;
        for h in c.lo() + 2..=c.hi() {
            assert!(c.d(h - 1).mul(&c.d(h)).unwrap().is_zero(), "d² in degree {}", h);
        }
        // Over F_p every base-changed differential vanishes: ranks are i+1.
        let bc = t.base_change();
        for i in 0..=4i64 {
            assert_eq!(bc.dim(i), i as usize + 1);
            assert_eq!(bc.homology(i).group().num_cyclic(), i as usize + 1);
        }
        assert!(t.verify_exact(1));
    }
}

#[test]
fn tor_over_fp_cyclic_group_is_one_dimensional() {
    for p in [2, 3, 5] {
        let s = PolyQuotientRing::group_algebra(p, 1, vec![1]).unwrap();
        let w = SModule::residue(&s);
        let periodic = tor(&s, &w, &w, 5, &TorStrategy::Periodic, BUDGET).unwrap();
        let minimal = tor(&s, &w, &w, 5, &TorStrategy::Minimal, BUDGET).unwrap();
        for i in 0..=5 {
            assert_eq!(periodic.get(i).exponents, vec![1]);
        }
        assert_eq!(periodic, minimal);
        // Every base-changed map is zero over F_p.
        let res = cyclic_resolution(p, 1, 1, 5).unwrap().base_change();
        assert!((1..=5).all(|h| res.d(h).is_zero()));
    }
}

#[test]
fn koszul_flags_nonregular_pair() {
    let s = PolyQuotientRing::power_series(2, 1, 4).unwrap();
    let x2 = s.element(&[(1, vec![2])]).unwrap();
    let px = s.element(&[(2, vec![1])]).unwrap();
    let w = koszul_h1_witness(&s, &[x2.clone(), px.clone()]).expect("witness");
    // The witness is a Koszul 1-cycle: a·x² + b·px = 0 with (a, b) not both zero.
    let d = s.dim();
    let (a, b) = (&w[..d], &w[d..]);
    assert!(!s.is_zero(a) || !s.is_zero(b));
    assert!(s.is_zero(&s.add(&s.mul(a, &x2), &s.mul(b, &px))));
    assert!(matches!(koszul(&s, &[x2, px]), Err(Error::NotRegular { truncation: 4, .. })));
}

#[test]
fn limit_for_one_factor_kills_even_periodic_classes() {
    let (lim, alg) = limit_tor_algebra(2, 1, &[1, 2, 3], 4).unwrap();
    assert_eq!(lim.ranks(), vec![1, 1, 0, 0, 0]);
    assert!(lim.stabilized());
    assert!(exterior_compare(&alg, 1).matches);
    // Each level has nonzero even-degree classes; they die on the way down
    // to the base level, while degree 1 survives.
    let (sys, _) = periodic_tor_system(2, 1, &[1, 2, 3], 4).unwrap();
    let zm = Zmod::new(2, 3).unwrap();
    let t = &sys.transitions;
    for deg in [2, 4] {
        assert!(sys.groups.iter().all(|g| !g[deg].is_empty()));
        assert!(t[0][deg].is_zero(zm));
        assert!(t[1][deg].then(zm, &t[0][deg]).is_zero(zm));
    }
    // Level 3 → 2 multiplies degree 2 by p, which is not zero on its own.
    assert!(!t[1][2].is_zero(zm));
    assert!(!t[1][1].then(zm, &t[0][1]).is_zero(zm));
}

#[test]
fn limit_for_two_factors_matches_koszul() {
    let (lim, _) = limit_tor_algebra(3, 2, &[1, 2], 4).unwrap();
    assert_eq!(lim.ranks(), vec![1, 2, 1, 0, 0]);
    let s = PolyQuotientRing::power_series(3, 2, 3).unwrap();
    let vars = vec![s.var(0), s.var(1)];
    let w = SModule::quotient(&s, &vars);
    let k = tor(&s, &w, &SModule::residue(&s), 4, &TorStrategy::Koszul(vars), BUDGET).unwrap();
    let koszul_ranks: Vec<usize> = (0..=4).map(|i| k.get(i).num_cyclic()).collect();
    assert_eq!(lim.ranks(), koszul_ranks);
    assert_eq!(koszul_ranks, (0..=4).map(|i| binom(2, i)).collect::<Vec<_>>());
}

#[test]
fn single_level_has_periodic_classes_above_delta() {
    for p in [2, 3] {
        let alg = periodic_tor_algebra(p, 1, 1, 4).unwrap();
        assert!(!alg.group(2).is_zero());
        assert!(!exterior_compare(&alg, 1).matches);
    }
}

#[test]
fn exterior_module_satisfies_compatibility() {
    for p in [2, 3, 5] {
        for k in 0..=3 {
            let r = exterior_compat_check(&exterior_model(Zmod::new(p, 1).unwrap(), k)).unwrap();
            assert!(r.holds);
            assert_eq!(r.unique_action_matches, Some(true));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn wedge_sign_is_graded_commutative(t in 1usize..7, mask in any::<u64>()) {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..t {
            match (mask >> (2 * i)) & 3 {
                1 => a.push(i),
                2 => b.push(i),
                _ => {}
            }
        }
        let (s1, u1) = wedge(&a, &b).unwrap();
        let (s2, u2) = wedge(&b, &a).unwrap();
        prop_assert_eq!(&u1, &u2);
        prop_assert_eq!(s1 != s2, a.len() * b.len() % 2 == 1);
        if !a.is_empty() {
            prop_assert!(wedge(&a, &a).is_none());
        }
    }

    #[test]
    fn subsets_count_binomially(t in 0usize..8, k in 0usize..8) {
        prop_assert_eq!(subsets(t, k).len(), binom(t, k));
    }

    #[test]
    fn identification_holds_for_small_groups(
        p in prop::sample::select(vec![2u64, 3]),
        n in 1u32..=2,
        vars in 1usize..=2,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = group_algebra_identification(p, n, vars, 8, &mut rng).unwrap();
        prop_assert!(r.passes());
    }
}
