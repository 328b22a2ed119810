use deskalg::deformation::{
    ci_tangent_dims, expected_size_ci_check, koszul_model_dims, pi0_comparison_check, random_ci_presentation, wiles_numerology,
    NumerologyInput, Presentation, Term,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn t(e: &[u32], c: i64) -> Term {
    Term { exponents: e.to_vec(), coeff: c }
}

/// Rank over F_p of the degree-one coefficients, read straight off the terms.
fn linear_rank(pres: &Presentation) -> usize {
    let p = pres.p as i64;
    let mut rows: Vec<Vec<i64>> = pres
        .relations
        .iter()
        .map(|rel| {
            let mut row = vec![0i64; pres.vars];
            for term in rel {
                if term.exponents.iter().sum::<u32>() == 1 {
                    let j = term.exponents.iter().position(|&e| e == 1).unwrap();
                    row[j] = (row[j] + term.coeff).rem_euclid(p);
                }
            }
            row
        })
        .collect();
    let mut rank = 0;
    for col in 0..pres.vars {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, piv);
        let inv = (1..p).find(|x| x * rows[rank][col] % p == 1).unwrap();
        let pivot: Vec<i64> = rows[rank].iter().map(|x| x * inv % p).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            let k = row[col];
            row.iter_mut().zip(&pivot).for_each(|(x, y)| *x = (*x - k * y).rem_euclid(p));
        }
        rank += 1;
    }
    rank
}

#[test]
fn linear_relation_removes_a_generator() {
    let pres = Presentation { p: 3, vars: 2, truncation: 4, relations: vec![vec![t(&[1, 0], 1), t(&[0, 2], 1)]] };
    let dims = ci_tangent_dims(&pres).unwrap();
    assert_eq!(dims.dims[0], 1);
    assert_eq!(dims.dims[0], pres.vars - linear_rank(&pres));
    assert_eq!(dims.dims[1], 0);
}

#[test]
fn single_square_is_of_expected_size() {
    let pres = Presentation { p: 2, vars: 1, truncation: 6, relations: vec![vec![t(&[2], 1)]] };
    let c = expected_size_ci_check(&pres, 1, 1).unwrap();
    assert!(c.holds && c.regular && c.in_maximal_ideal);
    assert_eq!((c.minimal_vars, c.minimal_relations), (1, 1));
}

#[test]
fn two_relations_in_codimension_one_fail() {
    for p in [2, 3] {
        let pres = Presentation { p, vars: 1, truncation: 6, relations: vec![vec![t(&[1], p as i64)], vec![t(&[2], 1)]] };
        let c = expected_size_ci_check(&pres, 1, 2).unwrap();
        assert!(!c.holds);
        assert!(!c.regular);
        assert!(c.witness.is_some());
        assert_eq!((c.minimal_vars, c.minimal_relations), (1, 2));
    }
}

#[test]
fn pi0_comparison_from_one_koszul_model() {
    let pres = Presentation { p: 2, vars: 1, truncation: 6, relations: vec![vec![t(&[1], 2)], vec![t(&[2], 1)]] };
    let (tr, tp, h) = koszul_model_dims(&pres).unwrap();
    assert_eq!(tr[0], tp[0]);
    assert!(pi0_comparison_check(&tr, &tp, &h).holds);
    // A regular sequence: π_1 = 0, so π_0 R carries all of 𝔱^1.
    let ci = Presentation { p: 3, vars: 2, truncation: 5, relations: vec![vec![t(&[2, 0], 1)], vec![t(&[0, 3], 1)]] };
    let (tr, tp, h) = koszul_model_dims(&ci).unwrap();
    assert_eq!(h, vec![0]);
    assert_eq!(tr[1], tp[1]);
    assert!(pi0_comparison_check(&tr, &tp, &h).holds);
    // Wrong degree-zero data is rejected.
    assert!(!pi0_comparison_check(&[2, 2, 0], &[1, 2], &[0]).holds);
}

#[test]
fn dimension_count_for_rank_two_and_three_primes() {
    let x = NumerologyInput { h1_global: 5, h2_global: 3, h1_local: 4, h1_f: 1, rank: 2, num_primes: 3, delta: 1 };
    let n = wiles_numerology(&x).unwrap();
    assert_eq!(n.value, 5);
    assert!(n.relations_hold);
    // Any choice satisfying h1 − h2 = (h1_local − h1_f) − δ gives the same count.
    for (h1_local, h1_f) in [(3, 0), (6, 2), (9, 4)] {
        for h2 in 0..4 {
            let h1 = h2 + (h1_local - h1_f) - 1;
            let y = NumerologyInput { h1_global: h1, h2_global: h2, h1_local, h1_f, ..x.clone() };
            let m = wiles_numerology(&y).unwrap();
            assert!(m.relations_hold);
            assert_eq!(m.value, 2 * 3 - 1);
            assert_eq!(m.value, m.expected);
        }
    }
}

#[test]
fn random_complete_intersections_have_expected_tangent_dims() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for k in 0..30 {
        let p = [2u64, 3, 5][k % 3];
        let pres = random_ci_presentation(&mut rng, p, 4, 3);
        let dims = ci_tangent_dims(&pres).unwrap();
        assert_eq!(dims.dims, vec![pres.vars, pres.relations.len(), 0]);
        assert_eq!(linear_rank(&pres), 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn tangent_dims_are_invariant_under_change_of_variables(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pres = random_ci_presentation(&mut rng, p, 3, 3);
        let ring = pres.ring().unwrap();
        let s = pres.vars;
        // X_i ↦ u_i X_i + c X_{i+1} + X_j X_k: invertible linear part.
        let images: Vec<Vec<u64>> = (0..s)
            .map(|i| {
                let mut img = ring.scale(rng.gen_range(1..p), &ring.var(i));
                if i + 1 < s {
                    img = ring.add(&img, &ring.scale(rng.gen_range(0..p), &ring.var(i + 1)));
                }
                let q = ring.mul(&ring.var(rng.gen_range(0..s)), &ring.var(rng.gen_range(0..s)));
                ring.add(&img, &q)
            })
            .collect();
        let moved = pres.substitute(&images).unwrap();
        prop_assert_eq!(ci_tangent_dims(&pres).unwrap(), ci_tangent_dims(&moved).unwrap());
    }
}
