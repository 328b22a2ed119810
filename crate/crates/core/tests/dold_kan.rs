use deskalg::complex::{ModComplex, ModSpace};
use deskalg::dold_kan::{
    check_n_gamma, dk_inverse, eilenberg_maclane, gamma_n_iso, homotopy_ring, normalized_chains, random_complex, square_zero,
    SimplicialModule,
};
use deskalg::linalg::ZMat;
use deskalg::zmod::Zmod;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_invertible<R: Rng>(zm: Zmod, n: usize, rng: &mut R) -> ZMat {
    loop {
        let m = ZMat::from_vec(zm, n, n, (0..n * n).map(|_| rng.gen_range(0..zm.modulus())).collect());
        if m.is_invertible() {
            return m;
        }
    }
}

/// Transports every face and degeneracy along random levelwise
/// automorphisms, so the result is no longer in Γ's standard basis.
fn scramble<R: Rng>(x: &SimplicialModule, rng: &mut R) -> SimplicialModule {
    let zm = x.zm;
    let phi: Vec<ZMat> = (0..=x.top()).map(|m| random_invertible(zm, x.dim(m), rng)).collect();
    let inv: Vec<ZMat> = phi.iter().map(|p| p.inverse().unwrap()).collect();
    let faces = (0..=x.top())
        .map(|m| x.faces[m].iter().map(|f| phi[m - 1].mul(f).mul(&inv[m])).collect())
        .collect();
    let degens = (0..x.top())
        .map(|m| x.degens[m].iter().map(|s| phi[m + 1].mul(s).mul(&inv[m])).collect())
        .collect();
    SimplicialModule::new(zm, x.levels.clone(), faces, degens).unwrap()
}

/// Alternating face sums, assembled here rather than by the library.
fn alternating_complex(x: &SimplicialModule) -> ModComplex {
    let zm = x.zm;
    let diffs = (1..=x.top())
        .map(|m| {
            let mut acc = ZMat::zeros(zm, x.dim(m - 1), x.dim(m));
            for (i, f) in x.faces[m].iter().enumerate() {
                acc = if i % 2 == 0 { acc.add(f) } else { acc.sub(f) };
            }
            acc
        })
        .collect();
    ModComplex::new(zm, 0, x.levels.clone(), diffs).unwrap()
}

#[test]
fn moore_homology_matches_normalized_homology() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for k in 0..12 {
        let zm = Zmod::new([2, 3, 5][k % 3], 1 + (k % 2) as u32).unwrap();
        let top = 3 + k % 3;
        let c = random_complex(zm, top - 1, 2, &mut rng).unwrap();
        let g = dk_inverse(&c, top).unwrap();
        let base = g.direct_sum(&SimplicialModule::constant(zm, ModSpace::free(1, zm.n()), top)).unwrap();
        let x = scramble(&base, &mut rng);
        let n = normalized_chains(&x).unwrap().complex;
        let moore = alternating_complex(&x);
        assert_eq!(moore, x.moore_complex().unwrap());
        for m in 0..top as i64 {
            assert_eq!(n.homology(m).group(), moore.homology(m).group(), "instance {} degree {}", k, m);
        }
        gamma_n_iso(&x).unwrap();
    }
}

#[test]
fn n_gamma_round_trip_on_fifty_complexes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for k in 0..50 {
        let zm = Zmod::new([2, 3][k % 2], 1 + (k % 3) as u32).unwrap();
        let top = 1 + k % 6;
        let c = random_complex(zm, top, 2, &mut rng).unwrap();
        let rt = check_n_gamma(&c, top).unwrap();
        assert!(rt.identity, "instance {}: {:?}", k, rt.failure);
    }
}

#[test]
fn homotopy_of_square_zero_extension_by_shifted_field() {
    for p in [2, 3, 5] {
        let zm = Zmod::new(p, 1).unwrap();
        for n in 1..=4 {
            let v = eilenberg_maclane(zm, ModSpace::free(1, 1), n, n + 1).unwrap();
            let pi = homotopy_ring(&square_zero(&v).unwrap(), n + 1).unwrap();
            assert_eq!(pi.degrees[0], vec![1]);
            assert_eq!(pi.degrees[n], vec![1]);
            for i in (1..=n + 1).filter(|&i| i != n) {
                assert!(pi.degrees[i].is_empty(), "π_{} of k ⊕ k[{}]", i, n);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn gamma_satisfies_simplicial_identities(seed in any::<u64>(), top in 1usize..5) {
        let zm = Zmod::new(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_complex(zm, top, 2, &mut rng).unwrap();
        let g = dk_inverse(&c, top).unwrap();
        prop_assert!(g.validate().is_ok());
        let n = normalized_chains(&g).unwrap().complex;
        for m in 0..=top as i64 {
            prop_assert_eq!(n.dim(m), c.dim(m));
        }
    }
}
