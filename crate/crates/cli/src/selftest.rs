//! Fixed-seed property suites, one per module, with a cost estimate each.
//! Suites whose cost exceeds the budget are skipped rather than failed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use deskalg::cochains::{group_cohomology, FiniteGroup, GModule, DEFAULT_BUDGET};
use deskalg::complex::{cone, cone_les, ModChainMap};
use deskalg::deformation::{ci_tangent_dims, random_ci_presentation, wiles_numerology, NumerologyInput};
use deskalg::dold_kan::{check_n_gamma, dk_inverse, gamma_n_iso, random_complex};
use deskalg::linalg::ZMat;
use deskalg::patching::{
    cg_check, cg_instance, compact_select, limit_pi, random_inverse_system, CgDiagnosis, CgFamily, PatchScenario, Verdict,
};
use deskalg::resolution::{
    exterior_compare, exterior_compat_check, exterior_model, free_variable_tor, group_algebra_identification, tor_algebra,
    PolyQuotientRing, SModule,
};
use deskalg::ring::{local_eliminate, Matrix, Ring, RingSpec};
use deskalg::selmer::{pairing_suite, sample_instance, SelmerContext};
use deskalg::zmod::Zmod;

use crate::scenario::run_text;
use crate::render;

/// Suite names accepted by `--filter`.
pub const SUITES: &[&str] = &[
    "finite_local_ring",
    "chain_complex",
    "resolutions_tor",
    "group_cochains",
    "local_conditions",
    "dold_kan",
    "deformation_calculus",
    "patching",
    "cli",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub status: SuiteStatus,
    pub checks: usize,
    pub failures: Vec<String>,
    /// Command that reruns just this suite.
    pub reproduce: String,
}

type Checks = Vec<(String, bool)>;

fn cost(suite: &str) -> u64 {
    match suite {
        "local_conditions" => 5_000_000,
        "resolutions_tor" | "patching" => 2_000_000,
        _ => 1_000_000,
    }
}

/// Runs the suites matching `filter` (all when `None`). Unknown names are
/// rejected.
pub fn run_selftest(filter: Option<&str>, budget: u64) -> Result<Vec<SuiteResult>, String> {
    let chosen: Vec<&str> = match filter {
        None => SUITES.to_vec(),
        Some(f) if SUITES.contains(&f) => vec![f],
        Some(f) => return Err(format!("unknown suite {:?}; expected one of {}", f, SUITES.join(", "))),
    };
    let mut out = Vec::new();
    for (k, &name) in chosen.iter().enumerate() {
        let reproduce = format!("deskalg selftest --filter {}", name);
        if cost(name) > budget {
            out.push(SuiteResult { suite: name.into(), status: SuiteStatus::Skipped, checks: 0, failures: Vec::new(), reproduce });
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_7e57 + k as u64);
        let checks = match run_suite(name, &mut rng) {
            Ok(c) => c,
            Err(e) => vec![(format!("suite aborted: {}", e), false)],
        };
        let failures: Vec<String> = checks.iter().filter(|c| !c.1).map(|c| c.0.clone()).collect();
        let status = if failures.is_empty() { SuiteStatus::Pass } else { SuiteStatus::Fail };
        out.push(SuiteResult { suite: name.into(), status, checks: checks.len(), failures, reproduce });
    }
    Ok(out)
}

fn run_suite(name: &str, rng: &mut ChaCha8Rng) -> deskalg::Result<Checks> {
    match name {
        "finite_local_ring" => finite_local_ring(rng),
        "chain_complex" => chain_complex(rng),
        "resolutions_tor" => resolutions_tor(rng),
        "group_cochains" => group_cochains(),
        "local_conditions" => local_conditions(rng),
        "dold_kan" => dold_kan(rng),
        "deformation_calculus" => deformation_calculus(rng),
        "patching" => patching(rng),
        "cli" => cli(),
        _ => unreachable!("filtered above"),
    }
}

fn finite_local_ring(rng: &mut ChaCha8Rng) -> deskalg::Result<Checks> {
    let mut checks = Vec::new();
    for (p, n, exps) in [(2u64, 2u32, vec![1u32, 1]), (3, 1, vec![1]), (5, 2, vec![])] {
        let ring = Ring::new(RingSpec::new(p, n, exps.clone()))?;
        let m = ring.zm().modulus();
        let random = |rng: &mut ChaCha8Rng| {
            let c: Vec<i64> = (0..ring.group_order()).map(|_| rng.gen_range(0..m) as i64).collect();
            ring.from_coeffs(&c).expect("length matches")
        };
        let tag = format!("W_{}[{:?}] over p={}", n, exps, p);
        let mut ok = true;
        for _ in 0..20 {
            let (a, b, c) = (random(rng), random(rng), random(rng));
            ok &= ring.mul(&ring.mul(&a, &b), &c) == ring.mul(&a, &ring.mul(&b, &c));
            ok &= ring.mul(&a, &b) == ring.mul(&b, &a);
            ok &= ring.mul(&a, &ring.add(&b, &c)) == ring.add(&ring.mul(&a, &b), &ring.mul(&a, &c));
            if ring.is_unit(&a) {
                ok &= ring.inverse(&a).is_some_and(|i| ring.mul(&a, &i) == ring.one());
            } else {
                ok &= ring.nilpotency_order(&a).is_some();
            }
        }
        checks.push((format!("ring axioms and unit/nilpotent dichotomy in {}", tag), ok));
        let id = Matrix::identity(&ring, 2);
        let e = local_eliminate(&id);
        checks.push((format!("identity eliminates fully in {}", tag), e.unit_rank == 2 && e.residual.rows() == 0));
    }
    Ok(checks)
}

fn chain_complex(rng: &mut ChaCha8Rng) -> deskalg::Result<Checks> {
    let mut checks = Vec::new();
    for k in 0..6 {
        let zm = Zmod::new([2, 3, 5][k % 3], 1 + (k % 2) as u32)?;
        let a = random_complex(zm, 3, 2, rng)?;
        let id = ModChainMap { maps: (0..=3).map(|h| (h, ZMat::identity(zm, a.dim(h)))).collect() };
        let c = cone(&id, &a, &a)?;
        let acyclic = (c.lo()..=c.hi()).all(|h| c.homology(h).is_zero());
        checks.push((format!("cone of the identity is acyclic (instance {})", k), acyclic));
        let les = cone_les(&id, &a, &a, &c, (0, 3))?;
        checks.push((format!("cone long exact sequence is exact (instance {})", k), les.iter().all(|s| s.exact)));
        let shifted = a.shift(2);
        let same = (0..=3).all(|h| shifted.homology(h + 2).exponents() == a.homology(h).exponents());
        checks.push((format!("shift moves homology (instance {})", k), same));
    }
    Ok(checks)
}

fn resolutions_tor(rng: &mut ChaCha8Rng) -> deskalg::Result<Checks> {
    let mut checks = Vec::new();
    for (p, d) in [(2u64, 2usize), (3, 1), (5, 2)] {
        let ring = PolyQuotientRing::power_series(p, d, 4)?;
        let elems: Vec<Vec<u64>> = (0..d).map(|i| ring.var(i)).collect();
        let alg = tor_algebra(&ring, &elems, d + 1)?;
        checks.push((format!("Koszul Tor over W[[X_1..X_{}]] is exterior (p={})", d, p), exterior_compare(&alg, d).matches));
    }
    for p in [2u64, 3, 5] {
        let r = exterior_compat_check(&exterior_model(Zmod::new(p, 1)?, 3))?;
        checks.push((format!("exterior model satisfies the anticommutator identity (p={})", p), r.holds && r.unique_action_matches == Some(true)));
    }
    let id = group_algebra_identification(3, 1, 2, 8, rng)?;
    checks.push(("group-algebra identification for p=3, n=1, s=2".into(), id.passes()));
    let s = PolyQuotientRing::group_algebra(2, 1, vec![1, 1])?;
    let m = SModule::quotient(&s, &[s.var(1)]);
    for r in 1..=2 {
        let cmp = free_variable_tor(&s, &m, r, 3, DEFAULT_BUDGET)?;
        checks.push((format!("{} free variables leave Tor unchanged", r), cmp.unchanged()));
    }
    Ok(checks)
}

fn group_cochains() -> deskalg::Result<Checks> {
    let mut checks = Vec::new();
    for p in [2u64, 3, 5] {
        let g = FiniteGroup::cyclic(p);
        let m = GModule::trivial(&g, p, vec![1])?;
        let h = group_cohomology(&g, &m, 4, DEFAULT_BUDGET)?;
        checks.push((format!("H^i(Z/{0}, F_{0}) = F_{0} for i ≤ 4", p), h.iter().all(|a| a.exponents == vec![1])));
    }
    let g = FiniteGroup::cyclic(4);
    let m = GModule::trivial(&g, 2, vec![2])?;
    let h = group_cohomology(&g, &m, 3, DEFAULT_BUDGET)?;
    let expect = [vec![2], vec![2], vec![2], vec![2]];
    checks.push(("H^i(Z/4, Z/4) = Z/4".into(), h.iter().map(|a| a.exponents.clone()).eq(expect)));
    let q = FiniteGroup::quaternion();
    let m = GModule::trivial(&q, 2, vec![1])?;
    let h = group_cohomology(&q, &m, 2, DEFAULT_BUDGET)?;
    checks.push(("H^1(Q_8, F_2) has dimension 2".into(), h[1].num_cyclic() == 2));
    Ok(checks)
}

fn local_conditions(rng: &mut ChaCha8Rng) -> deskalg::Result<Checks> {
    let mut checks = Vec::new();
    for k in 0..3 {
        let data = sample_instance(rng, DEFAULT_BUDGET)?;
        let ctx = SelmerContext::new(data, DEFAULT_BUDGET)?;
        let rep = pairing_suite(&ctx, 1, rng)?;
        checks.push((format!("pairing suite instance {}: {}", k, rep.failures.join("; ")), rep.passed()));
    }
    Ok(checks)
}

fn dold_kan(rng: &mut ChaCha8Rng) -> deskalg::Result<Checks> {
    let mut checks = Vec::new();
    for k in 0..5 {
        let zm = Zmod::new([2, 3][k % 2], 1)?;
        let top = 2 + k % 3;
        let c = random_complex(zm, top, 2, rng)?;
        checks.push((format!("N∘Γ = id (instance {})", k), check_n_gamma(&c, top)?.identity));
        let g = dk_inverse(&c, top)?;
        checks.push((format!("Γ∘N ≅ id (instance {})", k), gamma_n_iso(&g).is_ok()));
    }
    Ok(checks)
}

fn deformation_calculus(rng: &mut ChaCha8Rng) -> deskalg::Result<Checks> {
    let mut checks = Vec::new();
    for k in 0..10 {
        let pres = random_ci_presentation(rng, [2, 3, 5][k % 3], 3, 2);
        let dims = ci_tangent_dims(&pres)?;
        checks.push((format!("tangent dims of generated presentation {}", k), dims.dims == vec![pres.vars, pres.relations.len(), 0]));
    }
    let x = NumerologyInput { h1_global: 3, h2_global: 2, h1_local: 4, h1_f: 2, rank: 2, num_primes: 3, delta: 1 };
    let n = wiles_numerology(&x)?;
    checks.push(("dimension count matches rank·#Q − δ".into(), n.relations_hold && n.value == n.expected));
    Ok(checks)
}

fn patching(rng: &mut ChaCha8Rng) -> deskalg::Result<Checks> {
    let mut checks = Vec::new();
    for (p, s, d) in [(2u64, 1usize, 1usize), (3, 2, 1), (5, 3, 2), (2, 2, 0)] {
        let r = limit_pi(&PatchScenario::new(p, s, d, vec![1, 2, 3], d + 2))?;
        checks.push((format!("limit homotopy is exterior for p={}, s={}, δ={}", p, s, d), r.verdict == Verdict::Pass));
    }
    for k in 0..20 {
        let len = rng.gen_range(1..=8);
        let sys = random_inverse_system(rng, len, 5, false);
        let t = compact_select(&sys)?;
        checks.push((format!("compact_select finds a thread (system {})", k), t.is_some_and(|t| sys.is_thread(&t))));
    }
    for (family, label) in [(CgFamily::Free, "free"), (CgFamily::Unconcentrated, "unconcentrated"), (CgFamily::NonFree, "non-free")] {
        for k in 0..3 {
            let rep = cg_check(&cg_instance(rng, family)?)?;
            let ok = match family {
                CgFamily::Free => rep.passed(),
                CgFamily::Unconcentrated => matches!(rep.diagnosis, Some(CgDiagnosis::Concentration { .. })),
                CgFamily::NonFree => matches!(rep.diagnosis, Some(CgDiagnosis::Freeness { tor1 }) if tor1 > 0),
            };
            checks.push((format!("CG diagnosis on {} instance {}", label, k), ok));
        }
    }
    Ok(checks)
}

fn cli() -> deskalg::Result<Checks> {
    let text = r#"{"schema": "1", "kind": "patch", "p": 2, "s": 2, "delta": 1, "levels": [1, 2, 3], "maxdeg": 3,
                   "perturbation": {"extra": 2}}"#;
    let a = run_text(text, Some(11), Some(DEFAULT_BUDGET as u64)).map(|o| render(&o.report));
    let b = run_text(text, Some(11), Some(DEFAULT_BUDGET as u64)).map(|o| render(&o.report));
    let same = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    let malformed = run_text(r#"{"schema": "1", "kind": "patch", "p": "two"}"#, None, None).is_err();
    Ok(vec![("identical scenario and seed give identical reports".into(), same), ("malformed payload is rejected".into(), malformed)])
}
