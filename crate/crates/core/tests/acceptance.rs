//! Acceptance criteria: each runs at exact equality and must finish inside
//! its wall-clock budget. One PASS/FAIL line per criterion; exit status is
//! nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use deskalg::cochains::DEFAULT_BUDGET;
use deskalg::dold_kan::{check_n_gamma, dk_inverse, eilenberg_maclane, gamma_n_iso, homotopy_ring, random_complex, square_zero};
use deskalg::complex::ModSpace;
use deskalg::deformation::{ci_tangent_dims, random_ci_presentation};
use deskalg::patching::{cg_check, cg_instance, compact_select, limit_pi, random_inverse_system, CgDiagnosis, CgFamily, FiniteInverseSystem, PatchScenario};
use deskalg::resolution::{binom, exterior_compat_check, exterior_model, free_variable_tor, group_algebra_identification, PolyQuotientRing, SModule};
use deskalg::selmer::{pairing_suite, sample_instance, SelmerContext};
use deskalg::zmod::Zmod;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{:?}", e)
}

/// Every (p, s, δ) with p ∈ {2,3,5}, s ≤ 4, δ ≤ min(s,3), levels 1..3.
fn scenarios() -> Vec<PatchScenario> {
    let mut out = Vec::new();
    for p in [2, 3, 5] {
        for s in 0..=4 {
            for delta in 0..=s.min(3) {
                out.push(PatchScenario::new(p, s, delta, vec![1, 2, 3], delta + 2));
            }
        }
    }
    out
}

fn exterior_ranks() -> Outcome {
    let all = scenarios();
    for sc in &all {
        let lim = limit_pi(sc).map_err(err)?;
        let ranks = lim.limit.ranks();
        let want: Vec<usize> = (0..=sc.maxdeg).map(|i| binom(sc.delta, i)).collect();
        ensure(lim.limit.stabilized(), || format!("p={} s={} δ={}: limit not stabilized", sc.p, sc.s, sc.delta))?;
        ensure(ranks == want, || format!("p={} s={} δ={}: ranks {:?}, expected {:?}", sc.p, sc.s, sc.delta, ranks, want))?;
    }
    Ok(format!("{} scenarios", all.len()))
}

fn vanishing_band() -> Outcome {
    let all = scenarios();
    let mut checked = 0;
    for sc in &all {
        let lim = limit_pi(sc).map_err(err)?;
        for d in &lim.limit.degrees {
            if d.degree > sc.delta {
                ensure(d.stable_image.is_empty(), || {
                    format!("p={} s={} δ={}: lim π_{} = {:?}", sc.p, sc.s, sc.delta, d.degree, d.stable_image)
                })?;
                checked += 1;
            } else {
                ensure(!d.stable_image.is_empty(), || format!("p={} s={} δ={}: lim π_{} vanishes", sc.p, sc.s, sc.delta, d.degree))?;
            }
        }
    }
    Ok(format!("{} degrees above δ vanish", checked))
}

fn group_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut count = 0;
    for p in [2, 3, 5] {
        for n in 1..=2 {
            for vars in 1..=3 {
                let r = group_algebra_identification(p, n, vars, 16, &mut rng).map_err(err)?;
                ensure(r.passes(), || format!("p={} n={} s={}: {:?}", p, n, vars, r))?;
                count += 1;
            }
        }
    }
    Ok(format!("{} rings identified", count))
}

fn ci_tangent() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..100 {
        let p = [2, 3, 5][k % 3];
        let pres = random_ci_presentation(&mut rng, p, 4, 3);
        let dims = ci_tangent_dims(&pres).map_err(err)?;
        let want = vec![pres.vars, pres.relations.len(), 0];
        ensure(dims.dims == want, || format!("instance {}: {:?}, expected {:?}", k, dims.dims, want))?;
    }
    Ok("100 presentations".into())
}

fn pairing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pairs = 0;
    for k in 0..50 {
        let data = sample_instance(&mut rng, DEFAULT_BUDGET).map_err(err)?;
        ensure(data.group.order() <= 8, || format!("instance {}: |G| = {}", k, data.group.order()))?;
        ensure(data.maxdeg == 3, || format!("instance {}: maxdeg {}", k, data.maxdeg))?;
        let ctx = SelmerContext::new(data, DEFAULT_BUDGET).map_err(err)?;
        let rep = pairing_suite(&ctx, 3, &mut rng).map_err(err)?;
        ensure(rep.les_exact && rep.les_dual_exact, || format!("instance {}: cone sequence not exact", k))?;
        ensure(rep.differential_ok, || format!("instance {}: dz ≠ x∪x′", k))?;
        ensure(rep.independence_ok && rep.symmetric_ok, || format!("instance {}: {:?}", k, rep.failures))?;
        ensure(rep.passed(), || format!("instance {}: {:?}", k, rep.failures))?;
        pairs += rep.pairs_evaluated;
    }
    ensure(pairs > 0, || "no pairs evaluated".into())?;
    Ok(format!("50 instances, {} pairs", pairs))
}

fn dold_kan() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..50 {
        let zm = Zmod::new([2, 3, 5][k % 3], 1 + (k % 2) as u32).map_err(err)?;
        let top = 1 + k % 5;
        let c = random_complex(zm, top, 2, &mut rng).map_err(err)?;
        let rt = check_n_gamma(&c, top).map_err(err)?;
        ensure(rt.identity, || format!("instance {}: N∘Γ ≠ id: {:?}", k, rt.failure))?;
        let g = dk_inverse(&c, top).map_err(err)?;
        gamma_n_iso(&g).map_err(|e| format!("instance {}: Γ∘N ≇ id: {:?}", k, e))?;
    }
    for p in [2, 3, 5] {
        let zm = Zmod::new(p, 1).map_err(err)?;
        for n in 1..=4 {
            let v = eilenberg_maclane(zm, ModSpace::free(1, 1), n, n + 1).map_err(err)?;
            let pi = homotopy_ring(&square_zero(&v).map_err(err)?, n + 1).map_err(err)?;
            ensure(pi.degrees[n] == vec![1], || format!("p={} n={}: π_n = {:?}", p, n, pi.degrees[n]))?;
        }
    }
    Ok("50 round trips, 12 square-zero extensions".into())
}

fn free_variables() -> Outcome {
    let mut count = 0;
    for p in [2, 3] {
        for n in 1..=2 {
            for vars in 1..=2 {
                let s = PolyQuotientRing::group_algebra(p, n, vec![n; vars]).map_err(err)?;
                let mut modules = vec![SModule::residue(&s)];
                if p == 2 && vars == 2 {
                    modules.push(SModule::quotient(&s, &[s.var(1)]));
                }
                for (mi, m) in modules.iter().enumerate() {
                    for r in 0..=2 {
                        let cmp = free_variable_tor(&s, m, r, 2, 1 << 40).map_err(err)?;
                        ensure(cmp.unchanged(), || format!("p={} n={} s={} module {} r={}: {:?}", p, n, vars, mi, r, cmp))?;
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{} comparisons", count))
}

/// Thread existence by exhaustive search.
fn has_thread(sys: &FiniteInverseSystem, k: usize, prev: Option<usize>) -> bool {
    k == sys.sizes.len()
        || (0..sys.sizes[k]).any(|x| prev.is_none_or(|y| sys.maps[k - 1][x] == y) && has_thread(sys, k + 1, Some(x)))
}

fn compactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..100 {
        let len = rand::Rng::gen_range(&mut rng, 1..=8);
        let sys = random_inverse_system(&mut rng, len, 5, false);
        let thread = compact_select(&sys).map_err(err)?;
        ensure(thread.as_deref().is_some_and(|t| sys.is_thread(t)), || format!("system {}: no verified thread", k))?;
    }
    let mut empties = 0;
    for k in 0..100 {
        let len = rand::Rng::gen_range(&mut rng, 1..=8);
        let sys = random_inverse_system(&mut rng, len, 5, true);
        let empty = sys.eventual_images().iter().any(|e| !e.contains(&true));
        let thread = compact_select(&sys).map_err(err)?;
        ensure(thread.is_none() == empty, || format!("mixed system {}: empty image {} but thread {:?}", k, empty, thread))?;
        ensure(thread.is_some() == has_thread(&sys, 0, None), || format!("mixed system {}: brute force disagrees", k))?;
        empties += empty as usize;
    }
    ensure(empties > 0, || "no system with an empty eventual image was generated".into())?;
    Ok(format!("100 threads, {} empty systems", empties))
}

fn cg() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..20 {
        let rep = cg_check(&cg_instance(&mut rng, CgFamily::Free).map_err(err)?).map_err(err)?;
        ensure(rep.passed(), || format!("free instance {}: {:?}", k, rep.diagnosis))?;
    }
    for k in 0..10 {
        let rep = cg_check(&cg_instance(&mut rng, CgFamily::Unconcentrated).map_err(err)?).map_err(err)?;
        ensure(matches!(rep.diagnosis, Some(CgDiagnosis::Concentration { .. })), || format!("unconcentrated instance {}: {:?}", k, rep.diagnosis))?;
        let rep = cg_check(&cg_instance(&mut rng, CgFamily::NonFree).map_err(err)?).map_err(err)?;
        ensure(matches!(rep.diagnosis, Some(CgDiagnosis::Freeness { tor1 }) if tor1 > 0), || format!("non-free instance {}: {:?}", k, rep.diagnosis))?;
    }
    Ok("20 pass, 20 diagnosed".into())
}

fn exterior_compat() -> Outcome {
    for p in [2, 3, 5] {
        for k in 0..=4 {
            let r = exterior_compat_check(&exterior_model(Zmod::new(p, 1).map_err(err)?, k)).map_err(err)?;
            ensure(r.holds, || format!("p={} dim {}: identity fails", p, k))?;
            ensure(r.unique_action_matches == Some(true), || format!("p={} dim {}: reconstruction {:?}", p, k, r.unique_action_matches))?;
        }
    }
    Ok("15 models".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("limit Tor ranks are binomial", 60, exterior_ranks),
        ("limit vanishes above δ", 60, vanishing_band),
        ("group-algebra identification", 5, group_algebra),
        ("complete-intersection tangent dimensions", 30, ci_tangent),
        ("duality pairing suite", 120, pairing),
        ("Dold-Kan round trip", 30, dold_kan),
        ("free variables leave Tor unchanged", 20, free_variables),
        ("compactness extraction", 5, compactness),
        ("concentration and freeness checker", 30, cg),
        ("exterior compatibility", 10, exterior_compat),
    ];
    let mut failed = 0;
    for (k, (name, secs, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let budget = Duration::from_secs(*secs);
        let (tag, detail) = match outcome {
            Ok(d) if elapsed < budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{}; over budget", d)),
            Err(e) => ("FAIL", e),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{} criterion {}: {} ({}) [{:.2}s / {}s]", tag, k + 1, name, detail, elapsed.as_secs_f64(), secs);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", failed);
        ExitCode::FAILURE
    }
}
