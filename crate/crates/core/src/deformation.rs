//! Tangent-dimension bookkeeping for complete-intersection presentations,
//! the expected-size criterion, π_0 comparison sequences and the
//! Taylor–Wiles dimension count.

use crate::error::{Error, Result};
use crate::linalg::{preimage, Submodule, ZMat};
use crate::resolution::{koszul_h1_witness, PolyQuotientRing};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One term of a truncated power series: exponent vector and coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coeff: i64,
}

/// W[[X_1..X_s]]/(Y_1..Y_t), with the power series truncated at total
/// degree `truncation` (the ring used is W[[X]]/m^{T+1}).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub p: u64,
    pub vars: usize,
    pub truncation: u32,
    pub relations: Vec<Vec<Term>>,
}

/// dim 𝔱^0, dim 𝔱^1, dim 𝔱^2 over the residue field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangentDims {
    pub dims: Vec<usize>,
    pub truncation: u32,
}

impl Presentation {
    pub fn ring(&self) -> Result<PolyQuotientRing> {
        PolyQuotientRing::power_series(self.p, self.vars, self.truncation)
    }

    /// Relations as ring elements, validated to lie in the maximal ideal.
    pub fn elements(&self, ring: &PolyQuotientRing) -> Result<Vec<Vec<u64>>> {
        let mut out = Vec::new();
        for (k, rel) in self.relations.iter().enumerate() {
            let terms: Vec<(i64, Vec<u32>)> = rel.iter().map(|t| (t.coeff, t.exponents.clone())).collect();
            let e = ring.element(&terms)?;
            if !ring.augment(&e).is_multiple_of(self.p) {
                return Err(Error::Invalid(format!("relation {} has a unit constant term", k + 1)));
            }
            out.push(e);
        }
        Ok(out)
    }

    /// Linear parts mod p as a t × s matrix over F_p.
    pub fn linear_parts(&self, ring: &PolyQuotientRing, elems: &[Vec<u64>]) -> Result<ZMat> {
        let fp = crate::zmod::Zmod::new(self.p, 1)?;
        let mut m = ZMat::zeros(fp, elems.len(), self.vars);
        for (i, e) in elems.iter().enumerate() {
            for j in 0..self.vars {
                let mut mono = vec![0u32; self.vars];
                mono[j] = 1;
                let idx = ring.monomial_index(&mono).expect("degree one monomial");
                m.set(i, j, e[idx] % self.p);
            }
        }
        Ok(m)
    }

    /// Rewrites the relations through X_i ↦ images[i].
    pub fn substitute(&self, images: &[Vec<u64>]) -> Result<Presentation> {
        let ring = self.ring()?;
        if images.len() != self.vars || images.iter().any(|x| ring.order(x).is_none_or(|o| o == 0)) {
            return Err(Error::Invalid("substitution images must lie in the maximal ideal".into()));
        }
        let zm = ring.zm();
        let mut relations = Vec::new();
        for rel in self.elements(&ring)? {
            let mut acc = ring.zero();
            for (a, &c) in rel.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let mut term = ring.constant(zm.to_i64(c));
                for (v, &e) in ring.monomial(a).iter().enumerate() {
                    for _ in 0..e {
                        term = ring.mul(&term, &images[v]);
                    }
                }
                acc = ring.add(&acc, &term);
            }
            relations.push(to_terms(&ring, &acc));
        }
        Ok(Presentation { relations, ..self.clone() })
    }
}

fn to_terms(ring: &PolyQuotientRing, x: &[u64]) -> Vec<Term> {
    x.iter()
        .enumerate()
        .filter(|t| *t.1 != 0)
        .map(|(i, &c)| Term { exponents: ring.monomial(i).to_vec(), coeff: ring.zm().to_i64(c) })
        .collect()
}

/// Seeded presentation with s ≤ `max_vars` variables and t ≤ min(s, `max_rels`)
/// relations Y_i = u·X_{π(i)}^{k_i} + p·(degree k_i − 1) + (degree > k_i),
/// k_i ∈ {2, 3}, π injective. The leading forms have pairwise coprime
/// leading monomials X_{π(i)}^{k_i}, so the sequence is regular and every
/// relation lies in (p, m²).
pub fn random_ci_presentation<R: Rng + ?Sized>(rng: &mut R, p: u64, max_vars: usize, max_rels: usize) -> Presentation {
    let vars = rng.gen_range(1..=max_vars.max(1));
    let t = rng.gen_range(1..=max_rels.max(1).min(vars));
    let mut order: Vec<usize> = (0..vars).collect();
    order.shuffle(rng);
    let degs: Vec<u32> = (0..t).map(|_| rng.gen_range(2..=3)).collect();
    let truncation = degs.iter().max().copied().unwrap_or(2) + 1;
    let pm = p as i64;
    let random_mono = |rng: &mut R, deg: u32| -> Vec<u32> {
        let mut e = vec![0u32; vars];
        for _ in 0..deg {
            e[rng.gen_range(0..vars)] += 1;
        }
        e
    };
    let mut relations = Vec::new();
    for (i, &k) in degs.iter().enumerate() {
        let mut lead = vec![0u32; vars];
        lead[order[i]] = k;
        let mut rel = vec![Term { exponents: lead, coeff: rng.gen_range(1..pm) }];
        if rng.gen_bool(0.5) {
            rel.push(Term { exponents: random_mono(rng, k - 1), coeff: pm * rng.gen_range(1..pm) });
        }
        for _ in 0..rng.gen_range(0..=2) {
            let deg = rng.gen_range(k + 1..=truncation);
            rel.push(Term { exponents: random_mono(rng, deg), coeff: rng.gen_range(-pm..=pm) });
        }
        relations.push(rel);
    }
    Presentation { p, vars, truncation, relations }
}

fn rank_mod_p(m: &ZMat) -> usize {
    crate::linalg::smith(m, None, false, false).rank()
}

/// Tangent dimensions of a complete intersection: 𝔱^0 = s − r and
/// 𝔱^1 = t − r with r the rank of the linear parts mod p, 𝔱^2 = 0.
/// Refuses sequences that are not regular at the truncation.
pub fn ci_tangent_dims(pres: &Presentation) -> Result<TangentDims> {
    let ring = pres.ring()?;
    let elems = pres.elements(&ring)?;
    if let Some(w) = koszul_h1_witness(&ring, &elems) {
        return Err(Error::NotRegular { truncation: pres.truncation, witness: format!("{:?}", w) });
    }
    let r = rank_mod_p(&pres.linear_parts(&ring, &elems)?);
    Ok(TangentDims { dims: vec![pres.vars - r, elems.len() - r, 0], truncation: pres.truncation })
}

/// Outcome of [`expected_size_ci_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiCheck {
    pub holds: bool,
    pub minimal_vars: usize,
    pub minimal_relations: usize,
    pub in_maximal_ideal: bool,
    pub regular: bool,
    pub truncation: u32,
    pub witness: Option<String>,
}

/// After removing relations with unit linear parts (and the variables they
/// solve for), checks the counts against (b0, b1), that the relations lie
/// in (p, m²) and that they form a regular sequence at the truncation.
pub fn expected_size_ci_check(pres: &Presentation, b0: usize, b1: usize) -> Result<CiCheck> {
    let ring = pres.ring()?;
    let elems = match pres.elements(&ring) {
        Ok(e) => e,
        Err(Error::Invalid(msg)) => {
            return Ok(CiCheck {
                holds: false,
                minimal_vars: pres.vars,
                minimal_relations: pres.relations.len(),
                in_maximal_ideal: false,
                regular: false,
                truncation: pres.truncation,
                witness: Some(msg),
            })
        }
        Err(e) => return Err(e),
    };
    let r = rank_mod_p(&pres.linear_parts(&ring, &elems)?);
    let witness = koszul_h1_witness(&ring, &elems).map(|w| format!("{:?}", w));
    let regular = witness.is_none();
    let (minimal_vars, minimal_relations) = (pres.vars - r, elems.len() - r);
    Ok(CiCheck {
        holds: regular && minimal_vars == b0 && minimal_relations == b1,
        minimal_vars,
        minimal_relations,
        in_maximal_ideal: true,
        regular,
        truncation: pres.truncation,
        witness,
    })
}

/// Outcome of [`pi0_comparison_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pi0Comparison {
    pub holds: bool,
    pub failure: Option<String>,
}

/// Checks the comparison between R and π_0 R: equal 𝔱^0, and that the
/// sequence 0 → 𝔱^1(π_0R) → 𝔱^1(R) → h_1 → 𝔱^2(π_0R) → 𝔱^2(R) → h_2 → …
/// admits ranks making it exact, where `hom_pi[i-1]` is the dimension
/// of the third term in row i (h_1 = dim Hom(π_1 R, k)).
pub fn pi0_comparison_check(t_r: &[usize], t_pi0: &[usize], hom_pi: &[usize]) -> Pi0Comparison {
    let fail = |m: String| Pi0Comparison { holds: false, failure: Some(m) };
    if t_r.is_empty() || t_pi0.is_empty() {
        return fail("tangent dimensions must include degree 0".into());
    }
    if t_r[0] != t_pi0[0] {
        return fail(format!("𝔱^0 differ: {} vs {}", t_r[0], t_pi0[0]));
    }
    if t_r.len() > 1 && t_pi0.len() > 1 && t_pi0[1] > t_r[1] {
        return fail(format!("𝔱^1(π_0 R) = {} exceeds 𝔱^1(R) = {}", t_pi0[1], t_r[1]));
    }
    let mut seq = Vec::new();
    let mut i = 1;
    loop {
        let (Some(&a), Some(&b)) = (t_pi0.get(i), t_r.get(i)) else { break };
        seq.push((format!("𝔱^{}(π_0 R)", i), a));
        seq.push((format!("𝔱^{}(R)", i), b));
        match hom_pi.get(i - 1) {
            Some(&h) => seq.push((format!("h_{}", i), h)),
            None => break,
        }
        i += 1;
    }
    // the rank of each map is forced: dim V_k minus the incoming rank
    let mut incoming = 0usize;
    for (k, (name, dim)) in seq.iter().enumerate() {
        if incoming > *dim {
            return fail(format!("image of rank {} does not fit in {} of dimension {}", incoming, name, dim));
        }
        let out = dim - incoming;
        if let Some((next, ndim)) = seq.get(k + 1) {
            if out > *ndim {
                return fail(format!("{} → {} would need rank {} > {}", name, next, out, ndim));
            }
        }
        incoming = out;
    }
    Pi0Comparison { holds: true, failure: None }
}

/// The three inputs of [`pi0_comparison_check`] read off a derived
/// quotient by a possibly non-regular sequence: 𝔱(R) = (s−r, t−r, 0),
/// 𝔱(π_0R) = (s−r, μ(I)−r), h_1 = dim H_1 ⊗ k of the Koszul complex
/// (classes of order above T+1−c attributed to truncation).
pub fn koszul_model_dims(pres: &Presentation) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let ring = pres.ring()?;
    let zm = ring.zm();
    let elems = pres.elements(&ring)?;
    let r = rank_mod_p(&pres.linear_parts(&ring, &elems)?);
    let d = ring.dim();
    let caps = ring.caps().to_vec();
    // μ(I) = dim I/mI
    let mut ideal = Vec::new();
    let mut m_ideal = Vec::new();
    for f in &elems {
        for j in 0..d {
            let g = ring.mul_basis(f, j);
            m_ideal.push(ring.scale(zm.p(), &g));
            for v in 0..ring.vars() {
                m_ideal.push(ring.mul(&ring.var(v), &g));
            }
            ideal.push(g);
        }
    }
    let base = Submodule::from_caps(zm, &caps);
    let mu = (base.with_gens(ideal).order_log() - base.with_gens(m_ideal).order_log()) as usize;
    // H_1 ⊗ k
    let t = elems.len();
    let mut d1 = ZMat::zeros(zm, d, t * d);
    for (k, f) in elems.iter().enumerate() {
        d1.set_block(0, k * d, &ring.mult_matrix(f));
    }
    let k1caps: Vec<u32> = (0..t).flat_map(|_| caps.iter().copied()).collect();
    let z1 = preimage(&d1, &caps, &ZMat::zeros(zm, d, 0));
    let mut allowed: Vec<Vec<u64>> = Vec::new();
    for z in &z1 {
        allowed.push(z.iter().map(|&x| zm.mul(x, zm.p())).collect());
        for v in 0..ring.vars() {
            let xv = ring.var(v);
            let mut w = Vec::with_capacity(z.len());
            for k in 0..t {
                w.extend(ring.mul(&xv, &z[k * d..(k + 1) * d]));
            }
            allowed.push(w);
        }
    }
    for a in 0..t {
        for b in a + 1..t {
            let mut v = vec![0u64; t * d];
            v[a * d..(a + 1) * d].copy_from_slice(&elems[b]);
            let neg = ring.scale(zm.neg(1), &elems[a]);
            v[b * d..(b + 1) * d].copy_from_slice(&neg);
            allowed.push(v);
        }
    }
    let c = elems.iter().filter_map(|f| ring.order(f)).max().unwrap_or(0);
    let band = (pres.truncation + 1).saturating_sub(c);
    for blk in 0..t {
        for a in 0..d {
            let deg: u32 = ring.monomial(a).iter().sum();
            let k = band.saturating_sub(deg);
            if k < zm.n() {
                let mut v = vec![0; t * d];
                v[blk * d + a] = zm.p_pow(k);
                allowed.push(v);
            }
        }
    }
    let low = Submodule::from_caps(zm, &k1caps).with_gens(allowed);
    let h1 = (low.with_gens(z1).order_log() - low.order_log()) as usize;
    Ok((vec![pres.vars - r, t - r, 0], vec![pres.vars - r, mu - r], vec![h1]))
}

/// Inputs of the Taylor–Wiles dimension count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumerologyInput {
    pub h1_global: i64,
    pub h2_global: i64,
    pub h1_local: i64,
    pub h1_f: i64,
    pub rank: i64,
    pub num_primes: i64,
    pub delta: i64,
}

/// Outcome of [`wiles_numerology`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Numerology {
    /// (h1 − h2) − h1_local + h1_f + rank·#Q.
    pub value: i64,
    /// rank·#Q − δ.
    pub expected: i64,
    /// h1 − h2 = (h1_local − h1_f) − δ.
    pub relations_hold: bool,
    pub negative: bool,
}

/// dim ker(A) from an Euler characteristic count; equals rank·#Q − δ
/// whenever h1 − h2 = dim(B) − δ with dim B = h1_local − h1_f.
pub fn wiles_numerology(x: &NumerologyInput) -> Result<Numerology> {
    let fields = [x.h1_global, x.h2_global, x.h1_local, x.h1_f, x.rank, x.num_primes, x.delta];
    if fields.iter().any(|&v| v < 0) {
        return Err(Error::Invalid("dimensions must be nonnegative".into()));
    }
    let value = (x.h1_global - x.h2_global) - x.h1_local + x.h1_f + x.rank * x.num_primes;
    let expected = x.rank * x.num_primes - x.delta;
    let relations_hold = x.h1_global - x.h2_global == (x.h1_local - x.h1_f) - x.delta;
    Ok(Numerology { value, expected, relations_hold, negative: value < 0 })
}
