//! Finite-level patching: level complexes Cₙ over the group algebras
//! S_n = W_n[(Z/pⁿ)^s], their transition maps, compactness selection in
//! inverse systems of finite sets, the limit homotopy algebra and the
//! concentration/freeness checker for complexes with a ring action on
//! homology.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{induced_map, FreeChainComplex, ModComplex};
use crate::error::{Error, Result};
use crate::linalg::{preimage, GroupMap, Subquotient, Submodule, ZMat};
use crate::resolution::{
    binom, cyclic_resolution, exterior_compare, identity_map, level_model, limit_tor_algebra, periodic_transition_scalars,
    tor_algebra, tuples, ExteriorComparison, GradedAlgebra, LimitTor, PolyQuotientRing, Resolution,
};
use crate::ring::{local_eliminate, Matrix, Ring, RingElem, RingSpec};
use crate::zmod::Zmod;

/// Synthetic perturbation of the canonical maps into the level complexes:
/// every level gets `extra` additional homotopy classes, wired at random.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub extra: usize,
}

/// One patching experiment: S°_∞ = W[[X_1..X_s]], R_∞ = W[[X_1..X_{s−δ}]].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchScenario {
    pub p: u64,
    pub s: usize,
    pub delta: usize,
    pub levels: Vec<u32>,
    pub maxdeg: usize,
    /// Truncation of the power-series side; defaults to 2·maxdeg + 2.
    #[serde(default)]
    pub truncation: Option<u32>,
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
}

impl PatchScenario {
    pub fn new(p: u64, s: usize, delta: usize, levels: Vec<u32>, maxdeg: usize) -> Self {
        PatchScenario { p, s, delta, levels, maxdeg, truncation: None, perturbation: None }
    }

    pub fn validate(&self) -> Result<()> {
        Zmod::new(self.p, 1)?;
        if self.delta > self.s {
            return Err(Error::Invalid(format!("δ = {} exceeds s = {}", self.delta, self.s)));
        }
        if self.levels.is_empty() || self.levels[0] == 0 {
            return Err(Error::Invalid("levels must be nonempty and positive".into()));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("levels must strictly increase".into()));
        }
        Ok(())
    }

    pub fn truncation(&self) -> u32 {
        self.truncation.unwrap_or(2 * self.maxdeg as u32 + 2)
    }

    /// Ring spec of S_n.
    pub fn group_ring(&self, n: u32) -> RingSpec {
        RingSpec::new(self.p, n, vec![n; self.s])
    }
}

/// The complex Cₙ = R_n ⊗_{S_n} W_n at one level.
#[derive(Clone, Debug)]
pub struct LevelDatum {
    pub level: u32,
    pub ring: RingSpec,
    /// Periodic resolution of W_n over W_n[Z/pⁿ] for one killed coordinate;
    /// Cₙ is the tensor of δ copies, base-changed to W_n.
    pub factor: Resolution,
    pub complex: ModComplex,
    /// π_i Cₙ for 0 ≤ i ≤ maxdeg.
    pub homotopy: Vec<Subquotient>,
}

impl LevelDatum {
    pub fn groups(&self) -> Vec<Vec<u32>> {
        self.homotopy.iter().map(|h| h.exponents()).collect()
    }

    /// H₀(Cₙ) ≅ R_∞/(𝔞_n + (X_1..X_s)) = W_n.
    pub fn descent_holds(&self) -> bool {
        self.homotopy.first().map(|h| h.exponents() == vec![self.level]).unwrap_or(false)
    }
}

pub fn build_level_complex(sc: &PatchScenario, n: u32) -> Result<LevelDatum> {
    sc.validate()?;
    if !sc.levels.contains(&n) {
        return Err(Error::Invalid(format!("level {} is not in the scenario", n)));
    }
    level_datum(sc, n)
}

fn level_datum(sc: &PatchScenario, n: u32) -> Result<LevelDatum> {
    // The s−δ surviving coordinates act freely on both R_n and S_n, so they
    // split off and contribute nothing to Tor.
    let complex = level_model(sc.p, n, sc.delta, sc.maxdeg + 1)?;
    let homotopy = (0..=sc.maxdeg as i64).map(|i| complex.homology(i)).collect();
    Ok(LevelDatum { level: n, ring: sc.group_ring(n), factor: cyclic_resolution(sc.p, n, n, sc.maxdeg + 1)?, complex, homotopy })
}

/// e_{n,m}: Cₙ → C_m, diagonal on the tuple basis, with its effect on π_*.
#[derive(Clone, Debug)]
pub struct Transition {
    pub from: u32,
    pub to: u32,
    /// Diagonal chain map per degree 0..=maxdeg.
    pub chain: Vec<ZMat>,
    pub homotopy: Vec<GroupMap>,
}

impl Transition {
    /// Exponents of the image of π_i, per degree.
    pub fn image_groups(&self) -> Vec<Vec<u32>> {
        let zm = self.chain[0].zm();
        self.homotopy.iter().map(|g| g.image_group(zm).exponents).collect()
    }
}

pub fn transition(sc: &PatchScenario, n: u32, m: u32) -> Result<Transition> {
    sc.validate()?;
    if n < m {
        return Err(Error::Invalid(format!("transition needs n ≥ m, got {} < {}", n, m)));
    }
    let src = level_datum(sc, n)?;
    let tgt = level_datum(sc, m)?;
    transition_between(sc, &src, &tgt)
}

fn transition_between(sc: &PatchScenario, src: &LevelDatum, tgt: &LevelDatum) -> Result<Transition> {
    let (n, m) = (src.level, tgt.level);
    let zm = Zmod::new(sc.p, m)?;
    let scalars = if n == m {
        vec![1 % zm.modulus(); sc.maxdeg + 2]
    } else {
        periodic_transition_scalars(sc.p, n, m, sc.maxdeg + 1)?
    };
    let mut chain = Vec::new();
    let mut homotopy = Vec::new();
    for i in 0..=sc.maxdeg {
        let basis = tuples(sc.delta, i as u32);
        let mut d = ZMat::zeros(zm, basis.len(), basis.len());
        for (k, t) in basis.iter().enumerate() {
            d.set(k, k, t.iter().fold(1 % zm.modulus(), |acc, &j| zm.mul(acc, scalars[j as usize])));
        }
        homotopy.push(if n == m {
            identity_map(&src.homotopy[i].exponents())
        } else {
            induced_map(&d, &src.homotopy[i], &tgt.homotopy[i])?
        });
        chain.push(d);
    }
    Ok(Transition { from: n, to: m, chain, homotopy })
}

/// Checks e_{a,c} = e_{b,c} ∘ e_{a,b} on homology for every a ≥ b ≥ c in
/// the scenario's levels, returning the first failing triple.
pub fn composition_law(sc: &PatchScenario) -> Result<Option<(u32, u32, u32)>> {
    sc.validate()?;
    let data: Vec<LevelDatum> = sc.levels.iter().map(|&n| level_datum(sc, n)).collect::<Result<_>>()?;
    let k = data.len();
    for a in 0..k {
        for b in 0..=a {
            for c in 0..=b {
                let ab = transition_between(sc, &data[a], &data[b])?;
                let bc = transition_between(sc, &data[b], &data[c])?;
                let ac = transition_between(sc, &data[a], &data[c])?;
                let zm = Zmod::new(sc.p, data[c].level)?;
                for i in 0..=sc.maxdeg {
                    let comp = ab.homotopy[i].then(zm, &bc.homotopy[i]);
                    let direct = &ac.homotopy[i];
                    let differs = comp.columns.iter().zip(&direct.columns).any(|(x, y)| {
                        x.iter().zip(y).zip(&direct.target).any(|((&u, &v), &e)| u % zm.p_pow_int(e) != v % zm.p_pow_int(e))
                    });
                    if differs {
                        return Ok(Some((data[a].level, data[b].level, data[c].level)));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Finite sets X_0, X_1, … (elements 0..sizes[k]) with maps
/// `maps[k]`: X_{k+1} → X_k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteInverseSystem {
    pub sizes: Vec<usize>,
    pub maps: Vec<Vec<usize>>,
}

impl FiniteInverseSystem {
    pub fn new(sizes: Vec<usize>, maps: Vec<Vec<usize>>) -> Result<Self> {
        let sys = FiniteInverseSystem { sizes, maps };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.len() + 1 != self.sizes.len().max(1) {
            return Err(Error::Shape(format!("{} sets need {} maps", self.sizes.len(), self.sizes.len().saturating_sub(1))));
        }
        for (k, f) in self.maps.iter().enumerate() {
            if f.len() != self.sizes[k + 1] {
                return Err(Error::Shape(format!("map {} has {} values for a set of size {}", k, f.len(), self.sizes[k + 1])));
            }
            if let Some(&bad) = f.iter().find(|&&y| y >= self.sizes[k]) {
                return Err(Error::Invalid(format!("map {} sends into {} outside X_{} of size {}", k, bad, k, self.sizes[k])));
            }
        }
        Ok(())
    }

    /// E_k = image of the last set in X_k, as membership flags.
    pub fn eventual_images(&self) -> Vec<Vec<bool>> {
        let len = self.sizes.len();
        let mut out = vec![Vec::new(); len];
        if len == 0 {
            return out;
        }
        out[len - 1] = vec![true; self.sizes[len - 1]];
        for k in (0..len - 1).rev() {
            let mut img = vec![false; self.sizes[k]];
            for (y, &x) in self.maps[k].iter().enumerate() {
                if out[k + 1][y] {
                    img[x] = true;
                }
            }
            out[k] = img;
        }
        out
    }

    pub fn is_thread(&self, thread: &[usize]) -> bool {
        thread.len() == self.sizes.len()
            && thread.iter().zip(&self.sizes).all(|(&x, &n)| x < n)
            && (0..self.maps.len()).all(|k| self.maps[k][thread[k + 1]] == thread[k])
    }
}

/// A compatible thread (x_k) with x_{k+1} ↦ x_k, or `None` when some
/// eventual image is empty. Each x_k is the least element of E_k over x_{k−1}.
pub fn compact_select(sys: &FiniteInverseSystem) -> Result<Option<Vec<usize>>> {
    sys.validate()?;
    if sys.sizes.is_empty() {
        return Ok(Some(Vec::new()));
    }
    let images = sys.eventual_images();
    if images.iter().any(|e| !e.iter().any(|&b| b)) {
        return Ok(None);
    }
    let mut thread = vec![images[0].iter().position(|&b| b).expect("nonempty image")];
    for k in 0..sys.maps.len() {
        let below = thread[k];
        let next = (0..sys.sizes[k + 1])
            .find(|&y| images[k + 1][y] && sys.maps[k][y] == below)
            .ok_or_else(|| Error::Axiom(format!("eventual image E_{} does not surject onto E_{}", k + 1, k)))?;
        thread.push(next);
    }
    if !sys.is_thread(&thread) {
        return Err(Error::Axiom("selected sequence is not a thread".into()));
    }
    Ok(Some(thread))
}

/// Random system with sizes in 1..=max_size (0 allowed when `allow_empty`).
pub fn random_inverse_system<R: Rng + ?Sized>(rng: &mut R, length: usize, max_size: usize, allow_empty: bool) -> FiniteInverseSystem {
    let lo = if allow_empty { 0 } else { 1 };
    let mut sizes: Vec<usize> = (0..length).map(|_| rng.gen_range(lo..=max_size.max(1))).collect();
    // maps into an empty set must come from an empty set
    for k in (0..length.saturating_sub(1)).rev() {
        if sizes[k] == 0 {
            sizes[k + 1] = 0;
        }
    }
    for k in 1..length {
        if sizes[k - 1] == 0 {
            sizes[k] = 0;
        }
    }
    let maps = (0..length.saturating_sub(1)).map(|k| (0..sizes[k + 1]).map(|_| rng.gen_range(0..sizes[k])).collect()).collect();
    FiniteInverseSystem { sizes, maps }
}

/// Stand-in for the sets of homotopy classes [R₀, Cₙ]: the canonical map
/// plus `extra` perturbed classes per level, wired at random; the canonical
/// classes always form a thread.
pub fn perturbed_system<R: Rng + ?Sized>(sc: &PatchScenario, rng: &mut R) -> (FiniteInverseSystem, Vec<usize>) {
    let extra = sc.perturbation.as_ref().map(|p| p.extra).unwrap_or(0);
    let len = sc.levels.len();
    let size = extra + 1;
    let canonical: Vec<usize> = (0..len).map(|_| rng.gen_range(0..size)).collect();
    let maps = (0..len.saturating_sub(1))
        .map(|k| {
            (0..size)
                .map(|y| if y == canonical[k + 1] { canonical[k] } else { rng.gen_range(0..size) })
                .collect()
        })
        .collect();
    (FiniteInverseSystem { sizes: vec![size; len], maps }, canonical)
}

/// Verdict of a check that may lack enough evidence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// lim π_* Cₙ against the Koszul answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitPi {
    pub limit: LimitTor,
    pub algebra: GradedAlgebra,
    pub expected_ranks: Vec<usize>,
    /// Ranks of Tor over the truncated power series ring, via Koszul.
    pub koszul_ranks: Vec<usize>,
    pub koszul_truncation: u32,
    pub ranks_match: bool,
    pub exterior: ExteriorComparison,
    pub koszul_exterior: ExteriorComparison,
    /// Σ (−1)^i rank lim π_i.
    pub euler: i64,
    pub verdict: Verdict,
}

pub fn limit_pi(sc: &PatchScenario) -> Result<LimitPi> {
    sc.validate()?;
    let (limit, algebra) = limit_tor_algebra(sc.p, sc.delta, &sc.levels, sc.maxdeg)?;
    let expected_ranks: Vec<usize> = (0..=sc.maxdeg).map(|i| binom(sc.delta, i)).collect();
    let t = sc.truncation();
    let koszul_alg = koszul_side(sc.p, sc.delta, t, sc.maxdeg)?;
    let koszul_ranks: Vec<usize> = koszul_alg.degrees.iter().map(|e| e.iter().filter(|&&x| x == koszul_alg.level).count()).collect();
    let ranks = limit.ranks();
    let ranks_match = ranks == expected_ranks && koszul_ranks == expected_ranks;
    let exterior = exterior_compare(&algebra, sc.delta);
    let koszul_exterior = exterior_compare(&koszul_alg, sc.delta);
    let euler = ranks.iter().enumerate().map(|(i, &r)| if i % 2 == 0 { r as i64 } else { -(r as i64) }).sum();
    let verdict = if !limit.stabilized() {
        Verdict::Inconclusive
    } else if ranks_match && exterior.matches && koszul_exterior.matches {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(LimitPi { limit, algebra, expected_ranks, koszul_ranks, koszul_truncation: t, ranks_match, exterior, koszul_exterior, euler, verdict })
}

/// Tor^{W[[X_1..X_δ]]}(W, W) through the Koszul complex on the variables,
/// truncated at degree t. The s−δ coordinates shared with R_∞ split off.
fn koszul_side(p: u64, delta: usize, t: u32, maxdeg: usize) -> Result<GradedAlgebra> {
    if delta == 0 {
        let level = t + 1;
        let mut degrees = vec![Vec::new(); maxdeg + 1];
        degrees[0] = vec![level];
        return Ok(GradedAlgebra { p, level, degrees, products: Vec::new() });
    }
    let ring = PolyQuotientRing::power_series(p, delta, t)?;
    let elems: Vec<Vec<u64>> = (0..delta).map(|i| ring.var(i)).collect();
    tor_algebra(&ring, &elems, maxdeg)
}

/// Full report for one scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchReport {
    pub levels: Vec<LevelSummary>,
    /// Image exponents of e_{n_{k+1}, n_k} per degree.
    pub transition_images: Vec<Vec<Vec<u32>>>,
    pub composition_failure: Option<(u32, u32, u32)>,
    pub limit: LimitPi,
    pub selection: Selection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: u32,
    pub homotopy: Vec<Vec<u32>>,
    pub descent_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub system: FiniteInverseSystem,
    pub thread: Option<Vec<usize>>,
    pub canonical: Vec<usize>,
    pub selected_canonical: bool,
}

pub fn simulate<R: Rng + ?Sized>(sc: &PatchScenario, rng: &mut R) -> Result<PatchReport> {
    sc.validate()?;
    let data: Vec<LevelDatum> = sc.levels.iter().map(|&n| level_datum(sc, n)).collect::<Result<_>>()?;
    let levels = data.iter().map(|d| LevelSummary { level: d.level, homotopy: d.groups(), descent_holds: d.descent_holds() }).collect();
    let mut transition_images = Vec::new();
    for w in data.windows(2) {
        transition_images.push(transition_between(sc, &w[1], &w[0])?.image_groups());
    }
    let composition_failure = composition_law(sc)?;
    let limit = limit_pi(sc)?;
    let (system, canonical) = perturbed_system(sc, rng);
    let thread = compact_select(&system)?;
    let selected_canonical = thread.as_deref() == Some(canonical.as_slice());
    Ok(PatchReport { levels, transition_images, composition_failure, limit, selection: Selection { system, thread, canonical, selected_canonical } })
}

/// A complex D of free S_n-modules with R_n acting on it through a ring
/// map R_n → S_n, given by the images of R_n's group generators.
#[derive(Clone, Debug)]
pub struct CgInstance {
    pub complex: FreeChainComplex,
    pub q: i64,
    pub delta: usize,
    pub acting: Ring,
    pub action: Vec<RingElem>,
}

/// Which half of the concentration/freeness conclusion failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CgDiagnosis {
    Concentration { degrees: Vec<i64> },
    Freeness { tor1: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgReport {
    pub homology: Vec<(i64, Vec<u32>)>,
    pub generators: usize,
    /// dim_k Tor₁^{R_n}(H_q, k): rows of the minimal relation matrix.
    pub tor1: usize,
    pub residual_shape: (usize, usize),
    pub free: bool,
    pub concentrated: bool,
    pub diagnosis: Option<CgDiagnosis>,
}

impl CgReport {
    pub fn passed(&self) -> bool {
        self.diagnosis.is_none()
    }
}

/// Homology of D concentrated in degree q and H_q free over R_n.
pub fn cg_check(inst: &CgInstance) -> Result<CgReport> {
    let d = &inst.complex;
    let s_ring = d.ring();
    for h in d.lo()..=d.hi() {
        if d.rank(h) > 0 && (h < inst.q || h > inst.q + inst.delta as i64) {
            return Err(Error::DegreeRange(format!("D has rank {} in degree {}, outside [{}, {}]", d.rank(h), h, inst.q, inst.q + inst.delta as i64)));
        }
    }
    let r = &inst.acting;
    if r.zm() != s_ring.zm() {
        return Err(Error::RingMismatch("acting ring over a different W_n".into()));
    }
    if inst.action.len() != r.num_group_gens() {
        return Err(Error::Shape(format!("{} action images for {} generators", inst.action.len(), r.num_group_gens())));
    }
    for (i, x) in inst.action.iter().enumerate() {
        let order = r.radices()[i] as u64;
        if x.coeffs().len() != s_ring.group_order() || s_ring.pow(x, order) != s_ring.one() {
            return Err(Error::NotHomomorphism(format!("image of generator {} does not have order dividing {}", i, order)));
        }
    }
    let c = d.restrict_scalars();
    let mut homology = Vec::new();
    let mut stray = Vec::new();
    for h in c.lo()..=c.hi() {
        let hh = c.homology(h);
        if h != inst.q && !hh.is_zero() {
            stray.push(h);
        }
        homology.push((h, hh.exponents()));
    }
    let hq = c.homology(inst.q);
    let zm = s_ring.zm();
    let rank_q = d.rank(inst.q);
    let act = |x: &RingElem| Matrix::identity(s_ring, rank_q).scale(x).expand();
    let gen_ops: Vec<ZMat> = inst.action.iter().map(act).collect();
    // m_R H = pH + Σ (σ'_i − 1) H
    let reps = hq.reps();
    let bottom = hq.bottom().clone();
    let max_ideal = |vs: &[Vec<u64>], ops: &[ZMat], base: &Submodule| {
        let mut extra = Vec::new();
        for v in vs {
            extra.push(v.iter().map(|&x| zm.mul(x, zm.p() % zm.modulus())).collect::<Vec<u64>>());
            for a in ops {
                let av = a.apply(v);
                extra.push(av.iter().zip(v).map(|(&x, &y)| zm.sub(x, y)).collect());
            }
        }
        base.with_gens(extra)
    };
    let m_h = max_ideal(&reps, &gen_ops, &bottom);
    let mut gens: Vec<Vec<u64>> = Vec::new();
    let mut span = m_h.clone();
    for v in &reps {
        if !span.contains(v) {
            span = span.with_gens([v.clone()]);
            gens.push(v.clone());
        }
    }
    let g = gens.len();
    let r_log = r.group_order() as u64 * zm.n() as u64;
    let free = hq.order_log() == g as u64 * r_log;
    // Presentation R^g → H_q and its minimal relations.
    let g_r = r.group_order();
    let images: Vec<ZMat> = (0..g_r).map(|k| act(&ring_map(r, s_ring, &inst.action, k))).collect();
    let exps = hq.exponents();
    let mut phi = ZMat::zeros(zm, exps.len(), g * g_r);
    for (j, h) in gens.iter().enumerate() {
        for (k, img) in images.iter().enumerate() {
            let coords = hq.coords(&img.apply(h)).ok_or_else(|| Error::NotHomomorphism("action does not preserve H_q".into()))?;
            for (i, &x) in coords.iter().enumerate() {
                phi.set(i, j * g_r + k, x);
            }
        }
    }
    let kernel = preimage(&phi, &exps, &ZMat::zeros(zm, exps.len(), 0));
    let r_ops: Vec<ZMat> = (0..r.num_group_gens())
        .map(|i| Matrix::identity(r, g).scale(&r.sigma(i)).expand())
        .collect();
    let k_mod = Submodule::from_gens(zm, g * g_r, kernel.clone());
    let m_k = max_ideal(&k_mod.gens(), &r_ops, &Submodule::zero(zm, g * g_r));
    let mut relations: Vec<Vec<u64>> = Vec::new();
    let mut rspan = m_k;
    for v in k_mod.gens() {
        if !rspan.contains(&v) {
            rspan = rspan.with_gens([v.clone()]);
            relations.push(v);
        }
    }
    let mut entries = Vec::new();
    for rel in &relations {
        for j in 0..g {
            entries.push(RingElem(rel[j * g_r..(j + 1) * g_r].to_vec()));
        }
    }
    let rel_matrix = Matrix::from_entries(r, relations.len(), g, &entries)?;
    let elim = local_eliminate(&rel_matrix);
    let tor1 = elim.residual.rows();
    let concentrated = stray.is_empty();
    let diagnosis = if !concentrated {
        Some(CgDiagnosis::Concentration { degrees: stray })
    } else if tor1 > 0 || !free {
        Some(CgDiagnosis::Freeness { tor1 })
    } else {
        None
    };
    Ok(CgReport { homology, generators: g, tor1, residual_shape: (elim.residual.rows(), elim.residual.cols()), free, concentrated, diagnosis })
}

/// Image in S of the k-th group element of R under σ'_i ↦ action[i].
fn ring_map(r: &Ring, s: &Ring, action: &[RingElem], k: usize) -> RingElem {
    r.digits(k).iter().zip(action).fold(s.one(), |acc, (&e, x)| s.mul(&acc, &s.pow(x, e as u64)))
}

/// Shape of a constructed CG instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CgFamily {
    /// H_q = S^g, free over R through the inclusion of coordinates.
    Free,
    /// Extra homology in degree q+1.
    Unconcentrated,
    /// R acts through a coordinate sent to 1, so H_q ≅ (R/(σ−1))^g.
    NonFree,
}

/// Builds a random instance of the given family over W_n with p ∈ {2,3}.
pub fn cg_instance<R: Rng + ?Sized>(rng: &mut R, family: CgFamily) -> Result<CgInstance> {
    let p = [2u64, 3][rng.gen_range(0..2)];
    let n = rng.gen_range(1..=2u32);
    let q = rng.gen_range(0..=2i64);
    let shared = rng.gen_range(0..=1usize);
    let (s_gens, r_gens) = match family {
        CgFamily::NonFree => (shared, shared + 1),
        _ => (shared + rng.gen_range(0..=1usize), shared),
    };
    let exps = if p == 3 && n == 2 { 1 } else { n };
    let s = Ring::new(RingSpec::new(p, n, vec![exps; s_gens]))?;
    let r = Ring::new(RingSpec::new(p, n, vec![exps; r_gens]))?;
    let action: Vec<RingElem> = (0..r_gens).map(|i| if i < s_gens { s.sigma(i) } else { s.one() }).collect();
    let g = rng.gen_range(1..=2usize);
    let complex = match family {
        CgFamily::Free | CgFamily::NonFree => {
            let h = rng.gen_range(0..=1usize);
            if h == 0 {
                FreeChainComplex::new(&s, q, vec![g], Vec::new())?
            } else {
                let u = random_unitriangular(rng, &s, h);
                let mut dmat = Matrix::zeros(&s, g + h, h);
                dmat.set_block(g, 0, &u);
                FreeChainComplex::new(&s, q, vec![g + h, h], vec![dmat])?
            }
        }
        CgFamily::Unconcentrated => {
            let h = rng.gen_range(1..=2usize);
            FreeChainComplex::new(&s, q, vec![g, h], vec![Matrix::zeros(&s, g, h)])?
        }
    };
    let delta = if complex.ranks().len() > 1 { 1 } else { rng.gen_range(0..=1) };
    Ok(CgInstance { complex, q, delta, acting: r, action })
}

fn random_unitriangular<R: Rng + ?Sized>(rng: &mut R, ring: &Ring, k: usize) -> Matrix {
    let mut m = Matrix::identity(ring, k);
    let zm = ring.zm();
    for i in 0..k {
        for j in (i + 1)..k {
            let coeffs: Vec<i64> = (0..ring.group_order()).map(|_| rng.gen_range(0..zm.modulus()) as i64).collect();
            m.set(i, j, &ring.from_coeffs(&coeffs).expect("length matches"));
        }
        // units other than 1 on the diagonal: 1 + (σ − 1) style
        if ring.num_group_gens() > 0 && rng.gen_bool(0.5) {
            m.set(i, i, &ring.sigma(0));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sc(p: u64, s: usize, delta: usize, levels: &[u32], maxdeg: usize) -> PatchScenario {
        PatchScenario::new(p, s, delta, levels.to_vec(), maxdeg)
    }

    #[test]
    fn delta_zero_is_wn_in_degree_zero() {
        let d = build_level_complex(&sc(2, 2, 0, &[1, 2], 3), 2).unwrap();
        assert_eq!(d.groups(), vec![vec![2], vec![], vec![], vec![]]);
        assert!(d.descent_holds());
    }

    #[test]
    fn delta_one_is_periodic_at_each_level() {
        let s = sc(3, 1, 1, &[1, 2], 4);
        for &n in &[1, 2] {
            let d = build_level_complex(&s, n).unwrap();
            assert!(d.groups().iter().all(|g| g == &vec![n]));
        }
    }

    #[test]
    fn transitions_identity_reduction_and_composition() {
        let s = sc(2, 1, 1, &[1, 2, 3], 4);
        let id = transition(&s, 2, 2).unwrap();
        let zm = Zmod::new(2, 2).unwrap();
        assert!(id.homotopy.iter().all(|g| g.is_iso(zm)));
        let e21 = transition(&s, 2, 1).unwrap();
        assert_eq!(e21.chain[0].get(0, 0), 1);
        assert_eq!(e21.homotopy[0].columns, vec![vec![1]]);
        assert_eq!(composition_law(&s).unwrap(), None);
        assert!(matches!(transition(&s, 1, 2), Err(Error::Invalid(_))));
        let e32 = transition(&s, 3, 2).unwrap();
        let e31 = transition(&s, 3, 1).unwrap();
        let z1 = Zmod::new(2, 1).unwrap();
        for i in 0..=4 {
            assert_eq!(e32.homotopy[i].then(z1, &e21.homotopy[i]).columns, e31.homotopy[i].columns, "degree {}", i);
        }
    }

    #[test]
    fn compact_select_examples() {
        let constant = FiniteInverseSystem::new(vec![2, 2, 2], vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(compact_select(&constant).unwrap(), Some(vec![0, 0, 0]));
        let swap = FiniteInverseSystem::new(vec![2, 2, 2, 2], vec![vec![1, 0]; 3]).unwrap();
        let t = compact_select(&swap).unwrap().unwrap();
        assert!(swap.is_thread(&t));
        assert_eq!(t, vec![0, 1, 0, 1]);
        let empty = FiniteInverseSystem::new(vec![2, 0, 0], vec![vec![], vec![]]).unwrap();
        assert_eq!(compact_select(&empty).unwrap(), None);
        // the least element of X_0 is not in the eventual image
        let skewed = FiniteInverseSystem::new(vec![3, 2, 1], vec![vec![1, 2], vec![1]]).unwrap();
        assert_eq!(compact_select(&skewed).unwrap(), Some(vec![2, 1, 0]));
        assert!(FiniteInverseSystem::new(vec![1, 1], vec![vec![3]]).is_err());
    }

    #[test]
    fn limit_pi_examples() {
        let r = limit_pi(&sc(3, 2, 1, &[1, 2, 3], 3)).unwrap();
        assert_eq!(r.limit.ranks(), vec![1, 1, 0, 0]);
        assert_eq!(r.verdict, Verdict::Pass);
        let r0 = limit_pi(&sc(2, 1, 0, &[1, 2], 2)).unwrap();
        assert_eq!(r0.limit.ranks(), vec![1, 0, 0]);
        assert_eq!(r0.euler, 1);
        assert_eq!(r0.verdict, Verdict::Pass);
        let r2 = limit_pi(&sc(2, 3, 2, &[1, 2, 3], 4)).unwrap();
        assert_eq!(r2.limit.ranks(), vec![1, 2, 1, 0, 0]);
        assert_eq!(r2.koszul_ranks, vec![1, 2, 1, 0, 0]);
        assert_eq!(r2.euler, 0);
        assert!(r2.exterior.matches && r2.koszul_exterior.matches);
    }

    #[test]
    fn single_level_is_inconclusive() {
        let r = limit_pi(&sc(2, 1, 1, &[1, 2], 3)).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn cg_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let ok = cg_check(&cg_instance(&mut rng, CgFamily::Free).unwrap()).unwrap();
            assert!(ok.passed(), "{:?}", ok);
            let bad = cg_check(&cg_instance(&mut rng, CgFamily::Unconcentrated).unwrap()).unwrap();
            assert!(matches!(bad.diagnosis, Some(CgDiagnosis::Concentration { .. })));
            let nf = cg_check(&cg_instance(&mut rng, CgFamily::NonFree).unwrap()).unwrap();
            assert!(matches!(nf.diagnosis, Some(CgDiagnosis::Freeness { tor1 }) if tor1 > 0), "{:?}", nf);
        }
    }

    #[test]
    fn cg_rejects_out_of_range_support() {
        let s = Ring::new(RingSpec::new(2, 1, vec![1])).unwrap();
        let c = FreeChainComplex::new(&s, 0, vec![1, 1, 1], vec![Matrix::zeros(&s, 1, 1), Matrix::zeros(&s, 1, 1)]).unwrap();
        let inst = CgInstance { complex: c, q: 0, delta: 1, acting: s.clone(), action: vec![s.sigma(0)] };
        assert!(matches!(cg_check(&inst), Err(Error::DegreeRange(_))));
    }

    #[test]
    fn perturbed_selection_is_a_thread() {
        let mut s = sc(2, 1, 1, &[1, 2, 3], 2);
        s.perturbation = Some(Perturbation { extra: 3 });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (sys, canonical) = perturbed_system(&s, &mut rng);
        assert!(sys.is_thread(&canonical));
        let t = compact_select(&sys).unwrap().unwrap();
        assert!(sys.is_thread(&t));
    }
}
