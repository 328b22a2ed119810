//! Truncated simplicial W_n-modules, normalized chains, the inverse
//! Dold–Kan functor and square-zero simplicial rings.

use crate::complex::{ModComplex, ModSpace};
use crate::error::{Error, Result};
use crate::linalg::{Subquotient, Submodule, ZMat};
use crate::resolution::GradedAlgebra;
use crate::zmod::Zmod;

/// A monotone map [a] → [b], stored as its values.
pub type Monotone = Vec<usize>;

/// Coface δ^i: [m-1] → [m] skipping i.
pub fn coface(m: usize, i: usize) -> Monotone {
    (0..m).map(|j| if j < i { j } else { j + 1 }).collect()
}

/// Codegeneracy σ^i: [m+1] → [m] hitting i twice.
pub fn codegeneracy(m: usize, i: usize) -> Monotone {
    (0..m + 2).map(|j| if j <= i { j } else { j - 1 }).collect()
}

/// Surjections [m] ↠ [k] for all k, in order of k then lexicographically.
pub fn surjections(m: usize) -> Vec<Monotone> {
    let mut out = Vec::new();
    for mask in 0..(1u32 << m) {
        let mut v = vec![0usize];
        for j in 0..m {
            let step = ((mask >> j) & 1) as usize;
            v.push(v[j] + step);
        }
        out.push(v);
    }
    out.sort_by(|a, b| a[m].cmp(&b[m]).then_with(|| a.cmp(b)));
    out
}

/// A simplicial W_n-module truncated at level `top`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialModule {
    pub zm: Zmod,
    pub levels: Vec<ModSpace>,
    /// `faces[m][i]`: X_m → X_{m-1}; `faces[0]` is empty.
    pub faces: Vec<Vec<ZMat>>,
    /// `degens[m][i]`: X_m → X_{m+1}, for m < top.
    pub degens: Vec<Vec<ZMat>>,
}

fn equal_mod(zm: Zmod, a: &ZMat, b: &ZMat, target: &ModSpace) -> bool {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return false;
    }
    let diff = a.sub(b);
    if diff.is_zero() {
        return true;
    }
    let rel = target.relations(zm);
    (0..diff.cols()).all(|j| rel.contains(&diff.col(j)))
}

impl SimplicialModule {
    pub fn new(zm: Zmod, levels: Vec<ModSpace>, faces: Vec<Vec<ZMat>>, degens: Vec<Vec<ZMat>>) -> Result<Self> {
        let x = SimplicialModule { zm, levels, faces, degens };
        x.validate()?;
        Ok(x)
    }

    pub fn top(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn dim(&self, m: usize) -> usize {
        self.levels[m].dim
    }

    fn face(&self, m: usize, i: usize) -> &ZMat {
        &self.faces[m][i]
    }

    fn degen(&self, m: usize, i: usize) -> &ZMat {
        &self.degens[m][i]
    }

    /// Shapes, well-definedness on relations and every simplicial identity.
    pub fn validate(&self) -> Result<()> {
        let zm = self.zm;
        let top = self.top();
        if self.levels.is_empty() || self.faces.len() != top + 1 || self.degens.len() != top {
            return Err(Error::Shape("need faces for levels 0..=D and degeneracies for 0..D".into()));
        }
        for m in 0..=top {
            let want = if m == 0 { 0 } else { m + 1 };
            if self.faces[m].len() != want {
                return Err(Error::Shape(format!("level {} needs {} faces", m, want)));
            }
            for f in &self.faces[m] {
                if f.rows() != self.dim(m - 1) || f.cols() != self.dim(m) {
                    return Err(Error::Shape(format!("face on level {} has the wrong shape", m)));
                }
                self.check_well_defined(f, m, m - 1)?;
            }
            if m < top {
                if self.degens[m].len() != m + 1 {
                    return Err(Error::Shape(format!("level {} needs {} degeneracies", m, m + 1)));
                }
                for s in &self.degens[m] {
                    if s.rows() != self.dim(m + 1) || s.cols() != self.dim(m) {
                        return Err(Error::Shape(format!("degeneracy on level {} has the wrong shape", m)));
                    }
                    self.check_well_defined(s, m, m + 1)?;
                }
            }
        }
        let fail = |what: String| Err(Error::SimplicialIdentity(what));
        // d_i d_j = d_{j-1} d_i, i < j
        for m in 2..=top {
            for j in 0..=m {
                for i in 0..j {
                    let l = self.face(m - 1, i).mul(self.face(m, j));
                    let r = self.face(m - 1, j - 1).mul(self.face(m, i));
                    if !equal_mod(zm, &l, &r, &self.levels[m - 2]) {
                        return fail(format!("d_{} d_{} ≠ d_{} d_{} on level {}", i, j, j - 1, i, m));
                    }
                }
            }
        }
        // s_i s_j = s_{j+1} s_i, i ≤ j
        for m in 0..top.saturating_sub(1) {
            for j in 0..=m {
                for i in 0..=j {
                    let l = self.degen(m + 1, i).mul(self.degen(m, j));
                    let r = self.degen(m + 1, j + 1).mul(self.degen(m, i));
                    if !equal_mod(zm, &l, &r, &self.levels[m + 2]) {
                        return fail(format!("s_{} s_{} ≠ s_{} s_{} on level {}", i, j, j + 1, i, m));
                    }
                }
            }
        }
        // mixed identities on s_j: X_m → X_{m+1}, then d_i: X_{m+1} → X_m
        for m in 0..top {
            for j in 0..=m {
                for i in 0..=m + 1 {
                    let l = self.face(m + 1, i).mul(self.degen(m, j));
                    let r = if i < j {
                        self.degen(m - 1, j - 1).mul(self.face(m, i))
                    } else if i == j || i == j + 1 {
                        ZMat::identity(zm, self.dim(m))
                    } else {
                        self.degen(m - 1, j).mul(self.face(m, i - 1))
                    };
                    if !equal_mod(zm, &l, &r, &self.levels[m]) {
                        return fail(format!("d_{} s_{} identity fails on level {}", i, j, m));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_well_defined(&self, f: &ZMat, from: usize, to: usize) -> Result<()> {
        let zm = self.zm;
        let rel_t = self.levels[to].relations(zm);
        for g in self.levels[from].relations(zm).gens() {
            if !rel_t.contains(&f.apply(&g)) {
                return Err(Error::SimplicialIdentity(format!("map {} → {} does not respect relations", from, to)));
            }
        }
        Ok(())
    }

    /// X(θ) for a monotone θ: [a] → [b], as a matrix X_b → X_a.
    pub fn operator(&self, theta: &[usize], b: usize) -> ZMat {
        let a = theta.len() - 1;
        if let Some(i) = (0..=b).find(|v| !theta.contains(v)) {
            let inner: Monotone = theta.iter().map(|&v| if v < i { v } else { v - 1 }).collect();
            return self.operator(&inner, b - 1).mul(self.face(b, i));
        }
        if let Some(j) = (0..a).find(|&j| theta[j] == theta[j + 1]) {
            let mut inner = theta.to_vec();
            inner.remove(j + 1);
            return self.degen(a - 1, j).mul(&self.operator(&inner, b));
        }
        ZMat::identity(self.zm, self.dim(b))
    }

    /// The Moore complex: X_m with Σ (-1)^i d_i.
    pub fn moore_complex(&self) -> Result<ModComplex> {
        let zm = self.zm;
        let diffs = (1..=self.top())
            .map(|m| {
                let mut acc = ZMat::zeros(zm, self.dim(m - 1), self.dim(m));
                for i in 0..=m {
                    let f = self.face(m, i);
                    acc = if i % 2 == 0 { acc.add(f) } else { acc.sub(f) };
                }
                acc
            })
            .collect();
        ModComplex::new(zm, 0, self.levels.clone(), diffs)
    }

    /// Levelwise direct sum.
    pub fn direct_sum(&self, other: &SimplicialModule) -> Result<SimplicialModule> {
        if self.zm != other.zm || self.top() != other.top() {
            return Err(Error::Shape("direct sum needs equal truncation and coefficients".into()));
        }
        let zm = self.zm;
        let levels = self.levels.iter().zip(&other.levels).map(|(a, b)| ModSpace::direct_sum(&[a, b])).collect();
        let pair = |x: &Vec<ZMat>, y: &Vec<ZMat>| -> Vec<ZMat> { x.iter().zip(y).map(|(a, b)| ZMat::block_diag(zm, &[a.clone(), b.clone()])).collect() };
        let faces = self.faces.iter().zip(&other.faces).map(|(x, y)| pair(x, y)).collect();
        let degens = self.degens.iter().zip(&other.degens).map(|(x, y)| pair(x, y)).collect();
        Ok(SimplicialModule { zm, levels, faces, degens })
    }

    /// The constant simplicial module on a space.
    pub fn constant(zm: Zmod, space: ModSpace, top: usize) -> SimplicialModule {
        let d = space.dim;
        let id = ZMat::identity(zm, d);
        SimplicialModule {
            zm,
            levels: vec![space; top + 1],
            faces: (0..=top).map(|m| if m == 0 { Vec::new() } else { vec![id.clone(); m + 1] }).collect(),
            degens: (0..top).map(|m| vec![id.clone(); m + 1]).collect(),
        }
    }
}

/// A levelwise map commuting with faces and degeneracies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialMap {
    pub maps: Vec<ZMat>,
}

impl SimplicialMap {
    pub fn validate(&self, src: &SimplicialModule, tgt: &SimplicialModule) -> Result<()> {
        let zm = src.zm;
        if self.maps.len() != src.levels.len() || src.top() != tgt.top() {
            return Err(Error::Shape("one matrix per level".into()));
        }
        for m in 0..=src.top() {
            let f = &self.maps[m];
            if f.rows() != tgt.dim(m) || f.cols() != src.dim(m) {
                return Err(Error::Shape(format!("map on level {} has the wrong shape", m)));
            }
            for i in 0..src.faces[m].len() {
                let l = tgt.face(m, i).mul(f);
                let r = self.maps[m - 1].mul(src.face(m, i));
                if !equal_mod(zm, &l, &r, &tgt.levels[m - 1]) {
                    return Err(Error::SimplicialIdentity(format!("map does not commute with d_{} on level {}", i, m)));
                }
            }
            if m < src.top() {
                for i in 0..=m {
                    let l = tgt.degen(m, i).mul(f);
                    let r = self.maps[m + 1].mul(src.degen(m, i));
                    if !equal_mod(zm, &l, &r, &tgt.levels[m + 1]) {
                        return Err(Error::SimplicialIdentity(format!("map does not commute with s_{} on level {}", i, m)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// N(X) with the embedding of each N_m into X_m.
#[derive(Clone, Debug)]
pub struct NormalizedChains {
    pub complex: ModComplex,
    /// Columns: the chosen generators of N_m inside X_m.
    pub inclusions: Vec<ZMat>,
    kernels: Vec<Submodule>,
}

impl NormalizedChains {
    /// Coordinates in N_m of an element of X_m lying in N_m.
    pub fn coordinates(&self, m: usize, x: &[u64]) -> Option<Vec<u64>> {
        self.kernels[m].coefficients(x)
    }
}

/// N_m = ∩_{i ≥ 1} ker d_i with differential d_0.
pub fn normalized_chains(x: &SimplicialModule) -> Result<NormalizedChains> {
    x.validate()?;
    let zm = x.zm;
    let mut kernels = Vec::new();
    for m in 0..=x.top() {
        let mut k = Submodule::full(zm, x.dim(m));
        if m > 0 {
            let stacked = (1..=m).fold(ZMat::zeros(zm, 0, x.dim(m)), |acc, i| acc.vstack(x.face(m, i)));
            let caps: Vec<u32> = (1..=m).flat_map(|_| x.levels[m - 1].caps.iter().copied()).collect();
            let mut rel = ZMat::zeros(zm, stacked.rows(), 0);
            for g in &x.levels[m - 1].rel {
                for i in 0..m {
                    let mut v = vec![0u64; stacked.rows()];
                    v[i * x.dim(m - 1)..(i + 1) * x.dim(m - 1)].copy_from_slice(g);
                    rel = rel.hstack(&ZMat::from_cols(zm, stacked.rows(), &[v]));
                }
            }
            k = Submodule::from_gens(zm, x.dim(m), crate::linalg::preimage(&stacked, &caps, &rel));
        }
        kernels.push(k);
    }
    let mut terms = Vec::new();
    let mut inclusions = Vec::new();
    for (m, k) in kernels.iter().enumerate() {
        let gens = k.gens();
        let inc = ZMat::from_cols(zm, x.dim(m), &gens);
        // relations among generators: coefficient vectors landing in rel(X_m)
        let r = gens.len();
        let caps = &x.levels[m].caps;
        let relm = x.levels[m].rel_matrix(zm);
        let rel = crate::linalg::preimage(&inc, caps, &relm);
        let mut space = ModSpace::free(r, zm.n());
        space.rel = rel.into_iter().filter(|v| v.iter().any(|&c| c != 0)).collect();
        terms.push(space);
        inclusions.push(inc);
    }
    let mut diffs = Vec::new();
    for m in 1..=x.top() {
        let d0 = x.face(m, 0);
        let r_lo = inclusions[m - 1].cols();
        let mut d = ZMat::zeros(zm, r_lo, inclusions[m].cols());
        for j in 0..inclusions[m].cols() {
            let y = d0.apply(&inclusions[m].col(j));
            let c = coefficients_mod(&kernels[m - 1], &x.levels[m - 1], zm, &y)
                .ok_or_else(|| Error::SimplicialIdentity(format!("d_0 does not preserve normalized chains at level {}", m)))?;
            for (i, v) in c.into_iter().enumerate() {
                d.set(i, j, v);
            }
        }
        diffs.push(d);
    }
    let complex = ModComplex::new(zm, 0, terms, diffs)?;
    Ok(NormalizedChains { complex, inclusions, kernels })
}

/// Coefficients of y on the generators of `k`, allowing a correction by
/// relations of the ambient level.
fn coefficients_mod(k: &Submodule, level: &ModSpace, zm: Zmod, y: &[u64]) -> Option<Vec<u64>> {
    if let Some(c) = k.coefficients(y) {
        return Some(c);
    }
    let gens = k.gens();
    let mut cols = gens.clone();
    cols.extend(level.relations(zm).gens());
    let a = ZMat::from_cols(zm, y.len(), &cols);
    let sol = crate::linalg::solve(&a, y)?;
    Some(sol[..gens.len()].to_vec())
}

/// Γ(C) for a complex C concentrated in degrees 0..=top:
/// Γ(C)_m = ⊕_{σ: [m] ↠ [k]} C_k.
pub fn dk_inverse(c: &ModComplex, top: usize) -> Result<SimplicialModule> {
    if c.lo() < 0 {
        return Err(Error::DegreeRange(format!("complex starts in degree {}", c.lo())));
    }
    if c.hi() > top as i64 {
        return Err(Error::DegreeRange(format!("complex reaches degree {} above truncation {}", c.hi(), top)));
    }
    let zm = c.zm();
    let summands: Vec<Vec<Monotone>> = (0..=top).map(surjections).collect();
    let offsets: Vec<Vec<usize>> = summands
        .iter()
        .map(|ss| {
            let mut off = Vec::with_capacity(ss.len() + 1);
            let mut acc = 0;
            for s in ss {
                off.push(acc);
                acc += c.dim(*s.last().expect("nonempty") as i64);
            }
            off.push(acc);
            off
        })
        .collect();
    let levels: Vec<ModSpace> = summands
        .iter()
        .map(|ss| {
            let parts: Vec<ModSpace> = ss.iter().map(|s| c.term(*s.last().expect("nonempty") as i64)).collect();
            let refs: Vec<&ModSpace> = parts.iter().collect();
            ModSpace::direct_sum(&refs)
        })
        .collect();
    // X(θ) for θ: [a] → [b]
    let apply = |theta: &[usize], a: usize, b: usize| -> ZMat {
        let mut out = ZMat::zeros(zm, *offsets[a].last().expect("nonempty"), *offsets[b].last().expect("nonempty"));
        for (si, sigma) in summands[b].iter().enumerate() {
            let k = *sigma.last().expect("nonempty");
            let comp: Vec<usize> = theta.iter().map(|&t| sigma[t]).collect();
            let mut image: Vec<usize> = comp.clone();
            image.dedup();
            let tau: Monotone = comp.iter().map(|v| image.iter().position(|w| w == v).expect("in image")).collect();
            let j = image.len() - 1;
            let ti = summands[a].iter().position(|s| *s == tau).expect("surjection listed");
            let block = if j == k {
                ZMat::identity(zm, c.dim(k as i64))
            } else if j + 1 == k && image.iter().copied().eq(1..=k) {
                c.d(k as i64)
            } else {
                continue;
            };
            out.set_block(offsets[a][ti], offsets[b][si], &block);
        }
        out
    };
    let faces = (0..=top).map(|m| if m == 0 { Vec::new() } else { (0..=m).map(|i| apply(&coface(m, i), m - 1, m)).collect() }).collect();
    let degens = (0..top).map(|m| (0..=m).map(|i| apply(&codegeneracy(m, i), m + 1, m)).collect()).collect();
    SimplicialModule::new(zm, levels, faces, degens)
}

/// Outcome of the N∘Γ round trip.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTrip {
    /// N_m(Γ C) is exactly the identity summand C_m, with the same differential.
    pub identity: bool,
    pub failure: Option<String>,
}

/// Checks N(Γ(C)) = C exactly: N_m is the coordinate block of the identity
/// surjection and d_0 restricts to the differential of C.
pub fn check_n_gamma(c: &ModComplex, top: usize) -> Result<RoundTrip> {
    let g = dk_inverse(c, top)?;
    let n = normalized_chains(&g)?;
    let zm = c.zm();
    for m in 0..=top {
        let summands = surjections(m);
        let id_pos = summands.iter().position(|s| s.iter().copied().eq(0..=m)).expect("identity surjection");
        let offset: usize = summands[..id_pos].iter().map(|s| c.dim(*s.last().expect("nonempty") as i64)).sum();
        let dm = c.dim(m as i64);
        let mut expected = ZMat::zeros(zm, g.dim(m), dm);
        for i in 0..dm {
            expected.set(offset + i, i, 1 % zm.modulus());
        }
        if n.inclusions[m] != expected {
            return Ok(RoundTrip { identity: false, failure: Some(format!("N_{} is not the identity summand", m)) });
        }
        if m > 0 && n.complex.d(m as i64) != c.d(m as i64) {
            return Ok(RoundTrip { identity: false, failure: Some(format!("differential differs in degree {}", m)) });
        }
    }
    Ok(RoundTrip { identity: true, failure: None })
}

/// The natural map Γ(N X) → X, x at σ ↦ X(σ)(x), with checks that it is
/// simplicial and bijective on every level.
pub fn gamma_n_iso(x: &SimplicialModule) -> Result<(SimplicialModule, SimplicialMap)> {
    let zm = x.zm;
    let n = normalized_chains(x)?;
    let g = dk_inverse(&n.complex, x.top())?;
    let mut maps = Vec::new();
    for m in 0..=x.top() {
        let mut f = ZMat::zeros(zm, x.dim(m), 0);
        for sigma in surjections(m) {
            let k = *sigma.last().expect("nonempty");
            f = f.hstack(&x.operator(&sigma, k).mul(&n.inclusions[k]));
        }
        maps.push(f);
    }
    let map = SimplicialMap { maps };
    map.validate(&g, x)?;
    for m in 0..=x.top() {
        let img = x.levels[m].relations(zm).with_gens((0..map.maps[m].cols()).map(|j| map.maps[m].col(j)));
        let full = x.dim(m) as u64 * zm.n() as u64;
        let src = g.levels[m].group(zm).order_log();
        let tgt = x.levels[m].group(zm).order_log();
        if img.order_log() != full || src != tgt {
            return Err(Error::Invalid(format!("Γ(N X) → X is not bijective on level {}", m)));
        }
    }
    Ok((g, map))
}

/// V[n]: Γ of the module placed in degree n.
pub fn eilenberg_maclane(zm: Zmod, v: ModSpace, n: usize, top: usize) -> Result<SimplicialModule> {
    let d = v.dim;
    let mut terms = vec![ModSpace::zero(); n + 1];
    terms[n] = v;
    let diffs = (1..=n).map(|k| ZMat::zeros(zm, 0, if k == n { d } else { 0 })).collect();
    let c = ModComplex::new(zm, 0, terms, diffs)?;
    dk_inverse(&c, top)
}

/// k ⊕ V with (a, v)(a', v') = (aa', av' + a'v) levelwise; coordinate 0 of
/// every level is the k summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareZeroRing {
    pub module: SimplicialModule,
    /// The underlying simplicial module k ⊕ V.
    pub total: SimplicialModule,
}

pub fn square_zero(v: &SimplicialModule) -> Result<SquareZeroRing> {
    v.validate()?;
    let k = SimplicialModule::constant(v.zm, ModSpace::free(1, v.zm.n()), v.top());
    let total = k.direct_sum(v)?;
    Ok(SquareZeroRing { module: v.clone(), total })
}

impl SquareZeroRing {
    /// Levelwise product on X_m = k ⊕ V_m.
    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let zm = self.total.zm;
        let mut out = vec![0u64; x.len()];
        out[0] = zm.mul(x[0], y[0]);
        for i in 1..x.len() {
            out[i] = zm.add(zm.mul(x[0], y[i]), zm.mul(y[0], x[i]));
        }
        out
    }

    /// Shuffle product N_a × N_b → N_{a+b} on ambient vectors.
    pub fn shuffle(&self, a: usize, x: &[u64], b: usize, y: &[u64]) -> Vec<u64> {
        let zm = self.total.zm;
        let n = a + b;
        let mut out = vec![0u64; self.total.dim(n)];
        for mu in crate::resolution::subsets(n, a) {
            let nu: Vec<usize> = (0..n).filter(|i| !mu.contains(i)).collect();
            // sign of the shuffle permutation (μ, ν)
            let inversions: usize = mu.iter().map(|&m| nu.iter().filter(|&&v| v < m).count()).sum();
            let mut xs = x.to_vec();
            for (step, &j) in nu.iter().enumerate() {
                xs = self.total.degen(a + step, j).apply(&xs);
            }
            let mut ys = y.to_vec();
            for (step, &j) in mu.iter().enumerate() {
                ys = self.total.degen(b + step, j).apply(&ys);
            }
            let prod = self.mul(&xs, &ys);
            for (o, v) in out.iter_mut().zip(prod) {
                *o = if inversions % 2 == 1 { zm.sub(*o, v) } else { zm.add(*o, v) };
            }
        }
        out
    }
}

/// π_* of a square-zero ring for degrees 0..=maxdeg with the product
/// induced by the shuffle map on normalized chains.
pub fn homotopy_ring(r: &SquareZeroRing, maxdeg: usize) -> Result<GradedAlgebra> {
    if maxdeg > r.total.top() {
        return Err(Error::DegreeRange(format!("maxdeg {} above truncation {}", maxdeg, r.total.top())));
    }
    let zm = r.total.zm;
    let n = normalized_chains(&r.total)?;
    let pieces: Vec<Subquotient> = (0..=maxdeg as i64).map(|i| n.complex.homology(i)).collect();
    let product = |a: usize, x: &[u64], b: usize, y: &[u64]| -> Vec<u64> {
        let xa = n.inclusions[a].apply(x);
        let yb = n.inclusions[b].apply(y);
        let z = r.shuffle(a, &xa, b, &yb);
        coefficients_mod(&n.kernels[a + b], &r.total.levels[a + b], zm, &z).unwrap_or_default()
    };
    GradedAlgebra::from_chain_product(zm, &pieces, &product)
}

/// A random complex of free W_n-modules in degrees 0..=top with ranks at
/// most `max_rank`: each differential lands in the kernel of the previous.
pub fn random_complex<R: rand::Rng>(zm: Zmod, top: usize, max_rank: usize, rng: &mut R) -> Result<ModComplex> {
    let ranks: Vec<usize> = (0..=top).map(|_| rng.gen_range(0..=max_rank)).collect();
    let mut diffs: Vec<ZMat> = Vec::new();
    for k in 1..=top {
        let d = if k == 1 {
            ZMat::from_vec(zm, ranks[0], ranks[1], (0..ranks[0] * ranks[1]).map(|_| rng.gen_range(0..zm.modulus())).collect())
        } else {
            let prev = &diffs[k - 2];
            let caps = vec![zm.n(); prev.rows()];
            let ker = crate::linalg::preimage(prev, &caps, &ZMat::zeros(zm, prev.rows(), 0));
            let kmat = ZMat::from_cols(zm, ranks[k - 1], &ker);
            let mix = ZMat::from_vec(zm, kmat.cols(), ranks[k], (0..kmat.cols() * ranks[k]).map(|_| rng.gen_range(0..zm.modulus())).collect());
            kmat.mul(&mix)
        };
        diffs.push(d);
    }
    ModComplex::free(zm, 0, &ranks, diffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zm(p: u64, n: u32) -> Zmod {
        Zmod::new(p, n).unwrap()
    }

    #[test]
    fn surjection_counts() {
        assert_eq!(surjections(3).len(), 8);
        assert_eq!(surjections(3).iter().filter(|s| s[3] == 1).count(), 3);
    }

    #[test]
    fn constant_module_normalizes_to_degree_zero() {
        let z = zm(3, 2);
        let x = SimplicialModule::constant(z, ModSpace::free(2, 2), 4);
        x.validate().unwrap();
        let n = normalized_chains(&x).unwrap();
        assert_eq!(n.complex.dim(0), 2);
        for m in 1..=4 {
            assert_eq!(n.complex.dim(m), 0);
        }
    }

    #[test]
    fn em_module_is_concentrated() {
        let z = zm(2, 1);
        for deg in 0..=3 {
            let x = eilenberg_maclane(z, ModSpace::free(1, 1), deg, 4).unwrap();
            for m in 0..=4usize {
                let expected = if m >= deg { crate::resolution::binom(m, deg) } else { 0 };
                assert_eq!(x.dim(m), expected);
            }
            let n = normalized_chains(&x).unwrap();
            for m in 0..=4i64 {
                assert_eq!(n.complex.dim(m), usize::from(m == deg as i64));
            }
            let moore = x.moore_complex().unwrap();
            for m in 0..=3i64 {
                assert_eq!(moore.homology(m).order_log(), u64::from(m == deg as i64));
            }
        }
    }

    #[test]
    fn round_trip_small_complex() {
        let z = zm(3, 2);
        let d1 = ZMat::from_i64(z, 1, 2, &[3, 1]);
        let d2 = ZMat::from_i64(z, 2, 1, &[1, -3]);
        let c = ModComplex::new(z, 0, vec![ModSpace::free(1, 2), ModSpace::free(2, 2), ModSpace::free(1, 2)], vec![d1, d2]).unwrap();
        let rt = check_n_gamma(&c, 4).unwrap();
        assert!(rt.identity, "{:?}", rt.failure);
        let g = dk_inverse(&c, 4).unwrap();
        let (_, iso) = gamma_n_iso(&g).unwrap();
        assert_eq!(iso.maps.len(), 5);
    }

    #[test]
    fn out_of_range_degrees() {
        let z = zm(2, 1);
        let c = eilenberg_maclane(z, ModSpace::free(1, 1), 2, 2).unwrap();
        let c = normalized_chains(&c).unwrap().complex;
        assert!(matches!(dk_inverse(&c, 1), Err(Error::DegreeRange(_))));
    }

    #[test]
    fn broken_identity_detected() {
        let z = zm(2, 1);
        let mut x = eilenberg_maclane(z, ModSpace::free(1, 1), 1, 3).unwrap();
        let f = x.faces[2][0].clone();
        x.faces[2][0] = f.add(&ZMat::from_cols(z, f.rows(), &vec![vec![1; f.rows()]; f.cols()]));
        assert!(matches!(x.validate(), Err(Error::SimplicialIdentity(_))));
    }

    #[test]
    fn random_round_trips_and_moore() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..6 {
            let z = zm(3, 2);
            let c = random_complex(z, 3, 2, &mut rng).unwrap();
            assert!(check_n_gamma(&c, 4).unwrap().identity);
            let x = dk_inverse(&c, 4).unwrap().direct_sum(&SimplicialModule::constant(z, ModSpace::with_caps(vec![1]), 4)).unwrap();
            gamma_n_iso(&x).unwrap();
            let n = normalized_chains(&x).unwrap().complex;
            let moore = x.moore_complex().unwrap();
            for m in 0..4 {
                assert_eq!(n.homology(m).group(), moore.homology(m).group());
            }
        }
    }

    #[test]
    fn dual_numbers() {
        let z = zm(5, 1);
        let v = SimplicialModule::constant(z, ModSpace::free(1, 1), 2);
        let r = square_zero(&v).unwrap();
        let pi = homotopy_ring(&r, 2).unwrap();
        assert_eq!(pi.degrees[0].len(), 2);
        assert!(pi.degrees[1].is_empty());
        // one generator is a unit, the other squares to zero
        let squares: Vec<Vec<u64>> = (0..2).map(|i| {
            let e: Vec<u64> = (0..2).map(|j| u64::from(i == j)).collect();
            pi.mul(0, &e, 0, &e).unwrap()
        }).collect();
        assert!(squares.iter().any(|s| s.iter().all(|&c| c == 0)));
        assert!(squares.iter().any(|s| s.iter().any(|&c| c != 0)));
    }

    #[test]
    fn suspended_square_zero() {
        let z = zm(3, 1);
        for n in 1..=3 {
            let v = eilenberg_maclane(z, ModSpace::free(1, 1), n, 2 * n).unwrap();
            let r = square_zero(&v).unwrap();
            let pi = homotopy_ring(&r, 2 * n).unwrap();
            assert_eq!(pi.degrees[n], vec![1]);
            let e = vec![1u64];
            assert!(pi.mul(n, &e, n, &e).unwrap().iter().all(|&c| c == 0));
            assert!(pi.is_graded_commutative());
        }
    }

    #[test]
    fn positive_degree_products_vanish() {
        let z = zm(2, 1);
        let k = |n| eilenberg_maclane(z, ModSpace::free(1, 1), n, 3).unwrap();
        let v = k(1).direct_sum(&k(2)).unwrap().direct_sum(&k(3)).unwrap();
        let r = square_zero(&v).unwrap();
        let pi = homotopy_ring(&r, 3).unwrap();
        assert_eq!(pi.degrees[3], vec![1]);
        assert_eq!(pi.mul(1, &[1], 2, &[1]).unwrap(), vec![0]);
        assert!(pi.is_associative());
    }
}
