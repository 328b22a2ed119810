//! Bounded chain complexes. Degrees are homological (the differential lowers
//! degree by one); cochain degree i is stored at homological degree -i.
//!
//! [`ModComplex`] is the workhorse: every term is a quotient
//! W_N^dim / (⊕ p^{caps_i} e_i + span(rel)), which covers free complexes,
//! finite coefficient modules and quotients by subcomplexes.
//! [`FreeChainComplex`] holds free complexes over a group ring W_n[Δ].

use crate::error::{Error, Result};
use crate::linalg::{preimage, AbelianGroup, GroupMap, Subquotient, Submodule, ZMat};
use crate::ring::{Matrix, Ring};
use crate::zmod::Zmod;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// W_N^dim modulo ⊕ p^{caps_i} e_i and the span of `rel`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModSpace {
    pub dim: usize,
    pub caps: Vec<u32>,
    pub rel: Vec<Vec<u64>>,
}

impl ModSpace {
    pub fn free(dim: usize, n: u32) -> Self {
        ModSpace { dim, caps: vec![n; dim], rel: Vec::new() }
    }

    pub fn with_caps(caps: Vec<u32>) -> Self {
        ModSpace { dim: caps.len(), caps, rel: Vec::new() }
    }

    pub fn zero() -> Self {
        ModSpace { dim: 0, caps: Vec::new(), rel: Vec::new() }
    }

    pub fn direct_sum(parts: &[&ModSpace]) -> Self {
        let dim = parts.iter().map(|s| s.dim).sum();
        let mut caps = Vec::with_capacity(dim);
        let mut rel = Vec::new();
        let mut off = 0;
        for s in parts {
            caps.extend_from_slice(&s.caps);
            for r in &s.rel {
                let mut v = vec![0; dim];
                v[off..off + s.dim].copy_from_slice(r);
                rel.push(v);
            }
            off += s.dim;
        }
        ModSpace { dim, caps, rel }
    }

    /// The relation submodule as a Howell basis.
    pub fn relations(&self, zm: Zmod) -> Submodule {
        Submodule::from_caps(zm, &self.caps).with_gens(self.rel.iter().cloned())
    }

    pub fn is_free(&self, n: u32) -> bool {
        self.rel.is_empty() && self.caps.iter().all(|&c| c >= n)
    }

    /// Relation generators as matrix columns.
    pub fn rel_matrix(&self, zm: Zmod) -> ZMat {
        ZMat::from_cols(zm, self.dim, &self.rel)
    }

    /// The module as an abstract group.
    pub fn group(&self, zm: Zmod) -> AbelianGroup {
        Subquotient::new(Submodule::full(zm, self.dim), &self.caps, &self.rel).group()
    }
}

/// Per-degree finite abelian groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GradedModule {
    pub groups: BTreeMap<i64, AbelianGroup>,
}

impl GradedModule {
    pub fn get(&self, h: i64) -> AbelianGroup {
        self.groups.get(&h).cloned().unwrap_or_default()
    }
    /// Number of cyclic factors of order p^level in each degree of `range`.
    pub fn free_ranks(&self, level: u32, range: std::ops::RangeInclusive<i64>) -> Vec<usize> {
        range.map(|h| self.get(h).free_rank(level)).collect()
    }
    /// Minimal generator counts (dimensions over k when level 1).
    pub fn num_cyclic(&self, range: std::ops::RangeInclusive<i64>) -> Vec<usize> {
        range.map(|h| self.get(h).num_cyclic()).collect()
    }
}

/// Membership in the relation module of a term, with a fast path for
/// terms whose only relations are the caps.
struct RelCheck<'a> {
    zm: Zmod,
    space: &'a ModSpace,
    sub: Option<Submodule>,
}

impl<'a> RelCheck<'a> {
    fn new(zm: Zmod, space: &'a ModSpace) -> Self {
        let sub = if space.rel.is_empty() { None } else { Some(space.relations(zm)) };
        RelCheck { zm, space, sub }
    }

    fn contains(&self, v: &[u64]) -> bool {
        match &self.sub {
            Some(s) => s.contains(v),
            None => v.iter().zip(&self.space.caps).all(|(&x, &c)| x % self.zm.p_pow_int(c.min(self.zm.n())) == 0),
        }
    }
}

/// Images under `f` of the relation generators of `src` (caps and extra relations).
fn relation_images<'a>(zm: Zmod, f: &'a ZMat, src: &'a ModSpace) -> impl Iterator<Item = Vec<u64>> + 'a {
    let n = zm.n();
    let caps = src.caps.iter().enumerate().filter(move |(_, &c)| c < n).map(move |(j, &c)| {
        let s = zm.p_pow(c);
        f.col(j).into_iter().map(|x| zm.mul(x, s)).collect()
    });
    caps.chain(src.rel.iter().map(move |r| f.apply(r)))
}

/// Bounded complex of quotient modules over W_N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModComplex {
    zm: Zmod,
    lo: i64,
    terms: Vec<ModSpace>,
    /// `diffs[k]` is d: term(lo+k) → term(lo+k-1); `diffs[0]` has zero rows.
    diffs: Vec<ZMat>,
}

impl ModComplex {
    /// Builds and validates a complex. `diffs[k]` maps degree lo+k to lo+k-1;
    /// `diffs[0]` may be omitted by passing one fewer matrix than terms.
    pub fn new(zm: Zmod, lo: i64, terms: Vec<ModSpace>, mut diffs: Vec<ZMat>) -> Result<Self> {
        if terms.is_empty() {
            return Ok(ModComplex { zm, lo, terms, diffs: Vec::new() });
        }
        if diffs.len() + 1 == terms.len() {
            diffs.insert(0, ZMat::zeros(zm, 0, terms[0].dim));
        }
        if diffs.len() != terms.len() {
            return Err(Error::Shape(format!("{} terms but {} differentials", terms.len(), diffs.len())));
        }
        for (k, d) in diffs.iter().enumerate() {
            let rows = if k == 0 { 0 } else { terms[k - 1].dim };
            if d.rows() != rows || d.cols() != terms[k].dim {
                return Err(Error::Shape(format!(
                    "differential at degree {} is {}x{}, expected {}x{}",
                    lo + k as i64,
                    d.rows(),
                    d.cols(),
                    rows,
                    terms[k].dim
                )));
            }
        }
        for t in &terms {
            if t.caps.len() != t.dim || t.rel.iter().any(|r| r.len() != t.dim) {
                return Err(Error::Shape("term relations do not match its dimension".into()));
            }
        }
        let c = ModComplex { zm, lo, terms, diffs };
        c.validate()?;
        Ok(c)
    }

    /// Skips [`ModComplex::validate`] for constructions that are complexes
    /// by design; shapes are still checked in debug builds.
    pub(crate) fn new_unchecked(zm: Zmod, lo: i64, terms: Vec<ModSpace>, diffs: Vec<ZMat>) -> Self {
        debug_assert_eq!(diffs.len() + 1, terms.len().max(1));
        let mut diffs = diffs;
        if !terms.is_empty() {
            diffs.insert(0, ZMat::zeros(zm, 0, terms[0].dim));
        }
        debug_assert!(diffs.iter().enumerate().skip(1).all(|(k, d)| d.rows() == terms[k - 1].dim && d.cols() == terms[k].dim));
        ModComplex { zm, lo, terms, diffs }
    }

    /// Free complex from W_N matrices (`diffs[k]`: degree lo+k+1 → lo+k).
    pub fn free(zm: Zmod, lo: i64, ranks: &[usize], upper_diffs: Vec<ZMat>) -> Result<Self> {
        let terms = ranks.iter().map(|&r| ModSpace::free(r, zm.n())).collect();
        ModComplex::new(zm, lo, terms, upper_diffs)
    }

    pub fn zero(zm: Zmod) -> Self {
        ModComplex { zm, lo: 0, terms: Vec::new(), diffs: Vec::new() }
    }

    pub fn zm(&self) -> Zmod {
        self.zm
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> i64 {
        self.lo + self.terms.len() as i64 - 1
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn idx(&self, h: i64) -> Option<usize> {
        if h < self.lo || h > self.hi() {
            None
        } else {
            Some((h - self.lo) as usize)
        }
    }

    pub fn term(&self, h: i64) -> ModSpace {
        self.idx(h).map(|k| self.terms[k].clone()).unwrap_or_else(ModSpace::zero)
    }

    pub fn term_ref(&self, h: i64) -> Option<&ModSpace> {
        self.idx(h).map(|k| &self.terms[k])
    }

    pub fn dim(&self, h: i64) -> usize {
        self.idx(h).map_or(0, |k| self.terms[k].dim)
    }

    /// d: degree h → h-1 (zero matrix outside the range).
    pub fn d(&self, h: i64) -> ZMat {
        match self.idx(h) {
            Some(k) if k > 0 => self.diffs[k].clone(),
            _ => ZMat::zeros(self.zm, self.dim(h - 1), self.dim(h)),
        }
    }

    pub fn d_ref(&self, h: i64) -> Option<&ZMat> {
        match self.idx(h) {
            Some(k) if k > 0 => Some(&self.diffs[k]),
            _ => None,
        }
    }

    /// Checks that d preserves relations and d∘d lands in relations.
    pub fn validate(&self) -> Result<()> {
        for h in self.lo..=self.hi() {
            let Some(d) = self.d_ref(h) else { continue };
            let target = self.term(h - 1);
            let check = RelCheck::new(self.zm, &target);
            let src = self.term(h);
            if relation_images(self.zm, d, &src).any(|v| !check.contains(&v)) {
                return Err(Error::NotAComplex { degree: h });
            }
            if let Some(d2) = self.d_ref(h - 1) {
                let dd = d2.mul(d);
                let t2 = self.term(h - 2);
                let check2 = RelCheck::new(self.zm, &t2);
                if (0..dd.cols()).any(|j| !check2.contains(&dd.col(j))) {
                    return Err(Error::NotAComplex { degree: h });
                }
            }
        }
        Ok(())
    }

    /// Cycles at degree h: vectors whose boundary is a relation.
    pub fn cycles(&self, h: i64) -> Submodule {
        let dim = self.dim(h);
        if dim == 0 {
            return Submodule::zero(self.zm, 0);
        }
        match self.d_ref(h) {
            Some(d) if d.rows() > 0 => {
                let t = self.term(h - 1);
                if t.rel.is_empty() {
                    return Submodule::from_gens(self.zm, dim, preimage(d, &t.caps, &t.rel_matrix(self.zm)));
                }
                let rel = t.relations(self.zm);
                if rel.order_log() == t.dim as u64 * self.zm.n() as u64 {
                    return Submodule::full(self.zm, dim);
                }
                let g = ZMat::from_cols(self.zm, t.dim, &rel.gens());
                Submodule::from_gens(self.zm, dim, preimage(d, &t.caps, &g))
            }
            _ => Submodule::full(self.zm, dim),
        }
    }

    /// Boundary generators at degree h (excluding the relations).
    pub fn boundary_gens(&self, h: i64) -> Vec<Vec<u64>> {
        match self.d_ref(h + 1) {
            Some(d) => (0..d.cols()).map(|j| d.col(j)).filter(|c| c.iter().any(|&x| x != 0)).collect(),
            None => Vec::new(),
        }
    }

    /// H_h as a subquotient with coordinates.
    pub fn homology(&self, h: i64) -> Subquotient {
        let t = self.term(h);
        let z = self.cycles(h);
        let mut gens = t.rel.clone();
        gens.extend(self.boundary_gens(h));
        Subquotient::new(z, &t.caps, &gens)
    }

    pub fn homology_groups(&self) -> GradedModule {
        let mut groups = BTreeMap::new();
        for h in self.lo..=self.hi() {
            groups.insert(h, self.homology(h).group());
        }
        GradedModule { groups }
    }

    /// C[k]_h = C_{h-k} with differential (-1)^k d.
    pub fn shift(&self, k: i64) -> ModComplex {
        let diffs = self
            .diffs
            .iter()
            .map(|d| if k.rem_euclid(2) == 1 { d.neg() } else { d.clone() })
            .collect();
        ModComplex { zm: self.zm, lo: self.lo + k, terms: self.terms.clone(), diffs }
    }

    /// Truncation τ_{≤n}: drops degrees above n and replaces C_n by C_n/B_n.
    pub fn truncate_above(&self, n: i64) -> ModComplex {
        if n < self.lo {
            return ModComplex::zero(self.zm);
        }
        if n >= self.hi() {
            return self.clone();
        }
        let keep = (n - self.lo + 1) as usize;
        let mut terms: Vec<ModSpace> = self.terms[..keep].to_vec();
        let diffs: Vec<ZMat> = self.diffs[..keep].to_vec();
        let top = terms.last_mut().expect("nonempty");
        top.rel.extend(self.boundary_gens(n));
        ModComplex { zm: self.zm, lo: self.lo, terms, diffs }
    }

    /// Truncation τ_{≥n}: drops degrees below n and replaces C_n by the
    /// cycle module Z_n, presented on its Howell generators.
    pub fn truncate_below(&self, n: i64) -> ModComplex {
        if n > self.hi() {
            return ModComplex::zero(self.zm);
        }
        if n <= self.lo {
            return self.clone();
        }
        let zm = self.zm;
        let z = self.cycles(n);
        let zmat = z.gen_matrix();
        let t = self.term(n);
        let m = zmat.cols();
        let rel = preimage(&zmat, &t.caps, &t.rel_matrix(zm));
        let bottom = ModSpace { dim: m, caps: vec![zm.n(); m], rel };
        let start = (n - self.lo) as usize;
        let mut terms = vec![bottom];
        terms.extend(self.terms[start + 1..].iter().cloned());
        let mut diffs = vec![ZMat::zeros(zm, 0, m)];
        if start + 1 < self.terms.len() {
            let d = &self.diffs[start + 1];
            let mut nd = ZMat::zeros(zm, m, d.cols());
            for j in 0..d.cols() {
                let coeffs = z.coefficients(&d.col(j)).expect("boundaries are cycles");
                for (i, c) in coeffs.into_iter().enumerate() {
                    nd.set(i, j, c);
                }
            }
            diffs.push(nd);
            diffs.extend(self.diffs[start + 2..].iter().cloned());
        }
        ModComplex { zm, lo: n, terms, diffs }
    }

    /// Direct sum of complexes over the same ring.
    pub fn direct_sum(parts: &[&ModComplex]) -> Result<ModComplex> {
        let nonempty: Vec<&&ModComplex> = parts.iter().filter(|c| !c.is_empty()).collect();
        let Some(first) = parts.first() else { return Err(Error::Invalid("empty direct sum".into())) };
        let zm = first.zm;
        if nonempty.is_empty() {
            return Ok(ModComplex::zero(zm));
        }
        let lo = nonempty.iter().map(|c| c.lo).min().expect("nonempty");
        let hi = nonempty.iter().map(|c| c.hi()).max().expect("nonempty");
        let mut terms = Vec::new();
        let mut diffs = Vec::new();
        for h in lo..=hi {
            let ts: Vec<ModSpace> = parts.iter().map(|c| c.term(h)).collect();
            let refs: Vec<&ModSpace> = ts.iter().collect();
            terms.push(ModSpace::direct_sum(&refs));
            let blocks: Vec<ZMat> = parts.iter().map(|c| c.d(h)).collect();
            let d = if h == lo {
                ZMat::zeros(zm, 0, terms.last().expect("term").dim)
            } else {
                ZMat::block_diag(zm, &blocks)
            };
            diffs.push(d);
        }
        ModComplex::new(zm, lo, terms, diffs)
    }
}

/// Chain map between [`ModComplex`]es, one matrix per degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModChainMap {
    pub maps: BTreeMap<i64, ZMat>,
}

impl ModChainMap {
    pub fn at(&self, h: i64, source: &ModComplex, target: &ModComplex) -> ZMat {
        self.maps
            .get(&h)
            .cloned()
            .unwrap_or_else(|| ZMat::zeros(source.zm, target.dim(h), source.dim(h)))
    }

    /// Checks shapes, that relations go to relations, and that
    /// d f - f d lands in the target relations.
    pub fn validate(&self, source: &ModComplex, target: &ModComplex) -> Result<()> {
        let zm = source.zm;
        let lo = source.lo.min(target.lo);
        let hi = source.hi().max(target.hi());
        for h in lo..=hi {
            let f = self.at(h, source, target);
            if f.rows() != target.dim(h) || f.cols() != source.dim(h) {
                return Err(Error::Shape(format!("chain map shape at degree {}", h)));
            }
            let tterm = target.term(h);
            let trel = RelCheck::new(zm, &tterm);
            if relation_images(zm, &f, &source.term(h)).any(|v| !trel.contains(&v)) {
                return Err(Error::NotAChainMap { degree: h });
            }
            if source.dim(h) == 0 || target.dim(h - 1) == 0 {
                continue;
            }
            let lhs = target.d(h).mul(&f);
            let rhs = self.at(h - 1, source, target).mul(&source.d(h));
            let diff = lhs.sub(&rhs);
            let tt = target.term(h - 1);
            let t = RelCheck::new(zm, &tt);
            if (0..diff.cols()).any(|j| !t.contains(&diff.col(j))) {
                return Err(Error::NotAChainMap { degree: h });
            }
        }
        Ok(())
    }

    pub fn compose(&self, after: &ModChainMap) -> ModChainMap {
        let mut maps = BTreeMap::new();
        for (h, f) in &self.maps {
            if let Some(g) = after.maps.get(h) {
                maps.insert(*h, g.mul(f));
            }
        }
        ModChainMap { maps }
    }
}

/// Map induced on homology at degree h between given subquotients.
pub fn induced_map(f: &ZMat, hs: &Subquotient, ht: &Subquotient) -> Result<GroupMap> {
    let mut columns = Vec::new();
    for rep in hs.reps() {
        let y = f.apply(&rep);
        let c = ht.coords(&y).ok_or(Error::NotAChainMap { degree: 0 })?;
        columns.push(c);
    }
    Ok(GroupMap { source: hs.exponents(), target: ht.exponents(), columns })
}

/// cone(f)_h = A_{h-1} ⊕ B_h with d(a, b) = (-da, db + f(a)).
pub fn cone(f: &ModChainMap, a: &ModComplex, b: &ModComplex) -> Result<ModComplex> {
    let zm = a.zm;
    if a.zm != b.zm {
        return Err(Error::RingMismatch("cone".into()));
    }
    let lo = if a.is_empty() { b.lo } else if b.is_empty() { a.lo + 1 } else { (a.lo + 1).min(b.lo) };
    let hi = if a.is_empty() { b.hi() } else if b.is_empty() { a.hi() + 1 } else { (a.hi() + 1).max(b.hi()) };
    if a.is_empty() && b.is_empty() {
        return Ok(ModComplex::zero(zm));
    }
    let mut terms = Vec::new();
    let mut diffs = Vec::new();
    for h in lo..=hi {
        let ta = a.term(h - 1);
        let tb = b.term(h);
        terms.push(ModSpace::direct_sum(&[&ta, &tb]));
        let (ra, rb) = (a.dim(h - 2), b.dim(h - 1));
        let mut d = ZMat::zeros(zm, ra + rb, ta.dim + tb.dim);
        if h > lo {
            d.set_block(0, 0, &a.d(h - 1).neg());
            d.set_block(ra, 0, &f.at(h - 1, a, b));
            d.set_block(ra, ta.dim, &b.d(h));
        } else {
            d = ZMat::zeros(zm, 0, ta.dim + tb.dim);
        }
        diffs.push(d);
    }
    ModComplex::new(zm, lo, terms, diffs)
}

/// hofib(f) = cone(f)[-1]: A_h ⊕ B_{h+1} with d(a, b) = (da, -db - f(a)).
pub fn hofib(f: &ModChainMap, a: &ModComplex, b: &ModComplex) -> Result<ModComplex> {
    Ok(cone(f, a, b)?.shift(-1))
}

/// One spot of a long exact sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessSpot {
    pub label: String,
    pub composite_zero: bool,
    pub image_log: u64,
    pub kernel_log: u64,
    pub exact: bool,
}

/// Checks exactness of a chain of group maps at each interior group.
pub fn check_exact(zm: Zmod, maps: &[(String, GroupMap)]) -> Vec<ExactnessSpot> {
    let mut out = Vec::new();
    for w in maps.windows(2) {
        let (f, g) = (&w[0].1, &w[1].1);
        let comp = f.then(zm, g);
        let composite_zero = comp.is_zero(zm);
        let image_log = f.image_order_log(zm);
        let kernel_log = g.kernel_order_log(zm);
        out.push(ExactnessSpot {
            label: w[1].0.clone(),
            composite_zero,
            image_log,
            kernel_log,
            exact: composite_zero && image_log == kernel_log,
        });
    }
    out
}

/// Long exact sequence H(A) → H(B) → H(cone) → H(A)[-1] for degrees in
/// `window` (inclusive, descending traversal). Each complex's homology is
/// trusted only in its own valid range.
pub fn cone_les(
    f: &ModChainMap,
    a: &ModComplex,
    b: &ModComplex,
    c: &ModComplex,
    window: (i64, i64),
) -> Result<Vec<ExactnessSpot>> {
    let zm = a.zm;
    let (lo, hi) = window;
    let mut seq: Vec<(String, GroupMap)> = Vec::new();
    for h in (lo..=hi).rev() {
        let ha = a.homology(h);
        let hb = b.homology(h);
        let hc = c.homology(h);
        let fa = induced_map(&f.at(h, a, b), &ha, &hb)?;
        // inclusion B_h → cone_h = A_{h-1} ⊕ B_h
        let inc = {
            let mut m = ZMat::zeros(zm, a.dim(h - 1) + b.dim(h), b.dim(h));
            m.set_block(a.dim(h - 1), 0, &ZMat::identity(zm, b.dim(h)));
            m
        };
        let ib = induced_map(&inc, &hb, &hc)?;
        let proj = {
            let mut m = ZMat::zeros(zm, a.dim(h - 1), a.dim(h - 1) + b.dim(h));
            m.set_block(0, 0, &ZMat::identity(zm, a.dim(h - 1)));
            m
        };
        let ha1 = a.homology(h - 1);
        let conn = induced_map(&proj, &hc, &ha1)?;
        seq.push((format!("H_{}(A)", h), fa));
        seq.push((format!("H_{}(B)", h), ib));
        seq.push((format!("H_{}(cone)", h), conn));
    }
    Ok(check_exact(zm, &seq))
}

/// Bounded complex of free modules over W_n[Δ].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeChainComplex {
    ring: Ring,
    lo: i64,
    ranks: Vec<usize>,
    /// `diffs[k]`: degree lo+k+1 → lo+k.
    diffs: Vec<Matrix>,
}

impl FreeChainComplex {
    /// Builds and validates; `diffs[k]` maps degree lo+k+1 to lo+k.
    pub fn new(ring: &Ring, lo: i64, ranks: Vec<usize>, diffs: Vec<Matrix>) -> Result<Self> {
        if !ranks.is_empty() && diffs.len() + 1 != ranks.len() {
            return Err(Error::Shape(format!("{} ranks need {} differentials", ranks.len(), ranks.len() - 1)));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.ring() != ring {
                return Err(Error::RingMismatch("differential over another ring".into()));
            }
            if d.rows() != ranks[k] || d.cols() != ranks[k + 1] {
                return Err(Error::Shape(format!("differential at degree {}", lo + k as i64 + 1)));
            }
        }
        let c = FreeChainComplex { ring: ring.clone(), lo, ranks, diffs };
        c.validate()?;
        Ok(c)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> i64 {
        self.lo + self.ranks.len() as i64 - 1
    }
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }
    pub fn rank(&self, h: i64) -> usize {
        if h < self.lo || h > self.hi() {
            0
        } else {
            self.ranks[(h - self.lo) as usize]
        }
    }

    /// d: degree h → h-1.
    pub fn d(&self, h: i64) -> Matrix {
        if h > self.lo && h <= self.hi() {
            self.diffs[(h - self.lo - 1) as usize].clone()
        } else {
            Matrix::zeros(&self.ring, self.rank(h - 1), self.rank(h))
        }
    }

    /// Confirms d∘d = 0, reporting the first failing degree.
    pub fn validate(&self) -> Result<()> {
        for h in (self.lo + 2)..=self.hi() {
            let dd = self.d(h - 1).mul(&self.d(h))?;
            if !dd.is_zero() {
                return Err(Error::NotAComplex { degree: h });
            }
        }
        Ok(())
    }

    /// Restriction of scalars to W_n (each entry by its regular representation).
    pub fn restrict_scalars(&self) -> ModComplex {
        let zm = self.ring.zm();
        let g = self.ring.group_order();
        let ranks: Vec<usize> = self.ranks.iter().map(|r| r * g).collect();
        let diffs = self.diffs.iter().map(|d| d.expand()).collect();
        ModComplex::free(zm, self.lo, &ranks, diffs).expect("expansion preserves d∘d = 0")
    }

    /// Base change along the augmentation W_n[Δ] → W_n.
    pub fn base_change_augment(&self) -> ModComplex {
        let zm = self.ring.zm();
        let diffs = self.diffs.iter().map(|d| d.augment()).collect();
        ModComplex::free(zm, self.lo, &self.ranks, diffs).expect("ring maps preserve d∘d = 0")
    }

    /// The underlying W_n complex when Δ is trivial.
    pub fn to_mod_complex(&self) -> Result<ModComplex> {
        if !self.ring.is_trivial_group() {
            return Err(Error::NontrivialGroup);
        }
        Ok(self.restrict_scalars())
    }

    /// Homology over W_n (requires trivial Δ).
    pub fn homology(&self) -> Result<GradedModule> {
        Ok(self.to_mod_complex()?.homology_groups())
    }

    /// C[k]_h = C_{h-k} with differential (-1)^k d.
    pub fn shift(&self, k: i64) -> FreeChainComplex {
        let diffs = self.diffs.iter().map(|d| if k.rem_euclid(2) == 1 { d.neg() } else { d.clone() }).collect();
        FreeChainComplex { ring: self.ring.clone(), lo: self.lo + k, ranks: self.ranks.clone(), diffs }
    }

    /// τ_{≤n} (needs trivial Δ; the top term becomes a quotient module).
    pub fn truncate_above(&self, n: i64) -> Result<ModComplex> {
        Ok(self.to_mod_complex()?.truncate_above(n))
    }

    /// τ_{≥n} (needs trivial Δ; the bottom term becomes the cycle module).
    pub fn truncate_below(&self, n: i64) -> Result<ModComplex> {
        Ok(self.to_mod_complex()?.truncate_below(n))
    }

    /// Tensor product with the Koszul sign d(x⊗y) = dx⊗y + (-1)^{|x|} x⊗dy.
    /// Summands of degree h are ordered by the degree of the left factor.
    pub fn tensor(&self, other: &FreeChainComplex) -> Result<FreeChainComplex> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch("tensor".into()));
        }
        let ring = &self.ring;
        let lo = self.lo + other.lo;
        let hi = self.hi() + other.hi();
        let summands = |h: i64| -> Vec<(i64, usize, usize)> {
            // (i, offset, size)
            let mut out = Vec::new();
            let mut off = 0;
            for i in self.lo..=self.hi() {
                let j = h - i;
                let sz = self.rank(i) * other.rank(j);
                if sz > 0 {
                    out.push((i, off, sz));
                    off += sz;
                }
            }
            out
        };
        let mut ranks = Vec::new();
        for h in lo..=hi {
            ranks.push(summands(h).iter().map(|s| s.2).sum());
        }
        let mut diffs = Vec::new();
        for h in (lo + 1)..=hi {
            let src = summands(h);
            let tgt = summands(h - 1);
            let mut d = Matrix::zeros(ring, ranks[(h - 1 - lo) as usize], ranks[(h - lo) as usize]);
            for &(i, off, _) in &src {
                let j = h - i;
                // dx ⊗ y lands in summand i-1
                if let Some(&(_, toff, _)) = tgt.iter().find(|t| t.0 == i - 1) {
                    let blk = self.d(i).kron(&Matrix::identity(ring, other.rank(j)));
                    d.set_block(toff, off, &blk);
                }
                // (-1)^i x ⊗ dy lands in summand i
                if let Some(&(_, toff, _)) = tgt.iter().find(|t| t.0 == i) {
                    let mut blk = Matrix::identity(ring, self.rank(i)).kron(&other.d(j));
                    if i.rem_euclid(2) == 1 {
                        blk = blk.neg();
                    }
                    d.set_block(toff, off, &blk);
                }
            }
            diffs.push(d);
        }
        FreeChainComplex::new(ring, lo, ranks, diffs)
    }

    /// The ring itself in degree 0.
    pub fn unit(ring: &Ring) -> FreeChainComplex {
        FreeChainComplex { ring: ring.clone(), lo: 0, ranks: vec![1], diffs: Vec::new() }
    }

    /// Koszul complex on `elems`: degree-i basis indexed by i-subsets in the
    /// order produced by iterated tensor products K(x_1) ⊗ … ⊗ K(x_t).
    pub fn koszul(ring: &Ring, elems: &[crate::ring::RingElem]) -> Result<FreeChainComplex> {
        let mut acc = FreeChainComplex::unit(ring);
        for x in elems {
            let d = Matrix::from_entries(ring, 1, 1, std::slice::from_ref(x))?;
            let k = FreeChainComplex::new(ring, 0, vec![1, 1], vec![d])?;
            acc = acc.tensor(&k)?;
        }
        Ok(acc)
    }
}

/// Chain map between free complexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    pub maps: BTreeMap<i64, Matrix>,
}

impl ChainMap {
    pub fn identity(c: &FreeChainComplex) -> ChainMap {
        let maps = (c.lo..=c.hi()).map(|h| (h, Matrix::identity(c.ring(), c.rank(h)))).collect();
        ChainMap { maps }
    }

    pub fn zero() -> ChainMap {
        ChainMap { maps: BTreeMap::new() }
    }

    pub fn at(&self, h: i64, source: &FreeChainComplex, target: &FreeChainComplex) -> Matrix {
        self.maps.get(&h).cloned().unwrap_or_else(|| Matrix::zeros(source.ring(), target.rank(h), source.rank(h)))
    }

    /// Checks d f = f d in every degree.
    pub fn validate(&self, source: &FreeChainComplex, target: &FreeChainComplex) -> Result<()> {
        if source.ring() != target.ring() {
            return Err(Error::RingMismatch("chain map".into()));
        }
        let lo = source.lo().min(target.lo());
        let hi = source.hi().max(target.hi());
        for h in lo..=hi {
            let f = self.at(h, source, target);
            if f.rows() != target.rank(h) || f.cols() != source.rank(h) {
                return Err(Error::Shape(format!("chain map at degree {}", h)));
            }
            let lhs = target.d(h).mul(&f)?;
            let rhs = self.at(h - 1, source, target).mul(&source.d(h))?;
            if lhs != rhs {
                return Err(Error::NotAChainMap { degree: h });
            }
        }
        Ok(())
    }

    /// W_n matrices after restriction of scalars.
    pub fn restrict_scalars(&self) -> ModChainMap {
        ModChainMap { maps: self.maps.iter().map(|(h, m)| (*h, m.expand())).collect() }
    }
}

/// Cone of a chain map between free complexes, d(a, b) = (-da, db + f(a)).
pub fn free_cone(f: &ChainMap, a: &FreeChainComplex, b: &FreeChainComplex) -> Result<FreeChainComplex> {
    f.validate(a, b)?;
    let ring = a.ring();
    let lo = (a.lo() + 1).min(b.lo());
    let hi = (a.hi() + 1).max(b.hi());
    let ranks: Vec<usize> = (lo..=hi).map(|h| a.rank(h - 1) + b.rank(h)).collect();
    let mut diffs = Vec::new();
    for h in (lo + 1)..=hi {
        let (ra, rb) = (a.rank(h - 2), b.rank(h - 1));
        let mut d = Matrix::zeros(ring, ra + rb, a.rank(h - 1) + b.rank(h));
        d.set_block(0, 0, &a.d(h - 1).neg());
        d.set_block(ra, 0, &f.at(h - 1, a, b));
        d.set_block(ra, a.rank(h - 1), &b.d(h));
        diffs.push(d);
    }
    FreeChainComplex::new(ring, lo, ranks, diffs)
}

/// hofib(f) = cone(f)[-1].
pub fn free_hofib(f: &ChainMap, a: &FreeChainComplex, b: &FreeChainComplex) -> Result<FreeChainComplex> {
    Ok(free_cone(f, a, b)?.shift(-1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{make_ring, RingSpec};

    fn wn(p: u64, n: u32) -> Ring {
        make_ring(&RingSpec::witt(p, n)).unwrap()
    }

    #[test]
    fn multiplication_by_p_homology() {
        let r = wn(2, 2);
        let d = Matrix::from_entries(&r, 1, 1, &[r.from_int(2)]).unwrap();
        let c = FreeChainComplex::new(&r, 0, vec![1, 1], vec![d]).unwrap();
        let h = c.homology().unwrap();
        assert_eq!(h.get(0).exponents, vec![1]);
        assert_eq!(h.get(1).exponents, vec![1]);
    }

    #[test]
    fn violation_reported() {
        let r = wn(2, 2);
        let one = Matrix::from_entries(&r, 1, 1, &[r.from_int(1)]).unwrap();
        let two = Matrix::from_entries(&r, 1, 1, &[r.from_int(2)]).unwrap();
        let err = FreeChainComplex::new(&r, 0, vec![1, 1, 1], vec![one, two]).unwrap_err();
        assert_eq!(err, Error::NotAComplex { degree: 2 });
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let r = wn(3, 2);
        let d = Matrix::from_entries(&r, 1, 1, &[r.from_int(3)]).unwrap();
        let c = FreeChainComplex::new(&r, 0, vec![1, 1], vec![d]).unwrap();
        let cone = free_cone(&ChainMap::identity(&c), &c, &c).unwrap();
        assert!(cone.homology().unwrap().groups.values().all(|g| g.is_zero()));
        let fib = free_hofib(&ChainMap::identity(&c), &c, &c).unwrap();
        assert!(fib.homology().unwrap().groups.values().all(|g| g.is_zero()));
    }

    #[test]
    fn hofib_of_zero_map_splits() {
        let r = wn(3, 1);
        let a = FreeChainComplex::new(&r, 0, vec![2], vec![]).unwrap();
        let b = FreeChainComplex::new(&r, 0, vec![1], vec![]).unwrap();
        let fib = free_hofib(&ChainMap::zero(), &a, &b).unwrap();
        let h = fib.homology().unwrap();
        assert_eq!(h.get(0).num_cyclic(), 2);
        assert_eq!(h.get(-1).num_cyclic(), 1);
    }

    #[test]
    fn truncations_on_koszul() {
        let r = wn(3, 1);
        let z = r.zero();
        let k = FreeChainComplex::koszul(&r, &[z.clone(), z.clone(), z]).unwrap();
        let t = k.truncate_above(1).unwrap();
        let h = t.homology_groups();
        assert_eq!(h.get(0).num_cyclic(), 1);
        assert_eq!(h.get(1).num_cyclic(), 3);
        assert!(h.get(2).is_zero());
        let neg = FreeChainComplex::new(&r, -3, vec![1, 1], vec![Matrix::zeros(&r, 1, 1)]).unwrap();
        assert!(neg.truncate_below(0).unwrap().is_empty());
    }
}
