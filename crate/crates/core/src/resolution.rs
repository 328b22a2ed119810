//! Free resolutions over finite local rings, Tor modules with their products,
//! inverse limits of Tor groups, and comparisons with exterior algebras.
//!
//! Two ring models are used. [`PolyQuotientRing`] is W_n[X_1..X_s] modulo
//! either a degree truncation or the group-algebra relations
//! (1+X_i)^{p^e} = 1, with elements stored on the monomial basis.
//! [`crate::ring::Ring`] is the group algebra on the group basis and carries
//! the periodic resolutions used for level complexes.

use crate::complex::{ChainMap, FreeChainComplex, GradedModule, ModComplex, ModSpace};
use crate::error::{Error, Result};
use crate::linalg::{preimage, solve, solve_many, unit_vec, AbelianGroup, GroupMap, Subquotient, Submodule, ZMat};
use crate::ring::{Matrix, Ring, RingElem, RingSpec};
use crate::zmod::Zmod;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Largest monomial basis handled.
pub const MAX_MONOMIALS: usize = 1 << 16;

/// Relations cutting W_n[X_1..X_s] down to a finite ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Relations {
    /// Monomials of total degree above `t` vanish. With `adic` the ring is
    /// W[[X]] modulo m^{t+1}, so p^k X^a vanishes once k + |a| > t.
    Truncated { t: u32, adic: bool },
    /// (1+X_i)^{p^{e_i}} = 1 for each variable.
    GroupAlgebra { exponents: Vec<u32> },
}

/// W_n[X_1..X_s]/(relations) on its monomial basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyQuotientRing {
    zm: Zmod,
    vars: usize,
    relations: Relations,
    monomials: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    caps: Vec<u32>,
    /// Group case: per variable, X^k on the basis 1..X^{q-1} for k < 2q-1.
    powers: Vec<Vec<Vec<u64>>>,
    /// Per monomial: a variable and the monomial index one lower in it.
    pred: Vec<Option<(usize, usize)>>,
}

fn binomial_table(zm: Zmod, top: usize) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut row = vec![0u64; k + 1];
        row[0] = 1 % zm.modulus();
        row[k] = 1 % zm.modulus();
        for j in 1..k {
            row[j] = zm.add(rows[k - 1][j - 1], rows[k - 1][j]);
        }
        rows.push(row);
    }
    rows
}

impl PolyQuotientRing {
    pub fn new(p: u64, n: u32, vars: usize, relations: Relations) -> Result<Self> {
        let zm = Zmod::new(p, n)?;
        let mut monomials: Vec<Vec<u32>> = Vec::new();
        let mut powers = Vec::new();
        match &relations {
            Relations::Truncated { t, adic } => {
                if *t < 1 {
                    return Err(Error::Invalid("truncation bound must be at least 1".into()));
                }
                if *adic && n != t + 1 {
                    return Err(Error::Invalid("adic truncation needs base level t+1".into()));
                }
                let mut count: usize = 1;
                for k in 1..=vars {
                    count = count * (*t as usize + k) / k;
                    if count > MAX_MONOMIALS {
                        return Err(Error::GroupTooLarge(count));
                    }
                }
                let mut cur = vec![0u32; vars];
                enumerate_bounded(&mut cur, 0, *t, &mut monomials);
                monomials.sort_by(|a, b| {
                    let da: u32 = a.iter().sum();
                    let db: u32 = b.iter().sum();
                    da.cmp(&db).then_with(|| b.cmp(a))
                });
            }
            Relations::GroupAlgebra { exponents } => {
                if exponents.len() != vars {
                    return Err(Error::Shape("one exponent per variable".into()));
                }
                let spec = RingSpec::new(p, n, exponents.clone());
                let ring = Ring::new(spec)?;
                let order = ring.group_order();
                for g in 0..order {
                    monomials.push(ring.digits(g).into_iter().map(|d| d as u32).collect());
                }
                for &e in exponents {
                    let q = (p as usize).pow(e);
                    let binom = binomial_table(zm, q);
                    // X^q = -Σ_{0<k<q} C(q,k) X^k
                    let rule: Vec<u64> = (0..q).map(|k| if k == 0 { 0 } else { zm.neg(binom[q][k]) }).collect();
                    let mut table: Vec<Vec<u64>> = Vec::with_capacity(2 * q);
                    for k in 0..q {
                        table.push(unit_vec(q, k).into_iter().map(|x| x % zm.modulus()).collect());
                    }
                    for k in q..(2 * q).max(2) - 1 {
                        let prev = &table[k - 1];
                        let mut next = vec![0u64; q];
                        for j in 0..q - 1 {
                            next[j + 1] = prev[j];
                        }
                        let top = prev[q - 1];
                        if top != 0 {
                            for j in 0..q {
                                next[j] = zm.mul_add(next[j], top, rule[j]);
                            }
                        }
                        table.push(next);
                    }
                    powers.push(table);
                }
            }
        }
        let index: HashMap<Vec<u32>, usize> = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let caps = monomials
            .iter()
            .map(|m| match &relations {
                Relations::Truncated { t, adic: true } => t + 1 - m.iter().sum::<u32>(),
                _ => n,
            })
            .collect();
        let pred = monomials
            .iter()
            .map(|m| {
                let v = m.iter().position(|&a| a > 0)?;
                let mut lower = m.clone();
                lower[v] -= 1;
                Some((v, index[&lower]))
            })
            .collect();
        Ok(PolyQuotientRing { zm, vars, relations, monomials, index, caps, powers, pred })
    }

    /// W_n[X_1..X_s] with monomials of degree above `t` set to zero.
    pub fn truncated(p: u64, n: u32, vars: usize, t: u32) -> Result<Self> {
        Self::new(p, n, vars, Relations::Truncated { t, adic: false })
    }

    /// W[[X_1..X_s]] modulo m^{t+1}.
    pub fn power_series(p: u64, vars: usize, t: u32) -> Result<Self> {
        Self::new(p, t + 1, vars, Relations::Truncated { t, adic: true })
    }

    /// W_n[X]/((1+X_i)^{p^{e_i}} - 1).
    pub fn group_algebra(p: u64, n: u32, exponents: Vec<u32>) -> Result<Self> {
        let vars = exponents.len();
        Self::new(p, n, vars, Relations::GroupAlgebra { exponents })
    }

    pub fn zm(&self) -> Zmod {
        self.zm
    }
    pub fn p(&self) -> u64 {
        self.zm.p()
    }
    pub fn vars(&self) -> usize {
        self.vars
    }
    pub fn relations(&self) -> &Relations {
        &self.relations
    }
    pub fn dim(&self) -> usize {
        self.monomials.len()
    }
    pub fn caps(&self) -> &[u32] {
        &self.caps
    }
    pub fn monomial(&self, i: usize) -> &[u32] {
        &self.monomials[i]
    }
    pub fn monomial_index(&self, m: &[u32]) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Truncation bound, if any.
    pub fn truncation(&self) -> Option<u32> {
        match self.relations {
            Relations::Truncated { t, .. } => Some(t),
            Relations::GroupAlgebra { .. } => None,
        }
    }

    /// The group-algebra parameters, for rings with group relations.
    pub fn to_ring_spec(&self) -> Option<RingSpec> {
        match &self.relations {
            Relations::GroupAlgebra { exponents } => Some(RingSpec::new(self.zm.p(), self.zm.n(), exponents.clone())),
            _ => None,
        }
    }

    /// The ring itself as a W_N-module.
    pub fn space(&self) -> ModSpace {
        ModSpace::with_caps(self.caps.clone())
    }

    pub fn reduce(&self, x: &mut [u64]) {
        for (c, &cap) in x.iter_mut().zip(&self.caps) {
            *c %= self.zm.p_pow_int(cap.min(self.zm.n()));
        }
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.dim()]
    }

    pub fn constant(&self, c: i64) -> Vec<u64> {
        let mut v = self.zero();
        v[0] = self.zm.from_i64(c);
        self.reduce(&mut v);
        v
    }

    pub fn one(&self) -> Vec<u64> {
        self.constant(1)
    }

    /// X_i.
    pub fn var(&self, i: usize) -> Vec<u64> {
        let mut m = vec![0u32; self.vars];
        m[i] = 1;
        self.element(&[(1, m)]).expect("degree-one monomial")
    }

    /// Element from (coefficient, exponent vector) terms; monomials outside
    /// the basis are reduced by the relations.
    pub fn element(&self, terms: &[(i64, Vec<u32>)]) -> Result<Vec<u64>> {
        let mut out = self.zero();
        for (c, m) in terms {
            if m.len() != self.vars {
                return Err(Error::Shape(format!("monomial {:?} has wrong length", m)));
            }
            let c = self.zm.from_i64(*c);
            if c == 0 {
                continue;
            }
            let x = self.monomial_power(m);
            for (o, v) in out.iter_mut().zip(&x) {
                *o = self.zm.mul_add(*o, c, *v);
            }
        }
        self.reduce(&mut out);
        Ok(out)
    }

    /// X^m for an arbitrary exponent vector.
    fn monomial_power(&self, m: &[u32]) -> Vec<u64> {
        if let Some(i) = self.monomial_index(m) {
            let mut v = self.zero();
            v[i] = 1 % self.zm.modulus();
            self.reduce(&mut v);
            return v;
        }
        match &self.relations {
            Relations::Truncated { .. } => self.zero(),
            Relations::GroupAlgebra { .. } => {
                let mut acc = self.one();
                for (i, &e) in m.iter().enumerate() {
                    let x = self.var(i);
                    for _ in 0..e {
                        acc = self.mul(&acc, &x);
                    }
                }
                acc
            }
        }
    }

    /// X^{m_a} · X^{m_b} as sparse terms on the basis.
    fn mono_mul(&self, a: usize, b: usize) -> Vec<(usize, u64)> {
        let (ma, mb) = (&self.monomials[a], &self.monomials[b]);
        match &self.relations {
            Relations::Truncated { t, .. } => {
                let sum: Vec<u32> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                if sum.iter().sum::<u32>() > *t {
                    Vec::new()
                } else {
                    vec![(self.index[&sum], 1)]
                }
            }
            Relations::GroupAlgebra { .. } => {
                let mut terms: Vec<(usize, u64)> = vec![(0, 1 % self.zm.modulus())];
                for v in 0..self.vars {
                    let q = self.powers[v][0].len();
                    let row = &self.powers[v][(ma[v] + mb[v]) as usize];
                    let mut next = Vec::with_capacity(terms.len());
                    for &(idx, c) in &terms {
                        for (k, &r) in row.iter().enumerate() {
                            if r != 0 {
                                next.push((idx * q + k, self.zm.mul(c, r)));
                            }
                        }
                    }
                    terms = next;
                }
                terms.retain(|t| t.1 != 0);
                terms
            }
        }
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out: Vec<u64> = a.iter().zip(b).map(|(x, y)| self.zm.add(*x, *y)).collect();
        self.reduce(&mut out);
        out
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out: Vec<u64> = a.iter().zip(b).map(|(x, y)| self.zm.sub(*x, *y)).collect();
        self.reduce(&mut out);
        out
    }

    pub fn scale(&self, c: u64, a: &[u64]) -> Vec<u64> {
        let mut out: Vec<u64> = a.iter().map(|x| self.zm.mul(*x, c)).collect();
        self.reduce(&mut out);
        out
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = self.zero();
        let bnz: Vec<(usize, u64)> = b.iter().copied().enumerate().filter(|t| t.1 != 0).collect();
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for &(j, y) in &bnz {
                let xy = self.zm.mul(x, y);
                for (k, c) in self.mono_mul(i, j) {
                    out[k] = self.zm.mul_add(out[k], xy, c);
                }
            }
        }
        self.reduce(&mut out);
        out
    }

    pub fn pow(&self, a: &[u64], e: u64) -> Vec<u64> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    /// Constant term, the image under X_i ↦ 0.
    pub fn augment(&self, a: &[u64]) -> u64 {
        a[0]
    }

    /// m-adic order with m = (p, X): least |a| + v_p(coefficient) over the
    /// support; `None` for zero.
    pub fn order(&self, a: &[u64]) -> Option<u32> {
        a.iter()
            .enumerate()
            .filter(|t| *t.1 != 0)
            .map(|(i, &c)| self.monomials[i].iter().sum::<u32>() + self.zm.val(c))
            .min()
    }

    /// Matrix of multiplication by `x` on the monomial basis.
    pub fn mult_matrix(&self, x: &[u64]) -> ZMat {
        let d = self.dim();
        let mut m = ZMat::zeros(self.zm, d, d);
        for j in 0..d {
            let col = self.mul_basis(x, j);
            for (i, c) in col.into_iter().enumerate() {
                if c != 0 {
                    m.set(i, j, c);
                }
            }
        }
        m
    }

    /// x · X^{m_j}.
    pub fn mul_basis(&self, x: &[u64], j: usize) -> Vec<u64> {
        let mut out = self.zero();
        for (i, &c) in x.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (k, r) in self.mono_mul(i, j) {
                out[k] = self.zm.mul_add(out[k], c, r);
            }
        }
        self.reduce(&mut out);
        out
    }

    /// Multiplication by X_i.
    pub fn action(&self, i: usize) -> ZMat {
        self.mult_matrix(&self.var(i))
    }

    /// Images X^{m_a}·v for every monomial, from generator actions on a module.
    pub fn monomial_images(&self, actions: &[ZMat], v: &[u64]) -> Vec<Vec<u64>> {
        let mut out: Vec<Vec<u64>> = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            match self.pred[a] {
                None => out.push(v.to_vec()),
                Some((var, lower)) => {
                    let w = actions[var].apply(&out[lower]);
                    out.push(w);
                }
            }
        }
        out
    }

    /// Action matrices of every monomial on a module.
    pub fn monomial_actions(&self, actions: &[ZMat], dim: usize) -> Vec<ZMat> {
        let mut out: Vec<ZMat> = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            match self.pred[a] {
                None => out.push(ZMat::identity(self.zm, dim)),
                Some((var, lower)) => {
                    let m = actions[var].mul(&out[lower]);
                    out.push(m);
                }
            }
        }
        out
    }
}

fn enumerate_bounded(cur: &mut Vec<u32>, pos: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for e in 0..=budget {
        cur[pos] = e;
        enumerate_bounded(cur, pos + 1, budget - e, out);
    }
    cur[pos] = 0;
}

/// A finite module over a [`PolyQuotientRing`]: a W_N-module with commuting
/// actions of the variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SModule {
    pub space: ModSpace,
    pub actions: Vec<ZMat>,
}

impl SModule {
    /// Validates that the actions preserve relations and commute.
    pub fn new(ring: &PolyQuotientRing, space: ModSpace, actions: Vec<ZMat>) -> Result<Self> {
        let zm = ring.zm();
        if actions.len() != ring.vars() {
            return Err(Error::Shape("one action per variable".into()));
        }
        if actions.iter().any(|a| a.rows() != space.dim || a.cols() != space.dim) {
            return Err(Error::Shape("action matrices must be square of the module dimension".into()));
        }
        let rel = space.relations(zm);
        for (i, a) in actions.iter().enumerate() {
            for g in rel.gens() {
                if !rel.contains(&a.apply(&g)) {
                    return Err(Error::InvalidModule(format!("X_{} does not preserve relations", i + 1)));
                }
            }
            for b in &actions[i + 1..] {
                let c = a.mul(b).sub(&b.mul(a));
                if (0..c.cols()).any(|j| !rel.contains(&c.col(j))) {
                    return Err(Error::InvalidModule("variable actions do not commute".into()));
                }
            }
        }
        let m = SModule { space, actions };
        m.check_relations(ring)?;
        Ok(m)
    }

    /// The group relations (1+X)^q = 1 or truncation must hold on the module.
    fn check_relations(&self, ring: &PolyQuotientRing) -> Result<()> {
        let zm = ring.zm();
        let rel = self.space.relations(zm);
        let d = self.space.dim;
        match ring.relations() {
            Relations::GroupAlgebra { exponents } => {
                for (i, &e) in exponents.iter().enumerate() {
                    let q = zm.p().pow(e);
                    let u = ZMat::identity(zm, d).add(&self.actions[i]);
                    let mut acc = ZMat::identity(zm, d);
                    for _ in 0..q {
                        acc = acc.mul(&u);
                    }
                    let diff = acc.sub(&ZMat::identity(zm, d));
                    if (0..d).any(|j| !rel.contains(&diff.col(j))) {
                        return Err(Error::InvalidModule(format!("(1+X_{})^{} ≠ 1 on the module", i + 1, q)));
                    }
                }
            }
            Relations::Truncated { t, adic } => {
                // every monomial of degree t+1 (times p^0) must act by zero
                let mons = ring.monomial_actions(&self.actions, d);
                for (a, m) in mons.iter().enumerate() {
                    let deg: u32 = ring.monomial(a).iter().sum();
                    if deg != *t {
                        continue;
                    }
                    for act in &self.actions {
                        let top = act.mul(m);
                        if (0..d).any(|j| !rel.contains(&top.col(j))) {
                            return Err(Error::InvalidModule(format!("monomials of degree {} act nontrivially", t + 1)));
                        }
                    }
                    if *adic {
                        let pm = m.scale(zm.p());
                        if (0..d).any(|j| !rel.contains(&pm.col(j))) {
                            return Err(Error::InvalidModule("m^{t+1} acts nontrivially".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// S^rank.
    pub fn free(ring: &PolyQuotientRing, rank: usize) -> Self {
        let parts: Vec<ModSpace> = (0..rank).map(|_| ring.space()).collect();
        let refs: Vec<&ModSpace> = parts.iter().collect();
        let space = ModSpace::direct_sum(&refs);
        let actions = (0..ring.vars())
            .map(|i| {
                let a = ring.action(i);
                ZMat::block_diag(ring.zm(), &vec![a; rank])
            })
            .collect();
        SModule { space, actions }
    }

    /// S/(ideal).
    pub fn quotient(ring: &PolyQuotientRing, ideal: &[Vec<u64>]) -> Self {
        let mut space = ring.space();
        for f in ideal {
            for j in 0..ring.dim() {
                let c = ring.mul_basis(f, j);
                if c.iter().any(|&x| x != 0) {
                    space.rel.push(c);
                }
            }
        }
        let actions = (0..ring.vars()).map(|i| ring.action(i)).collect();
        SModule { space, actions }
    }

    /// S/(X_1..X_s): W_n, or W_{t+1} for truncated power series.
    pub fn residue(ring: &PolyQuotientRing) -> Self {
        let cap = ring.caps()[0];
        SModule { space: ModSpace::with_caps(vec![cap]), actions: vec![ZMat::zeros(ring.zm(), 1, 1); ring.vars()] }
    }

    /// ⊕ of `copies` copies (adding free variables to a module over a ring
    /// that does not see them).
    pub fn copies(&self, zm: Zmod, copies: usize) -> Self {
        let refs: Vec<&ModSpace> = (0..copies).map(|_| &self.space).collect();
        let space = ModSpace::direct_sum(&refs);
        let actions = self.actions.iter().map(|a| ZMat::block_diag(zm, &vec![a.clone(); copies])).collect();
        SModule { space, actions }
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn order_log(&self, zm: Zmod) -> u64 {
        self.space.group(zm).order_log()
    }
}

/// Matrix with entries in a [`PolyQuotientRing`], row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<u64>>,
}

impl SMatrix {
    pub fn zeros(ring: &PolyQuotientRing, rows: usize, cols: usize) -> Self {
        SMatrix { rows, cols, entries: vec![ring.zero(); rows * cols] }
    }
    pub fn get(&self, i: usize, j: usize) -> &[u64] {
        &self.entries[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, x: Vec<u64>) {
        self.entries[i * self.cols + j] = x;
    }

    /// Restriction of scalars to W_N.
    pub fn expand(&self, ring: &PolyQuotientRing) -> ZMat {
        let d = ring.dim();
        let mut out = ZMat::zeros(ring.zm(), self.rows * d, self.cols * d);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.get(i, j);
                if ring.is_zero(e) {
                    continue;
                }
                out.set_block(i * d, j * d, &ring.mult_matrix(e));
            }
        }
        out
    }

    /// The induced map N^cols → N^rows on a module.
    pub fn on_module(&self, ring: &PolyQuotientRing, actions: &mut ActionCache) -> ZMat {
        let zm = ring.zm();
        let dim = actions.dim;
        let mut out = ZMat::zeros(zm, self.rows * dim, self.cols * dim);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.get(i, j);
                if !ring.is_zero(e) {
                    out.set_block(i * dim, j * dim, &actions.element(ring, e));
                }
            }
        }
        out
    }
}

/// Action matrices of ring elements on a module, built from cached powers
/// of the variable actions.
pub struct ActionCache {
    dim: usize,
    powers: Vec<Vec<ZMat>>,
    memo: HashMap<Vec<u64>, ZMat>,
}

impl ActionCache {
    pub fn new(zm: Zmod, module: &SModule) -> Self {
        let dim = module.dim();
        let powers = module.actions.iter().map(|a| vec![ZMat::identity(zm, dim), a.clone()]).collect();
        ActionCache { dim, powers, memo: HashMap::new() }
    }

    fn power(&mut self, var: usize, k: usize) -> &ZMat {
        while self.powers[var].len() <= k {
            let next = self.powers[var].last().expect("nonempty").mul(&self.powers[var][1]);
            self.powers[var].push(next);
        }
        &self.powers[var][k]
    }

    /// Action of X^m.
    pub fn monomial(&mut self, ring: &PolyQuotientRing, m: &[u32]) -> ZMat {
        let mut acc: Option<ZMat> = None;
        for (v, &k) in m.iter().enumerate() {
            if k > 0 {
                let p = self.power(v, k as usize);
                acc = Some(match acc {
                    None => p.clone(),
                    Some(a) => a.mul(p),
                });
            }
        }
        acc.unwrap_or_else(|| ZMat::identity(ring.zm(), self.dim))
    }

    /// Action of an arbitrary element.
    pub fn element(&mut self, ring: &PolyQuotientRing, x: &[u64]) -> ZMat {
        if let Some(m) = self.memo.get(x) {
            return m.clone();
        }
        let mut acc = ZMat::zeros(ring.zm(), self.dim, self.dim);
        for (a, &c) in x.iter().enumerate() {
            if c != 0 {
                let m = ring.monomial(a).to_vec();
                acc = acc.add(&self.monomial(ring, &m).scale(c));
            }
        }
        self.memo.insert(x.to_vec(), acc.clone());
        acc
    }
}

/// A free resolution over a [`PolyQuotientRing`], `diffs[k]`: F_{k+1} → F_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyResolution {
    pub ranks: Vec<usize>,
    pub diffs: Vec<SMatrix>,
    /// F_0 → M, as a W_N-matrix from S^{r_0} to the module.
    pub augmentation: ZMat,
    /// Exactness established (regularity witness search or construction).
    pub known_exact: bool,
    /// No further terms: the last map is meant to be injective.
    pub complete: bool,
    /// Truncation at which exactness was certified.
    pub certified_at: Option<u32>,
}

/// Subsets of {0..t} of size k in lexicographic order.
pub fn subsets(t: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, t: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..t {
            cur.push(i);
            rec(i + 1, t, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, t, k, &mut Vec::new(), &mut out);
    out
}

/// Sign and result of e_A ∧ e_B on sorted index sets, `None` if they meet.
pub fn wedge(a: &[usize], b: &[usize]) -> Option<(bool, Vec<usize>)> {
    let mut inversions = 0usize;
    for &x in a {
        if b.contains(&x) {
            return None;
        }
        inversions += b.iter().filter(|&&y| y < x).count();
    }
    let mut merged: Vec<usize> = a.iter().chain(b).copied().collect();
    merged.sort_unstable();
    Some((inversions % 2 == 1, merged))
}

/// Koszul differentials on `elems`: degree-k basis = k-subsets in
/// lexicographic order, d(e_S) = Σ_j (-1)^j f_{s_j} e_{S∖s_j}.
fn koszul_matrices(ring: &PolyQuotientRing, elems: &[Vec<u64>]) -> Vec<SMatrix> {
    let t = elems.len();
    let zm = ring.zm();
    let mut diffs = Vec::new();
    for k in 1..=t {
        let src = subsets(t, k);
        let tgt = subsets(t, k - 1);
        let pos: HashMap<Vec<usize>, usize> = tgt.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut m = SMatrix::zeros(ring, tgt.len(), src.len());
        for (c, s) in src.iter().enumerate() {
            for (j, &sj) in s.iter().enumerate() {
                let mut rest = s.clone();
                rest.remove(j);
                let f = if j % 2 == 0 { elems[sj].clone() } else { ring.scale(zm.neg(1), &elems[sj]) };
                m.set(pos[&rest], c, f);
            }
        }
        diffs.push(m);
    }
    diffs
}

/// A cycle of `d_in` (on F = S^rank) outside im(`d_out`) + m^band·F.
fn surviving_class(ring: &PolyQuotientRing, d_in: &ZMat, d_out: Option<&ZMat>, rank: usize, band: Option<u32>) -> Option<Vec<u64>> {
    let zm = ring.zm();
    let d = ring.dim();
    let caps: Vec<u32> = (0..rank).flat_map(|_| ring.caps().iter().copied()).collect();
    let tgt_caps: Vec<u32> = (0..d_in.rows() / d.max(1)).flat_map(|_| ring.caps().iter().copied()).collect();
    let cycles = Submodule::from_gens(zm, rank * d, preimage(d_in, &tgt_caps, &ZMat::zeros(zm, d_in.rows(), 0)));
    let mut allowed = Submodule::from_caps(zm, &caps);
    if let Some(d2) = d_out {
        allowed = allowed.with_gens((0..d2.cols()).map(|j| d2.col(j)));
    }
    if let Some(j) = band {
        let mut extra = Vec::new();
        for blk in 0..rank {
            for a in 0..d {
                let deg: u32 = ring.monomial(a).iter().sum();
                let k = j.saturating_sub(deg);
                if k < zm.n() {
                    let mut v = vec![0; rank * d];
                    v[blk * d + a] = zm.p_pow(k);
                    extra.push(v);
                }
            }
        }
        allowed = allowed.with_gens(extra);
    }
    cycles.gens().into_iter().find(|z| !allowed.contains(z))
}

/// m^band below which truncation can fake cycles: T+1 minus the largest
/// order among the entries. `None` for group-algebra rings.
fn truncation_band(ring: &PolyQuotientRing, diffs: &[SMatrix]) -> Option<u32> {
    let t = ring.truncation()?;
    let c = diffs.iter().flat_map(|m| m.entries.iter()).filter_map(|f| ring.order(f)).max().unwrap_or(0);
    Some((t + 1).saturating_sub(c))
}

/// A Koszul H_1 class that survives truncation: a cycle outside
/// B_1 + m^{t+1-c}K_1 with c the largest order among the elements.
/// `None` when no such class exists (the sequence is regular at this
/// truncation). For group-algebra rings the test is plain H_1 = 0.
pub fn koszul_h1_witness(ring: &PolyQuotientRing, elems: &[Vec<u64>]) -> Option<Vec<u64>> {
    if elems.is_empty() {
        return None;
    }
    let diffs = koszul_matrices(ring, elems);
    let band = truncation_band(ring, &diffs);
    let d1 = diffs[0].expand(ring);
    let d2 = diffs.get(1).map(|m| m.expand(ring));
    surviving_class(ring, &d1, d2.as_ref(), elems.len(), band)
}

fn describe_vector(ring: &PolyQuotientRing, v: &[u64]) -> String {
    let d = ring.dim();
    let mut parts = Vec::new();
    for (i, &c) in v.iter().enumerate() {
        if c != 0 {
            parts.push(format!("{}·X^{:?}·e{}", ring.zm().to_i64(c), ring.monomial(i % d), i / d + 1));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Koszul resolution of S/(elems). Fails with [`Error::NotRegular`] carrying
/// the first surviving H_1 class.
pub fn koszul(ring: &PolyQuotientRing, elems: &[Vec<u64>]) -> Result<PolyResolution> {
    for f in elems {
        if f.len() != ring.dim() {
            return Err(Error::Shape("element length differs from the ring dimension".into()));
        }
        if !ring.augment(f).is_multiple_of(ring.p()) {
            return Err(Error::Invalid("Koszul elements must lie in the maximal ideal".into()));
        }
    }
    if let Some(w) = koszul_h1_witness(ring, elems) {
        return Err(Error::NotRegular { truncation: ring.truncation().unwrap_or(0), witness: describe_vector(ring, &w) });
    }
    let t = elems.len();
    let ranks: Vec<usize> = (0..=t).map(|k| subsets(t, k).len()).collect();
    let diffs = koszul_matrices(ring, elems);
    Ok(PolyResolution {
        ranks,
        diffs,
        augmentation: ZMat::identity(ring.zm(), ring.dim()),
        known_exact: true,
        complete: true,
        certified_at: ring.truncation(),
    })
}

/// Minimal generators of `k` modulo `base`: greedy over Howell generators,
/// keeping those outside the span of earlier choices plus m·k.
fn minimal_generators(zm: Zmod, actions: &[ZMat], k: &Submodule, base: &Submodule) -> Vec<Vec<u64>> {
    let gens = k.gens();
    let mut mk: Vec<Vec<u64>> = Vec::new();
    for g in &gens {
        mk.push(g.iter().map(|&x| zm.mul(x, zm.p())).collect());
        for a in actions {
            mk.push(a.apply(g));
        }
    }
    let mut current = base.with_gens(mk);
    let mut chosen = Vec::new();
    for g in gens {
        if !current.contains(&g) {
            current = current.with_gens([g.clone()]);
            chosen.push(g);
        }
    }
    chosen
}

/// F_{i+1} → F_i as an S-matrix together with its W_N expansion, from
/// chosen generators of the kernel in F_i = S^{rank}.
fn map_from_generators(ring: &PolyQuotientRing, rank: usize, gens: &[Vec<u64>]) -> SMatrix {
    let d = ring.dim();
    let mut m = SMatrix::zeros(ring, rank, gens.len());
    for (j, g) in gens.iter().enumerate() {
        for i in 0..rank {
            let mut e = g[i * d..(i + 1) * d].to_vec();
            ring.reduce(&mut e);
            m.set(i, j, e);
        }
    }
    m
}

/// Minimal free resolution of `m` with `length` differentials after F_0.
pub fn minimal_resolution(ring: &PolyQuotientRing, m: &SModule, length: usize, budget: u128) -> Result<PolyResolution> {
    let zm = ring.zm();
    let d = ring.dim();
    let rel_m = m.space.relations(zm);
    let full = Submodule::full(zm, m.dim());
    let gens0 = minimal_generators(zm, &m.actions, &full, &rel_m);
    let r0 = gens0.len();
    let mut aug = ZMat::zeros(zm, m.dim(), r0 * d);
    for (j, g) in gens0.iter().enumerate() {
        for (a, img) in ring.monomial_images(&m.actions, g).into_iter().enumerate() {
            for (i, x) in img.into_iter().enumerate() {
                aug.set(i, j * d + a, x);
            }
        }
    }
    let mut ranks = vec![r0];
    let mut diffs: Vec<SMatrix> = Vec::new();
    let caps_of = |r: usize| -> Vec<u32> { (0..r).flat_map(|_| ring.caps().iter().copied()).collect() };
    let mut kernel = Submodule::from_gens(zm, r0 * d, preimage(&aug, &m.space.caps, &m.space.rel_matrix(zm)))
        .with_gens(Submodule::from_caps(zm, &caps_of(r0)).gens());
    for _ in 0..length {
        let rank = *ranks.last().expect("nonempty");
        let need = (rank as u128 * d as u128).pow(2);
        if need > budget {
            return Err(Error::Budget { needed: need, budget });
        }
        let free = SModule::free(ring, rank);
        let base = Submodule::from_caps(zm, &caps_of(rank));
        let gens = minimal_generators(zm, &free.actions, &kernel, &base);
        let dm = map_from_generators(ring, rank, &gens);
        let ex = dm.expand(ring);
        let next_caps = caps_of(gens.len());
        kernel = Submodule::from_gens(zm, gens.len() * d, preimage(&ex, &caps_of(rank), &ZMat::zeros(zm, rank * d, 0)))
            .with_gens(Submodule::from_caps(zm, &next_caps).gens());
        ranks.push(gens.len());
        diffs.push(dm);
    }
    Ok(PolyResolution { ranks, diffs, augmentation: aug, known_exact: true, complete: false, certified_at: None })
}

/// The periodic resolution of W_n over a group-algebra ring: the tensor
/// product over the variables of ··· → S --N_i--> S --X_i--> S.
pub fn periodic_poly_resolution(ring: &PolyQuotientRing, length: usize) -> Result<PolyResolution> {
    let Relations::GroupAlgebra { exponents } = ring.relations().clone() else {
        return Err(Error::Invalid("periodic resolution needs group-algebra relations".into()));
    };
    let zm = ring.zm();
    let factors: Vec<(Vec<u64>, Vec<u64>)> = exponents
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let x = ring.var(i);
            let u = ring.add(&ring.one(), &x);
            let q = zm.p().pow(e);
            let mut norm = ring.zero();
            let mut pw = ring.one();
            for _ in 0..q {
                norm = ring.add(&norm, &pw);
                pw = ring.mul(&pw, &u);
            }
            (x, norm)
        })
        .collect();
    let vars = factors.len();
    let basis: Vec<Vec<Vec<u32>>> = (0..=length).map(|k| tuples(vars, k as u32)).collect();
    let ranks: Vec<usize> = basis.iter().map(|b| b.len()).collect();
    let mut diffs = Vec::new();
    for k in 1..=length {
        let pos: HashMap<Vec<u32>, usize> = basis[k - 1].iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let mut m = SMatrix::zeros(ring, ranks[k - 1], ranks[k]);
        for (c, t) in basis[k].iter().enumerate() {
            let mut sign_deg = 0u32;
            for v in 0..vars {
                if t[v] > 0 {
                    let mut lower = t.clone();
                    lower[v] -= 1;
                    let f = if t[v] % 2 == 1 { &factors[v].0 } else { &factors[v].1 };
                    let f = if sign_deg % 2 == 1 { ring.scale(zm.neg(1), f) } else { f.clone() };
                    let r = pos[&lower];
                    let cur = m.get(r, c).to_vec();
                    m.set(r, c, ring.add(&cur, &f));
                }
                sign_deg += t[v];
            }
        }
        diffs.push(m);
    }
    let aug = {
        let mut a = ZMat::zeros(zm, 1, ring.dim());
        for j in 0..ring.dim() {
            // augmentation X ↦ 0 on the monomial basis
            if ring.monomial(j).iter().all(|&e| e == 0) {
                a.set(0, j, 1);
            }
        }
        a
    };
    Ok(PolyResolution { ranks, diffs, augmentation: aug, known_exact: true, complete: false, certified_at: None })
}

/// Exponent tuples of length `factors` summing to `deg`, in the order of
/// iterated tensor products (left factors' total degree ascending).
pub fn tuples(factors: usize, deg: u32) -> Vec<Vec<u32>> {
    if factors == 0 {
        return if deg == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for left in 0..=deg {
        for mut t in tuples(factors - 1, left) {
            t.push(deg - left);
            out.push(t);
        }
    }
    out
}

impl PolyResolution {
    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// The resolution ⊗_S N as a complex of W_N-modules.
    pub fn tensor_module(&self, ring: &PolyQuotientRing, n: &SModule) -> Result<ModComplex> {
        let zm = ring.zm();
        let mut cache = ActionCache::new(zm, n);
        let terms: Vec<ModSpace> = self
            .ranks
            .iter()
            .map(|&r| {
                let refs: Vec<&ModSpace> = (0..r).map(|_| &n.space).collect();
                ModSpace::direct_sum(&refs)
            })
            .collect();
        let diffs = self.diffs.iter().map(|m| m.on_module(ring, &mut cache)).collect();
        // d² = 0 over S and the actions are module endomorphisms
        Ok(ModComplex::new_unchecked(zm, 0, terms, diffs))
    }

    /// Restriction of scalars of the resolution itself.
    pub fn expanded(&self, ring: &PolyQuotientRing) -> Result<ModComplex> {
        let zm = ring.zm();
        let terms = self
            .ranks
            .iter()
            .map(|&r| ModSpace::with_caps((0..r).flat_map(|_| ring.caps().iter().copied()).collect()))
            .collect();
        let diffs = self.diffs.iter().map(|m| m.expand(ring)).collect();
        ModComplex::new(zm, 0, terms, diffs)
    }

    /// Checks H_0 ≅ M (by order) and H_i = 0 for i ≥ 1, up to the last
    /// kernel when the resolution is `complete`. Over truncated rings
    /// classes inside m^{T+1-c} are attributed to the truncation.
    pub fn verify_exact(&self, ring: &PolyQuotientRing, m: &SModule) -> Result<bool> {
        let zm = ring.zm();
        let c = self.expanded(ring)?;
        if c.homology(0).order_log() != m.order_log(zm) {
            return Ok(false);
        }
        let band = truncation_band(ring, &self.diffs);
        let top = if self.complete { self.len() } else { self.len().saturating_sub(1) };
        let expanded: Vec<ZMat> = self.diffs.iter().map(|d| d.expand(ring)).collect();
        for i in 1..=top {
            if surviving_class(ring, &expanded[i - 1], expanded.get(i), self.ranks[i], band).is_some() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// How [`tor`] resolves its first argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TorStrategy {
    /// M = S/(elements) with a regular sequence.
    Koszul(Vec<Vec<u64>>),
    /// M = W_n over a group-algebra ring, tensor of periodic resolutions.
    Periodic,
    /// Minimal resolution by kernels (any finite ring and module).
    Minimal,
}

/// Tor_i^S(M, N) for 0 ≤ i ≤ maxdeg.
pub fn tor(
    ring: &PolyQuotientRing,
    m: &SModule,
    n: &SModule,
    maxdeg: usize,
    strategy: &TorStrategy,
    budget: u128,
) -> Result<GradedModule> {
    let zm = ring.zm();
    let res = match strategy {
        TorStrategy::Koszul(elems) => {
            let expected = SModule::quotient(ring, elems);
            if expected.space.dim != m.space.dim
                || expected.space.relations(zm) != m.space.relations(zm)
                || expected.actions != m.actions
            {
                return Err(Error::Invalid("module is not the quotient by the Koszul elements".into()));
            }
            koszul(ring, elems)?
        }
        TorStrategy::Periodic => {
            let w = SModule::residue(ring);
            if w.space != m.space || w.actions != m.actions {
                return Err(Error::Invalid("periodic resolution resolves the residue module only".into()));
            }
            periodic_poly_resolution(ring, maxdeg + 1)?
        }
        TorStrategy::Minimal => minimal_resolution(ring, m, maxdeg + 1, budget)?,
    };
    let c = res.tensor_module(ring, n)?;
    let mut out = GradedModule::default();
    for i in 0..=maxdeg as i64 {
        let g = if i <= c.hi() { c.homology(i).group() } else { AbelianGroup::trivial() };
        out.groups.insert(i, g);
    }
    Ok(out)
}

/// A resolution over a group algebra [`Ring`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub complex: FreeChainComplex,
    pub known_exact: bool,
}

/// The periodic resolution of W_n over W_n[Δ] in the i-th cyclic factor:
/// degree 2k+1 → 2k by σ_i − 1 and degree 2k → 2k−1 by the norm.
pub fn periodic_resolution(ring: &Ring, factor: usize, length: usize) -> Result<Resolution> {
    if factor >= ring.num_group_gens() {
        return Err(Error::Invalid(format!("ring has no cyclic factor {}", factor)));
    }
    let sigma = ring.sigma(factor);
    let q = ring.radices()[factor];
    let x = ring.sub(&sigma, &ring.one());
    let mut norm = ring.zero();
    let mut pw = ring.one();
    for _ in 0..q {
        norm = ring.add(&norm, &pw);
        pw = ring.mul(&pw, &sigma);
    }
    let diffs = (1..=length)
        .map(|k| Matrix::from_entries(ring, 1, 1, &[if k % 2 == 1 { x.clone() } else { norm.clone() }]))
        .collect::<Result<Vec<_>>>()?;
    let complex = FreeChainComplex::new(ring, 0, vec![1; length + 1], diffs)?;
    Ok(Resolution { complex, known_exact: true })
}

/// Periodic resolution of W_n over W_n[Z/p^e].
pub fn cyclic_resolution(p: u64, n: u32, e: u32, length: usize) -> Result<Resolution> {
    if e < 1 {
        return Err(Error::Invalid("cyclic resolution needs e ≥ 1".into()));
    }
    let ring = Ring::new(RingSpec::new(p, n, vec![e]))?;
    periodic_resolution(&ring, 0, length)
}

impl Resolution {
    /// Tensor product of resolutions over the same ring, cut at the shorter
    /// length (above it the product is missing terms).
    pub fn tensor(&self, other: &Resolution) -> Result<Resolution> {
        let top = self.complex.hi().min(other.complex.hi());
        let complex = truncate_free(&self.complex.tensor(&other.complex)?, top)?;
        Ok(Resolution { complex, known_exact: self.known_exact && other.known_exact })
    }

    /// H_0 of order `module_log` and H_i = 0 for 0 < i < top, checked after
    /// restriction of scalars.
    pub fn verify_exact(&self, module_log: u64) -> bool {
        let c = self.complex.restrict_scalars();
        if c.homology(0).order_log() != module_log {
            return false;
        }
        (1..self.complex.hi()).all(|i| c.homology(i).is_zero())
    }

    /// ⊗_S W_n along the augmentation.
    pub fn base_change(&self) -> ModComplex {
        self.complex.base_change_augment()
    }
}

/// Image of a group-ring element under W_n[Δ] → W_m[Δ'] induced by
/// reduction of coefficients and of each cyclic factor.
pub fn reduce_elem(from: &Ring, to: &Ring, x: &RingElem) -> Result<RingElem> {
    if from.p() != to.p() || from.n() < to.n() || from.num_group_gens() != to.num_group_gens() {
        return Err(Error::RingMismatch("no reduction map between these rings".into()));
    }
    if from.radices().iter().zip(to.radices()).any(|(a, b)| a % b != 0) {
        return Err(Error::RingMismatch("group factors do not surject".into()));
    }
    let zm = to.zm();
    let mut out = to.zero();
    for (g, &c) in x.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let h = to.index_of(&from.digits(g));
        out.0[h] = zm.add(out.0[h], c % zm.modulus());
    }
    Ok(out)
}

/// Entrywise [`reduce_elem`].
pub fn reduce_matrix(from: &Ring, to: &Ring, m: &Matrix) -> Result<Matrix> {
    let entries = m.entries().iter().map(|e| reduce_elem(from, to, e)).collect::<Result<Vec<_>>>()?;
    Matrix::from_entries(to, m.rows(), m.cols(), &entries)
}

/// Base change of a free complex along the reduction map.
pub fn reduce_complex(c: &FreeChainComplex, to: &Ring) -> Result<FreeChainComplex> {
    let diffs = (c.lo() + 1..=c.hi()).map(|h| reduce_matrix(c.ring(), to, &c.d(h))).collect::<Result<Vec<_>>>()?;
    FreeChainComplex::new(to, c.lo(), c.ranks().to_vec(), diffs)
}

/// A chain map from the base change of `src` to `tgt` lifting the identity
/// in degree 0, built degree by degree by solving d'φ_j = φ_{j-1}d.
pub fn comparison_map(src: &Resolution, tgt: &Resolution) -> Result<(FreeChainComplex, ChainMap)> {
    let to = tgt.complex.ring().clone();
    let base = reduce_complex(&src.complex, &to)?;
    if base.rank(0) != tgt.complex.rank(0) || base.lo() != 0 || tgt.complex.lo() != 0 {
        return Err(Error::Shape("resolutions must start in degree 0 with equal ranks".into()));
    }
    let g = to.group_order();
    let top = base.hi().min(tgt.complex.hi());
    let mut maps = std::collections::BTreeMap::new();
    maps.insert(0, Matrix::identity(&to, base.rank(0)));
    for j in 1..=top {
        let rhs = maps[&(j - 1)].mul(&base.d(j))?;
        let dt = tgt.complex.d(j).expand();
        let rhs_w = rhs.expand();
        let mut phi = Matrix::zeros(&to, tgt.complex.rank(j), base.rank(j));
        for k in 0..base.rank(j) {
            // coefficient vector of column k: first column of each block
            let b: Vec<u64> = (0..rhs.rows()).flat_map(|i| (0..g).map(move |h| (i, h))).map(|(i, h)| rhs_w.get(i * g + h, k * g)).collect();
            let y = solve(&dt, &b).ok_or_else(|| Error::NoSolution(format!("no lift in degree {}", j)))?;
            for i in 0..tgt.complex.rank(j) {
                phi.set(i, k, &RingElem(y[i * g..(i + 1) * g].to_vec()));
            }
        }
        maps.insert(j, phi);
    }
    let f = ChainMap { maps };
    let trimmed_src = truncate_free(&base, top)?;
    let trimmed_tgt = truncate_free(&tgt.complex, top)?;
    f.validate(&trimmed_src, &trimmed_tgt)?;
    Ok((base, f))
}

/// Degrees 0..=top of a free complex starting in degree 0.
pub fn truncate_free(c: &FreeChainComplex, top: i64) -> Result<FreeChainComplex> {
    let top = top.min(c.hi());
    let ranks = (0..=top).map(|h| c.rank(h)).collect();
    let diffs = (1..=top).map(|h| c.d(h)).collect();
    FreeChainComplex::new(c.ring(), 0, ranks, diffs)
}

/// One block of a [`TorAlgebra`] product table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductBlock {
    pub left: usize,
    pub right: usize,
    /// `columns[i * gens(right) + j]` = coordinates of g_i · g_j.
    pub columns: Vec<Vec<u64>>,
}

/// A graded W_N-module with a bilinear product on chosen generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedAlgebra {
    pub p: u64,
    pub level: u32,
    /// Cyclic-factor exponents per degree 0..=maxdeg.
    pub degrees: Vec<Vec<u32>>,
    pub products: Vec<ProductBlock>,
}

/// Tor modules with the product induced from a dg resolution.
pub type TorAlgebra = GradedAlgebra;

impl GradedAlgebra {
    /// Builds the tables from per-degree subquotients and a chain-level
    /// product on ambient vectors.
    pub fn from_chain_product(
        zm: Zmod,
        pieces: &[Subquotient],
        product: &dyn Fn(usize, &[u64], usize, &[u64]) -> Vec<u64>,
    ) -> Result<Self> {
        let maxdeg = pieces.len().saturating_sub(1);
        let reps: Vec<Vec<Vec<u64>>> = pieces.iter().map(|s| s.reps()).collect();
        let mut products = Vec::new();
        for a in 0..=maxdeg {
            for b in 0..=maxdeg - a {
                let mut columns = Vec::new();
                for x in &reps[a] {
                    for y in &reps[b] {
                        let z = product(a, x, b, y);
                        let c = pieces[a + b]
                            .coords(&z)
                            .ok_or_else(|| Error::Invalid(format!("product of degrees {} and {} is not a cycle", a, b)))?;
                        columns.push(c);
                    }
                }
                products.push(ProductBlock { left: a, right: b, columns });
            }
        }
        Ok(TorAlgebra { p: zm.p(), level: zm.n(), degrees: pieces.iter().map(|s| s.exponents()).collect(), products })
    }

    pub fn zm(&self) -> Zmod {
        Zmod::new(self.p, self.level).expect("validated at construction")
    }

    pub fn maxdeg(&self) -> usize {
        self.degrees.len().saturating_sub(1)
    }

    pub fn group(&self, deg: usize) -> AbelianGroup {
        AbelianGroup::new(self.degrees.get(deg).cloned().unwrap_or_default())
    }

    pub fn graded(&self) -> GradedModule {
        let mut g = GradedModule::default();
        for (i, e) in self.degrees.iter().enumerate() {
            g.groups.insert(i as i64, AbelianGroup::new(e.clone()));
        }
        g
    }

    fn block(&self, a: usize, b: usize) -> Option<&ProductBlock> {
        self.products.iter().find(|blk| blk.left == a && blk.right == b)
    }

    /// Product of classes given by coordinates; `None` above maxdeg.
    pub fn mul(&self, a: usize, x: &[u64], b: usize, y: &[u64]) -> Option<Vec<u64>> {
        let blk = self.block(a, b)?;
        let zm = self.zm();
        let target = &self.degrees[a + b];
        let nb = self.degrees[b].len();
        let mut out = vec![0u64; target.len()];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj == 0 {
                    continue;
                }
                let c = zm.mul(xi, yj);
                for (o, v) in out.iter_mut().zip(&blk.columns[i * nb + j]) {
                    *o = zm.mul_add(*o, c, *v);
                }
            }
        }
        for (o, &e) in out.iter_mut().zip(target) {
            *o %= zm.p_pow_int(e);
        }
        Some(out)
    }

    fn basis(&self, deg: usize) -> Vec<Vec<u64>> {
        let k = self.degrees[deg].len();
        (0..k).map(|i| unit_vec(k, i)).collect()
    }

    /// ab = (-1)^{|a||b|} ba on all generator pairs.
    pub fn is_graded_commutative(&self) -> bool {
        let zm = self.zm();
        for a in 0..=self.maxdeg() {
            for b in 0..=self.maxdeg() - a {
                for x in self.basis(a) {
                    for y in self.basis(b) {
                        let xy = self.mul(a, &x, b, &y).expect("in range");
                        let mut yx = self.mul(b, &y, a, &x).expect("in range");
                        if (a * b) % 2 == 1 {
                            yx = yx.iter().zip(&self.degrees[a + b]).map(|(v, &e)| zm.neg(*v) % zm.p_pow_int(e)).collect();
                        }
                        if xy != yx {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// (xy)z = x(yz) on all generator triples within range.
    pub fn is_associative(&self) -> bool {
        for a in 0..=self.maxdeg() {
            for b in 0..=self.maxdeg() - a {
                for c in 0..=self.maxdeg() - a - b {
                    for x in self.basis(a) {
                        for y in self.basis(b) {
                            let xy = self.mul(a, &x, b, &y).expect("in range");
                            for z in self.basis(c) {
                                let yz = self.mul(b, &y, c, &z).expect("in range");
                                let l = self.mul(a + b, &xy, c, &z).expect("in range");
                                let r = self.mul(a, &x, b + c, &yz).expect("in range");
                                if l != r {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
        }
        true
    }
}

/// Tor_*^S(S/(elems), W) with the product of the Koszul dg-algebra.
pub fn tor_algebra(ring: &PolyQuotientRing, elems: &[Vec<u64>], maxdeg: usize) -> Result<TorAlgebra> {
    let res = koszul(ring, elems)?;
    let zm = ring.zm();
    let w = SModule::residue(ring);
    let c = res.tensor_module(ring, &w)?;
    let t = elems.len();
    let pieces: Vec<Subquotient> = (0..=maxdeg as i64).map(|i| c.homology(i)).collect();
    let bases: Vec<Vec<Vec<usize>>> = (0..=t).map(|k| subsets(t, k)).collect();
    let product = |a: usize, x: &[u64], b: usize, y: &[u64]| -> Vec<u64> {
        if a + b > t {
            return Vec::new();
        }
        let pos: HashMap<&Vec<usize>, usize> = bases[a + b].iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut out = vec![0u64; bases[a + b].len()];
        for (i, &xi) in x.iter().enumerate() {
            for (j, &yj) in y.iter().enumerate() {
                if xi == 0 || yj == 0 {
                    continue;
                }
                if let Some((neg, s)) = wedge(&bases[a][i], &bases[b][j]) {
                    let v = zm.mul(xi, yj);
                    let k = pos[&s];
                    out[k] = if neg { zm.sub(out[k], v) } else { zm.add(out[k], v) };
                }
            }
        }
        out
    };
    TorAlgebra::from_chain_product(zm, &pieces, &product)
}

/// Product of basis elements u_a · u_b in H_*((Z/p^n)^k; W_n) on the
/// periodic basis: per factor e² = 0 and divided powers in even degrees,
/// with the Koszul sign across factors.
pub fn periodic_product(zm: Zmod, a: &[u32], b: &[u32]) -> Option<(u64, Vec<u32>)> {
    let mut coeff = 1 % zm.modulus();
    let mut sign = 0u32;
    for i in 0..a.len() {
        for j in 0..i {
            sign += a[i] * b[j];
        }
    }
    let mut out = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        if x % 2 == 1 && y % 2 == 1 {
            return None;
        }
        let (k, l) = ((x / 2) as usize, (y / 2) as usize);
        let binom = binomial_table(zm, k + l);
        coeff = zm.mul(coeff, binom[k + l][k]);
        out.push(x + y);
    }
    if sign % 2 == 1 {
        coeff = zm.neg(coeff);
    }
    if coeff == 0 {
        None
    } else {
        Some((coeff, out))
    }
}

/// Bilinear extension of [`periodic_product`] on tuple-indexed vectors.
pub fn periodic_vector_product(zm: Zmod, factors: usize, a: usize, x: &[u64], b: usize, y: &[u64]) -> Vec<u64> {
    let ba = tuples(factors, a as u32);
    let bb = tuples(factors, b as u32);
    let bc = tuples(factors, (a + b) as u32);
    let pos: HashMap<&Vec<u32>, usize> = bc.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut out = vec![0u64; bc.len()];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj == 0 {
                continue;
            }
            if let Some((c, t)) = periodic_product(zm, &ba[i], &bb[j]) {
                let k = pos[&t];
                out[k] = zm.mul_add(out[k], zm.mul(xi, yj), c);
            }
        }
    }
    out
}

/// Tor^{W_n[(Z/p^n)^k]}(W_n, W_n) at a single level, from the base change
/// of the tensor of periodic resolutions, with the divided-power product.
pub fn periodic_tor_algebra(p: u64, n: u32, factors: usize, maxdeg: usize) -> Result<TorAlgebra> {
    let zm = Zmod::new(p, n)?;
    let c = level_model(p, n, factors, maxdeg + 1)?;
    let pieces: Vec<Subquotient> = (0..=maxdeg as i64).map(|i| c.homology(i)).collect();
    let product = |a: usize, x: &[u64], b: usize, y: &[u64]| periodic_vector_product(zm, factors, a, x, b, y);
    TorAlgebra::from_chain_product(zm, &pieces, &product)
}

/// (⊗_{k} P) ⊗ W_n for the periodic resolution P of W_n over
/// W_n[Z/p^n], on the tuple basis. Each factor is base-changed honestly
/// and the tensor differential is assembled with Koszul signs.
pub fn level_model(p: u64, n: u32, factors: usize, length: usize) -> Result<ModComplex> {
    let zm = Zmod::new(p, n)?;
    let single = cyclic_resolution(p, n, n, length)?.base_change();
    let mut terms = Vec::new();
    let mut diffs = Vec::new();
    for k in 0..=length {
        let basis = tuples(factors, k as u32);
        terms.push(ModSpace::free(basis.len(), n));
        if k == 0 {
            continue;
        }
        let lower = tuples(factors, k as u32 - 1);
        let pos: HashMap<&Vec<u32>, usize> = lower.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut d = ZMat::zeros(zm, lower.len(), basis.len());
        for (c, t) in basis.iter().enumerate() {
            let mut sign_deg = 0u32;
            for v in 0..factors {
                if t[v] > 0 {
                    let mut l = t.clone();
                    l[v] -= 1;
                    let mut x = single.d(t[v] as i64).get(0, 0);
                    if sign_deg % 2 == 1 {
                        x = zm.neg(x);
                    }
                    let r = pos[&l];
                    d.set(r, c, zm.add(d.get(r, c), x));
                }
                sign_deg += t[v];
            }
        }
        diffs.push(d);
    }
    ModComplex::new(zm, 0, terms, diffs)
}

/// Outcome of [`exterior_compare`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExteriorComparison {
    pub matches: bool,
    /// Coordinates of the degree-one generators e_1..e_δ.
    pub generators: Vec<Vec<u64>>,
    pub failure: Option<String>,
}

/// Compares a Tor algebra with ∧*(W^δ): ranks C(δ,i), generation in degree
/// one, e_i e_j = -e_j e_i and e_i² = 0.
pub fn exterior_compare(t: &TorAlgebra, delta: usize) -> ExteriorComparison {
    let zm = t.zm();
    let fail = |gens: Vec<Vec<u64>>, msg: String| ExteriorComparison { matches: false, generators: gens, failure: Some(msg) };
    for (i, e) in t.degrees.iter().enumerate() {
        let expected = if i <= delta { binom(delta, i) } else { 0 };
        if e.len() != expected || e.iter().any(|&x| x != t.level) {
            let what = if i > delta && !e.is_empty() {
                format!("nonzero class in degree {} above δ = {}: factors {:?}", i, delta, e)
            } else {
                format!("degree {} has factors {:?}, expected {} copies of Z/p^{}", i, e, expected, t.level)
            };
            return fail(Vec::new(), what);
        }
    }
    let gens: Vec<Vec<u64>> = if t.maxdeg() >= 1 { t.basis(1) } else { Vec::new() };
    for (i, x) in gens.iter().enumerate() {
        for (j, y) in gens.iter().enumerate() {
            if t.maxdeg() < 2 {
                break;
            }
            let xy = t.mul(1, x, 1, y).expect("in range");
            let yx = t.mul(1, y, 1, x).expect("in range");
            let sum: Vec<u64> = xy.iter().zip(&yx).map(|(a, b)| zm.add(*a, *b) % zm.p_pow_int(t.level)).collect();
            if sum.iter().any(|&v| v != 0) {
                return fail(gens.clone(), format!("e_{} e_{} + e_{} e_{} ≠ 0", i + 1, j + 1, j + 1, i + 1));
            }
            if i == j && xy.iter().any(|&v| v != 0) {
                return fail(gens.clone(), format!("e_{}² ≠ 0", i + 1));
            }
        }
    }
    // monomials e_S span each degree
    for k in 0..=t.maxdeg().min(delta) {
        let mut vecs = Vec::new();
        for s in subsets(delta, k) {
            let mut acc = vec![1 % zm.modulus()];
            let mut deg = 0;
            for &i in &s {
                acc = t.mul(deg, &acc, 1, &gens[i]).expect("in range");
                deg += 1;
            }
            vecs.push(acc);
        }
        let dim = t.degrees[k].len();
        let span = Submodule::from_caps(zm, &t.degrees[k]).with_gens(vecs);
        if span.order_log() != dim as u64 * zm.n() as u64 {
            return fail(gens.clone(), format!("degree {} is not generated by products of degree-one classes", k));
        }
    }
    ExteriorComparison { matches: true, generators: gens, failure: None }
}

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// A graded system of Tor groups over levels with transitions between
/// consecutive levels (`transitions[k][i]`: level k+1 → level k in degree i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorSystem {
    pub p: u64,
    pub levels: Vec<u32>,
    pub groups: Vec<Vec<Vec<u32>>>,
    pub transitions: Vec<Vec<GroupMap>>,
}

/// Limit of one degree of a [`TorSystem`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitDegree {
    pub degree: usize,
    /// Stable image in the base-level group.
    pub stable_image: Vec<u32>,
    /// Number of Z/p^{base} summands of the stable image.
    pub rank: usize,
    pub stabilized: bool,
    /// Least level whose image into the base level equals the last one.
    pub stabilized_at: Option<u32>,
    /// log_p of the image order for each level's map to the base.
    pub image_logs: Vec<u64>,
}

/// Inverse limit with stabilization certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitTor {
    pub base_level: u32,
    pub degrees: Vec<LimitDegree>,
}

impl LimitTor {
    pub fn ranks(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.rank).collect()
    }
    pub fn stabilized(&self) -> bool {
        self.degrees.iter().all(|d| d.stabilized)
    }
}

impl GroupMap {
    /// Checks that each column respects the source order.
    pub fn is_well_defined(&self, zm: Zmod) -> bool {
        self.columns.len() == self.source.len()
            && self.columns.iter().zip(&self.source).all(|(c, &a)| {
                c.len() == self.target.len()
                    && c.iter().zip(&self.target).all(|(&x, &b)| {
                        let shifted = (x as u128 * zm.p_pow_int(a.min(zm.n())) as u128) % zm.p_pow_int(b) as u128;
                        shifted == 0
                    })
            })
    }
}

/// Stable images of the maps from every level down to the lowest one. A
/// degree is certified when the last two levels have equal images.
pub fn limit_tor(sys: &TorSystem) -> Result<LimitTor> {
    let k = sys.levels.len();
    if k == 0 || sys.groups.len() != k || sys.transitions.len() + 1 != k {
        return Err(Error::Shape("levels, groups and transitions disagree".into()));
    }
    if sys.levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("levels must increase".into()));
    }
    let top = *sys.levels.last().expect("nonempty");
    let zm = Zmod::new(sys.p, top)?;
    let ndeg = sys.groups[0].len();
    let mut degrees = Vec::new();
    for i in 0..ndeg {
        for (kk, tr) in sys.transitions.iter().enumerate() {
            let f = &tr[i];
            if f.source != sys.groups[kk + 1][i] || f.target != sys.groups[kk][i] || !f.is_well_defined(zm) {
                return Err(Error::Invalid(format!("transition {} → {} in degree {} is not a homomorphism", sys.levels[kk + 1], sys.levels[kk], i)));
            }
        }
        let base = sys.groups[0][i].clone();
        let caps = Submodule::from_caps(zm, &base);
        let mut images = vec![caps.with_gens((0..base.len()).map(|j| unit_vec(base.len(), j)))];
        let mut composite = identity_map(&base);
        for tr in &sys.transitions {
            composite = tr[i].then(zm, &composite);
            images.push(caps.with_gens(composite.columns.iter().cloned()));
        }
        let last = images.last().expect("nonempty").clone();
        let same = |a: &Submodule, b: &Submodule| a.contains_all(b) && b.contains_all(a);
        let stabilized = k >= 2 && same(&images[k - 1], &images[k - 2]);
        let stabilized_at = if stabilized {
            let mut at = k - 1;
            while at > 0 && same(&images[at - 1], &last) {
                at -= 1;
            }
            Some(sys.levels[at])
        } else {
            None
        };
        let stable = Subquotient::new(last.clone(), &base, &[]);
        let exps = stable.exponents();
        let rank = exps.iter().filter(|&&e| e == sys.levels[0]).count();
        degrees.push(LimitDegree {
            degree: i,
            stable_image: exps,
            rank,
            stabilized,
            stabilized_at,
            image_logs: images.iter().map(|s| s.order_log() - caps.order_log()).collect(),
        });
    }
    Ok(LimitTor { base_level: sys.levels[0], degrees })
}

pub(crate) fn identity_map(exps: &[u32]) -> GroupMap {
    GroupMap { source: exps.to_vec(), target: exps.to_vec(), columns: (0..exps.len()).map(|j| unit_vec(exps.len(), j)).collect() }
}

/// Homology-level scalars c_j of the comparison map from the periodic
/// resolution at level `hi` to the one at level `lo`, degrees 0..=length.
pub fn periodic_transition_scalars(p: u64, hi: u32, lo: u32, length: usize) -> Result<Vec<u64>> {
    let src = cyclic_resolution(p, hi, hi, length)?;
    let tgt = cyclic_resolution(p, lo, lo, length)?;
    let (_, f) = comparison_map(&src, &tgt)?;
    let ring = tgt.complex.ring().clone();
    Ok((0..=length as i64).map(|j| ring.augment_w(&f.maps[&j].get(0, 0))).collect())
}

/// Tor^{W_n[(Z/p^n)^k]}(W_n, W_n) over several levels with transitions
/// induced by honest comparison maps of periodic resolutions.
pub fn periodic_tor_system(p: u64, factors: usize, levels: &[u32], maxdeg: usize) -> Result<(TorSystem, Vec<ModComplex>)> {
    let mut complexes = Vec::new();
    let mut pieces: Vec<Vec<Subquotient>> = Vec::new();
    for &n in levels {
        let c = level_model(p, n, factors, maxdeg + 1)?;
        pieces.push((0..=maxdeg as i64).map(|i| c.homology(i)).collect());
        complexes.push(c);
    }
    let mut transitions = Vec::new();
    for w in 0..levels.len().saturating_sub(1) {
        let (lo, hi) = (levels[w], levels[w + 1]);
        let scalars = periodic_transition_scalars(p, hi, lo, maxdeg + 1)?;
        let zlo = Zmod::new(p, lo)?;
        let mut per_deg = Vec::new();
        for i in 0..=maxdeg {
            let basis = tuples(factors, i as u32);
            let diag: Vec<u64> = basis.iter().map(|t| t.iter().fold(1 % zlo.modulus(), |acc, &k| zlo.mul(acc, scalars[k as usize]))).collect();
            let hs = &pieces[w + 1][i];
            let ht = &pieces[w][i];
            let mut columns = Vec::new();
            for rep in hs.reps() {
                let img: Vec<u64> = rep.iter().zip(&diag).map(|(&x, &c)| zlo.mul(x % zlo.modulus(), c)).collect();
                columns.push(ht.coords(&img).ok_or(Error::NotAChainMap { degree: i as i64 })?);
            }
            per_deg.push(GroupMap { source: hs.exponents(), target: ht.exponents(), columns });
        }
        transitions.push(per_deg);
    }
    let groups = pieces.iter().map(|ps| ps.iter().map(|s| s.exponents()).collect()).collect();
    Ok((TorSystem { p, levels: levels.to_vec(), groups, transitions }, complexes))
}

/// The limit Tor algebra: stable image at the base level of a periodic
/// system, with the product restricted from the base-level algebra.
pub fn limit_tor_algebra(p: u64, factors: usize, levels: &[u32], maxdeg: usize) -> Result<(LimitTor, TorAlgebra)> {
    let (sys, complexes) = periodic_tor_system(p, factors, levels, maxdeg)?;
    let limit = limit_tor(&sys)?;
    let base = levels[0];
    let zm = Zmod::new(p, base)?;
    let c = &complexes[0];
    let mut pieces = Vec::new();
    for i in 0..=maxdeg {
        let full = c.homology(i as i64);
        // images of the top level's classes, pushed down to the base
        let mut gens = Vec::new();
        let mut comp = identity_map(&sys.groups[0][i]);
        for tr in &sys.transitions {
            comp = tr[i].then(zm, &comp);
        }
        for col in &comp.columns {
            gens.push(full.element(col));
        }
        let top = Submodule::from_gens(zm, c.dim(i as i64), gens).with_gens(c.boundary_gens(i as i64));
        pieces.push(Subquotient::new(top, &c.term(i as i64).caps, &c.boundary_gens(i as i64)));
    }
    let product = |a: usize, x: &[u64], b: usize, y: &[u64]| periodic_vector_product(zm, factors, a, x, b, y);
    let alg = TorAlgebra::from_chain_product(zm, &pieces, &product)?;
    Ok((limit, alg))
}

/// A graded W_N-module with operators raising degree (by V) and lowering
/// degree (by V*), and a pairing V × V* → W_N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedActionModule {
    pub zm: Zmod,
    /// Free ranks of degrees 0..=top.
    pub dims: Vec<usize>,
    /// `raise[v][d]`: degree d → d+1, for d < top.
    pub raise: Vec<Vec<ZMat>>,
    /// `lower[w][d]`: degree d+1 → d, for d < top.
    pub lower: Vec<Vec<ZMat>>,
    /// `pairing[v][w]`.
    pub pairing: Vec<Vec<u64>>,
}

/// First basis vector where the anticommutator identity fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatViolation {
    pub v: usize,
    pub w: usize,
    pub degree: usize,
    pub basis: usize,
}

/// Outcome of [`exterior_compat_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatReport {
    pub holds: bool,
    pub violation: Option<CompatViolation>,
    /// Whether the module is generated over ∧*V in its lowest degree.
    pub generated_in_min_degree: bool,
    /// The reconstructed V*-action equals the given one (when generated).
    pub unique_action_matches: Option<bool>,
}

impl GradedActionModule {
    fn check_shapes(&self) -> Result<()> {
        let top = self.dims.len().saturating_sub(1);
        let ok_ops = |ops: &Vec<Vec<ZMat>>, up: bool| {
            ops.iter().all(|per| {
                per.len() == top
                    && per.iter().enumerate().all(|(d, m)| {
                        let (r, c) = if up { (self.dims[d + 1], self.dims[d]) } else { (self.dims[d], self.dims[d + 1]) };
                        m.rows() == r && m.cols() == c
                    })
            })
        };
        if !ok_ops(&self.raise, true) || !ok_ops(&self.lower, false) {
            return Err(Error::Shape("operator matrices do not match the graded dimensions".into()));
        }
        if self.pairing.len() != self.raise.len() || self.pairing.iter().any(|r| r.len() != self.lower.len()) {
            return Err(Error::Shape("pairing must be |V| × |V*|".into()));
        }
        Ok(())
    }

    /// W(d)V(d) + V(d-1)W(d-1) on degree d as a matrix.
    fn anticommutator(&self, v: usize, w: usize, d: usize) -> ZMat {
        let zm = self.zm;
        let top = self.dims.len() - 1;
        let mut acc = ZMat::zeros(zm, self.dims[d], self.dims[d]);
        if d < top {
            acc = acc.add(&self.lower[w][d].mul(&self.raise[v][d]));
        }
        if d > 0 {
            acc = acc.add(&self.raise[v][d - 1].mul(&self.lower[w][d - 1]));
        }
        acc
    }
}

/// Checks w·v·m + v·w·m = ⟨v,w⟩m on bases, and when M is generated in its
/// lowest degree reconstructs the unique compatible V*-action and compares.
pub fn exterior_compat_check(m: &GradedActionModule) -> Result<CompatReport> {
    m.check_shapes()?;
    let zm = m.zm;
    let mut violation = None;
    'outer: for v in 0..m.raise.len() {
        for w in 0..m.lower.len() {
            for d in 0..m.dims.len() {
                let a = m.anticommutator(v, w, d);
                let c = m.pairing[v][w] % zm.modulus();
                for j in 0..m.dims[d] {
                    for i in 0..m.dims[d] {
                        let expect = if i == j { c } else { 0 };
                        if a.get(i, j) != expect {
                            violation = Some(CompatViolation { v, w, degree: d, basis: j });
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    let d0 = m.dims.iter().position(|&x| x > 0);
    let top = m.dims.len().saturating_sub(1);
    let generated = match d0 {
        None => true,
        Some(d0) => (d0 + 1..=top).all(|d| {
            let gens: Vec<Vec<u64>> = m.raise.iter().flat_map(|per| {
                let g = &per[d - 1];
                (0..g.cols()).map(|j| g.col(j)).collect::<Vec<_>>()
            }).collect();
            Submodule::from_gens(zm, m.dims[d], gens).order_log() == m.dims[d] as u64 * zm.n() as u64
        }),
    };
    let unique = match (generated, d0) {
        (true, Some(d0)) => {
            let mut matches = true;
            for w in 0..m.lower.len() {
                // rebuilt[d] : d+1 → d
                let mut rebuilt: Vec<ZMat> = Vec::new();
                for d in 0..top {
                    if d < d0 {
                        rebuilt.push(ZMat::zeros(zm, m.dims[d], m.dims[d + 1]));
                        continue;
                    }
                    // X·V_a(d) = ⟨a,w⟩I − V_a(d−1)·X_prev
                    let mut g = ZMat::zeros(zm, m.dims[d + 1], 0);
                    let mut r = ZMat::zeros(zm, m.dims[d], 0);
                    for (a, per) in m.raise.iter().enumerate() {
                        g = g.hstack(&per[d]);
                        let mut rhs = ZMat::identity(zm, m.dims[d]).scale(m.pairing[a][w] % zm.modulus());
                        if d > 0 {
                            rhs = rhs.sub(&per[d - 1].mul(&rebuilt[d - 1]));
                        }
                        r = r.hstack(&rhs);
                    }
                    match solve_many(&g.transpose(), &r.transpose()) {
                        Some(xt) => rebuilt.push(xt.transpose()),
                        None => {
                            matches = false;
                            rebuilt.push(ZMat::zeros(zm, m.dims[d], m.dims[d + 1]));
                        }
                    }
                }
                if rebuilt.iter().zip(&m.lower[w]).any(|(a, b)| a != b) {
                    matches = false;
                }
            }
            Some(matches)
        }
        _ => None,
    };
    Ok(CompatReport { holds: violation.is_none(), violation, generated_in_min_degree: generated, unique_action_matches: unique })
}

/// ∧*(W_N^k) with wedge by basis vectors and contraction, pairing δ_{vw}.
pub fn exterior_model(zm: Zmod, k: usize) -> GradedActionModule {
    let bases: Vec<Vec<Vec<usize>>> = (0..=k).map(|d| subsets(k, d)).collect();
    let dims: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    let pos: Vec<HashMap<&Vec<usize>, usize>> = bases.iter().map(|b| b.iter().enumerate().map(|(i, s)| (s, i)).collect()).collect();
    let one = 1 % zm.modulus();
    let raise = (0..k)
        .map(|v| {
            (0..k)
                .map(|d| {
                    let mut m = ZMat::zeros(zm, dims[d + 1], dims[d]);
                    for (j, s) in bases[d].iter().enumerate() {
                        if let Some((neg, t)) = wedge(&[v], s) {
                            m.set(pos[d + 1][&t], j, if neg { zm.neg(one) } else { one });
                        }
                    }
                    m
                })
                .collect()
        })
        .collect();
    let lower = (0..k)
        .map(|w| {
            (0..k)
                .map(|d| {
                    let mut m = ZMat::zeros(zm, dims[d], dims[d + 1]);
                    for (j, s) in bases[d + 1].iter().enumerate() {
                        if let Some(at) = s.iter().position(|&x| x == w) {
                            let mut t = s.clone();
                            t.remove(at);
                            m.set(pos[d][&t], j, if at % 2 == 1 { zm.neg(one) } else { one });
                        }
                    }
                    m
                })
                .collect()
        })
        .collect();
    let pairing = (0..k).map(|v| (0..k).map(|w| if v == w { one } else { 0 }).collect()).collect();
    GradedActionModule { zm, dims, raise, lower, pairing }
}

/// Outcome of [`group_algebra_identification`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub p: u64,
    pub n: u32,
    pub vars: usize,
    pub dim: usize,
    /// (1+X_i)^{p^n} = 1 and σ_i^{p^n} = 1 hold under the maps.
    pub relations_hold: bool,
    /// X_i ↦ σ_i − 1 and σ_i ↦ 1 + X_i are mutually inverse on bases.
    pub inverse_on_basis: bool,
    /// Every basis element was checked, not just the univariate tables.
    pub exhaustive: bool,
    pub products_checked: usize,
    pub multiplicative: bool,
}

impl IdentificationReport {
    pub fn passes(&self) -> bool {
        self.relations_hold && self.inverse_on_basis && self.multiplicative
    }
}

/// Coefficients of (σ−1)^k on σ^0..σ^k.
fn shifted_powers(zm: Zmod, top: usize) -> Vec<Vec<u64>> {
    let b = binomial_table(zm, top);
    (0..=top)
        .map(|k| (0..=k).map(|j| if (k - j) % 2 == 0 { b[k][j] } else { zm.neg(b[k][j]) }).collect())
        .collect()
}

/// Largest group order with an exhaustive basis check.
const EXHAUSTIVE_LIMIT: usize = 4096;

/// Identifies W_n[X]/((1+X_i)^{p^n} − 1) with W_n[(Z/p^n)^vars] through
/// X_i ↦ σ_i − 1, with inverse σ_i ↦ 1 + X_i.
pub fn group_algebra_identification<R: Rng>(p: u64, n: u32, vars: usize, samples: usize, rng: &mut R) -> Result<IdentificationReport> {
    let poly = PolyQuotientRing::group_algebra(p, n, vec![n; vars])?;
    let ring = Ring::new(RingSpec::new(p, n, vec![n; vars]))?;
    let zm = ring.zm();
    let q = zm.p().pow(n) as usize;
    let sp = shifted_powers(zm, q);
    let bin = binomial_table(zm, q);
    let to_group = |a: &[u32]| -> RingElem {
        // Kronecker product of univariate expansions
        let mut terms: Vec<(Vec<usize>, u64)> = vec![(Vec::new(), 1 % zm.modulus())];
        for &ai in a {
            let row = &sp[ai as usize];
            let mut next = Vec::new();
            for (d, c) in &terms {
                for (j, &r) in row.iter().enumerate() {
                    if r != 0 {
                        let mut dd = d.clone();
                        dd.push(j % q);
                        next.push((dd, zm.mul(*c, r)));
                    }
                }
            }
            terms = next;
        }
        let mut out = ring.zero();
        for (d, c) in terms {
            let h = ring.index_of(&d);
            out.0[h] = zm.add(out.0[h], c);
        }
        out
    };
    let phi = |x: &[u64]| -> RingElem {
        let mut out = ring.zero();
        for (i, &c) in x.iter().enumerate() {
            if c != 0 {
                out = ring.add(&out, &ring.scale(c, &to_group(poly.monomial(i))));
            }
        }
        out
    };
    let psi_basis = |g: usize| -> Vec<u64> {
        let digits = ring.digits(g);
        let mut terms: Vec<(Vec<u32>, u64)> = vec![(Vec::new(), 1 % zm.modulus())];
        for &d in &digits {
            let mut next = Vec::new();
            for (m, c) in &terms {
                for k in 0..=d {
                    let r = bin[d][k];
                    if r != 0 {
                        let mut mm = m.clone();
                        mm.push(k as u32);
                        next.push((mm, zm.mul(*c, r)));
                    }
                }
            }
            terms = next;
        }
        let mut out = poly.zero();
        for (m, c) in terms {
            let i = poly.monomial_index(&m).expect("exponents below the group order");
            out[i] = zm.add(out[i], c);
        }
        out
    };
    let psi = |x: &RingElem| -> Vec<u64> {
        let mut out = poly.zero();
        for (g, &c) in x.coeffs().iter().enumerate() {
            if c != 0 {
                out = poly.add(&out, &poly.scale(c, &psi_basis(g)));
            }
        }
        out
    };
    // relations on both sides
    let mut relations_hold = true;
    for i in 0..vars {
        let u = poly.add(&poly.one(), &poly.var(i));
        relations_hold &= poly.pow(&u, q as u64) == poly.one();
        let s = ring.add(&ring.one(), &phi(&poly.var(i)));
        relations_hold &= s == ring.sigma(i) && ring.pow(&s, q as u64) == ring.one();
        relations_hold &= psi(&ring.sigma(i)) == u;
    }
    // univariate tables are mutually inverse; the multivariate maps are
    // their Kronecker products
    let mut inverse_on_basis = true;
    for a in 0..q {
        let mut back = vec![0u64; q];
        for (j, &c) in sp[a].iter().enumerate() {
            for k in 0..=j {
                back[k] = zm.mul_add(back[k], c, bin[j][k]);
            }
        }
        inverse_on_basis &= back.iter().enumerate().all(|(k, &x)| x == if k == a { 1 % zm.modulus() } else { 0 });
    }
    let dim = poly.dim();
    let exhaustive = dim <= EXHAUSTIVE_LIMIT;
    if exhaustive {
        // both maps as sparse columns on the standard bases
        let sparse = |v: &[u64]| -> Vec<(usize, u64)> { v.iter().copied().enumerate().filter(|t| t.1 != 0).collect() };
        let phi_cols: Vec<Vec<(usize, u64)>> = (0..dim).map(|a| sparse(to_group(poly.monomial(a)).coeffs())).collect();
        let psi_cols: Vec<Vec<(usize, u64)>> = (0..dim).map(|g| sparse(&psi_basis(g))).collect();
        let is_unit_vector = |outer: &[(usize, u64)], inner: &[Vec<(usize, u64)>], at: usize| -> bool {
            let mut acc = vec![0u64; dim];
            for &(j, c) in outer {
                for &(i, d) in &inner[j] {
                    acc[i] = zm.mul_add(acc[i], c, d);
                }
            }
            acc.iter().enumerate().all(|(i, &x)| x == if i == at { 1 % zm.modulus() } else { 0 })
        };
        for a in 0..dim {
            inverse_on_basis &= is_unit_vector(&phi_cols[a], &psi_cols, a);
            inverse_on_basis &= is_unit_vector(&psi_cols[a], &phi_cols, a);
        }
    }
    // multiplicativity on sparse random elements
    let sample_mono = |rng: &mut R| -> Vec<u32> {
        loop {
            let m: Vec<u32> = (0..vars).map(|_| rng.gen_range(0..q as u32)).collect();
            if m.iter().map(|&x| x as usize + 1).product::<usize>() <= 64 {
                return m;
            }
        }
    };
    let mut multiplicative = true;
    for _ in 0..samples {
        let mut x = poly.zero();
        let mut y = poly.zero();
        for _ in 0..3 {
            let (a, b) = (sample_mono(rng), sample_mono(rng));
            let (ia, ib) = (poly.monomial_index(&a).expect("in range"), poly.monomial_index(&b).expect("in range"));
            x[ia] = zm.add(x[ia], rng.gen_range(1..zm.modulus().max(2)) % zm.modulus());
            y[ib] = zm.add(y[ib], rng.gen_range(1..zm.modulus().max(2)) % zm.modulus());
        }
        multiplicative &= phi(&poly.mul(&x, &y)) == ring.mul(&phi(&x), &phi(&y));
    }
    Ok(IdentificationReport { p, n, vars, dim, relations_hold, inverse_on_basis, exhaustive, products_checked: samples, multiplicative })
}

/// The module M ⊗ W_n[(Z/p^{e})^r] over the ring with `r` extra
/// group-algebra variables appended.
pub fn add_free_variables(base: &PolyQuotientRing, m: &SModule, r: usize) -> Result<(PolyQuotientRing, SModule)> {
    let Relations::GroupAlgebra { exponents } = base.relations().clone() else {
        return Err(Error::Invalid("free variables are added to group-algebra rings".into()));
    };
    let zm = base.zm();
    let e = exponents.first().copied().unwrap_or(zm.n());
    let extra = PolyQuotientRing::group_algebra(zm.p(), zm.n(), vec![e; r])?;
    let mut all = exponents.clone();
    all.extend(std::iter::repeat_n(e, r));
    let big = PolyQuotientRing::group_algebra(zm.p(), zm.n(), all)?;
    let t = extra.dim();
    let id_t = ZMat::identity(zm, t);
    let id_m = ZMat::identity(zm, m.dim());
    let mut actions: Vec<ZMat> = m.actions.iter().map(|a| a.kron(&id_t)).collect();
    for i in 0..r {
        actions.push(id_m.kron(&extra.action(i)));
    }
    let mut caps = Vec::with_capacity(m.dim() * t);
    for &c in &m.space.caps {
        caps.extend(std::iter::repeat_n(c, t));
    }
    let rel = m.space.rel.iter().flat_map(|g| {
        (0..t).map(move |k| {
            let mut v = vec![0u64; g.len() * t];
            for (i, &x) in g.iter().enumerate() {
                v[i * t + k] = x;
            }
            v
        })
    });
    let mut space = ModSpace::with_caps(caps);
    space.rel = rel.collect();
    Ok((big, SModule { space, actions }))
}

/// Tor groups before and after adding free variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeVariableComparison {
    pub r: usize,
    pub base: Vec<Vec<u32>>,
    pub extended: Vec<Vec<u32>>,
}

impl FreeVariableComparison {
    pub fn unchanged(&self) -> bool {
        self.base == self.extended
    }
}

/// Tor^{S}(W_n, M) against Tor^{S ⊗ W_n[(Z/p^e)^r]}(W_n, M ⊗ W_n[(Z/p^e)^r]).
pub fn free_variable_tor(base: &PolyQuotientRing, m: &SModule, r: usize, maxdeg: usize, budget: u128) -> Result<FreeVariableComparison> {
    let groups = |g: &GradedModule| -> Vec<Vec<u32>> { (0..=maxdeg as i64).map(|i| g.get(i).exponents).collect() };
    let w = SModule::residue(base);
    let lhs = tor(base, &w, m, maxdeg, &TorStrategy::Periodic, budget)?;
    let (big, big_m) = add_free_variables(base, m, r)?;
    let need = (big_m.dim() as u128) * (binom(maxdeg + 1 + big.vars(), big.vars()) as u128);
    if need.pow(2) > budget {
        return Err(Error::Budget { needed: need.pow(2), budget });
    }
    let w2 = SModule::residue(&big);
    let rhs = tor(&big, &w2, &big_m, maxdeg, &TorStrategy::Periodic, budget)?;
    Ok(FreeVariableComparison { r, base: groups(&lhs), extended: groups(&rhs) })
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    const BUDGET: u128 = 1 << 40;

    #[test]
    fn koszul_on_x_resolves_residue() {
        let s = PolyQuotientRing::power_series(3, 1, 4).unwrap();
        let res = koszul(&s, &[s.var(0)]).unwrap();
        assert_eq!(res.ranks, vec![1, 1]);
        let w = SModule::residue(&s);
        assert!(res.verify_exact(&s, &w).unwrap());
        let t = tor(&s, &SModule::quotient(&s, &[s.var(0)]), &w, 3, &TorStrategy::Koszul(vec![s.var(0)]), BUDGET).unwrap();
        assert_eq!(t.get(0).exponents, vec![5]);
        assert_eq!(t.get(1).exponents, vec![5]);
        assert!(t.get(2).is_zero());
    }

    #[test]
    fn non_regular_sequence_is_flagged() {
        let s = PolyQuotientRing::power_series(2, 1, 4).unwrap();
        let x2 = s.element(&[(1, vec![2])]).unwrap();
        let px = s.element(&[(2, vec![1])]).unwrap();
        match koszul(&s, &[x2, px]) {
            Err(Error::NotRegular { truncation, witness }) => {
                assert_eq!(truncation, 4);
                assert!(!witness.is_empty());
            }
            other => panic!("expected a non-regular flag, got {:?}", other.map(|r| r.ranks)),
        }
    }

    #[test]
    fn coordinate_sequence_is_regular() {
        let s = PolyQuotientRing::power_series(2, 3, 3).unwrap();
        let res = koszul(&s, &[s.var(1), s.var(2)]).unwrap();
        assert_eq!(res.ranks, vec![1, 2, 1]);
        let m = SModule::quotient(&s, &[s.var(1), s.var(2)]);
        assert!(res.verify_exact(&s, &m).unwrap());
    }

    #[test]
    fn periodic_tor_over_fp_cyclic() {
        let s = PolyQuotientRing::group_algebra(3, 1, vec![1]).unwrap();
        let w = SModule::residue(&s);
        let t = tor(&s, &w, &w, 5, &TorStrategy::Periodic, BUDGET).unwrap();
        for i in 0..=5 {
            assert_eq!(t.get(i).exponents, vec![1], "degree {}", i);
        }
        let m = tor(&s, &w, &w, 5, &TorStrategy::Minimal, BUDGET).unwrap();
        assert_eq!(t, m);
    }

    #[test]
    fn tor_of_free_module() {
        let s = PolyQuotientRing::group_algebra(2, 2, vec![1]).unwrap();
        let free = SModule::free(&s, 1);
        let n = SModule::quotient(&s, &[s.var(0)]);
        let t = tor(&s, &free, &n, 3, &TorStrategy::Minimal, BUDGET).unwrap();
        assert_eq!(t.get(0).order_log(), n.order_log(s.zm()));
        assert!((1..=3).all(|i| t.get(i).is_zero()));
    }

    #[test]
    fn tor_symmetry_and_degree_zero() {
        let s = PolyQuotientRing::group_algebra(2, 1, vec![2]).unwrap();
        let x = s.var(0);
        let i1 = vec![s.mul(&x, &x)];
        let i2 = vec![s.pow(&x, 3)];
        let a = SModule::quotient(&s, &i1);
        let b = SModule::quotient(&s, &i2);
        let ab = tor(&s, &a, &b, 3, &TorStrategy::Minimal, BUDGET).unwrap();
        let ba = tor(&s, &b, &a, 3, &TorStrategy::Minimal, BUDGET).unwrap();
        assert_eq!(ab, ba);
        let both: Vec<Vec<u64>> = i1.iter().chain(&i2).cloned().collect();
        let q = SModule::quotient(&s, &both);
        assert_eq!(ab.get(0).order_log(), q.order_log(s.zm()));
    }

    #[test]
    fn power_series_tor_is_exterior() {
        let s = PolyQuotientRing::power_series(3, 2, 3).unwrap();
        let alg = tor_algebra(&s, &[s.var(0), s.var(1)], 3).unwrap();
        assert!(alg.is_graded_commutative());
        assert!(alg.is_associative());
        let cmp = exterior_compare(&alg, 2);
        assert!(cmp.matches, "{:?}", cmp.failure);
        assert_eq!(cmp.generators.len(), 2);
    }

    #[test]
    fn cyclic_resolution_exact_small() {
        let r = cyclic_resolution(2, 1, 1, 4).unwrap();
        r.complex.validate().unwrap();
        assert!(r.verify_exact(1));
        let bc = r.base_change();
        assert!(bc.d(1).is_zero());
        assert_eq!(bc.d(2).get(0, 0), 0);
        let r = cyclic_resolution(3, 2, 1, 3).unwrap();
        assert_eq!(r.base_change().d(2).get(0, 0), 3);
    }

    #[test]
    fn tensor_of_cyclic_resolutions() {
        let ring = Ring::new(RingSpec::new(3, 1, vec![1, 1])).unwrap();
        let a = periodic_resolution(&ring, 0, 3).unwrap();
        let b = periodic_resolution(&ring, 1, 3).unwrap();
        let t = a.tensor(&b).unwrap();
        t.complex.validate().unwrap();
        assert_eq!(t.complex.ranks()[..4], [1, 2, 3, 4]);
        let c = t.complex.restrict_scalars();
        assert_eq!(c.homology(0).order_log(), 1);
        for i in 1..=2 {
            assert!(c.homology(i).is_zero());
        }
    }

    #[test]
    fn comparison_scalars_are_powers_of_p() {
        let c = periodic_transition_scalars(2, 2, 1, 4).unwrap();
        assert_eq!(c, vec![1, 1, 0, 0, 0]);
        let c = periodic_transition_scalars(3, 3, 2, 4).unwrap();
        assert_eq!(c, vec![1, 1, 3, 3, 0]);
    }

    #[test]
    fn limit_single_factor() {
        let (lim, alg) = limit_tor_algebra(2, 1, &[1, 2, 3], 3).unwrap();
        assert_eq!(lim.ranks(), vec![1, 1, 0, 0]);
        assert!(lim.stabilized());
        assert!(exterior_compare(&alg, 1).matches);
    }

    #[test]
    fn limit_two_factors() {
        let (lim, alg) = limit_tor_algebra(3, 2, &[1, 2], 4).unwrap();
        assert_eq!(lim.ranks(), vec![1, 2, 1, 0, 0]);
        let cmp = exterior_compare(&alg, 2);
        assert!(cmp.matches, "{:?}", cmp.failure);
    }

    #[test]
    fn single_level_periodic_fails_exterior() {
        let alg = periodic_tor_algebra(2, 1, 1, 3).unwrap();
        assert!(alg.is_graded_commutative());
        let cmp = exterior_compare(&alg, 1);
        assert!(!cmp.matches);
        assert!(cmp.failure.unwrap().contains("degree 2"));
    }

    #[test]
    fn delta_zero_exterior() {
        let (lim, alg) = limit_tor_algebra(5, 0, &[1, 2], 2).unwrap();
        assert_eq!(lim.ranks(), vec![1, 0, 0]);
        assert!(exterior_compare(&alg, 0).matches);
    }

    #[test]
    fn constant_system_limit() {
        let g = vec![vec![2, 1], vec![2]];
        let id = |e: &Vec<u32>| identity_map(e);
        let sys = TorSystem {
            p: 3,
            levels: vec![2, 3, 4],
            groups: vec![g.clone(), g.clone(), g.clone()],
            transitions: vec![g.iter().map(id).collect(), g.iter().map(id).collect()],
        };
        let lim = limit_tor(&sys).unwrap();
        assert!(lim.stabilized());
        assert_eq!(AbelianGroup::new(lim.degrees[0].stable_image.clone()), AbelianGroup::new(vec![2, 1]));
        assert_eq!(lim.degrees[0].stabilized_at, Some(2));
        assert_eq!(lim.ranks(), vec![1, 1]);
    }

    #[test]
    fn bad_transition_rejected() {
        let sys = TorSystem {
            p: 2,
            levels: vec![1, 2],
            groups: vec![vec![vec![1]], vec![vec![1]]],
            transitions: vec![vec![GroupMap { source: vec![1], target: vec![2], columns: vec![vec![1]] }]],
        };
        assert!(limit_tor(&sys).is_err());
    }

    #[test]
    fn exterior_compat_model_passes() {
        for p in [2, 3, 5] {
            let zm = Zmod::new(p, 1).unwrap();
            let m = exterior_model(zm, 3);
            let r = exterior_compat_check(&m).unwrap();
            assert!(r.holds, "{:?}", r.violation);
            assert!(r.generated_in_min_degree);
            assert_eq!(r.unique_action_matches, Some(true));
        }
    }

    #[test]
    fn exterior_compat_zero_pairing() {
        let zm = Zmod::new(3, 1).unwrap();
        let mut m = exterior_model(zm, 2);
        for per in m.lower.iter_mut() {
            for x in per.iter_mut() {
                *x = ZMat::zeros(zm, x.rows(), x.cols());
            }
        }
        for row in m.pairing.iter_mut() {
            row.iter_mut().for_each(|c| *c = 0);
        }
        let r = exterior_compat_check(&m).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn exterior_compat_perturbed_fails() {
        let zm = Zmod::new(5, 1).unwrap();
        let mut m = exterior_model(zm, 2);
        let x = m.lower[0][0].get(0, 0);
        m.lower[0][0].set(0, 0, zm.add(x, 1));
        let r = exterior_compat_check(&m).unwrap();
        assert!(!r.holds);
        let v = r.violation.unwrap();
        assert_eq!(v.w, 0);
        assert_eq!(r.unique_action_matches, Some(false));
    }

    #[test]
    fn identification_small() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let r = group_algebra_identification(3, 2, 2, 10, &mut rng).unwrap();
        assert!(r.passes(), "{:?}", r);
        assert!(r.exhaustive);
        let r = group_algebra_identification(2, 1, 3, 10, &mut rng).unwrap();
        assert!(r.passes());
    }

    #[test]
    fn free_variables_leave_tor_unchanged() {
        let s = PolyQuotientRing::group_algebra(2, 1, vec![1, 1]).unwrap();
        let m = SModule::quotient(&s, &[s.var(1)]);
        for r in 0..=2 {
            let cmp = free_variable_tor(&s, &m, r, 3, BUDGET).unwrap();
            assert!(cmp.unchanged(), "{:?}", cmp);
        }
    }

    #[test]
    fn group_module_validation() {
        let s = PolyQuotientRing::group_algebra(2, 1, vec![1]).unwrap();
        let zm = s.zm();
        // X acting by the identity on F_2 violates (1+X)^2 = 1
        let bad = SModule::new(&s, ModSpace::free(1, 1), vec![ZMat::identity(zm, 1)]);
        assert!(bad.is_err());
        let ok = SModule::new(&s, ModSpace::free(1, 1), vec![ZMat::zeros(zm, 1, 1)]);
        assert!(ok.is_ok());
    }
}
