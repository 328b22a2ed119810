//! Inhomogeneous cochains of finite groups with coefficients in finite
//! modules: differentials, cup products, restriction, conjugation, duals.

use crate::complex::{ModComplex, ModSpace};
use crate::error::{Error, Result};
use crate::linalg::{AbelianGroup, Subquotient, ZMat};
use crate::zmod::Zmod;

/// Default cap on the total number of cochain table entries.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Validates associativity, identity and inverses.
    pub fn from_table(rows: &[Vec<usize>]) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        let mut table = Vec::with_capacity(order * order);
        for r in rows {
            if r.len() != order || r.iter().any(|&x| x >= order) {
                return Err(Error::InvalidGroup("table is not square or has out-of-range entries".into()));
            }
            table.extend_from_slice(r);
        }
        let mul = |a: usize, b: usize| table[a * order + b];
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| mul(e, g) == g && mul(g, e) == g))
            .ok_or_else(|| Error::InvalidGroup("no identity".into()))?;
        let mut inverses = vec![0; order];
        for g in 0..order {
            inverses[g] = (0..order)
                .find(|&h| mul(g, h) == identity && mul(h, g) == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {} has no inverse", g)))?;
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                        return Err(Error::InvalidGroup(format!("associativity fails at ({},{},{})", a, b, c)));
                    }
                }
            }
        }
        Ok(FiniteGroup { order, table, identity, inverses })
    }

    /// Product of cyclic groups Z/m_1 × … (mixed radix, first factor most significant).
    pub fn abelian(invariants: &[u64]) -> Result<Self> {
        if invariants.contains(&0) {
            return Err(Error::InvalidGroup("cyclic factor of order 0".into()));
        }
        let order: usize = invariants.iter().map(|&m| m as usize).product();
        let digits = |mut x: usize| {
            let mut d = vec![0usize; invariants.len()];
            for i in (0..invariants.len()).rev() {
                d[i] = x % invariants[i] as usize;
                x /= invariants[i] as usize;
            }
            d
        };
        let index = |d: &[usize]| d.iter().zip(invariants).fold(0usize, |acc, (x, m)| acc * (*m as usize) + x);
        let mut table = vec![0; order * order];
        let mut inverses = vec![0; order];
        for a in 0..order {
            let da = digits(a);
            let inv: Vec<usize> = da.iter().zip(invariants).map(|(x, m)| (*m as usize - x) % *m as usize).collect();
            inverses[a] = index(&inv);
            for b in 0..order {
                let db = digits(b);
                let s: Vec<usize> = da.iter().zip(&db).zip(invariants).map(|((x, y), m)| (x + y) % *m as usize).collect();
                table[a * order + b] = index(&s);
            }
        }
        Ok(FiniteGroup { order, table, identity: 0, inverses })
    }

    pub fn cyclic(m: u64) -> Self {
        FiniteGroup::abelian(&[m]).expect("m ≥ 1")
    }

    pub fn trivial() -> Self {
        FiniteGroup::abelian(&[]).expect("trivial group")
    }

    /// Dihedral group of order 2m: elements r^k (index k) and r^k s (index m + k).
    pub fn dihedral(m: usize) -> Self {
        let order = 2 * m;
        let elem = |k: usize, f: bool| if f { m + k % m } else { k % m };
        let mut rows = vec![vec![0; order]; order];
        for a in 0..order {
            for b in 0..order {
                let (ka, fa) = (a % m, a >= m);
                let (kb, fb) = (b % m, b >= m);
                // r^ka s^fa · r^kb s^fb = r^{ka ± kb} s^{fa+fb}
                let k = if fa { (ka + m - kb) % m } else { (ka + kb) % m };
                rows[a][b] = elem(k, fa ^ fb);
            }
        }
        FiniteGroup::from_table(&rows).expect("dihedral table is a group")
    }

    /// Quaternion group {±1, ±i, ±j, ±k}.
    pub fn quaternion() -> Self {
        // index = 2*unit + sign, units 1,i,j,k
        let unit_mul = |a: usize, b: usize| -> (usize, bool) {
            match (a, b) {
                (0, x) | (x, 0) => (x, false),
                (x, y) if x == y => (0, true),
                (1, 2) => (3, false),
                (2, 1) => (3, true),
                (2, 3) => (1, false),
                (3, 2) => (1, true),
                (3, 1) => (2, false),
                (1, 3) => (2, true),
                _ => unreachable!(),
            }
        };
        let mut rows = vec![vec![0; 8]; 8];
        for a in 0..8 {
            for b in 0..8 {
                let (u, neg) = unit_mul(a / 2, b / 2);
                let sign = (a % 2) ^ (b % 2) ^ (neg as usize);
                rows[a][b] = 2 * u + sign;
            }
        }
        FiniteGroup::from_table(&rows).expect("quaternion table is a group")
    }

    /// Symmetric group on three letters (as the dihedral group of order 6).
    pub fn symmetric3() -> Self {
        FiniteGroup::dihedral(3)
    }

    pub fn order(&self) -> usize {
        self.order
    }
    pub fn identity(&self) -> usize {
        self.identity
    }
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }
    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }
    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|c| c.to_vec()).collect()
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Checks that `map` (indexed by elements of `self`) is a homomorphism into `target`.
    pub fn check_hom(&self, target: &FiniteGroup, map: &[usize]) -> Result<()> {
        if map.len() != self.order || map.iter().any(|&x| x >= target.order) {
            return Err(Error::NotHomomorphism("map has wrong length or out-of-range values".into()));
        }
        for a in 0..self.order {
            for b in 0..self.order {
                if map[self.mul(a, b)] != target.mul(map[a], map[b]) {
                    return Err(Error::NotHomomorphism(format!("fails on ({}, {})", a, b)));
                }
            }
        }
        Ok(())
    }

    /// Cyclic subgroup generated by g, as Z/ord(g) with its inclusion map.
    pub fn cyclic_subgroup(&self, g: usize) -> (FiniteGroup, Vec<usize>) {
        let m = self.element_order(g);
        let mut map = Vec::with_capacity(m);
        let mut x = self.identity;
        for _ in 0..m {
            map.push(x);
            x = self.mul(x, g);
        }
        (FiniteGroup::cyclic(m as u64), map)
    }

    /// Index of the tuple (g_1, …, g_i) with g_1 most significant.
    #[inline]
    pub fn tuple_index(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |acc, &g| acc * self.order + g)
    }

    pub fn tuple(&self, mut idx: usize, len: usize) -> Vec<usize> {
        let mut t = vec![0; len];
        for k in (0..len).rev() {
            t[k] = idx % self.order;
            idx /= self.order;
        }
        t
    }

    pub fn tuple_count(&self, len: usize) -> usize {
        self.order.pow(len as u32)
    }
}

/// Finite G-module ⊕ Z/p^{a_i} with one action matrix per group element.
/// Coordinates live in W_N with N = max a_i; entry (i, j) of an action
/// matrix is kept reduced mod p^{a_i}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GModule {
    zm: Zmod,
    exps: Vec<u32>,
    action: Vec<ZMat>,
}

impl GModule {
    /// Builds the module from actions of generators; the action of every
    /// element is generated by products and then validated.
    pub fn from_generators(group: &FiniteGroup, p: u64, exps: Vec<u32>, gens: &[(usize, ZMat)]) -> Result<Self> {
        let level = exps.iter().copied().max().unwrap_or(1).max(1);
        let zm = Zmod::new(p, level)?;
        if exps.contains(&0) {
            return Err(Error::InvalidModule("zero exponent".into()));
        }
        let r = exps.len();
        let mut action: Vec<Option<ZMat>> = vec![None; group.order()];
        action[group.identity()] = Some(ZMat::identity(zm, r));
        let mut queue = vec![group.identity()];
        while let Some(g) = queue.pop() {
            for (s, m) in gens {
                if m.rows() != r || m.cols() != r {
                    return Err(Error::InvalidModule("action matrix has wrong shape".into()));
                }
                let gs = group.mul(g, *s);
                if action[gs].is_none() {
                    let prod = action[g].as_ref().expect("visited").mul(&m.change_level(zm));
                    action[gs] = Some(reduce_rows(&prod, &exps));
                    queue.push(gs);
                }
            }
        }
        if action.iter().any(|a| a.is_none()) {
            return Err(Error::InvalidModule("generators do not generate the group".into()));
        }
        GModule::from_element_actions(group, p, exps, action.into_iter().map(|a| a.expect("filled")).collect())
    }

    /// Builds the module from the action of every element.
    pub fn from_element_actions(group: &FiniteGroup, p: u64, exps: Vec<u32>, action: Vec<ZMat>) -> Result<Self> {
        let level = exps.iter().copied().max().unwrap_or(1).max(1);
        let zm = Zmod::new(p, level)?;
        if action.len() != group.order() {
            return Err(Error::InvalidModule("need one matrix per group element".into()));
        }
        let action: Vec<ZMat> = action.iter().map(|a| reduce_rows(&a.change_level(zm), &exps)).collect();
        let m = GModule { zm, exps, action };
        m.validate(group)?;
        Ok(m)
    }

    pub fn trivial(group: &FiniteGroup, p: u64, exps: Vec<u32>) -> Result<Self> {
        let level = exps.iter().copied().max().unwrap_or(1).max(1);
        let zm = Zmod::new(p, level)?;
        let r = exps.len();
        let action = vec![ZMat::identity(zm, r); group.order()];
        GModule::from_element_actions(group, p, exps, action)
    }

    fn validate(&self, group: &FiniteGroup) -> Result<()> {
        let r = self.exps.len();
        for a in &self.action {
            if a.rows() != r || a.cols() != r {
                return Err(Error::InvalidModule("action matrix has wrong shape".into()));
            }
            for i in 0..r {
                for j in 0..r {
                    let e = a.get(i, j);
                    if e != 0 && self.exps[j] < self.exps[i] && self.zm.val(e) < self.exps[i] - self.exps[j] {
                        return Err(Error::InvalidModule("action is not well defined on the quotient".into()));
                    }
                }
            }
        }
        if self.action[group.identity()] != reduce_rows(&ZMat::identity(self.zm, r), &self.exps) {
            return Err(Error::InvalidModule("identity acts nontrivially".into()));
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                let lhs = &self.action[group.mul(g, h)];
                let rhs = reduce_rows(&self.action[g].mul(&self.action[h]), &self.exps);
                if *lhs != rhs {
                    return Err(Error::InvalidModule(format!("action fails to respect the product of {} and {}", g, h)));
                }
            }
        }
        Ok(())
    }

    pub fn zm(&self) -> Zmod {
        self.zm
    }
    pub fn rank(&self) -> usize {
        self.exps.len()
    }
    pub fn exps(&self) -> &[u32] {
        &self.exps
    }
    pub fn action(&self, g: usize) -> &ZMat {
        &self.action[g]
    }
    pub fn order_log(&self) -> u64 {
        self.exps.iter().map(|&e| e as u64).sum()
    }

    /// Reduces a coordinate vector into canonical form.
    pub fn reduce(&self, v: &mut [u64]) {
        for (x, &e) in v.iter_mut().zip(&self.exps) {
            *x %= self.zm.p_pow_int(e);
        }
    }

    pub fn act(&self, g: usize, v: &[u64]) -> Vec<u64> {
        let mut out = self.action[g].apply(v);
        self.reduce(&mut out);
        out
    }

    /// Restriction along a homomorphism H → G given as an element table.
    pub fn restrict(&self, sub: &FiniteGroup, iota: &[usize]) -> Result<GModule> {
        let action = (0..sub.order()).map(|h| self.action[iota[h]].clone()).collect();
        GModule::from_element_actions(sub, self.zm.p(), self.exps.clone(), action)
    }

    /// Fixed points M^G by enumeration (small modules only).
    pub fn fixed_points_order_log(&self, group: &FiniteGroup) -> u64 {
        let mut count: u64 = 0;
        let sizes: Vec<u64> = self.exps.iter().map(|&e| self.zm.p_pow_int(e)).collect();
        let total: u64 = sizes.iter().product();
        let mut v = vec![0u64; self.rank()];
        for _ in 0..total {
            if (0..group.order()).all(|g| self.act(g, &v) == v) {
                count += 1;
            }
            for (x, s) in v.iter_mut().zip(&sizes) {
                *x += 1;
                if *x < *s {
                    break;
                }
                *x = 0;
            }
        }
        let mut log = 0;
        while count > 1 {
            count /= self.zm.p();
            log += 1;
        }
        log
    }
}

fn reduce_rows(m: &ZMat, exps: &[u32]) -> ZMat {
    let zm = m.zm();
    let mut out = m.clone();
    for i in 0..m.rows() {
        let q = zm.p_pow_int(exps[i]);
        for j in 0..m.cols() {
            out.set(i, j, m.get(i, j) % q);
        }
    }
    out
}

/// Bilinear pairing M₁ × M₂ → M₃: `coeffs[(k * r1 + i) * r2 + j]` is the
/// k-th coordinate of e_i ⊗ e_j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    pub r1: usize,
    pub r2: usize,
    pub r3: usize,
    pub coeffs: Vec<u64>,
}

impl Pairing {
    /// Multiplication W_N × W_N → W_N.
    pub fn multiplication() -> Self {
        Pairing { r1: 1, r2: 1, r3: 1, coeffs: vec![1] }
    }

    pub fn apply(&self, zm: Zmod, x: &[u64], y: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.r3];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj == 0 {
                    continue;
                }
                let xy = zm.mul(xi, yj);
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.coeffs[(k * self.r1 + i) * self.r2 + j];
                    if c != 0 {
                        *o = zm.mul_add(*o, c, xy);
                    }
                }
            }
        }
        out
    }
}

/// The standard cochain complex C^0 → … → C^top, stored with cochain
/// degree i at homological degree -i.
#[derive(Clone, Debug)]
pub struct CochainComplex {
    pub group: FiniteGroup,
    pub module: GModule,
    pub top: usize,
    pub complex: ModComplex,
}

impl CochainComplex {
    pub fn dim(&self, i: usize) -> usize {
        self.group.tuple_count(i) * self.module.rank()
    }

    /// d^i : C^i → C^{i+1}.
    pub fn d(&self, i: usize) -> ZMat {
        self.complex.d(-(i as i64))
    }

    /// H^i as a subquotient (meaningful for i < top).
    pub fn cohomology(&self, i: usize) -> Subquotient {
        self.complex.homology(-(i as i64))
    }

    pub fn cohomology_group(&self, i: usize) -> AbelianGroup {
        self.cohomology(i).group()
    }

    pub fn cocycles(&self, i: usize) -> crate::linalg::Submodule {
        self.complex.cycles(-(i as i64))
    }

    pub fn is_cocycle(&self, i: usize, c: &[u64]) -> bool {
        if i >= self.top {
            return true;
        }
        let dc = self.d(i).apply(c);
        let mut r = dc.clone();
        reduce_cochain(&self.module, &mut r);
        r.iter().all(|&x| x == 0)
    }

    pub fn is_coboundary(&self, i: usize, c: &[u64]) -> bool {
        let t = self.complex.term(-(i as i64));
        let mut gens = t.rel.clone();
        gens.extend(self.complex.boundary_gens(-(i as i64)));
        crate::linalg::Submodule::from_caps(self.module.zm(), &t.caps).with_gens(gens).contains(c)
    }
}

/// Reduces every coordinate of a cochain mod its cap.
pub fn reduce_cochain(m: &GModule, c: &mut [u64]) {
    let r = m.rank();
    for (k, x) in c.iter_mut().enumerate() {
        *x %= m.zm().p_pow_int(m.exps()[k % r]);
    }
}

/// Total table entries for cochains of degree 0..=top.
pub fn cochain_entries(group: &FiniteGroup, module: &GModule, top: usize) -> u128 {
    (0..=top).map(|i| (group.order() as u128).pow(i as u32) * module.rank() as u128).sum()
}

/// Matrix of d^i : C^i(G, M) → C^{i+1}(G, M).
pub fn differential_matrix(group: &FiniteGroup, module: &GModule, i: usize) -> ZMat {
    let zm = module.zm();
    let r = module.rank();
    let rows = group.tuple_count(i + 1) * r;
    let cols = group.tuple_count(i) * r;
    let mut d = ZMat::zeros(zm, rows, cols);
    let one = 1u64;
    let m1 = zm.neg(1);
    for t in 0..group.tuple_count(i + 1) {
        let g = group.tuple(t, i + 1);
        // g1 · f(g2, …, g_{i+1})
        let src = group.tuple_index(&g[1..]);
        let a = module.action(g[0]);
        for x in 0..r {
            for y in 0..r {
                let e = a.get(x, y);
                if e != 0 {
                    d.add_at(t * r + x, src * r + y, e);
                }
            }
        }
        // Σ_j (-1)^j f(…, g_j g_{j+1}, …)
        for j in 1..=i {
            let mut h = Vec::with_capacity(i);
            h.extend_from_slice(&g[..j - 1]);
            h.push(group.mul(g[j - 1], g[j]));
            h.extend_from_slice(&g[j + 1..]);
            let src = group.tuple_index(&h);
            let s = if j % 2 == 1 { m1 } else { one };
            for x in 0..r {
                d.add_at(t * r + x, src * r + x, s);
            }
        }
        // (-1)^{i+1} f(g1, …, g_i)
        let src = group.tuple_index(&g[..i]);
        let s = if (i + 1) % 2 == 1 { m1 } else { one };
        for x in 0..r {
            d.add_at(t * r + x, src * r + x, s);
        }
    }
    // keep row i reduced modulo its cap
    let mut out = d;
    for row in 0..rows {
        let q = zm.p_pow_int(module.exps()[row % r]);
        for col in 0..cols {
            let e = out.get(row, col);
            if e != 0 {
                out.set(row, col, e % q);
            }
        }
    }
    out
}

/// Builds C^0 → … → C^top under the entry budget.
pub fn cochain_complex(group: &FiniteGroup, module: &GModule, top: usize, budget: u128) -> Result<CochainComplex> {
    let needed = cochain_entries(group, module, top);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let zm = module.zm();
    let r = module.rank();
    let mut terms = Vec::new();
    let mut diffs = Vec::new();
    // homological degrees -top ..= 0
    for i in (0..=top).rev() {
        let dim = group.tuple_count(i) * r;
        let caps: Vec<u32> = (0..dim).map(|k| module.exps()[k % r]).collect();
        terms.push(ModSpace::with_caps(caps));
        if i == top {
            diffs.push(ZMat::zeros(zm, 0, dim));
        } else {
            diffs.push(differential_matrix(group, module, i));
        }
    }
    let complex = ModComplex::new(zm, -(top as i64), terms, diffs)?;
    Ok(CochainComplex { group: group.clone(), module: module.clone(), top, complex })
}

/// H^0 … H^maxdeg.
pub fn group_cohomology(group: &FiniteGroup, module: &GModule, maxdeg: usize, budget: u128) -> Result<Vec<AbelianGroup>> {
    let c = cochain_complex(group, module, maxdeg + 1, budget)?;
    Ok((0..=maxdeg).map(|i| c.cohomology_group(i)).collect())
}

/// (a ∪ b)(g_1..g_{p+q}) = ⟨a(g_1..g_p), (g_1⋯g_p)·b(g_{p+1}..g_{p+q})⟩.
pub fn cup(
    group: &FiniteGroup,
    ma: &GModule,
    a: &[u64],
    pa: usize,
    mb: &GModule,
    b: &[u64],
    pb: usize,
    pairing: &Pairing,
    mc: &GModule,
) -> Vec<u64> {
    let zm = mc.zm();
    let (ra, rb, rc) = (ma.rank(), mb.rank(), mc.rank());
    assert_eq!(a.len(), group.tuple_count(pa) * ra);
    assert_eq!(b.len(), group.tuple_count(pb) * rb);
    let nb = group.tuple_count(pb);
    let mut out = vec![0u64; group.tuple_count(pa + pb) * rc];
    for ta in 0..group.tuple_count(pa) {
        let ga = group.tuple(ta, pa);
        let prod = ga.iter().fold(group.identity(), |acc, &g| group.mul(acc, g));
        let av: Vec<u64> = a[ta * ra..(ta + 1) * ra].iter().map(|&x| zm.reduce(x)).collect();
        if av.iter().all(|&x| x == 0) {
            continue;
        }
        for tb in 0..nb {
            let bv = &b[tb * rb..(tb + 1) * rb];
            if bv.iter().all(|&x| x == 0) {
                continue;
            }
            let gb = mb.act(prod, bv);
            let val = pairing.apply(zm, &av, &gb.iter().map(|&x| zm.reduce(x)).collect::<Vec<_>>());
            let t = ta * nb + tb;
            out[t * rc..(t + 1) * rc].copy_from_slice(&val);
        }
    }
    reduce_cochain(mc, &mut out);
    out
}

/// Pullback along φ: H → G of an i-cochain with r coordinates.
pub fn restrict(sub: &FiniteGroup, phi: &[usize], group: &FiniteGroup, c: &[u64], i: usize, r: usize) -> Vec<u64> {
    let mut out = vec![0u64; sub.tuple_count(i) * r];
    for t in 0..sub.tuple_count(i) {
        let h = sub.tuple(t, i);
        let g: Vec<usize> = h.iter().map(|&x| phi[x]).collect();
        let s = group.tuple_index(&g);
        out[t * r..(t + 1) * r].copy_from_slice(&c[s * r..(s + 1) * r]);
    }
    out
}

/// Restriction as a matrix C^i(G) → C^i(H).
pub fn restriction_matrix(sub: &FiniteGroup, phi: &[usize], group: &FiniteGroup, i: usize, zm: Zmod, r: usize) -> ZMat {
    let mut m = ZMat::zeros(zm, sub.tuple_count(i) * r, group.tuple_count(i) * r);
    for t in 0..sub.tuple_count(i) {
        let h = sub.tuple(t, i);
        let g: Vec<usize> = h.iter().map(|&x| phi[x]).collect();
        let s = group.tuple_index(&g);
        for x in 0..r {
            m.set(t * r + x, s * r + x, 1);
        }
    }
    m
}

/// (g·c)(g_1..g_i) = g · c(g^{-1} g_1 g, …, g^{-1} g_i g).
pub fn conjugate(group: &FiniteGroup, module: &GModule, g: usize, c: &[u64], i: usize) -> Vec<u64> {
    let r = module.rank();
    let gi = group.inv(g);
    let mut out = vec![0u64; c.len()];
    for t in 0..group.tuple_count(i) {
        let h = group.tuple(t, i);
        let conj: Vec<usize> = h.iter().map(|&x| group.mul(group.mul(gi, x), g)).collect();
        let s = group.tuple_index(&conj);
        let v = module.act(g, &c[s * r..(s + 1) * r]);
        out[t * r..(t + 1) * r].copy_from_slice(&v);
    }
    out
}

/// The coefficient module μ = Z/p^N with trivial action.
pub fn mu_module(group: &FiniteGroup, p: u64, level: u32) -> Result<GModule> {
    GModule::trivial(group, p, vec![level])
}

/// Pontryagin dual M* = Hom(M, Z/p^N) with the contragredient action, and
/// the evaluation pairing M × M* → μ. Basis: e*_i(e_i) = p^{N - a_i}.
pub fn dualize(group: &FiniteGroup, module: &GModule) -> Result<(GModule, Pairing, GModule)> {
    let zm = module.zm();
    let n = zm.n();
    let exps = module.exps().to_vec();
    let r = exps.len();
    let mut action = Vec::with_capacity(group.order());
    for g in 0..group.order() {
        let a = module.action(group.inv(g));
        let mut m = ZMat::zeros(zm, r, r);
        // c'_i = Σ_k c_k A_{k i} p^{N-a_k} / p^{N-a_i}  (mod p^{a_i})
        for i in 0..r {
            for k in 0..r {
                let num = zm.mul(a.get(k, i), zm.p_pow(n - exps[k]));
                let shift = n - exps[i];
                let v = if shift == 0 { num } else { zm.div_p_pow(num, shift) };
                m.set(i, k, v % zm.p_pow_int(exps[i]));
            }
        }
        action.push(m);
    }
    let dual = GModule::from_element_actions(group, zm.p(), exps.clone(), action)?;
    let mut coeffs = vec![0u64; r * r];
    for i in 0..r {
        coeffs[i * r + i] = zm.p_pow(n - exps[i]);
    }
    let pairing = Pairing { r1: r, r2: r, r3: 1, coeffs };
    let mu = mu_module(group, zm.p(), n)?;
    Ok((dual, pairing, mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_validate() {
        assert_eq!(FiniteGroup::dihedral(4).order(), 8);
        assert_eq!(FiniteGroup::quaternion().order(), 8);
        assert!(FiniteGroup::from_table(&[vec![0, 1], vec![0, 1]]).is_err());
    }

    #[test]
    fn cohomology_of_z3() {
        let g = FiniteGroup::cyclic(3);
        let m = GModule::trivial(&g, 3, vec![1]).unwrap();
        let c = cochain_complex(&g, &m, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(c.dim(2), 9);
        let h = group_cohomology(&g, &m, 4, DEFAULT_BUDGET).unwrap();
        assert!(h.iter().all(|x| x.exponents == vec![1]));
    }

    #[test]
    fn budget_guard() {
        let g = FiniteGroup::cyclic(8);
        let m = GModule::trivial(&g, 2, vec![1]).unwrap();
        assert!(matches!(cochain_complex(&g, &m, 9, 1000), Err(Error::Budget { .. })));
    }

    #[test]
    fn dual_of_sign_module() {
        let g = FiniteGroup::cyclic(2);
        let sign = ZMat::from_i64(Zmod::new(3, 2).unwrap(), 1, 1, &[-1]);
        let m = GModule::from_generators(&g, 3, vec![2], &[(1, sign)]).unwrap();
        let (d, _, _) = dualize(&g, &m).unwrap();
        assert_eq!(d.action(1).get(0, 0), 8);
    }
}
