//! Dense linear algebra over Z/p^n: Smith form, kernels, solving, submodules
//! in Howell form, and subquotients with explicit coordinates.

use crate::zmod::Zmod;
use serde::{Deserialize, Serialize};

/// Dense row-major matrix over Z/p^n acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZMat {
    zm: Zmod,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ZMat {
    pub fn zeros(zm: Zmod, rows: usize, cols: usize) -> Self {
        ZMat { zm, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(zm: Zmod, n: usize) -> Self {
        let mut m = ZMat::zeros(zm, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % zm.modulus();
        }
        m
    }

    /// Builds a matrix from raw entries, reducing them mod p^n.
    pub fn from_vec(zm: Zmod, rows: usize, cols: usize, data: Vec<u64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        let data = data.into_iter().map(|x| zm.reduce(x)).collect();
        ZMat { zm, rows, cols, data }
    }

    pub fn from_i64(zm: Zmod, rows: usize, cols: usize, data: &[i64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        ZMat { zm, rows, cols, data: data.iter().map(|&x| zm.from_i64(x)).collect() }
    }

    pub fn from_rows(zm: Zmod, cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut m = ZMat::zeros(zm, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = zm.reduce(x);
            }
        }
        m
    }

    pub fn from_cols(zm: Zmod, rows: usize, cols: &[Vec<u64>]) -> Self {
        let mut m = ZMat::zeros(zm, rows, cols.len());
        let nc = cols.len();
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &x) in c.iter().enumerate() {
                m.data[i * nc + j] = zm.reduce(x);
            }
        }
        m
    }

    pub fn zm(&self) -> Zmod {
        self.zm
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[u64] {
        &self.data
    }
    pub fn into_data(self) -> Vec<u64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u64) {
        self.data[i * self.cols + j] = self.zm.reduce(x);
    }
    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, x: u64) {
        let k = i * self.cols + j;
        self.data[k] = self.zm.add(self.data[k], self.zm.reduce(x));
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.cols, "vector length does not match columns");
        let zm = self.zm;
        let mut out = vec![0u64; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0u64;
            for (a, b) in row.iter().zip(x) {
                if *a != 0 && *b != 0 {
                    acc = zm.mul_add(acc, *a, *b);
                }
            }
            *o = acc;
        }
        out
    }

    pub fn mul(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let zm = self.zm;
        let mut out = ZMat::zeros(zm, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                let base = i * other.cols;
                for (j, &b) in orow.iter().enumerate() {
                    if b != 0 {
                        out.data[base + j] = zm.mul_add(out.data[base + j], a, b);
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> ZMat {
        let mut out = ZMat::zeros(self.zm, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    pub fn add(&self, other: &ZMat) -> ZMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let zm = self.zm;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| zm.add(*a, *b)).collect();
        ZMat { zm, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &ZMat) -> ZMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let zm = self.zm;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| zm.sub(*a, *b)).collect();
        ZMat { zm, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: u64) -> ZMat {
        let zm = self.zm;
        let c = zm.reduce(c);
        let data = self.data.iter().map(|a| zm.mul(*a, c)).collect();
        ZMat { zm, rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> ZMat {
        let zm = self.zm;
        let data = self.data.iter().map(|a| zm.neg(*a)).collect();
        ZMat { zm, rows: self.rows, cols: self.cols, data }
    }

    /// Multiplies row i by `factors[i]`.
    pub fn scale_rows(&self, factors: &[u64]) -> ZMat {
        assert_eq!(factors.len(), self.rows);
        let mut out = self.clone();
        for (i, &f) in factors.iter().enumerate() {
            for j in 0..self.cols {
                let k = i * self.cols + j;
                out.data[k] = self.zm.mul(out.data[k], f);
            }
        }
        out
    }

    pub fn hstack(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.rows, other.rows, "row counts differ");
        let cols = self.cols + other.cols;
        let mut out = ZMat::zeros(self.zm, self.rows, cols);
        for i in 0..self.rows {
            out.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(other.row(i));
        }
        out
    }

    pub fn vstack(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.cols, other.cols, "column counts differ");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        ZMat { zm: self.zm, rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Copies `block` into position (r0, c0).
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &ZMat) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> ZMat {
        let mut out = ZMat::zeros(self.zm, rows, cols);
        for i in 0..rows {
            let src = (r0 + i) * self.cols + c0;
            out.data[i * cols..(i + 1) * cols].copy_from_slice(&self.data[src..src + cols]);
        }
        out
    }

    pub fn block_diag(zm: Zmod, blocks: &[ZMat]) -> ZMat {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = ZMat::zeros(zm, rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ZMat) -> ZMat {
        let zm = self.zm;
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = ZMat::zeros(zm, rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if b != 0 {
                            out.data[(i * other.rows + k) * cols + j * other.cols + l] = zm.mul(a, b);
                        }
                    }
                }
            }
        }
        out
    }

    /// Reinterprets the integer entries at another level of the same prime
    /// (reduction when the new level is lower).
    pub fn change_level(&self, zm: Zmod) -> ZMat {
        assert_eq!(zm.p(), self.zm.p(), "prime mismatch");
        ZMat::from_vec(zm, self.rows, self.cols, self.data.clone())
    }

    /// True when the matrix is square and invertible.
    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && smith(self, None, false, false).vals.iter().filter(|&&v| v == 0).count() == self.rows
    }

    /// Inverse of a square invertible matrix.
    pub fn inverse(&self) -> Option<ZMat> {
        if self.rows != self.cols {
            return None;
        }
        let id = ZMat::identity(self.zm, self.rows);
        solve_many(self, &id)
    }
}

/// Result of a Smith normal form computation `U A V = D`.
#[derive(Clone, Debug)]
pub struct Smith {
    /// Valuations of the nonzero diagonal entries, non-decreasing.
    pub vals: Vec<u32>,
    /// Column transform `V` (cols × cols) when requested.
    pub v: Option<ZMat>,
    /// Inverse column transform when requested.
    pub vinv: Option<ZMat>,
    /// `U · aux` when an auxiliary matrix was supplied.
    pub aux: Option<ZMat>,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.vals.len()
    }
}

/// Smith normal form over Z/p^n with minimal-valuation pivoting.
///
/// Row operations are mirrored on `aux` (rows × k); column operations are
/// accumulated in `V` and/or `V^{-1}` on request.
pub fn smith(a: &ZMat, aux: Option<&ZMat>, want_v: bool, want_vinv: bool) -> Smith {
    let zm = a.zm;
    let (rows, cols) = (a.rows, a.cols);
    let n = zm.n();
    let mut m = a.data.clone();
    let mut x = aux.map(|b| {
        assert_eq!(b.rows, rows, "auxiliary matrix must have as many rows as A");
        b.clone()
    });
    let mut v = if want_v { Some(ZMat::identity(zm, cols)) } else { None };
    let mut vinv = if want_vinv { Some(ZMat::identity(zm, cols)) } else { None };
    let mut vals = Vec::new();
    let mut row_nz: Vec<bool> = (0..rows).map(|i| m[i * cols..(i + 1) * cols].iter().any(|&e| e != 0)).collect();

    for k in 0..rows.min(cols) {
        // pivot search
        let mut best: Option<(usize, usize, u32)> = None;
        'outer: for i in k..rows {
            if !row_nz[i] {
                continue;
            }
            let base = i * cols;
            for j in k..cols {
                let e = m[base + j];
                if e != 0 {
                    let vv = zm.val(e);
                    if best.is_none_or(|b| vv < b.2) {
                        best = Some((i, j, vv));
                        if vv == 0 {
                            break 'outer;
                        }
                    }
                }
            }
        }
        let Some((pi, pj, pv)) = best else { break };
        if pv >= n {
            break;
        }
        // move pivot to (k, k)
        if pi != k {
            for j in 0..cols {
                m.swap(pi * cols + j, k * cols + j);
            }
            row_nz.swap(pi, k);
            if let Some(x) = x.as_mut() {
                for j in 0..x.cols {
                    x.data.swap(pi * x.cols + j, k * x.cols + j);
                }
            }
        }
        if pj != k {
            for i in 0..rows {
                m.swap(i * cols + pj, i * cols + k);
            }
            if let Some(v) = v.as_mut() {
                for i in 0..cols {
                    v.data.swap(i * cols + pj, i * cols + k);
                }
            }
            if let Some(w) = vinv.as_mut() {
                for j in 0..cols {
                    w.data.swap(pj * cols + j, k * cols + j);
                }
            }
        }
        // normalise pivot to p^v
        let (_, u) = zm.split(m[k * cols + k]);
        let uinv = zm.inv(u).expect("unit part is invertible");
        if uinv != 1 {
            for j in k..cols {
                m[k * cols + j] = zm.mul(m[k * cols + j], uinv);
            }
            if let Some(x) = x.as_mut() {
                for j in 0..x.cols {
                    x.data[k * x.cols + j] = zm.mul(x.data[k * x.cols + j], uinv);
                }
            }
        }
        // clear column k below the pivot
        for i in (k + 1)..rows {
            let e = m[i * cols + k];
            if e == 0 {
                continue;
            }
            let f = zm.div_p_pow(e, pv);
            let nf = zm.neg(zm.reduce(f));
            for j in k..cols {
                let pk = m[k * cols + j];
                if pk != 0 {
                    m[i * cols + j] = zm.mul_add(m[i * cols + j], nf, pk);
                }
            }
            if let Some(x) = x.as_mut() {
                let xc = x.cols;
                for j in 0..xc {
                    let pk = x.data[k * xc + j];
                    if pk != 0 {
                        x.data[i * xc + j] = zm.mul_add(x.data[i * xc + j], nf, pk);
                    }
                }
            }
            row_nz[i] = m[i * cols + k + 1..(i + 1) * cols].iter().any(|&e| e != 0);
        }
        // clear row k right of the pivot
        for j in (k + 1)..cols {
            let e = m[k * cols + j];
            if e == 0 {
                continue;
            }
            let f = zm.reduce(zm.div_p_pow(e, pv));
            let nf = zm.neg(f);
            m[k * cols + j] = 0;
            if let Some(v) = v.as_mut() {
                for i in 0..cols {
                    let vk = v.data[i * cols + k];
                    if vk != 0 {
                        v.data[i * cols + j] = zm.mul_add(v.data[i * cols + j], nf, vk);
                    }
                }
            }
            if let Some(w) = vinv.as_mut() {
                for c in 0..cols {
                    let wj = w.data[j * cols + c];
                    if wj != 0 {
                        w.data[k * cols + c] = zm.mul_add(w.data[k * cols + c], f, wj);
                    }
                }
            }
        }
        vals.push(pv);
    }
    Smith { vals, v, vinv, aux: x }
}

/// Generators of the kernel of `a` (as column vectors of length `a.cols()`).
pub fn kernel(a: &ZMat) -> Vec<Vec<u64>> {
    let zm = a.zm;
    let s = smith(a, None, true, false);
    let v = s.v.expect("requested V");
    let mut gens = Vec::new();
    for (k, &vk) in s.vals.iter().enumerate() {
        if vk > 0 {
            let f = zm.p_pow(zm.n() - vk);
            gens.push(v.col(k).into_iter().map(|e| zm.mul(e, f)).collect());
        }
    }
    for k in s.vals.len()..a.cols {
        gens.push(v.col(k));
    }
    gens
}

/// Solves `a X = b` column by column; `None` if some column has no solution.
pub fn solve_many(a: &ZMat, b: &ZMat) -> Option<ZMat> {
    let zm = a.zm;
    let s = smith(a, Some(b), true, false);
    let c = s.aux.expect("aux");
    let v = s.v.expect("V");
    let r = s.vals.len();
    let mut y = ZMat::zeros(zm, a.cols, b.cols);
    for j in 0..b.cols {
        for k in 0..a.rows {
            let ck = c.get(k, j);
            if k < r {
                let vk = s.vals[k];
                if zm.val(ck) < vk {
                    return None;
                }
                y.set(k, j, zm.div_p_pow(ck, vk));
            } else if ck != 0 {
                return None;
            }
        }
    }
    Some(v.mul(&y))
}

/// Solves `a x = b`, returning one solution.
pub fn solve(a: &ZMat, b: &[u64]) -> Option<Vec<u64>> {
    let bm = ZMat::from_cols(a.zm, a.rows, &[b.to_vec()]);
    solve_many(a, &bm).map(|x| x.col(0))
}

/// Elementary divisor valuations of `a` (nonzero pivots only).
pub fn elementary_divisors(a: &ZMat) -> Vec<u32> {
    smith(a, None, false, false).vals
}

/// Generators of `{x : a x ∈ span(g) + ⊕ p^{caps_i} e_i}` where `g` holds
/// generators as columns (possibly with zero columns).
pub fn preimage(a: &ZMat, caps: &[u32], g: &ZMat) -> Vec<Vec<u64>> {
    let zm = a.zm;
    assert_eq!(caps.len(), a.rows);
    assert_eq!(g.rows, a.rows);
    let n = zm.n();
    let factors: Vec<u64> = caps.iter().map(|&c| zm.p_pow(n - c.min(n))).collect();
    let lhs = a.scale_rows(&factors);
    let big = if g.cols > 0 { lhs.hstack(&g.scale_rows(&factors).neg()) } else { lhs };
    kernel(&big).into_iter().map(|mut k| {
        k.truncate(a.cols);
        k
    }).collect()
}

/// A row of a Howell basis: leading column, valuation of the pivot (pivot
/// entry is exactly p^val), and the vector itself.
#[derive(Clone, Debug, PartialEq, Eq)]
struct HowellRow {
    col: usize,
    val: u32,
    v: Vec<u64>,
}

/// Submodule of (Z/p^n)^dim kept in Howell form, which makes membership a
/// single reduction pass and the order a sum over pivots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Submodule {
    zm: Zmod,
    dim: usize,
    rows: Vec<HowellRow>,
}

impl Submodule {
    pub fn zero(zm: Zmod, dim: usize) -> Self {
        Submodule { zm, dim, rows: Vec::new() }
    }

    pub fn full(zm: Zmod, dim: usize) -> Self {
        let gens: Vec<Vec<u64>> = (0..dim).map(|i| unit_vec(dim, i)).collect();
        Submodule::from_gens(zm, dim, gens)
    }

    /// ⊕ p^{caps_i} e_i.
    pub fn from_caps(zm: Zmod, caps: &[u32]) -> Self {
        let dim = caps.len();
        let rows = caps
            .iter()
            .enumerate()
            .filter(|(_, &c)| c < zm.n())
            .map(|(i, &c)| {
                let mut v = vec![0; dim];
                v[i] = zm.p_pow(c);
                HowellRow { col: i, val: c, v }
            })
            .collect();
        Submodule { zm, dim, rows }
    }

    pub fn from_gens<I: IntoIterator<Item = Vec<u64>>>(zm: Zmod, dim: usize, gens: I) -> Self {
        let n = zm.n();
        let lead = |w: &[u64], from: usize| (from..dim).find(|&j| w[j] != 0);
        // work vectors bucketed by leading column
        let mut buckets: Vec<Vec<Vec<u64>>> = vec![Vec::new(); dim];
        for g in gens {
            assert_eq!(g.len(), dim, "generator length mismatch");
            let g: Vec<u64> = g.into_iter().map(|x| zm.reduce(x)).collect();
            if let Some(l) = lead(&g, 0) {
                buckets[l].push(g);
            }
        }
        let mut rows = Vec::new();
        for col in 0..dim {
            let mut work = std::mem::take(&mut buckets[col]);
            if work.is_empty() {
                continue;
            }
            let mut best = (0, n);
            for (idx, w) in work.iter().enumerate() {
                let v = zm.val(w[col]);
                if v < best.1 {
                    best = (idx, v);
                    if v == 0 {
                        break;
                    }
                }
            }
            let (idx, v) = best;
            let mut r = work.swap_remove(idx);
            let (_, u) = zm.split(r[col]);
            let uinv = zm.inv(u).expect("unit");
            if uinv != 1 {
                for x in r.iter_mut().skip(col) {
                    *x = zm.mul(*x, uinv);
                }
            }
            for mut w in work {
                let nf = zm.neg(zm.reduce(zm.div_p_pow(w[col], v)));
                for j in col..dim {
                    if r[j] != 0 {
                        w[j] = zm.mul_add(w[j], nf, r[j]);
                    }
                }
                if let Some(l) = lead(&w, col + 1) {
                    buckets[l].push(w);
                }
            }
            if v > 0 {
                let f = zm.p_pow(n - v);
                let extra: Vec<u64> = r.iter().map(|&x| zm.mul(x, f)).collect();
                if let Some(l) = lead(&extra, col + 1) {
                    buckets[l].push(extra);
                }
            }
            rows.push(HowellRow { col, val: v, v: r });
        }
        Submodule { zm, dim, rows }
    }

    pub fn zm(&self) -> Zmod {
        self.zm
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Howell basis vectors.
    pub fn gens(&self) -> Vec<Vec<u64>> {
        self.rows.iter().map(|r| r.v.clone()).collect()
    }

    pub fn num_gens(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// log_p of the number of elements.
    pub fn order_log(&self) -> u64 {
        self.rows.iter().map(|r| (self.zm.n() - r.val) as u64).sum()
    }

    /// Reduces `x` against the basis; returns the coefficients used when
    /// `x` is a member, else `None`.
    pub fn coefficients(&self, x: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(x.len(), self.dim);
        let zm = self.zm;
        let mut x: Vec<u64> = x.iter().map(|&e| zm.reduce(e)).collect();
        let mut coeffs = vec![0u64; self.rows.len()];
        for (k, r) in self.rows.iter().enumerate() {
            let c = x[r.col];
            if c == 0 {
                continue;
            }
            if zm.val(c) < r.val {
                return None;
            }
            let f = zm.reduce(zm.div_p_pow(c, r.val));
            coeffs[k] = f;
            let nf = zm.neg(f);
            for j in r.col..self.dim {
                if r.v[j] != 0 {
                    x[j] = zm.mul_add(x[j], nf, r.v[j]);
                }
            }
        }
        if x.iter().all(|&e| e == 0) {
            Some(coeffs)
        } else {
            None
        }
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.coefficients(x).is_some()
    }

    pub fn contains_all(&self, other: &Submodule) -> bool {
        other.rows.iter().all(|r| self.contains(&r.v))
    }

    pub fn sum(&self, other: &Submodule) -> Submodule {
        assert_eq!(self.dim, other.dim);
        Submodule::from_gens(self.zm, self.dim, self.gens().into_iter().chain(other.gens()))
    }

    pub fn with_gens<I: IntoIterator<Item = Vec<u64>>>(&self, extra: I) -> Submodule {
        Submodule::from_gens(self.zm, self.dim, self.gens().into_iter().chain(extra))
    }

    /// Image under `a` (a.cols() == dim).
    pub fn image(&self, a: &ZMat) -> Submodule {
        assert_eq!(a.cols(), self.dim);
        Submodule::from_gens(self.zm, a.rows(), self.rows.iter().map(|r| a.apply(&r.v)))
    }

    /// Preimage `{x : a x ∈ self}`.
    pub fn preimage(&self, a: &ZMat) -> Submodule {
        assert_eq!(a.rows(), self.dim);
        let g = ZMat::from_cols(self.zm, self.dim, &self.gens());
        let caps = vec![self.zm.n(); self.dim];
        Submodule::from_gens(self.zm, a.cols(), preimage(a, &caps, &g))
    }

    pub fn intersect(&self, other: &Submodule) -> Submodule {
        assert_eq!(self.dim, other.dim);
        let a = ZMat::from_cols(self.zm, self.dim, &self.gens());
        if a.cols() == 0 {
            return Submodule::zero(self.zm, self.dim);
        }
        let pre = other.preimage(&a);
        Submodule::from_gens(self.zm, self.dim, pre.gens().iter().map(|c| a.apply(c)))
    }

    /// Generators viewed as columns of a dim × k matrix.
    pub fn gen_matrix(&self) -> ZMat {
        ZMat::from_cols(self.zm, self.dim, &self.gens())
    }
}

pub fn unit_vec(dim: usize, i: usize) -> Vec<u64> {
    let mut v = vec![0; dim];
    v[i] = 1;
    v
}

/// A finite abelian p-group ⊕ Z/p^{e_i}, listed by exponents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AbelianGroup {
    pub exponents: Vec<u32>,
}

impl AbelianGroup {
    pub fn new(mut exponents: Vec<u32>) -> Self {
        exponents.retain(|&e| e > 0);
        exponents.sort_unstable();
        AbelianGroup { exponents }
    }
    pub fn trivial() -> Self {
        AbelianGroup { exponents: Vec::new() }
    }
    pub fn order_log(&self) -> u64 {
        self.exponents.iter().map(|&e| e as u64).sum()
    }
    pub fn is_zero(&self) -> bool {
        self.exponents.is_empty()
    }
    /// Number of cyclic factors of order exactly p^level.
    pub fn free_rank(&self, level: u32) -> usize {
        self.exponents.iter().filter(|&&e| e == level).count()
    }
    /// Minimal number of generators.
    pub fn num_cyclic(&self) -> usize {
        self.exponents.len()
    }
}

/// Subquotient A/B of (Z/p^n)^dim with coordinates in ⊕ Z/p^{e_k}.
#[derive(Clone, Debug)]
pub struct Subquotient {
    zm: Zmod,
    top: Submodule,
    bottom: Submodule,
    /// Column transform of the relation module's Smith form.
    v: ZMat,
    vinv: ZMat,
    /// (index in the transformed basis, exponent) of each nontrivial factor.
    comps: Vec<(usize, u32)>,
}

impl Subquotient {
    /// Builds `top / (bottom ∩ top)`; `bottom` is given by caps and extra
    /// generators so that large diagonal relation sets stay cheap.
    pub fn new(top: Submodule, bottom_caps: &[u32], bottom_gens: &[Vec<u64>]) -> Self {
        let zm = top.zm;
        let dim = top.dim;
        assert_eq!(bottom_caps.len(), dim);
        let amat = top.gen_matrix();
        let m = amat.cols();
        let bottom = Submodule::from_caps(zm, bottom_caps).with_gens(bottom_gens.iter().cloned());
        if bottom.contains_all(&top) {
            let id = ZMat::identity(zm, m);
            return Subquotient { zm, top, bottom, v: id.clone(), vinv: id, comps: Vec::new() };
        }
        let g = if bottom_gens.len() > dim { ZMat::from_cols(zm, dim, &bottom.gens()) } else { ZMat::from_cols(zm, dim, bottom_gens) };
        let rel = preimage(&amat, bottom_caps, &g);
        let relm = ZMat::from_rows(zm, m, &rel);
        let s = smith(&relm, None, true, true);
        let v = s.v.expect("V");
        let vinv = s.vinv.expect("V^-1");
        let mut comps = Vec::new();
        for (k, &vk) in s.vals.iter().enumerate() {
            if vk > 0 {
                comps.push((k, vk));
            }
        }
        for k in s.vals.len()..m {
            comps.push((k, zm.n()));
        }
        Subquotient { zm, top, bottom, v, vinv, comps }
    }

    pub fn zm(&self) -> Zmod {
        self.zm
    }

    pub fn group(&self) -> AbelianGroup {
        AbelianGroup::new(self.comps.iter().map(|c| c.1).collect())
    }

    /// Exponents of the factors in coordinate order.
    pub fn exponents(&self) -> Vec<u32> {
        self.comps.iter().map(|c| c.1).collect()
    }

    pub fn order_log(&self) -> u64 {
        self.comps.iter().map(|c| c.1 as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn top(&self) -> &Submodule {
        &self.top
    }

    pub fn bottom(&self) -> &Submodule {
        &self.bottom
    }

    /// Coordinates of `x ∈ top`, each reduced mod p^{e_k}; `None` if `x ∉ top`.
    pub fn coords(&self, x: &[u64]) -> Option<Vec<u64>> {
        let zm = self.zm;
        let c = self.top.coefficients(x)?;
        Some(
            self.comps
                .iter()
                .map(|&(k, e)| {
                    let mut y = 0u64;
                    for (i, ci) in c.iter().enumerate() {
                        if *ci != 0 {
                            y = zm.mul_add(y, *ci, self.v.get(i, k));
                        }
                    }
                    y % zm.p_pow_int(e)
                })
                .collect(),
        )
    }

    /// True when `x` lies in `top` and is zero in the quotient.
    pub fn is_trivial_class(&self, x: &[u64]) -> bool {
        self.coords(x).is_some_and(|c| c.iter().all(|&e| e == 0))
    }

    /// Representative in the ambient space of the k-th generator.
    pub fn rep(&self, k: usize) -> Vec<u64> {
        let zm = self.zm;
        let idx = self.comps[k].0;
        let mut out = vec![0u64; self.top.dim];
        for (i, g) in self.top.rows.iter().enumerate() {
            let c = self.vinv.get(idx, i);
            if c != 0 {
                for (o, &gv) in out.iter_mut().zip(&g.v) {
                    if gv != 0 {
                        *o = zm.mul_add(*o, c, gv);
                    }
                }
            }
        }
        out
    }

    pub fn reps(&self) -> Vec<Vec<u64>> {
        (0..self.comps.len()).map(|k| self.rep(k)).collect()
    }

    /// Ambient vector for the class with the given coordinates.
    pub fn element(&self, coords: &[u64]) -> Vec<u64> {
        let zm = self.zm;
        let mut out = vec![0u64; self.top.dim];
        for (k, &c) in coords.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let r = self.rep(k);
            for (o, x) in out.iter_mut().zip(r) {
                *o = zm.mul_add(*o, c, x);
            }
        }
        out
    }
}

/// A homomorphism between finite abelian groups ⊕Z/p^{a_j} → ⊕Z/p^{b_i},
/// stored as the coordinate images of the source generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupMap {
    pub source: Vec<u32>,
    pub target: Vec<u32>,
    /// `columns[j]` = image of the j-th source generator.
    pub columns: Vec<Vec<u64>>,
}

impl GroupMap {
    pub fn zero(source: Vec<u32>, target: Vec<u32>) -> Self {
        let columns = vec![vec![0; target.len()]; source.len()];
        GroupMap { source, target, columns }
    }

    /// Evaluates the map on a coordinate vector.
    pub fn apply(&self, zm: Zmod, x: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.target.len()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o = zm.mul_add(*o, xj, self.columns[j][i]);
            }
        }
        for (o, &e) in out.iter_mut().zip(&self.target) {
            *o %= zm.p_pow_int(e);
        }
        out
    }

    /// Composite `other ∘ self`.
    pub fn then(&self, zm: Zmod, other: &GroupMap) -> GroupMap {
        assert_eq!(self.target, other.source, "composable maps required");
        let columns = self.columns.iter().map(|c| other.apply(zm, c)).collect();
        GroupMap { source: self.source.clone(), target: other.target.clone(), columns }
    }

    /// Image as a submodule of the lifted target, together with the lifted
    /// relation submodule (⊕ p^{b_i}).
    fn lifted_image(&self, zm: Zmod) -> (Submodule, Submodule) {
        let caps = Submodule::from_caps(zm, &self.target);
        let img = caps.with_gens(self.columns.iter().cloned());
        (img, caps)
    }

    /// log_p |image|.
    pub fn image_order_log(&self, zm: Zmod) -> u64 {
        let (img, caps) = self.lifted_image(zm);
        img.order_log() - caps.order_log()
    }

    /// log_p |kernel|.
    pub fn kernel_order_log(&self, zm: Zmod) -> u64 {
        let src: u64 = self.source.iter().map(|&e| e as u64).sum();
        src - self.image_order_log(zm)
    }

    /// Image as an abstract group.
    pub fn image_group(&self, zm: Zmod) -> AbelianGroup {
        let (img, _) = self.lifted_image(zm);
        Subquotient::new(img, &self.target, &[]).group()
    }

    pub fn is_zero(&self, zm: Zmod) -> bool {
        self.image_order_log(zm) == 0
    }

    pub fn is_iso(&self, zm: Zmod) -> bool {
        let src: u64 = self.source.iter().map(|&e| e as u64).sum();
        let tgt: u64 = self.target.iter().map(|&e| e as u64).sum();
        src == tgt && self.image_order_log(zm) == tgt
    }
}
