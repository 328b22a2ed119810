//! The coefficient rings W_n = Z/p^n and group algebras W_n[Δ] for finite
//! abelian p-groups Δ, with matrices and local elimination over them.

use crate::error::{Error, Result};
use crate::linalg::ZMat;
use crate::zmod::Zmod;
use serde::{Deserialize, Serialize};

/// Largest group part handled densely.
pub const MAX_GROUP_ORDER: usize = 1 << 16;

/// Parameters of W_n[Δ] with Δ = Π Z/p^{e_i}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingSpec {
    pub p: u64,
    pub n: u32,
    #[serde(default)]
    pub exponents: Vec<u32>,
}

impl RingSpec {
    pub fn new(p: u64, n: u32, exponents: Vec<u32>) -> Self {
        RingSpec { p, n, exponents }
    }
    pub fn witt(p: u64, n: u32) -> Self {
        RingSpec { p, n, exponents: Vec::new() }
    }
}

/// Ring handle: arithmetic on dense coefficient tables indexed by Δ in
/// lexicographic exponent order (first factor most significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    spec: RingSpec,
    zm: Zmod,
    radices: Vec<usize>,
    strides: Vec<usize>,
    order: usize,
}

/// Element of a group ring: one residue per group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingElem(pub Vec<u64>);

impl RingElem {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

/// Constructs the ring described by `spec`.
pub fn make_ring(spec: &RingSpec) -> Result<Ring> {
    Ring::new(spec.clone())
}

impl Ring {
    pub fn new(spec: RingSpec) -> Result<Self> {
        let zm = Zmod::new(spec.p, spec.n)?;
        let mut radices = Vec::with_capacity(spec.exponents.len());
        let mut order: usize = 1;
        for &e in &spec.exponents {
            let r = (spec.p as usize)
                .checked_pow(e)
                .ok_or(Error::GroupTooLarge(usize::MAX))?;
            order = order.checked_mul(r).ok_or(Error::GroupTooLarge(usize::MAX))?;
            if order > MAX_GROUP_ORDER {
                return Err(Error::GroupTooLarge(order));
            }
            radices.push(r);
        }
        let mut strides = vec![1usize; radices.len()];
        for i in (0..radices.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * radices[i + 1];
        }
        Ok(Ring { spec, zm, radices, strides, order })
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }
    pub fn zm(&self) -> Zmod {
        self.zm
    }
    pub fn p(&self) -> u64 {
        self.zm.p()
    }
    pub fn n(&self) -> u32 {
        self.zm.n()
    }
    /// |Δ|.
    pub fn group_order(&self) -> usize {
        self.order
    }
    pub fn is_trivial_group(&self) -> bool {
        self.order == 1
    }
    pub fn num_group_gens(&self) -> usize {
        self.radices.len()
    }
    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    /// log_p of the number of elements, n·|Δ|.
    pub fn element_count_log(&self) -> u64 {
        self.zm.n() as u64 * self.order as u64
    }

    /// Number of elements when it fits in a u128.
    pub fn element_count(&self) -> Option<u128> {
        let q = self.zm.modulus() as u128;
        let mut c: u128 = 1;
        for _ in 0..self.order {
            c = c.checked_mul(q)?;
        }
        Some(c)
    }

    /// Exponent digits of a group index.
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut d = vec![0; self.radices.len()];
        for i in (0..self.radices.len()).rev() {
            d[i] = idx % self.radices[i];
            idx /= self.radices[i];
        }
        d
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).zip(&self.radices).map(|((d, s), r)| (d % r) * s).sum()
    }

    /// Index of the product of two group elements.
    pub fn group_add(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        for i in 0..self.radices.len() {
            let r = self.radices[i];
            let s = self.strides[i];
            let da = (a / s) % r;
            let db = (b / s) % r;
            out += ((da + db) % r) * s;
        }
        out
    }

    pub fn group_neg(&self, a: usize) -> usize {
        let mut out = 0;
        for i in 0..self.radices.len() {
            let r = self.radices[i];
            let s = self.strides[i];
            let da = (a / s) % r;
            out += ((r - da) % r) * s;
        }
        out
    }

    pub fn zero(&self) -> RingElem {
        RingElem(vec![0; self.order])
    }
    pub fn one(&self) -> RingElem {
        self.from_int(1)
    }
    pub fn from_int(&self, c: i64) -> RingElem {
        let mut v = vec![0; self.order];
        v[0] = self.zm.from_i64(c);
        RingElem(v)
    }
    /// Basis element [g].
    pub fn group_element(&self, idx: usize) -> RingElem {
        let mut v = vec![0; self.order];
        v[idx] = 1 % self.zm.modulus();
        RingElem(v)
    }
    /// Generator σ_i of the i-th cyclic factor.
    pub fn sigma(&self, i: usize) -> RingElem {
        let mut d = vec![0; self.radices.len()];
        d[i] = 1;
        self.group_element(self.index_of(&d))
    }

    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<RingElem> {
        if coeffs.len() != self.order {
            return Err(Error::Shape(format!("expected {} coefficients, got {}", self.order, coeffs.len())));
        }
        Ok(RingElem(coeffs.iter().map(|&c| self.zm.from_i64(c)).collect()))
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        RingElem(a.0.iter().zip(&b.0).map(|(x, y)| self.zm.add(*x, *y)).collect())
    }
    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        RingElem(a.0.iter().zip(&b.0).map(|(x, y)| self.zm.sub(*x, *y)).collect())
    }
    pub fn neg(&self, a: &RingElem) -> RingElem {
        RingElem(a.0.iter().map(|x| self.zm.neg(*x)).collect())
    }
    pub fn scale(&self, c: u64, a: &RingElem) -> RingElem {
        RingElem(a.0.iter().map(|x| self.zm.mul(*x, c)).collect())
    }
    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let zm = self.zm;
        if self.order == 1 {
            return RingElem(vec![zm.mul(a.0[0], b.0[0])]);
        }
        let mut out = vec![0u64; self.order];
        let bnz: Vec<(usize, u64)> = b.0.iter().copied().enumerate().filter(|x| x.1 != 0).collect();
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for &(j, y) in &bnz {
                let k = self.group_add(i, j);
                out[k] = zm.mul_add(out[k], x, y);
            }
        }
        RingElem(out)
    }
    pub fn pow(&self, a: &RingElem, mut e: u64) -> RingElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Sum of coefficients in W_n (the augmentation Δ ↦ 1).
    pub fn augment_w(&self, x: &RingElem) -> u64 {
        x.0.iter().fold(0, |acc, &c| self.zm.add(acc, c))
    }

    /// Residue in k = F_p of the augmentation.
    pub fn augment(&self, x: &RingElem) -> u64 {
        self.augment_w(x) % self.zm.p()
    }

    pub fn is_unit(&self, x: &RingElem) -> bool {
        self.augment(x) != 0
    }

    /// Inverse via x = a·(1 + y) with a = augmentation (a unit) and y in the
    /// augmentation ideal, which is nilpotent; 1/(1+y) is a finite series.
    pub fn inverse(&self, x: &RingElem) -> Option<RingElem> {
        if !self.is_unit(x) {
            return None;
        }
        let a = self.augment_w(x);
        let ainv = self.zm.inv(a)?;
        let ax = self.scale(ainv, x);
        let y = self.sub(&ax, &self.one());
        let neg_y = self.neg(&y);
        let mut term = self.one();
        let mut sum = self.one();
        loop {
            term = self.mul(&term, &neg_y);
            if term.is_zero() {
                break;
            }
            sum = self.add(&sum, &term);
        }
        Some(self.scale(ainv, &sum))
    }

    /// Least k with x^k = 0, if x is nilpotent.
    pub fn nilpotency_order(&self, x: &RingElem) -> Option<u32> {
        if self.is_unit(x) {
            return None;
        }
        let mut k = 1;
        let mut acc = x.clone();
        while !acc.is_zero() {
            acc = self.mul(&acc, x);
            k += 1;
        }
        Some(k)
    }

    /// Matrix of multiplication by `x` on the group basis.
    pub fn regular_rep(&self, x: &RingElem) -> ZMat {
        let g = self.order;
        let mut m = ZMat::zeros(self.zm, g, g);
        for (a, &c) in x.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for h in 0..g {
                m.add_at(self.group_add(a, h), h, c);
            }
        }
        m
    }

    /// All elements, when there are at most `limit` of them.
    pub fn enumerate(&self, limit: u128) -> Option<Vec<RingElem>> {
        let count = self.element_count()?;
        if count > limit {
            return None;
        }
        let q = self.zm.modulus();
        let mut out = Vec::with_capacity(count as usize);
        let mut cur = vec![0u64; self.order];
        for _ in 0..count {
            out.push(RingElem(cur.clone()));
            for c in cur.iter_mut() {
                *c += 1;
                if *c < q {
                    break;
                }
                *c = 0;
            }
        }
        Some(out)
    }
}

/// Matrix over a group ring, stored as a flat coefficient table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    ring: Ring,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(ring: &Ring, rows: usize, cols: usize) -> Self {
        Matrix { ring: ring.clone(), rows, cols, data: vec![0; rows * cols * ring.order] }
    }

    pub fn identity(ring: &Ring, n: usize) -> Self {
        let mut m = Matrix::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, &ring.one());
        }
        m
    }

    pub fn from_entries(ring: &Ring, rows: usize, cols: usize, entries: &[RingElem]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!("{}x{} matrix needs {} entries, got {}", rows, cols, rows * cols, entries.len())));
        }
        let mut m = Matrix::zeros(ring, rows, cols);
        for (k, e) in entries.iter().enumerate() {
            if e.0.len() != ring.order {
                return Err(Error::Shape("entry has wrong coefficient count".into()));
            }
            m.set(k / cols.max(1), k % cols.max(1), e);
        }
        Ok(m)
    }

    /// Matrix over a trivial-group ring from a W_n matrix.
    pub fn from_zmat(ring: &Ring, a: &ZMat) -> Result<Self> {
        if !ring.is_trivial_group() {
            return Err(Error::NontrivialGroup);
        }
        Ok(Matrix { ring: ring.clone(), rows: a.rows(), cols: a.cols(), data: a.data().to_vec() })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> RingElem {
        let g = self.ring.order;
        let k = (i * self.cols + j) * g;
        RingElem(self.data[k..k + g].to_vec())
    }

    pub fn set(&mut self, i: usize, j: usize, x: &RingElem) {
        let g = self.ring.order;
        let k = (i * self.cols + j) * g;
        self.data[k..k + g].copy_from_slice(&x.0);
    }

    pub fn entries(&self) -> Vec<RingElem> {
        (0..self.rows * self.cols).map(|k| self.get(k / self.cols, k % self.cols)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch("matrix product".into()));
        }
        if self.cols != other.rows {
            return Err(Error::Shape(format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let r = &self.ring;
        let mut out = Matrix::zeros(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j);
                    out.set(i, j, &r.add(&cur, &r.mul(&a, &b)));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.ring != other.ring || self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape("matrix sum".into()));
        }
        let zm = self.ring.zm;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| zm.add(*a, *b)).collect();
        Ok(Matrix { ring: self.ring.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn neg(&self) -> Matrix {
        let zm = self.ring.zm;
        let data = self.data.iter().map(|a| zm.neg(*a)).collect();
        Matrix { ring: self.ring.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &RingElem) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, &self.ring.mul(c, &self.get(i, j)));
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(&self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, &self.get(i, j));
            }
        }
        out
    }

    /// Copies `b` into position (r0, c0).
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, &b.get(i, j));
            }
        }
    }

    /// Kronecker product over the commutative ring.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let r = &self.ring;
        let mut out = Matrix::zeros(r, self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * other.rows + k, j * other.cols + l, &r.mul(&a, &b));
                        }
                    }
                }
            }
        }
        out
    }

    /// The W_n-matrix obtained by restricting scalars along W_n → W_n[Δ]
    /// (each entry replaced by its regular representation).
    pub fn expand(&self) -> ZMat {
        let g = self.ring.order;
        let mut out = ZMat::zeros(self.ring.zm, self.rows * g, self.cols * g);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.get(i, j);
                if e.is_zero() {
                    continue;
                }
                let block = self.ring.regular_rep(&e);
                out.set_block(i * g, j * g, &block);
            }
        }
        out
    }

    /// Entrywise W_n-augmentation (base change S ⊗_S W_n).
    pub fn augment(&self) -> ZMat {
        let mut out = ZMat::zeros(self.ring.zm, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.ring.augment_w(&self.get(i, j)));
            }
        }
        out
    }

    /// The underlying W_n matrix when Δ is trivial.
    pub fn to_zmat(&self) -> Result<ZMat> {
        if !self.ring.is_trivial_group() {
            return Err(Error::NontrivialGroup);
        }
        Ok(ZMat::from_vec(self.ring.zm, self.rows, self.cols, self.data.clone()))
    }
}

/// Output of [`local_eliminate`].
#[derive(Clone, Debug)]
pub struct Elimination {
    pub unit_rank: usize,
    /// Minimal presentation: all entries lie in the maximal ideal.
    pub residual: Matrix,
    /// Pivot positions (row, col) in the coordinates of the original matrix.
    pub pivots: Vec<(usize, usize)>,
    /// Surviving original rows and columns of the residual.
    pub kept_rows: Vec<usize>,
    pub kept_cols: Vec<usize>,
}

/// Pivots on unit entries (first in row-major order) until none remain.
/// Rows are relations and columns generators, so the cokernel of the
/// residual is the cokernel of the input.
pub fn local_eliminate(m: &Matrix) -> Elimination {
    let ring = m.ring.clone();
    let mut cur = m.clone();
    let mut rows: Vec<usize> = (0..m.rows).collect();
    let mut cols: Vec<usize> = (0..m.cols).collect();
    let mut pivots = Vec::new();
    loop {
        let mut found = None;
        'scan: for i in 0..cur.rows {
            for j in 0..cur.cols {
                if ring.is_unit(&cur.get(i, j)) {
                    found = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((pi, pj)) = found else { break };
        pivots.push((rows[pi], cols[pj]));
        let u = cur.get(pi, pj);
        let uinv = ring.inverse(&u).expect("unit entry");
        let prow: Vec<RingElem> = (0..cur.cols).map(|j| ring.mul(&uinv, &cur.get(pi, j))).collect();
        let mut next = Matrix::zeros(&ring, cur.rows - 1, cur.cols - 1);
        let mut ri = 0;
        for i in 0..cur.rows {
            if i == pi {
                continue;
            }
            let f = cur.get(i, pj);
            let mut ci = 0;
            for j in 0..cur.cols {
                if j == pj {
                    continue;
                }
                let val = if f.is_zero() { cur.get(i, j) } else { ring.sub(&cur.get(i, j), &ring.mul(&f, &prow[j])) };
                next.set(ri, ci, &val);
                ci += 1;
            }
            ri += 1;
        }
        rows.remove(pi);
        cols.remove(pj);
        cur = next;
    }
    Elimination { unit_rank: pivots.len(), residual: cur, pivots, kept_rows: rows, kept_cols: cols }
}

/// Elementary divisors of a W_n matrix, as exponents e with divisor p^e
/// (0 ≤ e < n), padded with `n` for each zero diagonal slot up to min(rows, cols).
pub fn diagonalize_wn(m: &Matrix) -> Result<Vec<u32>> {
    let a = m.to_zmat()?;
    let mut vals = crate::linalg::elementary_divisors(&a);
    while vals.len() < a.rows().min(a.cols()) {
        vals.push(a.zm().n());
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_counts() {
        let r = make_ring(&RingSpec::new(3, 1, vec![])).unwrap();
        assert_eq!(r.element_count(), Some(3));
        let r = make_ring(&RingSpec::new(2, 2, vec![2])).unwrap();
        assert_eq!(r.element_count(), Some(256));
        assert_eq!(r.enumerate(256).unwrap().len(), 256);
        let r = make_ring(&RingSpec::new(5, 2, vec![])).unwrap();
        assert!(r.mul(&r.from_int(5), &r.from_int(5)).is_zero());
        assert!(make_ring(&RingSpec::new(6, 1, vec![])).is_err());
        assert!(make_ring(&RingSpec::new(2, 0, vec![])).is_err());
    }

    #[test]
    fn augmentation_examples() {
        let r = make_ring(&RingSpec::new(2, 2, vec![1])).unwrap();
        let x = r.sub(&r.sigma(0), &r.one());
        assert_eq!(r.augment(&x), 0);
        assert_eq!(r.augment(&r.one()), 1);
        let r4 = make_ring(&RingSpec::new(2, 2, vec![2])).unwrap();
        assert_eq!(r4.augment(&r4.from_int(3)), 1);
    }

    #[test]
    fn unit_examples() {
        let r = make_ring(&RingSpec::new(3, 2, vec![])).unwrap();
        assert!(!r.is_unit(&r.from_int(3)));
        let r = make_ring(&RingSpec::new(3, 2, vec![1])).unwrap();
        let s = r.sigma(0);
        assert_eq!(r.inverse(&s).unwrap(), r.group_element(2));
        let r = make_ring(&RingSpec::new(2, 2, vec![1])).unwrap();
        let y = r.sub(&r.sigma(0), &r.one());
        // (σ-1)^2 = -2(σ-1), (σ-1)^3 = 4(σ-1) = 0 over Z/4
        assert_eq!(r.nilpotency_order(&y), Some(3));
        let x = r.add(&r.one(), &y);
        let inv = r.inverse(&x).unwrap();
        assert_eq!(r.mul(&x, &inv), r.one());
    }

    #[test]
    fn local_eliminate_examples() {
        let r = make_ring(&RingSpec::witt(2, 2)).unwrap();
        let id = Matrix::identity(&r, 2);
        let e = local_eliminate(&id);
        assert_eq!((e.unit_rank, e.residual.rows(), e.residual.cols()), (2, 0, 0));
        let m = Matrix::from_entries(&r, 1, 1, &[r.from_int(2)]).unwrap();
        let e = local_eliminate(&m);
        assert_eq!(e.unit_rank, 0);
        assert_eq!(e.residual.get(0, 0), r.from_int(2));
        let m = Matrix::from_entries(&r, 2, 2, &[r.from_int(1), r.from_int(2), r.from_int(2), r.from_int(2)]).unwrap();
        let e = local_eliminate(&m);
        assert_eq!(e.unit_rank, 1);
        assert_eq!(e.residual.get(0, 0), r.from_int(2));
    }

    #[test]
    fn diagonalize_examples() {
        let r = make_ring(&RingSpec::witt(2, 3)).unwrap();
        let m = Matrix::from_entries(&r, 2, 2, &[r.from_int(2), r.zero(), r.zero(), r.from_int(6)]).unwrap();
        assert_eq!(diagonalize_wn(&m).unwrap(), vec![1, 1]);
        let z = Matrix::zeros(&r, 2, 3);
        assert_eq!(diagonalize_wn(&z).unwrap(), vec![3, 3]);
        let r2 = make_ring(&RingSpec::new(2, 1, vec![1])).unwrap();
        assert_eq!(diagonalize_wn(&Matrix::zeros(&r2, 1, 1)), Err(Error::NontrivialGroup));
    }
}
