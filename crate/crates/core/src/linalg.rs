//! Small linear-algebra layer: complex CSR matrices, a banded LU with an
//! optional dense border, Hermitian eigenvalue helpers and a CG solver for
//! shifted skew systems.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SchrError};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest dimension for which eigenvalues are computed densely.
pub const DENSE_EIGEN_MAX: usize = 1024;

/// Complex matrix in compressed sparse row form. Column indices are sorted
/// within each row and there are no duplicate entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed on build.
#[derive(Clone, Debug)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, i: usize, j: usize, v: C64) {
        assert!(i < self.nrows && j < self.ncols, "triplet ({i},{j}) out of bounds");
        self.entries.push((i, j, v));
    }

    pub fn push_real(&mut self, i: usize, j: usize, v: f64) {
        self.push(i, j, C64::new(v, 0.0));
    }

    pub fn build(self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.nrows, self.ncols, self.entries)
    }
}

impl SparseMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut data: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        SparseMatrix { nrows, ncols, indptr, indices, data }.pruned()
    }

    // drop exact zeros so the pattern reflects real couplings
    fn pruned(self) -> Self {
        if self.data.iter().all(|v| *v != ZERO) {
            return self;
        }
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.nrows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                if self.data[p] != ZERO {
                    indices.push(self.indices[p]);
                    data.push(self.data[p]);
                }
            }
            indptr[i + 1] = indices.len();
        }
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: vec![], data: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![ONE; n],
        }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut t = TripletBuilder::new(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != ZERO {
                    t.push(i, j, m[(i, j)]);
                }
            }
        }
        t.build()
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        let mut t = TripletBuilder::new(n, m);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), m, "ragged rows");
            for (j, &v) in r.iter().enumerate() {
                t.push_real(i, j, v);
            }
        }
        t.build()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, ZERO);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(p) => self.data[r.start + p],
            Err(_) => ZERO,
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// y = A x
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let mut s = ZERO;
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[p] * x[self.indices[p]];
            }
            y[i] = s;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_real(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v.re * x[j]).sum())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let t = self.iter().map(|(i, j, v)| (j, i, v.conj())).collect();
        SparseMatrix::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn transpose(&self) -> Self {
        let t = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        SparseMatrix::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        out.pruned()
    }

    /// a·X + b·Y for equally shaped X, Y.
    pub fn lin_comb(a: C64, x: &SparseMatrix, b: C64, y: &SparseMatrix) -> Self {
        assert_eq!((x.nrows, x.ncols), (y.nrows, y.ncols), "shape mismatch in lin_comb");
        let mut t = Vec::with_capacity(x.nnz() + y.nnz());
        t.extend(x.iter().map(|(i, j, v)| (i, j, a * v)));
        t.extend(y.iter().map(|(i, j, v)| (i, j, b * v)));
        SparseMatrix::from_triplets(x.nrows, x.ncols, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest number of stored entries in any row.
    pub fn max_row_nnz(&self) -> usize {
        (0..self.nrows).map(|i| self.indptr[i + 1] - self.indptr[i]).max().unwrap_or(0)
    }

    /// (lower, upper) bandwidth.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (i, j, _) in self.iter() {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        (kl, ku)
    }

    /// Gershgorin interval for the (assumed Hermitian) matrix: every
    /// eigenvalue lies in [lo, hi].
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.nrows {
            let mut d = 0.0;
            let mut r = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    d = v.re;
                } else {
                    r += v.norm();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        if self.nrows == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    /// Kronecker product X ⊗ Y.
    pub fn kron(x: &SparseMatrix, y: &SparseMatrix) -> Self {
        let mut t = Vec::with_capacity(x.nnz() * y.nnz());
        for (i, j, a) in x.iter() {
            for (k, l, b) in y.iter() {
                t.push((i * y.nrows + k, j * y.ncols + l, a * b));
            }
        }
        SparseMatrix::from_triplets(x.nrows * y.nrows, x.ncols * y.ncols, t)
    }

    /// Leading principal k×k block.
    pub fn leading_block(&self, k: usize) -> Self {
        let k = k.min(self.nrows).min(self.ncols);
        let t = self.iter().filter(|&(i, j, _)| i < k && j < k).collect();
        SparseMatrix::from_triplets(k, k, t)
    }

    /// Max-entry deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, j, v) in self.iter() {
            d = d.max((v - self.get(j, i).conj()).norm());
        }
        d
    }
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// LU factorisation of a band matrix with partial pivoting. Row i stores
/// columns i-kl ..= i+kl+ku (extra kl for pivoting fill).
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    ab: Vec<C64>,
    piv: Vec<usize>,
}

impl BandedLu {
    /// Factor the leading `n`×`n` block of `m`. Fails with the index of a
    /// zero pivot.
    pub fn factor_block(m: &SparseMatrix, n: usize) -> std::result::Result<Self, usize> {
        let mut kl = 0;
        let mut ku = 0;
        for (i, j, _) in m.iter() {
            if i < n && j < n {
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let w = 2 * kl + ku + 1;
        let mut ab = vec![ZERO; n * w];
        for (i, j, v) in m.iter() {
            if i < n && j < n {
                ab[i * w + (j + kl - i)] = v;
            }
        }
        let mut lu = BandedLu { n, kl, ku, w, ab, piv: vec![0; n] };
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.w + (j + self.kl - i)
    }

    fn eliminate(&mut self) -> std::result::Result<(), usize> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl + 1).min(n);
            let last_col = (k + kl + ku + 1).min(n);
            let mut p = k;
            let mut best = self.ab[self.at(k, k)].norm();
            for i in k + 1..last_row {
                let v = self.ab[self.at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(k);
            }
            self.piv[k] = p;
            if p != k {
                for j in k..last_col {
                    let a = self.at(k, j);
                    let b = self.at(p, j);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.at(k, k)];
            for i in k + 1..last_row {
                let ik = self.at(i, k);
                let l = self.ab[ik] / pivot;
                self.ab[ik] = l;
                if l == ZERO {
                    continue;
                }
                for j in k + 1..last_col {
                    let kj = self.ab[self.at(k, j)];
                    let ij = self.at(i, j);
                    self.ab[ij] -= l * kj;
                }
            }
        }
        Ok(())
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == ZERO {
                continue;
            }
            for i in k + 1..(k + kl + 1).min(n) {
                b[i] -= self.ab[self.at(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..(k + kl + ku + 1).min(n) {
                s -= self.ab[self.at(k, j)] * b[j];
            }
            b[k] = s / self.ab[self.at(k, k)];
        }
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}

/// Direct solver for matrices that are banded apart from the trailing `r`
/// rows and columns (the augmentation border). The border is eliminated
/// through a dense Schur complement.
#[derive(Clone, Debug)]
pub struct BorderedLu {
    n: usize,
    core: BandedLu,
    r: usize,
    // C^{-1} E, column-major n_core × r
    y: Vec<C64>,
    // F, row-major r × n_core
    f: Vec<C64>,
    schur: Option<nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl BorderedLu {
    /// Factor with the border width chosen to minimise the band cost.
    pub fn factor(m: &SparseMatrix) -> std::result::Result<Self, usize> {
        let n = m.nrows();
        let r = if n >= 3 && core_band_cost(m, n - 1) < core_band_cost(m, n) { 1 } else { 0 };
        Self::factor_with_border(m, r)
    }

    pub fn factor_with_border(m: &SparseMatrix, r: usize) -> std::result::Result<Self, usize> {
        assert!(m.is_square());
        let n = m.nrows();
        assert!(r <= n);
        let nc = n - r;
        let core = BandedLu::factor_block(m, nc)?;
        if r == 0 {
            return Ok(BorderedLu { n, core, r, y: vec![], f: vec![], schur: None });
        }
        let mut y = vec![ZERO; nc * r];
        let mut f = vec![ZERO; r * nc];
        let mut g = DMatrix::from_element(r, r, ZERO);
        for (i, j, v) in m.iter() {
            match (i < nc, j < nc) {
                (true, false) => y[(j - nc) * nc + i] = v,
                (false, true) => f[(i - nc) * nc + j] = v,
                (false, false) => g[(i - nc, j - nc)] = v,
                _ => {}
            }
        }
        for c in 0..r {
            core.solve_in_place(&mut y[c * nc..(c + 1) * nc]);
        }
        for a in 0..r {
            for c in 0..r {
                let fy: C64 = (0..nc).map(|k| f[a * nc + k] * y[c * nc + k]).sum();
                g[(a, c)] -= fy;
            }
        }
        let lu = g.lu();
        if !lu.is_invertible() {
            return Err(nc);
        }
        Ok(BorderedLu { n, core, r, y, f, schur: Some(lu) })
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        debug_assert_eq!(b.len(), self.n);
        let nc = self.n - self.r;
        let (b1, b2) = b.split_at_mut(nc);
        self.core.solve_in_place(b1);
        if let Some(lu) = &self.schur {
            let mut rhs = nalgebra::DVector::from_element(self.r, ZERO);
            for a in 0..self.r {
                let fz: C64 = (0..nc).map(|k| self.f[a * nc + k] * b1[k]).sum();
                rhs[a] = b2[a] - fz;
            }
            let x2 = lu.solve(&rhs).expect("Schur complement checked invertible");
            for c in 0..self.r {
                b2[c] = x2[c];
                for k in 0..nc {
                    b1[k] -= self.y[c * nc + k] * x2[c];
                }
            }
        }
    }

    pub fn border(&self) -> usize {
        self.r
    }

    pub fn core_bandwidth(&self) -> (usize, usize) {
        self.core.bandwidth()
    }
}

fn core_band_cost(m: &SparseMatrix, nc: usize) -> usize {
    let mut kl = 0;
    let mut ku = 0;
    for (i, j, _) in m.iter() {
        if i < nc && j < nc {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
    }
    // band factorisation work plus border overhead
    nc * (kl + 1) * (kl + ku + 1) + 4 * (m.nrows() - nc) * nc
}

/// Bandwidth cost model used to pick between direct and iterative solves.
pub fn band_cost(m: &SparseMatrix) -> usize {
    let n = m.nrows();
    let c0 = core_band_cost(m, n);
    if n >= 3 {
        c0.min(core_band_cost(m, n - 1))
    } else {
        c0
    }
}

/// Solve (I + i·s·K) x = y for Hermitian K by conjugate gradients on the
/// normal equations (I + s²K²) x = (I − i·s·K) y. `x` holds the initial
/// guess on entry. Returns (iterations, relative residual).
pub fn solve_shifted_hermitian(
    k: &SparseMatrix,
    s: f64,
    y: &[C64],
    x: &mut [C64],
    tol: f64,
    max_iter: usize,
) -> (usize, f64) {
    let n = y.len();
    let mut tmp = vec![ZERO; n];
    let mut tmp2 = vec![ZERO; n];
    let apply = |v: &[C64], out: &mut [C64], tmp: &mut [C64]| {
        k.matvec_into(v, tmp);
        k.matvec_into(tmp, out);
        for i in 0..n {
            out[i] = v[i] + s * s * out[i];
        }
    };
    let mut rhs = vec![ZERO; n];
    k.matvec_into(y, &mut rhs);
    for i in 0..n {
        rhs[i] = y[i] - I * s * rhs[i];
    }
    let bnorm = norm2(&rhs);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = ZERO);
        return (0, 0.0);
    }
    let mut ax = vec![ZERO; n];
    apply(x, &mut ax, &mut tmp);
    let mut r: Vec<C64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let mut it = 0;
    while it < max_iter && rr.sqrt() > tol * bnorm {
        apply(&p, &mut tmp2, &mut tmp);
        let alpha = rr / dot(&p, &tmp2).re;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * tmp2[i];
        }
        let rr_new = dot(&r, &r).re;
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        it += 1;
    }
    (it, rr.sqrt() / bnorm)
}

/// All eigenvalues (ascending) of a Hermitian matrix, computed densely.
pub fn hermitian_eigenvalues(h: &SparseMatrix) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(SchrError::NotSquare { rows: h.nrows(), cols: h.ncols() });
    }
    if h.nrows() == 0 {
        return Ok(vec![]);
    }
    let e = SymmetricEigen::try_new(h.to_dense(), 1e-15, 10_000)
        .ok_or_else(|| SchrError::Eigen(format!("dense eigensolve of size {} failed", h.nrows())))?;
    let mut v: Vec<f64> = e.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v)
}

/// Eigen-decomposition of a dense Hermitian matrix: (eigenvalues, unitary
/// eigenvector matrix with columns as eigenvectors).
pub fn hermitian_eigh(h: DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = h.nrows();
    let e = SymmetricEigen::try_new(h, 1e-15, 10_000)
        .ok_or_else(|| SchrError::Eigen(format!("dense eigensolve of size {n} failed")))?;
    Ok((e.eigenvalues.iter().copied().collect(), e.eigenvectors))
}

/// (λ_min, λ_max) of a Hermitian matrix. Dense for small sizes, Lanczos with
/// full reorthogonalisation above `DENSE_EIGEN_MAX`.
pub fn hermitian_extremes(h: &SparseMatrix) -> Result<(f64, f64)> {
    if h.nrows() <= DENSE_EIGEN_MAX {
        let ev = hermitian_eigenvalues(h)?;
        if ev.is_empty() {
            return Ok((0.0, 0.0));
        }
        return Ok((ev[0], ev[ev.len() - 1]));
    }
    lanczos_extremes(h, 200)
}

fn lanczos_extremes(h: &SparseMatrix, steps: usize) -> Result<(f64, f64)> {
    let n = h.nrows();
    let m = steps.min(n);
    // deterministic, non-degenerate start vector
    let mut q: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + ((i * 7919) % 97) as f64 / 97.0, ((i * 104729) % 89) as f64 / 89.0))
        .collect();
    let nq = norm2(&q);
    q.iter_mut().for_each(|v| *v /= nq);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![ZERO; n];
    for _ in 0..m {
        h.matvec_into(&q, &mut w);
        let a = dot(&q, &w).re;
        basis.push(q.clone());
        // full reorthogonalisation, twice for stability
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for i in 0..n {
                    w[i] -= c * b[i];
                }
            }
        }
        alpha.push(a);
        let bn = norm2(&w);
        if bn < 1e-12 * (a.abs() + 1.0) {
            break;
        }
        beta.push(bn);
        q = w.iter().map(|v| v / bn).collect();
    }
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let e = SymmetricEigen::try_new(t, 1e-15, 10_000)
        .ok_or_else(|| SchrError::Eigen("Lanczos tridiagonal eigensolve failed".into()))?;
    let lo = e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}
