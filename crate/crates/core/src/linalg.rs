//! Small dense helpers that work for both `f64` and forward-mode duals, plus
//! the sparse matrix type and linear solvers shared by the Newton and
//! eigenvalue iterations.

use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::matrix_free::bicgstab::{bicgstab, bicgstab_scratch, BicgParams};
use faer::matrix_free::{IdentityPrecond, LinOp, Precond};
use faer::prelude::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatMut, MatRef, Par};
use nalgebra::SVector;
use num_dual::{Derivative, DualNum, DualSVec64};

use crate::error::{Error, Result};

/// Largest coordinate dimension handled by the fixed-size kernels.
pub const MAX_DIM: usize = 4;

/// Scalar type accepted by the local geometry kernels.
pub trait Real: DualNum<Primitive = f64> + Copy {}
impl<T: DualNum<Primitive = f64> + Copy> Real for T {}

pub type SquareMat<D> = [[D; MAX_DIM]; MAX_DIM];
pub type Rank3<D> = [[[D; MAX_DIM]; MAX_DIM]; MAX_DIM];

#[inline]
pub fn c<D: Real>(x: f64) -> D {
    D::from(x)
}

pub fn zeros2<D: Real>() -> SquareMat<D> {
    [[D::zero(); MAX_DIM]; MAX_DIM]
}

pub fn zeros3<D: Real>() -> Rank3<D> {
    [[[D::zero(); MAX_DIM]; MAX_DIM]; MAX_DIM]
}

/// Number of stored components of a symmetric `n x n` tensor.
#[inline]
pub const fn sym_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of `(i, j)` in row-major upper-triangle storage.
#[inline]
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * n - a * a.saturating_sub(1) / 2 + (b - a)
}

/// Expand upper-triangle storage into a full square matrix.
pub fn unpack_sym<D: Real>(n: usize, comps: &[D]) -> SquareMat<D> {
    let mut m = zeros2();
    for i in 0..n {
        for j in i..n {
            let v = comps[sym_index(n, i, j)];
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Inverse and determinant of a symmetric positive definite matrix.
///
/// Gauss-Jordan without pivoting; returns `None` as soon as a pivot is not
/// strictly positive, which for symmetric input means the matrix is not
/// positive definite.
pub fn invert_spd<D: Real>(m: &SquareMat<D>, n: usize) -> Option<(SquareMat<D>, D)> {
    let mut a = *m;
    let mut inv = zeros2::<D>();
    for i in 0..n {
        inv[i][i] = D::one();
    }
    let mut det = D::one();
    for k in 0..n {
        let pivot = a[k][k];
        if !(pivot.re() > 0.0) || !pivot.re().is_finite() {
            return None;
        }
        det *= pivot;
        let rp = pivot.recip();
        for j in 0..n {
            a[k][j] *= rp;
            inv[k][j] *= rp;
        }
        for i in 0..n {
            if i != k {
                let f = a[i][k];
                for j in 0..n {
                    let akj = a[k][j];
                    let ikj = inv[k][j];
                    a[i][j] -= f * akj;
                    inv[i][j] -= f * ikj;
                }
            }
        }
    }
    Some((inv, det))
}

/// Leading principal minors of a symmetric matrix, all computed exactly by
/// elimination; positive definiteness holds iff all are positive.
pub fn leading_minors(m: &SquareMat<f64>, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..k {
            for j in 0..k {
                a[i][j] = m[i][j];
            }
        }
        out.push(det_small(&mut a, k));
    }
    out
}

fn det_small(a: &mut SquareMat<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i][k].abs() > a[p][k].abs() {
                p = i;
            }
        }
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Dual number seeded with a unit derivative in slot `slot`.
pub fn seed<const N: usize>(value: f64, slot: usize) -> DualSVec64<N> {
    let mut e = SVector::<f64, N>::zeros();
    e[slot] = 1.0;
    DualSVec64::<N>::new(value, Derivative::some(e))
}

/// Derivative component `slot` of a dual number.
pub fn slot<const N: usize>(d: &DualSVec64<N>, slot: usize) -> f64 {
    d.eps.0.as_ref().map(|v| v[slot]).unwrap_or(0.0)
}

/// Compressed sparse row matrix with sorted, deduplicated columns.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from triplets; duplicate entries are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, cidx, v) in entries {
            if last == Some((r, cidx)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(cidx);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, cidx));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, cidx: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&cidx) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(cidx, v)| v * x[cidx]).sum())
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|r| self.get(r, r)).collect()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.nrows);
        for r in 0..self.nrows {
            for (cidx, v) in self.row(r) {
                t.push((r, cidx, v));
            }
            t.push((r, r, shift));
        }
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in d.iter_mut().enumerate() {
            for (cidx, v) in self.row(r) {
                row[cidx] = v;
            }
        }
        d
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (cidx, v) in self.row(r) {
                t.push(Triplet::new(r, cidx, v));
            }
        }
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))
    }
}

/// Unknown count above which the iterative solver replaces the direct one.
pub const DIRECT_SOLVE_LIMIT: usize = 100_000;

/// Factorized operator reused for repeated solves.
pub enum Factorization {
    Direct(Lu<usize, f64>),
    Iterative { matrix: CsrOp, inv_diag: Vec<f64> },
}

impl Factorization {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        Self::with_limit(a, DIRECT_SOLVE_LIMIT)
    }

    /// Direct sparse LU up to `limit` unknowns, Jacobi-preconditioned
    /// BiCGStab beyond.
    pub fn with_limit(a: &CsrMatrix, limit: usize) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::LinearSolve("matrix is not square".into()));
        }
        if a.nrows <= limit {
            let lu = a
                .to_faer()?
                .sp_lu()
                .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
            Ok(Self::Direct(lu))
        } else {
            let inv_diag = a
                .diagonal()
                .into_iter()
                .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect();
            Ok(Self::Iterative {
                matrix: CsrOp(a.clone()),
                inv_diag,
            })
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let out = match self {
            Self::Direct(lu) => {
                let mut b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
                lu.solve_in_place(b.as_mut());
                (0..n).map(|i| b[(i, 0)]).collect::<Vec<_>>()
            }
            Self::Iterative { matrix, inv_diag } => {
                let b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
                let mut x = Mat::<f64>::zeros(n, 1);
                let precond = JacobiPrecond {
                    inv_diag: inv_diag.clone(),
                };
                let params = BicgParams {
                    rel_tolerance: 1e-14,
                    max_iters: 20 * n.max(100),
                    ..Default::default()
                };
                let req =
                    bicgstab_scratch(&precond, IdentityPrecond { dim: n }, matrix, 1, Par::Seq);
                let mut buf = MemBuffer::new(req);
                let stack = MemStack::new(&mut buf);
                bicgstab(
                    x.as_mut(),
                    &precond,
                    IdentityPrecond { dim: n },
                    matrix,
                    b.as_ref(),
                    params,
                    |_| {},
                    Par::Seq,
                    stack,
                )
                .map_err(|e| Error::LinearSolve(format!("bicgstab: {e:?}")))?;
                (0..n).map(|i| x[(i, 0)]).collect()
            }
        };
        if out.iter().any(|v: &f64| !v.is_finite()) {
            return Err(Error::LinearSolve(
                "non-finite solution (singular matrix?)".into(),
            ));
        }
        Ok(out)
    }
}

#[derive(Debug)]
pub struct CsrOp(CsrMatrix);

impl LinOp<f64> for CsrOp {
    fn apply_scratch(&self, _rhs_ncols: usize, _par: Par) -> StackReq {
        StackReq::EMPTY
    }
    fn nrows(&self) -> usize {
        self.0.nrows
    }
    fn ncols(&self) -> usize {
        self.0.ncols
    }
    fn apply(
        &self,
        mut out: MatMut<'_, f64>,
        rhs: MatRef<'_, f64>,
        _par: Par,
        _stack: &mut MemStack,
    ) {
        for j in 0..rhs.ncols() {
            for r in 0..self.0.nrows {
                out[(r, j)] = self.0.row(r).map(|(k, v)| v * rhs[(k, j)]).sum();
            }
        }
    }
    fn conj_apply(
        &self,
        out: MatMut<'_, f64>,
        rhs: MatRef<'_, f64>,
        par: Par,
        stack: &mut MemStack,
    ) {
        self.apply(out, rhs, par, stack)
    }
}

#[derive(Debug)]
struct JacobiPrecond {
    inv_diag: Vec<f64>,
}

impl LinOp<f64> for JacobiPrecond {
    fn apply_scratch(&self, _rhs_ncols: usize, _par: Par) -> StackReq {
        StackReq::EMPTY
    }
    fn nrows(&self) -> usize {
        self.inv_diag.len()
    }
    fn ncols(&self) -> usize {
        self.inv_diag.len()
    }
    fn apply(
        &self,
        mut out: MatMut<'_, f64>,
        rhs: MatRef<'_, f64>,
        _par: Par,
        _stack: &mut MemStack,
    ) {
        for j in 0..rhs.ncols() {
            for i in 0..rhs.nrows() {
                out[(i, j)] = self.inv_diag[i] * rhs[(i, j)];
            }
        }
    }
    fn conj_apply(
        &self,
        out: MatMut<'_, f64>,
        rhs: MatRef<'_, f64>,
        par: Par,
        stack: &mut MemStack,
    ) {
        self.apply(out, rhs, par, stack)
    }
}

impl Precond<f64> for JacobiPrecond {}

/// One-shot solve of `a x = b`.
pub fn solve(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    Factorization::new(a)?.solve(rhs)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_index_is_dense_upper_triangle() {
        for n in 1..=MAX_DIM {
            let mut seen = vec![false; sym_len(n)];
            for i in 0..n {
                for j in i..n {
                    let k = sym_index(n, i, j);
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(k, sym_index(n, j, i));
                }
            }
            assert!(seen.iter().all(|s| *s));
        }
        assert_eq!(sym_index(3, 0, 0), 0);
        assert_eq!(sym_index(3, 1, 1), 3);
        assert_eq!(sym_index(3, 2, 2), 5);
    }

    #[test]
    fn spd_inverse_and_determinant() {
        let mut m = zeros2::<f64>();
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = a[i][j];
            }
        }
        let (inv, det) = invert_spd(&m, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| a[i][k] * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let expected = 4.0 * (6.0 - 0.04) - 1.0 * (2.0 - 0.1) + 0.5 * (0.2 - 1.5);
        assert!((det - expected).abs() < 1e-12);
        m[2][2] = -1.0;
        assert!(invert_spd(&m, 3).is_none());
    }

    #[test]
    fn direct_and_iterative_solvers_agree() {
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.3));
                t.push((i + 1, i, -0.7));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x1 = Factorization::with_limit(&a, usize::MAX)
            .unwrap()
            .solve(&b)
            .unwrap();
        let x2 = Factorization::with_limit(&a, 0).unwrap().solve(&b).unwrap();
        let r = a.mul_vec(&x1);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-12);
            assert!((x1[i] - x2[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 5.0)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 5.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }
}
