//! Dense linear-algebra helpers: rank-revealing subspace operations built on
//! the SVD, plus a small rank-3 coefficient array.
//!
//! All rank decisions use a threshold relative to the largest singular value.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector, Dyn, SVD};

use crate::scalar::Scalar;

/// Relative singular-value cutoff used for every rank and nullspace decision.
pub const RANK_RTOL: f64 = 1e-10;

/// Dense rank-3 array stored row-major, `t[(i, j, k)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<T> {
    dims: (usize, usize, usize),
    data: Vec<T>,
}

impl<T: Scalar> Tensor3<T> {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Self {
            dims: (d0, d1, d2),
            data: vec![T::zero(); d0 * d1 * d2],
        }
    }

    pub fn cube(n: usize) -> Self {
        Self::zeros(n, n, n)
    }

    pub fn from_fn(d0: usize, d1: usize, d2: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut out = Self::zeros(d0, d1, d2);
        for i in 0..d0 {
            for j in 0..d1 {
                for k in 0..d2 {
                    out[(i, j, k)] = f(i, j, k);
                }
            }
        }
        out
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    /// The vector `t[(i, j, ·)]`.
    pub fn fiber(&self, i: usize, j: usize) -> DVector<T> {
        let d2 = self.dims.2;
        let start = (i * self.dims.1 + j) * d2;
        DVector::from_column_slice(&self.data[start..start + d2])
    }

    pub fn set_fiber(&mut self, i: usize, j: usize, v: &DVector<T>) {
        for k in 0..self.dims.2 {
            self[(i, j, k)] = v[k];
        }
    }

    /// Contracts the first two slots with `u` and `v`: `Σ u_i v_j t[i][j][·]`.
    pub fn contract(&self, u: &DVector<T>, v: &DVector<T>) -> DVector<T> {
        let mut out = DVector::zeros(self.dims.2);
        for i in 0..self.dims.0 {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..self.dims.1 {
                let w = u[i] * v[j];
                if w.is_zero() {
                    continue;
                }
                for k in 0..self.dims.2 {
                    out[k] += w * self[(i, j, k)];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs_val()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dims, other.dims, "tensor shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs_val()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|x| f(*x)).collect(),
        }
    }

    pub fn add_scaled(&mut self, w: T, other: &Self) {
        assert_eq!(self.dims, other.dims, "tensor shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += w * *b;
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T> Index<(usize, usize, usize)> for Tensor3<T> {
    type Output = T;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &T {
        &self.data[(i * self.dims.1 + j) * self.dims.2 + k]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Tensor3<T> {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut T {
        &mut self.data[(i * self.dims.1 + j) * self.dims.2 + k]
    }
}

/// SVD whose reconstruction is checked. The default convergence threshold
/// occasionally stops early on matrices with clustered singular values; in
/// that case a tighter threshold is tried and the better factorization kept.
pub fn svd<T: Scalar>(a: &DMatrix<T>, u: bool, v: bool) -> SVD<T, Dyn, Dyn> {
    let scale = T::one().max(max_abs(a));
    let accept = T::lit(1e3 * T::EPSILON_F64) * scale;
    let first = a.clone().svd(true, true);
    let e1 = recompose_error(&first, a);
    let best = if e1 <= accept {
        first
    } else {
        match a.clone().try_svd(true, true, T::lit(1e-2 * T::EPSILON_F64), 100_000) {
            Some(second) if recompose_error(&second, a) < e1 => second,
            _ => first,
        }
    };
    SVD {
        u: if u { best.u } else { None },
        v_t: if v { best.v_t } else { None },
        singular_values: best.singular_values,
    }
}

fn recompose_error<T: Scalar>(svd: &SVD<T, Dyn, Dyn>, a: &DMatrix<T>) -> T {
    match svd.clone().recompose() {
        Ok(r) => max_abs(&(r - a)),
        Err(_) => T::max_value().unwrap_or_else(T::one),
    }
}

/// Singular values in descending order (empty for empty matrices).
pub fn singular_values<T: Scalar>(a: &DMatrix<T>) -> Vec<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    svd(a, false, false).singular_values.iter().copied().collect()
}

/// Smallest over largest singular value; zero for a zero matrix.
pub fn singular_ratio<T: Scalar>(a: &DMatrix<T>) -> T {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > T::zero() => lo / hi,
        _ => T::zero(),
    }
}

pub fn condition_number<T: Scalar>(a: &DMatrix<T>) -> T {
    let r = singular_ratio(a);
    if r > T::zero() {
        T::one() / r
    } else {
        T::lit(f64::INFINITY)
    }
}

/// Numerical rank with cutoff `rtol * σ_max`.
pub fn rank<T: Scalar>(a: &DMatrix<T>, rtol: T) -> usize {
    let s = singular_values(a);
    let Some(&hi) = s.first() else { return 0 };
    if hi <= T::zero() {
        return 0;
    }
    s.iter().filter(|&&x| x > rtol * hi).count()
}

/// Orthonormal basis (as columns) of the nullspace of `a`.
pub fn nullspace<T: Scalar>(a: &DMatrix<T>, rtol: T) -> DMatrix<T> {
    nullspace_scaled(a, rtol, T::zero())
}

/// Nullspace with cutoff `rtol * max(σ_max, scale)`, for matrices whose
/// entries may all be round-off relative to a known magnitude `scale`.
pub fn nullspace_scaled<T: Scalar>(a: &DMatrix<T>, rtol: T, scale: T) -> DMatrix<T> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad to at least n rows so the SVD yields a full right factor.
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = svd(&padded, false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let hi = svd.singular_values[0];
    let cut = rtol * hi.max(scale);
    let cols: Vec<DVector<T>> = (0..n)
        .filter(|&i| hi <= T::zero() || svd.singular_values[i] <= cut)
        .map(|i| vt.row(i).transpose())
        .collect();
    columns_to_matrix(n, &cols)
}

/// Orthonormal basis of the column span of `a`.
pub fn range_basis<T: Scalar>(a: &DMatrix<T>, rtol: T) -> DMatrix<T> {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = svd(a, true, false);
    let u = svd.u.expect("left singular vectors requested");
    let hi = svd.singular_values[0];
    if hi <= T::zero() {
        return DMatrix::zeros(m, 0);
    }
    let cut = rtol * hi;
    let cols: Vec<DVector<T>> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cut)
        .map(|i| u.column(i).into_owned())
        .collect();
    columns_to_matrix(m, &cols)
}

pub fn columns_to_matrix<T: Scalar>(nrows: usize, cols: &[DVector<T>]) -> DMatrix<T> {
    let mut out = DMatrix::zeros(nrows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Horizontal concatenation `[a | b]`.
pub fn hcat<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    assert_eq!(a.nrows(), b.nrows(), "row mismatch in hcat");
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((0, a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    out
}

pub fn hcat_all<T: Scalar>(nrows: usize, parts: &[&DMatrix<T>]) -> DMatrix<T> {
    parts
        .iter()
        .fold(DMatrix::zeros(nrows, 0), |acc, p| hcat(&acc, p))
}

/// Orthonormal basis of the sum of two column spans.
pub fn span_sum<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, rtol: T) -> DMatrix<T> {
    range_basis(&hcat(a, b), rtol)
}

/// Orthonormal basis of the intersection of two column spans.
pub fn intersection<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, rtol: T) -> DMatrix<T> {
    let m = a.nrows();
    let qa = range_basis(a, rtol);
    let qb = range_basis(b, rtol);
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return DMatrix::zeros(m, 0);
    }
    let stacked = hcat(&qa, &(-&qb));
    let null = nullspace(&stacked, rtol);
    if null.ncols() == 0 {
        return DMatrix::zeros(m, 0);
    }
    let coeffs = null.rows(0, qa.ncols()).into_owned();
    range_basis(&(&qa * coeffs), rtol)
}

/// Spectral-norm distance between the orthogonal projectors onto two spans;
/// one when the dimensions differ.
pub fn subspace_distance<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, rtol: T) -> T {
    let qa = range_basis(a, rtol);
    let qb = range_basis(b, rtol);
    if qa.ncols() != qb.ncols() {
        return T::one();
    }
    if qa.ncols() == 0 {
        return T::zero();
    }
    let diff = &qa * qa.transpose() - &qb * qb.transpose();
    singular_values(&diff).first().copied().unwrap_or_else(T::zero)
}

/// Largest distance from a column of `v` to the span of `basis`.
pub fn span_residual<T: Scalar>(basis: &DMatrix<T>, v: &DMatrix<T>, rtol: T) -> T {
    let q = range_basis(basis, rtol);
    let proj = &q * (q.transpose() * v);
    let r = v - proj;
    (0..r.ncols()).fold(T::zero(), |m, j| m.max(r.column(j).norm()))
}

/// Solves `a x = rhs` for square `a`, failing with the singular-value ratio
/// when `a` is numerically singular.
pub fn solve_checked<T: Scalar>(a: &DMatrix<T>, rhs: &DMatrix<T>, rtol: T) -> Result<DMatrix<T>, T> {
    if a.nrows() == 0 {
        return Ok(DMatrix::zeros(0, rhs.ncols()));
    }
    let svd = svd(a, true, true);
    let s = &svd.singular_values;
    let hi = s[0];
    let lo = s[s.len() - 1];
    let ratio = if hi > T::zero() { lo / hi } else { T::zero() };
    if ratio <= rtol {
        return Err(ratio);
    }
    svd.solve(rhs, T::zero()).map_err(|_| ratio)
}

/// Moore-Penrose pseudo-inverse with the relative cutoff.
pub fn pinv<T: Scalar>(a: &DMatrix<T>, rtol: T) -> DMatrix<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = svd(a, true, true);
    let hi = svd.singular_values[0];
    let eps = if hi > T::zero() { rtol * hi } else { T::zero() };
    svd.pseudo_inverse(eps).expect("u and v were computed")
}

pub fn max_abs<T: Scalar>(a: &DMatrix<T>) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs_val()))
}

pub fn max_abs_vec<T: Scalar>(a: &DVector<T>) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs_val()))
}

/// Unit vector `e_i` of length `n`.
pub fn unit<T: Scalar>(n: usize, i: usize) -> DVector<T> {
    let mut v = DVector::zeros(n);
    v[i] = T::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_rank_one() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = nullspace(&a, RANK_RTOL);
        assert_eq!(n.ncols(), 2);
        assert!(max_abs(&(&a * &n)) < 1e-14);
        assert!(max_abs(&(n.transpose() * &n - DMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn nullspace_of_zero_matrix_is_everything() {
        let a = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(nullspace(&a, RANK_RTOL).ncols(), 2);
        assert_eq!(range_basis(&a, RANK_RTOL).ncols(), 0);
    }

    #[test]
    fn intersection_of_planes_is_a_line() {
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let i = intersection(&a, &b, RANK_RTOL);
        assert_eq!(i.ncols(), 1);
        assert!((i[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn subspace_distance_detects_equal_spans() {
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 0.0, 1.0, -1.0, 0.0]);
        assert!(subspace_distance(&a, &b, RANK_RTOL) < 1e-14);
        let c = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(subspace_distance(&a, &c, RANK_RTOL) > 0.5);
    }

    #[test]
    fn solve_checked_rejects_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(solve_checked(&a, &DMatrix::identity(2, 2), RANK_RTOL).is_err());
    }

    #[test]
    fn tensor_contract_matches_loops() {
        let t = Tensor3::from_fn(2, 2, 3, |i, j, k| (i * 6 + j * 3 + k) as f64);
        let u = DVector::from_vec(vec![1.0, -1.0]);
        let v = DVector::from_vec(vec![2.0, 0.5]);
        let c = t.contract(&u, &v);
        for k in 0..3 {
            let mut s = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    s += u[i] * v[j] * t[(i, j, k)];
                }
            }
            assert!((c[k] - s).abs() < 1e-14);
        }
    }
}
