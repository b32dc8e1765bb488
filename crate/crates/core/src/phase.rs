//! The left-trivialized cotangent bundle `G×𝔤*`.
//!
//! Tangent vectors `(X, η)` are stored as stacked 2n-vectors `[X; η]`, with
//! `X` in the left-invariant group frame and `η` in the constant fiber frame.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::lie::algebra::{Covector, LieAlgebra};
use crate::lie::group::GroupElement;
use crate::lie::stabilizer::stabilizer_algebra;
use crate::linalg::{self, Tensor3, RANK_RTOL};
use crate::scalar::Scalar;

/// A point `(g, ξ)` of `G×𝔤*`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint<T: Scalar> {
    pub g: GroupElement<T>,
    pub xi: Covector<T>,
}

impl<T: Scalar> PhasePoint<T> {
    pub fn new(g: GroupElement<T>, xi: Covector<T>) -> Self {
        Self { g, xi }
    }
}

/// A left-trivialized tangent vector `(X, η) ∈ 𝔤⊕𝔤*`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivTangent<T: Scalar> {
    pub x: DVector<T>,
    pub eta: Covector<T>,
}

impl<T: Scalar> TrivTangent<T> {
    pub fn new(x: DVector<T>, eta: Covector<T>) -> Result<Self> {
        check_len(x.len(), eta.len())?;
        let v = Self { x, eta };
        if !v.is_finite() {
            return Err(Error::InvalidInput("non-finite tangent vector".into()));
        }
        Ok(v)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            x: DVector::zeros(n),
            eta: Covector::zeros(n),
        }
    }

    pub fn group(x: DVector<T>) -> Self {
        let n = x.len();
        Self {
            x,
            eta: Covector::zeros(n),
        }
    }

    pub fn fiber(eta: Covector<T>) -> Self {
        Self {
            x: DVector::zeros(eta.len()),
            eta,
        }
    }

    /// Splits a stacked `[X; η]` vector.
    pub fn from_stacked(v: &DVector<T>) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("odd stacked length {}", v.len())));
        }
        let n = v.len() / 2;
        Ok(Self {
            x: v.rows(0, n).into_owned(),
            eta: Covector(v.rows(n, n).into_owned()),
        })
    }

    pub fn stacked(&self) -> DVector<T> {
        let n = self.x.len();
        let mut v = DVector::zeros(2 * n);
        v.rows_mut(0, n).copy_from(&self.x);
        v.rows_mut(n, n).copy_from(&self.eta.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite()) && self.eta.is_finite()
    }
}

/// Which translation action a fundamental field or momentum map refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Gram matrix `Ω(ξ) = [[−B(ξ), −I], [I, 0]]` with `ω(u, v) = uᵀ Ω v`.
pub fn omega_gram<T: Scalar>(alg: &LieAlgebra<T>, xi: &Covector<T>) -> DMatrix<T> {
    let n = alg.dim();
    let b = alg.pairing_matrix(xi);
    let mut om = DMatrix::zeros(2 * n, 2 * n);
    om.view_mut((0, 0), (n, n)).copy_from(&(-b));
    for i in 0..n {
        om[(i, n + i)] = -T::one();
        om[(n + i, i)] = T::one();
    }
    om
}

/// Derivatives `∂Ω_{bc}/∂ξ_l` along the fiber frame direction `n+l`, as a
/// tensor `D[a][b][c]` over all 2n frame directions `a`.
pub fn omega_frame_derivative<T: Scalar>(alg: &LieAlgebra<T>) -> Tensor3<T> {
    let n = alg.dim();
    let c = alg.structure();
    let mut d = Tensor3::cube(2 * n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[(n + l, i, j)] = -c[(i, j, l)];
            }
        }
    }
    d
}

/// Brackets of the frame fields: structure constants on group indices, zero
/// whenever a fiber direction is involved.
pub fn frame_brackets<T: Scalar>(alg: &LieAlgebra<T>) -> Tensor3<T> {
    let n = alg.dim();
    let c = alg.structure();
    Tensor3::from_fn(2 * n, 2 * n, 2 * n, |a, b, k| {
        if a < n && b < n && k < n {
            c[(a, b, k)]
        } else {
            T::zero()
        }
    })
}

/// `ω(u, v) = ⟨η, X′⟩ − ⟨η′, X⟩ − ⟨ξ, [X, X′]⟩`.
pub fn symplectic_form<T: Scalar>(
    alg: &LieAlgebra<T>,
    xi: &Covector<T>,
    u: &TrivTangent<T>,
    v: &TrivTangent<T>,
) -> Result<T> {
    let n = alg.dim();
    check_len(n, xi.len())?;
    check_len(n, u.dim())?;
    check_len(n, v.dim())?;
    let br = alg.br(&u.x, &v.x);
    Ok(u.eta.pair(&v.x) - v.eta.pair(&u.x) - xi.pair(&br))
}

/// Liouville form `θ(X, η) = ⟨ξ, X⟩`.
pub fn liouville_form<T: Scalar>(xi: &Covector<T>, u: &TrivTangent<T>) -> Result<T> {
    check_len(xi.len(), u.dim())?;
    Ok(xi.pair(&u.x))
}

/// Fundamental fields of the two translation actions in the left frame:
/// `X^r = (X, ξ∘ad X)` and `X^l = (−Ad(g⁻¹)X, 0)`.
pub fn fundamental_field<T: Scalar>(
    alg: &LieAlgebra<T>,
    side: Side,
    x: &DVector<T>,
    p: &PhasePoint<T>,
) -> Result<TrivTangent<T>> {
    let n = alg.dim();
    check_len(n, x.len())?;
    check_len(n, p.xi.len())?;
    match side {
        Side::Right => Ok(TrivTangent {
            x: x.clone(),
            eta: alg.coad_star_unchecked(x, &p.xi),
        }),
        Side::Left => {
            let ad_inv = p.g.inverse().adjoint(alg)?;
            Ok(TrivTangent::group(-(ad_inv * x)))
        }
    }
}

/// `J^l(g, ξ) = Coad(g)ξ` and `J^r(g, ξ) = ξ`.
pub fn momentum_map<T: Scalar>(alg: &LieAlgebra<T>, side: Side, p: &PhasePoint<T>) -> Result<Covector<T>> {
    check_len(alg.dim(), p.xi.len())?;
    match side {
        Side::Right => Ok(p.xi.clone()),
        Side::Left => p.g.coad_apply(alg, &p.xi),
    }
}

/// The n×2n differential of a momentum map at `p` in the trivialized frame.
///
/// `dJ^r = [0 | I]`; `dJ^l(X, η) = Coad(g)(η − ξ∘ad X)`.
pub fn momentum_differential<T: Scalar>(alg: &LieAlgebra<T>, side: Side, p: &PhasePoint<T>) -> Result<DMatrix<T>> {
    let n = alg.dim();
    check_len(n, p.xi.len())?;
    let mut d = DMatrix::zeros(n, 2 * n);
    match side {
        Side::Right => {
            d.view_mut((0, n), (n, n)).fill_with_identity();
        }
        Side::Left => {
            let coad = p.g.coadjoint(alg)?;
            // Column i of ξ∘ad(e_i) stacked over i is B(ξ)ᵀ.
            let b = alg.pairing_matrix(&p.xi);
            d.view_mut((0, 0), (n, n)).copy_from(&(-(&coad * b.transpose())));
            d.view_mut((0, n), (n, n)).copy_from(&coad);
        }
    }
    Ok(d)
}

/// Largest value of the cyclic sum `𝔖[E_a ω(E_b, E_c) − ω([E_a, E_b], E_c)]`
/// over frame triples at `ξ` (the components of `dω`).
pub fn closedness_defect<T: Scalar>(alg: &LieAlgebra<T>, xi: &Covector<T>) -> T {
    let n2 = 2 * alg.dim();
    let om = omega_gram(alg, xi);
    let d = omega_frame_derivative(alg);
    let c = frame_brackets(alg);
    let term = |a: usize, b: usize, e: usize| {
        let mut v = d[(a, b, e)];
        for k in 0..n2 {
            v -= c[(a, b, k)] * om[(k, e)];
        }
        v
    };
    let mut worst = T::zero();
    for a in 0..n2 {
        for b in 0..n2 {
            for e in 0..n2 {
                let s = term(a, b, e) + term(b, e, a) + term(e, a, b);
                worst = worst.max(s.abs_val());
            }
        }
    }
    worst
}

/// Tangent data of `Σ_μ = {ξ = μ}` for the right momentum map, all as
/// orthonormal column bases in `𝔤⊕𝔤*`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSplit<T: Scalar> {
    pub t_sigma: DMatrix<T>,
    pub t_perp: DMatrix<T>,
    pub delta: DMatrix<T>,
    pub sum: DMatrix<T>,
    pub g_mu: DMatrix<T>,
}

impl<T: Scalar> ConstraintSplit<T> {
    pub fn dim_delta(&self) -> usize {
        self.delta.ncols()
    }
}

/// Stacks group-part columns into `(Y, 0)` vectors.
pub fn embed_group<T: Scalar>(y: &DMatrix<T>) -> DMatrix<T> {
    let n = y.nrows();
    let mut out = DMatrix::zeros(2 * n, y.ncols());
    out.view_mut((0, 0), (n, y.ncols())).copy_from(y);
    out
}

/// Stacks fiber-part columns into `(0, λ)` vectors.
pub fn embed_fiber<T: Scalar>(l: &DMatrix<T>) -> DMatrix<T> {
    let n = l.nrows();
    let mut out = DMatrix::zeros(2 * n, l.ncols());
    out.view_mut((n, 0), (n, l.ncols())).copy_from(l);
    out
}

/// Right fundamental fields `(e_i, μ∘ad e_i)` as columns, i.e. `[I; B(μ)ᵀ]`.
pub fn right_field_matrix<T: Scalar>(alg: &LieAlgebra<T>, mu: &Covector<T>) -> DMatrix<T> {
    let n = alg.dim();
    let mut out = DMatrix::zeros(2 * n, n);
    out.view_mut((0, 0), (n, n)).fill_with_identity();
    out.view_mut((n, 0), (n, n)).copy_from(&alg.pairing_matrix(mu).transpose());
    out
}

pub fn constraint_split<T: Scalar>(alg: &LieAlgebra<T>, mu: &Covector<T>) -> Result<ConstraintSplit<T>> {
    let n = alg.dim();
    check_len(n, mu.len())?;
    let rtol = T::lit(RANK_RTOL);
    let om = omega_gram(alg, mu);
    let t_sigma = embed_group(&DMatrix::identity(n, n));
    let t_perp = linalg::nullspace(&(t_sigma.transpose() * &om), rtol);
    let g_mu = stabilizer_algebra(alg, mu)?;
    let delta = embed_group(&g_mu);
    let sum = linalg::span_sum(&t_sigma, &t_perp, rtol);
    Ok(ConstraintSplit {
        t_sigma,
        t_perp,
        delta,
        sum,
        g_mu,
    })
}

/// Lemma checks on a constraint split, all as raw measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitDiagnostics<T: Scalar> {
    /// `max |ω(u, d)|` over `u ∈ TΣ`, `d ∈ Δ`.
    pub delta_orthogonality: T,
    /// Distance between `(TΣ)^⊥` and the span of right fundamental fields.
    pub perp_vs_fields: T,
    /// Distance between `Δ` and `TΣ ∩ (TΣ)^⊥` computed directly.
    pub delta_vs_intersection: T,
    /// Dimension of the radical of `ω` restricted to the sum.
    pub radical_dim: usize,
    /// Distance between that radical and `Δ`.
    pub radical_vs_delta: T,
}

pub fn split_diagnostics<T: Scalar>(
    alg: &LieAlgebra<T>,
    mu: &Covector<T>,
    split: &ConstraintSplit<T>,
) -> SplitDiagnostics<T> {
    let rtol = T::lit(RANK_RTOL);
    let om = omega_gram(alg, mu);
    let delta_orthogonality = linalg::max_abs(&(split.t_sigma.transpose() * &om * &split.delta));
    let perp_vs_fields = linalg::subspace_distance(&split.t_perp, &right_field_matrix(alg, mu), rtol);
    let inter = linalg::intersection(&split.t_sigma, &split.t_perp, rtol);
    let delta_vs_intersection = linalg::subspace_distance(&inter, &split.delta, rtol);
    let restricted = split.sum.transpose() * &om * &split.sum;
    let rad = &split.sum * linalg::nullspace_scaled(&restricted, rtol, linalg::max_abs(&om));
    SplitDiagnostics {
        delta_orthogonality,
        perp_vs_fields,
        delta_vs_intersection,
        radical_dim: rad.ncols(),
        radical_vs_delta: linalg::subspace_distance(&rad, &split.delta, rtol),
    }
}

/// Per-point minimal singular values of the momentum-map differentials.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport<T: Scalar> {
    /// Minimal singular value of `dJ^r`, one per sample.
    pub right_min_sv: Vec<T>,
    /// Same ratio relative to the largest singular value.
    pub right_ratio: Vec<T>,
    /// Minimal singular value of `dJ^l`, when a realization is available.
    pub left_min_sv: Option<Vec<T>>,
    pub left_ratio: Option<Vec<T>>,
    pub regular: bool,
}

pub fn regularity_report<T: Scalar>(
    alg: &LieAlgebra<T>,
    mu: &Covector<T>,
    samples: &[PhasePoint<T>],
) -> Result<RegularityReport<T>> {
    let n = alg.dim();
    check_len(n, mu.len())?;
    let cut = T::lit(RANK_RTOL);
    let mut right_min_sv = Vec::with_capacity(samples.len());
    let mut right_ratio = Vec::with_capacity(samples.len());
    let mut left = alg.has_realization().then(|| (Vec::new(), Vec::new()));
    for p in samples {
        check_len(n, p.xi.len())?;
        let off = linalg::max_abs_vec(&(&p.xi.0 - &mu.0));
        if off > T::tol(1e-12) * (T::one() + linalg::max_abs_vec(&mu.0)) {
            return Err(Error::PointOffConstraint(off.as_f64()));
        }
        let sv = linalg::singular_values(&momentum_differential(alg, Side::Right, p)?);
        right_min_sv.push(sv.last().copied().unwrap_or_else(T::zero));
        right_ratio.push(linalg::singular_ratio(&momentum_differential(alg, Side::Right, p)?));
        if let Some((mins, ratios)) = left.as_mut() {
            let d = momentum_differential(alg, Side::Left, p)?;
            let sv = linalg::singular_values(&d);
            mins.push(sv.last().copied().unwrap_or_else(T::zero));
            ratios.push(linalg::singular_ratio(&d));
        }
    }
    let ok = |v: &[T]| v.iter().all(|&r| r >= cut);
    let regular = ok(&right_ratio) && left.as_ref().is_none_or(|(_, r)| ok(r));
    let (left_min_sv, left_ratio) = match left {
        Some((m, r)) => (Some(m), Some(r)),
        None => (None, None),
    };
    Ok(RegularityReport {
        right_min_sv,
        right_ratio,
        left_min_sv,
        left_ratio,
        regular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::catalog;

    #[test]
    fn gram_matches_formula() {
        let a = catalog::se2::<f64>();
        let xi = Covector::from_slice(&[0.3, -1.1, 0.7]);
        let om = omega_gram(&a, &xi);
        let u = TrivTangent::new(DVector::from_column_slice(&[1.0, 2.0, -1.0]), Covector::from_slice(&[0.5, 0.0, 1.0])).unwrap();
        let v = TrivTangent::new(DVector::from_column_slice(&[0.0, -1.0, 3.0]), Covector::from_slice(&[2.0, 1.0, 0.0])).unwrap();
        let direct = symplectic_form(&a, &xi, &u, &v).unwrap();
        let gram = (u.stacked().transpose() * &om * v.stacked())[(0, 0)];
        assert!((direct - gram).abs() < 1e-14);
    }

    #[test]
    fn stacked_round_trip() {
        let u = TrivTangent::new(DVector::from_column_slice(&[1.0, 2.0]), Covector::from_slice(&[3.0, 4.0])).unwrap();
        assert_eq!(TrivTangent::from_stacked(&u.stacked()).unwrap(), u);
        assert!(TrivTangent::<f64>::from_stacked(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn left_differential_kills_left_fields_complement() {
        // dJ^l annihilates the right fundamental fields: J^l is right-invariant.
        let a = catalog::so3::<f64>();
        let g = GroupElement::exp(&a, &DVector::from_column_slice(&[0.2, -0.4, 0.9])).unwrap();
        let p = PhasePoint::new(g, Covector::from_slice(&[0.1, 0.5, -0.3]));
        let d = momentum_differential(&a, Side::Left, &p).unwrap();
        let fields = right_field_matrix(&a, &p.xi);
        assert!(linalg::max_abs(&(d * fields)) < 1e-12);
    }
}
