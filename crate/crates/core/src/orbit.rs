//! Charts on coadjoint orbits, vector fields in chart coordinates, and the
//! KKS form.
//!
//! The chart is `ν(t) = Coad(g₀ exp(Σ t_a E_a)) μ` with `E_a` a basis of a
//! complement of `𝔤_μ`. Its section lands in `Σ_μ` at
//! `(g₀ exp(Σ t_a E_a) h, μ)` for any `h ∈ G_μ`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::lie::algebra::{Covector, LieAlgebra};
use crate::lie::group::GroupElement;
use crate::linalg::{self, RANK_RTOL};
use crate::phase::PhasePoint;
use crate::scalar::Scalar;

/// Residual below which a covector counts as tangent to the orbit.
pub const TANGENT_TOL: f64 = 1e-8;

/// A vector field on a chart domain, in chart coordinates.
pub trait ChartField<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, t: &DVector<T>) -> DVector<T>;

    /// `∂ value_i / ∂ t_j`; central differences with step `step` by default.
    fn jacobian(&self, t: &DVector<T>, step: T) -> DMatrix<T> {
        let d = self.dim();
        let mut jac = DMatrix::zeros(d, t.len());
        let two = step + step;
        for j in 0..t.len() {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[j] += step;
            tm[j] -= step;
            let col = (self.value(&tp) - self.value(&tm)) / two;
            jac.set_column(j, &col);
        }
        jac
    }
}

/// The coordinate field `∂/∂t_i`.
#[derive(Clone, Debug)]
pub struct CoordinateField {
    pub dim: usize,
    pub index: usize,
}

impl<T: Scalar> ChartField<T> for CoordinateField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _t: &DVector<T>) -> DVector<T> {
        linalg::unit(self.dim, self.index)
    }

    fn jacobian(&self, t: &DVector<T>, _step: T) -> DMatrix<T> {
        DMatrix::zeros(self.dim, t.len())
    }
}

/// A field with constant components.
#[derive(Clone, Debug)]
pub struct ConstantVector<T: Scalar>(pub DVector<T>);

impl<T: Scalar> ChartField<T> for ConstantVector<T> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn value(&self, _t: &DVector<T>) -> DVector<T> {
        self.0.clone()
    }

    fn jacobian(&self, t: &DVector<T>, _step: T) -> DMatrix<T> {
        DMatrix::zeros(self.0.len(), t.len())
    }
}

/// `t ↦ b + A t`.
#[derive(Clone, Debug)]
pub struct AffineField<T: Scalar> {
    pub offset: DVector<T>,
    pub linear: DMatrix<T>,
}

impl<T: Scalar> AffineField<T> {
    pub fn new(offset: DVector<T>, linear: DMatrix<T>) -> Result<Self> {
        check_len(offset.len(), linear.nrows())?;
        Ok(Self { offset, linear })
    }
}

impl<T: Scalar> ChartField<T> for AffineField<T> {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn value(&self, t: &DVector<T>) -> DVector<T> {
        &self.offset + &self.linear * t
    }

    fn jacobian(&self, _t: &DVector<T>, _step: T) -> DMatrix<T> {
        self.linear.clone()
    }
}

/// A field given by a closure, differentiated numerically.
pub struct ClosureField<F> {
    pub dim: usize,
    pub f: F,
}

impl<T, F> ChartField<T> for ClosureField<F>
where
    T: Scalar,
    F: Fn(&DVector<T>) -> DVector<T> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, t: &DVector<T>) -> DVector<T> {
        (self.f)(t)
    }
}

impl<T: Scalar, F: ChartField<T> + ?Sized> ChartField<T> for Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, t: &DVector<T>) -> DVector<T> {
        (**self).value(t)
    }

    fn jacobian(&self, t: &DVector<T>, step: T) -> DMatrix<T> {
        (**self).jacobian(t, step)
    }
}

/// `[X, Y] = DY·X − DX·Y` at `t`, with field Jacobians at `step`.
pub fn lie_bracket<T: Scalar>(x: &dyn ChartField<T>, y: &dyn ChartField<T>, t: &DVector<T>, step: T) -> DVector<T> {
    y.jacobian(t, step) * x.value(t) - x.jacobian(t, step) * y.value(t)
}

/// Orbit tangent vectors `f_a = d/ds Coad(exp(s E_a)) ν` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTangentFrame<T: Scalar> {
    pub point: Covector<T>,
    pub vectors: DMatrix<T>,
}

impl<T: Scalar> OrbitTangentFrame<T> {
    pub fn new(alg: &LieAlgebra<T>, nu: &Covector<T>, basis: &DMatrix<T>) -> Result<Self> {
        check_len(alg.dim(), nu.len())?;
        check_len(alg.dim(), basis.nrows())?;
        let vectors = -(alg.pairing_matrix(nu).transpose() * basis);
        Ok(Self {
            point: nu.clone(),
            vectors,
        })
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.vectors, T::lit(RANK_RTOL))
    }
}

/// Exponential chart on the orbit through `μ`.
#[derive(Clone, Debug)]
pub struct OrbitChart<T: Scalar> {
    alg: LieAlgebra<T>,
    mu: Covector<T>,
    basis: DMatrix<T>,
    base: GroupElement<T>,
    radius: T,
}

pub fn orbit_chart<T: Scalar>(alg: &LieAlgebra<T>, mu: &Covector<T>, m_basis: &DMatrix<T>) -> Result<OrbitChart<T>> {
    OrbitChart::new(alg, mu, m_basis)
}

impl<T: Scalar> OrbitChart<T> {
    pub fn new(alg: &LieAlgebra<T>, mu: &Covector<T>, m_basis: &DMatrix<T>) -> Result<Self> {
        let n = alg.dim();
        check_len(n, mu.len())?;
        check_len(n, m_basis.nrows())?;
        let chart = Self {
            alg: alg.clone(),
            mu: mu.clone(),
            basis: m_basis.clone(),
            base: GroupElement::identity(alg)?,
            radius: T::one(),
        };
        chart.check_rank(&DVector::zeros(m_basis.ncols()))?;
        Ok(chart)
    }

    /// Moves the chart by left translation: `ν ↦ Coad(g₀) ν`.
    pub fn with_base(mut self, base: GroupElement<T>) -> Result<Self> {
        if base.kind() != self.base.kind() || base.matrix().shape() != self.base.matrix().shape() {
            return Err(Error::InvalidInput("chart base is not in the chart's group".into()));
        }
        self.base = base;
        Ok(self)
    }

    pub fn with_radius(mut self, radius: T) -> Self {
        self.radius = radius;
        self
    }

    pub fn algebra(&self) -> &LieAlgebra<T> {
        &self.alg
    }

    pub fn mu(&self) -> &Covector<T> {
        &self.mu
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn base(&self) -> &GroupElement<T> {
        &self.base
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// Chart dimension `k = dim m`.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn check_t(&self, t: &DVector<T>) -> Result<()> {
        check_len(self.dim(), t.len())
    }

    /// `Σ t_a E_a`.
    pub fn exponent(&self, t: &DVector<T>) -> DVector<T> {
        &self.basis * t
    }

    pub fn point(&self, t: &DVector<T>) -> Result<Covector<T>> {
        self.check_t(t)?;
        let g = self.base.mul(&GroupElement::exp(&self.alg, &self.exponent(t))?);
        g.coad_apply(&self.alg, &self.mu)
    }

    /// `g₀ exp(Σ t_a E_a) h`.
    pub fn section_element(&self, t: &DVector<T>, h: Option<&GroupElement<T>>) -> Result<GroupElement<T>> {
        self.check_t(t)?;
        let g = self.base.mul(&GroupElement::exp(&self.alg, &self.exponent(t))?);
        Ok(match h {
            Some(h) => g.mul(h),
            None => g,
        })
    }

    pub fn section(&self, t: &DVector<T>, h: Option<&GroupElement<T>>) -> Result<PhasePoint<T>> {
        Ok(PhasePoint::new(self.section_element(t, h)?, self.mu.clone()))
    }

    /// Block matrix `[[−ad T, I], [0, 0]]` whose exponential carries the
    /// left-trivialized derivative of `exp` in its top-right block.
    fn dexp_generator(&self, t: &DVector<T>) -> DMatrix<T> {
        let n = self.alg.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&(-self.alg.ad(&self.exponent(t))));
        m.view_mut((0, n), (n, n)).fill_with_identity();
        m
    }

    /// `J(t)`: columns `exp(T)⁻¹ ∂_a exp(T)` in the left frame (n×k).
    pub fn dexp(&self, t: &DVector<T>) -> Result<DMatrix<T>> {
        self.check_t(t)?;
        let n = self.alg.dim();
        let e = self.dexp_generator(t).exp();
        Ok(e.view((0, n), (n, n)) * &self.basis)
    }

    /// `∂_b J(t)` for each chart direction `b`, via the Fréchet derivative
    /// of the block exponential.
    pub fn dexp_derivatives(&self, t: &DVector<T>) -> Result<Vec<DMatrix<T>>> {
        self.check_t(t)?;
        let n = self.alg.dim();
        let gen = self.dexp_generator(t);
        (0..self.dim())
            .map(|b| {
                let mut big = DMatrix::zeros(4 * n, 4 * n);
                big.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&gen);
                big.view_mut((2 * n, 2 * n), (2 * n, 2 * n)).copy_from(&gen);
                let dir = -self.alg.ad(&self.basis.column(b).into_owned());
                big.view_mut((0, 2 * n), (n, n)).copy_from(&dir);
                let e = big.exp();
                // Top-right 2n block is the derivative of exp(gen); we need its
                // own top-right n block.
                Ok(e.view((0, 3 * n), (n, n)) * &self.basis)
            })
            .collect()
    }

    /// `π_*` at a point `(g, μ)`: `w ↦ −Coad(g) (μ∘ad w)`, as an n×n matrix.
    pub fn quotient_differential(&self, g: &GroupElement<T>) -> Result<DMatrix<T>> {
        let b = self.alg.pairing_matrix(&self.mu);
        Ok(-(g.coadjoint(&self.alg)? * b.transpose()))
    }

    /// `∂ν/∂t` (n×k).
    pub fn differential(&self, t: &DVector<T>) -> Result<DMatrix<T>> {
        let g = self.section_element(t, None)?;
        Ok(self.quotient_differential(&g)? * self.dexp(t)?)
    }

    /// Singular-value ratio of the chart differential; `RankLoss` below the
    /// rank threshold.
    pub fn check_rank(&self, t: &DVector<T>) -> Result<T> {
        if self.dim() == 0 {
            return Ok(T::one());
        }
        let d = self.differential(t)?;
        let ratio = linalg::singular_ratio(&d);
        if ratio <= T::lit(RANK_RTOL) || linalg::rank(&d, T::lit(RANK_RTOL)) < self.dim() {
            return Err(Error::RankLoss(ratio.as_f64()));
        }
        Ok(ratio)
    }

    pub fn tangent_frame(&self, t: &DVector<T>) -> Result<OrbitTangentFrame<T>> {
        OrbitTangentFrame::new(&self.alg, &self.point(t)?, &self.basis)
    }
}

/// A representative `X` with `ν∘ad(X) = v`, by least squares.
pub fn tangent_representative<T: Scalar>(alg: &LieAlgebra<T>, nu: &Covector<T>, v: &Covector<T>) -> Result<DVector<T>> {
    check_len(alg.dim(), nu.len())?;
    check_len(alg.dim(), v.len())?;
    let bt = alg.pairing_matrix(nu).transpose();
    let x = linalg::pinv(&bt, T::lit(RANK_RTOL)) * &v.0;
    let residual = (&bt * &x - &v.0).norm();
    let scale = T::one().max(v.0.norm());
    if residual > T::tol(TANGENT_TOL) * scale {
        return Err(Error::NotTangent(residual.as_f64()));
    }
    Ok(x)
}

/// `⟨ν, [X, Y]⟩` for representatives of `v = ν∘ad X`, `w = ν∘ad Y`.
pub fn kks_form<T: Scalar>(alg: &LieAlgebra<T>, nu: &Covector<T>, v: &Covector<T>, w: &Covector<T>) -> Result<T> {
    let x = tangent_representative(alg, nu, v)?;
    let y = tangent_representative(alg, nu, w)?;
    Ok(kks_on_representatives(alg, nu, &x, &y))
}

pub fn kks_on_representatives<T: Scalar>(alg: &LieAlgebra<T>, nu: &Covector<T>, x: &DVector<T>, y: &DVector<T>) -> T {
    nu.pair(&alg.br(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::catalog;

    #[test]
    fn dexp_matches_finite_difference() {
        let a = catalog::so3::<f64>();
        let m = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let chart = OrbitChart::new(&a, &Covector::basis(3, 2), &m).unwrap();
        let t = DVector::from_column_slice(&[0.4, -0.3]);
        let j = chart.dexp(&t).unwrap();
        let h = 1e-6;
        for b in 0..2 {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[b] += h;
            tm[b] -= h;
            let g = GroupElement::exp(&a, &chart.exponent(&t)).unwrap();
            let gp = GroupElement::exp(&a, &chart.exponent(&tp)).unwrap();
            let gm = GroupElement::exp(&a, &chart.exponent(&tm)).unwrap();
            let dg = (gp.matrix() - gm.matrix()) / (2.0 * h);
            let left = g.inverse().matrix() * dg;
            let coords = a.realization().unwrap().coords_of(&left);
            assert!((coords - j.column(b)).amax() < 1e-8);
        }
    }

    #[test]
    fn dexp_derivative_matches_finite_difference() {
        let a = catalog::se2::<f64>();
        let m = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let chart = OrbitChart::new(&a, &Covector::basis(3, 1), &m).unwrap();
        let t = DVector::from_column_slice(&[0.5, 0.2]);
        let dj = chart.dexp_derivatives(&t).unwrap();
        let h = 1e-5;
        for b in 0..2 {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[b] += h;
            tm[b] -= h;
            let fd = (chart.dexp(&tp).unwrap() - chart.dexp(&tm).unwrap()) / (2.0 * h);
            assert!((fd - &dj[b]).amax() < 1e-8);
        }
    }

    #[test]
    fn kks_examples() {
        let a = catalog::so3::<f64>();
        let nu = Covector::basis(3, 2);
        let v = a.coad_star(&linalg::unit(3, 0), &nu).unwrap();
        let w = a.coad_star(&linalg::unit(3, 1), &nu).unwrap();
        assert!((kks_form(&a, &nu, &v, &w).unwrap() - 1.0).abs() < 1e-12);
        assert!(kks_form(&a, &nu, &v, &v).unwrap().abs() < 1e-12);
        let off = Covector::from_slice(&[0.0, 0.0, 1.0]);
        assert!(matches!(kks_form(&a, &nu, &off, &v), Err(Error::NotTangent(_))));
    }
}
