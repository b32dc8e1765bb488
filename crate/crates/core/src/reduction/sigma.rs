//! The induced connection `∇_X Y = P(∇°_X Y)` on `Σ_μ`.
//!
//! `Σ_μ ≅ G` and all level-`μ` subspaces are constant in the left frame, so
//! the induced connection has constant coefficients on group indices.

use nalgebra::DVector;

use crate::connection::FrameConnection;
use crate::error::{check_len, Error, Result};
use crate::lie::group::GroupElement;
use crate::linalg::{self, Tensor3};
use crate::phase::{self, PhasePoint, TrivTangent};
use crate::reduction::context::ReductionContext;
use crate::scalar::Scalar;

/// A vector field on `Σ_μ ≅ G`, as left-frame components at each `g`.
pub trait SigmaField<T: Scalar>: Send + Sync {
    fn value(&self, g: &GroupElement<T>) -> DVector<T>;
}

/// A Σ-field given by a closure.
pub struct FnSigmaField<F>(pub F);

impl<T, F> SigmaField<T> for FnSigmaField<F>
where
    T: Scalar,
    F: Fn(&GroupElement<T>) -> DVector<T> + Send + Sync,
{
    fn value(&self, g: &GroupElement<T>) -> DVector<T> {
        (self.0)(g)
    }
}

/// Group parts of `P Γ(μ)[i][j][·]` for group indices `i, j` (n×n×n).
pub fn sigma_coefficients<T: Scalar>(ctx: &ReductionContext<T>, conn: &FrameConnection<T>) -> Result<Tensor3<T>> {
    let n = ctx.algebra().dim();
    check_len(n, conn.dim())?;
    let gamma = conn.coefficients(ctx.mu())?;
    let p = ctx.projector();
    let mut out = Tensor3::cube(n);
    for i in 0..n {
        for j in 0..n {
            let v = p * gamma.fiber(i, j);
            out.set_fiber(i, j, &v.rows(0, n).into_owned());
        }
    }
    Ok(out)
}

/// Relative distance of `ξ` from `μ`; `PointOffConstraint` beyond rounding.
pub fn check_on_constraint<T: Scalar>(ctx: &ReductionContext<T>, p: &PhasePoint<T>) -> Result<()> {
    check_len(ctx.algebra().dim(), p.xi.len())?;
    let off = linalg::max_abs_vec(&(&p.xi.0 - &ctx.mu().0));
    if off > T::tol(1e-12) * (T::one() + linalg::max_abs_vec(&ctx.mu().0)) {
        return Err(Error::PointOffConstraint(off.as_f64()));
    }
    Ok(())
}

/// The connection induced on `Σ_μ`.
#[derive(Clone, Debug)]
pub struct SigmaConnection<T: Scalar> {
    lambda: Tensor3<T>,
}

impl<T: Scalar> SigmaConnection<T> {
    pub fn new(ctx: &ReductionContext<T>, conn: &FrameConnection<T>) -> Result<Self> {
        Ok(Self {
            lambda: sigma_coefficients(ctx, conn)?,
        })
    }

    pub fn coefficients(&self) -> &Tensor3<T> {
        &self.lambda
    }

    /// `Λ(u, v)` for group vectors.
    pub fn apply(&self, u: &DVector<T>, v: &DVector<T>) -> DVector<T> {
        self.lambda.contract(u, v)
    }

    /// `∇_x Y` at `p`, with `x(Y)` differentiated along `g exp(τx)` by
    /// central differences of step `step`.
    pub fn covderiv(
        &self,
        ctx: &ReductionContext<T>,
        p: &PhasePoint<T>,
        x: &DVector<T>,
        y: &dyn SigmaField<T>,
        step: T,
    ) -> Result<TrivTangent<T>> {
        check_on_constraint(ctx, p)?;
        let alg = ctx.algebra();
        check_len(alg.dim(), x.len())?;
        let gp = p.g.mul(&GroupElement::exp(alg, &(x * step))?);
        let gm = p.g.mul(&GroupElement::exp(alg, &(x * (-step)))?);
        let dy = (y.value(&gp) - y.value(&gm)) / (step + step);
        let yv = y.value(&p.g);
        check_len(alg.dim(), yv.len())?;
        Ok(TrivTangent::group(dy + self.apply(x, &yv)))
    }
}

/// `∇_x Y = P(∇°_x Y)` at a point of `Σ_μ`.
pub fn sigma_covderiv<T: Scalar>(
    ctx: &ReductionContext<T>,
    conn: &FrameConnection<T>,
    p: &PhasePoint<T>,
    x: &DVector<T>,
    y: &dyn SigmaField<T>,
    step: T,
) -> Result<TrivTangent<T>> {
    SigmaConnection::new(ctx, conn)?.covderiv(ctx, p, x, y, step)
}

/// `max |ω(P∇_{X*}Y*, P E_c)|` over `X, Y ∈ 𝔤_μ` basis vectors and frame
/// vectors `E_c`.
pub fn totally_geodesic_defect<T: Scalar>(ctx: &ReductionContext<T>, conn: &FrameConnection<T>) -> Result<T> {
    let n = ctx.algebra().dim();
    check_len(n, conn.dim())?;
    let gamma = conn.coefficients(ctx.mu())?;
    let om = phase::omega_gram(ctx.algebra(), ctx.mu());
    let p = ctx.projector();
    let fields = ctx.radical_fields();
    let mut worst = T::zero();
    for a in 0..fields.ncols() {
        for b in 0..fields.ncols() {
            let v = p * gamma.contract(&fields.column(a).into_owned(), &fields.column(b).into_owned());
            // ω(v, P e_c) = vᵀ Ω P e_c for every c at once.
            let row = v.transpose() * &om * p;
            worst = worst.max(row.iter().fold(T::zero(), |m, x| m.max(x.abs_val())));
        }
    }
    Ok(worst)
}

/// Largest fiber component of `∇_{E_i} E_j` at `μ` over group frame pairs,
/// i.e. the failure of `Σ_μ` to be autoparallel.
pub fn autoparallel_defect<T: Scalar>(ctx: &ReductionContext<T>, conn: &FrameConnection<T>) -> Result<T> {
    let n = ctx.algebra().dim();
    check_len(n, conn.dim())?;
    let gamma = conn.coefficients(ctx.mu())?;
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let f = gamma.fiber(i, j);
            worst = worst.max(f.rows(n, n).norm());
        }
    }
    Ok(worst)
}
