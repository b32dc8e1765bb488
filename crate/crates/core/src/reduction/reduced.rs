//! The reduced connection `∇ʳ` and reduced form `ωʳ` on the coadjoint orbit,
//! expressed in an [`OrbitChart`].
//!
//! At a section point `g(t) = g₀ exp(T(t)) h` the chart direction `∂_b` is
//! the image of the left-frame vector `Ad(h⁻¹) J(t) e_b`. Its `W₁` part
//! `H(t) e_b` is the horizontal lift and its `𝔤_μ` part `Z(t) e_b` is
//! vertical.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::connection::FrameConnection;
use crate::error::{check_len, Error, Result};
use crate::lie::algebra::Covector;
use crate::lie::group::GroupElement;
use crate::linalg::{self, Tensor3, RANK_RTOL};
use crate::orbit::{AffineField, ChartField, CoordinateField, OrbitChart};
use crate::phase::TrivTangent;
use crate::reduction::context::{build_context, ContextOptions, ReductionContext};
use crate::reduction::sigma::{autoparallel_defect, sigma_coefficients};
use crate::scalar::Scalar;

/// Lift data at one section point.
#[derive(Clone, Debug)]
pub struct SectionFrame<T: Scalar> {
    pub t: DVector<T>,
    pub g: GroupElement<T>,
    /// Horizontal lifts of the chart directions (n×d).
    pub lift: DMatrix<T>,
    /// `∂_b` of the lift matrix, one per chart direction.
    pub lift_derivs: Vec<DMatrix<T>>,
    /// Vertical parts of the chart directions (n×d).
    pub vertical: DMatrix<T>,
    /// Left inverse of `lift` on the group part of `W₁` (d×n).
    pub lift_pinv: DMatrix<T>,
}

impl<T: Scalar> SectionFrame<T> {
    pub fn new(
        ctx: &ReductionContext<T>,
        chart: &OrbitChart<T>,
        t: &DVector<T>,
        h: Option<&GroupElement<T>>,
    ) -> Result<Self> {
        let alg = ctx.algebra();
        let n = alg.dim();
        check_len(chart.dim(), t.len())?;
        let ad_hinv = match h {
            Some(h) => {
                let moved = h.coad_apply(alg, ctx.mu())?;
                let off = linalg::max_abs_vec(&(&moved.0 - &ctx.mu().0));
                if off > T::tol(1e-9) * (T::one() + linalg::max_abs_vec(&ctx.mu().0)) {
                    return Err(Error::InvalidInput(format!("fiber shift does not fix mu (defect {:e})", off.as_f64())));
                }
                h.inverse().adjoint(alg)?
            }
            None => DMatrix::identity(n, n),
        };
        chart.check_rank(t)?;
        let g = chart.section_element(t, h)?;
        let j = &ad_hinv * chart.dexp(t)?;
        let lift = ctx.pi_w() * &j;
        let vertical = ctx.pi_delta() * &j;
        let lift_derivs = chart
            .dexp_derivatives(t)?
            .iter()
            .map(|dj| ctx.pi_w() * &ad_hinv * dj)
            .collect();
        let ratio = linalg::singular_ratio(&lift);
        if lift.ncols() > 0 && ratio <= T::lit(RANK_RTOL) {
            return Err(Error::SingularProjection(ratio.as_f64()));
        }
        let lift_pinv = linalg::pinv(&lift, T::lit(RANK_RTOL));
        Ok(Self {
            t: t.clone(),
            g,
            lift,
            lift_derivs,
            vertical,
            lift_pinv,
        })
    }

    /// Left-frame derivative of a horizontal lift `Ȳ` along the lift of `x`:
    /// `Σ_b x_b (∂_b H) y + H (DY x) + [Z x, H y]`.
    pub fn lift_derivative(
        &self,
        ctx: &ReductionContext<T>,
        x: &DVector<T>,
        y: &DVector<T>,
        dy: &DMatrix<T>,
    ) -> DVector<T> {
        let mut v = &self.lift * (dy * x);
        for (b, dh) in self.lift_derivs.iter().enumerate() {
            v += dh * y * x[b];
        }
        let z = &self.vertical * x;
        v + ctx.algebra().br(&z, &(&self.lift * y))
    }

    /// Chart components of a group vector in the group part of `W₁`.
    pub fn to_chart(&self, w: &DVector<T>) -> DVector<T> {
        &self.lift_pinv * w
    }
}

/// Inputs at a single chart point: values and Jacobians of the fields.
#[derive(Clone, Debug)]
pub struct FieldJet<T: Scalar> {
    pub value: DVector<T>,
    pub jacobian: DMatrix<T>,
}

impl<T: Scalar> FieldJet<T> {
    pub fn of(field: &dyn ChartField<T>, t: &DVector<T>, step: T) -> Self {
        Self {
            value: field.value(t),
            jacobian: field.jacobian(t, step),
        }
    }
}

/// `∇ʳ` and `ωʳ` for one context, connection and chart.
#[derive(Clone, Debug)]
pub struct ReducedConnection<T: Scalar> {
    ctx: ReductionContext<T>,
    chart: OrbitChart<T>,
    lambda: Tensor3<T>,
    fd_step: T,
}

/// Default step for numerically differentiated chart fields.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

impl<T: Scalar> ReducedConnection<T> {
    pub fn new(ctx: &ReductionContext<T>, conn: &FrameConnection<T>, chart: &OrbitChart<T>) -> Result<Self> {
        if ctx.is_zero_dimensional() {
            return Err(Error::ZeroDimensionalBase);
        }
        check_len(ctx.base_dim(), chart.dim())?;
        Ok(Self {
            ctx: ctx.clone(),
            chart: chart.clone(),
            lambda: sigma_coefficients(ctx, conn)?,
            fd_step: T::lit(DEFAULT_FD_STEP),
        })
    }

    /// Chart on the `μ`-orbit through the context's complement `m`.
    pub fn with_default_chart(ctx: &ReductionContext<T>, conn: &FrameConnection<T>) -> Result<Self> {
        if ctx.is_zero_dimensional() {
            return Err(Error::ZeroDimensionalBase);
        }
        let chart = OrbitChart::new(ctx.algebra(), ctx.mu(), ctx.m())?;
        Self::new(ctx, conn, &chart)
    }

    pub fn with_fd_step(mut self, step: T) -> Self {
        self.fd_step = step;
        self
    }

    pub fn context(&self) -> &ReductionContext<T> {
        &self.ctx
    }

    pub fn chart(&self) -> &OrbitChart<T> {
        &self.chart
    }

    pub fn fd_step(&self) -> T {
        self.fd_step
    }

    /// Coefficients of the induced connection on `Σ_μ`.
    pub fn sigma_coefficients(&self) -> &Tensor3<T> {
        &self.lambda
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn frame(&self, t: &DVector<T>, h: Option<&GroupElement<T>>) -> Result<SectionFrame<T>> {
        SectionFrame::new(&self.ctx, &self.chart, t, h)
    }

    pub fn jet(&self, field: &dyn ChartField<T>, t: &DVector<T>) -> Result<FieldJet<T>> {
        check_len(self.dim(), field.dim())?;
        Ok(FieldJet::of(field, t, self.fd_step))
    }

    /// `Λ(u, v)` on group vectors.
    pub fn lambda(&self, u: &DVector<T>, v: &DVector<T>) -> DVector<T> {
        self.lambda.contract(u, v)
    }

    /// Lifted `∇ʳ_X Y` as a group vector in `W₁`.
    pub fn covderiv_lifted(&self, frame: &SectionFrame<T>, x: &DVector<T>, y: &FieldJet<T>) -> DVector<T> {
        let xb = &frame.lift * x;
        let yb = &frame.lift * &y.value;
        let d = frame.lift_derivative(&self.ctx, x, &y.value, &y.jacobian);
        self.ctx.pi_w() * (d + self.lambda(&xb, &yb))
    }

    /// `∇ʳ_X Y` in chart components from the value of `X` and the jet of `Y`.
    pub fn covderiv_jet(&self, frame: &SectionFrame<T>, x: &DVector<T>, y: &FieldJet<T>) -> DVector<T> {
        frame.to_chart(&self.covderiv_lifted(frame, x, y))
    }

    pub fn covderiv_at(
        &self,
        x: &dyn ChartField<T>,
        y: &dyn ChartField<T>,
        t: &DVector<T>,
        h: Option<&GroupElement<T>>,
    ) -> Result<DVector<T>> {
        check_len(self.dim(), x.dim())?;
        let frame = self.frame(t, h)?;
        Ok(self.covderiv_jet(&frame, &x.value(t), &self.jet(y, t)?))
    }

    pub fn covderiv(&self, x: &dyn ChartField<T>, y: &dyn ChartField<T>, t: &DVector<T>) -> Result<DVector<T>> {
        self.covderiv_at(x, y, t, None)
    }

    /// `ωʳ(v, w) = ω(H v, H w) = −⟨μ, [H v, H w]⟩`.
    pub fn form_at(&self, frame: &SectionFrame<T>, v: &DVector<T>, w: &DVector<T>) -> T {
        let br = self.ctx.algebra().br(&(&frame.lift * v), &(&frame.lift * w));
        -self.ctx.mu().pair(&br)
    }

    pub fn form(&self, v: &DVector<T>, w: &DVector<T>, t: &DVector<T>) -> Result<T> {
        check_len(self.dim(), v.len())?;
        check_len(self.dim(), w.len())?;
        Ok(self.form_at(&self.frame(t, None)?, v, w))
    }

    /// Matrix of `ωʳ` on the coordinate directions at `t`.
    pub fn form_matrix(&self, t: &DVector<T>) -> Result<DMatrix<T>> {
        let frame = self.frame(t, None)?;
        let d = self.dim();
        Ok(DMatrix::from_fn(d, d, |a, b| {
            self.form_at(&frame, &linalg::unit(d, a), &linalg::unit(d, b))
        }))
    }

    /// Horizontal lift of an orbit tangent `v` at `ν(t)`.
    pub fn horizontal_lift(&self, v: &Covector<T>, t: &DVector<T>, h: Option<&GroupElement<T>>) -> Result<TrivTangent<T>> {
        horizontal_lift_at(&self.ctx, &self.chart, v, t, h)
    }
}

/// Solves `π_*|_{W₁} x = v` by least squares and returns `(Σ x_j w_j, 0)`.
pub fn horizontal_lift_at<T: Scalar>(
    ctx: &ReductionContext<T>,
    chart: &OrbitChart<T>,
    v: &Covector<T>,
    t: &DVector<T>,
    h: Option<&GroupElement<T>>,
) -> Result<TrivTangent<T>> {
    let n = ctx.algebra().dim();
    check_len(n, v.len())?;
    if ctx.is_zero_dimensional() {
        return Err(Error::ZeroDimensionalBase);
    }
    let g = chart.section_element(t, h)?;
    let w1 = ctx.w1_group();
    let a = chart.quotient_differential(&g)? * &w1;
    let ratio = linalg::singular_ratio(&a);
    if ratio <= T::lit(RANK_RTOL) {
        return Err(Error::SingularProjection(ratio.as_f64()));
    }
    let x = linalg::pinv(&a, T::lit(RANK_RTOL)) * &v.0;
    let residual = (&a * &x - &v.0).norm();
    if residual > T::tol(crate::orbit::TANGENT_TOL) * T::one().max(v.0.norm()) {
        return Err(Error::NotTangent(residual.as_f64()));
    }
    Ok(TrivTangent::group(w1 * x))
}

pub fn horizontal_lift<T: Scalar>(
    ctx: &ReductionContext<T>,
    chart: &OrbitChart<T>,
    v: &Covector<T>,
    t: &DVector<T>,
) -> Result<TrivTangent<T>> {
    horizontal_lift_at(ctx, chart, v, t, None)
}

pub fn reduced_covderiv<T: Scalar>(
    ctx: &ReductionContext<T>,
    conn: &FrameConnection<T>,
    chart: &OrbitChart<T>,
    x: &dyn ChartField<T>,
    y: &dyn ChartField<T>,
    t: &DVector<T>,
) -> Result<DVector<T>> {
    ReducedConnection::new(ctx, conn, chart)?.covderiv(x, y, t)
}

pub fn reduced_form<T: Scalar>(
    ctx: &ReductionContext<T>,
    conn: &FrameConnection<T>,
    chart: &OrbitChart<T>,
    v: &DVector<T>,
    w: &DVector<T>,
    t: &DVector<T>,
) -> Result<T> {
    ReducedConnection::new(ctx, conn, chart)?.form(v, w, t)
}

/// Autoparallel defect, and, when it vanishes, the largest change of `∇ʳ`
/// under a randomized `G_μ`-stable complement.
#[derive(Clone, Debug, PartialEq)]
pub struct AutoparallelReport<T: Scalar> {
    pub defect: T,
    pub independence: Option<T>,
}

/// Threshold on the autoparallel defect below which the independence
/// comparison is run.
pub const AUTOPARALLEL_TOL: f64 = 1e-10;

pub fn autoparallel_check<T: Scalar>(
    ctx: &ReductionContext<T>,
    conn: &FrameConnection<T>,
    seed: u64,
    samples: usize,
) -> Result<AutoparallelReport<T>> {
    let defect = autoparallel_defect(ctx, conn)?;
    if defect > T::tol(AUTOPARALLEL_TOL) || ctx.is_zero_dimensional() {
        let independence = ctx.is_zero_dimensional().then(T::zero);
        return Ok(AutoparallelReport { defect, independence });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s2 = ctx.random_stable_s_tilde(&mut rng, T::lit(0.3));
    let ctx2 = build_context(ctx.algebra(), ctx.mu(), &ContextOptions { s_tilde: Some(s2) })?;
    let r1 = ReducedConnection::with_default_chart(ctx, conn)?;
    let r2 = ReducedConnection::with_default_chart(&ctx2, conn)?;
    let d = r1.dim();
    let radius = r1.chart().radius() * T::lit(0.5);
    let mut worst = T::zero();
    for _ in 0..samples.max(1) {
        let t = sample_point(&mut rng, d, radius);
        let fields = sample_fields::<T, _>(&mut rng, d);
        for x in &fields {
            for y in &fields {
                let a = r1.covderiv(x.as_ref(), y.as_ref(), &t)?;
                let b = r2.covderiv(x.as_ref(), y.as_ref(), &t)?;
                worst = worst.max(linalg::max_abs_vec(&(a - b)));
            }
        }
    }
    Ok(AutoparallelReport {
        defect,
        independence: Some(worst),
    })
}

/// Uniform point in the cube `[-radius, radius]^d`.
pub fn sample_point<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, d: usize, radius: T) -> DVector<T> {
    DVector::from_fn(d, |_, _| T::lit(rng.gen_range(-1.0..1.0)) * radius)
}

/// Coordinate fields plus one random affine field.
pub fn sample_fields<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<Box<dyn ChartField<T>>> {
    let mut out: Vec<Box<dyn ChartField<T>>> = (0..d)
        .map(|i| Box::new(CoordinateField { dim: d, index: i }) as Box<dyn ChartField<T>>)
        .collect();
    let offset = DVector::from_fn(d, |_, _| T::lit(rng.gen_range(-1.0..1.0)));
    let linear = DMatrix::from_fn(d, d, |_, _| T::lit(rng.gen_range(-1.0..1.0)));
    out.push(Box::new(AffineField { offset, linear }));
    out
}
