//! Pointwise measurements of the reduced structure in an orbit chart.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{check_len, Result};
use crate::lie::group::GroupElement;
use crate::linalg;
use crate::orbit::{kks_form, lie_bracket, ChartField};
use crate::reduction::context::ReductionContext;
use crate::reduction::reduced::ReducedConnection;
use crate::scalar::Scalar;

/// `max |∇ʳ_X Y − ∇ʳ_Y X − [X, Y]|` over pairs of `fields` at `t`.
pub fn reduced_torsion_defect<T: Scalar>(
    rc: &ReducedConnection<T>,
    fields: &[Box<dyn ChartField<T>>],
    t: &DVector<T>,
) -> Result<T> {
    check_len(rc.dim(), t.len())?;
    let frame = rc.frame(t, None)?;
    let jets = fields.iter().map(|f| rc.jet(f.as_ref(), t)).collect::<Result<Vec<_>>>()?;
    let mut worst = T::zero();
    for (i, x) in fields.iter().enumerate() {
        for (j, y) in fields.iter().enumerate().skip(i + 1) {
            let xy = rc.covderiv_jet(&frame, &jets[i].value, &jets[j]);
            let yx = rc.covderiv_jet(&frame, &jets[j].value, &jets[i]);
            let br = lie_bracket(x.as_ref(), y.as_ref(), t, rc.fd_step());
            worst = worst.max(linalg::max_abs_vec(&(xy - yx - br)));
        }
    }
    Ok(worst)
}

/// `max |X(ωʳ(Y, Z)) − ωʳ(∇ʳ_X Y, Z) − ωʳ(Y, ∇ʳ_X Z)|` over triples of
/// `fields`. The derivative of `ωʳ(Y, Z)` is a central difference along
/// `X(t)` with the connection's finite-difference step.
pub fn reduced_omega_defect<T: Scalar>(
    rc: &ReducedConnection<T>,
    fields: &[Box<dyn ChartField<T>>],
    t: &DVector<T>,
) -> Result<T> {
    check_len(rc.dim(), t.len())?;
    let h = rc.fd_step();
    let frame = rc.frame(t, None)?;
    let jets = fields.iter().map(|f| rc.jet(f.as_ref(), t)).collect::<Result<Vec<_>>>()?;
    let mut worst = T::zero();
    for x in &jets {
        let tp = t + &x.value * h;
        let tm = t - &x.value * h;
        let (fp, fm) = (rc.frame(&tp, None)?, rc.frame(&tm, None)?);
        for (j, y) in fields.iter().enumerate() {
            for (k, z) in fields.iter().enumerate() {
                let fwd = rc.form_at(&fp, &y.value(&tp), &z.value(&tp));
                let bwd = rc.form_at(&fm, &y.value(&tm), &z.value(&tm));
                let deriv = (fwd - bwd) / (h + h);
                let dy = rc.covderiv_jet(&frame, &x.value, &jets[j]);
                let dz = rc.covderiv_jet(&frame, &x.value, &jets[k]);
                let rest = rc.form_at(&frame, &dy, &jets[k].value) + rc.form_at(&frame, &jets[j].value, &dz);
                worst = worst.max((deriv - rest).abs_val());
            }
        }
    }
    Ok(worst)
}

/// `max |∂_a ω_bc + ∂_b ω_ca + ∂_c ω_ab|` with central differences of
/// step `step`. Vanishes identically on two-dimensional orbits.
pub fn form_closedness_defect<T: Scalar>(rc: &ReducedConnection<T>, t: &DVector<T>, step: T) -> Result<T> {
    let d = rc.dim();
    check_len(d, t.len())?;
    let mut partials = Vec::with_capacity(d);
    for a in 0..d {
        let mut tp = t.clone();
        let mut tm = t.clone();
        tp[a] += step;
        tm[a] -= step;
        partials.push((rc.form_matrix(&tp)? - rc.form_matrix(&tm)?) / (step + step));
    }
    let mut worst = T::zero();
    for a in 0..d {
        for b in (a + 1)..d {
            for c in (b + 1)..d {
                let v = partials[a][(b, c)] + partials[b][(c, a)] + partials[c][(a, b)];
                worst = worst.max(v.abs_val());
            }
        }
    }
    Ok(worst)
}

/// Comparison of `ωʳ` with the KKS form on the chart directions.
#[derive(Clone, Debug, PartialEq)]
pub struct FormSign<T: Scalar> {
    /// The single sign with `ωʳ ≈ σ·KKS` at every point.
    pub sigma: i8,
    /// Largest pointwise `max|ωʳ − σ KKS| / max|KKS|`.
    pub relative_error: T,
    pub points: usize,
}

/// Fits one global sign `σ` with `ωʳ = σ·KKS` over the points `ts`.
pub fn kks_sign<T: Scalar>(rc: &ReducedConnection<T>, ts: &[DVector<T>]) -> Result<FormSign<T>> {
    let alg = rc.context().algebra();
    let d = rc.dim();
    let mut pairs = Vec::with_capacity(ts.len());
    let mut agreement = T::zero();
    for t in ts {
        let w = rc.form_matrix(t)?;
        let nu = rc.chart().point(t)?;
        let dnu = rc.chart().differential(t)?;
        let cov = |a: usize| crate::lie::Covector(dnu.column(a).into_owned());
        let mut k = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                k[(a, b)] = kks_form(alg, &nu, &cov(a), &cov(b))?;
            }
        }
        agreement += w.dot(&k);
        pairs.push((w, k));
    }
    let sigma: i8 = if agreement < T::zero() { -1 } else { 1 };
    let s = T::lit(f64::from(sigma));
    let relative_error = pairs.iter().fold(T::zero(), |m, (w, k)| {
        let scale = linalg::max_abs(k).max(T::lit(f64::MIN_POSITIVE));
        m.max(linalg::max_abs(&(w - k * s)) / scale)
    });
    Ok(FormSign {
        sigma,
        relative_error,
        points: ts.len(),
    })
}

/// `count` elements `exp(Σ c_i Y_i)` of `G_μ`, with `Y_i` the stabilizer
/// basis and `c_i` uniform in `[-scale, scale]`.
pub fn random_stabilizer_elements<T: Scalar, R: Rng + ?Sized>(
    ctx: &ReductionContext<T>,
    rng: &mut R,
    count: usize,
    scale: T,
) -> Result<Vec<GroupElement<T>>> {
    let g_mu = ctx.g_mu();
    (0..count)
        .map(|_| {
            let c = DVector::from_fn(g_mu.ncols(), |_, _| T::lit(rng.gen_range(-1.0..1.0)) * scale);
            GroupElement::exp(ctx.algebra(), &(g_mu * c))
        })
        .collect()
}

/// Largest change of `∇ʳ_X Y` and of `ωʳ` when the section is moved along
/// the fiber by each `h ∈ G_μ`.
pub fn fiber_independence_defect<T: Scalar>(
    rc: &ReducedConnection<T>,
    fields: &[Box<dyn ChartField<T>>],
    t: &DVector<T>,
    hs: &[GroupElement<T>],
) -> Result<T> {
    check_len(rc.dim(), t.len())?;
    let base = rc.frame(t, None)?;
    let jets = fields.iter().map(|f| rc.jet(f.as_ref(), t)).collect::<Result<Vec<_>>>()?;
    let mut worst = T::zero();
    for h in hs {
        let moved = rc.frame(t, Some(h))?;
        for x in &jets {
            for y in &jets {
                let a = rc.covderiv_jet(&base, &x.value, y);
                let b = rc.covderiv_jet(&moved, &x.value, y);
                worst = worst.max(linalg::max_abs_vec(&(a - b)));
                let fa = rc.form_at(&base, &x.value, &y.value);
                let fb = rc.form_at(&moved, &x.value, &y.value);
                worst = worst.max((fa - fb).abs_val());
            }
        }
    }
    Ok(worst)
}
