//! Curvature of the reduced connection: the closed-form expression in terms
//! of the induced connection on `Σ_μ` and `α`, an independent
//! finite-difference commutator, and symmetry probes.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Result};
use crate::lie::group::GroupElement;
use crate::linalg;
use crate::orbit::{ChartField, CoordinateField};
use crate::reduction::reduced::{FieldJet, ReducedConnection, SectionFrame};
use crate::scalar::Scalar;

/// Default step for the outer finite difference of the oracle.
pub const DEFAULT_FD_STEP2: f64 = 1e-4;

/// One evaluation of `Rʳ(X, Y)Z` by both paths.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureSample<T: Scalar> {
    pub t: DVector<T>,
    pub x: DVector<T>,
    pub y: DVector<T>,
    pub z: DVector<T>,
    pub value: DVector<T>,
    pub oracle: DVector<T>,
    /// `max |value − oracle|`.
    pub discrepancy: T,
    /// Discrepancy over `max(1, max |oracle|)`.
    pub relative: T,
}

impl<T: Scalar> CurvatureSample<T> {
    pub fn new(t: DVector<T>, x: DVector<T>, y: DVector<T>, z: DVector<T>, value: DVector<T>, oracle: DVector<T>) -> Self {
        let discrepancy = linalg::max_abs_vec(&(&value - &oracle));
        let relative = discrepancy / T::one().max(linalg::max_abs_vec(&oracle));
        Self {
            t,
            x,
            y,
            z,
            value,
            oracle,
            discrepancy,
            relative,
        }
    }
}

struct Jets<T: Scalar> {
    x: FieldJet<T>,
    y: FieldJet<T>,
    z: FieldJet<T>,
}

fn formula_at<T: Scalar>(rc: &ReducedConnection<T>, frame: &SectionFrame<T>, j: &Jets<T>) -> DVector<T> {
    let ctx = rc.context();
    let alg = ctx.algebra();
    let pw = ctx.pi_w();
    let pd = ctx.pi_delta();
    let lam = |u: &DVector<T>, v: &DVector<T>| rc.lambda(u, v);
    let br = |u: &DVector<T>, v: &DVector<T>| alg.br(u, v);
    let lift = |v: &DVector<T>| &frame.lift * v;
    // Derivative of the lift of `b` along the lift of `a`.
    let d = |a: &FieldJet<T>, b: &FieldJet<T>| frame.lift_derivative(ctx, &a.value, &b.value, &b.jacobian);

    let (xb, yb, zb) = (lift(&j.x.value), lift(&j.y.value), lift(&j.z.value));
    let (dxy, dyx) = (d(&j.x, &j.y), d(&j.y, &j.x));
    let (dxz, dyz) = (d(&j.x, &j.z), d(&j.y, &j.z));

    // Curvature of the induced connection on Σ (constant coefficients).
    let r_sigma = lam(&xb, &lam(&yb, &zb)) - lam(&yb, &lam(&xb, &zb)) - lam(&br(&xb, &yb), &zb);
    let t1 = pw * r_sigma;

    let v_yz = pd * lam(&yb, &zb);
    let x_of_v_yz = pd * (lam(&dxy, &zb) + lam(&yb, &dxz));
    let t2 = -(pw * (x_of_v_yz + lam(&xb, &v_yz)));

    let v_xz = pd * lam(&xb, &zb);
    let y_of_v_xz = pd * (lam(&dyx, &zb) + lam(&xb, &dyz));
    let t3 = pw * (y_of_v_xz + lam(&yb, &v_xz));

    let q = pd * (&dxy - &dyx + br(&xb, &yb));
    let t4 = pw * (lam(&q, &zb) - br(&q, &zb));

    frame.to_chart(&(t1 + t2 + t3 + t4))
}

/// `Rʳ(X, Y)Z` at `t` from the closed-form expression.
pub fn reduced_curvature_formula<T: Scalar>(
    rc: &ReducedConnection<T>,
    x: &dyn ChartField<T>,
    y: &dyn ChartField<T>,
    z: &dyn ChartField<T>,
    t: &DVector<T>,
    h: Option<&GroupElement<T>>,
) -> Result<DVector<T>> {
    let frame = rc.frame(t, h)?;
    let jets = Jets {
        x: rc.jet(x, t)?,
        y: rc.jet(y, t)?,
        z: rc.jet(z, t)?,
    };
    Ok(formula_at(rc, &frame, &jets))
}

/// Section frames at `t` and at `t ± step·e_b`, shared by every oracle
/// evaluation at the same point.
pub struct OracleStencil<T: Scalar> {
    t: DVector<T>,
    step: T,
    center: SectionFrame<T>,
    plus: Vec<(DVector<T>, SectionFrame<T>)>,
    minus: Vec<(DVector<T>, SectionFrame<T>)>,
}

impl<T: Scalar> OracleStencil<T> {
    pub fn new(rc: &ReducedConnection<T>, t: &DVector<T>, step: T) -> Result<Self> {
        let d = rc.dim();
        check_len(d, t.len())?;
        let shifted = |sign: T| -> Result<Vec<(DVector<T>, SectionFrame<T>)>> {
            (0..d)
                .map(|b| {
                    let mut s = t.clone();
                    s[b] += sign * step;
                    let f = rc.frame(&s, None)?;
                    Ok((s, f))
                })
                .collect()
        };
        Ok(Self {
            t: t.clone(),
            step,
            center: rc.frame(t, None)?,
            plus: shifted(T::one())?,
            minus: shifted(-T::one())?,
        })
    }

    /// Value and central-difference Jacobian of `t ↦ ∇ʳ_Y Z`.
    fn covderiv_jet(&self, rc: &ReducedConnection<T>, y: &dyn ChartField<T>, z: &dyn ChartField<T>) -> Result<FieldJet<T>> {
        let d = rc.dim();
        let at = |s: &DVector<T>, f: &SectionFrame<T>| -> Result<DVector<T>> { Ok(rc.covderiv_jet(f, &y.value(s), &rc.jet(z, s)?)) };
        let value = at(&self.t, &self.center)?;
        let mut jacobian = DMatrix::zeros(d, d);
        for b in 0..d {
            let (tp, fp) = &self.plus[b];
            let (tm, fm) = &self.minus[b];
            let col = (at(tp, fp)? - at(tm, fm)?) / (self.step + self.step);
            jacobian.set_column(b, &col);
        }
        Ok(FieldJet { value, jacobian })
    }

    /// `∇ʳ_X ∇ʳ_Y Z − ∇ʳ_Y ∇ʳ_X Z − ∇ʳ_{[X,Y]} Z` at the stencil point.
    pub fn curvature(
        &self,
        rc: &ReducedConnection<T>,
        x: &dyn ChartField<T>,
        y: &dyn ChartField<T>,
        z: &dyn ChartField<T>,
    ) -> Result<DVector<T>> {
        let t = &self.t;
        let w_yz = self.covderiv_jet(rc, y, z)?;
        let w_xz = self.covderiv_jet(rc, x, z)?;
        let (xv, yv) = (x.value(t), y.value(t));
        let step = rc.fd_step();
        let bracket = y.jacobian(t, step) * &xv - x.jacobian(t, step) * &yv;
        let zj = rc.jet(z, t)?;
        let f = &self.center;
        Ok(rc.covderiv_jet(f, &xv, &w_yz) - rc.covderiv_jet(f, &yv, &w_xz) - rc.covderiv_jet(f, &bracket, &zj))
    }
}

/// `∇ʳ_X ∇ʳ_Y Z − ∇ʳ_Y ∇ʳ_X Z − ∇ʳ_{[X,Y]} Z` using only `∇ʳ` and central
/// differences of step `step2` for the outer derivative.
pub fn curvature_fd_oracle<T: Scalar>(
    rc: &ReducedConnection<T>,
    x: &dyn ChartField<T>,
    y: &dyn ChartField<T>,
    z: &dyn ChartField<T>,
    t: &DVector<T>,
    step2: T,
) -> Result<DVector<T>> {
    OracleStencil::new(rc, t, step2)?.curvature(rc, x, y, z)
}

/// Both curvature paths on the same inputs.
pub fn curvature_sample<T: Scalar>(
    rc: &ReducedConnection<T>,
    x: &dyn ChartField<T>,
    y: &dyn ChartField<T>,
    z: &dyn ChartField<T>,
    t: &DVector<T>,
    step2: T,
) -> Result<CurvatureSample<T>> {
    let value = reduced_curvature_formula(rc, x, y, z, t, None)?;
    let oracle = curvature_fd_oracle(rc, x, y, z, t, step2)?;
    Ok(CurvatureSample::new(t.clone(), x.value(t), y.value(t), z.value(t), value, oracle))
}

/// Which path produced a curvature tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvaturePath {
    Formula,
    Oracle { step2_bits: u64 },
}

impl CurvaturePath {
    pub fn oracle(step2: f64) -> Self {
        CurvaturePath::Oracle {
            step2_bits: step2.to_bits(),
        }
    }
}

/// `R[a][b][c][e]`: the `e` component of `Rʳ(∂_a, ∂_b)∂_c`, together with the
/// matrix of `ωʳ` at the same point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor<T: Scalar> {
    pub t: DVector<T>,
    pub dim: usize,
    pub data: Vec<T>,
    pub form: DMatrix<T>,
}

impl<T: Scalar> CurvatureTensor<T> {
    pub fn get(&self, a: usize, b: usize, c: usize, e: usize) -> T {
        let d = self.dim;
        self.data[((a * d + b) * d + c) * d + e]
    }

    /// `Rʳ(∂_a, ∂_b)∂_c` as a vector.
    pub fn apply(&self, a: usize, b: usize, c: usize) -> DVector<T> {
        DVector::from_fn(self.dim, |e, _| self.get(a, b, c, e))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs_val()))
    }
}

enum Eval<T: Scalar> {
    Formula(SectionFrame<T>),
    Oracle(OracleStencil<T>),
}

pub fn curvature_tensor<T: Scalar>(rc: &ReducedConnection<T>, t: &DVector<T>, path: CurvaturePath) -> Result<CurvatureTensor<T>> {
    let d = rc.dim();
    check_len(d, t.len())?;
    let coords: Vec<CoordinateField> = (0..d).map(|i| CoordinateField { dim: d, index: i }).collect();
    let mut data = vec![T::zero(); d * d * d * d];
    let eval = match path {
        CurvaturePath::Formula => Eval::Formula(rc.frame(t, None)?),
        CurvaturePath::Oracle { step2_bits } => Eval::Oracle(OracleStencil::new(rc, t, T::lit(f64::from_bits(step2_bits)))?),
    };
    let jets = coords.iter().map(|c| rc.jet(c, t)).collect::<Result<Vec<_>>>()?;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let v = match &eval {
                    Eval::Formula(f) => formula_at(
                        rc,
                        f,
                        &Jets {
                            x: jets[a].clone(),
                            y: jets[b].clone(),
                            z: jets[c].clone(),
                        },
                    ),
                    Eval::Oracle(s) => s.curvature(rc, &coords[a], &coords[b], &coords[c])?,
                };
                for e in 0..d {
                    data[((a * d + b) * d + c) * d + e] = v[e];
                }
            }
        }
    }
    Ok(CurvatureTensor {
        t: t.clone(),
        dim: d,
        data,
        form: rc.form_matrix(t)?,
    })
}

/// Symmetry defects of a set of curvature tensors.
///
/// Each defect is reported raw and divided by `max(1, scale)`, with scale the
/// largest `|R|` (or `|R|·|ωʳ|` for the symplectic-algebra test).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport<T: Scalar> {
    pub antisymmetry: T,
    pub symplectic: T,
    pub bianchi: T,
    pub antisymmetry_raw: T,
    pub symplectic_raw: T,
    pub bianchi_raw: T,
    pub curvature_scale: T,
    pub samples: usize,
}

impl<T: Scalar> SymmetryReport<T> {
    pub fn max_defect(&self) -> T {
        self.antisymmetry.max(self.symplectic).max(self.bianchi)
    }
}

pub fn curvature_symmetry_report<T: Scalar>(tensors: &[CurvatureTensor<T>]) -> SymmetryReport<T> {
    let mut anti = T::zero();
    let mut symp = T::zero();
    let mut bian = T::zero();
    let mut r_scale = T::zero();
    let mut rw_scale = T::zero();
    for r in tensors {
        let d = r.dim;
        let w = &r.form;
        r_scale = r_scale.max(r.max_abs());
        rw_scale = rw_scale.max(r.max_abs() * linalg::max_abs(w));
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let rabc = r.apply(a, b, c);
                    let rbac = r.apply(b, a, c);
                    anti = anti.max(linalg::max_abs_vec(&(&rabc + &rbac)));
                    let cyc = &rabc + r.apply(b, c, a) + r.apply(c, a, b);
                    bian = bian.max(linalg::max_abs_vec(&cyc));
                    for e in 0..d {
                        // ωʳ(R(a,b)c, e) − ωʳ(R(a,b)e, c).
                        let lhs = (rabc.transpose() * w.column(e))[(0, 0)];
                        let rabe = r.apply(a, b, e);
                        let rhs = (rabe.transpose() * w.column(c))[(0, 0)];
                        symp = symp.max((lhs - rhs).abs_val());
                    }
                }
            }
        }
    }
    let rn = T::one().max(r_scale);
    let rwn = T::one().max(rw_scale);
    SymmetryReport {
        antisymmetry: anti / rn,
        symplectic: symp / rwn,
        bianchi: bian / rn,
        antisymmetry_raw: anti,
        symplectic_raw: symp,
        bianchi_raw: bian,
        curvature_scale: r_scale,
        samples: tensors.len(),
    }
}
