//! Linear connections on `G×𝔤*` written in the frame of left-invariant group
//! directions followed by constant fiber directions.
//!
//! `Γ[a][b][c]` is the `E_c` component of `∇_{E_a} E_b`. Coefficients of a
//! left-invariant connection depend on `ξ` only.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{check_len, Error, Result};
use crate::lie::algebra::{Covector, LieAlgebra};
use crate::lie::group::GroupElement;
use crate::linalg::{self, Tensor3, RANK_RTOL};
use crate::phase::{self, TrivTangent};
use crate::quadrature::QuadratureRule;
use crate::scalar::Scalar;

/// Threshold used when validating the torsion-free and symplectic flags.
pub const FLAG_TOL: f64 = 1e-10;

/// A point-dependent coefficient array over the 2n-dimensional frame.
pub trait CoefficientField<T: Scalar>: Send + Sync {
    fn coefficients(&self, xi: &Covector<T>) -> Result<Tensor3<T>>;
}

/// Coefficients independent of the point.
#[derive(Clone, Debug)]
pub struct ConstantField<T: Scalar>(pub Tensor3<T>);

impl<T: Scalar> CoefficientField<T> for ConstantField<T> {
    fn coefficients(&self, _xi: &Covector<T>) -> Result<Tensor3<T>> {
        Ok(self.0.clone())
    }
}

/// Coefficients given by a closure.
pub struct FnField<F>(pub F);

impl<T, F> CoefficientField<T> for FnField<F>
where
    T: Scalar,
    F: Fn(&Covector<T>) -> Result<Tensor3<T>> + Send + Sync,
{
    fn coefficients(&self, xi: &Covector<T>) -> Result<Tensor3<T>> {
        (self.0)(xi)
    }
}

struct SymplectizedField<T: Scalar> {
    alg: LieAlgebra<T>,
    inner: Arc<dyn CoefficientField<T>>,
}

impl<T: Scalar> CoefficientField<T> for SymplectizedField<T> {
    fn coefficients(&self, xi: &Covector<T>) -> Result<Tensor3<T>> {
        let mut gamma = self.inner.coefficients(xi)?;
        let a = symplectic_correction(&self.alg, &gamma, xi)?;
        gamma.add_scaled(T::one(), &a);
        Ok(gamma)
    }
}

struct PullbackNode<T: Scalar> {
    weight: T,
    phi: DMatrix<T>,
    phi_inv: DMatrix<T>,
    coad_inv: DMatrix<T>,
}

struct AveragedField<T: Scalar> {
    inner: Arc<dyn CoefficientField<T>>,
    nodes: Vec<PullbackNode<T>>,
}

impl<T: Scalar> CoefficientField<T> for AveragedField<T> {
    fn coefficients(&self, xi: &Covector<T>) -> Result<Tensor3<T>> {
        let n2 = 2 * xi.len();
        let mut out = Tensor3::cube(n2);
        for node in &self.nodes {
            let moved = Covector(&node.coad_inv * &xi.0);
            let g = self.inner.coefficients(&moved)?;
            let pulled = transform_coefficients(&g, &node.phi, &node.phi_inv);
            out.add_scaled(node.weight, &pulled);
        }
        Ok(out)
    }
}

/// A connection together with its validated flags.
#[derive(Clone)]
pub struct FrameConnection<T: Scalar> {
    field: Arc<dyn CoefficientField<T>>,
    dim: usize,
    label: String,
    flags: ConnectionFlags<T>,
}

/// Measured torsion and `∇ω` defects at the probe covectors, and the flags
/// they imply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionFlags<T: Scalar> {
    pub torsion_defect: T,
    pub omega_defect: T,
    pub is_torsion_free: bool,
    pub is_symplectic: bool,
}

impl<T: Scalar> fmt::Debug for FrameConnection<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameConnection")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("flags", &self.flags)
            .finish()
    }
}

/// Deterministic probe covectors: zero, the dual basis, and two generic points.
pub fn probe_covectors<T: Scalar>(n: usize) -> Vec<Covector<T>> {
    let mut out = vec![Covector::zeros(n)];
    out.extend((0..n).map(|i| Covector::basis(n, i)));
    for s in [1.0, -2.3] {
        let comps: Vec<T> = (0..n).map(|i| T::lit(s * ((i as f64 + 1.0) * 0.7).sin())).collect();
        out.push(Covector::from_slice(&comps));
    }
    out
}

impl<T: Scalar> FrameConnection<T> {
    /// Wraps a coefficient field and validates its flags at the probe points.
    pub fn from_field(
        alg: &LieAlgebra<T>,
        field: Arc<dyn CoefficientField<T>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut conn = Self {
            field,
            dim: alg.dim(),
            label: label.into(),
            flags: ConnectionFlags {
                torsion_defect: T::zero(),
                omega_defect: T::zero(),
                is_torsion_free: false,
                is_symplectic: false,
            },
        };
        conn.flags = conn.measure_flags(alg, &probe_covectors(alg.dim()))?;
        Ok(conn)
    }

    pub fn constant(alg: &LieAlgebra<T>, gamma: Tensor3<T>, label: impl Into<String>) -> Result<Self> {
        let n2 = 2 * alg.dim();
        if gamma.dims() != (n2, n2, n2) {
            return Err(Error::DimensionMismatch {
                expected: n2,
                found: gamma.dims().0,
            });
        }
        Self::from_field(alg, Arc::new(ConstantField(gamma)), label)
    }

    pub fn coefficients(&self, xi: &Covector<T>) -> Result<Tensor3<T>> {
        check_len(self.dim, xi.len())?;
        self.field.coefficients(xi)
    }

    pub fn field(&self) -> Arc<dyn CoefficientField<T>> {
        Arc::clone(&self.field)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flags(&self) -> ConnectionFlags<T> {
        self.flags
    }

    pub fn is_torsion_free(&self) -> bool {
        self.flags.is_torsion_free
    }

    pub fn is_symplectic(&self) -> bool {
        self.flags.is_symplectic
    }

    /// Largest torsion and `∇ω` defects over the given covectors.
    pub fn measure_flags(&self, alg: &LieAlgebra<T>, xis: &[Covector<T>]) -> Result<ConnectionFlags<T>> {
        let mut torsion_defect = T::zero();
        let mut omega_defect = T::zero();
        for xi in xis {
            let g = self.coefficients(xi)?;
            torsion_defect = torsion_defect.max(torsion_tensor(alg, &g).max_abs());
            omega_defect = omega_defect.max(nabla_omega_tensor(alg, &g, xi).max_abs());
        }
        let tol = T::tol(FLAG_TOL);
        Ok(ConnectionFlags {
            torsion_defect,
            omega_defect,
            is_torsion_free: torsion_defect <= tol,
            is_symplectic: omega_defect <= tol,
        })
    }

    /// `∇_u v` for frame-constant `u`, `v` at `ξ`.
    pub fn covariant(&self, xi: &Covector<T>, u: &TrivTangent<T>, v: &TrivTangent<T>) -> Result<TrivTangent<T>> {
        check_len(self.dim, u.dim())?;
        check_len(self.dim, v.dim())?;
        let g = self.coefficients(xi)?;
        TrivTangent::from_stacked(&g.contract(&u.stacked(), &v.stacked()))
    }
}

/// `∇°_{(X,η)}(X′,η′) = (½[X,X′], 0)`.
pub fn baseline_connection<T: Scalar>(alg: &LieAlgebra<T>) -> FrameConnection<T> {
    FrameConnection::constant(alg, baseline_coefficients(alg), "baseline").expect("baseline has frame dimensions")
}

pub fn baseline_coefficients<T: Scalar>(alg: &LieAlgebra<T>) -> Tensor3<T> {
    let n = alg.dim();
    let c = alg.structure();
    let half = T::lit(0.5);
    Tensor3::from_fn(2 * n, 2 * n, 2 * n, |a, b, k| {
        if a < n && b < n && k < n {
            half * c[(a, b, k)]
        } else {
            T::zero()
        }
    })
}

/// `(∇_{E_a} ω)(E_b, E_c)` for all frame triples.
pub fn nabla_omega_tensor<T: Scalar>(alg: &LieAlgebra<T>, gamma: &Tensor3<T>, xi: &Covector<T>) -> Tensor3<T> {
    let n2 = 2 * alg.dim();
    let om = phase::omega_gram(alg, xi);
    let d = phase::omega_frame_derivative(alg);
    Tensor3::from_fn(n2, n2, n2, |a, b, c| {
        let mut v = d[(a, b, c)];
        for e in 0..n2 {
            v -= gamma[(a, b, e)] * om[(e, c)] + gamma[(a, c, e)] * om[(b, e)];
        }
        v
    })
}

/// `(∇_u ω)(v, w)` at `ξ`.
pub fn nabla_omega<T: Scalar>(
    conn: &FrameConnection<T>,
    alg: &LieAlgebra<T>,
    xi: &Covector<T>,
    u: &TrivTangent<T>,
    v: &TrivTangent<T>,
    w: &TrivTangent<T>,
) -> Result<T> {
    let n = alg.dim();
    check_len(n, conn.dim())?;
    for t in [u, v, w] {
        check_len(n, t.dim())?;
    }
    let g = conn.coefficients(xi)?;
    let t = nabla_omega_tensor(alg, &g, xi);
    let (u, v, w) = (u.stacked(), v.stacked(), w.stacked());
    let mut s = T::zero();
    for a in 0..2 * n {
        for b in 0..2 * n {
            let uv = u[a] * v[b];
            if uv == T::zero() {
                continue;
            }
            for c in 0..2 * n {
                s += uv * w[c] * t[(a, b, c)];
            }
        }
    }
    Ok(s)
}

/// `T[a][b][·] = Γ_ab − Γ_ba − C_ab` with `C` the frame brackets.
pub fn torsion_tensor<T: Scalar>(alg: &LieAlgebra<T>, gamma: &Tensor3<T>) -> Tensor3<T> {
    let n2 = 2 * alg.dim();
    let c = phase::frame_brackets(alg);
    Tensor3::from_fn(n2, n2, n2, |a, b, k| gamma[(a, b, k)] - gamma[(b, a, k)] - c[(a, b, k)])
}

/// `∇_u v − ∇_v u − [u, v]` for frame-constant `u`, `v` at `ξ`.
pub fn torsion<T: Scalar>(
    conn: &FrameConnection<T>,
    alg: &LieAlgebra<T>,
    xi: &Covector<T>,
    u: &TrivTangent<T>,
    v: &TrivTangent<T>,
) -> Result<TrivTangent<T>> {
    check_len(alg.dim(), u.dim())?;
    check_len(alg.dim(), v.dim())?;
    let g = conn.coefficients(xi)?;
    TrivTangent::from_stacked(&torsion_tensor(alg, &g).contract(&u.stacked(), &v.stacked()))
}

/// The correction `A` with `ω(A(U)V, W) = ⅓[(∇_Uω)(V,W) + (∇_Vω)(U,W)]` on
/// frame vectors.
pub fn symplectic_correction<T: Scalar>(alg: &LieAlgebra<T>, gamma: &Tensor3<T>, xi: &Covector<T>) -> Result<Tensor3<T>> {
    let n2 = 2 * alg.dim();
    let nab = nabla_omega_tensor(alg, gamma, xi);
    let om_t = phase::omega_gram(alg, xi).transpose();
    let third = T::lit(1.0 / 3.0);
    let mut rhs = DMatrix::zeros(n2, n2 * n2);
    for a in 0..n2 {
        for b in 0..n2 {
            for c in 0..n2 {
                rhs[(c, a * n2 + b)] = third * (nab[(a, b, c)] + nab[(b, a, c)]);
            }
        }
    }
    let sol = linalg::solve_checked(&om_t, &rhs, T::lit(RANK_RTOL)).map_err(|r| Error::SingularOmega(r.as_f64()))?;
    Ok(Tensor3::from_fn(n2, n2, n2, |a, b, c| sol[(c, a * n2 + b)]))
}

/// Projects a torsion-free connection onto the symplectic connections.
pub fn symplectize<T: Scalar>(conn: &FrameConnection<T>, alg: &LieAlgebra<T>) -> Result<FrameConnection<T>> {
    check_len(alg.dim(), conn.dim())?;
    if !conn.is_torsion_free() {
        return Err(Error::InvalidInput(format!(
            "symplectize needs a torsion-free connection (torsion defect {:e})",
            conn.flags().torsion_defect.as_f64()
        )));
    }
    let field = SymplectizedField {
        alg: alg.clone(),
        inner: conn.field(),
    };
    FrameConnection::from_field(alg, Arc::new(field), format!("symplectized({})", conn.label()))
}

/// The frame map `Φ = Ad(g⁻¹) ⊕ Coad(g⁻¹)` of the right translation by `g`.
pub fn right_frame_map<T: Scalar>(alg: &LieAlgebra<T>, g: &GroupElement<T>) -> Result<DMatrix<T>> {
    let n = alg.dim();
    let ginv = g.inverse();
    let mut phi = DMatrix::zeros(2 * n, 2 * n);
    phi.view_mut((0, 0), (n, n)).copy_from(&ginv.adjoint(alg)?);
    phi.view_mut((n, n), (n, n)).copy_from(&ginv.coadjoint(alg)?);
    Ok(phi)
}

/// `Γ′[a][b][c] = Σ Φ[a′][a] Φ[b′][b] Γ[a′][b′][c′] Φ⁻¹[c][c′]`.
pub fn transform_coefficients<T: Scalar>(gamma: &Tensor3<T>, phi: &DMatrix<T>, phi_inv: &DMatrix<T>) -> Tensor3<T> {
    let n2 = phi.nrows();
    // Contract one index at a time.
    let mut t1 = Tensor3::cube(n2);
    for a in 0..n2 {
        for ap in 0..n2 {
            let p = phi[(ap, a)];
            if p == T::zero() {
                continue;
            }
            for b in 0..n2 {
                for c in 0..n2 {
                    t1[(a, b, c)] += p * gamma[(ap, b, c)];
                }
            }
        }
    }
    let mut t2 = Tensor3::cube(n2);
    for a in 0..n2 {
        for b in 0..n2 {
            for bp in 0..n2 {
                let p = phi[(bp, b)];
                if p == T::zero() {
                    continue;
                }
                for c in 0..n2 {
                    t2[(a, b, c)] += p * t1[(a, bp, c)];
                }
            }
        }
    }
    Tensor3::from_fn(n2, n2, n2, |a, b, c| {
        let mut s = T::zero();
        for cp in 0..n2 {
            s += phi_inv[(c, cp)] * t2[(a, b, cp)];
        }
        s
    })
}

/// Coefficients at `ξ` of the pullback of `conn` by the right translation `g`.
pub fn pullback_coefficients<T: Scalar>(
    conn: &FrameConnection<T>,
    alg: &LieAlgebra<T>,
    g: &GroupElement<T>,
    xi: &Covector<T>,
) -> Result<Tensor3<T>> {
    let phi = right_frame_map(alg, g)?;
    let phi_inv = phi.clone().try_inverse().ok_or(Error::NotInGroup(f64::INFINITY))?;
    let moved = g.inverse().coad_apply(alg, xi)?;
    Ok(transform_coefficients(&conn.coefficients(&moved)?, &phi, &phi_inv))
}

/// `Σ w_i R_{g_i}^* ∇` over the quadrature nodes.
pub fn average_connection<T: Scalar>(
    conn: &FrameConnection<T>,
    alg: &LieAlgebra<T>,
    q: &QuadratureRule<T>,
) -> Result<FrameConnection<T>> {
    check_len(alg.dim(), conn.dim())?;
    alg.realization()?;
    let nodes = q
        .nodes()
        .iter()
        .zip(q.weights())
        .map(|(g, &weight)| {
            let phi = right_frame_map(alg, g)?;
            let phi_inv = phi.clone().try_inverse().ok_or(Error::NotInGroup(f64::INFINITY))?;
            Ok(PullbackNode {
                weight,
                phi,
                phi_inv,
                coad_inv: g.inverse().coadjoint(alg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let field = AveragedField {
        inner: conn.field(),
        nodes,
    };
    FrameConnection::from_field(alg, Arc::new(field), format!("averaged({})", conn.label()))
}

/// Frame labels `e0..e{n-1}` for group directions and `f0..f{n-1}` for
/// fiber directions.
pub fn frame_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("e{i}")).chain((0..n).map(|i| format!("f{i}"))).collect()
}

/// JSON export: frame labels and the coefficient array at each `ξ`.
pub fn export_json<T: Scalar>(conn: &FrameConnection<T>, xis: &[Covector<T>]) -> Result<Value> {
    let n = conn.dim();
    let n2 = 2 * n;
    let samples = xis
        .iter()
        .map(|xi| {
            let g = conn.coefficients(xi)?;
            let gamma: Vec<Vec<Vec<f64>>> = (0..n2)
                .map(|a| (0..n2).map(|b| (0..n2).map(|c| g[(a, b, c)].as_f64()).collect()).collect())
                .collect();
            let xi: Vec<f64> = xi.comps().iter().map(|x| x.as_f64()).collect();
            Ok(json!({ "xi": xi, "gamma": gamma }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "label": conn.label(),
        "frame": frame_labels(n),
        "convention": "gamma[a][b][c] is the E_c component of nabla_{E_a} E_b",
        "samples": samples,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::catalog;

    #[test]
    fn baseline_flags() {
        let a = catalog::so3::<f64>();
        let c = baseline_connection(&a);
        assert!(c.is_torsion_free());
        assert!(!c.is_symplectic());
        let ab = catalog::abelian::<f64>(2);
        let c = baseline_connection(&ab);
        assert!(c.is_torsion_free() && c.is_symplectic());
    }

    #[test]
    fn symplectized_flags() {
        for a in catalog::all::<f64>() {
            let s = symplectize(&baseline_connection(&a), &a).unwrap();
            assert!(s.is_torsion_free() && s.is_symplectic(), "{} {:?}", a.name(), s.flags());
        }
    }

    #[test]
    fn symplectize_rejects_torsion() {
        let a = catalog::so3::<f64>();
        let mut g = baseline_coefficients(&a);
        g[(0, 1, 2)] += 1.0;
        let c = FrameConnection::constant(&a, g, "bad").unwrap();
        assert!(matches!(symplectize(&c, &a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn export_shape() {
        let a = catalog::heis3::<f64>();
        let v = export_json(&baseline_connection(&a), &[Covector::basis(3, 2)]).unwrap();
        assert_eq!(v["frame"].as_array().unwrap().len(), 6);
        assert_eq!(v["samples"][0]["gamma"].as_array().unwrap().len(), 6);
    }
}
