//! Linear algebra at the level `μ`: the complement `S̃`, its isotropic
//! correction `S`, the horizontal and transverse spaces `W₁`, `W₂`, the
//! projector `P` onto `TΣ` and the connection form `α`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::lie::algebra::{Covector, LieAlgebra};
use crate::lie::stabilizer::{reductive_complement, stabilizer_defect};
use crate::linalg::{self, RANK_RTOL};
use crate::phase::{self, constraint_split, embed_fiber, embed_group, ConstraintSplit};
use crate::scalar::Scalar;

/// Tolerance for the isotropy of `Δ` and of the corrected `S`.
pub const ISOTROPY_TOL: f64 = 1e-10;

/// Tolerance for `G_μ`-stability of a supplied `S̃`.
pub const STABILITY_TOL: f64 = 1e-9;

/// Result of the isotropic correction `S = {u + L u : u ∈ S̃}`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropicCorrection<T: Scalar> {
    /// Corrected basis, column `a` being `s̃_a + Σ_i Λ_{ia} d_i`.
    pub s: DMatrix<T>,
    /// Coefficients of `L` in the bases of `S̃` and `Δ`.
    pub lambda: DMatrix<T>,
    /// Singular-value ratio of the pairing `ω(d_i, s̃_j)`.
    pub pairing_ratio: T,
}

/// Isotropic correction for an arbitrary Gram matrix `Ω`.
///
/// With `K_{ij} = ω(d_i, s̃_j)` and `W_{ab} = ω(s̃_a, s̃_b)`, the choice
/// `Λ = ½ K⁻ᵀ W` makes `S` isotropic.
pub fn isotropic_correction_gram<T: Scalar>(
    omega: &DMatrix<T>,
    s_tilde: &DMatrix<T>,
    delta: &DMatrix<T>,
) -> Result<IsotropicCorrection<T>> {
    check_len(omega.nrows(), s_tilde.nrows())?;
    check_len(omega.nrows(), delta.nrows())?;
    check_len(delta.ncols(), s_tilde.ncols())?;
    let iso = linalg::max_abs(&(delta.transpose() * omega * delta));
    if iso > T::tol(ISOTROPY_TOL) {
        return Err(Error::NonIsotropicRadical(iso.as_f64()));
    }
    let k = delta.transpose() * omega * s_tilde;
    let w = s_tilde.transpose() * omega * s_tilde;
    let pairing_ratio = if k.nrows() == 0 { T::one() } else { linalg::singular_ratio(&k) };
    let lambda = linalg::solve_checked(&k.transpose(), &(w * T::lit(0.5)), T::lit(RANK_RTOL))
        .map_err(|r| Error::DegeneratePairing(r.as_f64()))?;
    let s = s_tilde + delta * &lambda;
    Ok(IsotropicCorrection { s, lambda, pairing_ratio })
}

/// Isotropic correction for `ω` at `μ` on `G×𝔤*`.
pub fn isotropic_correction<T: Scalar>(
    alg: &LieAlgebra<T>,
    mu: &Covector<T>,
    s_tilde: &DMatrix<T>,
    delta: &DMatrix<T>,
) -> Result<IsotropicCorrection<T>> {
    check_len(alg.dim(), mu.len())?;
    isotropic_correction_gram(&phase::omega_gram(alg, mu), s_tilde, delta)
}

/// Infinitesimal right action `φ_Y = diag(−ad Y, ad Yᵀ)` of `Y ∈ 𝔤_μ` on
/// left-frame components.
pub fn stabilizer_action<T: Scalar>(alg: &LieAlgebra<T>, y: &nalgebra::DVector<T>) -> DMatrix<T> {
    let n = alg.dim();
    let ad = alg.ad(y);
    let mut phi = DMatrix::zeros(2 * n, 2 * n);
    phi.view_mut((0, 0), (n, n)).copy_from(&(-&ad));
    phi.view_mut((n, n), (n, n)).copy_from(&ad.transpose());
    phi
}

/// Largest distance of `φ_Y s` from `span(basis)` over `Y ∈ 𝔤_μ`, relative
/// to the size of `φ_Y`.
pub fn stability_defect<T: Scalar>(alg: &LieAlgebra<T>, g_mu: &DMatrix<T>, basis: &DMatrix<T>) -> T {
    let q = linalg::range_basis(basis, T::lit(RANK_RTOL));
    (0..g_mu.ncols()).fold(T::zero(), |worst, a| {
        let phi = stabilizer_action(alg, &g_mu.column(a).into_owned());
        let scale = T::one().max(linalg::max_abs(&phi));
        worst.max(linalg::span_residual(&q, &(phi * &q), T::lit(RANK_RTOL)) / scale)
    })
}

/// Options for [`build_context`].
#[derive(Clone, Debug, Default)]
pub struct ContextOptions<T: Scalar> {
    /// Columns spanning `S̃`; the pure-fiber annihilator of `m` when absent.
    pub s_tilde: Option<DMatrix<T>>,
}

/// Measured quantities recorded while building a context.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextDiagnostics<T: Scalar> {
    pub stabilizer_defect: T,
    pub complement_defect: T,
    pub s_tilde_stability: T,
    pub s_isotropy: T,
    pub pairing_ratio: T,
    pub decomposition_condition: T,
    pub projector_idempotence: T,
    pub delta_tsigma_omega: T,
    pub w1_pairing_ratio: T,
    pub split: phase::SplitDiagnostics<T>,
}

/// All level-`μ` data, validated once and immutable afterwards.
#[derive(Clone, Debug)]
pub struct ReductionContext<T: Scalar> {
    alg: LieAlgebra<T>,
    mu: Covector<T>,
    g_mu: DMatrix<T>,
    m: DMatrix<T>,
    split: ConstraintSplit<T>,
    s_tilde: DMatrix<T>,
    s: DMatrix<T>,
    lambda: DMatrix<T>,
    w1: DMatrix<T>,
    w2: DMatrix<T>,
    decomposition: DMatrix<T>,
    p: DMatrix<T>,
    alpha: DMatrix<T>,
    pi_delta: DMatrix<T>,
    pi_w: DMatrix<T>,
    diagnostics: ContextDiagnostics<T>,
}

/// The default complement `{(0, λ) : λ ∈ ann(m)}`.
pub fn default_s_tilde<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let ann = linalg::nullspace(&m.transpose(), T::lit(RANK_RTOL));
    let ann = if m.ncols() == 0 {
        DMatrix::identity(m.nrows(), m.nrows())
    } else {
        ann
    };
    embed_fiber(&ann)
}

pub fn build_context<T: Scalar>(
    alg: &LieAlgebra<T>,
    mu: &Covector<T>,
    options: &ContextOptions<T>,
) -> Result<ReductionContext<T>> {
    let n = alg.dim();
    check_len(n, mu.len())?;
    if !mu.is_finite() {
        return Err(Error::InvalidInput("non-finite mu".into()));
    }
    let rtol = T::lit(RANK_RTOL);
    let split = constraint_split(alg, mu)?;
    let g_mu = split.g_mu.clone();
    let k = g_mu.ncols();
    let m = reductive_complement(alg, &g_mu)?;
    let om = phase::omega_gram(alg, mu);

    let s_tilde = match &options.s_tilde {
        None => default_s_tilde(&m),
        Some(s) => {
            if s.nrows() != 2 * n {
                return Err(Error::DimensionMismatch {
                    expected: 2 * n,
                    found: s.nrows(),
                });
            }
            s.clone()
        }
    };
    if s_tilde.ncols() != k || linalg::rank(&s_tilde, rtol) != k {
        return Err(Error::AssumptionTwoFailure(format!(
            "S~ has dimension {} but the radical has dimension {k}",
            linalg::rank(&s_tilde, rtol)
        )));
    }
    let full = linalg::hcat(&split.sum, &s_tilde);
    if linalg::rank(&full, rtol) != 2 * n {
        return Err(Error::AssumptionTwoFailure(format!(
            "S~ is not a complement of TΣ + TΣ^⊥ (rank {} of {})",
            linalg::rank(&full, rtol),
            2 * n
        )));
    }
    let s_tilde_stability = stability_defect(alg, &g_mu, &s_tilde);
    if s_tilde_stability > T::tol(STABILITY_TOL) {
        return Err(Error::AssumptionTwoFailure(format!(
            "S~ is not G_mu-stable (defect {:e})",
            s_tilde_stability.as_f64()
        )));
    }

    let delta = split.delta.clone();
    let corr = isotropic_correction_gram(&om, &s_tilde, &delta)?;
    let s = corr.s.clone();
    let s_isotropy = linalg::max_abs(&(s.transpose() * &om * &s));

    // W₁ and W₂ are the parts of (S⊕Δ)^⊥ inside TΣ and TΣ^⊥.
    let sd = linalg::hcat(&delta, &s);
    let perp = linalg::nullspace(&(sd.transpose() * &om), rtol);
    let w1 = linalg::intersection(&perp, &split.t_sigma, rtol);
    let w2 = linalg::intersection(&perp, &split.t_perp, rtol);
    if w1.ncols() != n - k || w2.ncols() != n - k {
        return Err(Error::AssumptionTwoFailure(format!(
            "(S+Δ)^⊥ splits as {} + {} instead of {} + {}",
            w1.ncols(),
            w2.ncols(),
            n - k,
            n - k
        )));
    }
    let decomposition = linalg::hcat_all(2 * n, &[&delta, &w1, &w2, &s]);
    let dinv = linalg::solve_checked(&decomposition, &DMatrix::identity(2 * n, 2 * n), rtol).map_err(|r| {
        Error::AssumptionTwoFailure(format!("Δ ⊕ W1 ⊕ W2 ⊕ S is rank deficient (ratio {:e})", r.as_f64()))
    })?;
    let mut keep = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        keep[(i, i)] = T::one();
    }
    let p = &decomposition * keep * &dinv;
    let alpha = dinv.rows(0, k).into_owned();

    let w1g = w1.rows(0, n).into_owned();
    let e = linalg::hcat(&g_mu, &w1g);
    let einv = linalg::solve_checked(&e, &DMatrix::identity(n, n), rtol)
        .map_err(|r| Error::AssumptionTwoFailure(format!("W1 does not complement g_mu (ratio {:e})", r.as_f64())))?;
    let pi_delta = g_mu.clone() * einv.rows(0, k);
    let pi_w = DMatrix::identity(n, n) - &pi_delta;

    let w1_gram = w1.transpose() * &om * &w1;
    let diagnostics = ContextDiagnostics {
        stabilizer_defect: stabilizer_defect(alg, mu, &g_mu),
        complement_defect: crate::lie::stabilizer::complement_stability_defect(alg, &g_mu, &m),
        s_tilde_stability,
        s_isotropy,
        pairing_ratio: corr.pairing_ratio,
        decomposition_condition: linalg::condition_number(&decomposition),
        projector_idempotence: linalg::max_abs(&(&p * &p - &p)),
        delta_tsigma_omega: linalg::max_abs(&(split.t_sigma.transpose() * &om * &delta)),
        w1_pairing_ratio: if w1.ncols() == 0 { T::one() } else { linalg::singular_ratio(&w1_gram) },
        split: phase::split_diagnostics(alg, mu, &split),
    };
    Ok(ReductionContext {
        alg: alg.clone(),
        mu: mu.clone(),
        g_mu,
        m,
        split,
        s_tilde,
        s,
        lambda: corr.lambda,
        w1,
        w2,
        decomposition,
        p,
        alpha,
        pi_delta,
        pi_w,
        diagnostics,
    })
}

impl<T: Scalar> ReductionContext<T> {
    pub fn algebra(&self) -> &LieAlgebra<T> {
        &self.alg
    }

    pub fn mu(&self) -> &Covector<T> {
        &self.mu
    }

    /// Orthonormal basis of `𝔤_μ` (n×k).
    pub fn g_mu(&self) -> &DMatrix<T> {
        &self.g_mu
    }

    /// Basis of the ad-stable complement `m` (n×(n−k)).
    pub fn m(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn split(&self) -> &ConstraintSplit<T> {
        &self.split
    }

    pub fn s_tilde(&self) -> &DMatrix<T> {
        &self.s_tilde
    }

    pub fn s(&self) -> &DMatrix<T> {
        &self.s
    }

    /// Coefficients of the isotropic correction map.
    pub fn correction(&self) -> &DMatrix<T> {
        &self.lambda
    }

    pub fn delta(&self) -> &DMatrix<T> {
        &self.split.delta
    }

    pub fn w1(&self) -> &DMatrix<T> {
        &self.w1
    }

    pub fn w2(&self) -> &DMatrix<T> {
        &self.w2
    }

    /// Columns `[Δ | W₁ | W₂ | S]`.
    pub fn decomposition(&self) -> &DMatrix<T> {
        &self.decomposition
    }

    /// Projector onto `TΣ` along `W₂ ⊕ S`.
    pub fn projector(&self) -> &DMatrix<T> {
        &self.p
    }

    /// `α` as a k×2n matrix in `𝔤_μ` coordinates, zero on `W₁ ⊕ W₂ ⊕ S`.
    pub fn alpha(&self) -> &DMatrix<T> {
        &self.alpha
    }

    /// Projector of `𝔤` onto `𝔤_μ` along the group part of `W₁`.
    pub fn pi_delta(&self) -> &DMatrix<T> {
        &self.pi_delta
    }

    /// Projector of `𝔤` onto the group part of `W₁` along `𝔤_μ`.
    pub fn pi_w(&self) -> &DMatrix<T> {
        &self.pi_w
    }

    pub fn diagnostics(&self) -> &ContextDiagnostics<T> {
        &self.diagnostics
    }

    /// `dim 𝔤_μ`.
    pub fn k(&self) -> usize {
        self.g_mu.ncols()
    }

    /// Dimension of the reduced manifold.
    pub fn base_dim(&self) -> usize {
        self.alg.dim() - self.k()
    }

    pub fn is_zero_dimensional(&self) -> bool {
        self.base_dim() == 0
    }

    /// `(dim Δ, dim W₁, dim W₂, dim S)`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.split.delta.ncols(), self.w1.ncols(), self.w2.ncols(), self.s.ncols())
    }

    /// Group parts of the `W₁` basis (n×(n−k)).
    pub fn w1_group(&self) -> DMatrix<T> {
        self.w1.rows(0, self.alg.dim()).into_owned()
    }

    /// A randomized `G_μ`-stable complement `(I + εR) S̃` with `R` drawn from
    /// the commutant of the infinitesimal stabilizer action.
    pub fn random_stable_s_tilde<R: Rng + ?Sized>(&self, rng: &mut R, eps: T) -> DMatrix<T> {
        let n2 = 2 * self.alg.dim();
        let rtol = T::lit(RANK_RTOL);
        // Linear conditions R φ_Y − φ_Y R = 0 on vec(R) (column-major).
        let phis: Vec<DMatrix<T>> = (0..self.k())
            .map(|a| stabilizer_action(&self.alg, &self.g_mu.column(a).into_owned()))
            .collect();
        let mut sys = DMatrix::zeros(phis.len() * n2 * n2, n2 * n2);
        for (p, phi) in phis.iter().enumerate() {
            for j in 0..n2 {
                for i in 0..n2 {
                    let row = p * n2 * n2 + i + n2 * j;
                    for l in 0..n2 {
                        sys[(row, i + n2 * l)] += phi[(l, j)];
                        sys[(row, l + n2 * j)] -= phi[(i, l)];
                    }
                }
            }
        }
        let commutant = if phis.is_empty() {
            DMatrix::identity(n2 * n2, n2 * n2)
        } else {
            linalg::nullspace(&sys, rtol)
        };
        let coeffs = nalgebra::DVector::from_fn(commutant.ncols(), |_, _| T::lit(rng.gen_range(-1.0..1.0)));
        let r = DMatrix::from_column_slice(n2, n2, (commutant * coeffs).as_slice());
        let scale = T::one().max(linalg::max_abs(&r));
        let t = DMatrix::identity(n2, n2) + r * (eps / scale);
        t * &self.s_tilde
    }

    /// `TΣ`-frame basis used for the totally geodesic check: fundamental
    /// fields `(Y, 0)` of `𝔤_μ`.
    pub fn radical_fields(&self) -> DMatrix<T> {
        embed_group(&self.g_mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::catalog;

    #[test]
    fn so3_dims() {
        let a = catalog::so3::<f64>();
        let ctx = build_context(&a, &Covector::basis(3, 2), &ContextOptions::default()).unwrap();
        assert_eq!(ctx.dims(), (1, 2, 2, 1));
        assert_eq!(ctx.correction().amax(), 0.0);
        assert!(ctx.diagnostics().projector_idempotence < 1e-12);
    }

    #[test]
    fn abelian_is_zero_dimensional() {
        let a = catalog::abelian::<f64>(2);
        let ctx = build_context(&a, &Covector::from_slice(&[0.3, 1.0]), &ContextOptions::default()).unwrap();
        assert!(ctx.is_zero_dimensional());
        assert_eq!(ctx.dims(), (2, 0, 0, 2));
    }

    #[test]
    fn nilpotent_sl2_fails() {
        let a = catalog::sl2r::<f64>();
        let r = build_context(&a, &Covector::basis(3, 1), &ContextOptions::default());
        assert!(matches!(r, Err(Error::NonReductiveStabilizer { .. })));
    }
}
