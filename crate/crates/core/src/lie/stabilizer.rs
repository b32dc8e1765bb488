//! Coadjoint stabilizers and ad-stable (reductive) complements.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::lie::algebra::{Covector, LieAlgebra};
use crate::linalg::{self, RANK_RTOL};
use crate::scalar::Scalar;

/// Orthonormal basis (n×k) of `𝔤_μ = {Y : μ∘ad(Y) = 0}`.
pub fn stabilizer_algebra<T: Scalar>(alg: &LieAlgebra<T>, mu: &Covector<T>) -> Result<DMatrix<T>> {
    check_len(alg.dim(), mu.len())?;
    // Y ↦ μ∘ad(Y) has matrix B(μ)ᵀ.
    let map = alg.pairing_matrix(mu).transpose();
    Ok(linalg::nullspace(&map, T::lit(RANK_RTOL)))
}

/// Largest `|⟨μ, [Y, e_j]⟩|` over the basis vectors `Y` of `basis`.
pub fn stabilizer_defect<T: Scalar>(alg: &LieAlgebra<T>, mu: &Covector<T>, basis: &DMatrix<T>) -> T {
    let b = alg.pairing_matrix(mu);
    linalg::max_abs(&(basis.transpose() * b))
}

/// Largest component of `[Y_i, Y_j]` outside the span of `basis`.
pub fn subalgebra_defect<T: Scalar>(alg: &LieAlgebra<T>, basis: &DMatrix<T>) -> T {
    let k = basis.ncols();
    let mut brackets = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            brackets.push(alg.br(&basis.column(i).into_owned(), &basis.column(j).into_owned()));
        }
    }
    let stacked = linalg::columns_to_matrix(alg.dim(), &brackets);
    if stacked.ncols() == 0 {
        return T::zero();
    }
    linalg::span_residual(basis, &stacked, T::lit(RANK_RTOL))
}

/// Largest component of `[h, m]` along `h` when projecting along `m`, i.e. the
/// failure of `[𝔤_μ, m] ⊆ m`.
pub fn complement_stability_defect<T: Scalar>(alg: &LieAlgebra<T>, h: &DMatrix<T>, m: &DMatrix<T>) -> T {
    if h.ncols() == 0 || m.ncols() == 0 {
        return T::zero();
    }
    let full = linalg::hcat(h, m);
    let Ok(coords) = linalg::solve_checked(&full, &DMatrix::identity(alg.dim(), alg.dim()), T::lit(RANK_RTOL))
    else {
        return T::lit(f64::INFINITY);
    };
    let k = h.ncols();
    let mut worst = T::zero();
    for i in 0..k {
        let y = h.column(i).into_owned();
        for j in 0..m.ncols() {
            let b = alg.br(&y, &m.column(j).into_owned());
            let along_h = coords.rows(0, k) * &b;
            worst = worst.max(linalg::max_abs_vec(&along_h));
        }
    }
    worst
}

/// An `ad(𝔤_μ)`-stable complement `m` with `𝔤 = 𝔤_μ ⊕ m`, as an orthonormal
/// n×(n−k) basis.
///
/// The Euclidean orthogonal complement is returned when it is stable.
/// Otherwise an equivariant projection `Π = B C` onto `𝔤_μ` is solved for
/// (`C ad(Y) = ρ(Y) C`, `C B = I`) and `m = ker C`; an infeasible system
/// means the stabilizer is not reductive in `𝔤`.
pub fn reductive_complement<T: Scalar>(alg: &LieAlgebra<T>, g_mu: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = alg.dim();
    check_len(n, g_mu.nrows())?;
    let rtol = T::lit(RANK_RTOL);
    let tol = T::tol(1e-10);
    let b = linalg::range_basis(g_mu, rtol);
    let k = b.ncols();
    if k == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    if k == n {
        return Ok(DMatrix::zeros(n, 0));
    }
    let sub = subalgebra_defect(alg, &b);
    if sub > tol {
        return Err(Error::NotSubalgebra(sub.as_f64()));
    }

    let orth = linalg::nullspace(&b.transpose(), rtol);
    if complement_stability_defect(alg, &b, &orth) <= tol {
        return Ok(orth);
    }

    // Unknown C (k×n), vectorized column-major: vec(C)[i + k*j] = C[i][j].
    let unknowns = k * n;
    let ads: Vec<DMatrix<T>> = (0..k).map(|a| alg.ad(&b.column(a).into_owned())).collect();
    let rhos: Vec<DMatrix<T>> = ads.iter().map(|ad| b.transpose() * ad * &b).collect();
    let rows = k * (k * n) + k * k;
    let mut sys = DMatrix::zeros(rows, unknowns);
    let mut rhs = DVector::zeros(rows);
    let mut r = 0;
    for (ad, rho) in ads.iter().zip(&rhos) {
        // (C ad − ρ C)[i][j] = Σ_l C[i][l] ad[l][j] − Σ_l ρ[i][l] C[l][j].
        for j in 0..n {
            for i in 0..k {
                for l in 0..n {
                    sys[(r, i + k * l)] += ad[(l, j)];
                }
                for l in 0..k {
                    sys[(r, l + k * j)] -= rho[(i, l)];
                }
                r += 1;
            }
        }
    }
    // C B = I.
    for j in 0..k {
        for i in 0..k {
            for l in 0..n {
                sys[(r, i + k * l)] += b[(l, j)];
            }
            if i == j {
                rhs[r] = T::one();
            }
            r += 1;
        }
    }
    let sol = linalg::pinv(&sys, rtol) * &rhs;
    let residual = linalg::max_abs_vec(&(&sys * &sol - &rhs));
    if residual > tol {
        return Err(Error::NonReductiveStabilizer {
            residual: residual.as_f64(),
        });
    }
    let c = DMatrix::from_column_slice(k, n, sol.as_slice());
    let m = linalg::nullspace(&c, rtol);
    if m.ncols() != n - k || complement_stability_defect(alg, &b, &m) > tol {
        return Err(Error::NonReductiveStabilizer {
            residual: residual.as_f64(),
        });
    }
    Ok(m)
}

/// Largest `|Π ad(W) − ad(W) Π|` over the basis `W` of `h`, where `Π`
/// projects onto `h` along `m`.
pub fn projection_commutator_defect<T: Scalar>(alg: &LieAlgebra<T>, h: &DMatrix<T>, m: &DMatrix<T>) -> T {
    let n = alg.dim();
    let k = h.ncols();
    if k == 0 || m.ncols() == 0 {
        return T::zero();
    }
    let full = linalg::hcat(h, m);
    let Ok(inv) = linalg::solve_checked(&full, &DMatrix::identity(n, n), T::lit(RANK_RTOL)) else {
        return T::lit(f64::INFINITY);
    };
    let proj = h * inv.rows(0, k);
    (0..k).fold(T::zero(), |worst, a| {
        let ad = alg.ad(&h.column(a).into_owned());
        worst.max(linalg::max_abs(&(&proj * &ad - &ad * &proj)))
    })
}
