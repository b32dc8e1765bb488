//! Group elements in a matrix realization, with the exponential map and the
//! adjoint and coadjoint representations.
//!
//! `Coad(g)` is `Ad(g⁻¹)ᵀ` on components, so `⟨Coad(g)ξ, X⟩ = ⟨ξ, Ad(g⁻¹)X⟩`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::lie::algebra::{Covector, LieAlgebra};
use crate::linalg;
use crate::scalar::Scalar;

/// Which matrix group a realization exponentiates into; fixes the
/// membership test applied to group elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    SpecialOrthogonal,
    /// Realified special unitary matrices (orthogonal with unit determinant).
    SpecialUnitary,
    SpecialLinear,
    /// Upper triangular with unit diagonal.
    Unipotent,
    /// `[[R, t], [0, 1]]` with `R ∈ SO(2)`.
    Euclidean2,
    /// Positive diagonal matrices.
    Diagonal,
    /// Any invertible matrix.
    General,
}

impl GroupKind {
    /// Max-norm violation of the group's defining constraints.
    pub fn defect<T: Scalar>(self, m: &DMatrix<T>) -> T {
        let r = m.nrows();
        let id = DMatrix::<T>::identity(r, r);
        let det_defect = || (m.determinant() - T::one()).abs_val();
        match self {
            GroupKind::SpecialOrthogonal | GroupKind::SpecialUnitary => {
                linalg::max_abs(&(m.transpose() * m - &id)).max(det_defect())
            }
            GroupKind::SpecialLinear => det_defect(),
            GroupKind::Unipotent => {
                let mut worst = T::zero();
                for i in 0..r {
                    for j in 0..=i {
                        let target = if i == j { T::one() } else { T::zero() };
                        worst = worst.max((m[(i, j)] - target).abs_val());
                    }
                }
                worst
            }
            GroupKind::Euclidean2 => {
                let rot = m.view((0, 0), (2, 2)).into_owned();
                let orth = linalg::max_abs(&(rot.transpose() * &rot - DMatrix::identity(2, 2)));
                let row = (m[(2, 0)].abs_val()).max(m[(2, 1)].abs_val()).max((m[(2, 2)] - T::one()).abs_val());
                orth.max(row).max((rot.determinant() - T::one()).abs_val())
            }
            GroupKind::Diagonal => {
                let mut worst = T::zero();
                for i in 0..r {
                    for j in 0..r {
                        if i != j {
                            worst = worst.max(m[(i, j)].abs_val());
                        } else if m[(i, i)] <= T::zero() {
                            return T::lit(f64::INFINITY);
                        }
                    }
                }
                worst
            }
            GroupKind::General => {
                if m.determinant().abs_val() > T::zero() {
                    T::zero()
                } else {
                    T::lit(f64::INFINITY)
                }
            }
        }
    }
}

/// Membership tolerance for group elements.
pub const GROUP_TOL: f64 = 1e-9;

/// A group element in the algebra's matrix realization.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<T: Scalar> {
    mat: DMatrix<T>,
    kind: GroupKind,
}

impl<T: Scalar> GroupElement<T> {
    /// Validates a matrix against the realization's group.
    pub fn from_matrix(alg: &LieAlgebra<T>, mat: DMatrix<T>) -> Result<Self> {
        let rz = alg.realization()?;
        check_len(rz.rep_dim(), mat.nrows())?;
        check_len(rz.rep_dim(), mat.ncols())?;
        let d = rz.kind.defect(&mat);
        if !(d <= T::tol(GROUP_TOL)) {
            return Err(Error::NotInGroup(d.as_f64()));
        }
        Ok(Self { mat, kind: rz.kind })
    }

    pub fn identity(alg: &LieAlgebra<T>) -> Result<Self> {
        let rz = alg.realization()?;
        let r = rz.rep_dim();
        Ok(Self {
            mat: DMatrix::identity(r, r),
            kind: rz.kind,
        })
    }

    /// `exp(Σ x_i E_i)` in the realization.
    pub fn exp(alg: &LieAlgebra<T>, x: &DVector<T>) -> Result<Self> {
        check_len(alg.dim(), x.len())?;
        let rz = alg.realization()?;
        Ok(Self {
            mat: rz.matrix_of(x).exp(),
            kind: rz.kind,
        })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.mat
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn constraint_defect(&self) -> T {
        self.kind.defect(&self.mat)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat * &other.mat,
            kind: self.kind,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            mat: self.mat.clone().try_inverse().expect("group elements are invertible"),
            kind: self.kind,
        }
    }

    /// `Ad(g)` as an n×n matrix: column j holds the coordinates of `g E_j g⁻¹`.
    pub fn adjoint(&self, alg: &LieAlgebra<T>) -> Result<DMatrix<T>> {
        let rz = alg.realization()?;
        let inv = self.inverse();
        let n = alg.dim();
        let mut out = DMatrix::zeros(n, n);
        for (j, e) in rz.generators.iter().enumerate() {
            let conj = &self.mat * e * &inv.mat;
            out.set_column(j, &rz.coords_of(&conj));
        }
        Ok(out)
    }

    /// `Coad(g) = Ad(g⁻¹)ᵀ`.
    pub fn coadjoint(&self, alg: &LieAlgebra<T>) -> Result<DMatrix<T>> {
        Ok(self.inverse().adjoint(alg)?.transpose())
    }

    pub fn coad_apply(&self, alg: &LieAlgebra<T>, xi: &Covector<T>) -> Result<Covector<T>> {
        check_len(alg.dim(), xi.len())?;
        Ok(Covector(self.coadjoint(alg)? * &xi.0))
    }
}

/// `Ad(exp x) = exp(ad x)`, computed from structure constants alone.
pub fn ad_exp<T: Scalar>(alg: &LieAlgebra<T>, x: &DVector<T>) -> DMatrix<T> {
    alg.ad(x).exp()
}

/// `Coad(exp x) = exp(-ad x)ᵀ`, computed from structure constants alone.
pub fn coad_exp<T: Scalar>(alg: &LieAlgebra<T>, x: &DVector<T>) -> DMatrix<T> {
    (-alg.ad(x)).exp().transpose()
}
