//! Named algebras with matrix realizations: `so3`, `su2` and `su3`
//! (realified), `sl2r`, `heis3`, `se2` and `abelian(n)`, plus a list of
//! regular levels `μ` used throughout the tests.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lie::algebra::{Covector, LieAlgebra};
use crate::lie::group::GroupKind;
use crate::scalar::Scalar;

fn mat<T: Scalar>(n: usize, rows: &[f64]) -> DMatrix<T> {
    DMatrix::from_row_iterator(n, n, rows.iter().map(|&x| T::lit(x)))
}

/// Real 2n×2n form of a complex n×n matrix, `a+ib ↦ [[a,-b],[b,a]]` blockwise.
fn realify<T: Scalar>(re: &[f64], im: &[f64], n: usize) -> DMatrix<T> {
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (T::lit(re[i * n + j]), T::lit(im[i * n + j]));
            out[(2 * i, 2 * j)] = a;
            out[(2 * i, 2 * j + 1)] = -b;
            out[(2 * i + 1, 2 * j)] = b;
            out[(2 * i + 1, 2 * j + 1)] = a;
        }
    }
    out
}

fn build<T: Scalar>(
    name: &str,
    dim: usize,
    brackets: &[(usize, usize, &[(usize, f64)])],
    gens: Vec<DMatrix<T>>,
    kind: GroupKind,
) -> LieAlgebra<T> {
    let brackets: Vec<_> = brackets
        .iter()
        .map(|(i, j, terms)| (*i, *j, terms.iter().map(|&(k, c)| (k, T::lit(c))).collect()))
        .collect();
    LieAlgebra::from_brackets(dim, &brackets)
        .and_then(|a| a.with_name(name).with_realization(gens, kind))
        .expect("catalog algebra is valid")
}

/// `so(3)`: `[e1,e2]=e3`, `[e2,e3]=e1`, `[e3,e1]=e2`, realized by 3×3 skew matrices.
pub fn so3<T: Scalar>() -> LieAlgebra<T> {
    build(
        "so3",
        3,
        &[(0, 1, &[(2, 1.0)]), (1, 2, &[(0, 1.0)]), (2, 0, &[(1, 1.0)])],
        vec![
            mat(3, &[0., 0., 0., 0., 0., -1., 0., 1., 0.]),
            mat(3, &[0., 0., 1., 0., 0., 0., -1., 0., 0.]),
            mat(3, &[0., -1., 0., 1., 0., 0., 0., 0., 0.]),
        ],
        GroupKind::SpecialOrthogonal,
    )
}

/// `su(2)` with basis `e_k = -(i/2) σ_k`, realized as real 4×4 matrices.
pub fn su2<T: Scalar>() -> LieAlgebra<T> {
    build(
        "su2",
        3,
        &[(0, 1, &[(2, 1.0)]), (1, 2, &[(0, 1.0)]), (2, 0, &[(1, 1.0)])],
        vec![
            realify(&[0., 0., 0., 0.], &[0., -0.5, -0.5, 0.], 2),
            realify(&[0., -0.5, 0.5, 0.], &[0., 0., 0., 0.], 2),
            realify(&[0., 0., 0., 0.], &[-0.5, 0., 0., 0.5], 2),
        ],
        GroupKind::SpecialUnitary,
    )
}

/// `sl(2,ℝ)` with basis `(h, e, f)`: `[h,e]=2e`, `[h,f]=-2f`, `[e,f]=h`.
pub fn sl2r<T: Scalar>() -> LieAlgebra<T> {
    build(
        "sl2r",
        3,
        &[(0, 1, &[(1, 2.0)]), (0, 2, &[(2, -2.0)]), (1, 2, &[(0, 1.0)])],
        vec![
            mat(2, &[1., 0., 0., -1.]),
            mat(2, &[0., 1., 0., 0.]),
            mat(2, &[0., 0., 1., 0.]),
        ],
        GroupKind::SpecialLinear,
    )
}

/// Heisenberg algebra with basis `(X, Y, Z)`, `[X,Y]=Z`, as strictly upper
/// triangular 3×3 matrices.
pub fn heis3<T: Scalar>() -> LieAlgebra<T> {
    build(
        "heis3",
        3,
        &[(0, 1, &[(2, 1.0)])],
        vec![
            mat(3, &[0., 1., 0., 0., 0., 0., 0., 0., 0.]),
            mat(3, &[0., 0., 0., 0., 0., 1., 0., 0., 0.]),
            mat(3, &[0., 0., 1., 0., 0., 0., 0., 0., 0.]),
        ],
        GroupKind::Unipotent,
    )
}

/// `se(2)` with basis `(θ, x, y)`: `[θ,x]=y`, `[θ,y]=-x`, `[x,y]=0`.
pub fn se2<T: Scalar>() -> LieAlgebra<T> {
    build(
        "se2",
        3,
        &[(0, 1, &[(2, 1.0)]), (0, 2, &[(1, -1.0)])],
        vec![
            mat(3, &[0., -1., 0., 1., 0., 0., 0., 0., 0.]),
            mat(3, &[0., 0., 1., 0., 0., 0., 0., 0., 0.]),
            mat(3, &[0., 0., 0., 0., 0., 1., 0., 0., 0.]),
        ],
        GroupKind::Euclidean2,
    )
}

/// `su(3)` with basis `e_k = -(i/2) λ_k` (Gell-Mann matrices), realized as
/// real 6×6 matrices. Structure constants are recovered from the matrices.
pub fn su3<T: Scalar>() -> LieAlgebra<T> {
    let s3 = 1.0 / 3f64.sqrt();
    let z = [0.0; 9];
    let sym = |i: usize, j: usize| {
        let mut m = [0.0; 9];
        m[i * 3 + j] = 1.0;
        m[j * 3 + i] = 1.0;
        m
    };
    let asym = |i: usize, j: usize| {
        let mut m = [0.0; 9];
        m[i * 3 + j] = -1.0;
        m[j * 3 + i] = 1.0;
        m
    };
    // λ = re + i·im, so -(i/2)λ = im/2 - i·re/2.
    let lambdas: [([f64; 9], [f64; 9]); 8] = [
        (sym(0, 1), z),
        (z, asym(0, 1)),
        ([1., 0., 0., 0., -1., 0., 0., 0., 0.], z),
        (sym(0, 2), z),
        (z, asym(0, 2)),
        (sym(1, 2), z),
        (z, asym(1, 2)),
        ([s3, 0., 0., 0., s3, 0., 0., 0., -2. * s3], z),
    ];
    let gens = lambdas
        .iter()
        .map(|(re, im)| {
            let r: Vec<f64> = im.iter().map(|v| 0.5 * v).collect();
            let i: Vec<f64> = re.iter().map(|v| -0.5 * v).collect();
            realify(&r, &i, 3)
        })
        .collect();
    LieAlgebra::from_matrix_basis(gens, GroupKind::SpecialUnitary)
        .map(|a| a.with_name("su3"))
        .expect("catalog algebra is valid")
}

/// `ℝ^n` with zero bracket, realized by diagonal matrices.
pub fn abelian<T: Scalar>(n: usize) -> LieAlgebra<T> {
    let gens = (0..n)
        .map(|i| {
            let mut m = DMatrix::zeros(n, n);
            m[(i, i)] = T::one();
            m
        })
        .collect();
    build(&format!("abelian({n})"), n, &[], gens, GroupKind::Diagonal)
}

/// Every catalog algebra, with `abelian(2)` standing in for the family.
pub fn all<T: Scalar>() -> Vec<LieAlgebra<T>> {
    vec![so3(), su2(), sl2r(), heis3(), se2(), su3(), abelian(2)]
}

/// Looks up `so3`, `su2`, `sl2r`, `heis3`, `se2` or `abelian(n)`.
/// Standard `(algebra, μ)` pairs with reductive stabilizers: one level per
/// catalog algebra, two for `sl2r` (hyperbolic and elliptic).
pub fn cases<T: Scalar>() -> Vec<(LieAlgebra<T>, Covector<T>)> {
    let mu = |c: &[f64]| Covector::from_slice(&c.iter().map(|&x| T::lit(x)).collect::<Vec<_>>());
    vec![
        (so3(), mu(&[0., 0., 1.])),
        (su2(), mu(&[0., 0., 1.])),
        (sl2r(), mu(&[1., 0., 0.])),
        (sl2r(), mu(&[0., 1., -1.])),
        (heis3(), mu(&[0., 0., 1.])),
        (se2(), mu(&[0., 1., 0.5])),
        (su3(), mu(&[0., 0., 1., 0., 0., 0., 0., 0.3])),
        (abelian(2), mu(&[0.3, 1.0])),
    ]
}

pub fn by_name<T: Scalar>(name: &str) -> Result<LieAlgebra<T>> {
    let key = name.trim().to_ascii_lowercase();
    match key.as_str() {
        "so3" => Ok(so3()),
        "su2" => Ok(su2()),
        "sl2r" => Ok(sl2r()),
        "heis3" => Ok(heis3()),
        "se2" => Ok(se2()),
        "su3" => Ok(su3()),
        _ => {
            let n = key
                .strip_prefix("abelian(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|d| d.trim().parse::<usize>().ok())
                .filter(|&n| n > 0);
            n.map(abelian)
                .ok_or_else(|| Error::InvalidInput(format!("unknown group `{name}`")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_name() {
        assert_eq!(by_name::<f64>("SO3").unwrap().name(), "so3");
        assert_eq!(by_name::<f64>("abelian(5)").unwrap().dim(), 5);
        assert!(by_name::<f64>("abelian(0)").is_err());
        assert!(by_name::<f64>("g2").is_err());
    }

    #[test]
    fn su2_matches_so3_constants() {
        assert_eq!(su2::<f64>().structure(), so3::<f64>().structure());
    }

    #[test]
    fn su3_constants() {
        let a = su3::<f64>();
        let c = a.structure();
        // f_123 = 1, f_458 = f_678 = √3/2, f_147 = 1/2.
        assert!((c[(0, 1, 2)] - 1.0).abs() < 1e-14);
        assert!((c[(3, 4, 7)] - 0.75f64.sqrt()).abs() < 1e-14);
        assert!((c[(5, 6, 7)] - 0.75f64.sqrt()).abs() < 1e-14);
        assert!((c[(0, 3, 6)] - 0.5).abs() < 1e-14);
        assert!(a.jacobi_defect() < 1e-13);
        assert!(a.realization_defect().unwrap() < 1e-13);
    }
}
