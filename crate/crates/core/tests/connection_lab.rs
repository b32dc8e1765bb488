mod common;

use common::*;
use nalgebra::DVector;
use proptest::prelude::*;
use proptest::sample::Index;
use symred::connection::{
    average_connection, baseline_connection, nabla_omega, nabla_omega_tensor, pullback_coefficients, symplectize,
    torsion_tensor,
};
use symred::lie::{catalog, Covector, LieAlgebra};
use symred::phase::TrivTangent;
use symred::quadrature::{cyclic_subgroup, gauss_legendre, octahedral_subgroup, torus_gauss_legendre};

const SPEC_GROUPS: [&str; 5] = ["so3", "su2", "sl2r", "heis3", "se2"];

/// `−⟨η,[Y,Y′]⟩ + ½⟨ζ′,[X,Y]⟩ − ½⟨ζ,[X,Y′]⟩ + ½⟨ξ,[X,[Y,Y′]]⟩` for
/// `u = (X, η)`, `v = (Y, ζ)`, `w = (Y′, ζ′)`.
fn baseline_defect_closed_form(a: &LieAlgebra<f64>, xi: &Covector<f64>, u: &TrivTangent<f64>, v: &TrivTangent<f64>, w: &TrivTangent<f64>) -> f64 {
    let br = |p: &DVector<f64>, q: &DVector<f64>| a.bracket(p, q).unwrap();
    -u.eta.pair(&br(&v.x, &w.x)) + 0.5 * w.eta.pair(&br(&u.x, &v.x)) - 0.5 * v.eta.pair(&br(&u.x, &w.x))
        + 0.5 * xi.pair(&br(&u.x, &br(&v.x, &w.x)))
}

fn rtangent(r: &mut impl rand::Rng, n: usize) -> TrivTangent<f64> {
    TrivTangent::new(rvec(r, n, 1.0), rcov(r, n, 1.0)).unwrap()
}

#[test]
fn symplectized_connection_is_torsion_free_and_parallel() {
    let mut r = rng(5);
    for name in SPEC_GROUPS.iter().copied().chain(["su3"]) {
        let a = catalog::by_name::<f64>(name).unwrap();
        let s = symplectize(&baseline_connection(&a), &a).unwrap();
        for _ in 0..20 {
            let xi = rcov(&mut r, a.dim(), 2.0);
            let g = s.coefficients(&xi).unwrap();
            assert!(torsion_tensor(&a, &g).max_abs() <= 1e-10, "{name}");
            assert!(nabla_omega_tensor(&a, &g, &xi).max_abs() <= 1e-10, "{name}");
        }
    }
}

#[test]
fn baseline_defect_matches_closed_form() {
    let mut r = rng(9);
    for a in catalog::all::<f64>() {
        let b = baseline_connection(&a);
        let n = a.dim();
        for _ in 0..100 {
            let xi = rcov(&mut r, n, 2.0);
            let (u, v, w) = (rtangent(&mut r, n), rtangent(&mut r, n), rtangent(&mut r, n));
            let got = nabla_omega(&b, &a, &xi, &u, &v, &w).unwrap();
            let want = baseline_defect_closed_form(&a, &xi, &u, &v, &w);
            assert!((got - want).abs() <= 1e-12, "{} {got} {want}", a.name());
        }
    }
}

#[test]
fn baseline_defect_example() {
    let a = catalog::so3::<f64>();
    let b = baseline_connection(&a);
    let e = |i| symred::linalg::unit::<f64>(3, i);
    let u = TrivTangent::fiber(Covector::basis(3, 0));
    let v = TrivTangent::group(e(1));
    let w = TrivTangent::group(e(2));
    let got = nabla_omega(&b, &a, &Covector::zeros(3), &u, &v, &w).unwrap();
    assert!((got + 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn symplectize_is_a_projection(i in any::<Index>(), seed in 0u64..1000) {
        let all = catalog::all::<f64>();
        let a = &all[i.index(all.len())];
        let p = perturbed_connection(a, seed, 0.3);
        let s = symplectize(&p, a).unwrap();
        let ss = symplectize(&s, a).unwrap();
        let mut r = rng(seed);
        for _ in 0..3 {
            let xi = rcov(&mut r, a.dim(), 1.5);
            let g0 = p.coefficients(&xi).unwrap();
            let g1 = s.coefficients(&xi).unwrap();
            let g2 = ss.coefficients(&xi).unwrap();
            prop_assert!(g2.max_abs_diff(&g1) < 1e-12);
            prop_assert!(torsion_tensor(a, &g1).max_abs() < 1e-12);
            prop_assert!(nabla_omega_tensor(a, &g1, &xi).max_abs() < 1e-11);
            // The correction is symmetric in its lower indices.
            let n2 = 2 * a.dim();
            for x in 0..n2 {
                for y in 0..n2 {
                    for z in 0..n2 {
                        let d = (g1[(x, y, z)] - g0[(x, y, z)]) - (g1[(y, x, z)] - g0[(y, x, z)]);
                        prop_assert!(d.abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn symplectized_baseline_is_right_invariant(i in any::<Index>(), seed in any::<u64>()) {
        let all = catalog::all::<f64>();
        let a = &all[i.index(all.len())];
        let s = symplectize(&baseline_connection(a), a).unwrap();
        let mut r = rng(seed);
        let g = rgroup(&mut r, a, 1.0);
        let xi = rcov(&mut r, a.dim(), 1.5);
        let moved = pullback_coefficients(&s, a, &g, &xi).unwrap();
        prop_assert!(moved.max_abs_diff(&s.coefficients(&xi).unwrap()) < 1e-10);
    }
}

#[test]
fn perturbed_connection_is_not_invariant() {
    let a = catalog::so3::<f64>();
    let p = perturbed_connection(&a, 3, 0.3);
    let mut r = rng(3);
    let g = rgroup(&mut r, &a, 1.0);
    let xi = rcov(&mut r, 3, 1.0);
    assert!(pullback_coefficients(&p, &a, &g, &xi).unwrap().max_abs_diff(&p.coefficients(&xi).unwrap()) > 1e-3);
}

fn check_average(a: &LieAlgebra<f64>, q: &symred::quadrature::QuadratureRule<f64>, seed: u64) {
    let p = perturbed_connection(a, seed, 0.3);
    let avg = average_connection(&p, a, q).unwrap();
    let mut r = rng(seed);
    for _ in 0..5 {
        let xi = rcov(&mut r, a.dim(), 1.5);
        let g = avg.coefficients(&xi).unwrap();
        assert!(torsion_tensor(a, &g).max_abs() <= 1e-10);
        for node in q.nodes() {
            let moved = pullback_coefficients(&avg, a, node, &xi).unwrap();
            assert!(moved.max_abs_diff(&g) <= 1e-10, "{:e}", moved.max_abs_diff(&g));
        }
    }
}

#[test]
fn averaging_over_finite_subgroups() {
    let so3 = catalog::so3::<f64>();
    let c4 = cyclic_subgroup(&so3, &DVector::from_vec(vec![0.0, 0.0, 1.0]), 4).unwrap();
    assert_eq!(c4.len(), 4);
    check_average(&so3, &c4, 21);
    let oct = octahedral_subgroup(&so3).unwrap();
    assert_eq!(oct.len(), 24);
    assert!(oct.closure_defect() < 1e-12);
    check_average(&so3, &oct, 22);
    let su2 = catalog::su2::<f64>();
    let c = cyclic_subgroup(&su2, &DVector::from_vec(vec![1.0, 0.0, 0.0]), 4).unwrap();
    check_average(&su2, &c, 23);
}

#[test]
fn gauss_legendre_is_exact_on_polynomials() {
    let (x, w) = gauss_legendre(5);
    for k in 0..10 {
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
        let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
        assert!((got - want).abs() < 1e-14, "degree {k}");
    }
}

#[test]
fn torus_rule_has_unit_mass() {
    let a = catalog::abelian::<f64>(2);
    let dirs = [(symred::linalg::unit(2, 0), 1.0), (symred::linalg::unit(2, 1), 1.0)];
    let q = torus_gauss_legendre(&a, &dirs, 4).unwrap();
    assert_eq!(q.len(), 16);
    assert!((q.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
}
