mod common;

use common::*;
use nalgebra::DVector;
use symred::checks::{
    fiber_independence_defect, form_closedness_defect, kks_sign, random_stabilizer_elements, reduced_omega_defect,
    reduced_torsion_defect,
};
use symred::connection::{baseline_connection, symplectize};
use symred::lie::{catalog, stabilizer_algebra, Covector};
use symred::orbit::{kks_form, kks_on_representatives, orbit_chart, tangent_representative};
use symred::reduction::reduced::{sample_fields, sample_point};
use symred::reduction::{build_context, ContextOptions, ReducedConnection};
use symred::Error;

#[test]
fn so3_chart_stays_on_unit_sphere() {
    let a = catalog::so3::<f64>();
    let mu = Covector::basis(3, 2);
    let c = build_context(&a, &mu, &ContextOptions::default()).unwrap();
    let chart = orbit_chart(&a, &mu, c.m()).unwrap();
    let mut r = rng(1);
    for _ in 0..50 {
        let t = sample_point(&mut r, 2, chart.radius());
        let nu = chart.point(&t).unwrap();
        assert!((nu.0.norm() - 1.0).abs() < 1e-10);
    }
    assert!(max_abs_v(&(chart.point(&DVector::zeros(2)).unwrap().0 - &mu.0)) < 1e-15);
}

#[test]
fn kks_form_ignores_the_choice_of_representative() {
    let mut r = rng(2);
    for (a, mu) in catalog::cases::<f64>() {
        let n = a.dim();
        let g = rgroup(&mut r, &a, 1.0);
        let nu = g.coad_apply(&a, &mu).unwrap();
        let stab = stabilizer_algebra(&a, &nu).unwrap();
        let (x, y) = (rvec(&mut r, n, 1.0), rvec(&mut r, n, 1.0));
        let base = kks_on_representatives(&a, &nu, &x, &y);
        let shifted = &x + &stab * rvec(&mut r, stab.ncols(), 1.0);
        assert!((kks_on_representatives(&a, &nu, &shifted, &y) - base).abs() < 1e-10, "{}", a.name());
        let bt = a.pairing_matrix(&nu).transpose();
        let (v, w) = (Covector(&bt * &x), Covector(&bt * &y));
        assert!((kks_form(&a, &nu, &v, &w).unwrap() - base).abs() < 1e-9, "{}", a.name());
    }
}

#[test]
fn radial_vectors_are_not_orbit_tangents() {
    let a = catalog::so3::<f64>();
    let nu = Covector::basis(3, 2);
    assert!(matches!(tangent_representative(&a, &nu, &nu), Err(Error::NotTangent(_))));
}

#[test]
fn reduced_structure_on_catalog_levels() {
    for (a, mu) in catalog::cases::<f64>() {
        let c = build_context(&a, &mu, &ContextOptions::default()).unwrap();
        if c.is_zero_dimensional() {
            continue;
        }
        let conn = symplectize(&baseline_connection(&a), &a).unwrap();
        let rc = ReducedConnection::with_default_chart(&c, &conn).unwrap();
        let mut r = rng(3);
        let d = rc.dim();
        let ts: Vec<DVector<f64>> = (0..6).map(|_| sample_point(&mut r, d, 0.8)).collect();
        let fields = sample_fields::<f64, _>(&mut r, d);
        let hs = random_stabilizer_elements(&c, &mut r, 3, 1.0).unwrap();
        for t in &ts[..2] {
            assert!(reduced_torsion_defect(&rc, &fields, t).unwrap() <= 1e-6, "{}", a.name());
            assert!(reduced_omega_defect(&rc, &fields, t).unwrap() <= 1e-6, "{}", a.name());
            assert!(form_closedness_defect(&rc, t, 1e-5).unwrap() <= 1e-6, "{}", a.name());
            assert!(fiber_independence_defect(&rc, &fields, t, &hs).unwrap() <= 1e-8, "{}", a.name());
        }
        let sign = kks_sign(&rc, &ts).unwrap();
        assert_eq!(sign.sigma, -1, "{}", a.name());
        assert!(sign.relative_error <= 1e-8, "{}", a.name());
    }
}

#[test]
fn reduced_connection_is_left_invariant() {
    let mut r = rng(4);
    for (a, mu) in catalog::cases::<f64>().into_iter().filter(|(a, _)| a.dim() == 3) {
        let c = build_context(&a, &mu, &ContextOptions::default()).unwrap();
        let conn = symplectize(&baseline_connection(&a), &a).unwrap();
        let rc = ReducedConnection::with_default_chart(&c, &conn).unwrap();
        let moved_chart = rc.chart().clone().with_base(rgroup(&mut r, &a, 1.0)).unwrap();
        let moved = ReducedConnection::new(&c, &conn, &moved_chart).unwrap();
        let d = rc.dim();
        let t = sample_point(&mut r, d, 0.5);
        let fields = sample_fields::<f64, _>(&mut r, d);
        for x in &fields {
            for y in &fields {
                let p = rc.covderiv(x.as_ref(), y.as_ref(), &t).unwrap();
                let q = moved.covderiv(x.as_ref(), y.as_ref(), &t).unwrap();
                assert!(max_abs_v(&(p - q)) < 1e-9, "{}", a.name());
            }
            let (v, w) = (x.value(&t), fields[0].value(&t));
            assert!((rc.form(&v, &w, &t).unwrap() - moved.form(&v, &w, &t).unwrap()).abs() < 1e-12);
        }
    }
}
