mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use symred::connection::{baseline_connection, symplectize, FrameConnection};
use symred::lie::{catalog, Covector, GroupElement, LieAlgebra};
use symred::linalg::{self, subspace_distance};
use symred::phase::{self, PhasePoint, TrivTangent};
use symred::reduction::context::{isotropic_correction_gram, stability_defect};
use symred::reduction::sigma::FnSigmaField;
use symred::reduction::{
    autoparallel_check, build_context, sigma_covderiv, totally_geodesic_defect, ContextOptions, ReducedConnection,
    ReductionContext, SigmaConnection,
};
use symred::Error;

fn ctx(a: &LieAlgebra<f64>, mu: &Covector<f64>) -> ReductionContext<f64> {
    build_context(a, mu, &ContextOptions::default()).unwrap()
}

fn standard_symplectic(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

fn span_equal(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    subspace_distance(&linalg::range_basis(a, 1e-10), &linalg::range_basis(b, 1e-10), 1e-10)
}

#[test]
fn isotropic_correction_on_random_instances() {
    let mut r = rng(100);
    for trial in 0..100 {
        let n = 2 + trial % 4;
        let k = 1 + trial % n;
        let m = DMatrix::identity(2 * n, 2 * n) + rmat(&mut r, 2 * n, 2 * n, 0.3);
        let minv = m.clone().try_inverse().unwrap();
        let om = m.transpose() * standard_symplectic(n) * &m;
        let delta = &minv * DMatrix::identity(2 * n, 2 * n).columns(0, k);
        let s_tilde = rmat(&mut r, 2 * n, k, 1.0);
        let c = isotropic_correction_gram(&om, &s_tilde, &delta).unwrap();
        if c.pairing_ratio < 1e-6 {
            continue;
        }
        let iso = max_abs(&(c.s.transpose() * &om * &c.s));
        assert!(iso <= 1e-10, "trial {trial}: {iso:e}");
        let before = linalg::hcat(&s_tilde, &delta);
        let after = linalg::hcat(&c.s, &delta);
        assert!(span_equal(&before, &after) <= 1e-10);
        assert_eq!(linalg::rank(&after, 1e-10), 2 * k);
    }
}

#[test]
fn isotropic_inputs_need_no_correction() {
    let mut r = rng(101);
    for trial in 0..100 {
        let n = 2 + trial % 3;
        let k = 1 + trial % n;
        let m = DMatrix::identity(2 * n, 2 * n) + rmat(&mut r, 2 * n, 2 * n, 0.3);
        let minv = m.clone().try_inverse().unwrap();
        let om = m.transpose() * standard_symplectic(n) * &m;
        let id = DMatrix::<f64>::identity(2 * n, 2 * n);
        let delta = &minv * id.columns(0, k);
        let s_tilde = &minv * id.columns(n, k);
        let c = isotropic_correction_gram(&om, &s_tilde, &delta).unwrap();
        assert!(max_abs(&c.lambda) <= 1e-12, "trial {trial}");
    }
}

#[test]
fn degenerate_pairing_is_reported() {
    let om = standard_symplectic(2);
    let id = DMatrix::<f64>::identity(4, 4);
    let delta = id.columns(0, 1).into_owned();
    let s_tilde = id.columns(1, 1).into_owned();
    assert!(matches!(isotropic_correction_gram(&om, &s_tilde, &delta), Err(Error::DegeneratePairing(_))));
}

#[test]
fn flagship_context() {
    let a = catalog::so3::<f64>();
    let c = ctx(&a, &Covector::basis(3, 2));
    assert_eq!(c.dims(), (1, 2, 2, 1));
    assert_eq!(max_abs(c.correction()), 0.0);
    let p = c.projector();
    assert!(max_abs(&(p * p - p)) < 1e-12);
    let ts = &c.split().t_sigma;
    assert!(max_abs(&(p * ts - ts)) < 1e-12);
    assert!(max_abs(&(p * c.w2())) < 1e-12);
    assert!(max_abs(&(p * c.s())) < 1e-12);
    // α reads the Δ component and vanishes on W₁.
    assert!(max_abs(&(c.alpha() * c.delta() - DMatrix::identity(1, 1))) < 1e-12);
    assert!(max_abs(&(c.alpha() * c.w1())) < 1e-12);
    assert!(max_abs(&(c.alpha() * c.w2())) < 1e-12);
}

#[test]
fn contexts_on_every_catalog_level() {
    let mut r = rng(7);
    for (a, mu) in catalog::cases::<f64>() {
        let c = ctx(&a, &mu);
        let n = a.dim();
        let k = c.k();
        assert_eq!(c.dims(), (k, n - k, n - k, k), "{}", a.name());
        let s = c.s();
        let om = phase::omega_gram(&a, &mu);
        assert!(max_abs(&(s.transpose() * &om * s)) <= 1e-10, "{}", a.name());
        assert!(c.diagnostics().projector_idempotence <= 1e-10, "{}", a.name());
        let st = c.random_stable_s_tilde(&mut r, 0.3);
        assert!(stability_defect(&a, c.g_mu(), &st) <= 1e-9, "{}", a.name());
        build_context(&a, &mu, &ContextOptions { s_tilde: Some(st) }).unwrap();
    }
}

#[test]
fn assumption_failures() {
    let a = catalog::so3::<f64>();
    let mu = Covector::basis(3, 2);
    let c = ctx(&a, &mu);
    // S̃ inside TΣ + TΣ^⊥ is not a complement.
    let bad = c.delta().clone();
    let err = build_context(&a, &mu, &ContextOptions { s_tilde: Some(bad) });
    assert!(matches!(err, Err(Error::AssumptionTwoFailure(_))));
    let wrong_dim = DMatrix::identity(6, 2);
    assert!(matches!(
        build_context(&a, &mu, &ContextOptions { s_tilde: Some(wrong_dim) }),
        Err(Error::AssumptionTwoFailure(_))
    ));
    let sl = catalog::sl2r::<f64>();
    let nil = build_context(&sl, &Covector::from_slice(&[0.0, 1.0, 0.0]), &ContextOptions::default());
    assert!(matches!(nil, Err(Error::NonReductiveStabilizer { .. })));
}

#[test]
fn abelian_levels_have_zero_dimensional_base() {
    let a = catalog::abelian::<f64>(3);
    let c = ctx(&a, &Covector::from_slice(&[1.0, -0.5, 2.0]));
    assert!(c.is_zero_dimensional());
    let conn = baseline_connection(&a);
    assert!(matches!(ReducedConnection::with_default_chart(&c, &conn), Err(Error::ZeroDimensionalBase)));
}

fn right_invariant_field(a: &LieAlgebra<f64>, c: DVector<f64>) -> impl Fn(&GroupElement<f64>) -> DVector<f64> + Send + Sync {
    let a = a.clone();
    move |g: &GroupElement<f64>| g.inverse().adjoint(&a).unwrap() * &c
}

#[test]
fn induced_connection_matches_projected_ambient() {
    let mut r = rng(12);
    for (a, mu) in catalog::cases::<f64>().into_iter().filter(|(a, _)| a.dim() == 3) {
        let c = ctx(&a, &mu);
        let conn = symplectize(&baseline_connection(&a), &a).unwrap();
        let n = a.dim();
        let cvec = rvec(&mut r, n, 1.0);
        let field = right_invariant_field(&a, cvec.clone());
        let y = FnSigmaField(right_invariant_field(&a, cvec));
        for _ in 0..5 {
            let g = rgroup(&mut r, &a, 1.0);
            let x = rvec(&mut r, n, 1.0);
            let p = PhasePoint::new(g.clone(), mu.clone());
            let got = sigma_covderiv(&c, &conn, &p, &x, &y, 1e-5).unwrap();
            // x(Y) = −[x, Ad(g⁻¹)c] for a right-invariant field.
            let yv = field(&g);
            let dy = -a.bracket(&x, &yv).unwrap();
            let amb = conn.covariant(&mu, &TrivTangent::group(x.clone()), &TrivTangent::group(yv)).unwrap();
            let want = c.projector() * (TrivTangent::group(dy).stacked() + amb.stacked());
            assert!(max_abs_v(&(got.stacked() - want)) < 1e-9, "{}", a.name());
        }
    }
}

#[test]
fn induced_connection_is_stabilizer_equivariant() {
    let mut r = rng(13);
    for (a, mu) in catalog::cases::<f64>() {
        let c = ctx(&a, &mu);
        if c.is_zero_dimensional() {
            continue;
        }
        let conn = symplectize(&baseline_connection(&a), &a).unwrap();
        let sc = SigmaConnection::new(&c, &conn).unwrap();
        let n = a.dim();
        let h = GroupElement::exp(&a, &(c.g_mu() * rvec(&mut r, c.k(), 1.0))).unwrap();
        let adh = h.adjoint(&a).unwrap();
        let (u, v) = (rvec(&mut r, n, 1.0), rvec(&mut r, n, 1.0));
        let lhs = sc.apply(&(&adh * &u), &(&adh * &v));
        let rhs = &adh * sc.apply(&u, &v);
        assert!(max_abs_v(&(lhs - rhs)) < 1e-10, "{}", a.name());
    }
}

fn totally_geodesic_oracle(c: &ReductionContext<f64>, conn: &FrameConnection<f64>) -> f64 {
    let a = c.algebra();
    let n = a.dim();
    let mu = c.mu();
    let fields = phase::right_field_matrix(a, mu) * c.g_mu();
    let mut worst = 0.0f64;
    for i in 0..fields.ncols() {
        for j in 0..fields.ncols() {
            let u = TrivTangent::from_stacked(&fields.column(i).into_owned()).unwrap();
            let v = TrivTangent::from_stacked(&fields.column(j).into_owned()).unwrap();
            let d = c.projector() * conn.covariant(mu, &u, &v).unwrap().stacked();
            let d = TrivTangent::from_stacked(&d).unwrap();
            for e in 0..2 * n {
                let pe = TrivTangent::from_stacked(&(c.projector() * linalg::unit(2 * n, e))).unwrap();
                worst = worst.max(phase::symplectic_form(a, mu, &d, &pe).unwrap().abs());
            }
        }
    }
    worst
}

#[test]
fn totally_geodesic_defect_matches_oracle() {
    for (a, mu) in catalog::cases::<f64>() {
        let c = ctx(&a, &mu);
        for conn in [baseline_connection(&a), symplectize(&baseline_connection(&a), &a).unwrap()] {
            let got = totally_geodesic_defect(&c, &conn).unwrap();
            let want = totally_geodesic_oracle(&c, &conn);
            assert!((got - want).abs() < 1e-12, "{} {got} {want}", a.name());
        }
    }
}

#[test]
fn autoparallel_and_independence() {
    let heis = catalog::heis3::<f64>();
    let c = ctx(&heis, &Covector::basis(3, 2));
    let s = symplectize(&baseline_connection(&heis), &heis).unwrap();
    let rep = autoparallel_check(&c, &s, 4, 3).unwrap();
    assert!(rep.defect < 1e-12);
    assert!(rep.independence.unwrap() < 1e-8);

    let so3 = catalog::so3::<f64>();
    let c = ctx(&so3, &Covector::basis(3, 2));
    let s = symplectize(&baseline_connection(&so3), &so3).unwrap();
    let rep = autoparallel_check(&c, &s, 4, 3).unwrap();
    assert!(rep.defect > 1e-3);
    assert!(rep.independence.is_none());
    let rep = autoparallel_check(&c, &baseline_connection(&so3), 4, 3).unwrap();
    assert!(rep.defect < 1e-12);
    assert!(rep.independence.unwrap() < 1e-8);
}

#[test]
fn horizontal_lifts_project_and_span() {
    for (a, mu) in catalog::cases::<f64>() {
        let c = ctx(&a, &mu);
        if c.is_zero_dimensional() {
            continue;
        }
        let rc = ReducedConnection::with_default_chart(&c, &baseline_connection(&a)).unwrap();
        let t = DVector::from_fn(rc.dim(), |i, _| 0.1 * (i as f64 + 1.0));
        let dnu = rc.chart().differential(&t).unwrap();
        let g = rc.chart().section_element(&t, None).unwrap();
        let q = rc.chart().quotient_differential(&g).unwrap();
        let mut lifts = Vec::new();
        for b in 0..rc.dim() {
            let v = Covector(dnu.column(b).into_owned());
            let l = rc.horizontal_lift(&v, &t, None).unwrap();
            assert!(max_abs_v(&(&q * &l.x - &v.0)) < 1e-10, "{}", a.name());
            assert!(max_abs_v(&l.eta.0) == 0.0);
            lifts.push(l.stacked());
        }
        let lifts = linalg::columns_to_matrix(2 * a.dim(), &lifts);
        assert!(span_equal(&lifts, c.w1()) < 1e-10, "{}", a.name());
    }
}
