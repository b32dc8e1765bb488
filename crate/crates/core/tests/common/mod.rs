#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symred::connection::{baseline_coefficients, FnField, FrameConnection};
use symred::lie::{Covector, GroupElement, LieAlgebra};
use symred::linalg::Tensor3;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rvec(rng: &mut impl Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

pub fn rmat(rng: &mut impl Rng, r: usize, c: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-scale..scale))
}

pub fn rcov(rng: &mut impl Rng, n: usize, scale: f64) -> Covector<f64> {
    Covector(rvec(rng, n, scale))
}

pub fn rgroup(rng: &mut impl Rng, alg: &LieAlgebra<f64>, scale: f64) -> GroupElement<f64> {
    GroupElement::exp(alg, &rvec(rng, alg.dim(), scale)).unwrap()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn max_abs_v(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// A tensor symmetric in its first two indices.
pub fn symmetric_tensor(rng: &mut impl Rng, n: usize, scale: f64) -> Tensor3<f64> {
    let mut t = Tensor3::cube(n);
    for a in 0..n {
        for b in a..n {
            for c in 0..n {
                let v = rng.gen_range(-scale..scale);
                t[(a, b, c)] = v;
                t[(b, a, c)] = v;
            }
        }
    }
    t
}

/// `∇° + S₀ + Σ ξ_l S_l` with `S₀, S_l` symmetric: torsion-free, not
/// invariant, not symplectic.
pub fn perturbed_connection(alg: &LieAlgebra<f64>, seed: u64, scale: f64) -> FrameConnection<f64> {
    let mut r = rng(seed);
    let n2 = 2 * alg.dim();
    let base = baseline_coefficients(alg);
    let s0 = symmetric_tensor(&mut r, n2, scale);
    let sl: Vec<Tensor3<f64>> = (0..alg.dim()).map(|_| symmetric_tensor(&mut r, n2, scale)).collect();
    let field = FnField(move |xi: &Covector<f64>| {
        let mut g = base.clone();
        g.add_scaled(1.0, &s0);
        for (l, s) in sl.iter().enumerate() {
            g.add_scaled(xi.0[l], s);
        }
        Ok(g)
    });
    FrameConnection::from_field(alg, Arc::new(field), "perturbed").unwrap()
}
