//! Discrete group quadrature: finite subgroups and Gauss–Legendre rules on
//! tori.

use nalgebra::DVector;

use crate::error::{check_len, Error, Result};
use crate::lie::algebra::LieAlgebra;
use crate::lie::group::{GroupElement, GROUP_TOL};
use crate::linalg;
use crate::scalar::Scalar;

/// Weights must sum to one within this tolerance.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Largest subgroup the closure search will enumerate.
pub const MAX_SUBGROUP_ORDER: usize = 4096;

/// Positive weights summing to one on elements of a single group.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T: Scalar> {
    nodes: Vec<GroupElement<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> QuadratureRule<T> {
    pub fn new(nodes: Vec<GroupElement<T>>, weights: Vec<T>) -> Result<Self> {
        check_len(nodes.len(), weights.len())?;
        if nodes.is_empty() {
            return Err(Error::InvalidQuadrature("no nodes".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > T::zero())) {
            return Err(Error::InvalidQuadrature(format!("non-positive weight {}", w.as_f64())));
        }
        let total = weights.iter().fold(T::zero(), |s, &w| s + w);
        let off = (total - T::one()).abs_val();
        if off > T::tol(WEIGHT_TOL) {
            return Err(Error::InvalidQuadrature(format!("weights sum to {}", total.as_f64())));
        }
        let kind = nodes[0].kind();
        for g in &nodes {
            if g.kind() != kind {
                return Err(Error::InvalidQuadrature("nodes from different groups".into()));
            }
            let d = g.constraint_defect();
            if d > T::tol(GROUP_TOL) {
                return Err(Error::NotInGroup(d.as_f64()));
            }
        }
        Ok(Self { nodes, weights })
    }

    /// Equal weights on the given nodes.
    pub fn uniform(nodes: Vec<GroupElement<T>>) -> Result<Self> {
        let w = T::one() / T::lit(nodes.len().max(1) as f64);
        let weights = vec![w; nodes.len()];
        Self::new(nodes, weights)
    }

    pub fn nodes(&self) -> &[GroupElement<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest distance from `node·g_i` to the nearest node, over nodes and
    /// `g_i`; zero exactly when the node set is closed under right
    /// multiplication.
    pub fn closure_defect(&self) -> T {
        let mut worst = T::zero();
        for a in &self.nodes {
            for b in &self.nodes {
                let p = a.mul(b);
                worst = worst.max(nearest(&self.nodes, &p));
            }
        }
        worst
    }
}

fn nearest<T: Scalar>(nodes: &[GroupElement<T>], g: &GroupElement<T>) -> T {
    nodes
        .iter()
        .map(|h| linalg::max_abs(&(h.matrix() - g.matrix())))
        .fold(T::lit(f64::INFINITY), |a, b| a.min(b))
}

/// The subgroup generated by `generators`, with equal weights.
pub fn finite_subgroup<T: Scalar>(alg: &LieAlgebra<T>, generators: &[GroupElement<T>]) -> Result<QuadratureRule<T>> {
    let id = GroupElement::identity(alg)?;
    let tol = T::tol(1e-8);
    let mut elems = vec![id];
    let mut frontier = 0;
    while frontier < elems.len() {
        let cur = elems[frontier].clone();
        frontier += 1;
        for g in generators {
            let p = cur.mul(g);
            if nearest(&elems, &p) > tol {
                if elems.len() >= MAX_SUBGROUP_ORDER {
                    return Err(Error::InvalidQuadrature(format!(
                        "generated subgroup exceeds {MAX_SUBGROUP_ORDER} elements"
                    )));
                }
                elems.push(p);
            }
        }
    }
    QuadratureRule::uniform(elems)
}

/// Cyclic subgroup generated by `exp(2π/order · x)`.
pub fn cyclic_subgroup<T: Scalar>(alg: &LieAlgebra<T>, x: &DVector<T>, order: usize) -> Result<QuadratureRule<T>> {
    if order == 0 {
        return Err(Error::InvalidQuadrature("order must be positive".into()));
    }
    let step = T::two_pi() / T::lit(order as f64);
    let gen = GroupElement::exp(alg, &(x * step))?;
    finite_subgroup(alg, &[gen])
}

/// Rotation group of the cube inside SO(3), generated by quarter turns about
/// the first and third axes.
pub fn octahedral_subgroup<T: Scalar>(alg: &LieAlgebra<T>) -> Result<QuadratureRule<T>> {
    check_len(3, alg.dim())?;
    let q = T::frac_pi_2();
    let a = GroupElement::exp(alg, &(linalg::unit(3, 0) * q))?;
    let b = GroupElement::exp(alg, &(linalg::unit(3, 2) * q))?;
    finite_subgroup(alg, &[a, b])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre polynomial.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..order {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[order - 1 - i] = wi;
    }
    (x, w)
}

/// Product Gauss–Legendre rule on the torus `exp(Σ θ_i X_i)`, `θ_i ∈ [0, period_i)`.
///
/// The directions must commute for the nodes to form a torus.
pub fn torus_gauss_legendre<T: Scalar>(
    alg: &LieAlgebra<T>,
    directions: &[(DVector<T>, f64)],
    order: usize,
) -> Result<QuadratureRule<T>> {
    if order == 0 || directions.is_empty() {
        return Err(Error::InvalidQuadrature("empty torus rule".into()));
    }
    for (i, (x, _)) in directions.iter().enumerate() {
        check_len(alg.dim(), x.len())?;
        for (y, _) in &directions[i + 1..] {
            let b = alg.bracket(x, y)?;
            if linalg::max_abs_vec(&b) > T::tol(1e-12) {
                return Err(Error::InvalidQuadrature("torus directions do not commute".into()));
            }
        }
    }
    let (gx, gw) = gauss_legendre(order);
    let total = order.pow(directions.len() as u32);
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut arg = DVector::zeros(alg.dim());
        let mut w = 1.0;
        for (x, period) in directions {
            let k = rem % order;
            rem /= order;
            let theta = 0.5 * (gx[k] + 1.0) * period;
            arg += x * T::lit(theta);
            w *= 0.5 * gw[k];
        }
        nodes.push(GroupElement::exp(alg, &arg)?);
        weights.push(T::lit(w));
    }
    // Renormalize away the last ulp of rounding in the product weights.
    let s = weights.iter().fold(T::zero(), |a, &b| a + b);
    let weights = weights.into_iter().map(|w| w / s).collect();
    QuadratureRule::new(nodes, weights)
}
