use nalgebra::{DMatrix, DVector};
use serde_json::Value;

use crate::error::{check_len, Error, Result};
use crate::lie::group::GroupKind;
use crate::linalg::{self, Tensor3};
use crate::scalar::Scalar;

/// An element of the dual space, stored in the dual basis `e^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector<T: Scalar>(pub DVector<T>);

impl<T: Scalar> Covector<T> {
    pub fn new(comps: DVector<T>) -> Self {
        Self(comps)
    }

    pub fn from_slice(comps: &[T]) -> Self {
        Self(DVector::from_column_slice(comps))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    /// The dual basis covector `e^i`.
    pub fn basis(n: usize, i: usize) -> Self {
        Self(linalg::unit(n, i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn comps(&self) -> &DVector<T> {
        &self.0
    }

    /// `⟨self, x⟩`.
    pub fn pair(&self, x: &DVector<T>) -> T {
        self.0.dot(x)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.as_f64().is_finite())
    }
}

/// A matrix realization `e_i ↦ E_i` of an algebra, tagged with the group it
/// exponentiates into.
#[derive(Clone, Debug)]
pub struct Realization<T: Scalar> {
    pub(crate) kind: GroupKind,
    pub(crate) generators: Vec<DMatrix<T>>,
    /// Left inverse of the map `x ↦ Σ x_i vec(E_i)`.
    pub(crate) decompose: DMatrix<T>,
}

impl<T: Scalar> Realization<T> {
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn generators(&self) -> &[DMatrix<T>] {
        &self.generators
    }

    pub fn rep_dim(&self) -> usize {
        self.generators[0].nrows()
    }

    /// `Σ x_i E_i`.
    pub fn matrix_of(&self, x: &DVector<T>) -> DMatrix<T> {
        let r = self.rep_dim();
        self.generators
            .iter()
            .zip(x.iter())
            .fold(DMatrix::zeros(r, r), |acc, (g, &c)| acc + g * c)
    }

    /// Basis coordinates of a matrix lying in the span of the generators.
    pub fn coords_of(&self, m: &DMatrix<T>) -> DVector<T> {
        let flat = DVector::from_column_slice(m.as_slice());
        &self.decompose * flat
    }
}

/// A finite-dimensional real Lie algebra given by structure constants,
/// `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
#[derive(Clone, Debug)]
pub struct LieAlgebra<T: Scalar> {
    dim: usize,
    structure: Tensor3<T>,
    name: Option<String>,
    realization: Option<Realization<T>>,
    /// `ad(e_i)` for each basis vector.
    ad_basis: Vec<DMatrix<T>>,
}

impl<T: Scalar> LieAlgebra<T> {
    /// Builds an algebra, checking exact antisymmetry and the Jacobi identity.
    pub fn new(structure: Tensor3<T>) -> Result<Self> {
        let (n, n1, n2) = structure.dims();
        if n == 0 || n1 != n || n2 != n {
            return Err(Error::InvalidAlgebra(format!(
                "structure constants must be n×n×n with n>0, got {n}×{n1}×{n2}"
            )));
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if structure[(i, j, k)] != -structure[(j, i, k)] {
                        return Err(Error::InvalidAlgebra(format!(
                            "c[{i}][{j}][{k}] is not antisymmetric"
                        )));
                    }
                }
            }
        }
        let ad_basis = (0..n)
            .map(|i| DMatrix::from_fn(n, n, |k, j| structure[(i, j, k)]))
            .collect();
        let alg = Self {
            dim: n,
            structure,
            name: None,
            realization: None,
            ad_basis,
        };
        let jac = alg.jacobi_defect();
        if jac > T::tol(1e-12) {
            return Err(Error::InvalidAlgebra(format!(
                "Jacobi identity fails (defect {:e})",
                jac.as_f64()
            )));
        }
        Ok(alg)
    }

    /// Builds an algebra from the listed brackets `[e_i, e_j] = Σ coeff e_k`;
    /// unlisted pairs bracket to zero and `[e_j, e_i]` is filled in.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, Vec<(usize, T)>)]) -> Result<Self> {
        let mut c = Tensor3::cube(dim);
        let mut seen = vec![false; dim * dim];
        for (i, j, terms) in brackets {
            let (i, j) = (*i, *j);
            if i >= dim || j >= dim {
                return Err(Error::InvalidAlgebra(format!("bracket index ({i},{j}) out of range")));
            }
            if i == j {
                if terms.iter().any(|(_, v)| *v != T::zero()) {
                    return Err(Error::InvalidAlgebra(format!("[e{i},e{i}] must vanish")));
                }
                continue;
            }
            if seen[i * dim + j] || seen[j * dim + i] {
                return Err(Error::InvalidAlgebra(format!("bracket ({i},{j}) listed twice")));
            }
            seen[i * dim + j] = true;
            for &(k, v) in terms {
                if k >= dim {
                    return Err(Error::InvalidAlgebra(format!("output index {k} out of range")));
                }
                c[(i, j, k)] += v;
                c[(j, i, k)] -= v;
            }
        }
        Self::new(c)
    }

    /// Builds an algebra from a linearly independent, commutator-closed set of
    /// matrices, reading the structure constants off the commutators.
    pub fn from_matrix_basis(generators: Vec<DMatrix<T>>, kind: GroupKind) -> Result<Self> {
        let dim = generators.len();
        if dim == 0 {
            return Err(Error::InvalidAlgebra("empty matrix basis".into()));
        }
        let r = generators[0].nrows();
        let mut stacked = DMatrix::zeros(r * r, dim);
        for (j, g) in generators.iter().enumerate() {
            if g.nrows() != r || g.ncols() != r {
                return Err(Error::InvalidAlgebra("realization matrices must share one square shape".into()));
            }
            stacked.set_column(j, &DVector::from_column_slice(g.as_slice()));
        }
        let decompose = linalg::pinv(&stacked, T::lit(linalg::RANK_RTOL));
        let snap = T::tol(1e-14);
        let mut c = Tensor3::cube(dim);
        for i in 0..dim {
            for j in i + 1..dim {
                let comm = &generators[i] * &generators[j] - &generators[j] * &generators[i];
                let coords = &decompose * DVector::from_column_slice(comm.as_slice());
                for k in 0..dim {
                    let v = if coords[k].abs_val() < snap { T::zero() } else { coords[k] };
                    c[(i, j, k)] = v;
                    c[(j, i, k)] = -v;
                }
            }
        }
        Self::new(c)?.with_realization(generators, kind)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Attaches a matrix realization; the commutators must reproduce the
    /// structure constants.
    pub fn with_realization(mut self, generators: Vec<DMatrix<T>>, kind: GroupKind) -> Result<Self> {
        check_len(self.dim, generators.len())?;
        let r = generators[0].nrows();
        if generators.iter().any(|g| g.nrows() != r || g.ncols() != r) {
            return Err(Error::InvalidAlgebra("realization matrices must share one square shape".into()));
        }
        let mut stacked = DMatrix::zeros(r * r, self.dim);
        for (j, g) in generators.iter().enumerate() {
            stacked.set_column(j, &DVector::from_column_slice(g.as_slice()));
        }
        if linalg::rank(&stacked, T::lit(linalg::RANK_RTOL)) < self.dim {
            return Err(Error::InvalidAlgebra("realization matrices are linearly dependent".into()));
        }
        let decompose = linalg::pinv(&stacked, T::lit(linalg::RANK_RTOL));
        self.realization = Some(Realization {
            kind,
            generators,
            decompose,
        });
        let defect = self.realization_defect().unwrap_or_else(T::zero);
        if defect > T::tol(1e-12) {
            return Err(Error::InvalidAlgebra(format!(
                "realization commutators disagree with structure constants (defect {:e})",
                defect.as_f64()
            )));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("custom")
    }

    pub fn structure(&self) -> &Tensor3<T> {
        &self.structure
    }

    pub fn realization(&self) -> Result<&Realization<T>> {
        self.realization
            .as_ref()
            .ok_or_else(|| Error::NoRealization(self.name().to_string()))
    }

    pub fn has_realization(&self) -> bool {
        self.realization.is_some()
    }

    /// `ad(e_i)`.
    pub fn ad_basis(&self, i: usize) -> &DMatrix<T> {
        &self.ad_basis[i]
    }

    /// `[x, y]` without length checks.
    pub(crate) fn br(&self, x: &DVector<T>, y: &DVector<T>) -> DVector<T> {
        self.structure.contract(x, y)
    }

    pub fn bracket(&self, x: &DVector<T>, y: &DVector<T>) -> Result<DVector<T>> {
        check_len(self.dim, x.len())?;
        check_len(self.dim, y.len())?;
        Ok(self.br(x, y))
    }

    /// The matrix of `ad(x) = [x, ·]`.
    pub fn ad(&self, x: &DVector<T>) -> DMatrix<T> {
        self.ad_basis
            .iter()
            .zip(x.iter())
            .fold(DMatrix::zeros(self.dim, self.dim), |acc, (a, &c)| acc + a * c)
    }

    /// `B(ξ)_{ij} = ⟨ξ, [e_i, e_j]⟩`.
    pub fn pairing_matrix(&self, xi: &Covector<T>) -> DMatrix<T> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, j| {
            (0..n).fold(T::zero(), |s, k| s + xi.0[k] * self.structure[(i, j, k)])
        })
    }

    /// The covector `ξ∘ad(x) : y ↦ ⟨ξ, [x, y]⟩`.
    pub fn coad_star(&self, x: &DVector<T>, xi: &Covector<T>) -> Result<Covector<T>> {
        check_len(self.dim, x.len())?;
        check_len(self.dim, xi.len())?;
        Ok(self.coad_star_unchecked(x, xi))
    }

    pub(crate) fn coad_star_unchecked(&self, x: &DVector<T>, xi: &Covector<T>) -> Covector<T> {
        Covector(self.ad(x).transpose() * &xi.0)
    }

    /// Largest entry of the cyclic sum `[[e_i,e_j],e_k] + cyclic`.
    pub fn jacobi_defect(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ei = linalg::unit(n, i);
                    let ej = linalg::unit(n, j);
                    let ek = linalg::unit(n, k);
                    let s = self.br(&self.br(&ei, &ej), &ek)
                        + self.br(&self.br(&ej, &ek), &ei)
                        + self.br(&self.br(&ek, &ei), &ej);
                    worst = worst.max(linalg::max_abs_vec(&s));
                }
            }
        }
        worst
    }

    /// Largest mismatch between realization commutators and structure constants.
    pub fn realization_defect(&self) -> Option<T> {
        let rz = self.realization.as_ref()?;
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (&rz.generators[i], &rz.generators[j]);
                let comm = a * b - b * a;
                let expected = rz.matrix_of(&self.structure.fiber(i, j));
                worst = worst.max(linalg::max_abs(&(comm - expected)));
            }
        }
        Some(worst)
    }

    /// Parses the JSON document `{"dim", "brackets", "realization"?}`.
    ///
    /// Each bracket entry is `[i, j, [k, coeff], ...]` with 0-based indices;
    /// `realization`, when present, is a list of `dim` square matrices given
    /// as row lists.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::Json(msg.to_string());
        let dim = v
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing integer `dim`"))? as usize;
        let entries = v
            .get("brackets")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing array `brackets`"))?;
        let mut brackets = Vec::with_capacity(entries.len());
        for e in entries {
            let arr = e.as_array().ok_or_else(|| bad("bracket entry must be an array"))?;
            if arr.len() < 2 {
                return Err(bad("bracket entry needs at least [i, j]"));
            }
            let i = arr[0].as_u64().ok_or_else(|| bad("bracket index must be an integer"))? as usize;
            let j = arr[1].as_u64().ok_or_else(|| bad("bracket index must be an integer"))? as usize;
            let mut terms = Vec::new();
            for t in &arr[2..] {
                let pair = t.as_array().ok_or_else(|| bad("bracket term must be [k, coeff]"))?;
                if pair.len() != 2 {
                    return Err(bad("bracket term must be [k, coeff]"));
                }
                let k = pair[0].as_u64().ok_or_else(|| bad("term index must be an integer"))? as usize;
                let c = pair[1].as_f64().ok_or_else(|| bad("term coefficient must be a number"))?;
                terms.push((k, T::lit(c)));
            }
            brackets.push((i, j, terms));
        }
        let mut alg = Self::from_brackets(dim, &brackets)?;
        if let Some(name) = v.get("name").and_then(Value::as_str) {
            alg = alg.with_name(name);
        }
        match v.get("realization") {
            None | Some(Value::Null) => Ok(alg),
            Some(r) => {
                let mats = r.as_array().ok_or_else(|| bad("`realization` must be an array"))?;
                let mut gens = Vec::with_capacity(mats.len());
                for m in mats {
                    gens.push(matrix_from_json(m)?);
                }
                alg.with_realization(gens, GroupKind::General)
            }
        }
    }
}

fn matrix_from_json<T: Scalar>(v: &Value) -> Result<DMatrix<T>> {
    let bad = || Error::Json("realization matrix must be a list of equal-length numeric rows".into());
    let rows = v.as_array().ok_or_else(bad)?;
    let nr = rows.len();
    let nc = rows.first().and_then(Value::as_array).map(Vec::len).ok_or_else(bad)?;
    let mut m = DMatrix::zeros(nr, nc);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(bad)?;
        if row.len() != nc {
            return Err(bad());
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = T::lit(x.as_f64().ok_or_else(bad)?);
        }
    }
    Ok(m)
}
