//! Case configuration: a JSON document describing one reduction case.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use symred::lie::{catalog, Covector};
use symred::{Covector64, LieAlgebra64};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

/// A catalog name such as `"so3"` or `"abelian(4)"`, or an inline algebra
/// `{"dim", "brackets", "realization"?}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GroupSpec {
    Name(String),
    Inline(Value),
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    /// The symplectization of the baseline connection.
    #[default]
    Symplectized,
    /// The baseline connection itself; a negative control.
    Baseline,
}

/// `"default"`, or an explicit basis of `S̃` as a list of `2n`-vectors.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum STildeSpec {
    Keyword(String),
    Basis(Vec<Vec<f64>>),
}

impl Default for STildeSpec {
    fn default() -> Self {
        STildeSpec::Keyword("default".into())
    }
}

/// Thresholds for every named check.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub algebra: f64,
    pub lemma: f64,
    pub context: f64,
    pub flags: f64,
    pub torsion: f64,
    pub omega: f64,
    pub closed: f64,
    pub kks: f64,
    pub fiber: f64,
    pub curvature: f64,
    pub symmetry: f64,
    pub halving_min: f64,
    pub halving_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebra: 1e-10,
            lemma: 1e-10,
            context: 1e-9,
            flags: 1e-10,
            torsion: 1e-6,
            omega: 1e-6,
            closed: 1e-6,
            kks: 1e-8,
            fiber: 1e-8,
            curvature: 1e-4,
            symmetry: 1e-4,
            halving_min: 3.0,
            halving_max: 5.0,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 13] {
        [
            ("algebra", self.algebra),
            ("lemma", self.lemma),
            ("context", self.context),
            ("flags", self.flags),
            ("torsion", self.torsion),
            ("omega", self.omega),
            ("closed", self.closed),
            ("kks", self.kks),
            ("fiber", self.fiber),
            ("curvature", self.curvature),
            ("symmetry", self.symmetry),
            ("halving_min", self.halving_min),
            ("halving_max", self.halving_max),
        ]
    }

    /// Multiplies every defect threshold by `s`; the halving window is kept.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            algebra: self.algebra * s,
            lemma: self.lemma * s,
            context: self.context * s,
            flags: self.flags * s,
            torsion: self.torsion * s,
            omega: self.omega * s,
            closed: self.closed * s,
            kks: self.kks * s,
            fiber: self.fiber * s,
            curvature: self.curvature * s,
            symmetry: self.symmetry * s,
            ..self.clone()
        }
    }
}

fn d_fd_step() -> f64 {
    1e-5
}
fn d_fd_step2() -> f64 {
    1e-4
}
fn d_radius() -> f64 {
    0.8
}
fn d_samples() -> usize {
    25
}
fn d_fiber() -> usize {
    5
}
fn d_curvature_points() -> usize {
    3
}
fn d_xi() -> usize {
    20
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub group: GroupSpec,
    pub mu: Vec<f64>,
    #[serde(default)]
    pub connection: ConnectionKind,
    #[serde(default = "d_fd_step")]
    pub fd_step: f64,
    #[serde(default = "d_fd_step2")]
    pub fd_step2: f64,
    #[serde(default)]
    pub tol: Tolerances,
    /// Chart points are drawn from the cube `[-r, r]^d`.
    #[serde(default = "d_radius")]
    pub chart_radius: f64,
    /// Number of chart points for the reduced checks.
    #[serde(default = "d_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub s_tilde: STildeSpec,
    /// Number of `G_μ` elements for the fiber-independence check.
    #[serde(default = "d_fiber")]
    pub fiber_samples: usize,
    /// Number of chart points at which full curvature tensors are compared.
    #[serde(default = "d_curvature_points")]
    pub curvature_points: usize,
    /// Number of random covectors for the connection flags.
    #[serde(default = "d_xi")]
    pub xi_samples: usize,
    /// Covectors at which `export-connection` writes coefficients; `μ` if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export_xi: Option<Vec<Vec<f64>>>,
}

impl CaseConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Range checks that do not need the algebra.
    pub fn check(&self) -> Result<(), ConfigError> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(ConfigError(format!("`{name}` must be positive and finite, got {x}")))
            }
        };
        positive("fd_step", self.fd_step)?;
        positive("fd_step2", self.fd_step2)?;
        positive("chart_radius", self.chart_radius)?;
        for (name, x) in self.tol.entries() {
            positive(&format!("tol.{name}"), x)?;
        }
        if self.tol.halving_min >= self.tol.halving_max {
            return Err(ConfigError("`tol.halving_min` must be below `tol.halving_max`".into()));
        }
        for (name, n) in [("samples", self.samples), ("curvature_points", self.curvature_points)] {
            if n == 0 {
                return Err(ConfigError(format!("`{name}` must be at least 1")));
            }
        }
        if self.mu.iter().any(|x| !x.is_finite()) {
            return Err(ConfigError("`mu` has non-finite entries".into()));
        }
        if let STildeSpec::Keyword(k) = &self.s_tilde {
            if k != "default" {
                return Err(ConfigError(format!("`s_tilde` must be \"default\" or a list of vectors, got \"{k}\"")));
            }
        }
        Ok(())
    }

    /// Applies command-line overrides. `fd_step` rescales both steps so
    /// that their ratio is kept.
    pub fn with_overrides(mut self, seed: Option<u64>, fd_step: Option<f64>, tol_scale: Option<f64>) -> Result<Self, ConfigError> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(h) = fd_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(ConfigError(format!("--fd-step must be positive, got {h}")));
            }
            let ratio = h / self.fd_step;
            self.fd_step = h;
            self.fd_step2 *= ratio;
        }
        if let Some(s) = tol_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(ConfigError(format!("--tol-scale must be positive, got {s}")));
            }
            self.tol = self.tol.scaled(s);
        }
        self.check()?;
        Ok(self)
    }

    pub fn algebra(&self) -> Result<LieAlgebra64, symred::Error> {
        match &self.group {
            GroupSpec::Name(name) => catalog::by_name(name),
            GroupSpec::Inline(v) => LieAlgebra64::from_json_value(v),
        }
    }

    pub fn mu_for(&self, alg: &LieAlgebra64) -> Result<Covector64, ConfigError> {
        if self.mu.len() != alg.dim() {
            return Err(ConfigError(format!(
                "`mu` has {} components but the algebra has dimension {}",
                self.mu.len(),
                alg.dim()
            )));
        }
        Ok(Covector::from_slice(&self.mu))
    }

    /// Explicit `S̃` as a `2n × k` matrix, if one was given.
    pub fn s_tilde_for(&self, alg: &LieAlgebra64) -> Result<Option<nalgebra::DMatrix<f64>>, ConfigError> {
        match &self.s_tilde {
            STildeSpec::Keyword(_) => Ok(None),
            STildeSpec::Basis(cols) => {
                let n2 = 2 * alg.dim();
                if let Some(bad) = cols.iter().find(|c| c.len() != n2) {
                    return Err(ConfigError(format!("`s_tilde` vectors need {n2} components, got {}", bad.len())));
                }
                let flat: Vec<f64> = cols.iter().flatten().copied().collect();
                Ok(Some(nalgebra::DMatrix::from_column_slice(n2, cols.len(), &flat)))
            }
        }
    }

    pub fn export_points(&self, alg: &LieAlgebra64) -> Result<Vec<Covector64>, ConfigError> {
        match &self.export_xi {
            None => Ok(vec![self.mu_for(alg)?]),
            Some(list) => list
                .iter()
                .map(|x| {
                    if x.len() == alg.dim() {
                        Ok(Covector::from_slice(x))
                    } else {
                        Err(ConfigError(format!("`export_xi` entries need {} components", alg.dim())))
                    }
                })
                .collect(),
        }
    }
}
