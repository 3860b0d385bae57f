//! Scenario configuration files: structured key-value text with sections for
//! the domain, kernel, problem, solver, and experiment parameters.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exterior::{ExteriorSpec, Shell};
use crate::grid::{build_grid, DomainGrid, DomainKind};
use crate::kernel::{ExtremalSign, KernelSpec};
use crate::solver::{Problem, SolverConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Extent {
    One(f64),
    Many(Vec<f64>),
}

impl Extent {
    fn as_vec(&self) -> Vec<f64> {
        match self {
            Extent::One(v) => vec![*v],
            Extent::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct DomainSection {
    pub dim: usize,
    pub kind: DomainKind,
    pub extent: Extent,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    pub h: f64,
    pub r_trunc: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CNorm {
    Value(f64),
    Preset(String),
}

impl Default for CNorm {
    fn default() -> Self {
        CNorm::Value(1.0)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct KernelSection {
    pub s: f64,
    pub lambda: f64,
    pub big_lambda: f64,
    #[serde(default)]
    pub c_norm: CNorm,
    #[serde(default)]
    pub n_dirs: Option<usize>,
}

/// Weight a: a constant, or a ball profile (inside/outside values).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Const(f64),
    Ball { inside: f64, outside: f64, center: Vec<f64>, radius: f64 },
}

impl WeightSpec {
    pub fn tabulate(&self, grid: &DomainGrid) -> Vec<f64> {
        match self {
            WeightSpec::Const(c) => vec![*c; grid.n_nodes()],
            WeightSpec::Ball { inside, outside, center, radius } => (0..grid.n_nodes())
                .map(|i| {
                    let x = grid.node(i);
                    let d: f64 = x
                        .iter()
                        .zip(center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    if d < *radius {
                        *inside
                    } else {
                        *outside
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ProblemSection {
    pub sign: ExtremalSign,
    pub q: f64,
    pub a: WeightSpec,
    #[serde(default)]
    pub exterior_shells: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub far_value: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SolverSection {
    #[serde(default = "default_tau")]
    pub tau_factor: f64,
    #[serde(default = "default_tol")]
    pub tol_residual: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_policy_outer")]
    pub policy_max_outer: usize,
}

fn default_tau() -> f64 {
    0.9
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    400_000
}
fn default_policy_outer() -> usize {
    60
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tau_factor: default_tau(),
            tol_residual: default_tol(),
            max_iter: default_max_iter(),
            policy_max_outer: default_policy_outer(),
        }
    }
}

/// Experiment knobs; which are read depends on the subcommand.
#[derive(Debug, Clone, Deserialize, Default)]
pub struct ExperimentSection {
    #[serde(default)]
    pub seed: Option<u64>,
    /// dead-core membership threshold; default 10 x tol_residual
    #[serde(default)]
    pub tol_zero: Option<f64>,
    /// Hopf probe band in cells; default 8
    #[serde(default)]
    pub probe_depth_cells: Option<f64>,
    // threshold
    #[serde(default)]
    pub m_lo: Option<f64>,
    #[serde(default)]
    pub m_hi: Option<f64>,
    #[serde(default)]
    pub tol_m: Option<f64>,
    #[serde(default)]
    pub m_shell: Option<usize>,
    #[serde(default)]
    pub coarse_steps: Option<usize>,
    /// bisection target for |min u| at the threshold
    #[serde(default)]
    pub m_target_tol: Option<f64>,
    // sweep
    #[serde(default)]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default)]
    pub sweep_shell: Option<usize>,
    // barriers
    #[serde(default)]
    pub n_levels: Option<u32>,
    #[serde(default)]
    pub c_growth: Option<f64>,
    #[serde(default)]
    pub vminus_sup: Option<f64>,
    // hopf
    #[serde(default)]
    pub hopf_r: Option<f64>,
    #[serde(default)]
    pub hopf_d0: Option<f64>,
    // validate-operator
    #[serde(default)]
    pub n_fields: Option<usize>,
    #[serde(default)]
    pub n_policies: Option<usize>,
    // weight bound
    #[serde(default)]
    pub weight_bound_r: Option<f64>,
    #[serde(default)]
    pub ellipticity_factor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ScenarioConfig {
    pub domain: DomainSection,
    pub kernel: KernelSection,
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            key: path.display().to_string(),
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config {
            key: "parse".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.problem.q > 0.0 && self.problem.q < 1.0) {
            return Err(Error::Config {
                key: "problem.q".into(),
                message: format!(
                    "q = {} is outside the sublinear range (0, 1)",
                    self.problem.q
                ),
            });
        }
        if !(self.kernel.s > 0.0 && self.kernel.s < 1.0) {
            return Err(Error::Config {
                key: "kernel.s".into(),
                message: format!("s = {} must lie in (0, 1)", self.kernel.s),
            });
        }
        if self.domain.dim != 1 && self.domain.dim != 2 {
            return Err(Error::Config {
                key: "domain.dim".into(),
                message: format!("dim = {} (only 1 and 2 are supported)", self.domain.dim),
            });
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<DomainGrid>> {
        let center = self
            .domain
            .center
            .clone()
            .unwrap_or_else(|| vec![0.0; self.domain.dim]);
        Ok(Arc::new(build_grid(
            self.domain.dim,
            self.domain.kind,
            &self.domain.extent.as_vec(),
            &center,
            self.domain.h,
            self.domain.r_trunc,
        )?))
    }

    pub fn build_kernel(&self) -> Result<KernelSpec> {
        let n_dirs = self.kernel.n_dirs.unwrap_or(16);
        let mut k = KernelSpec::with_directions(
            self.domain.dim,
            self.kernel.s,
            self.kernel.lambda,
            self.kernel.big_lambda,
            n_dirs,
        )?;
        k.c_norm = match &self.kernel.c_norm {
            CNorm::Value(v) => *v,
            CNorm::Preset(name) => match name.as_str() {
                "one" => 1.0,
                "fractional" => {
                    crate::kernel::fractional_laplacian_constant(self.domain.dim, self.kernel.s)
                }
                other => {
                    return Err(Error::Config {
                        key: "kernel.c_norm".into(),
                        message: format!(
                            "unknown preset {other:?}; use a number, \"one\" or \"fractional\""
                        ),
                    })
                }
            },
        };
        k.validate()?;
        Ok(k)
    }

    pub fn build_exterior(&self, grid: &DomainGrid) -> Result<ExteriorSpec> {
        let ext = match &self.problem.exterior_shells {
            None => ExteriorSpec::uniform(grid, self.problem.far_value),
            Some(rows) => ExteriorSpec::new(
                rows.iter()
                    .map(|r| Shell { r_inner: r[0], r_outer: r[1], value: r[2] })
                    .collect(),
                self.problem.far_value,
            ),
        };
        ext.validate(grid)?;
        Ok(ext)
    }

    pub fn build_problem(&self) -> Result<Problem> {
        let grid = self.build_grid()?;
        let kernel = self.build_kernel()?;
        let exterior = self.build_exterior(&grid)?;
        let weight = self.problem.a.tabulate(&grid);
        Problem::new(grid, kernel, self.problem.sign, weight, self.problem.q, exterior)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tau_factor: self.solver.tau_factor,
            tol_residual: self.solver.tol_residual,
            max_iter: self.solver.max_iter,
            policy_max_outer: self.solver.policy_max_outer,
        }
    }

    pub fn tol_zero(&self) -> f64 {
        self.experiment.tol_zero.unwrap_or(10.0 * self.solver.tol_residual)
    }

    pub fn probe_depth(&self) -> f64 {
        self.experiment.probe_depth_cells.unwrap_or(8.0) * self.domain.h
    }
}
