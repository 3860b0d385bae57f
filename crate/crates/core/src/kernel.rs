//! Kernel class parameters: order s, ellipticity bounds, normalization, and
//! the direction quadrature over antipodal representatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalSign {
    Plus,
    Minus,
}

/// Radial quadrature controls. Panel boundaries are functions of the grid
/// spacing and the geometry only, so the whole rule commutes with dilations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialRule {
    /// Inner cutoff as a fraction of h; the ball of radius `r_min_factor * h`
    /// is dropped (second differences are O(r^2) there).
    pub r_min_factor: f64,
    /// Midpoint points per graded panel below r = h.
    pub near_points: usize,
    /// Gauss-Legendre order on the mid panels.
    pub gauss_order: usize,
    /// Relative panel width beyond the domain: width <= rel_width * r.
    pub rel_width: f64,
}

impl Default for RadialRule {
    fn default() -> Self {
        Self { r_min_factor: 0.25, near_points: 32, gauss_order: 6, rel_width: 0.125 }
    }
}

/// Parameters of the kernel class: mu ranges over even functions with values
/// in [lambda, big_lambda], kernel |y|^{-n-2s}, normalization `c_norm`.
///
/// Directions are one representative per antipodal pair; the second difference
/// already sums both rays, so the weights add up to the measure of a
/// half-sphere (1 in 1D, pi in 2D). `c_norm` is a free constant: the default
/// is 1, and [`KernelSpec::fractional_laplacian`] supplies the constant that
/// makes the degenerate class lambda = Lambda = 1 equal to -(-Delta)^s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub dim: usize,
    pub s: f64,
    pub lambda: f64,
    pub big_lambda: f64,
    pub c_norm: f64,
    /// Unit direction per antipodal pair, dim-interleaved.
    pub directions: Vec<f64>,
    pub weights: Vec<f64>,
    pub radial: RadialRule,
}

impl KernelSpec {
    pub fn new(dim: usize, s: f64, lambda: f64, big_lambda: f64) -> Result<Self> {
        let n_dirs = if dim == 1 { 1 } else { 16 };
        Self::with_directions(dim, s, lambda, big_lambda, n_dirs)
    }

    /// Uniformly spaced angles over the half-circle with trapezoid weights
    /// (all equal by periodicity). In 1D the single direction e1 with weight 1.
    pub fn with_directions(
        dim: usize,
        s: f64,
        lambda: f64,
        big_lambda: f64,
        n_dirs: usize,
    ) -> Result<Self> {
        let (directions, weights) = match dim {
            1 => (vec![1.0], vec![1.0]),
            2 => {
                if n_dirs == 0 {
                    return Err(Error::InvalidKernel("need at least one direction".into()));
                }
                let mut d = Vec::with_capacity(2 * n_dirs);
                let w = std::f64::consts::PI / n_dirs as f64;
                for j in 0..n_dirs {
                    let a = std::f64::consts::PI * j as f64 / n_dirs as f64;
                    d.push(a.cos());
                    d.push(a.sin());
                }
                (d, vec![w; n_dirs])
            }
            _ => return Err(Error::InvalidKernel(format!("dim must be 1 or 2, got {dim}"))),
        };
        let k = Self {
            dim,
            s,
            lambda,
            big_lambda,
            c_norm: 1.0,
            directions,
            weights,
            radial: RadialRule::default(),
        };
        k.validate()?;
        Ok(k)
    }

    /// Same class with the normalization that matches the fractional Laplacian
    /// when lambda = Lambda = 1:
    /// C(n, s) = 4^s Gamma(n/2 + s) sin(pi s) Gamma(1 + s) / pi^{n/2 + 1}.
    pub fn fractional_laplacian(dim: usize, s: f64) -> Result<Self> {
        let mut k = Self::new(dim, s, 1.0, 1.0)?;
        k.c_norm = fractional_laplacian_constant(dim, s);
        Ok(k)
    }

    pub fn with_c_norm(mut self, c_norm: f64) -> Self {
        self.c_norm = c_norm;
        self
    }

    pub fn n_dirs(&self) -> usize {
        self.weights.len()
    }

    pub fn direction(&self, j: usize) -> &[f64] {
        &self.directions[j * self.dim..(j + 1) * self.dim]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidKernel(format!("s = {} must lie in (0, 1)", self.s)));
        }
        if !(self.lambda > 0.0 && self.big_lambda >= self.lambda) {
            return Err(Error::InvalidKernel(format!(
                "need 0 < lambda <= Lambda, got lambda = {}, Lambda = {}",
                self.lambda, self.big_lambda
            )));
        }
        if !(self.c_norm > 0.0) {
            return Err(Error::InvalidKernel("c_norm must be positive".into()));
        }
        if self.weights.is_empty() || self.directions.len() != self.dim * self.weights.len() {
            return Err(Error::InvalidKernel("direction/weight lists inconsistent".into()));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidKernel("weights must be positive".into()));
        }
        for j in 0..self.n_dirs() {
            let th = self.direction(j);
            let norm: f64 = th.iter().map(|t| t * t).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidKernel(format!("direction {j} is not a unit vector")));
            }
        }
        let half_measure = if self.dim == 1 { 1.0 } else { std::f64::consts::PI };
        let total: f64 = self.weights.iter().sum();
        if (total - half_measure).abs() > 1e-10 {
            return Err(Error::InvalidKernel(format!(
                "weights sum to {total}, expected the half-sphere measure {half_measure}"
            )));
        }
        Ok(())
    }
}

/// Normalizing constant of the fractional Laplacian,
/// C(n, s) = 4^s Gamma(n/2 + s) / (pi^{n/2} |Gamma(-s)|),
/// written via the reflection formula to avoid Gamma at negative arguments.
pub fn fractional_laplacian_constant(dim: usize, s: f64) -> f64 {
    let n = dim as f64;
    let pi = std::f64::consts::PI;
    4f64.powf(s) * libm::tgamma(n / 2.0 + s) * (pi * s).sin() * libm::tgamma(1.0 + s)
        / pi.powf(n / 2.0 + 1.0)
}

/// Per-node, per-direction kernel weights mu_j(x) in [lambda, Lambda].
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyField {
    pub n_dirs: usize,
    /// node-major: mu[node * n_dirs + dir]
    pub mu: Vec<f64>,
}

impl PolicyField {
    pub fn constant(n_nodes: usize, n_dirs: usize, value: f64) -> Self {
        Self { n_dirs, mu: vec![value; n_nodes * n_dirs] }
    }

    pub fn at(&self, node: usize, dir: usize) -> f64 {
        self.mu[node * self.n_dirs + dir]
    }

    pub fn validate(&self, k: &KernelSpec) -> Result<()> {
        if self.n_dirs != k.n_dirs() {
            return Err(Error::InvalidKernel(format!(
                "policy has {} directions, kernel has {}",
                self.n_dirs,
                k.n_dirs()
            )));
        }
        for (i, &m) in self.mu.iter().enumerate() {
            if !(m >= k.lambda && m <= k.big_lambda) {
                return Err(Error::PolicyOutOfBounds {
                    node: i / self.n_dirs,
                    dir: i % self.n_dirs,
                    value: m,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_cover_half_sphere() {
        let k1 = KernelSpec::new(1, 0.5, 1.0, 2.0).unwrap();
        assert_eq!(k1.weights, vec![1.0]);
        let k2 = KernelSpec::with_directions(2, 0.5, 1.0, 2.0, 16).unwrap();
        let total: f64 = k2.weights.iter().sum();
        assert!((total - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn fractional_constant_1d_half() {
        // C(1, 1/2) = 1/pi
        let c = fractional_laplacian_constant(1, 0.5);
        assert!((c - 1.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelSpec::new(1, 1.0, 1.0, 2.0).is_err());
        assert!(KernelSpec::new(1, 0.5, 2.0, 1.0).is_err());
        assert!(KernelSpec::new(3, 0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn policy_bounds_checked() {
        let k = KernelSpec::new(1, 0.5, 1.0, 2.0).unwrap();
        let ok = PolicyField::constant(5, 1, 1.5);
        assert!(ok.validate(&k).is_ok());
        let bad = PolicyField::constant(5, 1, 2.5);
        assert!(bad.validate(&k).is_err());
    }
}
