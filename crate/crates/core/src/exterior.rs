//! Exterior data on the complement of the domain: piecewise-constant values on
//! centered annuli plus a single far-field constant beyond the truncation radius.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DomainGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub r_inner: f64,
    pub r_outer: f64,
    pub value: f64,
}

/// Exterior data `g` on `R^n \ Omega`, radial around the domain center.
///
/// The shells must tile `[inradius, r_trunc]` without gaps; everything beyond
/// `r_trunc` takes `far_value`. `tail_growth = (C_g, alpha)` is an optional
/// declared bound `|g(x)| <= C_g (1 + |x|)^{1 + alpha}`; directional integrals
/// reject it unless `alpha < 2s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorSpec {
    pub shells: Vec<Shell>,
    pub far_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_growth: Option<(f64, f64)>,
}

impl ExteriorSpec {
    pub fn new(shells: Vec<Shell>, far_value: f64) -> Self {
        Self { shells, far_value, tail_growth: None }
    }

    /// One shell covering the whole truncated annulus.
    pub fn uniform(grid: &DomainGrid, value: f64) -> Self {
        Self::new(
            vec![Shell { r_inner: grid.inradius(), r_outer: grid.r_trunc, value }],
            value,
        )
    }

    pub fn zero(grid: &DomainGrid) -> Self {
        Self::uniform(grid, 0.0)
    }

    pub fn validate(&self, grid: &DomainGrid) -> Result<()> {
        if self.shells.is_empty() {
            return Err(Error::InvalidExterior("at least one shell is required".into()));
        }
        let first = &self.shells[0];
        if first.r_inner > grid.inradius() + 1e-12 {
            return Err(Error::InvalidExterior(format!(
                "first shell starts at {} but must cover the boundary (inradius {})",
                first.r_inner,
                grid.inradius()
            )));
        }
        for w in self.shells.windows(2) {
            if (w[0].r_outer - w[1].r_inner).abs() > 1e-12 {
                return Err(Error::InvalidExterior(format!(
                    "shells must be contiguous: gap between r = {} and r = {}",
                    w[0].r_outer, w[1].r_inner
                )));
            }
        }
        for s in &self.shells {
            if !(s.r_outer > s.r_inner) {
                return Err(Error::InvalidExterior(format!(
                    "empty shell [{}, {}]",
                    s.r_inner, s.r_outer
                )));
            }
            if !s.value.is_finite() {
                return Err(Error::InvalidExterior("non-finite shell value".into()));
            }
        }
        let last = self.shells.last().unwrap();
        if (last.r_outer - grid.r_trunc).abs() > 1e-12 {
            return Err(Error::InvalidExterior(format!(
                "shells must reach r_trunc = {}; last shell ends at {}",
                grid.r_trunc, last.r_outer
            )));
        }
        if !self.far_value.is_finite() {
            return Err(Error::InvalidExterior("non-finite far value".into()));
        }
        Ok(())
    }

    /// Number of constant-value slots: one per shell plus the far field.
    pub fn n_slots(&self) -> usize {
        self.shells.len() + 1
    }

    /// Slot holding the value at radius `rho` from the center.
    pub fn slot_at(&self, rho: f64) -> usize {
        for (i, s) in self.shells.iter().enumerate() {
            if rho < s.r_outer {
                return i;
            }
        }
        self.shells.len()
    }

    pub fn slot_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.shells.iter().map(|s| s.value).collect();
        v.push(self.far_value);
        v
    }

    pub fn value_at_radius(&self, rho: f64) -> f64 {
        let slot = self.slot_at(rho);
        if slot < self.shells.len() {
            self.shells[slot].value
        } else {
            self.far_value
        }
    }

    /// Value of `g` at the boundary trace (the shell adjacent to the boundary
    /// at radius `rho`).
    pub fn trace_value(&self, rho: f64) -> f64 {
        self.value_at_radius(rho)
    }

    /// Same geometry, values mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shells: self
                .shells
                .iter()
                .map(|s| Shell { value: f(s.value), ..*s })
                .collect(),
            far_value: f(self.far_value),
            tail_growth: self.tail_growth,
        }
    }

    /// Positive part g+ of the exterior data.
    pub fn positive_part(&self) -> Self {
        self.map_values(|v| v.max(0.0))
    }

    /// Negative part g- (as a nonnegative function).
    pub fn negative_part(&self) -> Self {
        self.map_values(|v| (-v).max(0.0))
    }

    /// All shell boundary radii (inner edges plus the outermost edge).
    pub fn radii(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.shells.iter().map(|s| s.r_inner).collect();
        if let Some(last) = self.shells.last() {
            r.push(last.r_outer);
        }
        r
    }

    /// Geometry key used to check that two specs index the same slots.
    pub fn same_geometry(&self, other: &Self) -> bool {
        self.shells.len() == other.shells.len()
            && self
                .shells
                .iter()
                .zip(&other.shells)
                .all(|(a, b)| a.r_inner == b.r_inner && a.r_outer == b.r_outer)
    }
}
