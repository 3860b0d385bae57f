//! Grid functions: interior nodal values plus an exterior specification, which
//! together define a function on all of R^n.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exterior::ExteriorSpec;
use crate::grid::DomainGrid;

/// One affine term of a point evaluation: either an interior nodal value or
/// one of the exterior constant slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Node(u32),
    Ext(u32),
}

/// Point evaluation decomposed as a short affine combination of nodal values
/// and exterior slots. At most four terms (bilinear interpolation).
#[derive(Debug, Clone, Copy, Default)]
pub struct SupportBuf {
    terms: [(u32, f64); 4], // tag in the high bit: exterior slots offset by EXT_TAG
    n: u8,
}

const EXT_TAG: u32 = 1 << 31;

impl SupportBuf {
    #[inline]
    fn push(&mut self, s: Support, w: f64) {
        if w == 0.0 {
            return;
        }
        let code = match s {
            Support::Node(i) => i,
            Support::Ext(i) => i | EXT_TAG,
        };
        self.terms[self.n as usize] = (code, w);
        self.n += 1;
    }

    #[inline]
    pub fn iter(&self) -> impl Iterator<Item = (Support, f64)> + '_ {
        self.terms[..self.n as usize].iter().map(|&(code, w)| {
            if code & EXT_TAG != 0 {
                (Support::Ext(code & !EXT_TAG), w)
            } else {
                (Support::Node(code), w)
            }
        })
    }

    #[inline]
    pub fn dot(&self, nodal: &[f64], slots: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (s, w) in self.iter() {
            acc += w * match s {
                Support::Node(i) => nodal[i as usize],
                Support::Ext(i) => slots[i as usize],
            };
        }
        acc
    }
}

/// Decomposes the evaluation of a grid function at `x` into nodal/exterior
/// contributions. Interior points use multilinear interpolation; in the cells
/// cut by the boundary the interpolation target is the boundary trace implied
/// by the adjacent shell (1D exactly at the boundary point, 2D through ghost
/// lattice values).
pub fn eval_support(grid: &DomainGrid, ext: &ExteriorSpec, x: &[f64], buf: &mut SupportBuf) {
    buf.n = 0;
    let sd = grid.signed_distance(x);
    if sd <= 0.0 {
        buf.push(Support::Ext(ext.slot_at(grid.radius_from_center(x)) as u32), 1.0);
        return;
    }
    if grid.dim == 1 {
        let c = grid.center[0];
        let xi = (x[0] - c) / grid.h;
        let j = xi.floor() as i64;
        let left = grid.lattice_node(j, 0);
        let right = grid.lattice_node(j + 1, 0);
        let xl = c + grid.h * j as f64;
        match (left, right) {
            (Some(l), Some(r)) => {
                let t = (x[0] - xl) / grid.h;
                buf.push(Support::Node(l as u32), 1.0 - t);
                buf.push(Support::Node(r as u32), t);
            }
            (Some(l), None) => {
                // between the last node and the right boundary
                let b = c + grid.extent[0];
                let t = (x[0] - xl) / (b - xl);
                buf.push(Support::Node(l as u32), 1.0 - t);
                buf.push(Support::Ext(ext.slot_at(grid.extent[0]) as u32), t);
            }
            (None, Some(r)) => {
                let b = c - grid.extent[0];
                let xr = xl + grid.h;
                let t = (x[0] - b) / (xr - b);
                buf.push(Support::Ext(ext.slot_at(grid.extent[0]) as u32), 1.0 - t);
                buf.push(Support::Node(r as u32), t);
            }
            (None, None) => unreachable!("1D interior point with no interior cell endpoint"),
        }
    } else {
        let xi = (x[0] - grid.center[0]) / grid.h;
        let eta = (x[1] - grid.center[1]) / grid.h;
        let (j, k) = (xi.floor() as i64, eta.floor() as i64);
        let (t, u) = (xi - j as f64, eta - k as f64);
        let corners = [(j, k, (1.0 - t) * (1.0 - u)), (j + 1, k, t * (1.0 - u)),
                       (j, k + 1, (1.0 - t) * u), (j + 1, k + 1, t * u)];
        for (cj, ck, w) in corners {
            match grid.lattice_node(cj, ck) {
                Some(i) => buf.push(Support::Node(i as u32), w),
                None => {
                    let p = grid.lattice_point(cj, ck);
                    let rho = grid.radius_from_center(&p[..2]);
                    buf.push(Support::Ext(ext.slot_at(rho) as u32), w);
                }
            }
        }
    }
}

/// A function on R^n: nodal values inside the domain, shells outside.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: Arc<DomainGrid>,
    pub values: Vec<f64>,
    pub exterior: ExteriorSpec,
}

impl Field {
    pub fn new(grid: Arc<DomainGrid>, values: Vec<f64>, exterior: ExteriorSpec) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidField(format!(
                "expected {} nodal values, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("non-finite nodal value".into()));
        }
        exterior.validate(&grid)?;
        Ok(Self { grid, values, exterior })
    }

    /// Field sampled from a closure on the interior nodes.
    pub fn sample(
        grid: Arc<DomainGrid>,
        exterior: ExteriorSpec,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let values = (0..grid.n_nodes()).map(|i| f(grid.node(i))).collect();
        Self::new(grid, values, exterior)
    }

    pub fn constant(grid: Arc<DomainGrid>, value: f64, exterior: ExteriorSpec) -> Result<Self> {
        let n = grid.n_nodes();
        Self::new(grid, vec![value; n], exterior)
    }

    /// Evaluates the induced function anywhere in R^n (total).
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut buf = SupportBuf::default();
        eval_support(&self.grid, &self.exterior, x, &mut buf);
        buf.dot(&self.values, &self.exterior.slot_values())
    }

    /// Second difference f(x+y) + f(x-y) - 2 f(x).
    pub fn second_difference(&self, x: &[f64], y: &[f64]) -> f64 {
        let dim = self.grid.dim;
        let mut xp = [0.0; 2];
        let mut xm = [0.0; 2];
        for a in 0..dim {
            xp[a] = x[a] + y[a];
            xm[a] = x[a] - y[a];
        }
        self.eval(&xp[..dim]) + self.eval(&xm[..dim]) - 2.0 * self.eval(x)
    }

    /// Random smooth field: a low-pass trigonometric series with decaying
    /// random coefficients, sampled at the nodes.
    pub fn random_smooth(
        grid: Arc<DomainGrid>,
        exterior: ExteriorSpec,
        rng: &mut crate::rng::SplitMix64,
    ) -> Result<Self> {
        let dim = grid.dim;
        let modes = 6usize;
        let scale = std::f64::consts::PI / grid.extent[0];
        let mut coef = Vec::new();
        for k in 1..=modes {
            let damp = 1.0 / (k * k) as f64;
            coef.push((rng.next_normal() * damp, rng.next_normal() * damp));
        }
        let coef2: Vec<(f64, f64)> = if dim == 2 {
            (1..=modes)
                .map(|k| {
                    let damp = 1.0 / (k * k) as f64;
                    (rng.next_normal() * damp, rng.next_normal() * damp)
                })
                .collect()
        } else {
            Vec::new()
        };
        let offset = rng.next_normal();
        Self::sample(grid.clone(), exterior, move |x| {
            let mut v = offset;
            for (k, (a, b)) in coef.iter().enumerate() {
                let t = scale * (k + 1) as f64 * x[0];
                v += a * t.sin() + b * t.cos();
            }
            for (k, (a, b)) in coef2.iter().enumerate() {
                let t = scale * (k + 1) as f64 * x[1];
                v += a * t.sin() + b * t.cos();
            }
            v
        })
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
