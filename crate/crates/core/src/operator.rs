//! Linear operators of the kernel class and the extremal envelopes M+ / M-.
//!
//! A directional integral I_j(x) integrates the second difference along the
//! antipodal pair +-theta_j against r^{-1-2s} dr. Because mu(theta) ranges
//! freely over [lambda, Lambda] per direction, the sup/inf over the class
//! decouples direction by direction:
//!     M+[u](x) = c_norm sum_j w_j (Lambda I_j^+ - lambda I_j^-),
//! and M- swaps the roles of lambda and Lambda. Given the I_j this is exact,
//! which is what makes policy iteration and the bracketing tests tight.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::ExteriorSpec;
use crate::field::{eval_support, Field, Support, SupportBuf};
use crate::grid::DomainGrid;
use crate::kernel::{ExtremalSign, KernelSpec, PolicyField};
use crate::quadrature::{radial_quadrature, RadialQuad};

/// Receives the affine contributions of one directional integral.
trait Accum {
    fn add(&mut self, w: f64, support: &SupportBuf);
    fn add_slot(&mut self, w: f64, slot: usize);
}

/// Immediate evaluation against a concrete field.
struct ValueAccum<'a> {
    nodal: &'a [f64],
    slots: &'a [f64],
    value: f64,
}

impl Accum for ValueAccum<'_> {
    #[inline]
    fn add(&mut self, w: f64, support: &SupportBuf) {
        self.value += w * support.dot(self.nodal, self.slots);
    }
    #[inline]
    fn add_slot(&mut self, w: f64, slot: usize) {
        self.value += w * self.slots[slot];
    }
}

/// Coefficient accumulation for assembly.
struct RowAccum<'a> {
    node_coeff: &'a mut [f64],
    touched: &'a mut Vec<u32>,
    ext_coeff: &'a mut [f64],
}

impl Accum for RowAccum<'_> {
    #[inline]
    fn add(&mut self, w: f64, support: &SupportBuf) {
        for (s, sw) in support.iter() {
            match s {
                Support::Node(i) => {
                    let i = i as usize;
                    if self.node_coeff[i] == 0.0 {
                        self.touched.push(i as u32);
                    }
                    self.node_coeff[i] += w * sw;
                }
                Support::Ext(k) => self.ext_coeff[k as usize] += w * sw,
            }
        }
    }
    #[inline]
    fn add_slot(&mut self, w: f64, slot: usize) {
        self.ext_coeff[slot] += w;
    }
}

fn check_tail_growth(ext: &ExteriorSpec, s: f64) -> Result<()> {
    if let Some((_, alpha)) = ext.tail_growth {
        if alpha >= 2.0 * s {
            return Err(Error::TailDivergence { alpha, two_s: 2.0 * s });
        }
    }
    Ok(())
}

/// Runs the radial quadrature for one direction, feeding the accumulator the
/// three terms of the second difference at every point plus the closed-form
/// tail where both rays see the far constant.
fn directional_core(
    grid: &DomainGrid,
    ext: &ExteriorSpec,
    quad: &RadialQuad,
    x: &[f64],
    theta: &[f64],
    s: f64,
    acc: &mut impl Accum,
) {
    let dim = grid.dim;
    let mut self_support = SupportBuf::default();
    eval_support(grid, ext, x, &mut self_support);
    let mut buf = SupportBuf::default();
    let mut xp = [0.0; 2];
    let mut xm = [0.0; 2];
    let two_s = 2.0 * s;
    quad.for_each_point(two_s, |r, w| {
        for a in 0..dim {
            xp[a] = x[a] + r * theta[a];
            xm[a] = x[a] - r * theta[a];
        }
        eval_support(grid, ext, &xp[..dim], &mut buf);
        acc.add(w, &buf);
        eval_support(grid, ext, &xm[..dim], &mut buf);
        acc.add(w, &buf);
        acc.add(-2.0 * w, &self_support);
    });
    let tail = quad.tail_mass(two_s);
    let far_slot = ext.n_slots() - 1;
    acc.add_slot(2.0 * tail, far_slot);
    acc.add(-2.0 * tail, &self_support);
}

/// I(x, theta) = int_0^inf delta(x, r theta) r^{-1-2s} dr for an arbitrary
/// unit direction, with the kernel's radial rule.
pub fn directional_integral(f: &Field, x: &[f64], theta: &[f64], k: &KernelSpec) -> Result<f64> {
    check_tail_growth(&f.exterior, k.s)?;
    let quad = radial_quadrature(&f.grid, &f.exterior.radii(), x, theta, &k.radial);
    let slots = f.exterior.slot_values();
    let mut acc = ValueAccum { nodal: &f.values, slots: &slots, value: 0.0 };
    directional_core(&f.grid, &f.exterior, &quad, x, theta, k.s, &mut acc);
    Ok(acc.value)
}

/// All per-direction integrals of the kernel's direction set at `x`.
pub fn directional_integrals(f: &Field, x: &[f64], k: &KernelSpec) -> Result<Vec<f64>> {
    check_tail_growth(&f.exterior, k.s)?;
    let slots = f.exterior.slot_values();
    let edges = f.exterior.radii();
    (0..k.n_dirs())
        .map(|j| {
            let theta = k.direction(j);
            let quad = radial_quadrature(&f.grid, &edges, x, theta, &k.radial);
            let mut acc = ValueAccum { nodal: &f.values, slots: &slots, value: 0.0 };
            directional_core(&f.grid, &f.exterior, &quad, x, theta, k.s, &mut acc);
            Ok(acc.value)
        })
        .collect()
}

/// Extremal combination of per-direction integrals.
pub fn combine_extremal(integrals: &[f64], sign: ExtremalSign, k: &KernelSpec) -> f64 {
    let (up, down) = match sign {
        ExtremalSign::Plus => (k.big_lambda, k.lambda),
        ExtremalSign::Minus => (k.lambda, k.big_lambda),
    };
    let mut acc = 0.0;
    for (j, &i_j) in integrals.iter().enumerate() {
        let mu = if i_j > 0.0 { up } else { down };
        acc += k.weights[j] * mu * i_j;
    }
    k.c_norm * acc
}

/// Per-direction optimizer realizing the extremal value; ties take lambda.
pub fn optimal_mu(i_j: f64, sign: ExtremalSign, k: &KernelSpec) -> f64 {
    match sign {
        ExtremalSign::Plus => {
            if i_j > 0.0 {
                k.big_lambda
            } else {
                k.lambda
            }
        }
        ExtremalSign::Minus => {
            if i_j < 0.0 {
                k.big_lambda
            } else {
                k.lambda
            }
        }
    }
}

/// M+ or M- at a single interior node.
pub fn eval_extremal(f: &Field, x: &[f64], sign: ExtremalSign, k: &KernelSpec) -> Result<f64> {
    let integrals = directional_integrals(f, x, k)?;
    Ok(combine_extremal(&integrals, sign, k))
}

/// L_mu at a node of the grid; `x` must be an interior node so the policy row
/// is well defined.
pub fn eval_linear(f: &Field, x: &[f64], mu: &PolicyField, k: &KernelSpec) -> Result<f64> {
    mu.validate(k)?;
    let node = f
        .grid
        .node_at(x)
        .ok_or_else(|| Error::NotANode(x.to_vec()))?;
    let integrals = directional_integrals(f, x, k)?;
    let mut acc = 0.0;
    for (j, &i_j) in integrals.iter().enumerate() {
        acc += k.weights[j] * mu.at(node, j) * i_j;
    }
    Ok(k.c_norm * acc)
}

/// The pointwise optimal policy for the whole grid.
pub fn optimal_policy(f: &Field, sign: ExtremalSign, k: &KernelSpec) -> Result<PolicyField> {
    check_tail_growth(&f.exterior, k.s)?;
    let n = f.grid.n_nodes();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let integrals = directional_integrals(f, f.grid.node(i), k).expect("validated above");
            integrals.iter().map(|&v| optimal_mu(v, sign, k)).collect()
        })
        .collect();
    let mut mu = Vec::with_capacity(n * k.n_dirs());
    for row in rows {
        mu.extend(row);
    }
    Ok(PolicyField { n_dirs: k.n_dirs(), mu })
}

/// Whole-field sweep of the extremal operator (direct, unassembled path).
pub fn operator_apply(f: &Field, sign: ExtremalSign, k: &KernelSpec) -> Result<Vec<f64>> {
    check_tail_growth(&f.exterior, k.s)?;
    let n = f.grid.n_nodes();
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let integrals = directional_integrals(f, f.grid.node(i), k).expect("validated above");
            combine_extremal(&integrals, sign, k)
        })
        .collect();
    if let Some(node) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node });
    }
    Ok(out)
}

/// One direction of the assembled operator: a sparse matrix over interior
/// nodes plus coefficients against the exterior value slots, so that
/// I_j = S_j u + E_j g for any values u, g on the same geometry.
struct DirMatrix {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    /// n_nodes x n_slots, row-major
    ext: Vec<f64>,
}

impl DirMatrix {
    fn row_apply(&self, i: usize, nodal: &[f64], slots: &[f64], n_slots: usize) -> f64 {
        let mut acc = 0.0;
        for t in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc += self.vals[t] * nodal[self.cols[t] as usize];
        }
        let e = &self.ext[i * n_slots..(i + 1) * n_slots];
        for (c, g) in e.iter().zip(slots) {
            acc += c * g;
        }
        acc
    }

    fn diag(&self, i: usize) -> f64 {
        for t in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.cols[t] as usize == i {
                return self.vals[t];
            }
        }
        0.0
    }
}

/// The operator assembled once per (grid, kernel, exterior geometry): every
/// directional integral is affine in the nodal values and shell values, so
/// sweeps become matrix-vector products and the policy-frozen linear operator
/// is available as a dense matrix for direct solves.
pub struct OperatorAssembly {
    pub grid: Arc<DomainGrid>,
    pub kernel: KernelSpec,
    ext_geometry: ExteriorSpec,
    n_slots: usize,
    dirs: Vec<DirMatrix>,
}

impl OperatorAssembly {
    pub fn new(grid: Arc<DomainGrid>, kernel: KernelSpec, exterior: &ExteriorSpec) -> Result<Self> {
        kernel.validate()?;
        exterior.validate(&grid)?;
        check_tail_growth(exterior, kernel.s)?;
        let n = grid.n_nodes();
        let n_slots = exterior.n_slots();
        let edges = exterior.radii();
        let dirs = (0..kernel.n_dirs())
            .map(|j| {
                let theta = kernel.direction(j).to_vec();
                let rows: Vec<(Vec<u32>, Vec<f64>, Vec<f64>)> = (0..n)
                    .into_par_iter()
                    .map_init(
                        || (vec![0.0f64; n], Vec::<u32>::new()),
                        |(scratch, touched), i| {
                            let x = grid.node(i);
                            let quad = radial_quadrature(&grid, &edges, x, &theta, &kernel.radial);
                            let mut ext = vec![0.0; n_slots];
                            {
                                let mut acc = RowAccum {
                                    node_coeff: scratch,
                                    touched,
                                    ext_coeff: &mut ext,
                                };
                                directional_core(&grid, exterior, &quad, x, &theta, kernel.s, &mut acc);
                            }
                            touched.sort_unstable();
                            let mut cols = Vec::with_capacity(touched.len());
                            let mut vals = Vec::with_capacity(touched.len());
                            for &c in touched.iter() {
                                let v = scratch[c as usize];
                                scratch[c as usize] = 0.0;
                                if v != 0.0 {
                                    cols.push(c);
                                    vals.push(v);
                                }
                            }
                            touched.clear();
                            (cols, vals, ext)
                        },
                    )
                    .collect();
                let mut row_ptr = Vec::with_capacity(n + 1);
                row_ptr.push(0);
                let mut cols = Vec::new();
                let mut vals = Vec::new();
                let mut ext = Vec::with_capacity(n * n_slots);
                for (c, v, e) in rows {
                    cols.extend_from_slice(&c);
                    vals.extend_from_slice(&v);
                    ext.extend_from_slice(&e);
                    row_ptr.push(cols.len());
                }
                DirMatrix { row_ptr, cols, vals, ext }
            })
            .collect();
        Ok(Self { grid, kernel, ext_geometry: exterior.clone(), n_slots, dirs })
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    pub fn compatible_exterior(&self, ext: &ExteriorSpec) -> bool {
        self.ext_geometry.same_geometry(ext)
    }

    /// I_j for every node.
    pub fn directional_values(&self, j: usize, nodal: &[f64], slots: &[f64], out: &mut [f64]) {
        let d = &self.dirs[j];
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = d.row_apply(i, nodal, slots, self.n_slots);
        });
    }

    /// Extremal sweep M+/M- over all nodes.
    pub fn apply_extremal(&self, nodal: &[f64], slots: &[f64], sign: ExtremalSign) -> Vec<f64> {
        let k = &self.kernel;
        let (up, down) = match sign {
            ExtremalSign::Plus => (k.big_lambda, k.lambda),
            ExtremalSign::Minus => (k.lambda, k.big_lambda),
        };
        let n = self.n_nodes();
        let mut out = vec![0.0; n];
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = 0.0;
            for (j, d) in self.dirs.iter().enumerate() {
                let i_j = d.row_apply(i, nodal, slots, self.n_slots);
                let mu = if i_j > 0.0 { up } else { down };
                acc += k.weights[j] * mu * i_j;
            }
            *o = k.c_norm * acc;
        });
        out
    }

    /// L_mu sweep for a frozen policy.
    pub fn apply_policy(&self, nodal: &[f64], slots: &[f64], mu: &PolicyField) -> Vec<f64> {
        let k = &self.kernel;
        let n = self.n_nodes();
        let mut out = vec![0.0; n];
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = 0.0;
            for (j, d) in self.dirs.iter().enumerate() {
                acc += k.weights[j] * mu.at(i, j) * d.row_apply(i, nodal, slots, self.n_slots);
            }
            *o = k.c_norm * acc;
        });
        out
    }

    /// Optimal policy for the field given by (nodal, slots).
    pub fn policy_for(&self, nodal: &[f64], slots: &[f64], sign: ExtremalSign) -> PolicyField {
        let k = &self.kernel;
        let n = self.n_nodes();
        let nd = k.n_dirs();
        let mut mu = vec![0.0; n * nd];
        mu.par_chunks_mut(nd).enumerate().for_each(|(i, row)| {
            for (j, d) in self.dirs.iter().enumerate() {
                let i_j = d.row_apply(i, nodal, slots, self.n_slots);
                row[j] = optimal_mu(i_j, sign, k);
            }
        });
        PolicyField { n_dirs: nd, mu }
    }

    /// Dense matrix A and exterior vector b with L_mu u = A u + b.
    pub fn policy_system(
        &self,
        mu: &PolicyField,
        slots: &[f64],
    ) -> (nalgebra::DMatrix<f64>, nalgebra::DVector<f64>) {
        let k = &self.kernel;
        let n = self.n_nodes();
        let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
        let mut b = nalgebra::DVector::<f64>::zeros(n);
        for (j, d) in self.dirs.iter().enumerate() {
            for i in 0..n {
                let scale = k.c_norm * k.weights[j] * mu.at(i, j);
                for t in d.row_ptr[i]..d.row_ptr[i + 1] {
                    a[(i, d.cols[t] as usize)] += scale * d.vals[t];
                }
                let e = &d.ext[i * self.n_slots..(i + 1) * self.n_slots];
                let mut acc = 0.0;
                for (c, g) in e.iter().zip(slots) {
                    acc += c * g;
                }
                b[i] += scale * acc;
            }
        }
        (a, b)
    }

    /// max_i sum_j w_j |S_j[i,i]|, the worst self-coefficient; the explicit
    /// pseudo-time step tau = tau_factor / (c_norm Lambda bound) keeps the
    /// scheme monotone.
    pub fn self_coeff_bound(&self) -> f64 {
        let n = self.n_nodes();
        (0..n)
            .map(|i| {
                self.dirs
                    .iter()
                    .enumerate()
                    .map(|(j, d)| self.kernel.weights[j] * d.diag(i).abs())
                    .sum::<f64>()
            })
            .fold(0.0f64, f64::max)
    }
}
