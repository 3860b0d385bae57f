//! Scenario-level checks: maximum-principle verdicts, Hopf quotients, weight
//! bounds, the exterior-tail hypothesis, the dead-core threshold search, the
//! negative-amplitude sweep, and free-boundary growth fits.

use serde::Serialize;

use crate::barrier::l1s_norm;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::DomainKind;
use crate::kernel::KernelSpec;
use crate::solver::{
    maximal_solution_solve, Problem, PseudoTimeSolution, SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StrictlyPositive,
    DeadCore,
    Trivial,
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfSegment {
    pub label: String,
    pub min_quotient: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmpReport {
    pub verdict: Verdict,
    /// nodes with u <= tol_zero
    pub dead_core: Vec<usize>,
    pub hopf_segments: Vec<HopfSegment>,
    /// overall min of u / d^s over the probe band
    pub hopf_min: f64,
    pub tol_zero: f64,
    pub probe_depth: f64,
}

fn segment_label(u: &Field, i: usize) -> String {
    let grid = &u.grid;
    let x = grid.node(i);
    match (grid.dim, grid.kind) {
        (1, _) => {
            if x[0] < grid.center[0] {
                "left".into()
            } else {
                "right".into()
            }
        }
        (_, DomainKind::Disk) => {
            let ang = (x[1] - grid.center[1]).atan2(x[0] - grid.center[0]);
            let sector = ((ang + std::f64::consts::PI) / (std::f64::consts::TAU / 8.0))
                .floor()
                .min(7.0) as usize;
            format!("sector_{sector}")
        }
        _ => {
            // box: label by the nearest side
            let dx0 = x[0] - (grid.center[0] - grid.extent[0]);
            let dx1 = grid.center[0] + grid.extent[0] - x[0];
            let dy0 = x[1] - (grid.center[1] - grid.extent[1]);
            let dy1 = grid.center[1] + grid.extent[1] - x[1];
            let m = dx0.min(dx1).min(dy0).min(dy1);
            if m == dx0 {
                "x_min".into()
            } else if m == dx1 {
                "x_max".into()
            } else if m == dy0 {
                "y_min".into()
            } else {
                "y_max".into()
            }
        }
    }
}

/// Dead-core detection and the Hopf boundary quotient u / d^s.
pub fn smp_check(u: &Field, s: f64, tol_zero: f64, probe_depth: f64) -> SmpReport {
    let grid = &u.grid;
    let n = grid.n_nodes();
    let dead_core: Vec<usize> = (0..n).filter(|&i| u.values[i] <= tol_zero).collect();
    let verdict = if dead_core.len() == n {
        Verdict::Trivial
    } else if dead_core.is_empty() {
        Verdict::StrictlyPositive
    } else {
        Verdict::DeadCore
    };

    let mut segments: Vec<HopfSegment> = Vec::new();
    let mut overall = f64::INFINITY;
    for i in 0..n {
        let d = grid.distance(i);
        if d <= probe_depth {
            let q = u.values[i] / d.powf(s);
            overall = overall.min(q);
            let label = segment_label(u, i);
            match segments.iter_mut().find(|seg| seg.label == label) {
                Some(seg) => {
                    seg.min_quotient = seg.min_quotient.min(q);
                    seg.nodes += 1;
                }
                None => segments.push(HopfSegment { label, min_quotient: q, nodes: 1 }),
            }
        }
    }
    SmpReport {
        verdict,
        dead_core,
        hopf_segments: segments,
        hopf_min: overall,
        tol_zero,
        probe_depth,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxLocalization {
    pub pass: bool,
    pub max_value: f64,
    /// every node attaining the max (within 1e-12 relative)
    pub argmax: Vec<usize>,
}

/// Checks that the maximum of u is attained where a > 0.
pub fn max_localization_check(u: &Field, weight_a: &[f64]) -> MaxLocalization {
    let max = u.max_value();
    let tol = 1e-12 * max.abs().max(1.0);
    let argmax: Vec<usize> = (0..u.values.len())
        .filter(|&i| u.values[i] >= max - tol)
        .collect();
    let pass = argmax.iter().all(|&i| weight_a[i] > 0.0);
    MaxLocalization { pass, max_value: max, argmax }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightBound {
    pub margin: f64,
    pub x0: Vec<f64>,
    pub a_at_x0: f64,
    pub u_at_x0: f64,
    pub c_n: f64,
    pub ellipticity_factor: f64,
}

/// Lower bound a(x0) >= 2 c_norm ell C_n u(x0)^{1-q} at the maximum point,
/// with C_n the closed-form tail integral over |y - x0| > R. The ellipticity
/// factor defaults to lambda (conservative); pass Lambda to reproduce the
/// aggressive form.
pub fn weight_bound_check(
    u: &Field,
    weight_a: &[f64],
    q: f64,
    kernel: &KernelSpec,
    r_ball: f64,
    ellipticity_factor: f64,
) -> Result<WeightBound> {
    let grid = &u.grid;
    let loc = max_localization_check(u, weight_a);
    let i0 = *loc.argmax.first().ok_or_else(|| Error::InvalidField("empty field".into()))?;
    let x0 = grid.node(i0).to_vec();
    // Omega must be well inside B_R(x0)
    let far_corner = match grid.kind {
        DomainKind::Interval => {
            let c = grid.center[0];
            (x0[0] - (c - grid.extent[0])).abs().max((c + grid.extent[0] - x0[0]).abs())
        }
        DomainKind::Disk => grid.radius_from_center(&x0) + grid.extent[0],
        DomainKind::Box => {
            let mut m = 0.0f64;
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    let cx = grid.center[0] + sx * grid.extent[0];
                    let cy = grid.center[1] + sy * grid.extent[1];
                    let d = ((x0[0] - cx).powi(2) + (x0[1] - cy).powi(2)).sqrt();
                    m = m.max(d);
                }
            }
            m
        }
    };
    if far_corner >= r_ball {
        return Err(Error::Config {
            key: "weight_bound.r".into(),
            message: format!(
                "domain reaches distance {far_corner} from the max point; need R > that"
            ),
        });
    }
    let sigma = if grid.dim == 1 { 2.0 } else { std::f64::consts::TAU };
    let c_n = sigma * r_ball.powf(-2.0 * kernel.s) / (2.0 * kernel.s);
    let u0 = u.values[i0];
    let margin = weight_a[i0]
        - 2.0 * kernel.c_norm * ellipticity_factor * c_n * u0.max(0.0).powf(1.0 - q);
    Ok(WeightBound {
        margin,
        x0,
        a_at_x0: weight_a[i0],
        u_at_x0: u0,
        c_n,
        ellipticity_factor,
    })
}

/// int_{R^n \ Omega} u(y) / |y - x0|^{n+2s} dy by per-ray closed forms over
/// the piecewise-constant exterior data. Exact in 1D; in 2D the radial
/// integrals are closed-form per ray and the angle is quadrature.
pub fn exterior_tail_check(u: &Field, x0: &[f64], s: f64) -> f64 {
    let grid = &u.grid;
    let dim = grid.dim;
    let two_s = 2.0 * s;
    let n_ang = 128usize;
    let (dirs, w_ang): (Vec<[f64; 2]>, f64) = if dim == 1 {
        (vec![[1.0, 0.0]], 1.0)
    } else {
        let w = std::f64::consts::PI / n_ang as f64;
        (
            (0..n_ang)
                .map(|j| {
                    let a = std::f64::consts::PI * j as f64 / n_ang as f64;
                    [a.cos(), a.sin()]
                })
                .collect(),
            w,
        )
    };

    let mut total = 0.0;
    for th in &dirs {
        for sigma in [1.0, -1.0] {
            // breakpoints along the ray x0 + sigma r theta
            let mut cuts: Vec<f64> = Vec::new();
            let mut v = [0.0; 2];
            for a in 0..dim {
                v[a] = x0[a] - grid.center[a];
            }
            let b: f64 = (0..dim).map(|a| v[a] * sigma * th[a]).sum();
            let v2: f64 = (0..dim).map(|a| v[a] * v[a]).sum();
            let mut edges = u.exterior.radii();
            edges.push(grid.extent[0]);
            if grid.kind == DomainKind::Box {
                for e in &grid.extent {
                    edges.push(*e);
                }
            }
            for rho in edges {
                let disc = b * b + rho * rho - v2;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    for r in [-b + sq, -b - sq] {
                        if r > 0.0 {
                            cuts.push(r);
                        }
                    }
                }
            }
            let r_star = grid.r_trunc + v2.sqrt();
            cuts.retain(|&r| r < r_star);
            cuts.push(r_star);
            cuts.push(0.0);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup_by(|b, a| *b - *a <= 1e-14);

            let ray_weight = if dim == 1 { 1.0 } else { w_ang };
            for w in cuts.windows(2) {
                let (ra, rb) = (w[0], w[1]);
                if rb - ra < 1e-14 {
                    continue;
                }
                let rm = 0.5 * (ra + rb);
                let mut y = [0.0; 2];
                for a in 0..dim {
                    y[a] = x0[a] + sigma * rm * th[a];
                }
                let y = &y[..dim];
                if grid.contains(y) {
                    continue;
                }
                let val = u.exterior.value_at_radius(grid.radius_from_center(y));
                if val == 0.0 || ra == 0.0 {
                    continue;
                }
                total += ray_weight * val * (ra.powf(-two_s) - rb.powf(-two_s)) / two_s;
            }
            // closed-form tail
            let val = u.exterior.far_value;
            total += ray_weight * val * r_star.powf(-two_s) / two_s;
        }
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderRow {
    pub m: f64,
    pub min_u: f64,
    pub sup_u: f64,
    pub dead_core_count: usize,
    pub residual: f64,
}

#[derive(Debug)]
pub struct ThresholdResult {
    pub m_star: f64,
    pub min_u_at_star: f64,
    pub ladder: Vec<LadderRow>,
    pub solution_at_star: PseudoTimeSolution,
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdConfig {
    pub m_lo: f64,
    pub m_hi: f64,
    pub tol_m: f64,
    /// which shell carries the value 1 - M
    pub m_shell: usize,
    pub coarse_steps: usize,
    pub tol_zero: f64,
}

fn problem_with_m(base: &Problem, m_shell: usize, m: f64) -> Problem {
    let mut p = base.clone();
    p.exterior.shells[m_shell].value = 1.0 - m;
    p
}

/// Bisection on M against min_Omega u_M for the distorted-exterior family
/// (shell `m_shell` takes the value 1 - M). Every solve descends from the
/// positive-part supersolution, so each row is the maximal solution.
pub fn threshold_search(
    base: &Problem,
    cfg: &SolverConfig,
    tcfg: &ThresholdConfig,
) -> Result<ThresholdResult> {
    if tcfg.m_shell >= base.exterior.shells.len() {
        return Err(Error::Config {
            key: "threshold.m_shell".into(),
            message: format!("shell index {} out of range", tcfg.m_shell),
        });
    }
    let asm = base.assemble()?;
    let mut ladder: Vec<LadderRow> = Vec::new();
    let mut solve_at = |m: f64| -> Result<(f64, PseudoTimeSolution)> {
        let p = problem_with_m(base, tcfg.m_shell, m);
        let run = maximal_solution_solve(&p, &asm, cfg)?;
        let min_u = run.field.min_value();
        ladder.push(LadderRow {
            m,
            min_u,
            sup_u: run.field.max_value(),
            dead_core_count: run.field.values.iter().filter(|&&v| v <= tcfg.tol_zero).count(),
            residual: run.residual,
        });
        Ok((min_u, run))
    };

    // coarse scan for the bracket
    let steps = tcfg.coarse_steps.max(2);
    let mut bracket: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let m = tcfg.m_lo + (tcfg.m_hi - tcfg.m_lo) * i as f64 / steps as f64;
        let (min_u, _run) = solve_at(m)?;
        if let Some((pm, pv)) = prev {
            if pv > 0.0 && min_u <= 0.0 {
                bracket = Some((pm, m));
                break;
            }
        } else if min_u <= 0.0 {
            return Err(Error::BracketFailure {
                m_lo: tcfg.m_lo,
                m_hi: tcfg.m_hi,
                f_lo: min_u,
                f_hi: min_u,
            });
        }
        prev = Some((m, min_u));
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| Error::BracketFailure {
        m_lo: tcfg.m_lo,
        m_hi: tcfg.m_hi,
        f_lo: prev.map(|p| p.1).unwrap_or(f64::NAN),
        f_hi: f64::NAN,
    })?;

    let mut star: Option<(f64, f64, PseudoTimeSolution)> = None;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (min_u, run) = solve_at(mid)?;
        let better = star.as_ref().is_none_or(|(_, bv, _)| min_u.abs() < bv.abs());
        if better {
            star = Some((mid, min_u, run));
        }
        if min_u.abs() <= tcfg.tol_zero {
            break;
        }
        if min_u > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tcfg.tol_m && star.as_ref().is_some_and(|(_, bv, _)| bv.abs() <= tcfg.tol_zero)
        {
            break;
        }
    }
    let (m_star, min_u_at_star, solution_at_star) =
        star.ok_or(Error::BracketFailure {
            m_lo: lo,
            m_hi: hi,
            f_lo: f64::NAN,
            f_hi: f64::NAN,
        })?;

    // the ladder must be decreasing in M up to solver noise
    ladder.sort_by(|a, b| a.m.partial_cmp(&b.m).unwrap());
    let guard = 10.0 * cfg.tol_residual;
    for w in ladder.windows(2) {
        if w[1].min_u > w[0].min_u + guard {
            return Err(Error::MonotonicityViolation {
                m: w[1].m,
                prev: w[0].min_u,
                curr: w[1].min_u,
            });
        }
    }
    Ok(ThresholdResult { m_star, min_u_at_star, ladder, solution_at_star })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub amplitude: f64,
    pub l1s_neg: f64,
    pub min_u: f64,
    pub verdict: Verdict,
    pub hopf_min: f64,
    pub residual: f64,
}

#[derive(Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// index of the first row that is not strictly positive
    pub onset_index: Option<usize>,
    pub single_transition: bool,
    pub onset_solution: Option<PseudoTimeSolution>,
}

/// Solves the family with shell `shell_idx` set to -amplitude and records the
/// verdict and the weighted norm of the negative part per row.
pub fn norm_sweep(
    base: &Problem,
    cfg: &SolverConfig,
    amplitudes: &[f64],
    shell_idx: usize,
    tol_zero: f64,
    probe_depth: f64,
) -> Result<SweepResult> {
    if shell_idx >= base.exterior.shells.len() {
        return Err(Error::Config {
            key: "sweep.shell".into(),
            message: format!("shell index {shell_idx} out of range"),
        });
    }
    let asm = base.assemble()?;
    let mut rows = Vec::new();
    let mut onset_index = None;
    let mut onset_solution = None;
    for (row_i, &amp) in amplitudes.iter().enumerate() {
        let mut p = base.clone();
        p.exterior.shells[shell_idx].value = -amp;
        let run = maximal_solution_solve(&p, &asm, cfg)?;
        let smp = smp_check(&run.field, p.kernel.s, tol_zero, probe_depth);
        let neg = Field::new(
            p.grid.clone(),
            run.field.values.iter().map(|v| (-v).max(0.0)).collect(),
            p.exterior.negative_part(),
        )?;
        let l1s_neg = l1s_norm(&neg, p.kernel.s);
        if smp.verdict != Verdict::StrictlyPositive && onset_index.is_none() {
            onset_index = Some(row_i);
            onset_solution = Some(run.clone());
        }
        rows.push(SweepRow {
            amplitude: amp,
            l1s_neg,
            min_u: run.field.min_value(),
            verdict: smp.verdict,
            hopf_min: smp.hopf_min,
            residual: run.residual,
        });
    }
    let single_transition = match onset_index {
        None => true,
        Some(k) => rows[k..].iter().all(|r| r.verdict != Verdict::StrictlyPositive),
    };
    Ok(SweepResult { rows, onset_index, single_transition, onset_solution })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub point: Vec<f64>,
    pub exponent: f64,
    pub samples: usize,
}

/// Least-squares slope of log u(y) against log |y - x| over positivity nodes
/// within `radius` of each touchable dead-core boundary node x.
pub fn growth_exponent_fit(
    u: &Field,
    dead_core: &[usize],
    radius: f64,
    tol_zero: f64,
) -> Result<Vec<GrowthFit>> {
    if dead_core.is_empty() {
        return Err(Error::InsufficientSamples { point: vec![], found: 0, needed: 4 });
    }
    let grid = &u.grid;
    let dim = grid.dim;
    let in_core = {
        let mut mask = vec![false; grid.n_nodes()];
        for &i in dead_core {
            mask[i] = true;
        }
        mask
    };
    // boundary core nodes: a lattice neighbor is a positivity node
    let mut boundary: Vec<usize> = Vec::new();
    for &i in dead_core {
        let x = grid.node(i);
        let j = ((x[0] - grid.center[0]) / grid.h).round() as i64;
        let k = if dim == 2 { ((x[1] - grid.center[1]) / grid.h).round() as i64 } else { 0 };
        let neighbors: &[(i64, i64)] =
            if dim == 1 { &[(-1, 0), (1, 0)] } else { &[(-1, 0), (1, 0), (0, -1), (0, 1)] };
        let touches = neighbors.iter().any(|(dj, dk)| {
            grid.lattice_node(j + dj, k + dk)
                .map(|nb| !in_core[nb] && u.values[nb] > tol_zero)
                .unwrap_or(false)
        });
        if touches {
            boundary.push(i);
        }
    }
    let mut fits = Vec::new();
    let mut worst: Option<(Vec<f64>, usize)> = None;
    for &bi in &boundary {
        let x = grid.node(bi);
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for i in 0..grid.n_nodes() {
            if in_core[i] || u.values[i] <= tol_zero {
                continue;
            }
            let y = grid.node(i);
            let d: f64 = (0..dim)
                .map(|a| (y[a] - x[a]) * (y[a] - x[a]))
                .sum::<f64>()
                .sqrt();
            if d > 0.0 && d <= radius {
                pts.push((d.ln(), u.values[i].ln()));
            }
        }
        if pts.len() < 4 {
            worst = Some((x.to_vec(), pts.len()));
            continue;
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        fits.push(GrowthFit { point: x.to_vec(), exponent: slope, samples: pts.len() });
    }
    if fits.is_empty() {
        let (point, found) = worst.unwrap_or((vec![], 0));
        return Err(Error::InsufficientSamples { point, found, needed: 4 });
    }
    Ok(fits)
}
