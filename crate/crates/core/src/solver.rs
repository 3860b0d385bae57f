//! Steady states of M[u] + a(x) (u+)^q = 0 with prescribed exterior data:
//! a monotone explicit pseudo-time scheme, Howard policy iteration for the
//! linear extremal Dirichlet solves, inverse power iteration for the principal
//! eigenpair, and the sub/supersolution sandwich.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::ExteriorSpec;
use crate::field::Field;
use crate::grid::{build_grid, DomainGrid, DomainKind};
use crate::kernel::{ExtremalSign, KernelSpec, PolicyField};
use crate::operator::OperatorAssembly;

/// The sublinear Dirichlet problem M^sign[u] + a(x) (u+)^q = 0 in Omega,
/// u = g outside. The positive-part convention keeps the nonlinearity defined
/// when iterates cross zero and agrees with u^q wherever u >= 0.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Arc<DomainGrid>,
    pub kernel: KernelSpec,
    pub sign: ExtremalSign,
    /// weight a at the interior nodes
    pub weight_a: Vec<f64>,
    pub q: f64,
    pub exterior: ExteriorSpec,
}

impl Problem {
    pub fn new(
        grid: Arc<DomainGrid>,
        kernel: KernelSpec,
        sign: ExtremalSign,
        weight_a: Vec<f64>,
        q: f64,
        exterior: ExteriorSpec,
    ) -> Result<Self> {
        kernel.validate()?;
        if kernel.dim != grid.dim {
            return Err(Error::InvalidKernel(format!(
                "kernel dim {} does not match grid dim {}",
                kernel.dim, grid.dim
            )));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Config {
                key: "problem.q".into(),
                message: format!("q = {q} is outside the sublinear range (0, 1)"),
            });
        }
        if weight_a.len() != grid.n_nodes() {
            return Err(Error::InvalidField(format!(
                "weight a has {} values for {} nodes",
                weight_a.len(),
                grid.n_nodes()
            )));
        }
        if weight_a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("non-finite weight value".into()));
        }
        exterior.validate(&grid)?;
        Ok(Self { grid, kernel, sign, weight_a, q, exterior })
    }

    /// a(x) (u+)^q at one node.
    pub fn nonlinearity(&self, node: usize, u: f64) -> f64 {
        self.weight_a[node] * u.max(0.0).powf(self.q)
    }

    pub fn sup_a(&self) -> f64 {
        self.weight_a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn assemble(&self) -> Result<OperatorAssembly> {
        OperatorAssembly::new(self.grid.clone(), self.kernel.clone(), &self.exterior)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverConfig {
    /// Fraction of the monotonicity-limit time step.
    pub tau_factor: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub policy_max_outer: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tau_factor: 0.9, tol_residual: 1e-6, max_iter: 400_000, policy_max_outer: 60 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_factor > 0.0 && self.tau_factor <= 1.0) {
            return Err(Error::Config {
                key: "solver.tau_factor".into(),
                message: format!("tau_factor = {} must lie in (0, 1]", self.tau_factor),
            });
        }
        if !(self.tol_residual > 0.0) || self.max_iter == 0 || self.policy_max_outer == 0 {
            return Err(Error::Config {
                key: "solver".into(),
                message: "tolerances and iteration limits must be positive".into(),
            });
        }
        Ok(())
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Explicit marching u <- u + tau (M[u] + a (u+)^q), exterior frozen. The
/// step tau = tau_factor / (c_norm Lambda max_i sum_j w_j |S_j[i,i]|) keeps
/// every update monotone in the nodal values.
pub struct PseudoTimeStepper<'a> {
    problem: &'a Problem,
    asm: &'a OperatorAssembly,
    slots: Vec<f64>,
    pub u: Vec<f64>,
    pub tau: f64,
    residual: Vec<f64>,
}

impl<'a> PseudoTimeStepper<'a> {
    pub fn new(
        problem: &'a Problem,
        asm: &'a OperatorAssembly,
        cfg: &SolverConfig,
        init: Vec<f64>,
    ) -> Result<Self> {
        cfg.validate()?;
        if init.len() != problem.grid.n_nodes() {
            return Err(Error::InvalidField("initial iterate has wrong length".into()));
        }
        if !asm.compatible_exterior(&problem.exterior) {
            return Err(Error::InvalidExterior(
                "assembly was built for a different shell geometry".into(),
            ));
        }
        let bound = problem.kernel.c_norm * problem.kernel.big_lambda * asm.self_coeff_bound();
        let tau = cfg.tau_factor / bound;
        Ok(Self {
            problem,
            asm,
            slots: problem.exterior.slot_values(),
            u: init,
            tau,
            residual: Vec::new(),
        })
    }

    /// Residual M[u] + a (u+)^q of the current iterate; cached per node.
    pub fn compute_residual(&mut self) -> f64 {
        let mut r = self.asm.apply_extremal(&self.u, &self.slots, self.problem.sign);
        for (i, ri) in r.iter_mut().enumerate() {
            *ri += self.problem.nonlinearity(i, self.u[i]);
        }
        let m = sup_norm(&r);
        self.residual = r;
        m
    }

    /// One explicit update from the cached residual.
    pub fn advance(&mut self) {
        for (ui, ri) in self.u.iter_mut().zip(&self.residual) {
            *ui += self.tau * ri;
        }
    }

    pub fn node_residuals(&self) -> &[f64] {
        &self.residual
    }
}

#[derive(Debug, Clone)]
pub struct PseudoTimeSolution {
    pub field: Field,
    pub residual: f64,
    pub node_residuals: Vec<f64>,
    pub history: Vec<f64>,
    pub steps: usize,
    pub tau: f64,
}

/// Marches to the steady state from `init`; stops at tol_residual.
pub fn pseudo_time_solve(
    problem: &Problem,
    asm: &OperatorAssembly,
    cfg: &SolverConfig,
    init: Vec<f64>,
) -> Result<PseudoTimeSolution> {
    let mut stepper = PseudoTimeStepper::new(problem, asm, cfg, init)?;
    let mut history = Vec::new();
    let mut grow_streak = 0usize;
    let mut streak_base = f64::INFINITY;
    let mut prev = f64::INFINITY;
    for step in 0..=cfg.max_iter {
        let m = stepper.compute_residual();
        history.push(m);
        if m <= cfg.tol_residual {
            let field =
                Field::new(problem.grid.clone(), stepper.u.clone(), problem.exterior.clone())?;
            return Ok(PseudoTimeSolution {
                field,
                residual: m,
                node_residuals: stepper.residual.clone(),
                history,
                steps: step,
                tau: stepper.tau,
            });
        }
        if !m.is_finite() {
            return Err(Error::Instability { residual: m, window: 0 });
        }
        // instability = sustained explosive growth; slow transient creep
        // while a dip region settles is not (the monotone tau bound rules
        // out blowup from the linear part, so a 100x rebound means the
        // scheme is genuinely diverging)
        if m > prev {
            if grow_streak == 0 {
                streak_base = prev;
            }
            grow_streak += 1;
            if grow_streak >= 100 && m > 100.0 * streak_base {
                return Err(Error::Instability { residual: m, window: grow_streak });
            }
        } else {
            grow_streak = 0;
        }
        prev = m;
        stepper.advance();
    }
    let residual = *history.last().unwrap();
    Err(Error::NonConvergence { residual, steps: cfg.max_iter, history })
}

#[derive(Debug, Clone)]
pub struct PolicySolution {
    pub field: Field,
    pub residual: f64,
    pub outer_iterations: usize,
    pub policy: PolicyField,
    /// set when the outer loop cycled or hit its limit; the best iterate is
    /// returned
    pub warning: Option<String>,
}

fn policy_hash(mu: &PolicyField) -> u64 {
    let mut h = DefaultHasher::new();
    for v in &mu.mu {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Howard iteration for M^sign[u] = rhs with exterior data: freeze the
/// optimal policy, solve the dense linear system, repeat until the policy is
/// stable.
pub fn policy_iteration_solve(
    asm: &OperatorAssembly,
    sign: ExtremalSign,
    rhs: &[f64],
    exterior: &ExteriorSpec,
    cfg: &SolverConfig,
) -> Result<PolicySolution> {
    cfg.validate()?;
    if rhs.len() != asm.n_nodes() || rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidField("rhs must be finite with one value per node".into()));
    }
    if !asm.compatible_exterior(exterior) {
        return Err(Error::InvalidExterior(
            "assembly was built for a different shell geometry".into(),
        ));
    }
    let slots = exterior.slot_values();
    let n = asm.n_nodes();
    let zero = vec![0.0; n];
    let mut mu = asm.policy_for(&zero, &slots, sign);
    let mut seen = vec![policy_hash(&mu)];
    let mut best: Option<(f64, Vec<f64>, PolicyField, usize)> = None;

    for outer in 1..=cfg.policy_max_outer {
        let (a, b) = asm.policy_system(&mu, &slots);
        let rhs_vec = DVector::from_iterator(n, rhs.iter().zip(b.iter()).map(|(r, bi)| r - bi));
        let u = a.lu().solve(&rhs_vec).ok_or(Error::SingularSystem)?;
        let u: Vec<f64> = u.iter().cloned().collect();

        let swept = asm.apply_extremal(&u, &slots, sign);
        let residual =
            swept.iter().zip(rhs).fold(0.0f64, |m, (s, r)| m.max((s - r).abs()));
        if best.as_ref().is_none_or(|(br, ..)| residual < *br) {
            best = Some((residual, u.clone(), mu.clone(), outer));
        }

        let mu_next = asm.policy_for(&u, &slots, sign);
        if mu_next == mu {
            let field = Field::new(asm.grid.clone(), u, exterior.clone())?;
            return Ok(PolicySolution {
                field,
                residual,
                outer_iterations: outer,
                policy: mu,
                warning: None,
            });
        }
        let h = policy_hash(&mu_next);
        if seen.contains(&h) {
            let (residual, u, policy, outer_iterations) = best.unwrap();
            let field = Field::new(asm.grid.clone(), u, exterior.clone())?;
            return Ok(PolicySolution {
                field,
                residual,
                outer_iterations,
                policy,
                warning: Some("policy cycle detected; best iterate returned".into()),
            });
        }
        seen.push(h);
        mu = mu_next;
    }
    let (residual, u, policy, outer_iterations) = best.ok_or(Error::SingularSystem)?;
    let field = Field::new(asm.grid.clone(), u, exterior.clone())?;
    Ok(PolicySolution {
        field,
        residual,
        outer_iterations,
        policy,
        warning: Some("policy iteration limit reached; best iterate returned".into()),
    })
}

/// Principal eigenpair approximation with ||phi_1||_inf = 1.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda1: f64,
    pub phi1: Field,
    /// max node |M[phi_1] + lambda_1 phi_1|
    pub residual: f64,
    pub iterations: usize,
}

/// Inverse power iteration phi <- normalize(solve(M u = -phi)) with zero
/// exterior data. The frozen-policy solves keep iterates positive, and the
/// sup normalization pins ||phi||_inf = 1 exactly.
pub fn principal_eigenpair(
    grid: Arc<DomainGrid>,
    kernel: &KernelSpec,
    sign: ExtremalSign,
    cfg: &SolverConfig,
) -> Result<EigenPair> {
    cfg.validate()?;
    let ext = ExteriorSpec::zero(&grid);
    let asm = OperatorAssembly::new(grid.clone(), kernel.clone(), &ext)?;
    let slots = ext.slot_values();
    let n = grid.n_nodes();

    // positive initial shape with the right boundary decay
    let mut phi: Vec<f64> = (0..n).map(|i| grid.distance(i).powf(kernel.s)).collect();
    let m0 = sup_norm(&phi);
    phi.iter_mut().for_each(|v| *v /= m0);
    let mut lambda = 0.0;

    const MAX_EIGEN_ITERS: usize = 300;
    for it in 1..=MAX_EIGEN_ITERS {
        let rhs: Vec<f64> = phi.iter().map(|v| -v).collect();
        let sol = policy_iteration_solve(&asm, sign, &rhs, &ext, cfg)?;
        let norm = sup_norm(&sol.field.values);
        if !(norm > 0.0) {
            return Err(Error::EigenNonConvergence { residual: f64::NAN });
        }
        lambda = 1.0 / norm;
        let next: Vec<f64> = sol.field.values.iter().map(|v| v / norm).collect();
        let swept = asm.apply_extremal(&next, &slots, sign);
        let residual = swept
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (op, ph)| m.max((op + lambda * ph).abs()));
        phi = next;
        if residual <= cfg.tol_residual {
            let phi1 = Field::new(grid, phi, ext)?;
            return Ok(EigenPair { lambda1: lambda, phi1, residual, iterations: it });
        }
    }
    let swept = asm.apply_extremal(&phi, &slots, sign);
    let residual = swept
        .iter()
        .zip(&phi)
        .fold(0.0f64, |m, (op, ph)| m.max((op + lambda * ph).abs()));
    Err(Error::EigenNonConvergence { residual })
}

/// Positive ball used for the subsolution: center node, radius, min of a.
#[derive(Debug, Clone, Serialize)]
pub struct PositiveBall {
    pub center: Vec<f64>,
    pub radius: f64,
    pub a0: f64,
    /// true when a > 0 on the whole grid and the ball is the inscribed ball
    pub whole_domain: bool,
}

/// Largest grid-inscribed ball in {a > 0}.
pub fn find_positive_ball(grid: &DomainGrid, weight_a: &[f64]) -> Result<PositiveBall> {
    let n = grid.n_nodes();
    let negative: Vec<usize> = (0..n).filter(|&i| weight_a[i] <= 0.0).collect();
    if negative.len() == n {
        return Err(Error::EmptyPositivitySet);
    }
    if negative.is_empty() {
        let center = grid.center.clone();
        let radius = grid.inradius();
        let a0 = weight_a.iter().cloned().fold(f64::INFINITY, f64::min);
        return Ok(PositiveBall { center, radius, a0, whole_domain: true });
    }
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        if weight_a[i] <= 0.0 {
            continue;
        }
        let x = grid.node(i);
        let mut r = grid.distance(i);
        for &jn in &negative {
            let y = grid.node(jn);
            let d = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            r = r.min(d);
        }
        if best.is_none_or(|(br, _)| r > br) {
            best = Some((r, i));
        }
    }
    let (radius, ci) = best.ok_or(Error::EmptyPositivitySet)?;
    let center = grid.node(ci).to_vec();
    let mut a0 = f64::INFINITY;
    for i in 0..n {
        let x = grid.node(i);
        let d = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if d < radius {
            a0 = a0.min(weight_a[i]);
        }
    }
    Ok(PositiveBall { center, radius, a0, whole_domain: false })
}

/// Grid for the positive ball with the same spacing; node positions coincide
/// with parent nodes where the ball overlaps (both lattices sit on nodes).
fn ball_grid(parent: &DomainGrid, ball: &PositiveBall) -> Result<Arc<DomainGrid>> {
    if ball.whole_domain && matches!(parent.kind, DomainKind::Interval | DomainKind::Disk) {
        return Ok(Arc::new(parent.clone()));
    }
    let kind = if parent.dim == 1 { DomainKind::Interval } else { DomainKind::Disk };
    Ok(Arc::new(build_grid(
        parent.dim,
        kind,
        &[ball.radius],
        &ball.center,
        parent.h,
        parent.r_trunc,
    )?))
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichCertificate {
    pub epsilon: f64,
    pub k: f64,
    pub lambda1: f64,
    pub a0: f64,
    pub ball_center: Vec<f64>,
    pub ball_radius: f64,
    /// min over nodes of u - lower (subsolution side)
    pub lower_margin: f64,
    /// min over nodes of upper - u (supersolution side)
    pub upper_margin: f64,
    pub residual: f64,
    /// tolerance the margins are compared against: tol + 2 h^s
    pub margin_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

#[derive(Debug)]
pub struct SandwichResult {
    pub solution: Field,
    pub lower: Field,
    pub upper: Field,
    pub certificate: SandwichCertificate,
    pub history: Vec<f64>,
}

/// Existence via the sub/supersolution pair: eps phi_1 on the positive ball
/// below, k Psi above with Psi the extremal solve of M[Psi] = -||a||_inf and
/// exterior g, then pseudo-time descent from the supersolution. Margin
/// violations are recorded in the certificate, not fatal.
pub fn existence_sandwich(
    problem: &Problem,
    asm: &OperatorAssembly,
    cfg: &SolverConfig,
) -> Result<SandwichResult> {
    let grid = &problem.grid;
    let ball = find_positive_ball(grid, &problem.weight_a)?;
    let bgrid = ball_grid(grid, &ball)?;
    let pair = principal_eigenpair(bgrid, &problem.kernel, problem.sign, cfg)?;
    let one_minus_q = 1.0 - problem.q;
    let epsilon = (ball.a0 / pair.lambda1).powf(1.0 / one_minus_q);

    // lower barrier: eps phi_1 inside the ball, zero on the rest of Omega
    let lower_values: Vec<f64> = (0..grid.n_nodes())
        .map(|i| {
            let x = grid.node(i);
            let d = x
                .iter()
                .zip(&ball.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d < ball.radius {
                epsilon * pair.phi1.eval(x)
            } else {
                0.0
            }
        })
        .collect();
    let lower = Field::new(grid.clone(), lower_values, problem.exterior.clone())?;

    // supersolution: k Psi with M[Psi] = -||a||_inf, Psi = g outside
    let sup_a = problem.sup_a();
    let rhs = vec![-sup_a; grid.n_nodes()];
    let psi = policy_iteration_solve(asm, problem.sign, &rhs, &problem.exterior, cfg)?;
    let sup_psi = psi.field.values.iter().cloned().fold(0.0f64, f64::max);
    let k = 1.0f64.max(sup_psi.powf(problem.q / one_minus_q));
    let upper_values: Vec<f64> = psi.field.values.iter().map(|v| k * v).collect();
    let upper = Field::new(grid.clone(), upper_values.clone(), problem.exterior.clone())?;

    let run = pseudo_time_solve(problem, asm, cfg, upper_values)?;

    let lower_margin = run
        .field
        .values
        .iter()
        .zip(&lower.values)
        .map(|(u, l)| u - l)
        .fold(f64::INFINITY, f64::min);
    let upper_margin = run
        .field
        .values
        .iter()
        .zip(&upper.values)
        .map(|(u, hi)| hi - u)
        .fold(f64::INFINITY, f64::min);
    let margin_tol = cfg.tol_residual + 2.0 * grid.h.powf(problem.kernel.s);
    let violation = if lower_margin < -margin_tol {
        Some(format!("subsolution margin {lower_margin} below -{margin_tol}"))
    } else if upper_margin < -margin_tol {
        Some(format!("supersolution margin {upper_margin} below -{margin_tol}"))
    } else {
        None
    };
    let certificate = SandwichCertificate {
        epsilon,
        k,
        lambda1: pair.lambda1,
        a0: ball.a0,
        ball_center: ball.center.clone(),
        ball_radius: ball.radius,
        lower_margin,
        upper_margin,
        residual: run.residual,
        margin_tol,
        violation,
    };
    Ok(SandwichResult { solution: run.field, lower, upper, certificate, history: run.history })
}

/// Deterministic "maximal solution" solve used by the experiments: descend
/// from k Psi+ where Psi+ uses the positive part of the exterior data, which
/// dominates every solution of the signed problem.
pub fn maximal_solution_solve(
    problem: &Problem,
    asm: &OperatorAssembly,
    cfg: &SolverConfig,
) -> Result<PseudoTimeSolution> {
    let gplus = problem.exterior.positive_part();
    let asm_plus;
    let asm_for_psi = if asm.compatible_exterior(&gplus) {
        asm
    } else {
        asm_plus = OperatorAssembly::new(problem.grid.clone(), problem.kernel.clone(), &gplus)?;
        &asm_plus
    };
    let rhs = vec![-problem.sup_a(); problem.grid.n_nodes()];
    let psi = policy_iteration_solve(asm_for_psi, problem.sign, &rhs, &gplus, cfg)?;
    let sup_psi = psi.field.values.iter().cloned().fold(0.0f64, f64::max);
    let k = 1.0f64.max(sup_psi.powf(problem.q / (1.0 - problem.q)));
    let init: Vec<f64> = psi.field.values.iter().map(|v| k * v).collect();
    pseudo_time_solve(problem, asm, cfg, init)
}

/// Per-node residual M^sign[u] + a (u+)^q, by the direct evaluation path.
pub fn residual(problem: &Problem, u: &Field) -> Result<Vec<f64>> {
    let mut r = crate::operator::operator_apply(u, problem.sign, &problem.kernel)?;
    for (i, ri) in r.iter_mut().enumerate() {
        *ri += problem.nonlinearity(i, u.values[i]);
    }
    Ok(r)
}
