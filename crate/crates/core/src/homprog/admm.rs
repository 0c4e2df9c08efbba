//! Scaled-form ADMM on the split `δx - z = 0`:
//!
//! ```text
//! x^{k+1} = argmin_x Σ_i f_i(x_i) + (ρ/2) ‖δx - z^k + y^k‖²
//! z^{k+1} = argmin_z Σ_e U_e(z_e) + (ρ/2) ‖δx^{k+1} - z + y^k‖²
//! y^{k+1} = y^k + δx^{k+1} - z^{k+1}
//! ```
//!
//! The x-step is solved vertex by vertex, each agent holding its neighbors at
//! their previous values. That Jacobi splitting alone oscillates or diverges
//! on simple consensus problems, so each vertex adds a proximal term
//! `(τ_i/2) ‖x_i - x_i^k‖²` with `τ_i = ρ Σ_{e∋i} ‖F_{i→e}‖ ‖F_{j→e}‖`. This
//! dominates the off-diagonal coupling of `ρ δᵀδ` and vanishes at fixed
//! points, so the limit is the true minimizer.

use nalgebra::{DMatrix, DVector};

use super::{program_objective, HomologicalProgram, ProgramMode};
use crate::cochain::{Cochain0, Cochain1};
use crate::convex::{EdgePotential, NodeObjective, ProxQuery};
use crate::error::{Result, SheafError};
use crate::graph::EdgeSide;
use crate::linalg::{solve_psd_near, LinearMap};
use crate::operators::{apply_coboundary, edge_difference};
use crate::sheaf::CellularSheaf;

/// Proximal damping used in the per-vertex x-update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XUpdateDamping {
    /// `τ_i = ρ Σ_{e∋i} ‖F_{i→e}‖ ‖F_{j→e}‖`.
    #[default]
    Gershgorin,
    /// Undamped Jacobi x-update. Not convergent in general; kept for comparison.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig {
    pub rho: f64,
    pub max_iters: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    /// `0` solves the z-update by the closed-form prox; otherwise this many
    /// Euler steps of the edge flow `ẇ = -∇U(w) - ρ(w - v)`.
    pub inner_diffusion_steps: usize,
    pub inner_step: f64,
    pub seed: u64,
    pub damping: XUpdateDamping,
    /// Store the iterate every this many iterations (`0` = never).
    pub snapshot_every: usize,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iters: 10_000,
            primal_tol: 1e-8,
            dual_tol: 1e-8,
            inner_diffusion_steps: 0,
            inner_step: 0.1,
            seed: 0,
            damping: XUpdateDamping::Gershgorin,
            snapshot_every: 0,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self, prog: &HomologicalProgram) -> Result<()> {
        let bad = |m: String| Err(SheafError::InvalidArgument(m));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if self.inner_diffusion_steps > 0 {
            if !(self.inner_step > 0.0 && self.inner_step.is_finite()) {
                return bad(format!("inner_step must be positive, got {}", self.inner_step));
            }
            for (e, p) in prog.edge_potentials().iter().enumerate() {
                if p.is_differentiable() && self.inner_step * (p.gradient_lipschitz() + self.rho) >= 2.0 {
                    return bad(format!(
                        "inner_step {} is unstable on edge {e}; need inner_step * (stiffness + rho) < 2",
                        self.inner_step
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Primal, edge and scaled dual variables.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: Cochain0,
    pub z: Cochain1,
    pub y: Cochain1,
}

impl IterateState {
    /// Start state: `z⁰ = δx⁰`, `y⁰ = 0`.
    pub fn initial(sheaf: &CellularSheaf, x0: Cochain0) -> Result<Self> {
        let z = apply_coboundary(sheaf, &x0)?;
        Ok(Self {
            y: Cochain1::zeros(sheaf),
            z,
            x: x0,
        })
    }

    /// Unscaled multiplier `λ = ρ y`.
    pub fn unscaled_dual(&self, rho: f64) -> Cochain1 {
        self.y.scale(rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
}

/// `primal = ‖δx_next - z_next‖₂`, `dual = ρ ‖z_next - z_prev‖₂`.
pub fn compute_residuals(
    prog: &HomologicalProgram,
    prev: &IterateState,
    next: &IterateState,
    rho: f64,
) -> Result<Residuals> {
    let dx = apply_coboundary(prog.sheaf(), &next.x)?;
    next.z.check_conforms(prog.sheaf())?;
    prev.z.check_conforms(prog.sheaf())?;
    Ok(Residuals {
        primal: dx.sub(&next.z).norm(),
        dual: rho * next.z.sub(&prev.z).norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    /// The primal residual stalled above tolerance while the iterates stopped
    /// moving: the hard constraints admit no common point.
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iter: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `‖x^{k+1} - x^k‖₂`.
    pub x_change: f64,
    /// Program objective at `x^{k+1}`; for hard-constraint programs only the
    /// node part `Σ f_i(x_i)` (the constraint is tracked by the primal residual).
    pub objective: f64,
    pub snapshot: Option<IterateState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmOutcome {
    pub x: Cochain0,
    pub state: IterateState,
    pub trace: SolveTrace,
}

/// ADMM from `x⁰ = 0`.
pub fn admm_solve(prog: &HomologicalProgram, cfg: &AdmmConfig) -> Result<AdmmOutcome> {
    admm_solve_from(prog, cfg, &Cochain0::zeros(prog.sheaf()))
}

pub fn admm_solve_from(prog: &HomologicalProgram, cfg: &AdmmConfig, x0: &Cochain0) -> Result<AdmmOutcome> {
    cfg.validate(prog)?;
    let sheaf = prog.sheaf();
    x0.check_conforms(sheaf)?;
    let n = sheaf.graph().vertex_count();
    let taus: Vec<f64> = (0..n).map(|v| vertex_damping(sheaf, v, cfg)).collect();
    let mut state = IterateState::initial(sheaf, x0.clone())?;
    let mut monitor = StopMonitor::new(cfg, prog);
    let mut records = Vec::new();
    let mut status = SolveStatus::MaxIters;

    for iter in 1..=cfg.max_iters {
        // neighbor restrictions of the previous iterate
        let x_blocks = (0..n)
            .map(|v| {
                let terms = sheaf.graph().incident(v).iter().map(|inc| {
                    let nb = sheaf
                        .restriction(inc.edge, inc.side.opposite())
                        .apply(state.x.block(inc.neighbor));
                    let target = edge_target(inc.side, &nb, state.z.block(inc.edge), state.y.block(inc.edge));
                    (sheaf.restriction(inc.edge, inc.side), target)
                });
                primal_update(&prog.node_objectives()[v], state.x.block(v), cfg.rho, taus[v], terms)
            })
            .collect::<Result<Vec<_>>>()?;
        let x_next = Cochain0::from_blocks(sheaf, x_blocks)?;

        let mut z_blocks = Vec::with_capacity(sheaf.graph().edge_count());
        let mut y_blocks = Vec::with_capacity(sheaf.graph().edge_count());
        for e in sheaf.graph().edges() {
            let d = edge_difference(sheaf, e.id, x_next.block(e.tail), x_next.block(e.head));
            let (z, y) = edge_update(
                &prog.edge_potentials()[e.id],
                &d,
                state.y.block(e.id),
                state.z.block(e.id),
                cfg,
            )?;
            z_blocks.push(z);
            y_blocks.push(y);
        }
        let next = IterateState {
            x: x_next,
            z: Cochain1::from_blocks(sheaf, z_blocks)?,
            y: Cochain1::from_blocks(sheaf, y_blocks)?,
        };

        let res = compute_residuals(prog, &state, &next, cfg.rho)?;
        let x_change = next.x.sub(&state.x).norm();
        let objective = trace_objective(prog, &next.x)?;
        let snapshot = (cfg.snapshot_every > 0 && iter % cfg.snapshot_every == 0).then(|| next.clone());
        records.push(IterationRecord {
            iter,
            primal_residual: res.primal,
            dual_residual: res.dual,
            x_change,
            objective,
            snapshot,
        });
        state = next;
        if let Some(s) = monitor.observe(res, x_change) {
            status = s;
            break;
        }
    }

    Ok(AdmmOutcome {
        x: state.x.clone(),
        state,
        trace: SolveTrace { records, status },
    })
}

/// Objective value recorded in traces.
pub(crate) fn trace_objective(prog: &HomologicalProgram, x: &Cochain0) -> Result<f64> {
    match prog.mode() {
        ProgramMode::Soft => program_objective(prog, x),
        ProgramMode::HardConstraint => {
            let mut total = 0.0;
            for (f, xi) in prog.node_objectives().iter().zip(x.blocks()) {
                total += f.value(xi)?;
            }
            Ok(total)
        }
    }
}

/// Proximal damping weight `τ_i` of one vertex.
pub(crate) fn vertex_damping(sheaf: &CellularSheaf, v: usize, cfg: &AdmmConfig) -> f64 {
    match cfg.damping {
        XUpdateDamping::None => 0.0,
        XUpdateDamping::Gershgorin => sheaf
            .graph()
            .incident(v)
            .iter()
            .map(|inc| {
                cfg.rho
                    * sheaf.restriction(inc.edge, inc.side).operator_norm()
                    * sheaf.restriction(inc.edge, inc.side.opposite()).operator_norm()
            })
            .sum(),
    }
}

/// Target `t_{i,e}` that `F_{i→e} x_i` is pulled toward in the x-update, given
/// the neighbor's restricted state and the edge's `z`, `y`.
pub(crate) fn edge_target(side: EdgeSide, neighbor_restricted: &[f64], z: &[f64], y: &[f64]) -> Vec<f64> {
    let s = side.sign();
    neighbor_restricted
        .iter()
        .zip(z.iter().zip(y))
        .map(|(nb, (zv, yv))| nb + s * (zv - yv))
        .collect()
}

const BOX_CD_MAX_SWEEPS: usize = 100_000;

/// Per-vertex x-update:
/// `argmin_u f(u) + (ρ/2) Σ_e ‖F_{i→e} u - t_{i,e}‖² + (τ/2) ‖u - x_prev‖²`.
pub(crate) fn primal_update<'a>(
    obj: &NodeObjective,
    x_prev: &[f64],
    rho: f64,
    tau: f64,
    terms: impl Iterator<Item = (&'a LinearMap, Vec<f64>)>,
) -> Result<Vec<f64>> {
    let n = x_prev.len();
    if let NodeObjective::FixedValue { value } = obj {
        return Ok(value.clone());
    }
    let mut a = DMatrix::<f64>::identity(n, n) * tau;
    let mut b = DVector::from_column_slice(x_prev) * tau;
    for (map, target) in terms {
        let fm = map.to_dmatrix();
        a += fm.transpose() * &fm * rho;
        let mut bt = vec![0.0; n];
        map.apply_transpose_into(&target, rho, &mut bt);
        b += DVector::from_vec(bt);
    }
    let anchor = DVector::from_column_slice(x_prev);
    match obj {
        NodeObjective::Zero => Ok(solve_psd_near(&a, &b, &anchor).as_slice().to_vec()),
        NodeObjective::Quadratic { reference, weight } => {
            a += DMatrix::<f64>::identity(n, n) * *weight;
            b += DVector::from_column_slice(reference) * *weight;
            Ok(solve_psd_near(&a, &b, &anchor).as_slice().to_vec())
        }
        NodeObjective::Box { lower, upper } => Ok(box_qp(&a, &b, lower, upper, x_prev)),
        NodeObjective::FixedValue { .. } => unreachable!(),
    }
}

/// `argmin ½uᵀAu - bᵀu` over a box, by cyclic coordinate descent. One sweep
/// is exact when `A` is diagonal.
fn box_qp(a: &DMatrix<f64>, b: &DVector<f64>, lower: &[f64], upper: &[f64], start: &[f64]) -> Vec<f64> {
    let n = start.len();
    let mut u: Vec<f64> = (0..n).map(|j| start[j].clamp(lower[j], upper[j])).collect();
    for _ in 0..BOX_CD_MAX_SWEEPS {
        let mut moved: f64 = 0.0;
        for j in 0..n {
            let ajj = a[(j, j)];
            if ajj <= 0.0 {
                continue;
            }
            let off: f64 = (0..n).filter(|&l| l != j).map(|l| a[(j, l)] * u[l]).sum();
            let new = ((b[j] - off) / ajj).clamp(lower[j], upper[j]);
            moved = moved.max((new - u[j]).abs());
            u[j] = new;
        }
        let scale = 1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if moved <= 1e-15 * scale {
            break;
        }
    }
    u
}

/// Edge z- and y-update from `d = (δx^{k+1})_e`.
pub(crate) fn edge_update(
    pot: &EdgePotential,
    d: &[f64],
    y: &[f64],
    z_prev: &[f64],
    cfg: &AdmmConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let v: Vec<f64> = d.iter().zip(y).map(|(a, b)| a + b).collect();
    let z = if cfg.inner_diffusion_steps == 0 || !pot.is_differentiable() {
        pot.prox(&ProxQuery::new(v, cfg.rho)?)?
    } else {
        let mut w = z_prev.to_vec();
        for _ in 0..cfg.inner_diffusion_steps {
            let g = pot.gradient(&w)?;
            for k in 0..w.len() {
                w[k] -= cfg.inner_step * (g[k] + cfg.rho * (w[k] - v[k]));
            }
        }
        w
    };
    let y_next = y
        .iter()
        .zip(d.iter().zip(&z))
        .map(|(yv, (dv, zv))| yv + dv - zv)
        .collect();
    Ok((z, y_next))
}

/// Consecutive stalled iterations before declaring infeasibility.
const STALL_WINDOW: usize = 25;

/// Termination logic shared by the centralized and distributed solvers.
pub(crate) struct StopMonitor {
    primal_tol: f64,
    dual_tol: f64,
    has_hard_edges: bool,
    last_primal: Option<f64>,
    stalled: usize,
}

impl StopMonitor {
    pub(crate) fn new(cfg: &AdmmConfig, prog: &HomologicalProgram) -> Self {
        Self {
            primal_tol: cfg.primal_tol,
            dual_tol: cfg.dual_tol,
            has_hard_edges: prog.edge_potentials().iter().any(|p| !p.is_differentiable()),
            last_primal: None,
            stalled: 0,
        }
    }

    pub(crate) fn observe(&mut self, res: Residuals, x_change: f64) -> Option<SolveStatus> {
        let settled = res.dual < self.dual_tol && x_change < self.dual_tol;
        if settled && res.primal < self.primal_tol {
            return Some(SolveStatus::Converged);
        }
        let flat = self
            .last_primal
            .is_some_and(|p| (p - res.primal).abs() <= 1e-10 * res.primal.max(1.0));
        self.last_primal = Some(res.primal);
        if self.has_hard_edges && settled && flat {
            self.stalled += 1;
            if self.stalled >= STALL_WINDOW {
                return Some(SolveStatus::Infeasible);
            }
        } else {
            self.stalled = 0;
        }
        None
    }
}
