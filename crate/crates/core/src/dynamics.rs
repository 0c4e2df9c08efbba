//! Sheaf heat flows, integrated with explicit Euler.
//!
//! The linear flow `x ← x - η L x` drives any start state to its orthogonal
//! projection onto the global sections. The nonlinear flow replaces the edge
//! difference with `∇U_e` of it and descends the total edge potential.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cochain::{Cochain0, Cochain1};
use crate::cohomology::global_section_basis;
use crate::convex::EdgePotential;
use crate::error::{check_len, Result, SheafError};
use crate::graph::EdgeSide;
use crate::linalg::lstsq;
use crate::operators::{apply_coboundary, apply_laplacian, coboundary_dense};
use crate::sheaf::CellularSheaf;

/// Seed for the power-iteration start vector.
pub const POWER_ITERATION_SEED: u64 = 0x5eaf_c0de;
pub const DEFAULT_POWER_ITERS: usize = 200;
/// Multiplier applied to the Rayleigh-quotient estimate of `λ_max`.
pub const SPECTRAL_SAFETY: f64 = 1.05;
/// Least-squares residual below which edge targets count as exact.
pub const TARGET_FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    /// Euler step `η`; `0` picks `1/λ̂` automatically.
    pub step_size: f64,
    pub max_steps: usize,
    /// Converged once a step would move the state by less than this (max norm).
    pub converge_tol: f64,
    /// Keep a state snapshot every this many steps.
    pub record_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            step_size: 0.0,
            max_steps: 100_000,
            converge_tol: 1e-10,
            record_every: 1,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
            return Err(SheafError::InvalidArgument(format!(
                "step_size must be >= 0, got {}",
                self.step_size
            )));
        }
        if self.max_steps == 0 || self.record_every == 0 {
            return Err(SheafError::InvalidArgument(
                "max_steps and record_every must be at least 1".into(),
            ));
        }
        if self.converge_tol.is_nan() || self.converge_tol <= 0.0 {
            return Err(SheafError::InvalidArgument(format!(
                "converge_tol must be positive, got {}",
                self.converge_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowStatus {
    Converged,
    MaxSteps,
    Diverged,
}

/// Scalars for one integrator step; step 0 is the initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowStep {
    pub step: usize,
    /// Dirichlet energy (linear) or total edge potential (nonlinear).
    pub energy: f64,
    /// `‖δx - b‖₂` (`b = 0` for the linear flow).
    pub residual: f64,
    /// Max-norm change applied at this step.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub step: usize,
    pub state: Cochain0,
    pub energy: f64,
}

/// Exactness check of the edge targets `b` against `im δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetCheck {
    pub feasible: bool,
    pub least_squares_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub status: FlowStatus,
    /// Number of Euler steps actually applied.
    pub steps_taken: usize,
    pub step_size: f64,
    pub steps: Vec<FlowStep>,
    /// Snapshots every `record_every` steps, plus the final state.
    pub samples: Vec<FlowSample>,
    pub final_state: Cochain0,
    pub target_check: Option<TargetCheck>,
    pub diagnostic: Option<String>,
}

impl FlowTrace {
    pub fn converged(&self) -> bool {
        self.status == FlowStatus::Converged
    }

    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.energy).collect()
    }
}

fn sheaf_is_zero(sheaf: &CellularSheaf) -> bool {
    sheaf
        .restrictions()
        .iter()
        .all(|r| r.tail.entries().iter().chain(r.head.entries()).all(|&v| v == 0.0))
}

/// Upper estimate of `λ_max(L)` by power iteration on the matrix-free Laplacian.
pub fn estimate_spectral_bound(sheaf: &CellularSheaf, iters: usize) -> Result<f64> {
    estimate_spectral_bound_seeded(sheaf, iters, POWER_ITERATION_SEED)
}

pub fn estimate_spectral_bound_seeded(sheaf: &CellularSheaf, iters: usize, seed: u64) -> Result<f64> {
    if iters < 10 {
        return Err(SheafError::InvalidArgument(format!(
            "power iteration needs >= 10 iterations, got {iters}"
        )));
    }
    if sheaf_is_zero(sheaf) {
        return Ok(1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat: Vec<f64> = (0..sheaf.c0_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut v = Cochain0::from_flat(sheaf, &flat)?;
    v = v.scale(1.0 / v.norm());
    let mut best: f64 = 0.0;
    for _ in 0..iters {
        let lv = apply_laplacian(sheaf, &v)?;
        best = best.max(v.dot(&lv));
        let n = lv.norm();
        if n == 0.0 {
            break;
        }
        v = lv.scale(1.0 / n);
    }
    if best <= 0.0 {
        return Ok(1.0);
    }
    Ok(SPECTRAL_SAFETY * best)
}

/// Orthogonal projection of `x0` onto the global sections: the limit of the
/// linear heat flow started at `x0`.
pub fn harmonic_projection(sheaf: &CellularSheaf, x0: &Cochain0, null_tol: f64) -> Result<Cochain0> {
    x0.check_conforms(sheaf)?;
    Ok(global_section_basis(sheaf, null_tol)?.project(sheaf, x0))
}

struct Integrator<'a> {
    cfg: &'a FlowConfig,
    step_size: f64,
    steps: Vec<FlowStep>,
    samples: Vec<FlowSample>,
}

impl<'a> Integrator<'a> {
    /// Euler loop shared by both flows. `force` returns `(F(x), energy, residual)`
    /// with the update `x ← x - η F(x)`.
    fn run(
        mut self,
        x0: &Cochain0,
        mut force: impl FnMut(&Cochain0) -> Result<(Cochain0, f64, f64)>,
    ) -> Result<FlowTrace> {
        let mut x = x0.clone();
        let (mut f, e0, r0) = force(&x)?;
        self.steps.push(FlowStep {
            step: 0,
            energy: e0,
            residual: r0,
            change: 0.0,
        });
        self.samples.push(FlowSample {
            step: 0,
            state: x.clone(),
            energy: e0,
        });
        let blowup = 1e12 * (1.0 + e0);
        let mut status = FlowStatus::MaxSteps;
        let mut diagnostic = None;
        let mut taken = 0;
        for step in 1..=self.cfg.max_steps {
            let change = self.step_size * f.max_abs();
            if change < self.cfg.converge_tol {
                status = FlowStatus::Converged;
                break;
            }
            x = x.axpy(-self.step_size, &f);
            taken = step;
            let (nf, energy, residual) = force(&x)?;
            f = nf;
            self.steps.push(FlowStep {
                step,
                energy,
                residual,
                change,
            });
            if step % self.cfg.record_every == 0 {
                self.samples.push(FlowSample {
                    step,
                    state: x.clone(),
                    energy,
                });
            }
            if !energy.is_finite() || energy > blowup {
                status = FlowStatus::Diverged;
                diagnostic = Some(format!(
                    "energy grew from {e0:.3e} to {energy:.3e} by step {step}; step size {} exceeds the stability bound",
                    self.step_size
                ));
                break;
            }
        }
        if self.samples.last().map(|s| s.step) != Some(taken) {
            let energy = self.steps.last().map(|s| s.energy).unwrap_or(e0);
            self.samples.push(FlowSample {
                step: taken,
                state: x.clone(),
                energy,
            });
        }
        Ok(FlowTrace {
            status,
            steps_taken: taken,
            step_size: self.step_size,
            steps: self.steps,
            samples: self.samples,
            final_state: x,
            target_check: None,
            diagnostic,
        })
    }
}

/// Explicit-Euler integration of `ẋ = -L x`.
pub fn linear_heat_flow(sheaf: &CellularSheaf, x0: &Cochain0, cfg: &FlowConfig) -> Result<FlowTrace> {
    cfg.validate()?;
    x0.check_conforms(sheaf)?;
    let step_size = if cfg.step_size > 0.0 {
        cfg.step_size
    } else {
        1.0 / estimate_spectral_bound(sheaf, DEFAULT_POWER_ITERS)?
    };
    let integ = Integrator {
        cfg,
        step_size,
        steps: Vec::new(),
        samples: Vec::new(),
    };
    integ.run(x0, |x| {
        let dx = apply_coboundary(sheaf, x)?;
        let energy = dx.norm_sq();
        let lx = crate::operators::apply_coboundary_transpose(sheaf, &dx)?;
        Ok((lx, energy, energy.sqrt()))
    })
}

fn check_potentials(sheaf: &CellularSheaf, potentials: &[EdgePotential]) -> Result<()> {
    check_len(
        || "edge potential count".into(),
        sheaf.graph().edge_count(),
        potentials.len(),
    )?;
    for (e, p) in potentials.iter().enumerate() {
        p.validate(sheaf.edge_dim(e))?;
    }
    Ok(())
}

/// Nonlinear sheaf Laplacian `Σ_e ±F_{i→e}ᵀ ∇U_e((δx)_e)`, the gradient of
/// `E(x) = Σ_e U_e((δx)_e)`.
pub fn nonlinear_laplacian_apply(
    sheaf: &CellularSheaf,
    potentials: &[EdgePotential],
    x: &Cochain0,
) -> Result<Cochain0> {
    check_potentials(sheaf, potentials)?;
    if let Some(edge) = potentials.iter().position(|p| !p.is_differentiable()) {
        return Err(SheafError::NotDifferentiable { edge });
    }
    let dx = apply_coboundary(sheaf, x)?;
    Ok(nonlinear_force(sheaf, potentials, &dx)?.0)
}

fn nonlinear_force(sheaf: &CellularSheaf, potentials: &[EdgePotential], dx: &Cochain1) -> Result<(Cochain0, f64)> {
    let mut out = Cochain0::zeros(sheaf);
    let mut energy = 0.0;
    for e in sheaf.graph().edges() {
        let y = dx.block(e.id);
        let pot = &potentials[e.id];
        let g = pot.gradient(y)?;
        energy += pot.value(y)?;
        for side in [EdgeSide::Tail, EdgeSide::Head] {
            sheaf
                .restriction(e.id, side)
                .apply_transpose_into(&g, side.sign(), out.block_mut(e.endpoint(side)));
        }
    }
    Ok((out, energy))
}

/// Edge targets `b_e` assembled into a 1-cochain.
pub fn assemble_targets(sheaf: &CellularSheaf, potentials: &[EdgePotential]) -> Result<Cochain1> {
    check_potentials(sheaf, potentials)?;
    let blocks = potentials
        .iter()
        .enumerate()
        .map(|(e, p)| p.target(sheaf.edge_dim(e)))
        .collect();
    Cochain1::from_blocks(sheaf, blocks)
}

/// Tests whether `b ∈ im δ` by dense least squares.
pub fn check_targets(sheaf: &CellularSheaf, b: &Cochain1) -> Result<TargetCheck> {
    b.check_conforms(sheaf)?;
    if b.is_empty() {
        return Ok(TargetCheck {
            feasible: true,
            least_squares_residual: 0.0,
        });
    }
    let d = coboundary_dense(sheaf).to_dmatrix();
    let rhs = DVector::from_vec(b.to_flat());
    let x = lstsq(&d, &rhs);
    let residual = (&d * x - rhs).norm();
    Ok(TargetCheck {
        feasible: residual < TARGET_FEASIBILITY_TOL,
        least_squares_residual: residual,
    })
}

/// Explicit-Euler integration of `ẋ = -L_∇U x`.
///
/// With the automatic step `η = 1/(λ̂ · max_e Lip(∇U_e))` the total potential is
/// non-increasing.
pub fn nonlinear_heat_flow(
    sheaf: &CellularSheaf,
    potentials: &[EdgePotential],
    x0: &Cochain0,
    cfg: &FlowConfig,
) -> Result<FlowTrace> {
    cfg.validate()?;
    x0.check_conforms(sheaf)?;
    check_potentials(sheaf, potentials)?;
    if let Some(edge) = potentials.iter().position(|p| !p.is_differentiable()) {
        return Err(SheafError::NotDifferentiable { edge });
    }
    let targets = assemble_targets(sheaf, potentials)?;
    let target_check = check_targets(sheaf, &targets)?;
    let step_size = if cfg.step_size > 0.0 {
        cfg.step_size
    } else {
        let lip = potentials
            .iter()
            .map(EdgePotential::gradient_lipschitz)
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        1.0 / (estimate_spectral_bound(sheaf, DEFAULT_POWER_ITERS)? * lip)
    };
    let integ = Integrator {
        cfg,
        step_size,
        steps: Vec::new(),
        samples: Vec::new(),
    };
    let mut trace = integ.run(x0, |x| {
        let dx = apply_coboundary(sheaf, x)?;
        let (f, energy) = nonlinear_force(sheaf, potentials, &dx)?;
        Ok((f, energy, dx.sub(&targets).norm()))
    })?;
    trace.target_check = Some(target_check);
    Ok(trace)
}
