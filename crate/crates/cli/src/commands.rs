//! Subcommand implementations. Each returns the text for stdout.

use std::fs;
use std::path::{Path, PathBuf};

use sheafcoord::dynamics::{estimate_spectral_bound_seeded, DEFAULT_POWER_ITERS};
use sheafcoord::{
    admm_solve_from, apply_coboundary, global_section_basis, h0_dimension, h1_dimension, is_global_section,
    linear_heat_flow, nonlinear_heat_flow, run_distributed_from, CellularSheaf, Cochain0, DistConfig, EdgePotential,
    FlowTrace, SolveTrace, DEFAULT_NULL_TOL,
};

use crate::builtin;
use crate::error::CliError;
use crate::scenario::Scenario;
use crate::trace_io::{write_outputs, CohomologyReport, TerminalReport, TraceRow};

pub const SEED_ENV: &str = "SHEAFCOORD_SEED";

/// Tolerance for the `is_global_section` flag printed after a flow.
pub const SECTION_TOL: f64 = 1e-6;

/// Reads a scenario from a file path, or from the built-in table when no
/// such file exists. `n` selects a member of a built-in family.
pub fn load_scenario(arg: &str, n: Option<usize>) -> Result<Scenario, CliError> {
    if n.is_none() && Path::new(arg).is_file() {
        let text = fs::read_to_string(arg).map_err(|e| CliError::Scenario(format!("cannot read {arg}: {e}")))?;
        return Scenario::parse(&text);
    }
    match builtin::find(arg, n) {
        Some(b) => Scenario::parse(b.source),
        None => Err(CliError::Scenario(match n {
            Some(n) => format!("no built-in scenario {arg}-{n}"),
            None => format!("no scenario file or built-in named {arg}"),
        })),
    }
}

/// Applies `SHEAFCOORD_SEED`, if set, on top of the scenario's seed.
pub fn apply_seed_override(scn: &mut Scenario, value: Option<String>) -> Result<(), CliError> {
    if let Some(v) = value {
        let seed = v
            .trim()
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?;
        scn.seed = Some(seed);
    }
    Ok(())
}

pub fn cohomology(scn: &Scenario) -> Result<String, CliError> {
    let sheaf = scn.build_sheaf()?;
    let basis = global_section_basis(&sheaf, DEFAULT_NULL_TOL)?;
    let report = CohomologyReport::new(
        h0_dimension(&sheaf, DEFAULT_NULL_TOL)?,
        h1_dimension(&sheaf, DEFAULT_NULL_TOL)?,
        &basis.basis,
    );
    Ok(report.to_json())
}

#[derive(Debug, Clone, Default)]
pub struct FlowOptions {
    pub nonlinear: bool,
    pub steps: Option<usize>,
    pub out: Option<PathBuf>,
}

fn flow_rows(trace: &FlowTrace) -> Vec<TraceRow> {
    trace
        .steps
        .iter()
        .map(|s| TraceRow {
            iter: s.step,
            primal_residual: s.residual,
            dual_residual: s.change,
            objective: s.energy,
        })
        .collect()
}

fn flow_status(trace: &FlowTrace) -> &'static str {
    match trace.status {
        sheafcoord::FlowStatus::Converged => "converged",
        sheafcoord::FlowStatus::MaxSteps => "max_steps",
        sheafcoord::FlowStatus::Diverged => "diverged",
    }
}

/// Automatic step from a seeded spectral estimate, scaled by the stiffest
/// potential for the nonlinear flow.
fn seeded_step(sheaf: &CellularSheaf, potentials: Option<&[EdgePotential]>, seed: u64) -> Result<f64, CliError> {
    let bound = estimate_spectral_bound_seeded(sheaf, DEFAULT_POWER_ITERS, seed)?;
    let lip = potentials
        .map(|p| p.iter().map(EdgePotential::gradient_lipschitz).fold(0.0, f64::max))
        .unwrap_or(1.0)
        .max(f64::MIN_POSITIVE);
    Ok(1.0 / (bound * lip))
}

pub fn flow(scn: &Scenario, opts: &FlowOptions) -> Result<String, CliError> {
    let prog = scn.build_program()?;
    let sheaf = prog.sheaf();
    let x0 = scn
        .initial_state(sheaf)?
        .ok_or_else(|| CliError::Scenario("initial_state: required by the flow command".into()))?;
    let mut cfg = scn.flow.to_config();
    if let Some(steps) = opts.steps {
        cfg.max_steps = steps;
    }
    let pots = opts.nonlinear.then(|| prog.edge_potentials());
    if cfg.step_size == 0.0 {
        if let Some(seed) = scn.seed {
            cfg.step_size = seeded_step(sheaf, pots, seed)?;
        }
    }
    let trace = match pots {
        Some(p) => nonlinear_heat_flow(sheaf, p, &x0, &cfg)?,
        None => linear_heat_flow(sheaf, &x0, &cfg)?,
    };
    let dx = apply_coboundary(sheaf, &trace.final_state)?;
    let section = is_global_section(sheaf, &trace.final_state, SECTION_TOL)?;
    let report = TerminalReport::new(flow_status(&trace), &trace.final_state, &dx, Some(section));
    if let Some(dir) = &opts.out {
        write_outputs(dir, &flow_rows(&trace), &report)?;
    }
    Ok(report.to_json())
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub distributed: bool,
    pub rho: Option<f64>,
    pub max_iters: Option<usize>,
    pub out: Option<PathBuf>,
}

fn solve_rows(trace: &SolveTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            iter: r.iter,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            objective: r.objective,
        })
        .collect()
}

pub fn solve(scn: &Scenario, opts: &SolveOptions) -> Result<String, CliError> {
    let prog = scn.build_program()?;
    let mut cfg = scn.solver.to_config(scn.seed.unwrap_or(0));
    if let Some(rho) = opts.rho {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(CliError::Usage(format!("--rho must be positive, got {rho}")));
        }
        cfg.rho = rho;
    }
    if let Some(n) = opts.max_iters {
        if n == 0 {
            return Err(CliError::Usage("--max-iters must be at least 1".into()));
        }
        cfg.max_iters = n;
    }
    let x0 = scn
        .initial_state(prog.sheaf())?
        .unwrap_or_else(|| Cochain0::zeros(prog.sheaf()));
    let outcome = if opts.distributed {
        let dist = DistConfig {
            admm: cfg,
            ..DistConfig::default()
        };
        run_distributed_from(&prog, &dist, &x0)?.outcome
    } else {
        admm_solve_from(&prog, &cfg, &x0)?
    };
    let dx = apply_coboundary(prog.sheaf(), &outcome.x)?;
    let report = TerminalReport::new(outcome.trace.status.as_str(), &outcome.x, &dx, None);
    if let Some(dir) = &opts.out {
        write_outputs(dir, &solve_rows(&outcome.trace), &report)?;
    }
    Ok(report.to_json())
}

pub fn list_scenarios() -> String {
    let mut out = String::new();
    for b in builtin::BUILTINS {
        let desc = Scenario::parse(b.source)
            .ok()
            .and_then(|s| s.description)
            .unwrap_or_default();
        out.push_str(&format!("{:<20} {desc}\n", b.name));
    }
    out
}

pub fn show_scenario(name: &str, n: Option<usize>) -> Result<String, CliError> {
    builtin::find(name, n)
        .map(|b| b.source.trim_end().to_string())
        .ok_or_else(|| CliError::Scenario(format!("no built-in scenario {name}")))
}
