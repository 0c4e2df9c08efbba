//! Nonlinear homological programs
//!
//! ```text
//! minimize  Σ_i f_i(x_i) + Σ_e U_e((δx)_e)
//! ```
//!
//! and the centralized ADMM reference solver.

mod admm;

pub use admm::{
    admm_solve, admm_solve_from, compute_residuals, AdmmConfig, AdmmOutcome, IterateState, IterationRecord, Residuals,
    SolveStatus, SolveTrace, XUpdateDamping,
};
pub(crate) use admm::{edge_target, edge_update, primal_update, trace_objective, vertex_damping, StopMonitor};

use nalgebra::{DMatrix, DVector};

use crate::cochain::Cochain0;
use crate::convex::{EdgePotential, NodeObjective};
use crate::error::{check_len, Result, SheafError};
use crate::linalg::{full_svd, lstsq};
use crate::operators::{apply_coboundary, coboundary_dense};
use crate::sheaf::CellularSheaf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgramMode {
    /// Every edge carries the zero indicator: `δx = 0` is enforced exactly.
    HardConstraint,
    /// General potentials.
    Soft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomologicalProgram {
    sheaf: CellularSheaf,
    node_objectives: Vec<NodeObjective>,
    edge_potentials: Vec<EdgePotential>,
    mode: ProgramMode,
}

impl HomologicalProgram {
    /// Builds a program; the mode is `HardConstraint` exactly when every
    /// potential is the zero indicator.
    pub fn new(
        sheaf: CellularSheaf,
        node_objectives: Vec<NodeObjective>,
        edge_potentials: Vec<EdgePotential>,
    ) -> Result<Self> {
        check_len(
            || "node objective count".into(),
            sheaf.graph().vertex_count(),
            node_objectives.len(),
        )?;
        check_len(
            || "edge potential count".into(),
            sheaf.graph().edge_count(),
            edge_potentials.len(),
        )?;
        for (v, f) in node_objectives.iter().enumerate() {
            f.validate(sheaf.vertex_dim(v))
                .map_err(|e| SheafError::InvalidProgram(format!("objective of vertex {v}: {e}")))?;
        }
        for (e, u) in edge_potentials.iter().enumerate() {
            u.validate(sheaf.edge_dim(e))
                .map_err(|err| SheafError::InvalidProgram(format!("potential of edge {e}: {err}")))?;
        }
        let mode = if edge_potentials
            .iter()
            .all(|p| matches!(p, EdgePotential::ZeroIndicator))
        {
            ProgramMode::HardConstraint
        } else {
            ProgramMode::Soft
        };
        Ok(Self {
            sheaf,
            node_objectives,
            edge_potentials,
            mode,
        })
    }

    /// Hard-constraint program: zero indicators on every edge.
    pub fn hard(sheaf: CellularSheaf, node_objectives: Vec<NodeObjective>) -> Result<Self> {
        let m = sheaf.graph().edge_count();
        Self::new(sheaf, node_objectives, vec![EdgePotential::ZeroIndicator; m])
    }

    pub fn sheaf(&self) -> &CellularSheaf {
        &self.sheaf
    }

    pub fn node_objectives(&self) -> &[NodeObjective] {
        &self.node_objectives
    }

    pub fn edge_potentials(&self) -> &[EdgePotential] {
        &self.edge_potentials
    }

    pub fn mode(&self) -> ProgramMode {
        self.mode
    }

    /// The same program on the reversed graph; potential targets flip sign so
    /// that the optimal `x` is unchanged.
    pub fn reoriented(&self) -> Self {
        let pots = self
            .edge_potentials
            .iter()
            .map(|p| match p {
                EdgePotential::Quadratic { target, stiffness } => EdgePotential::Quadratic {
                    target: target.iter().map(|v| -v).collect(),
                    stiffness: *stiffness,
                },
                EdgePotential::Huber {
                    target,
                    stiffness,
                    threshold,
                } => EdgePotential::Huber {
                    target: target.iter().map(|v| -v).collect(),
                    stiffness: *stiffness,
                    threshold: *threshold,
                },
                EdgePotential::ZeroIndicator => EdgePotential::ZeroIndicator,
            })
            .collect();
        Self::new(self.sheaf.reoriented(), self.node_objectives.clone(), pots).expect("same shapes")
    }
}

/// `Σ_i f_i(x_i) + Σ_e U_e((δx)_e)`; indicators contribute `+∞` off their sets.
pub fn program_objective(prog: &HomologicalProgram, x: &Cochain0) -> Result<f64> {
    let dx = apply_coboundary(&prog.sheaf, x)?;
    let mut total = 0.0;
    for (f, xi) in prog.node_objectives.iter().zip(x.blocks()) {
        total += f.value(xi)?;
    }
    for (u, ye) in prog.edge_potentials.iter().zip(dx.blocks()) {
        total += u.value(ye)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible {
        witness: Cochain0,
        /// Whether the smooth potentials' targets are simultaneously attained.
        targets_consistent: bool,
    },
    Infeasible {
        residual: f64,
    },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

const BOX_PROJECTION_SWEEPS: usize = 20_000;

/// Decides whether the hard parts of the program (zero-indicator edges, fixed
/// values, boxes) admit a common point, and returns a witness.
///
/// The witness solves the equality constraints exactly in the least-squares
/// sense, fits the smooth potentials' targets inside that affine set, and is
/// then pulled into any boxes by alternating projections.
pub fn check_feasibility(prog: &HomologicalProgram, tol: f64) -> Result<Feasibility> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(SheafError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let sheaf = &prog.sheaf;
    let n = sheaf.c0_dim();
    let delta = coboundary_dense(sheaf).to_dmatrix();

    let mut eq_rows: Vec<Vec<f64>> = Vec::new();
    let mut eq_rhs = Vec::new();
    let mut fit_rows: Vec<Vec<f64>> = Vec::new();
    let mut fit_rhs = Vec::new();
    for (e, pot) in prog.edge_potentials.iter().enumerate() {
        let off = sheaf.edge_offset(e);
        let target = pot.target(sheaf.edge_dim(e));
        for (r, t) in target.iter().enumerate() {
            let row: Vec<f64> = delta.row(off + r).iter().cloned().collect();
            if pot.is_differentiable() {
                fit_rows.push(row);
                fit_rhs.push(*t);
            } else {
                eq_rows.push(row);
                eq_rhs.push(0.0);
            }
        }
    }
    let mut boxes = Vec::new();
    for (v, f) in prog.node_objectives.iter().enumerate() {
        let off = sheaf.vertex_offset(v);
        match f {
            NodeObjective::FixedValue { value } => {
                for (k, c) in value.iter().enumerate() {
                    let mut row = vec![0.0; n];
                    row[off + k] = 1.0;
                    eq_rows.push(row);
                    eq_rhs.push(*c);
                }
            }
            NodeObjective::Box { lower, upper } => {
                for k in 0..lower.len() {
                    boxes.push((off + k, lower[k], upper[k]));
                }
            }
            _ => {}
        }
    }

    let to_matrix = |rows: &[Vec<f64>]| DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    let a = to_matrix(&eq_rows);
    let a_rhs = DVector::from_vec(eq_rhs);
    let (x_p, null_basis) = if eq_rows.is_empty() {
        (DVector::zeros(n), DMatrix::identity(n, n))
    } else {
        let x_p = lstsq(&a, &a_rhs);
        let residual = (&a * &x_p - &a_rhs).norm();
        if residual >= tol {
            return Ok(Feasibility::Infeasible { residual });
        }
        let svd = full_svd(&a);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..n)
            .filter(|&k| smax == 0.0 || svd.singular_values[k] <= 1e-12 * smax)
            .collect();
        let nb = DMatrix::from_fn(n, keep.len(), |r, c| svd.v_t[(keep[c], r)]);
        (x_p, nb)
    };

    let mut x = x_p.clone();
    let s = to_matrix(&fit_rows);
    let s_rhs = DVector::from_vec(fit_rhs);
    if !fit_rows.is_empty() && null_basis.ncols() > 0 {
        let w = lstsq(&(&s * &null_basis), &(&s_rhs - &s * &x_p));
        x += &null_basis * w;
    }

    if !boxes.is_empty() {
        // alternating projections: box, then back onto {A x = a}
        let project_affine = |p: &DVector<f64>| -> DVector<f64> {
            if eq_rows.is_empty() {
                p.clone()
            } else {
                let c = &null_basis.transpose() * (p - &x_p);
                &x_p + &null_basis * c
            }
        };
        let box_gap = |p: &DVector<f64>| -> f64 {
            boxes
                .iter()
                .map(|&(k, l, u)| (l - p[k]).max(p[k] - u).max(0.0))
                .fold(0.0, f64::max)
        };
        for _ in 0..BOX_PROJECTION_SWEEPS {
            if box_gap(&x) < 0.1 * tol {
                break;
            }
            let mut q = x.clone();
            for &(k, l, u) in &boxes {
                q[k] = q[k].clamp(l, u);
            }
            x = project_affine(&q);
        }
        let gap = box_gap(&x);
        if gap >= tol {
            return Ok(Feasibility::Infeasible { residual: gap });
        }
    }

    let targets_consistent = fit_rows.is_empty() || (&s * &x - &s_rhs).norm() < tol;
    let witness = Cochain0::from_flat(sheaf, x.as_slice())?;
    Ok(Feasibility::Feasible {
        witness,
        targets_consistent,
    })
}
