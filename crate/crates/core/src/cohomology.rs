//! Global sections (`H^0 = ker δ`) and the dimension of `H^1 = C^1 / im δ`.

use crate::cochain::Cochain0;
use crate::error::{Result, SheafError};
use crate::linalg::{full_svd, numerical_rank};
use crate::operators::{apply_coboundary, coboundary_dense};
use crate::sheaf::CellularSheaf;

/// Default relative singular-value threshold for numerical rank.
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

/// Orthonormal basis of the global sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionBasis {
    pub basis: Vec<Cochain0>,
}

impl SectionBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection of `x` onto the span of the basis.
    pub fn project(&self, sheaf: &CellularSheaf, x: &Cochain0) -> Cochain0 {
        self.basis
            .iter()
            .fold(Cochain0::zeros(sheaf), |acc, b| acc.axpy(x.dot(b), b))
    }
}

fn check_tol(null_tol: f64) -> Result<()> {
    if null_tol > 0.0 && null_tol.is_finite() {
        Ok(())
    } else {
        Err(SheafError::InvalidArgument(format!(
            "null_tol must be positive, got {null_tol}"
        )))
    }
}

/// Orthonormal basis of the numerical null space of `δ`; singular values below
/// `null_tol * σ_max` count as zero.
pub fn global_section_basis(sheaf: &CellularSheaf, null_tol: f64) -> Result<SectionBasis> {
    check_tol(null_tol)?;
    let d = coboundary_dense(sheaf).to_dmatrix();
    let svd = full_svd(&d);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = null_tol * smax;
    let basis = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= threshold)
        .map(|(k, _)| {
            let row: Vec<f64> = svd.v_t.row(k).iter().cloned().collect();
            Cochain0::from_flat(sheaf, &row).expect("row spans C^0")
        })
        .collect();
    Ok(SectionBasis { basis })
}

/// Numerical rank of the coboundary.
pub fn coboundary_rank(sheaf: &CellularSheaf, null_tol: f64) -> Result<usize> {
    check_tol(null_tol)?;
    Ok(numerical_rank(&coboundary_dense(sheaf).to_dmatrix(), null_tol))
}

/// `dim H^0 = Σn_i - rank δ`.
pub fn h0_dimension(sheaf: &CellularSheaf, null_tol: f64) -> Result<usize> {
    Ok(sheaf.c0_dim() - coboundary_rank(sheaf, null_tol)?)
}

/// `dim H^1 = Σm_e - rank δ`.
pub fn h1_dimension(sheaf: &CellularSheaf, null_tol: f64) -> Result<usize> {
    Ok(sheaf.c1_dim() - coboundary_rank(sheaf, null_tol)?)
}

/// Whether every edge constraint holds to within `tol` in the max norm.
pub fn is_global_section(sheaf: &CellularSheaf, x: &Cochain0, tol: f64) -> Result<bool> {
    if tol <= 0.0 || tol.is_nan() {
        return Err(SheafError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    Ok(apply_coboundary(sheaf, x)?.max_abs() <= tol)
}
