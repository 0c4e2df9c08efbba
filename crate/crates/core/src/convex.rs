//! Node objectives `f_i` and edge potentials `U_e`: values, gradients and
//! proximal operators.
//!
//! The two families use different prox scalings, following how each one
//! enters the ADMM iteration:
//!
//! * node side: `argmin_x f(x) + ‖x - v‖² / (2ρ)`
//! * edge side: `argmin_w U(w) + (ρ/2) ‖w - v‖²`
//!
//! So a node prox with parameter `ρ` is an edge-style prox with parameter `1/ρ`.

use crate::error::{check_len, Result, SheafError};
use crate::linalg::norm2;

/// Slack used by indicator membership tests.
pub const INDICATOR_TOL: f64 = 1e-12;

/// A prox evaluation point and parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxQuery {
    pub point: Vec<f64>,
    pub rho: f64,
}

impl ProxQuery {
    pub fn new(point: Vec<f64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(SheafError::InvalidArgument(format!(
                "prox parameter must be positive, got {rho}"
            )));
        }
        Ok(Self { point, rho })
    }
}

/// Local objective of one agent.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeObjective {
    /// `f = 0`.
    Zero,
    /// `(w/2) ‖x - reference‖²`.
    Quadratic { reference: Vec<f64>, weight: f64 },
    /// Indicator of `{x = value}`.
    FixedValue { value: Vec<f64> },
    /// Indicator of `lower <= x <= upper` (entrywise; bounds may be infinite).
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl NodeObjective {
    /// Stalk dimension the objective is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Zero => None,
            Self::Quadratic { reference, .. } => Some(reference.len()),
            Self::FixedValue { value } => Some(value.len()),
            Self::Box { lower, .. } => Some(lower.len()),
        }
    }

    /// Checks parameters against a stalk of dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if let Some(d) = self.dim() {
            check_len(|| "node objective length".into(), dim, d)?;
        }
        match self {
            Self::Zero => Ok(()),
            Self::Quadratic { reference, weight } => {
                if !(*weight >= 0.0 && weight.is_finite()) {
                    return Err(SheafError::InvalidArgument(format!(
                        "quadratic weight must be >= 0, got {weight}"
                    )));
                }
                finite("quadratic reference", reference)
            }
            Self::FixedValue { value } => finite("fixed value", value),
            Self::Box { lower, upper } => {
                check_len(|| "box upper bound length".into(), lower.len(), upper.len())?;
                for (k, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                        return Err(SheafError::InvalidArgument(format!(
                            "box bound {k} is empty: [{l}, {u}]"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// `f(x)`, `+∞` outside an indicator's set.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dim() {
            check_len(|| "node objective argument".into(), d, x.len())?;
        }
        Ok(match self {
            Self::Zero => 0.0,
            Self::Quadratic { reference, weight } => {
                0.5 * weight * x.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }
            Self::FixedValue { value } => {
                if x.iter().zip(value).all(|(a, b)| (a - b).abs() <= INDICATOR_TOL) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Box { lower, upper } => {
                let inside = x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(v, (l, u))| *v >= l - INDICATOR_TOL && *v <= u + INDICATOR_TOL);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        })
    }

    /// `argmin_x f(x) + ‖x - v‖² / (2ρ)`.
    pub fn prox(&self, q: &ProxQuery) -> Result<Vec<f64>> {
        let v = &q.point;
        if let Some(d) = self.dim() {
            check_len(|| "node prox point".into(), d, v.len())?;
        }
        Ok(match self {
            Self::Zero => v.clone(),
            Self::Quadratic { reference, weight } => {
                let rw = q.rho * weight;
                v.iter()
                    .zip(reference)
                    .map(|(a, r)| (a + rw * r) / (1.0 + rw))
                    .collect()
            }
            Self::FixedValue { value } => value.clone(),
            Self::Box { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(a, (l, u))| a.clamp(*l, *u))
                .collect(),
        })
    }
}

/// Coupling cost on one edge, evaluated on the edge value `(δx)_e`.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgePotential {
    /// `(k/2) ‖y - target‖²`.
    Quadratic { target: Vec<f64>, stiffness: f64 },
    /// Hard constraint `y = 0`.
    ZeroIndicator,
    /// Huber penalty around `target`: quadratic within radius `threshold`,
    /// linear (slope `k·threshold`) beyond.
    Huber {
        target: Vec<f64>,
        stiffness: f64,
        threshold: f64,
    },
}

impl EdgePotential {
    pub fn quadratic(target: Vec<f64>, stiffness: f64) -> Self {
        Self::Quadratic { target, stiffness }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Quadratic { target, .. } | Self::Huber { target, .. } => Some(target.len()),
            Self::ZeroIndicator => None,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if let Some(d) = self.dim() {
            check_len(|| "edge potential target length".into(), dim, d)?;
        }
        match self {
            Self::ZeroIndicator => Ok(()),
            Self::Quadratic { target, stiffness } => {
                positive("stiffness", *stiffness)?;
                finite("potential target", target)
            }
            Self::Huber {
                target,
                stiffness,
                threshold,
            } => {
                positive("stiffness", *stiffness)?;
                positive("huber threshold", *threshold)?;
                finite("potential target", target)
            }
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, Self::ZeroIndicator)
    }

    /// The minimizer `b_e` (zero for the indicator).
    pub fn target(&self, dim: usize) -> Vec<f64> {
        match self {
            Self::Quadratic { target, .. } | Self::Huber { target, .. } => target.clone(),
            Self::ZeroIndicator => vec![0.0; dim],
        }
    }

    /// Lipschitz constant of the gradient (`∞` for the indicator).
    pub fn gradient_lipschitz(&self) -> f64 {
        match self {
            Self::Quadratic { stiffness, .. } | Self::Huber { stiffness, .. } => *stiffness,
            Self::ZeroIndicator => f64::INFINITY,
        }
    }

    pub fn value(&self, y: &[f64]) -> Result<f64> {
        if let Some(d) = self.dim() {
            check_len(|| "edge potential argument".into(), d, y.len())?;
        }
        Ok(match self {
            Self::Quadratic { target, stiffness } => 0.5 * stiffness * dist_sq(y, target),
            Self::ZeroIndicator => {
                if y.iter().all(|v| v.abs() <= INDICATOR_TOL) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Huber {
                target,
                stiffness,
                threshold,
            } => {
                let r = dist_sq(y, target).sqrt();
                if r <= *threshold {
                    0.5 * stiffness * r * r
                } else {
                    stiffness * threshold * (r - 0.5 * threshold)
                }
            }
        })
    }

    /// `∇U(y)`. The indicator only has a usable gradient (zero) on its set.
    pub fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        if let Some(d) = self.dim() {
            check_len(|| "edge potential argument".into(), d, y.len())?;
        }
        match self {
            Self::Quadratic { target, stiffness } => {
                Ok(y.iter().zip(target).map(|(a, b)| stiffness * (a - b)).collect())
            }
            Self::ZeroIndicator => {
                if y.iter().all(|v| v.abs() <= INDICATOR_TOL) {
                    Ok(vec![0.0; y.len()])
                } else {
                    Err(SheafError::InvalidArgument(
                        "zero-indicator potential has no gradient off its set; use the prox path".into(),
                    ))
                }
            }
            Self::Huber {
                target,
                stiffness,
                threshold,
            } => {
                let r = dist_sq(y, target).sqrt();
                let scale = if r <= *threshold {
                    *stiffness
                } else {
                    stiffness * threshold / r
                };
                Ok(y.iter().zip(target).map(|(a, b)| scale * (a - b)).collect())
            }
        }
    }

    /// `argmin_w U(w) + (ρ/2) ‖w - v‖²`.
    pub fn prox(&self, q: &ProxQuery) -> Result<Vec<f64>> {
        let v = &q.point;
        let rho = q.rho;
        if let Some(d) = self.dim() {
            check_len(|| "edge prox point".into(), d, v.len())?;
        }
        Ok(match self {
            Self::Quadratic { target, stiffness } => v
                .iter()
                .zip(target)
                .map(|(a, b)| (stiffness * b + rho * a) / (stiffness + rho))
                .collect(),
            Self::ZeroIndicator => vec![0.0; v.len()],
            Self::Huber {
                target,
                stiffness,
                threshold,
            } => {
                let r: Vec<f64> = v.iter().zip(target).map(|(a, b)| a - b).collect();
                let rn = norm2(&r);
                // inside the quadratic zone the minimizer lands within the threshold
                let scale = if rn * rho <= threshold * (stiffness + rho) {
                    rho / (stiffness + rho)
                } else {
                    1.0 - stiffness * threshold / (rho * rn)
                };
                target.iter().zip(&r).map(|(b, ri)| b + scale * ri).collect()
            }
        })
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SheafError::InvalidArgument(format!("{what} must be positive, got {v}")))
    }
}

fn finite(what: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(SheafError::InvalidArgument(format!("{what} has a non-finite entry")))
    }
}
