//! Block vectors over vertex stalks (`C^0`) and edge stalks (`C^1`).

use crate::error::{check_len, Result, SheafError};
use crate::linalg::{max_abs, norm2};
use crate::sheaf::CellularSheaf;

macro_rules! cochain_type {
    ($(#[$meta:meta])* $name:ident, $dims:ident, $cell:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            blocks: Vec<Vec<f64>>,
        }

        impl $name {
            pub fn zeros(sheaf: &CellularSheaf) -> Self {
                Self {
                    blocks: sheaf.$dims().iter().map(|&d| vec![0.0; d]).collect(),
                }
            }

            /// Wraps blocks after checking them against the sheaf's stalk dims.
            pub fn from_blocks(sheaf: &CellularSheaf, blocks: Vec<Vec<f64>>) -> Result<Self> {
                let c = Self { blocks };
                c.check_conforms(sheaf)?;
                Ok(c)
            }

            /// Splits a flat vector laid out in index order.
            pub fn from_flat(sheaf: &CellularSheaf, flat: &[f64]) -> Result<Self> {
                let dims = sheaf.$dims();
                let total: usize = dims.iter().sum();
                check_len(|| concat!("flat ", $cell, " cochain").to_string(), total, flat.len())?;
                let mut blocks = Vec::with_capacity(dims.len());
                let mut at = 0;
                for &d in dims {
                    blocks.push(flat[at..at + d].to_vec());
                    at += d;
                }
                Ok(Self { blocks })
            }

            pub fn check_conforms(&self, sheaf: &CellularSheaf) -> Result<()> {
                let dims = sheaf.$dims();
                check_len(|| concat!($cell, " block count").to_string(), dims.len(), self.blocks.len())?;
                for (i, (b, &d)) in self.blocks.iter().zip(dims).enumerate() {
                    if b.len() != d {
                        return Err(SheafError::DimensionMismatch {
                            context: format!(concat!($cell, " {} stalk"), i),
                            expected: d,
                            actual: b.len(),
                        });
                    }
                }
                Ok(())
            }

            pub fn blocks(&self) -> &[Vec<f64>] {
                &self.blocks
            }

            pub fn into_blocks(self) -> Vec<Vec<f64>> {
                self.blocks
            }

            pub fn block(&self, i: usize) -> &[f64] {
                &self.blocks[i]
            }

            pub fn block_mut(&mut self, i: usize) -> &mut Vec<f64> {
                &mut self.blocks[i]
            }

            pub fn len(&self) -> usize {
                self.blocks.len()
            }

            pub fn is_empty(&self) -> bool {
                self.blocks.is_empty()
            }

            pub fn to_flat(&self) -> Vec<f64> {
                self.blocks.iter().flatten().copied().collect()
            }

            pub fn dot(&self, other: &Self) -> f64 {
                self.blocks
                    .iter()
                    .zip(&other.blocks)
                    .flat_map(|(a, b)| a.iter().zip(b))
                    .map(|(a, b)| a * b)
                    .sum()
            }

            pub fn norm(&self) -> f64 {
                norm2(&self.to_flat())
            }

            pub fn norm_sq(&self) -> f64 {
                self.dot(self)
            }

            pub fn max_abs(&self) -> f64 {
                self.blocks.iter().map(|b| max_abs(b)).fold(0.0, f64::max)
            }

            /// `self + alpha * other`, blockwise.
            pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
                let blocks = self
                    .blocks
                    .iter()
                    .zip(&other.blocks)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + alpha * y).collect())
                    .collect();
                Self { blocks }
            }

            pub fn sub(&self, other: &Self) -> Self {
                self.axpy(-1.0, other)
            }

            pub fn add(&self, other: &Self) -> Self {
                self.axpy(1.0, other)
            }

            pub fn scale(&self, alpha: f64) -> Self {
                Self {
                    blocks: self.blocks.iter().map(|b| b.iter().map(|v| alpha * v).collect()).collect(),
                }
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.sub(other).max_abs()
            }

            pub fn is_finite(&self) -> bool {
                self.blocks.iter().flatten().all(|v| v.is_finite())
            }
        }
    };
}

cochain_type!(
    /// A 0-cochain: one vector per vertex stalk.
    Cochain0,
    vertex_dims,
    "vertex"
);

cochain_type!(
    /// A 1-cochain: one vector per edge stalk.
    Cochain1,
    edge_dims,
    "edge"
);
