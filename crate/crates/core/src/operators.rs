//! Coboundary and sheaf Laplacian, matrix-free and dense.

use crate::cochain::{Cochain0, Cochain1};
use crate::error::Result;
use crate::graph::EdgeSide;
use crate::linalg::LinearMap;
use crate::sheaf::CellularSheaf;

/// `(δx)_e = F_{tail→e} x_tail - F_{head→e} x_head`.
pub fn apply_coboundary(sheaf: &CellularSheaf, x: &Cochain0) -> Result<Cochain1> {
    x.check_conforms(sheaf)?;
    let blocks = sheaf
        .graph()
        .edges()
        .iter()
        .map(|e| edge_difference(sheaf, e.id, x.block(e.tail), x.block(e.head)))
        .collect();
    Ok(Cochain1::from_blocks(sheaf, blocks).expect("edge stalk shapes"))
}

/// `F_{tail→e} x_tail - F_{head→e} x_head` for one edge.
pub(crate) fn edge_difference(sheaf: &CellularSheaf, edge: usize, x_tail: &[f64], x_head: &[f64]) -> Vec<f64> {
    let r = &sheaf.restrictions()[edge];
    let mut d = r.tail.apply(x_tail);
    for (a, b) in d.iter_mut().zip(r.head.apply(x_head)) {
        *a -= b;
    }
    d
}

/// Adjoint of the coboundary: `(δᵀy)_i = Σ_e ±F_{i→e}ᵀ y_e`.
pub fn apply_coboundary_transpose(sheaf: &CellularSheaf, y: &Cochain1) -> Result<Cochain0> {
    y.check_conforms(sheaf)?;
    let mut out = Cochain0::zeros(sheaf);
    for e in sheaf.graph().edges() {
        for side in [EdgeSide::Tail, EdgeSide::Head] {
            let v = e.endpoint(side);
            sheaf
                .restriction(e.id, side)
                .apply_transpose_into(y.block(e.id), side.sign(), out.block_mut(v));
        }
    }
    Ok(out)
}

/// Dense `(Σm_e) x (Σn_i)` coboundary matrix.
///
/// An edgeless graph has no rows; since a `LinearMap` cannot be empty this
/// returns a single zero row instead, which leaves rank and kernel unchanged.
pub fn coboundary_dense(sheaf: &CellularSheaf) -> LinearMap {
    let rows = sheaf.c1_dim();
    let cols = sheaf.c0_dim();
    let mut m = vec![0.0; rows * cols];
    for e in sheaf.graph().edges() {
        let r0 = sheaf.edge_offset(e.id);
        for side in [EdgeSide::Tail, EdgeSide::Head] {
            let c0 = sheaf.vertex_offset(e.endpoint(side));
            let map = sheaf.restriction(e.id, side);
            for r in 0..map.rows() {
                for c in 0..map.cols() {
                    m[(r0 + r) * cols + c0 + c] = side.sign() * map.get(r, c);
                }
            }
        }
    }
    if rows == 0 {
        return LinearMap::zeros(1, cols);
    }
    LinearMap::new(rows, cols, m).expect("finite restriction entries")
}

/// `L x = δᵀ(δx)`, two matrix-free passes.
pub fn apply_laplacian(sheaf: &CellularSheaf, x: &Cochain0) -> Result<Cochain0> {
    let y = apply_coboundary(sheaf, x)?;
    apply_coboundary_transpose(sheaf, &y)
}

/// Dense sheaf Laplacian assembled from its blocks: `Σ_e F_{i→e}ᵀF_{i→e}` on the
/// diagonal and `-F_{i→e}ᵀF_{j→e}` for each edge `e = {i, j}`.
pub fn laplacian_dense(sheaf: &CellularSheaf) -> LinearMap {
    let n = sheaf.c0_dim();
    let mut m = vec![0.0; n * n];
    for e in sheaf.graph().edges() {
        for a in [EdgeSide::Tail, EdgeSide::Head] {
            for b in [EdgeSide::Tail, EdgeSide::Head] {
                let sign = if a == b { 1.0 } else { -1.0 };
                let block = sheaf.restriction(e.id, a).transpose_mul(sheaf.restriction(e.id, b));
                let r0 = sheaf.vertex_offset(e.endpoint(a));
                let c0 = sheaf.vertex_offset(e.endpoint(b));
                for r in 0..block.nrows() {
                    for c in 0..block.ncols() {
                        m[(r0 + r) * n + c0 + c] += sign * block[(r, c)];
                    }
                }
            }
        }
    }
    LinearMap::new(n, n, m).expect("finite restriction entries")
}

/// `‖δx‖²`, the Dirichlet energy of `x`.
pub fn dirichlet_energy(sheaf: &CellularSheaf, x: &Cochain0) -> Result<f64> {
    Ok(apply_coboundary(sheaf, x)?.norm_sq())
}
