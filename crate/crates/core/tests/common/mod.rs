//! Independent oracles and random instance generators shared by the
//! integration tests and the acceptance harness.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sheafcoord::{CellularSheaf, Cochain0, EdgePotential, EdgeRestrictions, Graph, LinearMap};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Simple graph on `n` vertices with each pair present with probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                if rng.random_bool(0.5) {
                    pairs.push((i, j));
                } else {
                    pairs.push((j, i));
                }
            }
        }
    }
    Graph::new(n, &pairs).unwrap()
}

pub fn random_map(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> LinearMap {
    let entries = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    LinearMap::new(rows, cols, entries).unwrap()
}

/// Sheaf with random stalk dimensions (vertices `1..=max_vdim`, edges
/// `1..=max_edim`) and uniform random restriction maps.
pub fn random_sheaf(rng: &mut ChaCha8Rng, max_n: usize, max_vdim: usize, max_edim: usize) -> CellularSheaf {
    let n = rng.random_range(2..=max_n);
    let graph = random_graph(rng, n, 0.5);
    let vdims: Vec<usize> = (0..n).map(|_| rng.random_range(1..=max_vdim)).collect();
    let edims: Vec<usize> = (0..graph.edge_count())
        .map(|_| rng.random_range(1..=max_edim))
        .collect();
    let maps = graph
        .edges()
        .iter()
        .map(|e| {
            EdgeRestrictions::new(
                random_map(rng, edims[e.id], vdims[e.tail]),
                random_map(rng, edims[e.id], vdims[e.head]),
            )
        })
        .collect();
    CellularSheaf::new(graph, vdims, edims, maps).unwrap()
}

pub fn random_cochain(rng: &mut ChaCha8Rng, sheaf: &CellularSheaf) -> Cochain0 {
    let flat: Vec<f64> = (0..sheaf.c0_dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
    Cochain0::from_flat(sheaf, &flat).unwrap()
}

/// Dense coboundary assembled entry by entry from the restriction maps.
pub fn coboundary_oracle(sheaf: &CellularSheaf) -> DMatrix<f64> {
    let vdims = sheaf.vertex_dims();
    let edims = sheaf.edge_dims();
    let mut voff = vec![0];
    for d in vdims {
        voff.push(voff.last().unwrap() + d);
    }
    let mut row = 0;
    let mut m = DMatrix::zeros(edims.iter().sum::<usize>().max(1), voff[vdims.len()]);
    for e in sheaf.graph().edges() {
        let r = &sheaf.restrictions()[e.id];
        for i in 0..edims[e.id] {
            for j in 0..vdims[e.tail] {
                m[(row + i, voff[e.tail] + j)] += r.tail.get(i, j);
            }
            for j in 0..vdims[e.head] {
                m[(row + i, voff[e.head] + j)] -= r.head.get(i, j);
            }
        }
        row += edims[e.id];
    }
    m
}

/// `D - A` of the underlying graph.
pub fn graph_laplacian_oracle(graph: &Graph) -> DMatrix<f64> {
    let n = graph.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for &(a, b) in &graph.pairs() {
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
        l[(a, b)] -= 1.0;
        l[(b, a)] -= 1.0;
    }
    l
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn integer_rank(mut m: Vec<Vec<i128>>) -> usize {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in (rank + 1)..rows {
            for k in (c + 1)..cols {
                m[r][k] = (m[rank][c] * m[r][k] - m[r][c] * m[rank][k]) / prev;
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Rank of a real matrix by Gaussian elimination with partial pivoting.
pub fn row_reduction_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (p, best) =
            (rank..rows)
                .map(|r| (r, a[(r, c)].abs()))
                .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol * scale {
            continue;
        }
        a.swap_rows(rank, p);
        for r in (rank + 1)..rows {
            let f = a[(r, c)] / a[(rank, c)];
            for k in c..cols {
                a[(r, k)] -= f * a[(rank, k)];
            }
        }
        rank += 1;
    }
    rank
}

/// Integer coboundary of a sheaf whose restriction maps have integer entries.
pub fn integer_coboundary(sheaf: &CellularSheaf) -> Vec<Vec<i128>> {
    let d = coboundary_oracle(sheaf);
    (0..d.nrows())
        .map(|r| (0..d.ncols()).map(|c| d[(r, c)].round() as i128).collect())
        .collect()
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::MIN, f64::max)
}

/// Orthonormal basis of the numerical kernel of a symmetric PSD matrix.
pub fn psd_kernel(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let top = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1.0);
    (0..m.nrows())
        .filter(|&k| eig.eigenvalues[k].abs() <= tol * top)
        .map(|k| eig.eigenvectors.column(k).iter().cloned().collect())
        .collect()
}

/// `Σ_e U_e((δx)_e)` computed from the dense coboundary oracle.
pub fn total_energy(sheaf: &CellularSheaf, pots: &[EdgePotential], x: &[f64]) -> f64 {
    let d = coboundary_oracle(sheaf);
    let dx = &d * nalgebra::DVector::from_column_slice(x);
    let mut off = 0;
    let mut total = 0.0;
    for (e, p) in pots.iter().enumerate() {
        let m = sheaf.edge_dim(e);
        total += p.value(&dx.as_slice()[off..off + m]).unwrap();
        off += m;
    }
    total
}

/// Central finite-difference gradient with step `h`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|k| {
            xp[k] = x[k] + h;
            let up = f(&xp);
            xp[k] = x[k] - h;
            let down = f(&xp);
            xp[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Minimum of a scalar function over `[lo, hi]` by a uniform grid followed by
/// successively finer grids around the incumbent. Returns `(argmin, value)`.
pub fn grid_minimize(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut best = (lo, f(lo));
    let at_hi = f(hi);
    if at_hi < best.1 {
        best = (hi, at_hi);
    }
    for _ in 0..8 {
        let n = 2000;
        let step = (b - a) / n as f64;
        for k in 0..=n {
            let t = a + step * k as f64;
            let v = f(t);
            if v < best.1 {
                best = (t, v);
            }
        }
        a = (best.0 - 2.0 * step).max(lo);
        b = (best.0 + 2.0 * step).min(hi);
    }
    best
}

/// Ratio of the largest to the smallest nonzero eigenvalue of a PSD matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let top = eig.iter().cloned().fold(0.0, f64::max);
    let low = eig
        .iter()
        .cloned()
        .filter(|v| *v > 1e-9 * top)
        .fold(f64::INFINITY, f64::min);
    top / low
}
