//! Deterministic problem instances for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sheafcoord::{
    CellularSheaf, Cochain0, EdgePotential, EdgeRestrictions, Graph, HomologicalProgram, LinearMap, NodeObjective,
};

/// Cycle on `n` vertices plus a chord from every third vertex to its
/// antipode.
pub fn ring_with_chords(n: usize) -> Graph {
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for i in (0..n / 2).step_by(3) {
        let j = i + n / 2;
        if j != i + 1 && (j + 1) % n != i {
            pairs.push((i, j));
        }
    }
    Graph::new(n, &pairs).expect("simple graph")
}

/// Random `d`-dimensional stalks and uniform restriction maps on
/// [`ring_with_chords`].
pub fn random_sheaf(n: usize, d: usize, seed: u64) -> CellularSheaf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = ring_with_chords(n);
    let m = graph.edge_count();
    let map = |rng: &mut ChaCha8Rng| {
        LinearMap::new(d, d, (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("finite")
    };
    let restrictions = (0..m)
        .map(|_| EdgeRestrictions::new(map(&mut rng), map(&mut rng)))
        .collect();
    CellularSheaf::new(graph, vec![d; n], vec![d; m], restrictions).expect("consistent shapes")
}

pub fn random_cochain(sheaf: &CellularSheaf, seed: u64) -> Cochain0 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat: Vec<f64> = (0..sheaf.c0_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Cochain0::from_flat(sheaf, &flat).expect("matching length")
}

/// Soft program: quadratic node costs and quadratic edge potentials.
pub fn soft_program(n: usize, d: usize, seed: u64) -> HomologicalProgram {
    let sheaf = random_sheaf(n, d, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb3);
    let objectives = (0..n)
        .map(|_| NodeObjective::Quadratic {
            reference: (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
            weight: 1.0,
        })
        .collect();
    let potentials = (0..sheaf.graph().edge_count())
        .map(|_| EdgePotential::Quadratic {
            target: (0..d).map(|_| rng.random_range(-0.5..0.5)).collect(),
            stiffness: 2.0,
        })
        .collect();
    HomologicalProgram::new(sheaf, objectives, potentials).expect("well-formed program")
}

/// Hard consensus program on the constant sheaf with one pinned vertex.
pub fn pinned_consensus(n: usize, d: usize) -> HomologicalProgram {
    let sheaf = CellularSheaf::constant(ring_with_chords(n), d).expect("constant sheaf");
    let mut objectives = vec![NodeObjective::Zero; n];
    objectives[0] = NodeObjective::FixedValue { value: vec![1.0; d] };
    let potentials = vec![EdgePotential::ZeroIndicator; sheaf.graph().edge_count()];
    HomologicalProgram::new(sheaf, objectives, potentials).expect("well-formed program")
}
