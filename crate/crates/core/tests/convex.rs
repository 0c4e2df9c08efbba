mod common;

use common::*;
use rand::Rng;
use sheafcoord::dynamics::nonlinear_laplacian_apply;
use sheafcoord::{EdgePotential, NodeObjective, ProxQuery};

fn node_prox_value(f: &NodeObjective, v: f64, rho: f64, x: f64) -> f64 {
    f.value(&[x]).unwrap() + (x - v) * (x - v) / (2.0 * rho)
}

fn edge_prox_value(u: &EdgePotential, v: f64, rho: f64, w: f64) -> f64 {
    u.value(&[w]).unwrap() + 0.5 * rho * (w - v) * (w - v)
}

#[test]
fn node_prox_beats_grid() {
    let mut r = rng(21);
    for _ in 0..200 {
        let v: f64 = r.random_range(-5.0..5.0);
        let rho: f64 = r.random_range(0.1..4.0);
        let lo: f64 = r.random_range(-3.0..0.0);
        let objs = [
            NodeObjective::Zero,
            NodeObjective::Quadratic {
                reference: vec![r.random_range(-3.0..3.0)],
                weight: r.random_range(0.0..5.0),
            },
            NodeObjective::FixedValue {
                value: vec![r.random_range(-3.0..3.0)],
            },
            NodeObjective::Box {
                lower: vec![lo],
                upper: vec![lo + r.random_range(0.0..3.0)],
            },
        ];
        for f in objs {
            let got = f.prox(&ProxQuery::new(vec![v], rho).unwrap()).unwrap()[0];
            let (glo, ghi) = match &f {
                NodeObjective::FixedValue { value } => (value[0], value[0]),
                NodeObjective::Box { lower, upper } => (lower[0], upper[0]),
                _ => (-20.0, 20.0),
            };
            let (_, best) = grid_minimize(|x| node_prox_value(&f, v, rho, x), glo, ghi);
            let val = node_prox_value(&f, v, rho, got);
            assert!(val <= best + 1e-6, "{f:?} v={v} rho={rho}: {val} > {best}");
        }
    }
}

#[test]
fn edge_prox_beats_grid() {
    let mut r = rng(22);
    for _ in 0..200 {
        let v: f64 = r.random_range(-5.0..5.0);
        let rho: f64 = r.random_range(0.1..4.0);
        let pots = [
            EdgePotential::quadratic(vec![r.random_range(-3.0..3.0)], r.random_range(0.1..5.0)),
            EdgePotential::Huber {
                target: vec![r.random_range(-3.0..3.0)],
                stiffness: r.random_range(0.1..5.0),
                threshold: r.random_range(0.05..2.0),
            },
            EdgePotential::ZeroIndicator,
        ];
        for u in pots {
            let got = u.prox(&ProxQuery::new(vec![v], rho).unwrap()).unwrap()[0];
            let (glo, ghi) = match u {
                EdgePotential::ZeroIndicator => (0.0, 0.0),
                _ => (-20.0, 20.0),
            };
            let (_, best) = grid_minimize(|w| edge_prox_value(&u, v, rho, w), glo, ghi);
            let val = edge_prox_value(&u, v, rho, got);
            assert!(val <= best + 1e-6, "{u:?} v={v} rho={rho}: {val} > {best}");
        }
    }
}

#[test]
fn huber_prox_examples() {
    let u = EdgePotential::Huber {
        target: vec![0.0],
        stiffness: 1.0,
        threshold: 1.0,
    };
    assert!((u.prox(&ProxQuery::new(vec![5.0], 1.0).unwrap()).unwrap()[0] - 4.0).abs() < 1e-12);
    assert!((u.prox(&ProxQuery::new(vec![1.0], 1.0).unwrap()).unwrap()[0] - 0.5).abs() < 1e-12);
}

#[test]
fn edge_gradients_match_finite_differences() {
    let mut r = rng(23);
    for _ in 0..100 {
        let dim = r.random_range(1..4);
        let target: Vec<f64> = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| r.random_range(-3.0..3.0)).collect();
        let pots = [
            EdgePotential::quadratic(target.clone(), r.random_range(0.1..3.0)),
            EdgePotential::Huber {
                target,
                stiffness: r.random_range(0.1..3.0),
                threshold: r.random_range(0.1..2.0),
            },
        ];
        for u in pots {
            let g = u.gradient(&y).unwrap();
            let fd = fd_gradient(|p| u.value(p).unwrap(), &y, 1e-6);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-5 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn nonlinear_laplacian_is_energy_gradient() {
    let mut r = rng(24);
    for _ in 0..20 {
        let sheaf = random_sheaf(&mut r, 6, 3, 2);
        let pots: Vec<EdgePotential> = (0..sheaf.graph().edge_count())
            .map(|e| {
                let t: Vec<f64> = (0..sheaf.edge_dim(e)).map(|_| r.random_range(-1.0..1.0)).collect();
                if e % 2 == 0 {
                    EdgePotential::quadratic(t, r.random_range(0.5..2.0))
                } else {
                    EdgePotential::Huber {
                        target: t,
                        stiffness: r.random_range(0.5..2.0),
                        threshold: r.random_range(0.2..1.0),
                    }
                }
            })
            .collect();
        let x = random_cochain(&mut r, &sheaf);
        let g = nonlinear_laplacian_apply(&sheaf, &pots, &x).unwrap().to_flat();
        let fd = fd_gradient(|p| total_energy(&sheaf, &pots, p), &x.to_flat(), 1e-6);
        let scale = fd.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-5 * scale, "{a} vs {b}");
        }
    }
}
