//! Acceptance harness: one line per criterion, nonzero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::DVector;
use rand::Rng;
use sheafcoord::dynamics::nonlinear_laplacian_apply;
use sheafcoord::{
    admm_solve, admm_solve_from, apply_coboundary, apply_laplacian, audit_locality, global_section_basis, h0_dimension,
    h1_dimension, laplacian_dense, linear_heat_flow, nonlinear_heat_flow, run_distributed_from, AdmmConfig,
    CellularSheaf, Cochain0, DistConfig, EdgePotential, FlowConfig, Graph, HomologicalProgram, NodeObjective,
    ProxQuery, SolveStatus, DEFAULT_NULL_TOL,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < budget, || format!("took {took:?}, budget {budget:?}"))
}

fn graph_laplacian_recovery() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = r.random_range(2..=12);
        let g = random_graph(&mut r, n, 0.4);
        let sheaf = CellularSheaf::constant(g.clone(), 1).map_err(|e| e.to_string())?;
        let diff = (laplacian_dense(&sheaf).to_dmatrix() - graph_laplacian_oracle(&g)).amax();
        worst = worst.max(diff);
    }
    ensure(worst <= 1e-12, || format!("max |L - (D - A)| = {worst:e}"))?;
    within_budget(start, Duration::from_secs(1))?;
    Ok(format!("10 graphs, max deviation {worst:e}"))
}

fn average_consensus() -> Outcome {
    let start = Instant::now();
    let sheaf = CellularSheaf::constant(Graph::path(4).unwrap(), 1).unwrap();
    let x0 = Cochain0::from_flat(&sheaf, &[3.0, 1.0, 4.0, 2.0]).unwrap();
    let trace = linear_heat_flow(&sheaf, &x0, &FlowConfig::default()).map_err(|e| e.to_string())?;
    let fin = trace.final_state.to_flat();
    let err = fin.iter().map(|v| (v - 2.5).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-6, || format!("final {fin:?}"))?;
    let drift = trace
        .samples
        .iter()
        .map(|s| (s.state.to_flat().iter().sum::<f64>() - 10.0).abs())
        .fold(0.0, f64::max);
    ensure(drift <= 1e-9, || format!("sum drift {drift:e}"))?;
    within_budget(start, Duration::from_secs(1))?;
    Ok(format!(
        "{:?} after {} steps, max error {err:e}, sum drift {drift:e}",
        trace.status, trace.steps_taken
    ))
}

fn cohomology_anchors() -> Outcome {
    // oracle first
    let sign4 = CellularSheaf::sign(Graph::cycle(4).unwrap()).unwrap();
    let oracle4 = 4 - integer_rank(integer_coboundary(&sign4));

    let sign3 = CellularSheaf::sign(Graph::cycle(3).unwrap()).unwrap();
    let h0 = h0_dimension(&sign3, DEFAULT_NULL_TOL).map_err(|e| e.to_string())?;
    ensure(h0 == 0, || format!("sign C3: dim H0 = {h0}"))?;
    for n in 3..=8 {
        let sheaf = CellularSheaf::constant(Graph::cycle(n).unwrap(), 1).unwrap();
        let h0 = h0_dimension(&sheaf, DEFAULT_NULL_TOL).map_err(|e| e.to_string())?;
        let h1 = h1_dimension(&sheaf, DEFAULT_NULL_TOL).map_err(|e| e.to_string())?;
        ensure(h0 == 1 && h1 == 1, || format!("constant C{n}: H0 = {h0}, H1 = {h1}"))?;
    }
    let h0 = h0_dimension(&sign4, DEFAULT_NULL_TOL).map_err(|e| e.to_string())?;
    ensure(h0 == oracle4, || format!("sign C4: dim H0 = {h0}, oracle {oracle4}"))?;
    Ok(format!(
        "sign C3 H0 = 0; constant C3..C8 H0 = H1 = 1; sign C4 H0 = {h0} (oracle {oracle4})"
    ))
}

fn psd_and_kernel_identities() -> Outcome {
    let start = Instant::now();
    let mut r = rng(104);
    let mut sections = 0;
    for i in 0..50 {
        // alternate rich and thin edge stalks so some sheaves have sections
        let sheaf = random_sheaf(&mut r, 7, 4, if i % 2 == 0 { 3 } else { 1 });
        let d = coboundary_oracle(&sheaf);
        let l = laplacian_dense(&sheaf).to_dmatrix();
        let block_err = (&l - d.transpose() * &d).amax();
        ensure(block_err <= 1e-12, || {
            format!("sheaf {i}: block formula off by {block_err:e}")
        })?;

        let x = random_cochain(&mut r, &sheaf);
        let xv = DVector::from_vec(x.to_flat());
        let q = xv.dot(&(&l * &xv));
        let e = apply_coboundary(&sheaf, &x).unwrap().norm_sq();
        ensure((q - e).abs() <= 1e-10 * e.max(1e-300) || (q - e).abs() <= 1e-14, || {
            format!("sheaf {i}: x'Lx = {q}, |dx|^2 = {e}")
        })?;

        let basis = global_section_basis(&sheaf, DEFAULT_NULL_TOL).map_err(|e| e.to_string())?;
        for b in &basis.basis {
            let lb = apply_laplacian(&sheaf, b).unwrap().max_abs();
            ensure(lb < 1e-9, || format!("sheaf {i}: |L b| = {lb:e}"))?;
        }
        sections += basis.dimension();
        for k in psd_kernel(&l, 1e-14) {
            let kx = Cochain0::from_flat(&sheaf, &k).unwrap();
            if apply_laplacian(&sheaf, &kx).unwrap().max_abs() < 1e-12 {
                let dk = apply_coboundary(&sheaf, &kx).unwrap().max_abs();
                ensure(dk < 1e-6, || format!("sheaf {i}: Lx ~ 0 but |dx| = {dk:e}"))?;
            }
        }
    }
    within_budget(start, Duration::from_secs(5))?;
    Ok(format!("50 sheaves, {sections} section basis vectors checked"))
}

fn nonlinear_target_hitting() -> Outcome {
    let start = Instant::now();
    let mut r = rng(105);
    let mut worst = 0.0f64;
    let mut rejected = 0;
    let mut i = 0;
    while i < 10 {
        // explicit Euler needs O(κ) steps; keep instances it can finish
        let sheaf = random_sheaf(&mut r, 6, 3, 2);
        let l = laplacian_dense(&sheaf).to_dmatrix();
        if sheaf.graph().edge_count() == 0 || condition_number(&l) > 1e3 {
            rejected += 1;
            continue;
        }
        let xr = random_cochain(&mut r, &sheaf);
        let b = apply_coboundary(&sheaf, &xr).unwrap();
        let pots: Vec<EdgePotential> = b
            .blocks()
            .iter()
            .map(|t| EdgePotential::quadratic(t.clone(), r.random_range(0.5..2.0)))
            .collect();
        let x0 = Cochain0::zeros(&sheaf);
        let trace = nonlinear_heat_flow(&sheaf, &pots, &x0, &FlowConfig::default()).map_err(|e| e.to_string())?;
        let res = apply_coboundary(&sheaf, &trace.final_state).unwrap().sub(&b).max_abs();
        ensure(res < 1e-5, || {
            format!("instance {i}: {:?}, |dx - b| = {res:e}", trace.status)
        })?;
        worst = worst.max(res);
        i += 1;
    }
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!(
        "10 flows (kappa(L) <= 1e3, {rejected} draws rejected), max |dx - b| = {worst:e}"
    ))
}

fn pinned_consensus() -> Outcome {
    let sheaf = CellularSheaf::constant(Graph::path(5).unwrap(), 1).unwrap();
    let mut objs = vec![NodeObjective::Zero; 5];
    objs[0] = NodeObjective::FixedValue { value: vec![7.0] };
    let prog = HomologicalProgram::hard(sheaf, objs).unwrap();
    let cfg = AdmmConfig {
        rho: 1.0,
        max_iters: 10_000,
        primal_tol: 1e-10,
        dual_tol: 1e-10,
        ..AdmmConfig::default()
    };
    let out = admm_solve(&prog, &cfg).map_err(|e| e.to_string())?;
    ensure(out.trace.status == SolveStatus::Converged, || {
        format!("status {:?}", out.trace.status)
    })?;
    let err = out.x.to_flat().iter().map(|v| (v - 7.0).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-8, || format!("max |x - 7| = {err:e}"))?;
    Ok(format!(
        "converged in {} iterations, max |x - 7| = {err:e}",
        out.trace.iterations()
    ))
}

fn formation_control() -> Outcome {
    let p = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]];
    let sheaf = CellularSheaf::constant(Graph::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap(), 2).unwrap();
    let d_star: Vec<Vec<f64>> = sheaf
        .graph()
        .edges()
        .iter()
        .map(|e| vec![p[e.tail][0] - p[e.head][0], p[e.tail][1] - p[e.head][1]])
        .collect();
    let pots = d_star
        .iter()
        .map(|d| EdgePotential::quadratic(d.clone(), 1.0))
        .collect();
    let prog = HomologicalProgram::new(sheaf, vec![NodeObjective::Zero; 3], pots).unwrap();
    let cfg = AdmmConfig::default();
    let out = admm_solve(&prog, &cfg).map_err(|e| e.to_string())?;
    let dx = apply_coboundary(prog.sheaf(), &out.x).unwrap();
    let err = dx
        .blocks()
        .iter()
        .zip(&d_star)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    ensure(err <= 1e-6, || format!("max |dx - d*| = {err:e}"))?;

    let c = [2.0, -3.5];
    let shift = Cochain0::from_flat(prog.sheaf(), &[c[0], c[1], c[0], c[1], c[0], c[1]]).unwrap();
    let moved = admm_solve_from(&prog, &cfg, &shift).map_err(|e| e.to_string())?;
    let gauge = moved.x.sub(&out.x).sub(&shift).max_abs();
    ensure(gauge <= 1e-6, || format!("translation gauge error {gauge:e}"))?;
    Ok(format!("max |dx - d*| = {err:e}, gauge error {gauge:e}"))
}

fn centralized_equals_distributed() -> Outcome {
    let mut r = rng(108);
    let mut worst = 0.0f64;
    let programs = 6;
    for i in 0..programs {
        let sheaf = random_sheaf(&mut r, 6, 3, 2);
        let n = sheaf.graph().vertex_count();
        let objs = (0..n)
            .map(|v| {
                let dim = sheaf.vertex_dim(v);
                match v % 3 {
                    0 => NodeObjective::Quadratic {
                        reference: (0..dim).map(|_| r.random_range(-1.0..1.0)).collect(),
                        weight: 1.0,
                    },
                    1 => NodeObjective::Box {
                        lower: vec![-0.5; dim],
                        upper: vec![0.5; dim],
                    },
                    _ => NodeObjective::Zero,
                }
            })
            .collect();
        let pots = (0..sheaf.graph().edge_count())
            .map(|e| {
                let t: Vec<f64> = (0..sheaf.edge_dim(e)).map(|_| r.random_range(-1.0..1.0)).collect();
                if e % 2 == 0 {
                    EdgePotential::quadratic(t, 1.5)
                } else {
                    EdgePotential::Huber {
                        target: t,
                        stiffness: 1.0,
                        threshold: 0.4,
                    }
                }
            })
            .collect();
        let prog = HomologicalProgram::new(sheaf, objs, pots).map_err(|e| e.to_string())?;
        let x0 = random_cochain(&mut r, prog.sheaf());
        let cfg = DistConfig::default();
        let central = admm_solve_from(&prog, &cfg.admm, &x0).map_err(|e| e.to_string())?;
        let dist = run_distributed_from(&prog, &cfg, &x0).map_err(|e| e.to_string())?;
        let gap = dist.outcome.x.max_abs_diff(&central.x);
        ensure(gap <= 1e-9, || format!("program {i}: gap {gap:e}"))?;
        let audit = audit_locality(prog.sheaf().graph(), &dist.rounds);
        ensure(audit.is_local(), || {
            format!("program {i}: {:?}", audit.violations.first())
        })?;
        let again = run_distributed_from(&prog, &cfg, &x0).map_err(|e| e.to_string())?;
        ensure(again == dist, || format!("program {i}: repeat run differs"))?;
        worst = worst.max(gap);
    }
    Ok(format!(
        "{programs} programs, max gap {worst:e}, audits clean, repeats identical"
    ))
}

fn prox_correctness() -> Outcome {
    let mut r = rng(109);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let v: f64 = r.random_range(-5.0..5.0);
        let rho: f64 = r.random_range(0.1..4.0);
        let lo: f64 = r.random_range(-3.0..0.0);
        let hi = lo + r.random_range(0.0..3.0);
        let node = [
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
                upper: vec![hi],
            },
        ];
        for f in node {
            let obj = |x: f64| f.value(&[x]).unwrap() + (x - v) * (x - v) / (2.0 * rho);
            let (glo, ghi) = match &f {
                NodeObjective::FixedValue { value } => (value[0], value[0]),
                NodeObjective::Box { lower, upper } => (lower[0], upper[0]),
                _ => (-20.0, 20.0),
            };
            let got = f.prox(&ProxQuery::new(vec![v], rho).unwrap()).unwrap()[0];
            let gap = obj(got) - grid_minimize(obj, glo, ghi).1;
            ensure(gap <= 1e-6, || format!("{f:?} at v={v}, rho={rho}: gap {gap:e}"))?;
            worst = worst.max(gap);
        }
        let edge = [
            EdgePotential::quadratic(vec![r.random_range(-3.0..3.0)], r.random_range(0.1..5.0)),
            EdgePotential::Huber {
                target: vec![r.random_range(-3.0..3.0)],
                stiffness: r.random_range(0.1..5.0),
                threshold: r.random_range(0.05..2.0),
            },
            EdgePotential::ZeroIndicator,
        ];
        for u in edge {
            let obj = |w: f64| u.value(&[w]).unwrap() + 0.5 * rho * (w - v) * (w - v);
            let (glo, ghi) = match u {
                EdgePotential::ZeroIndicator => (0.0, 0.0),
                _ => (-20.0, 20.0),
            };
            let got = u.prox(&ProxQuery::new(vec![v], rho).unwrap()).unwrap()[0];
            let gap = obj(got) - grid_minimize(obj, glo, ghi).1;
            ensure(gap <= 1e-6, || format!("{u:?} at v={v}, rho={rho}: gap {gap:e}"))?;
            worst = worst.max(gap);
        }
    }
    Ok(format!(
        "700 scalar instances, worst excess over grid optimum {worst:e}"
    ))
}

fn gradient_consistency() -> Outcome {
    let mut r = rng(110);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 20 {
        let sheaf = random_sheaf(&mut r, 6, 3, 2);
        if sheaf.graph().edge_count() == 0 {
            continue;
        }
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
        let g = nonlinear_laplacian_apply(&sheaf, &pots, &x)
            .map_err(|e| e.to_string())?
            .to_flat();
        let fd = fd_gradient(|p| total_energy(&sheaf, &pots, p), &x.to_flat(), 1e-6);
        let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let den = fd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let rel = num / den;
        ensure(rel <= 1e-5, || format!("instance {done}: relative error {rel:e}"))?;
        worst = worst.max(rel);
        done += 1;
    }
    Ok(format!("20 instances, max relative error {worst:e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("graph Laplacian recovery", graph_laplacian_recovery),
        ("average consensus", average_consensus),
        ("cohomology anchors", cohomology_anchors),
        ("PSD and kernel identities", psd_and_kernel_identities),
        ("nonlinear flow hits targets", nonlinear_target_hitting),
        ("pinned consensus via ADMM", pinned_consensus),
        ("formation control", formation_control),
        ("centralized equals distributed", centralized_equals_distributed),
        ("prox correctness", prox_correctness),
        ("gradient consistency", gradient_consistency),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
