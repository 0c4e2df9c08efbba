//! Message-passing simulation of the ADMM solver.
//!
//! One agent per vertex. An agent stores its own state `x_i` and, for each
//! incident edge, the last restricted state `F_{j→e} x_j` received from the
//! neighbor together with copies of `z_e` and `y_e`. The tail endpoint owns
//! each edge: it computes `z_e`, `y_e` and mirrors them to the head.
//!
//! Setup (round 0): both endpoints of every edge send `F x⁰`; the owner sets
//! `z⁰ = (δx⁰)_e`, `y⁰ = 0` and mirrors them.
//!
//! Round `k ≥ 1`:
//!
//! 1. every agent solves its local x-update (no messages);
//! 2. both endpoints of every edge send `F_{i→e} x_i^{k+1}`;
//! 3. the owner runs the edge update and sends `(z_e, y_e)` to the head.
//!
//! Rounds therefore cost `3|E|` messages. Each agent runs the same kernels as
//! [`admm_solve_from`](crate::homprog::admm_solve_from) in the same order, so
//! the iterates agree bit for bit with the centralized solver.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::cochain::{Cochain0, Cochain1};
use crate::error::Result;
use crate::graph::{EdgeSide, Graph};
use crate::homprog::{
    compute_residuals, edge_target, edge_update, primal_update, trace_objective, vertex_damping, AdmmConfig,
    AdmmOutcome, HomologicalProgram, IterateState, IterationRecord, SolveStatus, SolveTrace, StopMonitor,
};
use crate::sheaf::CellularSheaf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    #[default]
    Sequential,
    /// Agent-local work of each phase runs on the rayon pool.
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DistConfig {
    pub admm: AdmmConfig,
    pub execution: ExecutionMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    /// Restricted vertex state `F_{i→e} x_i`.
    State,
    /// Mirrored edge variables `(z_e, y_e)`.
    Dual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub from: usize,
    pub to: usize,
    pub edge: usize,
    pub kind: MessageKind,
    pub payload: Vec<f64>,
}

/// Record of a single message, without its payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageRecord {
    pub from: usize,
    pub to: usize,
    pub edge: usize,
    pub kind: MessageKind,
    pub floats: usize,
}

/// An agent reading the edge-local data of `edge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadRecord {
    pub agent: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoundLog {
    /// `0` for the setup round.
    pub round: usize,
    pub messages: Vec<MessageRecord>,
    pub reads: Vec<ReadRecord>,
}

impl RoundLog {
    pub fn message_count(&self) -> usize {
        self.messages.len()
    }

    pub fn bytes(&self) -> usize {
        self.messages
            .iter()
            .map(|m| m.floats * std::mem::size_of::<f64>())
            .sum()
    }

    pub fn count_of(&self, kind: MessageKind) -> usize {
        self.messages.iter().filter(|m| m.kind == kind).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistOutcome {
    pub outcome: AdmmOutcome,
    pub rounds: Vec<RoundLog>,
}

impl DistOutcome {
    pub fn total_messages(&self) -> usize {
        self.rounds.iter().map(RoundLog::message_count).sum()
    }

    pub fn total_bytes(&self) -> usize {
        self.rounds.iter().map(RoundLog::bytes).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalityViolation {
    UnknownEdge {
        round: usize,
        edge: usize,
    },
    /// Sender or receiver is not an endpoint of the message's edge.
    NonIncidentMessage {
        round: usize,
        from: usize,
        to: usize,
        edge: usize,
    },
    /// An agent read data of an edge it is not incident to.
    NonIncidentRead {
        round: usize,
        agent: usize,
        edge: usize,
    },
}

impl fmt::Display for LocalityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalityViolation::UnknownEdge { round, edge } => write!(f, "round {round}: unknown edge {edge}"),
            LocalityViolation::NonIncidentMessage { round, from, to, edge } => {
                write!(
                    f,
                    "round {round}: message {from} -> {to} on edge {edge} between non-endpoints"
                )
            }
            LocalityViolation::NonIncidentRead { round, agent, edge } => {
                write!(f, "round {round}: agent {agent} read non-incident edge {edge}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LocalityReport {
    pub messages_checked: usize,
    pub reads_checked: usize,
    pub violations: Vec<LocalityViolation>,
}

impl LocalityReport {
    pub fn is_local(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every message travels along its edge between its two endpoints
/// and every read is of an incident edge.
pub fn audit_locality(graph: &Graph, rounds: &[RoundLog]) -> LocalityReport {
    let mut report = LocalityReport::default();
    for log in rounds {
        for m in &log.messages {
            report.messages_checked += 1;
            if m.edge >= graph.edge_count() {
                report.violations.push(LocalityViolation::UnknownEdge {
                    round: log.round,
                    edge: m.edge,
                });
                continue;
            }
            let e = graph.edge(m.edge);
            let ok = (m.from == e.tail && m.to == e.head) || (m.from == e.head && m.to == e.tail);
            if !ok {
                report.violations.push(LocalityViolation::NonIncidentMessage {
                    round: log.round,
                    from: m.from,
                    to: m.to,
                    edge: m.edge,
                });
            }
        }
        for r in &log.reads {
            report.reads_checked += 1;
            if r.edge >= graph.edge_count() {
                report.violations.push(LocalityViolation::UnknownEdge {
                    round: log.round,
                    edge: r.edge,
                });
            } else if !graph.is_incident(r.agent, r.edge) {
                report.violations.push(LocalityViolation::NonIncidentRead {
                    round: log.round,
                    agent: r.agent,
                    edge: r.edge,
                });
            }
        }
    }
    report
}

/// Edge-local data an agent keeps for one incident edge.
#[derive(Debug, Clone)]
struct EdgeSlot {
    edge: usize,
    side: EdgeSide,
    neighbor: usize,
    neighbor_restricted: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
}

/// `(edge, z_e, y_e)` after an edge update.
type EdgeUpdate = (usize, Vec<f64>, Vec<f64>);

#[derive(Debug, Clone)]
struct Agent {
    id: usize,
    tau: f64,
    x: Vec<f64>,
    slots: Vec<EdgeSlot>,
}

impl Agent {
    fn slot_mut(&mut self, edge: usize) -> &mut EdgeSlot {
        self.slots.iter_mut().find(|s| s.edge == edge).expect("incident edge")
    }

    fn slot(&self, edge: usize) -> &EdgeSlot {
        self.slots.iter().find(|s| s.edge == edge).expect("incident edge")
    }

    /// Phase 1: local x-update.
    fn update_x(&self, prog: &HomologicalProgram, rho: f64) -> Result<(Vec<f64>, Vec<ReadRecord>)> {
        let sheaf = prog.sheaf();
        let reads = self
            .slots
            .iter()
            .map(|s| ReadRecord {
                agent: self.id,
                edge: s.edge,
            })
            .collect();
        let terms = self.slots.iter().map(|s| {
            let t = edge_target(s.side, &s.neighbor_restricted, &s.z, &s.y);
            (sheaf.restriction(s.edge, s.side), t)
        });
        let x = primal_update(&prog.node_objectives()[self.id], &self.x, rho, self.tau, terms)?;
        Ok((x, reads))
    }

    /// Phase 2 outbox: `F_{i→e} x_i` to every neighbor.
    fn state_messages(&self, sheaf: &CellularSheaf) -> Vec<Message> {
        self.slots
            .iter()
            .map(|s| Message {
                from: self.id,
                to: s.neighbor,
                edge: s.edge,
                kind: MessageKind::State,
                payload: sheaf.restriction(s.edge, s.side).apply(&self.x),
            })
            .collect()
    }

    /// Phase 3 on owned edges: new `(z_e, y_e)` and the mirror messages.
    fn update_owned_edges(
        &self,
        prog: &HomologicalProgram,
        cfg: &AdmmConfig,
        setup: bool,
    ) -> Result<(Vec<EdgeUpdate>, Vec<Message>, Vec<ReadRecord>)> {
        let sheaf = prog.sheaf();
        let mut updates = Vec::new();
        let mut out = Vec::new();
        let mut reads = Vec::new();
        for s in self.slots.iter().filter(|s| s.side == EdgeSide::Tail) {
            reads.push(ReadRecord {
                agent: self.id,
                edge: s.edge,
            });
            let own = sheaf.restriction(s.edge, EdgeSide::Tail).apply(&self.x);
            let d: Vec<f64> = own.iter().zip(&s.neighbor_restricted).map(|(a, b)| a - b).collect();
            let (z, y) = if setup {
                let m = d.len();
                (d, vec![0.0; m])
            } else {
                edge_update(&prog.edge_potentials()[s.edge], &d, &s.y, &s.z, cfg)?
            };
            let mut payload = z.clone();
            payload.extend_from_slice(&y);
            out.push(Message {
                from: self.id,
                to: s.neighbor,
                edge: s.edge,
                kind: MessageKind::Dual,
                payload,
            });
            updates.push((s.edge, z, y));
        }
        Ok((updates, out, reads))
    }
}

struct Network<'a> {
    prog: &'a HomologicalProgram,
    cfg: DistConfig,
    agents: Vec<Agent>,
}

impl<'a> Network<'a> {
    fn new(prog: &'a HomologicalProgram, cfg: DistConfig, x0: &Cochain0) -> Self {
        let sheaf = prog.sheaf();
        let agents = (0..sheaf.graph().vertex_count())
            .map(|v| Agent {
                id: v,
                tau: vertex_damping(sheaf, v, &cfg.admm),
                x: x0.block(v).to_vec(),
                slots: sheaf
                    .graph()
                    .incident(v)
                    .iter()
                    .map(|inc| EdgeSlot {
                        edge: inc.edge,
                        side: inc.side,
                        neighbor: inc.neighbor,
                        neighbor_restricted: vec![0.0; sheaf.edge_dim(inc.edge)],
                        z: vec![0.0; sheaf.edge_dim(inc.edge)],
                        y: vec![0.0; sheaf.edge_dim(inc.edge)],
                    })
                    .collect(),
            })
            .collect();
        Self { prog, cfg, agents }
    }

    fn par(&self) -> bool {
        self.cfg.execution == ExecutionMode::Parallel
    }

    fn map_agents<T: Send>(&self, f: impl Fn(&Agent) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        if self.par() {
            self.agents.par_iter().map(f).collect()
        } else {
            self.agents.iter().map(f).collect()
        }
    }

    /// Delivers messages in (receiver, edge, kind) order.
    fn deliver(&mut self, mut messages: Vec<Message>, log: &mut RoundLog) {
        messages.sort_by_key(|m| (m.to, m.edge, m.kind, m.from));
        for m in messages {
            log.messages.push(MessageRecord {
                from: m.from,
                to: m.to,
                edge: m.edge,
                kind: m.kind,
                floats: m.payload.len(),
            });
            let slot = self.agents[m.to].slot_mut(m.edge);
            match m.kind {
                MessageKind::State => slot.neighbor_restricted = m.payload,
                MessageKind::Dual => {
                    let k = m.payload.len() / 2;
                    slot.z = m.payload[..k].to_vec();
                    slot.y = m.payload[k..].to_vec();
                }
            }
        }
    }

    fn exchange_states(&mut self, log: &mut RoundLog) -> Result<()> {
        let sheaf = self.prog.sheaf();
        let outboxes = self.map_agents(|a| Ok(a.state_messages(sheaf)))?;
        self.deliver(outboxes.into_iter().flatten().collect(), log);
        Ok(())
    }

    fn edge_phase(&mut self, setup: bool, log: &mut RoundLog) -> Result<()> {
        let (prog, admm) = (self.prog, self.cfg.admm);
        let results = self.map_agents(|a| a.update_owned_edges(prog, &admm, setup))?;
        let mut outgoing = Vec::new();
        for (agent, (updates, msgs, reads)) in results.into_iter().enumerate() {
            for (edge, z, y) in updates {
                let slot = self.agents[agent].slot_mut(edge);
                slot.z = z;
                slot.y = y;
            }
            outgoing.extend(msgs);
            log.reads.extend(reads);
        }
        self.deliver(outgoing, log);
        Ok(())
    }

    fn setup(&mut self) -> Result<RoundLog> {
        let mut log = RoundLog::default();
        self.exchange_states(&mut log)?;
        self.edge_phase(true, &mut log)?;
        Ok(log)
    }

    fn round(&mut self, k: usize) -> Result<RoundLog> {
        let mut log = RoundLog {
            round: k,
            ..RoundLog::default()
        };
        let rho = self.cfg.admm.rho;
        let prog = self.prog;
        let updates = self.map_agents(|a| a.update_x(prog, rho))?;
        for (agent, (x, reads)) in self.agents.iter_mut().zip(updates) {
            agent.x = x;
            log.reads.extend(reads);
        }
        self.exchange_states(&mut log)?;
        self.edge_phase(false, &mut log)?;
        Ok(log)
    }

    /// Observer view of the global iterate, taking `z`, `y` from edge owners.
    fn snapshot(&self) -> Result<IterateState> {
        let sheaf = self.prog.sheaf();
        let x = Cochain0::from_blocks(sheaf, self.agents.iter().map(|a| a.x.clone()).collect())?;
        let mut owned: BTreeMap<usize, (&[f64], &[f64])> = BTreeMap::new();
        for e in sheaf.graph().edges() {
            let s = self.agents[e.tail].slot(e.id);
            owned.insert(e.id, (&s.z, &s.y));
        }
        let z = Cochain1::from_blocks(sheaf, owned.values().map(|(z, _)| z.to_vec()).collect())?;
        let y = Cochain1::from_blocks(sheaf, owned.values().map(|(_, y)| y.to_vec()).collect())?;
        Ok(IterateState { x, z, y })
    }
}

/// Distributed ADMM from `x⁰ = 0`.
pub fn run_distributed(prog: &HomologicalProgram, cfg: &DistConfig) -> Result<DistOutcome> {
    run_distributed_from(prog, cfg, &Cochain0::zeros(prog.sheaf()))
}

/// Runs the agents round by round until the observer-side stopping test fires.
pub fn run_distributed_from(prog: &HomologicalProgram, cfg: &DistConfig, x0: &Cochain0) -> Result<DistOutcome> {
    cfg.admm.validate(prog)?;
    x0.check_conforms(prog.sheaf())?;
    let admm = cfg.admm;
    let mut net = Network::new(prog, *cfg, x0);
    let mut rounds = vec![net.setup()?];
    let mut state = net.snapshot()?;
    let mut monitor = StopMonitor::new(&admm, prog);
    let mut records = Vec::new();
    let mut status = SolveStatus::MaxIters;

    for k in 1..=admm.max_iters {
        rounds.push(net.round(k)?);
        let next = net.snapshot()?;
        let res = compute_residuals(prog, &state, &next, admm.rho)?;
        let x_change = next.x.sub(&state.x).norm();
        let objective = trace_objective(prog, &next.x)?;
        let snapshot = (admm.snapshot_every > 0 && k % admm.snapshot_every == 0).then(|| next.clone());
        records.push(IterationRecord {
            iter: k,
            primal_residual: res.primal,
            dual_residual: res.dual,
            x_change,
            objective,
            snapshot,
        });
        state = next;
        if let Some(s) = monitor.observe(res, x_change) {
            status = s;
            break;
        }
    }

    Ok(DistOutcome {
        outcome: AdmmOutcome {
            x: state.x.clone(),
            state,
            trace: SolveTrace { records, status },
        },
        rounds,
    })
}
