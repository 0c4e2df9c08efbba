//! JSON scenario documents.

use serde::{Deserialize, Serialize};
use sheafcoord::{
    AdmmConfig, CellularSheaf, Cochain0, EdgePotential, EdgeRestrictions, EdgeSide, FlowConfig, Graph,
    HomologicalProgram, LinearMap, NodeObjective, SheafParts, XUpdateDamping,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Seeds the power iteration used for automatic flow step sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub graph: GraphSpec,
    pub sheaf: SheafSpec,
    /// Defaults to `zero` at every vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectives: Option<Vec<ObjectiveSpec>>,
    /// Defaults to `zero_indicator` on every edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<Vec<PotentialSpec>>,
    /// Per-vertex initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub flow: FlowSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheafSpec {
    pub vertex_dims: Vec<usize>,
    pub edge_dims: Vec<usize>,
    pub restrictions: Vec<RestrictionSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideSpec {
    Tail,
    Head,
}

impl From<SideSpec> for EdgeSide {
    fn from(s: SideSpec) -> Self {
        match s {
            SideSpec::Tail => EdgeSide::Tail,
            SideSpec::Head => EdgeSide::Head,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionSpec {
    pub edge: usize,
    pub side: SideSpec,
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub entries: Vec<f64>,
}

/// `null` bounds stand for `±∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Zero,
    Quadratic {
        reference: Vec<f64>,
        weight: f64,
    },
    FixedValue {
        value: Vec<f64>,
    },
    Box {
        lower: Vec<Option<f64>>,
        upper: Vec<Option<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Quadratic {
        target: Vec<f64>,
        stiffness: f64,
    },
    ZeroIndicator,
    Huber {
        target: Vec<f64>,
        stiffness: f64,
        threshold: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingSpec {
    Gershgorin,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub rho: f64,
    pub max_iters: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub inner_diffusion_steps: usize,
    pub inner_step: f64,
    pub damping: DampingSpec,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self::from_config(&AdmmConfig::default())
    }
}

impl SolverSpec {
    pub fn from_config(c: &AdmmConfig) -> Self {
        Self {
            rho: c.rho,
            max_iters: c.max_iters,
            primal_tol: c.primal_tol,
            dual_tol: c.dual_tol,
            inner_diffusion_steps: c.inner_diffusion_steps,
            inner_step: c.inner_step,
            damping: match c.damping {
                XUpdateDamping::Gershgorin => DampingSpec::Gershgorin,
                XUpdateDamping::None => DampingSpec::None,
            },
        }
    }

    pub fn to_config(&self, seed: u64) -> AdmmConfig {
        AdmmConfig {
            rho: self.rho,
            max_iters: self.max_iters,
            primal_tol: self.primal_tol,
            dual_tol: self.dual_tol,
            inner_diffusion_steps: self.inner_diffusion_steps,
            inner_step: self.inner_step,
            seed,
            damping: match self.damping {
                DampingSpec::Gershgorin => XUpdateDamping::Gershgorin,
                DampingSpec::None => XUpdateDamping::None,
            },
            snapshot_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSpec {
    /// `0` picks the step from a spectral estimate.
    pub step_size: f64,
    pub max_steps: usize,
    pub converge_tol: f64,
    pub record_every: usize,
}

impl Default for FlowSpec {
    fn default() -> Self {
        let c = FlowConfig::default();
        Self {
            step_size: c.step_size,
            max_steps: c.max_steps,
            converge_tol: c.converge_tol,
            record_every: c.record_every,
        }
    }
}

impl FlowSpec {
    pub fn to_config(&self) -> FlowConfig {
        FlowConfig {
            step_size: self.step_size,
            max_steps: self.max_steps,
            converge_tol: self.converge_tol,
            record_every: self.record_every,
        }
    }
}

fn invalid(field: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Scenario(format!("{}: {msg}", field.into()))
}

fn bound(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Scenario(format!("malformed scenario: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn build_graph(&self) -> Result<Graph, CliError> {
        let pairs: Vec<(usize, usize)> = self.graph.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::new(self.graph.vertices, &pairs).map_err(|e| invalid("graph", e))
    }

    pub fn build_sheaf(&self) -> Result<CellularSheaf, CliError> {
        let graph = self.build_graph()?;
        let m = graph.edge_count();
        let mut slots: Vec<[Option<LinearMap>; 2]> = vec![[None, None]; m];
        for (k, r) in self.sheaf.restrictions.iter().enumerate() {
            let field = format!("sheaf.restrictions[{k}]");
            if r.edge >= m {
                return Err(invalid(
                    field,
                    format!("edge {} does not exist (graph has {m} edges)", r.edge),
                ));
            }
            let map = LinearMap::new(r.rows, r.cols, r.entries.clone()).map_err(|e| invalid(&field, e))?;
            let slot = &mut slots[r.edge][matches!(r.side, SideSpec::Head) as usize];
            if slot.is_some() {
                return Err(invalid(
                    field,
                    format!("duplicate {:?} map for edge {}", r.side, r.edge),
                ));
            }
            *slot = Some(map);
        }
        let mut restrictions = Vec::with_capacity(m);
        for (e, [tail, head]) in slots.into_iter().enumerate() {
            match (tail, head) {
                (Some(t), Some(h)) => restrictions.push(EdgeRestrictions::new(t, h)),
                (t, _) => {
                    let side = if t.is_none() { "tail" } else { "head" };
                    return Err(invalid(
                        "sheaf.restrictions",
                        format!("missing {side} map for edge {e}"),
                    ));
                }
            }
        }
        let parts = SheafParts {
            graph,
            vertex_dims: self.sheaf.vertex_dims.clone(),
            edge_dims: self.sheaf.edge_dims.clone(),
            restrictions,
        };
        CellularSheaf::try_from(parts).map_err(|e| invalid("sheaf", e))
    }

    pub fn build_program(&self) -> Result<HomologicalProgram, CliError> {
        let sheaf = self.build_sheaf()?;
        let n = sheaf.graph().vertex_count();
        let m = sheaf.graph().edge_count();
        let objectives = match &self.objectives {
            None => vec![NodeObjective::Zero; n],
            Some(list) => {
                if list.len() != n {
                    return Err(invalid(
                        "objectives",
                        format!("expected {n} entries, found {}", list.len()),
                    ));
                }
                list.iter().map(ObjectiveSpec::to_objective).collect()
            }
        };
        let potentials = match &self.potentials {
            None => vec![EdgePotential::ZeroIndicator; m],
            Some(list) => {
                if list.len() != m {
                    return Err(invalid(
                        "potentials",
                        format!("expected {m} entries, found {}", list.len()),
                    ));
                }
                list.iter().map(PotentialSpec::to_potential).collect()
            }
        };
        for (v, f) in objectives.iter().enumerate() {
            f.validate(sheaf.vertex_dim(v))
                .map_err(|e| invalid(format!("objectives[{v}]"), e))?;
        }
        for (e, p) in potentials.iter().enumerate() {
            p.validate(sheaf.edge_dim(e))
                .map_err(|err| invalid(format!("potentials[{e}]"), err))?;
        }
        HomologicalProgram::new(sheaf, objectives, potentials).map_err(|e| invalid("program", e))
    }

    pub fn initial_state(&self, sheaf: &CellularSheaf) -> Result<Option<Cochain0>, CliError> {
        let Some(blocks) = &self.initial_state else {
            return Ok(None);
        };
        Cochain0::from_blocks(sheaf, blocks.clone())
            .map(Some)
            .map_err(|e| invalid("initial_state", e))
    }

    /// Scenario describing `prog` exactly.
    pub fn from_program(prog: &HomologicalProgram) -> Self {
        let sheaf = prog.sheaf();
        let graph = sheaf.graph();
        let mut restrictions = Vec::new();
        for e in graph.edges() {
            for side in [SideSpec::Tail, SideSpec::Head] {
                let map = sheaf.restriction(e.id, side.into());
                restrictions.push(RestrictionSpec {
                    edge: e.id,
                    side,
                    rows: map.rows(),
                    cols: map.cols(),
                    entries: map.entries().to_vec(),
                });
            }
        }
        Self {
            name: None,
            description: None,
            seed: None,
            graph: GraphSpec {
                vertices: graph.vertex_count(),
                edges: graph.pairs().into_iter().map(|(t, h)| [t, h]).collect(),
            },
            sheaf: SheafSpec {
                vertex_dims: sheaf.vertex_dims().to_vec(),
                edge_dims: sheaf.edge_dims().to_vec(),
                restrictions,
            },
            objectives: Some(
                prog.node_objectives()
                    .iter()
                    .map(ObjectiveSpec::from_objective)
                    .collect(),
            ),
            potentials: Some(
                prog.edge_potentials()
                    .iter()
                    .map(PotentialSpec::from_potential)
                    .collect(),
            ),
            initial_state: None,
            solver: SolverSpec::default(),
            flow: FlowSpec::default(),
        }
    }
}

impl ObjectiveSpec {
    pub fn to_objective(&self) -> NodeObjective {
        match self {
            Self::Zero => NodeObjective::Zero,
            Self::Quadratic { reference, weight } => NodeObjective::Quadratic {
                reference: reference.clone(),
                weight: *weight,
            },
            Self::FixedValue { value } => NodeObjective::FixedValue { value: value.clone() },
            Self::Box { lower, upper } => NodeObjective::Box {
                lower: lower.iter().map(|b| b.unwrap_or(f64::NEG_INFINITY)).collect(),
                upper: upper.iter().map(|b| b.unwrap_or(f64::INFINITY)).collect(),
            },
        }
    }

    pub fn from_objective(f: &NodeObjective) -> Self {
        match f {
            NodeObjective::Zero => Self::Zero,
            NodeObjective::Quadratic { reference, weight } => Self::Quadratic {
                reference: reference.clone(),
                weight: *weight,
            },
            NodeObjective::FixedValue { value } => Self::FixedValue { value: value.clone() },
            NodeObjective::Box { lower, upper } => Self::Box {
                lower: lower.iter().map(|&v| bound(v)).collect(),
                upper: upper.iter().map(|&v| bound(v)).collect(),
            },
        }
    }
}

impl PotentialSpec {
    pub fn to_potential(&self) -> EdgePotential {
        match self {
            Self::Quadratic { target, stiffness } => EdgePotential::Quadratic {
                target: target.clone(),
                stiffness: *stiffness,
            },
            Self::ZeroIndicator => EdgePotential::ZeroIndicator,
            Self::Huber {
                target,
                stiffness,
                threshold,
            } => EdgePotential::Huber {
                target: target.clone(),
                stiffness: *stiffness,
                threshold: *threshold,
            },
        }
    }

    pub fn from_potential(p: &EdgePotential) -> Self {
        match p {
            EdgePotential::Quadratic { target, stiffness } => Self::Quadratic {
                target: target.clone(),
                stiffness: *stiffness,
            },
            EdgePotential::ZeroIndicator => Self::ZeroIndicator,
            EdgePotential::Huber {
                target,
                stiffness,
                threshold,
            } => Self::Huber {
                target: target.clone(),
                stiffness: *stiffness,
                threshold: *threshold,
            },
        }
    }
}
