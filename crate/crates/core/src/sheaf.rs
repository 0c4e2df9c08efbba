//! Cellular sheaves on graphs.
//!
//! A sheaf attaches a stalk `R^{n_i}` to every vertex and `R^{m_e}` to every
//! edge, plus one restriction map per (edge, endpoint). Flattened cochains lay
//! the vertex (or edge) blocks out in index order; the offsets computed here
//! are the layout contract for dense operators and file I/O.

use std::fmt;

use crate::error::{Result, SheafError};
use crate::graph::{EdgeSide, Graph};
use crate::linalg::LinearMap;

/// Restriction maps of one edge, from its tail and head stalks.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRestrictions {
    pub tail: LinearMap,
    pub head: LinearMap,
}

impl EdgeRestrictions {
    pub fn new(tail: LinearMap, head: LinearMap) -> Self {
        Self { tail, head }
    }

    pub fn side(&self, side: EdgeSide) -> &LinearMap {
        match side {
            EdgeSide::Tail => &self.tail,
            EdgeSide::Head => &self.head,
        }
    }
}

/// Unvalidated sheaf data, as read from a file or assembled by hand.
#[derive(Debug, Clone, PartialEq)]
pub struct SheafParts {
    pub graph: Graph,
    pub vertex_dims: Vec<usize>,
    pub edge_dims: Vec<usize>,
    pub restrictions: Vec<EdgeRestrictions>,
}

/// One broken shape invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeViolation {
    VertexDimsLength {
        expected: usize,
        actual: usize,
    },
    EdgeDimsLength {
        expected: usize,
        actual: usize,
    },
    RestrictionCount {
        expected: usize,
        actual: usize,
    },
    ZeroVertexDim {
        vertex: usize,
    },
    ZeroEdgeDim {
        edge: usize,
    },
    RestrictionShape {
        edge: usize,
        side: EdgeSide,
        expected: (usize, usize),
        actual: (usize, usize),
    },
}

impl fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::VertexDimsLength { expected, actual } => {
                write!(f, "vertex_dims has {actual} entries, expected {expected}")
            }
            Self::EdgeDimsLength { expected, actual } => {
                write!(f, "edge_dims has {actual} entries, expected {expected}")
            }
            Self::RestrictionCount { expected, actual } => {
                write!(f, "{actual} restriction pairs given, expected {expected}")
            }
            Self::ZeroVertexDim { vertex } => write!(f, "vertex {vertex} has a zero-dimensional stalk"),
            Self::ZeroEdgeDim { edge } => write!(f, "edge {edge} has a zero-dimensional stalk"),
            Self::RestrictionShape {
                edge,
                side,
                expected,
                actual,
            } => write!(
                f,
                "edge {edge} {} restriction is {}x{}, expected {}x{}",
                side.as_str(),
                actual.0,
                actual.1,
                expected.0,
                expected.1
            ),
        }
    }
}

/// Outcome of [`validate_sheaf`]: empty means every invariant holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<ShapeViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let msgs: Vec<_> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks every shape invariant of a sheaf and reports all violations.
pub fn validate_sheaf(parts: &SheafParts) -> ValidationReport {
    let g = &parts.graph;
    let mut violations = Vec::new();
    if parts.vertex_dims.len() != g.vertex_count() {
        violations.push(ShapeViolation::VertexDimsLength {
            expected: g.vertex_count(),
            actual: parts.vertex_dims.len(),
        });
    }
    if parts.edge_dims.len() != g.edge_count() {
        violations.push(ShapeViolation::EdgeDimsLength {
            expected: g.edge_count(),
            actual: parts.edge_dims.len(),
        });
    }
    if parts.restrictions.len() != g.edge_count() {
        violations.push(ShapeViolation::RestrictionCount {
            expected: g.edge_count(),
            actual: parts.restrictions.len(),
        });
    }
    for (vertex, &d) in parts.vertex_dims.iter().enumerate() {
        if d == 0 {
            violations.push(ShapeViolation::ZeroVertexDim { vertex });
        }
    }
    for (edge, &d) in parts.edge_dims.iter().enumerate() {
        if d == 0 {
            violations.push(ShapeViolation::ZeroEdgeDim { edge });
        }
    }
    for (e, maps) in g.edges().iter().zip(&parts.restrictions) {
        let (Some(&m), Some(&nt), Some(&nh)) = (
            parts.edge_dims.get(e.id),
            parts.vertex_dims.get(e.tail),
            parts.vertex_dims.get(e.head),
        ) else {
            continue;
        };
        for (side, n) in [(EdgeSide::Tail, nt), (EdgeSide::Head, nh)] {
            let map = maps.side(side);
            if (map.rows(), map.cols()) != (m, n) {
                violations.push(ShapeViolation::RestrictionShape {
                    edge: e.id,
                    side,
                    expected: (m, n),
                    actual: (map.rows(), map.cols()),
                });
            }
        }
    }
    ValidationReport { violations }
}

/// A validated cellular sheaf. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CellularSheaf {
    graph: Graph,
    vertex_dims: Vec<usize>,
    edge_dims: Vec<usize>,
    restrictions: Vec<EdgeRestrictions>,
    vertex_offsets: Vec<usize>,
    edge_offsets: Vec<usize>,
}

fn offsets(dims: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.len() + 1);
    let mut acc = 0;
    out.push(0);
    for d in dims {
        acc += d;
        out.push(acc);
    }
    out
}

impl TryFrom<SheafParts> for CellularSheaf {
    type Error = SheafError;

    fn try_from(parts: SheafParts) -> Result<Self> {
        let report = validate_sheaf(&parts);
        if !report.is_ok() {
            return Err(SheafError::InvalidSheaf(report.to_string()));
        }
        let vertex_offsets = offsets(&parts.vertex_dims);
        let edge_offsets = offsets(&parts.edge_dims);
        Ok(Self {
            graph: parts.graph,
            vertex_dims: parts.vertex_dims,
            edge_dims: parts.edge_dims,
            restrictions: parts.restrictions,
            vertex_offsets,
            edge_offsets,
        })
    }
}

impl CellularSheaf {
    pub fn new(
        graph: Graph,
        vertex_dims: Vec<usize>,
        edge_dims: Vec<usize>,
        restrictions: Vec<EdgeRestrictions>,
    ) -> Result<Self> {
        Self::try_from(SheafParts {
            graph,
            vertex_dims,
            edge_dims,
            restrictions,
        })
    }

    /// The constant sheaf `R^dim`: identity restrictions everywhere.
    pub fn constant(graph: Graph, dim: usize) -> Result<Self> {
        let n = graph.vertex_count();
        let m = graph.edge_count();
        let maps = (0..m)
            .map(|_| EdgeRestrictions::new(LinearMap::identity(dim), LinearMap::identity(dim)))
            .collect();
        Self::new(graph, vec![dim; n], vec![dim; m], maps)
    }

    /// Scalar sign sheaf: tail map `+1`, head map `-1`, so sections satisfy
    /// `x_head = -x_tail` on every edge.
    pub fn sign(graph: Graph) -> Result<Self> {
        let n = graph.vertex_count();
        let m = graph.edge_count();
        let maps = (0..m)
            .map(|_| EdgeRestrictions::new(LinearMap::scalar(1, 1.0), LinearMap::scalar(1, -1.0)))
            .collect();
        Self::new(graph, vec![1; n], vec![1; m], maps)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_dims(&self) -> &[usize] {
        &self.vertex_dims
    }

    pub fn edge_dims(&self) -> &[usize] {
        &self.edge_dims
    }

    pub fn vertex_dim(&self, v: usize) -> usize {
        self.vertex_dims[v]
    }

    pub fn edge_dim(&self, e: usize) -> usize {
        self.edge_dims[e]
    }

    pub fn restrictions(&self) -> &[EdgeRestrictions] {
        &self.restrictions
    }

    pub fn restriction(&self, edge: usize, side: EdgeSide) -> &LinearMap {
        self.restrictions[edge].side(side)
    }

    /// Total dimension of `C^0`.
    pub fn c0_dim(&self) -> usize {
        *self.vertex_offsets.last().unwrap()
    }

    /// Total dimension of `C^1`.
    pub fn c1_dim(&self) -> usize {
        *self.edge_offsets.last().unwrap()
    }

    pub fn vertex_offset(&self, v: usize) -> usize {
        self.vertex_offsets[v]
    }

    pub fn edge_offset(&self, e: usize) -> usize {
        self.edge_offsets[e]
    }

    /// Always ok for a constructed sheaf; kept for symmetry with [`validate_sheaf`].
    pub fn validate(&self) -> ValidationReport {
        validate_sheaf(&self.to_parts())
    }

    pub fn to_parts(&self) -> SheafParts {
        SheafParts {
            graph: self.graph.clone(),
            vertex_dims: self.vertex_dims.clone(),
            edge_dims: self.edge_dims.clone(),
            restrictions: self.restrictions.clone(),
        }
    }

    /// Reverses every edge, swapping its two restriction maps. The coboundary
    /// changes sign edge by edge; the Laplacian is unchanged.
    pub fn reoriented(&self) -> Self {
        let restrictions = self
            .restrictions
            .iter()
            .map(|r| EdgeRestrictions::new(r.head.clone(), r.tail.clone()))
            .collect();
        Self::new(
            self.graph.reversed(),
            self.vertex_dims.clone(),
            self.edge_dims.clone(),
            restrictions,
        )
        .expect("reorientation preserves shapes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sheaf_on_path_is_ok() {
        let s = CellularSheaf::constant(Graph::path(2).unwrap(), 1).unwrap();
        assert!(s.validate().is_ok());
        assert_eq!((s.c0_dim(), s.c1_dim()), (2, 1));
    }

    #[test]
    fn reshaped_restriction_is_reported() {
        let mut parts = CellularSheaf::constant(Graph::path(2).unwrap(), 1).unwrap().to_parts();
        parts.restrictions[0].head = LinearMap::new(2, 1, vec![1.0, 1.0]).unwrap();
        let report = validate_sheaf(&parts);
        assert_eq!(
            report.violations,
            vec![ShapeViolation::RestrictionShape {
                edge: 0,
                side: EdgeSide::Head,
                expected: (1, 1),
                actual: (2, 1),
            }]
        );
        assert!(report.to_string().contains("edge 0 head"));
        assert!(CellularSheaf::try_from(parts).is_err());
    }

    #[test]
    fn sign_sheaf_on_triangle_is_ok() {
        let s = CellularSheaf::sign(Graph::cycle(3).unwrap()).unwrap();
        assert!(s.validate().is_ok());
        assert_eq!(s.restriction(2, EdgeSide::Head).get(0, 0), -1.0);
    }

    #[test]
    fn length_and_zero_dim_violations() {
        let g = Graph::path(3).unwrap();
        let parts = SheafParts {
            graph: g,
            vertex_dims: vec![1, 0],
            edge_dims: vec![1, 1],
            restrictions: vec![],
        };
        let report = validate_sheaf(&parts);
        assert!(report
            .violations
            .contains(&ShapeViolation::VertexDimsLength { expected: 3, actual: 2 }));
        assert!(report.violations.contains(&ShapeViolation::ZeroVertexDim { vertex: 1 }));
        assert!(report
            .violations
            .contains(&ShapeViolation::RestrictionCount { expected: 2, actual: 0 }));
    }

    #[test]
    fn mixed_dims_offsets() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let maps = vec![
            EdgeRestrictions::new(LinearMap::zeros(2, 2), LinearMap::zeros(2, 1)),
            EdgeRestrictions::new(LinearMap::zeros(1, 1), LinearMap::zeros(1, 3)),
        ];
        let s = CellularSheaf::new(g, vec![2, 1, 3], vec![2, 1], maps).unwrap();
        assert_eq!((s.vertex_offset(2), s.c0_dim()), (3, 6));
        assert_eq!((s.edge_offset(1), s.c1_dim()), (2, 3));
    }
}
