use std::collections::HashSet;

use crate::error::{Result, SheafError};

/// Which endpoint of an oriented edge a vertex sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeSide {
    /// The first-listed endpoint; its restriction enters the coboundary with `+`.
    Tail,
    /// The second-listed endpoint; enters with `-`.
    Head,
}

impl EdgeSide {
    pub fn opposite(self) -> Self {
        match self {
            EdgeSide::Tail => EdgeSide::Head,
            EdgeSide::Head => EdgeSide::Tail,
        }
    }

    /// Sign of this side in the coboundary.
    pub fn sign(self) -> f64 {
        match self {
            EdgeSide::Tail => 1.0,
            EdgeSide::Head => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeSide::Tail => "tail",
            EdgeSide::Head => "head",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrientedEdge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
}

impl OrientedEdge {
    pub fn endpoint(&self, side: EdgeSide) -> usize {
        match side {
            EdgeSide::Tail => self.tail,
            EdgeSide::Head => self.head,
        }
    }

    /// The side `vertex` occupies, if it is an endpoint.
    pub fn side_of(&self, vertex: usize) -> Option<EdgeSide> {
        if vertex == self.tail {
            Some(EdgeSide::Tail)
        } else if vertex == self.head {
            Some(EdgeSide::Head)
        } else {
            None
        }
    }
}

/// An incident edge as seen from one of its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub side: EdgeSide,
    pub neighbor: usize,
}

/// A simple graph with a fixed orientation on every edge.
///
/// Edge ids are dense (`0..edge_count`) and follow construction order; the
/// tail of each edge is the endpoint listed first.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<OrientedEdge>,
    incidence: Vec<Vec<Incidence>>,
}

impl Graph {
    pub fn new(vertex_count: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(SheafError::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut seen = HashSet::with_capacity(pairs.len());
        let mut edges = Vec::with_capacity(pairs.len());
        let mut incidence = vec![Vec::new(); vertex_count];
        for (id, &(tail, head)) in pairs.iter().enumerate() {
            if tail >= vertex_count || head >= vertex_count {
                return Err(SheafError::InvalidGraph(format!(
                    "edge {id} ({tail}, {head}) has an endpoint outside 0..{vertex_count}"
                )));
            }
            if tail == head {
                return Err(SheafError::InvalidGraph(format!("edge {id} is a self-loop at {tail}")));
            }
            if !seen.insert((tail.min(head), tail.max(head))) {
                return Err(SheafError::InvalidGraph(format!(
                    "edge {id} duplicates the pair {{{tail}, {head}}}"
                )));
            }
            edges.push(OrientedEdge { id, tail, head });
            incidence[tail].push(Incidence {
                edge: id,
                side: EdgeSide::Tail,
                neighbor: head,
            });
            incidence[head].push(Incidence {
                edge: id,
                side: EdgeSide::Head,
                neighbor: tail,
            });
        }
        Ok(Self {
            vertex_count,
            edges,
            incidence,
        })
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &pairs)
    }

    /// Cycle on `n >= 3` vertices; the closing edge is `(0, n-1)`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(SheafError::InvalidGraph(format!(
                "a simple cycle needs n >= 3, got {n}"
            )));
        }
        let mut pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        pairs.push((0, n - 1));
        Self::new(n, &pairs)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
        Self::new(n, &pairs)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &OrientedEdge {
        &self.edges[id]
    }

    /// Incident edges of `vertex`, ascending by edge id.
    pub fn incident(&self, vertex: usize) -> &[Incidence] {
        &self.incidence[vertex]
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.incidence[vertex].len()
    }

    pub fn is_incident(&self, vertex: usize, edge: usize) -> bool {
        self.edges
            .get(edge)
            .is_some_and(|e| e.tail == vertex || e.head == vertex)
    }

    /// The same graph with every edge reversed. Edge ids are preserved.
    pub fn reversed(&self) -> Self {
        let pairs: Vec<_> = self.edges.iter().map(|e| (e.head, e.tail)).collect();
        Self::new(self.vertex_count, &pairs).expect("reversal preserves simplicity")
    }

    /// Edge endpoints as `(tail, head)` pairs in id order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.tail, e.head)).collect()
    }
}
