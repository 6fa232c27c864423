//! Weighted dual graphs of resolutions and their canonical cycles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, is_negative_definite_minors, Rational, SymMatrix};

pub type VertexId = i64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("{field}: {message}")]
    InvalidField { field: String, message: String },
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(VertexId),
    #[error("edge {a}-{b} is a loop; dual graphs have no loops")]
    Loop { a: VertexId, b: VertexId },
    #[error("edge {a}-{b} refers to an unknown vertex")]
    UnknownVertex { a: VertexId, b: VertexId },
    #[error("vertex pair {a}-{b} appears in more than one edge record")]
    DuplicateEdge { a: VertexId, b: VertexId },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("intersection form is not negative definite")]
    NotNegativeDefinite,
    #[error("topological index {0} does not fit in 64 bits")]
    IndexOverflow(BigInt),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: VertexId,
    pub genus: i64,
    /// `e_i`, minus the self-intersection: `E_i² = -e_i`.
    pub euler: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub multiplicity: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

/// Weighted dual graph: vertices carry `(genus, e)`; an edge record of
/// multiplicity `m` stands for `m` parallel edges.
///
/// Vertices are kept sorted by ascending id, which is the row order of
/// [`WeightedDualGraph::intersection_matrix`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct WeightedDualGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    adjacency: BTreeMap<VertexId, BTreeMap<VertexId, i64>>,
}

impl TryFrom<RawGraph> for WeightedDualGraph {
    type Error = GraphError;

    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        Self::new(raw.vertices, raw.edges)
    }
}

impl From<WeightedDualGraph> for RawGraph {
    fn from(g: WeightedDualGraph) -> Self {
        RawGraph {
            vertices: g.vertices,
            edges: g.edges,
        }
    }
}

impl WeightedDualGraph {
    pub fn new(mut vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.genus < 0 {
                return Err(GraphError::InvalidField {
                    field: format!("vertices[{i}].genus"),
                    message: format!("must be >= 0, got {}", v.genus),
                });
            }
            if v.euler < 1 {
                return Err(GraphError::InvalidField {
                    field: format!("vertices[{i}].euler"),
                    message: format!("must be >= 1, got {}", v.euler),
                });
            }
        }
        vertices.sort_by_key(|v| v.id);
        if let Some(w) = vertices.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(GraphError::DuplicateVertex(w[0].id));
        }

        let mut adjacency: BTreeMap<VertexId, BTreeMap<VertexId, i64>> =
            vertices.iter().map(|v| (v.id, BTreeMap::new())).collect();
        let mut normalized = Vec::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if e.multiplicity < 1 {
                return Err(GraphError::InvalidField {
                    field: format!("edges[{i}].multiplicity"),
                    message: format!("must be >= 1, got {}", e.multiplicity),
                });
            }
            if e.a == e.b {
                return Err(GraphError::Loop { a: e.a, b: e.b });
            }
            if !adjacency.contains_key(&e.a) || !adjacency.contains_key(&e.b) {
                return Err(GraphError::UnknownVertex { a: e.a, b: e.b });
            }
            let (a, b) = (e.a.min(e.b), e.a.max(e.b));
            if adjacency[&a].contains_key(&b) {
                return Err(GraphError::DuplicateEdge { a, b });
            }
            adjacency.get_mut(&a).unwrap().insert(b, e.multiplicity);
            adjacency.get_mut(&b).unwrap().insert(a, e.multiplicity);
            normalized.push(Edge {
                a,
                b,
                multiplicity: e.multiplicity,
            });
        }
        normalized.sort_by_key(|e| (e.a, e.b));
        Ok(Self {
            vertices,
            edges: normalized,
            adjacency,
        })
    }

    /// Parses the graph JSON format.
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization is infallible")
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Edge records with `a < b`, sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.index_of(id).map(|i| &self.vertices[i])
    }

    /// Position of `id` in the canonical (ascending id) order.
    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        self.vertices.binary_search_by_key(&id, |v| v.id).ok()
    }

    /// Neighbours of `id` with the multiplicity of the joining edge.
    pub fn neighbors(&self, id: VertexId) -> impl Iterator<Item = (VertexId, i64)> + '_ {
        self.adjacency
            .get(&id)
            .into_iter()
            .flat_map(|m| m.iter().map(|(&j, &e)| (j, e)))
    }

    /// `e_ij`, zero when not adjacent.
    pub fn multiplicity(&self, a: VertexId, b: VertexId) -> i64 {
        self.adjacency
            .get(&a)
            .and_then(|m| m.get(&b))
            .copied()
            .unwrap_or(0)
    }

    /// Number of edges at `id`, counting multiplicity.
    pub fn valency(&self, id: VertexId) -> i64 {
        self.neighbors(id).map(|(_, e)| e).sum()
    }

    pub fn is_connected(&self) -> bool {
        let all: BTreeSet<VertexId> = self.vertices.iter().map(|v| v.id).collect();
        self.components_of(&all).len() == 1
    }

    /// Connected components of the full subgraph on `subset`.
    pub fn components_of(&self, subset: &BTreeSet<VertexId>) -> Vec<BTreeSet<VertexId>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in subset {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for (w, _) in self.neighbors(v) {
                    if subset.contains(&w) && seen.insert(w) {
                        comp.insert(w);
                        queue.push_back(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Total edge count including multiplicity.
    pub fn edge_count(&self) -> i64 {
        self.edges.iter().map(|e| e.multiplicity).sum()
    }

    /// Intersection matrix in ascending-id order: `-e_i` on the diagonal,
    /// `e_ij` off it.
    pub fn intersection_matrix(&self) -> SymMatrix {
        let n = self.vertices.len();
        let mut entries = vec![BigInt::zero(); n * n];
        for (i, v) in self.vertices.iter().enumerate() {
            entries[i * n + i] = BigInt::from(-v.euler);
        }
        for e in &self.edges {
            let i = self.index_of(e.a).unwrap();
            let j = self.index_of(e.b).unwrap();
            entries[i * n + j] = BigInt::from(e.multiplicity);
            entries[j * n + i] = BigInt::from(e.multiplicity);
        }
        SymMatrix::from_row_major(n, entries).expect("intersection matrix is symmetric")
    }

    pub fn is_negative_definite(&self) -> bool {
        is_negative_definite_minors(&self.intersection_matrix())
    }

    /// Conservative minimality test for good resolutions: no smooth rational
    /// `(-1)`-curve meeting the rest of the divisor in at most two points.
    pub fn is_minimal_good(&self) -> bool {
        self.vertices
            .iter()
            .all(|v| !(v.genus == 0 && v.euler == 1 && self.valency(v.id) <= 2))
    }

    /// Graphviz rendering; `k` labels are added when a canonical cycle is given.
    /// Parallel edges are drawn once per unit of multiplicity.
    pub fn to_dot(&self, cycle: Option<&CanonicalCycle>) -> String {
        let mut out = String::from("graph dual {\n");
        for v in &self.vertices {
            let k = cycle
                .and_then(|z| z.discrepancy(v.id))
                .map(|k| format!(", k={k}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  v{id} [label=\"{id} [g={}, e={}{k}]\"];",
                v.genus,
                v.euler,
                id = v.id
            );
        }
        for e in &self.edges {
            for _ in 0..e.multiplicity {
                let _ = writeln!(out, "  v{} -- v{};", e.a, e.b);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Canonical cycle `Z_can = Σ k_i E_i` together with the topological index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalCycle {
    discrepancies: BTreeMap<VertexId, Rational>,
    topological_index: u64,
}

impl CanonicalCycle {
    /// Wraps given discrepancies, deriving the index as the lcm of denominators.
    pub fn from_discrepancies(
        discrepancies: BTreeMap<VertexId, Rational>,
    ) -> Result<Self, GraphError> {
        let lcm = linalg::denominator_lcm(discrepancies.values());
        let topological_index = lcm.to_u64().ok_or(GraphError::IndexOverflow(lcm))?;
        Ok(Self {
            discrepancies,
            topological_index,
        })
    }

    pub fn discrepancies(&self) -> &BTreeMap<VertexId, Rational> {
        &self.discrepancies
    }

    pub fn discrepancy(&self, id: VertexId) -> Option<&Rational> {
        self.discrepancies.get(&id)
    }

    pub fn topological_index(&self) -> u64 {
        self.topological_index
    }

    /// Integral discrepancies, i.e. topological index 1.
    pub fn is_numerically_gorenstein(&self) -> bool {
        self.discrepancies.values().all(|k| k.is_integer())
    }

    pub fn is_log_canonical(&self) -> bool {
        let minus_one = -Rational::one();
        self.discrepancies.values().all(|k| *k >= minus_one)
    }

    pub fn min_discrepancy(&self) -> Option<&Rational> {
        self.discrepancies.values().min()
    }
}

/// Solves the adjunction system for the discrepancies.
///
/// Adjunction on each `E_i` reads `(k_i + 1) e_i = 2 - 2 g_i + Σ_{j≠i} k_j e_ij`.
/// Moving everything with a `k` to the left:
/// `-e_i k_i + Σ_{j≠i} e_ij k_j = e_i + 2 g_i - 2`,
/// which is `M k = b` with `M` the intersection matrix and `b_i = 2 g_i - 2 + e_i`.
pub fn canonical_cycle(g: &WeightedDualGraph) -> Result<CanonicalCycle, GraphError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let m = g.intersection_matrix();
    if !is_negative_definite_minors(&m) {
        return Err(GraphError::NotNegativeDefinite);
    }
    let b: Vec<Rational> = g
        .vertices()
        .iter()
        .map(|v| Rational::from_integer(BigInt::from(2 * v.genus - 2 + v.euler)))
        .collect();
    let k = linalg::solve_exact(&m, &b).map_err(|_| GraphError::NotNegativeDefinite)?;
    let discrepancies = g.vertices().iter().map(|v| v.id).zip(k).collect();
    CanonicalCycle::from_discrepancies(discrepancies)
}

pub fn is_numerically_gorenstein(z: &CanonicalCycle) -> bool {
    z.is_numerically_gorenstein()
}
