//! Graph generators for the example corpus and the property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classify::AdeFamily;
use crate::graph::{Edge, Vertex, WeightedDualGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("bad parameters: {0}")]
    BadParams(String),
}

fn bad(msg: impl Into<String>) -> GenError {
    GenError::BadParams(msg.into())
}

fn build(vertices: Vec<Vertex>, edges: Vec<Edge>) -> WeightedDualGraph {
    WeightedDualGraph::new(vertices, edges).expect("generator produced a well-formed graph")
}

fn rational(id: i64, euler: i64) -> Vertex {
    Vertex {
        id,
        genus: 0,
        euler,
    }
}

fn edge(a: i64, b: i64) -> Edge {
    Edge {
        a,
        b,
        multiplicity: 1,
    }
}

/// The Dynkin diagram of type `family` and rank `n`, all vertices `(0, 2)`.
///
/// Vertices are numbered `1..=n`. `A_n` is a chain; `D_n` is a chain
/// `1..=n-2` with leaves `n-1` and `n` on vertex `n-2`; `E_n` is a chain
/// `1..=n-1` with leaf `n` on vertex 3.
pub fn ade(family: AdeFamily, n: usize) -> Result<WeightedDualGraph, GenError> {
    let n = n as i64;
    let chain_len = match family {
        AdeFamily::A if n >= 1 => n,
        AdeFamily::D if n >= 4 => n - 2,
        AdeFamily::E if (6..=8).contains(&n) => n - 1,
        _ => return Err(bad(format!("no Dynkin diagram {family:?}{n}"))),
    };
    let vertices = (1..=n).map(|i| rational(i, 2)).collect();
    let mut edges: Vec<Edge> = (1..chain_len).map(|i| edge(i, i + 1)).collect();
    match family {
        AdeFamily::A => {}
        AdeFamily::D => edges.extend([edge(n - 2, n - 1), edge(n - 2, n)]),
        AdeFamily::E => edges.push(edge(3, n)),
    }
    Ok(build(vertices, edges))
}

/// Every Dynkin diagram of rank at most `max_rank`.
pub fn all_ade(max_rank: usize) -> Vec<WeightedDualGraph> {
    let mut out = Vec::new();
    for n in 1..=max_rank {
        for family in [AdeFamily::A, AdeFamily::D, AdeFamily::E] {
            if let Ok(g) = ade(family, n) {
                out.push(g);
            }
        }
    }
    out
}

/// A cycle of rational curves with the given self-intersection magnitudes.
/// Length 2 is a double edge. At least one `e_i ≥ 3` is needed for the
/// intersection form to be negative definite.
pub fn cusp(eulers: &[i64]) -> Result<WeightedDualGraph, GenError> {
    let len = eulers.len() as i64;
    if len < 2 {
        return Err(bad("a cusp cycle needs at least 2 vertices"));
    }
    if eulers.iter().any(|&e| e < 2) || eulers.iter().all(|&e| e == 2) {
        return Err(bad("cusp weights must be >= 2 with at least one >= 3"));
    }
    let vertices = eulers
        .iter()
        .enumerate()
        .map(|(i, &e)| rational(i as i64 + 1, e))
        .collect();
    let edges = if len == 2 {
        vec![Edge {
            a: 1,
            b: 2,
            multiplicity: 2,
        }]
    } else {
        (1..=len).map(|i| edge(i, i % len + 1)).collect()
    };
    Ok(build(vertices, edges))
}

/// A single smooth genus-1 curve of self-intersection `-euler`.
pub fn elliptic(euler: i64) -> Result<WeightedDualGraph, GenError> {
    if euler < 1 {
        return Err(bad("simple elliptic needs e >= 1"));
    }
    Ok(build(
        vec![Vertex {
            id: 1,
            genus: 1,
            euler,
        }],
        vec![],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomNdParams {
    pub max_vertices: usize,
    pub max_genus: i64,
    /// Upper bound on `e_i - (total edge multiplicity at i) - 1`.
    pub max_slack: i64,
}

impl Default for RandomNdParams {
    fn default() -> Self {
        Self {
            max_vertices: 8,
            max_genus: 3,
            max_slack: 2,
        }
    }
}

/// Connected, strictly diagonally dominant (hence negative definite) random
/// graphs. Candidates containing a contractible `(-1)`-curve are rejected and
/// redrawn, so every output is minimal good.
#[derive(Debug, Clone)]
pub struct RandomNd {
    rng: ChaCha8Rng,
    params: RandomNdParams,
    rejected: u64,
}

impl RandomNd {
    pub fn new(seed: u64, params: RandomNdParams) -> Result<Self, GenError> {
        if params.max_vertices == 0 || params.max_genus < 0 || params.max_slack < 0 {
            return Err(bad(format!("{params:?}")));
        }
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            params,
            rejected: 0,
        })
    }

    /// Candidates discarded so far for not being minimal.
    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    fn candidate(&mut self) -> WeightedDualGraph {
        let rng = &mut self.rng;
        let n = rng.random_range(1..=self.params.max_vertices) as i64;
        let mut mult = vec![vec![0i64; n as usize]; n as usize];
        // Random spanning tree: each vertex attaches to an earlier one.
        for (i, row) in mult.iter_mut().enumerate().skip(1) {
            row[rng.random_range(0..i)] = 1;
        }
        let extra = rng.random_range(0..=n as usize / 2);
        for _ in 0..extra {
            let a = rng.random_range(0..n as usize);
            let b = rng.random_range(0..n as usize);
            if a != b {
                let (a, b) = (a.max(b), a.min(b));
                mult[a][b] += 1;
            }
        }
        if n > 1 && rng.random_bool(0.1) {
            let i = rng.random_range(1..n as usize);
            let j = (0..i).find(|&j| mult[i][j] > 0).unwrap_or(0);
            mult[i][j] += 1;
        }
        let mut edges = Vec::new();
        let mut degree = vec![0i64; n as usize];
        for a in 0..n as usize {
            for b in 0..a {
                let m = mult[a][b];
                if m > 0 {
                    degree[a] += m;
                    degree[b] += m;
                    edges.push(Edge {
                        a: b as i64,
                        b: a as i64,
                        multiplicity: m,
                    });
                }
            }
        }
        let vertices = (0..n)
            .map(|id| {
                let genus = if rng.random_bool(0.5) {
                    0
                } else {
                    rng.random_range(0..=self.params.max_genus)
                };
                let euler = degree[id as usize] + 1 + rng.random_range(0..=self.params.max_slack);
                Vertex { id, genus, euler }
            })
            .collect();
        build(vertices, edges)
    }
}

impl Iterator for RandomNd {
    type Item = WeightedDualGraph;

    fn next(&mut self) -> Option<WeightedDualGraph> {
        loop {
            let g = self.candidate();
            if g.is_minimal_good() {
                return Some(g);
            }
            self.rejected += 1;
            log::debug!("rejected non-minimal candidate {}", g.to_json());
        }
    }
}

/// `count` graphs from the generator seeded by `seed`.
pub fn random_nd(
    seed: u64,
    count: usize,
    params: RandomNdParams,
) -> Result<Vec<WeightedDualGraph>, GenError> {
    let mut gen = RandomNd::new(seed, params)?;
    let out: Vec<_> = gen.by_ref().take(count).collect();
    if gen.rejected() > 0 {
        log::info!(
            "random-nd: rejected {} non-minimal candidates",
            gen.rejected()
        );
    }
    Ok(out)
}
