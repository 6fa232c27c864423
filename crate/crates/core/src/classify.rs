//! Recognition of the distinguished singularity classes and executable checks
//! of the structure of the canonical cycle on minimal good resolutions of
//! non-log-canonical singularities (Veys' theorem and its corollaries).

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::graph::{CanonicalCycle, VertexId, WeightedDualGraph};
use crate::linalg::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdeFamily {
    A,
    D,
    E,
}

/// An ADE Dynkin diagram; `rank` is the number of vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KleinianType {
    pub family: AdeFamily,
    pub rank: usize,
}

impl fmt::Display for KleinianType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub is_kleinian: bool,
    pub is_cusp: bool,
    pub is_simple_elliptic: bool,
    pub is_log_canonical: bool,
    pub is_numerically_gorenstein: bool,
    pub kleinian_type: Option<KleinianType>,
}

/// Structural ADE recognition: every vertex rational with `e = 2`, simple
/// edges, a tree, and one of the A/D/E shapes.
pub fn kleinian_shape(g: &WeightedDualGraph) -> Option<KleinianType> {
    let n = g.len();
    if g.vertices().iter().any(|v| v.genus != 0 || v.euler != 2)
        || g.edges().iter().any(|e| e.multiplicity != 1)
        || g.edge_count() != n as i64 - 1
        || !g.is_connected()
    {
        return None;
    }
    let forks: Vec<VertexId> = g
        .vertices()
        .iter()
        .map(|v| v.id)
        .filter(|&id| g.valency(id) >= 3)
        .collect();
    match forks.as_slice() {
        [] => Some(KleinianType {
            family: AdeFamily::A,
            rank: n,
        }),
        [center] if g.valency(*center) == 3 => {
            let mut arms: Vec<usize> = g
                .neighbors(*center)
                .map(|(start, _)| arm_length(g, *center, start))
                .collect();
            arms.sort_unstable();
            let family = match arms.as_slice() {
                [1, 1, _] => AdeFamily::D,
                [1, 2, 2] | [1, 2, 3] | [1, 2, 4] => AdeFamily::E,
                _ => return None,
            };
            Some(KleinianType { family, rank: n })
        }
        _ => None,
    }
}

/// Number of vertices on the path leaving `from` through `start`.
fn arm_length(g: &WeightedDualGraph, from: VertexId, start: VertexId) -> usize {
    let (mut prev, mut cur, mut len) = (from, start, 1);
    while let Some((next, _)) = g.neighbors(cur).find(|&(w, _)| w != prev) {
        prev = cur;
        cur = next;
        len += 1;
    }
    len
}

/// A cycle of at least two rational curves (counting a double edge as a
/// 2-cycle). A single nodal curve is not expressible without loops.
fn is_cusp_graph(g: &WeightedDualGraph) -> bool {
    g.len() >= 2
        && g.is_connected()
        && g.vertices()
            .iter()
            .all(|v| v.genus == 0 && g.valency(v.id) == 2)
        // first Betti number of a connected multigraph
        && g.edge_count() - g.len() as i64 + 1 == 1
}

/// Classifies `(g, z)`; assumes the intersection form is negative definite and
/// `z` is the canonical cycle of `g`.
pub fn classify(g: &WeightedDualGraph, z: &CanonicalCycle) -> Classification {
    let kleinian_type = kleinian_shape(g);
    let is_kleinian = kleinian_type.is_some();
    let is_cusp = !is_kleinian && is_cusp_graph(g);
    let is_simple_elliptic = g.len() == 1 && g.vertices()[0].genus == 1;
    Classification {
        is_kleinian,
        is_cusp,
        is_simple_elliptic,
        is_log_canonical: z.is_log_canonical(),
        is_numerically_gorenstein: z.is_numerically_gorenstein(),
        kleinian_type,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Γ⁻ is connected.
    NegativePartConnected,
    /// Complement of Γ⁻ is a union of paths.
    SegmentShape,
    /// Segment vertices are rational.
    SegmentRational,
    /// Exactly one end of each segment meets Γ⁻, by one edge.
    SegmentAttachment,
    /// Discrepancies increase strictly away from Γ⁻.
    SegmentIncreasing,
    /// Every discrepancy is negative.
    AllNegative,
    /// `k = -1` vertices are rational.
    MinusOneRational,
    /// `k = -1` vertices have valency 1 or 2.
    MinusOneValency,
    /// Valency-1 `k = -1` vertices hang off a `k = -2` vertex.
    MinusOneLeafNeighbor,
    /// Valency-2 `k = -1` vertices have neighbours summing to `-2`, neither `-1`.
    MinusOneBridgeNeighbors,
    /// No two adjacent `k = -1` vertices.
    AdjacentMinusOnes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub vertices: Vec<VertexId>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VeysReport {
    pub holds: bool,
    pub applicable: bool,
    pub note: Option<String>,
    pub v_minus: BTreeSet<VertexId>,
    pub violations: Vec<Violation>,
}

impl VeysReport {
    fn not_applicable(reason: &str) -> Self {
        Self {
            holds: true,
            applicable: false,
            note: Some(format!("not applicable: {reason}")),
            v_minus: BTreeSet::new(),
            violations: Vec::new(),
        }
    }

    fn finish(v_minus: BTreeSet<VertexId>, violations: Vec<Violation>) -> Self {
        Self {
            holds: violations.is_empty(),
            applicable: true,
            note: None,
            v_minus,
            violations,
        }
    }
}

fn applicability(g: &WeightedDualGraph, z: &CanonicalCycle) -> Option<VeysReport> {
    if !g.is_minimal_good() {
        Some(VeysReport::not_applicable("graph is not minimal good"))
    } else if z.is_log_canonical() {
        Some(VeysReport::not_applicable("singularity is log canonical"))
    } else {
        None
    }
}

fn k_of(z: &CanonicalCycle, id: VertexId) -> &Rational {
    z.discrepancy(id)
        .expect("canonical cycle covers every vertex")
}

/// Checks the three structural statements on `(g, z)`; vacuous (and reported
/// as such) on non-minimal or log canonical input.
pub fn verify_veys(g: &WeightedDualGraph, z: &CanonicalCycle) -> VeysReport {
    if let Some(r) = applicability(g, z) {
        return r;
    }
    let minus_one = -Rational::one();
    let v_minus: BTreeSet<VertexId> = g
        .vertices()
        .iter()
        .map(|v| v.id)
        .filter(|&id| *k_of(z, id) < minus_one)
        .collect();
    let rest: BTreeSet<VertexId> = g
        .vertices()
        .iter()
        .map(|v| v.id)
        .filter(|id| !v_minus.contains(id))
        .collect();
    let mut violations = Vec::new();

    let parts = g.components_of(&v_minus);
    if parts.len() != 1 {
        violations.push(Violation {
            rule: Rule::NegativePartConnected,
            vertices: v_minus.iter().copied().collect(),
            message: format!("subgraph on V- has {} components", parts.len()),
        });
    }

    for segment in g.components_of(&rest) {
        check_segment(g, z, &v_minus, &segment, &mut violations);
    }

    for v in g.vertices() {
        let k = k_of(z, v.id);
        if *k >= Rational::zero() {
            violations.push(Violation {
                rule: Rule::AllNegative,
                vertices: vec![v.id],
                message: format!("k = {k} is not negative"),
            });
        }
    }

    VeysReport::finish(v_minus, violations)
}

fn check_segment(
    g: &WeightedDualGraph,
    z: &CanonicalCycle,
    v_minus: &BTreeSet<VertexId>,
    segment: &BTreeSet<VertexId>,
    violations: &mut Vec<Violation>,
) {
    let ids: Vec<VertexId> = segment.iter().copied().collect();
    let inner_valency = |id: VertexId| -> i64 {
        g.neighbors(id)
            .filter(|(w, _)| segment.contains(w))
            .map(|(_, e)| e)
            .sum()
    };
    let inner_edges: i64 = ids.iter().map(|&id| inner_valency(id)).sum::<i64>() / 2;
    let is_path =
        inner_edges == ids.len() as i64 - 1 && ids.iter().all(|&id| inner_valency(id) <= 2);
    if !is_path {
        violations.push(Violation {
            rule: Rule::SegmentShape,
            vertices: ids.clone(),
            message: "component of the complement of V- is not a segment".into(),
        });
        return;
    }
    for &id in &ids {
        if g.vertex(id).map(|v| v.genus) != Some(0) {
            violations.push(Violation {
                rule: Rule::SegmentRational,
                vertices: vec![id],
                message: "segment vertex is not rational".into(),
            });
        }
    }

    let attachments: Vec<(VertexId, i64)> = ids
        .iter()
        .map(|&id| {
            let e: i64 = g
                .neighbors(id)
                .filter(|(w, _)| v_minus.contains(w))
                .map(|(_, e)| e)
                .sum();
            (id, e)
        })
        .filter(|&(_, e)| e > 0)
        .collect();
    let anchor = match attachments.as_slice() {
        [(id, 1)] if inner_valency(*id) <= 1 => *id,
        _ => {
            violations.push(Violation {
                rule: Rule::SegmentAttachment,
                vertices: ids.clone(),
                message: format!("segment attachments to V- are {attachments:?}"),
            });
            return;
        }
    };

    // Walk the path away from the attached end.
    let mut order = vec![anchor];
    let mut prev = None;
    let mut cur = anchor;
    while let Some((next, _)) = g
        .neighbors(cur)
        .find(|&(w, _)| segment.contains(&w) && Some(w) != prev)
    {
        order.push(next);
        prev = Some(cur);
        cur = next;
    }
    for pair in order.windows(2) {
        if k_of(z, pair[0]) >= k_of(z, pair[1]) {
            violations.push(Violation {
                rule: Rule::SegmentIncreasing,
                vertices: pair.to_vec(),
                message: format!(
                    "k drops from {} to {} along the segment",
                    k_of(z, pair[0]),
                    k_of(z, pair[1])
                ),
            });
        }
    }
}

/// Checks the statements about `k = -1` vertices, plus the global absence of
/// adjacent `k = -1` pairs.
pub fn verify_corollaries(g: &WeightedDualGraph, z: &CanonicalCycle) -> VeysReport {
    if let Some(r) = applicability(g, z) {
        return r;
    }
    let v_minus = g
        .vertices()
        .iter()
        .map(|v| v.id)
        .filter(|&id| *k_of(z, id) < -Rational::one())
        .collect();
    VeysReport::finish(v_minus, minus_one_violations(g, z))
}

/// The `k = -1` rules without the applicability gate.
pub fn minus_one_violations(g: &WeightedDualGraph, z: &CanonicalCycle) -> Vec<Violation> {
    let minus_one = -Rational::one();
    let minus_two = Rational::from_integer((-2).into());
    let mut violations = Vec::new();
    for v in g.vertices() {
        if *k_of(z, v.id) != minus_one {
            continue;
        }
        if v.genus != 0 {
            violations.push(Violation {
                rule: Rule::MinusOneRational,
                vertices: vec![v.id],
                message: format!("k = -1 vertex has genus {}", v.genus),
            });
        }
        // Neighbours as a multiset, one entry per unit of multiplicity.
        let nbrs: Vec<VertexId> = g
            .neighbors(v.id)
            .flat_map(|(w, e)| std::iter::repeat_n(w, e as usize))
            .collect();
        match nbrs.as_slice() {
            [j] => {
                if *k_of(z, *j) != minus_two {
                    violations.push(Violation {
                        rule: Rule::MinusOneLeafNeighbor,
                        vertices: vec![v.id, *j],
                        message: format!("neighbour has k = {}, expected -2", k_of(z, *j)),
                    });
                }
            }
            [j1, j2] => {
                let (k1, k2) = (k_of(z, *j1), k_of(z, *j2));
                if k1 + k2 != minus_two || *k1 == minus_one || *k2 == minus_one {
                    violations.push(Violation {
                        rule: Rule::MinusOneBridgeNeighbors,
                        vertices: vec![v.id, *j1, *j2],
                        message: format!("neighbour discrepancies {k1} and {k2}"),
                    });
                }
            }
            _ => violations.push(Violation {
                rule: Rule::MinusOneValency,
                vertices: vec![v.id],
                message: format!("k = -1 vertex has valency {}", nbrs.len()),
            }),
        }
    }
    for e in g.edges() {
        if *k_of(z, e.a) == minus_one && *k_of(z, e.b) == minus_one {
            violations.push(Violation {
                rule: Rule::AdjacentMinusOnes,
                vertices: vec![e.a, e.b],
                message: "adjacent vertices both have k = -1".into(),
            });
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{canonical_cycle, Edge, Vertex};
    use std::collections::BTreeMap;

    fn graph(vs: &[(i64, i64, i64)], es: &[(i64, i64, i64)]) -> WeightedDualGraph {
        WeightedDualGraph::new(
            vs.iter()
                .map(|&(id, genus, euler)| Vertex { id, genus, euler })
                .collect(),
            es.iter()
                .map(|&(a, b, multiplicity)| Edge { a, b, multiplicity })
                .collect(),
        )
        .unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn analyze(g: &WeightedDualGraph) -> (CanonicalCycle, Classification) {
        let z = canonical_cycle(g).unwrap();
        let c = classify(g, &z);
        (z, c)
    }

    #[test]
    fn a1_is_kleinian() {
        let (_, c) = analyze(&graph(&[(0, 0, 2)], &[]));
        assert!(c.is_kleinian && c.is_log_canonical && c.is_numerically_gorenstein);
        assert_eq!(
            c.kleinian_type,
            Some(KleinianType {
                family: AdeFamily::A,
                rank: 1
            })
        );
    }

    #[test]
    fn triangle_is_cusp() {
        let g = graph(
            &[(0, 0, 3), (1, 0, 3), (2, 0, 3)],
            &[(0, 1, 1), (1, 2, 1), (0, 2, 1)],
        );
        let (z, c) = analyze(&g);
        assert!(z.discrepancies().values().all(|k| *k == q(-1, 1)));
        assert!(c.is_cusp && !c.is_kleinian && !c.is_simple_elliptic && c.is_log_canonical);
    }

    #[test]
    fn double_edge_two_cycle_is_cusp() {
        let (_, c) = analyze(&graph(&[(0, 0, 3), (1, 0, 3)], &[(0, 1, 2)]));
        assert!(c.is_cusp);
    }

    #[test]
    fn genus_one_vertex_is_simple_elliptic() {
        let (z, c) = analyze(&graph(&[(0, 1, 1)], &[]));
        assert_eq!(z.discrepancy(0), Some(&q(-1, 1)));
        assert!(c.is_simple_elliptic && c.is_log_canonical && !c.is_cusp && !c.is_kleinian);
    }

    #[test]
    fn genus_two_vertex_is_none_of_them() {
        let (z, c) = analyze(&graph(&[(0, 2, 1)], &[]));
        assert_eq!(z.discrepancy(0), Some(&q(-3, 1)));
        assert!(!c.is_log_canonical && !c.is_kleinian && !c.is_cusp && !c.is_simple_elliptic);
    }

    #[test]
    fn dynkin_shapes() {
        let d5 = graph(
            &[(1, 0, 2), (2, 0, 2), (3, 0, 2), (4, 0, 2), (5, 0, 2)],
            &[(1, 3, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1)],
        );
        assert_eq!(
            kleinian_shape(&d5).map(|t| t.to_string()),
            Some("D5".into())
        );
        let e6 = graph(
            &[
                (1, 0, 2),
                (2, 0, 2),
                (3, 0, 2),
                (4, 0, 2),
                (5, 0, 2),
                (6, 0, 2),
            ],
            &[(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (3, 6, 1)],
        );
        assert_eq!(
            kleinian_shape(&e6).map(|t| t.to_string()),
            Some("E6".into())
        );
        // Affine D4: four arms, not a Dynkin diagram.
        let d4_affine = graph(
            &[(0, 0, 2), (1, 0, 2), (2, 0, 2), (3, 0, 2), (4, 0, 2)],
            &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (0, 4, 1)],
        );
        assert_eq!(kleinian_shape(&d4_affine), None);
        // Wrong weight.
        assert_eq!(kleinian_shape(&graph(&[(0, 0, 3)], &[])), None);
    }

    #[test]
    fn veys_on_genus_two_vertex() {
        let g = graph(&[(0, 2, 1)], &[]);
        let z = canonical_cycle(&g).unwrap();
        let r = verify_veys(&g, &z);
        assert!(r.holds && r.applicable);
        assert_eq!(r.v_minus, BTreeSet::from([0]));
    }

    #[test]
    fn veys_not_applicable_on_log_canonical() {
        let g = graph(&[(0, 1, 1)], &[]);
        let z = canonical_cycle(&g).unwrap();
        let r = verify_veys(&g, &z);
        assert!(r.holds && !r.applicable);
        assert!(r.note.unwrap().contains("log canonical"));
        assert!(verify_corollaries(&g, &z).holds);
    }

    #[test]
    fn corollary_leaf_case() {
        // Genus-2 centre (e=3) with a rational (-2) leaf: k = (-2, -1).
        let g = graph(&[(0, 2, 3), (1, 0, 2)], &[(0, 1, 1)]);
        let z = canonical_cycle(&g).unwrap();
        assert_eq!(z.discrepancy(0), Some(&q(-2, 1)));
        assert_eq!(z.discrepancy(1), Some(&q(-1, 1)));
        let r = verify_corollaries(&g, &z);
        assert!(r.holds, "{:?}", r.violations);
        assert!(verify_veys(&g, &z).holds);
    }

    #[test]
    fn adjacent_minus_ones_flagged() {
        let g = graph(&[(0, 0, 2), (1, 0, 2)], &[(0, 1, 1)]);
        let z = CanonicalCycle::from_discrepancies(BTreeMap::from([(0, q(-1, 1)), (1, q(-1, 1))]))
            .unwrap();
        let rules: Vec<Rule> = minus_one_violations(&g, &z)
            .iter()
            .map(|v| v.rule)
            .collect();
        assert!(rules.contains(&Rule::AdjacentMinusOnes));
    }

    #[test]
    fn synthetic_segment_violations_are_reported() {
        // Decreasing discrepancies along a segment and a positive entry.
        let g = graph(&[(0, 2, 1), (1, 0, 2), (2, 0, 2)], &[(0, 1, 1), (1, 2, 1)]);
        let z = CanonicalCycle::from_discrepancies(BTreeMap::from([
            (0, q(-3, 1)),
            (1, q(-1, 2)),
            (2, q(1, 2)),
        ]))
        .unwrap();
        let rep = verify_veys(&g, &z);
        assert!(!rep.holds);
        let rules: Vec<Rule> = rep.violations.iter().map(|v| v.rule).collect();
        assert!(rules.contains(&Rule::AllNegative));
        let z = CanonicalCycle::from_discrepancies(BTreeMap::from([
            (0, q(-3, 1)),
            (1, q(-1, 2)),
            (2, q(-2, 3)),
        ]))
        .unwrap();
        let rules: Vec<Rule> = verify_veys(&g, &z)
            .violations
            .iter()
            .map(|v| v.rule)
            .collect();
        assert_eq!(rules, vec![Rule::SegmentIncreasing]);
    }
}
