//! Constructions of grade-preserving maps with `π1`-injective piece
//! restrictions: subdivisions, inclusions into larger spaces, Nielsen
//! twists, and their composites.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grading::{validate_grading, Piece, PieceId, TreeGrading};
use crate::graph::{Edge, EdgeId, EdgePath, Traversal, VertexId, WeightedGraph};
use crate::homotopy::SpanningStructure;
use crate::maps::GradedMap;
use crate::rational::Rational;
use crate::space::Space;

fn next_vertex(g: &WeightedGraph) -> u32 {
    g.max_vertex_id().map_or(1, |v| v.0 + 1)
}

fn next_edge(g: &WeightedGraph) -> u32 {
    g.max_edge_id().map_or(1, |e| e.0 + 1)
}

/// Inclusion of `s` into the larger space `(target, grading)`, which must
/// contain every vertex and edge of `s` with the same endpoints.
fn inclusion(s: &Space, target: WeightedGraph, grading: TreeGrading) -> Result<GradedMap> {
    GradedMap::new(
        s.graph.clone(),
        s.grading.clone(),
        target,
        grading,
        s.graph.vertices().map(|v| (v, v)).collect(),
        s.graph
            .edges()
            .map(|e| (e.id, EdgePath::new(e.u, vec![Traversal::forward(e.id)])))
            .collect(),
    )
}

fn extended(g: &WeightedGraph, new_vertices: &[u32], new_edges: Vec<Edge>) -> Result<WeightedGraph> {
    let vertices = g.vertices().chain(new_vertices.iter().copied().map(VertexId));
    let edges = g.edges().cloned().chain(new_edges);
    WeightedGraph::new(vertices, edges)
}

fn unit_edge(id: u32, u: u32, v: u32) -> Edge {
    Edge {
        id: EdgeId(id),
        u: VertexId(u),
        v: VertexId(v),
        len: Rational::ONE,
    }
}

/// Splits edge `e` at its midpoint; `e` keeps its first half.
pub fn subdivide(s: &Space, e: EdgeId) -> Result<GradedMap> {
    let edge = *s.graph.require_edge(e)?;
    let w = next_vertex(&s.graph);
    let e2 = EdgeId(next_edge(&s.graph));
    let half = edge.len / Rational::from(2);
    let mut edges: Vec<Edge> = s.graph.edges().filter(|x| x.id != e).cloned().collect();
    edges.push(Edge {
        id: e,
        u: edge.u,
        v: VertexId(w),
        len: half,
    });
    edges.push(Edge {
        id: e2,
        u: VertexId(w),
        v: edge.v,
        len: half,
    });
    let target = WeightedGraph::new(s.graph.vertices().chain([VertexId(w)]), edges)?;
    let pieces = s
        .grading
        .pieces()
        .iter()
        .map(|p| {
            let mut p = p.clone();
            if p.edges.contains(&e) {
                p.edges.insert(e2);
                p.vertices.insert(VertexId(w));
            }
            p
        })
        .collect();
    let grading = TreeGrading::new(pieces);
    let mut edge_map: BTreeMap<EdgeId, EdgePath> = s
        .graph
        .edges()
        .map(|x| (x.id, EdgePath::new(x.u, vec![Traversal::forward(x.id)])))
        .collect();
    edge_map.insert(
        e,
        EdgePath::new(edge.u, vec![Traversal::forward(e), Traversal::forward(e2)]),
    );
    GradedMap::new(
        s.graph.clone(),
        s.grading.clone(),
        target,
        grading,
        s.graph.vertices().map(|v| (v, v)).collect(),
        edge_map,
    )
}

/// Includes `s` into the space with a unit triangle glued to piece `p` at
/// vertex `at`; the triangle joins that piece.
pub fn attach_triangle(s: &Space, p: PieceId, at: VertexId) -> Result<GradedMap> {
    let piece = s.grading.require_piece(p)?;
    if !piece.vertices.contains(&at) {
        return Err(Error::input(format!("{at} is not in {p}")));
    }
    let (a, b) = (next_vertex(&s.graph), next_vertex(&s.graph) + 1);
    let e = next_edge(&s.graph);
    let new_edges = vec![unit_edge(e, at.0, a), unit_edge(e + 1, a, b), unit_edge(e + 2, b, at.0)];
    let target = extended(&s.graph, &[a, b], new_edges)?;
    let pieces = s
        .grading
        .pieces()
        .iter()
        .map(|q| {
            let mut q = q.clone();
            if q.id == p {
                q.edges.extend([EdgeId(e), EdgeId(e + 1), EdgeId(e + 2)]);
                q.vertices.extend([VertexId(a), VertexId(b)]);
            }
            q
        })
        .collect();
    inclusion(s, target, TreeGrading::new(pieces))
}

/// Includes `s` into the space with a new unit triangle hanging from `at`
/// by a unit bridge; the triangle is a new piece.
pub fn attach_bridged_triangle(s: &Space, at: VertexId) -> Result<GradedMap> {
    s.graph.require_vertex(at)?;
    let x = next_vertex(&s.graph);
    let e = next_edge(&s.graph);
    let new_edges = vec![
        unit_edge(e, at.0, x),
        unit_edge(e + 1, x, x + 1),
        unit_edge(e + 2, x + 1, x + 2),
        unit_edge(e + 3, x + 2, x),
    ];
    let target = extended(&s.graph, &[x, x + 1, x + 2], new_edges)?;
    let new_id = PieceId(s.grading.piece_ids().map(|p| p.0).max().unwrap_or(0) + 1);
    let mut pieces = s.grading.pieces().to_vec();
    pieces.push(Piece::from_edges(
        &target,
        new_id,
        [EdgeId(e + 1), EdgeId(e + 2), EdgeId(e + 3)].into(),
    )?);
    inclusion(s, target, TreeGrading::new(pieces))
}

/// The self-map of `s` sending generator edge `e` of a piece to `L·e`, where
/// `L` is the loop at the tail of `e` running once around another generator
/// `c` of the same piece (`power` times, inverted when `power < 0`). On the
/// free group of the piece this is the automorphism `g_e ↦ w g_e` with `w`
/// a conjugate of `g_c^power`.
pub fn nielsen_twist(s: &Space, e: EdgeId, c: EdgeId, power: i32) -> Result<GradedMap> {
    let ss = SpanningStructure::new(&s.graph, &s.grading)?;
    let (ge, gc) = match (ss.generators.get(&e), ss.generators.get(&c)) {
        (Some(a), Some(b)) if a.piece == b.piece && e != c => (a, b),
        _ => {
            return Err(Error::input(
                "twist needs two distinct generator edges of one piece",
            ))
        }
    };
    let tree = &ss.piece_trees[&ge.piece];
    let path = |a: VertexId, b: VertexId| {
        s.graph
            .path_within(a, b, |x| tree.contains(&x))
            .ok_or_else(|| Error::invariant("piece tree does not span its piece"))
    };
    let edge = *s.graph.edge(e).unwrap();
    let around = *s.graph.edge(gc.edge).unwrap();
    let mut lp = path(edge.u, around.u)?;
    lp.push(Traversal::forward(c));
    lp.extend(path(around.v, edge.u)?);
    let lp = EdgePath::new(edge.u, lp);
    let unit = if power < 0 { lp.reversed(&s.graph)? } else { lp };
    let mut steps = Vec::new();
    for _ in 0..power.unsigned_abs() {
        steps.extend_from_slice(&unit.steps);
    }
    steps.push(Traversal::forward(e));
    let mut map = GradedMap::identity(&s.graph, &s.grading)?;
    map.edge_map.insert(e, EdgePath::new(edge.u, steps));
    GradedMap::new(
        map.source,
        map.source_grading,
        map.target,
        map.target_grading,
        map.vertex_map,
        map.edge_map,
    )
}

/// `g ∘ f`.
pub fn compose(f: &GradedMap, g: &GradedMap) -> Result<GradedMap> {
    if f.target != g.source || f.target_grading != g.source_grading {
        return Err(Error::input("maps do not compose"));
    }
    let vertex_map = f.vertex_map.iter().map(|(&v, w)| (v, g.vertex_map[w])).collect();
    let edge_map = f
        .edge_map
        .iter()
        .map(|(&e, p)| Ok((e, g.apply_path(p)?)))
        .collect::<Result<_>>()?;
    GradedMap::new(
        f.source.clone(),
        f.source_grading.clone(),
        g.target.clone(),
        g.target_grading.clone(),
        vertex_map,
        edge_map,
    )
}

pub fn target_space(f: &GradedMap) -> Space {
    Space {
        graph: f.target.clone(),
        grading: f.target_grading.clone(),
    }
}

/// Generator edges of each piece with at least two generators.
pub fn twistable(s: &Space) -> Result<Vec<(EdgeId, EdgeId)>> {
    validate_grading(&s.graph, &s.grading)?;
    let ss = SpanningStructure::new(&s.graph, &s.grading)?;
    let mut by_piece: BTreeMap<PieceId, Vec<EdgeId>> = BTreeMap::new();
    for g in ss.generators.values() {
        by_piece.entry(g.piece).or_default().push(g.edge);
    }
    Ok(by_piece
        .values()
        .filter(|v| v.len() >= 2)
        .map(|v| (v[0], v[1]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{triangle_chain, ChainLayout};
    use crate::graph::build_graph;
    use crate::maps::check_pi1_injectivity;

    fn g2() -> Space {
        triangle_chain(2, Rational::from(3), Rational::ONE, ChainLayout::Chain)
            .unwrap()
            .space
    }

    fn theta() -> Space {
        let g = build_graph(
            1..=4,
            [(1, 1, 2), (2, 2, 3), (3, 1, 3), (4, 1, 4), (5, 4, 3)]
                .map(|(i, u, v)| (i, u, v, Rational::ONE)),
        )
        .unwrap();
        Space::canonical(g).unwrap()
    }

    #[test]
    fn constructions_are_injective_on_pieces() {
        let s = g2();
        let maps = vec![
            subdivide(&s, EdgeId(1)).unwrap(),
            subdivide(&s, EdgeId(4)).unwrap(),
            attach_triangle(&s, PieceId(1), VertexId(2)).unwrap(),
            attach_bridged_triangle(&s, VertexId(6)).unwrap(),
        ];
        for f in &maps {
            let r = check_pi1_injectivity(f, &[]).unwrap();
            assert!(r.pieces_injective, "{r:?}");
        }
    }

    #[test]
    fn twists_are_automorphisms() {
        let s = theta();
        let pairs = twistable(&s).unwrap();
        assert_eq!(pairs.len(), 1);
        let (e, c) = pairs[0];
        for power in [-2, -1, 1, 3] {
            let f = nielsen_twist(&s, e, c, power).unwrap();
            assert!(check_pi1_injectivity(&f, &[]).unwrap().pieces_injective);
        }
        let sub = subdivide(&s, EdgeId(2)).unwrap();
        let mid = target_space(&sub);
        let (e2, c2) = twistable(&mid).unwrap()[0];
        let tw = nielsen_twist(&mid, e2, c2, 1).unwrap();
        let both = compose(&sub, &tw).unwrap();
        assert!(check_pi1_injectivity(&both, &[]).unwrap().pieces_injective);
        assert!(compose(&tw, &sub).is_err());
        assert!(nielsen_twist(&g2(), EdgeId(3), EdgeId(7), 1).is_err());
    }
}
