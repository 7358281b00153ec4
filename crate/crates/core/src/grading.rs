//! Disjoint tree-gradings: pieces, validation, parameterization trees,
//! graded subspaces and their expansions.
//!
//! A grading is a list of pairwise vertex-disjoint connected pieces such that
//! every simple cycle of the ambient graph lies inside a single piece. The
//! edges outside every piece form the tree portion, which is then a forest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::graph::{ContractionClass, EdgeId, VertexId, WeightedGraph};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PieceId(pub u32);

impl fmt::Debug for PieceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

impl fmt::Display for PieceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub id: PieceId,
    pub edges: BTreeSet<EdgeId>,
    pub vertices: BTreeSet<VertexId>,
}

impl Piece {
    /// A one-point piece.
    pub fn degenerate(id: PieceId, v: VertexId) -> Self {
        Piece {
            id,
            edges: BTreeSet::new(),
            vertices: BTreeSet::from([v]),
        }
    }

    /// A piece spanned by `edges`; its vertices are their endpoints.
    pub fn from_edges(g: &WeightedGraph, id: PieceId, edges: BTreeSet<EdgeId>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::input(format!("piece {id} has no edges and no vertex")));
        }
        let mut vertices = BTreeSet::new();
        for &e in &edges {
            let edge = g
                .edge(e)
                .ok_or_else(|| Error::input(format!("piece {id} references unknown edge {e}")))?;
            vertices.insert(edge.u);
            vertices.insert(edge.v);
        }
        Ok(Piece { id, edges, vertices })
    }

    pub fn is_degenerate(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn min_vertex(&self) -> VertexId {
        *self.vertices.iter().next().expect("pieces are non-empty")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GradingViolation {
    #[error("pieces {first} and {second} share vertex {vertex}")]
    Overlap {
        first: PieceId,
        second: PieceId,
        vertex: VertexId,
    },
    #[error("duplicate piece id {0}")]
    DuplicateId(PieceId),
    #[error("piece {0} is not connected")]
    DisconnectedPiece(PieceId),
    #[error("cycle {cycle:?} is not contained in one piece")]
    CycleNotInOnePiece { cycle: Vec<EdgeId> },
    #[error("ambient graph is not connected")]
    DisconnectedAmbient,
}

/// How cycle containment is checked by [`validate_grading_with`].
#[derive(Clone, Copy, Debug)]
pub struct ValidationOptions {
    /// Enumerate simple cycles exhaustively on graphs with at most this many vertices.
    pub enumeration_vertex_limit: usize,
    /// Never enumerate when the cycle rank exceeds this (2^rank subsets are visited).
    pub enumeration_rank_limit: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            enumeration_vertex_limit: 14,
            enumeration_rank_limit: 16,
        }
    }
}

/// An ordered list of pieces plus owner indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeGrading {
    pieces: Vec<Piece>,
    vertex_owner: BTreeMap<VertexId, PieceId>,
    edge_owner: BTreeMap<EdgeId, PieceId>,
}

impl TreeGrading {
    /// Pieces are kept sorted by id. Ownership indices record the first piece
    /// claiming an object; overlaps are reported by [`validate_grading`].
    pub fn new(mut pieces: Vec<Piece>) -> Self {
        pieces.sort_by_key(|p| p.id);
        let mut vertex_owner = BTreeMap::new();
        let mut edge_owner = BTreeMap::new();
        for p in &pieces {
            for &v in &p.vertices {
                vertex_owner.entry(v).or_insert(p.id);
            }
            for &e in &p.edges {
                edge_owner.entry(e).or_insert(p.id);
            }
        }
        TreeGrading {
            pieces,
            vertex_owner,
            edge_owner,
        }
    }

    /// Assigns ids `1, 2, ...` in ascending order of each piece's smallest vertex.
    pub fn with_canonical_ids(mut pieces: Vec<Piece>) -> Self {
        pieces.sort_by_key(|p| p.min_vertex());
        for (i, p) in pieces.iter_mut().enumerate() {
            p.id = PieceId(i as u32 + 1);
        }
        TreeGrading::new(pieces)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece(&self, id: PieceId) -> Option<&Piece> {
        self.pieces
            .binary_search_by_key(&id, |p| p.id)
            .ok()
            .map(|i| &self.pieces[i])
    }

    pub(crate) fn require_piece(&self, id: PieceId) -> Result<&Piece> {
        self.piece(id)
            .ok_or_else(|| Error::input(format!("unknown piece {id}")))
    }

    pub fn piece_ids(&self) -> impl Iterator<Item = PieceId> + '_ {
        self.pieces.iter().map(|p| p.id)
    }

    pub fn non_degenerate(&self) -> impl Iterator<Item = &Piece> + '_ {
        self.pieces.iter().filter(|p| !p.is_degenerate())
    }

    pub fn piece_of_vertex(&self, v: VertexId) -> Option<PieceId> {
        self.vertex_owner.get(&v).copied()
    }

    pub fn piece_of_edge(&self, e: EdgeId) -> Option<PieceId> {
        self.edge_owner.get(&e).copied()
    }

    pub fn in_piece_portion(&self, v: VertexId) -> bool {
        self.vertex_owner.contains_key(&v)
    }

    /// Edges outside every piece.
    pub fn tree_edges(&self, g: &WeightedGraph) -> BTreeSet<EdgeId> {
        g.edge_ids()
            .filter(|e| !self.edge_owner.contains_key(e))
            .collect()
    }

    /// Vertices outside every piece.
    pub fn free_vertices(&self, g: &WeightedGraph) -> BTreeSet<VertexId> {
        g.vertices()
            .filter(|v| !self.vertex_owner.contains_key(v))
            .collect()
    }

    pub fn from_doc(g: &WeightedGraph, doc: &GradingDoc) -> Result<Self> {
        let mut pieces = Vec::with_capacity(doc.pieces.len());
        for pd in &doc.pieces {
            let id = PieceId(pd.id);
            let piece = if pd.edges.is_empty() {
                let v = pd
                    .vertex
                    .map(VertexId)
                    .ok_or_else(|| Error::input(format!("piece {id} has no edges and no vertex")))?;
                g.require_vertex(v)?;
                Piece::degenerate(id, v)
            } else {
                let p = Piece::from_edges(g, id, pd.edges.iter().copied().map(EdgeId).collect())?;
                if let Some(v) = pd.vertex {
                    if !p.vertices.contains(&VertexId(v)) {
                        return Err(Error::input(format!(
                            "piece {id}: vertex {v} is not an endpoint of its edges"
                        )));
                    }
                }
                p
            };
            pieces.push(piece);
        }
        Ok(TreeGrading::new(pieces))
    }

    pub fn to_doc(&self) -> GradingDoc {
        GradingDoc {
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceDoc {
                    id: p.id.0,
                    edges: p.edges.iter().map(|e| e.0).collect(),
                    vertex: p.is_degenerate().then(|| p.min_vertex().0),
                })
                .collect(),
        }
    }

    pub fn to_dot(&self, g: &WeightedGraph) -> String {
        g.to_dot_with(
            "Grading",
            |v| {
                self.piece_of_vertex(v)
                    .map(|p| format!("xlabel=\"{p}\", style=filled, fillcolor=\"/set39/{}\"", p.0 % 9 + 1))
            },
            |e| {
                Some(match self.piece_of_edge(e.id) {
                    Some(p) => format!("color=\"/set39/{}\", penwidth=2", p.0 % 9 + 1),
                    None => "style=dashed".to_string(),
                })
            },
        )
    }
}

/// JSON shape: `{"pieces": [{"id": int, "edges": [int], "vertex": int?}]}`.
/// `vertex` names the point of a degenerate (edgeless) piece.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GradingDoc {
    pub pieces: Vec<PieceDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub id: u32,
    #[serde(default)]
    pub edges: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<u32>,
}

/// The minimal grading: one piece per connected component of the non-bridge
/// subgraph. Never emits degenerate pieces.
pub fn canonical_grading(g: &WeightedGraph) -> Result<TreeGrading> {
    g.ensure_connected()?;
    let bridges = g.bridges();
    let cyclic: BTreeSet<EdgeId> = g.edge_ids().filter(|e| !bridges.contains(e)).collect();
    let touched: BTreeSet<VertexId> = cyclic
        .iter()
        .flat_map(|&e| {
            let edge = g.edge(e).unwrap();
            [edge.u, edge.v]
        })
        .collect();
    let pieces = g
        .components_of(&touched, &cyclic)
        .into_iter()
        .map(|vertices| {
            let edges = cyclic
                .iter()
                .copied()
                .filter(|&e| vertices.contains(&g.edge(e).unwrap().u))
                .collect();
            Piece {
                id: PieceId(0),
                edges,
                vertices,
            }
        })
        .collect();
    Ok(TreeGrading::with_canonical_ids(pieces))
}

pub fn validate_grading(g: &WeightedGraph, t: &TreeGrading) -> Result<(), GradingViolation> {
    validate_grading_with(g, t, ValidationOptions::default())
}

/// Checks disjointness, connectedness of each piece, and that every simple
/// cycle lies in one piece. Returns the first violation with a witness.
pub fn validate_grading_with(
    g: &WeightedGraph,
    t: &TreeGrading,
    opts: ValidationOptions,
) -> Result<(), GradingViolation> {
    if !g.is_connected() {
        return Err(GradingViolation::DisconnectedAmbient);
    }
    let mut ids = BTreeSet::new();
    let mut owner: BTreeMap<VertexId, PieceId> = BTreeMap::new();
    for p in t.pieces() {
        if !ids.insert(p.id) {
            return Err(GradingViolation::DuplicateId(p.id));
        }
        for &v in &p.vertices {
            if let Some(&first) = owner.get(&v) {
                return Err(GradingViolation::Overlap {
                    first,
                    second: p.id,
                    vertex: v,
                });
            }
            owner.insert(v, p.id);
        }
    }
    for p in t.pieces() {
        if g.components_of(&p.vertices, &p.edges).len() != 1 {
            return Err(GradingViolation::DisconnectedPiece(p.id));
        }
    }
    let enumerated = if g.vertex_count() <= opts.enumeration_vertex_limit {
        g.simple_cycles(opts.enumeration_rank_limit)
    } else {
        None
    };
    match enumerated {
        Some(cycles) => {
            for cycle in cycles {
                let first = t.piece_of_edge(*cycle.iter().next().unwrap());
                let inside = first.is_some() && cycle.iter().all(|&e| t.piece_of_edge(e) == first);
                if !inside {
                    return Err(GradingViolation::CycleNotInOnePiece {
                        cycle: cycle.into_iter().collect(),
                    });
                }
            }
        }
        None => {
            // With disjoint pieces, all cycles lie in single pieces exactly when
            // every non-bridge edge belongs to some piece.
            let bridges = g.bridges();
            for e in g.edges() {
                if bridges.contains(&e.id) || t.piece_of_edge(e.id).is_some() {
                    continue;
                }
                let mut cycle = vec![e.id];
                if !e.is_loop() {
                    let back = g
                        .path_within(e.v, e.u, |x| x != e.id)
                        .expect("non-bridge edge lies on a cycle");
                    cycle.extend(back.into_iter().map(|tr| tr.edge));
                }
                cycle.sort();
                return Err(GradingViolation::CycleNotInOnePiece { cycle });
            }
        }
    }
    Ok(())
}

/// Names the vertex `y_P` that a collapsed piece becomes: `offset + id`.
///
/// The offset is the largest vertex id of the original ambient graph, so the
/// same piece receives the same name in every quotient of that graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceNaming {
    pub offset: u32,
}

impl PieceNaming {
    pub fn for_graph(g: &WeightedGraph) -> Self {
        PieceNaming {
            offset: g.max_vertex_id().map_or(0, |v| v.0),
        }
    }

    pub fn name(&self, p: PieceId) -> Result<VertexId> {
        self.offset
            .checked_add(p.0)
            .map(VertexId)
            .ok_or_else(|| Error::input(format!("piece id {p} overflows the vertex id space")))
    }
}

/// Contracts each listed piece to its named vertex.
pub(crate) fn collapse_pieces<'a>(
    g: &WeightedGraph,
    pieces: impl IntoIterator<Item = &'a Piece>,
    naming: PieceNaming,
) -> Result<(WeightedGraph, BTreeMap<VertexId, VertexId>)> {
    let classes = pieces
        .into_iter()
        .map(|p| {
            Ok(ContractionClass {
                name: naming.name(p.id)?,
                vertices: p.vertices.clone(),
                internal_edges: p.edges.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    g.contract(&classes)
}

/// A parameterization `(T, V_T, q)`: the tree obtained by collapsing every
/// piece to a point, the piece points, and the collapse map.
#[derive(Clone, Debug, Serialize)]
pub struct Parameterization {
    pub tree: WeightedGraph,
    pub piece_points: BTreeMap<PieceId, VertexId>,
    pub q: BTreeMap<VertexId, VertexId>,
}

impl Parameterization {
    /// `V_T`.
    pub fn marked(&self) -> BTreeSet<VertexId> {
        self.piece_points.values().copied().collect()
    }

    /// Re-checks the defining properties against the source grading.
    pub fn check(&self, g: &WeightedGraph, t: &TreeGrading) -> Result<()> {
        if !self.tree.is_connected() || self.tree.edge_count() + 1 != self.tree.vertex_count() {
            return Err(Error::invariant("parameterization is not a tree"));
        }
        let mut fibers: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for (&x, &y) in &self.q {
            fibers.entry(y).or_default().insert(x);
        }
        if fibers.len() != self.tree.vertex_count() || self.q.len() != g.vertex_count() {
            return Err(Error::invariant("collapse map is not surjective and total"));
        }
        for p in t.pieces() {
            let y = self.piece_points[&p.id];
            if fibers.get(&y) != Some(&p.vertices) {
                return Err(Error::invariant(format!("fiber over {y} is not piece {}", p.id)));
            }
        }
        let marked = self.marked();
        for (y, fiber) in &fibers {
            if !marked.contains(y) && fiber.len() != 1 {
                return Err(Error::invariant(format!("unmarked fiber over {y} is not a point")));
            }
        }
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let marked = self.marked();
        self.tree.to_dot_with(
            "Parameterization",
            |v| marked.contains(&v).then(|| "shape=doublecircle, style=filled".to_string()),
            |_| None,
        )
    }
}

pub fn parameterize(g: &WeightedGraph, t: &TreeGrading) -> Result<Parameterization> {
    parameterize_named(g, t, PieceNaming::for_graph(g))
}

pub(crate) fn parameterize_named(
    g: &WeightedGraph,
    t: &TreeGrading,
    naming: PieceNaming,
) -> Result<Parameterization> {
    validate_grading(g, t)?;
    let (tree, q) = collapse_pieces(g, t.pieces(), naming)?;
    let piece_points = t
        .pieces()
        .iter()
        .map(|p| Ok((p.id, naming.name(p.id)?)))
        .collect::<Result<_>>()?;
    let param = Parameterization {
        tree,
        piece_points,
        q,
    };
    param.check(g, t)?;
    Ok(param)
}

/// A connected subgraph given by explicit vertex and edge sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subgraph {
    pub vertices: BTreeSet<VertexId>,
    #[serde(default)]
    pub edges: BTreeSet<EdgeId>,
}

impl Subgraph {
    pub fn whole(g: &WeightedGraph) -> Self {
        Subgraph {
            vertices: g.vertices().collect(),
            edges: g.edge_ids().collect(),
        }
    }

    /// The subgraph spanned by `edges` (vertices are their endpoints).
    pub fn spanned(g: &WeightedGraph, edges: impl IntoIterator<Item = EdgeId>) -> Result<Self> {
        let mut s = Subgraph {
            vertices: BTreeSet::new(),
            edges: BTreeSet::new(),
        };
        for e in edges {
            let edge = g.require_edge(e)?;
            s.vertices.insert(edge.u);
            s.vertices.insert(edge.v);
            s.edges.insert(e);
        }
        Ok(s)
    }

    pub fn of_piece(p: &Piece) -> Self {
        Subgraph {
            vertices: p.vertices.clone(),
            edges: p.edges.clone(),
        }
    }

    /// Builds the subgraph, requiring it to be well formed and connected.
    pub fn realize(&self, g: &WeightedGraph) -> Result<WeightedGraph> {
        let h = g.subgraph(&self.vertices, &self.edges)?;
        if !h.is_connected() {
            return Err(Error::input("subgraph is empty or disconnected"));
        }
        Ok(h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InducedKind {
    /// The induced piece is the whole ambient piece.
    Full,
    /// A single point of a larger ambient piece.
    Degenerate,
    /// Neither full nor a point.
    Partial,
}

/// The grading induced on a connected subgraph: every ambient piece meeting
/// the subgraph contributes its intersection, keeping the ambient piece id.
#[derive(Clone, Debug)]
pub struct SubspaceGrading {
    pub subgraph: Subgraph,
    pub graph: WeightedGraph,
    pub grading: TreeGrading,
    pub kinds: BTreeMap<PieceId, InducedKind>,
}

impl SubspaceGrading {
    /// Every induced piece is a point or a whole ambient piece.
    pub fn is_sectional(&self) -> bool {
        self.kinds.values().all(|k| *k != InducedKind::Partial)
    }

    /// Every induced piece is an ambient piece.
    pub fn is_full(&self) -> bool {
        self.kinds.values().all(|k| *k == InducedKind::Full)
    }
}

pub fn graded_subspace(
    g: &WeightedGraph,
    t: &TreeGrading,
    sub: &Subgraph,
) -> Result<SubspaceGrading> {
    let graph = sub.realize(g)?;
    let mut pieces = Vec::new();
    let mut kinds = BTreeMap::new();
    for p in t.pieces() {
        let vertices: BTreeSet<VertexId> = p.vertices.intersection(&sub.vertices).copied().collect();
        if vertices.is_empty() {
            continue;
        }
        let edges: BTreeSet<EdgeId> = p.edges.intersection(&sub.edges).copied().collect();
        let kind = if vertices == p.vertices && edges == p.edges {
            InducedKind::Full
        } else if vertices.len() == 1 {
            InducedKind::Degenerate
        } else {
            InducedKind::Partial
        };
        kinds.insert(p.id, kind);
        pieces.push(Piece {
            id: p.id,
            edges,
            vertices,
        });
    }
    let grading = TreeGrading::new(pieces);
    validate_grading(&graph, &grading).map_err(|v| {
        Error::invariant(format!("induced grading on a subspace is invalid: {v}"))
    })?;
    Ok(SubspaceGrading {
        subgraph: sub.clone(),
        graph,
        grading,
        kinds,
    })
}

/// Enlarges a graded subspace by replacing each selected induced piece with
/// the ambient piece containing it. Pieces outside `selected` are unchanged.
pub fn expansion(
    g: &WeightedGraph,
    t: &TreeGrading,
    sub: &SubspaceGrading,
    selected: &BTreeSet<PieceId>,
) -> Result<SubspaceGrading> {
    let mut y0 = sub.subgraph.clone();
    let mut pieces: Vec<Piece> = Vec::new();
    for q in sub.grading.pieces() {
        if !selected.contains(&q.id) {
            pieces.push(q.clone());
        }
    }
    for &id in selected {
        let q = sub
            .grading
            .piece(id)
            .ok_or_else(|| Error::input(format!("{id} is not a piece of the subspace")))?;
        let p = t
            .piece(id)
            .filter(|p| q.vertices.is_subset(&p.vertices) && q.edges.is_subset(&p.edges))
            .ok_or_else(|| Error::input(format!("{id} is not contained in an ambient piece")))?;
        y0.vertices.extend(p.vertices.iter().copied());
        y0.edges.extend(p.edges.iter().copied());
        pieces.push(p.clone());
    }
    let grading = TreeGrading::new(pieces);
    let induced = graded_subspace(g, t, &y0)?;
    if induced.grading != grading {
        return Err(Error::invariant(
            "expanded grading differs from the grading induced on the expansion",
        ));
    }
    Ok(induced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::rational::Rational;

    fn unit(n: u32, pairs: &[(u32, u32)]) -> WeightedGraph {
        build_graph(
            1..=n,
            pairs
                .iter()
                .enumerate()
                .map(|(i, &(u, v))| (i as u32 + 1, u, v, Rational::ONE)),
        )
        .unwrap()
    }

    fn g2() -> WeightedGraph {
        unit(6, &[(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 6), (6, 4)])
    }

    fn edges(ids: &[u32]) -> BTreeSet<EdgeId> {
        ids.iter().copied().map(EdgeId).collect()
    }

    fn verts(ids: &[u32]) -> BTreeSet<VertexId> {
        ids.iter().copied().map(VertexId).collect()
    }

    #[test]
    fn canonical_of_c4_is_one_piece() {
        let c4 = unit(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]);
        let t = canonical_grading(&c4).unwrap();
        assert_eq!(t.pieces().len(), 1);
        assert_eq!(t.pieces()[0].edges.len(), 4);
        assert!(t.tree_edges(&c4).is_empty());
    }

    #[test]
    fn canonical_of_path_has_no_pieces() {
        let p3 = unit(3, &[(1, 2), (2, 3)]);
        let t = canonical_grading(&p3).unwrap();
        assert!(t.pieces().is_empty());
        assert_eq!(t.tree_edges(&p3).len(), 2);
    }

    #[test]
    fn canonical_of_g2() {
        let g = g2();
        let t = canonical_grading(&g).unwrap();
        assert_eq!(t.pieces().len(), 2);
        assert_eq!(t.pieces()[0].id, PieceId(1));
        assert_eq!(t.pieces()[0].vertices, verts(&[1, 2, 3]));
        assert_eq!(t.pieces()[1].vertices, verts(&[4, 5, 6]));
        assert_eq!(t.tree_edges(&g), edges(&[4]));
        assert_eq!(validate_grading(&g, &t), Ok(()));
    }

    #[test]
    fn split_cycle_is_rejected() {
        let c4 = unit(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]);
        let t = TreeGrading::new(vec![
            Piece::from_edges(&c4, PieceId(1), edges(&[1])).unwrap(),
            Piece::from_edges(&c4, PieceId(2), edges(&[3])).unwrap(),
        ]);
        assert!(matches!(
            validate_grading(&c4, &t),
            Err(GradingViolation::CycleNotInOnePiece { .. })
        ));
        // Same verdict from the bridge-based criterion.
        let opts = ValidationOptions {
            enumeration_vertex_limit: 0,
            ..Default::default()
        };
        assert!(matches!(
            validate_grading_with(&c4, &t, opts),
            Err(GradingViolation::CycleNotInOnePiece { .. })
        ));
    }

    #[test]
    fn overlapping_pieces_are_rejected() {
        let c4 = unit(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]);
        let t = TreeGrading::new(vec![
            Piece::from_edges(&c4, PieceId(1), edges(&[1, 2])).unwrap(),
            Piece::from_edges(&c4, PieceId(2), edges(&[3, 4])).unwrap(),
        ]);
        assert!(matches!(
            validate_grading(&c4, &t),
            Err(GradingViolation::Overlap { .. })
        ));
    }

    #[test]
    fn disconnected_piece_is_rejected() {
        let g = g2();
        let t = TreeGrading::new(vec![Piece::from_edges(&g, PieceId(1), edges(&[1, 5])).unwrap()]);
        assert_eq!(
            validate_grading(&g, &t),
            Err(GradingViolation::DisconnectedPiece(PieceId(1)))
        );
    }

    #[test]
    fn degenerate_piece_on_pendant_vertex() {
        let mut es: Vec<_> = g2().edges().copied().collect();
        es.push(crate::graph::Edge {
            id: EdgeId(8),
            u: VertexId(5),
            v: VertexId(7),
            len: Rational::ONE,
        });
        let g = WeightedGraph::new((1..=7).map(VertexId), es).unwrap();
        let mut pieces = canonical_grading(&g).unwrap().pieces().to_vec();
        pieces.push(Piece::degenerate(PieceId(3), VertexId(7)));
        let t = TreeGrading::new(pieces);
        assert_eq!(validate_grading(&g, &t), Ok(()));
        let param = parameterize(&g, &t).unwrap();
        assert_eq!(param.marked().len(), 3);
        assert_eq!(param.tree.vertex_count(), 3);
    }

    #[test]
    fn parameterize_c4_and_g2() {
        let c4 = unit(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]);
        let p = parameterize(&c4, &canonical_grading(&c4).unwrap()).unwrap();
        assert_eq!(p.tree.vertex_count(), 1);
        assert_eq!(p.marked(), verts(&[5]));

        let g = g2();
        let p = parameterize(&g, &canonical_grading(&g).unwrap()).unwrap();
        assert_eq!(p.tree.vertex_count(), 2);
        assert_eq!(p.tree.edge_count(), 1);
        assert_eq!(p.marked(), verts(&[7, 8]));
        assert_eq!(p.tree.distance(VertexId(7), VertexId(8)).unwrap(), Rational::ONE);
    }

    #[test]
    fn parameterize_rejects_invalid_grading() {
        let c4 = unit(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]);
        let t = TreeGrading::new(vec![]);
        assert!(matches!(parameterize(&c4, &t), Err(Error::Grading(_))));
    }

    #[test]
    fn subspace_of_a_piece_is_sectional_and_full() {
        let g = g2();
        let t = canonical_grading(&g).unwrap();
        let s = graded_subspace(&g, &t, &Subgraph::of_piece(&t.pieces()[0])).unwrap();
        assert_eq!(s.grading.pieces().len(), 1);
        assert!(s.is_sectional());
        assert!(s.is_full());
    }

    #[test]
    fn subspace_with_a_point_of_p2() {
        let g = g2();
        let t = canonical_grading(&g).unwrap();
        let sub = Subgraph::spanned(&g, edges(&[1, 2, 3, 4])).unwrap();
        let s = graded_subspace(&g, &t, &sub).unwrap();
        assert_eq!(s.kinds[&PieceId(1)], InducedKind::Full);
        assert_eq!(s.kinds[&PieceId(2)], InducedKind::Degenerate);
        assert!(s.is_sectional());
        assert!(!s.is_full());
    }

    #[test]
    fn partial_piece_is_not_sectional() {
        let g = g2();
        let t = canonical_grading(&g).unwrap();
        let sub = Subgraph::spanned(&g, edges(&[1, 2, 4])).unwrap();
        let s = graded_subspace(&g, &t, &sub).unwrap();
        assert_eq!(s.kinds[&PieceId(1)], InducedKind::Partial);
        assert_eq!(s.grading.piece(PieceId(1)).unwrap().edges.len(), 2);
        assert!(!s.is_sectional());
    }

    #[test]
    fn disconnected_subspace_is_input_error() {
        let g = g2();
        let t = canonical_grading(&g).unwrap();
        let sub = Subgraph::spanned(&g, edges(&[1, 5])).unwrap();
        assert!(matches!(graded_subspace(&g, &t, &sub), Err(Error::Input(_))));
    }

    #[test]
    fn expansion_at_the_point_recovers_g2() {
        let g = g2();
        let t = canonical_grading(&g).unwrap();
        let sub = Subgraph::spanned(&g, edges(&[1, 2, 3, 4])).unwrap();
        let s = graded_subspace(&g, &t, &sub).unwrap();
        let e = expansion(&g, &t, &s, &BTreeSet::from([PieceId(2)])).unwrap();
        assert_eq!(e.subgraph, Subgraph::whole(&g));
        assert_eq!(e.grading, t);

        let same = expansion(&g, &t, &s, &BTreeSet::new()).unwrap();
        assert_eq!(same.subgraph, sub);

        let whole = graded_subspace(&g, &t, &Subgraph::whole(&g)).unwrap();
        let again = expansion(&g, &t, &whole, &BTreeSet::from([PieceId(1), PieceId(2)])).unwrap();
        assert_eq!(again.grading, t);
    }

    #[test]
    fn expansion_of_partial_piece_is_sectional() {
        let g = g2();
        let t = canonical_grading(&g).unwrap();
        let sub = Subgraph::spanned(&g, edges(&[1, 2, 4])).unwrap();
        let s = graded_subspace(&g, &t, &sub).unwrap();
        let e = expansion(&g, &t, &s, &BTreeSet::from([PieceId(1)])).unwrap();
        assert!(e.is_sectional());
        assert!(expansion(&g, &t, &s, &BTreeSet::from([PieceId(9)])).is_err());
    }

    #[test]
    fn grading_json_round_trip() {
        let g = g2();
        let mut pieces = canonical_grading(&g).unwrap().pieces().to_vec();
        pieces.pop();
        pieces.push(Piece::degenerate(PieceId(5), VertexId(5)));
        let t = TreeGrading::new(pieces);
        let json = serde_json::to_string(&t.to_doc()).unwrap();
        assert_eq!(
            json,
            r#"{"pieces":[{"id":1,"edges":[1,2,3]},{"id":5,"edges":[],"vertex":5}]}"#
        );
        let doc: GradingDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(TreeGrading::from_doc(&g, &doc).unwrap(), t);
        let bad: GradingDoc = serde_json::from_str(r#"{"pieces":[{"id":1,"edges":[99]}]}"#).unwrap();
        assert!(TreeGrading::from_doc(&g, &bad).is_err());
    }
}
