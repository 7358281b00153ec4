//! Maps between graded graphs: grade preservation, induced tree maps,
//! `π1`-injectivity checks, and collapsing the wire of a string-light space.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::folding::free_hom_injective;
use crate::grading::{
    canonical_grading, parameterize, validate_grading, Parameterization, PieceId, Subgraph,
    TreeGrading,
};
use crate::graph::{Edge, EdgeId, EdgeLoop, EdgePath, Traversal, VertexId, WeightedGraph};
use crate::homotopy::{is_essential_with, loop_of_word, loop_word, Letter, SpanningStructure};
use crate::quotient::{retraction, MetricQuotient};

/// A map of graded graphs, given on vertices and on edges (each edge goes to
/// a path between the images of its endpoints).
#[derive(Clone, Debug)]
pub struct GradedMap {
    pub source: WeightedGraph,
    pub source_grading: TreeGrading,
    pub target: WeightedGraph,
    pub target_grading: TreeGrading,
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, EdgePath>,
}

/// JSON form of the vertex and edge data of a [`GradedMap`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, Vec<i64>>,
}

impl GradedMap {
    pub fn new(
        source: WeightedGraph,
        source_grading: TreeGrading,
        target: WeightedGraph,
        target_grading: TreeGrading,
        vertex_map: BTreeMap<VertexId, VertexId>,
        edge_map: BTreeMap<EdgeId, EdgePath>,
    ) -> Result<Self> {
        validate_grading(&source, &source_grading)?;
        validate_grading(&target, &target_grading)?;
        for v in source.vertices() {
            let image = vertex_map
                .get(&v)
                .ok_or_else(|| Error::input(format!("vertex {v} has no image")))?;
            target.require_vertex(*image)?;
        }
        if let Some(extra) = vertex_map.keys().find(|v| !source.has_vertex(**v)) {
            return Err(Error::input(format!("vertex map mentions unknown vertex {extra}")));
        }
        for e in source.edges() {
            let p = edge_map
                .get(&e.id)
                .ok_or_else(|| Error::input(format!("edge {} has no image", e.id)))?;
            let vs = p.vertices(&target)?;
            if p.start != vertex_map[&e.u] || *vs.last().unwrap() != vertex_map[&e.v] {
                return Err(Error::input(format!(
                    "image of edge {} does not join the images of its endpoints",
                    e.id
                )));
            }
        }
        if let Some(extra) = edge_map.keys().find(|e| source.edge(**e).is_none()) {
            return Err(Error::input(format!("edge map mentions unknown edge {extra}")));
        }
        Ok(GradedMap {
            source,
            source_grading,
            target,
            target_grading,
            vertex_map,
            edge_map,
        })
    }

    pub fn from_doc(
        source: WeightedGraph,
        source_grading: TreeGrading,
        target: WeightedGraph,
        target_grading: TreeGrading,
        doc: &MapDoc,
    ) -> Result<Self> {
        let mut edge_map = BTreeMap::new();
        for e in source.edges() {
            let signed = doc
                .edge_map
                .get(&e.id)
                .ok_or_else(|| Error::input(format!("edge {} has no image", e.id)))?;
            let start = *doc
                .vertex_map
                .get(&e.u)
                .ok_or_else(|| Error::input(format!("vertex {} has no image", e.u)))?;
            let steps = signed
                .iter()
                .map(|&x| Traversal::from_signed(x))
                .collect::<Result<Vec<_>>>()?;
            edge_map.insert(e.id, EdgePath::new(start, steps));
        }
        GradedMap::new(
            source,
            source_grading,
            target,
            target_grading,
            doc.vertex_map.clone(),
            edge_map,
        )
    }

    pub fn to_doc(&self) -> MapDoc {
        MapDoc {
            vertex_map: self.vertex_map.clone(),
            edge_map: self
                .edge_map
                .iter()
                .map(|(&e, p)| (e, p.to_signed()))
                .collect(),
        }
    }

    pub fn identity(g: &WeightedGraph, t: &TreeGrading) -> Result<Self> {
        GradedMap::new(
            g.clone(),
            t.clone(),
            g.clone(),
            t.clone(),
            g.vertices().map(|v| (v, v)).collect(),
            g.edges()
                .map(|e| (e.id, EdgePath::new(e.u, vec![Traversal::forward(e.id)])))
                .collect(),
        )
    }

    /// The collapse map of a metric quotient.
    pub fn from_quotient(mq: &MetricQuotient) -> Result<Self> {
        let edge_map = mq
            .source
            .edges()
            .map(|e| {
                let start = mq.gamma[&e.u];
                let steps = if mq.target.edge(e.id).is_some() {
                    vec![Traversal::forward(e.id)]
                } else {
                    vec![]
                };
                (e.id, EdgePath::new(start, steps))
            })
            .collect();
        GradedMap::new(
            mq.source.clone(),
            mq.source_grading.clone(),
            mq.target.clone(),
            mq.target_grading.clone(),
            mq.gamma.clone(),
            edge_map,
        )
    }

    pub fn apply_vertex(&self, v: VertexId) -> Result<VertexId> {
        self.vertex_map
            .get(&v)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown vertex {v}")))
    }

    pub fn apply_path(&self, p: &EdgePath) -> Result<EdgePath> {
        p.vertices(&self.source)?;
        let mut steps = Vec::new();
        for t in &p.steps {
            let image = &self.edge_map[&t.edge];
            if t.forward {
                steps.extend_from_slice(&image.steps);
            } else {
                steps.extend(image.steps.iter().rev().map(|s| s.reversed()));
            }
        }
        Ok(EdgePath::new(self.vertex_map[&p.start], steps))
    }

    pub fn apply_loop(&self, l: &EdgeLoop) -> Result<EdgeLoop> {
        EdgeLoop::new(&self.target, self.apply_path(l.path())?)
    }
}

/// Where each source piece lands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradeReport {
    pub assignment: BTreeMap<PieceId, PieceId>,
    /// No two source pieces land in the same target piece.
    pub injective: bool,
}

/// Checks that every piece maps (vertices and edge images) into one target piece.
pub fn check_grade_preserving(f: &GradedMap) -> Result<GradeReport> {
    let mut assignment = BTreeMap::new();
    for p in f.source_grading.pieces() {
        let image_of = |v: VertexId| f.target_grading.piece_of_vertex(f.vertex_map[&v]);
        let q = image_of(p.min_vertex()).ok_or_else(|| {
            Error::precondition(
                "a piece is not mapped into the piece portion",
                format!("{} sends {} outside every piece", p.id, p.min_vertex()),
            )
        })?;
        for &v in &p.vertices {
            if image_of(v) != Some(q) {
                return Err(Error::precondition(
                    "a piece is not mapped into a single piece",
                    format!("{} sends {} and {} to different places", p.id, p.min_vertex(), v),
                ));
            }
        }
        for e in &p.edges {
            for t in &f.edge_map[e].steps {
                if f.target_grading.piece_of_edge(t.edge) != Some(q) {
                    return Err(Error::precondition(
                        "a piece edge leaves the target piece",
                        format!("{} edge {} crosses target edge {}", p.id, e, t.edge),
                    ));
                }
            }
        }
        assignment.insert(p.id, q);
    }
    let distinct: BTreeSet<_> = assignment.values().collect();
    Ok(GradeReport {
        injective: distinct.len() == assignment.len(),
        assignment,
    })
}

/// The map of parameterizing trees commuting with the collapse maps.
#[derive(Clone, Debug)]
pub struct InducedTreeMap {
    pub source: Parameterization,
    pub target: Parameterization,
    pub map: BTreeMap<VertexId, VertexId>,
}

pub fn induced_tree_map(f: &GradedMap) -> Result<InducedTreeMap> {
    check_grade_preserving(f)?;
    let source = parameterize(&f.source, &f.source_grading)?;
    let target = parameterize(&f.target, &f.target_grading)?;
    let mut map: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for v in f.source.vertices() {
        let image = target.q[&f.vertex_map[&v]];
        let here = source.q[&v];
        if let Some(&prev) = map.get(&here) {
            if prev != image {
                return Err(Error::invariant(format!(
                    "tree map is not well defined at {here}"
                )));
            }
        }
        map.insert(here, image);
    }
    let marked = target.marked();
    for y in source.marked() {
        if !marked.contains(&map[&y]) {
            return Err(Error::invariant(format!("piece point {y} maps off the piece points")));
        }
    }
    Ok(InducedTreeMap {
        source,
        target,
        map,
    })
}

/// Result of one piece restriction's injectivity test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PieceCheck {
    pub piece: PieceId,
    pub target_piece: PieceId,
    pub rank: usize,
    pub injective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InjectivityReport {
    pub assignment: BTreeMap<PieceId, PieceId>,
    pub pieces: Vec<PieceCheck>,
    /// Every piece restriction is `π1`-injective.
    pub pieces_injective: bool,
    /// Essential sampled loops tested against their images.
    pub loops_checked: usize,
    /// Essential loops whose image is inessential, as signed edge lists.
    pub counterexamples: Vec<Vec<i64>>,
}

impl InjectivityReport {
    pub fn consistent(&self) -> bool {
        !self.pieces_injective || self.counterexamples.is_empty()
    }
}

/// Decides `π1`-injectivity of each piece restriction exactly, by folding
/// the images of the piece's generators. The generator loops are based at
/// the piece's smallest vertex.
pub fn piece_restriction_checks(f: &GradedMap, report: &GradeReport) -> Result<Vec<PieceCheck>> {
    let ss_source = SpanningStructure::new(&f.source, &f.source_grading)?;
    let ss_target = SpanningStructure::new(&f.target, &f.target_grading)?;
    let mut out = Vec::new();
    for p in f.source_grading.non_degenerate() {
        let base = p.min_vertex();
        let gens: Vec<Letter> = ss_source
            .generators_of(p.id)
            .map(|g| Letter {
                edge: g.edge,
                inverse: false,
            })
            .collect();
        let mut images = Vec::with_capacity(gens.len());
        for l in &gens {
            let lp = loop_of_word(&f.source, &ss_source, base, std::slice::from_ref(l))?;
            let image = f.apply_loop(&lp)?;
            let w = loop_word(&f.target, &ss_target, &image, image.base())?;
            images.push(w.letters().map(|(_, l)| l.to_signed()).collect::<Vec<_>>());
        }
        out.push(PieceCheck {
            piece: p.id,
            target_piece: report.assignment[&p.id],
            rank: gens.len(),
            injective: free_hom_injective(gens.len(), &images)?,
        });
    }
    Ok(out)
}

/// Checks the hypotheses of the piecewise injectivity criterion (pieces go
/// into pieces, no two into the same one), decides each piece restriction
/// exactly, and, when all of them are injective, confirms on `samples` that
/// essential loops stay essential.
pub fn check_pi1_injectivity(f: &GradedMap, samples: &[EdgeLoop]) -> Result<InjectivityReport> {
    let grade = check_grade_preserving(f)?;
    if !grade.injective {
        let mut seen: BTreeMap<PieceId, PieceId> = BTreeMap::new();
        for (&p, &q) in &grade.assignment {
            if let Some(other) = seen.insert(q, p) {
                return Err(Error::precondition(
                    "no two pieces of the source may map into the same target piece",
                    format!("{other} and {p} both map into {q}"),
                ));
            }
        }
    }
    let pieces = piece_restriction_checks(f, &grade)?;
    let pieces_injective = pieces.iter().all(|c| c.injective);
    let mut loops_checked = 0;
    let mut counterexamples = Vec::new();
    if pieces_injective {
        let ss_source = SpanningStructure::new(&f.source, &f.source_grading)?;
        let ss_target = SpanningStructure::new(&f.target, &f.target_grading)?;
        for l in samples {
            let before = is_essential_with(&f.source, &f.source_grading, &ss_source, l, l.base())?;
            if !before.essential {
                continue;
            }
            loops_checked += 1;
            let image = f.apply_loop(l)?;
            let after =
                is_essential_with(&f.target, &f.target_grading, &ss_target, &image, image.base())?;
            if !after.essential {
                counterexamples.push(l.path().to_signed());
            }
        }
    }
    Ok(InjectivityReport {
        assignment: grade.assignment,
        pieces,
        pieces_injective,
        loops_checked,
        counterexamples,
    })
}

/// The wedge obtained by collapsing the wire of a string-light space, with
/// the collapse map and the retraction checks.
#[derive(Clone, Debug)]
pub struct WireCollapse {
    pub map: GradedMap,
    pub wedge_point: VertexId,
    pub attachments: BTreeMap<PieceId, VertexId>,
    pub wire_vertices: BTreeSet<VertexId>,
    pub wire_edges: BTreeSet<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WireReport {
    pub attachments: BTreeMap<PieceId, VertexId>,
    pub wedge_point: VertexId,
    /// Each canonical retraction is constant on the wire and factors through the collapse.
    pub retractions_factor: bool,
    pub loops_checked: usize,
    pub counterexamples: Vec<Vec<i64>>,
}

/// Attachment vertex of each non-degenerate piece: the single vertex where
/// it meets the closure of its complement.
pub fn attachment_points(g: &WeightedGraph, t: &TreeGrading) -> Result<BTreeMap<PieceId, VertexId>> {
    let mut out = BTreeMap::new();
    for p in t.non_degenerate() {
        let touching: BTreeSet<VertexId> = g
            .edges()
            .filter(|e| !p.edges.contains(&e.id))
            .flat_map(|e| [e.u, e.v])
            .filter(|v| p.vertices.contains(v))
            .collect();
        if touching.len() != 1 {
            return Err(Error::precondition(
                "not string-light: a piece must meet the rest of the space in exactly one point",
                format!("{} meets it at {:?}", p.id, touching),
            ));
        }
        out.insert(p.id, *touching.iter().next().unwrap());
    }
    Ok(out)
}

pub fn string_light_collapse(g: &WeightedGraph, t: &TreeGrading) -> Result<WireCollapse> {
    validate_grading(g, t)?;
    let attachments = attachment_points(g, t)?;
    let w0 = VertexId(
        g.max_vertex_id()
            .map_or(1, |v| v.0 + 1),
    );
    let mut vertex_map = BTreeMap::new();
    let mut wire_vertices = BTreeSet::new();
    for v in g.vertices() {
        let owner = t.piece_of_vertex(v).and_then(|p| t.piece(p));
        match owner {
            Some(p) if !p.is_degenerate() && attachments[&p.id] != v => {
                vertex_map.insert(v, v);
            }
            _ => {
                vertex_map.insert(v, w0);
                wire_vertices.insert(v);
            }
        }
    }
    let mut wedge_edges = Vec::new();
    let mut edge_map = BTreeMap::new();
    let mut wire_edges = BTreeSet::new();
    for e in g.edges() {
        let (u, v) = (vertex_map[&e.u], vertex_map[&e.v]);
        if t.piece_of_edge(e.id).is_some() {
            wedge_edges.push(Edge {
                id: e.id,
                u,
                v,
                len: e.len,
            });
            edge_map.insert(e.id, EdgePath::new(u, vec![Traversal::forward(e.id)]));
        } else {
            wire_edges.insert(e.id);
            edge_map.insert(e.id, EdgePath::constant(w0));
        }
    }
    let wedge_vertices: BTreeSet<VertexId> = vertex_map.values().copied().collect();
    let wedge = WeightedGraph::new(wedge_vertices, wedge_edges)?;
    let wedge_grading = canonical_grading(&wedge)?;
    let map = GradedMap::new(
        g.clone(),
        t.clone(),
        wedge,
        wedge_grading,
        vertex_map,
        edge_map,
    )?;
    Ok(WireCollapse {
        map,
        wedge_point: w0,
        attachments,
        wire_vertices,
        wire_edges,
    })
}

impl WireCollapse {
    /// For each non-degenerate piece `P`, builds `R_P` on the wedge (identity
    /// on the copy of `P`, everything else to the attachment point) and checks
    /// `R_P ∘ f = r_P` on vertices, where `r_P` is the canonical retraction.
    pub fn retractions_factor(&self) -> Result<bool> {
        let f = &self.map;
        for p in f.source_grading.non_degenerate() {
            let r = retraction(&f.source, &f.source_grading, &Subgraph::of_piece(p))?;
            let x = self.attachments[&p.id];
            if self.wire_vertices.iter().any(|v| r.map[v] != x) {
                return Ok(false);
            }
            let big_r = |y: VertexId| if y != self.wedge_point && p.vertices.contains(&y) { y } else { x };
            if f.source.vertices().any(|v| big_r(f.vertex_map[&v]) != r.map[&v]) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn check(&self, samples: &[EdgeLoop]) -> Result<WireReport> {
        let f = &self.map;
        let ss_source = SpanningStructure::new(&f.source, &f.source_grading)?;
        let ss_target = SpanningStructure::new(&f.target, &f.target_grading)?;
        let mut loops_checked = 0;
        let mut counterexamples = Vec::new();
        for l in samples {
            if loop_word(&f.source, &ss_source, l, l.base())?.is_identity() {
                continue;
            }
            loops_checked += 1;
            let image = f.apply_loop(l)?;
            if loop_word(&f.target, &ss_target, &image, image.base())?.is_identity() {
                counterexamples.push(l.path().to_signed());
            }
        }
        Ok(WireReport {
            attachments: self.attachments.clone(),
            wedge_point: self.wedge_point,
            retractions_factor: self.retractions_factor()?,
            loops_checked,
            counterexamples,
        })
    }
}
