//! Metric quotients collapsing pieces, bonding maps between them, and the
//! canonical retraction onto a subspace.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::{
    collapse_pieces, validate_grading, Piece, PieceId, PieceNaming, Subgraph, TreeGrading,
};
use crate::graph::{DistanceTable, EdgeId, EdgeLoop, EdgePath, UnionFind, VertexId, WeightedGraph};
use crate::rational::Rational;

/// `X_Q` together with the collapse map `Γ_Q : X → X_Q`.
///
/// Every piece outside `kept` is contracted to the vertex `y_P` named by
/// `naming`; everything else keeps its id. The target carries the grading
/// made of the kept pieces plus one degenerate piece `{y_P}` per collapsed
/// piece, each under the original piece id.
#[derive(Clone, Debug)]
pub struct MetricQuotient {
    pub source: WeightedGraph,
    pub source_grading: TreeGrading,
    pub kept: BTreeSet<PieceId>,
    pub target: WeightedGraph,
    pub target_grading: TreeGrading,
    pub gamma: BTreeMap<VertexId, VertexId>,
    pub registry: BTreeMap<PieceId, VertexId>,
    pub naming: PieceNaming,
}

impl MetricQuotient {
    pub fn apply(&self, v: VertexId) -> Result<VertexId> {
        self.gamma
            .get(&v)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown vertex {v}")))
    }

    /// Image of a path: traversals of collapsed edges disappear, the rest keep their ids.
    pub fn map_path(&self, p: &EdgePath) -> Result<EdgePath> {
        p.vertices(&self.source)?;
        let steps = p
            .steps
            .iter()
            .copied()
            .filter(|t| self.target.edge(t.edge).is_some())
            .collect();
        let image = EdgePath::new(self.gamma[&p.start], steps);
        image
            .vertices(&self.target)
            .map_err(|e| Error::invariant(format!("collapse image is not a path: {e}")))?;
        Ok(image)
    }

    pub fn map_loop(&self, l: &EdgeLoop) -> Result<EdgeLoop> {
        EdgeLoop::new(&self.target, self.map_path(l.path())?)
    }

    /// Checks `d_Q(Γu, Γv) <= d(u, v)` for every pair.
    pub fn is_non_expansive(&self) -> Result<bool> {
        let ds = self.source.distance_table()?;
        let dt = self.target.distance_table()?;
        for u in self.source.vertices() {
            for v in self.source.vertices() {
                if dt.get(self.gamma[&u], self.gamma[&v])? > ds.get(u, v)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[derive(Serialize)]
struct QuotientDoc<'a> {
    graph: &'a WeightedGraph,
    grading: crate::grading::GradingDoc,
    gamma: &'a BTreeMap<VertexId, VertexId>,
    collapsed: &'a BTreeMap<PieceId, VertexId>,
}

impl MetricQuotient {
    /// `{graph, grading, gamma: {vertex: vertex}, collapsed: {piece: vertex}}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(QuotientDoc {
            graph: &self.target,
            grading: self.target_grading.to_doc(),
            gamma: &self.gamma,
            collapsed: &self.registry,
        })
        .expect("quotient serializes")
    }
}

pub fn metric_quotient(
    g: &WeightedGraph,
    t: &TreeGrading,
    kept: &BTreeSet<PieceId>,
) -> Result<MetricQuotient> {
    metric_quotient_named(g, t, kept, PieceNaming::for_graph(g))
}

pub(crate) fn metric_quotient_named(
    g: &WeightedGraph,
    t: &TreeGrading,
    kept: &BTreeSet<PieceId>,
    naming: PieceNaming,
) -> Result<MetricQuotient> {
    validate_grading(g, t)?;
    for &id in kept {
        t.require_piece(id)?;
    }
    let collapsed: Vec<&Piece> = t.pieces().iter().filter(|p| !kept.contains(&p.id)).collect();
    let (target, gamma) = collapse_pieces(g, collapsed.iter().copied(), naming)?;
    let mut registry = BTreeMap::new();
    let mut pieces = Vec::new();
    for p in t.pieces() {
        if kept.contains(&p.id) {
            pieces.push(p.clone());
        } else {
            let y = naming.name(p.id)?;
            registry.insert(p.id, y);
            pieces.push(Piece::degenerate(p.id, y));
        }
    }
    let target_grading = TreeGrading::new(pieces);
    validate_grading(&target, &target_grading)
        .map_err(|v| Error::invariant(format!("quotient grading invalid: {v}")))?;
    Ok(MetricQuotient {
        source: g.clone(),
        source_grading: t.clone(),
        kept: kept.clone(),
        target,
        target_grading,
        gamma,
        registry,
        naming,
    })
}

/// The induced map `Γ_{Q,R} : X_Q → X_R` for `R ⊆ Q`, as a quotient of `X_Q`.
pub fn bonding_map(mq: &MetricQuotient, r: &BTreeSet<PieceId>) -> Result<MetricQuotient> {
    if let Some(extra) = r.iter().find(|id| !mq.kept.contains(id)) {
        return Err(Error::input(format!(
            "{extra} is not among the kept pieces of the source quotient"
        )));
    }
    metric_quotient_named(&mq.target, &mq.target_grading, r, mq.naming)
}

/// The partition of the vertex set identifying each collapsed piece.
pub fn identification(g: &WeightedGraph, t: &TreeGrading, kept: &BTreeSet<PieceId>) -> Vec<BTreeSet<VertexId>> {
    let mut classes: Vec<BTreeSet<VertexId>> = Vec::new();
    let mut covered = BTreeSet::new();
    for p in t.pieces() {
        if !kept.contains(&p.id) {
            covered.extend(p.vertices.iter().copied());
            classes.push(p.vertices.clone());
        }
    }
    for v in g.vertices() {
        if !covered.contains(&v) {
            classes.push(BTreeSet::from([v]));
        }
    }
    classes.sort();
    classes
}

/// The chain quotient pseudometric: the least total `Σ d(a_i, b_i)` over
/// chains `a_1, b_1, ..., a_n, b_n` with `b_i` and `a_{i+1}` identified,
/// `a_1` in the class of `a` and `b_n` in the class of `b`.
///
/// Computed by relaxing over chains of at most `|V|` links, with each link
/// taking the cheapest pair of representatives of its two classes. This
/// route never contracts the graph and serves as an independent check on
/// [`metric_quotient`].
pub struct ChainOracle {
    class_of: BTreeMap<VertexId, usize>,
    /// best[i][j]: least chain sum from class i to class j
    best: Vec<Vec<Rational>>,
}

impl ChainOracle {
    pub fn new(g: &WeightedGraph, partition: &[BTreeSet<VertexId>]) -> Result<Self> {
        let mut class_of = BTreeMap::new();
        for (i, class) in partition.iter().enumerate() {
            for &v in class {
                g.require_vertex(v)?;
                if class_of.insert(v, i).is_some() {
                    return Err(Error::input(format!("vertex {v} is in two classes")));
                }
            }
        }
        if class_of.len() != g.vertex_count() {
            return Err(Error::input("partition does not cover every vertex"));
        }
        let d = DistanceTable::new(g)?;
        let k = partition.len();
        // One link: cheapest representative pair.
        let mut link = vec![vec![None::<Rational>; k]; k];
        for (i, ci) in partition.iter().enumerate() {
            for (j, cj) in partition.iter().enumerate() {
                let mut m: Option<Rational> = None;
                for &a in ci {
                    for &b in cj {
                        let dab = d.get(a, b)?;
                        m = Some(m.map_or(dab, |x| x.min(dab)));
                    }
                }
                link[i][j] = m;
            }
        }
        let mut best = Vec::with_capacity(k);
        for start in 0..k {
            // chains of length 0: only the start class, at cost 0
            let mut cur: Vec<Option<Rational>> = vec![None; k];
            cur[start] = Some(Rational::ZERO);
            for _ in 0..g.vertex_count() {
                let mut next = cur.clone();
                for i in 0..k {
                    let Some(ci) = cur[i] else { continue };
                    for j in 0..k {
                        let cand = ci + link[i][j].expect("connected graph");
                        if next[j].is_none_or(|x| cand < x) {
                            next[j] = Some(cand);
                        }
                    }
                }
                if next == cur {
                    break;
                }
                cur = next;
            }
            best.push(cur.into_iter().map(|x| x.expect("connected graph")).collect());
        }
        Ok(ChainOracle { class_of, best })
    }

    pub fn rho(&self, a: VertexId, b: VertexId) -> Result<Rational> {
        let i = self
            .class_of
            .get(&a)
            .ok_or_else(|| Error::input(format!("unknown vertex {a}")))?;
        let j = self
            .class_of
            .get(&b)
            .ok_or_else(|| Error::input(format!("unknown vertex {b}")))?;
        Ok(self.best[*i][*j])
    }
}

pub fn chain_pseudometric_oracle(
    g: &WeightedGraph,
    partition: &[BTreeSet<VertexId>],
    a: VertexId,
    b: VertexId,
) -> Result<Rational> {
    ChainOracle::new(g, partition)?.rho(a, b)
}

/// The canonical retraction onto a subspace `Y`: identity on `Y`, and each
/// component of `X \ Y` goes to the unique vertex of `Y` it is attached to.
#[derive(Clone, Debug)]
pub struct Retraction {
    pub subgraph: Subgraph,
    pub map: BTreeMap<VertexId, VertexId>,
}

impl Retraction {
    pub fn apply(&self, v: VertexId) -> Result<VertexId> {
        self.map
            .get(&v)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown vertex {v}")))
    }
}

/// Requires `Y` connected and every piece to meet `Y` in one point or entirely.
pub fn retraction(g: &WeightedGraph, t: &TreeGrading, y: &Subgraph) -> Result<Retraction> {
    y.realize(g)?;
    for p in t.pieces() {
        let hit: BTreeSet<VertexId> = p.vertices.intersection(&y.vertices).copied().collect();
        let touches_edges = p.edges.iter().any(|e| y.edges.contains(e));
        let whole = p.vertices.is_subset(&y.vertices) && p.edges.is_subset(&y.edges);
        if (hit.len() > 1 || touches_edges) && !whole {
            return Err(Error::precondition(
                "a piece meets the subspace in more than a point but not entirely",
                format!("{} meets Y in {:?}", p.id, hit),
            ));
        }
    }
    let outside: BTreeSet<VertexId> = g.vertices().filter(|v| !y.vertices.contains(v)).collect();
    let mut uf = UnionFind::new(outside.iter().copied());
    let outside_edges: Vec<EdgeId> = g.edge_ids().filter(|e| !y.edges.contains(e)).collect();
    for &e in &outside_edges {
        let edge = g.edge(e).unwrap();
        if outside.contains(&edge.u) && outside.contains(&edge.v) {
            uf.union(edge.u, edge.v);
        }
    }
    // Component key: an outside root vertex, or the edge itself for an open
    // arc with both ends in Y.
    #[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy, Debug)]
    enum Component {
        Vertex(VertexId),
        Arc(EdgeId),
    }
    let mut attachments: BTreeMap<Component, BTreeSet<VertexId>> = BTreeMap::new();
    for &v in &outside {
        attachments.entry(Component::Vertex(uf.find(v))).or_default();
    }
    for &e in &outside_edges {
        let edge = g.edge(e).unwrap();
        let key = if outside.contains(&edge.u) {
            Component::Vertex(uf.find(edge.u))
        } else if outside.contains(&edge.v) {
            Component::Vertex(uf.find(edge.v))
        } else {
            Component::Arc(e)
        };
        let entry = attachments.entry(key).or_default();
        for x in [edge.u, edge.v] {
            if y.vertices.contains(&x) {
                entry.insert(x);
            }
        }
    }
    let mut target_of: BTreeMap<Component, VertexId> = BTreeMap::new();
    for (comp, att) in &attachments {
        if att.len() != 1 {
            return Err(Error::precondition(
                "a component of the complement does not attach at exactly one vertex",
                format!("{comp:?} attaches at {att:?}"),
            ));
        }
        target_of.insert(*comp, *att.iter().next().unwrap());
    }
    let mut map = BTreeMap::new();
    for v in g.vertices() {
        let image = if y.vertices.contains(&v) {
            v
        } else {
            target_of[&Component::Vertex(uf.find(v))]
        };
        map.insert(v, image);
    }
    Ok(Retraction {
        subgraph: y.clone(),
        map,
    })
}
