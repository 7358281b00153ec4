//! Finite weighted multigraphs with exact edge lengths.
//!
//! The metric space modelled here is the vertex set with the length
//! (shortest-path) metric. Edges carry positive rational lengths; parallel
//! edges and self-loops are allowed. Iteration is always in ascending id order.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub len: Rational,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// The endpoint opposite `x`; for a self-loop this is `x` itself.
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// One directed crossing of an edge. `forward` means from `u` to `v`.
///
/// In JSON and on the command line a traversal is a signed integer: `e` for
/// forward, `-e` for backward. Edge ids are therefore required to be positive.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Traversal {
    pub edge: EdgeId,
    pub forward: bool,
}

impl Traversal {
    pub fn forward(edge: EdgeId) -> Self {
        Traversal {
            edge,
            forward: true,
        }
    }

    pub fn backward(edge: EdgeId) -> Self {
        Traversal {
            edge,
            forward: false,
        }
    }

    pub fn reversed(self) -> Self {
        Traversal {
            edge: self.edge,
            forward: !self.forward,
        }
    }

    pub fn to_signed(self) -> i64 {
        if self.forward {
            self.edge.0 as i64
        } else {
            -(self.edge.0 as i64)
        }
    }

    pub fn from_signed(x: i64) -> Result<Self> {
        let id = u32::try_from(x.unsigned_abs())
            .ok()
            .filter(|&id| id != 0)
            .ok_or_else(|| Error::input(format!("invalid directed edge {x}")))?;
        Ok(Traversal {
            edge: EdgeId(id),
            forward: x > 0,
        })
    }
}

impl fmt::Debug for Traversal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_signed())
    }
}

impl Serialize for Traversal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i64(self.to_signed())
    }
}

impl<'de> Deserialize<'de> for Traversal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = i64::deserialize(d)?;
        Traversal::from_signed(x).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, Edge>,
    // Outgoing traversals per vertex, ascending by edge id. A self-loop
    // contributes both orientations.
    adjacency: BTreeMap<VertexId, Vec<Traversal>>,
}

impl WeightedGraph {
    /// Builds a graph, checking ids, endpoints, and lengths. Connectivity is
    /// not required here; see [`WeightedGraph::ensure_connected`].
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut vs = BTreeSet::new();
        for v in vertices {
            if !vs.insert(v) {
                return Err(Error::input(format!("duplicate vertex {v}")));
            }
        }
        let mut es = BTreeMap::new();
        for e in edges {
            if e.id.0 == 0 {
                return Err(Error::input("edge ids must be positive"));
            }
            if !vs.contains(&e.u) || !vs.contains(&e.v) {
                return Err(Error::input(format!(
                    "edge {} has an undeclared endpoint",
                    e.id
                )));
            }
            if !e.len.is_positive() {
                return Err(Error::input(format!("edge {} has non-positive length", e.id)));
            }
            if es.insert(e.id, e).is_some() {
                return Err(Error::input(format!("duplicate edge id {}", e.id)));
            }
        }
        let mut adjacency: BTreeMap<VertexId, Vec<Traversal>> =
            vs.iter().map(|&v| (v, Vec::new())).collect();
        for e in es.values() {
            adjacency.get_mut(&e.u).unwrap().push(Traversal::forward(e.id));
            adjacency.get_mut(&e.v).unwrap().push(Traversal::backward(e.id));
        }
        Ok(WeightedGraph {
            vertices: vs,
            edges: es,
            adjacency,
        })
    }

    /// Builds a graph and rejects it unless connected.
    pub fn connected(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let g = Self::new(vertices, edges)?;
        g.ensure_connected()?;
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_set(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.values()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn max_vertex_id(&self) -> Option<VertexId> {
        self.vertices.iter().next_back().copied()
    }

    pub fn max_edge_id(&self) -> Option<EdgeId> {
        self.edges.keys().next_back().copied()
    }

    pub(crate) fn require_vertex(&self, v: VertexId) -> Result<()> {
        if self.has_vertex(v) {
            Ok(())
        } else {
            Err(Error::input(format!("unknown vertex {v}")))
        }
    }

    pub(crate) fn require_edge(&self, e: EdgeId) -> Result<&Edge> {
        self.edge(e)
            .ok_or_else(|| Error::input(format!("unknown edge {e}")))
    }

    /// Outgoing traversals at `v` in ascending edge order.
    pub fn incident(&self, v: VertexId) -> &[Traversal] {
        self.adjacency.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn tail(&self, t: Traversal) -> VertexId {
        let e = &self.edges[&t.edge];
        if t.forward {
            e.u
        } else {
            e.v
        }
    }

    pub fn head(&self, t: Traversal) -> VertexId {
        let e = &self.edges[&t.edge];
        if t.forward {
            e.v
        } else {
            e.u
        }
    }

    pub fn is_connected(&self) -> bool {
        match self.vertices.iter().next() {
            None => false,
            Some(&root) => self.reachable_from(root, |_| true).len() == self.vertices.len(),
        }
    }

    pub fn ensure_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::input("graph is empty or disconnected"))
        }
    }

    /// Vertices reachable from `root` using only edges accepted by `use_edge`.
    pub fn reachable_from(
        &self,
        root: VertexId,
        mut use_edge: impl FnMut(EdgeId) -> bool,
    ) -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::from([root]);
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for &t in self.incident(x) {
                if !use_edge(t.edge) {
                    continue;
                }
                let y = self.head(t);
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Connected components of the subgraph with the given vertices and the
    /// edges of `edges` whose endpoints both lie in `vertices`.
    pub fn components_of(
        &self,
        vertices: &BTreeSet<VertexId>,
        edges: &BTreeSet<EdgeId>,
    ) -> Vec<BTreeSet<VertexId>> {
        let mut remaining = vertices.clone();
        let mut out = Vec::new();
        while let Some(&root) = remaining.iter().next() {
            let mut comp = BTreeSet::from([root]);
            let mut stack = vec![root];
            while let Some(x) = stack.pop() {
                for &t in self.incident(x) {
                    if !edges.contains(&t.edge) {
                        continue;
                    }
                    let y = self.head(t);
                    if vertices.contains(&y) && comp.insert(y) {
                        stack.push(y);
                    }
                }
            }
            for v in &comp {
                remaining.remove(v);
            }
            out.push(comp);
        }
        out
    }

    /// The subgraph on `vertices` and `edges`. Every edge endpoint must be in `vertices`.
    pub fn subgraph(
        &self,
        vertices: &BTreeSet<VertexId>,
        edges: &BTreeSet<EdgeId>,
    ) -> Result<WeightedGraph> {
        for &v in vertices {
            self.require_vertex(v)?;
        }
        let mut es = Vec::with_capacity(edges.len());
        for &id in edges {
            es.push(*self.require_edge(id)?);
        }
        WeightedGraph::new(vertices.iter().copied(), es)
    }

    /// Single-source exact shortest-path lengths (Dijkstra).
    pub fn distances_from(&self, source: VertexId) -> Result<BTreeMap<VertexId, Rational>> {
        self.require_vertex(source)?;
        let mut dist: BTreeMap<VertexId, Rational> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((Rational::ZERO, source)));
        while let Some(Reverse((d, x))) = heap.pop() {
            if dist.contains_key(&x) {
                continue;
            }
            dist.insert(x, d);
            for &t in self.incident(x) {
                let y = self.head(t);
                if !dist.contains_key(&y) {
                    heap.push(Reverse((d + self.edges[&t.edge].len, y)));
                }
            }
        }
        Ok(dist)
    }

    /// Exact length-metric distance between two vertices.
    pub fn distance(&self, u: VertexId, v: VertexId) -> Result<Rational> {
        self.require_vertex(v)?;
        self.distances_from(u)?
            .get(&v)
            .copied()
            .ok_or_else(|| Error::input(format!("vertices {u} and {v} are not connected")))
    }

    pub fn distance_table(&self) -> Result<DistanceTable> {
        DistanceTable::new(self)
    }

    /// Edges whose removal disconnects their component (iterative lowlink).
    pub fn bridges(&self) -> BTreeSet<EdgeId> {
        let index: BTreeMap<VertexId, usize> =
            self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = self.vertices.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut timer = 0;
        let mut out = BTreeSet::new();
        for &root in &self.vertices {
            if disc[index[&root]] != usize::MAX {
                continue;
            }
            // (vertex, edge used to enter, next incident position)
            let mut stack: Vec<(VertexId, Option<EdgeId>, usize)> = vec![(root, None, 0)];
            disc[index[&root]] = timer;
            low[index[&root]] = timer;
            timer += 1;
            while let Some(frame) = stack.last_mut() {
                let (x, via, pos) = *frame;
                let inc = self.incident(x);
                if pos < inc.len() {
                    frame.2 += 1;
                    let t = inc[pos];
                    if Some(t.edge) == via {
                        continue;
                    }
                    let y = self.head(t);
                    let (xi, yi) = (index[&x], index[&y]);
                    if disc[yi] == usize::MAX {
                        disc[yi] = timer;
                        low[yi] = timer;
                        timer += 1;
                        stack.push((y, Some(t.edge), 0));
                    } else {
                        low[xi] = low[xi].min(disc[yi]);
                    }
                } else {
                    stack.pop();
                    if let (Some(&(parent, _, _)), Some(e)) = (stack.last(), via) {
                        let (pi, xi) = (index[&parent], index[&x]);
                        low[pi] = low[pi].min(low[xi]);
                        if low[xi] > disc[pi] {
                            out.insert(e);
                        }
                    }
                }
            }
        }
        out
    }

    /// |E| - |V| + 1, the rank of the free fundamental group.
    pub fn cycle_rank(&self) -> Result<usize> {
        self.ensure_connected()?;
        Ok(self.edges.len() + 1 - self.vertices.len())
    }

    /// Spanning forest chosen by ascending edge id (Kruskal on ids), restricted
    /// to the edges accepted by `allow`.
    pub fn spanning_forest(&self, mut allow: impl FnMut(&Edge) -> bool) -> BTreeSet<EdgeId> {
        let mut uf = UnionFind::new(self.vertices.iter().copied());
        self.edges
            .values()
            .filter(|e| allow(e) && uf.union(e.u, e.v))
            .map(|e| e.id)
            .collect()
    }

    /// All simple cycles as edge sets, found by enumerating the cycle space.
    /// Returns `None` when the cycle rank exceeds `max_rank`.
    pub fn simple_cycles(&self, max_rank: usize) -> Option<Vec<BTreeSet<EdgeId>>> {
        let forest = self.spanning_forest(|_| true);
        let chords: Vec<EdgeId> = self
            .edges
            .keys()
            .copied()
            .filter(|e| !forest.contains(e))
            .collect();
        if chords.len() > max_rank {
            return None;
        }
        let fundamental: Vec<BTreeSet<EdgeId>> = chords
            .iter()
            .map(|&c| {
                let e = &self.edges[&c];
                let mut cyc = self.forest_path(&forest, e.u, e.v);
                cyc.insert(c);
                cyc
            })
            .collect();
        let mut out = Vec::new();
        for mask in 1u64..(1u64 << chords.len()) {
            let mut set = BTreeSet::new();
            for (i, cyc) in fundamental.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    for &e in cyc {
                        if !set.remove(&e) {
                            set.insert(e);
                        }
                    }
                }
            }
            if self.is_simple_cycle(&set) {
                out.push(set);
            }
        }
        out.sort();
        Some(out)
    }

    /// Edge set of the unique path between `a` and `b` inside the forest.
    pub(crate) fn forest_path(
        &self,
        forest: &BTreeSet<EdgeId>,
        a: VertexId,
        b: VertexId,
    ) -> BTreeSet<EdgeId> {
        let steps = self.path_within(a, b, |e| forest.contains(&e)).unwrap_or_default();
        steps.into_iter().map(|t| t.edge).collect()
    }

    /// Breadth-first path from `a` to `b` using allowed edges, ascending edge order.
    pub(crate) fn path_within(
        &self,
        a: VertexId,
        b: VertexId,
        mut allow: impl FnMut(EdgeId) -> bool,
    ) -> Option<Vec<Traversal>> {
        let mut prev: BTreeMap<VertexId, Option<Traversal>> = BTreeMap::from([(a, None)]);
        let mut queue = std::collections::VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            if x == b {
                break;
            }
            for &t in self.incident(x) {
                if !allow(t.edge) {
                    continue;
                }
                let y = self.head(t);
                if let std::collections::btree_map::Entry::Vacant(slot) = prev.entry(y) {
                    slot.insert(Some(t));
                    queue.push_back(y);
                }
            }
        }
        if !prev.contains_key(&b) {
            return None;
        }
        let mut steps = Vec::new();
        let mut cur = b;
        while let Some(Some(t)) = prev.get(&cur) {
            steps.push(*t);
            cur = self.tail(*t);
        }
        steps.reverse();
        Some(steps)
    }

    /// Whether the edge set forms exactly one simple closed curve.
    pub fn is_simple_cycle(&self, edges: &BTreeSet<EdgeId>) -> bool {
        if edges.is_empty() {
            return false;
        }
        let mut degree: BTreeMap<VertexId, usize> = BTreeMap::new();
        for e in edges {
            let Some(edge) = self.edges.get(e) else {
                return false;
            };
            *degree.entry(edge.u).or_default() += 1;
            *degree.entry(edge.v).or_default() += 1;
        }
        if degree.values().any(|&d| d != 2) {
            return false;
        }
        let vs: BTreeSet<VertexId> = degree.keys().copied().collect();
        self.components_of(&vs, edges).len() == 1
    }

    /// Contracts each class of vertices (together with its internal edges) to
    /// a single named vertex. Returns the contracted graph and the vertex map.
    ///
    /// Every edge with both endpoints in one class must be listed among that
    /// class's internal edges; otherwise it would become a new self-loop and
    /// an invariant error is returned.
    pub fn contract(&self, classes: &[ContractionClass]) -> Result<(WeightedGraph, BTreeMap<VertexId, VertexId>)> {
        let mut map: BTreeMap<VertexId, VertexId> = self.vertices.iter().map(|&v| (v, v)).collect();
        let mut removed_edges = BTreeSet::new();
        let mut collapsed = BTreeSet::new();
        for class in classes {
            for &v in &class.vertices {
                self.require_vertex(v)?;
                map.insert(v, class.name);
                collapsed.insert(v);
            }
            removed_edges.extend(class.internal_edges.iter().copied());
        }
        let mut new_vertices = BTreeSet::new();
        for (&v, &image) in &map {
            if !collapsed.contains(&v) && classes.iter().any(|c| c.name == v) {
                return Err(Error::invariant(format!(
                    "contraction name {v} collides with a surviving vertex"
                )));
            }
            new_vertices.insert(image);
        }
        let mut new_edges = Vec::new();
        for e in self.edges.values() {
            if removed_edges.contains(&e.id) {
                continue;
            }
            let (u, v) = (map[&e.u], map[&e.v]);
            if u == v && !e.is_loop() {
                return Err(Error::invariant(format!(
                    "edge {} would become a self-loop under contraction",
                    e.id
                )));
            }
            new_edges.push(Edge {
                id: e.id,
                u,
                v,
                len: e.len,
            });
        }
        Ok((WeightedGraph::new(new_vertices, new_edges)?, map))
    }

    /// Graphviz rendering; `vertex_attr` and `edge_attr` may add attributes.
    pub fn to_dot_with(
        &self,
        name: &str,
        mut vertex_attr: impl FnMut(VertexId) -> Option<String>,
        mut edge_attr: impl FnMut(&Edge) -> Option<String>,
    ) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph {name} {{");
        for &v in &self.vertices {
            match vertex_attr(v) {
                Some(a) => {
                    let _ = writeln!(s, "  {v} [{a}];");
                }
                None => {
                    let _ = writeln!(s, "  {v};");
                }
            }
        }
        for e in self.edges.values() {
            let mut attrs = format!("label=\"e{}:{}\"", e.id, e.len);
            if let Some(extra) = edge_attr(e) {
                attrs.push_str(", ");
                attrs.push_str(&extra);
            }
            let _ = writeln!(s, "  {} -- {} [{attrs}];", e.u, e.v);
        }
        s.push_str("}\n");
        s
    }

    pub fn to_dot(&self) -> String {
        self.to_dot_with("G", |_| None, |_| None)
    }
}

/// A set of vertices to collapse to one vertex named `name`, removing `internal_edges`.
#[derive(Clone, Debug)]
pub struct ContractionClass {
    pub name: VertexId,
    pub vertices: BTreeSet<VertexId>,
    pub internal_edges: BTreeSet<EdgeId>,
}

/// All-pairs exact distances.
#[derive(Clone, Debug)]
pub struct DistanceTable {
    index: BTreeMap<VertexId, usize>,
    dist: Vec<Vec<Option<Rational>>>,
}

impl DistanceTable {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        let index: BTreeMap<VertexId, usize> =
            g.vertices().enumerate().map(|(i, v)| (v, i)).collect();
        let mut dist = vec![vec![None; index.len()]; index.len()];
        for (&v, &i) in &index {
            for (w, d) in g.distances_from(v)? {
                dist[i][index[&w]] = Some(d);
            }
        }
        Ok(DistanceTable { index, dist })
    }

    pub fn get(&self, u: VertexId, v: VertexId) -> Result<Rational> {
        let i = self
            .index
            .get(&u)
            .ok_or_else(|| Error::input(format!("unknown vertex {u}")))?;
        let j = self
            .index
            .get(&v)
            .ok_or_else(|| Error::input(format!("unknown vertex {v}")))?;
        self.dist[*i][*j]
            .ok_or_else(|| Error::input(format!("vertices {u} and {v} are not connected")))
    }

    /// Maximum pairwise distance over a vertex set; 0 for fewer than two vertices.
    pub fn diameter<'a>(&self, vertices: impl IntoIterator<Item = &'a VertexId>) -> Result<Rational> {
        let vs: Vec<VertexId> = vertices.into_iter().copied().collect();
        let mut best = Rational::ZERO;
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                best = best.max(self.get(a, b)?);
            }
        }
        Ok(best)
    }
}

/// A combinatorial path: a start vertex and a sequence of traversals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgePath {
    pub start: VertexId,
    pub steps: Vec<Traversal>,
}

impl EdgePath {
    pub fn constant(v: VertexId) -> Self {
        EdgePath {
            start: v,
            steps: Vec::new(),
        }
    }

    pub fn new(start: VertexId, steps: Vec<Traversal>) -> Self {
        EdgePath { start, steps }
    }

    /// Path with start vertex inferred from the first traversal; `fallback`
    /// is used for the empty sequence.
    pub fn from_steps(g: &WeightedGraph, steps: Vec<Traversal>, fallback: VertexId) -> Result<Self> {
        let start = match steps.first() {
            Some(&t) => {
                g.require_edge(t.edge)?;
                g.tail(t)
            }
            None => fallback,
        };
        let p = EdgePath { start, steps };
        p.vertices(g)?;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Visited vertex sequence (length `len() + 1`), validating every step.
    pub fn vertices(&self, g: &WeightedGraph) -> Result<Vec<VertexId>> {
        g.require_vertex(self.start)?;
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(self.start);
        let mut cur = self.start;
        for (i, &t) in self.steps.iter().enumerate() {
            g.require_edge(t.edge)?;
            if g.tail(t) != cur {
                return Err(Error::input(format!(
                    "path step {i} ({t:?}) does not start at vertex {cur}"
                )));
            }
            cur = g.head(t);
            out.push(cur);
        }
        Ok(out)
    }

    pub fn end(&self, g: &WeightedGraph) -> Result<VertexId> {
        Ok(*self.vertices(g)?.last().unwrap())
    }

    pub fn reversed(&self, g: &WeightedGraph) -> Result<EdgePath> {
        let end = self.end(g)?;
        Ok(EdgePath {
            start: end,
            steps: self.steps.iter().rev().map(|t| t.reversed()).collect(),
        })
    }

    /// `self` followed by `other`; `other` must start where `self` ends.
    pub fn concat(&self, g: &WeightedGraph, other: &EdgePath) -> Result<EdgePath> {
        if self.end(g)? != other.start {
            return Err(Error::input("concatenated paths do not meet"));
        }
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Ok(EdgePath {
            start: self.start,
            steps,
        })
    }

    pub fn to_signed(&self) -> Vec<i64> {
        self.steps.iter().map(|t| t.to_signed()).collect()
    }
}

/// A closed [`EdgePath`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeLoop(EdgePath);

impl EdgeLoop {
    pub fn new(g: &WeightedGraph, path: EdgePath) -> Result<Self> {
        if path.end(g)? != path.start {
            return Err(Error::input(format!(
                "path starting at {} is not closed",
                path.start
            )));
        }
        Ok(EdgeLoop(path))
    }

    pub fn constant(v: VertexId) -> Self {
        EdgeLoop(EdgePath::constant(v))
    }

    pub fn path(&self) -> &EdgePath {
        &self.0
    }

    pub fn base(&self) -> VertexId {
        self.0.start
    }

    pub fn steps(&self) -> &[Traversal] {
        &self.0.steps
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_path(self) -> EdgePath {
        self.0
    }
}

/// Diameter of the set of vertices a path visits.
pub fn path_diameter(g: &WeightedGraph, p: &EdgePath) -> Result<Rational> {
    let visited: BTreeSet<VertexId> = p.vertices(g)?.into_iter().collect();
    let mut best = Rational::ZERO;
    for &a in &visited {
        let d = g.distances_from(a)?;
        for b in &visited {
            let dab = d
                .get(b)
                .ok_or_else(|| Error::invariant("path visits disconnected vertices"))?;
            best = best.max(*dab);
        }
    }
    Ok(best)
}

pub(crate) struct UnionFind {
    parent: BTreeMap<VertexId, VertexId>,
}

impl UnionFind {
    pub(crate) fn new(vs: impl IntoIterator<Item = VertexId>) -> Self {
        UnionFind {
            parent: vs.into_iter().map(|v| (v, v)).collect(),
        }
    }

    pub(crate) fn find(&mut self, v: VertexId) -> VertexId {
        let mut root = v;
        while self.parent[&root] != root {
            root = self.parent[&root];
        }
        let mut cur = v;
        while cur != root {
            let next = self.parent[&cur];
            self.parent.insert(cur, root);
            cur = next;
        }
        root
    }

    /// Returns true when the two classes were distinct.
    pub(crate) fn union(&mut self, a: VertexId, b: VertexId) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent.insert(hi, lo);
        true
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    id: u32,
    u: u32,
    v: u32,
    len: Rational,
}

/// JSON shape: `{"vertices": [int], "edges": [{"id": int, "u": int, "v": int, "len": "p/q"}]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    vertices: Vec<u32>,
    edges: Vec<EdgeDoc>,
}

impl From<&WeightedGraph> for GraphDoc {
    fn from(g: &WeightedGraph) -> Self {
        GraphDoc {
            vertices: g.vertices().map(|v| v.0).collect(),
            edges: g
                .edges()
                .map(|e| EdgeDoc {
                    id: e.id.0,
                    u: e.u.0,
                    v: e.v.0,
                    len: e.len,
                })
                .collect(),
        }
    }
}

impl TryFrom<GraphDoc> for WeightedGraph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        WeightedGraph::new(
            doc.vertices.into_iter().map(VertexId),
            doc.edges.into_iter().map(|e| Edge {
                id: EdgeId(e.id),
                u: VertexId(e.u),
                v: VertexId(e.v),
                len: e.len,
            }),
        )
    }
}

impl Serialize for WeightedGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightedGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = GraphDoc::deserialize(d)?;
        WeightedGraph::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// Convenience constructor used by generators and tests: vertices and
/// `(id, u, v, len)` tuples.
pub fn build_graph(
    vertices: impl IntoIterator<Item = u32>,
    edges: impl IntoIterator<Item = (u32, u32, u32, Rational)>,
) -> Result<WeightedGraph> {
    WeightedGraph::new(
        vertices.into_iter().map(VertexId),
        edges.into_iter().map(|(id, u, v, len)| Edge {
            id: EdgeId(id),
            u: VertexId(u),
            v: VertexId(v),
            len,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn triangle_distances() {
        let g = unit(3, &[(1, 2), (2, 3), (3, 1)]);
        assert_eq!(g.distance(VertexId(1), VertexId(2)).unwrap(), Rational::ONE);
        assert_eq!(g.distance(VertexId(2), VertexId(2)).unwrap(), Rational::ZERO);
    }

    #[test]
    fn g2_distance_across_bridge() {
        assert_eq!(
            g2().distance(VertexId(1), VertexId(5)).unwrap(),
            Rational::from(3)
        );
    }

    #[test]
    fn unknown_vertex_is_input_error() {
        let g = g2();
        assert!(matches!(
            g.distance(VertexId(1), VertexId(99)),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(build_graph([1, 2], [(1, 1, 3, Rational::ONE)]).is_err());
        assert!(build_graph([1, 2], [(1, 1, 2, Rational::ZERO)]).is_err());
        assert!(build_graph([1, 2], [(0, 1, 2, Rational::ONE)]).is_err());
        assert!(build_graph([1, 2], [(1, 1, 2, Rational::ONE), (1, 2, 1, Rational::ONE)]).is_err());
        assert!(WeightedGraph::connected(
            [VertexId(1), VertexId(2)],
            std::iter::empty()
        )
        .is_err());
    }

    #[test]
    fn path_diameters() {
        let g = unit(3, &[(1, 2), (2, 3), (3, 1)]);
        let constant = EdgePath::constant(VertexId(1));
        assert_eq!(path_diameter(&g, &constant).unwrap(), Rational::ZERO);
        let one = EdgePath::new(VertexId(1), vec![Traversal::forward(EdgeId(1))]);
        assert_eq!(path_diameter(&g, &one).unwrap(), Rational::ONE);
        let full = EdgePath::new(
            VertexId(1),
            vec![
                Traversal::forward(EdgeId(1)),
                Traversal::forward(EdgeId(2)),
                Traversal::forward(EdgeId(3)),
            ],
        );
        assert_eq!(path_diameter(&g, &full).unwrap(), Rational::ONE);
        let broken = EdgePath::new(VertexId(1), vec![Traversal::forward(EdgeId(2))]);
        assert!(path_diameter(&g, &broken).is_err());
    }

    #[test]
    fn bridges_of_standard_graphs() {
        let tree = unit(4, &[(1, 2), (2, 3), (2, 4)]);
        assert_eq!(tree.bridges().len(), 3);
        let c4 = unit(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]);
        assert!(c4.bridges().is_empty());
        assert_eq!(g2().bridges(), BTreeSet::from([EdgeId(4)]));
    }

    #[test]
    fn loops_and_parallels_are_not_bridges() {
        let g = unit(2, &[(1, 2), (1, 2), (2, 2)]);
        assert!(g.bridges().is_empty());
        let g = unit(3, &[(1, 2), (2, 3), (3, 3)]);
        assert_eq!(g.bridges(), BTreeSet::from([EdgeId(1), EdgeId(2)]));
    }

    #[test]
    fn cycle_ranks() {
        assert_eq!(unit(3, &[(1, 2), (2, 3)]).cycle_rank().unwrap(), 0);
        assert_eq!(
            unit(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]).cycle_rank().unwrap(),
            1
        );
        assert_eq!(g2().cycle_rank().unwrap(), 2);
        assert!(unit(3, &[(1, 2)]).cycle_rank().is_err());
    }

    #[test]
    fn cycle_space_enumeration() {
        let cycles = g2().simple_cycles(10).unwrap();
        assert_eq!(cycles.len(), 2);
        let theta = unit(2, &[(1, 2), (1, 2), (1, 2)]);
        assert_eq!(theta.simple_cycles(10).unwrap().len(), 3);
        let k4 = unit(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        assert_eq!(k4.simple_cycles(10).unwrap().len(), 7);
        assert!(k4.simple_cycles(2).is_none());
    }

    #[test]
    fn contraction_maps_classes() {
        let g = g2();
        let class = ContractionClass {
            name: VertexId(100),
            vertices: [4, 5, 6].into_iter().map(VertexId).collect(),
            internal_edges: [5, 6, 7].into_iter().map(EdgeId).collect(),
        };
        let (h, map) = g.contract(&[class]).unwrap();
        assert_eq!(h.vertex_count(), 4);
        assert_eq!(h.edge_count(), 4);
        assert_eq!(map[&VertexId(5)], VertexId(100));
        assert_eq!(h.distance(VertexId(1), VertexId(100)).unwrap(), Rational::from(2));
    }

    #[test]
    fn contraction_rejects_new_self_loop() {
        let g = g2();
        let class = ContractionClass {
            name: VertexId(100),
            vertices: [4, 5, 6].into_iter().map(VertexId).collect(),
            internal_edges: [5, 6].into_iter().map(EdgeId).collect(),
        };
        assert!(matches!(g.contract(&[class]), Err(Error::Invariant(_))));
    }

    #[test]
    fn json_shape() {
        let g = unit(2, &[(1, 2)]);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(
            s,
            r#"{"vertices":[1,2],"edges":[{"id":1,"u":1,"v":2,"len":"1"}]}"#
        );
        let back: WeightedGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"vertices":[1],"edges":[{"id":1,"u":1,"v":2,"len":"1"}]}"#;
        assert!(serde_json::from_str::<WeightedGraph>(bad).is_err());
    }

    #[test]
    fn signed_traversals() {
        assert_eq!(Traversal::from_signed(-3).unwrap(), Traversal::backward(EdgeId(3)));
        assert!(Traversal::from_signed(0).is_err());
        let p = EdgePath::from_steps(&g2(), vec![Traversal::backward(EdgeId(3))], VertexId(1)).unwrap();
        assert_eq!(p.start, VertexId(1));
        assert_eq!(p.end(&g2()).unwrap(), VertexId(3));
    }
}
