//! Finite balls in the universal cover of a graph, path lifting, and the
//! lifted path-diameter distance.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DistanceTable, EdgePath, Traversal, VertexId, WeightedGraph};
use crate::homotopy::SpanningStructure;
use crate::rational::Rational;

/// A point of the universal cover: a base vertex and the reduced word of
/// generator crossings leading to it from the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CoverVertex {
    pub vertex: VertexId,
    pub word: Vec<i64>,
}

impl fmt::Display for CoverVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, [", self.vertex)?;
        for (i, x) in self.word.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "])")
    }
}

/// All cover vertices within `radius` edges of the root `(base, [])`.
#[derive(Clone, Debug)]
pub struct CoverBall {
    graph: WeightedGraph,
    ss: SpanningStructure,
    distances: DistanceTable,
    pub base: VertexId,
    pub radius: usize,
    vertices: Vec<CoverVertex>,
    index: HashMap<CoverVertex, usize>,
    depth: Vec<usize>,
    /// Parent index and the traversal from the parent; `None` at the root.
    parent: Vec<Option<(usize, Traversal)>>,
}

/// A lifted path: the cover vertices visited and the path it lifts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedPath {
    pub vertices: Vec<usize>,
    pub projection: EdgePath,
}

impl LiftedPath {
    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.start() == self.end()
    }
}

impl CoverBall {
    pub fn new(g: &WeightedGraph, ss: &SpanningStructure, base: VertexId, radius: usize) -> Result<Self> {
        g.require_vertex(base)?;
        let root = CoverVertex {
            vertex: base,
            word: Vec::new(),
        };
        let mut ball = CoverBall {
            graph: g.clone(),
            ss: ss.clone(),
            distances: DistanceTable::new(g)?,
            base,
            radius,
            vertices: vec![root.clone()],
            index: HashMap::from([(root, 0)]),
            depth: vec![0],
            parent: vec![None],
        };
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            if ball.depth[i] == radius {
                continue;
            }
            for &t in g.incident(ball.vertices[i].vertex) {
                let next = ball.step_key(i, t);
                if ball.index.contains_key(&next) {
                    continue;
                }
                let j = ball.vertices.len();
                ball.index.insert(next.clone(), j);
                ball.vertices.push(next);
                ball.depth.push(ball.depth[i] + 1);
                ball.parent.push(Some((i, t)));
                queue.push_back(j);
            }
        }
        Ok(ball)
    }

    fn step_key(&self, i: usize, t: Traversal) -> CoverVertex {
        let from = &self.vertices[i];
        let mut word = from.word.clone();
        if self.ss.generators.contains_key(&t.edge) {
            let x = t.to_signed();
            if word.last() == Some(&-x) {
                word.pop();
            } else {
                word.push(x);
            }
        }
        CoverVertex {
            vertex: self.graph.head(t),
            word,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn vertex(&self, i: usize) -> &CoverVertex {
        &self.vertices[i]
    }

    pub fn find(&self, v: &CoverVertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    /// The covering projection.
    pub fn project(&self, i: usize) -> VertexId {
        self.vertices[i].vertex
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// Ball edges as `(parent, traversal, child)`; the ball is a tree.
    pub fn edges(&self) -> impl Iterator<Item = (usize, Traversal, usize)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(j, p)| p.map(|(i, t)| (i, t, j)))
    }

    /// Lift of one traversal starting at cover vertex `i`.
    pub fn lift_step(&self, i: usize, t: Traversal) -> Result<usize> {
        if self.graph.tail(t) != self.project(i) {
            return Err(Error::input(format!(
                "traversal {t:?} does not start over {}",
                self.project(i)
            )));
        }
        let key = self.step_key(i, t);
        self.find(&key)
            .ok_or_else(|| Error::BallTooSmall(format!("{key} lies outside the radius-{} ball", self.radius)))
    }

    pub fn lift_path(&self, path: &EdgePath, start: usize) -> Result<LiftedPath> {
        path.vertices(&self.graph)?;
        if start >= self.len() {
            return Err(Error::input(format!("no cover vertex {start}")));
        }
        if self.project(start) != path.start {
            return Err(Error::input(format!(
                "start lift lies over {}, path starts at {}",
                self.project(start),
                path.start
            )));
        }
        let mut vertices = vec![start];
        let mut cur = start;
        for &t in &path.steps {
            cur = self.lift_step(cur, t)?;
            vertices.push(cur);
        }
        Ok(LiftedPath {
            vertices,
            projection: path.clone(),
        })
    }

    /// The unique reduced path between two ball vertices, as vertex indices.
    pub fn tree_path(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut x, mut y) = (a, b);
        let mut left = vec![x];
        let mut right = vec![y];
        while x != y {
            if self.depth[x] >= self.depth[y] {
                x = self.parent[x].unwrap().0;
                left.push(x);
            } else {
                y = self.parent[y].unwrap().0;
                right.push(y);
            }
        }
        right.pop();
        left.extend(right.into_iter().rev());
        left
    }

    /// Diameter of the projection of the reduced path from `a` to `b`.
    ///
    /// Positive between distinct vertices only when the base graph has no
    /// self-loops: a lifted self-loop projects to a single point.
    pub fn lifted_distance(&self, a: usize, b: usize) -> Result<Rational> {
        if a >= self.len() || b >= self.len() {
            return Err(Error::input("cover vertex outside the ball"));
        }
        let visited: BTreeSet<VertexId> = self.tree_path(a, b).into_iter().map(|i| self.project(i)).collect();
        self.distances.diameter(&visited)
    }

    /// `lifted_distance` from `a` to every ball vertex, by one walk of the
    /// tree that keeps the projected vertex multiset of the current path.
    pub fn lifted_distances_from(&self, a: usize) -> Result<Vec<Rational>> {
        let n = self.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, _, j) in self.edges() {
            children[i].push(j);
        }
        let neighbours = |i: usize| {
            let mut out = children[i].clone();
            if let Some((p, _)) = self.parent[i] {
                out.push(p);
            }
            out
        };
        let mut out = vec![Rational::ZERO; n];
        let mut on_path: BTreeMap<VertexId, usize> = BTreeMap::new();
        // Stack of (vertex, came_from, diameter before adding, pending neighbours).
        let mut stack: Vec<(usize, Option<usize>, Rational, Vec<usize>)> = Vec::new();
        let enter = |v: usize, on_path: &mut BTreeMap<VertexId, usize>, diam: Rational| -> Result<Rational> {
            let x = self.project(v);
            let mut d = diam;
            if !on_path.contains_key(&x) {
                for &y in on_path.keys() {
                    d = d.max(self.distances.get(x, y)?);
                }
            }
            *on_path.entry(x).or_default() += 1;
            Ok(d)
        };
        let d0 = enter(a, &mut on_path, Rational::ZERO)?;
        out[a] = d0;
        stack.push((a, None, d0, neighbours(a)));
        while let Some(top) = stack.last_mut() {
            let (v, from, diam) = (top.0, top.1, top.2);
            match top.3.pop() {
                Some(w) if Some(w) == from => continue,
                Some(w) => {
                    let d = enter(w, &mut on_path, diam)?;
                    out[w] = d;
                    stack.push((w, Some(v), d, neighbours(w)));
                }
                None => {
                    let x = self.project(v);
                    let c = on_path.get_mut(&x).unwrap();
                    *c -= 1;
                    if *c == 0 {
                        on_path.remove(&x);
                    }
                    stack.pop();
                }
            }
        }
        Ok(out)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph CoverBall {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let shape = if i == 0 { ", shape=doublecircle" } else { "" };
            s.push_str(&format!("  c{i} [label=\"{v}\"{shape}];\n"));
        }
        for (i, t, j) in self.edges() {
            s.push_str(&format!("  c{i} -- c{j} [label=\"{}\"];\n", t.to_signed()));
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::{canonical_grading, TreeGrading};
    use crate::graph::{build_graph, EdgeId, EdgeLoop};
    use crate::homotopy::{is_essential, loop_from_signed};

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

    fn g2() -> (WeightedGraph, TreeGrading, SpanningStructure) {
        let g = unit(6, &[(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 6), (6, 4)]);
        let t = canonical_grading(&g).unwrap();
        let ss = SpanningStructure::new(&g, &t).unwrap();
        (g, t, ss)
    }

    #[test]
    fn radius_zero_is_a_point() {
        let (g, _, ss) = g2();
        let b = CoverBall::new(&g, &ss, VertexId(1), 0).unwrap();
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn circle_cover_is_a_segment() {
        let c3 = unit(3, &[(1, 2), (2, 3), (3, 1)]);
        let t = canonical_grading(&c3).unwrap();
        let ss = SpanningStructure::new(&c3, &t).unwrap();
        let b = CoverBall::new(&c3, &ss, VertexId(1), 3).unwrap();
        assert_eq!(b.len(), 7);
        let mut degree = vec![0; b.len()];
        for (i, _, j) in b.edges() {
            degree[i] += 1;
            degree[j] += 1;
        }
        assert_eq!(degree.iter().filter(|&&d| d == 1).count(), 2);
        assert!(degree.iter().all(|&d| d <= 2));
    }

    #[test]
    fn triangle_lift_is_open_and_bridge_lift_closes() {
        let (g, t, ss) = g2();
        let b = CoverBall::new(&g, &ss, VertexId(1), 4).unwrap();
        let tri = loop_from_signed(&g, &[1, 2, 3], VertexId(1)).unwrap();
        let lift = b.lift_path(tri.path(), b.root()).unwrap();
        assert!(!lift.is_closed());
        assert_eq!(
            b.vertex(lift.end()),
            &CoverVertex {
                vertex: VertexId(1),
                word: vec![3]
            }
        );
        assert!(is_essential(&g, &t, &tri, VertexId(1)).unwrap().essential);
        let root3 = b
            .find(&CoverVertex {
                vertex: VertexId(3),
                word: vec![],
            })
            .unwrap();
        let back = loop_from_signed(&g, &[4, -4], VertexId(3)).unwrap();
        assert!(b.lift_path(back.path(), root3).unwrap().is_closed());
        let c = b.lift_path(EdgeLoop::constant(VertexId(1)).path(), 0).unwrap();
        assert_eq!(c.vertices, vec![0]);
    }

    #[test]
    fn leaving_the_ball_is_an_error() {
        let (g, _, ss) = g2();
        let b = CoverBall::new(&g, &ss, VertexId(1), 2).unwrap();
        let tri = loop_from_signed(&g, &[1, 2, 3, 1, 2, 3], VertexId(1)).unwrap();
        assert!(matches!(b.lift_path(tri.path(), 0), Err(Error::BallTooSmall(_))));
        assert!(b.lift_path(tri.path(), 1).is_err());
    }

    #[test]
    fn lifted_distances() {
        let (g, _, ss) = g2();
        let b = CoverBall::new(&g, &ss, VertexId(1), 4).unwrap();
        let other = b
            .find(&CoverVertex {
                vertex: VertexId(1),
                word: vec![3],
            })
            .unwrap();
        assert_eq!(b.lifted_distance(0, 0).unwrap(), Rational::ZERO);
        assert_eq!(b.lifted_distance(0, other).unwrap(), Rational::ONE);
        let (p, _, c) = b.edges().find(|(_, t, _)| t.edge == EdgeId(1)).unwrap();
        assert_eq!(b.lifted_distance(p, c).unwrap(), Rational::ONE);
        for a in 0..b.len() {
            let row = b.lifted_distances_from(a).unwrap();
            for (j, d) in row.iter().enumerate() {
                assert_eq!(*d, b.lifted_distance(a, j).unwrap());
            }
        }
    }

    #[test]
    fn ball_is_a_tree_with_unique_lifting() {
        let (g, _, ss) = g2();
        let b = CoverBall::new(&g, &ss, VertexId(4), 5).unwrap();
        assert_eq!(b.edges().count() + 1, b.len());
        for i in 0..b.len() {
            let mut seen = BTreeSet::new();
            for (a, t, c) in b.edges() {
                if a == i {
                    assert!(seen.insert(t.to_signed()));
                }
                if c == i {
                    assert!(seen.insert(t.reversed().to_signed()));
                }
            }
        }
        assert!(b.to_dot().starts_with("graph CoverBall"));
    }
}
