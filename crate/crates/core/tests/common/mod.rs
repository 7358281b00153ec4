//! Brute-force oracles shared by the integration tests. None of these call
//! into the library's own algorithms beyond graph construction and access.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use treegrade::graph::build_graph;
use treegrade::{EdgeId, Rational, Traversal, VertexId, WeightedGraph};

pub fn unit_graph(n: u32, pairs: &[(u32, u32)]) -> WeightedGraph {
    build_graph(
        1..=n,
        pairs
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (i as u32 + 1, u, v, Rational::ONE)),
    )
    .unwrap()
}

/// Two unit triangles `1-2-3` and `4-5-6` joined by the bridge `3-4`.
pub fn g2() -> WeightedGraph {
    unit_graph(6, &[(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 6), (6, 4)])
}

pub fn v(x: u32) -> VertexId {
    VertexId(x)
}

pub fn e(x: u32) -> EdgeId {
    EdgeId(x)
}

/// Every path from `a` to `b` visiting no vertex twice.
pub fn simple_paths(g: &WeightedGraph, a: VertexId, b: VertexId) -> Vec<Vec<Traversal>> {
    fn go(
        g: &WeightedGraph,
        at: VertexId,
        b: VertexId,
        seen: &mut BTreeSet<VertexId>,
        path: &mut Vec<Traversal>,
        out: &mut Vec<Vec<Traversal>>,
    ) {
        if at == b {
            out.push(path.clone());
            return;
        }
        for &t in g.incident(at) {
            let next = g.head(t);
            if seen.insert(next) {
                path.push(t);
                go(g, next, b, seen, path, out);
                path.pop();
                seen.remove(&next);
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::from([a]);
    go(g, a, b, &mut seen, &mut Vec::new(), &mut out);
    out
}

pub fn vertices_along(g: &WeightedGraph, start: VertexId, steps: &[Traversal]) -> Vec<VertexId> {
    let mut out = vec![start];
    for &t in steps {
        out.push(g.head(t));
    }
    out
}

/// Shortest length over all simple paths.
pub fn brute_distance(g: &WeightedGraph, a: VertexId, b: VertexId) -> Option<Rational> {
    simple_paths(g, a, b)
        .iter()
        .map(|p| {
            p.iter()
                .fold(Rational::ZERO, |acc, t| acc + g.edge(t.edge).unwrap().len)
        })
        .min()
}

fn connected_without(g: &WeightedGraph, skip: EdgeId, a: VertexId, b: VertexId) -> bool {
    let mut seen = BTreeSet::from([a]);
    let mut queue = VecDeque::from([a]);
    while let Some(x) = queue.pop_front() {
        for &t in g.incident(x) {
            if t.edge != skip && seen.insert(g.head(t)) {
                queue.push_back(g.head(t));
            }
        }
    }
    seen.contains(&b)
}

/// Edges whose removal disconnects their endpoints.
pub fn brute_bridges(g: &WeightedGraph) -> BTreeSet<EdgeId> {
    g.edges()
        .filter(|x| !x.is_loop() && !connected_without(g, x.id, x.u, x.v))
        .map(|x| x.id)
        .collect()
}

/// Edge sets of the connected components of the non-bridge edges.
pub fn brute_piece_edges(g: &WeightedGraph) -> BTreeSet<BTreeSet<EdgeId>> {
    let bridges = brute_bridges(g);
    let mut left: BTreeSet<EdgeId> = g.edge_ids().filter(|x| !bridges.contains(x)).collect();
    let mut out = BTreeSet::new();
    while let Some(&first) = left.iter().next() {
        let mut comp = BTreeSet::from([first]);
        left.remove(&first);
        let mut frontier = vec![first];
        while let Some(x) = frontier.pop() {
            let ex = g.edge(x).unwrap();
            let touching: Vec<EdgeId> = left
                .iter()
                .copied()
                .filter(|y| {
                    let ey = g.edge(*y).unwrap();
                    [ey.u, ey.v].iter().any(|w| *w == ex.u || *w == ex.v)
                })
                .collect();
            for y in touching {
                left.remove(&y);
                comp.insert(y);
                frontier.push(y);
            }
        }
        out.insert(comp);
    }
    out
}

pub fn free_reduce(word: impl IntoIterator<Item = i64>) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::new();
    for x in word {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

/// Reduced word of a walk over the non-tree edges of a depth-first spanning
/// tree rooted at the largest vertex. For a loop, empty iff null-homotopic.
pub fn dfs_tree_word(g: &WeightedGraph, steps: &[Traversal]) -> Vec<i64> {
    let root = g.vertices().last().unwrap();
    let mut tree: BTreeSet<EdgeId> = BTreeSet::new();
    let mut seen = BTreeSet::from([root]);
    let mut stack = vec![root];
    while let Some(&x) = stack.last() {
        let next = g.incident(x).iter().find(|t| !seen.contains(&g.head(**t))).copied();
        match next {
            Some(t) => {
                tree.insert(t.edge);
                seen.insert(g.head(t));
                stack.push(g.head(t));
            }
            None => {
                stack.pop();
            }
        }
    }
    free_reduce(
        steps
            .iter()
            .filter(|t| !tree.contains(&t.edge))
            .map(|t| t.to_signed()),
    )
}

/// A nonempty reduced word of length at most `max_len` in the generators
/// `±1..=±rank` whose image under `images` reduces to the identity.
pub fn kernel_element(rank: usize, images: &[Vec<i64>], max_len: usize) -> Option<Vec<i64>> {
    let letters: Vec<i64> = (1..=rank as i64).flat_map(|x| [x, -x]).collect();
    let mut layer: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &x in &letters {
                if w.last() == Some(&-x) {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(x);
                let image = free_reduce(w2.iter().flat_map(|&y| {
                    let img = &images[y.unsigned_abs() as usize - 1];
                    let v: Vec<i64> = if y > 0 {
                        img.clone()
                    } else {
                        img.iter().rev().map(|z| -z).collect()
                    };
                    v
                }));
                if image.is_empty() {
                    return Some(w2);
                }
                next.push(w2);
            }
        }
        layer = next;
    }
    None
}

/// Class of each vertex under the equivalence generated by `classes`.
pub fn class_index(g: &WeightedGraph, classes: &[BTreeSet<VertexId>]) -> BTreeMap<VertexId, usize> {
    let mut out = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        for &x in c {
            out.insert(x, i);
        }
    }
    let mut next = classes.len();
    for x in g.vertices() {
        out.entry(x).or_insert_with(|| {
            next += 1;
            next - 1
        });
    }
    out
}
