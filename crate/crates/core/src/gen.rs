//! Deterministic generators for example spaces and seeded random instances.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::{canonical_grading, Piece, PieceId, TreeGrading};
use crate::graph::{build_graph, EdgeId, VertexId, WeightedGraph};
use crate::rational::Rational;
use crate::space::Space;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainLayout {
    /// Triangle `i` joined to triangle `i + 1` by one bridge.
    Chain,
    /// A spine path with each triangle hanging off it by a spoke; string-light.
    Spokes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleSize {
    /// Every circle has circumference 1.
    Fixed,
    /// Circle `n` has circumference `1/n`.
    Shrinking,
}

/// Parameters of one generated space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SpaceSpec {
    TriangleChain {
        k: u32,
        circumference: Rational,
        bridge: Rational,
        layout: ChainLayout,
    },
    ShrinkingCircles {
        k: u32,
        size: CircleSize,
    },
    WedgeArc,
    Random {
        seed: u64,
        vertices: u32,
        edges: u32,
        length_bound: u32,
    },
}

/// A finite cover of a generated space with its projection.
#[derive(Clone, Debug, Serialize)]
pub struct CoverData {
    pub graph: WeightedGraph,
    pub sheets: u32,
    pub vertex_projection: BTreeMap<VertexId, VertexId>,
    pub edge_projection: BTreeMap<EdgeId, EdgeId>,
}

#[derive(Clone, Debug)]
pub struct GeneratedSpace {
    pub spec: SpaceSpec,
    pub space: Space,
    /// Attachment vertex of each circle or triangle, where recorded.
    pub attachments: BTreeMap<PieceId, VertexId>,
    pub cover: Option<CoverData>,
}

impl GeneratedSpace {
    /// `{spec, graph, grading, attachments?, cover?}`; consumers read the
    /// `graph` and `grading` keys and ignore the rest.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.space.to_json();
        let o = v.as_object_mut().unwrap();
        o.insert("spec".into(), serde_json::to_value(&self.spec).unwrap());
        if !self.attachments.is_empty() {
            o.insert("attachments".into(), serde_json::to_value(&self.attachments).unwrap());
        }
        if let Some(c) = &self.cover {
            o.insert("cover".into(), serde_json::to_value(c).unwrap());
        }
        v
    }
}

pub fn generate(spec: &SpaceSpec) -> Result<GeneratedSpace> {
    match *spec {
        SpaceSpec::TriangleChain {
            k,
            circumference,
            bridge,
            layout,
        } => triangle_chain(k, circumference, bridge, layout),
        SpaceSpec::ShrinkingCircles { k, size } => shrinking_circles(k, size),
        SpaceSpec::WedgeArc => wedge_arc(),
        SpaceSpec::Random {
            seed,
            vertices,
            edges,
            length_bound,
        } => random(seed, vertices, edges, length_bound),
    }
}

fn finish(
    spec: SpaceSpec,
    graph: WeightedGraph,
    grading: TreeGrading,
    attachments: BTreeMap<PieceId, VertexId>,
) -> Result<GeneratedSpace> {
    crate::grading::validate_grading(&graph, &grading)
        .map_err(|v| Error::invariant(format!("generated grading invalid: {v}")))?;
    Ok(GeneratedSpace {
        spec,
        space: Space { graph, grading },
        attachments,
        cover: None,
    })
}

/// `k` triangles of circumference `c` (three edges of `c/3`) joined by
/// bridges of length `b`. Triangle `i` has vertices `3i-2, 3i-1, 3i`.
///
/// `Chain`: edges `4i-3..4i-1` are triangle `i` and edge `4i` bridges
/// `3i` to `3i+1`. `Spokes`: spine vertices `3k+1..4k`, triangle `i` hangs
/// from spine vertex `3k+i` by a spoke to `3i-2`.
pub fn triangle_chain(k: u32, c: Rational, b: Rational, layout: ChainLayout) -> Result<GeneratedSpace> {
    if k == 0 {
        return Err(Error::input("triangle chain needs k >= 1"));
    }
    if !c.is_positive() || !b.is_positive() {
        return Err(Error::input("circumference and bridge length must be positive"));
    }
    let side = c / Rational::from(3);
    let mut edges = Vec::new();
    let mut id = 0;
    let mut next = || {
        id += 1;
        id
    };
    let mut attachments = BTreeMap::new();
    let vertex_count = match layout {
        ChainLayout::Chain => 3 * k,
        ChainLayout::Spokes => 4 * k,
    };
    for i in 1..=k {
        let (a, m, z) = (3 * i - 2, 3 * i - 1, 3 * i);
        edges.push((next(), a, m, side));
        edges.push((next(), m, z, side));
        edges.push((next(), z, a, side));
        match layout {
            ChainLayout::Chain => {
                if i < k {
                    edges.push((next(), z, z + 1, b));
                }
            }
            ChainLayout::Spokes => {
                attachments.insert(PieceId(i), VertexId(a));
            }
        }
    }
    if layout == ChainLayout::Spokes {
        for i in 1..=k {
            edges.push((next(), 3 * k + i, 3 * i - 2, b));
        }
        for i in 1..k {
            edges.push((next(), 3 * k + i, 3 * k + i + 1, b));
        }
    }
    let graph = build_graph(1..=vertex_count, edges)?;
    let grading = canonical_grading(&graph)?;
    finish(
        SpaceSpec::TriangleChain {
            k,
            circumference: c,
            bridge: b,
            layout,
        },
        graph,
        grading,
        attachments,
    )
}

/// A segment from `0` to `1` with a square circle attached at each of
/// `1, 1/2, ..., 1/k`.
///
/// Vertex `1` is the point `0`; vertex `n + 1` is the point `1/n`. Circle
/// `n` adds vertices `k + 3n - 1 ..= k + 3n + 1` and four edges of a quarter
/// of its circumference, so its diameter is half the circumference. The
/// grading is the canonical one plus the degenerate piece at `0`, numbered
/// by smallest vertex: the point `0` is piece 1 and circle `n` is piece
/// `n + 1`.
pub fn shrinking_circles(k: u32, size: CircleSize) -> Result<GeneratedSpace> {
    if k == 0 {
        return Err(Error::input("shrinking circles needs k >= 1"));
    }
    let mut edges = Vec::new();
    let mut id = 0;
    let mut push = |u: u32, v: u32, len: Rational| {
        id += 1;
        edges.push((id, u, v, len));
    };
    for n in 1..k {
        let n128 = n as i128;
        push(n + 1, n + 2, Rational::new(1, n128 * (n128 + 1)));
    }
    push(k + 1, 1, Rational::new(1, k as i128));
    let mut attachments = BTreeMap::new();
    for n in 1..=k {
        let circumference = match size {
            CircleSize::Fixed => Rational::ONE,
            CircleSize::Shrinking => Rational::new(1, n as i128),
        };
        let quarter = circumference / Rational::from(4);
        let at = n + 1;
        let first = k + 3 * n - 1;
        let ring = [at, first, first + 1, first + 2];
        for j in 0..4 {
            push(ring[j], ring[(j + 1) % 4], quarter);
        }
        attachments.insert(PieceId(n + 1), VertexId(at));
    }
    let graph = build_graph(1..=4 * k + 1, edges)?;
    let mut pieces = canonical_grading(&graph)?.pieces().to_vec();
    pieces.push(Piece::degenerate(PieceId(0), VertexId(1)));
    let grading = TreeGrading::with_canonical_ids(pieces);
    finish(SpaceSpec::ShrinkingCircles { k, size }, graph, grading, attachments)
}

/// Two unit triangles joined by an arc, plus the connected double cover in
/// which each triangle lifts to a single hexagon.
///
/// Base: triangle `1,2,3` (edges 1-3), arc `1-4` (edge 4), triangle `4,5,6`
/// (edges 5-7). Cover vertex `v + 6s` and edge `e + 7s` lie over `v` and
/// `e` on sheet `s`; edges 3 and 7 switch sheets.
pub fn wedge_arc() -> Result<GeneratedSpace> {
    let base_edges = [(1, 2), (2, 3), (3, 1), (1, 4), (4, 5), (5, 6), (6, 4)];
    let graph = build_graph(
        1..=6,
        base_edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (i as u32 + 1, u, v, Rational::ONE)),
    )?;
    let grading = canonical_grading(&graph)?;
    let switching = [3u32, 7];
    let mut cover_edges = Vec::new();
    let mut vertex_projection = BTreeMap::new();
    let mut edge_projection = BTreeMap::new();
    for s in 0..2u32 {
        for v in 1..=6 {
            vertex_projection.insert(VertexId(v + 6 * s), VertexId(v));
        }
        for (i, &(u, v)) in base_edges.iter().enumerate() {
            let e = i as u32 + 1;
            let t = if switching.contains(&e) { 1 - s } else { s };
            cover_edges.push((e + 7 * s, u + 6 * s, v + 6 * t, Rational::ONE));
            edge_projection.insert(EdgeId(e + 7 * s), EdgeId(e));
        }
    }
    let cover_graph = build_graph(1..=12, cover_edges)?;
    let mut out = finish(SpaceSpec::WedgeArc, graph, grading, BTreeMap::new())?;
    out.cover = Some(CoverData {
        graph: cover_graph,
        sheets: 2,
        vertex_projection,
        edge_projection,
    });
    Ok(out)
}

/// A connected multigraph on vertices `1..=n` with `m` edges: a uniform
/// random spanning tree (Prüfer code) plus `m - n + 1` extra edges between
/// distinct uniform random vertices. Lengths are `j / L` with `j` uniform in
/// `1..=L`. Edge ids follow generation order. No self-loops are generated.
pub fn random(seed: u64, n: u32, m: u32, length_bound: u32) -> Result<GeneratedSpace> {
    if n == 0 || length_bound == 0 {
        return Err(Error::input("random graphs need n >= 1 and a positive length bound"));
    }
    if m + 1 < n {
        return Err(Error::input(format!("{m} edges cannot connect {n} vertices")));
    }
    if n == 1 && m > 0 {
        return Err(Error::input("a single vertex admits no edges without self-loops"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(m as usize);
    if n >= 2 {
        let code: Vec<u32> = (0..n - 2).map(|_| rng.gen_range(1..=n)).collect();
        pairs.extend(prufer_tree(n, &code));
    }
    while (pairs.len() as u32) < m {
        let u = rng.gen_range(1..=n);
        let v = rng.gen_range(1..=n);
        if u != v {
            pairs.push((u, v));
        }
    }
    // Shuffle so tree edges are not always the low ids.
    pairs.shuffle(&mut rng);
    let edges: Vec<_> = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (u, v))| {
            let j = rng.gen_range(1..=length_bound) as i128;
            (i as u32 + 1, u, v, Rational::new(j, length_bound as i128))
        })
        .collect();
    let graph = build_graph(1..=n, edges)?;
    let grading = canonical_grading(&graph)?;
    finish(
        SpaceSpec::Random {
            seed,
            vertices: n,
            edges: m,
            length_bound,
        },
        graph,
        grading,
        BTreeMap::new(),
    )
}

fn prufer_tree(n: u32, code: &[u32]) -> Vec<(u32, u32)> {
    let mut degree = vec![1u32; n as usize + 1];
    for &x in code {
        degree[x as usize] += 1;
    }
    let mut edges = Vec::with_capacity(n as usize - 1);
    for &x in code {
        let leaf = (1..=n).find(|&v| degree[v as usize] == 1).unwrap();
        edges.push((leaf, x));
        degree[leaf as usize] -= 1;
        degree[x as usize] -= 1;
    }
    let rest: Vec<u32> = (1..=n).filter(|&v| degree[v as usize] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}
