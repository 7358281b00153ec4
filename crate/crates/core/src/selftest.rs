//! Seeded property and oracle-equivalence suites over generated spaces.
//!
//! Each suite returns a [`SuiteResult`]; [`run`] executes all of them. The
//! `selftest` CLI subcommand and the acceptance test target both call into
//! this module with pinned seeds.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::covers::CoverBall;
use crate::error::Result;
use crate::gen::{self, ChainLayout, CircleSize};
use crate::grading::{canonical_grading, parameterize, Piece, PieceId, Subgraph, TreeGrading};
use crate::graph::{build_graph, EdgeId, EdgeLoop, UnionFind, VertexId, WeightedGraph};
use crate::homotopy::{
    is_essential_with, loop_word, oracle_is_essential, phi, project_word, sample_essential_loop,
    sample_loop, tree_efficient_reduce, SpanningStructure,
};
use crate::mapgen;
use crate::maps::{check_pi1_injectivity, string_light_collapse, GradedMap};
use crate::quotient::{bonding_map, identification, metric_quotient, retraction, ChainOracle};
use crate::rational::Rational;
use crate::space::Space;

#[derive(Clone, Debug, Serialize)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Random graphs in the essential-loop suite.
    pub graphs: usize,
    pub loops_per_graph: usize,
    pub max_loop_len: usize,
    /// Random graphs added to the generator graphs in the quotient suite.
    pub quotient_random: usize,
    /// Random graphs added to the fixed suite spaces elsewhere.
    pub suite_random: usize,
    pub cover_radius: usize,
    pub maps: usize,
    pub loops_per_map: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: 7,
            graphs: 200,
            loops_per_graph: 50,
            max_loop_len: 12,
            quotient_random: 50,
            suite_random: 20,
            cover_radius: 12,
            maps: 24,
            loops_per_map: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failure_count: usize,
    /// The first few failures.
    pub failures: Vec<String>,
    pub millis: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

pub const SUITES: &[&str] = &[
    "essential_loops",
    "quotient_metric",
    "parameterization",
    "retraction",
    "rank_identity",
    "phi_coherence",
    "covers",
    "injectivity_maps",
    "wedge_arc",
    "tree_efficient",
    "string_light",
];

pub fn run(cfg: &SelftestConfig) -> Summary {
    let suites: Vec<SuiteResult> = SUITES
        .iter()
        .map(|name| run_suite(name, cfg).expect("known suite"))
        .collect();
    Summary {
        seed: cfg.seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}

pub fn run_suite(name: &str, cfg: &SelftestConfig) -> Option<SuiteResult> {
    let start = Instant::now();
    let mut rec = Recorder::default();
    let body: fn(&SelftestConfig, &mut Recorder) -> Result<()> = match name {
        "essential_loops" => essential_loops,
        "quotient_metric" => quotient_metric,
        "parameterization" => parameterization,
        "retraction" => retraction_suite,
        "rank_identity" => rank_identity,
        "phi_coherence" => phi_coherence,
        "covers" => covers,
        "injectivity_maps" => injectivity_maps,
        "wedge_arc" => wedge_arc,
        "tree_efficient" => tree_efficient,
        "string_light" => string_light,
        _ => return None,
    };
    if let Err(e) = body(cfg, &mut rec) {
        rec.fail(format!("aborted: {e}"));
    }
    Some(SuiteResult {
        name: name.to_string(),
        passed: rec.failure_count == 0 && rec.cases > 0,
        cases: rec.cases,
        failure_count: rec.failure_count,
        failures: rec.failures,
        millis: start.elapsed().as_millis(),
    })
}

#[derive(Default)]
struct Recorder {
    cases: usize,
    failure_count: usize,
    failures: Vec<String>,
}

impl Recorder {
    fn case(&mut self) {
        self.cases += 1;
    }

    fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < 10 {
            self.failures.push(msg);
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg());
        }
    }

    /// Records an error as a failure and yields `None`.
    fn ok<T>(&mut self, what: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(format!("{what}: {e}"));
                None
            }
        }
    }
}

fn unit_graph(n: u32, pairs: &[(u32, u32)]) -> WeightedGraph {
    build_graph(
        1..=n,
        pairs
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (i as u32 + 1, u, v, Rational::ONE)),
    )
    .expect("fixed graph")
}

fn chain(k: u32, c: Rational, b: Rational, layout: ChainLayout) -> Space {
    gen::triangle_chain(k, c, b, layout).expect("fixed parameters").space
}

/// The fixed spaces every structural suite runs on.
pub fn fixed_spaces() -> Vec<(String, Space)> {
    let three = Rational::from(3);
    let one = Rational::ONE;
    let mut out = vec![
        ("triangle".to_string(), chain(1, three, one, ChainLayout::Chain)),
        ("g2".to_string(), chain(2, three, one, ChainLayout::Chain)),
        (
            "chain3".to_string(),
            chain(3, Rational::new(3, 2), Rational::new(1, 2), ChainLayout::Chain),
        ),
        ("spokes2".to_string(), chain(2, three, one, ChainLayout::Spokes)),
        ("spokes3".to_string(), chain(3, three, Rational::new(1, 3), ChainLayout::Spokes)),
        (
            "circles2_fixed".to_string(),
            gen::shrinking_circles(2, CircleSize::Fixed).unwrap().space,
        ),
        (
            "circles3_shrinking".to_string(),
            gen::shrinking_circles(3, CircleSize::Shrinking).unwrap().space,
        ),
        ("wedge_arc".to_string(), gen::wedge_arc().unwrap().space),
    ];
    let canonical = |g: WeightedGraph| Space::canonical(g).expect("connected");
    out.push(("c4".into(), canonical(unit_graph(4, &[(1, 2), (2, 3), (3, 4), (4, 1)]))));
    out.push((
        "theta".into(),
        canonical(unit_graph(4, &[(1, 2), (2, 3), (1, 3), (1, 4), (4, 3)])),
    ));
    out.push((
        "k4".into(),
        canonical(unit_graph(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])),
    ));
    out.push(("path4".into(), canonical(unit_graph(4, &[(1, 2), (2, 3), (3, 4)]))));
    out.push((
        "parallel".into(),
        canonical(unit_graph(4, &[(1, 2), (1, 2), (2, 3), (3, 4), (3, 4), (4, 3)])),
    ));
    // G2 with a pendant vertex declared as a degenerate piece.
    let g = unit_graph(7, &[(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 6), (6, 4), (5, 7)]);
    let mut pieces = canonical_grading(&g).unwrap().pieces().to_vec();
    pieces.push(Piece::degenerate(PieceId(3), VertexId(7)));
    out.push((
        "g2_pendant_point".into(),
        Space {
            graph: g,
            grading: TreeGrading::new(pieces),
        },
    ));
    out
}

fn random_space(rng: &mut ChaCha8Rng, n_range: (u32, u32), extra: (u32, u32), max_edges: u32) -> Space {
    let n = rng.gen_range(n_range.0..=n_range.1);
    let lo = n - 1 + extra.0;
    let hi = (n - 1 + extra.1).min(max_edges).max(lo);
    let m = if n == 1 { 0 } else { rng.gen_range(lo..=hi) };
    let seed = rng.gen();
    gen::random(seed, n, m, 4).expect("feasible parameters").space
}

/// A coarser valid grading of the same graph: pieces merged along random
/// tree edges, and some free vertices made degenerate pieces.
pub fn random_coarsening(s: &Space, rng: &mut ChaCha8Rng) -> Space {
    let g = &s.graph;
    let mut edges: BTreeSet<EdgeId> = s.grading.pieces().iter().flat_map(|p| p.edges.iter().copied()).collect();
    edges.extend(s.grading.tree_edges(g).into_iter().filter(|_| rng.gen_bool(0.35)));
    let mut uf = UnionFind::new(g.vertices());
    for &e in &edges {
        let edge = g.edge(e).unwrap();
        uf.union(edge.u, edge.v);
    }
    let mut groups: BTreeMap<VertexId, BTreeSet<EdgeId>> = BTreeMap::new();
    for &e in &edges {
        groups.entry(uf.find(g.edge(e).unwrap().u)).or_default().insert(e);
    }
    let mut pieces: Vec<Piece> = groups
        .into_values()
        .enumerate()
        .map(|(i, es)| Piece::from_edges(g, PieceId(i as u32 + 1), es).expect("edges of g"))
        .collect();
    let covered: BTreeSet<VertexId> = pieces.iter().flat_map(|p| p.vertices.iter().copied()).collect();
    for v in g.vertices() {
        if !covered.contains(&v) && rng.gen_bool(0.3) {
            pieces.push(Piece::degenerate(PieceId(pieces.len() as u32 + 1), v));
        }
    }
    Space {
        graph: g.clone(),
        grading: TreeGrading::with_canonical_ids(pieces),
    }
}

/// Fixed spaces plus `cfg.suite_random` random ones, each random one also
/// under a coarser grading.
pub fn suite_spaces(cfg: &SelftestConfig) -> Vec<(String, Space)> {
    let mut out = fixed_spaces();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    for i in 0..cfg.suite_random {
        let s = random_space(&mut rng, (3, 9), (0, 5), 14);
        out.push((format!("random{i}_coarse"), random_coarsening(&s, &mut rng)));
        out.push((format!("random{i}"), s));
    }
    out
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.gen_range(0..xs.len())]
}

fn vertices_of(g: &WeightedGraph) -> Vec<VertexId> {
    g.vertices().collect()
}

fn signed(l: &EdgeLoop) -> String {
    format!("{:?} at {}", l.path().to_signed(), l.base())
}

fn essential_loops(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for gi in 0..cfg.graphs {
        // At most 12 vertices and 18 edges; rank kept at most 7.
        let s = random_space(&mut rng, (2, 12), (0, 7), 18);
        let (g, t) = (&s.graph, &s.grading);
        let ss = SpanningStructure::new(g, t)?;
        let vs = vertices_of(g);
        for _ in 0..cfg.loops_per_graph {
            rec.case();
            let base = pick(&mut rng, &vs);
            let l = sample_loop(g, base, &mut rng, cfg.max_loop_len)?;
            let Some(e) = rec.ok("is_essential", is_essential_with(g, t, &ss, &l, base)) else {
                continue;
            };
            let oracle = oracle_is_essential(g, &l, base)?;
            rec.check(e.essential == oracle, || {
                format!("graph {gi}: verdict {} vs oracle {oracle} on {}", e.essential, signed(&l))
            });
            let Some(w) = e.witness else { continue };
            let kept = project_word(g, t, &l, &w)?;
            rec.check(!kept.is_identity() && kept == e.word, || {
                format!("graph {gi}: witness projection gave {kept} for {}", signed(&l))
            });
            let others: Vec<PieceId> = t.piece_ids().filter(|p| !w.contains(p)).collect();
            let some: BTreeSet<PieceId> = others.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            for f in [others.iter().copied().collect::<BTreeSet<_>>(), some] {
                let killed = project_word(g, t, &l, &f)?;
                rec.check(killed.is_identity(), || {
                    format!("graph {gi}: disjoint projection to {f:?} left {killed}")
                });
            }
        }
    }
    Ok(())
}

fn piece_subsets(t: &TreeGrading) -> Vec<BTreeSet<PieceId>> {
    let ids: Vec<PieceId> = t.piece_ids().collect();
    (0u64..1 << ids.len())
        .map(|mask| {
            ids.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect()
}

fn quotient_metric(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    let mut spaces: Vec<(String, Space)> = fixed_spaces()
        .into_iter()
        .filter(|(_, s)| s.graph.vertex_count() <= 8)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9);
    for i in 0..cfg.quotient_random {
        let s = random_space(&mut rng, (2, 8), (0, 5), 13);
        spaces.push((format!("random{i}_coarse"), random_coarsening(&s, &mut rng)));
        spaces.push((format!("random{i}"), s));
    }
    for (name, s) in &spaces {
        let (g, t) = (&s.graph, &s.grading);
        for kept in piece_subsets(t) {
            let mq = metric_quotient(g, t, &kept)?;
            let dq = mq.target.distance_table()?;
            let oracle = ChainOracle::new(g, &identification(g, t, &kept))?;
            for a in g.vertices() {
                for b in g.vertices() {
                    rec.case();
                    let lhs = dq.get(mq.gamma[&a], mq.gamma[&b])?;
                    let rhs = oracle.rho(a, b)?;
                    rec.check(lhs == rhs, || {
                        format!("{name} keep {kept:?}: d({a},{b}) = {lhs}, chain oracle {rhs}")
                    });
                }
            }
        }
    }
    Ok(())
}

fn parameterization(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    for (name, s) in suite_spaces(cfg) {
        rec.case();
        let (g, t) = (&s.graph, &s.grading);
        let Some(p) = rec.ok(&name, parameterize(g, t)) else { continue };
        rec.check(p.tree.is_connected(), || format!("{name}: tree disconnected"));
        rec.check(p.tree.edge_count() + 1 == p.tree.vertex_count(), || {
            format!("{name}: {} edges on {} vertices", p.tree.edge_count(), p.tree.vertex_count())
        });
        let mut fibers: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for v in g.vertices() {
            fibers.entry(p.q[&v]).or_default().insert(v);
        }
        rec.check(fibers.len() == p.tree.vertex_count(), || format!("{name}: q not onto"));
        for piece in t.pieces() {
            let y = p.piece_points[&piece.id];
            rec.check(fibers.get(&y) == Some(&piece.vertices), || {
                format!("{name}: fiber of {} is not {}", y, piece.id)
            });
        }
        let marked = p.marked();
        for (y, f) in &fibers {
            if !marked.contains(y) {
                rec.check(f.len() == 1, || format!("{name}: unmarked fiber over {y} has {f:?}"));
            }
        }
    }
    Ok(())
}

/// A random connected subspace meeting every piece in a point or entirely.
fn random_sectional(s: &Space, rng: &mut ChaCha8Rng) -> Subgraph {
    let (g, t) = (&s.graph, &s.grading);
    let vs = vertices_of(g);
    let start = pick(rng, &vs);
    let mut y = Subgraph {
        vertices: BTreeSet::from([start]),
        edges: BTreeSet::new(),
    };
    let mut decided: BTreeSet<PieceId> = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        if let Some(p) = t.piece_of_vertex(x).and_then(|p| t.piece(p)) {
            if decided.insert(p.id) && !p.is_degenerate() && rng.gen_bool(0.6) {
                for &v in &p.vertices {
                    if y.vertices.insert(v) {
                        queue.push_back(v);
                    }
                }
                y.edges.extend(p.edges.iter().copied());
            }
        }
        for &tr in g.incident(x) {
            if t.piece_of_edge(tr.edge).is_some() {
                continue;
            }
            let w = g.head(tr);
            if !y.vertices.contains(&w) && rng.gen_bool(0.5) {
                y.vertices.insert(w);
                y.edges.insert(tr.edge);
                queue.push_back(w);
            }
        }
    }
    y
}

fn retraction_suite(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x3);
    for (name, s) in suite_spaces(cfg) {
        let (g, t) = (&s.graph, &s.grading);
        let d = g.distance_table()?;
        let mut subspaces: Vec<Subgraph> = t.non_degenerate().map(Subgraph::of_piece).collect();
        subspaces.push(Subgraph::whole(g));
        for _ in 0..5 {
            subspaces.push(random_sectional(&s, &mut rng));
        }
        for y in subspaces {
            rec.case();
            let Some(r) = rec.ok(&name, retraction(g, t, &y)) else { continue };
            for v in g.vertices() {
                let rv = r.map[&v];
                rec.check(r.map[&rv] == rv, || format!("{name}: r not idempotent at {v}"));
                if y.vertices.contains(&v) {
                    rec.check(rv == v, || format!("{name}: r moves {v} in Y"));
                }
            }
            // Complement components, computed directly.
            let outside: Vec<VertexId> = g.vertices().filter(|v| !y.vertices.contains(v)).collect();
            let mut uf = UnionFind::new(outside.iter().copied());
            for e in g.edges() {
                if !y.vertices.contains(&e.u) && !y.vertices.contains(&e.v) {
                    uf.union(e.u, e.v);
                }
            }
            let mut image_of: BTreeMap<VertexId, VertexId> = BTreeMap::new();
            for &v in &outside {
                let root = uf.find(v);
                let prev = *image_of.entry(root).or_insert(r.map[&v]);
                rec.check(prev == r.map[&v], || {
                    format!("{name}: r not constant on the component of {v}")
                });
            }
            for a in g.vertices() {
                for b in g.vertices() {
                    let (ra, rb) = (r.map[&a], r.map[&b]);
                    if d.get(ra, rb)? > d.get(a, b)? {
                        rec.fail(format!("{name}: r expands d({a},{b})"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn rank_identity(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    for (name, s) in suite_spaces(cfg) {
        rec.case();
        let g = &s.graph;
        let t = canonical_grading(g)?;
        let total: usize = t
            .pieces()
            .iter()
            .map(|p| p.edges.len() + 1 - p.vertices.len())
            .sum();
        let rank = g.cycle_rank()?;
        rec.check(total == rank, || format!("{name}: piece ranks {total}, graph rank {rank}"));
        let ss = SpanningStructure::new(g, &t)?;
        rec.check(ss.rank() == rank, || format!("{name}: {} generators", ss.rank()));
        for p in t.pieces() {
            let n = ss.generators_of(p.id).count();
            rec.check(n == p.edges.len() + 1 - p.vertices.len(), || {
                format!("{name}: {} has {n} generators", p.id)
            });
        }
    }
    Ok(())
}

fn random_filtration(t: &TreeGrading, rng: &mut ChaCha8Rng) -> Vec<BTreeSet<PieceId>> {
    let mut ids: Vec<PieceId> = t.piece_ids().collect();
    ids.shuffle(rng);
    let mut cuts = [
        rng.gen_range(0..=ids.len()),
        rng.gen_range(0..=ids.len()),
        rng.gen_range(0..=ids.len()),
    ];
    cuts.sort();
    cuts.iter().map(|&c| ids[..c].iter().copied().collect()).collect()
}

fn sampled_loops(
    s: &Space,
    ss: &SpanningStructure,
    rng: &mut ChaCha8Rng,
    count: usize,
    max_len: usize,
) -> Result<Vec<EdgeLoop>> {
    let vs = vertices_of(&s.graph);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let base = pick(rng, &vs);
        let l = if i % 2 == 0 {
            sample_loop(&s.graph, base, rng, max_len)?
        } else {
            match sample_essential_loop(&s.graph, ss, base, rng, 3)? {
                Some(l) => l,
                None => sample_loop(&s.graph, base, rng, max_len)?,
            }
        };
        out.push(l);
    }
    Ok(out)
}

fn phi_coherence(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4);
    for (name, s) in suite_spaces(cfg) {
        let (g, t) = (&s.graph, &s.grading);
        let ss = SpanningStructure::new(g, t)?;
        for _ in 0..3 {
            let filt = random_filtration(t, &mut rng);
            let quotients = filt
                .iter()
                .map(|f| metric_quotient(g, t, f))
                .collect::<Result<Vec<_>>>()?;
            let bonds = (0..2)
                .map(|k| bonding_map(&quotients[k + 1], &filt[k]))
                .collect::<Result<Vec<_>>>()?;
            let bond_ss = bonds
                .iter()
                .map(|b| SpanningStructure::new(&b.target, &b.target_grading))
                .collect::<Result<Vec<_>>>()?;
            for l in sampled_loops(&s, &ss, &mut rng, 8, cfg.max_loop_len)? {
                rec.case();
                let Some(seq) = rec.ok(&name, phi(g, t, &l, l.base(), &filt)) else { continue };
                for k in 0..2 {
                    let upper = quotients[k + 1].map_loop(&l)?;
                    let lower = bonds[k].map_loop(&upper)?;
                    let w = loop_word(&bonds[k].target, &bond_ss[k], &lower, lower.base())?;
                    rec.check(w == seq.levels[k].word, || {
                        format!("{name}: bonded word {w} vs level word {}", seq.levels[k].word)
                    });
                }
                let e = is_essential_with(g, t, &ss, &l, l.base())?;
                for level in &seq.levels {
                    match &e.witness {
                        Some(w) if w.is_subset(&level.pieces) => {
                            rec.check(!level.word.is_identity(), || {
                                format!("{name}: essential {} dies at {:?}", signed(&l), level.pieces)
                            })
                        }
                        None => rec.check(level.word.is_identity(), || {
                            format!("{name}: inessential {} survives at {:?}", signed(&l), level.pieces)
                        }),
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(())
}

/// Sparse spaces whose radius-12 cover balls stay small.
pub fn cover_spaces(cfg: &SelftestConfig) -> Vec<(String, Space)> {
    let keep = ["triangle", "g2", "chain3", "c4", "theta", "wedge_arc", "circles2_fixed", "spokes2"];
    let mut out: Vec<(String, Space)> = fixed_spaces()
        .into_iter()
        .filter(|(n, _)| keep.contains(&n.as_str()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7);
    for i in 0..4 {
        out.push((format!("random{i}"), random_space(&mut rng, (3, 6), (1, 2), 8)));
    }
    out
}

fn covers(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x8);
    for (name, s) in cover_spaces(cfg) {
        let (g, t) = (&s.graph, &s.grading);
        let ss = SpanningStructure::new(g, t)?;
        let base = g.vertices().next().unwrap();
        let ball = CoverBall::new(g, &ss, base, cfg.cover_radius)?;
        for _ in 0..30 {
            rec.case();
            let l = sample_loop(g, base, &mut rng, cfg.max_loop_len.min(cfg.cover_radius))?;
            let Some(lift) = rec.ok(&name, ball.lift_path(l.path(), ball.root())) else { continue };
            let e = is_essential_with(g, t, &ss, &l, base)?;
            rec.check(lift.is_closed() != e.essential, || {
                format!("{name}: lift closes = {} but essential = {}", lift.is_closed(), e.essential)
            });
            let projected: Vec<VertexId> = lift.vertices.iter().map(|&i| ball.project(i)).collect();
            rec.check(projected == l.path().vertices(g)?, || format!("{name}: p∘lift differs"));
        }
        let d = g.distance_table()?;
        let n = ball.len();
        let full = n <= 150;
        let mut matrix: Vec<Vec<Rational>> = Vec::new();
        for a in 0..n {
            let row = ball.lifted_distances_from(a)?;
            for (b, &x) in row.iter().enumerate() {
                rec.case();
                if a == b {
                    rec.check(x.is_zero(), || format!("{name}: d~(a,a) = {x}"));
                } else {
                    rec.check(x.is_positive(), || format!("{name}: d~ vanishes off the diagonal"));
                }
                let below = d.get(ball.project(a), ball.project(b))?;
                rec.check(x >= below, || format!("{name}: d~ = {x} < d∘p = {below}"));
            }
            if full {
                matrix.push(row);
            }
        }
        if full {
            for a in 0..n {
                for b in 0..n {
                    rec.check(matrix[a][b] == matrix[b][a], || format!("{name}: d~ asymmetric"));
                    for c in 0..n {
                        if matrix[a][c] > matrix[a][b] + matrix[b][c] {
                            rec.fail(format!("{name}: triangle inequality fails at {a},{b},{c}"));
                        }
                    }
                }
            }
        } else {
            for _ in 0..20_000 {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                let ab = ball.lifted_distance(a, b)?;
                rec.check(ab == ball.lifted_distance(b, a)?, || format!("{name}: d~ asymmetric"));
                let ac = ball.lifted_distance(a, c)?;
                let bc = ball.lifted_distance(b, c)?;
                rec.check(ac <= ab + bc, || {
                    format!("{name}: triangle inequality fails at {a},{b},{c}")
                });
            }
        }
    }
    Ok(())
}

/// Grade-preserving maps with injective piece assignment and injective
/// piece restrictions, built from the fixed spaces and random ones.
pub fn suite_maps(cfg: &SelftestConfig) -> Result<Vec<(String, GradedMap)>> {
    let spaces: BTreeMap<String, Space> = fixed_spaces().into_iter().collect();
    let sp = |n: &str| spaces[n].clone();
    let mut out: Vec<(String, GradedMap)> = Vec::new();
    let g2 = sp("g2");
    let k4 = sp("k4");
    let theta = sp("theta");
    out.push(("identity g2".into(), GradedMap::identity(&g2.graph, &g2.grading)?));
    out.push(("identity k4".into(), GradedMap::identity(&k4.graph, &k4.grading)?));
    out.push(("subdivide g2 e1".into(), mapgen::subdivide(&g2, EdgeId(1))?));
    out.push(("subdivide g2 bridge".into(), mapgen::subdivide(&g2, EdgeId(4))?));
    out.push(("subdivide k4 e2".into(), mapgen::subdivide(&k4, EdgeId(2))?));
    out.push(("g2 grow P1".into(), mapgen::attach_triangle(&g2, PieceId(1), VertexId(1))?));
    out.push(("g2 into three pieces".into(), mapgen::attach_bridged_triangle(&g2, VertexId(6))?));
    for (e, c) in mapgen::twistable(&theta)? {
        out.push(("twist theta".into(), mapgen::nielsen_twist(&theta, e, c, 1)?));
        out.push(("twist theta inverse square".into(), mapgen::nielsen_twist(&theta, e, c, -2)?));
    }
    for (i, (e, c)) in mapgen::twistable(&k4)?.into_iter().enumerate() {
        let sub = mapgen::subdivide(&k4, EdgeId(1))?;
        let mid = mapgen::target_space(&sub);
        let (e2, c2) = mapgen::twistable(&mid)?[0];
        out.push((format!("twist k4 {i}"), mapgen::nielsen_twist(&k4, e, c, 2)?));
        out.push((
            format!("subdivide then twist k4 {i}"),
            mapgen::compose(&sub, &mapgen::nielsen_twist(&mid, e2, c2, -1)?)?,
        ));
    }
    let circles = sp("circles2_fixed");
    out.push((
        "circles grow the point at 0".into(),
        mapgen::attach_triangle(&circles, PieceId(1), VertexId(1))?,
    ));
    out.push(("wedge arc subdivide arc".into(), mapgen::subdivide(&sp("wedge_arc"), EdgeId(4))?));
    let spokes = sp("spokes2");
    out.push(("spokes grow".into(), mapgen::attach_triangle(&spokes, PieceId(2), VertexId(4))?));
    let pendant = sp("g2_pendant_point");
    out.push((
        "pendant point grows".into(),
        mapgen::attach_triangle(&pendant, PieceId(3), VertexId(7))?,
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6);
    let mut i = 0;
    while out.len() < cfg.maps {
        let s = random_space(&mut rng, (4, 8), (2, 5), 13);
        let f = random_map(&s, &mut rng)?;
        let Some(f) = f else { continue };
        // Optionally follow with a second construction on the target.
        let f = if rng.gen_bool(0.5) {
            match random_map(&mapgen::target_space(&f), &mut rng)? {
                Some(g) => mapgen::compose(&f, &g)?,
                None => f,
            }
        } else {
            f
        };
        out.push((format!("random map {i}"), f));
        i += 1;
    }
    Ok(out)
}

fn random_map(s: &Space, rng: &mut ChaCha8Rng) -> Result<Option<GradedMap>> {
    let edges: Vec<EdgeId> = s.graph.edge_ids().collect();
    let pieces: Vec<&Piece> = s.grading.pieces().iter().collect();
    let twists = mapgen::twistable(s)?;
    Ok(match rng.gen_range(0..4) {
        0 => Some(mapgen::subdivide(s, pick(rng, &edges))?),
        1 if !pieces.is_empty() => {
            let p = pieces[rng.gen_range(0..pieces.len())];
            let at = *p.vertices.iter().next().unwrap();
            Some(mapgen::attach_triangle(s, p.id, at)?)
        }
        2 => {
            let vs = vertices_of(&s.graph);
            Some(mapgen::attach_bridged_triangle(s, pick(rng, &vs))?)
        }
        3 if !twists.is_empty() => {
            let (e, c) = pick(rng, &twists);
            let power = pick(rng, &[-2, -1, 1, 2]);
            Some(mapgen::nielsen_twist(s, e, c, power)?)
        }
        _ => None,
    })
}

fn injectivity_maps(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5);
    let maps = suite_maps(cfg)?;
    rec.check(maps.len() >= cfg.maps, || format!("only {} maps built", maps.len()));
    for (name, f) in &maps {
        let ss = SpanningStructure::new(&f.source, &f.source_grading)?;
        let vs = vertices_of(&f.source);
        let mut samples = Vec::with_capacity(cfg.loops_per_map);
        while samples.len() < cfg.loops_per_map {
            let base = pick(&mut rng, &vs);
            match sample_essential_loop(&f.source, &ss, base, &mut rng, 6)? {
                Some(l) => samples.push(l),
                None => break,
            }
        }
        rec.cases += samples.len();
        let Some(report) = rec.ok(name, check_pi1_injectivity(f, &samples)) else { continue };
        rec.check(report.pieces_injective, || format!("{name}: a piece restriction is not injective"));
        rec.check(report.loops_checked == samples.len() && !samples.is_empty(), || {
            format!("{name}: checked {} of {} loops", report.loops_checked, samples.len())
        });
        rec.check(report.counterexamples.is_empty(), || {
            format!("{name}: essential loops died: {:?}", report.counterexamples)
        });
        // Structure-blind confirmation on the target.
        for l in &samples {
            let image = f.apply_loop(l)?;
            let alive = oracle_is_essential(&f.target, &image, image.base())?;
            rec.check(alive, || format!("{name}: oracle finds {} dies", signed(l)));
        }
    }
    Ok(())
}

fn wedge_arc(_cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    let w = gen::wedge_arc()?;
    let base = &w.space;
    let cover = w.cover.as_ref().expect("wedge arc carries its cover");
    rec.case();
    rec.check(base.graph.cycle_rank()? == 2, || "base rank is not 2".into());
    rec.case();
    let rank = cover.graph.cycle_rank()?;
    rec.check(rank == 3, || format!("cover rank {rank}"));
    rec.case();
    let cg = canonical_grading(&cover.graph)?;
    rec.check(
        cg.pieces().len() == 1 && cg.pieces()[0].edges.len() == cover.graph.edge_count(),
        || format!("cover grading has {} pieces", cg.pieces().len()),
    );
    for p in base.grading.pieces() {
        rec.case();
        let pre: BTreeSet<EdgeId> = cover
            .edge_projection
            .iter()
            .filter(|(_, b)| p.edges.contains(b))
            .map(|(&e, _)| e)
            .collect();
        rec.check(cover.graph.is_simple_cycle(&pre) && pre.len() == 2 * p.edges.len(), || {
            format!("preimage of {} is not one circle", p.id)
        });
    }
    for e in cover.graph.edges() {
        rec.case();
        let b = base.graph.edge(cover.edge_projection[&e.id]).unwrap();
        rec.check(
            cover.vertex_projection[&e.u] == b.u && cover.vertex_projection[&e.v] == b.v,
            || format!("cover edge {} does not lie over {}", e.id, b.id),
        );
    }
    Ok(())
}

fn tree_efficient(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x2);
    for (name, s) in suite_spaces(cfg) {
        let (g, t) = (&s.graph, &s.grading);
        let ss = SpanningStructure::new(g, t)?;
        for l in sampled_loops(&s, &ss, &mut rng, 10, cfg.max_loop_len)? {
            rec.case();
            let r = tree_efficient_reduce(g, t, &l)?;
            let (w0, w1) = (loop_word(g, &ss, &l, l.base())?, loop_word(g, &ss, &r, r.base())?);
            rec.check(w0 == w1, || format!("{name}: reduction changed {w0} to {w1}"));
            let piece_steps = |x: &EdgeLoop| {
                x.steps()
                    .iter()
                    .filter(|st| t.piece_of_edge(st.edge).is_some())
                    .copied()
                    .collect::<Vec<_>>()
            };
            rec.check(piece_steps(&l) == piece_steps(&r), || {
                format!("{name}: piece traversals changed in {}", signed(&l))
            });
            let backtrack = r.steps().windows(2).any(|w| {
                t.piece_of_edge(w[0].edge).is_none() && w[1] == w[0].reversed()
            });
            rec.check(!backtrack, || format!("{name}: tree run not reduced in {}", signed(&r)));
            // Inserting a backtrack anywhere leaves the word unchanged.
            let vs = l.path().vertices(g)?;
            let at = rng.gen_range(0..vs.len());
            let inc = g.incident(vs[at]);
            if !inc.is_empty() {
                let tr = inc[rng.gen_range(0..inc.len())];
                let mut steps = l.steps().to_vec();
                steps.splice(at..at, [tr, tr.reversed()]);
                let l2 = EdgeLoop::new(g, crate::graph::EdgePath::new(l.base(), steps))?;
                let w2 = loop_word(g, &ss, &l2, l2.base())?;
                rec.check(w2 == w0, || format!("{name}: inserted backtrack changed the word"));
            }
        }
    }
    Ok(())
}

fn string_light(cfg: &SelftestConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1);
    let mut spaces: Vec<(String, Space)> = fixed_spaces()
        .into_iter()
        .filter(|(n, _)| ["spokes2", "spokes3", "circles2_fixed", "circles3_shrinking", "g2"].contains(&n.as_str()))
        .collect();
    for k in [4, 6] {
        spaces.push((
            format!("circles{k}_shrinking"),
            gen::shrinking_circles(k, CircleSize::Shrinking)?.space,
        ));
    }
    for (name, s) in spaces {
        rec.case();
        let Some(wc) = rec.ok(&name, string_light_collapse(&s.graph, &s.grading)) else { continue };
        let ss = SpanningStructure::new(&s.graph, &s.grading)?;
        let vs = vertices_of(&s.graph);
        let mut samples = Vec::new();
        for _ in 0..50 {
            let base = pick(&mut rng, &vs);
            if let Some(l) = sample_essential_loop(&s.graph, &ss, base, &mut rng, 5)? {
                samples.push(l);
            }
        }
        rec.cases += samples.len();
        let report = wc.check(&samples)?;
        rec.check(report.retractions_factor, || format!("{name}: retractions do not factor"));
        rec.check(report.counterexamples.is_empty(), || {
            format!("{name}: collapse kills {:?}", report.counterexamples)
        });
        let wedge_vertices = wc.map.target.vertex_count();
        let piece_vertices: usize = s.grading.non_degenerate().map(|p| p.vertices.len() - 1).sum();
        rec.check(wedge_vertices == piece_vertices + 1, || {
            format!("{name}: wedge has {wedge_vertices} vertices")
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SelftestConfig {
        SelftestConfig {
            graphs: 10,
            loops_per_graph: 10,
            quotient_random: 5,
            suite_random: 3,
            cover_radius: 6,
            maps: 22,
            loops_per_map: 10,
            ..SelftestConfig::default()
        }
    }

    #[test]
    fn every_suite_passes_at_small_scale() {
        let summary = run(&small());
        for s in &summary.suites {
            assert!(s.passed, "{}: {:?}", s.name, s.failures);
        }
        assert!(run_suite("nope", &small()).is_none());
    }

    #[test]
    fn fixed_and_coarsened_spaces_are_valid() {
        for (name, s) in suite_spaces(&small()) {
            crate::grading::validate_grading(&s.graph, &s.grading)
                .unwrap_or_else(|v| panic!("{name}: {v}"));
        }
    }
}
