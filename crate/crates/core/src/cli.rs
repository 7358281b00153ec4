//! The `treegrade` command line.
//!
//! Every subcommand reads JSON (a file path, or `-` for standard input),
//! wraps one library operation and writes JSON, or DOT with `--dot`. Exit
//! codes: 0 on success, 2 on usage or validation errors, 1 when an internal
//! invariant fails.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::covers::CoverBall;
use crate::error::{from_json_value, Error, Result};
use crate::gen::{self, ChainLayout, CircleSize, SpaceSpec};
use crate::grading::{canonical_grading, parameterize, validate_grading, GradingDoc, PieceId, Subgraph, TreeGrading};
use crate::graph::{EdgeId, EdgeLoop, VertexId};
use crate::homotopy::{
    is_essential, loop_from_signed, loop_word, phi, sample_essential_loop, tree_efficient_reduce,
    SpanningStructure,
};
use crate::maps::{check_pi1_injectivity, string_light_collapse, GradedMap, MapDoc};
use crate::quotient::{metric_quotient, retraction};
use crate::rational::Rational;
use crate::selftest::{self, SelftestConfig};
use crate::space::Space;

pub const DEFAULT_SEED: u64 = 7;

#[derive(Parser, Debug)]
#[command(name = "treegrade", version, about = "Disjoint tree-gradings of finite weighted graphs")]
pub struct Cli {
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit DOT instead of JSON where the subcommand has a picture.
    #[arg(long, global = true)]
    dot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// Graph or `{graph, grading}` JSON; `-` reads standard input.
    input: PathBuf,
    /// Grading JSON replacing the input's grading.
    #[arg(long)]
    grading: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LoopArgs {
    /// Signed edge ids, comma separated (`3,-1,2`) or a JSON array.
    #[arg(long = "loop", allow_hyphen_values = true)]
    edges: String,
    /// Base point; defaults to the tail of the first edge.
    #[arg(long)]
    base: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical decomposition into pieces and tree portion.
    Decompose(Input),
    /// Checks the input grading.
    Validate(Input),
    /// Parameterization tree and quotient map.
    Parameterize(Input),
    /// Metric quotient keeping the listed pieces.
    Quotient {
        #[command(flatten)]
        input: Input,
        /// Piece ids to keep, comma separated; empty keeps none.
        #[arg(long, default_value = "")]
        keep: String,
    },
    /// Canonical retraction onto the subgraph spanned by `--edges`, or onto `--vertex`.
    Retract {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        edges: Option<String>,
        #[arg(long)]
        vertex: Option<u32>,
    },
    /// Tree-efficient form of a loop.
    Reduce {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        lp: LoopArgs,
    },
    /// Decides whether a loop is essential.
    Essential {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        lp: LoopArgs,
    },
    /// Words of a loop along a filtration of piece sets.
    Phi {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        lp: LoopArgs,
        /// Levels separated by `;`, ids by `,` (`1;1,2`), or a JSON array of arrays.
        #[arg(long)]
        filtration: String,
    },
    /// Grade preservation and injectivity evidence for a map.
    Checkmap {
        /// `{vertex_map, edge_map}` JSON.
        map: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Sampled essential loops of the source.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, env = "TREEGRADE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Collapses the wire of a string-light space to a wedge.
    CollapseWire {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, env = "TREEGRADE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Lifts a loop to a ball in the universal cover.
    Lift {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        lp: LoopArgs,
        #[arg(long, default_value_t = 8)]
        radius: usize,
    },
    /// Emits a generated space.
    Gen(GenArgs),
    /// Runs the oracle-equivalence suites.
    Selftest {
        #[arg(long, env = "TREEGRADE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        graphs: Option<usize>,
        /// Run only these suites.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenName {
    TriangleChain,
    ShrinkingCircles,
    WedgeArc,
    Random,
}

#[derive(Args, Debug)]
struct GenArgs {
    name: GenName,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value = "3")]
    circumference: Rational,
    #[arg(long, default_value = "1")]
    bridge: Rational,
    #[arg(long, value_enum, default_value = "chain")]
    layout: Layout,
    #[arg(long, value_enum, default_value = "fixed")]
    size: Size,
    #[arg(long, default_value_t = 8)]
    vertices: u32,
    #[arg(long, default_value_t = 10)]
    edges: u32,
    #[arg(long, default_value_t = 4)]
    length_bound: u32,
    #[arg(long, env = "TREEGRADE_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Layout {
    Chain,
    Spokes,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Size {
    Fixed,
    Shrinking,
}

enum Output {
    Json(Value),
    Text(String),
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let (result, code) = match execute(&cli) {
        Ok(pair) => pair,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    let text = match result {
        Output::Json(v) => serde_json::to_string_pretty(&v).expect("json values serialize") + "\n",
        Output::Text(t) => t,
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return 2;
    }
    code
}

fn read_text(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
    }
}

fn read_json(path: &PathBuf) -> Result<Value> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

fn load(input: &Input) -> Result<Space> {
    let mut space = Space::from_json(read_json(&input.input)?)?;
    if let Some(path) = &input.grading {
        let mut v = read_json(path)?;
        if let Some(inner) = v.get_mut("grading") {
            v = inner.take();
        }
        let doc: GradingDoc = from_json_value(v)?;
        space.grading = TreeGrading::from_doc(&space.graph, &doc)?;
    }
    Ok(space)
}

/// Loads and validates.
fn load_valid(input: &Input) -> Result<Space> {
    let s = load(input)?;
    validate_grading(&s.graph, &s.grading)?;
    Ok(s)
}

fn parse_ids(s: &str) -> Result<Vec<u32>> {
    let s = s.trim();
    if s.starts_with('[') {
        return from_json_value(serde_json::from_str(s)?);
    }
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::Input(format!("bad id `{x}`"))))
        .collect()
}

fn parse_signed(s: &str) -> Result<Vec<i64>> {
    let s = s.trim();
    if s.starts_with('[') {
        return from_json_value(serde_json::from_str(s)?);
    }
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::Input(format!("bad edge `{x}`"))))
        .collect()
}

fn piece_set(ids: Vec<u32>) -> BTreeSet<PieceId> {
    ids.into_iter().map(PieceId).collect()
}

fn parse_filtration(s: &str) -> Result<Vec<BTreeSet<PieceId>>> {
    let s = s.trim();
    if s.starts_with('[') {
        let levels: Vec<Vec<u32>> = from_json_value(serde_json::from_str(s)?)?;
        return Ok(levels.into_iter().map(piece_set).collect());
    }
    s.split(';').map(|lvl| Ok(piece_set(parse_ids(lvl)?))).collect()
}

/// The loop and the base point its word is read at.
fn parse_loop(s: &Space, lp: &LoopArgs) -> Result<(EdgeLoop, VertexId)> {
    let signed = parse_signed(&lp.edges)?;
    let fallback = match (lp.base, signed.first()) {
        (Some(b), _) => VertexId(b),
        (None, Some(&x)) => {
            let t = crate::graph::Traversal::from_signed(x)?;
            s.graph.require_edge(t.edge)?;
            s.graph.tail(t)
        }
        (None, None) => return Err(Error::input("the empty loop needs --base")),
    };
    s.graph.require_vertex(fallback)?;
    let l = loop_from_signed(&s.graph, &signed, fallback)?;
    Ok((l, fallback))
}

fn execute(cli: &Cli) -> Result<(Output, i32)> {
    let ok = |v: Value| Ok((Output::Json(v), 0));
    match &cli.command {
        Command::Decompose(input) => {
            let s = load(input)?;
            let t = canonical_grading(&s.graph)?;
            if cli.dot {
                return Ok((Output::Text(t.to_dot(&s.graph)), 0));
            }
            ok(json!({
                "graph": &s.graph,
                "grading": t.to_doc(),
                "tree_edges": t.tree_edges(&s.graph),
                "free_vertices": t.free_vertices(&s.graph),
                "cycle_rank": s.graph.cycle_rank()?,
            }))
        }
        Command::Validate(input) => {
            let s = load(input)?;
            match validate_grading(&s.graph, &s.grading) {
                Ok(()) => ok(json!({ "valid": true, "pieces": s.grading.pieces().len() })),
                Err(v) => Ok((
                    Output::Json(json!({ "valid": false, "violation": v.to_string() })),
                    2,
                )),
            }
        }
        Command::Parameterize(input) => {
            let s = load_valid(input)?;
            let p = parameterize(&s.graph, &s.grading)?;
            if cli.dot {
                return Ok((Output::Text(p.to_dot()), 0));
            }
            ok(serde_json::to_value(&p)?)
        }
        Command::Quotient { input, keep } => {
            let s = load_valid(input)?;
            let mq = metric_quotient(&s.graph, &s.grading, &piece_set(parse_ids(keep)?))?;
            if cli.dot {
                return Ok((Output::Text(mq.target_grading.to_dot(&mq.target)), 0));
            }
            ok(mq.to_json())
        }
        Command::Retract { input, edges, vertex } => {
            let s = load_valid(input)?;
            let y = match (edges, vertex) {
                (Some(es), None) => Subgraph::spanned(&s.graph, parse_ids(es)?.into_iter().map(EdgeId))?,
                (None, Some(v)) => {
                    let v = VertexId(*v);
                    s.graph.require_vertex(v)?;
                    Subgraph {
                        vertices: BTreeSet::from([v]),
                        edges: BTreeSet::new(),
                    }
                }
                _ => return Err(Error::input("give exactly one of --edges and --vertex")),
            };
            let r = retraction(&s.graph, &s.grading, &y)?;
            ok(json!({ "subspace": &r.subgraph, "map": &r.map }))
        }
        Command::Reduce { input, lp } => {
            let s = load_valid(input)?;
            let (l, base) = parse_loop(&s, lp)?;
            let r = tree_efficient_reduce(&s.graph, &s.grading, &l)?;
            let ss = SpanningStructure::new(&s.graph, &s.grading)?;
            ok(json!({
                "loop": r.path().to_signed(),
                "base": r.base(),
                "removed": l.len() - r.len(),
                "word": loop_word(&s.graph, &ss, &r, base)?.to_string(),
            }))
        }
        Command::Essential { input, lp } => {
            let s = load_valid(input)?;
            let (l, base) = parse_loop(&s, lp)?;
            let e = is_essential(&s.graph, &s.grading, &l, base)?;
            ok(json!({
                "essential": e.essential,
                "witness": e.witness,
                "word": e.word.to_string(),
                "syllables": e.word,
            }))
        }
        Command::Phi { input, lp, filtration } => {
            let s = load_valid(input)?;
            let (l, base) = parse_loop(&s, lp)?;
            let seq = phi(&s.graph, &s.grading, &l, base, &parse_filtration(filtration)?)?;
            let levels: Vec<Value> = seq
                .levels
                .iter()
                .map(|lv| json!({ "pieces": lv.pieces, "word": lv.word.to_string(), "syllables": lv.word }))
                .collect();
            ok(json!({ "coherent": seq.is_coherent(), "levels": levels }))
        }
        Command::Checkmap {
            map,
            source,
            target,
            samples,
            seed,
        } => {
            let src = Space::from_json(read_json(source)?)?;
            let tgt = Space::from_json(read_json(target)?)?;
            let doc: MapDoc = from_json_value(read_json(map)?)?;
            let f = GradedMap::from_doc(src.graph, src.grading, tgt.graph, tgt.grading, &doc)?;
            let loops = essential_samples(&f.source, &f.source_grading, *samples, *seed)?;
            let report = check_pi1_injectivity(&f, &loops)?;
            let code = if report.counterexamples.is_empty() { 0 } else { 2 };
            Ok((Output::Json(serde_json::to_value(&report)?), code))
        }
        Command::CollapseWire { input, samples, seed } => {
            let s = load_valid(input)?;
            let wc = string_light_collapse(&s.graph, &s.grading)?;
            let loops = essential_samples(&s.graph, &s.grading, *samples, *seed)?;
            let report = wc.check(&loops)?;
            if cli.dot {
                return Ok((Output::Text(wc.map.target_grading.to_dot(&wc.map.target)), 0));
            }
            let wedge = Space {
                graph: wc.map.target.clone(),
                grading: wc.map.target_grading.clone(),
            };
            ok(json!({
                "wedge": wedge.to_json(),
                "map": wc.map.to_doc(),
                "wire_vertices": wc.wire_vertices,
                "wire_edges": wc.wire_edges,
                "report": report,
            }))
        }
        Command::Lift { input, lp, radius } => {
            let s = load_valid(input)?;
            let (l, _) = parse_loop(&s, lp)?;
            let ss = SpanningStructure::new(&s.graph, &s.grading)?;
            let ball = CoverBall::new(&s.graph, &ss, l.base(), *radius)?;
            let lifted = ball.lift_path(l.path(), ball.root())?;
            if cli.dot {
                return Ok((Output::Text(ball.to_dot()), 0));
            }
            let points: Vec<_> = lifted.vertices.iter().map(|&i| ball.vertex(i)).collect();
            ok(json!({
                "radius": radius,
                "ball_vertices": ball.len(),
                "closed": lifted.is_closed(),
                "end": ball.vertex(lifted.end()),
                "lifted_distance": ball.lifted_distance(lifted.start(), lifted.end())?,
                "path": points,
            }))
        }
        Command::Gen(a) => {
            let spec = match a.name {
                GenName::TriangleChain => SpaceSpec::TriangleChain {
                    k: a.k,
                    circumference: a.circumference,
                    bridge: a.bridge,
                    layout: match a.layout {
                        Layout::Chain => ChainLayout::Chain,
                        Layout::Spokes => ChainLayout::Spokes,
                    },
                },
                GenName::ShrinkingCircles => SpaceSpec::ShrinkingCircles {
                    k: a.k,
                    size: match a.size {
                        Size::Fixed => CircleSize::Fixed,
                        Size::Shrinking => CircleSize::Shrinking,
                    },
                },
                GenName::WedgeArc => SpaceSpec::WedgeArc,
                GenName::Random => SpaceSpec::Random {
                    seed: a.seed,
                    vertices: a.vertices,
                    edges: a.edges,
                    length_bound: a.length_bound,
                },
            };
            let g = gen::generate(&spec)?;
            if cli.dot {
                return Ok((Output::Text(g.space.grading.to_dot(&g.space.graph)), 0));
            }
            ok(g.to_json())
        }
        Command::Selftest { seed, graphs, suites } => {
            let mut cfg = SelftestConfig {
                seed: *seed,
                ..SelftestConfig::default()
            };
            if let Some(n) = graphs {
                cfg.graphs = *n;
            }
            let summary = if suites.is_empty() {
                selftest::run(&cfg)
            } else {
                let mut results = Vec::new();
                for name in suites {
                    results.push(
                        selftest::run_suite(name, &cfg)
                            .ok_or_else(|| Error::Input(format!("unknown suite `{name}`")))?,
                    );
                }
                selftest::Summary {
                    seed: cfg.seed,
                    passed: results.iter().all(|r| r.passed),
                    suites: results,
                }
            };
            let code = if summary.passed { 0 } else { 1 };
            Ok((Output::Json(serde_json::to_value(&summary)?), code))
        }
    }
}

fn essential_samples(
    g: &crate::graph::WeightedGraph,
    t: &TreeGrading,
    count: usize,
    seed: u64,
) -> Result<Vec<EdgeLoop>> {
    validate_grading(g, t)?;
    let ss = SpanningStructure::new(g, t)?;
    let vs: Vec<VertexId> = g.vertices().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..count {
        let base = vs[i % vs.len()];
        match sample_essential_loop(g, &ss, base, &mut rng, 6)? {
            Some(l) => out.push(l),
            None => break,
        }
    }
    Ok(out)
}
