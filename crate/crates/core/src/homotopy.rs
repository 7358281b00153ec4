//! Fundamental-group computations: reading loops as free-product words over
//! the pieces, the essential-loop test with a finite witness, and coherent
//! sequences of projections.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grading::{validate_grading, PieceId, TreeGrading};
use crate::graph::{EdgeId, EdgeLoop, EdgePath, Traversal, VertexId, WeightedGraph};
use crate::quotient::metric_quotient;

/// A generator of `π1`: a non-tree edge, oriented from `u` to `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub piece: PieceId,
    /// 1-based position among the generators of `piece`, by edge id.
    pub index: usize,
    pub edge: EdgeId,
}

/// Spanning trees per piece plus the tree portion, and the generator
/// registry they induce.
#[derive(Clone, Debug)]
pub struct SpanningStructure {
    pub piece_trees: BTreeMap<PieceId, BTreeSet<EdgeId>>,
    pub tree_portion: BTreeSet<EdgeId>,
    pub tree: BTreeSet<EdgeId>,
    pub generators: BTreeMap<EdgeId, Generator>,
}

impl SpanningStructure {
    pub fn new(g: &WeightedGraph, t: &TreeGrading) -> Result<Self> {
        validate_grading(g, t)?;
        let mut piece_trees: BTreeMap<PieceId, BTreeSet<EdgeId>> =
            t.pieces().iter().map(|p| (p.id, BTreeSet::new())).collect();
        let in_pieces = g.spanning_forest(|e| t.piece_of_edge(e.id).is_some());
        for &e in &in_pieces {
            let owner = t.piece_of_edge(e).unwrap();
            piece_trees.get_mut(&owner).unwrap().insert(e);
        }
        let tree_portion = t.tree_edges(g);
        let tree: BTreeSet<EdgeId> = in_pieces.union(&tree_portion).copied().collect();
        if tree.len() + 1 != g.vertex_count() {
            return Err(Error::invariant(format!(
                "spanning structure has {} edges on {} vertices",
                tree.len(),
                g.vertex_count()
            )));
        }
        let mut generators = BTreeMap::new();
        let mut counts: BTreeMap<PieceId, usize> = BTreeMap::new();
        for e in g.edge_ids().filter(|e| !tree.contains(e)) {
            let piece = t
                .piece_of_edge(e)
                .ok_or_else(|| Error::invariant(format!("non-tree edge {e} lies in no piece")))?;
            let index = counts.entry(piece).or_default();
            *index += 1;
            generators.insert(
                e,
                Generator {
                    piece,
                    index: *index,
                    edge: e,
                },
            );
        }
        Ok(SpanningStructure {
            piece_trees,
            tree_portion,
            tree,
            generators,
        })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators_of(&self, piece: PieceId) -> impl Iterator<Item = &Generator> + '_ {
        self.generators.values().filter(move |g| g.piece == piece)
    }
}

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub edge: EdgeId,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Letter {
        Letter {
            edge: self.edge,
            inverse: !self.inverse,
        }
    }

    pub fn to_signed(self) -> i64 {
        Traversal {
            edge: self.edge,
            forward: !self.inverse,
        }
        .to_signed()
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "g{}^-1", self.edge.0)
        } else {
            write!(f, "g{}", self.edge.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syllable {
    pub piece: PieceId,
    /// Signed generator edge ids; `-e` is the inverse of `g_e`.
    pub letters: Vec<i64>,
}

/// Normal form in the free product of the pieces' fundamental groups.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FreeProductWord {
    pub syllables: Vec<Syllable>,
}

impl FreeProductWord {
    pub fn identity() -> Self {
        FreeProductWord::default()
    }

    /// Freely reduces `letters` and groups the result by owning piece.
    pub fn from_letters(letters: impl IntoIterator<Item = (PieceId, Letter)>) -> Self {
        let mut stack: Vec<(PieceId, Letter)> = Vec::new();
        for (p, l) in letters {
            if stack.last().is_some_and(|&(_, top)| top == l.inv()) {
                stack.pop();
            } else {
                stack.push((p, l));
            }
        }
        let mut syllables: Vec<Syllable> = Vec::new();
        for (p, l) in stack {
            match syllables.last_mut() {
                Some(s) if s.piece == p => s.letters.push(l.to_signed()),
                _ => syllables.push(Syllable {
                    piece: p,
                    letters: vec![l.to_signed()],
                }),
            }
        }
        FreeProductWord { syllables }
    }

    pub fn letters(&self) -> impl Iterator<Item = (PieceId, Letter)> + '_ {
        self.syllables.iter().flat_map(|s| {
            s.letters.iter().map(move |&x| {
                (
                    s.piece,
                    Letter {
                        edge: EdgeId(x.unsigned_abs() as u32),
                        inverse: x < 0,
                    },
                )
            })
        })
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn pieces(&self) -> BTreeSet<PieceId> {
        self.syllables.iter().map(|s| s.piece).collect()
    }

    /// The image under killing every factor outside `kept`.
    pub fn restrict(&self, kept: &BTreeSet<PieceId>) -> FreeProductWord {
        FreeProductWord::from_letters(self.letters().filter(|(p, _)| kept.contains(p)))
    }

    pub fn inverse(&self) -> FreeProductWord {
        let letters: Vec<_> = self.letters().collect();
        FreeProductWord::from_letters(letters.into_iter().rev().map(|(p, l)| (p, l.inv())))
    }
}

impl fmt::Display for FreeProductWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for s in &self.syllables {
            write!(f, "({}:", s.piece)?;
            for &x in &s.letters {
                if x < 0 {
                    write!(f, " g{}^-1", -x)?;
                } else {
                    write!(f, " g{x}")?;
                }
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn check_loop(g: &WeightedGraph, l: &EdgeLoop, base: VertexId) -> Result<()> {
    g.require_vertex(base)?;
    let vs = l.path().vertices(g)?;
    if vs.last() != Some(&l.base()) {
        return Err(Error::input("loop is not closed"));
    }
    Ok(())
}

/// Reads `l` against the spanning structure.
///
/// When `base` differs from the loop's own base point the loop is conjugated
/// by the in-tree path between them; in-tree paths cross no generator, so the
/// word is the same either way.
pub fn loop_word(
    g: &WeightedGraph,
    ss: &SpanningStructure,
    l: &EdgeLoop,
    base: VertexId,
) -> Result<FreeProductWord> {
    check_loop(g, l, base)?;
    Ok(FreeProductWord::from_letters(l.steps().iter().filter_map(
        |t| {
            ss.generators.get(&t.edge).map(|gen| {
                (
                    gen.piece,
                    Letter {
                        edge: t.edge,
                        inverse: !t.forward,
                    },
                )
            })
        },
    )))
}

/// Freely reduces every maximal run of tree-portion traversals; piece
/// traversals are kept verbatim. The result is path-homotopic to `l`.
pub fn tree_efficient_reduce(g: &WeightedGraph, t: &TreeGrading, l: &EdgeLoop) -> Result<EdgeLoop> {
    check_loop(g, l, l.base())?;
    let mut out: Vec<Traversal> = Vec::with_capacity(l.len());
    // Start of the current tree run inside `out`.
    let mut run_start = 0;
    for &step in l.steps() {
        if t.piece_of_edge(step.edge).is_some() {
            out.push(step);
            run_start = out.len();
        } else if out.len() > run_start && *out.last().unwrap() == step.reversed() {
            out.pop();
        } else {
            out.push(step);
        }
    }
    EdgeLoop::new(g, EdgePath::new(l.base(), out))
}

/// Outcome of the essential-loop test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Essentiality {
    pub essential: bool,
    /// Pieces surviving in the reduced word; `None` for inessential loops.
    pub witness: Option<BTreeSet<PieceId>>,
    pub word: FreeProductWord,
}

/// Decides whether `l` is essential. For an essential loop the witness is
/// the set of pieces in its normal form, and the result is cross-checked by
/// projecting to the quotient keeping exactly the witness (the word must
/// survive unchanged) and to the quotient keeping the other pieces (the word
/// must die).
pub fn is_essential(g: &WeightedGraph, t: &TreeGrading, l: &EdgeLoop, base: VertexId) -> Result<Essentiality> {
    let ss = SpanningStructure::new(g, t)?;
    is_essential_with(g, t, &ss, l, base)
}

pub fn is_essential_with(
    g: &WeightedGraph,
    t: &TreeGrading,
    ss: &SpanningStructure,
    l: &EdgeLoop,
    base: VertexId,
) -> Result<Essentiality> {
    let word = loop_word(g, ss, l, base)?;
    if word.is_identity() {
        return Ok(Essentiality {
            essential: false,
            witness: None,
            word,
        });
    }
    let witness = word.pieces();
    let projected = project_word(g, t, l, &witness)?;
    if projected != word {
        return Err(Error::invariant(format!(
            "projection to the witness changed the word: {word} became {projected}"
        )));
    }
    let others: BTreeSet<PieceId> = t.piece_ids().filter(|p| !witness.contains(p)).collect();
    let killed = project_word(g, t, l, &others)?;
    if !killed.is_identity() {
        return Err(Error::invariant(format!(
            "projection away from the witness left {killed}"
        )));
    }
    Ok(Essentiality {
        essential: true,
        witness: Some(witness),
        word,
    })
}

/// The word of `Γ_F ∘ l` read in `X_F`.
pub fn project_word(
    g: &WeightedGraph,
    t: &TreeGrading,
    l: &EdgeLoop,
    kept: &BTreeSet<PieceId>,
) -> Result<FreeProductWord> {
    let mq = metric_quotient(g, t, kept)?;
    let image = mq.map_loop(l)?;
    let ss = SpanningStructure::new(&mq.target, &mq.target_grading)?;
    loop_word(&mq.target, &ss, &image, image.base())
}

/// Structure-blind check: free reduction against a breadth-first spanning
/// tree rooted at `base`, ignoring any grading.
pub fn oracle_is_essential(g: &WeightedGraph, l: &EdgeLoop, base: VertexId) -> Result<bool> {
    check_loop(g, l, base)?;
    let mut seen = BTreeSet::from([base]);
    let mut tree = BTreeSet::new();
    let mut queue = VecDeque::from([base]);
    while let Some(v) = queue.pop_front() {
        for &t in g.incident(v) {
            let w = g.head(t);
            if seen.insert(w) {
                tree.insert(t.edge);
                queue.push_back(w);
            }
        }
    }
    let mut stack: Vec<Traversal> = Vec::new();
    for &t in l.steps() {
        if tree.contains(&t.edge) {
            continue;
        }
        if stack.last() == Some(&t.reversed()) {
            stack.pop();
        } else {
            stack.push(t);
        }
    }
    Ok(!stack.is_empty())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiLevel {
    pub pieces: BTreeSet<PieceId>,
    pub word: FreeProductWord,
}

/// The images of one loop in the quotients along an ascending filtration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiSequence {
    pub levels: Vec<PhiLevel>,
}

impl PhiSequence {
    /// Each level equals the next level with the new factors killed.
    pub fn is_coherent(&self) -> bool {
        self.levels
            .windows(2)
            .all(|w| w[1].word.restrict(&w[0].pieces) == w[0].word)
    }
}

pub fn phi(
    g: &WeightedGraph,
    t: &TreeGrading,
    l: &EdgeLoop,
    base: VertexId,
    filtration: &[BTreeSet<PieceId>],
) -> Result<PhiSequence> {
    check_loop(g, l, base)?;
    for w in filtration.windows(2) {
        if !w[0].is_subset(&w[1]) {
            return Err(Error::input(format!(
                "filtration is not ascending: {:?} is not contained in {:?}",
                w[0], w[1]
            )));
        }
    }
    let mut levels = Vec::with_capacity(filtration.len());
    for f in filtration {
        levels.push(PhiLevel {
            pieces: f.clone(),
            word: project_word(g, t, l, f)?,
        });
    }
    let seq = PhiSequence { levels };
    if !seq.is_coherent() {
        return Err(Error::invariant("projection sequence is not coherent"));
    }
    Ok(seq)
}

/// Parses a signed edge-id list into a loop, inferring the base from the
/// first step (`base` for the empty loop).
pub fn loop_from_signed(g: &WeightedGraph, signed: &[i64], base: VertexId) -> Result<EdgeLoop> {
    let steps = signed
        .iter()
        .map(|&x| Traversal::from_signed(x))
        .collect::<Result<Vec<_>>>()?;
    let p = EdgePath::from_steps(g, steps, base)?;
    EdgeLoop::new(g, p)
}

/// The loop at `base` realizing a word: for each letter, out along the tree,
/// across the generator edge, and back along the tree.
pub fn loop_of_word(
    g: &WeightedGraph,
    ss: &SpanningStructure,
    base: VertexId,
    letters: &[Letter],
) -> Result<EdgeLoop> {
    g.require_vertex(base)?;
    let tree_path = |a: VertexId, b: VertexId| {
        g.path_within(a, b, |e| ss.tree.contains(&e))
            .ok_or_else(|| Error::invariant("spanning tree does not span"))
    };
    let mut steps = Vec::new();
    for l in letters {
        if !ss.generators.contains_key(&l.edge) {
            return Err(Error::input(format!("{} is not a generator edge", l.edge)));
        }
        let t = Traversal {
            edge: l.edge,
            forward: !l.inverse,
        };
        steps.extend(tree_path(base, g.tail(t))?);
        steps.push(t);
        steps.extend(tree_path(g.head(t), base)?);
    }
    EdgeLoop::new(g, EdgePath::new(base, steps))
}

/// A loop realizing a random nonempty reduced word of at most `max_letters`
/// letters; essential by construction. `None` when the graph is a tree.
pub fn sample_essential_loop<R: rand::Rng + ?Sized>(
    g: &WeightedGraph,
    ss: &SpanningStructure,
    base: VertexId,
    rng: &mut R,
    max_letters: usize,
) -> Result<Option<EdgeLoop>> {
    let gens: Vec<EdgeId> = ss.generators.keys().copied().collect();
    if gens.is_empty() || max_letters == 0 {
        return Ok(None);
    }
    let n = rng.gen_range(1..=max_letters);
    let mut word: Vec<Letter> = Vec::with_capacity(n);
    while word.len() < n {
        let l = Letter {
            edge: gens[rng.gen_range(0..gens.len())],
            inverse: rng.gen_bool(0.5),
        };
        if word.last() != Some(&l.inv()) {
            word.push(l);
        }
    }
    loop_of_word(g, ss, base, &word).map(Some)
}

/// A random closed walk of at most `max_len` steps at `base`: a random walk
/// closed up by a fewest-edge path home.
pub fn sample_loop<R: rand::Rng + ?Sized>(
    g: &WeightedGraph,
    base: VertexId,
    rng: &mut R,
    max_len: usize,
) -> Result<EdgeLoop> {
    g.require_vertex(base)?;
    let mut walk_len = if max_len == 0 { 0 } else { rng.gen_range(1..=max_len) };
    loop {
        let mut steps = Vec::with_capacity(max_len);
        let mut cur = base;
        for _ in 0..walk_len {
            let inc = g.incident(cur);
            if inc.is_empty() {
                break;
            }
            let t = inc[rng.gen_range(0..inc.len())];
            steps.push(t);
            cur = g.head(t);
        }
        let home = g
            .path_within(cur, base, |_| true)
            .ok_or_else(|| Error::input("graph is disconnected"))?;
        if steps.len() + home.len() <= max_len || walk_len == 0 {
            steps.extend(home);
            return EdgeLoop::new(g, EdgePath::new(base, steps));
        }
        walk_len -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::canonical_grading;
    use crate::graph::build_graph;
    use crate::rational::Rational;

    fn g2() -> (WeightedGraph, TreeGrading) {
        let pairs = [(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 6), (6, 4)];
        let g = build_graph(
            1..=6,
            pairs
                .iter()
                .enumerate()
                .map(|(i, &(u, v))| (i as u32 + 1, u, v, Rational::ONE)),
        )
        .unwrap();
        let t = canonical_grading(&g).unwrap();
        (g, t)
    }

    fn lp(g: &WeightedGraph, xs: &[i64]) -> EdgeLoop {
        loop_from_signed(g, xs, VertexId(1)).unwrap()
    }

    const TRIANGLE: &[i64] = &[1, 2, 3];
    // Based at v3: P1 triangle, out to P2 and around, P1 reversed, P2 reversed.
    const COMMUTATOR: &[i64] = &[3, 1, 2, 4, 5, 6, 7, -4, -2, -1, -3, 4, -7, -6, -5, -4];

    #[test]
    fn structure_of_g2() {
        let (g, t) = g2();
        let ss = SpanningStructure::new(&g, &t).unwrap();
        assert_eq!(ss.tree.len(), 5);
        assert_eq!(ss.rank(), g.cycle_rank().unwrap());
        assert_eq!(ss.generators.keys().copied().collect::<Vec<_>>(), vec![EdgeId(3), EdgeId(7)]);
        assert_eq!(ss.generators[&EdgeId(7)].piece, PieceId(2));
    }

    #[test]
    fn words() {
        let (g, t) = g2();
        let ss = SpanningStructure::new(&g, &t).unwrap();
        assert!(loop_word(&g, &ss, &EdgeLoop::constant(VertexId(1)), VertexId(1))
            .unwrap()
            .is_identity());
        let w = loop_word(&g, &ss, &lp(&g, TRIANGLE), VertexId(1)).unwrap();
        assert_eq!(w.to_string(), "(P1: g3)");
        let c = loop_word(&g, &ss, &lp(&g, COMMUTATOR), VertexId(1)).unwrap();
        assert_eq!(c.to_string(), "(P1: g3)(P2: g7)(P1: g3^-1)(P2: g7^-1)");
        assert!(loop_word(&g, &ss, &lp(&g, TRIANGLE), VertexId(9)).is_err());
    }

    #[test]
    fn bridge_backtrack_cancels() {
        let (g, t) = g2();
        let l = lp(&g, &[1, 2, 4, -4, 3]);
        let r = tree_efficient_reduce(&g, &t, &l).unwrap();
        assert_eq!(r.path().to_signed(), vec![1, 2, 3]);
        let out_and_back = loop_from_signed(&g, &[4, -4], VertexId(3)).unwrap();
        assert!(tree_efficient_reduce(&g, &t, &out_and_back).unwrap().is_empty());
        let e = is_essential(&g, &t, &out_and_back, VertexId(3)).unwrap();
        assert!(!e.essential && e.witness.is_none());
    }

    #[test]
    fn essential_with_witness() {
        let (g, t) = g2();
        let e = is_essential(&g, &t, &lp(&g, TRIANGLE), VertexId(1)).unwrap();
        assert_eq!(e.witness, Some(BTreeSet::from([PieceId(1)])));
        let c = is_essential(&g, &t, &lp(&g, COMMUTATOR), VertexId(1)).unwrap();
        assert_eq!(c.witness, Some(BTreeSet::from([PieceId(1), PieceId(2)])));
        assert!(project_word(&g, &t, &lp(&g, COMMUTATOR), &BTreeSet::from([PieceId(1)]))
            .unwrap()
            .is_identity());
    }

    #[test]
    fn oracle_agrees_on_basics() {
        let (g, _) = g2();
        assert!(!oracle_is_essential(&g, &EdgeLoop::constant(VertexId(1)), VertexId(1)).unwrap());
        assert!(oracle_is_essential(&g, &lp(&g, TRIANGLE), VertexId(1)).unwrap());
        assert!(oracle_is_essential(&g, &lp(&g, COMMUTATOR), VertexId(1)).unwrap());
        assert!(!oracle_is_essential(&g, &lp(&g, &[1, 2, 3, -3, -2, -1]), VertexId(1)).unwrap());
    }

    #[test]
    fn phi_levels() {
        let (g, t) = g2();
        let filt = vec![
            BTreeSet::new(),
            BTreeSet::from([PieceId(1)]),
            BTreeSet::from([PieceId(1), PieceId(2)]),
        ];
        let tri = phi(&g, &t, &lp(&g, TRIANGLE), VertexId(1), &filt).unwrap();
        let shown: Vec<String> = tri.levels.iter().map(|l| l.word.to_string()).collect();
        assert_eq!(shown, vec!["1", "(P1: g3)", "(P1: g3)"]);
        let com = phi(&g, &t, &lp(&g, COMMUTATOR), VertexId(1), &filt).unwrap();
        assert!(com.levels[0].word.is_identity());
        assert!(com.levels[1].word.is_identity());
        assert_eq!(com.levels[2].word.syllables.len(), 4);
        let bad = vec![BTreeSet::from([PieceId(1)]), BTreeSet::new()];
        assert!(matches!(
            phi(&g, &t, &lp(&g, TRIANGLE), VertexId(1), &bad),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn sampled_loops() {
        use rand::SeedableRng;
        let (g, t) = g2();
        let ss = SpanningStructure::new(&g, &t).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let l = sample_loop(&g, VertexId(2), &mut rng, 12).unwrap();
            assert!(l.len() <= 12 && l.base() == VertexId(2));
            let e = sample_essential_loop(&g, &ss, VertexId(5), &mut rng, 4).unwrap().unwrap();
            assert!(oracle_is_essential(&g, &e, VertexId(5)).unwrap());
        }
        let w = [Letter { edge: EdgeId(3), inverse: true }];
        let l = loop_of_word(&g, &ss, VertexId(6), &w).unwrap();
        assert_eq!(loop_word(&g, &ss, &l, VertexId(6)).unwrap().to_string(), "(P1: g3^-1)");
        assert!(loop_of_word(&g, &ss, VertexId(6), &[Letter { edge: EdgeId(1), inverse: false }]).is_err());
    }

    #[test]
    fn word_helpers() {
        let (g, t) = g2();
        let ss = SpanningStructure::new(&g, &t).unwrap();
        let c = loop_word(&g, &ss, &lp(&g, COMMUTATOR), VertexId(1)).unwrap();
        let letters: Vec<_> = c.letters().chain(c.inverse().letters()).collect();
        assert!(FreeProductWord::from_letters(letters).is_identity());
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(
            json,
            r#"[{"piece":1,"letters":[3]},{"piece":2,"letters":[7]},{"piece":1,"letters":[-3]},{"piece":2,"letters":[-7]}]"#
        );
    }
}
