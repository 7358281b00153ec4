//! Worked examples on small spaces. Expected values come from the brute-force
//! oracles in `common` or from direct hand computation on the named graphs.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use treegrade::covers::CoverBall;
use treegrade::folding::free_hom_injective;
use treegrade::gen::{self, ChainLayout, CircleSize};
use treegrade::grading::{
    canonical_grading, expansion, graded_subspace, parameterize, validate_grading, InducedKind, Piece,
    Subgraph,
};
use treegrade::graph::{path_diameter, EdgePath};
use treegrade::homotopy::{
    is_essential, loop_from_signed, oracle_is_essential, phi, project_word, tree_efficient_reduce,
    SpanningStructure,
};
use treegrade::maps::{check_grade_preserving, check_pi1_injectivity, induced_tree_map, GradedMap, MapDoc};
use treegrade::quotient::{bonding_map, chain_pseudometric_oracle, identification, metric_quotient, retraction};
use treegrade::{mapgen, PieceId, Rational, Traversal, TreeGrading};

fn p(x: u32) -> PieceId {
    PieceId(x)
}

fn set(ids: &[u32]) -> BTreeSet<PieceId> {
    ids.iter().map(|&x| PieceId(x)).collect()
}

fn r(n: i64) -> Rational {
    Rational::from(n)
}

const TRIANGLE_LOOP: [i64; 3] = [1, 2, 3];
const COMMUTATOR: [i64; 16] = [3, 1, 2, 4, 5, 6, 7, -4, -2, -1, -3, 4, -7, -6, -5, -4];

fn g2_graded() -> (treegrade::WeightedGraph, TreeGrading) {
    let g = g2();
    let t = canonical_grading(&g).unwrap();
    (g, t)
}

#[test]
fn g2_distance_matches_simple_path_enumeration() {
    let g = g2();
    assert_eq!(brute_distance(&g, v(1), v(5)), Some(r(3)));
    for a in g.vertices() {
        for b in g.vertices() {
            assert_eq!(Some(g.distance(a, b).unwrap()), brute_distance(&g, a, b));
        }
    }
}

#[test]
fn triangle_traversal_has_diameter_one() {
    let g = g2();
    let path = EdgePath::new(v(1), [1, 2, 3].map(|x| Traversal::forward(e(x))).to_vec());
    assert_eq!(path_diameter(&g, &path).unwrap(), r(1));
}

#[test]
fn g2_bridge_rank_and_pieces() {
    let g = g2();
    assert_eq!(g.bridges(), brute_bridges(&g));
    assert_eq!(g.bridges(), BTreeSet::from([e(4)]));
    assert_eq!(g.cycle_rank().unwrap(), 2);
    let t = canonical_grading(&g).unwrap();
    let pieces: BTreeSet<BTreeSet<_>> = t.pieces().iter().map(|p| p.edges.clone()).collect();
    assert_eq!(pieces, brute_piece_edges(&g));
    assert_eq!(t.tree_edges(&g), BTreeSet::from([e(4)]));
}

#[test]
fn degenerate_piece_on_pendant_vertex_is_valid() {
    let g = unit_graph(7, &[(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 6), (6, 4), (5, 7)]);
    let mut pieces = canonical_grading(&g).unwrap().pieces().to_vec();
    pieces.push(Piece::degenerate(p(3), v(7)));
    assert!(validate_grading(&g, &TreeGrading::new(pieces)).is_ok());
}

#[test]
fn chain_parameterizes_to_a_path() {
    for k in 1..=4u32 {
        let s = gen::triangle_chain(k, r(3), r(1), ChainLayout::Chain).unwrap().space;
        let pz = parameterize(&s.graph, &s.grading).unwrap();
        assert_eq!(pz.tree.vertex_count(), k as usize);
        assert_eq!(pz.tree.edge_count(), k as usize - 1);
        assert_eq!(pz.marked().len(), k as usize);
        let degrees: Vec<usize> = pz.tree.vertices().map(|x| pz.tree.incident(x).len()).collect();
        assert!(degrees.iter().all(|&d| d <= 2));
    }
}

#[test]
fn subspace_gradings_of_g2() {
    let (g, t) = g2_graded();
    // Triangle 1 with the bridge and v4.
    let y = Subgraph::spanned(&g, [1, 2, 3, 4].map(e)).unwrap();
    let sub = graded_subspace(&g, &t, &y).unwrap();
    assert!(sub.is_sectional());
    assert_eq!(sub.kinds[&p(1)], InducedKind::Full);
    assert_eq!(sub.kinds[&p(2)], InducedKind::Degenerate);
    assert_eq!(sub.grading.piece(p(2)).unwrap().vertices, BTreeSet::from([v(4)]));

    // Triangle 1 minus an edge, with the bridge.
    let y = Subgraph::spanned(&g, [1, 2, 4].map(e)).unwrap();
    let bad = graded_subspace(&g, &t, &y).unwrap();
    assert!(!bad.is_sectional());
    assert_eq!(bad.kinds[&p(1)], InducedKind::Partial);

    let grown = expansion(&g, &t, &sub, &set(&[2])).unwrap();
    assert_eq!(grown.subgraph, Subgraph::whole(&g));
    assert!(grown.is_full());
    assert_eq!(grown.grading.piece_ids().collect::<BTreeSet<_>>(), set(&[1, 2]));
}

#[test]
fn quotient_distances_match_chain_oracle() {
    let (g, t) = g2_graded();
    let mq = metric_quotient(&g, &t, &set(&[1])).unwrap();
    let y2 = mq.gamma[&v(5)];
    assert_eq!(mq.gamma[&v(4)], y2);
    assert_eq!(mq.target.distance(mq.gamma[&v(1)], y2).unwrap(), r(2));
    let classes = identification(&g, &t, &set(&[1]));
    assert_eq!(chain_pseudometric_oracle(&g, &classes, v(1), v(6)).unwrap(), r(2));
    assert!(mq.is_non_expansive().unwrap());
}

#[test]
fn bonding_then_collapse_equals_direct_collapse() {
    let (g, t) = g2_graded();
    let upper = metric_quotient(&g, &t, &set(&[1])).unwrap();
    let bond = bonding_map(&upper, &set(&[])).unwrap();
    let direct = metric_quotient(&g, &t, &set(&[])).unwrap();
    for x in g.vertices() {
        assert_eq!(bond.gamma[&upper.gamma[&x]], direct.gamma[&x]);
    }
    assert_eq!(bond.target, direct.target);
}

#[test]
fn retraction_onto_first_triangle() {
    let (g, t) = g2_graded();
    let y = Subgraph::of_piece(t.piece(p(1)).unwrap());
    let rt = retraction(&g, &t, &y).unwrap();
    assert_eq!(rt.map[&v(5)], v(3));
    assert_eq!(rt.map[&v(4)], v(3));
    assert_eq!(rt.map[&v(1)], v(1));
}

#[test]
fn tree_efficient_reduce_shortens_bridge_runs_only() {
    let (g, t) = g2_graded();
    // Around P1, out and back over the bridge twice, around P2, home.
    let l = loop_from_signed(&g, &[1, 2, 4, -4, 4, 5, 6, 7, -4, 3], v(1)).unwrap();
    let red = tree_efficient_reduce(&g, &t, &l).unwrap();
    assert_eq!(red.path().to_signed(), vec![1, 2, 4, 5, 6, 7, -4, 3]);
    let piece_steps = |x: &treegrade::EdgeLoop| -> Vec<i64> {
        x.path()
            .to_signed()
            .into_iter()
            .filter(|&s| s.unsigned_abs() != 4)
            .collect()
    };
    assert_eq!(piece_steps(&l), piece_steps(&red));
    assert_eq!(dfs_tree_word(&g, l.steps()), dfs_tree_word(&g, red.steps()));
}

#[test]
fn triangle_and_commutator_words() {
    let (g, t) = g2_graded();
    let ss = SpanningStructure::new(&g, &t).unwrap();
    assert_eq!(ss.rank(), 2);
    let tri = loop_from_signed(&g, &TRIANGLE_LOOP, v(1)).unwrap();
    let e1 = is_essential(&g, &t, &tri, v(1)).unwrap();
    assert!(e1.essential);
    assert_eq!(e1.witness, Some(set(&[1])));
    assert_eq!(e1.word.syllables.len(), 1);
    assert_eq!(e1.word.syllables[0].piece, p(1));
    assert_eq!(e1.word.syllables[0].letters.len(), 1);
    assert!(!dfs_tree_word(&g, tri.steps()).is_empty());

    let com = loop_from_signed(&g, &COMMUTATOR, v(3)).unwrap();
    let e2 = is_essential(&g, &t, &com, v(3)).unwrap();
    assert!(e2.essential);
    assert_eq!(e2.witness, Some(set(&[1, 2])));
    assert_eq!(e2.word.to_string(), "(P1: g3)(P2: g7)(P1: g3^-1)(P2: g7^-1)");
    assert!(project_word(&g, &t, &com, &set(&[1])).unwrap().is_identity());
    assert!(!dfs_tree_word(&g, com.steps()).is_empty());
    assert!(oracle_is_essential(&g, &tri, v(1)).unwrap());
}

#[test]
fn phi_sequences() {
    let (g, t) = g2_graded();
    let filt = [set(&[]), set(&[1]), set(&[1, 2])];
    let tri = loop_from_signed(&g, &TRIANGLE_LOOP, v(1)).unwrap();
    let words: Vec<String> = phi(&g, &t, &tri, v(1), &filt)
        .unwrap()
        .levels
        .iter()
        .map(|l| l.word.to_string())
        .collect();
    assert_eq!(words, ["1", "(P1: g3)", "(P1: g3)"]);
    let com = loop_from_signed(&g, &COMMUTATOR, v(3)).unwrap();
    let seq = phi(&g, &t, &com, v(3), &filt).unwrap();
    assert!(seq.levels[0].word.is_identity());
    assert!(seq.levels[1].word.is_identity());
    assert_eq!(seq.levels[2].word.syllables.len(), 4);
    assert!(seq.is_coherent());
}

fn fold_map() -> GradedMap {
    let (g, t) = g2_graded();
    let h = unit_graph(3, &[(1, 2), (2, 3), (3, 1)]);
    let s = canonical_grading(&h).unwrap();
    let doc: MapDoc = serde_json::from_str(
        r#"{"vertex_map":{"1":1,"2":2,"3":3,"4":3,"5":1,"6":2},
            "edge_map":{"1":[1],"2":[2],"3":[3],"4":[],"5":[3],"6":[1],"7":[2]}}"#,
    )
    .unwrap();
    GradedMap::from_doc(g, t, h, s, &doc).unwrap()
}

#[test]
fn folding_g2_onto_one_triangle() {
    let f = fold_map();
    let rep = check_grade_preserving(&f).unwrap();
    assert!(!rep.injective);
    assert_eq!(rep.assignment, BTreeMap::from([(p(1), p(1)), (p(2), p(1))]));
    // The bridge collapses, so the tree map sends both piece points together.
    let tm = induced_tree_map(&f).unwrap();
    assert_eq!(tm.map.values().collect::<BTreeSet<_>>().len(), 1);
    assert!(f.edge_map[&e(4)].is_empty());
}

#[test]
fn free_hom_injectivity_examples() {
    // ab, ba generate a rank-2 subgroup.
    assert!(free_hom_injective(2, &[vec![1, 2], vec![2, 1]]).unwrap());
    assert_eq!(kernel_element(2, &[vec![1, 2], vec![2, 1]], 6), None);
    // a, a^2 do not.
    assert!(!free_hom_injective(2, &[vec![1], vec![1, 1]]).unwrap());
    assert!(kernel_element(2, &[vec![1], vec![1, 1]], 4).is_some());
}

#[test]
fn g2_embeds_in_a_longer_chain() {
    let (g, t) = g2_graded();
    let big = gen::triangle_chain(4, r(3), r(1), ChainLayout::Chain).unwrap().space;
    let f = GradedMap::new(
        g.clone(),
        t.clone(),
        big.graph.clone(),
        big.grading.clone(),
        g.vertices().map(|x| (x, x)).collect(),
        g.edges()
            .map(|x| (x.id, EdgePath::new(x.u, vec![Traversal::forward(x.id)])))
            .collect(),
    )
    .unwrap();
    let ss = SpanningStructure::new(&g, &t).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    let samples: Vec<_> = (0..100)
        .map(|i| {
            treegrade::homotopy::sample_essential_loop(&g, &ss, v(1 + i % 6), &mut rng, 6)
                .unwrap()
                .unwrap()
        })
        .collect();
    let rep = check_pi1_injectivity(&f, &samples).unwrap();
    assert!(rep.pieces_injective);
    assert_eq!(rep.loops_checked, 100);
    assert!(rep.counterexamples.is_empty());
    for l in &samples {
        let im = f.apply_loop(l).unwrap();
        assert!(!dfs_tree_word(&big.graph, im.steps()).is_empty());
    }
    // And a composite through a subdivision.
    let sub = mapgen::subdivide(&big, e(4)).unwrap();
    let both = mapgen::compose(&f, &sub).unwrap();
    assert!(check_pi1_injectivity(&both, &samples).unwrap().counterexamples.is_empty());
}

#[test]
fn spokes_and_circles_collapse_to_wedges() {
    let spokes = gen::triangle_chain(3, r(3), r(1), ChainLayout::Spokes).unwrap().space;
    let wc = treegrade::maps::string_light_collapse(&spokes.graph, &spokes.grading).unwrap();
    let wedge = &wc.map.target;
    assert_eq!(wedge.vertex_count(), 1 + 3 * 2);
    assert_eq!(wedge.edge_count(), 9);
    assert_eq!(wedge.cycle_rank().unwrap(), 3);
    assert!(wc.retractions_factor().unwrap());

    let circles = gen::shrinking_circles(3, CircleSize::Shrinking).unwrap();
    let s = &circles.space;
    let wc = treegrade::maps::string_light_collapse(&s.graph, &s.grading).unwrap();
    assert_eq!(wc.wire_vertices, (1..=4).map(v).collect());
    assert_eq!(wc.wire_edges, (1..=3).map(e).collect());
    assert!(wc.retractions_factor().unwrap());
    let ss = SpanningStructure::new(&s.graph, &s.grading).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
    let samples: Vec<_> = (0..40)
        .filter_map(|i| {
            treegrade::homotopy::sample_essential_loop(&s.graph, &ss, v(1 + i % 13), &mut rng, 5).unwrap()
        })
        .collect();
    assert!(wc.check(&samples).unwrap().counterexamples.is_empty());
}

#[test]
fn shrinking_circle_diameters_halve_circumference() {
    let s = gen::shrinking_circles(3, CircleSize::Shrinking).unwrap().space;
    let d = s.graph.distance_table().unwrap();
    let mut last = None;
    for n in 1..=3i64 {
        let piece = s.grading.piece(p(n as u32 + 1)).unwrap();
        let diam = d.diameter(&piece.vertices).unwrap();
        assert_eq!(diam, Rational::new(1, 2 * n as i128));
        if let Some(prev) = last {
            assert!(diam < prev);
        }
        last = Some(diam);
    }
    assert!(s.grading.piece(p(1)).unwrap().is_degenerate());
}

#[test]
fn wedge_arc_cover_is_one_piece() {
    let w = gen::wedge_arc().unwrap();
    assert_eq!(w.space.graph.cycle_rank().unwrap(), 2);
    let c = w.cover.unwrap();
    assert_eq!(c.graph.cycle_rank().unwrap(), 3);
    assert_eq!(c.graph.cycle_rank().unwrap(), 1 + 2 * (w.space.graph.cycle_rank().unwrap() - 1));
    assert!(brute_bridges(&c.graph).is_empty());
    let t = canonical_grading(&c.graph).unwrap();
    assert_eq!(t.pieces().len(), 1);
    assert_eq!(t.pieces()[0].edges.len(), 14);
}

#[test]
fn g2_cover_ball_matches_walk_enumeration() {
    let (g, t) = g2_graded();
    let ss = SpanningStructure::new(&g, &t).unwrap();
    let ball = CoverBall::new(&g, &ss, v(1), 4).unwrap();
    // Points of the universal cover are (endpoint, homotopy class of walk).
    let mut points = BTreeSet::new();
    let mut layer: Vec<Vec<Traversal>> = vec![vec![]];
    for _ in 0..=4 {
        let mut next = Vec::new();
        for w in &layer {
            let end = vertices_along(&g, v(1), w).last().copied().unwrap();
            points.insert((end, dfs_tree_word(&g, w)));
            for &tr in g.incident(end) {
                let mut w2 = w.clone();
                w2.push(tr);
                next.push(w2);
            }
        }
        layer = next;
    }
    assert_eq!(ball.len(), points.len());
    assert_eq!(ball.edges().count(), ball.len() - 1);
    // Branching: two generators, so the root's fiber grows in both directions.
    let over_root: BTreeSet<_> = (0..ball.len()).filter(|&i| ball.project(i) == v(1)).collect();
    assert!(over_root.len() > 2);
}

#[test]
fn triangle_lift_ends_one_generator_away() {
    let (g, t) = g2_graded();
    let ss = SpanningStructure::new(&g, &t).unwrap();
    let ball = CoverBall::new(&g, &ss, v(1), 4).unwrap();
    let tri = loop_from_signed(&g, &TRIANGLE_LOOP, v(1)).unwrap();
    let lift = ball.lift_path(tri.path(), ball.root()).unwrap();
    assert!(!lift.is_closed());
    let end = ball.vertex(lift.end());
    assert_eq!(end.vertex, v(1));
    assert_eq!(end.word.len(), 1);
    assert_eq!(ball.lifted_distance(ball.root(), lift.end()).unwrap(), r(1));
}

#[test]
fn random_snapshot() {
    let s = gen::random(42, 6, 8, 4).unwrap().space;
    assert!(validate_grading(&s.graph, &s.grading).is_ok());
    assert_eq!(
        s.to_json().to_string(),
        r#"{"grading":{"pieces":[{"edges":[5,6,8],"id":1},{"edges":[1,4],"id":2}]},"graph":{"edges":[{"id":1,"len":"1/2","u":3,"v":6},{"id":2,"len":"1/4","u":4,"v":5},{"id":3,"len":"3/4","u":1,"v":2},{"id":4,"len":"1/2","u":3,"v":6},{"id":5,"len":"1/2","u":2,"v":5},{"id":6,"len":"1/4","u":5,"v":2},{"id":7,"len":"1/2","u":5,"v":6},{"id":8,"len":"1/4","u":5,"v":2}],"vertices":[1,2,3,4,5,6]}}"#
    );
    let tree = gen::random(5, 7, 6, 3).unwrap().space;
    assert!(tree.grading.pieces().is_empty());
}

#[test]
fn random_spaces_satisfy_rank_identity() {
    for seed in 0..30 {
        let s = gen::random(seed, 7, 11, 5).unwrap().space;
        let sum: usize = s
            .grading
            .pieces()
            .iter()
            .map(|p| p.edges.len() + 1 - p.vertices.len())
            .sum();
        assert_eq!(sum, 11 - 7 + 1);
        let pieces: BTreeSet<BTreeSet<_>> = s.grading.pieces().iter().map(|p| p.edges.clone()).collect();
        assert_eq!(pieces, brute_piece_edges(&s.graph));
    }
}
