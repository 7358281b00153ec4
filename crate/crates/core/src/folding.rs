//! Stallings folding for finitely generated subgroups of free groups.
//!
//! Words are slices of nonzero signed labels: `k` is the `k`-th generator and
//! `-k` its inverse.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// A folded labeled graph: no vertex has two outgoing (or two incoming)
/// edges with the same label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldedGraph {
    pub base: usize,
    pub vertex_count: usize,
    /// `(tail, label, head)` with positive labels.
    pub edges: BTreeSet<(usize, u64, usize)>,
}

impl FoldedGraph {
    /// Rank of the fundamental group of the folded graph, i.e. of the
    /// subgroup it represents.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    /// Whether the graph reads `word` as a closed path at the base.
    pub fn accepts(&self, word: &[i64]) -> bool {
        let out: BTreeMap<(usize, u64), usize> =
            self.edges.iter().map(|&(a, l, b)| ((a, l), b)).collect();
        let inc: BTreeMap<(usize, u64), usize> =
            self.edges.iter().map(|&(a, l, b)| ((b, l), a)).collect();
        let mut cur = self.base;
        for &x in word {
            let next = if x > 0 {
                out.get(&(cur, x as u64))
            } else {
                inc.get(&(cur, x.unsigned_abs()))
            };
            match next {
                Some(&n) => cur = n,
                None => return false,
            }
        }
        cur == self.base
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Builds the rose of the image words and folds it.
pub fn fold(images: &[Vec<i64>]) -> Result<FoldedGraph> {
    let mut parent = vec![0usize];
    let mut raw: Vec<(usize, u64, usize)> = Vec::new();
    for w in images {
        if w.contains(&0) {
            return Err(Error::input("word letters must be nonzero"));
        }
        let mut cur = 0usize;
        for (i, &x) in w.iter().enumerate() {
            let next = if i + 1 == w.len() {
                0
            } else {
                parent.push(parent.len());
                parent.len() - 1
            };
            if x > 0 {
                raw.push((cur, x as u64, next));
            } else {
                raw.push((next, x.unsigned_abs(), cur));
            }
            cur = next;
        }
    }
    loop {
        let edges: BTreeSet<(usize, u64, usize)> = raw
            .iter()
            .map(|&(a, l, b)| (find(&mut parent, a), l, find(&mut parent, b)))
            .collect();
        let mut out: BTreeMap<(usize, u64), usize> = BTreeMap::new();
        let mut inc: BTreeMap<(usize, u64), usize> = BTreeMap::new();
        let mut merge = None;
        for &(a, l, b) in &edges {
            if let Some(&b2) = out.get(&(a, l)) {
                if b2 != b {
                    merge = Some((b, b2));
                    break;
                }
            }
            if let Some(&a2) = inc.get(&(b, l)) {
                if a2 != a {
                    merge = Some((a, a2));
                    break;
                }
            }
            out.insert((a, l), b);
            inc.insert((b, l), a);
        }
        match merge {
            Some((x, y)) => {
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                parent[rx.max(ry)] = rx.min(ry);
            }
            None => {
                // Renumber surviving vertices densely.
                let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
                for v in 0..parent.len() {
                    let r = find(&mut parent, v);
                    let n = ids.len();
                    ids.entry(r).or_insert(n);
                }
                let base = ids[&find(&mut parent, 0)];
                return Ok(FoldedGraph {
                    base,
                    vertex_count: ids.len(),
                    edges: edges.iter().map(|&(a, l, b)| (ids[&a], l, ids[&b])).collect(),
                });
            }
        }
    }
}

/// Whether the homomorphism from the free group of rank `rank` sending the
/// `i`-th generator to `images[i]` is injective.
///
/// The image subgroup is free of the folded graph's rank, and free groups of
/// finite rank are Hopfian, so the map is injective exactly when that rank
/// equals `rank`.
pub fn free_hom_injective(rank: usize, images: &[Vec<i64>]) -> Result<bool> {
    if images.len() != rank {
        return Err(Error::input(format!(
            "expected {rank} image words, got {}",
            images.len()
        )));
    }
    if images.iter().any(|w| w.is_empty()) {
        if images.iter().any(|w| w.contains(&0)) {
            return Err(Error::input("word letters must be nonzero"));
        }
        return Ok(false);
    }
    Ok(fold(images)?.rank() == rank)
}
