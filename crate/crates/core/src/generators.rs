//! Seeded random instances for property runs.
//!
//! Every trial draws from its own ChaCha stream, so a run is reproducible
//! from `(seed, trial)` alone whatever order the trials execute in.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex::{self, DyadicMeasure, WPolytope};
use crate::error::Result;
use crate::rational::{self, Rational};
use crate::tree::{Node, TreeVector};
use crate::treespace::eu_norm;
use crate::tsirelson::NatVector;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `{0, ±½, ±1, ±2}`.
const SMALL: [(i64, i64); 7] = [(0, 1), (1, 2), (-1, 2), (1, 1), (-1, 1), (2, 1), (-2, 1)];

pub fn small_coefficient<R: Rng>(rng: &mut R) -> Rational {
    let (p, q) = SMALL[rng.gen_range(0..SMALL.len())];
    rational::ratio(p, q)
}

pub fn nonzero_coefficient<R: Rng>(rng: &mut R) -> Rational {
    let (p, q) = SMALL[rng.gen_range(1..SMALL.len())];
    rational::ratio(p, q)
}

/// Up to `max_support` coefficients from `{0, ±½, ±1, ±2}` on distinct
/// indices in `1..=max_index`.
pub fn random_nat_vector<R: Rng>(rng: &mut R, max_support: usize, max_index: u32) -> NatVector {
    let mut indices: Vec<u32> = (1..=max_index).collect();
    indices.shuffle(rng);
    let size = rng.gen_range(0..=max_support.min(indices.len()));
    NatVector::from_entries(indices[..size].iter().map(|&i| (i, small_coefficient(rng))))
}

pub fn random_node<R: Rng>(rng: &mut R, len: usize) -> Node {
    Node::at_level(len, rng.gen_range(0..1u64 << len))
}

/// A random descendant of `root` exactly `len` levels deep.
pub fn random_descendant<R: Rng>(rng: &mut R, root: &Node, len: usize) -> Node {
    (root.len()..len).fold(*root, |n, _| n.child(rng.gen_range(0..2)))
}

/// Up to `max_support` random nodes of depth at most `depth` with small
/// coefficients.
pub fn random_tree_vector<R: Rng>(rng: &mut R, max_support: usize, depth: usize) -> TreeVector {
    let size = rng.gen_range(0..=max_support);
    let mut x = TreeVector::zero();
    for _ in 0..size {
        let len = rng.gen_range(0..=depth);
        x.set(random_node(rng, len), small_coefficient(rng));
    }
    x
}

/// Coefficients on a random root-to-leaf path.
pub fn random_chain_vector<R: Rng>(rng: &mut R, depth: usize) -> TreeVector {
    let leaf = random_node(rng, depth);
    TreeVector::from_entries(leaf.path().map(|n| (n, small_coefficient(rng))))
}

/// Coefficients on a random antichain with strictly increasing lengths,
/// built by stepping off a random path.
pub fn random_antichain_vector<R: Rng>(rng: &mut R, depth: usize) -> TreeVector {
    let mut x = TreeVector::zero();
    let mut cursor = Node::ROOT;
    let mut next_len = 0;
    while cursor.len() < depth {
        let turn = rng.gen_range(0..2u8);
        // later picks live under cursor.child(turn), so anything under the
        // other child is incomparable with them
        let off = cursor.child(1 - turn);
        let lo = next_len.max(off.len());
        if lo <= depth && rng.gen_bool(0.6) {
            let len = rng.gen_range(lo..=depth);
            let node = random_descendant(rng, &off, len);
            x.set(node, nonzero_coefficient(rng));
            next_len = node.len() + 1;
        }
        cursor = cursor.child(turn);
    }
    x
}

pub fn random_measure<R: Rng>(rng: &mut R, depth: usize) -> Result<DyadicMeasure> {
    let mut masses = Vec::new();
    for leaf in convex::leaves(depth) {
        if rng.gen_bool(0.5) {
            masses.push((leaf, small_coefficient(rng)));
        }
    }
    DyadicMeasure::new(depth, masses)
}

/// Parts below pairwise incomparable roots, with disjoint increasing level
/// bands starting no higher than the number of parts.
pub fn random_superadditivity_instance<R: Rng>(
    rng: &mut R,
    depth: usize,
) -> (Vec<TreeVector>, Vec<Node>) {
    assert!(depth >= 2, "parts need a level below their roots");
    let mut kappa = rng.gen_range(1..=3usize);
    loop {
        let root_level = if kappa == 1 {
            rng.gen_range(0..=1)
        } else if kappa == 2 {
            1
        } else {
            2
        };
        let start = (root_level + 1).max(kappa);
        if start + kappa - 1 <= depth {
            let mut level_pool: Vec<Node> = (0..1u64 << root_level)
                .map(|i| Node::at_level(root_level, i))
                .collect();
            level_pool.shuffle(rng);
            let roots: Vec<Node> = level_pool[..kappa].to_vec();
            // kappa - 1 cut points between start..=depth
            let mut cuts: Vec<usize> = (start + 1..=depth).collect();
            cuts.shuffle(rng);
            let mut cuts: Vec<usize> = cuts[..kappa - 1].to_vec();
            cuts.sort_unstable();
            let mut bounds = vec![start];
            bounds.extend(cuts);
            bounds.push(depth + 1);
            let parts = roots
                .iter()
                .enumerate()
                .map(|(i, root)| {
                    let (lo, hi) = (bounds[i], bounds[i + 1] - 1);
                    let mut part = TreeVector::zero();
                    let count = rng.gen_range(1..=5);
                    for _ in 0..count {
                        let len = rng.gen_range(lo..=hi);
                        let node = random_descendant(rng, root, len);
                        part.set(node, nonzero_coefficient(rng));
                    }
                    if part.is_zero() {
                        part.set(random_descendant(rng, root, lo), rational::int(1));
                    }
                    part
                })
                .collect();
            return (parts, roots);
        }
        kappa -= 1;
    }
}

/// Normalized blocks in open level bands `(ℓ_k, ℓ_{k+1})` with
/// coefficients. Returns `(blocks, levels, coefficients)`.
pub fn random_block_instance<R: Rng>(
    rng: &mut R,
    depth: usize,
) -> Result<(Vec<TreeVector>, Vec<usize>, Vec<Rational>)> {
    assert!(depth >= 2, "a block needs an open band");
    let max_blocks = (depth / 2).clamp(1, 3);
    let m = rng.gen_range(1..=max_blocks);
    // m + 1 levels in 0..=depth+1 with gaps of at least 2
    let slack = depth + 1 - 2 * m;
    let mut extra: Vec<usize> = (0..=m).map(|_| 0).collect();
    for _ in 0..slack {
        if rng.gen_bool(0.5) {
            extra[rng.gen_range(0..=m)] += 1;
        }
    }
    let mut levels = Vec::with_capacity(m + 1);
    let mut at = extra[0];
    levels.push(at);
    for e in &extra[1..] {
        at += 2 + e;
        levels.push(at);
    }
    let mut blocks = Vec::with_capacity(m);
    for k in 0..m {
        let (lo, hi) = (levels[k] + 1, levels[k + 1] - 1);
        let mut block = TreeVector::zero();
        for _ in 0..rng.gen_range(1..=4) {
            let len = rng.gen_range(lo..=hi);
            block.set(random_node(rng, len), nonzero_coefficient(rng));
        }
        if block.is_zero() {
            block.set(random_node(rng, lo), rational::int(1));
        }
        let norm = eu_norm(&block)?.value;
        blocks.push(block.scaled(&(rational::int(1) / norm)));
    }
    let coeffs = (0..m).map(|_| nonzero_coefficient(rng)).collect();
    Ok((blocks, levels, coeffs))
}

/// Either a random signed combination of `W`-vertices (finite `W`-gauge)
/// or a sparse vector with small coefficients.
pub fn random_gauge_vector<R: Rng>(rng: &mut R, depth: usize) -> Result<TreeVector> {
    if rng.gen_bool(0.5) {
        let w = WPolytope::new(depth)?;
        let weights: Vec<Rational> = w
            .vertices()
            .iter()
            .map(|_| {
                if rng.gen_bool(0.2) {
                    rational::ratio(rng.gen_range(1..=4), 4)
                } else {
                    Rational::zero()
                }
            })
            .collect();
        Ok(w.combine(&weights))
    } else {
        Ok(random_tree_vector(rng, 6, depth))
    }
}
