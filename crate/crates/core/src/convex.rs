//! Depth-truncated versions of the flow polytope `K`, its symmetric hull
//! `W = co(K ∪ −K)`, the even-split tree `d_α`, signed dyadic measures and
//! the operator `μ ↦ Σ μ(V_α) e_α`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};
use crate::rational::{self, Rational};
use crate::tree::{Node, TreeVector};

/// Largest depth for which vertex lists are materialized.
pub const DEFAULT_DEPTH_CAP: usize = 10;

pub(crate) fn check_depth(d: usize) -> Result<()> {
    if d > DEFAULT_DEPTH_CAP {
        return Err(LabError::CapExceeded {
            what: "tree depth",
            limit: DEFAULT_DEPTH_CAP,
            actual: d,
        });
    }
    Ok(())
}

/// Leaves of the depth-`d` tree, left to right.
pub fn leaves(d: usize) -> impl Iterator<Item = Node> {
    (0..1u64 << d).map(move |i| Node::at_level(d, i))
}

/// All nodes of length at most `d`, in breadth-first order.
pub fn nodes_up_to(d: usize) -> impl Iterator<Item = Node> {
    (0..=d).flat_map(|l| (0..1u64 << l).map(move |i| Node::at_level(l, i)))
}

/// Indicator of the root-to-`leaf` path.
pub fn path_vector(leaf: &Node) -> TreeVector {
    TreeVector::from_entries(leaf.path().map(|n| (n, rational::int(1))))
}

/// The `2^d` vertices of truncated `K`: root-to-leaf path indicators.
pub fn k_vertices(d: usize) -> Result<Vec<TreeVector>> {
    check_depth(d)?;
    Ok(leaves(d).map(|l| path_vector(&l)).collect())
}

/// Membership in truncated `K`: root coefficient 1, all coefficients
/// nonnegative, and `λ_α = λ_{α0} + λ_{α1}` for `|α| < d`. Vectors with
/// support deeper than `d` are not members.
pub fn membership_k(x: &TreeVector, d: usize) -> bool {
    if x.depth() > d || !x.get(&Node::root()).is_one() {
        return false;
    }
    if x.iter().any(|(_, v)| v.is_negative()) {
        return false;
    }
    flow_holds(x, d)
}

/// `λ_α = λ_{α0} + λ_{α1}` at every node above depth `d`.
pub(crate) fn flow_holds(x: &TreeVector, d: usize) -> bool {
    // only nodes in the support or with a child in the support can fail
    let mut to_check: Vec<Node> = x
        .support()
        .filter(|n| n.len() < d)
        .copied()
        .chain(x.support().filter_map(Node::parent))
        .collect();
    to_check.sort();
    to_check.dedup();
    to_check
        .iter()
        .all(|a| x.get(a) == x.get(&a.child(0)) + x.get(&a.child(1)))
}

/// The even-split vector below `alpha`: 1 on the path to `alpha`, and
/// `2^-(|γ|-|α|)` on every descendant `γ` down to depth `d`.
pub fn d_alpha(alpha: &Node, d: usize) -> Result<TreeVector> {
    if alpha.len() > d {
        return Err(LabError::InvalidInput(format!(
            "node {alpha:?} is deeper than {d}"
        )));
    }
    check_depth(d)?;
    let mut v = TreeVector::zero();
    for n in alpha.path() {
        v.set(n, rational::int(1));
    }
    let mut frontier = vec![*alpha];
    for rel in 1..=(d - alpha.len()) {
        let weight = rational::pow2_inv(rel as u32);
        frontier = frontier
            .iter()
            .flat_map(|n| [n.child(0), n.child(1)])
            .collect();
        for n in &frontier {
            v.set(*n, weight.clone());
        }
    }
    Ok(v)
}

/// A signed measure on the depth-`d` clopen algebra of `{0,1}^ℕ`, stored
/// by its leaf masses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicMeasure {
    depth: usize,
    leaves: BTreeMap<Node, Rational>,
}

impl DyadicMeasure {
    pub fn new(depth: usize, masses: impl IntoIterator<Item = (Node, Rational)>) -> Result<Self> {
        check_depth(depth)?;
        let mut leaves = BTreeMap::new();
        for (node, mass) in masses {
            if node.len() != depth {
                return Err(LabError::InvalidInput(format!(
                    "leaf {node:?} does not have length {depth}"
                )));
            }
            if leaves.contains_key(&node) {
                return Err(LabError::InvalidInput(format!("duplicate leaf {node:?}")));
            }
            if !mass.is_zero() {
                leaves.insert(node, mass);
            }
        }
        Ok(DyadicMeasure { depth, leaves })
    }

    pub fn zero(depth: usize) -> Result<Self> {
        Self::new(depth, [])
    }

    pub fn dirac(leaf: Node) -> Result<Self> {
        Self::new(leaf.len(), [(leaf, rational::int(1))])
    }

    /// Each leaf gets `2^-d`.
    pub fn uniform(depth: usize) -> Result<Self> {
        check_depth(depth)?;
        let w = rational::pow2_inv(depth as u32);
        Self::new(depth, leaves(depth).map(|l| (l, w.clone())))
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn mass(&self, leaf: &Node) -> Rational {
        self.leaves
            .get(leaf)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn masses(&self) -> impl Iterator<Item = (&Node, &Rational)> {
        self.leaves.iter()
    }

    /// `μ(V_α)` for `|α| ≤ depth`.
    pub fn measure_of(&self, alpha: &Node) -> Rational {
        assert!(alpha.len() <= self.depth);
        self.leaves
            .iter()
            .filter(|(l, _)| alpha.is_prefix_of(l))
            .fold(Rational::zero(), |acc, (_, m)| acc + m)
    }
}

/// Total variation: the sum of absolute leaf masses.
pub fn tv_norm(mu: &DyadicMeasure) -> Rational {
    mu.leaves
        .values()
        .fold(Rational::zero(), |acc, m| acc + m.abs())
}

/// `T μ = Σ_{|α| ≤ d} μ(V_α) e_α`.
pub fn t_operator(mu: &DyadicMeasure) -> TreeVector {
    let mut out = TreeVector::zero();
    for (leaf, mass) in &mu.leaves {
        for n in leaf.path() {
            out.add_at(n, mass);
        }
    }
    out
}

/// Recovers `μ` from `T μ` by reading the leaf coefficients.
pub fn t_operator_inverse(x: &TreeVector, depth: usize) -> Result<DyadicMeasure> {
    DyadicMeasure::new(
        depth,
        x.iter()
            .filter(|(n, _)| n.len() == depth)
            .map(|(n, v)| (*n, v.clone())),
    )
}

#[derive(Serialize, Deserialize)]
struct LeafJson {
    node: Node,
    #[serde(with = "rational::serde_str")]
    value: Rational,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    depth: usize,
    leaves: Vec<LeafJson>,
}

impl Serialize for DyadicMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureJson {
            depth: self.depth,
            leaves: self
                .leaves
                .iter()
                .map(|(n, v)| LeafJson {
                    node: *n,
                    value: v.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DyadicMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MeasureJson::deserialize(d)?;
        DyadicMeasure::new(raw.depth, raw.leaves.into_iter().map(|l| (l.node, l.value)))
            .map_err(serde::de::Error::custom)
    }
}

/// One vertex of `W`: a signed path indicator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WVertex {
    pub leaf: Node,
    pub negative: bool,
}

impl WVertex {
    pub fn vector(&self) -> TreeVector {
        let v = path_vector(&self.leaf);
        if self.negative {
            v.scaled(&rational::int(-1))
        } else {
            v
        }
    }
}

/// `W = co(K ∪ −K)` at depth `d`, given by its `2^{d+1}` vertices: the
/// positive paths first, then their negatives.
#[derive(Clone, Debug)]
pub struct WPolytope {
    depth: usize,
    vertices: Vec<WVertex>,
}

impl WPolytope {
    pub fn new(depth: usize) -> Result<Self> {
        check_depth(depth)?;
        let vertices = [false, true]
            .into_iter()
            .flat_map(|negative| leaves(depth).map(move |leaf| WVertex { leaf, negative }))
            .collect();
        Ok(WPolytope { depth, vertices })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertices(&self) -> &[WVertex] {
        &self.vertices
    }

    /// `Σ ω_i v_i` for nonnegative weights, one per vertex.
    pub fn combine(&self, weights: &[Rational]) -> TreeVector {
        assert_eq!(weights.len(), self.vertices.len());
        let mut out = TreeVector::zero();
        for (v, w) in self.vertices.iter().zip(weights) {
            if w.is_zero() {
                continue;
            }
            let signed = if v.negative { -w.clone() } else { w.clone() };
            for n in v.leaf.path() {
                out.add_at(n, &signed);
            }
        }
        out
    }
}
