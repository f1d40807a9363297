//! The dyadic tree: nodes, the prefix order, antichains, level projections
//! and finitely supported rational vectors indexed by nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};
use crate::rational::{self, Rational};

/// Deepest node the bit-packed encoding supports.
pub const MAX_NODE_DEPTH: usize = 63;

/// Default support cap for explicit antichain enumeration.
pub const DEFAULT_ANTICHAIN_CAP: usize = 24;

/// A finite 0/1 sequence. The root is the empty sequence.
///
/// Bits are packed most-significant first, so the derived order is
/// (length, then lexicographic), i.e. breadth-first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Node {
    len: u8,
    bits: u64,
}

impl Node {
    pub const ROOT: Node = Node { len: 0, bits: 0 };

    pub fn root() -> Self {
        Self::ROOT
    }

    /// Builds a node from a slice of 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() > MAX_NODE_DEPTH {
            return Err(LabError::CapExceeded {
                what: "node depth",
                limit: MAX_NODE_DEPTH,
                actual: bits.len(),
            });
        }
        let mut node = Node::ROOT;
        for &b in bits {
            if b > 1 {
                return Err(LabError::parse("node", format!("bit {b} is not 0 or 1")));
            }
            node = node.child(b);
        }
        Ok(node)
    }

    /// The `index`-th node of level `len` in left-to-right order.
    pub fn at_level(len: usize, index: u64) -> Self {
        debug_assert!(len <= MAX_NODE_DEPTH);
        debug_assert!(len == 64 || index < (1u64 << len));
        Node {
            len: len as u8,
            bits: index,
        }
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_root(&self) -> bool {
        self.len == 0
    }

    /// Position within its level, `0..2^len`.
    pub fn index_in_level(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, i: usize) -> u8 {
        assert!(i < self.len());
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.bit(i)).collect()
    }

    pub fn child(&self, b: u8) -> Node {
        assert!(self.len() < MAX_NODE_DEPTH, "node depth overflow");
        Node {
            len: self.len + 1,
            bits: (self.bits << 1) | u64::from(b & 1),
        }
    }

    pub fn parent(&self) -> Option<Node> {
        (self.len > 0).then(|| Node {
            len: self.len - 1,
            bits: self.bits >> 1,
        })
    }

    /// The ancestor (or self) at level `len`.
    pub fn truncate(&self, len: usize) -> Node {
        assert!(len <= self.len());
        Node {
            len: len as u8,
            bits: self.bits >> (self.len() - len),
        }
    }

    /// `self ≼ other` in the prefix order (reflexive).
    pub fn is_prefix_of(&self, other: &Node) -> bool {
        self.len <= other.len && other.truncate(self.len()) == *self
    }

    pub fn is_comparable(&self, other: &Node) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Ancestors from the root down to and including `self`.
    pub fn path(&self) -> impl Iterator<Item = Node> + '_ {
        (0..=self.len()).map(move |l| self.truncate(l))
    }

    /// The dyadic interval `[lo, hi)` of binary expansions starting with
    /// these bits, returned as numerators over `2^len`.
    pub fn dyadic_interval(&self) -> (u64, u64, usize) {
        (self.bits, self.bits + 1, self.len())
    }
}

/// Two nodes are incomparable when neither is a prefix of the other.
pub fn is_incomparable(a: &Node, b: &Node) -> bool {
    !a.is_comparable(b)
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Node(\"{self}\")")
    }
}

impl FromStr for Node {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(LabError::parse(
                    "node",
                    format!("{s:?} is not a bit string"),
                )),
            })
            .collect::<Result<Vec<u8>>>()?;
        Node::from_bits(&bits)
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Pairwise incomparable nodes with strictly increasing lengths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Node>", into = "Vec<Node>")]
pub struct Antichain(Vec<Node>);

impl Antichain {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        for w in nodes.windows(2) {
            if w[0].len() >= w[1].len() {
                return Err(LabError::InvalidInput(format!(
                    "antichain lengths must strictly increase ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                if !is_incomparable(a, b) {
                    return Err(LabError::InvalidInput(format!(
                        "antichain nodes {a} and {b} are comparable"
                    )));
                }
            }
        }
        Ok(Antichain(nodes))
    }

    pub(crate) fn new_unchecked(nodes: Vec<Node>) -> Self {
        Antichain(nodes)
    }

    pub fn empty() -> Self {
        Antichain(Vec::new())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<Node>> for Antichain {
    type Error = LabError;
    fn try_from(nodes: Vec<Node>) -> Result<Self> {
        Antichain::new(nodes)
    }
}

impl From<Antichain> for Vec<Node> {
    fn from(a: Antichain) -> Self {
        a.0
    }
}

/// Preorder stream of the antichains of a finite node set.
///
/// Nodes are visited in (length, bits) order; an antichain is emitted as
/// soon as it is formed and then extended by later nodes. The same order
/// drives tie-breaking in [`crate::treespace::eu_norm`].
pub struct Antichains {
    nodes: Vec<Node>,
    chosen: Vec<usize>,
    next: usize,
}

impl Antichains {
    fn compatible(&self, candidate: usize) -> bool {
        let node = &self.nodes[candidate];
        match self.chosen.last() {
            Some(&last) if self.nodes[last].len() >= node.len() => false,
            _ => self
                .chosen
                .iter()
                .all(|&c| is_incomparable(&self.nodes[c], node)),
        }
    }
}

impl Iterator for Antichains {
    type Item = Antichain;

    fn next(&mut self) -> Option<Antichain> {
        loop {
            if self.next < self.nodes.len() {
                let i = self.next;
                self.next += 1;
                if self.compatible(i) {
                    self.chosen.push(i);
                    self.next = i + 1;
                    let nodes = self.chosen.iter().map(|&c| self.nodes[c]).collect();
                    return Some(Antichain(nodes));
                }
            } else {
                let last = self.chosen.pop()?;
                self.next = last + 1;
            }
        }
    }
}

/// Every nonempty antichain (pairwise incomparable, distinct lengths) of
/// `support`, each once, in a fixed order.
pub fn enumerate_antichains<'a>(support: impl IntoIterator<Item = &'a Node>) -> Result<Antichains> {
    enumerate_antichains_capped(support, DEFAULT_ANTICHAIN_CAP)
}

pub fn enumerate_antichains_capped<'a>(
    support: impl IntoIterator<Item = &'a Node>,
    cap: usize,
) -> Result<Antichains> {
    let nodes: Vec<Node> = support
        .into_iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if nodes.len() > cap {
        return Err(LabError::CapExceeded {
            what: "antichain enumeration support",
            limit: cap,
            actual: nodes.len(),
        });
    }
    Ok(Antichains {
        nodes,
        chosen: Vec::new(),
        next: 0,
    })
}

/// Closed range of levels `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelBand {
    lo: usize,
    hi: usize,
}

impl LevelBand {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(LabError::InvalidInput(format!(
                "level band [{lo}, {hi}] is empty"
            )));
        }
        Ok(LevelBand { lo, hi })
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn contains(&self, level: usize) -> bool {
        (self.lo..=self.hi).contains(&level)
    }
}

/// A finitely supported rational vector indexed by tree nodes. Zero
/// coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeVector {
    entries: BTreeMap<Node, Rational>,
}

impl TreeVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The basis vector `e_node`.
    pub fn basis(node: Node) -> Self {
        let mut v = Self::zero();
        v.set(node, rational::int(1));
        v
    }

    /// Sums repeated nodes.
    pub fn from_entries(entries: impl IntoIterator<Item = (Node, Rational)>) -> Self {
        let mut v = Self::zero();
        for (node, value) in entries {
            v.add_at(node, &value);
        }
        v
    }

    pub fn get(&self, node: &Node) -> Rational {
        self.entries
            .get(node)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, node: Node, value: Rational) {
        if value.is_zero() {
            self.entries.remove(&node);
        } else {
            self.entries.insert(node, value);
        }
    }

    pub fn add_at(&mut self, node: Node, value: &Rational) {
        let sum = self.get(&node) + value;
        self.set(node, sum);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Node, &Rational)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Node> {
        self.entries.keys()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Maximum level over the support (0 for the zero vector).
    pub fn depth(&self) -> usize {
        self.entries.keys().map(Node::len).max().unwrap_or(0)
    }

    pub fn min_level(&self) -> Option<usize> {
        self.entries.keys().map(Node::len).min()
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        TreeVector {
            entries: self.entries.iter().map(|(n, v)| (*n, v * factor)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, v) in &other.entries {
            out.add_at(*n, v);
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, v) in &other.entries {
            out.add_at(*n, &-v);
        }
        out
    }

    /// Coordinatewise pairing `Σ self_α · other_α`.
    pub fn pairing(&self, other: &Self) -> Rational {
        let (small, large) = if self.support_len() <= other.support_len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .filter_map(|(n, v)| large.entries.get(n).map(|w| v * w))
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn sup_norm(&self) -> Rational {
        self.entries
            .values()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn l1_norm(&self) -> Rational {
        self.entries
            .values()
            .fold(Rational::zero(), |acc, v| acc + v.abs())
    }

    pub fn to_f64_entries(&self) -> Vec<(Node, f64)> {
        self.entries
            .iter()
            .map(|(n, v)| (*n, rational::to_f64(v)))
            .collect()
    }
}

/// Restriction of `x` to the nodes whose level lies in `band`.
pub fn level_project(x: &TreeVector, band: LevelBand) -> TreeVector {
    TreeVector {
        entries: x
            .entries
            .iter()
            .filter(|(n, _)| band.contains(n.len()))
            .map(|(n, v)| (*n, v.clone()))
            .collect(),
    }
}

#[derive(Serialize, Deserialize)]
struct TreeEntryJson {
    node: Node,
    #[serde(with = "rational::serde_str")]
    value: Rational,
}

#[derive(Serialize, Deserialize)]
struct TreeVectorJson {
    entries: Vec<TreeEntryJson>,
}

impl Serialize for TreeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TreeVectorJson {
            entries: self
                .entries
                .iter()
                .map(|(n, v)| TreeEntryJson {
                    node: *n,
                    value: v.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TreeVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TreeVectorJson::deserialize(d)?;
        let mut seen = BTreeSet::new();
        let mut v = TreeVector::zero();
        for e in raw.entries {
            if !seen.insert(e.node) {
                return Err(serde::de::Error::custom(format!(
                    "duplicate node {:?} in entries",
                    e.node.to_string()
                )));
            }
            v.set(e.node, e.value);
        }
        Ok(v)
    }
}
