//! The norm of the tree space: the largest Tsirelson norm obtainable by
//! reading a vector's coefficients along an antichain with strictly
//! increasing lengths, a node of length `l` landing on `t_{l+1}`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::rational::{self, Rational, Scalar};
use crate::tree::{is_incomparable, Antichain, Node, TreeVector};
use crate::tsirelson::{self, IntervalSystem, NatVector, NormCertificate, RunTable, Sign};

/// Support cap for [`eu_norm`]. The search is branch-and-bound rather than
/// plain enumeration, so this is far above the enumeration cap.
pub const DEFAULT_EU_SUPPORT_CAP: usize = 4096;

/// Tsirelson index of a node.
pub fn tsirelson_index(node: &Node) -> u32 {
    node.len() as u32 + 1
}

/// The coefficients of `x` along `antichain`, placed on Tsirelson indices.
pub fn induced_vector(x: &TreeVector, antichain: &Antichain) -> NatVector {
    NatVector::from_entries(
        antichain
            .nodes()
            .iter()
            .map(|n| (tsirelson_index(n), x.get(n))),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EuNormResult {
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    pub witness: Antichain,
    pub certificate: NormCertificate,
}

struct Search<'a, S> {
    nodes: &'a [Node],
    abs: Vec<S>,
    signed: Vec<S>,
    depth: usize,
    best: S,
    best_set: Vec<usize>,
}

impl<S: Scalar> Search<'_, S> {
    fn profile(&self, chosen: &[usize]) -> Vec<(u32, S)> {
        chosen
            .iter()
            .map(|&i| (tsirelson_index(&self.nodes[i]), self.signed[i].clone()))
            .collect()
    }

    fn available(&self, chosen: &[usize], i: usize) -> bool {
        chosen
            .iter()
            .all(|&c| is_incomparable(&self.nodes[c], &self.nodes[i]))
    }

    /// Every extension of `chosen` by nodes at positions `next..` is
    /// bounded by the norm of `chosen` plus the largest available
    /// coefficient on each deeper level.
    fn bound_prunes(&self, chosen: &[usize], next: usize) -> bool {
        let last_len = chosen.last().map(|&c| self.nodes[c].len());
        let mut level_max: Vec<Option<S>> = vec![None; self.depth + 1];
        for i in next..self.nodes.len() {
            let len = self.nodes[i].len();
            if last_len.is_some_and(|l| len <= l) || !self.available(chosen, i) {
                continue;
            }
            match &level_max[len] {
                Some(m) if *m >= self.abs[i] => {}
                _ => level_max[len] = Some(self.abs[i].clone()),
            }
        }
        let extra: Vec<(u32, S)> = level_max
            .into_iter()
            .enumerate()
            .filter_map(|(l, m)| m.map(|m| (l as u32 + 1, m)))
            .collect();
        if extra.is_empty() {
            return true;
        }
        // an extension that only ties the best still wins if it is larger
        let reach = chosen.len() + extra.len();
        let beaten =
            |bound: &S| *bound < self.best || (*bound <= self.best && reach <= self.best_set.len());
        let l1 = chosen
            .iter()
            .map(|&c| &self.abs[c])
            .chain(extra.iter().map(|(_, v)| v))
            .fold(S::zero_value(), |acc, v| acc.plus(v));
        if beaten(&l1) {
            return true;
        }
        let mut relaxed: Vec<(u32, S)> = chosen
            .iter()
            .map(|&c| (tsirelson_index(&self.nodes[c]), self.abs[c].clone()))
            .collect();
        relaxed.extend(extra);
        beaten(&tsirelson::norm_of_sorted(&relaxed))
    }

    fn explore(&mut self, chosen: &mut Vec<usize>, next: usize) {
        if self.bound_prunes(chosen, next) {
            return;
        }
        let last_len = chosen.last().map(|&c| self.nodes[c].len());
        for i in next..self.nodes.len() {
            if last_len.is_some_and(|l| self.nodes[i].len() <= l) || !self.available(chosen, i) {
                continue;
            }
            chosen.push(i);
            let value = tsirelson::norm_of_sorted(&self.profile(chosen));
            if value > self.best || (value == self.best && chosen.len() > self.best_set.len()) {
                self.best = value;
                self.best_set = chosen.clone();
            }
            self.explore(chosen, i + 1);
            chosen.pop();
        }
    }
}

/// Generic search over a node-sorted, zero-free coefficient list. Returns
/// the value, the witness positions and the certificate of the witness.
pub(crate) fn eu_search<S: Scalar>(entries: &[(Node, S)]) -> (S, Vec<Node>, NormCertificate) {
    let nodes: Vec<Node> = entries.iter().map(|(n, _)| *n).collect();
    let mut search = Search {
        nodes: &nodes,
        abs: entries.iter().map(|(_, v)| v.abs_value()).collect(),
        signed: entries.iter().map(|(_, v)| v.clone()).collect(),
        depth: nodes.iter().map(Node::len).max().unwrap_or(0),
        best: S::zero_value(),
        best_set: Vec::new(),
    };
    search.explore(&mut Vec::new(), 0);
    let witness: Vec<Node> = search.best_set.iter().map(|&i| nodes[i]).collect();
    let table = RunTable::build(&search.profile(&search.best_set));
    let certificate = table.certificate().unwrap_or(NormCertificate::Leaf {
        index: 1,
        sign: Sign::Plus,
    });
    (search.best, witness, certificate)
}

fn check_cap(x: &TreeVector) -> Result<()> {
    if x.support_len() > DEFAULT_EU_SUPPORT_CAP {
        return Err(LabError::CapExceeded {
            what: "tree-space support",
            limit: DEFAULT_EU_SUPPORT_CAP,
            actual: x.support_len(),
        });
    }
    Ok(())
}

/// The tree-space norm with an attaining antichain (among maximizers, the
/// largest, then the first in enumeration order) and a Tsirelson certificate for it.
pub fn eu_norm(x: &TreeVector) -> Result<EuNormResult> {
    check_cap(x)?;
    let entries: Vec<(Node, Rational)> = x.iter().map(|(n, v)| (*n, v.clone())).collect();
    let (value, witness, certificate) = eu_search(&entries);
    Ok(EuNormResult {
        value,
        witness: Antichain::new_unchecked(witness),
        certificate,
    })
}

pub fn eu_norm_value(x: &TreeVector) -> Result<Rational> {
    Ok(eu_norm(x)?.value)
}

/// Floating-point evaluation used by the gauge solvers.
pub fn eu_norm_f64(entries: &[(Node, f64)]) -> (f64, Vec<Node>, NormCertificate) {
    let mut sorted: Vec<(Node, f64)> = entries.iter().filter(|(_, v)| *v != 0.0).cloned().collect();
    sorted.sort_by_key(|(n, _)| *n);
    eu_search(&sorted)
}

/// The norming functional of a witness/certificate pair applied to `y`.
pub fn eu_dual_pairing(cert: &NormCertificate, witness: &Antichain, y: &TreeVector) -> Rational {
    cert.evaluate_with(&|k| {
        witness
            .nodes()
            .iter()
            .find(|n| tsirelson_index(n) == k)
            .map(|n| y.get(n))
            .unwrap_or_else(Rational::zero)
    })
}

/// The same functional as a node-indexed vector: coefficient `±2^-depth`
/// on each witness node the certificate reads.
pub fn norming_functional(cert: &NormCertificate, witness: &Antichain) -> TreeVector {
    TreeVector::from_entries(
        cert.coefficients()
            .into_iter()
            .filter_map(|(k, sign, depth)| {
                let node = witness.nodes().iter().find(|n| tsirelson_index(n) == k)?;
                let magnitude = rational::pow2_inv(depth);
                Some((
                    *node,
                    if sign == Sign::Plus {
                        magnitude
                    } else {
                        -magnitude
                    },
                ))
            }),
    )
}

/// Outcome of the superadditivity check over parts living in incomparable
/// subtrees.
#[derive(Clone, Debug, Serialize)]
pub struct SuperadditivityReport {
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    pub holds: bool,
    /// Union of the per-part witnesses.
    pub merged_witness: Antichain,
    /// Half-weighted split over the per-part certificates.
    pub merged_certificate: NormCertificate,
    /// The merged functional evaluated on the sum; equals `rhs` for two
    /// or more parts and lower-bounds `lhs` by dual feasibility.
    #[serde(with = "rational::serde_str")]
    pub certified: Rational,
}

fn level_range(x: &TreeVector) -> (usize, usize) {
    let lo = x.min_level().unwrap_or(0);
    (lo, x.depth())
}

/// Checks `‖Σ x_i‖ ≥ ½ Σ ‖x_i‖` for parts supported strictly below
/// pairwise incomparable roots, with disjoint increasing level bands and
/// no more parts than the lowest support level.
pub fn check_superadditivity(
    parts: &[TreeVector],
    roots: &[Node],
) -> Result<SuperadditivityReport> {
    if parts.is_empty() {
        return Err(LabError::Hypothesis("no parts given".into()));
    }
    if parts.len() != roots.len() {
        return Err(LabError::Hypothesis(format!(
            "{} parts but {} roots",
            parts.len(),
            roots.len()
        )));
    }
    for (i, a) in roots.iter().enumerate() {
        for b in &roots[i + 1..] {
            if !is_incomparable(a, b) {
                return Err(LabError::Hypothesis(format!(
                    "roots {a:?} and {b:?} are comparable"
                )));
            }
        }
    }
    for (i, (part, root)) in parts.iter().zip(roots).enumerate() {
        if part.is_zero() {
            return Err(LabError::Hypothesis(format!("part {i} is zero")));
        }
        if let Some(n) = part
            .support()
            .find(|n| !(root.is_prefix_of(n) && *n != root))
        {
            return Err(LabError::Hypothesis(format!(
                "part {i} has node {n:?} outside the subtree strictly below {root:?}"
            )));
        }
    }
    for i in 1..parts.len() {
        let (_, prev_hi) = level_range(&parts[i - 1]);
        let (lo, _) = level_range(&parts[i]);
        if prev_hi >= lo {
            return Err(LabError::Hypothesis(format!(
                "level bands of parts {} and {i} are not disjoint and increasing",
                i - 1
            )));
        }
    }
    let lowest = level_range(&parts[0]).0;
    if parts.len() > lowest {
        return Err(LabError::Hypothesis(format!(
            "{} parts exceed the lowest support level {lowest}",
            parts.len()
        )));
    }

    let results: Vec<EuNormResult> = parts.iter().map(eu_norm).collect::<Result<_>>()?;
    let sum = parts.iter().fold(TreeVector::zero(), |acc, p| acc.plus(p));
    let lhs = eu_norm(&sum)?.value;
    let total = results
        .iter()
        .fold(Rational::zero(), |acc, r| acc + &r.value);
    let rhs = total / rational::int(2);

    let merged_nodes: Vec<Node> = results
        .iter()
        .flat_map(|r| r.witness.nodes().iter().copied())
        .collect();
    let merged_witness = Antichain::new(merged_nodes)?;
    let merged_certificate = if results.len() == 1 {
        results[0].certificate.clone()
    } else {
        let intervals = results
            .iter()
            .map(|r| {
                let nodes = r.witness.nodes();
                (
                    tsirelson_index(&nodes[0]),
                    tsirelson_index(&nodes[nodes.len() - 1]),
                )
            })
            .collect();
        NormCertificate::Split {
            intervals: IntervalSystem::new(intervals)?,
            children: results.iter().map(|r| r.certificate.clone()).collect(),
        }
    };
    let certified = eu_dual_pairing(&merged_certificate, &merged_witness, &sum);
    Ok(SuperadditivityReport {
        holds: lhs >= rhs,
        lhs,
        rhs,
        merged_witness,
        merged_certificate,
        certified,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockDominationReport {
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    pub holds: bool,
}

/// Compares `‖Σ μ_k x_k‖` with `‖Σ μ_k t_{ℓ_{k+1}}‖_T` for normalized
/// blocks `x_k` supported on levels strictly between `ℓ_k` and `ℓ_{k+1}`.
/// `levels` holds `ℓ_1 < … < ℓ_{m+1}` for `m` blocks.
pub fn check_block_domination(
    blocks: &[TreeVector],
    levels: &[usize],
    coeffs: &[Rational],
) -> Result<BlockDominationReport> {
    if blocks.is_empty() || levels.len() != blocks.len() + 1 || coeffs.len() != blocks.len() {
        return Err(LabError::Hypothesis(format!(
            "{} blocks need {} levels and {} coefficients (got {} and {})",
            blocks.len(),
            blocks.len() + 1,
            blocks.len(),
            levels.len(),
            coeffs.len()
        )));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Hypothesis("levels must strictly increase".into()));
    }
    for (k, block) in blocks.iter().enumerate() {
        if let Some(n) = block
            .support()
            .find(|n| n.len() <= levels[k] || n.len() >= levels[k + 1])
        {
            return Err(LabError::Hypothesis(format!(
                "block {k} has node {n:?} outside the open band ({}, {})",
                levels[k],
                levels[k + 1]
            )));
        }
        let norm = eu_norm(block)?.value;
        if !norm.is_one() {
            return Err(LabError::Hypothesis(format!(
                "block {k} has norm {norm}, expected 1"
            )));
        }
    }
    let combined = blocks
        .iter()
        .zip(coeffs)
        .fold(TreeVector::zero(), |acc, (b, mu)| acc.plus(&b.scaled(mu)));
    let lhs = eu_norm(&combined)?.value;
    let rhs_vector = NatVector::from_entries(
        coeffs
            .iter()
            .enumerate()
            .map(|(k, mu)| (levels[k + 1] as u32, mu.clone())),
    );
    let rhs = tsirelson::tsirelson_norm(&rhs_vector)?;
    Ok(BlockDominationReport {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

/// Largest absolute coefficient; the tree norm of a chain-supported vector.
pub fn sup_norm(x: &TreeVector) -> Rational {
    x.iter()
        .map(|(_, v)| v.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}
