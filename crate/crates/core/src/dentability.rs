//! Slices of the truncated set `K` and lower bounds on their diameters.
//!
//! A slice `S(K, f, β) = {x ∈ K : f(x) > sup_K f − β}` of a polytope always
//! contains a vertex, and the distance between two in-slice vertices is a
//! certified lower bound on the slice diameter. Everything here is exact.

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::convex::{self, d_alpha, path_vector};
use crate::error::{LabError, Result};
use crate::rational::{self, Rational};
use crate::tree::{Node, TreeVector};
use crate::treespace::eu_norm;

/// Deepest tree on which slices are scanned pairwise.
pub const SLICE_DEPTH_CAP: usize = 8;

/// Deepest tree for the separation table.
pub const SEPARATION_DEPTH_CAP: usize = 7;

#[derive(Clone, Debug, Serialize)]
pub struct SliceSpec {
    pub functional: TreeVector,
    #[serde(with = "rational::serde_str")]
    pub beta: Rational,
}

impl SliceSpec {
    pub fn new(functional: TreeVector, beta: Rational) -> Result<Self> {
        if beta <= Rational::zero() {
            return Err(LabError::InvalidInput(format!(
                "slice width {beta} must be positive"
            )));
        }
        Ok(SliceSpec { functional, beta })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceReport {
    /// `sup_K f`, attained at a vertex.
    #[serde(with = "rational::serde_str")]
    pub sup: Rational,
    /// Leaves whose path vertex lies in the slice.
    pub members: Vec<Node>,
    /// Largest pairwise distance among the member vertices.
    #[serde(with = "rational::serde_str")]
    pub diameter_bound: Rational,
    pub witness: Option<(Node, Node)>,
}

/// `f(v_leaf)` is the sum of `f` along the path to `leaf`.
fn path_value(f: &TreeVector, leaf: &Node) -> Rational {
    leaf.path().map(|n| f.get(&n)).sum()
}

fn check_slice_depth(d: usize, f: &TreeVector) -> Result<()> {
    if d > SLICE_DEPTH_CAP {
        return Err(LabError::CapExceeded {
            what: "slice depth",
            limit: SLICE_DEPTH_CAP,
            actual: d,
        });
    }
    if f.depth() > d {
        return Err(LabError::InvalidInput(format!(
            "functional reaches depth {} beyond {d}",
            f.depth()
        )));
    }
    Ok(())
}

/// Distance between two path vertices.
pub fn vertex_distance(a: &Node, b: &Node) -> Result<Rational> {
    Ok(eu_norm(&path_vector(a).minus(&path_vector(b)))?.value)
}

/// Scans every vertex of `K` at depth `d`, keeps those strictly inside the
/// slice, and bounds the diameter by the farthest member pair.
pub fn slice_vertices(d: usize, s: &SliceSpec) -> Result<SliceReport> {
    check_slice_depth(d, &s.functional)?;
    let values: Vec<(Node, Rational)> = convex::leaves(d)
        .map(|leaf| {
            let v = path_value(&s.functional, &leaf);
            (leaf, v)
        })
        .collect();
    let sup = values
        .iter()
        .map(|(_, v)| v.clone())
        .max()
        .expect("K has a vertex");
    let threshold = &sup - &s.beta;
    let members: Vec<Node> = values
        .into_iter()
        .filter(|(_, v)| *v > threshold)
        .map(|(n, _)| n)
        .collect();
    let mut diameter_bound = Rational::zero();
    let mut witness = None;
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            let dist = vertex_distance(a, b)?;
            if dist > diameter_bound {
                diameter_bound = dist;
                witness = Some((*a, *b));
            }
        }
    }
    Ok(SliceReport {
        sup,
        members,
        diameter_bound,
        witness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ForkedPair {
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub pair: (Node, Node),
}

/// For `f` supported on levels `≤ d0 ≤ d − 2`, forks the first maximizing
/// vertex below level `d0 + 1`. Both branches agree with it wherever `f`
/// can see, so both lie in every slice of `f`, and their difference has a
/// `±1` coordinate.
pub fn shallow_slice_bound(d: usize, d0: usize, s: &SliceSpec) -> Result<ForkedPair> {
    if d < 2 || d0 > d - 2 {
        return Err(LabError::InvalidInput(format!(
            "functional level {d0} must be at most depth − 2 = {}",
            d as i64 - 2
        )));
    }
    check_slice_depth(d, &s.functional)?;
    if s.functional.depth() > d0 && !s.functional.is_zero() {
        return Err(LabError::InvalidInput(format!(
            "functional reaches level {} beyond {d0}",
            s.functional.depth()
        )));
    }
    let leaf = convex::leaves(d)
        .map(|leaf| {
            let v = path_value(&s.functional, &leaf);
            (leaf, v)
        })
        .fold(None::<(Node, Rational)>, |best, (leaf, v)| match best {
            Some((_, ref b)) if *b >= v => best,
            _ => Some((leaf, v)),
        })
        .map(|(leaf, _)| leaf)
        .expect("K has a vertex");
    let fork = leaf.truncate(d0 + 1);
    let first = fork.child(0);
    let second = fork.child(1);
    let extend = |n: Node| {
        let mut n = n;
        for i in n.len()..d {
            n = n.child(leaf.bit(i));
        }
        n
    };
    let pair = (extend(first), extend(second));
    Ok(ForkedPair {
        bound: vertex_distance(&pair.0, &pair.1)?,
        pair,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationRow {
    pub alpha: Node,
    #[serde(with = "rational::serde_str")]
    pub separation: Rational,
}

/// `‖d_{α0} − d_{α1}‖` for every `|α| < d`, in level order.
pub fn separation_table(d: usize) -> Result<Vec<SeparationRow>> {
    if d > SEPARATION_DEPTH_CAP {
        return Err(LabError::CapExceeded {
            what: "separation depth",
            limit: SEPARATION_DEPTH_CAP,
            actual: d,
        });
    }
    convex::nodes_up_to(d.saturating_sub(1))
        .filter(|_| d > 0)
        .map(|alpha| {
            let diff = d_alpha(&alpha.child(0), d)?.minus(&d_alpha(&alpha.child(1), d)?);
            Ok(SeparationRow {
                alpha,
                separation: eu_norm(&diff)?.value,
            })
        })
        .collect()
}

const COEFFICIENTS: [(i64, i64); 5] = [(-1, 1), (-1, 2), (0, 1), (1, 2), (1, 1)];

/// Coefficients drawn uniformly from `{−1, −½, 0, ½, 1}` on every node of
/// level at most `d0`.
pub fn random_functional<R: Rng>(rng: &mut R, d0: usize) -> TreeVector {
    TreeVector::from_entries(convex::nodes_up_to(d0).map(|n| {
        let (p, q) = COEFFICIENTS[rng.gen_range(0..COEFFICIENTS.len())];
        (n, rational::ratio(p, q))
    }))
}

const WIDTHS: [(i64, i64); 4] = [(1, 8), (1, 4), (1, 2), (1, 1)];

pub fn random_slice<R: Rng>(rng: &mut R, d0: usize) -> SliceSpec {
    let functional = random_functional(rng, d0);
    let (p, q) = WIDTHS[rng.gen_range(0..WIDTHS.len())];
    SliceSpec {
        functional,
        beta: rational::ratio(p, q),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexSliceTrial {
    pub trial: usize,
    /// Weights of the combination, one per slice.
    #[serde(serialize_with = "rational_list")]
    pub weights: Vec<Rational>,
    /// Distance between the two combined points.
    #[serde(with = "rational::serde_str")]
    pub distance: Rational,
}

fn rational_list<S: serde::Serializer>(
    v: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational::format_rational))
}

/// One trial: `n` random slices at depth `d`, the farthest member pair of
/// each, and the distance between their combinations under random convex
/// weights. Slices with a single member contribute that vertex twice.
pub fn convex_combination_slice_trial<R: Rng>(
    rng: &mut R,
    d: usize,
    n: usize,
    trial: usize,
) -> Result<ConvexSliceTrial> {
    if n == 0 {
        return Err(LabError::InvalidInput(
            "at least one slice is required".into(),
        ));
    }
    let d0 = d.saturating_sub(2);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let spec = random_slice(rng, d0);
        let report = slice_vertices(d, &spec)?;
        pairs.push(
            report
                .witness
                .unwrap_or((report.members[0], report.members[0])),
        );
    }
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=8)).collect();
    let total: i64 = raw.iter().sum();
    let weights: Vec<Rational> = raw.iter().map(|w| rational::ratio(*w, total)).collect();
    let diff = pairs
        .iter()
        .zip(&weights)
        .fold(TreeVector::zero(), |acc, ((a, b), w)| {
            acc.plus(&path_vector(a).minus(&path_vector(b)).scaled(w))
        });
    debug_assert!(weights.iter().sum::<Rational>().is_one());
    Ok(ConvexSliceTrial {
        trial,
        weights,
        distance: eu_norm(&diff)?.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::tree::enumerate_antichains;
    use crate::treespace::induced_vector;
    use crate::tsirelson::tsirelson_norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n(s: &str) -> Node {
        s.parse().unwrap()
    }

    #[test]
    fn root_functional_keeps_everything() {
        let s = SliceSpec::new(TreeVector::basis(Node::ROOT), ratio(1, 3)).unwrap();
        let r = slice_vertices(3, &s).unwrap();
        assert_eq!(r.sup, int(1));
        assert_eq!(r.members.len(), 8);
        let (a, b) = r.witness.unwrap();
        assert_eq!(vertex_distance(&a, &b).unwrap(), r.diameter_bound);
    }

    #[test]
    fn left_functional_selects_left_half() {
        let s = SliceSpec::new(TreeVector::basis(n("0")), ratio(1, 4)).unwrap();
        let r = slice_vertices(4, &s).unwrap();
        assert_eq!(r.members.len(), 8);
        assert!(r.members.iter().all(|m| m.bit(0) == 0));
        assert!(r.diameter_bound >= int(1));
    }

    #[test]
    fn bound_grows_with_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = random_functional(&mut rng, 2);
            let mut last = Rational::zero();
            for beta in [ratio(1, 8), ratio(1, 2), int(1), int(3)] {
                let r = slice_vertices(4, &SliceSpec::new(f.clone(), beta).unwrap()).unwrap();
                assert!(r.diameter_bound >= last);
                last = r.diameter_bound;
            }
        }
    }

    #[test]
    fn vertices_dominate_combinations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let verts = convex::k_vertices(4).unwrap();
        for _ in 0..20 {
            let f = random_functional(&mut rng, 4);
            let sup = slice_vertices(4, &SliceSpec::new(f.clone(), int(1)).unwrap())
                .unwrap()
                .sup;
            let raw: Vec<i64> = verts.iter().map(|_| rng.gen_range(0..5)).collect();
            let total: i64 = raw.iter().sum::<i64>().max(1);
            let point = verts
                .iter()
                .zip(&raw)
                .fold(TreeVector::zero(), |acc, (v, w)| {
                    acc.plus(&v.scaled(&ratio(*w, total)))
                });
            if raw.iter().any(|w| *w > 0) {
                assert!(f.pairing(&point) <= sup);
            }
        }
    }

    #[test]
    fn shallow_bound_at_least_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (d, d0) in [(3, 1), (4, 2), (5, 1)] {
            for _ in 0..15 {
                let s = random_slice(&mut rng, d0);
                let r = shallow_slice_bound(d, d0, &s).unwrap();
                assert!(r.bound >= int(1));
                let report = slice_vertices(d, &s).unwrap();
                assert!(report.members.contains(&r.pair.0) && report.members.contains(&r.pair.1));
            }
        }
    }

    #[test]
    fn shallow_bound_zero_functional_and_table_value() {
        let zero = SliceSpec::new(TreeVector::zero(), int(1)).unwrap();
        assert!(shallow_slice_bound(4, 2, &zero).unwrap().bound >= int(1));
        let s = SliceSpec::new(TreeVector::basis(n("0")), ratio(1, 2)).unwrap();
        let r = shallow_slice_bound(6, 1, &s).unwrap();
        assert_eq!(r.pair, (n("000000"), n("001000")));
        assert_eq!(r.bound, int(1));
    }

    #[test]
    fn shallow_bound_rejects_bad_levels() {
        let s = SliceSpec::new(TreeVector::basis(n("01")), int(1)).unwrap();
        assert!(shallow_slice_bound(4, 3, &s).is_err());
        assert!(shallow_slice_bound(4, 1, &s).is_err());
        assert!(SliceSpec::new(TreeVector::zero(), int(0)).is_err());
    }

    /// Exhaustive maximum over the antichains of the support.
    fn brute(x: &TreeVector) -> Rational {
        let support: Vec<Node> = x.support().copied().collect();
        enumerate_antichains(&support)
            .unwrap()
            .map(|a| tsirelson_norm(&induced_vector(x, &a)).unwrap())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    #[test]
    fn separation_rows() {
        for d in 1..=5 {
            let table = separation_table(d).unwrap();
            assert_eq!(table.len(), (1 << d) - 1);
            for row in &table {
                assert!(row.separation >= int(1), "{d} {row:?}");
                if row.alpha.len() == d - 1 {
                    assert_eq!(row.separation, int(1));
                    let diff = TreeVector::from_entries([
                        (row.alpha.child(0), int(1)),
                        (row.alpha.child(1), int(-1)),
                    ]);
                    assert_eq!(brute(&diff), int(1));
                }
            }
            for row in &table {
                if let Some(parent) = row.alpha.parent() {
                    let sibling = parent.child(1 - row.alpha.bit(row.alpha.len() - 1));
                    let twin = table.iter().find(|r| r.alpha == sibling).unwrap();
                    assert_eq!(twin.separation, row.separation);
                }
            }
        }
    }

    #[test]
    fn single_slice_combination_is_the_diameter_bound() {
        let seed = 21;
        let mut a = ChaCha8Rng::seed_from_u64(seed);
        let mut b = ChaCha8Rng::seed_from_u64(seed);
        let t = convex_combination_slice_trial(&mut a, 4, 1, 0).unwrap();
        let spec = random_slice(&mut b, 2);
        assert_eq!(t.weights, vec![int(1)]);
        assert_eq!(t.distance, slice_vertices(4, &spec).unwrap().diameter_bound);
    }
}
