//! Tsirelson's norm on finitely supported vectors.
//!
//! The norm is the solution of
//!
//! ```text
//! ‖x‖ = max( max_k |x_k| , ½ sup Σ_j ‖E_j x‖ )
//! ```
//!
//! where the sup runs over admissible interval systems
//! `E_1 < E_2 < … < E_n` with `n ≤ min E_1`. For a finite support the
//! recursion is well founded: a split into two or more nonempty pieces only
//! refers to strictly shorter runs of the support, so the norms of all
//! contiguous runs can be filled in by increasing length.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};
use crate::rational::{self, Rational, Scalar};

/// Support cap for the memoized engine.
pub const DEFAULT_SUPPORT_CAP: usize = 16;

/// Support cap for the exhaustive oracle.
pub const ORACLE_SUPPORT_CAP: usize = 10;

/// A finitely supported vector on the Tsirelson basis `t_1, t_2, …`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NatVector {
    entries: BTreeMap<u32, Rational>,
}

impl NatVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(index: u32) -> Self {
        let mut v = Self::zero();
        v.set(index, rational::int(1));
        v
    }

    /// Panics on index 0; indices start at 1.
    pub fn from_entries(entries: impl IntoIterator<Item = (u32, Rational)>) -> Self {
        let mut v = Self::zero();
        for (k, value) in entries {
            let sum = v.get(k) + value;
            v.set(k, sum);
        }
        v
    }

    pub fn get(&self, index: u32) -> Rational {
        self.entries
            .get(&index)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, index: u32, value: Rational) {
        assert!(index >= 1, "Tsirelson indices start at 1");
        if value.is_zero() {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self::from_entries(self.iter().map(|(k, v)| (k, v * factor)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::from_entries(self.iter().chain(other.iter()).map(|(k, v)| (k, v.clone())))
    }

    /// Restriction to the indices in `lo..=hi`.
    pub fn project(&self, lo: u32, hi: u32) -> Self {
        NatVector {
            entries: self
                .entries
                .range(lo..=hi)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
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
}

#[derive(Serialize, Deserialize)]
struct NatEntryJson {
    index: u32,
    #[serde(with = "rational::serde_str")]
    value: Rational,
}

#[derive(Serialize, Deserialize)]
struct NatVectorJson {
    entries: Vec<NatEntryJson>,
}

impl Serialize for NatVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NatVectorJson {
            entries: self
                .iter()
                .map(|(index, v)| NatEntryJson {
                    index,
                    value: v.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NatVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = NatVectorJson::deserialize(d)?;
        let mut v = NatVector::zero();
        for e in raw.entries {
            if e.index == 0 {
                return Err(serde::de::Error::custom("index must be at least 1"));
            }
            if v.entries.contains_key(&e.index) {
                return Err(serde::de::Error::custom(format!(
                    "duplicate index {} in entries",
                    e.index
                )));
            }
            v.set(e.index, e.value);
        }
        Ok(v)
    }
}

/// Successive integer intervals `[a_1,b_1] < … < [a_n,b_n]` with
/// `n ≤ a_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u32, u32)>", into = "Vec<(u32, u32)>")]
pub struct IntervalSystem(Vec<(u32, u32)>);

impl IntervalSystem {
    pub fn new(intervals: Vec<(u32, u32)>) -> Result<Self> {
        let Some(&(first, _)) = intervals.first() else {
            return Err(LabError::InvalidInput("empty interval system".into()));
        };
        for &(a, b) in &intervals {
            if a > b {
                return Err(LabError::InvalidInput(format!(
                    "interval [{a}, {b}] is empty"
                )));
            }
        }
        for w in intervals.windows(2) {
            if w[0].1 >= w[1].0 {
                return Err(LabError::InvalidInput(format!(
                    "intervals {:?} and {:?} are not successive",
                    w[0], w[1]
                )));
            }
        }
        if intervals.len() > first as usize {
            return Err(LabError::InvalidInput(format!(
                "{} intervals starting at {first} is not admissible",
                intervals.len()
            )));
        }
        Ok(IntervalSystem(intervals))
    }

    pub fn intervals(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<(u32, u32)>> for IntervalSystem {
    type Error = LabError;
    fn try_from(v: Vec<(u32, u32)>) -> Result<Self> {
        IntervalSystem::new(v)
    }
}

impl From<IntervalSystem> for Vec<(u32, u32)> {
    fn from(s: IntervalSystem) -> Self {
        s.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of<S: Scalar>(value: &S) -> Sign {
        if value.is_negative_value() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn apply<S: Scalar>(self, value: &S) -> S {
        match self {
            Sign::Plus => value.clone(),
            Sign::Minus => value.negated(),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A norming functional in tree form: leaves are signed coordinate
/// functionals, internal nodes average their children with weight ½ over
/// an admissible interval system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormCertificate {
    Leaf {
        index: u32,
        sign: Sign,
    },
    Split {
        intervals: IntervalSystem,
        children: Vec<NormCertificate>,
    },
}

impl NormCertificate {
    /// Applies the functional to the coordinates given by `coeff`.
    pub fn evaluate_with<S: Scalar>(&self, coeff: &impl Fn(u32) -> S) -> S {
        match self {
            NormCertificate::Leaf { index, sign } => sign.apply(&coeff(*index)),
            NormCertificate::Split { children, .. } => children
                .iter()
                .fold(S::zero_value(), |acc, c| acc.plus(&c.evaluate_with(coeff)))
                .half(),
        }
    }

    pub fn evaluate(&self, x: &NatVector) -> Rational {
        self.evaluate_with(&|k| x.get(k))
    }

    /// Flat form: `(index, sign, depth)` meaning coefficient `±2^-depth`.
    pub fn coefficients(&self) -> Vec<(u32, Sign, u32)> {
        let mut out = Vec::new();
        self.collect_coefficients(0, &mut out);
        out
    }

    fn collect_coefficients(&self, depth: u32, out: &mut Vec<(u32, Sign, u32)>) {
        match self {
            NormCertificate::Leaf { index, sign } => out.push((*index, *sign, depth)),
            NormCertificate::Split { children, .. } => {
                for c in children {
                    c.collect_coefficients(depth + 1, out);
                }
            }
        }
    }

    pub fn with_all_signs_flipped(&self) -> Self {
        match self {
            NormCertificate::Leaf { index, sign } => NormCertificate::Leaf {
                index: *index,
                sign: sign.flipped(),
            },
            NormCertificate::Split {
                intervals,
                children,
            } => NormCertificate::Split {
                intervals: intervals.clone(),
                children: children.iter().map(Self::with_all_signs_flipped).collect(),
            },
        }
    }

    /// Re-indexes every leaf (and interval endpoint) through `map`, which
    /// must be strictly increasing on the indices used.
    pub fn reindex(&self, map: &impl Fn(u32) -> u32) -> Result<Self> {
        Ok(match self {
            NormCertificate::Leaf { index, sign } => NormCertificate::Leaf {
                index: map(*index),
                sign: *sign,
            },
            NormCertificate::Split {
                intervals,
                children,
            } => NormCertificate::Split {
                intervals: IntervalSystem::new(
                    intervals
                        .intervals()
                        .iter()
                        .map(|&(a, b)| (map(a), map(b)))
                        .collect(),
                )?,
                children: children
                    .iter()
                    .map(|c| c.reindex(map))
                    .collect::<Result<_>>()?,
            },
        })
    }

    fn index_range(&self) -> (u32, u32) {
        match self {
            NormCertificate::Leaf { index, .. } => (*index, *index),
            NormCertificate::Split { intervals, .. } => {
                let iv = intervals.intervals();
                (iv[0].0, iv[iv.len() - 1].1)
            }
        }
    }

    /// Structural check: every split has one child per interval, each
    /// child lives inside its interval, and interval systems are
    /// admissible (enforced by [`IntervalSystem`]).
    pub fn validate(&self) -> Result<()> {
        match self {
            NormCertificate::Leaf { index, .. } if *index == 0 => {
                Err(LabError::InvalidInput("certificate leaf at index 0".into()))
            }
            NormCertificate::Leaf { .. } => Ok(()),
            NormCertificate::Split {
                intervals,
                children,
            } => {
                if intervals.len() != children.len() {
                    return Err(LabError::InvalidInput(
                        "split has mismatched interval and child counts".into(),
                    ));
                }
                for (&(a, b), child) in intervals.intervals().iter().zip(children) {
                    child.validate()?;
                    let (lo, hi) = child.index_range();
                    if lo < a || hi > b {
                        return Err(LabError::InvalidInput(format!(
                            "child spanning [{lo}, {hi}] escapes interval [{a}, {b}]"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Choice {
    Leaf(usize),
    /// First group `[start..=first_end]`, remaining groups from the
    /// best partition of `first_end+1..=j` into at most `rest` groups.
    Split {
        start: usize,
        first_end: usize,
        rest: usize,
    },
}

/// Norms of every contiguous run of a sorted support.
pub(crate) struct RunTable<S> {
    indices: Vec<u32>,
    signs: Vec<Sign>,
    m: usize,
    norm: Vec<S>,
    choice: Vec<Choice>,
    /// `partition[(j*m + q)*(m+1) + c]`: 0 for "single group q..=j",
    /// else `r+1` for "first group q..=r".
    partition: Vec<u8>,
}

impl<S: Scalar> RunTable<S> {
    /// `entries` must be sorted by strictly increasing index ≥ 1, with
    /// nonzero values.
    pub(crate) fn build(entries: &[(u32, S)]) -> Self {
        let m = entries.len();
        assert!(m < 255, "support too large for the run table");
        let indices: Vec<u32> = entries.iter().map(|(k, _)| *k).collect();
        let signs: Vec<Sign> = entries.iter().map(|(_, v)| Sign::of(v)).collect();
        let abs: Vec<S> = entries.iter().map(|(_, v)| v.abs_value()).collect();
        let at = |i: usize, j: usize| i * m + j;
        let hat = |j: usize, q: usize, c: usize| (j * m + q) * (m + 1) + c;

        let mut norm = vec![S::zero_value(); m * m];
        let mut choice = vec![Choice::Leaf(0); m * m];
        let mut partition = vec![0u8; m * m * (m + 1)];
        // best partition sums for the current right end j, indexed [q][c]
        let mut best_part = vec![S::zero_value(); m * (m + 1)];

        for j in 0..m {
            for i in (0..=j).rev() {
                let mut best = abs[i].clone();
                let mut arg = Choice::Leaf(i);
                for (k, a) in abs.iter().enumerate().take(j + 1).skip(i + 1) {
                    if *a > best {
                        best = a.clone();
                        arg = Choice::Leaf(k);
                    }
                }
                for start in i..=j {
                    let cap = (indices[start] as usize).min(j - start + 1);
                    if cap < 2 {
                        continue;
                    }
                    for first_end in start..j {
                        let total = norm[at(start, first_end)]
                            .plus(&best_part[(first_end + 1) * (m + 1) + cap - 1]);
                        let candidate = total.half();
                        if candidate > best {
                            best = candidate;
                            arg = Choice::Split {
                                start,
                                first_end,
                                rest: cap - 1,
                            };
                        }
                    }
                }
                norm[at(i, j)] = best;
                choice[at(i, j)] = arg;

                // at most c groups covering i..=j exactly
                best_part[i * (m + 1) + 1] = norm[at(i, j)].clone();
                partition[hat(j, i, 1)] = 0;
                for c in 2..=m {
                    let mut value = best_part[i * (m + 1) + c - 1].clone();
                    let mut code = partition[hat(j, i, c - 1)];
                    if c <= j - i + 1 {
                        for r in i..j {
                            let v = norm[at(i, r)].plus(&best_part[(r + 1) * (m + 1) + c - 1]);
                            if v > value {
                                value = v;
                                code = (r + 1) as u8;
                            }
                        }
                    }
                    best_part[i * (m + 1) + c] = value;
                    partition[hat(j, i, c)] = code;
                }
            }
        }
        RunTable {
            indices,
            signs,
            m,
            norm,
            choice,
            partition,
        }
    }

    pub(crate) fn full_norm(&self) -> S {
        if self.m == 0 {
            S::zero_value()
        } else {
            self.norm[self.m - 1].clone()
        }
    }

    pub(crate) fn certificate(&self) -> Option<NormCertificate> {
        (self.m > 0).then(|| self.certificate_of(0, self.m - 1))
    }

    fn certificate_of(&self, i: usize, j: usize) -> NormCertificate {
        let m = self.m;
        match self.choice[i * m + j] {
            Choice::Leaf(k) => NormCertificate::Leaf {
                index: self.indices[k],
                sign: self.signs[k],
            },
            Choice::Split {
                start,
                first_end,
                rest,
            } => {
                let mut groups = vec![(start, first_end)];
                let (mut q, mut c) = (first_end + 1, rest);
                loop {
                    let code = self.partition[(j * m + q) * (m + 1) + c] as usize;
                    if code == 0 {
                        groups.push((q, j));
                        break;
                    }
                    groups.push((q, code - 1));
                    q = code;
                    c -= 1;
                }
                let intervals = groups
                    .iter()
                    .map(|&(a, b)| (self.indices[a], self.indices[b]))
                    .collect();
                NormCertificate::Split {
                    intervals: IntervalSystem::new(intervals)
                        .expect("engine produced an inadmissible system"),
                    children: groups
                        .iter()
                        .map(|&(a, b)| self.certificate_of(a, b))
                        .collect(),
                }
            }
        }
    }
}

/// Norm of a sorted, zero-free coefficient list, with or without the
/// certificate.
pub(crate) fn norm_of_sorted<S: Scalar>(entries: &[(u32, S)]) -> S {
    RunTable::build(entries).full_norm()
}

fn check_cap(x: &NatVector, cap: usize, what: &'static str) -> Result<()> {
    if x.support_len() > cap {
        return Err(LabError::CapExceeded {
            what,
            limit: cap,
            actual: x.support_len(),
        });
    }
    Ok(())
}

fn sorted_entries(x: &NatVector) -> Vec<(u32, Rational)> {
    x.iter().map(|(k, v)| (k, v.clone())).collect()
}

pub fn tsirelson_norm(x: &NatVector) -> Result<Rational> {
    check_cap(x, DEFAULT_SUPPORT_CAP, "Tsirelson support")?;
    Ok(norm_of_sorted(&sorted_entries(x)))
}

/// The norm together with a functional that attains it on `x`.
/// The zero vector gets the functional `t*_1`.
pub fn tsirelson_norm_with_certificate(x: &NatVector) -> Result<(Rational, NormCertificate)> {
    check_cap(x, DEFAULT_SUPPORT_CAP, "Tsirelson support")?;
    let table = RunTable::build(&sorted_entries(x));
    let cert = table.certificate().unwrap_or(NormCertificate::Leaf {
        index: 1,
        sign: Sign::Plus,
    });
    Ok((table.full_norm(), cert))
}

/// Exhaustive oracle: recursion over every admissible interval system,
/// no memoization. Intervals are identified by the run of support points
/// they contain, with the left endpoint of `E_1` pushed as far right as
/// possible (its first support point), which is the most permissive
/// admissibility test for that run. Groups may leave gaps.
pub fn tsirelson_norm_bruteforce(x: &NatVector) -> Result<Rational> {
    check_cap(x, ORACLE_SUPPORT_CAP, "Tsirelson oracle support")?;
    let entries: Vec<(u32, Rational)> = x.iter().map(|(k, v)| (k, v.abs())).collect();
    Ok(bruteforce(&entries))
}

fn bruteforce(entries: &[(u32, Rational)]) -> Rational {
    let mut best = entries
        .iter()
        .map(|(_, v)| v.clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let m = entries.len();
    for first in 0..m {
        let allowed = entries[first].0 as usize;
        let mut groups = Vec::new();
        extend_systems(entries, first, allowed, &mut groups, &mut best);
    }
    best
}

/// Extends the partial system `groups` with runs starting at or after
/// `from`; each complete system with at least two groups is scored.
fn extend_systems(
    entries: &[(u32, Rational)],
    from: usize,
    allowed: usize,
    groups: &mut Vec<(usize, usize)>,
    best: &mut Rational,
) {
    if groups.len() >= 2 {
        let total = groups
            .iter()
            .map(|&(a, b)| bruteforce(&entries[a..=b]))
            .fold(Rational::zero(), |acc, v| acc + v);
        let value = total / rational::int(2);
        if value > *best {
            *best = value;
        }
    }
    if groups.len() == allowed {
        return;
    }
    // the first group must start exactly at `from`; later groups anywhere after
    let starts = if groups.is_empty() {
        from..from + 1
    } else {
        from..entries.len()
    };
    for a in starts {
        for b in a..entries.len() {
            groups.push((a, b));
            extend_systems(entries, b + 1, allowed, groups, best);
            groups.pop();
        }
    }
}

/// `rhs − ‖x‖` where `rhs` re-evaluates the right-hand side of the
/// defining equation with the engine's values for every projection.
/// Zero for a correct engine.
pub fn fixed_point_residual(x: &NatVector) -> Result<Rational> {
    let norm = tsirelson_norm(x)?;
    let entries = sorted_entries(x);
    let m = entries.len();
    let mut run_norm = BTreeMap::new();
    for a in 0..m {
        for b in a..m {
            let piece = NatVector::from_entries(entries[a..=b].iter().cloned());
            run_norm.insert((a, b), tsirelson_norm(&piece)?);
        }
    }
    let mut rhs = x.sup_norm();
    for start in 0..m {
        let allowed = entries[start].0 as usize;
        for end in start + 1..m {
            // every composition of start..=end into consecutive groups
            let inner = end - start;
            for mask in 1u32..(1 << inner) {
                let groups = mask.count_ones() as usize + 1;
                if groups > allowed {
                    continue;
                }
                let mut total = Rational::zero();
                let mut a = start;
                for cut in 0..inner {
                    if mask >> cut & 1 == 1 {
                        total += &run_norm[&(a, start + cut)];
                        a = start + cut + 1;
                    }
                }
                total += &run_norm[&(a, end)];
                let value = total / rational::int(2);
                if value > rhs {
                    rhs = value;
                }
            }
        }
    }
    Ok(rhs - norm)
}
