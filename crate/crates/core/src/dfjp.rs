//! Gauges of the interpolation sets `2ⁿW + 2⁻ⁿB` and the resulting norm
//! `|||y||| = (Σ_n ‖y‖_n²)^{1/2}`.
//!
//! The tree-space norm is polyhedral: it is the maximum of the finitely
//! many functionals read off antichain certificates. Every gauge or
//! distance here is therefore a linear program over the vertex weights of
//! `W` with one constraint per functional. The programs are solved by
//! constraint generation: solve with the cuts found so far (a lower
//! bound), evaluate the true norm at the solution (an upper bound with an
//! explicit decomposition), add the functional that certifies that norm,
//! and repeat until the bracket is narrower than the tolerance.
//!
//! The `W`-gauge itself is exact, via the rational simplex in [`crate::lp`].

use minilp::{ComparisonOp, OptimizationDirection, Problem, Solution, Variable};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::convex::{self, WPolytope};
use crate::error::{LabError, Result};
use crate::lp::{self, LpOutcome};
use crate::rational::{self, Rational};
use crate::tree::{Node, TreeVector};
use crate::treespace::{eu_norm_f64, tsirelson_index};
use crate::tsirelson::{NormCertificate, Sign};

/// Largest depth accepted by the exact `W`-gauge (its program has
/// `2^{d+1}` columns and as many rows).
pub const GAUGE_W_DEPTH_CAP: usize = 7;

/// Largest depth accepted by the cutting-plane solvers.
pub const GAUGE_DEPTH_CAP: usize = 7;

/// Cut budget per solve.
pub const DEFAULT_MAX_CUTS: usize = 5000;

fn decimal<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn decimals<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn node_index(node: &Node) -> usize {
    (1usize << node.len()) - 1 + node.index_in_level() as usize
}

fn node_at(index: usize) -> Node {
    let len = (usize::BITS - 1 - (index + 1).leading_zeros()) as usize;
    Node::at_level(len, (index + 1 - (1 << len)) as u64)
}

/// Dense node-indexed view of `W` at a fixed depth.
struct DenseW {
    polytope: WPolytope,
    /// node indices along each vertex path
    paths: Vec<Vec<usize>>,
    signs: Vec<f64>,
    dim: usize,
}

impl DenseW {
    fn new(d: usize) -> Result<Self> {
        if d > GAUGE_DEPTH_CAP {
            return Err(LabError::CapExceeded {
                what: "gauge depth",
                limit: GAUGE_DEPTH_CAP,
                actual: d,
            });
        }
        let polytope = WPolytope::new(d)?;
        let paths = polytope
            .vertices()
            .iter()
            .map(|v| v.leaf.path().map(|n| node_index(&n)).collect())
            .collect();
        let signs = polytope
            .vertices()
            .iter()
            .map(|v| if v.negative { -1.0 } else { 1.0 })
            .collect();
        Ok(DenseW {
            polytope,
            paths,
            signs,
            dim: (1 << (d + 1)) - 1,
        })
    }

    fn vertex_count(&self) -> usize {
        self.paths.len()
    }

    fn dense(&self, y: &TreeVector) -> Result<Vec<f64>> {
        if y.depth() > self.polytope.depth() {
            return Err(LabError::InvalidInput(format!(
                "vector support reaches depth {} beyond the working depth {}",
                y.depth(),
                self.polytope.depth()
            )));
        }
        let mut out = vec![0.0; self.dim];
        for (n, v) in y.iter() {
            out[node_index(n)] = rational::to_f64(v);
        }
        Ok(out)
    }

    fn combine(&self, weights: &[f64], scale: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for ((path, sign), w) in self.paths.iter().zip(&self.signs).zip(weights) {
            if *w == 0.0 {
                continue;
            }
            for &k in path {
                out[k] += scale * sign * w;
            }
        }
        out
    }

    /// `⟨f, v_i⟩` for every vertex.
    fn pairings(&self, functional: &[(usize, f64)]) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim];
        for &(k, c) in functional {
            dense[k] += c;
        }
        self.paths
            .iter()
            .zip(&self.signs)
            .map(|(path, sign)| sign * path.iter().map(|&k| dense[k]).sum::<f64>())
            .collect()
    }

    /// Pads nonnegative weights with total at most 1 to a convex
    /// combination by splitting the slack over `±v_0`.
    fn pad_to_convex(&self, weights: &mut [f64]) {
        let total: f64 = weights.iter().sum();
        let slack = (1.0 - total).max(0.0);
        let half = self.vertex_count() / 2;
        weights[0] += slack / 2.0;
        weights[half] += slack / 2.0;
    }
}

fn sparse(dense: &[f64]) -> Vec<(Node, f64)> {
    dense
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(k, v)| (node_at(k), *v))
        .collect()
}

/// Norm of a dense vector plus the sparse functional that attains it.
fn norm_with_functional(dense: &[f64]) -> (f64, Vec<(usize, f64)>) {
    let (value, witness, cert) = eu_norm_f64(&sparse(dense));
    (value, functional_of(&cert, &witness))
}

fn functional_of(cert: &NormCertificate, witness: &[Node]) -> Vec<(usize, f64)> {
    cert.coefficients()
        .into_iter()
        .filter_map(|(k, sign, depth)| {
            let node = witness.iter().find(|n| tsirelson_index(n) == k)?;
            let magnitude = 0.5f64.powi(depth as i32);
            Some((
                node_index(node),
                if sign == Sign::Plus {
                    magnitude
                } else {
                    -magnitude
                },
            ))
        })
        .collect()
}

fn dot(functional: &[(usize, f64)], dense: &[f64]) -> f64 {
    functional.iter().map(|&(k, c)| c * dense[k]).sum()
}

fn lp_error(e: minilp::Error) -> LabError {
    LabError::Solver(e.to_string())
}

/// Holds the growing cut model `min obj` over vertex weights plus one
/// extra nonnegative variable.
struct CutModel {
    solution: Solution,
    weights: Vec<Variable>,
    extra: Variable,
}

impl CutModel {
    /// `extra` is the objective variable; `weight_budget` is either a
    /// fixed bound on Σω or, when `None`, the constraint Σω ≤ extra.
    fn new(
        vertices: usize,
        weight_budget: Option<f64>,
        first_cut: (Vec<f64>, f64, f64),
    ) -> Result<Self> {
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let weights: Vec<Variable> = (0..vertices)
            .map(|_| problem.add_var(0.0, (0.0, f64::INFINITY)))
            .collect();
        let extra = problem.add_var(1.0, (0.0, f64::INFINITY));
        let mut budget: Vec<(Variable, f64)> = weights.iter().map(|&v| (v, 1.0)).collect();
        match weight_budget {
            Some(limit) => problem.add_constraint(budget.as_slice(), ComparisonOp::Le, limit),
            None => {
                budget.push((extra, -1.0));
                problem.add_constraint(budget.as_slice(), ComparisonOp::Le, 0.0);
            }
        }
        let (coeffs, extra_coeff, rhs) = first_cut;
        let mut row: Vec<(Variable, f64)> = weights.iter().copied().zip(coeffs).collect();
        row.push((extra, extra_coeff));
        problem.add_constraint(row.as_slice(), ComparisonOp::Le, rhs);
        let solution = problem.solve().map_err(lp_error)?;
        Ok(CutModel {
            solution,
            weights,
            extra,
        })
    }

    fn add_cut(self, coeffs: Vec<f64>, extra_coeff: f64, rhs: f64) -> Result<Self> {
        let mut row: Vec<(Variable, f64)> = self.weights.iter().copied().zip(coeffs).collect();
        row.push((self.extra, extra_coeff));
        let solution = self
            .solution
            .add_constraint(row.as_slice(), ComparisonOp::Le, rhs)
            .map_err(lp_error)?;
        Ok(CutModel { solution, ..self })
    }

    fn objective(&self) -> f64 {
        self.solution.objective()
    }

    fn weight_values(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|v| self.solution[*v].max(0.0))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceResult {
    /// Attained distance at `weights` (an upper bound on the minimum).
    #[serde(serialize_with = "decimal")]
    pub distance: f64,
    /// Lower bound from the cut model.
    #[serde(serialize_with = "decimal")]
    pub lower: f64,
    /// Convex weights over the vertices of `W`, in [`WPolytope`] order.
    #[serde(serialize_with = "decimals")]
    pub weights: Vec<f64>,
    pub iterations: usize,
}

/// `min_{w ∈ W} ‖y − c·w‖`, within `tol`.
pub fn distance_to_scaled_w(y: &TreeVector, c: f64, d: usize, tol: f64) -> Result<DistanceResult> {
    if c.is_nan() || c <= 0.0 || tol.is_nan() || tol <= 0.0 {
        return Err(LabError::InvalidInput(
            "scale and tolerance must be positive".into(),
        ));
    }
    let w = DenseW::new(d)?;
    let target = w.dense(y)?;
    distance_dense(&w, &target, c, tol, DEFAULT_MAX_CUTS)
}

fn distance_dense(
    w: &DenseW,
    target: &[f64],
    c: f64,
    tol: f64,
    max_cuts: usize,
) -> Result<DistanceResult> {
    let cut_for = |functional: &[(usize, f64)]| {
        let coeffs: Vec<f64> = w.pairings(functional).iter().map(|p| -c * p).collect();
        (coeffs, -1.0, -dot(functional, target))
    };
    let (_, f0) = norm_with_functional(target);
    let mut model = CutModel::new(w.vertex_count(), Some(1.0), cut_for(&f0))?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for iteration in 1..=max_cuts {
        let lower = model.objective();
        let weights = model.weight_values();
        let point = w.combine(&weights, c);
        let residual: Vec<f64> = target.iter().zip(&point).map(|(a, b)| a - b).collect();
        let (dist, functional) = norm_with_functional(&residual);
        if best.as_ref().is_none_or(|(b, _)| dist < *b) {
            best = Some((dist, weights));
        }
        let upper = best.as_ref().map(|(b, _)| *b).unwrap();
        if upper - lower <= tol {
            let (distance, mut weights) = best.unwrap();
            w.pad_to_convex(&mut weights);
            return Ok(DistanceResult {
                distance,
                lower: lower.min(distance),
                weights,
                iterations: iteration,
            });
        }
        let (coeffs, e, rhs) = cut_for(&functional);
        model = model.add_cut(coeffs, e, rhs)?;
    }
    Err(LabError::NonConvergence {
        lower: model.objective(),
        upper: best.map(|(b, _)| b).unwrap_or(f64::INFINITY),
        iterations: max_cuts,
    })
}

/// Value of the `W`-gauge: finite, or `y` lies outside the span of `W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WGauge {
    Finite(Rational),
    Infinite,
}

impl WGauge {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            WGauge::Finite(v) => Some(v),
            WGauge::Infinite => None,
        }
    }
}

impl std::fmt::Display for WGauge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WGauge::Finite(v) => write!(f, "{v}"),
            WGauge::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for WGauge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WGauge::Finite(_) | WGauge::Infinite => s.serialize_str(&self.to_string()),
        }
    }
}

/// Least `t ≥ 0` with `y ∈ tW` at depth `d`, by exact linear programming
/// over signed vertex weights.
pub fn gauge_w(y: &TreeVector, d: usize) -> Result<WGauge> {
    if d > GAUGE_W_DEPTH_CAP {
        return Err(LabError::CapExceeded {
            what: "W-gauge depth",
            limit: GAUGE_W_DEPTH_CAP,
            actual: d,
        });
    }
    if y.depth() > d {
        return Err(LabError::InvalidInput(format!(
            "vector support reaches depth {} beyond {d}",
            y.depth()
        )));
    }
    if y.is_zero() {
        return Ok(WGauge::Finite(Rational::zero()));
    }
    let polytope = WPolytope::new(d)?;
    let nodes: Vec<Node> = convex::nodes_up_to(d).collect();
    let one = rational::int(1);
    let rows: Vec<Vec<Rational>> = nodes
        .iter()
        .map(|node| {
            polytope
                .vertices()
                .iter()
                .map(|v| {
                    if node.is_prefix_of(&v.leaf) {
                        if v.negative {
                            -one.clone()
                        } else {
                            one.clone()
                        }
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let rhs: Vec<Rational> = nodes.iter().map(|n| y.get(n)).collect();
    let costs = vec![one.clone(); polytope.vertices().len()];
    Ok(match lp::minimize(&costs, &rows, &rhs) {
        LpOutcome::Optimal { value, .. } => WGauge::Finite(value),
        LpOutcome::Infeasible => WGauge::Infinite,
        LpOutcome::Unbounded => unreachable!("nonnegative costs cannot be unbounded"),
    })
}

/// Explicit decomposition `y = scale·(2ⁿ·w + 2⁻ⁿ·b)` with `w ∈ W` and
/// `‖b‖ ≤ 1`.
#[derive(Clone, Debug, Serialize)]
pub struct GaugeCertificate {
    #[serde(serialize_with = "decimal")]
    pub scale: f64,
    /// Convex weights over the vertices of `W`, in [`WPolytope`] order.
    #[serde(serialize_with = "decimals")]
    pub weights: Vec<f64>,
    #[serde(serialize_with = "sparse_json")]
    pub ball_part: Vec<(Node, f64)>,
    #[serde(serialize_with = "decimal")]
    pub ball_part_norm: f64,
}

fn sparse_json<S: Serializer>(v: &[(Node, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        node: String,
        value: String,
    }
    s.collect_seq(v.iter().map(|(n, x)| Entry {
        node: n.to_string(),
        value: x.to_string(),
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeResult {
    pub n: u32,
    /// Midpoint of `[lower, upper]`.
    #[serde(serialize_with = "decimal")]
    pub value: f64,
    #[serde(serialize_with = "decimal")]
    pub lower: f64,
    #[serde(serialize_with = "decimal")]
    pub upper: f64,
    #[serde(serialize_with = "decimal")]
    pub tolerance: f64,
    pub certificate: GaugeCertificate,
    /// `‖y − scale·(2ⁿw + 2⁻ⁿb)‖` recomputed from the certificate.
    #[serde(serialize_with = "decimal")]
    pub residual: f64,
    pub iterations: usize,
}

fn check_gauge_args(n: u32, tol: f64) -> Result<()> {
    if n == 0 || n > 30 {
        return Err(LabError::InvalidInput(format!(
            "level n = {n} must lie in 1..=30"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(LabError::InvalidInput("tolerance must be positive".into()));
    }
    Ok(())
}

/// Minkowski gauge of `2ⁿW + 2⁻ⁿB` at `y`, bracketed within `tol`.
pub fn gauge_n(y: &TreeVector, n: u32, d: usize, tol: f64) -> Result<GaugeResult> {
    check_gauge_args(n, tol)?;
    let w = DenseW::new(d)?;
    let target = w.dense(y)?;
    gauge_dense(&w, &target, n, tol, DEFAULT_MAX_CUTS)
}

fn gauge_dense(
    w: &DenseW,
    target: &[f64],
    n: u32,
    tol: f64,
    max_cuts: usize,
) -> Result<GaugeResult> {
    let big = 2f64.powi(n as i32);
    let small = 1.0 / big;
    // ⟨f, y⟩ − 2ⁿ Σ ω_i ⟨f, v_i⟩ ≤ 2⁻ⁿ t
    let cut_for = |functional: &[(usize, f64)]| {
        let coeffs: Vec<f64> = w.pairings(functional).iter().map(|p| -big * p).collect();
        (coeffs, -small, -dot(functional, target))
    };
    let (_, f0) = norm_with_functional(target);
    let mut model = CutModel::new(w.vertex_count(), None, cut_for(&f0))?;

    struct Best {
        scale: f64,
        weights: Vec<f64>,
        gap: Vec<f64>,
        gap_norm: f64,
    }
    let mut best: Option<Best> = None;
    for iteration in 1..=max_cuts {
        let lower = model.objective();
        let weights = model.weight_values();
        let u = w.combine(&weights, 1.0);
        let gap: Vec<f64> = target.iter().zip(&u).map(|(a, b)| a - big * b).collect();
        let (gap_norm, functional) = norm_with_functional(&gap);
        let scale = weights.iter().sum::<f64>().max(big * gap_norm);
        if best.as_ref().is_none_or(|b| scale < b.scale) {
            best = Some(Best {
                scale,
                weights,
                gap,
                gap_norm,
            });
        }
        let upper = best.as_ref().unwrap().scale;
        if upper - lower <= tol {
            let b = best.unwrap();
            let lower = lower.clamp(0.0, upper);
            let (certificate, residual) =
                build_certificate(w, target, n, b.scale, b.weights, &b.gap, b.gap_norm);
            return Ok(GaugeResult {
                n,
                value: 0.5 * (lower + upper),
                lower,
                upper,
                tolerance: tol,
                certificate,
                residual,
                iterations: iteration,
            });
        }
        let (coeffs, e, rhs) = cut_for(&functional);
        model = model.add_cut(coeffs, e, rhs)?;
    }
    Err(LabError::NonConvergence {
        lower: model.objective(),
        upper: best.map(|b| b.scale).unwrap_or(f64::INFINITY),
        iterations: max_cuts,
    })
}

fn build_certificate(
    w: &DenseW,
    target: &[f64],
    n: u32,
    scale: f64,
    raw_weights: Vec<f64>,
    gap: &[f64],
    gap_norm: f64,
) -> (GaugeCertificate, f64) {
    let big = 2f64.powi(n as i32);
    let (mut weights, ball, ball_norm) = if scale > 0.0 {
        let weights: Vec<f64> = raw_weights.iter().map(|x| x / scale).collect();
        let ball: Vec<f64> = gap.iter().map(|g| g * big / scale).collect();
        (weights, ball, big * gap_norm / scale)
    } else {
        (vec![0.0; raw_weights.len()], vec![0.0; gap.len()], 0.0)
    };
    w.pad_to_convex(&mut weights);
    let wpart = w.combine(&weights, 1.0);
    let rebuilt: Vec<f64> = target
        .iter()
        .zip(wpart.iter().zip(&ball))
        .map(|(y, (a, b))| y - scale * (big * a + b / big))
        .collect();
    let (residual, _, _) = eu_norm_f64(&sparse(&rebuilt));
    (
        GaugeCertificate {
            scale,
            weights,
            ball_part: sparse(&ball),
            ball_part_norm: ball_norm,
        },
        residual,
    )
}

/// The same gauge by bisection on `t` over the feasibility test
/// `dist(y/t, 2ⁿW) ≤ 2⁻ⁿ`, starting from the bracket
/// `[‖y‖/(2ⁿ+2⁻ⁿ), 2ⁿ‖y‖]`. Returns the final bracket.
pub fn gauge_n_bisect(y: &TreeVector, n: u32, d: usize, tol: f64) -> Result<(f64, f64)> {
    check_gauge_args(n, tol)?;
    let w = DenseW::new(d)?;
    let target = w.dense(y)?;
    let (norm, _) = norm_with_functional(&target);
    if norm == 0.0 {
        return Ok((0.0, 0.0));
    }
    let big = 2f64.powi(n as i32);
    let small = 1.0 / big;
    let (mut lo, mut hi) = (norm / (big + small), big * norm);
    let inner_tol = tol * small / (4.0 * hi.max(1.0));
    while hi - lo > tol {
        let t = 0.5 * (lo + hi);
        let scaled: Vec<f64> = target.iter().map(|v| v / t).collect();
        let r = distance_dense(&w, &scaled, big, inner_tol, DEFAULT_MAX_CUTS)?;
        if r.distance <= small + inner_tol {
            hi = t;
        } else {
            lo = t;
        }
    }
    Ok((lo, hi))
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleNormResult {
    #[serde(serialize_with = "decimal")]
    pub value: f64,
    pub gauges: Vec<GaugeResult>,
    pub levels: u32,
    /// Bound on `Σ_{n>N} ‖y‖_n²` when `y` has a finite `W`-gauge.
    #[serde(serialize_with = "opt_decimal")]
    pub tail_bound: Option<f64>,
    pub w_gauge: WGauge,
    /// True when no tail bound is available.
    pub truncated: bool,
    #[serde(serialize_with = "decimal")]
    pub tolerance: f64,
    /// Bound on `|value − (Σ_{n≤N} ‖y‖_n²)^{1/2}|` from the per-level brackets.
    #[serde(serialize_with = "decimal")]
    pub value_error: f64,
}

fn opt_decimal<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_str(&x.to_string()),
        None => s.serialize_none(),
    }
}

/// `(Σ_{n=1}^{N} ‖y‖_n²)^{1/2}` with the tail bound `g²·4^{-N}/3` when the
/// `W`-gauge `g` of `y` is finite.
pub fn triple_norm(y: &TreeVector, levels: u32, d: usize, tol: f64) -> Result<TripleNormResult> {
    if levels == 0 {
        return Err(LabError::InvalidInput(
            "at least one level is required".into(),
        ));
    }
    check_gauge_args(levels, tol)?;
    let w = DenseW::new(d)?;
    let target = w.dense(y)?;
    let gauges: Vec<GaugeResult> = (1..=levels)
        .into_par_iter()
        .map(|n| gauge_dense(&w, &target, n, tol, DEFAULT_MAX_CUTS))
        .collect::<Result<_>>()?;
    let value = gauges.iter().map(|g| g.value * g.value).sum::<f64>().sqrt();
    let value_error = gauges
        .iter()
        .map(|g| {
            let half = 0.5 * (g.upper - g.lower);
            half * half
        })
        .sum::<f64>()
        .sqrt();
    let w_gauge = if d <= GAUGE_W_DEPTH_CAP {
        gauge_w(y, d)?
    } else {
        WGauge::Infinite
    };
    let tail_bound = w_gauge.finite().map(|g| {
        let g = rational::to_f64(g);
        g * g * 4f64.powi(-(levels as i32)) / 3.0
    });
    Ok(TripleNormResult {
        value,
        gauges,
        levels,
        truncated: tail_bound.is_none(),
        tail_bound,
        w_gauge,
        tolerance: tol,
        value_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{k_vertices, path_vector};
    use crate::rational::{int, ratio};
    use crate::treespace::eu_norm;

    fn n(s: &str) -> Node {
        s.parse().unwrap()
    }

    #[test]
    fn node_index_round_trip() {
        for node in convex::nodes_up_to(6) {
            assert_eq!(node_at(node_index(&node)), node);
        }
    }

    #[test]
    fn distance_of_scaled_vertex_is_zero() {
        let v = path_vector(&n("0110"));
        let r = distance_to_scaled_w(&v.scaled(&int(3)), 3.0, 4, 1e-9).unwrap();
        assert!(r.distance <= 1e-9, "{r:?}");
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_of_zero() {
        let r = distance_to_scaled_w(&TreeVector::zero(), 1.0, 3, 1e-9).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_w_examples() {
        for v in k_vertices(3).unwrap() {
            assert_eq!(gauge_w(&v, 3).unwrap(), WGauge::Finite(int(1)));
        }
        let a = path_vector(&n("000"));
        let b = path_vector(&n("111"));
        let c = path_vector(&n("001"));
        assert_eq!(
            gauge_w(&a.minus(&b).scaled(&ratio(1, 2)), 3).unwrap(),
            WGauge::Finite(int(1))
        );
        assert_eq!(
            gauge_w(&a.minus(&c).scaled(&ratio(1, 2)), 3).unwrap(),
            WGauge::Finite(int(1))
        );
        assert_eq!(
            gauge_w(&TreeVector::basis(n("010")), 3).unwrap(),
            WGauge::Infinite
        );
        assert_eq!(
            gauge_w(&TreeVector::zero(), 3).unwrap(),
            WGauge::Finite(int(0))
        );
    }

    #[test]
    fn gauge_of_zero() {
        let g = gauge_n(&TreeVector::zero(), 2, 3, 1e-6).unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.residual, 0.0);
    }

    #[test]
    fn gauge_of_vertex_matches_closed_form() {
        let v = path_vector(&n("101"));
        for level in 1..=5u32 {
            let g = gauge_n(&v, level, 3, 1e-7).unwrap();
            let big = 2f64.powi(level as i32);
            let exact = 1.0 / (big + 1.0 / big);
            assert!((g.lower - 1e-9..=g.upper + 1e-9).contains(&exact), "{g:?}");
            assert!(g.upper - g.lower <= 1e-7);
            assert!(g.residual <= 1e-7);
            assert!(g.certificate.ball_part_norm <= 1.0 + 1e-7);
        }
    }

    #[test]
    fn bisection_agrees_with_cut_model() {
        let y = TreeVector::from_entries([
            (n(""), int(1)),
            (n("01"), ratio(-1, 2)),
            (n("110"), int(2)),
        ]);
        for level in 1..=3u32 {
            let direct = gauge_n(&y, level, 3, 1e-6).unwrap();
            let (lo, hi) = gauge_n_bisect(&y, level, 3, 1e-5).unwrap();
            assert!(
                lo <= direct.upper + 1e-5 && direct.lower <= hi + 1e-5,
                "{level}: [{lo},{hi}] vs {direct:?}"
            );
        }
    }

    #[test]
    fn sandwich_for_leaf() {
        let y = TreeVector::basis(n("010"));
        let norm = rational::to_f64(&eu_norm(&y).unwrap().value);
        for level in 1..=4u32 {
            let g = gauge_n(&y, level, 3, 1e-6).unwrap();
            let big = 2f64.powi(level as i32);
            assert!(g.value >= norm / (big + 1.0 / big) - 1e-6);
            assert!(g.value <= big * norm + 1e-6);
        }
    }

    #[test]
    fn triple_norm_of_vertex() {
        let v = path_vector(&n("011"));
        let r = triple_norm(&v, 8, 3, 1e-6).unwrap();
        assert!(r.value <= 0.578, "{}", r.value);
        assert!(!r.truncated);
        assert_eq!(r.w_gauge, WGauge::Finite(int(1)));
        let r4 = triple_norm(&v, 4, 3, 1e-6).unwrap();
        assert!(r4.value <= r.value + 1e-6);
    }

    #[test]
    fn argument_errors() {
        let y = TreeVector::basis(n("0101"));
        assert!(gauge_n(&y, 0, 4, 1e-6).is_err());
        assert!(gauge_n(&y, 1, 3, 1e-6).is_err());
        assert!(gauge_n(&y, 1, 4, 0.0).is_err());
        assert!(distance_to_scaled_w(&y, 0.0, 4, 1e-6).is_err());
        assert!(matches!(gauge_w(&y, 9), Err(LabError::CapExceeded { .. })));
    }

    /// Exact oracle: every extreme functional of the dual unit ball at depth
    /// `d` is enumerated by hand, and the resulting linear program is solved
    /// in rationals by adding violated functionals until none remain.
    mod oracle {
        use super::*;
        use crate::tree::enumerate_antichains;
        use std::collections::BTreeSet;

        type Functional = Vec<(u32, Rational)>;

        fn interval_extremes(a: u32, b: u32) -> BTreeSet<Functional> {
            let mut out = BTreeSet::new();
            for i in a..=b {
                out.insert(vec![(i, int(1))]);
                out.insert(vec![(i, int(-1))]);
            }
            for s in a..=b {
                for parts in 2..=s.min(b - s + 1) {
                    for cuts in cut_points(s, b, parts) {
                        let mut acc: Vec<Functional> = vec![Vec::new()];
                        for w in cuts.windows(2) {
                            let pieces = interval_extremes(w[0], w[1] - 1);
                            acc = acc
                                .iter()
                                .flat_map(|f| {
                                    pieces.iter().map(move |g| {
                                        let mut h = f.clone();
                                        h.extend(g.iter().cloned());
                                        h
                                    })
                                })
                                .collect();
                        }
                        for f in acc {
                            out.insert(f.into_iter().map(|(i, c)| (i, c * ratio(1, 2))).collect());
                        }
                    }
                }
            }
            out
        }

        /// Boundaries `s = c_0 < c_1 < … < c_parts = b + 1`.
        fn cut_points(s: u32, b: u32, parts: u32) -> Vec<Vec<u32>> {
            fn go(from: u32, end: u32, left: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
                if left == 1 {
                    acc.push(end);
                    out.push(acc.clone());
                    acc.pop();
                    return;
                }
                for c in from + 1..end {
                    acc.push(c);
                    go(c, end, left - 1, acc, out);
                    acc.pop();
                }
            }
            let mut out = Vec::new();
            go(s, b + 1, parts, &mut vec![s], &mut out);
            out
        }

        pub fn functionals(d: usize) -> Vec<Vec<(Node, Rational)>> {
            let extremes = interval_extremes(1, d as u32 + 1);
            let nodes: Vec<Node> = convex::nodes_up_to(d).collect();
            let mut out = BTreeSet::new();
            for chain in enumerate_antichains(&nodes).unwrap() {
                for f in &extremes {
                    let g: Vec<(Node, Rational)> = f
                        .iter()
                        .filter_map(|(i, c)| {
                            let node = chain.nodes().iter().find(|n| tsirelson_index(n) == *i)?;
                            Some((*node, c.clone()))
                        })
                        .collect();
                    if !g.is_empty() {
                        out.insert(g);
                    }
                }
            }
            out.into_iter().collect()
        }

        fn pair(f: &[(Node, Rational)], x: &TreeVector) -> Rational {
            f.iter().map(|(n, c)| c * x.get(n)).sum()
        }

        /// `min t` subject to `t ≥ a·ω` budget rows and `⟨f, y⟩ − k·Σω⟨f,v⟩ ≤ h·t`
        /// for all functionals, with `budget = Some(1)` meaning `Σω = 1`.
        fn solve(
            y: &TreeVector,
            d: usize,
            k: &Rational,
            h: &Rational,
            convex_weights: bool,
        ) -> Rational {
            let all = functionals(d);
            let verts: Vec<TreeVector> = WPolytope::new(d)
                .unwrap()
                .vertices()
                .iter()
                .map(|v| v.vector())
                .collect();
            let nv = verts.len();
            let mut active: Vec<usize> = vec![0];
            loop {
                // columns: ω (nv), t, budget slack, one slack per active functional
                let cols = nv + 2 + active.len();
                let mut rows = Vec::new();
                let mut rhs = Vec::new();
                let mut budget = vec![Rational::zero(); cols];
                for c in budget.iter_mut().take(nv) {
                    *c = int(1);
                }
                if convex_weights {
                    rows.push(budget);
                    rhs.push(int(1));
                    let mut fix = vec![Rational::zero(); cols];
                    fix[nv + 1] = int(1);
                    rows.push(fix);
                    rhs.push(int(0));
                } else {
                    budget[nv] = int(-1);
                    budget[nv + 1] = int(1);
                    rows.push(budget);
                    rhs.push(int(0));
                }
                for (r, &fi) in active.iter().enumerate() {
                    let f = &all[fi];
                    let mut row = vec![Rational::zero(); cols];
                    for (j, v) in verts.iter().enumerate() {
                        row[j] = -(k * pair(f, v));
                    }
                    row[nv] = -h.clone();
                    row[nv + 2 + r] = int(1);
                    rows.push(row);
                    rhs.push(-pair(f, y));
                }
                let mut costs = vec![Rational::zero(); cols];
                costs[nv] = int(1);
                let LpOutcome::Optimal { x, value } = lp::minimize(&costs, &rows, &rhs) else {
                    panic!("oracle program must be solvable");
                };
                let point = verts
                    .iter()
                    .zip(&x)
                    .fold(TreeVector::zero(), |acc, (v, w)| {
                        acc.plus(&v.scaled(&(k * w)))
                    });
                let gap = y.minus(&point);
                let worst = (0..all.len())
                    .filter(|i| !active.contains(i))
                    .max_by(|&a, &b| pair(&all[a], &gap).cmp(&pair(&all[b], &gap)));
                match worst {
                    Some(i) if pair(&all[i], &gap) > h * &value => active.push(i),
                    _ => return value,
                }
            }
        }

        pub fn distance(y: &TreeVector, c: &Rational, d: usize) -> Rational {
            solve(y, d, c, &int(1), true)
        }

        pub fn gauge(y: &TreeVector, n: u32, d: usize) -> Rational {
            let big = rational::int(1 << n);
            solve(y, d, &big, &(int(1) / &big), false)
        }
    }

    #[test]
    fn oracle_functionals_norm_correctly() {
        use rand::{Rng, SeedableRng};
        let fs = oracle::functionals(3);
        let nodes: Vec<Node> = convex::nodes_up_to(3).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let mut entries = Vec::new();
            for m in &nodes {
                if rng.gen_bool(0.4) {
                    entries.push((*m, ratio(rng.gen_range(-4..=4), 2)));
                }
            }
            let y = TreeVector::from_entries(entries);
            let best = fs
                .iter()
                .map(|f| f.iter().map(|(m, c)| c * y.get(m)).sum::<Rational>())
                .max()
                .unwrap();
            assert_eq!(best.max(Rational::zero()), eu_norm(&y).unwrap().value);
        }
    }

    #[test]
    fn leaf_gauge_table() {
        let y = TreeVector::basis(n("010"));
        for level in 1..=3u32 {
            assert_eq!(oracle::gauge(&y, level, 3), ratio(1 << level, 3));
        }
    }

    #[test]
    fn leaf_distance_matches_exact_oracle() {
        let y = TreeVector::basis(n("010"));
        let exact = rational::to_f64(&oracle::distance(&y, &int(1), 3));
        let tol = 1e-7;
        let r = distance_to_scaled_w(&y, 1.0, 3, tol).unwrap();
        assert!(
            (r.distance - exact).abs() <= 2.0 * tol,
            "{} vs {exact}",
            r.distance
        );
    }

    #[test]
    fn leaf_gauges_match_exact_oracle() {
        let y = TreeVector::basis(n("010"));
        for level in 1..=3u32 {
            let exact = oracle::gauge(&y, level, 3);
            let g = gauge_n(&y, level, 3, 1e-7).unwrap();
            let exact = rational::to_f64(&exact);
            assert!((g.value - exact).abs() <= 2e-7, "{level}: {g:?} vs {exact}");
        }
    }
}
