//! Scripted, seeded experiment runs with CSV and JSON output.
//!
//! Trials run in parallel but each one owns its random stream and rows are
//! emitted in trial order, so output bytes depend only on the config.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::dentability::{self, random_slice, shallow_slice_bound};
use crate::dfjp::{gauge_n, gauge_w, WGauge};
use crate::error::{LabError, Result};
use crate::generators::{self, trial_rng};
use crate::rational::{self, Rational};
use crate::treespace::{check_block_domination, check_superadditivity, eu_norm};

pub const EXPERIMENTS: [&str; 6] = [
    "superadditivity",
    "blocks",
    "separation",
    "slices",
    "gauges",
    "convex-slices",
];

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub depth: usize,
    pub instances: usize,
    pub seed: u64,
    /// Gauge levels `1..=levels`.
    pub levels: u32,
    pub tol: f64,
    /// Slices per convex combination.
    pub slices: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            depth: 5,
            instances: 100,
            seed: 1729,
            levels: 8,
            tol: 1e-6,
            slices: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub depth: usize,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// `(held, total)` for property runs; `None` for observational ones.
    pub tally: Option<(usize, usize)>,
    /// First violating instance, ready for replay.
    pub violation: Option<serde_json::Value>,
}

impl ExperimentReport {
    pub fn summary(&self) -> String {
        match self.tally {
            Some((held, total)) => format!("{}: {held}/{total} hold", self.experiment),
            None => format!(
                "{}: {} rows (observational)",
                self.experiment,
                self.rows.len()
            ),
        }
    }

    pub fn all_hold(&self) -> bool {
        self.tally.is_none_or(|(held, total)| held == total)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .flexible(true)
            .from_writer(Vec::new());
        w.write_record(["experiment", self.experiment.as_str()])?;
        w.write_record(["depth", &self.depth.to_string()])?;
        w.write_record(["seed", &self.seed.to_string()])?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// One trial's rows, whether the property held, and a replay record.
struct Trial {
    rows: Vec<Vec<String>>,
    held: bool,
    instance: serde_json::Value,
}

fn exact(v: &Rational) -> [String; 2] {
    [rational::format_rational(v), rational::decimal(v)]
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn run_trials(
    name: &str,
    cfg: &ExperimentConfig,
    columns: Vec<String>,
    trial: impl Fn(usize) -> Result<Trial> + Sync,
) -> Result<ExperimentReport> {
    let trials: Vec<Trial> = (0..cfg.instances)
        .into_par_iter()
        .map(&trial)
        .collect::<Result<_>>()?;
    let held = trials.iter().filter(|t| t.held).count();
    let violation = trials.iter().find(|t| !t.held).map(|t| t.instance.clone());
    Ok(ExperimentReport {
        experiment: name.to_string(),
        depth: cfg.depth,
        seed: cfg.seed,
        columns,
        rows: trials.into_iter().flat_map(|t| t.rows).collect(),
        tally: Some((held, cfg.instances)),
        violation,
    })
}

fn need_depth(cfg: &ExperimentConfig, lo: usize, hi: usize) -> Result<()> {
    if cfg.depth < lo || cfg.depth > hi {
        return Err(LabError::InvalidInput(format!(
            "depth {} outside the supported range {lo}..={hi}",
            cfg.depth
        )));
    }
    Ok(())
}

pub fn superadditivity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    need_depth(cfg, 2, 10)?;
    let columns = cols(&[
        "trial",
        "parts",
        "lhs",
        "lhs_decimal",
        "rhs",
        "rhs_decimal",
        "certified",
        "holds",
    ]);
    run_trials("superadditivity", cfg, columns, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let (parts, roots) = generators::random_superadditivity_instance(&mut rng, cfg.depth);
        let r = check_superadditivity(&parts, &roots)?;
        let certified_ok = r.certified <= r.lhs && (parts.len() == 1 || r.certified == r.rhs);
        let held = r.holds && certified_ok;
        let mut row = vec![t.to_string(), parts.len().to_string()];
        row.extend(exact(&r.lhs));
        row.extend(exact(&r.rhs));
        row.push(rational::format_rational(&r.certified));
        row.push(held.to_string());
        Ok(Trial {
            rows: vec![row],
            held,
            instance: json!({ "trial": t, "parts": parts, "roots": roots, "report": r }),
        })
    })
}

pub fn blocks(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    need_depth(cfg, 2, 10)?;
    let columns = cols(&[
        "trial",
        "blocks",
        "levels",
        "lhs",
        "lhs_decimal",
        "rhs",
        "rhs_decimal",
        "holds",
    ]);
    run_trials("blocks", cfg, columns, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let (blocks, levels, coeffs) = generators::random_block_instance(&mut rng, cfg.depth)?;
        let r = check_block_domination(&blocks, &levels, &coeffs)?;
        let level_text = levels
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let mut row = vec![t.to_string(), blocks.len().to_string(), level_text];
        row.extend(exact(&r.lhs));
        row.extend(exact(&r.rhs));
        row.push(r.holds.to_string());
        let coeff_text: Vec<String> = coeffs.iter().map(rational::format_rational).collect();
        Ok(Trial {
            rows: vec![row],
            held: r.holds,
            instance: json!({ "trial": t, "blocks": blocks, "levels": levels, "coefficients": coeff_text, "report": r }),
        })
    })
}

pub fn separation(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let table = dentability::separation_table(cfg.depth)?;
    let held = table
        .iter()
        .filter(|r| r.separation >= rational::int(1))
        .count();
    let violation = table
        .iter()
        .find(|r| r.separation < rational::int(1))
        .map(|r| json!({ "depth": cfg.depth, "row": r }));
    let rows = table
        .iter()
        .map(|r| {
            let mut row = vec![r.alpha.to_string(), r.alpha.len().to_string()];
            row.extend(exact(&r.separation));
            row.push((r.separation >= rational::int(1)).to_string());
            row
        })
        .collect();
    Ok(ExperimentReport {
        experiment: "separation".into(),
        depth: cfg.depth,
        seed: cfg.seed,
        columns: cols(&[
            "alpha",
            "level",
            "separation",
            "separation_decimal",
            "at_least_one",
        ]),
        rows,
        tally: Some((held, table.len())),
        violation,
    })
}

pub fn slices(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    need_depth(cfg, 2, dentability::SLICE_DEPTH_CAP)?;
    let d0 = cfg.depth - 2;
    let columns = cols(&[
        "trial",
        "d0",
        "beta",
        "bound",
        "bound_decimal",
        "first",
        "second",
        "holds",
    ]);
    run_trials("slices", cfg, columns, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let spec = random_slice(&mut rng, d0);
        let r = shallow_slice_bound(cfg.depth, d0, &spec)?;
        let held = r.bound >= rational::int(1);
        let mut row = vec![
            t.to_string(),
            d0.to_string(),
            rational::format_rational(&spec.beta),
        ];
        row.extend(exact(&r.bound));
        row.push(r.pair.0.to_string());
        row.push(r.pair.1.to_string());
        row.push(held.to_string());
        Ok(Trial {
            rows: vec![row],
            held,
            instance: json!({ "trial": t, "depth": cfg.depth, "d0": d0, "slice": spec, "result": r }),
        })
    })
}

/// Checks, per level, `‖y‖/(2ⁿ+2⁻ⁿ) − tol ≤ ‖y‖_n ≤ 2ⁿ‖y‖ + tol`, the
/// reconstruction residual, and `‖y‖_n ≤ 2⁻ⁿ·g + tol` when the `W`-gauge
/// `g` is finite.
pub fn gauges(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    need_depth(cfg, 1, crate::dfjp::GAUGE_DEPTH_CAP)?;
    let columns = cols(&[
        "trial", "n", "norm", "w_gauge", "lower", "upper", "residual", "holds",
    ]);
    run_trials("gauges", cfg, columns, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let y = generators::random_gauge_vector(&mut rng, cfg.depth)?;
        let norm = eu_norm(&y)?.value;
        let norm_f = rational::to_f64(&norm);
        let g = gauge_w(&y, cfg.depth)?;
        let mut rows = Vec::new();
        let mut held = true;
        for n in 1..=cfg.levels {
            let r = gauge_n(&y, n, cfg.depth, cfg.tol)?;
            let big = 2f64.powi(n as i32);
            let mut ok = r.value >= norm_f / (big + 1.0 / big) - cfg.tol
                && r.value <= big * norm_f + cfg.tol
                && r.residual <= cfg.tol;
            if let WGauge::Finite(g) = &g {
                ok &= r.value <= rational::to_f64(g) / big + cfg.tol;
            }
            held &= ok;
            rows.push(vec![
                t.to_string(),
                n.to_string(),
                rational::format_rational(&norm),
                g.to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
                r.residual.to_string(),
                ok.to_string(),
            ]);
        }
        Ok(Trial {
            rows,
            held,
            instance: json!({ "trial": t, "depth": cfg.depth, "vector": y }),
        })
    })
}

/// Observational: distance between combinations of farthest slice pairs.
pub fn convex_slices(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    need_depth(cfg, 2, dentability::SLICE_DEPTH_CAP)?;
    let trials: Vec<_> = (0..cfg.instances)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t as u64);
            dentability::convex_combination_slice_trial(&mut rng, cfg.depth, cfg.slices, t)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<Vec<String>> = trials
        .iter()
        .map(|t| {
            let weights: Vec<String> = t.weights.iter().map(rational::format_rational).collect();
            let mut row = vec![t.trial.to_string(), weights.join(" ")];
            row.extend(exact(&t.distance));
            row
        })
        .collect();
    if let Some(min) = trials.iter().map(|t| &t.distance).min() {
        let mean = trials.iter().map(|t| t.distance.clone()).sum::<Rational>()
            / rational::int(trials.len() as i64);
        let max = trials.iter().map(|t| &t.distance).max().unwrap();
        for (label, v) in [("min", min), ("mean", &mean), ("max", max)] {
            let mut row = vec![label.to_string(), String::new()];
            row.extend(exact(v));
            rows.push(row);
        }
    }
    Ok(ExperimentReport {
        experiment: "convex-slices".into(),
        depth: cfg.depth,
        seed: cfg.seed,
        columns: cols(&["trial", "weights", "distance", "distance_decimal"]),
        rows,
        tally: None,
        violation: None,
    })
}

pub fn run(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match name {
        "superadditivity" => superadditivity(cfg),
        "blocks" => blocks(cfg),
        "separation" => separation(cfg),
        "slices" => slices(cfg),
        "gauges" => gauges(cfg),
        "convex-slices" => convex_slices(cfg),
        other => Err(LabError::InvalidInput(format!(
            "unknown experiment `{other}` (expected one of {})",
            EXPERIMENTS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(depth: usize, instances: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            depth,
            instances,
            seed,
            levels: 3,
            ..Default::default()
        }
    }

    #[test]
    fn csv_layout() {
        let r = separation(&cfg(3, 0, 1)).unwrap();
        let text = r.to_csv().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            &lines[..4],
            [
                "experiment,separation",
                "depth,3",
                "seed,1",
                "alpha,level,separation,separation_decimal,at_least_one"
            ]
        );
        assert_eq!(lines.len(), 4 + 7);
        assert!(r.all_hold());
    }

    #[test]
    fn reruns_are_identical() {
        for name in EXPERIMENTS {
            let c = cfg(4, 6, 99);
            let a = run(name, &c).unwrap().to_csv().unwrap();
            let b = run(name, &c).unwrap().to_csv().unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn property_runs_pass() {
        for name in ["superadditivity", "slices", "gauges"] {
            let r = run(name, &cfg(4, 10, 3)).unwrap();
            assert!(r.all_hold(), "{}", r.summary());
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            run("nope", &cfg(3, 1, 1)),
            Err(LabError::InvalidInput(_))
        ));
    }

    #[test]
    fn convex_slice_summary_rows() {
        let r = convex_slices(&cfg(4, 5, 2)).unwrap();
        assert_eq!(r.rows.len(), 8);
        assert_eq!(r.rows[5][0], "min");
        assert!(r.tally.is_none());
    }
}
