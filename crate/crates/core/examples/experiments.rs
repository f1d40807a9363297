//! Seeded experiment runs rendered as CSV.
//!
//! cargo run --release --example experiments

use dentlab::experiments::{run, ExperimentConfig, EXPERIMENTS};

fn main() -> dentlab::Result<()> {
    let cfg = ExperimentConfig {
        depth: 4,
        instances: 20,
        levels: 3,
        ..Default::default()
    };
    for name in EXPERIMENTS {
        let report = run(name, &cfg)?;
        println!("{}", report.summary());
    }
    print!("{}", run("separation", &cfg)?.to_csv()?);
    Ok(())
}
