//! Parts in incomparable subtrees keep half their total norm.
//!
//! cargo run --example superadditivity

use dentlab::generators::{random_superadditivity_instance, trial_rng};
use dentlab::treespace::check_superadditivity;

fn main() -> dentlab::Result<()> {
    for t in 0..8 {
        let (parts, roots) = random_superadditivity_instance(&mut trial_rng(11, t), 6);
        let r = check_superadditivity(&parts, &roots)?;
        println!(
            "{} parts: ||sum|| = {} >= {} = half the sum of norms; merged certificate gives {}",
            parts.len(),
            r.lhs,
            r.rhs,
            r.certified
        );
    }
    Ok(())
}
