//! Slices of K: shallow functionals cannot separate deep branches.
//!
//! cargo run --release --example slices

use dentlab::dentability::{
    random_slice, separation_table, shallow_slice_bound, slice_vertices, SliceSpec,
};
use dentlab::generators::trial_rng;
use dentlab::rational::ratio;
use dentlab::tree::TreeVector;

fn main() -> dentlab::Result<()> {
    let spec = SliceSpec::new(TreeVector::basis("0".parse()?), ratio(1, 4))?;
    let report = slice_vertices(4, &spec)?;
    println!(
        "slice of e*_0: {} vertices, diameter >= {} via {:?}",
        report.members.len(),
        report.diameter_bound,
        report.witness
    );

    for t in 0..5 {
        let spec = random_slice(&mut trial_rng(7, t), 2);
        let fork = shallow_slice_bound(5, 2, &spec)?;
        println!(
            "random slice {t}: forked pair {} / {} at distance {}",
            fork.pair.0, fork.pair.1, fork.bound
        );
    }

    for row in separation_table(3)? {
        let alpha = if row.alpha.is_root() {
            "root".to_string()
        } else {
            row.alpha.to_string()
        };
        println!("separation below {alpha:>4}: {}", row.separation);
    }
    Ok(())
}
