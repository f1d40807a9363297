//! Gauges of 2ⁿW + 2⁻ⁿB and the square-summed norm built from them.
//!
//! cargo run --release --example gauges

use dentlab::convex::path_vector;
use dentlab::dfjp::{gauge_n, gauge_w, triple_norm};
use dentlab::tree::{Node, TreeVector};

fn main() -> dentlab::Result<()> {
    let depth = 3;
    let vertex = path_vector(&"101".parse::<Node>()?);
    println!("W-gauge of a vertex: {}", gauge_w(&vertex, depth)?);
    for n in 1..=4 {
        let g = gauge_n(&vertex, n, depth, 1e-8)?;
        println!(
            "n = {n}: gauge in [{:.8}, {:.8}], residual {:.1e}",
            g.lower, g.upper, g.residual
        );
    }
    let r = triple_norm(&vertex, 8, depth, 1e-8)?;
    println!(
        "triple norm over 8 levels: {:.6} (tail <= {:?})",
        r.value, r.tail_bound
    );

    // a lone leaf coordinate is outside the span of W
    let leaf = TreeVector::basis("010".parse()?);
    println!("W-gauge of a leaf: {}", gauge_w(&leaf, depth)?);
    let r = triple_norm(&leaf, 4, depth, 1e-8)?;
    println!(
        "leaf triple norm over 4 levels: {:.6}, truncated: {}",
        r.value, r.truncated
    );
    Ok(())
}
