//! The set K, the half-tree vectors d_α and the measure operator T.
//!
//! cargo run --example measures

use dentlab::convex::{
    d_alpha, k_vertices, membership_k, t_operator, t_operator_inverse, tv_norm, DyadicMeasure,
};
use dentlab::rational::int;
use dentlab::tree::Node;
use dentlab::treespace::eu_norm;

fn main() -> dentlab::Result<()> {
    let depth = 3;
    println!(
        "K has {} vertices at depth {depth}",
        k_vertices(depth)?.len()
    );

    let uniform = DyadicMeasure::uniform(depth)?;
    let image = t_operator(&uniform);
    assert_eq!(image, d_alpha(&Node::ROOT, depth)?);
    assert!(membership_k(&image, depth));
    println!("T(uniform) = d_root, norm {}", eu_norm(&image)?.value);

    let signed = DyadicMeasure::new(depth, [("000".parse()?, int(1)), ("110".parse()?, int(-2))])?;
    let image = t_operator(&signed);
    println!(
        "signed measure: tv {} >= norm of image {}",
        tv_norm(&signed),
        eu_norm(&image)?.value
    );
    assert_eq!(t_operator_inverse(&image, depth)?, signed);
    Ok(())
}
