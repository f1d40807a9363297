//! Tsirelson norm of a short sequence, with the split that attains it.
//!
//! cargo run --example tsirelson

use dentlab::rational::int;
use dentlab::tsirelson::{
    fixed_point_residual, tsirelson_norm_bruteforce, tsirelson_norm_with_certificate, NatVector,
};

fn main() -> dentlab::Result<()> {
    let x = NatVector::from_entries((3..=6).map(|i| (i, int(1))));
    let (value, certificate) = tsirelson_norm_with_certificate(&x)?;
    println!("||t3 + t4 + t5 + t6||_T = {value}");
    println!("certificate: {}", serde_json::to_string(&certificate)?);
    println!("certificate evaluates to {}", certificate.evaluate(&x));

    // the exhaustive search and the fixed-point check agree
    assert_eq!(tsirelson_norm_bruteforce(&x)?, value);
    assert_eq!(fixed_point_residual(&x)?, int(0));

    // indices below the block size cannot be split
    let early = NatVector::from_entries([(1, int(1)), (2, int(1))]);
    println!(
        "||t1 + t2||_T = {}",
        tsirelson_norm_with_certificate(&early)?.0
    );
    Ok(())
}
