//! Tree norm: the best Tsirelson norm over antichains of the support.
//!
//! cargo run --example eu_norm

use dentlab::rational::{int, ratio};
use dentlab::tree::{Node, TreeVector};
use dentlab::treespace::{eu_norm, norming_functional};

fn main() -> dentlab::Result<()> {
    let node = |s: &str| s.parse::<Node>().unwrap();

    let chain = TreeVector::from_entries([
        (node(""), int(1)),
        (node("0"), int(-2)),
        (node("01"), ratio(1, 2)),
    ]);
    let spread = TreeVector::from_entries([
        (node("00"), int(1)),
        (node("100"), int(1)),
        (node("0100"), int(1)),
        (node("11000"), int(1)),
    ]);

    for (label, x) in [("chain", &chain), ("spread", &spread)] {
        let r = eu_norm(x)?;
        let witness: Vec<String> = r.witness.nodes().iter().map(ToString::to_string).collect();
        println!("{label}: norm {} on antichain {witness:?}", r.value);
        let f = norming_functional(&r.certificate, &r.witness);
        println!("  norming functional pairs to {}", f.pairing(x));
    }
    Ok(())
}
