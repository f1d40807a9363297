//! Level blocks against spread-out Tsirelson vectors. With constant one the
//! comparison can fail; this prints the smallest counterexample found.
//!
//! cargo run --example blocks

use dentlab::rational::int;
use dentlab::tree::{Node, TreeVector};
use dentlab::treespace::check_block_domination;

fn main() -> dentlab::Result<()> {
    let node = |s: &str| s.parse::<Node>().unwrap();
    let x1 = TreeVector::from_entries([(node("00"), int(1)), (node("100"), int(1))]);
    let x2 = TreeVector::from_entries([(node("01000"), int(1)), (node("110000"), int(1))]);
    let r = check_block_domination(&[x1, x2], &[1, 4, 7], &[int(1), int(1)])?;
    println!(
        "||x1 + x2|| = {}, ||t4 + t7||_T = {}, holds: {}",
        r.lhs, r.rhs, r.holds
    );
    Ok(())
}
