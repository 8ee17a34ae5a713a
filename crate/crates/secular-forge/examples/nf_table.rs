//! Prints the exact order-six normal form and the reduced comparison.

use secular_forge::nf::{
    birkhoff_normalize, build_secular_input, compare_order6, compare_reduced, so3_reduce, symbolic_lambda,
    NormalizeOptions, SbarExpansion,
};
use secular_forge::series::action_label;

fn main() -> secular_forge::Result<()> {
    let h = build_secular_input(symbolic_lambda(), 6, SbarExpansion::Exact)?;
    let nf = birkhoff_normalize(&h, &NormalizeOptions::default())?;
    for (e, c) in &nf.normal_part.terms {
        println!("{:>10}  {}", action_label(e), c);
    }
    println!();
    for c in compare_order6(&nf.normal_part) {
        println!("{:>10}  expected {:>16}  got {:>16}  {}", c.monomial, c.expected, c.computed, if c.matches { "ok" } else { "MISMATCH" });
    }
    println!();
    for c in compare_reduced(&so3_reduce(&nf.normal_part)) {
        println!("{:>10} -> {:>8}  expected {:>20}  got {:>20}  {}", c.displayed, c.candidate, c.expected, c.substituted, if c.matches { "ok" } else { "MISMATCH" });
    }
    Ok(())
}
