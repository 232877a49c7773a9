//! Why a single conditional-probability table can mislead.
//!
//! A class made of two equally likely sub-types has symptom marginals that
//! look unremarkable, but its joint table differs from the product of those
//! marginals. Everything here is exact rational arithmetic.

use lggm::mixture::{independence_bias_table, Rational};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let r = Rational::new;
    let b = independence_bias_table(r(4, 5), r(1, 5), r(1, 5), r(4, 5))?;

    println!("P(s1 = 1, s2 = 1 | class):");
    println!("  class 1            {}", b.class1[1][1]);
    println!("  class 2            {}", b.class2[1][1]);
    println!("  class 3 (mixture)  {}", b.theta11());
    println!("  class 3 rebuilt from marginals  {}", b.theta11_independent());
    println!("independence overstates the joint: {}", b.overstates_joint());

    println!("\nposterior of class 3 by symptom pattern (uniform class prior):");
    for s1 in 0..2 {
        for s2 in 0..2 {
            println!(
                "  s = ({s1}, {s2}): true tables {:>5}, independence {:>5}",
                b.posterior_true[s1][s2][2].to_string(),
                b.posterior_independent[s1][s2][2].to_string()
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
