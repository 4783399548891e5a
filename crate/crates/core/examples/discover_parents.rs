// Recover the outcome's parents from data sampled off a known causal model.
//
// `cargo run --example discover_parents`

use std::error::Error;

use ece_explain::structure::discover_parents;
use ece_explain::testkit::{pc_set_oracle, RandomScmConfig, SyntheticScm};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let scm = SyntheticScm::random(&RandomScmConfig::new(8, 3, 42))?;
    let ds = scm.sample(20_000);

    let found = discover_parents(&ds, 0.01, 3);
    let names = |cols: &[usize]| cols.iter().map(|&c| scm.names[c].clone()).collect::<Vec<_>>().join(", ");
    Ok(format!(
        "true parents:       {}\ndiscovered parents: {}",
        names(&pc_set_oracle(&scm.dag, scm.outcome)),
        names(&found.parents)
    ))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    println!("{}", run_example()?);
    Ok(())
}
