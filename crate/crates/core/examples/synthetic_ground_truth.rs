// Compare estimated effects with the true ones of a random causal model.
//
// `cargo run --example synthetic_ground_truth`

use std::error::Error;

use ece_explain::testkit::{RandomScmConfig, SyntheticScm};
use ece_explain::{EngineParams, Explainer};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let scm = SyntheticScm::random(&RandomScmConfig::new(10, 3, 7))?;
    let ds = scm.sample(50_000);
    let explainer = Explainer::fit(ds, &EngineParams::default())?;

    let mut out = format!("{:<6} {:>10} {:>10}\n", "var", "estimate", "truth");
    for c in explainer.dataset.features() {
        let est = explainer.parent_effects[c].unwrap_or(f64::NAN);
        let truth = scm.true_avg_ece(c)?;
        if est != 0.0 || truth != 0.0 {
            out.push_str(&format!("{:<6} {est:>10.4} {truth:>10.4}\n", scm.names[c]));
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
