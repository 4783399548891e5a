// Global explanation of the recoded Adult data, income label as the prediction.
//
// `cargo run --example global_explanation`

use std::error::Error;
use std::path::PathBuf;

use ece_explain::report::{run_global, OutputFormat, RunConfig};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/adult.csv");
    let config = RunConfig::new(data, "Class");
    let report = run_global(&config)?;

    let md = String::from_utf8(report.render(OutputFormat::Md))?;
    // the full ranking is long; the head is what people read
    let head: Vec<&str> = md.lines().take(14).collect();
    Ok(format!(
        "{}\n\n{} parents, {} combined causes, {} interactions",
        head.join("\n"),
        report.metadata.n_parents,
        report.metadata.n_combined_causes,
        report.metadata.n_interactions
    ))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    println!("{}", run_example()?);
    Ok(())
}
