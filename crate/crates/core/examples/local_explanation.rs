// Why was one Adult record predicted `Class = 0`?
//
// `cargo run --example local_explanation`

use std::error::Error;
use std::path::PathBuf;

use ece_explain::dataset::load_csv;
use ece_explain::report::{ConfigEcho, OutputFormat};
use ece_explain::{AttributeSchema, EngineParams, Explainer};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/adult.csv");
    let ds = load_csv(data, &AttributeSchema::default(), "Class")?;
    let params = EngineParams::default();
    let explainer = Explainer::fit(ds, &params)?;

    // an unmarried, non-professional record without a bachelor's degree
    let ds = &explainer.dataset;
    let col = |name: &str| ds.column_index(name).expect("recoded Adult column");
    let wanted = [("Married", false), ("Education.num.12", false), ("Prof", false)];
    let row = (0..ds.n_rows())
        .find(|&r| wanted.iter().all(|&(c, v)| ds.value(r, col(c)) == v) && !ds.value(r, ds.outcome()))
        .ok_or("no matching record")?;

    let report = explainer.local_report(&ds.row(row), ConfigEcho::new(&params, 0))?;
    let md = String::from_utf8(report.render(OutputFormat::Md))?;
    let head: Vec<&str> = md.lines().take(10).collect();
    Ok(format!("row {row}\n{}", head.join("\n")))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    println!("{}", run_example()?);
    Ok(())
}
