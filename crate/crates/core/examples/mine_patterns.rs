// Closed frequent patterns over a small hand-made table.
//
// `cargo run --example mine_patterns`

use std::error::Error;

use ece_explain::patterns::mine_closed_patterns;
use ece_explain::{BinaryDataset, MiningParams};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let rows = vec![
        vec![1, 1, 0, 1],
        vec![1, 1, 0, 1],
        vec![1, 1, 1, 1],
        vec![1, 0, 1, 0],
        vec![0, 0, 1, 0],
        vec![0, 1, 0, 0],
        vec![1, 1, 0, 1],
        vec![0, 0, 1, 0],
    ];
    let ds = BinaryDataset::from_rows(&["Smoker", "Male", "Urban", "Sick"], &rows, "Sick")?;
    let params = MiningParams::new(0.2, 3)?;

    let mut out = String::new();
    for p in mine_closed_patterns(&ds, &params) {
        let desc: Vec<String> = p
            .literals
            .iter()
            .map(|l| format!("{}={}", ds.column(l.column).name, l.value as u8))
            .collect();
        out.push_str(&format!("{:<28} support {}\n", desc.join(" & "), p.support));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
