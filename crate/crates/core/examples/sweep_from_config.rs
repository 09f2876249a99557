//! Loads a JSON config and runs the regime report and truth-table suite,
//! writing CSV files to the temp directory.
//!
//! Usage: `cargo run --example sweep_from_config -- configs/table1.json`

use paritygate::experiments::{load_config_with, run_and_write, ConfigOverrides, Experiment};

fn main() -> paritygate::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/table1.json".into());
    for experiment in [Experiment::RegimeReport, Experiment::TruthTable] {
        let out = std::env::temp_dir().join(format!("{experiment}.csv"));
        let o = ConfigOverrides {
            experiment: Some(experiment),
            output_path: Some(out.clone()),
            ..Default::default()
        };
        let (params, dec, spec) = load_config_with(&path, &o)?;
        let rows = run_and_write(&spec, &params, &dec)?;
        let worst = rows.iter().map(|r| r.fidelity).fold(1.0, f64::min);
        println!("{experiment}: {} rows, lowest fidelity {worst:.9}, written to {}", rows.len(), out.display());
    }
    Ok(())
}
