//! Runs one simulation scenario and prints the summary table.
//!
//! `cargo run --release --example experiment -- [convenience|random] [replicates]`

use distfit_core::simulation::{run_experiment, Placement, ScenarioSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let placement = match args.get(1).map(String::as_str) {
        Some("random") => Placement::Random,
        _ => Placement::Convenience,
    };
    let mut spec = ScenarioSpec::standard(placement);
    if let Some(r) = args.get(2) {
        spec.replicates = r.parse().expect("replicates must be an integer");
    }
    let t = std::time::Instant::now();
    let report = run_experiment(&spec).expect("experiment failed");
    print!("{}", report.summary_csv());
    eprintln!("{:.1}s", t.elapsed().as_secs_f64());
}
