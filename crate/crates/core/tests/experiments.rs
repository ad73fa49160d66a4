use specdyn::experiment::{run, Experiment, ExperimentConfig};

fn run_default(name: &str) -> specdyn::experiment::Outcome {
    let config = ExperimentConfig::new(Experiment::default_for(name).unwrap());
    let start = std::time::Instant::now();
    let out = run(&config).unwrap();
    eprintln!("{name}: {:.2}s", start.elapsed().as_secs_f64());
    for c in &out.report.checks {
        eprintln!("  {}", c.line());
    }
    out
}

#[test]
fn every_default_experiment_passes() {
    let mut failed = Vec::new();
    for name in Experiment::NAMES {
        let out = run_default(name);
        if !out.passed() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "{failed:?}");
}
