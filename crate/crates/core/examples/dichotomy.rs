//! Lift-off versus IWC on both sides of the distinguished trajectory.

use painleve::experiments::{run_dichotomy, ExperimentConfig, Study};

fn main() -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::preset(Study::Dichotomy);
    cfg.out = std::env::temp_dir().join("painleve_dichotomy");
    let report = run_dichotomy(&cfg)?;
    for r in &report.rows {
        println!("β = {} ν = {:<4} {:<7} → {}", r.beta, r.nu, r.side.as_str(), r.outcome_str());
    }
    for s in &report.sides {
        println!("β = {}: impacting side {:?}", s.beta, s.impacting_side());
    }
    Ok(())
}
