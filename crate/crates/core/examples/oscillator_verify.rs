//! The tuned oscillator at ε = 1e−6 against its order-15 expansion and Θ.

use painleve::experiments::{run_oscillator_verify, ExperimentConfig, Study};

fn main() -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::preset(Study::Oscillator);
    cfg.out = std::env::temp_dir().join("painleve_oscillator");
    let r = run_oscillator_verify(&cfg)?;
    for c in &r.cases {
        let kinds: Vec<&str> = c.kinds().iter().map(|k| k.as_str()).collect();
        println!("{}: {}", c.label, kinds.join(" → "));
    }
    println!("overlay deviation {:.2e} over {} points", r.overlay_max_rel, r.overlay_points);
    println!("Θ deviation {:.2e} over {} points", r.theta_max_rel, r.theta_points);
    Ok(())
}
