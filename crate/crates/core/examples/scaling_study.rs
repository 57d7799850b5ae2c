//! Reduced ε sweep (one β, quarter decades down to 1e−5) with power-law fits.

use painleve::experiments::{run_scaling_study, ExperimentConfig, Study};

fn main() -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::preset(Study::Scaling);
    cfg.beta = vec![1.5];
    cfg.eps = (0..=8).map(|k| 10f64.powf(-3.0 - 0.25 * k as f64)).collect();
    cfg.out = std::env::temp_dir().join("painleve_scaling");
    for report in run_scaling_study(&cfg)? {
        for f in &report.fits {
            println!(
                "β = {}: {:<5} γ = {:.4} (theory {:.4}), R² = {:.6}",
                report.beta, f.quantity, f.gamma, f.theory, f.r2
            );
        }
    }
    println!("CSV written to {}", cfg.out.display());
    Ok(())
}
