//! Stick or lift-off after the tangential shock of the six-state model.

use painleve::experiments::{run_post_gspot, ExperimentConfig, Study};

fn main() -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::preset(Study::PostGspot);
    cfg.out = std::env::temp_dir().join("painleve_post_gspot");
    let report = run_post_gspot(&cfg)?;
    for r in &report.rows {
        println!(
            "χ = {} ν = {:<4} {:<10} at t = {:.6} with u = {:.3e}",
            r.chi,
            r.nu,
            r.termination.as_str(),
            r.t_end,
            r.u_end
        );
    }
    Ok(())
}
