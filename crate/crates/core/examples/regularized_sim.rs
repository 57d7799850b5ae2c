//! One compliant run of the four-state model past the G-spot, with events.

use painleve::contact::make_simple_example;
use painleve::ring::Real;
use painleve::sim::{perturbed_trivial_start, simulate, SimConfig};

fn main() -> anyhow::Result<()> {
    let beta = 1.5;
    let eps = 1e-3;
    let sys = make_simple_example(Real::int(-1), Real::int(-1), Real::ratio(-3, 2));
    for nu in [0.5, 2.0] {
        let ic = perturbed_trivial_start([-1.0, -1.0, -beta], eps, nu, 0.5);
        let cfg = SimConfig {
            eps,
            t_end: 1.0,
            ..SimConfig::default()
        };
        let traj = simulate(&sys, &ic, cfg)?;
        println!("ν = {nu}: {} samples, end {:?}", traj.samples.len(), traj.end);
        for e in &traj.events {
            println!("  {:<14} t = {:.9}  p = {:+.3e}", e.kind.as_str(), e.t, e.state[4]);
        }
    }
    Ok(())
}
