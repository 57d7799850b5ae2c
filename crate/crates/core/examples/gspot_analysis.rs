//! G-spot of the tuned oscillator, its case, the singular flow and the fast spectrum.

use painleve::contact::make_impact_oscillator;
use painleve::gspot::{fast_spectrum, find_gspot, singular_flow, Pinning};

fn main() -> anyhow::Result<()> {
    let osc = make_impact_oscillator(7.0 / 3.0, 0.0, 1.0, 1.0, 1.0);
    let g = find_gspot(&osc, &Pinning::Auto, &osc.gspot_state())?;
    print!("{}", g.to_text());
    println!("cos φ* = {:.12}, sin φ* = {:.12}", g.xi[0].cos(), g.xi[0].sin());

    let flow = singular_flow(g.alphas(), (0.05, -0.1), 50.0);
    let (s, p, b) = flow.last();
    println!("singular flow from (0.05, −0.1): {:?} at ŝ = {s:.3}, (p, b) = ({p:.2e}, {b:.2e})", flow.terminal);

    for p in [0.5, 0.0, -0.5] {
        let roots = fast_spectrum(p);
        println!("p = {p:+}: {roots:.4?}");
    }
    Ok(())
}
