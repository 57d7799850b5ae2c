//! Exact expansion of the six-state model's distinguished trajectory and its residual.

use painleve::canard::{expand, residual, unscale, ExactExpansion, Var};
use painleve::contact::make_extended_example;
use painleve::gspot::{find_gspot, Pinning};
use painleve::ring::Real;

fn main() -> anyhow::Result<()> {
    let sys = make_extended_example(Real::int(1), Real::int(-1), Real::int(-1), Real::ratio(-3, 2));
    let g = find_gspot(&sys, &Pinning::Auto, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0])?;
    let exp: ExactExpansion = expand(&sys, &g, 8)?;
    for n in 0..=6 {
        println!("p[δ^{n}] = {}", exp.terms[n].p);
        println!("b[δ^{n}] = {}", exp.terms[n].b);
    }

    let grid: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
    let coarse = residual(&exp, &sys, 1e-2, &grid)?;
    let fine = residual(&exp, &sys, 5e-3, &grid)?;
    println!(
        "residual {:.3e} → {:.3e} on halving δ (ratio {:.1})",
        coarse.max_equation(),
        fine.max_equation(),
        coarse.max_equation() / fine.max_equation()
    );

    let poly = unscale(&exp)?;
    if let Some(z) = poly.get(Var::Z) {
        println!("z(t = −0.01, ε = 1e−3) = {:.6e}", z.eval(-0.01, 1e-3));
    }
    Ok(())
}
