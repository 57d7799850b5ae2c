//! Lie-derivative contact quantities and the geometric identities of a built-in.

use painleve::contact::{derived_quantities, lagrangian_residuals, make_impact_oscillator};

fn main() -> anyhow::Result<()> {
    let osc = make_impact_oscillator(7.0 / 3.0, 0.0, 1.0, 1.0, 1.0);
    let xi = [1.0, -0.45, -0.8, 0.7];
    let d = derived_quantities(&osc, &xi)?;
    println!("u = {:.6}  v = {:.6}  a = {:.6}  b = {:.6}", d.u, d.v, d.a, d.b);
    println!("A = {:.6}  B = {:.6}  C = {:.6}  p = {:.6}", d.big_a, d.big_b, d.big_c, d.p);
    println!("α1 = {:.6}  α2 = {:.6}  α3 = {:.6}", d.alpha1, d.alpha2, d.alpha3);
    let r = lagrangian_residuals(&osc, &xi)?;
    println!("identity residuals: {:?}", r.map(|x| format!("{x:.1e}")));
    Ok(())
}
