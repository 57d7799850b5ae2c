//! Exact fractions, forward-mode jets and truncated δ-series.

use painleve::ring::{jet_lift, series_arith, DeltaSeries, Real, SPoly, Scalar, SeriesOp};

fn main() -> anyhow::Result<()> {
    let q = Real::parse("0.125").expect("literal parses");
    println!("0.125 parsed exactly: {q}");

    // d/dt sin(x)·x² along direction (1) at x = 0.7
    let j = jet_lift(|x| Ok(x[0].sin()? * x[0].sq()), &[0.7], &[1.0])?;
    let x: f64 = 0.7;
    println!(
        "jet value {:.12} derivative {:.12} (closed form {:.12})",
        j.value,
        j.partial(0),
        x.cos() * x * x + 2.0 * x * x.sin()
    );

    // (1 + δ s)·(1 − δ s) = 1 − δ² s² through order 3
    let s = SPoly::monomial(1.0_f64, 1);
    let one = SPoly::constant(1.0);
    let a = DeltaSeries::new(vec![one.clone(), s.clone()], 3);
    let b = DeltaSeries::new(vec![one, -s], 3);
    let prod = series_arith(&a, &b, SeriesOp::Mul)?;
    for n in 0..=3 {
        println!("δ^{n}: {}", prod.coeff(n));
    }
    Ok(())
}
