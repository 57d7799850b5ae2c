//! Θ on both evaluation paths, its asymptotics and the outcome rule.

use painleve::hypergeo::{classify_outcome, theta_asymptotic_negative, ThetaEvaluator};

fn main() -> anyhow::Result<()> {
    for beta in [0.5, 1.5, 2.5] {
        let th = ThetaEvaluator::new(beta)?;
        println!("β = {beta}: Θ(0) = {:.12}", th.eval(0.0).theta());
        for tau in [-4.0, -1.0, 1.0, 4.0] {
            let (a, b) = (th.eval_series(tau).theta(), th.eval_ode(tau).theta());
            println!("  τ = {tau:+}: series {a:.12}  ode {b:.12}  |Δ| = {:.1e}", (a - b).abs());
        }
        let far = th.eval(-30.0).theta();
        println!(
            "  Θ(−30)/30^β = {:.5}, asymptotic {:.5}",
            far / 30f64.powf(beta),
            theta_asymptotic_negative(-30.0, beta, 6)? / 30f64.powf(beta)
        );
        println!(
            "  below the canard: {}, above: {}",
            classify_outcome(beta, true)?.as_str(),
            classify_outcome(beta, false)?.as_str()
        );
    }
    Ok(())
}
