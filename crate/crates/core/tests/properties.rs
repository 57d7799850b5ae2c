use painleve::canard::{expand, unscale, ExactExpansion, FloatExpansion, Var};
use painleve::contact::{
    derived_quantities, lagrangian_residuals, make_extended_example, make_impact_oscillator, make_simple_example,
    BuiltinSystem, ContactSystem,
};
use painleve::experiments::{fit_power_law, ExperimentConfig};
use painleve::gspot::{fast_spectrum, find_gspot, Pinning};
use painleve::hypergeo::{classify_outcome, ThetaEvaluator};
use painleve::ring::{jet_lift, Jet, Real, Scalar};
use proptest::prelude::*;

fn builtins() -> Vec<BuiltinSystem> {
    vec![
        BuiltinSystem::Simple(make_simple_example(Real::int(-1), Real::int(-1), Real::ratio(-3, 2))),
        BuiltinSystem::Extended(make_extended_example(
            Real::int(1),
            Real::int(-1),
            Real::int(-1),
            Real::ratio(-3, 2),
        )),
        BuiltinSystem::Oscillator(make_impact_oscillator(7.0 / 3.0, 0.0, 1.0, 1.0, 1.0)),
    ]
}

/// A state inside the domain of every built-in (the extended model needs p ≠ 1).
fn state(sys: &BuiltinSystem, raw: &[f64; 6]) -> Vec<f64> {
    match sys {
        BuiltinSystem::Extended(_) => {
            let mut x = raw.to_vec();
            x[4] = 0.9 * raw[4].tanh();
            x
        }
        _ => raw[..sys.dim()].to_vec(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_product_and_chain_rule(a in -3.0..3.0f64, b in -3.0..3.0f64, da in -2.0..2.0f64, db in -2.0..2.0f64) {
        let x = Jet::new(a, vec![da]);
        let y = Jet::new(b, vec![db]);
        let prod = x.clone() * y;
        prop_assert!((prod.partial(0) - (a * db + b * da)).abs() < 1e-12);
        let s = x.sin().unwrap();
        prop_assert!((s.partial(0) - a.cos() * da).abs() < 1e-12);
        let r = Jet::new(a.abs() + 0.5, vec![da]).recip().unwrap();
        prop_assert!((r.partial(0) + da / (a.abs() + 0.5).powi(2)).abs() < 1e-10);
    }

    #[test]
    fn fast_spectrum_symmetric_functions(p in -5.0..5.0f64) {
        let r = fast_spectrum(p);
        let sum = r[0] + r[1] + r[2];
        let pairs = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        let prod = r[0] * r[1] * r[2];
        prop_assert!((sum.re + 2.0).abs() < 1e-10 && sum.im.abs() < 1e-10);
        prop_assert!((pairs.re - p).abs() < 1e-10 && pairs.im.abs() < 1e-10);
        prop_assert!((prod.re + p).abs() < 1e-10 && prod.im.abs() < 1e-10);
        if p > 0.0 {
            prop_assert!(r.iter().all(|z| z.re < 0.0));
        }
        if p < 0.0 {
            let positive = r.iter().filter(|z| z.im.abs() < 1e-12 && z.re > 0.0).count();
            prop_assert_eq!(positive, 1);
        }
    }

    #[test]
    fn geometric_identities_hold(raw in prop::array::uniform6(-1.0..1.0f64)) {
        for sys in builtins() {
            let xi = state(&sys, &raw);
            let r = lagrangian_residuals(&sys, &xi).unwrap();
            prop_assert!(r.iter().all(|x| x.abs() <= 1e-10), "{}: {:?}", sys.label(), r);
        }
    }

    #[test]
    fn painleve_parameter_splits_along_the_fields(raw in prop::array::uniform6(-1.0..1.0f64)) {
        for sys in builtins() {
            let xi = state(&sys, &raw);
            let d = derived_quantities(&sys, &xi).unwrap();
            let mu = sys.friction(&xi).unwrap();
            prop_assert!((d.p - (d.big_c - mu * d.big_b)).abs() < 1e-10);
        }
    }

    #[test]
    fn first_order_change_is_linear_in_the_perturbation(
        raw in prop::array::uniform6(-1.0..1.0f64),
        d1 in prop::array::uniform6(-1.0..1.0f64),
        d2 in prop::array::uniform6(-1.0..1.0f64),
        c in -2.0..2.0f64,
    ) {
        for sys in builtins() {
            let m = sys.dim();
            let xi = state(&sys, &raw);
            let mix: Vec<f64> = (0..m).map(|i| d1[i] + c * d2[i]).collect();
            for k in 0..m {
                let f = |x: &[Jet<f64>]| Ok(sys.drift(x)?[k].clone());
                let j1 = jet_lift(f, &xi, &d1[..m]).unwrap().partial(0);
                let j2 = jet_lift(f, &xi, &d2[..m]).unwrap().partial(0);
                let jm = jet_lift(f, &xi, &mix).unwrap().partial(0);
                prop_assert!((jm - (j1 + c * j2)).abs() < 1e-9 * (1.0 + jm.abs()));
                // and it is the derivative
                let h = 1e-6;
                let plus: Vec<f64> = (0..m).map(|i| xi[i] + h * d1[i]).collect();
                let minus: Vec<f64> = (0..m).map(|i| xi[i] - h * d1[i]).collect();
                let fd = (sys.drift(&plus).unwrap()[k] - sys.drift(&minus).unwrap()[k]) / (2.0 * h);
                prop_assert!((fd - j1).abs() < 1e-6 * (1.0 + j1.abs()));
            }
        }
    }

    #[test]
    fn theta_satisfies_its_equation(beta in prop::sample::select(vec![0.5, 1.5, 2.5, 7.0 / 3.0]), tau in -6.0..6.0f64) {
        let th = ThetaEvaluator::new(beta).unwrap();
        let h = 1e-4;
        let (lo, mid, hi) = (th.eval(tau - h), th.eval(tau), th.eval(tau + h));
        let second_fd = (hi.theta_prime() - lo.theta_prime()) / (2.0 * h);
        let third_fd = (hi.theta_second() - lo.theta_second()) / (2.0 * h);
        let scale = 1.0 + mid.theta().abs() + mid.theta_prime().abs() * tau.abs();
        prop_assert!((second_fd - mid.theta_second()).abs() < 1e-5 * scale);
        prop_assert!((third_fd - (tau * mid.theta_prime() - beta * mid.theta())).abs() < 1e-5 * scale);
    }

    #[test]
    fn outcome_rule_flips_across_integers(frac in 0.05..0.95f64, k in 1u32..5) {
        let beta = k as f64 + frac;
        let here = classify_outcome(beta, true).unwrap();
        let next = classify_outcome(beta + 1.0, true).unwrap();
        prop_assert_ne!(here, next);
        prop_assert_ne!(here, classify_outcome(beta, false).unwrap());
    }

    #[test]
    fn power_law_fit_recovers_exponent(gamma in 0.1..3.0f64, log_c in -3.0..3.0f64) {
        let eps: Vec<f64> = (0..8).map(|k| 1e-6 * 10f64.powf(0.125 * k as f64)).collect();
        let vals: Vec<f64> = eps.iter().map(|e| log_c.exp() * e.powf(gamma)).collect();
        let f = fit_power_law("x", gamma, &eps, &vals).unwrap();
        prop_assert!((f.gamma - gamma).abs() < 1e-9);
    }

    #[test]
    fn config_canonical_form_round_trips(
        beta in prop::collection::vec(0.1..3.0f64, 1..4),
        eps in prop::collection::vec(1e-7..1e-2f64, 1..5),
        order in 1usize..20,
    ) {
        let mut cfg = ExperimentConfig { beta, eps, order, ..ExperimentConfig::default() };
        cfg.validate().unwrap();
        let again = ExperimentConfig::parse(&cfg.canonical()).unwrap();
        prop_assert_eq!(again.canonical(), cfg.canonical());
        prop_assert_eq!(again.content_hash(), cfg.content_hash());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn exact_expansion_stays_in_class(chi in -2i64..=2, num in 3i64..9) {
        // α₃ = −num/2 with odd num keeps β away from integers
        let num = num | 1;
        let sys = make_extended_example(Real::int(chi), Real::int(-1), Real::int(-1), Real::ratio(-num, 2));
        let g = find_gspot(&sys, &Pinning::Auto, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let e: ExactExpansion = expand(&sys, &g, 6).unwrap();
        prop_assert_eq!(e.class_defect(), 0.0);
    }

    #[test]
    fn scaled_and_unscaled_evaluation_agree(t in -0.05..0.05f64, log_eps in -6.0..-3.0f64) {
        let osc = make_impact_oscillator(7.0 / 3.0, 0.0, 1.0, 1.0, 1.0);
        let g = find_gspot(&osc, &Pinning::Auto, &osc.gspot_state()).unwrap();
        let e: FloatExpansion = expand(&osc, &g, 8).unwrap();
        let poly = unscale(&e).unwrap();
        let eps = 10f64.powf(log_eps);
        for var in [Var::P, Var::B, Var::Xi(0)] {
            let a = e.eval_unscaled(var, t, eps);
            let b = poly.get(var).unwrap().eval(t, eps);
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{var:?}: {a} vs {b}");
        }
    }
}
