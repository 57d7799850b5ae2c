//! Contact systems of the form ξ̇ = F + G_T λ_T + G_N λ_N and the scalar
//! quantities obtained from them by Lie differentiation.

mod builtin;

pub use builtin::{
    make_extended_example, make_impact_oscillator, make_simple_example, oscillator_gspot_angle,
    BuiltinSystem,
    ExtendedExample, ImpactOscillator, OscillatorParams, SimpleExample,
};

use crate::ring::{Jet, RingError, Scalar};

/// How the tangential force is resolved while in contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrictionModel {
    /// Contact is always in positive slip (λ_T = −μλ_N).
    PositiveSlipOnly,
    /// Full Coulomb law with positive slip, negative slip and stick.
    StickSlip,
}

/// A planar frictional point contact.
///
/// Every function is generic over the scalar ring so one definition serves
/// simulation, differentiation and series expansion alike.
pub trait ContactSystem: Send + Sync {
    fn dim(&self) -> usize;

    fn label(&self) -> String;

    fn state_names(&self) -> Vec<String>;

    /// F(ξ).
    fn drift<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError>;

    /// G_T(ξ).
    fn tangential<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError>;

    /// G_N(ξ).
    fn normal<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError>;

    /// Tangential contact coordinate x(ξ).
    fn position<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError>;

    /// Normal gap y(ξ).
    fn gap<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError>;

    /// Friction coefficient μ(ξ).
    fn friction<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError>;

    /// True when every constant is an exact fraction.
    fn is_exact(&self) -> bool;

    fn friction_model(&self) -> FrictionModel {
        FrictionModel::StickSlip
    }

    /// Nominal (α₁*, α₂*, α₃*) when the system knows them in closed form.
    fn reference_alphas(&self) -> Option<[f64; 3]> {
        None
    }
}

/// Vector fields along which Lie derivatives are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Drift,
    Tangential,
    Normal,
    /// G = G_N − μG_T.
    PositiveSlip,
    /// G⁻ = G_N + μG_T.
    NegativeSlip,
}

pub fn field_value<S: Scalar, Y: ContactSystem>(
    sys: &Y,
    field: Field,
    xi: &[S],
) -> Result<Vec<S>, RingError> {
    match field {
        Field::Drift => sys.drift(xi),
        Field::Tangential => sys.tangential(xi),
        Field::Normal => sys.normal(xi),
        Field::PositiveSlip | Field::NegativeSlip => {
            let gn = sys.normal(xi)?;
            let gt = sys.tangential(xi)?;
            let mu = sys.friction(xi)?;
            let mu = if field == Field::PositiveSlip { -mu } else { mu };
            Ok(gn
                .into_iter()
                .zip(gt)
                .map(|(n, t)| n + mu.clone() * t)
                .collect())
        }
    }
}

/// 𝓛_V f at ξ, with f given over jets.
pub fn lie<S, Y, Fun>(sys: &Y, field: Field, xi: &[S], f: Fun) -> Result<S, RingError>
where
    S: Scalar,
    Y: ContactSystem,
    Fun: FnOnce(&[Jet<S>]) -> Result<Jet<S>, RingError>,
{
    let dir = field_value(sys, field, xi)?;
    let seeded: Vec<Jet<S>> = xi
        .iter()
        .cloned()
        .zip(dir)
        .map(|(x, d)| Jet::new(x, vec![d]))
        .collect();
    Ok(f(&seeded)?.partial(0))
}

/// The scalar functions of state used throughout, each a Lie-derivative chain.
pub mod quantity {
    use super::*;

    pub fn u<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Drift, xi, |e| sys.position(e))
    }

    pub fn v<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Drift, xi, |e| sys.gap(e))
    }

    pub fn a<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Drift, xi, |e| u(sys, e))
    }

    pub fn b<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Drift, xi, |e| v(sys, e))
    }

    pub fn big_a<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Tangential, xi, |e| u(sys, e))
    }

    /// B = 𝓛_{G_N} u.
    pub fn big_b<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Normal, xi, |e| u(sys, e))
    }

    /// B computed the other way, 𝓛_{G_T} v.
    pub fn big_b_alt<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Tangential, xi, |e| v(sys, e))
    }

    pub fn big_c<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Normal, xi, |e| v(sys, e))
    }

    /// p = 𝓛_G v.
    pub fn p<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::PositiveSlip, xi, |e| v(sys, e))
    }

    pub fn alpha1<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Drift, xi, |e| p(sys, e))
    }

    pub fn alpha2<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::Drift, xi, |e| b(sys, e))
    }

    pub fn alpha3<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        Ok(-lie(sys, Field::PositiveSlip, xi, |e| b(sys, e))?)
    }

    /// k± = 𝓛_{G±} u.
    pub fn k_plus<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::PositiveSlip, xi, |e| u(sys, e))
    }

    pub fn k_minus<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::NegativeSlip, xi, |e| u(sys, e))
    }

    /// p⁻ = 𝓛_{G⁻} v.
    pub fn p_minus<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::NegativeSlip, xi, |e| v(sys, e))
    }

    /// 𝓛_{G⁻} p.
    pub fn p_rate_minus<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        lie(sys, Field::NegativeSlip, xi, |e| p(sys, e))
    }

    /// α₃⁻ = −𝓛_{G⁻} b.
    pub fn alpha3_minus<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<S, RingError> {
        Ok(-lie(sys, Field::NegativeSlip, xi, |e| b(sys, e))?)
    }
}

/// The eleven scalar quantities at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedQuantities<S = f64> {
    pub u: S,
    pub v: S,
    pub a: S,
    pub b: S,
    pub big_a: S,
    pub big_b: S,
    pub big_c: S,
    pub p: S,
    pub alpha1: S,
    pub alpha2: S,
    pub alpha3: S,
}

pub fn derived_quantities<S: Scalar, Y: ContactSystem>(
    sys: &Y,
    xi: &[S],
) -> Result<DerivedQuantities<S>, RingError> {
    Ok(DerivedQuantities {
        u: quantity::u(sys, xi)?,
        v: quantity::v(sys, xi)?,
        a: quantity::a(sys, xi)?,
        b: quantity::b(sys, xi)?,
        big_a: quantity::big_a(sys, xi)?,
        big_b: quantity::big_b(sys, xi)?,
        big_c: quantity::big_c(sys, xi)?,
        p: quantity::p(sys, xi)?,
        alpha1: quantity::alpha1(sys, xi)?,
        alpha2: quantity::alpha2(sys, xi)?,
        alpha3: quantity::alpha3(sys, xi)?,
    })
}

/// Residuals of 𝓛_{G_T}x, 𝓛_{G_N}x, 𝓛_{G_T}y, 𝓛_{G_N}y and 𝓛_G p.
pub fn lagrangian_residuals<S: Scalar, Y: ContactSystem>(
    sys: &Y,
    xi: &[S],
) -> Result<[S; 5], RingError> {
    Ok([
        lie(sys, Field::Tangential, xi, |e| sys.position(e))?,
        lie(sys, Field::Normal, xi, |e| sys.position(e))?,
        lie(sys, Field::Tangential, xi, |e| sys.gap(e))?,
        lie(sys, Field::Normal, xi, |e| sys.gap(e))?,
        lie(sys, Field::PositiveSlip, xi, |e| quantity::p(sys, e))?,
    ])
}

/// Sign checks of the mass-matrix proxies A, C and AC − B².
#[derive(Debug, Clone, PartialEq)]
pub struct DefinitenessReport {
    pub big_a: f64,
    pub big_c: f64,
    pub determinant: f64,
    pub violations: Vec<&'static str>,
}

impl DefinitenessReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn definiteness<Y: ContactSystem>(sys: &Y, xi: &[f64]) -> Result<DefinitenessReport, RingError> {
    let big_a = quantity::big_a(sys, xi)?;
    let big_b = quantity::big_b(sys, xi)?;
    let big_c = quantity::big_c(sys, xi)?;
    let determinant = big_a * big_c - big_b * big_b;
    let mut violations = Vec::new();
    if big_a <= 0.0 {
        violations.push("A > 0");
    }
    if big_c <= 0.0 {
        violations.push("C > 0");
    }
    if determinant <= 0.0 {
        violations.push("AC - B^2 > 0");
    }
    Ok(DefinitenessReport {
        big_a,
        big_c,
        determinant,
        violations,
    })
}

/// Stick fraction c = (k⁻ + a/λ_N)/(k⁻ − k⁺) holding u̇ = 0.
pub fn stick_fraction<S: Scalar, Y: ContactSystem>(
    sys: &Y,
    xi: &[S],
    lambda_n: &S,
) -> Result<S, RingError> {
    let a = quantity::a(sys, xi)?;
    let kp = quantity::k_plus(sys, xi)?;
    let km = quantity::k_minus(sys, xi)?;
    let num = km.clone() + a.div(lambda_n)?;
    num.div(&(km - kp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Rational, Real};

    /// G_T moves the tangential coordinate, which a Lagrangian system forbids.
    struct Broken;

    impl ContactSystem for Broken {
        fn dim(&self) -> usize {
            2
        }
        fn label(&self) -> String {
            "broken".into()
        }
        fn state_names(&self) -> Vec<String> {
            vec!["x".into(), "y".into()]
        }
        fn drift<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
            Ok(vec![xi[1].clone(), S::from_i64(-1)])
        }
        fn tangential<S: Scalar>(&self, _xi: &[S]) -> Result<Vec<S>, RingError> {
            Ok(vec![S::from_i64(1), S::from_i64(0)])
        }
        fn normal<S: Scalar>(&self, _xi: &[S]) -> Result<Vec<S>, RingError> {
            Ok(vec![S::from_i64(0), S::from_i64(1)])
        }
        fn position<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
            Ok(xi[0].clone())
        }
        fn gap<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
            Ok(xi[1].clone())
        }
        fn friction<S: Scalar>(&self, _xi: &[S]) -> Result<S, RingError> {
            Ok(S::from_i64(0))
        }
        fn is_exact(&self) -> bool {
            true
        }
    }

    #[test]
    fn broken_system_reports_residuals() {
        let r = lagrangian_residuals(&Broken, &[0.3, 0.2]).unwrap();
        assert_eq!(r[0], 1.0);
        assert_eq!(r[3], 1.0);
    }

    #[test]
    fn extended_example_quantities() {
        let sys = make_extended_example(Real::int(1), Real::int(-1), Real::int(-1), Real::ratio(-3, 2));
        let xi = [0.0, 2.0, 0.0, 0.0, 0.3, -1.0];
        let d = derived_quantities(&sys, &xi).unwrap();
        assert!((d.p - 0.3).abs() < 1e-15);
        assert_eq!(d.b, -1.0);
        assert_eq!(d.alpha1, -2.0);
        assert_eq!(d.alpha2, -1.0);
        assert!((d.alpha3 + 1.5).abs() < 1e-15);
        assert!((d.p - (d.big_c - (1.0 - 0.3) * d.big_b)).abs() < 1e-15);
    }

    #[test]
    fn extended_example_exact_residuals() {
        let sys = make_extended_example(Real::int(1), Real::int(-1), Real::int(-1), Real::ratio(-3, 2));
        let xi: Vec<Rational> = [3, -2, 5, 7, 1, 4]
            .iter()
            .map(|&k| Rational::from_i64(k) / Rational::from_i64(11))
            .collect();
        let r = lagrangian_residuals(&sys, &xi).unwrap();
        assert!(r.iter().all(|x| *x == Rational::from_i64(0)));
    }

    #[test]
    fn stick_fraction_of_extended_example() {
        let sys = make_extended_example(Real::int(1), Real::int(-1), Real::int(-1), Real::ratio(-3, 2));
        let xi = [0.0, 0.0, 0.0, 0.0, 0.2, -0.4];
        let c = stick_fraction(&sys, &xi, &1.0).unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-15);
        assert!((quantity::p_minus(&sys, &xi).unwrap() - 1.0).abs() < 1e-15);
        assert!((quantity::k_plus(&sys, &xi).unwrap() + 1.0).abs() < 1e-15);
        assert!((quantity::k_minus(&sys, &xi).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn simple_example_reports_definiteness_violation() {
        let sys = make_simple_example(Real::int(-1), Real::int(-1), Real::ratio(-1, 2));
        let rep = definiteness(&sys, &[0.5, -1.0, 0.0, 0.0]).unwrap();
        assert!(!rep.holds());
        let ext = make_extended_example(Real::int(0), Real::int(-1), Real::int(-1), Real::ratio(-1, 2));
        assert!(definiteness(&ext, &[0.0, 1.0, 0.0, 0.0, 0.1, 0.0]).unwrap().holds());
    }
}
