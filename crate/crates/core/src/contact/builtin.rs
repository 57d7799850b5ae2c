use super::{ContactSystem, FrictionModel};
use crate::ring::{Real, RingError, Scalar};

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Four-state model (p, b, y, v) with constant α's; the normal coordinate
/// y is the only geometric output and friction enters only through p.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleExample {
    pub alpha1: Real,
    pub alpha2: Real,
    pub alpha3: Real,
}

pub fn make_simple_example(alpha1: Real, alpha2: Real, alpha3: Real) -> SimpleExample {
    SimpleExample {
        alpha1,
        alpha2,
        alpha3,
    }
}

impl ContactSystem for SimpleExample {
    fn dim(&self) -> usize {
        4
    }

    fn label(&self) -> String {
        format!("simple(a1={}, a2={}, a3={})", self.alpha1, self.alpha2, self.alpha3)
    }

    fn state_names(&self) -> Vec<String> {
        names(&["p", "b", "y", "v"])
    }

    fn drift<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        Ok(vec![
            S::from_real(&self.alpha1),
            S::from_real(&self.alpha2),
            xi[3].clone(),
            xi[1].clone(),
        ])
    }

    fn tangential<S: Scalar>(&self, _xi: &[S]) -> Result<Vec<S>, RingError> {
        Ok(vec![S::from_i64(0); 4])
    }

    fn normal<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        Ok(vec![
            S::from_i64(0),
            S::from_real(&self.alpha3.neg()),
            S::from_i64(0),
            xi[0].clone(),
        ])
    }

    fn position<S: Scalar>(&self, _xi: &[S]) -> Result<S, RingError> {
        Ok(S::from_i64(0))
    }

    fn gap<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
        Ok(xi[2].clone())
    }

    fn friction<S: Scalar>(&self, _xi: &[S]) -> Result<S, RingError> {
        Ok(S::from_i64(0))
    }

    fn is_exact(&self) -> bool {
        self.alpha1.is_exact() && self.alpha2.is_exact() && self.alpha3.is_exact()
    }

    fn friction_model(&self) -> FrictionModel {
        FrictionModel::PositiveSlipOnly
    }

    fn reference_alphas(&self) -> Option<[f64; 3]> {
        Some([self.alpha1.to_f64(), self.alpha2.to_f64(), self.alpha3.to_f64()])
    }
}

/// Six-state model (x, u, y, v, p, b) with state-dependent friction μ = 1 − p.
///
/// χ couples b back into the evolution of p.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedExample {
    pub chi: Real,
    pub alpha1: Real,
    pub alpha2: Real,
    pub alpha3: Real,
}

pub fn make_extended_example(chi: Real, alpha1: Real, alpha2: Real, alpha3: Real) -> ExtendedExample {
    ExtendedExample {
        chi,
        alpha1,
        alpha2,
        alpha3,
    }
}

impl ContactSystem for ExtendedExample {
    fn dim(&self) -> usize {
        6
    }

    fn label(&self) -> String {
        format!(
            "extended(chi={}, a1={}, a2={}, a3={})",
            self.chi, self.alpha1, self.alpha2, self.alpha3
        )
    }

    fn state_names(&self) -> Vec<String> {
        names(&["x", "u", "y", "v", "p", "b"])
    }

    fn drift<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        Ok(vec![
            xi[1].clone(),
            S::from_i64(0),
            xi[3].clone(),
            xi[5].clone(),
            S::from_real(&self.alpha1) + S::from_real(&self.chi) * xi[5].clone(),
            S::from_real(&self.alpha2),
        ])
    }

    fn tangential<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        let inv = (S::from_i64(2) * (S::from_i64(1) - xi[4].clone())).recip()?;
        Ok(vec![
            S::from_i64(0),
            S::from_i64(3) * inv.clone(),
            S::from_i64(0),
            S::from_real(&Real::ratio(1, 2)),
            S::from_i64(0),
            S::from_real(&self.alpha3) * inv,
        ])
    }

    fn normal<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        let half = S::from_real(&Real::ratio(1, 2));
        Ok(vec![
            S::from_i64(0),
            half.clone(),
            S::from_i64(0),
            half.clone() * (S::from_i64(1) + xi[4].clone()),
            S::from_i64(0),
            -(half * S::from_real(&self.alpha3)),
        ])
    }

    fn position<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
        Ok(xi[0].clone())
    }

    fn gap<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
        Ok(xi[2].clone())
    }

    fn friction<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
        Ok(S::from_i64(1) - xi[4].clone())
    }

    fn is_exact(&self) -> bool {
        [&self.chi, &self.alpha1, &self.alpha2, &self.alpha3]
            .iter()
            .all(|r| r.is_exact())
    }

    fn reference_alphas(&self) -> Option<[f64; 3]> {
        Some([self.alpha1.to_f64(), self.alpha2.to_f64(), self.alpha3.to_f64()])
    }
}

/// Physical constants of the two-mass frictional impact oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorParams {
    pub m1: f64,
    pub m2: f64,
    pub l: f64,
    pub g: f64,
    pub mu: f64,
    pub phi0: f64,
    pub k_phi: f64,
    pub c_phi: f64,
    pub k_psi: f64,
    pub c_psi: f64,
}

/// Pendulum-on-spring oscillator pressed against a moving belt; state
/// (φ, ψ, φ̇, ψ̇).
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactOscillator {
    pub params: OscillatorParams,
    pub beta: f64,
    pub kappa: f64,
}

/// Angle at which the tuned oscillator reaches its G-spot (cos = 3/5).
pub fn oscillator_gspot_angle() -> f64 {
    4.0_f64.atan2(3.0)
}

/// Oscillator tuned so that α₃/α₁ = β and the sign of α₂ follows κ.
pub fn make_impact_oscillator(beta: f64, kappa: f64, m1: f64, l: f64, g: f64) -> ImpactOscillator {
    let phi_star = oscillator_gspot_angle();
    let params = OscillatorParams {
        m1,
        m2: m1,
        l,
        g,
        mu: 25.0 / 12.0,
        phi0: phi_star + 49.0 / 20.0 - 7.0 * beta / 12.0 - 9.0 * kappa / 50.0,
        k_phi: m1 * g * l,
        c_phi: 0.0,
        k_psi: kappa * m1 * g / l,
        c_psi: 25.0 / 108.0 * (18.0 - 7.0 * beta) * m1 * (g / l).sqrt(),
    };
    ImpactOscillator { params, beta, kappa }
}

impl ImpactOscillator {
    fn c<S: Scalar>(x: f64) -> S {
        S::from_f64(x)
    }

    /// M⁻¹w for the configuration-dependent mass matrix.
    fn solve_mass<S: Scalar>(&self, sin_phi: &S, w: [S; 2]) -> Result<[S; 2], RingError> {
        let p = &self.params;
        let off = Self::c::<S>(p.m1 * p.l) * sin_phi.clone();
        let m11 = Self::c::<S>(p.m1 * p.l * p.l);
        let m22 = Self::c::<S>(p.m1 + p.m2);
        let inv_det = (m11.clone() * m22.clone() - off.sq()).recip()?;
        let [w1, w2] = w;
        Ok([
            (m22 * w1.clone() - off.clone() * w2.clone()) * inv_det.clone(),
            (m11 * w2 - off * w1) * inv_det,
        ])
    }

    /// The G-spot state in closed form.
    pub fn gspot_state(&self) -> [f64; 4] {
        let p = &self.params;
        let w = (p.g / p.l).sqrt();
        [oscillator_gspot_angle(), -0.4 * p.l, -w, 0.8 * (p.g * p.l).sqrt()]
    }
}

impl ContactSystem for ImpactOscillator {
    fn dim(&self) -> usize {
        4
    }

    fn label(&self) -> String {
        format!("oscillator(beta={}, kappa={})", self.beta, self.kappa)
    }

    fn state_names(&self) -> Vec<String> {
        names(&["phi", "psi", "phi_dot", "psi_dot"])
    }

    fn drift<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        let p = &self.params;
        let (s, c) = xi[0].sin_cos()?;
        let c_ = Self::c::<S>;
        let f1 = -(c_(p.k_phi) * (xi[0].clone() - c_(p.phi0)))
            - c_(p.c_phi) * xi[2].clone()
            - c_(p.m1 * p.g * p.l) * s.clone();
        let f2 = -(c_(p.k_psi) * xi[1].clone())
            - c_(p.c_psi) * xi[3].clone()
            - c_((p.m1 + p.m2) * p.g)
            - c_(p.m1 * p.l) * c * xi[2].sq();
        let [a1, a2] = self.solve_mass(&s, [f1, f2])?;
        Ok(vec![xi[2].clone(), xi[3].clone(), a1, a2])
    }

    fn tangential<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        let (s, c) = xi[0].sin_cos()?;
        let [a1, a2] = self.solve_mass(&s, [Self::c::<S>(self.params.l) * c, S::from_i64(0)])?;
        Ok(vec![S::from_i64(0), S::from_i64(0), a1, a2])
    }

    fn normal<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        let s = xi[0].sin()?;
        let [a1, a2] = self.solve_mass(&s, [Self::c::<S>(self.params.l) * s.clone(), S::from_i64(1)])?;
        Ok(vec![S::from_i64(0), S::from_i64(0), a1, a2])
    }

    fn position<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
        Ok(Self::c::<S>(self.params.l) * xi[0].sin()?)
    }

    fn gap<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
        let l = Self::c::<S>(self.params.l);
        Ok(xi[1].clone() + l * (S::from_i64(1) - xi[0].cos()?))
    }

    fn friction<S: Scalar>(&self, _xi: &[S]) -> Result<S, RingError> {
        Ok(S::from_real(&Real::ratio(25, 12)))
    }

    fn is_exact(&self) -> bool {
        false
    }

    /// The belt drives the contact point, so slip never reverses near the G-spot.
    fn friction_model(&self) -> FrictionModel {
        FrictionModel::PositiveSlipOnly
    }

    fn reference_alphas(&self) -> Option<[f64; 3]> {
        let p = &self.params;
        let (b, k) = (self.beta, self.kappa);
        let rate = (p.g / p.l).sqrt();
        let a1 = -175.0 / 408.0 / p.m1 * rate;
        let a2 = (30625.0 * b * b + 9450.0 * b * k - 61425.0 * b + 8262.0 * k - 126765.0) / 55080.0
            * p.g
            * rate;
        Some([a1, a2, b * a1])
    }
}

/// Any of the three built-ins, selectable at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinSystem {
    Simple(SimpleExample),
    Extended(ExtendedExample),
    Oscillator(ImpactOscillator),
}

macro_rules! dispatch {
    ($self:ident, $s:ident => $e:expr) => {
        match $self {
            BuiltinSystem::Simple($s) => $e,
            BuiltinSystem::Extended($s) => $e,
            BuiltinSystem::Oscillator($s) => $e,
        }
    };
}

impl ContactSystem for BuiltinSystem {
    fn dim(&self) -> usize {
        dispatch!(self, s => s.dim())
    }
    fn label(&self) -> String {
        dispatch!(self, s => s.label())
    }
    fn state_names(&self) -> Vec<String> {
        dispatch!(self, s => s.state_names())
    }
    fn drift<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        dispatch!(self, s => s.drift(xi))
    }
    fn tangential<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        dispatch!(self, s => s.tangential(xi))
    }
    fn normal<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, RingError> {
        dispatch!(self, s => s.normal(xi))
    }
    fn position<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
        dispatch!(self, s => s.position(xi))
    }
    fn gap<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
        dispatch!(self, s => s.gap(xi))
    }
    fn friction<S: Scalar>(&self, xi: &[S]) -> Result<S, RingError> {
        dispatch!(self, s => s.friction(xi))
    }
    fn is_exact(&self) -> bool {
        dispatch!(self, s => s.is_exact())
    }
    fn friction_model(&self) -> FrictionModel {
        dispatch!(self, s => s.friction_model())
    }
    fn reference_alphas(&self) -> Option<[f64; 3]> {
        dispatch!(self, s => s.reference_alphas())
    }
}
