//! Γ, ₁F₂ and the perturbation function Θ(τ, β), the solution of
//! θ‴ − τθ′ + βθ = 0 that grows like (−τ)^β as τ → −∞ with no oscillatory part.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HypergeoError {
    #[error("Γ has a pole at {0}")]
    Pole(f64),
    #[error("β = {0} is an integer; Θ is undefined")]
    IntegerBeta(f64),
    #[error("series diverged before reaching tolerance")]
    Range,
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Real Γ(x) by the Lanczos approximation, with reflection for x < 1/2.
pub fn gamma(x: f64) -> Result<f64, HypergeoError> {
    if x <= 0.0 && x == x.round() {
        return Err(HypergeoError::Pole(x));
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma(1.0 - x)?));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc)
}

/// ₁F₂(a; b₁, b₂; x) by its Taylor series with the term-ratio recurrence.
pub fn f12(a: f64, b1: f64, b2: f64, x: f64, tol: f64) -> Result<f64, HypergeoError> {
    for b in [b1, b2] {
        if b <= 0.0 && b == b.round() {
            return Err(HypergeoError::Pole(b));
        }
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..10_000 {
        let kf = k as f64;
        term *= (a + kf) * x / ((b1 + kf) * (b2 + kf) * (kf + 1.0));
        sum += term;
        if !sum.is_finite() {
            return Err(HypergeoError::Range);
        }
        // terms decrease factorially once k exceeds |x|^{1/2}, so |term| bounds the tail
        if term.abs() <= tol * sum.abs().max(f64::MIN_POSITIVE) && kf * kf > x.abs() {
            return Ok(sum);
        }
        if term == 0.0 {
            return Ok(sum);
        }
    }
    Err(HypergeoError::Range)
}

/// n-th τ-derivative of τ^j/j! · ₁F₂(a; b₁, b₂; τ³/9) summed termwise.
fn basis_derivative(a: f64, b1: f64, b2: f64, j: u32, tau: f64, n: u32, tol: f64) -> f64 {
    let mut coeff = 1.0 / (1..=j).map(f64::from).product::<f64>();
    let mut sum = 0.0;
    for k in 0..2_000u32 {
        let e = 3 * k + j;
        if e >= n {
            let falling: f64 = (0..n).map(|i| f64::from(e - i)).product();
            let term = coeff * falling * tau.powi((e - n) as i32);
            sum += term;
            if term.abs() <= tol * sum.abs().max(f64::MIN_POSITIVE) && f64::from(k * k) > (tau.powi(3) / 9.0).abs() {
                break;
            }
        }
        let kf = f64::from(k);
        coeff *= (a + kf) / ((b1 + kf) * (b2 + kf) * (kf + 1.0) * 9.0);
        if coeff == 0.0 {
            break;
        }
    }
    sum
}

/// Θ, Θ′, Θ″ at τ = 0.
pub fn theta_initial_data(beta: f64) -> Result<[f64; 3], HypergeoError> {
    if beta == beta.round() {
        return Err(HypergeoError::IntegerBeta(beta));
    }
    let g = gamma(-beta)?;
    Ok([
        gamma(-beta / 3.0)? / (3f64.powf((3.0 + beta) / 3.0) * g),
        gamma((1.0 - beta) / 3.0)? / (3f64.powf((2.0 + beta) / 3.0) * g),
        gamma((2.0 - beta) / 3.0)? / (3f64.powf((1.0 + beta) / 3.0) * g),
    ])
}

/// Θ and its first two derivatives, scaled by e^{log_scale} to survive overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaEval {
    pub value: f64,
    pub deriv: f64,
    pub second: f64,
    pub log_scale: f64,
}

impl ThetaEval {
    pub fn theta(&self) -> f64 {
        self.value * self.log_scale.exp()
    }

    pub fn theta_prime(&self) -> f64 {
        self.deriv * self.log_scale.exp()
    }

    pub fn theta_second(&self) -> f64 {
        self.second * self.log_scale.exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.value.abs().ln() + self.log_scale
    }

    pub fn sign(&self) -> f64 {
        self.value.signum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEvaluator {
    pub beta: f64,
    pub series_radius: f64,
    pub ode_tol: f64,
    init: [f64; 3],
}

impl ThetaEvaluator {
    pub fn new(beta: f64) -> Result<Self, HypergeoError> {
        Ok(ThetaEvaluator {
            beta,
            series_radius: 4.0,
            ode_tol: 1e-12,
            init: theta_initial_data(beta)?,
        })
    }

    pub fn initial_data(&self) -> [f64; 3] {
        self.init
    }

    /// Series for |τ| ≤ radius, Taylor-stepped integration outward otherwise.
    pub fn eval(&self, tau: f64) -> ThetaEval {
        if tau.abs() <= self.series_radius {
            self.eval_series(tau)
        } else {
            self.eval_ode(tau)
        }
    }

    /// Theorem-3 basis combination.
    pub fn eval_series(&self, tau: f64) -> ThetaEval {
        let b = self.beta;
        let params = [
            (-b / 3.0, 1.0 / 3.0, 2.0 / 3.0, 0),
            ((1.0 - b) / 3.0, 2.0 / 3.0, 4.0 / 3.0, 1),
            ((2.0 - b) / 3.0, 4.0 / 3.0, 5.0 / 3.0, 2),
        ];
        let tol = 1e-17;
        let mut out = [0.0; 3];
        for (n, slot) in out.iter_mut().enumerate() {
            *slot = params
                .iter()
                .zip(self.init)
                .map(|(&(a, b1, b2, j), w)| w * basis_derivative(a, b1, b2, j, tau, n as u32, tol))
                .sum();
        }
        ThetaEval {
            value: out[0],
            deriv: out[1],
            second: out[2],
            log_scale: 0.0,
        }
    }

    /// Taylor-series stepping of the ODE from τ = 0.
    pub fn eval_ode(&self, tau: f64) -> ThetaEval {
        let mut state = self.init;
        let mut log_scale = 0.0;
        let mut t0 = 0.0f64;
        let dir = tau.signum();
        while (tau - t0) * dir > 0.0 {
            let h_nom = 0.5 / (1.0 + t0.abs().sqrt());
            let h = dir * h_nom.min((tau - t0).abs());
            state = taylor_step(self.beta, t0, state, h, self.ode_tol);
            t0 = if (tau - (t0 + h)) * dir <= 0.0 { tau } else { t0 + h };
            let big = state.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if big > 1e100 {
                for s in &mut state {
                    *s /= big;
                }
                log_scale += big.ln();
            }
        }
        ThetaEval {
            value: state[0],
            deriv: state[1],
            second: state[2],
            log_scale,
        }
    }
}

/// One step of the local power series about τ₀ with
/// (k+1)(k+2)(k+3)a_{k+3} = τ₀(k+1)a_{k+1} + (k−β)a_k.
fn taylor_step(beta: f64, t0: f64, state: [f64; 3], h: f64, tol: f64) -> [f64; 3] {
    let mut a = vec![state[0], state[1], state[2] / 2.0];
    let mut out = [0.0; 3];
    let scale = state.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut quiet = 0;
    for k in 0..400usize {
        if k >= 3 {
            let j = k - 3;
            let jf = j as f64;
            let next = (t0 * (jf + 1.0) * a[j + 1] + (jf - beta) * a[j]) / ((jf + 1.0) * (jf + 2.0) * (jf + 3.0));
            a.push(next);
        }
        let kf = k as f64;
        let ak = a[k];
        let t_val = ak * h.powi(k as i32);
        let t_d1 = if k >= 1 { kf * ak * h.powi(k as i32 - 1) } else { 0.0 };
        let t_d2 = if k >= 2 { kf * (kf - 1.0) * ak * h.powi(k as i32 - 2) } else { 0.0 };
        out[0] += t_val;
        out[1] += t_d1;
        out[2] += t_d2;
        let size = t_val.abs().max(t_d1.abs() * h.abs()).max(t_d2.abs() * h * h);
        if k > 3 && size <= tol * 1e-4 * scale.max(out[0].abs()) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    out
}

pub fn theta(tau: f64, beta: f64) -> Result<ThetaEval, HypergeoError> {
    Ok(ThetaEvaluator::new(beta)?.eval(tau))
}

/// Leading terms of the τ → −∞ expansion, Γ(1+β)(−τ)^β Σ_{k<terms} 1/(k!3^k(−τ)^{3k}Γ(1+β−3k)).
pub fn theta_asymptotic_negative(tau: f64, beta: f64, terms: usize) -> Result<f64, HypergeoError> {
    let x = -tau;
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 0..terms {
        if k > 0 {
            fact *= k as f64;
        }
        let g = 1.0 + beta - 3.0 * k as f64;
        // 1/Γ vanishes at the poles
        let inv_g = if g <= 0.0 && g == g.round() { 0.0 } else { 1.0 / gamma(g)? };
        sum += inv_g / (fact * 3f64.powi(k as i32) * x.powi(3 * k as i32));
    }
    Ok(gamma(1.0 + beta)? * x.powf(beta) * sum)
}

/// Leading τ → +∞ behaviour (√π/Γ(−β)) e^{(2/3)τ^{3/2}} τ^{−β/2−3/4}, returned as (sign, ln|·|).
pub fn theta_asymptotic_positive(tau: f64, beta: f64) -> Result<(f64, f64), HypergeoError> {
    let g = gamma(-beta)?;
    let ln = 0.5 * PI.ln() - g.abs().ln() + 2.0 / 3.0 * tau.powf(1.5) - (beta / 2.0 + 0.75) * tau.ln();
    Ok((g.signum(), ln))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    LiftOff,
    Iwc,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::LiftOff => "lift-off",
            Outcome::Iwc => "iwc",
        }
    }
}

/// Lift-off iff C₁/Γ(−β) < 0; `c1_negative` marks perturbations below the
/// distinguished trajectory (lower b).
pub fn classify_outcome(beta: f64, c1_negative: bool) -> Result<Outcome, HypergeoError> {
    if beta == beta.round() {
        return Err(HypergeoError::IntegerBeta(beta));
    }
    let g = gamma(-beta)?;
    let c1 = if c1_negative { -1.0 } else { 1.0 };
    Ok(if c1 / g < 0.0 { Outcome::LiftOff } else { Outcome::Iwc })
}

/// ε exponents of the inner perturbation variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationExponents {
    pub b: f64,
    pub v: f64,
    pub y: f64,
    pub z: f64,
    pub lambda: f64,
}

pub fn perturbation_exponents(beta: f64) -> PerturbationExponents {
    PerturbationExponents {
        b: 2.0 * beta / 3.0,
        v: (2.0 * beta + 2.0) / 3.0,
        y: (2.0 * beta + 4.0) / 3.0,
        z: (2.0 * beta + 4.0) / 3.0,
        lambda: (2.0 * beta - 2.0) / 3.0,
    }
}

/// Leading-order inner deviations from the distinguished trajectory at inner time s = t/ε^{2/3}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerPerturbation {
    pub b: f64,
    pub y: f64,
    pub v: f64,
    pub z: f64,
    pub lambda: f64,
}

/// b̂ = C₁κ^{−β}ε^{2β/3}Θ(κs), κ = (−α₁/2)^{1/3}, with ŷ = 2δ⁴b̂_s/α₃,
/// ẑ = ŷ/2, v̂ = 2δ²b̂_ss/α₃ and λ̂ = −b̂_s/(δ²α₃), δ = ε^{1/3}.
pub fn inner_perturbation(
    beta: f64,
    alpha1: f64,
    c1: f64,
    eps: f64,
    s: f64,
) -> Result<InnerPerturbation, HypergeoError> {
    let kappa = (-alpha1 / 2.0).cbrt();
    let alpha3 = beta * alpha1;
    let delta = eps.cbrt();
    let th = theta(kappa * s, beta)?;
    let amp = c1 * kappa.powf(-beta) * eps.powf(2.0 * beta / 3.0);
    let b = amp * th.theta();
    let bs = amp * kappa * th.theta_prime();
    let bss = amp * kappa * kappa * th.theta_second();
    let y = 2.0 * delta.powi(4) * bs / alpha3;
    Ok(InnerPerturbation {
        b,
        y,
        v: 2.0 * delta * delta * bss / alpha3,
        z: y / 2.0,
        lambda: -bs / (delta * delta * alpha3),
    })
}

/// Grid points in [τ₀, τ₁] where C₁Θ′ would signal lift-off for C₁ < 0 (Θ′ > 0).
pub fn liftoff_signal_scan(beta: f64, tau0: f64, tau1: f64, n: usize) -> Result<Vec<f64>, HypergeoError> {
    let ev = ThetaEvaluator::new(beta)?;
    Ok((0..=n)
        .map(|i| tau0 + (tau1 - tau0) * i as f64 / n as f64)
        .filter(|&t| ev.eval(t).deriv > 0.0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-12);
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-1.5).unwrap() - 4.0 * PI.sqrt() / 3.0).abs() < 1e-13);
        assert!(gamma(-2.0).is_err());
    }

    #[test]
    fn theta_at_origin() {
        let [t0, d0, _] = theta_initial_data(1.5).unwrap();
        assert!((t0 + 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-13);
        assert!((d0 + 0.79544).abs() < 1e-5);
        let [t0, d0, _] = theta_initial_data(0.5).unwrap();
        assert!((t0 - 0.53029).abs() < 1e-5 && (d0 + 0.62858).abs() < 1e-5);
    }

    #[test]
    fn outcome_rule() {
        assert_eq!(classify_outcome(1.5, true).unwrap(), Outcome::LiftOff);
        assert_eq!(classify_outcome(2.5, true).unwrap(), Outcome::Iwc);
        assert_eq!(classify_outcome(2.5, false).unwrap(), Outcome::LiftOff);
        assert_eq!(classify_outcome(0.5, true).unwrap(), Outcome::Iwc);
    }

    #[test]
    fn f12_at_zero() {
        assert_eq!(f12(0.3, 0.5, 1.5, 0.0, 1e-16).unwrap(), 1.0);
    }

    #[test]
    fn series_and_ode_paths_agree() {
        for beta in [0.5, 1.5, 2.5] {
            let ev = ThetaEvaluator::new(beta).unwrap();
            for tau in [-4.0, -2.5, -1.0, 1.0, 2.5, 4.0] {
                let a = ev.eval_series(tau);
                let b = ev.eval_ode(tau);
                assert!((a.value - b.theta()).abs() <= 1e-8 * a.value.abs().max(1e-3), "β={beta} τ={tau}");
                assert!((a.deriv - b.theta_prime()).abs() <= 1e-8 * a.deriv.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn log_scaling_beyond_overflow() {
        let th = theta(150.0, 1.5).unwrap();
        assert!(th.log_scale > 0.0);
        let (sign, ln) = theta_asymptotic_positive(150.0, 1.5).unwrap();
        assert_eq!(th.sign(), sign);
        assert!((th.ln_abs() - ln).abs() < 1e-2);
    }
}
