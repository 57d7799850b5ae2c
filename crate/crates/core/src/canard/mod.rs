//! Distinguished (maximally smooth) trajectory through a G-spot as a
//! δ-series whose coefficients are polynomials in the inner time s.
//!
//! Inner scaling: t = δ²s, δ = ε^{1/3}, ξ = ξ* + δ²ξ̃, p = δ²p̃, b = δ²b̃,
//! v = δ⁴ṽ, y = δ⁶ỹ, z = δ⁶z̃. Order n of each variable lies in a fixed
//! polynomial class `P_k`, spanned by s^k, s^{k−3}, … (empty for k < 0).

mod unscale;

use std::fmt::Write as _;

use crate::contact::{field_value, quantity, ContactSystem, Field};
use crate::gspot::{beta_is_degenerate, condition_number, gspot_conditions, GSpotInfo};
use crate::linalg::{lu_factor, LinalgError, Lu, Matrix};
use crate::ring::{Coeff, DeltaSeries, Jet, Rational, RingError, SPoly};

pub use unscale::{unscale, UnscaledPolynomial, UnscaledVar};

#[derive(Debug, thiserror::Error)]
pub enum CanardError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("β = {0} is within 1e-6 of an integer; the polynomial particular solution is not unique")]
    IntegerBeta(f64),
    #[error("order {n}: {var} leaves its polynomial class (defect {defect:e})")]
    ClassViolation { n: usize, var: String, defect: f64 },
    #[error("exact arithmetic requested for a system with floating-point constants")]
    InexactSystem,
    #[error("pinning rows: got {got}, need {expected}")]
    Pinning { got: usize, expected: usize },
    #[error("{var}: term s^{power} at δ^{n} unscales to a non-integer or negative power of ε")]
    NegativePower { var: String, n: usize, power: usize },
}

/// Variables carried by the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    P,
    B,
    Y,
    V,
    Z,
    Lambda,
    Xi(usize),
}

impl Var {
    pub fn name(self, state_names: &[String]) -> String {
        match self {
            Var::P => "p".into(),
            Var::B => "b".into(),
            Var::Y => "y".into(),
            Var::V => "v".into(),
            Var::Z => "z".into(),
            Var::Lambda => "lambda".into(),
            Var::Xi(i) => format!(
                "xi.{}",
                state_names.get(i).cloned().unwrap_or_else(|| i.to_string())
            ),
        }
    }

    /// Power of δ multiplying the scaled variable in the unscaled one.
    pub fn delta_prefactor(self) -> usize {
        match self {
            Var::P | Var::B | Var::Xi(_) => 2,
            Var::V => 4,
            Var::Y | Var::Z => 6,
            Var::Lambda => 0,
        }
    }

    /// Polynomial class of the δⁿ coefficient.
    pub fn class(self, n: usize) -> i64 {
        let nu = (n / 2) as i64;
        if n % 2 == 0 {
            match self {
                Var::P | Var::B | Var::Xi(_) => nu + 1,
                Var::Y | Var::Z | Var::Lambda => nu,
                Var::V => nu - 1,
            }
        } else {
            match self {
                Var::P | Var::B | Var::Xi(_) => nu - 3,
                Var::Y | Var::Z => nu - 1,
                Var::V => nu - 2,
                Var::Lambda => nu - 4,
            }
        }
    }
}

/// Coefficients of δⁿ for every variable.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderTerms<C: Coeff> {
    pub p: SPoly<C>,
    pub b: SPoly<C>,
    pub y: SPoly<C>,
    pub v: SPoly<C>,
    pub z: SPoly<C>,
    pub lambda: SPoly<C>,
    pub xi: Vec<SPoly<C>>,
}

impl<C: Coeff> OrderTerms<C> {
    pub fn get(&self, var: Var) -> &SPoly<C> {
        match var {
            Var::P => &self.p,
            Var::B => &self.b,
            Var::Y => &self.y,
            Var::V => &self.v,
            Var::Z => &self.z,
            Var::Lambda => &self.lambda,
            Var::Xi(i) => &self.xi[i],
        }
    }

    fn map<D: Coeff>(&self, f: &impl Fn(&C) -> D) -> OrderTerms<D> {
        OrderTerms {
            p: self.p.map(f),
            b: self.b.map(f),
            y: self.y.map(f),
            v: self.v.map(f),
            z: self.z.map(f),
            lambda: self.lambda.map(f),
            xi: self.xi.iter().map(|q| q.map(f)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanardExpansion<C: Coeff> {
    pub order: usize,
    pub terms: Vec<OrderTerms<C>>,
    pub gspot: GSpotInfo,
    pub xi_star: Vec<C>,
    pub alpha1: C,
    pub alpha2: C,
    pub alpha3: C,
    pub state_names: Vec<String>,
    /// 1-norm condition number of the initial-condition matrix.
    pub ic_condition: f64,
}

impl<C: Coeff> CanardExpansion<C> {
    pub fn dim(&self) -> usize {
        self.xi_star.len()
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut v = vec![Var::P, Var::B, Var::Y, Var::V, Var::Z, Var::Lambda];
        v.extend((0..self.dim()).map(Var::Xi));
        v
    }

    /// Σₙ coeffₙ(s)δⁿ of the scaled variable.
    pub fn scaled_series(&self, var: Var) -> DeltaSeries<C> {
        DeltaSeries::new(
            self.terms.iter().map(|t| t.get(var).clone()).collect(),
            self.order,
        )
    }

    pub fn eval_scaled(&self, var: Var, s: f64, delta: f64) -> f64 {
        self.terms
            .iter()
            .rev()
            .fold(0.0, |acc, t| acc * delta + t.get(var).eval_f64(s))
    }

    /// Unscaled value at time t for ε = δ³, including ξ* for state components.
    pub fn eval_unscaled(&self, var: Var, t: f64, eps: f64) -> f64 {
        let delta = eps.cbrt();
        let s = t / (delta * delta);
        let base = match var {
            Var::Xi(i) => self.xi_star[i].to_f64(),
            _ => 0.0,
        };
        base + delta.powi(var.delta_prefactor() as i32) * self.eval_scaled(var, s, delta)
    }

    pub fn to_f64(&self) -> CanardExpansion<f64> {
        let f = |c: &C| c.to_f64();
        CanardExpansion {
            order: self.order,
            terms: self.terms.iter().map(|t| t.map(&f)).collect(),
            gspot: self.gspot.clone(),
            xi_star: self.xi_star.iter().map(f).collect(),
            alpha1: self.alpha1.to_f64(),
            alpha2: self.alpha2.to_f64(),
            alpha3: self.alpha3.to_f64(),
            state_names: self.state_names.clone(),
            ic_condition: self.ic_condition,
        }
    }

    /// Largest out-of-class coefficient over all orders and variables.
    pub fn class_defect(&self) -> f64 {
        let vars = self.variables();
        self.terms
            .iter()
            .enumerate()
            .flat_map(|(n, t)| vars.iter().map(move |&v| t.get(v).class_defect(v.class(n))))
            .fold(0.0, f64::max)
    }
}

pub type ExactExpansion = CanardExpansion<Rational>;
pub type FloatExpansion = CanardExpansion<f64>;

/// ξ* + δ²Σₖ ξₖ(s)δᵏ per component, truncated at `order`.
pub fn series_state<C: Coeff>(xi_star: &[C], xi_terms: &[Vec<SPoly<C>>], order: usize) -> Vec<DeltaSeries<C>> {
    (0..xi_star.len())
        .map(|i| {
            let mut acc = DeltaSeries::constant(SPoly::constant(xi_star[i].clone())).with_order(order);
            for (k, row) in xi_terms.iter().enumerate() {
                acc = acc + DeltaSeries::term(row[i].clone(), k + 2, order);
            }
            acc
        })
        .collect()
}

/// Polynomial particular solution of 2b‴ + α₁ s b′ − α₃ b = r.
///
/// A monomial sᵏ maps to (kα₁ − α₃)sᵏ + 2k(k−1)(k−2)s^{k−3}, so the
/// coefficients follow from the top power downward.
pub fn solve_third_order_poly<C: Coeff>(r: &SPoly<C>, alpha1: &C, alpha3: &C) -> Result<SPoly<C>, CanardError> {
    let beta = alpha3.to_f64() / alpha1.to_f64();
    if beta_is_degenerate(beta) {
        return Err(CanardError::IntegerBeta(beta));
    }
    let Some(deg) = r.degree() else {
        return Ok(SPoly::zero());
    };
    let mut c = vec![C::zero(); deg + 1];
    for j in (0..=deg).rev() {
        let mut num = r.coeff(j);
        if j + 3 <= deg {
            let w = C::from_i64(2 * ((j + 3) * (j + 2) * (j + 1)) as i64);
            num = num - w * c[j + 3].clone();
        }
        let den = alpha1.clone() * C::from_i64(j as i64) - alpha3.clone();
        if den.is_zero() {
            return Err(CanardError::IntegerBeta(beta));
        }
        c[j] = num / den;
    }
    Ok(SPoly::new(c))
}

/// Enforces class membership; float coefficients get a relative tolerance and are projected.
fn enforce_class<C: Coeff>(q: SPoly<C>, var: Var, n: usize, names: &[String]) -> Result<SPoly<C>, CanardError> {
    let class = var.class(n);
    let defect = q.class_defect(class);
    let ok = if C::EXACT {
        defect == 0.0
    } else {
        defect <= 1e-9 * q.max_abs().max(1.0)
    };
    if !ok {
        return Err(CanardError::ClassViolation {
            n,
            var: var.name(names),
            defect,
        });
    }
    Ok(q.project_class(class))
}

struct IcSystem<C> {
    lu: Lu<C>,
    condition: f64,
}

fn ic_system<C: Coeff, Y: ContactSystem>(sys: &Y, xi_star: &[C], pins: &[Vec<f64>]) -> Result<IcSystem<C>, CanardError> {
    let m = xi_star.len();
    if pins.len() + 4 != m {
        return Err(CanardError::Pinning {
            got: pins.len(),
            expected: m.saturating_sub(4),
        });
    }
    let seeded: Vec<Jet<C>> = xi_star
        .iter()
        .enumerate()
        .map(|(i, x)| Jet::variable(x.clone(), i, m))
        .collect();
    let q = gspot_conditions(sys, &seeded)?;
    let mut a = Matrix::<C>::zeros(m);
    let mut af = Matrix::<f64>::zeros(m);
    for (i, row) in q.iter().enumerate() {
        for j in 0..m {
            a.set(i, j, row.partial(j));
            af.set(i, j, row.partial(j).to_f64());
        }
    }
    for (i, w) in pins.iter().enumerate() {
        for (j, &x) in w.iter().enumerate() {
            a.set(4 + i, j, C::from_f64(x));
            af.set(4 + i, j, x);
        }
    }
    Ok(IcSystem {
        lu: lu_factor(a)?,
        condition: condition_number(&af),
    })
}

/// Builds the expansion to `order` (coefficients of δ⁰ … δ^{order−1}).
pub fn expand<C: Coeff, Y: ContactSystem>(sys: &Y, gspot: &GSpotInfo, order: usize) -> Result<CanardExpansion<C>, CanardError> {
    if C::EXACT && !sys.is_exact() {
        return Err(CanardError::InexactSystem);
    }
    if beta_is_degenerate(gspot.beta) {
        return Err(CanardError::IntegerBeta(gspot.beta));
    }
    let names = sys.state_names();
    let m = sys.dim();
    let xi_star: Vec<C> = gspot.xi.iter().map(|&x| C::from_f64(x)).collect();
    let at_star: Vec<C> = xi_star.clone();
    let a1 = quantity::alpha1(sys, &at_star)?;
    let a2 = quantity::alpha2(sys, &at_star)?;
    let a3 = quantity::alpha3(sys, &at_star)?;
    let beta = a3.to_f64() / a1.to_f64();
    if beta_is_degenerate(beta) {
        return Err(CanardError::IntegerBeta(beta));
    }
    let ic = ic_system(sys, &xi_star, &gspot.pins)?;

    let mut terms: Vec<OrderTerms<C>> = Vec::with_capacity(order);
    let mut xi_terms: Vec<Vec<SPoly<C>>> = Vec::with_capacity(order);
    let zero = SPoly::<C>::zero();
    for n in 0..order {
        let xs = series_state(&xi_star, &xi_terms, n + 1);
        let al1 = quantity::alpha1(sys, &xs)?;
        let al2 = quantity::alpha2(sys, &xs)?;
        let al3 = quantity::alpha3(sys, &xs)?;
        let drift = sys.drift(&xs)?;
        let g = field_value(sys, Field::PositiveSlip, &xs)?;

        // p_n′ = α₁ₙ, p_n(0) = 0
        let p_n = enforce_class(al1.coeff(n).integral(), Var::P, n, &names)?;

        let mut r_b = al2.coeff(n);
        let mut r_v = SPoly::zero();
        for (k, t) in terms.iter().enumerate() {
            r_b = &r_b - &(&al3.coeff(n - k) * &t.lambda);
            let p_nk = if n - k == n { &p_n } else { &terms[n - k].p };
            r_v = &r_v + &(p_nk * &t.lambda);
        }
        let z_prev = terms.last().map_or(&zero, |t| &t.z);
        let s_poly = SPoly::monomial(C::one(), 1);
        let r = &(&r_b.nth_derivative(2).scale(&C::from_i64(2)) + &z_prev.nth_derivative(3).scale(&a3))
            + &(&(&s_poly * &r_b).scale(&a1) + &r_v.scale(&a3));
        let b_n = enforce_class(solve_third_order_poly(&r, &a1, &a3)?, Var::B, n, &names)?;

        let inv3 = C::one() / a3.clone();
        let two = C::from_i64(2);
        let db = b_n.derivative();
        let y_n = (&(&db - &r_b).scale(&two) - &z_prev.derivative().scale(&a3)).scale(&inv3);
        let v_n = y_n.derivative();
        let lam_n = (&r_b - &db).scale(&inv3);
        let z_n = (&(&db - &r_b) - &z_prev.derivative().scale(&a3)).scale(&inv3);
        let y_n = enforce_class(y_n, Var::Y, n, &names)?;
        let v_n = enforce_class(v_n, Var::V, n, &names)?;
        let z_n = enforce_class(z_n, Var::Z, n, &names)?;
        let lam_n = enforce_class(lam_n, Var::Lambda, n, &names)?;

        // ξ_n(0) from the δ^{n+2} part of the synchronisation conditions at s = 0
        let xi0_terms: Vec<Vec<SPoly<C>>> = xi_terms
            .iter()
            .map(|row| row.iter().map(|q| SPoly::constant(q.constant_term())).collect())
            .collect();
        let xs0 = series_state(&xi_star, &xi0_terms, n + 3);
        let cond0 = gspot_conditions(sys, &xs0)?;
        let at0 = |k: usize| cond0[k].coeff(n + 2).constant_term();
        let y_lag = if n >= 4 { terms[n - 4].y.constant_term() } else { C::zero() };
        let v_lag = if n >= 2 { terms[n - 2].v.constant_term() } else { C::zero() };
        let mut rhs = vec![
            p_n.constant_term() - at0(0),
            b_n.constant_term() - at0(1),
            y_lag - at0(2),
            v_lag - at0(3),
        ];
        rhs.resize(m, C::zero());
        let xi_n0 = ic.lu.solve(&rhs);

        let mut xi_n = Vec::with_capacity(m);
        let lams: Vec<&SPoly<C>> = terms.iter().map(|t| &t.lambda).chain(std::iter::once(&lam_n)).collect();
        for i in 0..m {
            let mut rhs_xi = drift[i].coeff(n);
            for (k, lam) in lams.iter().enumerate() {
                rhs_xi = &rhs_xi + &(&g[i].coeff(n - k) * *lam);
            }
            let q = &rhs_xi.integral() + &SPoly::constant(xi_n0[i].clone());
            xi_n.push(enforce_class(q, Var::Xi(i), n, &names)?);
        }

        xi_terms.push(xi_n.clone());
        terms.push(OrderTerms {
            p: p_n,
            b: b_n,
            y: y_n,
            v: v_n,
            z: z_n,
            lambda: lam_n,
            xi: xi_n,
        });
    }

    Ok(CanardExpansion {
        order,
        terms,
        gspot: gspot.clone(),
        xi_star,
        alpha1: a1,
        alpha2: a2,
        alpha3: a3,
        state_names: names,
        ic_condition: ic.condition,
    })
}

/// Max-norm residuals of the truncated series substituted into the inner system.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub delta: f64,
    /// (equation label, max |residual| over the s-grid).
    pub equations: Vec<(String, f64)>,
    /// (condition label, |residual|) for the conditions at s = 0.
    pub boundary: Vec<(String, f64)>,
}

impl ResidualReport {
    pub fn max_equation(&self) -> f64 {
        self.equations.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn max_boundary(&self) -> f64 {
        self.boundary.iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

fn series_value<C: Coeff>(terms: &[OrderTerms<C>], var: Var, s: &C, delta: &C, deriv: usize) -> C {
    terms
        .iter()
        .rev()
        .fold(C::zero(), |acc, t| acc * delta.clone() + t.get(var).nth_derivative(deriv).eval(s))
}

/// Residuals evaluated in the coefficient ring, so exact expansions carry no rounding.
pub fn residual<C: Coeff, Y: ContactSystem>(
    exp: &CanardExpansion<C>,
    sys: &Y,
    delta: f64,
    s_grid: &[f64],
) -> Result<ResidualReport, CanardError> {
    let m = exp.dim();
    let d = C::from_f64(delta);
    let d2 = d.clone() * d.clone();
    let labels = ["xi", "p", "b", "y", "v", "z", "lambda"];
    let mut worst = [0.0f64; 7];
    let t = &exp.terms;
    for &sv in s_grid {
        let s = C::from_f64(sv);
        let val = |var: Var, k: usize| series_value(t, var, &s, &d, k);
        let xi: Vec<C> = (0..m)
            .map(|i| exp.xi_star[i].clone() + d2.clone() * val(Var::Xi(i), 0))
            .collect();
        let lam = val(Var::Lambda, 0);
        let drift = sys.drift(&xi)?;
        let g = field_value(sys, Field::PositiveSlip, &xi)?;
        let a1 = quantity::alpha1(sys, &xi)?;
        let a2 = quantity::alpha2(sys, &xi)?;
        let a3 = quantity::alpha3(sys, &xi)?;
        let mut rx = 0.0f64;
        for i in 0..m {
            let r = val(Var::Xi(i), 1) - drift[i].clone() - g[i].clone() * lam.clone();
            rx = rx.max(r.to_f64().abs());
        }
        let res = [
            rx,
            (val(Var::P, 1) - a1).to_f64().abs(),
            (val(Var::B, 1) - a2 + a3 * lam.clone()).to_f64().abs(),
            (val(Var::Y, 1) - val(Var::V, 0)).to_f64().abs(),
            (val(Var::V, 1) - val(Var::B, 0) - val(Var::P, 0) * lam.clone()).to_f64().abs(),
            (d.clone() * val(Var::Z, 1) + val(Var::Z, 0) + lam.clone()).to_f64().abs(),
            (lam - val(Var::Z, 0) + val(Var::Y, 0)).to_f64().abs(),
        ];
        for (w, r) in worst.iter_mut().zip(res) {
            *w = w.max(r);
        }
    }

    let zero = C::zero();
    let val0 = |var: Var| series_value(t, var, &zero, &d, 0);
    let xi0: Vec<C> = (0..m)
        .map(|i| exp.xi_star[i].clone() + d2.clone() * val0(Var::Xi(i)))
        .collect();
    let q = gspot_conditions(sys, &xi0)?;
    let d4 = d2.clone() * d2.clone();
    let d6 = d4.clone() * d2.clone();
    let mut boundary = vec![
        ("p(0)".to_string(), val0(Var::P).to_f64().abs()),
        ("P".to_string(), (q[0].clone() - d2.clone() * val0(Var::P)).to_f64().abs()),
        ("B".to_string(), (q[1].clone() - d2.clone() * val0(Var::B)).to_f64().abs()),
        ("Y".to_string(), (q[2].clone() - d6 * val0(Var::Y)).to_f64().abs()),
        ("V".to_string(), (q[3].clone() - d4 * val0(Var::V)).to_f64().abs()),
    ];
    for (k, w) in exp.gspot.pins.iter().enumerate() {
        let j = (0..m).fold(C::zero(), |acc, i| {
            acc + C::from_f64(w[i]) * (xi0[i].clone() - exp.xi_star[i].clone())
        });
        boundary.push((format!("J{k}"), j.to_f64().abs()));
    }

    Ok(ResidualReport {
        delta,
        equations: labels.iter().map(|l| l.to_string()).zip(worst).collect(),
        boundary,
    })
}

/// Text listing: one line per order and variable with the s-coefficients from s⁰ upward.
pub fn export<C: Coeff>(exp: &CanardExpansion<C>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "order: {}", exp.order);
    let _ = writeln!(out, "arithmetic: {}", if C::EXACT { "exact" } else { "float" });
    let _ = writeln!(out, "alpha1: {}", exp.alpha1.render());
    let _ = writeln!(out, "alpha2: {}", exp.alpha2.render());
    let _ = writeln!(out, "alpha3: {}", exp.alpha3.render());
    for (i, x) in exp.xi_star.iter().enumerate() {
        let _ = writeln!(out, "xi_star.{}: {}", exp.state_names[i], x.render());
    }
    for (n, t) in exp.terms.iter().enumerate() {
        for var in exp.variables() {
            let q = t.get(var);
            if q.is_zero() {
                continue;
            }
            let cs: Vec<String> = q.coeffs().iter().map(Coeff::render).collect();
            let _ = writeln!(out, "{}[{n}]: {}", var.name(&exp.state_names), cs.join(" "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::make_extended_example;
    use crate::gspot::{find_gspot, Pinning};
    use crate::ring::{Real, Scalar};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn poly(cs: &[(i64, i64)]) -> SPoly<Rational> {
        SPoly::new(cs.iter().map(|&(n, d)| q(n, d)).collect())
    }

    fn extended(chi: i64) -> (crate::contact::ExtendedExample, GSpotInfo) {
        let sys = make_extended_example(Real::int(chi), Real::int(-1), Real::int(-1), Real::ratio(-3, 2));
        let g = find_gspot(&sys, &Pinning::Auto, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        (sys, g)
    }

    #[test]
    fn third_order_constant_and_linear() {
        let a1 = q(-1, 1);
        let a3 = q(-3, 2);
        let b = solve_third_order_poly(&poly(&[(3, 1)]), &a1, &a3).unwrap();
        assert_eq!(b, poly(&[(2, 1)]));
        let b = solve_third_order_poly(&poly(&[(0, 1), (1, 1)]), &a1, &a3).unwrap();
        assert_eq!(b, poly(&[(0, 1), (2, 1)]));
    }

    #[test]
    fn third_order_back_substitution() {
        let a1 = q(-1, 1);
        let a3 = q(-3, 2);
        let r = poly(&[(5, 1), (-2, 1), (0, 1), (7, 3), (1, 1)]);
        let b = solve_third_order_poly(&r, &a1, &a3).unwrap();
        let s = SPoly::monomial(Rational::from_i64(1), 1);
        let lhs = &(&b.nth_derivative(3).scale(&q(2, 1)) + &(&s * &b.derivative()).scale(&a1)) - &b.scale(&a3);
        assert_eq!(lhs, r);
        assert_eq!(b.coeff(4), q(1, 1) / (q(4, 1) * a1.clone() - a3.clone()));
    }

    #[test]
    fn integer_beta_refused() {
        let r = poly(&[(1, 1)]);
        assert!(matches!(
            solve_third_order_poly(&r, &q(-1, 1), &q(-2, 1)),
            Err(CanardError::IntegerBeta(_))
        ));
    }

    #[test]
    fn extended_example_coefficients() {
        let (sys, g) = extended(1);
        let e: ExactExpansion = expand(&sys, &g, 7).unwrap();
        assert_eq!(e.terms[0].p, poly(&[(0, 1), (-1, 1)]));
        assert_eq!(e.terms[6].p, poly(&[(0, 1), (-96, 1), (0, 1), (0, 1), (3, 1)]));
        assert_eq!(e.terms[0].b, poly(&[(0, 1), (2, 1)]));
        assert_eq!(e.terms[2].b, poly(&[(0, 1), (0, 1), (6, 1)]));
        assert_eq!(e.terms[4].b, poly(&[(-96, 1), (0, 1), (0, 1), (12, 1)]));
        assert_eq!(e.terms[6].b, poly(&[(0, 1), (-10368, 5), (0, 1), (0, 1), (138, 5)]));
        assert_eq!(e.terms[6].z, poly(&[(6672, 5), (0, 1), (0, 1), (-368, 5)]));
        assert_eq!(e.terms[3].y, poly(&[(8, 1)]));
        for n in [1, 3, 5] {
            assert!(e.terms[n].p.is_zero());
        }
        assert_eq!(e.class_defect(), 0.0);
    }

    #[test]
    fn trivial_solution_when_uncoupled() {
        let (sys, g) = extended(0);
        let e: ExactExpansion = expand(&sys, &g, 6).unwrap();
        assert_eq!(e.terms[0].b, poly(&[(0, 1), (2, 1)]));
        assert_eq!(e.terms[0].y, poly(&[(-4, 1)]));
        assert_eq!(e.terms[0].z, poly(&[(-2, 1)]));
        assert_eq!(e.terms[0].lambda, poly(&[(2, 1)]));
        for t in &e.terms[1..] {
            for var in e.variables() {
                if !matches!(var, Var::Xi(_)) {
                    assert!(t.get(var).is_zero(), "{var:?}");
                }
            }
        }
    }

    #[test]
    fn export_lists_orders() {
        let (sys, g) = extended(1);
        let e: ExactExpansion = expand(&sys, &g, 3).unwrap();
        let text = export(&e);
        assert!(text.contains("b[2]: 0 0 6"));
        assert!(text.contains("arithmetic: exact"));
    }

    #[test]
    fn unscaled_gap_polynomial() {
        let (sys, g) = extended(1);
        let e: ExactExpansion = expand(&sys, &g, 7).unwrap();
        let u = unscale(&e).unwrap();
        let z = u.get(Var::Z).unwrap();
        let expect = [
            ((0, 1), (-2, 1)),
            ((1, 1), (-8, 1)),
            ((2, 1), (-24, 1)),
            ((3, 1), (-368, 5)),
            ((0, 2), (8, 1)),
            ((1, 2), (48, 1)),
            ((0, 3), (6672, 5)),
        ];
        for ((j, k), (a, b)) in expect {
            assert_eq!(z.coeff(j, k + 1), q(a, b), "t^{j} eps^{}", k + 1);
        }
        let (t, eps) = (-0.01, 1e-3);
        for var in e.variables() {
            let a = u.get(var).unwrap().eval(t, eps);
            let b = e.eval_unscaled(var, t, eps);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{var:?}: {a} vs {b}");
        }
    }

    #[test]
    fn trivial_unscaled_is_linear_in_t() {
        let (sys, g) = extended(0);
        let e: ExactExpansion = expand(&sys, &g, 8).unwrap();
        let u = unscale(&e).unwrap();
        let b = u.get(Var::B).unwrap();
        assert_eq!(b.terms.len(), 1);
        assert_eq!(b.coeff(1, 0), q(2, 1));
    }

    #[test]
    fn residual_scales_with_order() {
        let (sys, g) = extended(1);
        let order = 8;
        let e: ExactExpansion = expand(&sys, &g, order).unwrap();
        let grid: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
        let r1 = residual(&e, &sys, 1e-2, &grid).unwrap();
        let r2 = residual(&e, &sys, 5e-3, &grid).unwrap();
        let ratio = r1.max_equation() / r2.max_equation();
        let target = 2f64.powi(order as i32);
        assert!(ratio > 0.8 * target && ratio < 1.2 * target, "{ratio} {r1:?} {r2:?}");
        let bratio = r1.max_boundary() / r2.max_boundary().max(f64::MIN_POSITIVE);
        assert!(r2.max_boundary() == 0.0 || bratio > 0.8 * 4.0 * target, "{bratio} {r1:?} {r2:?}");
    }

    #[test]
    fn trivial_residual_vanishes() {
        let (sys, g) = extended(0);
        let e: ExactExpansion = expand(&sys, &g, 6).unwrap();
        let r = residual(&e, &sys, 1e-2, &[-1.0, 0.0, 0.5]).unwrap();
        assert_eq!(r.max_equation(), 0.0);
        assert_eq!(r.max_boundary(), 0.0);
    }
}
