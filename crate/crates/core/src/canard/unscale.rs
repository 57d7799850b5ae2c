use std::collections::BTreeMap;

use super::{CanardError, CanardExpansion, Var};
use crate::ring::Coeff;

/// One variable as Σ c·tʲεᵏ.
#[derive(Debug, Clone, PartialEq)]
pub struct UnscaledVar<C: Coeff> {
    pub var: Var,
    pub name: String,
    /// (power of t, power of ε) → coefficient.
    pub terms: BTreeMap<(usize, usize), C>,
}

impl<C: Coeff> UnscaledVar<C> {
    pub fn coeff(&self, t_pow: usize, eps_pow: usize) -> C {
        self.terms.get(&(t_pow, eps_pow)).cloned().unwrap_or_else(C::zero)
    }

    pub fn eval(&self, t: f64, eps: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(j, k), c)| c.to_f64() * t.powi(j as i32) * eps.powi(k as i32))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnscaledPolynomial<C: Coeff> {
    pub vars: Vec<UnscaledVar<C>>,
}

impl<C: Coeff> UnscaledPolynomial<C> {
    pub fn get(&self, var: Var) -> Option<&UnscaledVar<C>> {
        self.vars.iter().find(|v| v.var == var)
    }
}

/// Substitutes s = tε^{−2/3}, δ = ε^{1/3}: c·sʲδⁿ·δ^e becomes c·tʲε^{(n+e−2j)/3}.
pub fn unscale<C: Coeff>(exp: &CanardExpansion<C>) -> Result<UnscaledPolynomial<C>, CanardError> {
    let mut vars = Vec::new();
    for var in exp.variables() {
        let name = var.name(&exp.state_names);
        let mut terms: BTreeMap<(usize, usize), C> = BTreeMap::new();
        if let Var::Xi(i) = var {
            if !exp.xi_star[i].is_zero() {
                terms.insert((0, 0), exp.xi_star[i].clone());
            }
        }
        let e = var.delta_prefactor() as i64;
        for (n, t) in exp.terms.iter().enumerate() {
            for (j, c) in t.get(var).coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let d = n as i64 + e - 2 * j as i64;
                if d < 0 || d % 3 != 0 {
                    return Err(CanardError::NegativePower {
                        var: name.clone(),
                        n,
                        power: j,
                    });
                }
                let slot = terms.entry((j, (d / 3) as usize)).or_insert_with(C::zero);
                *slot = slot.clone() + c.clone();
            }
        }
        terms.retain(|_, c| !c.is_zero());
        vars.push(UnscaledVar { var, name, terms });
    }
    Ok(UnscaledPolynomial { vars })
}
