use std::ops::{Add, Mul, Neg, Sub};

use super::{Real, RingError, Scalar};

/// First-order jet: a value plus directional derivatives.
///
/// An empty `partials` vector stands for an all-zero gradient, so constants
/// cost no allocation. The base ring is generic, which lets a jet ride on top
/// of another jet or on a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<S> {
    pub value: S,
    pub partials: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn new(value: S, partials: Vec<S>) -> Self {
        Jet { value, partials }
    }

    pub fn constant(value: S) -> Self {
        Jet {
            value,
            partials: Vec::new(),
        }
    }

    /// Seeds the `index`-th of `dim` independent variables.
    pub fn variable(value: S, index: usize, dim: usize) -> Self {
        let mut partials = vec![S::from_i64(0); dim];
        partials[index] = S::from_i64(1);
        Jet { value, partials }
    }

    /// Derivative along direction `k`; zero when not tracked.
    pub fn partial(&self, k: usize) -> S {
        self.partials.get(k).cloned().unwrap_or_else(|| S::from_i64(0))
    }

    fn map_partials(&self, factor: &S) -> Vec<S> {
        self.partials.iter().map(|d| factor.clone() * d.clone()).collect()
    }
}

fn zip_with<S: Scalar>(a: Vec<S>, b: Vec<S>, f: impl Fn(S, S) -> S, neg_b: impl Fn(S) -> S) -> Vec<S> {
    if b.is_empty() {
        return a;
    }
    if a.is_empty() {
        return b.into_iter().map(neg_b).collect();
    }
    let n = a.len().max(b.len());
    let mut a = a.into_iter();
    let mut b = b.into_iter();
    (0..n)
        .map(|_| match (a.next(), b.next()) {
            (Some(x), Some(y)) => f(x, y),
            (Some(x), None) => x,
            (None, Some(y)) => neg_b(y),
            (None, None) => unreachable!(),
        })
        .collect()
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Jet<S>;
    fn add(self, rhs: Jet<S>) -> Jet<S> {
        Jet {
            value: self.value + rhs.value,
            partials: zip_with(self.partials, rhs.partials, |x, y| x + y, |y| y),
        }
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Jet<S>;
    fn sub(self, rhs: Jet<S>) -> Jet<S> {
        Jet {
            value: self.value - rhs.value,
            partials: zip_with(self.partials, rhs.partials, |x, y| x - y, |y| -y),
        }
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        Jet {
            value: -self.value,
            partials: self.partials.into_iter().map(|d| -d).collect(),
        }
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Jet<S>;
    fn mul(self, rhs: Jet<S>) -> Jet<S> {
        let left = self.map_partials(&rhs.value);
        let right = rhs.map_partials(&self.value);
        Jet {
            value: self.value * rhs.value,
            partials: zip_with(left, right, |x, y| x + y, |y| y),
        }
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    fn from_real(c: &Real) -> Self {
        Jet::constant(S::from_real(c))
    }

    fn from_i64(n: i64) -> Self {
        Jet::constant(S::from_i64(n))
    }

    fn lead(&self) -> f64 {
        self.value.lead()
    }

    fn recip(&self) -> Result<Self, RingError> {
        let r = self.value.recip()?;
        let slope = -(r.clone() * r.clone());
        Ok(Jet {
            partials: self.map_partials(&slope),
            value: r,
        })
    }

    fn sin_cos(&self) -> Result<(Self, Self), RingError> {
        let (s, c) = self.value.sin_cos()?;
        let ds = self.map_partials(&c);
        let dc = self.map_partials(&-s.clone());
        Ok((Jet::new(s, ds), Jet::new(c, dc)))
    }

    fn exp(&self) -> Result<Self, RingError> {
        let e = self.value.exp()?;
        Ok(Jet {
            partials: self.map_partials(&e),
            value: e,
        })
    }
}

/// Evaluates `f` at `xi` and its derivative along `direction`.
pub fn jet_lift<F>(f: F, xi: &[f64], direction: &[f64]) -> Result<Jet<f64>, RingError>
where
    F: Fn(&[Jet<f64>]) -> Result<Jet<f64>, RingError>,
{
    let seeded: Vec<Jet<f64>> = xi
        .iter()
        .zip(direction)
        .map(|(&x, &d)| Jet::new(x, vec![d]))
        .collect();
    f(&seeded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_rule() {
        let j = jet_lift(|x| Ok(x[0].sq()), &[3.0], &[1.0]).unwrap();
        assert_eq!(j.value, 9.0);
        assert_eq!(j.partial(0), 6.0);
    }

    #[test]
    fn sine_at_origin() {
        let j = jet_lift(|x| x[0].sin(), &[0.0], &[1.0]).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.partial(0), 1.0);
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let r = jet_lift(|x| x[0].recip(), &[0.0], &[1.0]);
        assert_eq!(r, Err(RingError::DivisionByZero));
    }

    #[test]
    fn nested_jets_give_second_derivative() {
        // d²/dx² of x³ at 2 is 12
        let inner = Jet::new(2.0, vec![1.0]);
        let outer = Jet::new(inner, vec![Jet::constant(1.0)]);
        let cube = outer.clone() * outer.clone() * outer;
        assert_eq!(cube.partial(0).partial(0), 12.0);
    }
}
