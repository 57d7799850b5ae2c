//! G-spot location, case taxonomy, the constant-α singular phase plane and
//! the spectrum of the fast contact subsystem.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::contact::{quantity, ContactSystem};
use crate::linalg::{lu_factor, rank, Matrix};
use crate::ring::{Jet, RingError, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GspotError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("G-spot Jacobian is singular (condition {0:e})")]
    SingularJacobian(f64),
    #[error("pinning supplies {got} conditions, {expected} needed")]
    Pinning { got: usize, expected: usize },
    #[error("p = 0: the Painlevé normal force is singular")]
    SingularValue,
    #[error("malformed G-spot record: {0}")]
    Parse(String),
}

/// Attracting configurations of the singular (p, b) flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    I,
    II,
    III,
    None,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
            Case::None => "none",
        })
    }
}

impl FromStr for Case {
    type Err = GspotError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "I" => Ok(Case::I),
            "II" => Ok(Case::II),
            "III" => Ok(Case::III),
            "none" => Ok(Case::None),
            other => Err(GspotError::Parse(format!("unknown case {other}"))),
        }
    }
}

pub fn classify_case(alpha1: f64, alpha2: f64, alpha3: f64) -> Case {
    if !(alpha1 < 0.0 && alpha3 < 0.0) {
        return Case::None;
    }
    if alpha1 < alpha3 {
        if alpha2 < 0.0 {
            Case::I
        } else if alpha2 > 0.0 {
            Case::II
        } else {
            Case::None
        }
    } else if alpha3 < alpha1 && alpha2 < 0.0 {
        Case::III
    } else {
        Case::None
    }
}

/// True when β sits within 1e−6 of an integer.
pub fn beta_is_degenerate(beta: f64) -> bool {
    (beta - beta.round()).abs() < 1e-6
}

/// The m − 4 extra conditions fixing one G-spot.
#[derive(Debug, Clone, PartialEq)]
pub enum Pinning {
    /// Hold every coordinate that is not a pivot of ∂(P,B,Y,V)/∂ξ at its guess value.
    Auto,
    /// Hold the listed coordinates at the given values.
    Fixed(Vec<(usize, f64)>),
    /// Affine conditions w·ξ = c.
    Linear(Vec<(Vec<f64>, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GSpotInfo {
    pub xi: Vec<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub beta: f64,
    pub case: Case,
    pub jacobian_condition: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Weight rows w of the pinning conditions w·ξ = c.
    pub pins: Vec<Vec<f64>>,
}

impl GSpotInfo {
    pub fn alphas(&self) -> [f64; 3] {
        [self.alpha1, self.alpha2, self.alpha3]
    }

    pub fn degenerate_beta(&self) -> bool {
        beta_is_degenerate(self.beta)
    }

    /// `key: value` lines; ξ components as `xi.<k>`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, x) in self.xi.iter().enumerate() {
            s.push_str(&format!("xi.{k}: {x:e}\n"));
        }
        s.push_str(&format!("alpha1: {:e}\n", self.alpha1));
        s.push_str(&format!("alpha2: {:e}\n", self.alpha2));
        s.push_str(&format!("alpha3: {:e}\n", self.alpha3));
        s.push_str(&format!("beta: {:e}\n", self.beta));
        s.push_str(&format!("case: {}\n", self.case));
        s.push_str(&format!("jacobian_condition: {:e}\n", self.jacobian_condition));
        s.push_str(&format!("residual: {:e}\n", self.residual));
        s.push_str(&format!("iterations: {}\n", self.iterations));
        for (k, w) in self.pins.iter().enumerate() {
            let row: Vec<String> = w.iter().map(|x| format!("{x:e}")).collect();
            s.push_str(&format!("pin.{k}: {}\n", row.join(" ")));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, GspotError> {
        let mut map = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once(':')
                .ok_or_else(|| GspotError::Parse(format!("no separator in `{line}`")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |k: &str| -> Result<f64, GspotError> {
            map.get(k)
                .ok_or_else(|| GspotError::Parse(format!("missing {k}")))?
                .parse()
                .map_err(|_| GspotError::Parse(format!("bad number for {k}")))
        };
        let mut xi = Vec::new();
        while let Some(v) = map.get(&format!("xi.{}", xi.len())) {
            xi.push(v.parse().map_err(|_| GspotError::Parse("bad xi".into()))?);
        }
        let mut pins = Vec::new();
        while let Some(v) = map.get(&format!("pin.{}", pins.len())) {
            let row = v
                .split_whitespace()
                .map(|x| x.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| GspotError::Parse("bad pin".into()))?;
            pins.push(row);
        }
        Ok(GSpotInfo {
            xi,
            alpha1: num("alpha1")?,
            alpha2: num("alpha2")?,
            alpha3: num("alpha3")?,
            beta: num("beta")?,
            case: map
                .get("case")
                .ok_or_else(|| GspotError::Parse("missing case".into()))?
                .parse()?,
            jacobian_condition: num("jacobian_condition")?,
            residual: num("residual")?,
            iterations: num("iterations")? as usize,
            pins,
        })
    }
}

/// (P, B, Y, V) at ξ.
pub fn gspot_conditions<S: Scalar, Y: ContactSystem>(sys: &Y, xi: &[S]) -> Result<[S; 4], RingError> {
    Ok([
        quantity::p(sys, xi)?,
        quantity::b(sys, xi)?,
        sys.gap(xi)?,
        quantity::v(sys, xi)?,
    ])
}

fn gradients<Y: ContactSystem>(sys: &Y, xi: &[f64]) -> Result<([f64; 4], Vec<Vec<f64>>), RingError> {
    let m = xi.len();
    let seeded: Vec<Jet<f64>> = xi.iter().enumerate().map(|(i, &x)| Jet::variable(x, i, m)).collect();
    let q = gspot_conditions(sys, &seeded)?;
    let values = [q[0].value, q[1].value, q[2].value, q[3].value];
    let rows = q.iter().map(|j| (0..m).map(|k| j.partial(k)).collect()).collect();
    Ok((values, rows))
}

/// Columns of the 4×m gradient chosen by complete pivoting.
fn pivot_columns(rows: &[Vec<f64>]) -> Vec<usize> {
    let mut a = rows.to_vec();
    let m = a.first().map_or(0, Vec::len);
    let mut used = vec![false; m];
    let mut chosen = Vec::new();
    for r in 0..a.len() {
        let mut best = (0.0, r, usize::MAX);
        for (i, row) in a.iter().enumerate().skip(r) {
            for (j, v) in row.iter().enumerate() {
                if !used[j] && v.abs() > best.0 {
                    best = (v.abs(), i, j);
                }
            }
        }
        if best.2 == usize::MAX {
            break;
        }
        let (_, pi, pj) = best;
        a.swap(r, pi);
        used[pj] = true;
        chosen.push(pj);
        for i in r + 1..a.len() {
            let f = a[i][pj] / a[r][pj];
            for j in 0..m {
                a[i][j] -= f * a[r][j];
            }
        }
    }
    chosen
}

fn pinning_rows(pin: &Pinning, guess: &[f64], grad: &[Vec<f64>]) -> Vec<(Vec<f64>, f64)> {
    let m = guess.len();
    let unit = |k: usize| {
        let mut w = vec![0.0; m];
        w[k] = 1.0;
        w
    };
    match pin {
        Pinning::Auto => {
            let piv = pivot_columns(grad);
            (0..m)
                .filter(|k| !piv.contains(k))
                .map(|k| (unit(k), guess[k]))
                .collect()
        }
        Pinning::Fixed(list) => list.iter().map(|&(k, c)| (unit(k), c)).collect(),
        Pinning::Linear(list) => list.clone(),
    }
}

fn residual_and_jacobian<Y: ContactSystem>(
    sys: &Y,
    xi: &[f64],
    pins: &[(Vec<f64>, f64)],
) -> Result<(Vec<f64>, Matrix<f64>), RingError> {
    let (vals, rows) = gradients(sys, xi)?;
    let m = xi.len();
    let mut r: Vec<f64> = vals.to_vec();
    let mut jac_rows = rows;
    for (w, c) in pins {
        r.push(w.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() - c);
        jac_rows.push(w.clone());
    }
    let mut jm = Matrix::zeros(m);
    for (i, row) in jac_rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            jm.set(i, j, *v);
        }
    }
    Ok((r, jm))
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// 1-norm condition number through the explicit inverse.
pub fn condition_number(a: &Matrix<f64>) -> f64 {
    let n = a.n;
    let norm1 = |get: &dyn Fn(usize, usize) -> f64| {
        (0..n)
            .map(|j| (0..n).map(|i| get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let Ok(lu) = lu_factor(a.clone()) else {
        return f64::INFINITY;
    };
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            lu.solve(&e)
        })
        .collect();
    let inv = |i: usize, j: usize| cols[j][i];
    let c = norm1(&|i, j| *a.get(i, j)) * norm1(&inv);
    if c.is_finite() {
        c
    } else {
        f64::INFINITY
    }
}

/// Newton solve of P = B = Y = V = 0 plus the pinning conditions.
pub fn find_gspot<Y: ContactSystem>(sys: &Y, pin: &Pinning, guess: &[f64]) -> Result<GSpotInfo, GspotError> {
    let m = sys.dim();
    let (_, grad0) = gradients(sys, guess)?;
    if rank(&grad0, 1e-12) < 4 {
        return Err(GspotError::SingularJacobian(f64::INFINITY));
    }
    let pins = pinning_rows(pin, guess, &grad0);
    if pins.len() + 4 != m {
        return Err(GspotError::Pinning {
            got: pins.len(),
            expected: m - 4,
        });
    }
    let mut xi = guess.to_vec();
    let (mut r, mut jac) = residual_and_jacobian(sys, &xi, &pins)?;
    let mut res = norm_inf(&r);
    let mut iterations = 0;
    while res > 1e-13 {
        if iterations >= 50 {
            return Err(GspotError::NoConvergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let cond = condition_number(&jac);
        if cond > 1e12 {
            return Err(GspotError::SingularJacobian(cond));
        }
        let step = lu_factor(jac.clone())
            .map_err(|_| GspotError::SingularJacobian(f64::INFINITY))?
            .solve(&r);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=30 {
            let trial: Vec<f64> = xi.iter().zip(&step).map(|(x, d)| x - t * d).collect();
            if let Ok((rt, jt)) = residual_and_jacobian(sys, &trial, &pins) {
                let nt = norm_inf(&rt);
                if nt.is_finite() && nt < res {
                    accepted = Some((trial, rt, jt, nt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((x1, r1, j1, n1)) = accepted else {
            if res <= 1e-10 {
                break;
            }
            return Err(GspotError::NoConvergence {
                iterations,
                residual: res,
            });
        };
        xi = x1;
        r = r1;
        jac = j1;
        res = n1;
    }
    if res > 1e-10 {
        return Err(GspotError::NoConvergence {
            iterations,
            residual: res,
        });
    }
    let cond = condition_number(&jac);
    if cond > 1e12 {
        return Err(GspotError::SingularJacobian(cond));
    }
    let a1 = quantity::alpha1(sys, &xi)?;
    let a2 = quantity::alpha2(sys, &xi)?;
    let a3 = quantity::alpha3(sys, &xi)?;
    Ok(GSpotInfo {
        case: classify_case(a1, a2, a3),
        beta: a3 / a1,
        alpha1: a1,
        alpha2: a2,
        alpha3: a3,
        jacobian_condition: cond,
        residual: res,
        iterations,
        xi,
        pins: pins.into_iter().map(|(w, _)| w).collect(),
    })
}

/// λ_N = −b/p.
pub fn painleve_lambda(b: f64, p: f64) -> Result<f64, GspotError> {
    if p == 0.0 {
        return Err(GspotError::SingularValue);
    }
    Ok(-b / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowTerminal {
    LiftOff,
    Jam,
    Exit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularFlowResult {
    /// (ŝ, p, b) samples.
    pub samples: Vec<(f64, f64, f64)>,
    pub terminal: FlowTerminal,
}

impl SingularFlowResult {
    pub fn last(&self) -> (f64, f64, f64) {
        *self.samples.last().expect("flow has at least the initial sample")
    }
}

/// Integrates dp/dŝ = α₁p, db/dŝ = α₂p + α₃b by classical RK4.
///
/// Stops at lift-off (b reaches 0 with p > 0), jam (‖(p, b)‖ < 1e−8) or the
/// end of the span / escape from the unit neighbourhood scaled by 1e3 (exit).
pub fn singular_flow(alphas: [f64; 3], ic: (f64, f64), s_span: f64) -> SingularFlowResult {
    let [a1, a2, a3] = alphas;
    let f = |p: f64, b: f64| (a1 * p, a2 * p + a3 * b);
    let rate = a1.abs().max(a3.abs()).max(a2.abs()).max(1e-12);
    let h = (0.01 / rate).min(s_span / 100.0);
    let (mut p, mut b) = ic;
    let mut s = 0.0;
    let mut samples = vec![(s, p, b)];
    let scale0 = p.hypot(b).max(1.0);
    if p > 0.0 && b >= 0.0 {
        return SingularFlowResult {
            samples,
            terminal: FlowTerminal::LiftOff,
        };
    }
    while s < s_span {
        let (k1p, k1b) = f(p, b);
        let (k2p, k2b) = f(p + 0.5 * h * k1p, b + 0.5 * h * k1b);
        let (k3p, k3b) = f(p + 0.5 * h * k2p, b + 0.5 * h * k2b);
        let (k4p, k4b) = f(p + h * k3p, b + h * k3b);
        let pn = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let bn = b + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        s += h;
        if pn > 0.0 && bn >= 0.0 && b < 0.0 {
            // linear interpolation of the crossing
            let th = b / (b - bn);
            samples.push((s - h + th * h, p + th * (pn - p), 0.0));
            return SingularFlowResult {
                samples,
                terminal: FlowTerminal::LiftOff,
            };
        }
        p = pn;
        b = bn;
        samples.push((s, p, b));
        if p.hypot(b) < 1e-8 {
            return SingularFlowResult {
                samples,
                terminal: FlowTerminal::Jam,
            };
        }
        if p.hypot(b) > 1e3 * scale0 {
            break;
        }
    }
    SingularFlowResult {
        samples,
        terminal: FlowTerminal::Exit,
    }
}

/// Roots of λ³ + 2λ² + pλ + p, the fast contact subsystem.
pub fn fast_spectrum(p: f64) -> [Complex64; 3] {
    let poly = |x: f64| ((x + 2.0) * x + p) * x + p;
    let dpoly = |x: f64| (3.0 * x + 4.0) * x + p;
    // a real root is bracketed by ±(1 + max coefficient)
    let bound = 1.0 + 2f64.max(p.abs());
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if poly(lo) * poly(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = dpoly(r);
        if d != 0.0 {
            r -= poly(r) / d;
        }
    }
    // deflate: λ² + (2 + r)λ + (p + r(2 + r))
    let b = 2.0 + r;
    let c = p + r * b;
    let disc = Complex64::new(b * b - 4.0 * c, 0.0).sqrt();
    let q = if b >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
    let r2 = if q.norm() > 0.0 { Complex64::new(c, 0.0) / q } else { Complex64::new(0.0, 0.0) };
    let mut roots = [Complex64::new(r, 0.0), q, r2];
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// Routh–Hurwitz: every root has negative real part iff p > 0.
pub fn fast_subsystem_stable(p: f64) -> bool {
    p > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{make_extended_example, make_impact_oscillator};
    use crate::ring::Real;

    #[test]
    fn case_examples() {
        assert_eq!(classify_case(-1.0, -1.0, -0.5), Case::I);
        assert_eq!(classify_case(-1.0, 1.0, -0.5), Case::II);
        assert_eq!(classify_case(-1.0, -1.0, -1.5), Case::III);
        assert_eq!(classify_case(1.0, -1.0, -1.5), Case::None);
    }

    #[test]
    fn painleve_lambda_examples() {
        assert_eq!(painleve_lambda(-1.0, 0.5).unwrap(), 2.0);
        assert_eq!(painleve_lambda(0.0, 0.5).unwrap(), 0.0);
        assert_eq!(painleve_lambda(1.0, 0.0), Err(GspotError::SingularValue));
    }

    #[test]
    fn oscillator_gspot_found_from_nearby_guess() {
        let osc = make_impact_oscillator(7.0 / 3.0, 0.0, 1.0, 1.0, 1.0);
        let g = find_gspot(&osc, &Pinning::Auto, &[0.95, -0.35, -0.9, 0.85]).unwrap();
        assert!((g.xi[0].cos() - 0.6).abs() < 1e-10);
        assert!((g.xi[1] + 0.4).abs() < 1e-10);
        assert!((g.xi[2] + 1.0).abs() < 1e-10);
        assert!((g.xi[3] - 0.8).abs() < 1e-10);
        assert_eq!(g.case, Case::III);
        let again = find_gspot(&osc, &Pinning::Auto, &g.xi).unwrap();
        assert!(again.iterations <= 2);
    }

    #[test]
    fn extended_gspot_is_origin_of_pbyv() {
        let ext = make_extended_example(Real::int(1), Real::int(-1), Real::int(-1), Real::ratio(-3, 2));
        let g = find_gspot(&ext, &Pinning::Fixed(vec![(0, 0.0), (1, 0.0)]), &[0.0, 0.0, 0.1, -0.1, 0.2, 0.3])
            .unwrap();
        assert!(g.xi.iter().all(|x| x.abs() < 1e-12));
        assert_eq!(g.case, Case::III);
        assert!((g.beta - 1.5).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let ext = make_extended_example(Real::int(0), Real::int(-1), Real::int(-1), Real::ratio(-1, 2));
        let g = find_gspot(&ext, &Pinning::Auto, &[0.0, 1.0, 0.1, 0.0, 0.1, 0.0]).unwrap();
        assert_eq!(GSpotInfo::from_text(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn spectrum_examples() {
        let r = fast_spectrum(0.0);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 2.0).abs() < 1e-12 && re[1].abs() < 1e-12 && re[2].abs() < 1e-12);
        assert!(fast_spectrum(1.0).iter().all(|z| z.re < 0.0));
        let pos = fast_spectrum(-1.0).iter().filter(|z| z.re > 0.0 && z.im == 0.0).count();
        assert_eq!(pos, 1);
    }

    #[test]
    fn singular_flow_terminals() {
        let f = singular_flow([-1.0, -1.0, -0.5], (0.5, -1.0), 200.0);
        assert_eq!(f.terminal, FlowTerminal::Jam);
        let f = singular_flow([-1.0, -1.0, -0.5], (0.5, 0.2), 10.0);
        assert_eq!(f.terminal, FlowTerminal::LiftOff);
    }
}
