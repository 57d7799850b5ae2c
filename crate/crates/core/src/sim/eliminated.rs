//! Single scalar equation for b in the four-state model, with y, v, z and
//! λ_N recovered afterwards.
//!
//! In contact with p = α₁t the model reduces to
//! ε³b⁗ + 2ε²b‴ + εp b″ + (ε(α₁−α₃) + p) b′ − α₃b − α₂p − εα₁α₂ = 0,
//! which is integrated by an L-stable SDIRK method independent of the
//! Radau integrator used for the full system.

use super::SimError;
use crate::linalg::{lu_factor, Matrix};

/// Scalars (p, b, y, v, z) of the four-state model at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullScalarState {
    pub p: f64,
    pub b: f64,
    pub y: f64,
    pub v: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EliminatedSample {
    pub t: f64,
    pub b: f64,
    pub y: f64,
    pub v: f64,
    pub z: f64,
    pub lambda_n: f64,
}

const GAMMA: f64 = 0.25;
const SD_C: [f64; 5] = [0.25, 0.75, 11.0 / 20.0, 0.5, 1.0];
const SD_A: [[f64; 5]; 5] = [
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [0.5, 0.25, 0.0, 0.0, 0.0],
    [17.0 / 50.0, -1.0 / 25.0, 0.25, 0.0, 0.0],
    [371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0.0],
    [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25],
];
const SD_BHAT: [f64; 5] = [59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0];

struct Linear4 {
    a1: f64,
    a2: f64,
    a3: f64,
    eps: f64,
}

impl Linear4 {
    /// w = (b, b′, b″, b‴); returns (M(t), g(t)) with w′ = M w + g.
    fn system(&self, t: f64) -> ([[f64; 4]; 4], [f64; 4]) {
        let e = self.eps;
        let p = self.a1 * t;
        let e3 = e * e * e;
        let mut m = [[0.0; 4]; 4];
        m[0][1] = 1.0;
        m[1][2] = 1.0;
        m[2][3] = 1.0;
        m[3][0] = self.a3 / e3;
        m[3][1] = -(e * (self.a1 - self.a3) + p) / e3;
        m[3][2] = -e * p / e3;
        m[3][3] = -2.0 * e * e / e3;
        let g = [0.0, 0.0, 0.0, (self.a2 * p + e * self.a1 * self.a2) / e3];
        (m, g)
    }

    fn recover(&self, t: f64, w: [f64; 4]) -> EliminatedSample {
        let e = self.eps;
        let p = self.a1 * t;
        let lam = (self.a2 - w[1]) / self.a3;
        let dlam = -w[2] / self.a3;
        let ddlam = -w[3] / self.a3;
        let v = -e * (w[0] + p * lam) - e * e * e * ddlam - 2.0 * e * e * dlam;
        let y = -e * v - e * e * e * dlam - 2.0 * e * e * lam;
        EliminatedSample {
            t,
            b: w[0],
            y,
            v,
            z: y + e * e * lam,
            lambda_n: lam,
        }
    }
}

/// Solves the eliminated equation from a full-state snapshot taken at
/// `t_span.0` (time measured so that p = α₁t) and reports samples at `times`.
pub fn eliminated_oracle(
    alphas: [f64; 3],
    eps: f64,
    ic: FullScalarState,
    t_span: (f64, f64),
    times: &[f64],
    rtol: f64,
) -> Result<Vec<EliminatedSample>, SimError> {
    let [a1, a2, a3] = alphas;
    if eps <= 0.0 || a3 == 0.0 {
        return Err(SimError::Config("eliminated form needs eps > 0 and a3 != 0".into()));
    }
    let sys = Linear4 { a1, a2, a3, eps };
    let e = eps;
    let lam = (ic.z - ic.y) / (e * e);
    let dz = (ic.y - 2.0 * ic.z) / e;
    let dlam = (dz - ic.v) / (e * e);
    let dv = ic.b + ic.p * lam;
    let ddz = (-dz - e * e * dlam) / e;
    let ddlam = (ddz - dv) / (e * e);
    let mut w = [ic.b, a2 - a3 * lam, -a3 * dlam, -a3 * ddlam];

    let (mut t, t_end) = t_span;
    let mut h = eps * 1e-2;
    let mut out = Vec::with_capacity(times.len());
    let mut next = 0;
    while next < times.len() && times[next] <= t {
        out.push(sys.recover(t, w));
        next += 1;
    }
    let scale = |w: &[f64; 4], k: usize| {
        let unit = [1.0, 1.0 / e, 1.0 / (e * e), 1.0 / (e * e * e)][k];
        rtol * (w[k].abs() + 1e-3 * unit)
    };
    while t < t_end && next < times.len() {
        let target = times[next].min(t_end);
        let hh = h.min(target - t);
        let (w1, err) = sdirk_step(&sys, t, &w, hh, &scale)?;
        if err <= 1.0 {
            t += hh;
            w = w1;
            if t >= target {
                out.push(sys.recover(t, w));
                next += 1;
            }
            h = hh * (0.9 * err.max(1e-10).powf(-0.25)).clamp(0.2, 4.0);
            if hh < h && t >= target {
                h = h.max(hh);
            }
        } else {
            h = hh * (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
        }
        if h < 1e-16 * t.abs().max(1.0) {
            return Err(SimError::StepCollapse { t, h });
        }
    }
    Ok(out)
}

fn sdirk_step(
    sys: &Linear4,
    t: f64,
    w: &[f64; 4],
    h: f64,
    scale: &dyn Fn(&[f64; 4], usize) -> f64,
) -> Result<([f64; 4], f64), SimError> {
    let mut k: Vec<[f64; 4]> = Vec::with_capacity(5);
    for i in 0..5 {
        let ti = t + SD_C[i] * h;
        let (m, g) = sys.system(ti);
        // (I − hγM) kᵢ = M(w + hΣ_{j<i} a_ij k_j) + g
        let mut base = *w;
        for (j, kj) in k.iter().enumerate() {
            for r in 0..4 {
                base[r] += h * SD_A[i][j] * kj[r];
            }
        }
        let rhs: Vec<f64> = (0..4)
            .map(|r| (0..4).map(|c| m[r][c] * base[c]).sum::<f64>() + g[r])
            .collect();
        let mut lhs = Matrix::<f64>::identity(4);
        for r in 0..4 {
            for c in 0..4 {
                let v = lhs.get(r, c) - h * GAMMA * m[r][c];
                lhs.set(r, c, v);
            }
        }
        let sol = lu_factor(lhs)?.solve(&rhs);
        k.push([sol[0], sol[1], sol[2], sol[3]]);
    }
    let mut w1 = *w;
    let mut diff = [0.0; 4];
    for r in 0..4 {
        for j in 0..5 {
            w1[r] += h * SD_A[4][j] * k[j][r];
            diff[r] += h * (SD_A[4][j] - SD_BHAT[j]) * k[j][r];
        }
    }
    let err = (0..4)
        .map(|r| (diff[r] / scale(&w1, r)).powi(2))
        .sum::<f64>()
        .sqrt()
        / 2.0;
    Ok((w1, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sdirk_order_conditions() {
        let b = SD_A[4];
        let sum: f64 = b.iter().sum();
        let bc: f64 = (0..5).map(|i| b[i] * SD_C[i]).sum();
        let bc2: f64 = (0..5).map(|i| b[i] * SD_C[i] * SD_C[i]).sum();
        let bc3: f64 = (0..5).map(|i| b[i] * SD_C[i].powi(3)).sum();
        let bac: f64 = (0..5)
            .map(|i| b[i] * (0..5).map(|j| SD_A[i][j] * SD_C[j]).sum::<f64>())
            .sum();
        assert!((sum - 1.0).abs() < 1e-13);
        assert!((bc - 0.5).abs() < 1e-13);
        assert!((bc2 - 1.0 / 3.0).abs() < 1e-13);
        assert!((bc3 - 0.25).abs() < 1e-13);
        assert!((bac - 1.0 / 6.0).abs() < 1e-13);
        for i in 0..5 {
            let row: f64 = SD_A[i].iter().sum();
            assert!((row - SD_C[i]).abs() < 1e-13);
        }
        let bhat: f64 = SD_BHAT.iter().sum();
        let bhat_c: f64 = (0..5).map(|i| SD_BHAT[i] * SD_C[i]).sum();
        assert!((bhat - 1.0).abs() < 1e-13 && (bhat_c - 0.5).abs() < 1e-13);
    }

    #[test]
    fn trivial_solution_reproduced() {
        let (a1, a2, a3) = (-1.0, -1.0, -1.5);
        let eps = 1e-3;
        let lam = a2 / (a3 - a1);
        let t0 = -0.4;
        let slope = a1 * a2 / (a1 - a3);
        let ic = FullScalarState {
            p: a1 * t0,
            b: slope * t0,
            y: -2.0 * eps * eps * lam,
            v: 0.0,
            z: -eps * eps * lam,
        };
        let times = [-0.3, -0.2, -0.1, -0.01];
        let out = eliminated_oracle([a1, a2, a3], eps, ic, (t0, -0.01), &times, 1e-9).unwrap();
        assert_eq!(out.len(), 4);
        for s in out {
            assert!((s.b - slope * s.t).abs() < 1e-9 * (slope * s.t).abs(), "{s:?}");
            assert!((s.lambda_n - lam).abs() < 1e-6);
        }
    }
}
