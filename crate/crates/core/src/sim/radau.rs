//! Three-stage Radau IIA (order 5) with simplified Newton iteration, an
//! embedded order-3 error estimate and collocation dense output.

use crate::linalg::{lu_factor, Lu, Matrix};

use super::SimError;

const SQ6: f64 = 2.449_489_742_783_178;

pub(crate) const C: [f64; 3] = [(4.0 - SQ6) / 10.0, (4.0 + SQ6) / 10.0, 1.0];

pub(crate) const A: [[f64; 3]; 3] = [
    [
        (88.0 - 7.0 * SQ6) / 360.0,
        (296.0 - 169.0 * SQ6) / 1800.0,
        (-2.0 + 3.0 * SQ6) / 225.0,
    ],
    [
        (296.0 + 169.0 * SQ6) / 1800.0,
        (88.0 + 7.0 * SQ6) / 360.0,
        (-2.0 - 3.0 * SQ6) / 225.0,
    ],
    [(16.0 - SQ6) / 36.0, (16.0 + SQ6) / 36.0, 1.0 / 9.0],
];

/// Real eigenvalue of A⁻¹ inverted: (6 + 81^{1/3} − 9^{1/3})/30.
pub(crate) fn gamma0() -> f64 {
    (6.0 + 81f64.cbrt() - 9f64.cbrt()) / 30.0
}

/// Weights of the stage increments in the embedded error estimate.
pub(crate) fn error_weights() -> [f64; 3] {
    let g = gamma0();
    [
        g * (-13.0 - 7.0 * SQ6) / 3.0,
        g * (-13.0 + 7.0 * SQ6) / 3.0,
        -g / 3.0,
    ]
}

/// Right-hand side with its Jacobian.
pub trait OdeRhs {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>, SimError>;
    fn jacobian(&self, t: f64, y: &[f64]) -> Result<Matrix<f64>, SimError>;
}

#[derive(Debug, Clone)]
pub struct RadauOptions {
    pub rtol: f64,
    /// Per-component absolute tolerance.
    pub atol: Vec<f64>,
    pub h_init: f64,
    pub h_max: f64,
}

/// Collocation polynomial of one accepted step.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    pub y0: Vec<f64>,
    z: [Vec<f64>; 3],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolates through θ ∈ {0, c₁, c₂, 1}; valid slightly outside [0,1].
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let th = (t - self.t0) / self.h;
        let nodes = [C[0], C[1], 1.0];
        // Lagrange basis with the extra node 0 carrying a zero increment
        let w: Vec<f64> = (0..3)
            .map(|i| {
                let mut l = th / nodes[i];
                for j in 0..3 {
                    if j != i {
                        l *= (th - nodes[j]) / (nodes[i] - nodes[j]);
                    }
                }
                l
            })
            .collect();
        self.y0
            .iter()
            .enumerate()
            .map(|(k, y)| y + w[0] * self.z[0][k] + w[1] * self.z[1][k] + w[2] * self.z[2][k])
            .collect()
    }

    pub fn end_state(&self) -> Vec<f64> {
        self.y0.iter().zip(&self.z[2]).map(|(a, b)| a + b).collect()
    }
}

enum Attempt {
    Accepted { seg: DenseSegment, err: f64 },
    Rejected { err: f64 },
    NewtonFailed,
}

/// Adaptive stepper state.
pub struct Radau {
    opts: RadauOptions,
    pub t: f64,
    pub y: Vec<f64>,
    pub h: f64,
    prev: Option<DenseSegment>,
    rejected_last: bool,
    first: bool,
    pub accepted: usize,
    pub rejected: usize,
}

fn scaled_rms(v: &[f64], sc: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(sc).map(|(x, s)| (x / s).powi(2)).sum();
    (s / v.len() as f64).sqrt()
}

impl Radau {
    pub fn new(t: f64, y: Vec<f64>, opts: RadauOptions) -> Self {
        let h = opts.h_init;
        Radau {
            opts,
            t,
            y,
            h,
            prev: None,
            rejected_last: false,
            first: true,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Restarts from a new point, dropping extrapolation history.
    pub fn reset(&mut self, t: f64, y: Vec<f64>, h: f64) {
        self.t = t;
        self.y = y;
        self.h = h.min(self.opts.h_max);
        self.prev = None;
        self.first = true;
        self.rejected_last = false;
    }

    fn newton_tol(&self) -> f64 {
        (10.0 * f64::EPSILON / self.opts.rtol).max(0.03f64.min(self.opts.rtol.sqrt()))
    }

    fn attempt<R: OdeRhs>(&self, rhs: &R, h: f64, f0: &[f64], jac: &Matrix<f64>) -> Result<Attempt, SimError> {
        let n = self.y.len();
        let sc: Vec<f64> = self
            .y
            .iter()
            .zip(&self.opts.atol)
            .map(|(y, a)| a + self.opts.rtol * y.abs())
            .collect();

        let mut big = Matrix::<f64>::identity(3 * n);
        for i in 0..3 {
            for j in 0..3 {
                for r in 0..n {
                    for c in 0..n {
                        let v = big.get(i * n + r, j * n + c) - h * A[i][j] * jac.get(r, c);
                        big.set(i * n + r, j * n + c, v);
                    }
                }
            }
        }
        let Ok(lu) = lu_factor(big) else {
            return Ok(Attempt::NewtonFailed);
        };

        let mut z: [Vec<f64>; 3] = match &self.prev {
            Some(seg) => std::array::from_fn(|i| {
                let yi = seg.eval(self.t + C[i] * h);
                yi.iter().zip(&self.y).map(|(a, b)| a - b).collect()
            }),
            None => std::array::from_fn(|_| vec![0.0; n]),
        };
        if z.iter().flatten().any(|v| !v.is_finite()) {
            z = std::array::from_fn(|_| vec![0.0; n]);
        }

        let fnewt = self.newton_tol();
        let mut prev_norm = f64::NAN;
        let mut eta = 1.0f64;
        let mut converged = false;
        for iter in 0..7 {
            let mut fs: Vec<Vec<f64>> = Vec::with_capacity(3);
            for i in 0..3 {
                let yi: Vec<f64> = self.y.iter().zip(&z[i]).map(|(a, b)| a + b).collect();
                match rhs.eval(self.t + C[i] * h, &yi) {
                    Ok(f) if f.iter().all(|v| v.is_finite()) => fs.push(f),
                    _ => return Ok(Attempt::NewtonFailed),
                }
            }
            let mut r = vec![0.0; 3 * n];
            for i in 0..3 {
                for k in 0..n {
                    let mut acc = -z[i][k];
                    for j in 0..3 {
                        acc += h * A[i][j] * fs[j][k];
                    }
                    r[i * n + k] = acc;
                }
            }
            let dz = lu.solve(&r);
            let norm = {
                let s: f64 = (0..3)
                    .flat_map(|i| (0..n).map(move |k| (i, k)))
                    .map(|(i, k)| (dz[i * n + k] / sc[k]).powi(2))
                    .sum();
                (s / (3 * n) as f64).sqrt()
            };
            if !norm.is_finite() {
                return Ok(Attempt::NewtonFailed);
            }
            if iter > 0 {
                let theta = norm / prev_norm;
                if theta >= 0.99 {
                    return Ok(Attempt::NewtonFailed);
                }
                eta = theta / (1.0 - theta);
            }
            for i in 0..3 {
                for k in 0..n {
                    z[i][k] += dz[i * n + k];
                }
            }
            prev_norm = norm;
            if eta * norm <= fnewt || norm == 0.0 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Ok(Attempt::NewtonFailed);
        }

        let err = self.error_estimate(rhs, h, f0, jac, &z, &sc)?;
        let seg = DenseSegment {
            t0: self.t,
            h,
            y0: self.y.clone(),
            z,
        };
        if err < 1.0 {
            Ok(Attempt::Accepted { seg, err })
        } else {
            Ok(Attempt::Rejected { err })
        }
    }

    fn error_estimate<R: OdeRhs>(
        &self,
        rhs: &R,
        h: f64,
        f0: &[f64],
        jac: &Matrix<f64>,
        z: &[Vec<f64>; 3],
        sc0: &[f64],
    ) -> Result<f64, SimError> {
        let n = self.y.len();
        let g = gamma0();
        let e = error_weights();
        let mut m = Matrix::<f64>::identity(n);
        for r in 0..n {
            for c in 0..n {
                let v = m.get(r, c) - h * g * jac.get(r, c);
                m.set(r, c, v);
            }
        }
        let lu: Lu<f64> = lu_factor(m)?;
        let tail: Vec<f64> = (0..n)
            .map(|k| e[0] * z[0][k] + e[1] * z[1][k] + e[2] * z[2][k])
            .collect();
        let rhs_vec: Vec<f64> = (0..n).map(|k| g * h * f0[k] + tail[k]).collect();
        let mut est = lu.solve(&rhs_vec);
        let sc: Vec<f64> = (0..n)
            .map(|k| {
                let y1 = self.y[k] + z[2][k];
                sc0[k].max(self.opts.atol[k] + self.opts.rtol * y1.abs())
            })
            .collect();
        let mut err = scaled_rms(&est, &sc);
        if err >= 1.0 && (self.first || self.rejected_last) {
            let probe: Vec<f64> = self.y.iter().zip(&est).map(|(a, b)| a + b).collect();
            if let Ok(f1) = rhs.eval(self.t, &probe) {
                let v: Vec<f64> = (0..n).map(|k| g * h * f1[k] + tail[k]).collect();
                est = lu.solve(&v);
                err = scaled_rms(&est, &sc);
            }
        }
        Ok(if err.is_finite() { err } else { f64::INFINITY })
    }

    /// Advances by one accepted step of adaptive size, capped at `h_cap`.
    pub fn step<R: OdeRhs>(&mut self, rhs: &R, h_cap: f64) -> Result<DenseSegment, SimError> {
        let f0 = rhs.eval(self.t, &self.y)?;
        let jac = rhs.jacobian(self.t, &self.y)?;
        let h_floor = 1e-15 * self.t.abs().max(1e-3);
        loop {
            let h = self.h.min(h_cap).min(self.opts.h_max);
            if h < h_floor || !h.is_finite() {
                return Err(SimError::StepCollapse { t: self.t, h });
            }
            match self.attempt(rhs, h, &f0, &jac)? {
                Attempt::Accepted { seg, err } => {
                    let mut fac = (0.9 * err.max(1e-10).powf(-0.25)).clamp(0.2, 5.0);
                    if self.rejected_last {
                        fac = fac.min(1.0);
                    }
                    // keep the adaptive size when the step was only clipped
                    let base = if h < self.h { self.h } else { h };
                    self.h = base * fac;
                    self.t = seg.t1();
                    self.y = seg.end_state();
                    self.prev = Some(seg.clone());
                    self.first = false;
                    self.rejected_last = false;
                    self.accepted += 1;
                    return Ok(seg);
                }
                Attempt::Rejected { err } => {
                    let fac = (0.9 * err.powf(-0.25)).clamp(0.1, 1.0);
                    self.h = h * fac;
                    self.rejected_last = true;
                    self.rejected += 1;
                }
                Attempt::NewtonFailed => {
                    self.h = h * 0.5;
                    self.prev = None;
                    self.rejected_last = true;
                    self.rejected += 1;
                }
            }
        }
    }

    /// One step of exactly `h` from the current point without changing state;
    /// `None` when Newton fails or the error test is not met.
    pub fn trial_step<R: OdeRhs>(&self, rhs: &R, h: f64) -> Result<Option<Vec<f64>>, SimError> {
        if h <= 0.0 {
            return Ok(Some(self.y.clone()));
        }
        let f0 = rhs.eval(self.t, &self.y)?;
        let jac = rhs.jacobian(self.t, &self.y)?;
        Ok(match self.attempt(rhs, h, &f0, &jac)? {
            Attempt::Accepted { seg, .. } => Some(seg.end_state()),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve;

    #[test]
    fn tableau_is_collocation() {
        // Σ_j a_ij c_j^{k-1} = c_i^k / k for k = 1..3
        for i in 0..3 {
            for k in 1..=3 {
                let lhs: f64 = (0..3).map(|j| A[i][j] * C[j].powi(k - 1)).sum();
                assert!((lhs - C[i].powi(k) / k as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn error_weights_from_order_conditions() {
        let g = gamma0();
        // b̂ with γ₀ + Σb̂ = 1, Σb̂c = 1/2, Σb̂c² = 1/3
        let v = Matrix::from_rows(vec![
            vec![1.0, 1.0, 1.0],
            C.to_vec(),
            C.iter().map(|c| c * c).collect(),
        ])
        .unwrap();
        let bhat = solve(v, &[1.0 - g, 0.5, 1.0 / 3.0]).unwrap();
        let b = A[2];
        let at = Matrix::from_rows((0..3).map(|i| (0..3).map(|j| A[j][i]).collect()).collect()).unwrap();
        let diff: Vec<f64> = (0..3).map(|i| bhat[i] - b[i]).collect();
        let e = solve(at, &diff).unwrap();
        let w = error_weights();
        for i in 0..3 {
            assert!((e[i] - w[i]).abs() < 1e-12, "{e:?} vs {w:?}");
        }
    }

    struct Decay(f64);

    impl OdeRhs for Decay {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>, SimError> {
            Ok(vec![-self.0 * (y[0] - t.cos()), y[0]])
        }
        fn jacobian(&self, _t: f64, _y: &[f64]) -> Result<Matrix<f64>, SimError> {
            Ok(Matrix::from_rows(vec![vec![-self.0, 0.0], vec![1.0, 0.0]]).unwrap())
        }
    }

    #[test]
    fn stiff_relaxation_tracks_slow_manifold() {
        let k = 1e6;
        let opts = RadauOptions {
            rtol: 1e-8,
            atol: vec![1e-10; 2],
            h_init: 1e-6,
            h_max: 1.0,
        };
        let mut r = Radau::new(0.0, vec![1.0, 0.0], opts);
        while r.t < 2.0 {
            r.step(&Decay(k), 2.0 - r.t).unwrap();
        }
        // y0 ≈ cos t + sin t / k
        let expect = 2f64.cos() + 2f64.sin() / k;
        assert!((r.y[0] - expect).abs() < 1e-8, "{} vs {}", r.y[0], expect);
        assert!(r.accepted < 400, "too many steps: {}", r.accepted);
    }

    struct Harmonic;

    impl OdeRhs for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>, SimError> {
            Ok(vec![y[1], -y[0]])
        }
        fn jacobian(&self, _t: f64, _y: &[f64]) -> Result<Matrix<f64>, SimError> {
            Ok(Matrix::from_rows(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap())
        }
    }

    #[test]
    fn dense_output_is_accurate() {
        let opts = RadauOptions {
            rtol: 1e-10,
            atol: vec![1e-12; 2],
            h_init: 1e-3,
            h_max: 0.5,
        };
        let mut r = Radau::new(0.0, vec![0.0, 1.0], opts);
        while r.t < 3.0 {
            let seg = r.step(&Harmonic, 3.0 - r.t).unwrap();
            let mid = seg.t0 + 0.37 * seg.h;
            assert!((seg.eval(mid)[0] - mid.sin()).abs() < 1e-7);
        }
        assert!((r.y[0] - 3f64.sin()).abs() < 1e-9);
    }
}
