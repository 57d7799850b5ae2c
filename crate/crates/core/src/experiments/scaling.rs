use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{fmt_f64, write_csv, write_manifest, ExperimentConfig, ExperimentError};
use crate::contact::make_simple_example;
use crate::ring::Real;
use crate::sim::{perturbed_trivial_start, EventKind, SimConfig, Simulator, StepStatus};

/// Deviations from the trivial solution at the p = 0 crossing, and the time
/// from that crossing to the nearest zero of b̂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub eps: f64,
    pub bhat: f64,
    pub vhat: f64,
    pub yhat: f64,
    pub tdiff: f64,
}

/// Least-squares fit of log|x| = γ log ε + c.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub quantity: &'static str,
    pub gamma: f64,
    pub theory: f64,
    pub r2: f64,
    /// 95% confidence interval of γ.
    pub ci: (f64, f64),
    /// (smallest, largest) ε used.
    pub window: (f64, f64),
    pub points: usize,
}

impl ExponentFit {
    pub fn theory_in_ci(&self) -> bool {
        self.ci.0 <= self.theory && self.theory <= self.ci.1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub beta: f64,
    pub nu: f64,
    pub points: Vec<ScalingPoint>,
    pub fits: Vec<ExponentFit>,
}

impl ScalingReport {
    pub fn fit(&self, quantity: &str) -> Option<&ExponentFit> {
        self.fits.iter().find(|f| f.quantity == quantity)
    }
}

/// Fits over the smallest decade of ε present in `eps`.
pub fn fit_power_law(quantity: &'static str, theory: f64, eps: &[f64], values: &[f64]) -> Result<ExponentFit, ExperimentError> {
    let e_min = eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let upper = 10.0 * e_min * (1.0 + 1e-9);
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(values)
        .filter(|(e, v)| **e <= upper && v.abs() > 0.0)
        .map(|(e, v)| (e.ln(), v.abs().ln()))
        .collect();
    let n = pts.len();
    if n < 4 {
        return Err(ExperimentError::InsufficientPoints(n));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let gamma = sxy / sxx;
    let sse: f64 = pts.iter().map(|p| (p.1 - my - gamma * (p.0 - mx)).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| ExperimentError::Numerical(e.to_string()))?
        .inverse_cdf(0.975);
    let used: Vec<f64> = eps.iter().cloned().filter(|e| *e <= upper).collect();
    Ok(ExponentFit {
        quantity,
        gamma,
        theory,
        r2,
        ci: (gamma - t * se, gamma + t * se),
        window: (e_min, used.iter().cloned().fold(0.0, f64::max)),
        points: n,
    })
}

/// One perturbed run of the four-state model with α₁ = α₂ = −1, α₃ = −β.
pub fn scaling_point(beta: f64, eps: f64, nu: f64, p0: f64, rtol: f64, atol: f64) -> Result<ScalingPoint, ExperimentError> {
    let (a1, a2, a3) = (-1.0, -1.0, -beta);
    let sys = make_simple_example(Real::int(-1), Real::int(-1), Real::float(a3));
    let ic = perturbed_trivial_start([a1, a2, a3], eps, nu, p0);
    let cfg = SimConfig {
        eps,
        rtol,
        atol,
        t_end: 3.0 * p0 / a1.abs(),
        stop_on: vec![EventKind::IwcOnset, EventKind::LiftOff],
        record_samples: false,
        ..SimConfig::default()
    };
    let m = 4;
    let slope = a2 / (a1 - a3);
    let bhat = |x: &[f64]| x[m + 1] - slope * x[m];
    let mut sim = Simulator::new(&sys, &ic, cfg)?;
    let mut crossings = Vec::new();
    loop {
        let status = sim.step()?;
        if let Some(seg) = sim.last_segment() {
            let (t0, t1) = (seg.t0, seg.t1());
            let (g0, g1) = (bhat(&seg.y0), bhat(&seg.end_state()));
            if g0 != 0.0 && g0.signum() != g1.signum() {
                let (mut lo, mut hi) = (t0, t1);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if bhat(&seg.eval(mid)).signum() == g0.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                crossings.push(0.5 * (lo + hi));
            }
        }
        if matches!(status, StepStatus::Finished(_)) {
            break;
        }
    }
    let passage = sim
        .events()
        .iter()
        .find(|e| e.kind == EventKind::GspotPassage)
        .ok_or_else(|| ExperimentError::Numerical(format!("β={beta}, ε={eps:e}: run ended before p = 0")))?;
    let t_star = passage.t;
    let x = &passage.state;
    let y_bar = -2.0 * eps * eps * a2 / (a3 - a1);
    let tdiff = crossings
        .iter()
        .map(|t| (t - t_star).abs())
        .fold(f64::INFINITY, f64::min);
    if !tdiff.is_finite() {
        return Err(ExperimentError::Numerical(format!(
            "β={beta}, ε={eps:e}: b̂ never changes sign"
        )));
    }
    Ok(ScalingPoint {
        eps,
        bhat: bhat(x),
        vhat: x[m + 3],
        yhat: x[m + 2] - y_bar,
        tdiff,
    })
}

/// ε sweep for each β in the config at the first ν; fits use the smallest ε decade.
pub fn run_scaling_study(cfg: &ExperimentConfig) -> Result<Vec<ScalingReport>, ExperimentError> {
    let mut cfg = cfg.clone();
    cfg.validate()?;
    let nu = *cfg
        .nu
        .first()
        .ok_or_else(|| ExperimentError::Config("nu list is empty".into()))?;
    // b̂ is O(ε^{2β/3}) next to an O(1) b, so the sweep tightens the tolerances
    let rtol = cfg.rtol.min(1e-11);
    let atol = cfg.atol.min(1e-14);
    let jobs: Vec<(f64, f64)> = cfg
        .beta
        .iter()
        .flat_map(|&b| cfg.eps.iter().map(move |&e| (b, e)))
        .collect();
    let results: Vec<Result<ScalingPoint, ExperimentError>> = jobs
        .par_iter()
        .map(|&(b, e)| scaling_point(b, e, nu, cfg.p0, rtol, atol))
        .collect();
    let mut reports = Vec::new();
    let mut files = Vec::new();
    let mut exp_rows = Vec::new();
    for &beta in &cfg.beta {
        let points: Vec<ScalingPoint> = jobs
            .iter()
            .zip(&results)
            .filter(|((b, _), _)| *b == beta)
            .map(|(_, r)| match r {
                Ok(p) => Ok(*p),
                Err(e) => Err(ExperimentError::Numerical(e.to_string())),
            })
            .collect::<Result<_, _>>()?;
        let eps: Vec<f64> = points.iter().map(|p| p.eps).collect();
        let col = |f: fn(&ScalingPoint) -> f64| points.iter().map(f).collect::<Vec<_>>();
        let fits = vec![
            fit_power_law("bhat", 2.0 * beta / 3.0, &eps, &col(|p| p.bhat))?,
            fit_power_law("vhat", (2.0 * beta + 2.0) / 3.0, &eps, &col(|p| p.vhat))?,
            fit_power_law("yhat", (2.0 * beta + 4.0) / 3.0, &eps, &col(|p| p.yhat))?,
            fit_power_law("t", 2.0 / 3.0, &eps, &col(|p| p.tdiff))?,
        ];
        let name = format!("scaling_beta{beta}.csv");
        let rows: Vec<Vec<String>> = points
            .iter()
            .map(|p| vec![fmt_f64(p.eps), fmt_f64(p.bhat), fmt_f64(p.vhat), fmt_f64(p.yhat), fmt_f64(p.tdiff)])
            .collect();
        write_csv(&cfg.out.join(&name), &["eps", "bhat", "vhat", "yhat", "tdiff"], &rows)?;
        files.push(name);
        for f in &fits {
            exp_rows.push(vec![
                format!("{beta}"),
                f.quantity.to_string(),
                fmt_f64(f.gamma),
                fmt_f64(f.theory),
                fmt_f64(f.r2),
                fmt_f64(f.ci.0),
                fmt_f64(f.ci.1),
                fmt_f64(f.window.0),
                fmt_f64(f.window.1),
            ]);
        }
        reports.push(ScalingReport { beta, nu, points, fits });
    }
    write_csv(
        &cfg.out.join("scaling_exponents.csv"),
        &["beta", "quantity", "measured", "theory", "r2", "ci_lo", "ci_hi", "eps_min", "eps_max"],
        &exp_rows,
    )?;
    files.push("scaling_exponents.csv".into());
    write_manifest(&cfg.out, "scaling-study", &cfg, &files)?;
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_recovered() {
        let eps: Vec<f64> = (0..6).map(|k| 1e-5 * 10f64.powf(-0.2 * k as f64)).collect();
        let vals: Vec<f64> = eps.iter().map(|e| 3.0 * e.powf(1.25)).collect();
        let f = fit_power_law("x", 1.25, &eps, &vals).unwrap();
        assert!((f.gamma - 1.25).abs() < 1e-10);
        assert!(f.r2 > 1.0 - 1e-12);
        assert_eq!(f.points, 6);
    }

    #[test]
    fn too_few_points() {
        let eps = [1e-3, 1e-4, 1e-5];
        assert!(matches!(
            fit_power_law("x", 1.0, &eps, &[1.0, 2.0, 3.0]),
            Err(ExperimentError::InsufficientPoints(2))
        ));
    }
}
