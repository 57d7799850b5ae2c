use super::{emit_plotdata, fmt_f64, write_csv, write_manifest, ExperimentConfig, ExperimentError};
use crate::canard::{expand, unscale, FloatExpansion, UnscaledPolynomial, Var};
use crate::contact::{make_impact_oscillator, ImpactOscillator};
use crate::gspot::{find_gspot, GSpotInfo, Pinning};
use crate::hypergeo::ThetaEvaluator;
use crate::sim::{EventKind, InitialState, SimConfig, Simulator, StepStatus, Trajectory};

/// One starting condition and what the run did.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorCase {
    pub label: &'static str,
    pub t_start: f64,
    pub initial: InitialState,
    /// (kind, time) of every event except G-spot passages.
    pub events: Vec<(EventKind, f64)>,
    pub t_gspot: Option<f64>,
}

impl OscillatorCase {
    pub fn kinds(&self) -> Vec<EventKind> {
        self.events.iter().map(|e| e.0).collect()
    }

    /// Lift-off followed later by a touch-down.
    pub fn lifts_off_then_lands(&self) -> bool {
        let k = self.kinds();
        k.iter()
            .position(|e| *e == EventKind::LiftOff)
            .is_some_and(|i| k[i..].contains(&EventKind::TouchDown))
    }

    /// IWC with no lift-off before it.
    pub fn direct_impact(&self) -> bool {
        match self.kinds().iter().find(|k| matches!(k, EventKind::LiftOff | EventKind::IwcOnset)) {
            Some(k) => *k == EventKind::IwcOnset,
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorReport {
    pub gspot: GSpotInfo,
    pub cases: Vec<OscillatorCase>,
    /// Largest ‖(p,b)_sim − (p,b)_exp‖ / ‖(p,b)_exp‖ on the third run while p ∈ [0.002, 0.01].
    pub overlay_max_rel: f64,
    pub overlay_points: usize,
    /// Largest |b̂ − AΘ| on the second run for t ∈ [0, 1e−3] after p = 0, relative to
    /// the running maximum of |AΘ| (Θ changes sign inside the window).
    pub theta_max_rel: f64,
    pub theta_points: usize,
    pub theta_amplitude: f64,
}

/// Angle offset from the G-spot and angular rate, in compliant equilibrium:
/// gap 2ε²b/p, z half the gap, so the spring carries λ = −b/p.
pub fn oscillator_initial_state(osc: &ImpactOscillator, eps: f64, dphi: f64, phi_dot: f64) -> Result<InitialState, ExperimentError> {
    let l = osc.params.l;
    let phi = osc.gspot_state()[0] + dphi;
    let psi_dot = -l * phi.sin() * phi_dot;
    let closed = |gap: f64| vec![phi, l * (phi.cos() - 1.0) + gap, phi_dot, psi_dot];
    let num = |e: crate::ring::RingError| ExperimentError::Numerical(e.to_string());
    let touching = InitialState::synchronized(osc, closed(0.0), 0.0).map_err(num)?;
    if touching.p <= 0.0 || touching.b >= 0.0 {
        return Err(ExperimentError::Numerical(format!(
            "no compliant equilibrium at p = {}, b = {}",
            touching.p, touching.b
        )));
    }
    let gap = 2.0 * eps * eps * touching.b / touching.p;
    InitialState::synchronized(osc, closed(gap), gap / 2.0).map_err(num)
}

/// Time before the G-spot at which the expansion's p equals `p_target`.
fn time_at_p(poly: &UnscaledPolynomial<f64>, eps: f64, p_target: f64) -> Result<f64, ExperimentError> {
    let p = poly
        .get(Var::P)
        .ok_or_else(|| ExperimentError::Numerical("expansion has no p".into()))?;
    let mut lo = -1e-3;
    while p.eval(lo, eps) < p_target {
        lo *= 2.0;
        if lo < -10.0 {
            return Err(ExperimentError::Numerical(format!("expansion p never reaches {p_target}")));
        }
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p.eval(mid, eps) > p_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// State on the distinguished trajectory at time t. The contact scalars come
/// from their own series: the gap recomputed from ξ would carry the much larger
/// truncation error of the ξ series.
fn expansion_state(poly: &UnscaledPolynomial<f64>, t: f64, eps: f64, dim: usize) -> Result<InitialState, ExperimentError> {
    let get = |v: Var| {
        poly.get(v)
            .map(|u| u.eval(t, eps))
            .ok_or_else(|| ExperimentError::Numerical(format!("expansion lacks {v:?}")))
    };
    Ok(InitialState {
        xi: (0..dim).map(|i| get(Var::Xi(i))).collect::<Result<Vec<_>, _>>()?,
        p: get(Var::P)?,
        b: get(Var::B)?,
        y: get(Var::Y)?,
        v: get(Var::V)?,
        z: get(Var::Z)?,
    })
}

/// Steps to completion, recording the dense state at every grid time passed.
fn run_on_grid(
    osc: &ImpactOscillator,
    ic: &InitialState,
    cfg: SimConfig,
    grid: &[f64],
) -> Result<(Trajectory, Vec<(f64, Vec<f64>)>), ExperimentError> {
    let mut sim = Simulator::new(osc, ic, cfg)?;
    let mut dense = Vec::new();
    let mut next = 0;
    loop {
        let status = sim.step()?;
        if let Some(seg) = sim.last_segment() {
            while next < grid.len() && grid[next] <= seg.t1().min(sim.time()) {
                if grid[next] >= seg.t0 {
                    dense.push((grid[next], seg.eval(grid[next])));
                }
                next += 1;
            }
        }
        if matches!(status, StepStatus::Finished(_)) {
            break;
        }
    }
    Ok((sim.run()?, dense))
}

fn case_from(label: &'static str, t_start: f64, initial: InitialState, traj: &Trajectory) -> OscillatorCase {
    OscillatorCase {
        label,
        t_start,
        initial,
        events: traj
            .events
            .iter()
            .filter(|e| e.kind != EventKind::GspotPassage)
            .map(|e| (e.kind, e.t))
            .collect(),
        t_gspot: traj.first_event(&[EventKind::GspotPassage]).map(|e| e.t),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Three runs of the tuned oscillator compared with the order-M expansion and with Θ.
pub fn run_oscillator_verify(cfg: &ExperimentConfig) -> Result<OscillatorReport, ExperimentError> {
    let mut cfg = cfg.clone();
    cfg.validate()?;
    let beta = cfg.beta[0];
    let eps = cfg.eps[0];
    let osc = make_impact_oscillator(beta, cfg.kappa, 1.0, 1.0, 1.0);
    let gspot = find_gspot(&osc, &Pinning::Auto, &osc.gspot_state())?;
    let exp: FloatExpansion = expand(&osc, &gspot, cfg.order)?;
    let poly = unscale(&exp)?;
    let span = cfg.t_end.unwrap_or(0.3);
    let m = 4;
    let base = SimConfig {
        eps,
        rtol: cfg.rtol,
        atol: cfg.atol,
        stop_on: vec![EventKind::IwcOnset],
        ..SimConfig::default()
    };
    let mut files = Vec::new();
    let mut cases = Vec::new();

    for (label, phi_dot) in [("ic1", -0.9), ("ic2", -0.5)] {
        let ic = oscillator_initial_state(&osc, eps, 0.1, phi_dot)?;
        let sc = SimConfig {
            t_end: span,
            ..base.clone()
        };
        let (traj, _) = run_on_grid(&osc, &ic, sc, &[])?;
        files.extend(emit_plotdata(&traj, &cfg.out, &format!("oscillator_{label}"))?);
        cases.push((case_from(label, 0.0, ic, &traj), traj));
    }

    // second run: b̂ against Θ, with t shifted so p crosses zero at t = 0
    let (theta_max_rel, theta_points, theta_amplitude) = {
        let (case, _) = &cases[1];
        let tg = case
            .t_gspot
            .ok_or_else(|| ExperimentError::Numerical("second run never reaches p = 0".into()))?;
        let window = 1e-3;
        let grid = linspace(tg, tg + window, 201);
        let sc = SimConfig {
            t_end: span,
            ..base.clone()
        };
        let (_, dense) = run_on_grid(&osc, &case.initial, sc, &grid)?;
        let bpoly = poly.get(Var::B).ok_or_else(|| ExperimentError::Numerical("expansion lacks b".into()))?;
        let theta = ThetaEvaluator::new(beta)?;
        let kappa = (-gspot.alpha1 / 2.0).cbrt();
        let inner = eps.powf(-2.0 / 3.0);
        let pairs: Vec<(f64, f64, f64)> = dense
            .iter()
            .map(|(t, x)| {
                let s = t - tg;
                let bhat = x[m + 1] - bpoly.eval(s, eps);
                (s, bhat, theta.eval(kappa * s * inner).theta())
            })
            .collect();
        let first = pairs.first().ok_or_else(|| ExperimentError::Numerical("empty Θ window".into()))?;
        let amp = first.1 / first.2;
        let mut worst = 0.0_f64;
        let mut envelope = 0.0_f64;
        let mut rows = Vec::new();
        for &(s, bhat, th) in &pairs {
            let model = amp * th;
            envelope = envelope.max(model.abs());
            worst = worst.max((bhat - model).abs() / envelope);
            rows.push(vec![fmt_f64(s), fmt_f64(bhat), fmt_f64(model)]);
        }
        write_csv(&cfg.out.join("oscillator_theta.csv"), &["t", "bhat", "theta_scaled"], &rows)?;
        files.push("oscillator_theta.csv".into());
        (worst, pairs.len(), amp)
    };

    // third run: on the distinguished trajectory where its p equals 0.01
    let t3 = time_at_p(&poly, eps, 0.01)?;
    let ic3 = expansion_state(&poly, t3, eps, m)?;
    let t_end3 = t3 + span;
    let grid = linspace(t3, t_end3, 2001);
    let sc = SimConfig {
        t_start: t3,
        t_end: t_end3,
        ..base.clone()
    };
    let (traj3, dense) = run_on_grid(&osc, &ic3, sc, &grid)?;
    files.extend(emit_plotdata(&traj3, &cfg.out, "oscillator_ic3")?);
    let (pp, bp) = (poly.get(Var::P).unwrap(), poly.get(Var::B).unwrap());
    let mut sim_rows = Vec::new();
    let mut exp_rows = Vec::new();
    let mut overlay_max_rel = 0.0_f64;
    let mut overlay_points = 0;
    for (t, x) in &dense {
        let (ps, bs) = (x[m], x[m + 1]);
        let (pe, be) = (pp.eval(*t, eps), bp.eval(*t, eps));
        sim_rows.push(vec![fmt_f64(*t), fmt_f64(ps), fmt_f64(bs)]);
        exp_rows.push(vec![fmt_f64(*t), fmt_f64(pe), fmt_f64(be)]);
        if (0.002..=0.01).contains(&ps) {
            let rel = ((ps - pe).hypot(bs - be)) / pe.hypot(be);
            overlay_max_rel = overlay_max_rel.max(rel);
            overlay_points += 1;
        }
    }
    write_csv(&cfg.out.join("oscillator_overlay_sim.csv"), &["t", "p", "b"], &sim_rows)?;
    write_csv(&cfg.out.join("oscillator_overlay_expansion.csv"), &["t", "p", "b"], &exp_rows)?;
    files.push("oscillator_overlay_sim.csv".into());
    files.push("oscillator_overlay_expansion.csv".into());
    cases.push((case_from("ic3", t3, ic3, &traj3), traj3));

    let summary: Vec<Vec<String>> = cases
        .iter()
        .flat_map(|(c, _)| {
            c.events
                .iter()
                .map(|(k, t)| vec![c.label.to_string(), k.as_str().to_string(), fmt_f64(*t)])
                .collect::<Vec<_>>()
        })
        .collect();
    write_csv(&cfg.out.join("oscillator_events.csv"), &["case", "event", "t"], &summary)?;
    files.push("oscillator_events.csv".into());
    write_manifest(&cfg.out, "oscillator-verify", &cfg, &files)?;
    Ok(OscillatorReport {
        gspot,
        cases: cases.into_iter().map(|(c, _)| c).collect(),
        overlay_max_rel,
        overlay_points,
        theta_max_rel,
        theta_points,
        theta_amplitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_keeps_gap_closed() {
        let osc = make_impact_oscillator(7.0 / 3.0, 0.0, 1.0, 1.0, 1.0);
        let eps = 1e-3;
        let ic = oscillator_initial_state(&osc, eps, 0.1, -0.9).unwrap();
        assert!(ic.v.abs() < 1e-12);
        let lambda = (ic.z - ic.y) / (eps * eps);
        assert!((lambda + ic.b / ic.p).abs() < 1e-6 * lambda);
    }
}
