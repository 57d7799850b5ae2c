use rayon::prelude::*;

use super::{emit_plotdata, exact_or_float, fmt_f64, write_csv, write_manifest, ExperimentConfig, ExperimentError};
use crate::contact::{make_extended_example, ExtendedExample};
use crate::ring::Real;
use crate::sim::{simulate, EndReason, EventKind, InitialState, SimConfig, Trajectory};

/// How a run leaves the tangential shock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Slip velocity reached zero while in contact.
    Stick,
    /// Normal force vanished while still slipping.
    LiftOff,
    /// Neither happened before t_end.
    Unresolved,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Stick => "stick",
            Termination::LiftOff => "lift-off",
            Termination::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostGspotRow {
    pub chi: f64,
    pub nu: f64,
    pub termination: Termination,
    pub t_end: f64,
    /// Slip velocity at termination.
    pub u_end: f64,
    pub t_iwc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostGspotReport {
    pub rows: Vec<PostGspotRow>,
}

impl PostGspotReport {
    pub fn count(&self, t: Termination) -> usize {
        self.rows.iter().filter(|r| r.termination == t).count()
    }
}

/// Six-state model with α₁ = α₂ = −1, α₃ = −β.
pub fn post_gspot_system(chi: f64, beta: f64) -> ExtendedExample {
    make_extended_example(exact_or_float(chi), Real::int(-1), Real::int(-1), exact_or_float(-beta))
}

/// Start at x = 0, slip speed u0, with b(0) = ν times its trivial-solution value.
pub fn post_gspot_initial_state(sys: &ExtendedExample, eps: f64, nu: f64, p0: f64, u0: f64) -> Result<InitialState, ExperimentError> {
    let [a1, a2, a3] = [&sys.alpha1, &sys.alpha2, &sys.alpha3].map(|a| a.to_f64());
    let b0 = -(nu * p0 * a2 / (a3 - a1)).abs();
    let y0 = 2.0 * eps * eps * b0 / p0;
    let ic = InitialState::synchronized(sys, vec![0.0, u0, y0, 0.0, p0, b0], y0 / 2.0)
        .map_err(|e| ExperimentError::Numerical(e.to_string()))?;
    Ok(ic)
}

pub fn post_gspot_run(chi: f64, nu: f64, cfg: &ExperimentConfig) -> Result<(PostGspotRow, Trajectory), ExperimentError> {
    let sys = post_gspot_system(chi, cfg.beta[0]);
    let eps = cfg.eps[0];
    let ic = post_gspot_initial_state(&sys, eps, nu, cfg.p0, cfg.u0)?;
    let sim_cfg = SimConfig {
        eps,
        rtol: cfg.rtol,
        atol: cfg.atol,
        t_end: cfg.t_end.unwrap_or(5.0),
        stop_on: vec![EventKind::SlipToStick, EventKind::LiftOff],
        ..SimConfig::default()
    };
    let traj = simulate(&sys, &ic, sim_cfg)?;
    let termination = match traj.end {
        EndReason::Terminal(EventKind::SlipToStick) => Termination::Stick,
        EndReason::Terminal(EventKind::LiftOff) => Termination::LiftOff,
        _ => Termination::Unresolved,
    };
    let row = PostGspotRow {
        chi,
        nu,
        termination,
        t_end: traj.final_time,
        u_end: traj.final_state[1],
        t_iwc: traj.first_event(&[EventKind::IwcOnset]).map(|e| e.t),
    };
    Ok((row, traj))
}

/// χ × ν sweep on the six-state model at the first β; each run stops at stick or lift-off.
pub fn run_post_gspot(cfg: &ExperimentConfig) -> Result<PostGspotReport, ExperimentError> {
    let mut cfg = cfg.clone();
    cfg.validate()?;
    let jobs: Vec<(f64, f64)> = cfg
        .chi
        .iter()
        .flat_map(|&c| cfg.nu.iter().map(move |&n| (c, n)))
        .collect();
    let runs: Vec<(PostGspotRow, Trajectory)> = jobs
        .par_iter()
        .map(|&(c, n)| post_gspot_run(c, n, &cfg))
        .collect::<Result<_, _>>()?;
    let mut files = Vec::new();
    for (row, traj) in &runs {
        files.extend(emit_plotdata(traj, &cfg.out, &format!("post_gspot_chi{}_nu{}", row.chi, row.nu))?);
    }
    let rows: Vec<PostGspotRow> = runs.into_iter().map(|(r, _)| r).collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{}", r.chi),
                format!("{}", r.nu),
                r.termination.as_str().to_string(),
                fmt_f64(r.t_end),
                fmt_f64(r.u_end),
                r.t_iwc.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(
        &cfg.out.join("post_gspot.csv"),
        &["chi", "nu", "termination", "t_end", "u_end", "t_iwc"],
        &table,
    )?;
    files.push("post_gspot.csv".into());
    write_manifest(&cfg.out, "post-gspot", &cfg, &files)?;
    Ok(PostGspotReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_sits_near_trivial_solution() {
        let sys = post_gspot_system(1.0, 0.5);
        let ic = post_gspot_initial_state(&sys, 1e-3, 1.0, 0.5, 70.0).unwrap();
        assert!((ic.p - 0.5).abs() < 1e-12);
        assert!((ic.b + 1.0).abs() < 1e-12);
        assert_eq!(ic.xi[1], 70.0);
    }
}
