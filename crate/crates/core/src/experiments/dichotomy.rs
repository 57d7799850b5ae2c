use rayon::prelude::*;

use super::{fmt_f64, write_csv, write_manifest, ExperimentConfig, ExperimentError};
use crate::contact::make_simple_example;
use crate::gspot::{classify_case, Case};
use crate::hypergeo::{classify_outcome, Outcome};
use crate::ring::Real;
use crate::sim::{perturbed_trivial_start, EndReason, EventKind, SimConfig, Simulator, StepStatus};

/// Which side of the distinguished trajectory a run starts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    LowB,
    HighB,
    OnCanard,
}

impl Side {
    pub fn of_nu(nu: f64) -> Self {
        if nu > 1.0 {
            Side::LowB
        } else if nu < 1.0 {
            Side::HighB
        } else {
            Side::OnCanard
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::LowB => "low-b",
            Side::HighB => "high-b",
            Side::OnCanard => "canard",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyRow {
    pub beta: f64,
    pub nu: f64,
    pub b0: f64,
    pub side: Side,
    /// `None` when the run reached t_end without a terminal event.
    pub outcome: Option<Outcome>,
    pub t_event: Option<f64>,
    /// Sign rule on C₁/Γ(−β) for Case III, IWC for Case I, nothing on the canard.
    pub predicted: Option<Outcome>,
    pub liftoff_events: usize,
}

impl DichotomyRow {
    pub fn outcome_str(&self) -> &'static str {
        self.outcome.map(Outcome::as_str).unwrap_or("none")
    }
}

/// Per-β outcome of each side; `None` when the side is empty or mixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SideSummary {
    pub beta: f64,
    pub low_b: Option<Outcome>,
    pub high_b: Option<Outcome>,
}

impl SideSummary {
    /// The side whose runs all end in IWC while the other side lifts off.
    pub fn impacting_side(&self) -> Option<Side> {
        match (self.low_b, self.high_b) {
            (Some(Outcome::Iwc), Some(Outcome::LiftOff)) => Some(Side::LowB),
            (Some(Outcome::LiftOff), Some(Outcome::Iwc)) => Some(Side::HighB),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyReport {
    pub rows: Vec<DichotomyRow>,
    pub sides: Vec<SideSummary>,
}

impl DichotomyReport {
    pub fn rows_for(&self, beta: f64) -> impl Iterator<Item = &DichotomyRow> {
        self.rows.iter().filter(move |r| r.beta == beta)
    }

    pub fn side(&self, beta: f64) -> Option<&SideSummary> {
        self.sides.iter().find(|s| s.beta == beta)
    }
}

fn predicted(beta: f64, side: Side) -> Result<Option<Outcome>, ExperimentError> {
    Ok(match (classify_case(-1.0, -1.0, -beta), side) {
        (_, Side::OnCanard) => None,
        (Case::I, _) => Some(Outcome::Iwc),
        (Case::III, s) => Some(classify_outcome(beta, s == Side::LowB)?),
        _ => None,
    })
}

/// One run of the four-state model started ν times the trivial b(0).
pub fn dichotomy_run(beta: f64, nu: f64, eps: f64, p0: f64, t_end: f64, rtol: f64, atol: f64) -> Result<DichotomyRow, ExperimentError> {
    let alphas = [-1.0, -1.0, -beta];
    let sys = make_simple_example(Real::int(-1), Real::int(-1), Real::float(-beta));
    let ic = perturbed_trivial_start(alphas, eps, nu, p0);
    let cfg = SimConfig {
        eps,
        rtol,
        atol,
        t_end,
        stop_on: vec![EventKind::IwcOnset, EventKind::LiftOff],
        record_samples: false,
        ..SimConfig::default()
    };
    let mut sim = Simulator::new(&sys, &ic, cfg)?;
    let end = loop {
        if let StepStatus::Finished(end) = sim.step()? {
            break end;
        }
    };
    let (outcome, t_event) = match end {
        EndReason::Terminal(kind) => {
            let t = sim.events().iter().rev().find(|e| e.kind == kind).map(|e| e.t);
            let o = match kind {
                EventKind::LiftOff => Some(Outcome::LiftOff),
                EventKind::IwcOnset => Some(Outcome::Iwc),
                _ => None,
            };
            (o, t)
        }
        EndReason::Reached => (None, None),
    };
    let side = Side::of_nu(nu);
    Ok(DichotomyRow {
        beta,
        nu,
        b0: ic.b,
        side,
        outcome,
        t_event,
        predicted: predicted(beta, side)?,
        liftoff_events: sim.events().iter().filter(|e| e.kind == EventKind::LiftOff).count(),
    })
}

fn summarize(beta: f64, rows: &[DichotomyRow]) -> SideSummary {
    let side_outcome = |side: Side| {
        let outs: Vec<Option<Outcome>> = rows
            .iter()
            .filter(|r| r.beta == beta && r.side == side)
            .map(|r| r.outcome)
            .collect();
        match outs.first() {
            Some(&first) if outs.iter().all(|o| *o == first) => first,
            _ => None,
        }
    };
    SideSummary {
        beta,
        low_b: side_outcome(Side::LowB),
        high_b: side_outcome(Side::HighB),
    }
}

/// Sweeps β × ν on the four-state model, writing `dichotomy_beta{β}.csv` per β.
pub fn run_dichotomy(cfg: &ExperimentConfig) -> Result<DichotomyReport, ExperimentError> {
    let mut cfg = cfg.clone();
    cfg.validate()?;
    let eps = cfg.eps[0];
    let t_end = cfg.t_end.unwrap_or(3.0 * cfg.p0);
    let jobs: Vec<(f64, f64)> = cfg
        .beta
        .iter()
        .flat_map(|&b| cfg.nu.iter().map(move |&n| (b, n)))
        .collect();
    let rows: Vec<DichotomyRow> = jobs
        .par_iter()
        .map(|&(b, n)| dichotomy_run(b, n, eps, cfg.p0, t_end, cfg.rtol, cfg.atol))
        .collect::<Result<_, _>>()?;
    let mut files = Vec::new();
    let mut sides = Vec::new();
    for &beta in &cfg.beta {
        let table: Vec<Vec<String>> = rows
            .iter()
            .filter(|r| r.beta == beta)
            .map(|r| {
                vec![
                    format!("{}", r.nu),
                    r.outcome_str().to_string(),
                    r.t_event.map(fmt_f64).unwrap_or_default(),
                ]
            })
            .collect();
        let name = format!("dichotomy_beta{beta}.csv");
        write_csv(&cfg.out.join(&name), &["nu", "outcome", "t_event"], &table)?;
        files.push(name);
        sides.push(summarize(beta, &rows));
    }
    let detail: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{}", r.beta),
                format!("{}", r.nu),
                fmt_f64(r.b0),
                r.side.as_str().to_string(),
                r.outcome_str().to_string(),
                r.predicted.map(Outcome::as_str).unwrap_or("none").to_string(),
            ]
        })
        .collect();
    write_csv(
        &cfg.out.join("dichotomy_summary.csv"),
        &["beta", "nu", "b0", "side", "outcome", "predicted"],
        &detail,
    )?;
    files.push("dichotomy_summary.csv".into());
    write_manifest(&cfg.out, "dichotomy", &cfg, &files)?;
    Ok(DichotomyReport { rows, sides })
}
