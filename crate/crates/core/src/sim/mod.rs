//! Compliant-contact simulation with mode switching and event location.
//!
//! The integrated state is ξ followed by the extended scalars (p, b, y, v)
//! and the surface deformation z. The extended scalars obey the same
//! equations as P(ξ), B(ξ), Y(ξ), V(ξ) but are carried separately so that
//! the O(ε²) normal gap keeps full relative precision.

mod eliminated;
mod radau;

use std::fmt;
use std::io::Write;

pub use eliminated::{eliminated_oracle, EliminatedSample, FullScalarState};
pub use radau::{DenseSegment, OdeRhs, Radau, RadauOptions};

use crate::contact::{field_value, quantity, stick_fraction, ContactSystem, Field, FrictionModel};
use crate::linalg::{LinalgError, Matrix};
use crate::ring::{Jet, RingError, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("step size collapsed to {h:e} at t = {t}")]
    StepCollapse { t: f64, h: f64 },
    #[error("exceeded the step budget of {0}")]
    MaxSteps(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("initial state has {got} components, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Free,
    PositiveSlip,
    NegativeSlip,
    Stick,
}

impl Mode {
    pub fn in_contact(self) -> bool {
        self != Mode::Free
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Free => "free",
            Mode::PositiveSlip => "positive-slip",
            Mode::NegativeSlip => "negative-slip",
            Mode::Stick => "stick",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    TouchDown,
    LiftOff,
    SlipToStick,
    StickToSlip,
    GspotPassage,
    IwcOnset,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::TouchDown => "touch-down",
            EventKind::LiftOff => "lift-off",
            EventKind::SlipToStick => "slip-to-stick",
            EventKind::StickToSlip => "stick-to-slip",
            EventKind::GspotPassage => "gspot-passage",
            EventKind::IwcOnset => "iwc-onset",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub eps: f64,
    pub rtol: f64,
    /// Absolute tolerance for O(1) components; y and z use atol·ε², v uses atol·ε.
    pub atol: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub event_tol: f64,
    pub max_steps: usize,
    /// Force scale for the IWC threshold; defaults to |α₂/(α₁−α₃)| of the system.
    pub iwc_force_scale: Option<f64>,
    pub stop_on: Vec<EventKind>,
    /// Watch for indefinite-wedge-compression onset at all.
    pub detect_iwc: bool,
    pub record_samples: bool,
    pub h_init: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            eps: 1e-3,
            rtol: 1e-8,
            atol: 1e-10,
            t_start: 0.0,
            t_end: 1.0,
            event_tol: 1e-12,
            max_steps: 2_000_000,
            iwc_force_scale: None,
            stop_on: vec![EventKind::IwcOnset],
            detect_iwc: true,
            record_samples: true,
            h_init: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.eps > 0.0) {
            return Err(SimError::Config("eps must be positive".into()));
        }
        if self.eps < 1e-8 {
            return Err(SimError::Config("eps below the 1e-8 floor".into()));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.event_tol > 0.0) {
            return Err(SimError::Config("tolerances must be positive".into()));
        }
        if !(self.t_end > self.t_start) {
            return Err(SimError::Config("t_end must exceed t_start".into()));
        }
        Ok(())
    }
}

/// Starting point: ξ, the extended scalars and the deformation.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub xi: Vec<f64>,
    pub p: f64,
    pub b: f64,
    pub y: f64,
    pub v: f64,
    pub z: f64,
}

impl InitialState {
    /// Extended scalars synchronized with ξ.
    pub fn synchronized<Y: ContactSystem>(sys: &Y, xi: Vec<f64>, z: f64) -> Result<Self, RingError> {
        Ok(InitialState {
            p: quantity::p(sys, &xi)?,
            b: quantity::b(sys, &xi)?,
            y: sys.gap(&xi)?,
            v: quantity::v(sys, &xi)?,
            z,
            xi,
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = self.xi.clone();
        x.extend([self.p, self.b, self.y, self.v, self.z]);
        x
    }

    pub fn from_vec(x: &[f64], m: usize) -> Self {
        InitialState {
            xi: x[..m].to_vec(),
            p: x[m],
            b: x[m + 1],
            y: x[m + 2],
            v: x[m + 3],
            z: x[m + 4],
        }
    }
}

/// Perturbed start near the trivial contact solution of the four-state model:
/// b(0) = −|ν·p(0)α₂/(α₃−α₁)|, y(0) = 2ε²b(0)/p(0), z(0) = y(0)/2, v(0) = 0.
pub fn perturbed_trivial_start(alphas: [f64; 3], eps: f64, nu: f64, p0: f64) -> InitialState {
    let [a1, a2, a3] = alphas;
    let b0 = -(nu * p0 * a2 / (a3 - a1)).abs();
    let y0 = 2.0 * eps * eps * b0 / p0;
    InitialState {
        xi: vec![p0, b0, y0, 0.0],
        p: p0,
        b: b0,
        y: y0,
        v: 0.0,
        z: y0 / 2.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub mode: Mode,
    pub lambda_n: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndReason {
    Reached,
    Terminal(EventKind),
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub end: EndReason,
    pub final_state: Vec<f64>,
    pub final_time: f64,
    pub final_mode: Mode,
}

impl Trajectory {
    pub fn first_event(&self, kinds: &[EventKind]) -> Option<&Event> {
        self.events.iter().find(|e| kinds.contains(&e.kind))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "mode".into(), "lambdaN".into()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(csv_io)?;
        for s in &self.samples {
            let mut row = vec![fmt_f(s.t), s.mode.to_string(), fmt_f(s.lambda_n)];
            row.extend(s.state.iter().map(|x| fmt_f(*x)));
            w.write_record(&row).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_events_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "kind".into()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(csv_io)?;
        for e in &self.events {
            let mut row = vec![fmt_f(e.t), e.kind.to_string()];
            row.extend(e.state.iter().map(|x| fmt_f(*x)));
            w.write_record(&row).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:e}")
}

fn csv_io(e: csv::Error) -> SimError {
    SimError::Io(std::io::Error::other(e))
}

/// Column names for the integrated state.
pub fn state_names<Y: ContactSystem>(sys: &Y) -> Vec<String> {
    let mut names = sys.state_names();
    names.extend(["ext_p", "ext_b", "ext_y", "ext_v", "z"].map(String::from));
    names
}

/// Right-hand side of the regularized system in a fixed mode.
pub fn vector_field<S: Scalar, Y: ContactSystem>(
    sys: &Y,
    mode: Mode,
    eps: f64,
    x: &[S],
) -> Result<Vec<S>, RingError> {
    let m = sys.dim();
    let xi = &x[..m];
    let (p, b, y, v, z) = (
        x[m].clone(),
        x[m + 1].clone(),
        x[m + 2].clone(),
        x[m + 3].clone(),
        x[m + 4].clone(),
    );
    let f = sys.drift(xi)?;
    let a1 = quantity::alpha1(sys, xi)?;
    let a2 = quantity::alpha2(sys, xi)?;
    let inv_eps = S::from_f64(1.0 / eps);
    let mut out = Vec::with_capacity(m + 5);
    if mode == Mode::Free {
        out.extend(f);
        out.extend([a1, a2, v, b, -(z * inv_eps)]);
        return Ok(out);
    }
    let lambda = (z.clone() - y.clone()) * S::from_f64(1.0 / (eps * eps));
    let slip_p = field_value(sys, Field::PositiveSlip, xi)?;
    let a3 = quantity::alpha3(sys, xi)?;
    let dz = (y - S::from_i64(2) * z) * inv_eps;
    if mode == Mode::PositiveSlip {
        out.extend(f.into_iter().zip(slip_p).map(|(fi, gi)| fi + lambda.clone() * gi));
        out.extend([
            a1,
            a2 - a3 * lambda.clone(),
            v,
            b + p * lambda,
            dz,
        ]);
        return Ok(out);
    }
    let c = match mode {
        Mode::NegativeSlip => S::from_i64(0),
        _ => stick_fraction(sys, xi, &lambda)?,
    };
    let one_c = S::from_i64(1) - c.clone();
    let slip_m = field_value(sys, Field::NegativeSlip, xi)?;
    let a3m = quantity::alpha3_minus(sys, xi)?;
    let pm = quantity::p_minus(sys, xi)?;
    let dp_m = quantity::p_rate_minus(sys, xi)?;
    out.extend(
        f.into_iter()
            .zip(slip_p.into_iter().zip(slip_m))
            .map(|(fi, (gp, gm))| fi + lambda.clone() * (c.clone() * gp + one_c.clone() * gm)),
    );
    out.extend([
        a1 + lambda.clone() * one_c.clone() * dp_m,
        a2 - lambda.clone() * (c.clone() * a3 + one_c.clone() * a3m),
        v,
        b + lambda * (c * p + one_c * pm),
        dz,
    ]);
    Ok(out)
}

/// Fixed-mode right-hand side bound to a system.
pub struct ModeRhs<'a, Y> {
    pub sys: &'a Y,
    pub mode: Mode,
    pub eps: f64,
}

impl<Y: ContactSystem> OdeRhs for ModeRhs<'_, Y> {
    fn dim(&self) -> usize {
        self.sys.dim() + 5
    }

    fn eval(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>, SimError> {
        Ok(vector_field(self.sys, self.mode, self.eps, y)?)
    }

    fn jacobian(&self, _t: f64, y: &[f64]) -> Result<Matrix<f64>, SimError> {
        let n = y.len();
        let seeded: Vec<Jet<f64>> = y
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(v, i, n))
            .collect();
        let out = vector_field(self.sys, self.mode, self.eps, &seeded)?;
        let mut m = Matrix::zeros(n);
        for (r, jet) in out.iter().enumerate() {
            for c in 0..n {
                m.set(r, c, jet.partial(c));
            }
        }
        Ok(m)
    }
}

/// Contact mode at a state given the current sign of u and the normal force.
///
/// Returns the mode and the stick fraction c (1 for positive slip, 0 for negative).
pub fn detect_mode_transition<Y: ContactSystem>(
    sys: &Y,
    x: &[f64],
    eps: f64,
) -> Result<(Mode, f64), RingError> {
    let m = sys.dim();
    let (y, z) = (x[m + 2], x[m + 4]);
    if y >= z {
        return Ok((Mode::Free, 0.0));
    }
    let lambda = (z - y) / (eps * eps);
    contact_mode(sys, &x[..m], lambda)
}

/// Slip or stick decision at normal force `lambda`.
pub fn contact_mode<Y: ContactSystem>(sys: &Y, xi: &[f64], lambda: f64) -> Result<(Mode, f64), RingError> {
    if sys.friction_model() == FrictionModel::PositiveSlipOnly {
        return Ok((Mode::PositiveSlip, 1.0));
    }
    let u = quantity::u(sys, xi)?;
    if u > 0.0 {
        return Ok((Mode::PositiveSlip, 1.0));
    }
    if u < 0.0 {
        return Ok((Mode::NegativeSlip, 0.0));
    }
    let c = stick_fraction(sys, xi, &lambda)?;
    if (0.0..=1.0).contains(&c) {
        return Ok((Mode::Stick, c));
    }
    // u stays at zero only inside [0,1]; otherwise slip starts in the direction of u̇
    let a = quantity::a(sys, xi)?;
    let kp = quantity::k_plus(sys, xi)?;
    if a + lambda * kp > 0.0 {
        Ok((Mode::PositiveSlip, 1.0))
    } else {
        Ok((Mode::NegativeSlip, 0.0))
    }
}

/// Normal force carried by a state in the given mode.
pub fn normal_force(x: &[f64], m: usize, eps: f64, mode: Mode) -> f64 {
    if mode.in_contact() {
        ((x[m + 4] - x[m + 2]) / (eps * eps)).max(0.0)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Watch {
    TouchDown,
    LiftOff,
    SlipStop,
    StickLow,
    StickHigh,
    Gspot,
}

/// Outcome of a single `Simulator::step`.
#[derive(Debug, Clone, PartialEq)]
pub enum StepStatus {
    Running,
    Finished(EndReason),
}

/// Step-wise driver; `run` loops it to completion.
pub struct Simulator<'a, Y: ContactSystem> {
    sys: &'a Y,
    cfg: SimConfig,
    radau: Radau,
    mode: Mode,
    m: usize,
    iwc_threshold: f64,
    lambda_history: Vec<f64>,
    last_segment: Option<DenseSegment>,
    samples: Vec<Sample>,
    events: Vec<Event>,
    finished: Option<EndReason>,
}

impl<'a, Y: ContactSystem> Simulator<'a, Y> {
    pub fn new(sys: &'a Y, ic: &InitialState, cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let m = sys.dim();
        if ic.xi.len() != m {
            return Err(SimError::Dimension {
                got: ic.xi.len(),
                expected: m,
            });
        }
        let x0 = ic.to_vec();
        let (mode, _) = detect_mode_transition(sys, &x0, cfg.eps)?;
        let eps = cfg.eps;
        let mut atol = vec![cfg.atol; m + 5];
        atol[m + 2] = cfg.atol * eps * eps;
        atol[m + 4] = cfg.atol * eps * eps;
        atol[m + 3] = cfg.atol * eps;
        let opts = RadauOptions {
            rtol: cfg.rtol,
            atol,
            h_init: cfg.h_init.unwrap_or(eps * 1e-2),
            h_max: (cfg.t_end - cfg.t_start) / 4.0,
        };
        let scale = cfg.iwc_force_scale.unwrap_or_else(|| {
            sys.reference_alphas()
                .map(|[a1, a2, a3]| (a2 / (a1 - a3)).abs())
                .filter(|s| s.is_finite() && *s > 0.0)
                .unwrap_or(1.0)
        });
        let mut sim = Simulator {
            sys,
            radau: Radau::new(cfg.t_start, x0.clone(), opts),
            iwc_threshold: 1e3 * scale,
            cfg,
            mode,
            m,
            lambda_history: Vec::new(),
            last_segment: None,
            samples: Vec::new(),
            events: Vec::new(),
            finished: None,
        };
        sim.record(sim.cfg.t_start, x0);
        Ok(sim)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn time(&self) -> f64 {
        self.radau.t
    }

    pub fn state(&self) -> &[f64] {
        &self.radau.y
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Dense output of the most recent accepted step.
    pub fn last_segment(&self) -> Option<&DenseSegment> {
        self.last_segment.as_ref()
    }

    fn rhs(&self) -> ModeRhs<'a, Y> {
        ModeRhs {
            sys: self.sys,
            mode: self.mode,
            eps: self.cfg.eps,
        }
    }

    fn record(&mut self, t: f64, x: Vec<f64>) {
        if !self.cfg.record_samples {
            return;
        }
        if self.samples.last().is_some_and(|s| s.t >= t) {
            return;
        }
        self.samples.push(Sample {
            t,
            mode: self.mode,
            lambda_n: normal_force(&x, self.m, self.cfg.eps, self.mode),
            state: x,
        });
    }

    fn watches(&self) -> Vec<Watch> {
        let mut w = vec![Watch::Gspot];
        match self.mode {
            Mode::Free => w.push(Watch::TouchDown),
            Mode::PositiveSlip | Mode::NegativeSlip => {
                w.push(Watch::LiftOff);
                if self.sys.friction_model() == FrictionModel::StickSlip {
                    w.push(Watch::SlipStop);
                }
            }
            Mode::Stick => w.extend([Watch::LiftOff, Watch::StickLow, Watch::StickHigh]),
        }
        w
    }

    /// Sign function; an event fires when it moves from positive to non-positive
    /// (either direction for the G-spot passage).
    fn watch_value(&self, w: Watch, x: &[f64]) -> Result<f64, SimError> {
        let m = self.m;
        let (y, z) = (x[m + 2], x[m + 4]);
        Ok(match w {
            Watch::TouchDown => y - z,
            Watch::LiftOff => z - y,
            Watch::SlipStop => {
                let u = quantity::u(self.sys, &x[..m])?;
                if self.mode == Mode::NegativeSlip {
                    -u
                } else {
                    u
                }
            }
            Watch::StickLow | Watch::StickHigh => {
                let lambda = (z - y) / (self.cfg.eps * self.cfg.eps);
                let c = stick_fraction(self.sys, &x[..m], &lambda)?;
                if w == Watch::StickLow {
                    c
                } else {
                    1.0 - c
                }
            }
            Watch::Gspot => x[m],
        })
    }

    fn fired(w: Watch, g0: f64, g1: f64) -> bool {
        match w {
            Watch::Gspot => (g0 > 0.0 && g1 <= 0.0) || (g0 < 0.0 && g1 >= 0.0),
            _ => g0 > 0.0 && g1 <= 0.0,
        }
    }

    fn locate(&self, w: Watch, seg: &DenseSegment, g0: f64) -> Result<f64, SimError> {
        let (mut lo, mut hi) = (seg.t0, seg.t1());
        while hi - lo > self.cfg.event_tol && hi - lo > 4.0 * f64::EPSILON * hi.abs().max(1e-300) {
            let mid = 0.5 * (lo + hi);
            let g = self.watch_value(w, &seg.eval(mid))?;
            if Self::fired(w, g0, g) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Advances one accepted integrator step, handling any event inside it.
    pub fn step(&mut self) -> Result<StepStatus, SimError> {
        if let Some(end) = self.finished {
            return Ok(StepStatus::Finished(end));
        }
        if self.radau.accepted + self.events.len() >= self.cfg.max_steps {
            return Err(SimError::MaxSteps(self.cfg.max_steps));
        }
        let watches = self.watches();
        let x0 = self.radau.y.clone();
        let g0: Vec<f64> = watches
            .iter()
            .map(|&w| self.watch_value(w, &x0))
            .collect::<Result<_, _>>()?;
        let t0 = self.radau.t;
        let rhs = self.rhs();
        let snapshot = (self.radau.t, self.radau.y.clone(), self.radau.h);
        let seg = self.radau.step(&rhs, self.cfg.t_end - t0)?;
        let x1 = seg.end_state();

        let mut hits: Vec<(f64, Watch)> = Vec::new();
        for (k, &w) in watches.iter().enumerate() {
            let g1 = self.watch_value(w, &x1)?;
            if Self::fired(w, g0[k], g1) {
                hits.push((self.locate(w, &seg, g0[k])?, w));
            }
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.last_segment = Some(seg.clone());

        for (te, w) in hits {
            if w == Watch::Gspot {
                self.events.push(Event {
                    t: te,
                    kind: EventKind::GspotPassage,
                    state: seg.eval(te),
                });
                continue;
            }
            // rewind and land exactly on the event time
            let mut probe = Radau::new(snapshot.0, snapshot.1.clone(), self.radau_opts());
            probe.h = snapshot.2;
            let xe = probe
                .trial_step(&rhs, te - t0)?
                .unwrap_or_else(|| seg.eval(te));
            return self.switch_mode(w, te, xe);
        }

        self.record(seg.t1(), x1.clone());
        if self.mode.in_contact() && self.cfg.detect_iwc && self.check_iwc(&x1) {
            self.events.push(Event {
                t: seg.t1(),
                kind: EventKind::IwcOnset,
                state: x1,
            });
            if self.cfg.stop_on.contains(&EventKind::IwcOnset) {
                self.finished = Some(EndReason::Terminal(EventKind::IwcOnset));
                return Ok(StepStatus::Finished(EndReason::Terminal(EventKind::IwcOnset)));
            }
            self.cfg.detect_iwc = false;
        }
        if self.radau.t >= self.cfg.t_end {
            self.finished = Some(EndReason::Reached);
            return Ok(StepStatus::Finished(EndReason::Reached));
        }
        Ok(StepStatus::Running)
    }

    fn radau_opts(&self) -> RadauOptions {
        let m = self.m;
        let eps = self.cfg.eps;
        let mut atol = vec![self.cfg.atol; m + 5];
        atol[m + 2] = self.cfg.atol * eps * eps;
        atol[m + 4] = self.cfg.atol * eps * eps;
        atol[m + 3] = self.cfg.atol * eps;
        RadauOptions {
            rtol: self.cfg.rtol,
            atol,
            h_init: self.radau.h,
            h_max: (self.cfg.t_end - self.cfg.t_start) / 4.0,
        }
    }

    fn check_iwc(&mut self, x: &[f64]) -> bool {
        let lambda = normal_force(x, self.m, self.cfg.eps, self.mode);
        self.lambda_history.push(lambda);
        let n = self.lambda_history.len();
        if n > 4 {
            self.lambda_history.drain(..n - 4);
        }
        let h = &self.lambda_history;
        let growing = h.len() == 4 && h.windows(2).all(|w| w[1] > w[0]);
        let v = x[self.m + 3];
        lambda > self.iwc_threshold && v < 0.0 && growing
    }

    fn switch_mode(&mut self, w: Watch, te: f64, xe: Vec<f64>) -> Result<StepStatus, SimError> {
        self.record(te, xe.clone());
        let m = self.m;
        let (kind, next) = match w {
            Watch::TouchDown => {
                let lambda = ((xe[m + 4] - xe[m + 2]) / (self.cfg.eps * self.cfg.eps)).max(0.0);
                (EventKind::TouchDown, contact_mode(self.sys, &xe[..m], lambda)?.0)
            }
            Watch::LiftOff => (EventKind::LiftOff, Mode::Free),
            Watch::SlipStop => {
                let lambda = normal_force(&xe, m, self.cfg.eps, self.mode);
                let c = stick_fraction(self.sys, &xe[..m], &lambda)?;
                if (0.0..=1.0).contains(&c) {
                    (EventKind::SlipToStick, Mode::Stick)
                } else {
                    let a = quantity::a(self.sys, &xe[..m])?;
                    let kp = quantity::k_plus(self.sys, &xe[..m])?;
                    let reverse = if a + lambda * kp > 0.0 {
                        Mode::PositiveSlip
                    } else {
                        Mode::NegativeSlip
                    };
                    // a slip reversal is not one of the reported kinds
                    self.mode = reverse;
                    self.restart(te, xe);
                    return Ok(StepStatus::Running);
                }
            }
            Watch::StickLow => (EventKind::StickToSlip, Mode::NegativeSlip),
            Watch::StickHigh => (EventKind::StickToSlip, Mode::PositiveSlip),
            Watch::Gspot => unreachable!(),
        };
        self.events.push(Event {
            t: te,
            kind,
            state: xe.clone(),
        });
        self.mode = next;
        self.lambda_history.clear();
        self.restart(te, xe);
        if self.cfg.stop_on.contains(&kind) {
            self.finished = Some(EndReason::Terminal(kind));
            return Ok(StepStatus::Finished(EndReason::Terminal(kind)));
        }
        Ok(StepStatus::Running)
    }

    fn restart(&mut self, t: f64, x: Vec<f64>) {
        let h = self.radau.h.max(self.cfg.eps * 1e-3);
        self.radau.reset(t, x, h);
    }

    pub fn run(mut self) -> Result<Trajectory, SimError> {
        let end = loop {
            if let StepStatus::Finished(end) = self.step()? {
                break end;
            }
        };
        Ok(Trajectory {
            names: state_names(self.sys),
            final_state: self.radau.y.clone(),
            final_time: self.radau.t,
            final_mode: self.mode,
            samples: self.samples,
            events: self.events,
            end,
        })
    }
}

/// Integrates the regularized system from `ic` under `cfg`.
pub fn simulate<Y: ContactSystem>(sys: &Y, ic: &InitialState, cfg: SimConfig) -> Result<Trajectory, SimError> {
    Simulator::new(sys, ic, cfg)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{make_extended_example, make_simple_example};
    use crate::ring::Real;

    fn simple(beta: f64) -> crate::contact::SimpleExample {
        make_simple_example(Real::int(-1), Real::int(-1), Real::float(-beta))
    }

    #[test]
    fn mode_detection_examples() {
        let ext = make_extended_example(Real::int(0), Real::int(-1), Real::int(-1), Real::ratio(-1, 2));
        let eps: f64 = 1e-2;
        // u = 0, λ = 1
        let mut x = vec![0.0, 0.0, 0.0, 0.0, 0.2, -0.4];
        x.extend([0.2, -0.4, -eps * eps, 0.0, 0.0]);
        let (mode, c) = detect_mode_transition(&ext, &x, eps).unwrap();
        assert_eq!(mode, Mode::Stick);
        assert!((c - 2.0 / 3.0).abs() < 1e-12);
        x[1] = 1.0;
        assert_eq!(detect_mode_transition(&ext, &x, eps).unwrap().0, Mode::PositiveSlip);
        let iy = x.len() - 3;
        x[iy] = 1.0;
        assert_eq!(detect_mode_transition(&ext, &x, eps).unwrap(), (Mode::Free, 0.0));
    }

    #[test]
    fn lambda_nonnegative_and_times_increase() {
        let sys = simple(1.5);
        let eps = 1e-2;
        let ic = perturbed_trivial_start([-1.0, -1.0, -1.5], eps, 4.0, 0.5);
        let cfg = SimConfig {
            eps,
            t_end: 1.0,
            ..SimConfig::default()
        };
        let tr = simulate(&sys, &ic, cfg).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        assert!(tr.samples.iter().all(|s| s.lambda_n >= 0.0));
        assert!(tr.first_event(&[EventKind::GspotPassage]).is_some());
    }

    #[test]
    fn trivial_solution_is_preserved() {
        let ext = make_extended_example(Real::int(0), Real::int(-1), Real::int(-1), Real::ratio(-3, 2));
        let eps = 1e-3;
        let (a1, a2, a3) = (-1.0, -1.0, -1.5);
        let lam = a2 / (a3 - a1);
        let p0 = 0.5;
        let t0 = p0 / a1;
        let bbar = |t: f64| (a2 - a3 * lam) * t;
        let y0 = -2.0 * eps * eps * lam;
        let xi = vec![0.0, 2.0, y0, 0.0, p0, bbar(t0)];
        let ic = InitialState {
            xi,
            p: p0,
            b: bbar(t0),
            y: y0,
            v: 0.0,
            z: -eps * eps * lam,
        };
        let cfg = SimConfig {
            eps,
            rtol: 1e-9,
            t_start: t0,
            t_end: 0.0,
            ..SimConfig::default()
        };
        let tr = simulate(&ext, &ic, cfg.clone()).unwrap();
        for s in &tr.samples {
            let dev = (s.state[7] - bbar(s.t)).abs();
            assert!(dev <= 10.0 * cfg.rtol * bbar(s.t).abs() + 1e-12, "t={} dev={dev}", s.t);
        }
    }

    #[test]
    fn free_flight_touch_down_and_lift_off() {
        let sys = simple(0.5);
        let eps = 1e-2;
        // start above the surface moving down with p > 0 (contact pushes back)
        let ic = InitialState {
            xi: vec![5.0, -1.0, 0.01, -0.1],
            p: 5.0,
            b: -1.0,
            y: 0.01,
            v: -0.1,
            z: 0.0,
        };
        let cfg = SimConfig {
            eps,
            t_end: 0.5,
            ..SimConfig::default()
        };
        let tr = simulate(&sys, &ic, cfg).unwrap();
        assert_eq!(tr.events[0].kind, EventKind::TouchDown);
        let td = &tr.events[0];
        assert!((td.state[6] - td.state[8]).abs() < 1e-12);
    }
}
