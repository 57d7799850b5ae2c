use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};

use painleve::canard::{expand, export, ExactExpansion, FloatExpansion};
use painleve::contact::{BuiltinSystem, ContactSystem};
use painleve::experiments::{
    build_system, emit_plotdata, gspot_guess, oscillator_initial_state, post_gspot_initial_state, run_dichotomy,
    run_oscillator_verify, run_post_gspot, run_scaling_study, write_manifest, ExperimentConfig, ExperimentError, Study, SystemId,
};
use painleve::gspot::{beta_is_degenerate, classify_case, find_gspot, Case, Pinning};
use painleve::hypergeo::classify_outcome;
use painleve::sim::{perturbed_trivial_start, simulate, SimConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_MISMATCH: u8 = 4;
const EXIT_IO: u8 = 5;

/// Frictional contact through the G-spot: simulation, expansion and sweeps.
///
/// Worker threads for the sweeps follow RAYON_NUM_THREADS.
#[derive(Parser)]
#[command(name = "painleve", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    params: Params,
}

#[derive(Subcommand)]
enum Verb {
    /// Integrate one run of the compliant model and write its samples and events.
    Simulate,
    /// Locate the G-spot and print its α's, case and conditioning.
    FindGspot,
    /// Case and predicted outcome on each side of the distinguished trajectory.
    Classify,
    /// Polynomial expansion of the distinguished trajectory to the given order.
    Expand,
    /// ε sweep with power-law fits of the inner deviations.
    ScalingStudy,
    /// Lift-off versus IWC across β and ν.
    Dichotomy,
    /// Stick versus lift-off after the tangential shock.
    PostGspot,
    /// Oscillator runs against the expansion and against Θ.
    OscillatorVerify,
}

/// Every flag mirrors a key of the flat config file; flags win.
#[derive(Args)]
struct Params {
    /// simple | extended | oscillator
    #[arg(long, global = true)]
    system: Option<String>,
    /// Comma-separated list; fractions such as 7/3 are accepted.
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Oscillator ψ-spring stiffness in units of m₁g/l.
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa: Option<String>,
    /// Coupling of the six-state model; comma-separated list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    chi: Option<String>,
    /// Compliance scale ε; comma-separated list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps: Option<String>,
    /// Initial b as a multiple of its trivial value; comma-separated list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    nu: Option<String>,
    /// Expansion order M (terms δ⁰ … δ^{M−1}).
    #[arg(long, global = true)]
    order: Option<String>,
    /// End time, or `default` for the per-verb choice.
    #[arg(long = "t-end", global = true, allow_hyphen_values = true)]
    t_end: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Flat `key = value` file applied before the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn numerical(e: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            err: e.into(),
        }
    }

    fn mismatch(msg: String) -> Self {
        Failure {
            code: EXIT_MISMATCH,
            err: anyhow!(msg),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match e {
            ExperimentError::Config(_) => EXIT_CONFIG,
            ExperimentError::Io { .. } => EXIT_IO,
            _ => EXIT_NUMERICAL,
        };
        Failure { code, err: e.into() }
    }
}

type Outcome = Result<(), Failure>;

fn study(verb: &Verb) -> Study {
    match verb {
        Verb::ScalingStudy => Study::Scaling,
        Verb::PostGspot => Study::PostGspot,
        Verb::OscillatorVerify => Study::Oscillator,
        _ => Study::Dichotomy,
    }
}

fn load_config(verb: &Verb, p: &Params) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = ExperimentConfig::preset(study(verb));
    if let Some(path) = &p.config {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::Io {
            path: path.clone(),
            source: e,
        })?;
        cfg.merge_text(&text)?;
    }
    let flags = [
        ("system", &p.system),
        ("beta", &p.beta),
        ("kappa", &p.kappa),
        ("chi", &p.chi),
        ("eps", &p.eps),
        ("nu", &p.nu),
        ("order", &p.order),
        ("t_end", &p.t_end),
        ("out", &p.out),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn first_system(cfg: &ExperimentConfig) -> BuiltinSystem {
    build_system(cfg.system, cfg.beta[0], cfg.kappa, cfg.chi[0])
}

fn cmd_simulate(cfg: &ExperimentConfig) -> Outcome {
    let sys = first_system(cfg);
    let eps = cfg.eps[0];
    let nu = cfg.nu[0];
    let (ic, t_end) = match &sys {
        BuiltinSystem::Simple(s) => {
            let a = s.reference_alphas().expect("simple example has constant α's");
            (perturbed_trivial_start(a, eps, nu, cfg.p0), 3.0 * cfg.p0)
        }
        BuiltinSystem::Extended(e) => (post_gspot_initial_state(e, eps, nu, cfg.p0, cfg.u0)?, 5.0),
        BuiltinSystem::Oscillator(o) => (oscillator_initial_state(o, eps, 0.1, cfg.phi_dot)?, 0.3),
    };
    let sim_cfg = SimConfig {
        eps,
        rtol: cfg.rtol,
        atol: cfg.atol,
        t_end: cfg.t_end.unwrap_or(t_end),
        ..SimConfig::default()
    };
    let traj = simulate(&sys, &ic, sim_cfg).map_err(Failure::numerical)?;
    let files = emit_plotdata(&traj, &cfg.out, "trajectory")?;
    write_manifest(&cfg.out, "simulate", cfg, &files)?;
    println!("{}: {:?} at t = {:.9}", sys.label(), traj.end, traj.final_time);
    for e in &traj.events {
        println!("  {:<14} t = {:.12}", e.kind.as_str(), e.t);
    }
    Ok(())
}

fn cmd_find_gspot(cfg: &ExperimentConfig) -> Outcome {
    for &beta in &cfg.beta {
        let sys = build_system(cfg.system, beta, cfg.kappa, cfg.chi[0]);
        let info = find_gspot(&sys, &Pinning::Auto, &gspot_guess(&sys)).map_err(Failure::numerical)?;
        println!("# {}", sys.label());
        print!("{}", info.to_text());
    }
    Ok(())
}

fn cmd_classify(cfg: &ExperimentConfig) -> Outcome {
    println!("beta,case,low_b,high_b");
    for &beta in &cfg.beta {
        let [a1, a2, a3] = match cfg.system {
            SystemId::Oscillator => {
                let sys = build_system(cfg.system, beta, cfg.kappa, cfg.chi[0]);
                find_gspot(&sys, &Pinning::Auto, &gspot_guess(&sys))
                    .map_err(Failure::numerical)?
                    .alphas()
            }
            _ => [-1.0, -1.0, -beta],
        };
        let case = classify_case(a1, a2, a3);
        let ratio = a3 / a1;
        let side = |low: bool| -> Result<&'static str, Failure> {
            Ok(match case {
                Case::I | Case::II => "iwc",
                Case::III if beta_is_degenerate(ratio) => "degenerate",
                Case::III => classify_outcome(ratio, low).map_err(Failure::numerical)?.as_str(),
                Case::None => "none",
            })
        };
        println!("{beta},{case},{},{}", side(true)?, side(false)?);
    }
    Ok(())
}

fn cmd_expand(cfg: &ExperimentConfig) -> Outcome {
    let sys = first_system(cfg);
    let info = find_gspot(&sys, &Pinning::Auto, &gspot_guess(&sys)).map_err(Failure::numerical)?;
    let text = if sys.is_exact() {
        let e: ExactExpansion = expand(&sys, &info, cfg.order).map_err(Failure::numerical)?;
        export(&e)
    } else {
        let e: FloatExpansion = expand(&sys, &info, cfg.order).map_err(Failure::numerical)?;
        export(&e)
    };
    let path = cfg.out.join("expansion.txt");
    fs::create_dir_all(&cfg.out)
        .and_then(|_| fs::write(&path, &text))
        .map_err(|e| Failure::from(ExperimentError::Io { path: path.clone(), source: e }))?;
    write_manifest(&cfg.out, "expand", cfg, &["expansion.txt".into()])?;
    print!("{text}");
    Ok(())
}

fn cmd_scaling(cfg: &ExperimentConfig) -> Outcome {
    let reports = run_scaling_study(cfg)?;
    println!("beta,quantity,measured,theory,r2,ci_lo,ci_hi");
    let mut off = Vec::new();
    for r in &reports {
        for f in &r.fits {
            println!(
                "{},{},{:.5},{:.5},{:.6},{:.5},{:.5}",
                r.beta, f.quantity, f.gamma, f.theory, f.r2, f.ci.0, f.ci.1
            );
            if (f.gamma - f.theory).abs() > 0.02 {
                off.push(format!("β={} {}", r.beta, f.quantity));
            }
        }
    }
    if off.is_empty() {
        Ok(())
    } else {
        Err(Failure::mismatch(format!("exponents off by more than 0.02: {}", off.join(", "))))
    }
}

fn cmd_dichotomy(cfg: &ExperimentConfig) -> Outcome {
    let report = run_dichotomy(cfg)?;
    println!("beta,nu,side,outcome,predicted");
    let mut off = Vec::new();
    for r in &report.rows {
        let predicted = r.predicted.map(|o| o.as_str()).unwrap_or("none");
        println!("{},{},{},{},{}", r.beta, r.nu, r.side.as_str(), r.outcome_str(), predicted);
        if r.predicted.is_some() && r.predicted != r.outcome {
            off.push(format!("β={} ν={}", r.beta, r.nu));
        }
    }
    for s in &report.sides {
        let side = s.impacting_side().map(|s| s.as_str()).unwrap_or("neither");
        println!("# beta {}: impacting side {side}", s.beta);
    }
    if off.is_empty() {
        Ok(())
    } else {
        Err(Failure::mismatch(format!("outcome differs from the sign rule: {}", off.join(", "))))
    }
}

fn cmd_post_gspot(cfg: &ExperimentConfig) -> Outcome {
    let report = run_post_gspot(cfg)?;
    println!("chi,nu,termination,t_end,u_end");
    for r in &report.rows {
        println!("{},{},{},{:.9},{:.6e}", r.chi, r.nu, r.termination.as_str(), r.t_end, r.u_end);
    }
    Ok(())
}

fn cmd_oscillator(cfg: &ExperimentConfig) -> Outcome {
    let r = run_oscillator_verify(cfg)?;
    print!("{}", r.gspot.to_text());
    for c in &r.cases {
        let events: Vec<String> = c.events.iter().map(|(k, t)| format!("{}@{t:.6}", k.as_str())).collect();
        println!("{}: {}", c.label, events.join(" "));
    }
    println!("overlay max relative deviation {:.3e} over {} points", r.overlay_max_rel, r.overlay_points);
    println!("theta max relative deviation {:.3e} over {} points", r.theta_max_rel, r.theta_points);
    if r.overlay_max_rel > 1e-3 || r.theta_max_rel > 0.2 {
        return Err(Failure::mismatch("oscillator comparison outside tolerance".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let cfg = load_config(&cli.verb, &cli.params)?;
    match cli.verb {
        Verb::Simulate => cmd_simulate(&cfg),
        Verb::FindGspot => cmd_find_gspot(&cfg),
        Verb::Classify => cmd_classify(&cfg),
        Verb::Expand => cmd_expand(&cfg),
        Verb::ScalingStudy => cmd_scaling(&cfg),
        Verb::Dichotomy => cmd_dichotomy(&cfg),
        Verb::PostGspot => cmd_post_gspot(&cfg),
        Verb::OscillatorVerify => cmd_oscillator(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
