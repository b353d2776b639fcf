//! Batch experiment runner: regret sweeps, capacity solves, and
//! closed-form tables, all file-driven and deterministic.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 certificate failure,
//! 3 numeric failure.

mod config;
mod output;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{ExperimentConfig, PredictorConfig, VariantConfig, VMode};
use output::{fmt_g17, Csv};
use regretlab::discrete::{
    kemperman_capacity, misspec_capacity, saddle_certificate, sandwich_certificate,
    DiscreteInstance,
};
use regretlab::regret::{pac_regret, realized_regret, RegretEstimate, Variant};
use regretlab::theory::{
    entropy_robustness_bound_schedule, gamma_n_interval, hilbert_brick_upper, i_n,
    jeffreys_shtarkov_kl,
};
use regretlab::Error;

#[derive(Parser)]
#[command(name = "regretlab", version, about = "minimax-regret prediction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration
    #[arg(long, global = true)]
    config: Option<String>,
    /// override the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker threads (0 = all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// output path (default stdout)
    #[arg(long, global = true)]
    out: Option<String>,
    /// override replicate count
    #[arg(long, global = true)]
    reps: Option<u64>,
    /// override the horizon list, comma-separated
    #[arg(long, global = true)]
    n: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo regret rows for the configured predictors
    Regret,
    /// Solve a finite-alphabet capacity instance and certify it
    Capacity,
    /// Tabulate the closed-form and quadrature reference quantities
    Theory,
    /// Regret rows for a default predictor panel across horizons
    Sweep,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 1, message: msg.into() }
    }
    fn certificate(msg: impl Into<String>) -> Self {
        Self { code: 2, message: msg.into() }
    }
    fn numeric(msg: impl Into<String>) -> Self {
        Self { code: 3, message: msg.into() }
    }

    fn from_lib(e: Error) -> Self {
        match e {
            Error::QuadratureFailed { .. } | Error::MaxItersExceeded { .. } => {
                Self::numeric(e.to_string())
            }
            Error::HypothesisViolated(_) => Self::certificate(e.to_string()),
            _ => Self::usage(e.to_string()),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version on stdout with code 0; real usage
            // errors must exit 1
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(f) = run(cli) {
        eprintln!("error: {}", f.message);
        std::process::exit(f.code);
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path).map_err(Failure::usage)?,
        None => ExperimentConfig::default(),
    };
    // flag-wins overrides
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(r) = cli.reps {
        cfg.reps = r;
    }
    if let Some(list) = &cli.n {
        cfg.horizons = list
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Failure::usage(format!("--n: {e}"))))
            .collect::<Result<_, _>>()?;
    }
    cfg.validate().map_err(Failure::usage)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if cfg.workers > 0 {
        pool = pool.num_threads(cfg.workers);
    }
    let pool = pool.build().map_err(|e| Failure::usage(e.to_string()))?;

    let text = pool.install(|| match cli.command {
        Command::Regret => run_regret(&cfg, false),
        Command::Sweep => run_regret(&cfg, true),
        Command::Capacity => run_capacity(&cfg),
        Command::Theory => run_theory(&cfg),
    })?;

    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {path}: {e}")))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Serialization used for the footer hash. Worker count and destination
/// path never affect the numbers, so both are normalized out to keep
/// output files byte-identical across machines and runs.
fn config_json(cfg: &ExperimentConfig) -> String {
    let mut hashed = cfg.clone();
    hashed.workers = 0;
    hashed.out = None;
    serde_json::to_string(&hashed).expect("config serializes")
}

/// The panel used by `sweep` when the config lists no predictors:
/// the baseline, the Bayes mixture, and the robust mixture with its
/// published defaults.
fn default_panel() -> Vec<PredictorConfig> {
    vec![
        PredictorConfig::Shtarkov { tau: 0.0, v_mode: VMode::Fixed, v: Some(1.0), beta: None },
        PredictorConfig::Jeffreys,
        PredictorConfig::Robust {
            lambda: 0.01,
            tau: 0.05,
            alpha: 1.0,
            v_mode: VMode::Schedule,
            v: None,
            beta: Some(1.0),
        },
    ]
}

fn run_regret(cfg: &ExperimentConfig, sweep: bool) -> Result<String, Failure> {
    let theta_box = cfg.theta_box().map_err(Failure::usage)?;
    let d = theta_box.dim();
    let predictors = if cfg.predictors.is_empty() {
        if sweep {
            default_panel()
        } else {
            return Err(Failure::usage("config lists no predictors"));
        }
    } else {
        cfg.predictors.clone()
    };
    let variants = if cfg.variants.is_empty() {
        vec![VariantConfig::Pac]
    } else {
        cfg.variants.clone()
    };
    if cfg.horizons.is_empty() {
        return Err(Failure::usage("config lists no horizons"));
    }

    let mut rows: Vec<(usize, String, Vec<String>)> = Vec::new();
    for &n in &cfg.horizons {
        let gen = cfg.generator(&theta_box, n).map_err(Failure::usage)?;
        for spec in &predictors {
            let predictor =
                cfg.build_predictor(spec, &theta_box, n).map_err(Failure::usage)?;
            for variant in &variants {
                let est: RegretEstimate = match variant {
                    VariantConfig::Pac => {
                        pac_regret(&gen, &predictor, &theta_box, n, cfg.reps, cfg.seed)
                    }
                    VariantConfig::Realized => {
                        realized_regret(&gen, &predictor, &theta_box, n, cfg.reps, cfg.seed)
                    }
                };
                let gamma = if d == 1 {
                    fmt_g17(gamma_n_interval(theta_box.lengths()[0], n as f64))
                } else {
                    String::new()
                };
                rows.push((
                    n,
                    predictor.name().to_string(),
                    vec![
                        n.to_string(),
                        d.to_string(),
                        predictor.name().to_string(),
                        gen.name().to_string(),
                        match est.variant {
                            Variant::Pac => "pac".to_string(),
                            Variant::Realized => "realized".to_string(),
                        },
                        fmt_g17(est.mean),
                        fmt_g17(est.stderr),
                        est.reps.to_string(),
                        fmt_g17(i_n(d, n as f64, theta_box.volume())),
                        gamma,
                        cfg.seed.to_string(),
                    ],
                ));
            }
        }
    }
    rows.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

    let mut csv = Csv::new(&[
        "n",
        "d",
        "predictor",
        "generator",
        "variant",
        "regret_mean",
        "regret_stderr",
        "reps",
        "i_n",
        "gamma_n",
        "seed",
    ]);
    for (_, _, fields) in &rows {
        csv.row(fields);
    }
    Ok(csv.finish(cfg.seed, &config_json(cfg)))
}

fn run_capacity(cfg: &ExperimentConfig) -> Result<String, Failure> {
    let path = cfg
        .instance
        .as_ref()
        .ok_or_else(|| Failure::usage("capacity needs an instance path in the config"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read instance {path}: {e}")))?;
    let inst = DiscreteInstance::from_json(&text).map_err(Failure::from_lib)?;

    let sol = misspec_capacity(&inst, cfg.ba_tol, 2_000_000).map_err(Failure::from_lib)?;
    let cert_tol = (10.0 * cfg.ba_tol).max(1e-9);
    let saddle = saddle_certificate(&inst, &sol.qstar, sol.value, cert_tol);
    let (c_theta, _) = kemperman_capacity(&inst.theta_pmfs, cfg.ba_tol).map_err(Failure::from_lib)?;

    let sandwich = match cfg.epsilon {
        Some(eps) => Some(sandwich_certificate(&inst, eps).map_err(Failure::from_lib)?),
        None => None,
    };

    let mut pass = saddle.pass();
    let report = json!({
        "f": sol.value,
        "c_theta": c_theta,
        "prior": sol.prior,
        "qstar": sol.qstar,
        "iterations": sol.iters,
        "costs": inst.costs,
        "saddle": {
            "max_objective": saddle.max_objective,
            "max_equals_value": saddle.condition_max_equals_value,
            "worst_domination_slack": saddle.worst_domination_slack,
            "dominated": saddle.condition_dominated,
            "pass": saddle.pass(),
        },
        "sandwich": sandwich.as_ref().map(|s| {
            json!({
                "c_theta": s.c_theta,
                "f_theta_phi": s.f_theta_phi,
                "f_theta_eps": s.f_theta_eps,
                "c1_phi": s.c1_phi,
                "lambda0": s.lambda0,
                "upper": s.upper,
                "pass": s.pass,
            })
        }),
        "seed": cfg.seed,
        "config_hash": format!("{:016x}", output::fnv1a64(config_json(cfg).as_bytes())),
    });
    if let Some(s) = &sandwich {
        pass &= s.pass;
    }
    let mut doc = serde_json::to_string_pretty(&report).expect("report serializes");
    doc.push('\n');
    if !pass {
        // caller still gets the full report on stdout before the failure
        print!("{doc}");
        return Err(Failure::certificate("capacity certificate failed"));
    }
    Ok(doc)
}

fn run_theory(cfg: &ExperimentConfig) -> Result<String, Failure> {
    if cfg.horizons.is_empty() {
        return Err(Failure::usage("config lists no horizons"));
    }
    let t = &cfg.theory;
    let mut csv = Csv::new(&[
        "n",
        "i_n",
        "gamma_n",
        "hilbert_upper",
        "kl_gap",
        "kl_gap_sqrt_n",
        "entropy_bound",
    ]);
    for &n in &cfg.horizons {
        let nf = n as f64;
        let (kl, kl_rt) = if n >= 2 {
            let v = jeffreys_shtarkov_kl(nf, t.b, cfg.quad_tol).map_err(Failure::from_lib)?;
            (fmt_g17(v), fmt_g17(nf.sqrt() * v))
        } else {
            (String::new(), String::new())
        };
        csv.row(&[
            n.to_string(),
            fmt_g17(i_n(1, nf, t.leb)),
            fmt_g17(gamma_n_interval(t.a, nf)),
            fmt_g17(hilbert_brick_upper(nf, 1e-10)),
            kl,
            kl_rt,
            fmt_g17(entropy_robustness_bound_schedule(t.b, t.eps)),
        ]);
    }
    Ok(csv.finish(cfg.seed, &config_json(cfg)))
}
