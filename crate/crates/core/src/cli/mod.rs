//! Command-line front end: one command per process, config from a JSON file.

mod config;
mod output;

pub use config::{BlowupTolerances, Format, Ladder, RunConfig, SpeedConfig, VariationConfig};
pub use output::{flatten, key_values, table};

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::measures::{
    curvature_field, first_variation_check, fractional_perimeter, gauss_energy, wedge_constant,
    WedgeCache,
};
use crate::symmetry::{critical_plane, symmetric_difference_volume, weighted_asymmetry};
use crate::verify::{
    audit_theorem_a, audit_theorem_b, contact_cosine, default_directions, default_heights,
    dyadic_heights, estimate_deficit, fit_blowup_with, gradient_bound_audit_with, symmetry_report,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

pub const CACHE_ENV: &str = "FRACAP_CACHE_DIR";
const CACHE_FILE: &str = "wedge_constants.json";
const DEFAULT_HEIGHT_COUNT: usize = 5;

#[derive(Debug, Parser)]
#[command(
    name = "fracap",
    version,
    about = "Fractional curvature and symmetry audits for droplets in a half-space"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; overrides `output_path` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Caps the worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Asserts that no randomness is used (always true here).
    #[arg(long, global = true)]
    pub seedless: bool,
    /// Print failures as JSON on stderr.
    #[arg(long, global = true)]
    pub error_json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Curvature field over sampled boundary points.
    Curvature,
    /// Fractional perimeter.
    Perimeter,
    /// Gauss free energy at `gamma`.
    Energy,
    /// Symmetry deficit of the curvature field.
    Deficit,
    /// Critical planes and asymmetry per direction.
    MovingPlane,
    /// Reflection and weighted-asymmetry bounds.
    AuditA,
    /// Gate, critical-plane bounds and slice dichotomy.
    AuditB,
    /// Power-law fit of the curvature near the contact line.
    Blowup,
    /// Scaled tangential gradient near the contact line.
    GradBound,
    /// Wedge constant for `sigma` (or the shape's contact cosine).
    WedgeC,
    /// First variation of the perimeter against the curvature integral.
    Variation,
    /// Every audit in one report.
    Report,
}

/// What a command produced.
pub struct Outcome {
    pub json: Value,
    pub csv: String,
    pub summary: String,
    /// `None` for plain computations; audits report pass/fail.
    pub pass: Option<bool>,
}

impl Outcome {
    fn plain<T: Serialize>(data: &T, summary: String) -> Result<Self> {
        let json = serde_json::to_value(data)?;
        Ok(Outcome {
            csv: key_values(&json),
            json,
            summary,
            pass: None,
        })
    }

    fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
        })
    }
}

fn pm(key: &str, value: f64, err: f64) -> String {
    format!("{key} {value:.10e} ± {err:.3e}")
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Runs one command against a validated config.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    let q = &cfg.quadrature;
    let s = cfg.s;
    let directions = || -> Result<_> {
        Ok(cfg
            .directions()?
            .unwrap_or_else(|| default_directions(cfg.n)))
    };
    match command {
        Command::Curvature => {
            let field = curvature_field(&cfg.model()?, s, cfg.resolution, q)?;
            let mean =
                field.entries.iter().map(|e| e.value).sum::<f64>() / field.entries.len() as f64;
            Ok(Outcome {
                json: field.to_json(),
                csv: field.to_csv(),
                summary: pm("H_mean", mean, field.max_error()),
                pass: None,
            })
        }
        Command::Perimeter => {
            let p = fractional_perimeter(&cfg.model()?, s, q)?;
            Outcome::plain(&p, pm("P_s", p.value, p.error_estimate))
        }
        Command::Energy => {
            let e = gauss_energy(&cfg.model()?, cfg.gamma, s, q)?;
            Outcome::plain(&e, pm("energy", e.value, e.error_estimate))
        }
        Command::Deficit => {
            let d = estimate_deficit(&cfg.model()?, s, q, &cfg.audit)?;
            Outcome::plain(&d, pm("delta_s", d.delta_s, d.value_error))
        }
        Command::MovingPlane => {
            let model = cfg.model()?;
            let d = estimate_deficit(&model, s, q, &cfg.audit)?;
            let res = cfg.audit.volume_resolution;
            let rows = directions()?
                .iter()
                .map(|e| {
                    let plane = critical_plane(&model, e, &cfg.audit.plane)?;
                    let (sym, sym_err) = symmetric_difference_volume(&model, e, plane.lambda, res)?;
                    let (w, w_err) = weighted_asymmetry(&model, e, plane.lambda, res)?;
                    Ok(json!({
                        "e": &e.as_slice()[..cfg.n - 1],
                        "lambda": plane.lambda,
                        "lambdaError": plane.probe_error,
                        "case": plane.tangency_case,
                        "monotone": plane.monotone,
                        "deltaS": d.delta_s,
                        "noiseFloor": d.noise_floor,
                        "symDiff": sym,
                        "symDiffError": sym_err,
                        "weightedAsym": w,
                        "weightedAsymError": w_err,
                    }))
                })
                .collect::<Result<Vec<Value>>>()?;
            let worst = rows
                .iter()
                .map(|r| r["symDiff"].as_f64().unwrap_or(0.0))
                .fold(0.0, f64::max);
            let err = rows
                .iter()
                .map(|r| r["symDiffError"].as_f64().unwrap_or(0.0))
                .fold(0.0, f64::max);
            Ok(Outcome {
                csv: table(&rows),
                json: Value::Array(rows),
                summary: pm("sym_diff_max", worst, err),
                pass: None,
            })
        }
        Command::AuditA => {
            let model = cfg.model()?;
            let d = estimate_deficit(&model, s, q, &cfg.audit)?;
            let recs = audit_theorem_a(&model, s, &directions()?, &d, &cfg.audit)?;
            let pass = recs.iter().all(|r| r.reflection.pass && r.weighted.pass);
            let min_slack = recs
                .iter()
                .flat_map(|r| [r.reflection.slack, r.weighted.slack])
                .fold(f64::INFINITY, f64::min);
            let rows: Vec<Value> = recs
                .iter()
                .map(serde_json::to_value)
                .collect::<std::result::Result<_, _>>()?;
            Ok(Outcome {
                csv: table(&rows),
                json: json!({ "deficit": d, "directions": rows }),
                summary: format!(
                    "{} min_slack {min_slack:.6e} delta_s {:.6e}",
                    verdict(pass),
                    d.delta_s
                ),
                pass: Some(pass),
            })
        }
        Command::AuditB => {
            let model = cfg.model()?;
            let d = estimate_deficit(&model, s, q, &cfg.audit)?;
            let heights = cfg
                .heights
                .clone()
                .unwrap_or_else(|| default_heights(&model, DEFAULT_HEIGHT_COUNT));
            let audit = audit_theorem_b(&model, s, &directions()?, &heights, &d, &cfg.audit)?;
            let checks =
                audit.lambdas.iter().all(|l| l.bound.pass) && audit.heights.iter().all(|h| h.pass);
            let pass = !audit.guaranteed || checks;
            let json = json!({ "deficit": d, "audit": audit });
            let rows: Vec<Value> = audit
                .heights
                .iter()
                .map(serde_json::to_value)
                .collect::<std::result::Result<_, _>>()?;
            Ok(Outcome {
                csv: table(&rows),
                json,
                summary: format!(
                    "{} gate {} delta_s {:.6e} delta0 {:.6e} checks {}",
                    verdict(pass),
                    if audit.guaranteed { "open" } else { "closed" },
                    d.delta_s,
                    audit.gate.delta0,
                    verdict(checks)
                ),
                pass: Some(pass),
            })
        }
        Command::Blowup => {
            let model = cfg.model()?;
            let sigma = contact_cosine(&model)?;
            let wedge = wedge_constant(cfg.n, s, sigma, q)?;
            let fit = fit_blowup_with(
                &model,
                s,
                q,
                &dyadic_heights(cfg.ladder.h0, cfg.ladder.count),
                &wedge,
            )?;
            let pass =
                (fit.slope + s).abs() <= cfg.blowup.slope && fit.rel_err <= cfg.blowup.prefactor;
            let rows: Vec<Value> = fit
                .points
                .iter()
                .map(serde_json::to_value)
                .collect::<std::result::Result<_, _>>()?;
            Ok(Outcome {
                csv: table(&rows),
                json: serde_json::to_value(&fit)?,
                summary: format!(
                    "{} slope {:.6} prefactor {:.6e} wedge_c {:.6e} rel_err {:.3e}",
                    verdict(pass),
                    fit.slope,
                    fit.prefactor,
                    fit.wedge_c,
                    fit.rel_err
                ),
                pass: Some(pass),
            })
        }
        Command::GradBound => {
            let model = cfg.model()?;
            let sigma = contact_cosine(&model)?;
            let wedge = wedge_constant(cfg.n, s, sigma, q)?;
            let g = gradient_bound_audit_with(
                &model,
                s,
                q,
                &dyadic_heights(cfg.ladder.h0, cfg.ladder.count),
                &wedge,
            )?;
            let rows: Vec<Value> = g
                .points
                .iter()
                .map(serde_json::to_value)
                .collect::<std::result::Result<_, _>>()?;
            Ok(Outcome {
                csv: table(&rows),
                json: serde_json::to_value(&g)?,
                summary: format!(
                    "{} sup_scaled {:.6e} wedge_c {:.6e} budget {:.3e} tail_non_increasing {}",
                    verdict(g.pass),
                    g.sup_scaled,
                    g.wedge_c,
                    g.budget,
                    g.tail_non_increasing
                ),
                pass: Some(g.pass),
            })
        }
        Command::WedgeC => {
            let sigma = match (cfg.sigma, &cfg.shape) {
                (Some(sig), _) => sig,
                (None, Some(_)) => contact_cosine(&cfg.model()?)?,
                (None, None) => {
                    return Err(Error::InvalidConfig(
                        "wedge-c needs `sigma` or a `shape`".into(),
                    ))
                }
            };
            let w = match std::env::var_os(CACHE_ENV) {
                Some(dir) => {
                    let path = Path::new(&dir).join(CACHE_FILE);
                    let mut cache = WedgeCache::load(&path)?;
                    let before = cache.len();
                    let w = cache.get_or_compute(cfg.n, s, sigma, q)?;
                    if cache.len() != before {
                        cache.save(&path)?;
                    }
                    w
                }
                None => wedge_constant(cfg.n, s, sigma, q)?,
            };
            Outcome::plain(&w, pm("c", w.c, w.error_estimate))
        }
        Command::Variation => {
            let v = first_variation_check(&cfg.model()?, cfg.speed()?, s, q, cfg.variation.step)?;
            let pass = v.relative_mismatch <= cfg.variation.tolerance;
            let mut out = Outcome::plain(&v, String::new())?;
            out.summary = format!(
                "{} {}",
                verdict(pass),
                pm("fd_derivative", v.fd_derivative, v.fd_error)
            ) + &format!(
                " surface {:.10e} relative_mismatch {:.3e}",
                v.surface_integral, v.relative_mismatch
            );
            out.pass = Some(pass);
            Ok(out)
        }
        Command::Report => {
            let model = cfg.model()?;
            let heights = cfg
                .heights
                .clone()
                .unwrap_or_else(|| default_heights(&model, DEFAULT_HEIGHT_COUNT));
            let ladder = dyadic_heights(cfg.ladder.h0, cfg.ladder.count);
            let r = symmetry_report(&model, s, q, &cfg.audit, &directions()?, &heights, &ladder)?;
            Ok(Outcome {
                json: r.to_json(),
                csv: r.to_csv(),
                summary: format!(
                    "{} delta_s {:.6e}",
                    verdict(r.all_guaranteed_pass),
                    r.deficit.delta_s
                ),
                pass: Some(r.all_guaranteed_pass),
            })
        }
    }
}

/// A failure tagged with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub error: Error,
    pub code: i32,
}

impl Failure {
    fn config(error: Error) -> Self {
        Failure {
            error,
            code: EXIT_CONFIG,
        }
    }

    fn computation(error: Error) -> Self {
        let code = match error {
            Error::InvalidSpec(_) | Error::InvalidTransform(_) | Error::InvalidConfig(_) => {
                EXIT_CONFIG
            }
            _ => EXIT_COMPUTATION,
        };
        Failure { error, code }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.error.kind(), "message": self.error.to_string(), "exit_code": self.code })
    }
}

fn load_config(path: Option<&Path>) -> std::result::Result<RunConfig, Failure> {
    let path = path.ok_or_else(|| {
        Failure::config(Error::InvalidConfig("--config <path> is required".into()))
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(e.into()))?;
    RunConfig::from_json(&text).map_err(Failure::config)
}

/// Parses, computes and writes; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let report = |f: Failure| {
        if cli.error_json {
            eprintln!("{}", f.to_json());
        } else {
            eprintln!("error: {}", f.error);
        }
        f.code
    };
    let cfg = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(f) => return report(f),
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => return report(Failure::config(Error::InvalidConfig(e.to_string()))),
    };
    let format = cli.format.or(cfg.format).unwrap_or(Format::Json);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
    let result = pool
        .install(|| execute(cli.command, &cfg))
        .map_err(Failure::computation);
    let outcome = match result {
        Ok(o) => o,
        Err(f) => return report(f),
    };
    let text = match outcome.render(format) {
        Ok(t) => t,
        Err(e) => return report(Failure::computation(e)),
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                return report(Failure::computation(e.into()));
            }
            println!("{}", outcome.summary);
        }
        None => {
            print!("{text}");
            eprintln!("{}", outcome.summary);
        }
    }
    match outcome.pass {
        Some(false) => EXIT_AUDIT_FAILED,
        _ => EXIT_OK,
    }
}

pub fn run_from_env() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
