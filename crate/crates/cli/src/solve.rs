//! `solve-angle` and `scan`.

use std::io::Write;

use rayon::prelude::*;

use nlcap::young::{
    classify_regime, sigma_bound, solve_contact_angle, AngleSolution, YoungProblem,
};

use crate::config::{KeySpec, RunConfig};
use crate::error::{CliError, Result};
use crate::profiles::Anisotropy;
use crate::{csv_bytes, emit, EXIT_NONUNIQUE, EXIT_NO_INTERIOR, EXIT_OK};

pub const SOLVE_KEYS: KeySpec = &[
    ("s1", Some("0.5")),
    ("s2", Some("0.5")),
    ("sigma", Some("0")),
    ("a1", Some("const")),
    ("a2", Some("const")),
    ("grid", Some("1024")),
    ("output", Some("")),
];

pub const SCAN_KEYS: KeySpec = &[
    ("s1", Some("0.5")),
    ("s2", Some("0.5")),
    ("sigma", Some("0")),
    ("a1", Some("const")),
    ("a2", Some("const")),
    ("grid", Some("1024")),
    ("output", Some("")),
    ("sweep", Some("sigma")),
    ("from", None),
    ("to", None),
    ("steps", None),
];

struct Setup {
    a1: Anisotropy,
    a2: Anisotropy,
    grid: usize,
}

impl Setup {
    fn new(cfg: &RunConfig) -> Result<Self> {
        let grid = cfg.usize("grid")?;
        if grid < 16 || grid % 2 != 0 {
            return Err(CliError::Value {
                key: "grid".into(),
                msg: format!("must be even and at least 16, got {grid}"),
            });
        }
        Ok(Self {
            a1: Anisotropy::from_config(cfg, "a1")?,
            a2: Anisotropy::from_config(cfg, "a2")?,
            grid,
        })
    }

    fn problem(&self, s1: f64, s2: f64, sigma: f64) -> Result<YoungProblem> {
        let phi1 = self.a1.profile(s1, self.grid)?;
        let phi2 = self.a2.profile(s2, self.grid)?;
        Ok(YoungProblem::new(s1, s2, sigma, phi1, Some(phi2))?)
    }
}

/// The solver outcome, with the regime label kept when no root exists.
enum Outcome {
    Solved(AngleSolution),
    NoInterior(String),
}

fn solve(p: &YoungProblem) -> Result<Outcome> {
    match solve_contact_angle(p) {
        Ok(sol) => Ok(Outcome::Solved(sol)),
        Err(nlcap::Error::NoInteriorSolution { .. }) => {
            let phi2 = p.phi2.as_ref().expect("both profiles are always built");
            let bound = sigma_bound(&p.phi1, phi2, p.s1);
            let regime = classify_regime(p.s1, p.s2, p.sigma, Some(bound))?;
            Ok(Outcome::NoInterior(regime.label().to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn cmd_solve_angle(cfg: &RunConfig) -> Result<i32> {
    let s1 = cfg.f64_open("s1", 0.0, 1.0)?;
    let s2 = cfg.f64_open("s2", 0.0, 1.0)?;
    let sigma = cfg.f64("sigma")?;
    let setup = Setup::new(cfg)?;
    let p = setup.problem(s1, s2, sigma)?;
    let header = [
        "regime",
        "theta_rad",
        "theta_deg",
        "residual",
        "sigma_bound",
        "unique",
    ];
    let (row, code) = match solve(&p)? {
        Outcome::Solved(sol) => {
            let row = vec![
                sol.regime.label().to_string(),
                num(sol.theta),
                num(sol.theta.to_degrees()),
                sol.residual.map(|r| format!("{r:e}")).unwrap_or_default(),
                num(sol.sigma_bound),
                sol.unique.to_string(),
            ];
            (row, if sol.unique { EXIT_OK } else { EXIT_NONUNIQUE })
        }
        Outcome::NoInterior(label) => {
            eprintln!("no interior solution: the deficit has one sign on (0, pi)");
            let bound = sigma_bound(&p.phi1, p.phi2.as_ref().expect("built above"), s1);
            (
                vec![
                    label,
                    String::new(),
                    String::new(),
                    String::new(),
                    num(bound),
                    "false".into(),
                ],
                EXIT_NO_INTERIOR,
            )
        }
    };
    let bytes = csv_bytes(&header, std::iter::once(row))?;
    emit(cfg, "angle.csv", &bytes)?;
    Ok(code)
}

/// `steps` equispaced points from `from` to `to`; a symmetric range hits 0 exactly.
pub fn sweep_points(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || from > to || (from == to && steps > 1) {
        return Err(CliError::Value {
            key: "from/to/steps".into(),
            msg: format!("empty range {from}..{to} with {steps} steps"),
        });
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps)
        .map(|k| {
            let t = k as f64 / (steps - 1) as f64;
            from * (1.0 - t) + to * t
        })
        .collect())
}

/// Worker count from `NLCAP_WORKERS`; `None` leaves the choice to rayon.
pub fn workers() -> Result<Option<usize>> {
    match std::env::var("NLCAP_WORKERS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Value {
                key: "NLCAP_WORKERS".into(),
                msg: format!("expected a positive integer, got {v:?}"),
            }),
        },
    }
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<i32> {
    let sweep = cfg.str("sweep").to_string();
    let (from, to) = (cfg.f64("from")?, cfg.f64("to")?);
    let points = sweep_points(from, to, cfg.usize("steps")?)?;
    let s2 = cfg.f64_open("s2", 0.0, 1.0)?;
    // the setting held fixed while the other one is swept
    let fixed = match sweep.as_str() {
        "sigma" => cfg.f64_open("s1", 0.0, 1.0)?,
        "s1" => {
            if !(from > 0.0 && to < 1.0) {
                return Err(CliError::Value {
                    key: "from/to".into(),
                    msg: format!("an s1 sweep must stay inside (0, 1), got {from}..{to}"),
                });
            }
            cfg.f64("sigma")?
        }
        other => {
            return Err(CliError::Value {
                key: "sweep".into(),
                msg: format!("expected sigma or s1, got {other:?}"),
            })
        }
    };
    let setup = Setup::new(cfg)?;
    let run = |x: f64| -> Result<Vec<String>> {
        let p = if sweep == "sigma" {
            setup.problem(fixed, s2, x)?
        } else {
            setup.problem(x, s2, fixed)?
        };
        Ok(match solve(&p)? {
            Outcome::Solved(sol) => vec![
                num(x),
                num(sol.theta),
                num(sol.theta.to_degrees()),
                sol.residual.map(|r| format!("{r:e}")).unwrap_or_default(),
                sol.regime.label().to_string(),
            ],
            Outcome::NoInterior(label) => {
                vec![num(x), String::new(), String::new(), String::new(), label]
            }
        })
    };
    // collect() keeps sweep order whatever the completion order
    let rows: Vec<Result<Vec<String>>> = match workers()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?
            .install(|| points.par_iter().map(|&x| run(x)).collect()),
        None => points.par_iter().map(|&x| run(x)).collect(),
    };
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let header = [
        sweep.as_str(),
        "theta_rad",
        "theta_deg",
        "residual",
        "regime",
    ];
    let bytes = csv_bytes(&header, rows)?;
    emit(cfg, "scan.csv", &bytes)?;
    std::io::stdout().flush()?;
    Ok(EXIT_OK)
}
