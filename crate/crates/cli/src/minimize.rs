//! `minimize`: anneal a discrete droplet and compare its contact angle with
//! the Young prediction.

use nlcap::droplet::{
    minimize_with_model, CapillaryProblem, EnergyModel, GridDomain, MinimizeOptions, Schedule, Wall,
};
use nlcap::young::{classify_regime, sigma_bound, solve_contact_angle, Regime, YoungProblem};

use crate::config::{KeySpec, RunConfig};
use crate::error::{CliError, Result};
use crate::profiles::Anisotropy;
use crate::{csv_bytes, emit, EXIT_OK};

pub const MINIMIZE_KEYS: KeySpec = &[
    ("width", Some("64")),
    ("height", Some("64")),
    ("m", None),
    ("s1", Some("0.5")),
    ("s2", Some("0.5")),
    ("sigma", Some("0")),
    ("a1", Some("const")),
    ("a2", Some("const")),
    ("lambda", Some("auto")),
    ("wall", Some("none")),
    ("window", Some("8")),
    ("sweeps", Some("500")),
    ("cooling", Some("0.995")),
    ("t0", Some("auto")),
    ("moves", Some("auto")),
    ("seed", Some("0")),
    ("grid", Some("1024")),
    ("output", Some("nlcap-out")),
];

fn wall(cfg: &RunConfig) -> Result<Option<Wall>> {
    match cfg.str("wall") {
        "none" => Ok(None),
        w => Wall::parse(w).map(Some).map_err(|e| CliError::Value {
            key: "wall".into(),
            msg: e.to_string(),
        }),
    }
}

/// The Young angle for the run's kernels; boundary regimes map to 0 or π.
fn predicted_angle(
    cfg: &RunConfig,
    a1: &Anisotropy,
    a2: &Anisotropy,
    s1: f64,
    s2: f64,
    sigma: f64,
) -> Result<f64> {
    let grid = cfg.usize("grid")?;
    let p = YoungProblem::new(
        s1,
        s2,
        sigma,
        a1.profile(s1, grid)?,
        Some(a2.profile(s2, grid)?),
    )?;
    match solve_contact_angle(&p) {
        Ok(sol) => Ok(sol.theta),
        Err(nlcap::Error::NoInteriorSolution { .. }) => {
            let bound = sigma_bound(&p.phi1, p.phi2.as_ref().expect("built above"), s1);
            Ok(match classify_regime(s1, s2, sigma, Some(bound))? {
                Regime::Sticking => 0.0,
                Regime::Detachment => std::f64::consts::PI,
                _ => f64::NAN,
            })
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_minimize(cfg: &RunConfig) -> Result<i32> {
    let (width, height) = (cfg.usize("width")?, cfg.usize("height")?);
    if width == 0 || height == 0 {
        return Err(CliError::Value {
            key: "width/height".into(),
            msg: format!("empty grid {width}x{height}"),
        });
    }
    let m = cfg.usize("m")?;
    if m == 0 || m >= width * height {
        return Err(CliError::Value {
            key: "m".into(),
            msg: format!("volume must satisfy 0 < m < {}, got {m}", width * height),
        });
    }
    let s1 = cfg.f64_open("s1", 0.0, 1.0)?;
    let s2 = cfg.f64_open("s2", 0.0, 1.0)?;
    let sigma = cfg.f64("sigma")?;
    let lambda = cfg.auto_f64("lambda")?;
    if let Some(l) = lambda {
        if l < 1.0 {
            return Err(CliError::Value {
                key: "lambda".into(),
                msg: format!("must be at least 1, got {l}"),
            });
        }
    }
    let (a1, a2) = (
        Anisotropy::from_config(cfg, "a1")?,
        Anisotropy::from_config(cfg, "a2")?,
    );
    let wall = wall(cfg)?;
    let moves = match cfg.str("moves") {
        "auto" => None,
        _ => Some(cfg.usize("moves")?),
    };
    let schedule = Schedule {
        t0: cfg.auto_f64("t0")?,
        cooling: cfg.f64("cooling")?,
        sweeps: cfg.usize("sweeps")?,
        moves_per_sweep: moves,
        seed: cfg.u64("seed")?,
        ..Schedule::default()
    };
    let opts = MinimizeOptions {
        schedule,
        wall,
        window: cfg.usize("window")?,
        ..MinimizeOptions::default()
    };

    let domain = GridDomain::square(width, height)?;
    let p = CapillaryProblem::new(
        domain,
        a1.kernel(s1, lambda)?,
        a2.kernel(s2, lambda)?,
        sigma,
        m,
    )?;
    let model = EnergyModel::with_params(&p, &opts.quadrature)?;
    let r = minimize_with_model(&model, &opts)?;

    let dir = cfg.output().ok_or_else(|| CliError::Value {
        key: "output".into(),
        msg: "minimize needs an output directory".into(),
    })?;
    cfg.echo_into(&dir)?;
    r.final_mask.save(dir.join("mask.pbm"))?;
    let trace = r
        .energy_trace
        .iter()
        .map(|&(step, e)| [step.to_string(), e.to_string()]);
    std::fs::write(
        dir.join("trace.csv"),
        csv_bytes(&["step", "energy"], trace)?,
    )?;

    if wall.is_some() {
        let pred = predicted_angle(cfg, &a1, &a2, s1, s2, sigma)?;
        let meas = r.measured_angle.unwrap_or(f64::NAN);
        let row = [sigma, pred, pred.to_degrees(), meas, meas.to_degrees()].map(|x| x.to_string());
        let header = [
            "sigma",
            "theta_pred_rad",
            "theta_pred_deg",
            "theta_meas_rad",
            "theta_meas_deg",
        ];
        std::fs::write(dir.join("angle.csv"), csv_bytes(&header, [row])?)?;
    }

    let summary = [
        r.initial_energy.to_string(),
        r.final_energy.to_string(),
        r.accepted_moves.to_string(),
        r.wall_contact_fraction.to_string(),
    ];
    let header = [
        "initial_energy",
        "final_energy",
        "accepted_moves",
        "wall_contact_fraction",
    ];
    emit(cfg, "summary.csv", &csv_bytes(&header, [summary])?)?;
    Ok(EXIT_OK)
}
