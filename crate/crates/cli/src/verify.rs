//! `verify`: numerical checks of the solver against independent oracles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlcap::droplet::{CapillaryProblem, EnergyModel, GridDomain};
use nlcap::geometry::pv::Angular;
use nlcap::geometry::{c_star, c_star_exact, slab_halfspace_interaction, Mask, QuadratureParams};
use nlcap::quad::{adaptive_with_breaks, Tolerance};
use nlcap::reduction::build_phi;
use nlcap::young::{dual_angle, solve_contact_angle, wedge_young_residual, YoungProblem};
use nlcap::{AnisotropyFn, PhiProfile};

use crate::config::{KeySpec, RunConfig};
use crate::error::{CliError, Result};
use crate::{csv_bytes, emit, EXIT_CHECK_FAILED, EXIT_OK};

pub const VERIFY_KEYS: KeySpec = &[
    ("suite", None),
    ("seed", Some("0")),
    ("n", Some("2")),
    ("s", Some("0.5")),
    ("output", Some("")),
];

pub const SUITES: [&str; 4] = ["cstar", "reduction", "duality", "dual-angle"];

struct Check {
    name: String,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
        }
    }

    fn pass(&self) -> bool {
        self.value <= self.tolerance
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let suite = cfg.str("suite");
    let s = cfg.f64_open("s", 0.0, 1.0)?;
    let checks = match suite {
        "cstar" => cstar(cfg.usize("n")?, s)?,
        "reduction" => reduction(s)?,
        "duality" => duality(cfg.u64("seed")?)?,
        "dual-angle" => dual_angle_checks(s)?,
        other => {
            return Err(CliError::Value {
                key: "suite".into(),
                msg: format!("unknown suite {other:?}, expected one of {SUITES:?}"),
            })
        }
    };
    let rows = checks.iter().map(|c| {
        vec![
            suite.to_string(),
            c.name.clone(),
            if c.pass() { "PASS" } else { "FAIL" }.to_string(),
            format!("{:e}", c.value),
            format!("{:e}", c.tolerance),
        ]
    });
    let bytes = csv_bytes(&["suite", "check", "status", "value", "tolerance"], rows)?;
    emit(cfg, "verify.csv", &bytes)?;
    Ok(if checks.iter().all(Check::pass) {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

/// Slab against half-space: the stated constant `c_star`, the `t` and `r`
/// scaling exponents, and the constant recomputed in closed form.
fn cstar(n: usize, s: f64) -> Result<Vec<Check>> {
    if !(n == 2 || n == 3) {
        return Err(CliError::Value {
            key: "n".into(),
            msg: format!("the slab check supports n = 2 or 3, got {n}"),
        });
    }
    let q = QuadratureParams::default();
    let (num, _) = slab_halfspace_interaction(n, s, 1.0, 1.0, &q)?;
    let (num_t, _) = slab_halfspace_interaction(n, s, 1.0, 2.0, &q)?;
    let (num_r, _) = slab_halfspace_interaction(n, s, 2.0, 1.0, &q)?;
    let stated = c_star(n, s)?;
    let exact = c_star_exact(n, s)?;
    let t_exp = (num_t / num).log2();
    let r_exp = (num_r / num).log2();
    let r_want = n as f64 - 1.0;
    Ok(vec![
        Check::new("c-star", (num - stated).abs() / stated, 0.02),
        Check::new("t-exponent", (t_exp - (1.0 - s)).abs() / (1.0 - s), 0.05),
        Check::new("r-exponent", (r_exp - r_want).abs() / r_want, 0.05),
        Check::new("c-star-exact", (num - exact).abs() / exact, 1e-6),
    ])
}

/// `∫_{β₁}^{β₂} ∫_0^∞ φ(arg(x−p)) |x−p|^{-2-s} ρ dρ dβ` in polar
/// coordinates about the wedge vertex, with `p = e(θ)` and `B_ε(p)` removed.
/// The ball meets only the two wedges split by the ray through `p`, where
/// the contributions cancel.
fn origin_polar(
    phi: &dyn Fn(f64) -> f64,
    s: f64,
    theta: f64,
    eps: f64,
    b1: f64,
    b2: f64,
) -> Result<f64> {
    let tol = Tolerance::new(1e-15, 1e-9).with_max_intervals(20_000);
    let (px, py) = (theta.cos(), theta.sin());
    let f = |rho: f64, beta: f64| {
        let (dx, dy) = (rho * beta.cos() - px, rho * beta.sin() - py);
        phi(dy.atan2(dx)) * (dx * dx + dy * dy).powf(-0.5 * (2.0 + s)) * rho
    };
    let far = 4.0;
    let inner = |beta: f64| -> f64 {
        let (sn, c) = ((beta - theta).sin(), (beta - theta).cos());
        let pieces: Vec<(f64, f64)> = if sn.abs() < eps && c > 0.0 {
            let half = (eps * eps - sn * sn).sqrt();
            vec![(0.0, c - half), (c + half, far)]
        } else if c > 0.0 {
            vec![(0.0, c), (c, far)]
        } else {
            vec![(0.0, far)]
        };
        let near: f64 = pieces
            .iter()
            .filter(|(a, b)| b > a)
            .map(|&(a, b)| {
                adaptive_with_breaks(|r| f(r, beta), &[a, b], tol)
                    .map(|e| e.value)
                    .unwrap_or(f64::NAN)
            })
            .sum();
        // ρ = far·u^{-1/s} flattens the tail
        let tail = adaptive_with_breaks(
            |u| {
                let rho = far * u.powf(-1.0 / s);
                f(rho, beta) * rho / (s * u)
            },
            &[0.0, 1.0],
            tol,
        )
        .map(|e| e.value)
        .unwrap_or(f64::NAN);
        near + tail
    };
    let mut pts = vec![b1];
    pts.extend(
        [theta - eps.asin(), theta, theta + eps.asin()]
            .into_iter()
            .filter(|&b| b > b1 && b < b2),
    );
    pts.push(b2);
    Ok(adaptive_with_breaks(
        inner,
        &pts,
        Tolerance::new(1e-12, 1e-8).with_max_intervals(20_000),
    )?
    .value)
}

/// The reduced Young residual against a direct polar evaluation of the three
/// wedge integrals, for two anisotropic kernels.
fn reduction(s: f64) -> Result<Vec<Check>> {
    let a1 = |a: f64| 1.0 + 0.3 * (2.0 * a).cos() + 0.1 * (2.0 * a).sin();
    let a2 = |a: f64| 1.0 + 0.2 * (4.0 * a).cos();
    let sigma = -0.4;
    let phi1 = PhiProfile::from_fn(s, 1024, a1)?;
    let phi2 = PhiProfile::from_fn(s, 1024, a2)?;
    let p = YoungProblem::new(s, s, sigma, phi1, Some(phi2))?;
    let mut out = Vec::new();
    for theta in [PI / 6.0, PI / 2.0, 2.0 * PI / 3.0] {
        let (reduced, _) = wedge_young_residual(&p, theta)?;
        let eps = 0.25 * theta.sin();
        let direct = origin_polar(&a1, s, theta, eps, 0.0, theta)?
            - origin_polar(&a1, s, theta, eps, theta, PI)?
            - sigma * origin_polar(&a2, s, theta, eps, PI, 2.0 * PI)?;
        out.push(Check::new(
            format!("theta={:.0}deg", theta.to_degrees()),
            (reduced - direct).abs() / direct.abs(),
            1e-4,
        ));
    }
    Ok(out)
}

/// Complement duality on seeded random 32×32 masks.
fn duality(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masks: Vec<Mask> = (0..10)
        .map(|_| {
            let fill = rng.gen_range(0.2..0.8);
            Mask::from_fn(32, 32, |_, _| rng.gen_bool(fill))
        })
        .collect();
    let mut out = Vec::new();
    for sigma in [-1.0, -0.3, 0.5, 2.0] {
        let p = CapillaryProblem::isotropic(GridDomain::square(32, 32)?, 0.5, 0.3, sigma, 1)?;
        let model = EnergyModel::new(&p)?;
        let mut worst = 0.0f64;
        for f in &masks {
            let (lhs, _, defect) = model.duality(f)?;
            worst = worst.max(defect / (1.0 + lhs.abs()));
        }
        out.push(Check::new(format!("sigma={sigma}"), worst, 1e-9));
    }
    Ok(out)
}

/// With a constant kernel the dual angle equals the angle itself; with an
/// anisotropic one, the dual of the equilibrium angle is its supplement.
fn dual_angle_checks(s: f64) -> Result<Vec<Check>> {
    let a = AnisotropyFn::constant(2, 1.0)?;
    let mut worst = 0.0f64;
    for theta in [0.4, 1.0, PI / 2.0, 2.2, 2.8] {
        let r = dual_angle(Angular::Anisotropy(&a), s, theta, 0.0)?;
        worst = worst.max((r.theta_hat - theta).abs());
    }
    let mut out = vec![Check::new("constant", worst, 1e-6)];
    for (amp, s1) in [(0.4, 0.5), (0.6, 0.3)] {
        let a1 = AnisotropyFn::planar(1.0 - amp, 1.0 + amp, move |t| {
            1.0 + amp * (2.0 * t + 0.3).cos()
        })?;
        let phi1 = build_phi(&a1, 2, s1, 1024)?;
        let star = solve_contact_angle(&YoungProblem::new(s1, s1, 0.0, phi1.clone(), None)?)?.theta;
        let r = dual_angle(Angular::Profile(&phi1), s1, star, 0.0)?;
        out.push(Check::new(
            format!("anisotropic amp={amp} s={s1}"),
            (r.theta_hat - (PI - star)).abs(),
            1e-4,
        ));
    }
    Ok(out)
}
