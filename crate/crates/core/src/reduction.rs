//! Projection of an `n`-dimensional anisotropy onto the `(x₁, x_n)` plane and
//! the tabulated angular profile `φ(α) = a★(cos α, sin α)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{format_angle_table, parse_angle_table, periodic_lerp, AnisotropyFn};
use crate::quad::adaptive_simpson;
use statrs::function::gamma::gamma;

pub const DEFAULT_GRID: usize = 1024;

/// Knobs for [`project_anisotropy_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    /// Absolute tolerance of the `n = 3` adaptive Simpson rule.
    pub simpson_tol: f64,
    pub simpson_depth: usize,
    /// Monte Carlo sample count for `n ≥ 4`.
    pub samples: usize,
    pub seed: u64,
    /// Largest accepted relative standard error of a Monte Carlo estimate.
    pub mc_rel_tol: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            simpson_tol: 1e-10,
            simpson_depth: 50,
            samples: 1_000_000,
            seed: 0x5eed,
            mc_rel_tol: 1e-2,
        }
    }
}

/// A projected value together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub value: f64,
    /// Estimated error: quadrature tolerance, or the Monte Carlo standard error.
    pub error: f64,
    pub stochastic: bool,
}

/// `a★(x)` for a unit vector `x` of the plane, with default options.
pub fn project_anisotropy(a: &AnisotropyFn, n: usize, s: f64, x: [f64; 2]) -> Result<f64> {
    project_anisotropy_with(a, n, s, x, &ProjectionOptions::default()).map(|p| p.value)
}

/// `a★(x) = ∫_{ℝ^{n-2}} a(dir(x₁e₁ + x₂e_n + |x|(0,ȳ,0))) (1+|ȳ|²)^{-(n+s)/2} dȳ`,
/// and `a★ = a` when `n = 2`.
pub fn project_anisotropy_with(
    a: &AnisotropyFn,
    n: usize,
    s: f64,
    x: [f64; 2],
    opts: &ProjectionOptions,
) -> Result<Projection> {
    if (x[0].hypot(x[1]) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "projection direction ({}, {}) is not a unit vector",
            x[0], x[1]
        )));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!(
            "exponent s must lie in (0,1), got {s}"
        )));
    }
    if a.dim() != n || n < 2 {
        return Err(Error::Domain(format!(
            "anisotropy of dimension {} cannot be projected from dimension {n}",
            a.dim()
        )));
    }
    match n {
        2 => Ok(Projection {
            value: a.eval(&x),
            error: 0.0,
            stochastic: false,
        }),
        3 => {
            // ȳ = tan u maps ℝ onto (-π/2, π/2); the weight becomes cos^{1+s} u.
            let f = |u: f64| {
                let (su, cu) = u.sin_cos();
                if cu <= 0.0 {
                    return 0.0;
                }
                a.eval(&[x[0] * cu, su, x[1] * cu]) * cu.powf(1.0 + s)
            };
            let est = adaptive_simpson(
                f,
                -FRAC_PI_2,
                FRAC_PI_2,
                opts.simpson_tol,
                opts.simpson_depth,
            )?;
            Ok(Projection {
                value: est.value,
                error: est.error.max(opts.simpson_tol),
                stochastic: false,
            })
        }
        _ => monte_carlo_projection(a, n, s, x, opts),
    }
}

/// Importance sampling with the multivariate Cauchy density on `ℝ^d`, `d = n-2`,
/// `p(y) = c_d (1+|y|²)^{-(1+d)/2}`, drawn as `z/|g|` with `z ~ N(0,I_d)`, `g ~ N(0,1)`.
/// The weight `a·(1+|y|²)^{-(1+s)/2}/c_d` is then bounded.
fn monte_carlo_projection(
    a: &AnisotropyFn,
    n: usize,
    s: f64,
    x: [f64; 2],
    opts: &ProjectionOptions,
) -> Result<Projection> {
    let d = n - 2;
    let c_d = gamma(0.5 * (1.0 + d as f64)) / PI.powf(0.5 * (1.0 + d as f64));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v = vec![0.0; n];
    let mut y = vec![0.0; d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let samples = opts.samples.max(2);
    for _ in 0..samples {
        let g: f64 = StandardNormal.sample(&mut rng);
        let mut r2 = 0.0;
        for yi in y.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *yi = z / g.abs();
            r2 += *yi * *yi;
        }
        let len = (1.0 + r2).sqrt();
        v[0] = x[0] / len;
        v[n - 1] = x[1] / len;
        for (vi, yi) in v[1..n - 1].iter_mut().zip(&y) {
            *vi = yi / len;
        }
        let w = a.eval(&v) * (1.0 + r2).powf(-0.5 * (1.0 + s)) / c_d;
        sum += w;
        sum_sq += w * w;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    let std_err = (var / nf).sqrt();
    if std_err > opts.mc_rel_tol * mean.abs() {
        return Err(Error::Accuracy {
            what: "Monte Carlo projection".into(),
            estimate: std_err / mean.abs(),
            tolerance: opts.mc_rel_tol,
        });
    }
    Ok(Projection {
        value: mean,
        error: std_err,
        stochastic: true,
    })
}

/// Closed form of `a★` for `a ≡ 1`: `π^{(n-2)/2} Γ((2+s)/2) / Γ((n+s)/2)`.
pub fn isotropic_projection(n: usize, s: f64) -> f64 {
    PI.powf(0.5 * (n as f64 - 2.0)) * gamma(0.5 * (2.0 + s)) / gamma(0.5 * (n as f64 + s))
}

/// The reduced angular weight `φ` tabulated on a uniform grid of `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiProfile {
    s: f64,
    values: Vec<f64>,
    stochastic: bool,
}

impl PhiProfile {
    /// Builds a profile from grid values, enforcing `φ(α) = φ(α+π)` by averaging.
    pub fn new(s: f64, values: Vec<f64>) -> Result<Self> {
        let p = Self::new_nonnegative(s, values)?;
        if let Some(k) = p.values.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Domain(format!(
                "profile value at grid index {k} is not positive"
            )));
        }
        Ok(p)
    }

    /// Like [`PhiProfile::new`] but accepts vanishing values. Such profiles
    /// violate the kernel-class lower bound and may give non-unique angles.
    pub fn new_nonnegative(s: f64, mut values: Vec<f64>) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!(
                "exponent s must lie in (0,1), got {s}"
            )));
        }
        let n = values.len();
        if n < 16 || !n.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "grid size must be even and at least 16, got {n}"
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(
                "profile values must be finite and nonnegative".into(),
            ));
        }
        let half = n / 2;
        for k in 0..half {
            let m = 0.5 * (values[k] + values[k + half]);
            values[k] = m;
            values[k + half] = m;
        }
        Ok(Self {
            s,
            values,
            stochastic: false,
        })
    }

    /// Samples `f` on a grid of `grid` points.
    pub fn from_fn(s: f64, grid: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            s,
            (0..grid).map(|k| f(TAU * k as f64 / grid as f64)).collect(),
        )
    }

    pub fn constant(s: f64, c: f64) -> Result<Self> {
        Self::new(s, vec![c; DEFAULT_GRID])
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        TAU / self.values.len() as f64
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    /// `φ(α)` by periodic linear interpolation.
    #[inline]
    pub fn eval(&self, alpha: f64) -> f64 {
        periodic_lerp(&self.values, alpha)
    }

    /// Grid angles, where the interpolant has kinks.
    pub fn kinks(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|k| k as f64 * self.step())
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// The same table with a different exponent label.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        let mut p = Self::new_nonnegative(s, self.values.clone())?;
        p.stochastic = self.stochastic;
        Ok(p)
    }

    /// The planar anisotropy whose projection is this profile.
    pub fn to_anisotropy(&self) -> Result<AnisotropyFn> {
        let values = self.values.clone();
        let lo = self.min();
        AnisotropyFn::planar(lo, self.max(), move |t| periodic_lerp(&values, t))
    }

    /// `angle value` rows at the grid points.
    pub fn to_table_string(&self) -> String {
        let header = format!("# s = {}\n", self.s);
        header
            + &format_angle_table(
                self.values
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| (k as f64 * self.step(), v)),
            )
    }

    /// Parses `angle value` rows. A uniform grid starting at 0 is taken as is;
    /// anything else is resampled onto [`DEFAULT_GRID`] points.
    pub fn parse_table(s: f64, text: &str) -> Result<Self> {
        let mut rows = parse_angle_table(text)?;
        if rows.is_empty() {
            return Err(Error::Invalid("empty profile table".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = rows.len();
        let step = TAU / n as f64;
        let uniform = rows
            .iter()
            .enumerate()
            .all(|(k, r)| (r.0 - k as f64 * step).abs() < 1e-9);
        if uniform && n >= 16 && n % 2 == 0 {
            return Self::new(s, rows.into_iter().map(|r| r.1).collect());
        }
        let a = AnisotropyFn::from_samples(&rows)?;
        Self::from_fn(s, DEFAULT_GRID, |t| a.eval_angle(t))
    }

    pub fn load_table(s: f64, path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_table(s, &std::fs::read_to_string(path)?)
    }
}

/// Tabulates `φ(α) = a★(cos α, sin α)` on `grid_size` angles.
pub fn build_phi(a: &AnisotropyFn, n: usize, s: f64, grid_size: usize) -> Result<PhiProfile> {
    build_phi_with(a, n, s, grid_size, &ProjectionOptions::default())
}

pub fn build_phi_with(
    a: &AnisotropyFn,
    n: usize,
    s: f64,
    grid_size: usize,
    opts: &ProjectionOptions,
) -> Result<PhiProfile> {
    if grid_size < 16 || !grid_size.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "grid size must be even and at least 16, got {grid_size}"
        )));
    }
    let projections: Vec<Projection> = (0..grid_size)
        .into_par_iter()
        .map(|k| {
            let t = TAU * k as f64 / grid_size as f64;
            let o = ProjectionOptions {
                seed: opts.seed.wrapping_add(k as u64),
                ..*opts
            };
            project_anisotropy_with(a, n, s, [t.cos(), t.sin()], &o)
        })
        .collect::<Result<_>>()?;
    let stochastic = projections.iter().any(|p| p.stochastic);
    let mut p = PhiProfile::new(s, projections.into_iter().map(|p| p.value).collect())?;
    p.stochastic = stochastic;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive, Tolerance};
    use approx::assert_relative_eq;

    // ∫_ℝ (1+t²)^{-(3+s)/2} dt by adaptive Gauss–Kronrod on the original line,
    // split at ±1 and folded onto (0,1] for the tails.
    fn line_oracle(s: f64) -> f64 {
        let f = |t: f64| (1.0 + t * t).powf(-(3.0 + s) / 2.0);
        let core = adaptive(f, -1.0, 1.0, Tolerance::new(1e-14, 1e-13))
            .unwrap()
            .value;
        // t = 1/u on the tail
        let tail = adaptive(
            |u: f64| if u == 0.0 { 0.0 } else { f(1.0 / u) / (u * u) },
            0.0,
            1.0,
            Tolerance::new(1e-14, 1e-13),
        )
        .unwrap()
        .value;
        core + 2.0 * tail
    }

    #[test]
    fn planar_projection_is_identity() {
        let a = AnisotropyFn::planar(1.0, 2.0, |t| 1.0 + t.cos().powi(2)).unwrap();
        for k in 0..20 {
            let t = 0.3 * k as f64;
            let v = project_anisotropy(&a, 2, 0.4, [t.cos(), t.sin()]).unwrap();
            assert_eq!(v, a.eval(&[t.cos(), t.sin()]));
        }
    }

    #[test]
    fn isotropic_three_dimensional_projection() {
        for &s in &[0.1, 0.5, 0.9] {
            let a = AnisotropyFn::constant(3, 1.0).unwrap();
            let v = project_anisotropy(&a, 3, s, [0.6, 0.8]).unwrap();
            let oracle = line_oracle(s);
            assert_relative_eq!(v, oracle, max_relative = 1e-9);
            assert_relative_eq!(oracle, isotropic_projection(3, s), max_relative = 1e-11);
            let c = AnisotropyFn::constant(3, 2.5).unwrap();
            assert_relative_eq!(
                project_anisotropy(&c, 3, s, [0.6, 0.8]).unwrap(),
                2.5 * v,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        let a = AnisotropyFn::constant(3, 1.0).unwrap();
        assert!(matches!(
            project_anisotropy(&a, 3, 0.5, [1.0, 1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn monte_carlo_projection_matches_closed_form() {
        let a = AnisotropyFn::constant(5, 1.0).unwrap();
        let opts = ProjectionOptions {
            samples: 200_000,
            ..Default::default()
        };
        let p = project_anisotropy_with(&a, 5, 0.5, [1.0, 0.0], &opts).unwrap();
        assert!(p.stochastic);
        let exact = isotropic_projection(5, 0.5);
        assert!(
            (p.value - exact).abs() < 5.0 * p.error + 1e-12,
            "{} vs {exact} (se {})",
            p.value,
            p.error
        );
    }

    #[test]
    fn build_phi_examples() {
        let one = AnisotropyFn::constant(2, 1.0).unwrap();
        let p = build_phi(&one, 2, 0.5, 64).unwrap();
        assert!(p.values().iter().all(|&v| v == 1.0));

        let a = AnisotropyFn::new(2, 1.0, 2.0, |w| 1.0 + w[0] * w[0]).unwrap();
        let p = build_phi(&a, 2, 0.5, 128).unwrap();
        for (k, &v) in p.values().iter().enumerate() {
            let t = k as f64 * p.step();
            assert_relative_eq!(v, 1.0 + t.cos().powi(2), max_relative = 1e-12);
        }

        let one3 = AnisotropyFn::constant(3, 1.0).unwrap();
        let p = build_phi(&one3, 3, 0.5, 32).unwrap();
        let c = PI.sqrt() * gamma(1.25) / gamma(1.75);
        for &v in p.values() {
            assert_relative_eq!(v, c, max_relative = 1e-9);
        }
    }

    #[test]
    fn projection_is_monotone_in_the_anisotropy() {
        let a = AnisotropyFn::new(3, 1.0, 1.5, |w| 1.0 + 0.5 * w[1] * w[1]).unwrap();
        let b = AnisotropyFn::new(3, 2.0, 3.0, |w| 2.0 + w[1] * w[1]).unwrap();
        for k in 0..12 {
            let t = 0.5 * k as f64;
            let x = [t.cos(), t.sin()];
            assert!(
                project_anisotropy(&a, 3, 0.3, x).unwrap()
                    <= project_anisotropy(&b, 3, 0.3, x).unwrap()
            );
        }
    }

    #[test]
    fn unsymmetrized_defect_is_below_tolerance() {
        let a = AnisotropyFn::new(3, 1.0, 2.0, |w| {
            1.0 + (w[0] * w[2]).powi(2) + 0.5 * w[1].powi(2)
        })
        .unwrap();
        for k in 0..10 {
            let t = 0.31 * k as f64;
            let u = project_anisotropy(&a, 3, 0.6, [t.cos(), t.sin()]).unwrap();
            let v = project_anisotropy(&a, 3, 0.6, [(t + PI).cos(), (t + PI).sin()]).unwrap();
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn profile_is_half_period_symmetric_and_roundtrips() {
        let p = PhiProfile::from_fn(0.4, 64, |t| 2.0 + t.sin()).unwrap();
        for k in 0..32 {
            assert_eq!(p.values()[k], p.values()[k + 32]);
        }
        let q = PhiProfile::parse_table(0.4, &p.to_table_string()).unwrap();
        assert_eq!(q.grid_size(), 64);
        for (a, b) in p.values().iter().zip(q.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bad_grid_sizes_are_rejected() {
        assert!(PhiProfile::new(0.5, vec![1.0; 15]).is_err());
        assert!(PhiProfile::new(0.5, vec![1.0; 17]).is_err());
        assert!(PhiProfile::new(0.5, vec![0.0; 16]).is_err());
        assert!(PhiProfile::new_nonnegative(0.5, vec![0.0; 16]).is_ok());
    }
}
