//! The nonlocal Young's law: the deficit `W`, regime classification, the
//! contact-angle solver, the cancellation function `D_θ` with its dual angle,
//! and a two-way evaluation of the wedge relation.
//!
//! Sign convention. With `F_j(θ) = ∫₀^θ φ_j(α) (sin α)^{s₁} dα`,
//! `W(θ) = 2F₁(θ) − F₁(π) − σ F₂(π)`, which is strictly increasing whenever
//! `φ₁ > 0`. Around `e(θ) = (cos θ, sin θ)` one has
//! `∫_{J_{0,θ}} K₁ − ∫_{J_{θ,π}} K₁ − σ ∫_{H^c} K₂ = W(θ) / (s₁ (sin θ)^{s₁})`,
//! i.e. the wedge relation is written with its left-hand side multiplied by
//! −1 so that it vanishes exactly where `W` does.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::pv::{pv_integral, Angular, PlanarKernel, PvOptions, Term};
use crate::geometry::region::{unit, RegionSpec};
use crate::quad::{GaussLegendre, Tolerance};
use crate::reduction::PhiProfile;
use crate::roots::{bisect, BisectOptions};

/// Endpoint offset of the interior bracket.
pub const ANGLE_EPS: f64 = 1e-9;
/// `|W|` target of the interior solver.
pub const W_TOL: f64 = 1e-10;
/// Bracket-width target of the interior solver.
pub const BRACKET_TOL: f64 = 1e-12;
/// Half-width of the probe used to detect zero plateaus of `W`.
pub const PLATEAU_PROBE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct YoungProblem {
    pub s1: f64,
    pub s2: f64,
    pub sigma: f64,
    pub phi1: PhiProfile,
    /// May be absent when `sigma = 0`.
    pub phi2: Option<PhiProfile>,
}

impl YoungProblem {
    pub fn new(
        s1: f64,
        s2: f64,
        sigma: f64,
        phi1: PhiProfile,
        phi2: Option<PhiProfile>,
    ) -> Result<Self> {
        for (name, s) in [("s1", s1), ("s2", s2)] {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0,1), got {s}")));
            }
        }
        if !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be finite, got {sigma}")));
        }
        if (phi1.s() - s1).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "phi1 was built with s = {}, but s1 = {s1}",
                phi1.s()
            )));
        }
        if sigma != 0.0 && phi2.is_none() {
            return Err(Error::Invalid(
                "phi2 is required when sigma is nonzero".into(),
            ));
        }
        Ok(Self {
            s1,
            s2,
            sigma,
            phi1,
            phi2,
        })
    }

    /// Both profiles constant one.
    pub fn isotropic(s1: f64, s2: f64, sigma: f64) -> Result<Self> {
        Self::new(
            s1,
            s2,
            sigma,
            PhiProfile::constant(s1, 1.0)?,
            Some(PhiProfile::constant(s2, 1.0)?),
        )
    }

    /// Whether the interior-angle equation is meaningful: `s₁ = s₂` or `σ = 0`.
    pub fn is_valid_interior(&self) -> bool {
        self.s1 == self.s2 || self.sigma == 0.0
    }

    fn require_valid(&self) -> Result<()> {
        if self.is_valid_interior() {
            Ok(())
        } else {
            Err(Error::UnsupportedRegime(format!(
                "the interior equation needs s1 = s2 or sigma = 0 (s1 = {}, s2 = {}, sigma = {})",
                self.s1, self.s2, self.sigma
            )))
        }
    }
}

/// `θ ↦ ∫₀^θ φ(α) (sin α)^s dα` on `[0, π]`.
///
/// The integrand is linear times `sin^s` on every cell of the profile grid.
/// Interior cells use a 10-point Gauss–Legendre rule; the two end cells use
/// `α = Δ·u⁵` (mirrored at π), which removes the `α^s` derivative singularity.
#[derive(Debug, Clone)]
pub struct SinPowerIntegral<'a> {
    phi: &'a PhiProfile,
    s: f64,
    step: f64,
    cells: Vec<f64>,
    cumulative: Vec<f64>,
    gl_cell: GaussLegendre,
    gl_end: GaussLegendre,
}

impl<'a> SinPowerIntegral<'a> {
    pub fn new(phi: &'a PhiProfile, s: f64) -> Self {
        let half = phi.grid_size() / 2;
        let step = phi.step();
        let mut t = Self {
            phi,
            s,
            step,
            cells: Vec::with_capacity(half),
            cumulative: Vec::with_capacity(half + 1),
            gl_cell: GaussLegendre::new(10),
            gl_end: GaussLegendre::new(20),
        };
        for k in 0..half {
            let v = if k == 0 {
                t.from_zero(step)
            } else if k == half - 1 {
                t.to_pi(PI - step)
            } else {
                let a = k as f64 * step;
                t.plain(a, a + step)
            };
            t.cells.push(v);
        }
        let mut acc = 0.0;
        t.cumulative.push(0.0);
        for &c in &t.cells {
            acc += c;
            t.cumulative.push(acc);
        }
        t
    }

    #[inline]
    fn integrand(&self, alpha: f64) -> f64 {
        self.phi.eval(alpha) * alpha.sin().powf(self.s)
    }

    fn plain(&self, a: f64, b: f64) -> f64 {
        self.gl_cell.integrate(a, b, |x| self.integrand(x))
    }

    /// `∫₀^b` with `α = b u⁵`.
    fn from_zero(&self, b: f64) -> f64 {
        self.gl_end.integrate(0.0, 1.0, |u| {
            let u4 = u * u * u * u;
            let alpha = b * u4 * u;
            self.integrand(alpha) * 5.0 * b * u4
        })
    }

    /// `∫_a^π` with `α = π − (π−a) u⁵`; `sin α` is evaluated as `sin(π − α)`.
    fn to_pi(&self, a: f64) -> f64 {
        let w = PI - a;
        self.gl_end.integrate(0.0, 1.0, |u| {
            let u4 = u * u * u * u;
            let eps = w * u4 * u;
            self.phi.eval(PI - eps) * eps.sin().powf(self.s) * 5.0 * w * u4
        })
    }

    /// `∫₀^π`.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("table is non-empty")
    }

    /// `∫₀^θ` for `θ ∈ [0, π]`.
    pub fn upto(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= PI {
            return self.total();
        }
        let half = self.cells.len();
        let k = ((theta / self.step).floor() as usize).min(half - 1);
        let a = k as f64 * self.step;
        let partial = if k == 0 {
            self.from_zero(theta)
        } else if k == half - 1 {
            self.cells[k] - self.to_pi(theta)
        } else {
            self.plain(a, theta)
        };
        self.cumulative[k] + partial
    }
}

/// The Young deficit with its integral tables built once.
#[derive(Debug, Clone)]
pub struct Deficit<'a> {
    f1: SinPowerIntegral<'a>,
    shift: f64,
}

impl<'a> Deficit<'a> {
    /// `W` for exponent `s₁`, with the σ-term `σ ∫₀^π φ₂ sin^{s₁}`.
    pub fn new(phi1: &'a PhiProfile, phi2: Option<&'a PhiProfile>, s1: f64, sigma: f64) -> Self {
        let f1 = SinPowerIntegral::new(phi1, s1);
        let shift = match phi2 {
            Some(p2) if sigma != 0.0 => sigma * SinPowerIntegral::new(p2, s1).total(),
            _ => 0.0,
        };
        Self { f1, shift }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        2.0 * self.f1.upto(theta) - self.f1.total() - self.shift
    }
}

/// `W(θ) = ∫₀^θ φ₁ sin^{s₁} − ∫_θ^π φ₁ sin^{s₁} − σ ∫₀^π φ₂ sin^{s₁}`.
pub fn young_deficit(p: &YoungProblem, theta: f64) -> Result<f64> {
    p.require_valid()?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!(
            "theta must lie in (0, π), got {theta}"
        )));
    }
    Ok(Deficit::new(&p.phi1, p.phi2.as_ref(), p.s1, p.sigma).eval(theta))
}

/// `∫₀^π φ₁ sin^{s₁} / ∫₀^π φ₂ sin^{s₁}`.
pub fn sigma_bound(phi1: &PhiProfile, phi2: &PhiProfile, s1: f64) -> f64 {
    SinPowerIntegral::new(phi1, s1).total() / SinPowerIntegral::new(phi2, s1).total()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// θ = 0.
    Sticking,
    /// θ = π.
    Detachment,
    Interior,
    /// `s₁ = s₂` with `|σ|` at or above the uniqueness bound.
    Indeterminate,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Sticking => "sticking",
            Regime::Detachment => "detachment",
            Regime::Interior => "interior",
            Regime::Indeterminate => "indeterminate",
        }
    }
}

/// Regime from the exponents and the sign of σ. `bound` is needed only when
/// `s₁ = s₂` and `σ ≠ 0`.
pub fn classify_regime(s1: f64, s2: f64, sigma: f64, bound: Option<f64>) -> Result<Regime> {
    if s1 < s2 {
        return Ok(if sigma < 0.0 {
            Regime::Sticking
        } else if sigma > 0.0 {
            Regime::Detachment
        } else {
            Regime::Interior
        });
    }
    if s1 > s2 || sigma == 0.0 {
        return Ok(Regime::Interior);
    }
    let bound = bound
        .ok_or_else(|| Error::Invalid("s1 = s2 with sigma != 0 needs the sigma bound".into()))?;
    Ok(if sigma.abs() < bound {
        Regime::Interior
    } else {
        Regime::Indeterminate
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleSolution {
    pub regime: Regime,
    pub theta: f64,
    /// `|W(θ)|`; absent for the boundary regimes.
    pub residual: Option<f64>,
    pub unique: bool,
    pub sigma_bound: f64,
    /// Width of the final bisection bracket.
    pub bracket: f64,
    /// Set when `W` vanishes on an interval around the root.
    pub nonunique: bool,
    /// Extent of the zero plateau of `W`, when detected.
    pub plateau: Option<(f64, f64)>,
}

/// Solves for the contact angle.
///
/// For `s₁ > s₂` the interior equation does not involve `φ₂` and is solved
/// with σ = 0. When `s₁ = s₂` and `|σ|` reaches the bound, a root is still
/// sought; if found it is reported as non-unique.
pub fn solve_contact_angle(p: &YoungProblem) -> Result<AngleSolution> {
    let bound = match &p.phi2 {
        Some(p2) => sigma_bound(&p.phi1, p2, p.s1),
        None => f64::INFINITY,
    };
    let regime = classify_regime(p.s1, p.s2, p.sigma, Some(bound))?;
    let boundary = |theta| AngleSolution {
        regime,
        theta,
        residual: None,
        unique: true,
        sigma_bound: bound,
        bracket: 0.0,
        nonunique: false,
        plateau: None,
    };
    match regime {
        Regime::Sticking => Ok(boundary(0.0)),
        Regime::Detachment => Ok(boundary(PI)),
        Regime::Interior | Regime::Indeterminate => {
            let sigma_eff = if p.s1 == p.s2 { p.sigma } else { 0.0 };
            let mut sol = solve_interior_raw(&p.phi1, p.phi2.as_ref(), p.s1, sigma_eff)?;
            sol.sigma_bound = bound;
            sol.unique = !sol.nonunique && sigma_eff.abs() < bound;
            Ok(sol)
        }
    }
}

/// Bisection on `W` over `(ε, π−ε)`; refuses `s₁ ≠ s₂` with `σ ≠ 0`.
pub fn solve_interior(p: &YoungProblem) -> Result<AngleSolution> {
    p.require_valid()?;
    let mut sol = solve_interior_raw(&p.phi1, p.phi2.as_ref(), p.s1, p.sigma)?;
    sol.sigma_bound = match &p.phi2 {
        Some(p2) => sigma_bound(&p.phi1, p2, p.s1),
        None => f64::INFINITY,
    };
    sol.unique = !sol.nonunique && p.sigma.abs() < sol.sigma_bound;
    Ok(sol)
}

fn solve_interior_raw(
    phi1: &PhiProfile,
    phi2: Option<&PhiProfile>,
    s1: f64,
    sigma: f64,
) -> Result<AngleSolution> {
    let w = Deficit::new(phi1, phi2, s1, sigma);
    let (lo, hi) = (ANGLE_EPS, PI - ANGLE_EPS);
    let (wlo, whi) = (w.eval(lo), w.eval(hi));
    if wlo.signum() == whi.signum() && wlo != 0.0 && whi != 0.0 {
        return Err(Error::NoInteriorSolution { lo: wlo, hi: whi });
    }
    let b = bisect(
        |t| Ok(w.eval(t)),
        lo,
        hi,
        BisectOptions {
            f_tol: W_TOL,
            x_tol: BRACKET_TOL,
            max_iter: 200,
        },
    )?;
    let flat = |t: f64| w.eval(t.clamp(lo, hi)).abs() < W_TOL;
    let plateau = if flat(b.root - PLATEAU_PROBE) && flat(b.root + PLATEAU_PROBE) {
        Some((
            plateau_edge(&flat, lo, b.root - PLATEAU_PROBE),
            plateau_edge(&flat, hi, b.root + PLATEAU_PROBE),
        ))
    } else {
        None
    };
    Ok(AngleSolution {
        regime: Regime::Interior,
        theta: b.root,
        residual: Some(b.residual),
        unique: plateau.is_none(),
        sigma_bound: f64::INFINITY,
        bracket: b.width,
        nonunique: plateau.is_some(),
        plateau,
    })
}

/// Boundary between `outside` (predicate false, unless the plateau reaches
/// the bracket end) and `inside` (predicate true).
fn plateau_edge(flat: &dyn Fn(f64) -> bool, outside: f64, inside: f64) -> f64 {
    if flat(outside) {
        return outside;
    }
    let (mut a, mut b) = (outside, inside);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if flat(m) {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

/// Pairs up to the first boundary crossing; the adaptive tolerance is tight
/// because `D_θ` is root-found to 1e-8.
fn pv_opts() -> PvOptions {
    PvOptions {
        delta: None,
        tol: Tolerance::new(1e-13, 1e-11).with_max_intervals(50_000),
    }
}

fn check_angular(a: &Angular<'_>) -> Result<()> {
    if let Angular::Anisotropy(a) = a {
        if a.dim() != 2 {
            return Err(Error::Domain(
                "the cancellation function needs a planar anisotropy".into(),
            ));
        }
    }
    Ok(())
}

/// `D_θ(θ̄) = p.v. ∫_{J_{θ,θ+θ̄}} K(x−e(θ)) dx − p.v. ∫_{J_{0,θ}} K(x−e(θ)) dx`
/// for the planar kernel `K = a₁/|·|^{2+s₁}`.
pub fn cancellation_d(a1: Angular<'_>, s1: f64, theta: f64, theta_bar: f64) -> Result<f64> {
    check_angular(&a1)?;
    if !(s1 > 0.0 && s1 < 1.0) {
        return Err(Error::Domain(format!("s1 must lie in (0,1), got {s1}")));
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!(
            "theta must lie in (0, π), got {theta}"
        )));
    }
    if !(theta_bar > 0.0 && theta_bar < 2.0 * PI) {
        return Err(Error::Domain(format!(
            "theta_bar must lie in (0, 2π), got {theta_bar}"
        )));
    }
    let k = PlanarKernel {
        s: s1,
        angular: a1,
        radial: None,
    };
    let plus = RegionSpec::wedge(theta, theta + theta_bar)?;
    let minus = RegionSpec::wedge(0.0, theta)?;
    let terms = [
        Term {
            weight: 1.0,
            region: &plus,
            kernel: 0,
        },
        Term {
            weight: -1.0,
            region: &minus,
            kernel: 0,
        },
    ];
    pv_integral(unit(theta), &terms, &[k], &pv_opts())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualAngleResult {
    pub theta_hat: f64,
    pub c: f64,
    pub residual: f64,
}

/// Smallest distance of the search bracket from 0 and 2π.
pub const DUAL_EDGE: f64 = 1e-6;

/// The unique `θ̂ ∈ (0, 2π)` with `D_θ(θ̂) = c`.
pub fn dual_angle(a1: Angular<'_>, s1: f64, theta: f64, c: f64) -> Result<DualAngleResult> {
    let f = |tb: f64| cancellation_d(a1, s1, theta, tb).map(|d| d - c);
    let two_pi = 2.0 * PI;
    let mut lo = theta.min(two_pi - theta) * 0.5;
    while f(lo)? > 0.0 {
        if lo <= DUAL_EDGE {
            return Err(Error::Range(format!(
                "D_θ − c stays positive down to θ̄ = {lo:e}"
            )));
        }
        lo = (lo * 0.25).max(DUAL_EDGE);
    }
    let mut hi = two_pi - lo;
    while f(hi)? < 0.0 {
        let gap = two_pi - hi;
        if gap <= DUAL_EDGE {
            return Err(Error::Range(format!(
                "D_θ − c stays negative up to 2π − {gap:e}"
            )));
        }
        hi = two_pi - (gap * 0.25).max(DUAL_EDGE);
    }
    let b = bisect(
        f,
        lo,
        hi,
        BisectOptions {
            f_tol: 1e-8,
            x_tol: 1e-14,
            max_iter: 200,
        },
    )?;
    Ok(DualAngleResult {
        theta_hat: b.root,
        c,
        residual: b.residual,
    })
}

/// `(reduced, direct)` evaluations of
/// `∫_{J_{0,θ}} K₁ − ∫_{J_{θ,π}} K₁ − σ ∫_{H^c} K₂` around `e(θ)`, where
/// `K_j = φ_j/|·|^{2+s₁}`. The reduced value is `W(θ)/(s₁ sin^{s₁} θ)`; the
/// direct one is a 2D polar principal-value quadrature.
pub fn wedge_young_residual(p: &YoungProblem, theta: f64) -> Result<(f64, f64)> {
    let w = young_deficit(p, theta)?;
    let reduced = w / (p.s1 * theta.sin().powf(p.s1));
    let j0 = RegionSpec::wedge(0.0, theta)?;
    let jpi = RegionSpec::wedge(theta, PI)?;
    let lower = RegionSpec::half_space([0.0, 1.0], 0.0)?;
    let mut kernels = vec![PlanarKernel::from_profile(&p.phi1, p.s1)];
    let mut terms = vec![
        Term {
            weight: 1.0,
            region: &j0,
            kernel: 0,
        },
        Term {
            weight: -1.0,
            region: &jpi,
            kernel: 0,
        },
    ];
    if p.sigma != 0.0 {
        let phi2 = p
            .phi2
            .as_ref()
            .ok_or_else(|| Error::Invalid("phi2 is required when sigma is nonzero".into()))?;
        kernels.push(PlanarKernel::from_profile(phi2, p.s1));
        terms.push(Term {
            weight: -p.sigma,
            region: &lower,
            kernel: 1,
        });
    }
    let direct = pv_integral(unit(theta), &terms, &kernels, &pv_opts())?;
    Ok((reduced, direct))
}
