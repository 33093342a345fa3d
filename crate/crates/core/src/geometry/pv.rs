//! Principal-value integrals of planar kernels over unions of regions.
//!
//! For a base point `p`, `∑ᵢ wᵢ ∫_{Rᵢ} K_{kᵢ}(y − p) dy` is written in polar
//! coordinates around `p`. Each direction `ω` is paired with `−ω`; inside the
//! ball `B_δ(p)` the paired singular contributions must cancel exactly (the
//! kernels are even), so only the regular part is integrated. Radial integrals
//! are done in closed form for homogeneous kernels and after the substitution
//! `u = ρ^{-s}` for profiled ones, which also removes any outer truncation.

use std::f64::consts::PI;

use super::region::{unit, Point, RegionSpec};
use crate::error::{Error, Result};
use crate::kernel::{AnisotropyFn, KernelSpec, RadialFn};
use crate::quad::{adaptive, adaptive_with_breaks, GaussLegendre, Tolerance};
use crate::reduction::PhiProfile;

/// Angular part of a planar kernel.
#[derive(Debug, Clone, Copy)]
pub enum Angular<'a> {
    Anisotropy(&'a AnisotropyFn),
    Profile(&'a PhiProfile),
}

impl Angular<'_> {
    #[inline]
    pub fn eval(&self, alpha: f64) -> f64 {
        match self {
            Angular::Anisotropy(a) => a.eval_angle(alpha),
            Angular::Profile(p) => p.eval(alpha),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            Angular::Anisotropy(a) => a.kinks(),
            Angular::Profile(p) => p.kinks(),
        }
    }
}

/// `K(ρ e(α)) = A(α) · m(ρ) · ρ^{-2-s}`.
#[derive(Debug, Clone, Copy)]
pub struct PlanarKernel<'a> {
    pub s: f64,
    pub angular: Angular<'a>,
    pub radial: Option<&'a RadialFn>,
}

impl<'a> PlanarKernel<'a> {
    pub fn from_spec(k: &'a KernelSpec) -> Result<Self> {
        if k.dim != 2 {
            return Err(Error::Domain(format!(
                "planar integrals need a 2D kernel, got dimension {}",
                k.dim
            )));
        }
        Ok(Self {
            s: k.s,
            angular: Angular::Anisotropy(k.anisotropy()),
            radial: k.radial(),
        })
    }

    /// Homogeneous kernel `φ(α)/ρ^{2+s}` with the exponent given explicitly.
    pub fn from_profile(phi: &'a PhiProfile, s: f64) -> Self {
        Self {
            s,
            angular: Angular::Profile(phi),
            radial: None,
        }
    }

    fn same_radial_law(&self, other: &PlanarKernel<'_>) -> bool {
        self.s == other.s
            && match (self.radial, other.radial) {
                (None, None) => true,
                (Some(a), Some(b)) => a == b,
                _ => false,
            }
    }

    /// `∫_a^b m(ρ) ρ^{-1-s} dρ` for `0 < a < b ≤ ∞`.
    fn radial_integral(&self, a: f64, b: f64, gl: &GaussLegendre) -> f64 {
        let s = self.s;
        let ua = a.powf(-s);
        let ub = if b.is_infinite() { 0.0 } else { b.powf(-s) };
        match self.radial {
            None => (ua - ub) / s,
            Some(m) => {
                // ρ = u^{-1/s} turns the integrand into m(ρ)/s on [ub, ua]
                let f = |u: f64| {
                    if u <= 0.0 {
                        m.eval(f64::INFINITY)
                    } else {
                        m.eval(u.powf(-1.0 / s))
                    }
                };
                // split at decades of ρ so that the profile's transition is resolved
                let mut pts = vec![ub];
                for e in -4..=4 {
                    let u = 10f64.powi(e).powf(-s);
                    if u > ub && u < ua {
                        pts.push(u);
                    }
                }
                pts.sort_by(|x, y| x.total_cmp(y));
                pts.push(ua);
                pts.iter()
                    .zip(&pts[1..])
                    .map(|(&lo, &hi)| gl.integrate(lo, hi, f))
                    .sum::<f64>()
                    / s
            }
        }
    }
}

/// One weighted region in a principal-value sum.
#[derive(Debug, Clone, Copy)]
pub struct Term<'a> {
    pub weight: f64,
    pub region: &'a RegionSpec,
    pub kernel: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvOptions {
    /// Pairing radius; `None` pairs up to the first boundary crossing.
    pub delta: Option<f64>,
    pub tol: Tolerance,
}

impl Default for PvOptions {
    fn default() -> Self {
        Self {
            delta: None,
            tol: Tolerance::new(1e-13, 1e-11).with_max_intervals(20_000),
        }
    }
}

/// `p.v. ∑ᵢ wᵢ ∫_{Rᵢ} K_{kᵢ}(y − p) dy`.
pub fn pv_integral(
    p: Point,
    terms: &[Term<'_>],
    kernels: &[PlanarKernel<'_>],
    opts: &PvOptions,
) -> Result<f64> {
    integral(p, terms, kernels, opts, false)
}

fn integral(
    p: Point,
    terms: &[Term<'_>],
    kernels: &[PlanarKernel<'_>],
    opts: &PvOptions,
    exterior: bool,
) -> Result<f64> {
    if let Some(d) = opts.delta {
        if !(d > 0.0) {
            return Err(Error::Domain(format!(
                "pairing radius must be positive, got {d}"
            )));
        }
    }
    for t in terms {
        if t.kernel >= kernels.len() {
            return Err(Error::Invalid(format!(
                "term refers to kernel {} of {}",
                t.kernel,
                kernels.len()
            )));
        }
    }
    let mut breaks = vec![0.0, PI];
    let mut dirs = Vec::new();
    for t in terms {
        t.region.critical_directions(p, &mut dirs);
    }
    for k in kernels {
        dirs.extend(k.angular.kinks());
    }
    breaks.extend(dirs.into_iter().map(|a| a.rem_euclid(PI)));
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let gl = GaussLegendre::new(16);
    let mut failure: Option<Error> = None;
    let integrand = |alpha: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        match paired_radial(p, alpha, terms, kernels, opts.delta, &gl, exterior) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let est = if !exterior && terms.iter().any(|t| t.region.is_curved()) {
        // Rays grazing a circle make the integrand blow up like |α − α₀|^{-s}
        // at the tangent directions. On each half of every break interval,
        // α = edge ± L·u^k with k(1−s) = 1 leaves it bounded in u.
        let s_max = kernels.iter().map(|k| k.s).fold(0.0, f64::max);
        let k = 1.0 / (1.0 - s_max);
        let halves: Vec<(f64, f64)> = breaks
            .windows(2)
            .flat_map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                [(w[0], mid - w[0]), (w[1], mid - w[1])]
            })
            .collect();
        // Within BAND of the edge the angle itself is too coarse to place the
        // ray against the circle, so g(u) = a + b·u^{k−1} is fitted from two
        // samples at the band edge instead.
        const BAND: f64 = 1e-7;
        let mut integrand = integrand;
        let mut g = |edge: f64, len: f64, u: f64| {
            integrand(edge + len * u.powf(k)) * k * len.abs() * u.powf(k - 1.0)
        };
        let mut near: Vec<Option<(f64, f64, f64)>> = vec![None; halves.len()];
        let mapped = |v: f64| {
            let j = (v.floor() as usize).min(halves.len() - 1);
            let u = v - j as f64;
            let (edge, len) = halves[j];
            if len == 0.0 || u <= 0.0 {
                return 0.0;
            }
            let ut = (BAND / len.abs()).powf(1.0 / k);
            if u >= ut {
                return g(edge, len, u);
            }
            let (ut, g1, g2) =
                *near[j].get_or_insert_with(|| (ut, g(edge, len, ut), g(edge, len, 0.5 * ut)));
            g1 + (g1 - g2) / (1.0 - 2f64.powf(1.0 - k)) * ((u / ut).powf(k - 1.0) - 1.0)
        };
        let pts: Vec<f64> = (0..=halves.len()).map(|j| j as f64).collect();
        adaptive_with_breaks(mapped, &pts, opts.tol)
    } else {
        adaptive_with_breaks(integrand, &breaks, opts.tol)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est?.value)
}

/// Radial integrals along `e(α)` and `e(α+π)`, with the singular parts
/// cancelled on the pairing ball.
fn paired_radial(
    p: Point,
    alpha: f64,
    terms: &[Term<'_>],
    kernels: &[PlanarKernel<'_>],
    delta: Option<f64>,
    gl: &GaussLegendre,
    exterior: bool,
) -> Result<f64> {
    let dirs = [alpha, alpha + PI];
    // negate rather than rotate so grazing pairs stay exactly opposite
    let e = unit(alpha);
    let vecs = [e, [-e[0], -e[1]]];
    let mut rays: Vec<[super::region::RayIntervals; 2]> = Vec::with_capacity(terms.len());
    let mut cut = delta.unwrap_or(f64::INFINITY);
    for t in terms {
        let ray = |d: Point| {
            if exterior {
                t.region.ray_intervals_eps(p, d, 0.0)
            } else {
                t.region.ray_intervals(p, d)
            }
        };
        let pair = [ray(vecs[0]), ray(vecs[1])];
        for iv in &pair {
            if let Some(&(a, b)) = iv.first() {
                if a == 0.0 {
                    cut = cut.min(b);
                }
            }
        }
        rays.push(pair);
    }

    // Singular coefficients must cancel kernel by kernel (kernels sharing
    // the same radial law are merged).
    let mut singular: Vec<(usize, f64, f64)> = Vec::new();
    for (t, pair) in terms.iter().zip(&rays) {
        for (side, iv) in pair.iter().enumerate() {
            if iv.first().is_some_and(|iv| iv.0 == 0.0) {
                let a = kernels[t.kernel].angular.eval(dirs[side]);
                let slot = singular
                    .iter()
                    .position(|(k, _, _)| kernels[*k].same_radial_law(&kernels[t.kernel]));
                match slot {
                    Some(i) => {
                        singular[i].1 += t.weight * a;
                        singular[i].2 += (t.weight * a).abs();
                    }
                    None => singular.push((t.kernel, t.weight * a, (t.weight * a).abs())),
                }
            }
        }
    }
    for &(_, c, scale) in &singular {
        if c.abs() > 1e-9 * scale {
            return Err(Error::PrincipalValue(format!(
                "singular contributions along direction {alpha:.6} do not cancel (net weight {c:.3e}); \
                 the base point is not on a locally flat boundary"
            )));
        }
    }

    let mut total = 0.0;
    for (t, pair) in terms.iter().zip(&rays) {
        let k = &kernels[t.kernel];
        for (side, iv) in pair.iter().enumerate() {
            let mut acc = 0.0;
            for &(a, b) in iv {
                let a = if a == 0.0 { cut } else { a };
                if b > a {
                    acc += k.radial_integral(a, b, gl);
                }
            }
            if acc != 0.0 {
                total += t.weight * k.angular.eval(dirs[side]) * acc;
            }
        }
    }
    Ok(total)
}

/// Integral of a planar kernel over `R` seen from a point outside `R̄`
/// (no principal value needed). Points arbitrarily close to `∂R` are
/// still treated as exterior.
pub fn region_integral(
    p: Point,
    region: &RegionSpec,
    kernel: &PlanarKernel<'_>,
    opts: &PvOptions,
) -> Result<f64> {
    integral(
        p,
        &[Term {
            weight: 1.0,
            region,
            kernel: 0,
        }],
        std::slice::from_ref(kernel),
        opts,
        true,
    )
}

/// `∫_a^∞ f` through `x = a + (1-u)/u`.
pub(crate) fn semi_infinite<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<f64> {
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = a + (1.0 - u) / u;
        f(x) / (u * u)
    };
    Ok(adaptive(g, 0.0, 1.0, tol)?.value)
}
