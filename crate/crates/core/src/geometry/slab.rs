//! Slab calibration integrals: a flat cylinder `D = B_r^{n-1} × (0, t)`
//! against the lower half-space, and against the coaxial exterior shell.

use std::f64::consts::PI;

use super::interaction::{interaction_integral, QuadratureParams};
use super::pv::semi_infinite;
use super::region::RegionSpec;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::quad::{adaptive_with_breaks, Tolerance};
use statrs::function::gamma::gamma;

/// The slab constant in its stated closed form:
/// `2π^{(2n-1)/2} Γ((1+s)/2) / (s(1-s) Γ(n/2) Γ((n+s)/2))`.
///
/// The derivation behind it multiplies by the area of the unit sphere
/// `S^{n-2}` where the volume of the unit ball `B^{n-1}` belongs, so it
/// overstates the integral (by π for n = 2, by 4 for n = 3). See
/// [`c_star_exact`].
pub fn c_star(n: usize, s: f64) -> Result<f64> {
    check_ns(n, s)?;
    let nf = n as f64;
    Ok(
        2.0 * PI.powf(0.5 * (2.0 * nf - 1.0)) * gamma(0.5 * (1.0 + s))
            / (s * (1.0 - s) * gamma(0.5 * nf) * gamma(0.5 * (nf + s))),
    )
}

/// The constant `c` with `∫_D ∫_{y_n<0} |x−y|^{-n-s} = c r^{n-1} t^{1-s}`:
/// `π^{n-1} Γ((1+s)/2) / (Γ((n+1)/2) Γ((n+s)/2) s (1-s))`.
pub fn c_star_exact(n: usize, s: f64) -> Result<f64> {
    check_ns(n, s)?;
    let nf = n as f64;
    Ok(PI.powf(nf - 1.0) * gamma(0.5 * (1.0 + s))
        / (gamma(0.5 * (nf + 1.0)) * gamma(0.5 * (nf + s)) * s * (1.0 - s)))
}

fn check_ns(n: usize, s: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!(
            "exponent s must lie in (0,1), got {s}"
        )));
    }
    Ok(())
}

fn check_slab(n: usize, s: f64, r: f64, t: f64) -> Result<()> {
    check_ns(n, s)?;
    if !(n == 2 || n == 3) {
        return Err(Error::Domain(format!(
            "slab integrals are implemented for n = 2, 3, got {n}"
        )));
    }
    if !(r > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!(
            "need r, t > 0, got r = {r}, t = {t}"
        )));
    }
    Ok(())
}

/// `(numeric, closed_form)` for `∫_D ∫_{y_n<0} |x−y|^{-n-s}`, with the
/// closed form `c_star(n, s) r^{n-1} t^{1-s}`.
///
/// For `n = 2` the numeric value is a planar interaction integral of a box
/// against a half-plane; for `n = 3` it integrates over the height of `D`
/// the half-space potential, itself computed in cylindrical coordinates.
pub fn slab_halfspace_interaction(
    n: usize,
    s: f64,
    r: f64,
    t: f64,
    q: &QuadratureParams,
) -> Result<(f64, f64)> {
    check_slab(n, s, r, t)?;
    let closed = c_star(n, s)? * r.powi(n as i32 - 1) * t.powf(1.0 - s);
    let numeric = if n == 2 {
        let k = KernelSpec::isotropic(2, s)?;
        let d = RegionSpec::rect([-r, 0.0], [r, t])?;
        let lower = RegionSpec::half_space([0.0, 1.0], 0.0)?;
        interaction_integral(&k, &d, &lower, q)?.value
    } else {
        let tol = Tolerance::new(1e-300, q.tol).with_max_intervals(4000);
        // Height τ ∈ (0, t) sees the layer at depth u below 0 with weight
        // P(u) = ∫_0^∞ 2πℓ (ℓ²+u²)^{-(3+s)/2} dℓ = W u^{-1-s} (ℓ = u·w), so
        // the double integral is πr² W ∫_0^∞ min(u, t) u^{-1-s} du.
        let w_inner = |w: f64| 2.0 * PI * w * (1.0 + w * w).powf(-0.5 * (3.0 + s));
        let w_total = adaptive_with_breaks(w_inner, &[0.0, 1.0], tol)?.value
            + semi_infinite(w_inner, 1.0, tol)?;
        // u = v^{1/(1-s)} takes the u^{-s} endpoint singularity out of the near part
        let k = 1.0 / (1.0 - s);
        let near = adaptive_with_breaks(
            |v: f64| {
                if v <= 0.0 {
                    k
                } else {
                    v.powf(-k * s) * k * v.powf(k - 1.0)
                }
            },
            &[0.0, t.powf(1.0 - s)],
            tol,
        )?
        .value;
        let far = t * semi_infinite(|u| u.powf(-1.0 - s), t, tol)?;
        let est_value = w_total * (near + far);
        PI * r * r * est_value
    };
    Ok((numeric, closed))
}

/// Interaction of `D` with the shell `(ℝ^{n-1} ∖ B_r) × (0, t)`.
///
/// Integrating over the horizontal displacement `d` first, the value is
/// `∫ |{x ∈ B_r : x + d ∉ B_r}| G(|d|) dd` with
/// `G(ρ) = ∫_{-t}^{t} (t−|u|)(ρ²+u²)^{-(n+s)/2} du`.
pub fn slab_annulus_numeric(n: usize, s: f64, r: f64, t: f64, q: &QuadratureParams) -> Result<f64> {
    check_slab(n, s, r, t)?;
    let tol = Tolerance::new(1e-300, q.tol).with_max_intervals(4000);
    let ex = -0.5 * (n as f64 + s);
    let g = |rho: f64| -> f64 {
        let f = |u: f64| 2.0 * (t - u) * (rho * rho + u * u).powf(ex);
        let mut pts = vec![0.0];
        let mut b = rho;
        while b < t {
            pts.push(b);
            b *= 8.0;
        }
        pts.push(t);
        adaptive_with_breaks(f, &pts, tol)
            .map(|e| e.value)
            .unwrap_or(f64::NAN)
    };
    let overlap = |rho: f64| -> f64 {
        if n == 2 {
            // both signs of the displacement
            2.0 * rho.min(2.0 * r)
        } else {
            let lens = if rho < 2.0 * r {
                2.0 * r * r * (rho / (2.0 * r)).acos()
                    - 0.5 * rho * (4.0 * r * r - rho * rho).sqrt()
            } else {
                0.0
            };
            2.0 * PI * rho * (PI * r * r - lens)
        }
    };
    let integrand = |rho: f64| {
        if rho <= 0.0 {
            0.0
        } else {
            overlap(rho) * g(rho)
        }
    };
    let mut pts = vec![0.0];
    let mut b = 1e-3 * r.min(t);
    while b < 2.0 * r {
        pts.push(b);
        b *= 4.0;
    }
    pts.push(2.0 * r);
    let near = adaptive_with_breaks(integrand, &pts, tol)?.value;
    let far = semi_infinite(integrand, 2.0 * r, tol)?;
    let v = near + far;
    if !v.is_finite() {
        return Err(Error::Accuracy {
            what: "slab shell integral".into(),
            estimate: f64::NAN,
            tolerance: q.tol,
        });
    }
    Ok(v)
}

/// `(numeric, bound)` with `bound = C_fit t r^{n-1-s}` and `C_fit` calibrated
/// so that the bound is attained at `r = t = 1`.
pub fn slab_annulus_bound(
    n: usize,
    s: f64,
    r: f64,
    t: f64,
    q: &QuadratureParams,
) -> Result<(f64, f64)> {
    let numeric = slab_annulus_numeric(n, s, r, t, q)?;
    let c_fit = slab_annulus_numeric(n, s, 1.0, 1.0, q)?;
    Ok((numeric, c_fit * t * r.powf(n as f64 - 1.0 - s)))
}
