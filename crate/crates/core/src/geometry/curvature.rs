//! Nonlocal `K`-mean curvature and the pointwise Euler–Lagrange residual.

use super::interaction::QuadratureParams;
use super::pv::{pv_integral, PlanarKernel, Term};
use super::region::{Point, RegionSpec};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// `H^K_{∂E}(x) = p.v. ∫ K(x−y)(χ_{E^c}(y) − χ_E(y)) dy` for a planar kernel.
///
/// Fails with a principal-value error when `x` is not a boundary point at
/// which `E` is locally a graph or a cone with vertex `x`.
pub fn k_mean_curvature(
    k: &KernelSpec,
    e: &RegionSpec,
    x: Point,
    q: &QuadratureParams,
) -> Result<f64> {
    q.validate()?;
    let pk = PlanarKernel::from_spec(k)?;
    let ec = e.clone().complement();
    let terms = [
        Term {
            weight: 1.0,
            region: &ec,
            kernel: 0,
        },
        Term {
            weight: -1.0,
            region: e,
            kernel: 0,
        },
    ];
    pv_integral(x, &terms, &[pk], &q.pv_options())
}

/// `H^{K₁}_{∂E}(x) − ∫_{Ω^c} K₁(x−y) dy + σ ∫_{Ω^c} K₂(x−y) dy + g(x)`.
///
/// Along the regular part of a minimizer's free boundary this is the
/// Lagrange multiplier of the volume constraint, hence constant.
#[allow(clippy::too_many_arguments)]
pub fn el_residual(
    k1: &KernelSpec,
    k2: &KernelSpec,
    sigma: f64,
    g: &dyn Fn(Point) -> f64,
    omega: &RegionSpec,
    e: &RegionSpec,
    x: Point,
    q: &QuadratureParams,
) -> Result<f64> {
    q.validate()?;
    if !omega.contains(x) {
        return Err(Error::Domain(format!(
            "point ({}, {}) is not inside the container",
            x[0], x[1]
        )));
    }
    let p1 = PlanarKernel::from_spec(k1)?;
    let p2 = PlanarKernel::from_spec(k2)?;
    let ec = e.clone().complement();
    let oc = omega.clone().complement();
    let terms = [
        Term {
            weight: 1.0,
            region: &ec,
            kernel: 0,
        },
        Term {
            weight: -1.0,
            region: e,
            kernel: 0,
        },
        Term {
            weight: -1.0,
            region: &oc,
            kernel: 0,
        },
        Term {
            weight: sigma,
            region: &oc,
            kernel: 1,
        },
    ];
    let v = pv_integral(x, &terms, &[p1, p2], &q.pv_options())?;
    Ok(v + g(x))
}
