//! Interaction integrals `I_K(A, B) = ∫_A ∫_B K(x − y) dx dy` in the plane.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use super::pv::{region_integral, PlanarKernel, PvOptions};
use super::region::{GridMask, Point, RegionSpec};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::quad::{adaptive, adaptive_with_breaks, Estimate, GaussLegendre, Tolerance};

/// Discretization and accuracy knobs shared by the geometry routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureParams {
    /// Cell size of grid quadratures.
    pub h: f64,
    /// Pairing radius of principal values; `None` pairs up to the nearest
    /// boundary crossing along each direction.
    pub delta: Option<f64>,
    /// Outer truncation radius. Radial integrals here are exact to infinity,
    /// so this only bounds windows of grid sums.
    pub outer_radius: f64,
    /// Sub-cells per axis for near-diagonal cell pairs.
    pub subdivision: usize,
    /// Relative tolerance of adaptive quadratures.
    pub tol: f64,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self {
            h: 1.0 / 32.0,
            delta: None,
            outer_radius: 1e3,
            subdivision: 4,
            tol: 1e-8,
        }
    }
}

impl QuadratureParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !(self.tol > 0.0) || self.subdivision == 0 {
            return Err(Error::Domain(
                "cell size, tolerance and subdivision must be positive".into(),
            ));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < self.outer_radius) {
                return Err(Error::Domain(format!(
                    "need 0 < δ < R, got δ = {d}, R = {}",
                    self.outer_radius
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn pv_options(&self) -> PvOptions {
        PvOptions {
            delta: self.delta,
            tol: Tolerance::new(1e-14, (self.tol * 1e-3).max(1e-12)).with_max_intervals(20_000),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionResult {
    pub value: f64,
    /// Bound on the neglected far-field part. The quadratures here integrate
    /// radially to infinity, so this is zero unless a window was truncated.
    pub tail_bound: f64,
}

/// Cell-pair weights `w(d) = ∫_{cell}∫_{cell+hd} K(x−y)`, cached by integer
/// offset; `w(0) = 0` (self-interaction is excluded).
///
/// With the tent `T(t) = (h − |t|)₊`, `w(d) = ∫ K(z) T(z₁ − h d₁) T(z₂ − h d₂) dz`.
/// Each quadrant of the tent support is smooth away from `z = 0`, so far
/// offsets use tensor Gauss–Legendre of order `2·subdivision` and touching
/// cells use nested adaptive quadrature.
#[derive(Debug, Clone)]
pub struct KernelTable {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl KernelTable {
    /// Table for offsets `|dx| < nx`, `|dy| < ny`.
    pub fn new(k: &KernelSpec, h: f64, nx: usize, ny: usize, subdivision: usize) -> Result<Self> {
        if k.dim != 2 {
            return Err(Error::Domain("grid interactions need a 2D kernel".into()));
        }
        let wx = 2 * nx - 1;
        let wy = 2 * ny - 1;
        let gl = GaussLegendre::new(2 * subdivision.max(1));
        let offsets: Vec<(i64, i64)> = (0..ny as i64)
            .flat_map(|dy| (-(nx as i64) + 1..nx as i64).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| dy > 0 || dx > 0)
            .collect();
        let computed: Vec<Result<f64>> = offsets
            .par_iter()
            .map(|&(dx, dy)| {
                let touching = dx.abs() <= 1 && dy.abs() <= 1;
                let mut acc = 0.0;
                for (x0, x1) in [(dx - 1, dx), (dx, dx + 1)] {
                    for (y0, y1) in [(dy - 1, dy), (dy, dy + 1)] {
                        let (a, b, c, d) =
                            (h * x0 as f64, h * x1 as f64, h * y0 as f64, h * y1 as f64);
                        // distance to the nearer edge of the support, exact near z = 0
                        let (lx, ux) = (h * (dx - 1) as f64, h * (dx + 1) as f64);
                        let (ly, uy) = (h * (dy - 1) as f64, h * (dy + 1) as f64);
                        let tent =
                            |z1: f64, z2: f64| (z1 - lx).min(ux - z1) * (z2 - ly).min(uy - z2);
                        acc += if touching {
                            near_quadrant(k, a, b, c, d, &tent)?
                        } else {
                            gl.integrate(a, b, |z1| {
                                gl.integrate(c, d, |z2| k.eval2(z1, z2) * tent(z1, z2))
                            })
                        };
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut values = vec![0.0; wx * wy];
        for (&(dx, dy), v) in offsets.iter().zip(computed) {
            let v = v?;
            let i = ((dy + ny as i64 - 1) as usize) * wx + (dx + nx as i64 - 1) as usize;
            let j = ((-dy + ny as i64 - 1) as usize) * wx + (-dx + nx as i64 - 1) as usize;
            values[i] = v;
            values[j] = v;
        }
        Ok(Self { nx, ny, values })
    }

    #[inline]
    pub fn get(&self, dx: i64, dy: i64) -> f64 {
        let wx = 2 * self.nx - 1;
        self.values[((dy + self.ny as i64 - 1) as usize) * wx + (dx + self.nx as i64 - 1) as usize]
    }

    pub fn extent(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
}

/// `∫_a^b ∫_c^d K(z) T(z) dz` on a quadrant of a touching offset.
///
/// When `z = 0` is a corner, polar coordinates around it with
/// `r = R u^{1/(1−s)}` turn the `r^{-s}` radial behaviour into a smooth
/// integrand; other quadrants are smooth and use nested adaptive quadrature.
fn near_quadrant(
    k: &KernelSpec,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    tent: &dyn Fn(f64, f64) -> f64,
) -> Result<f64> {
    let tol = Tolerance::new(1e-300, 1e-12).with_max_intervals(4000);
    let corner = (a == 0.0 || b == 0.0) && (c == 0.0 || d == 0.0);
    if !corner {
        let mut failure = None;
        let outer = adaptive(
            |z1| match adaptive(|z2| k.eval2(z1, z2) * tent(z1, z2), c, d, tol) {
                Ok(e) => e.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
            tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        return Ok(outer?.value);
    }
    let (sx, x) = if a == 0.0 { (1.0, b) } else { (-1.0, -a) };
    let (sy, y) = if c == 0.0 { (1.0, d) } else { (-1.0, -c) };
    let p = 1.0 / (1.0 - k.s);
    let mut failure = None;
    let ray = |alpha: f64| {
        let (ca, sa) = (alpha.cos(), alpha.sin());
        let r_max = (x / ca).min(y / sa);
        // r = R u^p, dr = R p u^{p−1} du; the leading r^{-s} term becomes
        // constant, higher-order tent terms leave u^{p} powers
        let f = |u: f64| {
            let r = r_max * u.powf(p);
            let (z1, z2) = (sx * r * ca, sy * r * sa);
            r * k.eval2(z1, z2) * tent(z1, z2) * r_max * p * u.powf(p - 1.0)
        };
        match adaptive(f, 0.0, 1.0, tol) {
            Ok(e) => e.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let split = y.atan2(x);
    let est = adaptive_with_breaks(ray, &[0.0, split, 0.5 * PI], tol);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est?.value)
}

/// `∑_{a∈A} ∑_{b∈B} w(b − a)` over flat cell indices of a `width`-wide raster,
/// reduced in a fixed order.
pub fn grid_pair_sum(table: &KernelTable, width: usize, a: &[usize], b: &[usize]) -> f64 {
    let bc: Vec<(i64, i64)> = b
        .iter()
        .map(|&k| ((k % width) as i64, (k / width) as i64))
        .collect();
    let rows: Vec<f64> = a
        .par_iter()
        .map(|&k| {
            let (ax, ay) = ((k % width) as i64, (k / width) as i64);
            bc.iter()
                .map(|&(bx, by)| table.get(bx - ax, by - ay))
                .sum::<f64>()
        })
        .collect();
    pairwise_sum(&rows)
}

pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// `I_K(A, B)` for essentially disjoint planar regions.
pub fn interaction_integral(
    k: &KernelSpec,
    a: &RegionSpec,
    b: &RegionSpec,
    q: &QuadratureParams,
) -> Result<InteractionResult> {
    q.validate()?;
    if k.dim != 2 {
        return Err(Error::Domain(
            "interaction integrals are implemented for planar kernels".into(),
        ));
    }
    if let (RegionSpec::GridMask(ga), RegionSpec::GridMask(gb)) = (a, b) {
        return grid_interaction(k, ga, gb, q);
    }
    let (outer, inner) = order_regions(a, b)?;
    check_overlap(outer, inner)?;
    let pk = PlanarKernel::from_spec(k)?;
    let touches = |x: Point| inner.contains(x);
    let value = area_integral(outer, q, k.s, &touches, |x| {
        region_integral(x, inner, &pk, &q.pv_options())
    })?;
    Ok(InteractionResult {
        value,
        tail_bound: 0.0,
    })
}

fn grid_interaction(
    k: &KernelSpec,
    a: &GridMask,
    b: &GridMask,
    q: &QuadratureParams,
) -> Result<InteractionResult> {
    if !a.same_grid(b) {
        return Err(Error::Invalid("grid masks must share the same grid".into()));
    }
    if a.mask
        .cells()
        .iter()
        .zip(b.mask.cells())
        .any(|(x, y)| *x && *y)
    {
        return Err(Error::Overlap("grid masks share cells".into()));
    }
    let (w, h) = (a.mask.width(), a.mask.height());
    let table = KernelTable::new(k, a.h, w, h, q.subdivision)?;
    let value = grid_pair_sum(&table, w, &a.mask.indices(), &b.mask.indices());
    Ok(InteractionResult {
        value,
        tail_bound: 0.0,
    })
}

/// Picks the bounded region with the smaller box as the outer integration
/// domain. The choice does not depend on argument order, which makes the
/// result exactly symmetric.
fn order_regions<'r>(
    a: &'r RegionSpec,
    b: &'r RegionSpec,
) -> Result<(&'r RegionSpec, &'r RegionSpec)> {
    let area = |r: &RegionSpec| {
        r.bounding_box()
            .map(|(lo, hi)| (hi[0] - lo[0]) * (hi[1] - lo[1]))
    };
    match (area(a), area(b)) {
        (None, None) => Err(Error::Invalid("at least one region must be bounded".into())),
        (Some(_), None) => Ok((a, b)),
        (None, Some(_)) => Ok((b, a)),
        (Some(x), Some(y)) => {
            if x < y || (x == y && format!("{a:?}") <= format!("{b:?}")) {
                Ok((a, b))
            } else {
                Ok((b, a))
            }
        }
    }
}

fn check_overlap(outer: &RegionSpec, inner: &RegionSpec) -> Result<()> {
    let (lo, hi) = outer.bounding_box().expect("outer region is bounded");
    let n = 96;
    let mut hits = 0;
    for j in 0..n {
        for i in 0..n {
            let x = [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / n as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / n as f64,
            ];
            if outer.contains(x) && inner.contains(x) {
                hits += 1;
            }
        }
    }
    if hits > 0 {
        return Err(Error::Overlap(format!(
            "{hits} of {} probe points lie in both regions",
            n * n
        )));
    }
    Ok(())
}

/// `∫_R f` over a bounded region by nested adaptive quadrature over vertical sections.
///
/// Sections whose ends lie against a set flagged by `other` (points just
/// beyond the end test inside) get the tanh-sinh map, since `f` may blow
/// up like `dist^{-s}` there.
pub(crate) fn area_integral<F>(
    region: &RegionSpec,
    q: &QuadratureParams,
    s: f64,
    other: &(dyn Fn(Point) -> bool + Sync),
    f: F,
) -> Result<f64>
where
    F: Fn(Point) -> Result<f64> + Sync,
{
    let (lo, hi) = region
        .bounding_box()
        .ok_or_else(|| Error::Invalid("area integrals need a bounded region".into()))?;
    if hi[0] <= lo[0] || hi[1] <= lo[1] {
        return Ok(0.0);
    }
    let mut xs = vec![lo[0], hi[0]];
    region.vertical_breaks(&mut xs);
    xs.retain(|x| *x >= lo[0] && *x <= hi[0]);
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    let tol_outer = Tolerance::new(1e-300, q.tol).with_max_intervals(2000);
    let tol_inner = Tolerance::new(1e-300, q.tol * 0.1).with_max_intervals(2000);
    let failure = std::sync::Mutex::new(None);
    let record = |e: Error| {
        let mut slot = failure.lock().expect("poisoned");
        if slot.is_none() {
            *slot = Some(e);
        }
    };
    let section = |x1: f64| -> f64 {
        let base = [x1, lo[1] - 1.0];
        let ivs = region.ray_intervals(base, [0.0, 1.0]);
        let mut acc = 0.0;
        for (a, b) in ivs {
            let (y0, y1) = (base[1] + a, (base[1] + b).min(hi[1]));
            if y1 <= y0 {
                continue;
            }
            let g = |y: f64| match f([x1, y]) {
                Ok(v) => v,
                Err(e) => {
                    record(e);
                    0.0
                }
            };
            let eps = 1e-9 * (1.0 + y0.abs().max(y1.abs()));
            let singular = other([x1, y0 - eps]) || other([x1, y1 + eps]);
            let est = if singular {
                graded(g, y0, y1, s, tol_inner)
            } else {
                adaptive_with_breaks(g, &[y0, y1], tol_inner)
            };
            match est {
                Ok(est) => acc += est.value,
                Err(e) => record(e),
            }
        }
        acc
    };
    // The outer panels are independent; evaluate them in parallel and reduce in order.
    let panels: Vec<(f64, f64)> = xs.windows(2).map(|w| (w[0], w[1])).collect();
    let parts: Vec<Result<f64>> = panels
        .par_iter()
        .map(|&(a, b)| adaptive_with_breaks(&section, &[a, b], tol_outer).map(|e| e.value))
        .collect();
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// `∫_a^b f` for integrands that may blow up like `dist^{-s}` at either end,
/// after the tanh-sinh map `y = a + (b−a)(1 + tanh(π/2 sinh t))/2`.
fn graded<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, s: f64, tol: Tolerance) -> Result<Estimate> {
    let len = b - a;
    // truncate where the neglected end mass (w·len)^{1−s} drops below 1e-17
    let x_max = 0.5 * 17.0 * std::f64::consts::LN_10 / (1.0 - s) + 1.0;
    let t_max = (x_max / FRAC_PI_2).asinh();
    let mapped = |t: f64| {
        let x = FRAC_PI_2 * t.sinh();
        // share of the interval between y and the nearer end
        let w = 1.0 / (1.0 + (2.0 * x.abs()).exp());
        let y = if t < 0.0 { a + len * w } else { b - len * w };
        if w == 0.0 || y <= a || y >= b {
            return 0.0;
        }
        f(y) * len * 2.0 * w * (1.0 - w) * FRAC_PI_2 * t.cosh()
    };
    adaptive_with_breaks(mapped, &[-t_max, 0.0, t_max], tol)
}
