//! Contact-angle measurement on droplet rasters.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Mask;

/// Which side of the raster is the wall the droplet rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wall {
    Bottom,
    Top,
    Left,
    Right,
}

impl Wall {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bottom" | "floor" => Ok(Self::Bottom),
            "top" | "ceiling" => Ok(Self::Top),
            "left" => Ok(Self::Left),
            "right" => Ok(Self::Right),
            other => Err(Error::Invalid(format!("unknown wall '{other}'"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Bottom => "bottom",
            Self::Top => "top",
            Self::Left => "left",
            Self::Right => "right",
        }
    }

    /// Re-express `mask` so that this wall becomes the bottom row.
    fn to_bottom(self, mask: &Mask) -> Mask {
        let (w, h) = (mask.width(), mask.height());
        match self {
            Self::Bottom => mask.clone(),
            Self::Top => Mask::from_fn(w, h, |i, j| mask.get(i, h - 1 - j)),
            Self::Left => Mask::from_fn(h, w, |i, j| mask.get(j, i)),
            Self::Right => Mask::from_fn(h, w, |i, j| mask.get(w - 1 - j, i)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactRegime {
    Sticking,
    Detachment,
    Interior,
}

/// One triple point on the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPoint {
    /// Position along the wall, in cells.
    pub x: f64,
    /// True when the droplet lies at larger `x` than the contact point.
    pub droplet_right: bool,
    pub angle: f64,
    pub fitted_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactMeasurement {
    /// Mean angle over the contact points; 0 for sticking, π for detachment.
    pub angle: f64,
    pub regime: ContactRegime,
    pub contact_fraction: f64,
    pub contacts: Vec<ContactPoint>,
}

/// Angle inside `E` between the wall and a total-least-squares line through
/// the `E`/`Ω∖E` interface near each contact point.
///
/// Interface samples are midpoints of cell edges separating `E` from `Ω∖E`
/// that are connected to the contact edge within `window` cells.
pub fn measure_contact_angle(
    e: &Mask,
    omega: &Mask,
    wall: Wall,
    window: usize,
) -> Result<ContactMeasurement> {
    if !e.same_shape(omega) || !e.is_subset_of(omega) {
        return Err(Error::Invalid(
            "droplet must be a subset of the container raster".into(),
        ));
    }
    if window == 0 {
        return Err(Error::Domain("window must be at least one cell".into()));
    }
    let e = wall.to_bottom(e);
    let om = wall.to_bottom(omega);
    let (w, h) = (om.width(), om.height());
    let row = (0..h)
        .find(|&j| (0..w).any(|i| om.get(i, j)))
        .ok_or_else(|| Error::Invalid("empty container".into()))?;
    let wall_cells: Vec<usize> = (0..w).filter(|&i| om.get(i, row)).collect();
    let wet = wall_cells.iter().filter(|&&i| e.get(i, row)).count();
    let fraction = wet as f64 / wall_cells.len() as f64;

    let inside = |i: i64, j: i64| om.get_signed(i, j) && e.get_signed(i, j);
    let outside = |i: i64, j: i64| om.get_signed(i, j) && !e.get_signed(i, j);
    let r = row as i64;
    let mut starts = Vec::new();
    for i in 0..w as i64 {
        if inside(i, r) && outside(i + 1, r) {
            starts.push(((i + 1) as f64, false));
        }
        if inside(i, r) && outside(i - 1, r) {
            starts.push((i as f64, true));
        }
    }

    if fraction < 1.0 / window as f64 {
        return Ok(ContactMeasurement {
            angle: PI,
            regime: ContactRegime::Detachment,
            contact_fraction: fraction,
            contacts: vec![],
        });
    }
    if starts.is_empty() {
        if fraction > 0.9 {
            return Ok(ContactMeasurement {
                angle: 0.0,
                regime: ContactRegime::Sticking,
                contact_fraction: fraction,
                contacts: vec![],
            });
        }
        return Err(Error::Invalid(format!(
            "indeterminate contact: fraction {fraction:.3} with no contact point on the {} wall",
            wall.label()
        )));
    }

    let edges = interface_edges(&e, &om);
    let mut contacts = Vec::with_capacity(starts.len());
    for (x, droplet_right) in starts {
        let c = [x, row as f64];
        let pts = branch(&edges, [x, row as f64 + 0.5], c, window as f64);
        if pts.len() < 2 {
            continue;
        }
        let u = tls_direction(&pts, c);
        let angle = if droplet_right {
            u[1].atan2(u[0])
        } else {
            u[1].atan2(-u[0])
        };
        contacts.push(ContactPoint {
            x,
            droplet_right,
            angle,
            fitted_points: pts.len(),
        });
    }
    if contacts.is_empty() {
        return Err(Error::Invalid(
            "contact points have too few interface samples to fit".into(),
        ));
    }
    let angle = contacts.iter().map(|c| c.angle).sum::<f64>() / contacts.len() as f64;
    Ok(ContactMeasurement {
        angle,
        regime: ContactRegime::Interior,
        contact_fraction: fraction,
        contacts,
    })
}

/// Midpoints of all cell edges between `E` and `Ω∖E`, in cell units with
/// cell `(i, j)` covering `[i, i+1] × [j, j+1]`.
fn interface_edges(e: &Mask, om: &Mask) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for j in 0..om.height() {
        for i in 0..om.width() {
            if !om.get(i, j) {
                continue;
            }
            let (ii, jj) = (i as i64, j as i64);
            let here = e.get(i, j);
            if om.get_signed(ii + 1, jj) && e.get_signed(ii + 1, jj) != here {
                out.push([i as f64 + 1.0, j as f64 + 0.5]);
            }
            if om.get_signed(ii, jj + 1) && e.get_signed(ii, jj + 1) != here {
                out.push([i as f64 + 0.5, j as f64 + 1.0]);
            }
        }
    }
    out
}

/// Interface samples reachable from `seed` through neighbouring edges
/// (midpoints at distance ≤ 1), restricted to the disc of radius `radius`
/// around `centre`.
fn branch(edges: &[[f64; 2]], seed: [f64; 2], centre: [f64; 2], radius: f64) -> Vec<[f64; 2]> {
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let near: Vec<[f64; 2]> = edges
        .iter()
        .copied()
        .filter(|&p| dist(p, centre) <= radius + 1e-9)
        .collect();
    let Some(start) = near.iter().position(|&p| dist(p, seed) < 1e-9) else {
        return Vec::new();
    };
    let mut seen = vec![false; near.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(k) = queue.pop_front() {
        out.push(near[k]);
        for (j, &p) in near.iter().enumerate() {
            if !seen[j] && dist(p, near[k]) <= 1.0 + 1e-9 {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    out
}

/// Principal direction of the point cloud, oriented away from `from`.
fn tls_direction(pts: &[[f64; 2]], from: [f64; 2]) -> [f64; 2] {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in pts {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut u = [phi.cos(), phi.sin()];
    let toward = (mx - from[0]) * u[0] + (my - from[1]) * u[1];
    if toward < 0.0 || (toward == 0.0 && u[1] < 0.0) {
        u = [-u[0], -u[1]];
    }
    u
}
