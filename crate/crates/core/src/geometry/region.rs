//! Planar regions with membership tests and ray/boundary intersections.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use smallvec::SmallVec;

use super::mask::Mask;
use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// A raster placed in the plane: cell `(i, j)` covers
/// `origin + h·[i, i+1] × h·[j, j+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMask {
    pub mask: Arc<Mask>,
    pub h: f64,
    pub origin: Point,
}

impl GridMask {
    pub fn new(mask: Arc<Mask>, h: f64) -> Self {
        Self {
            mask,
            h,
            origin: [0.0, 0.0],
        }
    }

    pub fn same_grid(&self, other: &GridMask) -> bool {
        self.mask.same_shape(&other.mask) && self.h == other.h && self.origin == other.origin
    }

    #[inline]
    pub fn cell_of(&self, y: Point) -> Option<(usize, usize)> {
        let u = ((y[0] - self.origin[0]) / self.h).floor();
        let v = ((y[1] - self.origin[1]) / self.h).floor();
        if u < 0.0 || v < 0.0 || u >= self.mask.width() as f64 || v >= self.mask.height() as f64 {
            return None;
        }
        Some((u as usize, v as usize))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        [
            self.origin[0] + (i as f64 + 0.5) * self.h,
            self.origin[1] + (j as f64 + 0.5) * self.h,
        ]
    }

    fn extent(&self) -> (Point, Point) {
        (
            self.origin,
            [
                self.origin[0] + self.mask.width() as f64 * self.h,
                self.origin[1] + self.mask.height() as f64 * self.h,
            ],
        )
    }
}

/// Open planar sets.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Whole,
    Empty,
    /// `{y : normal·y < offset}`.
    HalfSpace {
        normal: Point,
        offset: f64,
    },
    /// The open cone `J_{θ₁,θ₂}` of points with polar angle in `(θ₁, θ₂)`,
    /// angles taken modulo 2π; requires `0 < θ₂ − θ₁ ≤ 2π`.
    Wedge {
        theta1: f64,
        theta2: f64,
    },
    Ball {
        center: Point,
        radius: f64,
    },
    Box {
        min: Point,
        max: Point,
    },
    GridMask(GridMask),
    Complement(Box<RegionSpec>),
    Intersection(Vec<RegionSpec>),
    Union(Vec<RegionSpec>),
}

/// Sub-intervals `[a, b]` of a ray, `b` possibly infinite.
pub type RayIntervals = SmallVec<[(f64, f64); 4]>;

impl RegionSpec {
    pub fn half_space(normal: Point, offset: f64) -> Result<Self> {
        let len = normal[0].hypot(normal[1]);
        if !(len > 0.0) {
            return Err(Error::Domain("half-space normal must be nonzero".into()));
        }
        Ok(Self::HalfSpace {
            normal: [normal[0] / len, normal[1] / len],
            offset: offset / len,
        })
    }

    /// The upper half-plane `H = {x₂ > 0}`.
    pub fn upper_half_plane() -> Self {
        Self::HalfSpace {
            normal: [0.0, -1.0],
            offset: 0.0,
        }
    }

    pub fn wedge(theta1: f64, theta2: f64) -> Result<Self> {
        let w = theta2 - theta1;
        if !(w > 0.0 && w <= TAU) {
            return Err(Error::Domain(format!(
                "wedge needs 0 < θ₂ − θ₁ ≤ 2π, got ({theta1}, {theta2})"
            )));
        }
        Ok(Self::Wedge { theta1, theta2 })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn rect(min: Point, max: Point) -> Result<Self> {
        if !(min[0] < max[0] && min[1] < max[1]) {
            return Err(Error::Domain("box corners must satisfy min < max".into()));
        }
        Ok(Self::Box { min, max })
    }

    pub fn grid(mask: Arc<Mask>, h: f64, origin: Point) -> Self {
        Self::GridMask(GridMask { mask, h, origin })
    }

    pub fn complement(self) -> Self {
        match self {
            Self::Complement(inner) => *inner,
            Self::Whole => Self::Empty,
            Self::Empty => Self::Whole,
            other => Self::Complement(Box::new(other)),
        }
    }

    pub fn intersect(self, other: RegionSpec) -> Self {
        Self::Intersection(vec![self, other])
    }

    pub fn contains(&self, y: Point) -> bool {
        match self {
            Self::Whole => true,
            Self::Empty => false,
            Self::HalfSpace { normal, offset } => normal[0] * y[0] + normal[1] * y[1] < *offset,
            Self::Wedge { theta1, theta2 } => {
                if y[0] == 0.0 && y[1] == 0.0 {
                    return false;
                }
                let w = theta2 - theta1;
                let rel = (y[1].atan2(y[0]) - theta1).rem_euclid(TAU);
                if w >= TAU {
                    rel > 0.0
                } else {
                    rel > 0.0 && rel < w
                }
            }
            Self::Ball { center, radius } => (y[0] - center[0]).hypot(y[1] - center[1]) < *radius,
            Self::Box { min, max } => {
                y[0] > min[0] && y[0] < max[0] && y[1] > min[1] && y[1] < max[1]
            }
            Self::GridMask(g) => g.cell_of(y).is_some_and(|(i, j)| g.mask.get(i, j)),
            Self::Complement(r) => !r.contains(y),
            Self::Intersection(rs) => rs.iter().all(|r| r.contains(y)),
            Self::Union(rs) => rs.iter().any(|r| r.contains(y)),
        }
    }

    /// Parameters `t > 0` at which the ray `p + t·d` may cross the boundary.
    pub fn ray_breaks(&self, p: Point, d: Point, out: &mut Vec<f64>) {
        self.ray_breaks_eps(p, d, 0.0, out)
    }

    /// [`Self::ray_breaks`] for a base point that counts as lying on every
    /// boundary piece within distance `eps`; crossings of those pieces at
    /// `p` itself are left out.
    fn ray_breaks_eps(&self, p: Point, d: Point, eps: f64, out: &mut Vec<f64>) {
        match self {
            Self::Whole | Self::Empty => {}
            Self::HalfSpace { normal, offset } => {
                let nd = normal[0] * d[0] + normal[1] * d[1];
                let gap = offset - normal[0] * p[0] - normal[1] * p[1];
                if nd != 0.0 && gap.abs() > eps {
                    out.push(gap / nd);
                }
            }
            Self::Wedge { theta1, theta2 } => {
                let at_vertex = p[0].hypot(p[1]) <= eps;
                for &th in &[*theta1, *theta2] {
                    let e = [th.cos(), th.sin()];
                    let on_edge = cross(p, e).abs() <= eps && p[0] * e[0] + p[1] * e[1] >= -eps;
                    let cde = cross(d, e);
                    if cde != 0.0 && !on_edge && !at_vertex {
                        let t = -cross(p, e) / cde;
                        let r = (p[0] + t * d[0]) * e[0] + (p[1] + t * d[1]) * e[1];
                        if r >= 0.0 {
                            out.push(t);
                        }
                    }
                }
                // the vertex
                if !at_vertex && cross(p, d).abs() <= 1e-15 * (p[0].hypot(p[1])) {
                    out.push(-(p[0] * d[0] + p[1] * d[1]));
                }
            }
            Self::Ball { center, radius } => {
                let q = [p[0] - center[0], p[1] - center[1]];
                let b = q[0] * d[0] + q[1] * d[1];
                if (q[0].hypot(q[1]) - radius).abs() <= eps {
                    // p on the circle: the other root is -2b exactly, however
                    // small, which keeps near-tangent chords
                    if b < 0.0 {
                        out.push(-2.0 * b);
                    }
                    return;
                }
                let c = q[0] * q[0] + q[1] * q[1] - radius * radius;
                let disc = b * b - c;
                if disc > 0.0 {
                    let far = -b - b.signum() * disc.sqrt();
                    out.push(far);
                    if far != 0.0 {
                        out.push(c / far);
                    }
                }
            }
            Self::Box { min, max } => {
                for k in 0..2 {
                    if d[k] != 0.0 {
                        for m in [min[k], max[k]] {
                            if (m - p[k]).abs() > eps {
                                out.push((m - p[k]) / d[k]);
                            }
                        }
                    }
                }
            }
            Self::GridMask(g) => {
                let (lo, hi) = g.extent();
                let dims = [g.mask.width(), g.mask.height()];
                for k in 0..2 {
                    if d[k] != 0.0 {
                        for line in 0..=dims[k] {
                            let x = if line == dims[k] {
                                hi[k]
                            } else {
                                lo[k] + line as f64 * g.h
                            };
                            if (x - p[k]).abs() > eps {
                                out.push((x - p[k]) / d[k]);
                            }
                        }
                    }
                }
            }
            Self::Complement(r) => r.ray_breaks_eps(p, d, eps, out),
            Self::Intersection(rs) | Self::Union(rs) => {
                for r in rs {
                    r.ray_breaks_eps(p, d, eps, out);
                }
            }
        }
    }

    /// Whether `p + τd` lies in the region for all small `τ > 0`, with `p`
    /// counted as on any boundary piece within distance `eps`.
    fn contains_dir(&self, p: Point, d: Point, eps: f64) -> bool {
        match self {
            Self::Whole => true,
            Self::Empty => false,
            Self::HalfSpace { normal, offset } => {
                let gap = offset - normal[0] * p[0] - normal[1] * p[1];
                if gap.abs() > eps {
                    gap > 0.0
                } else {
                    normal[0] * d[0] + normal[1] * d[1] < 0.0
                }
            }
            Self::Wedge { theta1, theta2 } => {
                if p[0].hypot(p[1]) <= eps {
                    return self.contains(d);
                }
                let mut on_edge = false;
                let mut inward = true;
                for (&th, side) in [(theta1, 1.0), (theta2, -1.0)] {
                    let e = [th.cos(), th.sin()];
                    if cross(e, p).abs() <= eps && p[0] * e[0] + p[1] * e[1] > 0.0 {
                        on_edge = true;
                        inward &= side * cross(e, d) > 0.0;
                    }
                }
                if on_edge {
                    inward
                } else {
                    self.contains(p)
                }
            }
            Self::Ball { center, radius } => {
                let q = [p[0] - center[0], p[1] - center[1]];
                let gap = radius - q[0].hypot(q[1]);
                if gap.abs() > eps {
                    gap > 0.0
                } else {
                    q[0] * d[0] + q[1] * d[1] < 0.0
                }
            }
            Self::Box { min, max } => (0..2).all(|k| {
                if p[k] < min[k] - eps || p[k] > max[k] + eps {
                    false
                } else if (p[k] - min[k]).abs() <= eps {
                    d[k] > 0.0
                } else if (p[k] - max[k]).abs() <= eps {
                    d[k] < 0.0
                } else {
                    true
                }
            }),
            Self::GridMask(g) => {
                let mut idx = [0i64; 2];
                for k in 0..2 {
                    let x = (p[k] - g.origin[k]) / g.h;
                    let line = x.round();
                    idx[k] = if (x - line).abs() * g.h <= eps {
                        line as i64 - i64::from(d[k] < 0.0)
                    } else {
                        x.floor() as i64
                    };
                }
                g.mask.get_signed(idx[0], idx[1])
            }
            Self::Complement(r) => !r.contains_dir(p, d, eps),
            Self::Intersection(rs) => rs.iter().all(|r| r.contains_dir(p, d, eps)),
            Self::Union(rs) => rs.iter().any(|r| r.contains_dir(p, d, eps)),
        }
    }

    /// Whether some piece of the region is a circle.
    pub(crate) fn is_curved(&self) -> bool {
        match self {
            Self::Ball { .. } => true,
            Self::Complement(r) => r.is_curved(),
            Self::Intersection(rs) | Self::Union(rs) => rs.iter().any(|r| r.is_curved()),
            _ => false,
        }
    }

    /// Maximal sub-intervals of `{t ≥ 0 : p + t·d ∈ self}` for a unit vector `d`.
    ///
    /// A base point within `1e-12·(1+|p|)` of a boundary piece counts as
    /// lying on it.
    pub fn ray_intervals(&self, p: Point, d: Point) -> RayIntervals {
        self.ray_intervals_eps(p, d, 1e-12 * (1.0 + p[0].hypot(p[1])))
    }

    /// [`Self::ray_intervals`] with snapping distance `eps`; `eps = 0`
    /// suits base points known to lie off the boundary, however close.
    pub(crate) fn ray_intervals_eps(&self, p: Point, d: Point, eps: f64) -> RayIntervals {
        let mut breaks = Vec::with_capacity(8);
        self.ray_breaks_eps(p, d, eps, &mut breaks);
        breaks.retain(|t| *t > 0.0 && t.is_finite());
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1.0));
        let mut out = RayIntervals::new();
        let mut lo = 0.0;
        let push = |a: f64, b: f64, out: &mut RayIntervals| {
            if let Some(last) = out.last_mut() {
                if last.1 == a {
                    last.1 = b;
                    return;
                }
            }
            out.push((a, b));
        };
        // chords shorter than this are classified by direction, not by sampling
        let short = 1e-6 * (1.0 + p[0].hypot(p[1]));
        for &t in &breaks {
            let inside = if lo == 0.0 && t < short {
                self.contains_dir(p, d, eps)
            } else {
                let mid = 0.5 * (lo + t);
                self.contains([p[0] + mid * d[0], p[1] + mid * d[1]])
            };
            if inside {
                push(lo, t, &mut out);
            }
            lo = t;
        }
        let probe = if lo == 0.0 { 1.0 } else { 2.0 * lo + 1.0 };
        if self.contains([p[0] + probe * d[0], p[1] + probe * d[1]]) {
            push(lo, f64::INFINITY, &mut out);
        }
        out
    }

    /// Directions (polar angles) seen from `p` across which the ray
    /// intersections change combinatorially.
    pub fn critical_directions(&self, p: Point, out: &mut Vec<f64>) {
        let to = |q: Point| (q[1] - p[1]).atan2(q[0] - p[0]);
        match self {
            Self::Whole | Self::Empty => {}
            Self::HalfSpace { normal, .. } => out.push((-normal[1]).atan2(normal[0])),
            Self::Wedge { theta1, theta2 } => {
                out.push(*theta1);
                out.push(*theta2);
                if p != [0.0, 0.0] {
                    out.push(to([0.0, 0.0]));
                }
            }
            Self::Ball { center, radius } => {
                let dist = (center[0] - p[0]).hypot(center[1] - p[1]);
                if dist > 0.0 {
                    let c = to(*center);
                    out.push(c);
                    // tangents too when p sits on the circle, where both rays miss the ball
                    if dist >= radius * (1.0 - 1e-12) {
                        let half = (radius / dist).min(1.0).asin();
                        out.push(c - half);
                        out.push(c + half);
                    }
                }
            }
            Self::Box { min, max } => {
                for q in [
                    [min[0], min[1]],
                    [max[0], min[1]],
                    [max[0], max[1]],
                    [min[0], max[1]],
                ] {
                    if q != p {
                        out.push(to(q));
                    }
                }
                out.push(0.0);
                out.push(0.5 * PI);
            }
            Self::GridMask(g) => {
                out.push(0.0);
                out.push(0.5 * PI);
                // corners of nearby cells, where the ray crossings reorder
                let ci = ((p[0] - g.origin[0]) / g.h).round() as i64;
                let cj = ((p[1] - g.origin[1]) / g.h).round() as i64;
                for dj in -3..=3 {
                    for di in -3..=3 {
                        let q = [
                            g.origin[0] + (ci + di) as f64 * g.h,
                            g.origin[1] + (cj + dj) as f64 * g.h,
                        ];
                        if (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-12 * g.h {
                            out.push(to(q));
                        }
                    }
                }
            }
            Self::Complement(r) => r.critical_directions(p, out),
            Self::Intersection(rs) | Self::Union(rs) => {
                for r in rs {
                    r.critical_directions(p, out);
                }
            }
        }
    }

    /// Axis-aligned bounding box, or `None` if unbounded.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match self {
            Self::Empty => Some(([0.0, 0.0], [0.0, 0.0])),
            Self::Whole | Self::HalfSpace { .. } | Self::Wedge { .. } | Self::Complement(_) => None,
            Self::Ball { center, radius } => Some((
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            )),
            Self::Box { min, max } => Some((*min, *max)),
            Self::GridMask(g) => {
                let idx = g.mask.indices();
                if idx.is_empty() {
                    return Some((g.origin, g.origin));
                }
                let (mut i0, mut j0, mut i1, mut j1) = (usize::MAX, usize::MAX, 0, 0);
                for k in idx {
                    let (i, j) = g.mask.coords(k);
                    i0 = i0.min(i);
                    j0 = j0.min(j);
                    i1 = i1.max(i + 1);
                    j1 = j1.max(j + 1);
                }
                Some((
                    [g.origin[0] + i0 as f64 * g.h, g.origin[1] + j0 as f64 * g.h],
                    [g.origin[0] + i1 as f64 * g.h, g.origin[1] + j1 as f64 * g.h],
                ))
            }
            Self::Intersection(rs) => rs.iter().filter_map(|r| r.bounding_box()).reduce(|a, b| {
                (
                    [a.0[0].max(b.0[0]), a.0[1].max(b.0[1])],
                    [a.1[0].min(b.1[0]), a.1[1].min(b.1[1])],
                )
            }),
            Self::Union(rs) => {
                let boxes: Option<Vec<_>> = rs.iter().map(|r| r.bounding_box()).collect();
                boxes?.into_iter().reduce(|a, b| {
                    (
                        [a.0[0].min(b.0[0]), a.0[1].min(b.0[1])],
                        [a.1[0].max(b.1[0]), a.1[1].max(b.1[1])],
                    )
                })
            }
        }
    }

    /// Horizontal coordinates where vertical sections of the region change shape.
    pub fn vertical_breaks(&self, out: &mut Vec<f64>) {
        match self {
            Self::Whole | Self::Empty | Self::HalfSpace { .. } => {}
            Self::Wedge { .. } => out.push(0.0),
            Self::Ball { center, radius } => {
                out.push(center[0] - radius);
                out.push(center[0] + radius);
            }
            Self::Box { min, max } => {
                out.push(min[0]);
                out.push(max[0]);
            }
            Self::GridMask(g) => {
                for i in 0..=g.mask.width() {
                    out.push(g.origin[0] + i as f64 * g.h);
                }
            }
            Self::Complement(r) => r.vertical_breaks(out),
            Self::Intersection(rs) | Self::Union(rs) => {
                for r in rs {
                    r.vertical_breaks(out);
                }
            }
        }
    }
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// `e(α) = (cos α, sin α)`.
#[inline]
pub fn unit(alpha: f64) -> Point {
    let (s, c) = alpha.sin_cos();
    [c, s]
}
