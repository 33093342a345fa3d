//! Anisotropy functions and interaction kernels
//! `K(ζ) = a(ζ/|ζ|) · |ζ|^{-n-s} · m(|ζ|)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

type DirectionFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Relative evenness tolerance for analytic evaluators.
pub const EVENNESS_TOL_ANALYTIC: f64 = 1e-12;
/// Relative evenness tolerance for tabulated (interpolated) evaluators.
pub const EVENNESS_TOL_TABULATED: f64 = 1e-9;

/// Periodic table `t ↦ a(cos t, sin t)` on a uniform grid of `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
struct AngleTable {
    values: Vec<f64>,
}

impl AngleTable {
    fn eval(&self, t: f64) -> f64 {
        periodic_lerp(&self.values, t)
    }
}

/// Linear interpolation in a table sampled at `k·2π/len`, periodic in `t`.
pub(crate) fn periodic_lerp(values: &[f64], t: f64) -> f64 {
    let n = values.len();
    let step = TAU / n as f64;
    let u = t.rem_euclid(TAU) / step;
    let k = (u.floor() as usize).min(n - 1);
    let frac = u - k as f64;
    let v0 = values[k];
    let v1 = values[(k + 1) % n];
    v0 + (v1 - v0) * frac
}

/// An even, positive weight on the unit sphere `S^{n-1}`.
#[derive(Clone)]
pub struct AnisotropyFn {
    eval: Arc<DirectionFn>,
    a_min: f64,
    a_max: f64,
    dim: usize,
    table: Option<Arc<AngleTable>>,
}

impl fmt::Debug for AnisotropyFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnisotropyFn")
            .field("dim", &self.dim)
            .field("a_min", &self.a_min)
            .field("a_max", &self.a_max)
            .field("tabulated", &self.table.is_some())
            .finish()
    }
}

impl PartialEq for AnisotropyFn {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.eval, &other.eval)
            && self.a_min == other.a_min
            && self.a_max == other.a_max
            && self.dim == other.dim
    }
}

impl AnisotropyFn {
    /// Wraps an evaluator on unit vectors of `ℝ^dim`, with claimed bounds.
    pub fn new<F>(dim: usize, a_min: f64, a_max: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim < 2 {
            return Err(Error::Domain(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        if !(a_min > 0.0 && a_min <= a_max && a_max.is_finite()) {
            return Err(Error::Domain(format!(
                "anisotropy bounds must satisfy 0 < a_min <= a_max, got [{a_min}, {a_max}]"
            )));
        }
        Ok(Self {
            eval: Arc::new(f),
            a_min,
            a_max,
            dim,
            table: None,
        })
    }

    /// The constant weight `a ≡ c`.
    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        Self::new(dim, c, c, move |_| c)
    }

    /// Planar anisotropy given as a function of the polar angle, `a(cos t, sin t) = f(t)`.
    pub fn planar<F>(a_min: f64, a_max: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(2, a_min, a_max, move |w| f(w[1].atan2(w[0])))
    }

    /// Planar anisotropy from samples `(angle, value)`.
    ///
    /// Samples are resampled onto a uniform periodic grid by linear
    /// interpolation and then symmetrized, `a(t) ← ½(a(t) + a(t+π))`,
    /// which enforces evenness exactly.
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Invalid(
                "an anisotropy table needs at least two rows".into(),
            ));
        }
        let mut pts: Vec<(f64, f64)> = samples
            .iter()
            .map(|&(t, v)| (t.rem_euclid(TAU), v))
            .collect();
        if pts.iter().any(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
            return Err(Error::Domain(
                "anisotropy table values must be positive and finite".into(),
            ));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        let raw = |t: f64| -> f64 {
            let t = t.rem_euclid(TAU);
            let (lo, hi) = match pts.partition_point(|p| p.0 <= t) {
                0 => ((last.0 - TAU, last.1), first),
                k if k == pts.len() => (last, (first.0 + TAU, first.1)),
                k => (pts[k - 1], pts[k]),
            };
            lo.1 + (hi.1 - lo.1) * (t - lo.0) / (hi.0 - lo.0)
        };
        let n = (2 * pts.len()).max(1024).next_power_of_two();
        let step = TAU / n as f64;
        let values: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64 * step;
                0.5 * (raw(t) + raw(t + PI))
            })
            .collect();
        Self::from_grid(values)
    }

    /// Planar anisotropy from values on the uniform grid `k·2π/len`.
    fn from_grid(values: Vec<f64>) -> Result<Self> {
        let a_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let a_max = values.iter().cloned().fold(0.0, f64::max);
        let table = Arc::new(AngleTable { values });
        let t2 = Arc::clone(&table);
        let mut a = Self::new(2, a_min, a_max, move |w| t2.eval(w[1].atan2(w[0])))?;
        a.table = Some(table);
        Ok(a)
    }

    /// Parses a text table of `angle_radians value` lines (`#` starts a comment).
    pub fn parse_table(text: &str) -> Result<Self> {
        Self::from_samples(&parse_angle_table(text)?)
    }

    pub fn load_table(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_table(&std::fs::read_to_string(path)?)
    }

    /// Writes `count` equispaced samples in the table format.
    pub fn to_table_string(&self, count: usize) -> Result<String> {
        if self.dim != 2 {
            return Err(Error::Domain(
                "only planar anisotropies have a table form".into(),
            ));
        }
        Ok(format_angle_table((0..count).map(|k| {
            let t = TAU * k as f64 / count as f64;
            (t, self.eval_angle(t))
        })))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a_min(&self) -> f64 {
        self.a_min
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn is_tabulated(&self) -> bool {
        self.table.is_some()
    }

    pub fn evenness_tolerance(&self) -> f64 {
        if self.is_tabulated() {
            EVENNESS_TOL_TABULATED
        } else {
            EVENNESS_TOL_ANALYTIC
        }
    }

    /// Evaluates at a unit direction. The caller normalizes.
    #[inline]
    pub fn eval(&self, omega: &[f64]) -> f64 {
        (self.eval)(omega)
    }

    /// Planar evaluation `a(cos t, sin t)`.
    #[inline]
    pub fn eval_angle(&self, t: f64) -> f64 {
        debug_assert_eq!(self.dim, 2);
        match &self.table {
            Some(tab) => tab.eval(t),
            None => (self.eval)(&[t.cos(), t.sin()]),
        }
    }

    /// Grid angles where a tabulated planar weight has kinks.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.table {
            Some(tab) => {
                let n = tab.values.len();
                (0..n).map(|k| TAU * k as f64 / n as f64).collect()
            }
            None => Vec::new(),
        }
    }
}

pub(crate) fn parse_angle_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected two columns".into(),
            })?
            .parse::<f64>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        };
        let t = parse(it.next())?;
        let v = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::Parse {
                line: i + 1,
                msg: "expected two columns".into(),
            });
        }
        rows.push((t, v));
    }
    Ok(rows)
}

pub(crate) fn format_angle_table(rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    for (t, v) in rows {
        out.push_str(&format!("{t:.17e} {v:.17e}\n"));
    }
    out
}

/// Radial multiplier `r ↦ m(r)` of a profiled kernel.
#[derive(Clone)]
pub struct RadialFn(Arc<ScalarFn>);

impl RadialFn {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.0)(r)
    }
}

impl fmt::Debug for RadialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RadialFn(..)")
    }
}

impl PartialEq for RadialFn {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelForm {
    /// `K(ζ) = a(ζ/|ζ|) / |ζ|^{n+s}`.
    Homogeneous { anisotropy: AnisotropyFn },
    /// `K(ζ) = a(ζ/|ζ|) m(|ζ|) / |ζ|^{n+s}` with `m(r) → 1` as `r → 0`.
    Profiled {
        anisotropy: AnisotropyFn,
        radial: RadialFn,
    },
}

/// Declared smoothness class; recorded, never checked numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Smoothness {
    pub k1: bool,
    pub k2: bool,
}

/// A kernel in the class `K(n, s, λ, ϱ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub dim: usize,
    pub s: f64,
    pub lambda: f64,
    /// Locality radius; `f64::INFINITY` means the lower bound holds everywhere.
    pub rho: f64,
    pub form: KernelForm,
    pub smoothness: Smoothness,
}

impl KernelSpec {
    pub fn new(dim: usize, s: f64, lambda: f64, rho: f64, form: KernelForm) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!(
                "exponent s must lie in (0,1), got {s}"
            )));
        }
        if !(lambda >= 1.0) || lambda.is_infinite() {
            return Err(Error::Domain(format!(
                "ellipticity must be >= 1, got {lambda}"
            )));
        }
        if !(rho > 0.0) {
            return Err(Error::Domain(format!(
                "locality radius must be positive, got {rho}"
            )));
        }
        if form.anisotropy().dim() != dim {
            return Err(Error::Domain(format!(
                "anisotropy dimension {} does not match kernel dimension {dim}",
                form.anisotropy().dim()
            )));
        }
        Ok(Self {
            dim,
            s,
            lambda,
            rho,
            form,
            smoothness: Smoothness::default(),
        })
    }

    /// Homogeneous kernel with ϱ = ∞.
    pub fn homogeneous(anisotropy: AnisotropyFn, s: f64, lambda: f64) -> Result<Self> {
        Self::new(
            anisotropy.dim(),
            s,
            lambda,
            f64::INFINITY,
            KernelForm::Homogeneous { anisotropy },
        )
    }

    /// `1/|ζ|^{n+s}`.
    pub fn isotropic(dim: usize, s: f64) -> Result<Self> {
        Self::homogeneous(AnisotropyFn::constant(dim, 1.0)?, s, 1.0)
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn anisotropy(&self) -> &AnisotropyFn {
        self.form.anisotropy()
    }

    pub fn radial(&self) -> Option<&RadialFn> {
        match &self.form {
            KernelForm::Homogeneous { .. } => None,
            KernelForm::Profiled { radial, .. } => Some(radial),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.form, KernelForm::Homogeneous { .. })
    }

    /// Evaluates `K(ζ)`; `ζ = 0` is the singularity.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim {
            return Err(Error::Domain(format!(
                "point has {} coordinates, kernel dimension is {}",
                z.len(),
                self.dim
            )));
        }
        let r = norm(z);
        if r == 0.0 {
            return Err(Error::Domain("kernel is singular at the origin".into()));
        }
        Ok(self.eval_nonzero(z, r))
    }

    /// `K(ζ)` for `|ζ| = r > 0`, without checks.
    #[inline]
    pub fn eval_nonzero(&self, z: &[f64], r: f64) -> f64 {
        let mut buf = [0.0; 8];
        let a = if z.len() <= buf.len() {
            for (b, x) in buf.iter_mut().zip(z) {
                *b = x / r;
            }
            self.anisotropy().eval(&buf[..z.len()])
        } else {
            let w: Vec<f64> = z.iter().map(|x| x / r).collect();
            self.anisotropy().eval(&w)
        };
        let base = a * r.powf(-(self.dim as f64) - self.s);
        match self.radial() {
            None => base,
            Some(m) => base * m.eval(r),
        }
    }

    /// Planar evaluation at the offset `(x, y) ≠ 0`.
    #[inline]
    pub fn eval2(&self, x: f64, y: f64) -> f64 {
        self.eval_nonzero(&[x, y], x.hypot(y))
    }

    /// Checks the sandwich bounds and evenness at the given nonzero samples.
    pub fn validate(&self, samples: &[Vec<f64>]) -> ValidationReport {
        let mut violations = Vec::new();
        let exp = self.dim as f64 + self.s;
        let even_tol = self.anisotropy().evenness_tolerance();
        for (i, z) in samples.iter().enumerate() {
            let k = match self.eval(z) {
                Ok(v) => v,
                Err(_) => {
                    violations.push(Violation {
                        sample: i,
                        kind: ViolationKind::Invalid,
                        value: f64::NAN,
                        bound: f64::NAN,
                    });
                    continue;
                }
            };
            let r = norm(z);
            let scale = r.powf(-exp);
            let upper = self.lambda * scale;
            if k > upper * (1.0 + 1e-12) {
                violations.push(Violation {
                    sample: i,
                    kind: ViolationKind::Upper,
                    value: k,
                    bound: upper,
                });
            }
            if r < self.rho {
                let lower = scale / self.lambda;
                if k < lower * (1.0 - 1e-12) {
                    violations.push(Violation {
                        sample: i,
                        kind: ViolationKind::Lower,
                        value: k,
                        bound: lower,
                    });
                }
            }
            let neg: Vec<f64> = z.iter().map(|x| -x).collect();
            let kn = self.eval_nonzero(&neg, r);
            if (k - kn).abs() > even_tol * k.abs().max(kn.abs()) {
                violations.push(Violation {
                    sample: i,
                    kind: ViolationKind::Evenness,
                    value: k,
                    bound: kn,
                });
            }
        }
        ValidationReport { violations }
    }

    /// The exactly homogeneous limit `K*(ζ) = lim_{r→0} r^{n+s} K(rζ)`.
    ///
    /// The blow-up lies in `K(n, s, λ, ∞)`. For profiled kernels the limit
    /// `m(r) → 1` is probed on `r = 10^{-10}, …, 10^{-15}`.
    pub fn blowup(&self) -> Result<KernelSpec> {
        match &self.form {
            KernelForm::Homogeneous { .. } if self.rho == f64::INFINITY => Ok(self.clone()),
            KernelForm::Homogeneous { anisotropy } | KernelForm::Profiled { anisotropy, .. } => {
                if let Some(m) = self.radial() {
                    for k in 10..=15 {
                        let r = 10f64.powi(-k);
                        let v = m.eval(r);
                        if !v.is_finite() || (v - 1.0).abs() > 1e-4 {
                            return Err(Error::NoBlowUp(format!(
                                "radial multiplier m({r:e}) = {v} is not close to 1"
                            )));
                        }
                    }
                }
                Ok(KernelSpec {
                    dim: self.dim,
                    s: self.s,
                    lambda: self.lambda,
                    rho: f64::INFINITY,
                    form: KernelForm::Homogeneous {
                        anisotropy: anisotropy.clone(),
                    },
                    smoothness: self.smoothness,
                })
            }
        }
    }
}

impl KernelForm {
    pub fn anisotropy(&self) -> &AnisotropyFn {
        match self {
            KernelForm::Homogeneous { anisotropy } | KernelForm::Profiled { anisotropy, .. } => {
                anisotropy
            }
        }
    }
}

/// Free-function form of [`KernelSpec::eval`].
pub fn eval_kernel(spec: &KernelSpec, z: &[f64]) -> Result<f64> {
    spec.eval(z)
}

/// Free-function form of [`KernelSpec::validate`].
pub fn validate_kernel_class(spec: &KernelSpec, samples: &[Vec<f64>]) -> ValidationReport {
    spec.validate(samples)
}

/// Free-function form of [`KernelSpec::blowup`].
pub fn blowup_kernel(spec: &KernelSpec) -> Result<KernelSpec> {
    spec.blowup()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Lower,
    Upper,
    Evenness,
    /// The sample itself is unusable (zero or wrong dimension).
    Invalid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub sample: usize,
    pub kind: ViolationKind,
    pub value: f64,
    /// The violated bound, or `K(-ζ)` for evenness violations.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

#[inline]
pub(crate) fn norm(z: &[f64]) -> f64 {
    z.iter().map(|x| x * x).sum::<f64>().sqrt()
}
