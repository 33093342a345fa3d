//! Discrete volume-constrained minimization of the capillarity energy
//! `C(E) = I₁(E, E^c∩Ω) + σ I₂(E, Ω^c) + ∫_E g` on planar rasters.

pub mod anneal;
pub mod energy;
pub mod measure;

pub use anneal::{minimize, minimize_with_model, MinimizeOptions, MinimizeReport, Schedule};
pub use energy::{
    complement_duality_check, delta_energy, energy_eval, exhaustive_minimum, EnergyModel,
};
pub use measure::{measure_contact_angle, ContactMeasurement, ContactPoint, ContactRegime, Wall};

use crate::error::{Error, Result};
use crate::geometry::Mask;
use crate::kernel::KernelSpec;

/// The container `Ω` as a raster, with cell size `h` and potential `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    pub h: f64,
    pub omega: Mask,
    /// Potential per cell (energy per unit area), row-major like the mask.
    pub g: Vec<f64>,
}

impl GridDomain {
    pub fn new(omega: Mask, h: f64, g: Vec<f64>) -> Result<Self> {
        if omega.count() == 0 {
            return Err(Error::Invalid("the container mask is empty".into()));
        }
        if !(h > 0.0) {
            return Err(Error::Domain(format!(
                "cell size must be positive, got {h}"
            )));
        }
        if g.len() != omega.len() {
            return Err(Error::Invalid(format!(
                "g has {} entries for {} cells",
                g.len(),
                omega.len()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("g must be finite".into()));
        }
        Ok(Self { h, omega, g })
    }

    /// A full `width × height` rectangle with `h = 1/max(width, height)` and `g ≡ 0`.
    pub fn square(width: usize, height: usize) -> Result<Self> {
        let h = 1.0 / width.max(height) as f64;
        Self::new(Mask::filled(width, height), h, vec![0.0; width * height])
    }

    pub fn with_g(mut self, g: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = self.omega.width();
        self.g = (0..self.omega.len()).map(|k| g(k % w, k / w)).collect();
        Self::new(self.omega, self.h, self.g)
    }

    pub fn width(&self) -> usize {
        self.omega.width()
    }

    pub fn height(&self) -> usize {
        self.omega.height()
    }

    pub fn cell_count(&self) -> usize {
        self.omega.count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapillaryProblem {
    pub domain: GridDomain,
    pub k1: KernelSpec,
    pub k2: KernelSpec,
    pub sigma: f64,
    /// Droplet volume in cells, `0 < m < |Ω|`.
    pub m: usize,
}

impl CapillaryProblem {
    pub fn new(
        domain: GridDomain,
        k1: KernelSpec,
        k2: KernelSpec,
        sigma: f64,
        m: usize,
    ) -> Result<Self> {
        if k1.dim != 2 || k2.dim != 2 {
            return Err(Error::Domain(
                "the discrete minimizer works with planar kernels".into(),
            ));
        }
        if !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be finite, got {sigma}")));
        }
        let n = domain.cell_count();
        if m == 0 || m >= n {
            return Err(Error::Domain(format!(
                "volume must satisfy 0 < m < {n}, got {m}"
            )));
        }
        Ok(Self {
            domain,
            k1,
            k2,
            sigma,
            m,
        })
    }

    /// Isotropic kernels with exponents `s₁`, `s₂`.
    pub fn isotropic(domain: GridDomain, s1: f64, s2: f64, sigma: f64, m: usize) -> Result<Self> {
        Self::new(
            domain,
            KernelSpec::isotropic(2, s1)?,
            KernelSpec::isotropic(2, s2)?,
            sigma,
            m,
        )
    }

    /// Checks `E ⊆ Ω` and `|E| = m`.
    pub fn check_mask(&self, e: &Mask) -> Result<()> {
        if !e.same_shape(&self.domain.omega) {
            return Err(Error::Invalid(
                "mask shape differs from the container".into(),
            ));
        }
        if !e.is_subset_of(&self.domain.omega) {
            return Err(Error::Invalid(
                "droplet is not contained in the container".into(),
            ));
        }
        let c = e.count();
        if c != self.m {
            return Err(Error::Invalid(format!(
                "droplet has {c} cells, expected {}",
                self.m
            )));
        }
        Ok(())
    }
}
