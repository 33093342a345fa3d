//! Planar nonlocal geometry: regions, principal values, interaction
//! integrals, curvature and slab calibrations.

pub mod curvature;
pub mod interaction;
pub mod mask;
pub mod pv;
pub mod region;
pub mod slab;

pub use curvature::{el_residual, k_mean_curvature};
pub use interaction::{interaction_integral, InteractionResult, KernelTable, QuadratureParams};
pub use mask::Mask;
pub use region::{GridMask, Point, RegionSpec};
pub use slab::{c_star, c_star_exact, slab_annulus_bound, slab_halfspace_interaction};
