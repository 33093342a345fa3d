//! Nonlocal capillarity numerics: anisotropic interaction kernels, the
//! nonlocal Young's-law contact angle, principal-value geometry, and a
//! discrete volume-constrained droplet minimizer.

pub mod droplet;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod quad;
pub mod reduction;
pub mod roots;
pub mod young;

pub use error::{Error, Result};
pub use kernel::{AnisotropyFn, KernelForm, KernelSpec, RadialFn};
pub use reduction::PhiProfile;
