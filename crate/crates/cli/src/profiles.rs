//! Anisotropy settings: `const`, `const:<c>`, or the path of an
//! `angle value` table.

use nlcap::reduction::build_phi;
use nlcap::{AnisotropyFn, KernelSpec, PhiProfile};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub enum Anisotropy {
    Constant(f64),
    Table(AnisotropyFn),
}

impl Anisotropy {
    pub fn from_config(cfg: &RunConfig, key: &str) -> Result<Self> {
        let v = cfg.str(key);
        let bad = |msg: String| CliError::Value {
            key: key.to_string(),
            msg,
        };
        if v == "const" {
            return Ok(Self::Constant(1.0));
        }
        if let Some(c) = v.strip_prefix("const:") {
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad constant in {v:?}")))?;
            if !(c > 0.0 && c.is_finite()) {
                return Err(bad(format!("constant must be positive, got {c}")));
            }
            return Ok(Self::Constant(c));
        }
        let a = AnisotropyFn::load_table(v)
            .map_err(|e| bad(format!("cannot read table {v:?}: {e}")))?;
        Ok(Self::Table(a))
    }

    pub fn function(&self) -> Result<AnisotropyFn> {
        Ok(match self {
            Self::Constant(c) => AnisotropyFn::constant(2, *c)?,
            Self::Table(a) => a.clone(),
        })
    }

    /// Planar kernels project to themselves.
    pub fn profile(&self, s: f64, grid: usize) -> Result<PhiProfile> {
        Ok(match self {
            Self::Constant(c) => PhiProfile::constant(s, *c)?,
            Self::Table(a) => build_phi(a, 2, s, grid)?,
        })
    }

    /// Homogeneous planar kernel; `lambda = None` takes the tightest
    /// admissible ellipticity.
    pub fn kernel(&self, s: f64, lambda: Option<f64>) -> Result<KernelSpec> {
        let a = self.function()?;
        let tight = a.a_max().max(1.0 / a.a_min()).max(1.0);
        let lambda = lambda.unwrap_or(tight);
        if lambda < tight {
            return Err(CliError::Value {
                key: "lambda".into(),
                msg: format!(
                    "{lambda} is below the anisotropy range, which needs at least {tight}"
                ),
            });
        }
        Ok(KernelSpec::homogeneous(a, s, lambda)?)
    }
}
