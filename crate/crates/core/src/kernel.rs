//! Node and edge compatibility kernels.
//!
//! Every kernel maps a pair of equal-length attribute vectors into `[0, 1]`
//! and returns exactly 1 when the vectors are identical. Indicator kernels
//! read the first attribute component as a discrete type id.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian scale used for node attributes of the synthetic benchmark.
pub const SYNTHETIC_NODE_SCALE: f64 = 1.0;
/// Gaussian scale used for edge attributes of the synthetic benchmark.
#[allow(clippy::approx_constant)]
pub const SYNTHETIC_EDGE_SCALE: f64 = 3.14;
/// Gaussian scale applied to bond lengths in the geometric molecular kernel.
pub const QM9_EDGE_SCALE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `exp(-scale * ||a - b||^2)`
    Gaussian { scale: f64 },
    /// 1 when the type ids agree and the remaining components are equal.
    Indicator,
    /// Type-id indicator times a Gaussian over the remaining components.
    IndicatorTimesGaussian { scale: f64 },
}

#[inline]
fn type_id(x: f64) -> i64 {
    x.round() as i64
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        Ok(self.eval_unchecked(a, b))
    }

    /// Kernel value without the dimension check. Callers validate dimensions
    /// once per graph pair.
    #[inline]
    pub fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Gaussian { scale } => (-scale * sq_dist(a, b)).exp(),
            Kernel::Indicator => match (a.split_first(), b.split_first()) {
                (Some((ta, ra)), Some((tb, rb))) => {
                    if type_id(*ta) == type_id(*tb) && ra == rb {
                        1.0
                    } else {
                        0.0
                    }
                }
                _ => 1.0,
            },
            Kernel::IndicatorTimesGaussian { scale } => match (a.split_first(), b.split_first()) {
                (Some((ta, ra)), Some((tb, rb))) => {
                    if type_id(*ta) == type_id(*tb) {
                        (-scale * sq_dist(ra, rb)).exp()
                    } else {
                        0.0
                    }
                }
                _ => 1.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Gaussian { scale } | Kernel::IndicatorTimesGaussian { scale } => {
                if scale.is_finite() && scale > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParam(format!(
                        "kernel scale must be positive, got {scale}"
                    )))
                }
            }
            Kernel::Indicator => Ok(()),
        }
    }
}

/// Kernel selection for nodes and edges plus the edge/node trade-off `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompatConfig {
    pub node_kernel: Kernel,
    pub edge_kernel: Kernel,
    pub alpha: f64,
}

impl Default for CompatConfig {
    fn default() -> Self {
        KernelPreset::Synthetic.config()
    }
}

impl CompatConfig {
    pub fn new(node_kernel: Kernel, edge_kernel: Kernel, alpha: f64) -> Result<Self> {
        let cfg = CompatConfig {
            node_kernel,
            edge_kernel,
            alpha,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.node_kernel.validate()?;
        self.edge_kernel.validate()?;
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn node_compat(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.node_kernel.eval(a, b)
    }

    pub fn edge_compat(&self, r: &[f64], s: &[f64]) -> Result<f64> {
        self.edge_kernel.eval(r, s)
    }

    /// The preset whose kernels equal this configuration, ignoring alpha.
    pub fn preset(&self) -> Option<KernelPreset> {
        KernelPreset::ALL.into_iter().find(|p| {
            let c = p.config();
            c.node_kernel == self.node_kernel && c.edge_kernel == self.edge_kernel
        })
    }
}

pub fn node_compat(a: &[f64], b: &[f64], cfg: &CompatConfig) -> Result<f64> {
    cfg.node_compat(a, b)
}

pub fn edge_compat(r: &[f64], s: &[f64], cfg: &CompatConfig) -> Result<f64> {
    cfg.edge_compat(r, s)
}

/// Named kernel configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelPreset {
    /// Gaussian nodes (scale 1) and Gaussian edges (scale 3.14).
    Synthetic,
    /// Atom-type and bond-type indicators.
    Indicator,
    /// Atom-type indicator; bond-type indicator times Gaussian on bond length (scale 2).
    Qm9,
}

impl KernelPreset {
    pub const ALL: [KernelPreset; 3] = [
        KernelPreset::Synthetic,
        KernelPreset::Indicator,
        KernelPreset::Qm9,
    ];

    pub fn config(self) -> CompatConfig {
        let (node_kernel, edge_kernel) = match self {
            KernelPreset::Synthetic => (
                Kernel::Gaussian {
                    scale: SYNTHETIC_NODE_SCALE,
                },
                Kernel::Gaussian {
                    scale: SYNTHETIC_EDGE_SCALE,
                },
            ),
            KernelPreset::Indicator => (Kernel::Indicator, Kernel::Indicator),
            KernelPreset::Qm9 => (
                Kernel::Indicator,
                Kernel::IndicatorTimesGaussian {
                    scale: QM9_EDGE_SCALE,
                },
            ),
        };
        CompatConfig {
            node_kernel,
            edge_kernel,
            alpha: 0.7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelPreset::Synthetic => "synthetic",
            KernelPreset::Indicator => "indicator",
            KernelPreset::Qm9 => "qm9",
        }
    }
}

impl fmt::Display for KernelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::InvalidParam(format!(
                    "unknown kernel preset `{s}` (expected synthetic, indicator or qm9)"
                ))
            })
    }
}
