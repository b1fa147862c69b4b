use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::StiefelProjection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `γ_j = γ₀ / (j + 1)`.
    #[default]
    InverseT,
    Constant,
}

/// Inverse exponential used for the PCA (Grassmann-average) gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaLog {
    /// Principal angles `θᵢ` as singular values; bounded by `π/2` per component.
    #[default]
    Geodesic,
    /// The closed form `Ȳ(X̄ᵀȲ)⁻¹ − X̄`, singular values `tan θᵢ`.
    Table,
}

/// Whether the optimizer re-imposes `UᵀĈ_X U = I` after each step, using the running
/// second moment of the data seen so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Whitening {
    #[default]
    Restore,
    Off,
}

/// Cross-covariance fed to the CCA gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossCovariance {
    /// `(1/B) X_jᵀ Y_j` of the current batch.
    #[default]
    Batch,
    /// Average over all batches consumed so far.
    Running,
}

macro_rules! parse_enum {
    ($ty:ty, $($name:literal => $variant:expr),+) => {
        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(format!(
                        "unknown value `{other}` (expected {})",
                        [$($name),+].join("|")
                    )),
                }
            }
        }
    };
}

parse_enum!(Schedule, "inverse_t" => Schedule::InverseT, "constant" => Schedule::Constant);
parse_enum!(PcaLog, "geodesic" => PcaLog::Geodesic, "table" => PcaLog::Table);
parse_enum!(Whitening, "restore" => Whitening::Restore, "off" => Whitening::Off);
parse_enum!(CrossCovariance, "batch" => CrossCovariance::Batch, "running" => CrossCovariance::Running);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub k: usize,
    pub batch_size: usize,
    pub gamma0: f64,
    pub schedule: Schedule,
    pub stiefel_projection: StiefelProjection,
    pub seed: u64,
    pub pca_log: PcaLog,
    pub whitening: Whitening,
    pub cross_cov: CrossCovariance,
}

impl Hyperparams {
    /// Defaults: `B = 100`, `γ₀ = 1`, inverse-t schedule, seed 0.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            batch_size: 100,
            gamma0: 1.0,
            schedule: Schedule::InverseT,
            stiefel_projection: StiefelProjection::Paper,
            seed: 0,
            pca_log: PcaLog::Geodesic,
            whitening: Whitening::Restore,
            cross_cov: CrossCovariance::Batch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Dimension("k must be positive".into()));
        }
        if self.batch_size < self.k {
            return Err(Error::Dimension(format!(
                "batch size {} is smaller than k = {}",
                self.batch_size, self.k
            )));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::Dimension(format!("gamma0 = {} must be positive", self.gamma0)));
        }
        Ok(())
    }

    /// Step size for the update that consumes batch `j` (0-based count of earlier batches).
    pub fn step_size(&self, j: u64) -> f64 {
        match self.schedule {
            Schedule::InverseT => self.gamma0 / (j as f64 + 1.0),
            Schedule::Constant => self.gamma0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_t_is_harmonic() {
        let h = Hyperparams::new(2);
        assert_eq!(h.step_size(0), 1.0);
        assert_eq!(h.step_size(3), 0.25);
        // Partial sums of γ grow like ln n; partial sums of γ² stay below π²/6.
        let sum = |n: u64| (0..n).map(|j| h.step_size(j)).sum::<f64>();
        let sum_sq: f64 = (0..1_000_000).map(|j| h.step_size(j).powi(2)).sum();
        assert!(sum(1_000_000) - sum(1000) > 6.0);
        assert!(sum_sq < std::f64::consts::PI.powi(2) / 6.0);
    }

    #[test]
    fn validation() {
        assert!(Hyperparams::new(3).validate().is_ok());
        let mut h = Hyperparams::new(3);
        h.batch_size = 2;
        assert!(h.validate().is_err());
        h = Hyperparams::new(3);
        h.gamma0 = 0.0;
        assert!(h.validate().is_err());
        assert!(Hyperparams::new(0).validate().is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("inverse_t".parse::<Schedule>().unwrap(), Schedule::InverseT);
        assert_eq!("table".parse::<PcaLog>().unwrap(), PcaLog::Table);
        assert_eq!("off".parse::<Whitening>().unwrap(), Whitening::Off);
        assert_eq!("running".parse::<CrossCovariance>().unwrap(), CrossCovariance::Running);
        assert!("bogus".parse::<Schedule>().is_err());
    }
}
