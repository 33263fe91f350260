use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Result};
use crate::interval::{DisturbanceBox, Interval};
use crate::propagation::bilinear::BilinearMode;

/// Certified range of one excitation demand against its exciter range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationBound {
    pub index: usize,
    pub lb: f64,
    pub ub: f64,
    pub e_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCertificate {
    pub targets: Vec<usize>,
    pub labels: Vec<String>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    /// Actions inside `±a_max` and excitation demands inside `[0, E_max]`.
    pub saturation_free: bool,
    pub control_within_limits: bool,
    pub excitation_within_limits: bool,
    pub a_max: f64,
    pub excitation: Vec<ExcitationBound>,
    #[serde(rename = "box")]
    pub disturbance: DisturbanceBox,
    pub residual_bound: Vec<f64>,
    pub graph_fingerprint: String,
    pub bilinear_mode: BilinearMode,
    /// Set when a non-sound relaxation was used.
    pub approximate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

impl VerificationCertificate {
    pub fn interval(&self, i: usize) -> Interval {
        Interval {
            lo: self.lb[i],
            hi: self.ub[i],
        }
    }

    pub fn intervals(&self) -> Vec<Interval> {
        (0..self.lb.len()).map(|i| self.interval(i)).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lb.iter().zip(&self.ub).map(|(l, u)| u - l).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_bound.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(io_err(path))
    }
}
