//! Certificate versus empirical bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::oracle::mc::EmpiricalBounds;
use crate::propagation::certificate::VerificationCertificate;

pub const SOUNDNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelComparison {
    pub channel: String,
    pub index: usize,
    pub mc: Interval,
    pub dbbp: Interval,
    pub sound: bool,
    /// `mc.lo - dbbp.lo`.
    pub gap_lb: f64,
    /// `dbbp.hi - mc.hi`.
    pub gap_ub: f64,
}

impl ChannelComparison {
    pub fn new(channel: String, index: usize, mc: Interval, dbbp: Interval) -> Self {
        Self {
            channel,
            index,
            sound: dbbp.lo <= mc.lo + SOUNDNESS_TOL && dbbp.hi >= mc.hi - SOUNDNESS_TOL,
            gap_lb: mc.lo - dbbp.lo,
            gap_ub: dbbp.hi - mc.hi,
            mc,
            dbbp,
        }
    }

    pub fn max_gap(&self) -> f64 {
        self.gap_lb.max(self.gap_ub)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub controller: String,
    pub level: Option<f64>,
    pub channels: Vec<ChannelComparison>,
    pub sound: bool,
    /// Largest linearization residual behind the certificate.
    pub residual_bound: f64,
}

impl ComparisonReport {
    pub fn max_gap(&self) -> f64 {
        self.channels.iter().map(ChannelComparison::max_gap).fold(0.0, f64::max)
    }
}

pub fn compare(cert: &VerificationCertificate, mc: &EmpiricalBounds) -> Result<ComparisonReport> {
    if cert.disturbance != mc.disturbance {
        return Err(Error::InvalidParameter {
            field: "box".into(),
            reason: format!(
                "certificate box {:?}±{:?} differs from Monte Carlo box {:?}±{:?}",
                cert.disturbance.center,
                cert.disturbance.radius,
                mc.disturbance.center,
                mc.disturbance.radius
            ),
        });
    }
    let channels = cert
        .targets
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let label = &cert.labels[k];
            match mc.labels.get(t) {
                Some(l) if l == label && t < mc.lb.len() => Ok(ChannelComparison::new(
                    label.clone(),
                    t,
                    mc.interval(t),
                    cert.interval(k),
                )),
                _ => Err(Error::InvalidParameter {
                    field: format!("channel {label}"),
                    reason: format!("no matching Monte Carlo channel at index {t}"),
                }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        controller: String::new(),
        level: None,
        sound: channels.iter().all(|c| c.sound),
        channels,
        residual_bound: cert.max_residual(),
    })
}
