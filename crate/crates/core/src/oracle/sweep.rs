//! Certificate and Monte Carlo bounds over a ladder of box radii.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::DisturbanceBox;
use crate::neural::mlp::MlpController;
use crate::oracle::compare::{compare, ComparisonReport};
use crate::oracle::mc::{mc_bounds, EmpiricalBounds, McConfig};
use crate::propagation::certificate::VerificationCertificate;
use crate::propagation::verify::{verify_with, VerifyOptions};
use crate::smg::closed_loop::assemble_closed_loop;
use crate::smg::steady::OperatingPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub level: f64,
    pub certificate: VerificationCertificate,
    pub mc: EmpiricalBounds,
    pub report: ComparisonReport,
}

/// One certificate and one Monte Carlo run per level; the box at level `ℓ`
/// is `base_box` with its radius scaled by `ℓ`.
pub fn sweep(
    op: &OperatingPoint,
    ctrl: &MlpController,
    base_box: &DisturbanceBox,
    levels: &[f64],
    cfg: &McConfig,
    opts: &VerifyOptions,
) -> Result<Vec<SweepRow>> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter {
            field: "levels".into(),
            reason: "at least one level is required".into(),
        });
    }
    if let Some(l) = levels.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::InvalidParameter {
            field: "levels".into(),
            reason: format!("{l} must be finite and >= 0"),
        });
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter {
            field: "levels".into(),
            reason: format!("levels must be sorted ascending, got {levels:?}"),
        });
    }
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let bx = base_box.scaled(level);
        let asm = assemble_closed_loop(op, ctrl, &bx)?;
        let certificate = verify_with(&asm.graph, &bx, &asm.graph.meta.control, opts)?;
        let mc = mc_bounds(op, ctrl, &bx, cfg)?;
        let mut report = compare(&certificate, &mc)?;
        report.level = Some(level);
        if !report.sound {
            return Err(Error::Unsound {
                level,
                report: Box::new(report),
            });
        }
        rows.push(SweepRow {
            level,
            certificate,
            mc,
            report,
        });
    }
    Ok(rows)
}

/// Certificate widths never shrink as the level grows, per channel.
pub fn widths_monotone(rows: &[SweepRow]) -> bool {
    rows.windows(2).all(|w| {
        w[0].certificate
            .widths()
            .iter()
            .zip(w[1].certificate.widths())
            .all(|(a, b)| b >= *a)
    })
}
