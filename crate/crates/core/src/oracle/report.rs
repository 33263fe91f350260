//! CSV renderings of certificates, Monte Carlo bounds, comparisons and
//! sweep plot data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::DisturbanceBox;
use crate::oracle::compare::ComparisonReport;
use crate::oracle::mc::{EmpiricalBounds, SamplingLaw};
use crate::oracle::sweep::SweepRow;
use crate::propagation::certificate::VerificationCertificate;

fn render<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Serialize, Deserialize)]
struct ComparisonCsvRow {
    controller: String,
    channel: String,
    mc_lb: f64,
    mc_ub: f64,
    dbbp_lb: f64,
    dbbp_ub: f64,
    gap_lb: f64,
    gap_ub: f64,
    sound: bool,
    level: Option<f64>,
}

pub fn comparison_csv(reports: &[ComparisonReport]) -> Result<String> {
    render(reports.iter().flat_map(|r| {
        r.channels.iter().map(move |c| ComparisonCsvRow {
            controller: r.controller.clone(),
            channel: c.channel.clone(),
            mc_lb: c.mc.lo,
            mc_ub: c.mc.hi,
            dbbp_lb: c.dbbp.lo,
            dbbp_ub: c.dbbp.hi,
            gap_lb: c.gap_lb,
            gap_ub: c.gap_ub,
            sound: c.sound,
            level: r.level,
        })
    }))
}

#[derive(Debug, Serialize, Deserialize)]
struct McCsvRow {
    channel: String,
    index: usize,
    lb: f64,
    ub: f64,
    samples: usize,
    failed: usize,
    seed: u64,
    law: SamplingLaw,
    box_center: f64,
    box_radius: f64,
}

pub fn mc_csv(mc: &EmpiricalBounds) -> Result<String> {
    if mc.disturbance.dim() != 1 {
        return Err(Error::Dimension {
            context: "CSV export of the disturbance box".into(),
            expected: 1,
            actual: mc.disturbance.dim(),
        });
    }
    render(mc.labels.iter().enumerate().map(|(i, l)| McCsvRow {
        channel: l.clone(),
        index: i,
        lb: mc.lb[i],
        ub: mc.ub[i],
        samples: mc.samples,
        failed: mc.failed,
        seed: mc.seed,
        law: mc.law,
        box_center: mc.disturbance.center[0],
        box_radius: mc.disturbance.radius[0],
    }))
}

pub fn parse_mc_csv(text: &str) -> Result<EmpiricalBounds> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows = r.deserialize().collect::<std::result::Result<Vec<McCsvRow>, _>>()?;
    let first = rows.first().ok_or_else(|| Error::Schema {
        path: "mc csv".into(),
        reason: "no rows".into(),
    })?;
    for (k, row) in rows.iter().enumerate() {
        if row.index != k {
            return Err(Error::Schema {
                path: format!("mc csv row {}", k + 1),
                reason: format!("index {} out of order", row.index),
            });
        }
    }
    Ok(EmpiricalBounds {
        labels: rows.iter().map(|r| r.channel.clone()).collect(),
        lb: rows.iter().map(|r| r.lb).collect(),
        ub: rows.iter().map(|r| r.ub).collect(),
        samples: first.samples,
        failed: first.failed,
        seed: first.seed,
        law: first.law,
        disturbance: DisturbanceBox::scalar(first.box_center, first.box_radius)?,
        generated_at: None,
    })
}

#[derive(Debug, Serialize)]
struct CertificateCsvRow<'a> {
    channel: &'a str,
    index: usize,
    lb: f64,
    ub: f64,
    saturation_free: bool,
    a_max: f64,
    residual_bound: f64,
}

pub fn certificate_csv(cert: &VerificationCertificate) -> Result<String> {
    render(cert.targets.iter().enumerate().map(|(k, &t)| CertificateCsvRow {
        channel: &cert.labels[k],
        index: t,
        lb: cert.lb[k],
        ub: cert.ub[k],
        saturation_free: cert.saturation_free,
        a_max: cert.a_max,
        residual_bound: cert.max_residual(),
    }))
}

#[derive(Debug, Serialize)]
struct PlotRow<'a> {
    level: f64,
    radius: f64,
    channel: &'a str,
    mc_lb: f64,
    mc_ub: f64,
    dbbp_lb: f64,
    dbbp_ub: f64,
    saturation_lo: f64,
    saturation_hi: f64,
}

/// Level versus bounds, with the `±a_max` lines alongside.
pub fn plot_data_csv(rows: &[SweepRow]) -> Result<String> {
    render(rows.iter().flat_map(|row| {
        row.report.channels.iter().map(move |c| PlotRow {
            level: row.level,
            radius: row.certificate.disturbance.radius[0],
            channel: &c.channel,
            mc_lb: c.mc.lo,
            mc_ub: c.mc.hi,
            dbbp_lb: c.dbbp.lo,
            dbbp_ub: c.dbbp.hi,
            saturation_lo: -row.certificate.a_max,
            saturation_hi: row.certificate.a_max,
        })
    }))
}
