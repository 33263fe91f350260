//! Seeded Monte Carlo over the disturbance box with the exact network solve.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{DisturbanceBox, Interval};
use crate::neural::mlp::MlpController;
use crate::smg::closed_loop::{output_labels, pre_shock_action, simulate_exact, OUT_CONTROL, OUT_DIM};
use crate::smg::steady::OperatingPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingLaw {
    Uniform,
    /// Half the samples uniform, half at random box vertices.
    #[default]
    VertexBiased,
}

impl std::str::FromStr for SamplingLaw {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "vertex_biased" | "vertex-biased" => Ok(Self::VertexBiased),
            other => Err(format!("unknown sampling law `{other}` (uniform | vertex_biased)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub law: SamplingLaw,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64, law: SamplingLaw) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidParameter {
                field: "samples".into(),
                reason: "at least one sample is required".into(),
            });
        }
        Ok(Self { samples, seed, law })
    }
}

/// Sample `index` of the stream; sample 0 is the box center.
pub fn sample_point(bx: &DisturbanceBox, cfg: &McConfig, index: usize) -> Vec<f64> {
    if index == 0 {
        return bx.center.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let (lo, hi) = (bx.lower(), bx.upper());
    let vertex = cfg.law == SamplingLaw::VertexBiased && rng.random_bool(0.5);
    (0..bx.dim())
        .map(|j| {
            if vertex {
                if rng.random_bool(0.5) {
                    hi[j]
                } else {
                    lo[j]
                }
            } else if lo[j] == hi[j] {
                lo[j]
            } else {
                rng.random_range(lo[j]..=hi[j])
            }
        })
        .collect()
}

/// Empirical extrema of every closed-loop output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBounds {
    pub labels: Vec<String>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    /// Successful samples.
    pub samples: usize,
    pub failed: usize,
    pub seed: u64,
    pub law: SamplingLaw,
    #[serde(rename = "box")]
    pub disturbance: DisturbanceBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

impl EmpiricalBounds {
    pub fn interval(&self, i: usize) -> Interval {
        Interval {
            lo: self.lb[i],
            hi: self.ub[i],
        }
    }

    pub fn controls(&self) -> [Interval; 2] {
        [self.interval(OUT_CONTROL), self.interval(OUT_CONTROL + 1)]
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn lesser(a: f64, b: f64) -> f64 {
    if a.total_cmp(&b) == Ordering::Greater {
        b
    } else {
        a
    }
}

fn greater(a: f64, b: f64) -> f64 {
    if a.total_cmp(&b) == Ordering::Less {
        b
    } else {
        a
    }
}

#[derive(Clone)]
struct Acc {
    lb: Vec<f64>,
    ub: Vec<f64>,
    ok: usize,
    failed: usize,
}

impl Acc {
    fn empty() -> Self {
        Self {
            lb: vec![f64::INFINITY; OUT_DIM],
            ub: vec![f64::NEG_INFINITY; OUT_DIM],
            ok: 0,
            failed: 0,
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        for i in 0..OUT_DIM {
            self.lb[i] = lesser(self.lb[i], other.lb[i]);
            self.ub[i] = greater(self.ub[i], other.ub[i]);
        }
        self.ok += other.ok;
        self.failed += other.failed;
        self
    }
}

/// Runs `cfg.samples` exact shock responses and reduces them to per-output
/// extrema. Independent of thread count and scheduling.
pub fn mc_bounds(
    op: &OperatingPoint,
    ctrl: &MlpController,
    bx: &DisturbanceBox,
    cfg: &McConfig,
) -> Result<EmpiricalBounds> {
    if bx.dim() != 1 {
        return Err(Error::Dimension {
            context: "load-torque disturbance box".into(),
            expected: 1,
            actual: bx.dim(),
        });
    }
    if cfg.samples == 0 {
        return Err(Error::InvalidParameter {
            field: "samples".into(),
            reason: "at least one sample is required".into(),
        });
    }
    let u0 = pre_shock_action(op, ctrl)?;
    let acc = (0..cfg.samples)
        .into_par_iter()
        .fold(Acc::empty, |mut acc, i| {
            let w = sample_point(bx, cfg, i)[0];
            match simulate_exact(op, ctrl, u0, w) {
                Ok(r) => {
                    let v = r.to_vec();
                    if v.iter().all(|x| x.is_finite()) {
                        for (k, x) in v.into_iter().enumerate() {
                            acc.lb[k] = lesser(acc.lb[k], x);
                            acc.ub[k] = greater(acc.ub[k], x);
                        }
                        acc.ok += 1;
                    } else {
                        acc.failed += 1;
                    }
                }
                Err(_) => acc.failed += 1,
            }
            acc
        })
        .reduce(Acc::empty, Acc::merge);
    let limit = cfg.samples / 1000;
    if acc.failed > limit || acc.ok == 0 {
        return Err(Error::TooManyFailures {
            failed: acc.failed,
            total: cfg.samples,
            limit,
        });
    }
    Ok(EmpiricalBounds {
        labels: output_labels(),
        lb: acc.lb,
        ub: acc.ub,
        samples: acc.ok,
        failed: acc.failed,
        seed: cfg.seed,
        law: cfg.law,
        disturbance: bx.clone(),
        generated_at: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::mlp::{generate_controller, HiddenActivation};
    use crate::smg::closed_loop::stand_in_spec;
    use crate::smg::params::SmgParams;
    use crate::smg::steady::find_steady_state;

    fn setup() -> (OperatingPoint, MlpController) {
        let p = SmgParams::default();
        let op = find_steady_state(&p, p.sim.load_level).unwrap();
        let ctrl = generate_controller(&stand_in_spec(&op, 9, HiddenActivation::Relu, 5.0)).unwrap();
        (op, ctrl)
    }

    #[test]
    fn single_sample_is_center_evaluation() {
        let (op, ctrl) = setup();
        let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
        let cfg = McConfig::new(1, 7, SamplingLaw::Uniform).unwrap();
        let mc = mc_bounds(&op, &ctrl, &bx, &cfg).unwrap();
        let u0 = pre_shock_action(&op, &ctrl).unwrap();
        let r = simulate_exact(&op, &ctrl, u0, 0.1).unwrap().to_vec();
        assert_eq!(mc.lb, r);
        assert_eq!(mc.ub, r);
        assert_eq!(mc.samples + mc.failed, 1);
    }

    #[test]
    fn zero_radius_gives_points() {
        let (op, ctrl) = setup();
        let bx = DisturbanceBox::scalar(0.1, 0.0).unwrap();
        let cfg = McConfig::new(200, 1, SamplingLaw::VertexBiased).unwrap();
        let mc = mc_bounds(&op, &ctrl, &bx, &cfg).unwrap();
        assert_eq!(mc.lb, mc.ub);
    }

    #[test]
    fn samples_stay_in_box_and_hit_vertices() {
        let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
        let cfg = McConfig::new(1000, 3, SamplingLaw::VertexBiased).unwrap();
        let mut at_vertex = 0;
        for i in 0..1000 {
            let w = sample_point(&bx, &cfg, i);
            assert!(bx.contains(&w));
            if w[0] == bx.lower()[0] || w[0] == bx.upper()[0] {
                at_vertex += 1;
            }
        }
        assert!(at_vertex > 400 && at_vertex < 600, "{at_vertex}");
        assert_eq!(sample_point(&bx, &cfg, 17), sample_point(&bx, &cfg, 17));
    }

    #[test]
    fn deterministic_and_refining() {
        let (op, ctrl) = setup();
        let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
        let small = McConfig::new(500, 7, SamplingLaw::Uniform).unwrap();
        let large = McConfig::new(2000, 7, SamplingLaw::Uniform).unwrap();
        let a = mc_bounds(&op, &ctrl, &bx, &small).unwrap();
        let b = mc_bounds(&op, &ctrl, &bx, &small).unwrap();
        assert_eq!(a, b);
        let c = mc_bounds(&op, &ctrl, &bx, &large).unwrap();
        for i in 0..OUT_DIM {
            assert!(c.interval(i).lo <= a.interval(i).lo && a.interval(i).hi <= c.interval(i).hi);
        }
    }
}
