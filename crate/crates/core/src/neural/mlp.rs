//! Multilayer perceptron excitation controller.
//!
//! Hidden layers use one activation kind; the output layer is always
//! `a_max · tanh(·)`, which keeps every action strictly inside
//! `(-a_max, a_max)`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::neural::relax::Activation;

pub const FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HiddenActivation {
    Relu,
    Tanh,
}

impl From<HiddenActivation> for Activation {
    fn from(h: HiddenActivation) -> Self {
        match h {
            HiddenActivation::Relu => Activation::Relu,
            HiddenActivation::Tanh => Activation::Tanh,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpController {
    layers: Vec<DenseLayer>,
    hidden: HiddenActivation,
    a_max: f64,
}

impl MlpController {
    pub fn new(layers: Vec<DenseLayer>, hidden: HiddenActivation, a_max: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Schema {
                path: "layers".into(),
                reason: "at least one layer is required".into(),
            });
        }
        if !(a_max.is_finite() && a_max > 0.0) {
            return Err(Error::Schema {
                path: "a_max".into(),
                reason: format!("{a_max} must be finite and > 0"),
            });
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.weight.nrows() {
                return Err(Error::Schema {
                    path: format!("layers[{k}].b"),
                    reason: format!(
                        "length {} does not match {} weight rows",
                        layer.bias.len(),
                        layer.weight.nrows()
                    ),
                });
            }
            if k > 0 && layer.weight.ncols() != layers[k - 1].weight.nrows() {
                return Err(Error::Schema {
                    path: format!("layers[{k}].w"),
                    reason: format!(
                        "layers[{}] outputs {} values but layers[{k}] expects {}",
                        k - 1,
                        layers[k - 1].weight.nrows(),
                        layer.weight.ncols()
                    ),
                });
            }
            for (idx, v) in layer.weight.iter().enumerate() {
                if !v.is_finite() {
                    let (r, c) = (idx % layer.weight.nrows(), idx / layer.weight.nrows());
                    return Err(Error::Schema {
                        path: format!("layers[{k}].w[{r}][{c}]"),
                        reason: format!("{v} is not finite"),
                    });
                }
            }
            for (i, v) in layer.bias.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Schema {
                        path: format!("layers[{k}].b[{i}]"),
                        reason: format!("{v} is not finite"),
                    });
                }
            }
        }
        Ok(Self {
            layers,
            hidden,
            a_max,
        })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn hidden(&self) -> HiddenActivation {
        self.hidden
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.weight.nrows()).unwrap_or(0)
    }

    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.weight.nrows()))
            .collect()
    }

    /// Layer-by-layer evaluation.
    pub fn forward(&self, obs: &[f64]) -> Result<Vec<f64>> {
        if obs.len() != self.input_dim() {
            return Err(Error::Dimension {
                context: "controller observation".into(),
                expected: self.input_dim(),
                actual: obs.len(),
            });
        }
        if let Some(v) = obs.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "controller observation".into(),
                value: *v,
            });
        }
        let act: Activation = self.hidden.into();
        let last = self.layers.len() - 1;
        let mut h = DVector::from_column_slice(obs);
        for (k, layer) in self.layers.iter().enumerate() {
            let z = &layer.weight * &h + &layer.bias;
            h = if k == last {
                z.map(|v| self.a_max * v.tanh())
            } else {
                z.map(|v| act.eval(v))
            };
        }
        Ok(h.iter().copied().collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerFile {
    version: u32,
    widths: Vec<usize>,
    activation: HiddenActivation,
    a_max: f64,
    layers: Vec<LayerFile>,
}

impl MlpController {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ControllerFile = serde_json::from_str(text).map_err(|e| Error::Schema {
            path: "controller".into(),
            reason: e.to_string(),
        })?;
        if file.version != FILE_VERSION {
            return Err(Error::Schema {
                path: "version".into(),
                reason: format!("unsupported version {} (expected {FILE_VERSION})", file.version),
            });
        }
        if file.widths.len() != file.layers.len() + 1 {
            return Err(Error::Schema {
                path: "widths".into(),
                reason: format!(
                    "{} widths listed for {} layers",
                    file.widths.len(),
                    file.layers.len()
                ),
            });
        }
        let mut layers = Vec::with_capacity(file.layers.len());
        for (k, lf) in file.layers.iter().enumerate() {
            let (rows, cols) = (file.widths[k + 1], file.widths[k]);
            if lf.w.len() != rows {
                return Err(Error::Schema {
                    path: format!("layers[{k}].w"),
                    reason: format!("{} rows, widths say {rows}", lf.w.len()),
                });
            }
            if let Some((r, row)) = lf.w.iter().enumerate().find(|(_, row)| row.len() != cols) {
                return Err(Error::Schema {
                    path: format!("layers[{k}].w[{r}]"),
                    reason: format!("{} columns, widths say {cols}", row.len()),
                });
            }
            if lf.b.len() != rows {
                return Err(Error::Schema {
                    path: format!("layers[{k}].b"),
                    reason: format!("{} entries, widths say {rows}", lf.b.len()),
                });
            }
            layers.push(DenseLayer {
                weight: DMatrix::from_fn(rows, cols, |r, c| lf.w[r][c]),
                bias: DVector::from_column_slice(&lf.b),
            });
        }
        Self::new(layers, file.activation, file.a_max)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ControllerFile {
            version: FILE_VERSION,
            widths: self.widths(),
            activation: self.hidden,
            a_max: self.a_max,
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    w: l.weight.row_iter().map(|r| r.iter().copied().collect()).collect(),
                    b: l.bias.iter().copied().collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn load_controller(path: impl AsRef<Path>) -> Result<MlpController> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    MlpController::from_json(&text)
}

pub fn save_controller(ctrl: &MlpController, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, ctrl.to_json()?).map_err(io_err(path))
}

/// Recipe for a seeded stand-in controller.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub widths: Vec<usize>,
    pub activation: HiddenActivation,
    /// Multiplier on the output-layer weights: 0 gives a constant action,
    /// larger values make the action swing across the admissible range.
    pub aggressiveness: f64,
    pub a_max: f64,
    /// Standard deviation of the output-layer bias.
    pub output_bias_std: f64,
    /// Observation normalization `(o - center) / scale`, folded into the
    /// first layer.
    pub input_center: Option<Vec<f64>>,
    pub input_scale: Option<Vec<f64>>,
}

impl GeneratorSpec {
    pub fn new(seed: u64, activation: HiddenActivation, aggressiveness: f64) -> Self {
        Self {
            seed,
            widths: vec![7, 32, 32, 2],
            activation,
            aggressiveness,
            a_max: 0.1,
            output_bias_std: 0.2,
            input_center: None,
            input_scale: None,
        }
    }

    pub fn with_normalization(mut self, center: Vec<f64>, scale: Vec<f64>) -> Self {
        self.input_center = Some(center);
        self.input_scale = Some(scale);
        self
    }
}

/// Builds a deterministic controller from `spec`.
pub fn generate_controller(spec: &GeneratorSpec) -> Result<MlpController> {
    let w = &spec.widths;
    if w.len() < 2 {
        return Err(Error::InvalidParameter {
            field: "widths".into(),
            reason: "need an input and an output width".into(),
        });
    }
    if w.contains(&0) {
        return Err(Error::InvalidParameter {
            field: "widths".into(),
            reason: "widths must be positive".into(),
        });
    }
    if !(spec.aggressiveness.is_finite() && spec.aggressiveness >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "aggressiveness".into(),
            reason: format!("{} must be finite and >= 0", spec.aggressiveness),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let hidden_bias = Normal::new(0.0, 0.1).expect("valid std");
    let out_bias = Normal::new(0.0, spec.output_bias_std.max(0.0)).map_err(|e| {
        Error::InvalidParameter {
            field: "output_bias_std".into(),
            reason: e.to_string(),
        }
    })?;
    let last = w.len() - 2;
    let mut layers = Vec::with_capacity(w.len() - 1);
    for k in 0..=last {
        let (rows, cols) = (w[k + 1], w[k]);
        let std = Normal::new(0.0, 1.0 / (cols as f64).sqrt()).expect("valid std");
        let gain = if k == last { spec.aggressiveness } else { 1.0 };
        let weight = DMatrix::from_fn(rows, cols, |_, _| gain * std.sample(&mut rng));
        let bias = if k == last {
            DVector::from_fn(rows, |_, _| out_bias.sample(&mut rng))
        } else {
            DVector::from_fn(rows, |_, _| hidden_bias.sample(&mut rng))
        };
        layers.push(DenseLayer { weight, bias });
    }

    let n_in = w[0];
    let center = spec.input_center.clone().unwrap_or_else(|| vec![0.0; n_in]);
    let scale = spec.input_scale.clone().unwrap_or_else(|| vec![1.0; n_in]);
    if center.len() != n_in || scale.len() != n_in {
        return Err(Error::Dimension {
            context: "input normalization".into(),
            expected: n_in,
            actual: if center.len() != n_in { center.len() } else { scale.len() },
        });
    }
    if let Some(s) = scale.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::InvalidParameter {
            field: "input_scale".into(),
            reason: format!("{s} must be finite and > 0"),
        });
    }
    let first = &mut layers[0];
    for c in 0..n_in {
        let mut col = first.weight.column_mut(c);
        col /= scale[c];
    }
    first.bias -= &first.weight * DVector::from_column_slice(&center);

    // the output pre-activation at the input center is the sampled bias
    let act: Activation = spec.activation.into();
    let mut h = DVector::from_column_slice(&center);
    for layer in &layers[..last] {
        h = (&layer.weight * h + &layer.bias).map(|z| act.eval(z));
    }
    let out = &mut layers[last];
    out.bias -= &out.weight * h;

    MlpController::new(layers, spec.activation, spec.a_max)
}
