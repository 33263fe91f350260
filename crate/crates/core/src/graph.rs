//! Closed-loop verification graph: an ordered chain of vector maps from the
//! disturbance to the control channels and the next state.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::neural::relax::Activation;
use crate::smg::machines::dual_relu;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// `z ↦ L z + c`.
    Affine {
        weight: DMatrix<f64>,
        bias: DVector<f64>,
    },
    /// Elementwise activation, one kind per coordinate.
    Activation { kinds: Vec<Activation> },
    /// Saturates coordinate `channel` to `[0, ceiling]`; the rest pass through.
    DualRelu {
        dim: usize,
        channel: usize,
        ceiling: f64,
    },
    /// Appends `z[a]·z[b]` for every pair, keeping the input.
    Bilinear {
        dim: usize,
        pairs: Vec<(usize, usize)>,
    },
}

impl Node {
    pub fn input_dim(&self) -> usize {
        match self {
            Node::Affine { weight, .. } => weight.ncols(),
            Node::Activation { kinds } => kinds.len(),
            Node::DualRelu { dim, .. } | Node::Bilinear { dim, .. } => *dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Node::Affine { weight, .. } => weight.nrows(),
            Node::Activation { kinds } => kinds.len(),
            Node::DualRelu { dim, .. } => *dim,
            Node::Bilinear { dim, pairs } => dim + pairs.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Node::Affine { .. } => "affine",
            Node::Activation { .. } => "activation",
            Node::DualRelu { .. } => "dual_relu",
            Node::Bilinear { .. } => "bilinear",
        }
    }

    fn check(&self, index: usize) -> Result<()> {
        let bad = |reason: String| Err(Error::Graph {
            node: index,
            reason,
        });
        match self {
            Node::Affine { weight, bias } => {
                if bias.len() != weight.nrows() {
                    return bad(format!(
                        "bias length {} does not match {} rows",
                        bias.len(),
                        weight.nrows()
                    ));
                }
                if weight.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
                    return bad("non-finite affine coefficient".into());
                }
            }
            Node::Activation { .. } => {}
            Node::DualRelu {
                dim,
                channel,
                ceiling,
            } => {
                if channel >= dim {
                    return bad(format!("channel {channel} outside dimension {dim}"));
                }
                if !(ceiling.is_finite() && *ceiling > 0.0) {
                    return bad(format!("ceiling {ceiling} must be finite and > 0"));
                }
            }
            Node::Bilinear { dim, pairs } => {
                if let Some((a, b)) = pairs.iter().find(|(a, b)| a >= dim || b >= dim) {
                    return bad(format!("factor pair ({a}, {b}) outside dimension {dim}"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: &DVector<f64>) -> DVector<f64> {
        match self {
            Node::Affine { weight, bias } => weight * z + bias,
            Node::Activation { kinds } => {
                DVector::from_iterator(z.len(), z.iter().zip(kinds).map(|(&v, k)| k.eval(v)))
            }
            Node::DualRelu {
                channel, ceiling, ..
            } => {
                let mut out = z.clone();
                out[*channel] = dual_relu(z[*channel], *ceiling);
                out
            }
            Node::Bilinear { dim, pairs } => DVector::from_iterator(
                dim + pairs.len(),
                z.iter()
                    .copied()
                    .chain(pairs.iter().map(|&(a, b)| z[a] * z[b])),
            ),
        }
    }
}

/// Where the interesting signals sit in the graph output.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphMeta {
    /// Supplementary excitation actions `U`.
    pub control: Vec<usize>,
    /// Excitation demands with their exciter ceilings.
    pub excitation: Vec<(usize, f64)>,
    pub a_max: f64,
    /// Per-component linearization residual of the algebraic channel.
    pub residual_bound: Vec<f64>,
    /// Output labels, one per output coordinate.
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopGraph {
    input_dim: usize,
    nodes: Vec<Node>,
    pub meta: GraphMeta,
}

impl ClosedLoopGraph {
    pub fn new(input_dim: usize) -> Self {
        Self {
            input_dim,
            nodes: Vec::new(),
            meta: GraphMeta::default(),
        }
    }

    /// Appends a node after checking that its input matches the current
    /// output dimension.
    pub fn push(&mut self, node: Node) -> Result<&mut Self> {
        let index = self.nodes.len();
        node.check(index)?;
        if node.input_dim() != self.output_dim() {
            return Err(Error::Graph {
                node: index,
                reason: format!(
                    "{} node expects {} inputs but the chain provides {}",
                    node.kind_name(),
                    node.input_dim(),
                    self.output_dim()
                ),
            });
        }
        self.nodes.push(node);
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.nodes.last().map_or(self.input_dim, Node::output_dim)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn eval(&self, w: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_trace(w)?.pop().expect("trace holds the input").iter().copied().collect())
    }

    /// Values entering each node, followed by the graph output.
    pub fn eval_trace(&self, w: &[f64]) -> Result<Vec<DVector<f64>>> {
        if w.len() != self.input_dim {
            return Err(Error::Dimension {
                context: "graph input".into(),
                expected: self.input_dim,
                actual: w.len(),
            });
        }
        let mut trace = Vec::with_capacity(self.nodes.len() + 1);
        trace.push(DVector::from_column_slice(w));
        for node in &self.nodes {
            let next = node.eval(trace.last().expect("non-empty"));
            trace.push(next);
        }
        Ok(trace)
    }

    /// SHA-256 over the node structure and every coefficient's bit pattern.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |x: u64| h.update(x.to_le_bytes());
        put(self.input_dim as u64);
        for node in &self.nodes {
            match node {
                Node::Affine { weight, bias } => {
                    put(1);
                    put(weight.nrows() as u64);
                    put(weight.ncols() as u64);
                    weight.iter().chain(bias.iter()).for_each(|v| put(v.to_bits()));
                }
                Node::Activation { kinds } => {
                    put(2);
                    put(kinds.len() as u64);
                    kinds.iter().for_each(|k| put(k.tag() as u64));
                }
                Node::DualRelu {
                    dim,
                    channel,
                    ceiling,
                } => {
                    put(3);
                    put(*dim as u64);
                    put(*channel as u64);
                    put(ceiling.to_bits());
                }
                Node::Bilinear { dim, pairs } => {
                    put(4);
                    put(*dim as u64);
                    for &(a, b) in pairs {
                        put(a as u64);
                        put(b as u64);
                    }
                }
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ClosedLoopGraph {
        let mut g = ClosedLoopGraph::new(1);
        g.push(Node::Affine {
            weight: DMatrix::from_row_slice(2, 1, &[1.0, -2.0]),
            bias: DVector::from_vec(vec![0.5, 3.0]),
        })
        .unwrap()
        .push(Node::Bilinear {
            dim: 2,
            pairs: vec![(0, 1)],
        })
        .unwrap()
        .push(Node::DualRelu {
            dim: 3,
            channel: 2,
            ceiling: 1.0,
        })
        .unwrap();
        g
    }

    #[test]
    fn eval_chains_nodes() {
        let g = small();
        assert_eq!(g.output_dim(), 3);
        assert_eq!(g.eval(&[1.0]).unwrap(), vec![1.5, 1.0, 1.0]);
        assert_eq!(g.eval(&[0.0]).unwrap(), vec![0.5, 3.0, 1.0]);
        assert_eq!(g.eval(&[-1.0]).unwrap(), vec![-0.5, 5.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_names_node() {
        let mut g = small();
        let err = g
            .push(Node::Activation {
                kinds: vec![Activation::Tanh; 2],
            })
            .unwrap_err();
        assert!(matches!(err, Error::Graph { node: 3, .. }), "{err}");
    }

    #[test]
    fn fingerprint_tracks_coefficients() {
        let a = small();
        let mut b = small();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.push(Node::Activation {
            kinds: vec![Activation::Identity; 3],
        })
        .unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }
}
