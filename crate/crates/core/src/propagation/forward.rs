//! Forward interval pass over the verification graph.

use crate::error::{Error, Result};
use crate::graph::{ClosedLoopGraph, Node};
use crate::interval::{DisturbanceBox, Interval};
use crate::smg::machines::dual_relu;

/// Interval image of one node.
pub fn node_interval(node: &Node, input: &[Interval]) -> Vec<Interval> {
    match node {
        Node::Affine { weight, bias } => (0..weight.nrows())
            .map(|r| {
                let (mut lo, mut hi) = (0.0, 0.0);
                for (c, iv) in input.iter().enumerate() {
                    let a = weight[(r, c)];
                    if a >= 0.0 {
                        lo += a * iv.lo;
                        hi += a * iv.hi;
                    } else {
                        lo += a * iv.hi;
                        hi += a * iv.lo;
                    }
                }
                Interval {
                    lo: lo + bias[r],
                    hi: hi + bias[r],
                }
            })
            .collect(),
        Node::Activation { kinds } => input
            .iter()
            .zip(kinds)
            .map(|(iv, k)| iv.monotone_image(|z| k.eval(z)))
            .collect(),
        Node::DualRelu {
            channel, ceiling, ..
        } => {
            let mut out = input.to_vec();
            out[*channel] = input[*channel].monotone_image(|z| dual_relu(z, *ceiling));
            out
        }
        Node::Bilinear { pairs, .. } => input
            .iter()
            .copied()
            .chain(pairs.iter().map(|&(a, b)| {
                if a == b {
                    square(input[a])
                } else {
                    input[a].mul(&input[b])
                }
            }))
            .collect(),
    }
}

fn square(x: Interval) -> Interval {
    let (a, b) = (x.lo * x.lo, x.hi * x.hi);
    if x.lo <= 0.0 && x.hi >= 0.0 {
        Interval { lo: 0.0, hi: a.max(b) }
    } else {
        Interval::hull_of(a, b)
    }
}

/// Intervals entering each node, followed by the output interval.
pub fn interval_forward(graph: &ClosedLoopGraph, bx: &DisturbanceBox) -> Result<Vec<Vec<Interval>>> {
    if bx.dim() != graph.input_dim() {
        return Err(Error::Dimension {
            context: "graph input box".into(),
            expected: graph.input_dim(),
            actual: bx.dim(),
        });
    }
    let mut out = Vec::with_capacity(graph.nodes().len() + 1);
    out.push(bx.intervals());
    for (k, node) in graph.nodes().iter().enumerate() {
        let next = node_interval(node, out.last().expect("non-empty"));
        if let Some((i, iv)) = next.iter().enumerate().find(|(_, iv)| !iv.is_finite()) {
            return Err(Error::Graph {
                node: k,
                reason: format!("output {i} interval {iv} is not finite"),
            });
        }
        out.push(next);
    }
    Ok(out)
}
