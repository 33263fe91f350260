//! Linear bound propagation through the verification graph.
//!
//! A forward sweep keeps an affine enclosure of every signal in the
//! disturbance and fixes one relaxation per nonlinear node from its
//! pre-activation bounds. The output bounds then come from a backward pass
//! that starts at the targets and walks the nodes in reverse, substituting
//! each relaxation according to the sign of the accumulated coefficient.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ClosedLoopGraph, Node};
use crate::interval::{DisturbanceBox, Interval};
use crate::neural::relax::{activation_relaxation, ActivationRelaxation};
use crate::propagation::bilinear::{mccormick_bilinear, BilinearMode, Plane};
use crate::propagation::bounds::LinearBounds;
use crate::propagation::certificate::{ExcitationBound, VerificationCertificate};
use crate::propagation::dual_relu::dual_relu_relax;
use crate::propagation::forward::interval_forward;

/// Source of the pre-activation bounds that fix each relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreActivation {
    /// Forward interval pass intersected with the forward enclosure.
    Forward,
    /// Additionally intersected with a backward pass from the node input.
    #[default]
    Backward,
}

pub const DEFAULT_SPLITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub bilinear: BilinearMode,
    pub pre_activation: PreActivation,
    /// Minimum number of grid cells per box axis (spread across axes when
    /// there are several). Each cell gets its own pass; 1 disables splitting.
    pub splits: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            bilinear: BilinearMode::default(),
            pre_activation: PreActivation::default(),
            splits: DEFAULT_SPLITS,
        }
    }
}

/// Relaxation fixed for one node.
#[derive(Debug, Clone, PartialEq)]
pub enum Relaxed {
    Affine,
    Elementwise(Vec<ActivationRelaxation>),
    /// `[under, over]` plane per factor pair.
    Bilinear(Vec<[Plane; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// Forward interval annotations, one entry per node plus the output.
    pub annotations: Vec<Vec<Interval>>,
    pub relaxations: Vec<Relaxed>,
    /// Forward enclosure of the graph output.
    pub forward: LinearBounds,
    /// Backward enclosure of the graph output.
    pub bounds: LinearBounds,
    /// Both enclosures concretized and intersected with the forward
    /// interval output.
    pub output: Vec<Interval>,
}

fn meet(annotation: Interval, symbolic: Interval) -> Interval {
    annotation.intersect(&symbolic).unwrap_or(annotation)
}

fn meet_all(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    a.iter().zip(b).map(|(x, y)| meet(*x, *y)).collect()
}

/// One side of the enclosure of `Σ k·z_i + c`.
fn side(lb: &LinearBounds, terms: &[(f64, usize)], c: f64, lower: bool) -> (RowDVector<f64>, f64) {
    let mut g = RowDVector::zeros(lb.input_dim());
    let mut b = c;
    for &(k, i) in terms {
        let take_lo = (k >= 0.0) == lower;
        let (gi, bi) = if take_lo {
            (lb.gamma_lo.row(i), lb.b_lo[i])
        } else {
            (lb.gamma_hi.row(i), lb.b_hi[i])
        };
        g += gi * k;
        b += bi * k;
    }
    (g, b)
}

fn concretize_row(g: &RowDVector<f64>, b: f64, bx: &DisturbanceBox, lower: bool) -> f64 {
    let (lo, hi) = (bx.lower(), bx.upper());
    g.iter().enumerate().fold(b, |acc, (j, &k)| {
        let at_lo = (k >= 0.0) == lower;
        acc + k * if at_lo { lo[j] } else { hi[j] }
    })
}

fn plane_side(lb: &LinearBounds, p: &Plane, a: usize, b: usize, lower: bool) -> (RowDVector<f64>, f64) {
    side(lb, &[(p.a, a), (p.b, b)], p.c, lower)
}

/// Chooses the under and over plane for each pair. McCormick planes are
/// ranked by the bound they give on the current forward enclosure.
fn bilinear_planes(
    lb: &LinearBounds,
    pairs: &[(usize, usize)],
    pre: &[Interval],
    bx: &DisturbanceBox,
    mode: BilinearMode,
) -> Result<Vec<[Plane; 2]>> {
    pairs
        .iter()
        .map(|&(a, b)| match mode {
            BilinearMode::McCormick => {
                let m = mccormick_bilinear(pre[a], pre[b])?;
                let best = |planes: &[Plane; 2], lower: bool| {
                    let v = planes.map(|p| {
                        let (g, c) = plane_side(lb, &p, a, b, lower);
                        concretize_row(&g, c, bx, lower)
                    });
                    let second = if lower { v[1] > v[0] } else { v[1] < v[0] };
                    planes[usize::from(second)]
                };
                Ok([best(&m.under, true), best(&m.over, false)])
            }
            BilinearMode::FrozenFactor => {
                let m_a = pre[a].mid();
                let m_b = pre[b].mid();
                let p = if pre[b].width() < pre[a].width() {
                    Plane { a: m_b, b: 0.0, c: 0.0 }
                } else {
                    Plane { a: 0.0, b: m_a, c: 0.0 }
                };
                Ok([p, p])
            }
        })
        .collect()
}

fn bilinear_forward(lb: &LinearBounds, pairs: &[(usize, usize)], planes: &[[Plane; 2]]) -> LinearBounds {
    let n = lb.signals();
    let d = lb.input_dim();
    let rows = n + pairs.len();
    let mut out = LinearBounds {
        gamma_lo: DMatrix::zeros(rows, d),
        gamma_hi: DMatrix::zeros(rows, d),
        b_lo: DVector::zeros(rows),
        b_hi: DVector::zeros(rows),
    };
    out.gamma_lo.rows_mut(0, n).copy_from(&lb.gamma_lo);
    out.gamma_hi.rows_mut(0, n).copy_from(&lb.gamma_hi);
    out.b_lo.rows_mut(0, n).copy_from(&lb.b_lo);
    out.b_hi.rows_mut(0, n).copy_from(&lb.b_hi);
    for (k, (&(a, b), [under, over])) in pairs.iter().zip(planes).enumerate() {
        let (gl, bl) = plane_side(lb, under, a, b, true);
        let (gh, bh) = plane_side(lb, over, a, b, false);
        out.gamma_lo.set_row(n + k, &gl);
        out.b_lo[n + k] = bl;
        out.gamma_hi.set_row(n + k, &gh);
        out.b_hi[n + k] = bh;
    }
    out
}

/// Substitutes nodes `nodes[..]` in reverse into the linear functions
/// `a_lo·z + b_lo ≤ target ≤ a_hi·z + b_hi`, where `z` is the output of the
/// last node, and returns them in terms of the disturbance.
fn backward(nodes: &[Node], relaxed: &[Relaxed], a0: DMatrix<f64>) -> LinearBounds {
    let t = a0.nrows();
    let mut a_lo = a0.clone();
    let mut a_hi = a0;
    let mut b_lo = DVector::zeros(t);
    let mut b_hi = DVector::zeros(t);
    for (node, rel) in nodes.iter().zip(relaxed).rev() {
        match (node, rel) {
            (Node::Affine { weight, bias }, _) => {
                b_lo += &a_lo * bias;
                b_hi += &a_hi * bias;
                a_lo = &a_lo * weight;
                a_hi = &a_hi * weight;
            }
            (_, Relaxed::Elementwise(relax)) => {
                for i in 0..t {
                    for (j, r) in relax.iter().enumerate() {
                        let a = a_lo[(i, j)];
                        let (k, c) = if a >= 0.0 {
                            (r.lower_slope, r.lower_intercept)
                        } else {
                            (r.upper_slope, r.upper_intercept)
                        };
                        a_lo[(i, j)] = a * k;
                        b_lo[i] += a * c;
                        let a = a_hi[(i, j)];
                        let (k, c) = if a >= 0.0 {
                            (r.upper_slope, r.upper_intercept)
                        } else {
                            (r.lower_slope, r.lower_intercept)
                        };
                        a_hi[(i, j)] = a * k;
                        b_hi[i] += a * c;
                    }
                }
            }
            (Node::Bilinear { dim, pairs }, Relaxed::Bilinear(planes)) => {
                let mut lo = a_lo.columns(0, *dim).into_owned();
                let mut hi = a_hi.columns(0, *dim).into_owned();
                for i in 0..t {
                    for (k, (&(x, y), [under, over])) in pairs.iter().zip(planes).enumerate() {
                        let a = a_lo[(i, dim + k)];
                        let p = if a >= 0.0 { under } else { over };
                        lo[(i, x)] += a * p.a;
                        lo[(i, y)] += a * p.b;
                        b_lo[i] += a * p.c;
                        let a = a_hi[(i, dim + k)];
                        let p = if a >= 0.0 { over } else { under };
                        hi[(i, x)] += a * p.a;
                        hi[(i, y)] += a * p.b;
                        b_hi[i] += a * p.c;
                    }
                }
                a_lo = lo;
                a_hi = hi;
            }
            _ => unreachable!("relaxation recorded for a different node kind"),
        }
    }
    LinearBounds {
        gamma_lo: a_lo,
        gamma_hi: a_hi,
        b_lo,
        b_hi,
    }
}

/// Propagates enclosures through `graph` using existing forward annotations.
pub fn propagate_annotated(
    graph: &ClosedLoopGraph,
    bx: &DisturbanceBox,
    annotations: &[Vec<Interval>],
    opts: &VerifyOptions,
) -> Result<Propagation> {
    if bx.dim() != graph.input_dim() {
        return Err(Error::Dimension {
            context: "graph input box".into(),
            expected: graph.input_dim(),
            actual: bx.dim(),
        });
    }
    let nodes = graph.nodes();
    let annotation = |k: usize, dim: usize| {
        annotations
            .get(k)
            .filter(|a| a.len() == dim)
            .ok_or(Error::MissingAnnotation { node: k })
    };
    let mut lb = LinearBounds::identity(bx.dim());
    let mut relaxed: Vec<Relaxed> = Vec::with_capacity(nodes.len());
    for (k, node) in nodes.iter().enumerate() {
        let ann = annotation(k, node.input_dim())?;
        let pre = || -> Result<Vec<Interval>> {
            let mut pre = meet_all(ann, &lb.concretize(bx)?);
            if opts.pre_activation == PreActivation::Backward && k > 0 {
                let back = backward(&nodes[..k], &relaxed, DMatrix::identity(pre.len(), pre.len()));
                pre = meet_all(&pre, &back.concretize(bx)?);
            }
            Ok(pre)
        };
        let rel = match node {
            Node::Affine { .. } => Relaxed::Affine,
            Node::Activation { kinds } => {
                let pre = pre()?;
                Relaxed::Elementwise(
                    kinds
                        .iter()
                        .zip(&pre)
                        .map(|(kind, iv)| activation_relaxation(*kind, iv.lo, iv.hi))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            Node::DualRelu {
                dim,
                channel,
                ceiling,
            } => {
                let pre = pre()?;
                let mut relax = vec![ActivationRelaxation::IDENTITY; *dim];
                relax[*channel] = dual_relu_relax(pre[*channel].lo, pre[*channel].hi, *ceiling)?;
                Relaxed::Elementwise(relax)
            }
            Node::Bilinear { pairs, .. } => {
                let pre = pre()?;
                Relaxed::Bilinear(bilinear_planes(&lb, pairs, &pre, bx, opts.bilinear)?)
            }
        };
        lb = match (node, &rel) {
            (Node::Affine { weight, bias }, _) => lb.backward_affine(weight, bias)?,
            (_, Relaxed::Elementwise(relax)) => lb.backward_activation(relax)?,
            (Node::Bilinear { pairs, .. }, Relaxed::Bilinear(planes)) => bilinear_forward(&lb, pairs, planes),
            _ => unreachable!("relaxation matches node kind"),
        };
        relaxed.push(rel);
    }
    let last = annotation(nodes.len(), graph.output_dim())?;
    let out_dim = graph.output_dim();
    let back = backward(nodes, &relaxed, DMatrix::identity(out_dim, out_dim));
    let output = meet_all(&meet_all(last, &lb.concretize(bx)?), &back.concretize(bx)?);
    Ok(Propagation {
        annotations: annotations.to_vec(),
        relaxations: relaxed,
        forward: lb,
        bounds: back,
        output,
    })
}

pub fn propagate(graph: &ClosedLoopGraph, bx: &DisturbanceBox, opts: &VerifyOptions) -> Result<Propagation> {
    let ann = interval_forward(graph, bx)?;
    propagate_annotated(graph, bx, &ann, opts)
}

/// Pieces covering `bx`, cut along the axis with the largest radius. Each
/// piece is padded by a few ulps so rounding cannot open gaps between them.
/// Grid cells of `[lo, hi]` with the largest power-of-two pitch that still
/// gives at least `k` cells. The grid is anchored at zero, so a sub-interval
/// never gets a coarser grid and each of its cells lies in one cell here.
fn dyadic_cells(lo: f64, hi: f64, k: usize) -> Vec<(f64, f64)> {
    let target = (hi - lo) / k as f64;
    if k <= 1 || target.is_nan() || target <= 0.0 {
        return vec![(lo, hi)];
    }
    let mut h = 2f64.powi(target.log2().floor() as i32);
    while h > target {
        h *= 0.5;
    }
    while 2.0 * h <= target {
        h *= 2.0;
    }
    let first = (lo / h).floor() as i64;
    let last = (hi / h).ceil() as i64;
    (first..last)
        .map(|n| (lo.max(n as f64 * h), hi.min((n + 1) as f64 * h)))
        .filter(|(a, b)| a < b)
        .collect()
}

/// Pieces covering `bx`, each axis cut on its own dyadic grid.
fn split_box(bx: &DisturbanceBox, k: usize) -> Option<Vec<DisturbanceBox>> {
    let active = bx.radius.iter().filter(|&&r| r > 0.0).count();
    if k <= 1 || active == 0 {
        return None;
    }
    let per_axis = (k as f64).powf(1.0 / active as f64).floor() as usize;
    let (lower, upper) = (bx.lower(), bx.upper());
    let mut pieces = vec![bx.clone()];
    for axis in 0..bx.dim() {
        if bx.radius[axis] == 0.0 {
            continue;
        }
        let cells = dyadic_cells(lower[axis], upper[axis], per_axis);
        pieces = pieces
            .iter()
            .flat_map(|p| {
                cells.iter().map(move |&(a, b)| {
                    let mut piece = p.clone();
                    piece.center[axis] = 0.5 * (a + b);
                    piece.radius[axis] = 0.5 * (b - a) + 8.0 * f64::EPSILON * a.abs().max(b.abs());
                    piece
                })
            })
            .collect();
    }
    (pieces.len() > 1).then_some(pieces)
}

/// Output enclosure over `bx`: the whole-box pass intersected with the hull
/// of the passes over the pieces.
pub fn certified_output(graph: &ClosedLoopGraph, bx: &DisturbanceBox, opts: &VerifyOptions) -> Result<Vec<Interval>> {
    let whole = propagate(graph, bx, opts)?.output;
    let Some(pieces) = split_box(bx, opts.splits) else {
        return Ok(whole);
    };
    let mut hull: Option<Vec<Interval>> = None;
    for piece in &pieces {
        let out = propagate(graph, piece, opts)?.output;
        hull = Some(match hull {
            None => out,
            Some(h) => h.iter().zip(&out).map(|(a, b)| a.hull(b)).collect(),
        });
    }
    Ok(hull.map_or(whole.clone(), |h| meet_all(&whole, &h)))
}

/// Certified output ranges of `targets` over `bx`.
pub fn verify(graph: &ClosedLoopGraph, bx: &DisturbanceBox, targets: &[usize]) -> Result<VerificationCertificate> {
    verify_with(graph, bx, targets, &VerifyOptions::default())
}

pub fn verify_with(
    graph: &ClosedLoopGraph,
    bx: &DisturbanceBox,
    targets: &[usize],
    opts: &VerifyOptions,
) -> Result<VerificationCertificate> {
    if let Some(&t) = targets.iter().find(|&&t| t >= graph.output_dim()) {
        return Err(Error::Dimension {
            context: format!("target index {t} vs graph output"),
            expected: graph.output_dim(),
            actual: t + 1,
        });
    }
    let out = &certified_output(graph, bx, opts)?;
    let meta = &graph.meta;
    let control_within_limits = meta
        .control
        .iter()
        .all(|&i| out[i].lo >= -meta.a_max && out[i].hi <= meta.a_max);
    let excitation: Vec<ExcitationBound> = meta
        .excitation
        .iter()
        .map(|&(index, e_max)| ExcitationBound {
            index,
            lb: out[index].lo,
            ub: out[index].hi,
            e_max,
        })
        .collect();
    let excitation_within_limits = excitation.iter().all(|e| e.lb >= 0.0 && e.ub <= e.e_max);
    let label = |i: usize| meta.labels.get(i).cloned().unwrap_or_else(|| format!("out{i}"));
    Ok(VerificationCertificate {
        targets: targets.to_vec(),
        labels: targets.iter().map(|&i| label(i)).collect(),
        lb: targets.iter().map(|&i| out[i].lo).collect(),
        ub: targets.iter().map(|&i| out[i].hi).collect(),
        saturation_free: control_within_limits && excitation_within_limits,
        control_within_limits,
        excitation_within_limits,
        a_max: meta.a_max,
        excitation,
        disturbance: bx.clone(),
        residual_bound: meta.residual_bound.clone(),
        graph_fingerprint: graph.fingerprint(),
        bilinear_mode: opts.bilinear,
        approximate: opts.bilinear == BilinearMode::FrozenFactor,
        generated_at: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::relax::Activation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn affine(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Node {
        Node::Affine {
            weight: DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.5..1.5)),
            bias: DVector::from_fn(rows, |_, _| rng.random_range(-0.5..0.5)),
        }
    }

    fn mixed_graph(rng: &mut ChaCha8Rng) -> ClosedLoopGraph {
        let mut g = ClosedLoopGraph::new(2);
        g.push(affine(6, 2, rng)).unwrap();
        g.push(Node::Activation {
            kinds: vec![Activation::Tanh, Activation::Relu, Activation::Tanh, Activation::Relu, Activation::Identity, Activation::Tanh],
        })
        .unwrap();
        g.push(affine(4, 6, rng)).unwrap();
        g.push(Node::Bilinear {
            dim: 4,
            pairs: vec![(0, 1), (2, 2)],
        })
        .unwrap();
        g.push(Node::DualRelu {
            dim: 6,
            channel: 3,
            ceiling: 0.7,
        })
        .unwrap();
        g.push(affine(3, 6, rng)).unwrap();
        g
    }

    #[test]
    fn certificate_encloses_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let g = mixed_graph(&mut rng);
            let bx = DisturbanceBox::new(vec![0.1, -0.2], vec![0.4, 0.25]).unwrap();
            let certs: Vec<_> = [PreActivation::Forward, PreActivation::Backward]
                .into_iter()
                .map(|pre_activation| {
                    let opts = VerifyOptions {
                        pre_activation,
                        ..Default::default()
                    };
                    verify_with(&g, &bx, &[0, 1, 2], &opts).unwrap()
                })
                .collect();
            let mut pts = bx.vertices();
            pts.push(bx.center.clone());
            for _ in 0..2000 {
                pts.push(
                    bx.intervals()
                        .iter()
                        .map(|iv| rng.random_range(iv.lo..=iv.hi))
                        .collect(),
                );
            }
            for w in pts {
                let y = g.eval(&w).unwrap();
                for cert in &certs {
                    for (i, iv) in cert.intervals().iter().enumerate() {
                        assert!(iv.contains_within(y[i], 1e-9), "{} outside {iv}", y[i]);
                    }
                }
            }
        }
    }

    #[test]
    fn dyadic_cells_cover_and_nest() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let outer = dyadic_cells(lo, hi, 8);
            assert_eq!(outer[0].0, lo);
            assert_eq!(outer.last().unwrap().1, hi);
            assert!(outer.windows(2).all(|w| w[0].1 == w[1].0));
            assert!(outer.len() >= 8);
            let t = rng.random_range(0.0..1.0);
            let (c, d) = (lo + (hi - lo) * t * 0.5, hi - (hi - lo) * (1.0 - t) * 0.3);
            for (x, y) in dyadic_cells(c, d, 8) {
                assert!(outer.iter().any(|&(p, q)| p <= x && y <= q), "[{x}, {y}] in {outer:?}");
            }
        }
    }

    #[test]
    fn zero_width_box_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = mixed_graph(&mut rng);
        let bx = DisturbanceBox::new(vec![0.3, -0.1], vec![0.0, 0.0]).unwrap();
        let cert = verify(&g, &bx, &[0, 1, 2]).unwrap();
        let y = g.eval(&bx.center).unwrap();
        for i in 0..3 {
            assert!(cert.ub[i] - cert.lb[i] <= 1e-9);
            assert!((cert.lb[i] - y[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn affine_graph_matches_forward_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut g = ClosedLoopGraph::new(3);
        g.push(affine(4, 3, &mut rng)).unwrap();
        let bx = DisturbanceBox::new(vec![0.0, 1.0, -1.0], vec![0.5, 0.2, 1.0]).unwrap();
        let cert = verify(&g, &bx, &[0, 1, 2, 3]).unwrap();
        let fwd = interval_forward(&g, &bx).unwrap();
        for (i, iv) in fwd[1].iter().enumerate() {
            assert!((cert.lb[i] - iv.lo).abs() <= 1e-12 && (cert.ub[i] - iv.hi).abs() <= 1e-12);
        }
    }

    #[test]
    fn backward_enclosure_is_sound_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let g = mixed_graph(&mut rng);
        let bx = DisturbanceBox::new(vec![0.0, 0.2], vec![0.3, 0.3]).unwrap();
        let prop = propagate(&g, &bx, &VerifyOptions::default()).unwrap();
        for _ in 0..500 {
            let w: Vec<f64> = bx.intervals().iter().map(|iv| rng.random_range(iv.lo..=iv.hi)).collect();
            let y = g.eval(&w).unwrap();
            let wv = DVector::from_column_slice(&w);
            for lb in [&prop.bounds, &prop.forward] {
                let lo = &lb.gamma_lo * &wv + &lb.b_lo;
                let hi = &lb.gamma_hi * &wv + &lb.b_hi;
                for i in 0..y.len() {
                    assert!(lo[i] <= y[i] + 1e-9 && y[i] <= hi[i] + 1e-9);
                }
            }
        }
    }

    #[test]
    fn missing_annotation_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = mixed_graph(&mut rng);
        let bx = DisturbanceBox::new(vec![0.0, 0.0], vec![0.1, 0.1]).unwrap();
        let ann = interval_forward(&g, &bx).unwrap();
        let err = propagate_annotated(&g, &bx, &ann[..1], &VerifyOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MissingAnnotation { node: 1 }), "{err}");
    }

    #[test]
    fn bad_target_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = mixed_graph(&mut rng);
        let bx = DisturbanceBox::new(vec![0.0, 0.0], vec![0.1, 0.1]).unwrap();
        assert!(verify(&g, &bx, &[3]).is_err());
    }
}
