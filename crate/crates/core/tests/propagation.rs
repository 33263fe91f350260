use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smg_cert::propagation::forward::interval_forward;
use smg_cert::propagation::verify::{propagate, PreActivation};
use smg_cert::smg::closed_loop::{simulate_linearized, stand_in_spec};
use smg_cert::{
    assemble_closed_loop, find_steady_state, generate_controller, verify, verify_with, DisturbanceBox,
    HiddenActivation, LinearBounds, MlpController, OperatingPoint, SmgParams, VerifyOptions,
};

fn operating_point() -> OperatingPoint {
    let p = SmgParams::default();
    find_steady_state(&p, p.sim.load_level).unwrap()
}

fn controllers(op: &OperatingPoint) -> Vec<MlpController> {
    let mut out = Vec::new();
    for seed in 0..4 {
        for (act, aggr) in [(HiddenActivation::Tanh, 1.0), (HiddenActivation::Relu, 1.0), (HiddenActivation::Tanh, 5.0)] {
            out.push(generate_controller(&stand_in_spec(op, seed, act, aggr)).unwrap());
        }
    }
    out
}

#[test]
fn graph_matches_linearized_simulation_pointwise() {
    let op = operating_point();
    let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
    for ctrl in controllers(&op) {
        let asm = assemble_closed_loop(&op, &ctrl, &bx).unwrap();
        for k in 0..=20 {
            let w = 0.08 + 0.002 * k as f64;
            let y = asm.graph.eval(&[w]).unwrap();
            let sim = simulate_linearized(&op, &ctrl, asm.u0, &asm.lin, w).unwrap().to_vec();
            for (a, b) in y.iter().zip(&sim) {
                assert!((a - b).abs() <= 1e-9, "w {w}: graph {a} vs simulation {b}");
            }
        }
    }
}

#[test]
fn certificates_enclose_graph_outputs() {
    let op = operating_point();
    let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for ctrl in controllers(&op) {
        let asm = assemble_closed_loop(&op, &ctrl, &bx).unwrap();
        let targets: Vec<usize> = (0..asm.graph.output_dim()).collect();
        let cert = verify(&asm.graph, &bx, &targets).unwrap();
        let mut pts = vec![bx.lower()[0], bx.upper()[0], bx.center[0]];
        pts.extend((0..5000).map(|_| rng.random_range(bx.lower()[0]..=bx.upper()[0])));
        for w in pts {
            let y = asm.graph.eval(&[w]).unwrap();
            for (k, iv) in cert.intervals().iter().enumerate() {
                assert!(iv.contains_within(y[k], 1e-9), "{} at w {w}: {} outside {iv}", cert.labels[k], y[k]);
            }
        }
    }
}

#[test]
fn nested_boxes_give_nested_certificates() {
    let op = operating_point();
    let outer = DisturbanceBox::scalar(0.1, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for ctrl in controllers(&op) {
        let asm = assemble_closed_loop(&op, &ctrl, &outer).unwrap();
        let control = &asm.graph.meta.control;
        let big = verify(&asm.graph, &outer, control).unwrap();
        for _ in 0..10 {
            let a = rng.random_range(0.05..0.15);
            let b = rng.random_range(0.05..0.15);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let inner = DisturbanceBox::scalar(0.5 * (lo + hi), 0.5 * (hi - lo)).unwrap();
            let small = verify(&asm.graph, &inner, control).unwrap();
            for k in 0..control.len() {
                assert!(
                    small.interval(k).subset_of(&big.interval(k), 1e-12),
                    "box [{lo}, {hi}]: {} not inside {}",
                    small.interval(k),
                    big.interval(k)
                );
            }
        }
    }
}

#[test]
fn widths_grow_with_concentric_boxes() {
    let op = operating_point();
    for ctrl in controllers(&op) {
        let mut last = vec![0.0; 2];
        for k in 1..=10 {
            let bx = DisturbanceBox::scalar(0.1, 0.005 * k as f64).unwrap();
            let asm = assemble_closed_loop(&op, &ctrl, &bx).unwrap();
            let w = verify(&asm.graph, &bx, &asm.graph.meta.control).unwrap().widths();
            assert!(w.iter().zip(&last).all(|(a, b)| a >= b), "{w:?} after {last:?}");
            last = w;
        }
    }
}

#[test]
fn degenerate_box_equals_point_evaluation() {
    let op = operating_point();
    let bx = DisturbanceBox::scalar(0.1, 0.0).unwrap();
    for ctrl in controllers(&op) {
        let asm = assemble_closed_loop(&op, &ctrl, &bx).unwrap();
        let targets: Vec<usize> = (0..asm.graph.output_dim()).collect();
        let cert = verify(&asm.graph, &bx, &targets).unwrap();
        let y = asm.graph.eval(&[0.1]).unwrap();
        for k in 0..targets.len() {
            assert!(cert.ub[k] - cert.lb[k] <= 1e-9);
            assert!((cert.lb[k] - y[k]).abs() <= 1e-9 && (cert.ub[k] - y[k]).abs() <= 1e-9);
        }
    }
}

#[test]
fn certificate_no_wider_than_interval_pass() {
    let op = operating_point();
    let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
    for ctrl in controllers(&op) {
        let asm = assemble_closed_loop(&op, &ctrl, &bx).unwrap();
        let fwd = interval_forward(&asm.graph, &bx).unwrap();
        let out = fwd.last().unwrap();
        for pre_activation in [PreActivation::Forward, PreActivation::Backward] {
            let opts = VerifyOptions {
                pre_activation,
                ..Default::default()
            };
            let prop = propagate(&asm.graph, &bx, &opts).unwrap();
            for (c, f) in prop.output.iter().zip(out) {
                assert!(c.width() <= f.width(), "{c} wider than {f}");
            }
        }
    }
}

#[test]
fn frozen_factor_marks_certificate_approximate() {
    let op = operating_point();
    let bx = DisturbanceBox::scalar(0.1, 0.02).unwrap();
    let ctrl = generate_controller(&stand_in_spec(&op, 1, HiddenActivation::Tanh, 1.0)).unwrap();
    let asm = assemble_closed_loop(&op, &ctrl, &bx).unwrap();
    let opts = VerifyOptions {
        bilinear: smg_cert::BilinearMode::FrozenFactor,
        ..Default::default()
    };
    let cert = verify_with(&asm.graph, &bx, &asm.graph.meta.control, &opts).unwrap();
    assert!(cert.approximate);
    assert!(!verify(&asm.graph, &bx, &asm.graph.meta.control).unwrap().approximate);
}

/// Sign-split composition evaluated at a single disturbance point.
fn composed_at(lb: &LinearBounds, l: &DMatrix<f64>, c: &DVector<f64>, w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let lo = &lb.gamma_lo * w + &lb.b_lo;
    let hi = &lb.gamma_hi * w + &lb.b_hi;
    let mut out_lo = c.clone();
    let mut out_hi = c.clone();
    for i in 0..l.nrows() {
        for j in 0..l.ncols() {
            let k = l[(i, j)];
            out_lo[i] += k * if k >= 0.0 { lo[j] } else { hi[j] };
            out_hi[i] += k * if k >= 0.0 { hi[j] } else { lo[j] };
        }
    }
    (out_lo, out_hi)
}

fn vertices(bx: &DisturbanceBox) -> Vec<DVector<f64>> {
    bx.vertices().into_iter().map(DVector::from_vec).collect()
}

prop_compose! {
    fn instance()(d in 1usize..=6, n in 1usize..=4, m in 1usize..=4, seed in any::<u64>())
        -> (LinearBounds, DMatrix<f64>, DVector<f64>, DisturbanceBox) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = |s: f64| rng.random_range(-s..s);
        let bx = DisturbanceBox::new(
            (0..d).map(|_| r(1.0)).collect(),
            (0..d).map(|_| r(1.0).abs()).collect(),
        ).unwrap();
        let reach: Vec<f64> = (0..d).map(|j| bx.center[j].abs() + bx.radius[j]).collect();
        let g = DMatrix::from_fn(n, d, |_, _| r(2.0));
        let spread = DMatrix::from_fn(n, d, |_, _| r(0.5));
        let b = DVector::from_fn(n, |_, _| r(1.0));
        // wide enough that the lower side stays below the upper side on the box
        let gap = DVector::from_fn(n, |i, _| {
            r(0.3).abs() + (0..d).map(|j| spread[(i, j)].abs() * reach[j]).sum::<f64>()
        });
        let lb = LinearBounds {
            gamma_lo: &g - &spread,
            gamma_hi: &g + &spread,
            b_lo: &b - &gap,
            b_hi: &b + &gap,
        };
        let l = DMatrix::from_fn(m, n, |_, _| r(3.0));
        let c = DVector::from_fn(m, |_, _| r(1.0));
        (lb, l, c, bx)
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn affine_composition_matches_vertex_enumeration((lb, l, c, bx) in instance()) {
        let composed = lb.backward_affine(&l, &c).unwrap();
        let bounds = composed.concretize(&bx).unwrap();
        for i in 0..l.nrows() {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in vertices(&bx) {
                let (a, b) = composed_at(&lb, &l, &c, &v);
                lo = lo.min(a[i]);
                hi = hi.max(b[i]);
            }
            let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
            prop_assert!((bounds[i].lo - lo).abs() <= tol, "lower {} vs {}", bounds[i].lo, lo);
            prop_assert!((bounds[i].hi - hi).abs() <= tol, "upper {} vs {}", bounds[i].hi, hi);
        }
    }
}
