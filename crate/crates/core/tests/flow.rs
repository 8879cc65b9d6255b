use katflow::checks::min_radius;
use katflow::flow::{choose_pin, find_zero_quad};
use katflow::{
    bootstrap, epsilon_schedule, generators, integrate_edge_flow, monitor, schedule_edges, solve, EdgeWeights, Error,
    FlowOptions, FlowState, ShallowMode, StopReason,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn single_edge_to_half() {
    let p = generators::octahedron();
    let cfg = bootstrap(&p).unwrap();
    let e = p.edge_index(0, 1).unwrap();
    let face = choose_pin(&p, &cfg, e, katflow::tol::COND_MAX).unwrap();
    let state = FlowState { cfg: cfg.clone(), pinned_face: face, free_edge: e, t: 0.0, target: 0.5 };
    let (out, trace) = integrate_edge_flow(&p, &state, &FlowOptions::default()).unwrap();

    assert_eq!(trace.stop_reason, StopReason::TargetReached);
    assert!((out.inversive(0, 1) - 0.5).abs() < 1e-8);
    for (f, &(i, j)) in p.edges().iter().enumerate() {
        if f != e {
            assert!((out.inversive(i, j) - 1.0).abs() < 1e-8);
        }
    }
    for v in face {
        assert_eq!(out.disks[v].to_array().map(f64::to_bits), cfg.disks[v].to_array().map(f64::to_bits));
    }
    assert!(out.max_norm_error() < 1e-10);
    assert!(min_radius(&out).unwrap() > 1e-3);
    assert!(trace.min_radius_floor > 1e-3);
    assert!(monitor(&p, &out, None, ShallowMode::Strict, 1e-8).unwrap().passed());

    let mut prev_t = 0.0;
    let mut prev_d = 1.0;
    for r in &trace.records {
        assert!(r.monitors_ok);
        assert!(r.max_drift < 1e-8);
        assert!(r.norm_error < 1e-10);
        assert!((r.t - prev_t - r.step).abs() < 1e-12);
        assert!(r.d_free < prev_d);
        let slope = (r.d_free - prev_d) / r.step;
        assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
        prev_t = r.t;
        prev_d = r.d_free;
    }
    assert!((prev_t - 0.5).abs() < 1e-12);
}

#[test]
fn target_at_current_value_takes_no_steps() {
    let p = generators::octahedron();
    let cfg = bootstrap(&p).unwrap();
    let e = p.edge_index(0, 1).unwrap();
    let face = choose_pin(&p, &cfg, e, katflow::tol::COND_MAX).unwrap();
    let target = cfg.inversive(0, 1);
    let state = FlowState { cfg: cfg.clone(), pinned_face: face, free_edge: e, t: 0.0, target };
    let (out, trace) = integrate_edge_flow(&p, &state, &FlowOptions::default()).unwrap();
    assert!(trace.records.is_empty());
    assert_eq!(trace.stop_reason, StopReason::TargetReached);
    assert_eq!(out, cfg);
}

#[test]
fn free_edge_on_the_pinned_face_is_rejected() {
    let p = generators::octahedron();
    let cfg = bootstrap(&p).unwrap();
    let face = p.faces()[0];
    let e = p.edge_index(face[0], face[1]).unwrap();
    let state = FlowState { cfg, pinned_face: face, free_edge: e, t: 0.0, target: 0.5 };
    assert!(matches!(integrate_edge_flow(&p, &state, &FlowOptions::default()), Err(Error::Precondition(_))));
}

#[test]
fn step_limit_reports_the_last_state() {
    let p = generators::octahedron();
    let cfg = bootstrap(&p).unwrap();
    let e = p.edge_index(0, 1).unwrap();
    let face = choose_pin(&p, &cfg, e, katflow::tol::COND_MAX).unwrap();
    let state = FlowState { cfg, pinned_face: face, free_edge: e, t: 0.0, target: 0.0 };
    let opts = FlowOptions { max_steps: 2, ..Default::default() };
    match integrate_edge_flow(&p, &state, &opts) {
        Err(Error::Flow(f)) => {
            assert_eq!(f.reason, StopReason::MaxSteps);
            assert_eq!(f.trace.records.len(), 2);
            assert!(f.last.inversive(0, 1) < 1.0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn octahedron_all_half() {
    let p = generators::octahedron();
    let cfg = bootstrap(&p).unwrap();
    let r = schedule_edges(&p, &EdgeWeights::uniform(&p, 0.5), &cfg, &FlowOptions::default()).unwrap();
    assert_eq!(r.flows, 12);
    assert!(r.max_residual < 1e-8);
    assert!(r.min_radius_floor > 1e-3);
    assert!(monitor(&p, &r.cfg, None, ShallowMode::Strict, 1e-8).unwrap().passed());
}

#[test]
fn tangency_targets_need_no_flow() {
    let p = generators::icosahedron();
    let cfg = bootstrap(&p).unwrap();
    let r = schedule_edges(&p, &EdgeWeights::uniform(&p, 1.0), &cfg, &FlowOptions::default()).unwrap();
    assert_eq!(r.flows, 0);
    assert_eq!(r.cfg, cfg);
}

#[test]
fn icosahedron_random_targets() {
    let p = generators::icosahedron();
    let cfg = bootstrap(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..3 {
        let w = EdgeWeights::from_vec(&p, (0..p.num_edges()).map(|_| rng.random_range(0.2..1.0)).collect()).unwrap();
        let r = solve(&p, &w, &cfg, &FlowOptions::default()).unwrap();
        assert!(r.max_residual < 1e-8);
        assert!(r.flows <= p.num_edges());
        assert!(r.traces.iter().all(|t| t.records.iter().all(|s| s.monitors_ok)));
    }
}

#[test]
fn rejected_inputs() {
    let t = generators::tetrahedron();
    let w = EdgeWeights::uniform(&t, 0.5);
    let dummy = katflow::Configuration::new(vec![]);
    assert!(matches!(solve(&t, &w, &dummy, &FlowOptions::default()), Err(Error::Tetrahedron)));

    // Around the equator of the triangular bipyramid the angles sum past π.
    let p = generators::bipyramid(3);
    let w = EdgeWeights::uniform(&p, 0.2);
    let cfg = bootstrap(&p).unwrap();
    assert!(matches!(solve(&p, &w, &cfg, &FlowOptions::default()), Err(Error::KatViolation(_))));
}

#[test]
fn solves_are_deterministic() {
    let p = generators::random_triangulation(12, 5);
    let cfg = bootstrap(&p).unwrap();
    let w = EdgeWeights::uniform(&p, 0.9);
    let a = solve(&p, &w, &cfg, &FlowOptions::default()).unwrap();
    let b = solve(&p, &w, &cfg, &FlowOptions::default()).unwrap();
    assert_eq!(a.cfg, b.cfg);
    assert_eq!(a.residuals, b.residuals);
}

fn zero_quad_octahedron() -> (katflow::TriangulatedPolyhedron, EdgeWeights) {
    let p = generators::octahedron();
    let mut w = EdgeWeights::uniform(&p, 0.5);
    for (a, b) in [(0, 1), (0, 3), (2, 3), (1, 2)] {
        w.set(p.edge_index(a, b).unwrap(), 0.0);
    }
    (p, w)
}

#[test]
fn zero_quad_is_found() {
    let (p, w) = zero_quad_octahedron();
    let (face, apex, diag) = find_zero_quad(&p, &w).unwrap();
    assert!(face.contains(&apex) && face.contains(&diag.0) && face.contains(&diag.1));
    assert!(find_zero_quad(&p, &EdgeWeights::uniform(&p, 0.5)).is_none());
}

#[test]
fn epsilon_levels_decrease() {
    let (p, w) = zero_quad_octahedron();
    let cfg = bootstrap(&p).unwrap();
    let r = epsilon_schedule(&p, &w, &cfg, &FlowOptions::default()).unwrap();
    assert!(r.levels.len() >= 11);
    for pair in r.levels.windows(2) {
        assert!(pair[1].residual < pair[0].residual);
    }
    assert!(r.max_residual < 1e-4);
}

#[test]
fn strictly_shallow_input_skips_the_relaxation() {
    let p = generators::octahedron();
    let cfg = bootstrap(&p).unwrap();
    let r = epsilon_schedule(&p, &EdgeWeights::uniform(&p, 0.5), &cfg, &FlowOptions::default()).unwrap();
    assert!(r.levels.is_empty());
    assert_eq!(r.flows, 12);
}

#[test]
fn small_disks_do_not_stall_the_integrator() {
    // Disks down to radius 0.004: constraint rows carry rounding of order
    // |Di| |Dj| ulps, far above an absolute 1e-12.
    let p = generators::random_triangulation(20, 1);
    let cfg = bootstrap(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = loop {
        let w = EdgeWeights::from_vec(&p, (0..p.num_edges()).map(|_| rng.random_range(0.4..=1.0)).collect()).unwrap();
        if katflow::kat_conditions_check(&p, &w).is_empty() {
            break w;
        }
    };
    let r = solve(&p, &w, &cfg, &FlowOptions::default()).unwrap();
    assert!(r.max_residual < 1e-8);
    let drift = r.traces.iter().flat_map(|t| &t.records).map(|s| s.max_drift).fold(0.0, f64::max);
    assert!(drift < 1e-8, "drift {drift:e}");
    // The norm constraint can only hold to the rounding level of <D, D>.
    for d in &r.cfg.disks {
        let n2 = d.euclid_norm().powi(2);
        assert!((katflow::lorentz_inner(*d, *d) + 1.0).abs() < 1e-12 * n2.max(1.0));
    }
}
