//! Edge flows: move the unpinned disks so one edge's inversive distance
//! drops at unit rate while every other constraint stays fixed.

use std::fmt;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::checks::{min_radius, monitor, Configuration, MonitorReport, ShallowMode};
use crate::complex::{kat_conditions_check, strictly_shallow_check, EdgeWeights, TriangulatedPolyhedron};
use crate::error::{Error, Result};
use crate::geom::{Disk4, SpherePoint};
use crate::rigidity::{assemble_rigidity, flow_velocity, unmarked_matrix, RowKind, UnmarkedMatrix};
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub initial_step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub newton_tol: f64,
    pub newton_iters: usize,
    pub tol_target: f64,
    pub tol_drift: f64,
    pub cond_max: f64,
    /// Run the geometric monitors after every accepted step.
    pub monitors: bool,
    pub monitor_tol: f64,
    pub mode: ShallowMode,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            initial_step: 1e-2,
            rtol: 1e-8,
            atol: 1e-8,
            max_steps: 20_000,
            newton_tol: 1e-12,
            newton_iters: 5,
            tol_target: tol::TARGET,
            tol_drift: tol::DRIFT,
            cond_max: tol::COND_MAX,
            monitors: true,
            monitor_tol: tol::DRIFT,
            mode: ShallowMode::Strict,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub cfg: Configuration,
    pub pinned_face: [usize; 3],
    pub free_edge: usize,
    pub t: f64,
    pub target: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    IllConditioned,
    MonitorViolation,
    MaxSteps,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::TargetReached => "target reached",
            StopReason::IllConditioned => "unmarked rigidity matrix ill-conditioned",
            StopReason::MonitorViolation => "geometric monitor violated",
            StopReason::MaxSteps => "step limit reached",
        })
    }
}

/// One accepted step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub t: f64,
    pub d_free: f64,
    pub step: f64,
    pub min_radius: f64,
    pub monitors_ok: bool,
    /// Largest change of a non-free edge since the start of the flow.
    pub max_drift: f64,
    pub norm_error: f64,
    pub cond: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub free_edge: (usize, usize),
    pub pinned_face: [usize; 3],
    pub target: f64,
    pub start: Configuration,
    /// Initial velocity of every disk (zero on the pinned face).
    pub start_velocity: Vec<Disk4>,
    pub records: Vec<FlowRecord>,
    pub stop_reason: StopReason,
    pub min_radius_floor: f64,
}

/// Why a flow stopped early, with the last accepted state.
#[derive(Clone, Debug)]
pub struct FlowFailure {
    pub reason: StopReason,
    pub detail: String,
    pub last: Configuration,
    pub trace: FlowTrace,
    pub report: Option<MonitorReport>,
}

impl FlowFailure {
    fn into_error(self) -> Error {
        Error::Flow(Box::new(self))
    }
}

/// Dormand-Prince 5(4) tableau. The right-hand side does not depend on `t`,
/// so the stage times are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Maps between the configuration and the unpinned coordinate vector.
struct Coords<'a> {
    p: &'a TriangulatedPolyhedron,
    base: Configuration,
    face: [usize; 3],
    free: Vec<usize>,
}

impl Coords<'_> {
    fn pack(&self, cfg: &Configuration) -> DVector<f64> {
        DVector::from_iterator(4 * self.free.len(), self.free.iter().flat_map(|&v| cfg.disks[v].to_array()))
    }

    fn unpack(&self, x: &DVector<f64>) -> Configuration {
        let mut cfg = self.base.clone();
        for (b, &v) in self.free.iter().enumerate() {
            cfg.disks[v] = Disk4::new(x[4 * b], x[4 * b + 1], x[4 * b + 2], x[4 * b + 3]);
        }
        cfg
    }

    fn unmarked(&self, cfg: &Configuration) -> UnmarkedMatrix {
        unmarked_matrix(&assemble_rigidity(self.p, cfg), self.face).expect("n > 4 checked")
    }

    /// Constraint values in `J_u` row order.
    fn constraints(&self, ju: &UnmarkedMatrix, cfg: &Configuration) -> DVector<f64> {
        DVector::from_iterator(
            ju.rows.len(),
            ju.rows.iter().map(|r| match *r {
                RowKind::Edge(e) => {
                    let (i, j) = self.p.edges()[e];
                    cfg.inversive(i, j)
                }
                RowKind::Vertex(v) => 0.5 * cfg.inversive(v, v),
            }),
        )
    }
}

fn weighted_sum(x: &DVector<f64>, h: f64, coef: &[f64], k: &[DVector<f64>]) -> DVector<f64> {
    let mut y = x.clone();
    for (c, ki) in coef.iter().zip(k) {
        if *c != 0.0 {
            y.axpy(h * c, ki, 1.0);
        }
    }
    y
}

/// Largest constraint residual relative to the rounding level of its row:
/// an inner product of disks with norms `|Di|`, `|Dj|` cannot be evaluated
/// closer than about `|Di| |Dj|` ulps.
fn rounding_scaled(rows: &[RowKind], p: &TriangulatedPolyhedron, cfg: &Configuration, f: &DVector<f64>) -> f64 {
    let norm = |v: usize| cfg.disks[v].euclid_norm();
    rows.iter()
        .zip(f.iter())
        .map(|(kind, r)| {
            let scale = match *kind {
                RowKind::Edge(e) => {
                    let (i, j) = p.edges()[e];
                    norm(i) * norm(j)
                }
                RowKind::Vertex(v) => norm(v) * norm(v),
            };
            r.abs() / scale.max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Drives the free edge to its target with an adaptive Runge-Kutta
/// predictor and a Newton corrector back onto the constraint set.
///
/// The free edge decreases at exactly unit rate, so the target is reached at
/// `t = d0 - target` and the final step is clipped to land there.
pub fn integrate_edge_flow(
    p: &TriangulatedPolyhedron,
    state: &FlowState,
    opts: &FlowOptions,
) -> Result<(Configuration, FlowTrace)> {
    let face = state.pinned_face;
    if p.face_index(face).is_none() {
        return Err(Error::Precondition(format!("{face:?} is not a face")));
    }
    if p.n() <= 4 {
        return Err(Error::TooSmall(p.n()));
    }
    let e = state.free_edge;
    let (ei, ej) = p.edges()[e];
    if face.contains(&ei) && face.contains(&ej) {
        return Err(Error::Precondition(format!("free edge ({ei}, {ej}) lies on the pinned face")));
    }
    let cfg0 = state.cfg.clone();
    let d0 = cfg0.inversive(ei, ej);
    if d0 < state.target - opts.tol_target {
        return Err(Error::Precondition(format!("edge ({ei}, {ej}) is at {d0}, below its target {}", state.target)));
    }

    let coords = Coords { p, base: cfg0.clone(), face, free: (0..p.n()).filter(|v| !face.contains(v)).collect() };
    let ju0 = coords.unmarked(&cfg0);
    let row_e = ju0.edge_row(e).unwrap();
    let mut trace = FlowTrace {
        free_edge: (ei, ej),
        pinned_face: face,
        target: state.target,
        start: cfg0.clone(),
        start_velocity: vec![Disk4::new(0.0, 0.0, 0.0, 0.0); p.n()],
        records: Vec::new(),
        stop_reason: StopReason::TargetReached,
        min_radius_floor: min_radius(&cfg0)?,
    };
    let fail = |reason, detail: String, last: &Configuration, trace: &FlowTrace, report| {
        let mut trace = trace.clone();
        trace.stop_reason = reason;
        FlowFailure { reason, detail, last: last.clone(), trace, report }.into_error()
    };

    match flow_velocity(&ju0, e) {
        Ok(v) => trace.start_velocity = ju0.expand(&v, p.n()),
        Err(Error::IllConditioned(c)) => {
            return Err(fail(StopReason::IllConditioned, format!("cond {c:e} at start"), &cfg0, &trace, None))
        }
        Err(other) => return Err(other),
    }
    let t_end = d0 - state.target;
    if t_end <= opts.tol_target {
        return Ok((cfg0, trace));
    }

    let targets0 = coords.constraints(&ju0, &cfg0);
    let edge_rows: Vec<usize> = ju0
        .rows
        .iter()
        .enumerate()
        .filter(|(r, k)| matches!(k, RowKind::Edge(_)) && *r != row_e)
        .map(|(r, _)| r)
        .collect();
    let mut rhs = DVector::zeros(ju0.rows.len());
    rhs[row_e] = -1.0;

    let velocity = |x: &DVector<f64>| -> Option<DVector<f64>> {
        let cfg = coords.unpack(x);
        coords.unmarked(&cfg).solve(&rhs).ok()
    };
    // Newton projection onto {constraints = targets(t)}.
    let project = |x: &DVector<f64>, t: f64| -> Option<(DVector<f64>, f64)> {
        let mut want = targets0.clone();
        want[row_e] = d0 - t;
        let mut x = x.clone();
        let mut res = f64::INFINITY;
        for it in 0..=opts.newton_iters {
            let cfg = coords.unpack(&x);
            let ju = coords.unmarked(&cfg);
            let f = coords.constraints(&ju, &cfg) - &want;
            res = rounding_scaled(&ju.rows, p, &cfg, &f);
            if res < opts.newton_tol || it == opts.newton_iters {
                // One more step usually lands on the rounding floor; keep it
                // only if it helps.
                if res < opts.newton_tol {
                    if let Ok(dx) = ju.solve(&f) {
                        let polished = &x - dx;
                        let cfg = coords.unpack(&polished);
                        let ju = coords.unmarked(&cfg);
                        let f2 = coords.constraints(&ju, &cfg) - &want;
                        if f2.amax() < f.amax() {
                            x = polished;
                            res = res.min(rounding_scaled(&ju.rows, p, &cfg, &f2));
                        }
                    }
                }
                break;
            }
            let dx = ju.solve(&f).ok()?;
            x -= dx;
        }
        Some((x, res))
    };

    let mut x = coords.pack(&cfg0);
    let mut t = 0.0;
    let mut h = opts.initial_step.min(t_end);
    let h_min = 1e-14 * t_end.max(1.0);
    let mut last_cfg = cfg0.clone();
    let mut attempts = 0usize;
    let mut k1 = match velocity(&x) {
        Some(k) => k,
        None => return Err(fail(StopReason::IllConditioned, "singular at start".into(), &cfg0, &trace, None)),
    };
    loop {
        if trace.records.len() >= opts.max_steps || attempts >= 10 * opts.max_steps {
            return Err(fail(
                StopReason::MaxSteps,
                format!("{} steps, t = {t} of {t_end}", trace.records.len()),
                &last_cfg,
                &trace,
                None,
            ));
        }
        attempts += 1;
        if h < h_min {
            return Err(fail(
                StopReason::IllConditioned,
                format!("step size underflow at t = {t}"),
                &last_cfg,
                &trace,
                None,
            ));
        }
        let remaining = t_end - t;
        let last = h >= remaining * (1.0 - 1e-12);
        let h_try = if last { remaining } else { h };

        let mut k: Vec<DVector<f64>> = vec![k1.clone()];
        let mut ok = true;
        for s in 1..7 {
            let xs = weighted_sum(&x, h_try, &A[s][..s], &k);
            match velocity(&xs) {
                Some(v) => k.push(v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            h = 0.25 * h_try;
            continue;
        }
        let x5 = weighted_sum(&x, h_try, &B5, &k);
        let x4 = weighted_sum(&x, h_try, &B4, &k);
        let mut err: f64 = 0.0;
        for i in 0..x.len() {
            let sc = opts.atol + opts.rtol * x[i].abs().max(x5[i].abs());
            err = err.max((x5[i] - x4[i]).abs() / sc);
        }
        if !err.is_finite() || err > 1.0 {
            h = h_try * if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.25 };
            continue;
        }
        let t_new = if last { t_end } else { t + h_try };
        let Some((xp, res)) = project(&x5, t_new) else {
            h = 0.5 * h_try;
            continue;
        };
        if res > opts.newton_tol.max(0.01 * opts.tol_target) {
            h = 0.5 * h_try;
            continue;
        }

        x = xp;
        t = t_new;
        let cfg = coords.unpack(&x);
        let ju = coords.unmarked(&cfg);
        let cond = ju.condition_number();
        let vals = coords.constraints(&ju, &cfg);
        let max_drift = edge_rows.iter().map(|&r| (vals[r] - targets0[r]).abs()).fold(0.0, f64::max);
        let rec = FlowRecord {
            t,
            d_free: cfg.inversive(ei, ej),
            step: h_try,
            min_radius: min_radius(&cfg)?,
            monitors_ok: true,
            max_drift,
            norm_error: cfg.max_norm_error(),
            cond,
        };
        trace.min_radius_floor = trace.min_radius_floor.min(rec.min_radius);
        if !(cond <= opts.cond_max) {
            trace.records.push(rec);
            return Err(fail(StopReason::IllConditioned, format!("cond {cond:e} at t = {t}"), &cfg, &trace, None));
        }
        if opts.monitors {
            let report = monitor(p, &cfg, None, opts.mode, opts.monitor_tol)?;
            if !report.passed() {
                let mut rec = rec;
                rec.monitors_ok = false;
                trace.records.push(rec);
                return Err(fail(StopReason::MonitorViolation, format!("at t = {t}"), &last_cfg, &trace, Some(report)));
            }
        }
        trace.records.push(rec);
        last_cfg = cfg;
        if last {
            break;
        }
        let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = h_try * grow;
        k1 = match velocity(&x) {
            Some(v) => v,
            None => {
                return Err(fail(StopReason::IllConditioned, format!("singular at t = {t}"), &last_cfg, &trace, None))
            }
        };
    }
    Ok((last_cfg, trace))
}

/// Result of a full solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub cfg: Configuration,
    /// `|d(e) - w(e)|` per edge.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub flows: usize,
    pub total_steps: usize,
    pub wall_time_s: f64,
    pub min_radius_floor: f64,
    #[serde(skip)]
    pub traces: Vec<FlowTrace>,
    pub levels: Vec<EpsilonLevel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLevel {
    pub epsilon: f64,
    /// Largest deviation from the true (not relaxed) targets.
    pub residual: f64,
    pub flows: usize,
    pub steps: usize,
}

fn residuals(p: &TriangulatedPolyhedron, w: &EdgeWeights, cfg: &Configuration) -> Vec<f64> {
    p.edges().iter().enumerate().map(|(e, &(i, j))| (cfg.inversive(i, j) - w.get(e)).abs()).collect()
}

fn center(cfg: &Configuration, v: usize) -> SpherePoint {
    let d = cfg.disks[v];
    SpherePoint::from_vec([d.b, d.c, d.d])
}

/// Candidate pins for a free edge, best first: faces not containing the
/// edge, ranked by the smallest angular distance between their centers.
pub fn pin_candidates(p: &TriangulatedPolyhedron, cfg: &Configuration, e: usize) -> Vec<[usize; 3]> {
    let (a, b) = p.edges()[e];
    let mut scored: Vec<(f64, usize)> = p
        .faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| !(f.contains(&a) && f.contains(&b)))
        .map(|(fi, f)| {
            let c = [center(cfg, f[0]), center(cfg, f[1]), center(cfg, f[2])];
            let s = c[0].angle_to(c[1]).min(c[1].angle_to(c[2])).min(c[2].angle_to(c[0]));
            (s, fi)
        })
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    scored.into_iter().map(|(_, fi)| p.faces()[fi]).collect()
}

/// First candidate pin whose unmarked matrix is well conditioned.
pub fn choose_pin(p: &TriangulatedPolyhedron, cfg: &Configuration, e: usize, cond_max: f64) -> Result<[usize; 3]> {
    let cands = pin_candidates(p, cfg, e);
    if cands.is_empty() {
        let (a, b) = p.edges()[e];
        return Err(Error::NoValidPin(a, b));
    }
    let j = assemble_rigidity(p, cfg);
    for f in &cands {
        if unmarked_matrix(&j, *f)?.condition_number() <= cond_max {
            return Ok(*f);
        }
    }
    Ok(cands[0])
}

fn validate(p: &TriangulatedPolyhedron, w: &EdgeWeights) -> Result<()> {
    if p.is_tetrahedron() {
        return Err(Error::Tetrahedron);
    }
    let v = kat_conditions_check(p, w);
    if !v.is_empty() {
        return Err(Error::KatViolation(v));
    }
    Ok(())
}

/// Corrects one edge at a time until every edge reaches its target.
pub fn schedule_edges(
    p: &TriangulatedPolyhedron,
    w: &EdgeWeights,
    cfg0: &Configuration,
    opts: &FlowOptions,
) -> Result<SolveReport> {
    validate(p, w)?;
    if !strictly_shallow_check(p, w) {
        return Err(Error::Precondition("weights are not strictly shallow".into()));
    }
    schedule_with_pin(p, w, cfg0, None, opts)
}

fn schedule_with_pin(
    p: &TriangulatedPolyhedron,
    w: &EdgeWeights,
    cfg0: &Configuration,
    pin: Option<[usize; 3]>,
    opts: &FlowOptions,
) -> Result<SolveReport> {
    let start = Instant::now();
    let mut cfg = cfg0.clone();
    for (e, &(i, j)) in p.edges().iter().enumerate() {
        if cfg.inversive(i, j) < w.get(e) - opts.tol_target {
            return Err(Error::Precondition(format!("start is not w-bounded at edge ({i}, {j})")));
        }
    }
    let mut traces = Vec::new();
    let mut total_steps = 0;
    let mut floor = min_radius(&cfg)?;
    loop {
        let excess: Vec<f64> =
            p.edges().iter().enumerate().map(|(e, &(i, j))| cfg.inversive(i, j) - w.get(e)).collect();
        let mut best: Option<usize> = None;
        for (e, &x) in excess.iter().enumerate() {
            // Excesses closer than tol_target count as tied, so rounding
            // noise cannot reorder equal targets.
            if x > opts.tol_target && best.is_none_or(|b| x > excess[b] + opts.tol_target) {
                best = Some(e);
            }
        }
        let Some(e) = best else { break };
        // One flow per edge in exact arithmetic; the slack lets edges that
        // drifted past tol_target under rounding be corrected again.
        if traces.len() >= 3 * p.num_edges() {
            return Err(Error::NonConvergent(format!("{} flows without reaching every target", traces.len())));
        }
        let face = match pin {
            Some(f) => {
                let (a, b) = p.edges()[e];
                if f.contains(&a) && f.contains(&b) {
                    return Err(Error::Precondition(format!("pinned edge ({a}, {b}) is off target")));
                }
                f
            }
            None => choose_pin(p, &cfg, e, opts.cond_max)?,
        };
        let state = FlowState { cfg: cfg.clone(), pinned_face: face, free_edge: e, t: 0.0, target: w.get(e) };
        let (next, trace) = integrate_edge_flow(p, &state, opts)?;
        total_steps += trace.records.len();
        floor = floor.min(trace.min_radius_floor);
        traces.push(trace);
        cfg = next;
    }
    let residuals = residuals(p, w, &cfg);
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(SolveReport {
        cfg,
        residuals,
        max_residual,
        flows: traces.len(),
        total_steps,
        wall_time_s: start.elapsed().as_secs_f64(),
        min_radius_floor: floor,
        traces,
        levels: Vec::new(),
    })
}

/// A zero-weight 4-cycle `i-j-l-k` around the diagonal `jk`, returned as the
/// face `ijk` (in complex orientation) and `l`.
pub fn find_zero_quad(p: &TriangulatedPolyhedron, w: &EdgeWeights) -> Option<([usize; 3], usize, (usize, usize))> {
    let zero = |a: usize, b: usize| w.get(p.edge_index(a, b).unwrap()) == 0.0;
    for (e, &(j, k)) in p.edges().iter().enumerate() {
        let [f1, f2] = p.edge_faces(e);
        let third = |f: usize| *p.faces()[f].iter().find(|&&v| v != j && v != k).unwrap();
        let (i, l) = (third(f1), third(f2));
        if zero(i, j) && zero(i, k) && zero(l, j) && zero(l, k) {
            return Some((p.faces()[f1], i, (j, k)));
        }
    }
    None
}

/// Relaxed targets: zero on the two pinned-face edges at the apex, the true
/// weight on the diagonal, and at least `eps` everywhere else.
pub fn relaxed_weights(
    p: &TriangulatedPolyhedron,
    w: &EdgeWeights,
    apex: usize,
    diagonal: (usize, usize),
    eps: f64,
) -> EdgeWeights {
    let mut we = w.clone();
    let (j, k) = diagonal;
    let fixed = [p.edge_index(apex, j).unwrap(), p.edge_index(apex, k).unwrap(), p.edge_index(j, k).unwrap()];
    for e in 0..p.num_edges() {
        if !fixed.contains(&e) {
            we.set(e, w.get(e).max(eps));
        }
    }
    we
}

/// Solves shallow but not strictly shallow targets through a sequence of
/// relaxed problems with `eps = 1, 1/2, 1/4, ...`.
pub fn epsilon_schedule(
    p: &TriangulatedPolyhedron,
    w: &EdgeWeights,
    cfg0: &Configuration,
    opts: &FlowOptions,
) -> Result<SolveReport> {
    validate(p, w)?;
    if strictly_shallow_check(p, w) {
        return schedule_edges(p, w, cfg0, opts);
    }
    let start = Instant::now();
    let (face, apex, diag) =
        find_zero_quad(p, w).ok_or_else(|| Error::Precondition("no zero 4-cycle bounds two faces".into()))?;
    let mut cfg = cfg0.clone();
    let mut levels = Vec::new();
    let mut traces = Vec::new();
    let mut total_steps = 0;
    let mut floor = min_radius(&cfg)?;
    let mut eps = 1.0;
    let mut stalled = 0;
    let mut best = f64::INFINITY;
    while eps >= tol::EPS_MIN {
        let we = relaxed_weights(p, w, apex, diag, eps);
        let pin = if levels.is_empty() { None } else { Some(face) };
        let r = schedule_with_pin(p, &we, &cfg, pin, opts)?;
        cfg = r.cfg;
        total_steps += r.total_steps;
        floor = floor.min(r.min_radius_floor);
        let residual = residuals(p, w, &cfg).into_iter().fold(0.0, f64::max);
        levels.push(EpsilonLevel { epsilon: eps, residual, flows: r.flows, steps: r.total_steps });
        traces.extend(r.traces);
        if residual < best {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 3 {
                return Err(Error::NonConvergent(format!("residual stalled at {residual:e} (eps = {eps:e})")));
            }
        }
        if residual < tol::LIMIT {
            break;
        }
        eps *= 0.5;
    }
    let residuals = residuals(p, w, &cfg);
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(SolveReport {
        cfg,
        residuals,
        max_residual,
        flows: traces.len(),
        total_steps,
        wall_time_s: start.elapsed().as_secs_f64(),
        min_radius_floor: floor,
        traces,
        levels,
    })
}

/// Picks the relaxed or the direct schedule as the weights require.
pub fn solve(
    p: &TriangulatedPolyhedron,
    w: &EdgeWeights,
    cfg0: &Configuration,
    opts: &FlowOptions,
) -> Result<SolveReport> {
    epsilon_schedule(p, w, cfg0, opts)
}
