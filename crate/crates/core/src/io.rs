//! Problem, solution and trace file formats.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checks::{Configuration, MonitorReport};
use crate::complex::{EdgeWeights, TriangulatedPolyhedron, WeightUnit};
use crate::error::{Error, Result};
use crate::flow::{EpsilonLevel, FlowOptions, FlowRecord, FlowTrace, SolveReport, StopReason};
use crate::geom::{normalize_desitter, Disk4};
use crate::tol;

pub const FORMAT_VERSION: &str = "katflow/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    #[serde(default)]
    pub unit: WeightUnit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub trace: bool,
    /// Skip the per-step geometric monitors.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub no_monitors: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    pub faces: Vec<[usize; 3]>,
    pub weights: Vec<WeightEntry>,
    #[serde(default)]
    pub options: ProblemOptions,
}

fn check_version(v: &str) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported version {v:?}, expected {FORMAT_VERSION:?}")));
    }
    Ok(())
}

impl ProblemFile {
    pub fn parse(s: &str) -> Result<Self> {
        let p: ProblemFile = serde_json::from_str(s)?;
        check_version(&p.version)?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// Problem with inversive-distance weights in edge order.
    pub fn from_parts(p: &TriangulatedPolyhedron, w: &EdgeWeights, options: ProblemOptions) -> Self {
        ProblemFile {
            version: FORMAT_VERSION.into(),
            faces: p.faces().to_vec(),
            weights: p
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(i, j))| WeightEntry { i, j, value: w.get(e), unit: WeightUnit::Inversive })
                .collect(),
            options,
        }
    }

    pub fn build(&self) -> Result<(TriangulatedPolyhedron, EdgeWeights)> {
        let p = TriangulatedPolyhedron::build(&self.faces)?;
        let entries: Vec<_> = self.weights.iter().map(|w| (w.i, w.j, w.value, w.unit)).collect();
        let w = EdgeWeights::from_entries(&p, &entries)?;
        Ok((p, w))
    }

    pub fn flow_options(&self) -> FlowOptions {
        let mut o = FlowOptions::default();
        if let Some(t) = self.options.tol_target {
            o.tol_target = t;
        }
        if let Some(m) = self.options.max_steps {
            o.max_steps = m;
        }
        o.monitors = !self.options.no_monitors;
        o
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeResult {
    pub i: usize,
    pub j: usize,
    pub target: f64,
    pub achieved: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol_target: f64,
    pub tol_drift: f64,
    pub tol_norm: f64,
    pub cond_max: f64,
    pub rtol: f64,
}

impl Tolerances {
    pub fn from_options(o: &FlowOptions) -> Self {
        Tolerances {
            tol_target: o.tol_target,
            tol_drift: o.tol_drift,
            tol_norm: tol::NORM,
            cond_max: o.cond_max,
            rtol: o.rtol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub input_sha256: String,
    pub software_version: String,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub version: String,
    pub faces: Vec<[usize; 3]>,
    /// De Sitter coordinates `(a, b, c, d)` per vertex.
    pub disks: Vec<[f64; 4]>,
    pub edges: Vec<EdgeResult>,
    pub monitors: MonitorReport,
    pub flows: usize,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<EpsilonLevel>,
    pub provenance: Provenance,
}

impl SolutionFile {
    pub fn parse(s: &str) -> Result<Self> {
        let f: SolutionFile = serde_json::from_str(s)?;
        check_version(&f.version)?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// Solution for a finished solve of the problem whose file bytes hashed
    /// to `input_sha256`.
    pub fn from_report(
        p: &TriangulatedPolyhedron,
        w: &EdgeWeights,
        report: &SolveReport,
        monitors: MonitorReport,
        input_sha256: String,
        opts: &FlowOptions,
    ) -> Self {
        SolutionFile {
            version: FORMAT_VERSION.into(),
            faces: p.faces().to_vec(),
            disks: report.cfg.disks.iter().map(|&d| normalize_desitter(d).unwrap_or(d).to_array()).collect(),
            edges: Self::edge_results(p, w, &report.cfg),
            monitors,
            flows: report.flows,
            steps: report.total_steps,
            levels: report.levels.clone(),
            provenance: Provenance {
                input_sha256,
                software_version: env!("CARGO_PKG_VERSION").into(),
                tolerances: Tolerances::from_options(opts),
            },
        }
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::new(self.disks.iter().map(|&d| Disk4::from_array(d)).collect())
    }

    pub fn edge_results(p: &TriangulatedPolyhedron, w: &EdgeWeights, cfg: &Configuration) -> Vec<EdgeResult> {
        p.edges()
            .iter()
            .enumerate()
            .map(|(e, &(i, j))| {
                let achieved = cfg.inversive(i, j);
                EdgeResult { i, j, target: w.get(e), achieved, residual: (achieved - w.get(e)).abs() }
            })
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One line of a trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    /// First line: the complex the trace belongs to.
    Complex {
        faces: Vec<[usize; 3]>,
    },
    /// Configuration and velocity at the start of a flow.
    Stage {
        flow: usize,
        disks: Vec<[f64; 4]>,
        pinned_face: [usize; 3],
        free_edge: (usize, usize),
        target: f64,
        velocity: Vec<[f64; 4]>,
    },
    Step {
        flow: usize,
        #[serde(flatten)]
        record: FlowRecord,
    },
    End {
        flow: usize,
        stop_reason: StopReason,
        min_radius_floor: f64,
    },
    /// Final configuration of the whole solve.
    Final {
        disks: Vec<[f64; 4]>,
    },
}

pub fn trace_events(faces: &[[usize; 3]], traces: &[FlowTrace], last: Option<&Configuration>) -> Vec<TraceEvent> {
    let arr = |c: &[Disk4]| c.iter().map(|d| d.to_array()).collect::<Vec<_>>();
    let mut out = vec![TraceEvent::Complex { faces: faces.to_vec() }];
    for (k, t) in traces.iter().enumerate() {
        out.push(TraceEvent::Stage {
            flow: k,
            disks: arr(&t.start.disks),
            pinned_face: t.pinned_face,
            free_edge: t.free_edge,
            target: t.target,
            velocity: arr(&t.start_velocity),
        });
        out.extend(t.records.iter().map(|r| TraceEvent::Step { flow: k, record: r.clone() }));
        out.push(TraceEvent::End { flow: k, stop_reason: t.stop_reason, min_radius_floor: t.min_radius_floor });
    }
    if let Some(c) = last {
        out.push(TraceEvent::Final { disks: arr(&c.disks) });
    }
    out
}

pub fn write_trace(events: &[TraceEvent], mut w: impl Write) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace(s: &str) -> Result<Vec<TraceEvent>> {
    s.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}
