//! SVG figures of a configuration in the plane.
//!
//! The sphere is rotated so the centroid of the pinned face's centers sits at
//! the south pole, then projected stereographically from the north pole.

use std::fmt::Write as _;

use crate::checks::Configuration;
use crate::complex::TriangulatedPolyhedron;
use crate::geom::{cross, dot3, norm3, spherical_center_radius, stereographic_drop, Disk4, LorentzMap, PlanarDisk};

#[derive(Clone, Debug)]
pub struct RenderOptions {
    /// Canvas width and height in pixels.
    pub size: f64,
    pub pinned_face: Option<[usize; 3]>,
    pub free_edge: Option<(usize, usize)>,
    /// Per-disk velocity; arrows are drawn for nonzero entries.
    pub velocities: Option<Vec<Disk4>>,
    /// Upper bound on the half-width of the plane window.
    pub max_extent: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { size: 800.0, pinned_face: None, free_edge: None, velocities: None, max_extent: 8.0 }
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Rotation taking unit vector `c` to the south pole.
fn to_south(c: [f64; 3]) -> LorentzMap {
    let s = [0.0, 0.0, -1.0];
    let axis = cross(c, s);
    let sn = norm3(axis);
    let cs = dot3(c, s);
    if sn < 1e-12 {
        return if cs > 0.0 {
            LorentzMap::identity()
        } else {
            LorentzMap::rotation([1.0, 0.0, 0.0], std::f64::consts::PI)
        };
    }
    LorentzMap::rotation(axis, sn.atan2(cs))
}

fn project(p: [f64; 3]) -> [f64; 2] {
    let k = (1.0 - p[2]).max(1e-12);
    [p[0] / k, p[1] / k]
}

fn slerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    let om = dot3(a, b).clamp(-1.0, 1.0).acos();
    if om < 1e-12 {
        return a;
    }
    let (sa, sb) = (((1.0 - t) * om).sin() / om.sin(), (t * om).sin() / om.sin());
    [sa * a[0] + sb * b[0], sa * a[1] + sb * b[1], sa * a[2] + sb * b[2]]
}

struct View {
    half: f64,
    size: f64,
}

impl View {
    fn x(&self, x: f64) -> f64 {
        (x.clamp(-10.0 * self.half, 10.0 * self.half) + self.half) / (2.0 * self.half) * self.size
    }
    fn y(&self, y: f64) -> f64 {
        (self.half - y.clamp(-10.0 * self.half, 10.0 * self.half)) / (2.0 * self.half) * self.size
    }
    fn len(&self, l: f64) -> f64 {
        l / (2.0 * self.half) * self.size
    }
}

/// Clips the line `n·P = h` to the square `[-l, l]²`.
fn clip_line(nx: f64, ny: f64, h: f64, l: f64) -> Option<[[f64; 2]; 2]> {
    let mut pts = Vec::new();
    if ny.abs() > 1e-12 {
        for x in [-l, l] {
            let y = (h - nx * x) / ny;
            if y.abs() <= l {
                pts.push([x, y]);
            }
        }
    }
    if nx.abs() > 1e-12 {
        for y in [-l, l] {
            let x = (h - ny * y) / nx;
            if x.abs() <= l {
                pts.push([x, y]);
            }
        }
    }
    if pts.len() < 2 {
        return None;
    }
    Some([pts[0], pts[pts.len() - 1]])
}

/// Deterministic SVG drawing: boundary circles, geodesic edges (the free
/// edge styled separately) and optional velocity arrows at disk centers.
pub fn render_svg(p: Option<&TriangulatedPolyhedron>, cfg: &Configuration, opts: &RenderOptions) -> String {
    let size = opts.size;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        num(size)
    );
    s.push_str(
        "<style>.disk{fill:#4878a8;fill-opacity:0.12;stroke:#204060;stroke-width:1.5}\
.pinned{fill:#a84848;fill-opacity:0.18}\
.edge{fill:none;stroke:#333;stroke-width:1}\
.free{stroke:#d02020;stroke-width:3}\
.velocity{stroke:#20a040;stroke-width:2}</style>\n",
    );
    let _ = writeln!(s, r#"<rect width="{0}" height="{0}" fill="white"/>"#, num(size));
    if cfg.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }

    let centers: Vec<[f64; 3]> = cfg
        .disks
        .iter()
        .map(|&d| spherical_center_radius(d).map(|(c, _)| c.to_array()).unwrap_or([0.0, 0.0, 1.0]))
        .collect();
    let anchor: Vec<usize> = match (opts.pinned_face, p) {
        (Some(f), _) => f.to_vec(),
        (None, Some(p)) => p.faces()[0].to_vec(),
        (None, None) => (0..cfg.len()).collect(),
    };
    let mut g = [0.0; 3];
    for &v in &anchor {
        for k in 0..3 {
            g[k] += centers[v][k];
        }
    }
    let rot = if norm3(g) < 1e-12 { LorentzMap::identity() } else { to_south(g) };
    let rc = |x: [f64; 3]| {
        let d = rot.apply(Disk4::new(1.0, x[0], x[1], x[2]));
        [d.b, d.c, d.d]
    };
    let planar: Vec<Option<PlanarDisk>> = cfg.disks.iter().map(|&d| stereographic_drop(rot.apply(d)).ok()).collect();

    let mut half: f64 = 1.0;
    for pd in planar.iter().flatten() {
        if let PlanarDisk::Circle { x, y, r } = *pd {
            half = half.max(x.hypot(y) + r.abs());
        }
    }
    let half = half.min(opts.max_extent) * 1.05;
    let view = View { half, size };

    s.push_str("<g class=\"disks\">\n");
    for (v, pd) in planar.iter().enumerate() {
        let class = if opts.pinned_face.is_some_and(|f| f.contains(&v)) { "disk pinned" } else { "disk" };
        match *pd {
            Some(PlanarDisk::Circle { x, y, r }) => {
                let _ = writeln!(
                    s,
                    r#"<circle class="{class}" data-vertex="{v}" cx="{}" cy="{}" r="{}"/>"#,
                    num(view.x(x)),
                    num(view.y(y)),
                    num(view.len(r.abs()))
                );
            }
            Some(PlanarDisk::Line { nx, ny, offset }) => {
                if let Some([a, b]) = clip_line(nx, ny, offset, half) {
                    let _ = writeln!(
                        s,
                        r#"<line class="{class}" data-vertex="{v}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                        num(view.x(a[0])),
                        num(view.y(a[1])),
                        num(view.x(b[0])),
                        num(view.y(b[1]))
                    );
                }
            }
            None => {}
        }
    }
    s.push_str("</g>\n");

    if let Some(p) = p {
        s.push_str("<g class=\"edges\">\n");
        for &(i, j) in p.edges() {
            let free = opts.free_edge.is_some_and(|(a, b)| (a.min(b), a.max(b)) == (i, j));
            let class = if free { "edge free" } else { "edge" };
            let (a, b) = (rc(centers[i]), rc(centers[j]));
            let pts: Vec<String> = (0..=24)
                .map(|k| {
                    let q = project(slerp(a, b, k as f64 / 24.0));
                    format!("{},{}", num(view.x(q[0])), num(view.y(q[1])))
                })
                .collect();
            let _ = writeln!(s, r#"<polyline class="{class}" points="{}"/>"#, pts.join(" "));
        }
        s.push_str("</g>\n");
    }

    if let Some(vel) = &opts.velocities {
        let h = 1e-6;
        let mut arrows = Vec::new();
        for (v, (&d, &dv)) in cfg.disks.iter().zip(vel).enumerate() {
            if dv.euclid_norm() == 0.0 {
                continue;
            }
            let moved = Disk4::from_array(std::array::from_fn(|k| d.to_array()[k] + h * dv.to_array()[k]));
            let c0 = spherical_center_radius(rot.apply(d)).map(|(c, _)| project(c.to_array()));
            let c1 = spherical_center_radius(rot.apply(moved)).map(|(c, _)| project(c.to_array()));
            if let (Ok(c0), Ok(c1)) = (c0, c1) {
                arrows.push((v, c0, [(c1[0] - c0[0]) / h, (c1[1] - c0[1]) / h]));
            }
        }
        let longest = arrows.iter().map(|a| a.2[0].hypot(a.2[1])).fold(0.0, f64::max);
        let scale = if longest > 0.0 { 0.15 * half / longest } else { 0.0 };
        s.push_str("<g class=\"velocities\">\n");
        for (v, c0, dv) in arrows {
            let _ = writeln!(
                s,
                r#"<line class="velocity" data-vertex="{v}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                num(view.x(c0[0])),
                num(view.y(c0[1])),
                num(view.x(c0[0] + scale * dv[0])),
                num(view.y(c0[1] + scale * dv[1]))
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::bootstrap;
    use crate::generators;

    #[test]
    fn empty_canvas() {
        let svg = render_svg(None, &Configuration::new(vec![]), &RenderOptions::default());
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<circle"));
    }

    #[test]
    fn octahedron_elements() {
        let p = generators::octahedron();
        let cfg = bootstrap(&p).unwrap();
        let opts = RenderOptions { pinned_face: Some(p.faces()[0]), ..Default::default() };
        let svg = render_svg(Some(&p), &cfg, &opts);
        assert_eq!(svg.matches("<circle").count() + svg.matches("<line class=\"disk").count(), 6);
        assert_eq!(svg.matches("<polyline class=\"edge").count(), 12);
        assert_eq!(svg, render_svg(Some(&p), &cfg, &opts));
    }

    #[test]
    fn clipping() {
        let [a, b] = clip_line(1.0, 0.0, 0.5, 2.0).unwrap();
        assert_eq!(a, [0.5, -2.0]);
        assert_eq!(b, [0.5, 2.0]);
        assert!(clip_line(1.0, 0.0, 5.0, 2.0).is_none());
    }
}
