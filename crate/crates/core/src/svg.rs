//! Deterministic SVG overlays of basin maps, regions and trajectories.
//!
//! Conventions: viewBox "0 0 800 600"; the plot area is the rectangle
//! [70, 770] x [20, 550] in SVG units; data y grows upward; numbers are
//! printed with two decimals so output is byte-stable.

use std::fmt::Write as _;

use crate::basin::{BasinMap, Label};
use crate::region::{Point, RegionSpec};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 770.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 550.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
enum Layer {
    Basin(BasinMap),
    Region { name: String, spec: RegionSpec },
    Path { name: String, points: Vec<Point>, dashed: bool },
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    bounds: Option<[f64; 4]>,
    layers: Vec<Layer>,
    title: String,
}

impl Plot {
    pub fn new(title: &str) -> Self {
        Plot { bounds: None, layers: Vec::new(), title: title.into() }
    }

    /// Fixes the data window [x_min, x_max, y_min, y_max]; otherwise it is fitted to the layers.
    pub fn with_bounds(mut self, b: [f64; 4]) -> Self {
        self.bounds = Some(b);
        self
    }

    pub fn add_basin(&mut self, map: BasinMap) -> &mut Self {
        self.layers.push(Layer::Basin(map));
        self
    }

    pub fn add_region(&mut self, name: &str, spec: RegionSpec) -> &mut Self {
        self.layers.push(Layer::Region { name: name.into(), spec });
        self
    }

    pub fn add_trajectory(&mut self, name: &str, points: Vec<Point>) -> &mut Self {
        self.layers.push(Layer::Path { name: name.into(), points, dashed: false });
        self
    }

    pub fn add_curve(&mut self, name: &str, points: Vec<Point>) -> &mut Self {
        self.layers.push(Layer::Path { name: name.into(), points, dashed: true });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    fn fitted_bounds(&self) -> [f64; 4] {
        if let Some(b) = self.bounds {
            return b;
        }
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        let mut grow = |p: Point| {
            if p[0].is_finite() && p[1].is_finite() {
                b[0] = b[0].min(p[0]);
                b[1] = b[1].max(p[0]);
                b[2] = b[2].min(p[1]);
                b[3] = b[3].max(p[1]);
            }
        };
        for l in &self.layers {
            match l {
                Layer::Basin(m) => {
                    grow([m.grid.x_range[0], m.grid.y_range[0]]);
                    grow([m.grid.x_range[1], m.grid.y_range[1]]);
                }
                Layer::Region { spec, .. } => {
                    if let Some(bb) = spec.bbox() {
                        grow([bb[0], bb[2]]);
                        grow([bb[1], bb[3]]);
                    }
                }
                Layer::Path { points, .. } => points.iter().for_each(|p| grow(*p)),
            }
        }
        if !b[0].is_finite() {
            return [-1.0, 1.0, -1.0, 1.0];
        }
        let pad = |lo: f64, hi: f64| {
            let w = (hi - lo).max(1e-9);
            (lo - 0.05 * w, hi + 0.05 * w)
        };
        let (x0, x1) = pad(b[0], b[1]);
        let (y0, y1) = pad(b[2], b[3]);
        [x0, x1, y0, y1]
    }

    pub fn render(&self) -> String {
        let b = self.fitted_bounds();
        let sx = |x: f64| LEFT + (x - b[0]) / (b[1] - b[0]) * (RIGHT - LEFT);
        let sy = |y: f64| BOTTOM - (y - b[2]) / (b[3] - b[2]) * (BOTTOM - TOP);
        let clampf = |v: f64| v.clamp(-1e5, 1e5);
        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#).unwrap();
        writeln!(s, r#"<title>{}</title>"#, escape(&self.title)).unwrap();
        writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}"/></clipPath></defs>"#, RIGHT - LEFT, BOTTOM - TOP).unwrap();
        writeln!(s, r#"<g clip-path="url(#plot)">"#).unwrap();
        let mut legend: Vec<(String, String, bool)> = Vec::new();
        let mut color = 0usize;
        for l in &self.layers {
            match l {
                Layer::Basin(m) => {
                    let g = &m.grid;
                    let dx = (g.x_range[1] - g.x_range[0]) / (g.nx - 1) as f64;
                    let dy = (g.y_range[1] - g.y_range[0]) / (g.ny - 1) as f64;
                    writeln!(s, r#"<g id="basin" stroke="none">"#).unwrap();
                    for j in 0..g.ny {
                        for i in 0..g.nx {
                            let fill = match m.labels[j][i] {
                                Label::Attracted => "#c6e5ff",
                                Label::BlownUp => "#ffd0c8",
                                Label::Undecided => "#dddddd",
                            };
                            let (x, y) = g.point(i, j);
                            let (x0, x1) = (sx(x - 0.5 * dx), sx(x + 0.5 * dx));
                            let (y0, y1) = (sy(y + 0.5 * dy), sy(y - 0.5 * dy));
                            writeln!(
                                s,
                                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                                clampf(x0),
                                clampf(y0),
                                clampf(x1 - x0),
                                clampf(y1 - y0)
                            )
                            .unwrap();
                        }
                    }
                    writeln!(s, "</g>").unwrap();
                    legend.push(("Attracted".into(), "#c6e5ff".into(), false));
                    legend.push(("BlownUp".into(), "#ffd0c8".into(), false));
                }
                Layer::Region { name, spec } => {
                    let c = PALETTE[color % PALETTE.len()];
                    color += 1;
                    writeln!(s, r#"<g id="region-{}" fill="none" stroke="{c}" stroke-width="2">"#, escape(name)).unwrap();
                    for arc in &spec.arcs {
                        let pts = arc.curve.sample(400);
                        let dash = if arc.artificial { r#" stroke-dasharray="2,4""# } else { "" };
                        writeln!(s, r#"<polyline{dash} points="{}"/>"#, path(&pts, &sx, &sy)).unwrap();
                    }
                    writeln!(s, "</g>").unwrap();
                    legend.push((name.clone(), c.into(), false));
                }
                Layer::Path { name, points, dashed } => {
                    let c = PALETTE[color % PALETTE.len()];
                    color += 1;
                    let dash = if *dashed { r#" stroke-dasharray="6,4""# } else { "" };
                    writeln!(
                        s,
                        r#"<polyline id="path-{}" fill="none" stroke="{c}" stroke-width="1.2"{dash} points="{}"/>"#,
                        escape(name),
                        path(points, &sx, &sy)
                    )
                    .unwrap();
                    legend.push((name.clone(), c.into(), *dashed));
                }
            }
        }
        writeln!(s, "</g>").unwrap();
        // frame, axes through the origin when visible, tick labels at the corners
        writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, RIGHT - LEFT, BOTTOM - TOP).unwrap();
        if b[0] < 0.0 && b[1] > 0.0 {
            writeln!(s, r#"<line x1="{:.2}" y1="{TOP}" x2="{:.2}" y2="{BOTTOM}" stroke="gray" stroke-width="0.5"/>"#, sx(0.0), sx(0.0)).unwrap();
        }
        if b[2] < 0.0 && b[3] > 0.0 {
            writeln!(s, r#"<line x1="{LEFT}" y1="{:.2}" x2="{RIGHT}" y2="{:.2}" stroke="gray" stroke-width="0.5"/>"#, sy(0.0), sy(0.0)).unwrap();
        }
        let text = |s: &mut String, x: f64, y: f64, anchor: &str, t: String| {
            writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#, escape(&t)).unwrap();
        };
        text(&mut s, LEFT, BOTTOM + 18.0, "start", format!("{:.3}", b[0]));
        text(&mut s, RIGHT, BOTTOM + 18.0, "end", format!("{:.3}", b[1]));
        text(&mut s, LEFT - 6.0, BOTTOM, "end", format!("{:.3}", b[2]));
        text(&mut s, LEFT - 6.0, TOP + 10.0, "end", format!("{:.3}", b[3]));
        text(&mut s, 0.5 * (LEFT + RIGHT), BOTTOM + 36.0, "middle", "x".into());
        text(&mut s, 20.0, 0.5 * (TOP + BOTTOM), "middle", "y".into());
        writeln!(s, r#"<g id="legend">"#).unwrap();
        for (k, (name, c, dashed)) in legend.iter().enumerate() {
            let y = TOP + 14.0 + 16.0 * k as f64;
            let dash = if *dashed { r#" stroke-dasharray="6,4""# } else { "" };
            writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{c}" stroke-width="6"{dash}/>"#, RIGHT - 150.0, RIGHT - 130.0).unwrap();
            text(&mut s, RIGHT - 124.0, y + 4.0, "start", name.clone());
        }
        writeln!(s, "</g>").unwrap();
        s.push_str("</svg>\n");
        s
    }
}

fn path(points: &[Point], sx: &impl Fn(f64) -> f64, sy: &impl Fn(f64) -> f64) -> String {
    let mut out = String::new();
    for p in points.iter().filter(|p| p[0].is_finite() && p[1].is_finite()) {
        if !out.is_empty() {
            out.push(' ');
        }
        write!(out, "{:.2},{:.2}", sx(p[0]).clamp(-1e5, 1e5), sy(p[1]).clamp(-1e5, 1e5)).unwrap();
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
