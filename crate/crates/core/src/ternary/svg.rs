//! Deterministic SVG rendering of ternary boards.
//!
//! Layers are emitted in a fixed order (regions, grid, frame, segments, points,
//! labels) and elements within a layer keep insertion order, so identical
//! boards always serialize to identical bytes.

use std::fmt::Write;

use super::{embed, Axis, Segment, SimplexRegion, TernaryPoint};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 600.0;
const SCALE: f64 = 250.0;
const CENTER_X: f64 = 320.0;
const CENTER_Y: f64 = 330.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PointStyle {
    pub radius: f64,
    pub fill: String,
    pub label: Option<String>,
}

impl PointStyle {
    pub fn new(fill: &str, radius: f64) -> Self {
        PointStyle {
            radius,
            fill: fill.to_string(),
            label: None,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineStyle {
    pub stroke: String,
    pub width: f64,
    pub dashed: bool,
}

impl LineStyle {
    pub fn solid(stroke: &str, width: f64) -> Self {
        LineStyle {
            stroke: stroke.to_string(),
            width,
            dashed: false,
        }
    }

    pub fn dashed(stroke: &str, width: f64) -> Self {
        LineStyle {
            stroke: stroke.to_string(),
            width,
            dashed: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TernaryBoard {
    title: Option<String>,
    axis_labels: [String; 3],
    grid_step: Option<f64>,
    regions: Vec<(SimplexRegion, String)>,
    segments: Vec<(Segment, LineStyle)>,
    points: Vec<(TernaryPoint, PointStyle)>,
}

impl Default for TernaryBoard {
    fn default() -> Self {
        TernaryBoard {
            title: None,
            axis_labels: [
                "Social".to_string(),
                "Environmental".to_string(),
                "Economic".to_string(),
            ],
            grid_step: Some(0.1),
            regions: Vec::new(),
            segments: Vec::new(),
            points: Vec::new(),
        }
    }
}

fn to_svg(coords: [f64; 3]) -> (f64, f64) {
    let (x, y) = embed(coords);
    (CENTER_X + SCALE * x, CENTER_Y - SCALE * y)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

impl TernaryBoard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn title(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }

    pub fn axis_labels(mut self, labels: [&str; 3]) -> Self {
        self.axis_labels = labels.map(str::to_string);
        self
    }

    pub fn grid_step(mut self, step: Option<f64>) -> Self {
        self.grid_step = step.filter(|s| *s > 0.0 && *s < 1.0);
        self
    }

    pub fn region(&mut self, region: &SimplexRegion, fill: &str) -> &mut Self {
        self.regions.push((region.clone(), fill.to_string()));
        self
    }

    pub fn segment(&mut self, segment: Segment, style: LineStyle) -> &mut Self {
        self.segments.push((segment, style));
        self
    }

    pub fn point(&mut self, point: TernaryPoint, style: PointStyle) -> &mut Self {
        self.points.push((point, style));
        self
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        if let Some(title) = &self.title {
            let _ = writeln!(
                s,
                r#"<text x="{CENTER_X}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
                escape(title)
            );
        }

        let _ = writeln!(s, r#"<g id="regions">"#);
        for (region, fill) in &self.regions {
            let verts = region.vertices();
            match verts.len() {
                0 => {}
                1 => {
                    let (x, y) = to_svg(verts[0].coords());
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{x:.3}" cy="{y:.3}" r="3.000" fill="{}" fill-opacity="0.45"/>"#,
                        escape(fill)
                    );
                }
                _ => {
                    let pts: Vec<String> = verts
                        .iter()
                        .map(|v| {
                            let (x, y) = to_svg(v.coords());
                            format!("{x:.3},{y:.3}")
                        })
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polygon points="{}" fill="{}" fill-opacity="0.45" stroke="{}" stroke-width="1.000"/>"#,
                        pts.join(" "),
                        escape(fill),
                        escape(fill)
                    );
                }
            }
        }
        let _ = writeln!(s, "</g>");

        if let Some(step) = self.grid_step {
            let _ = writeln!(s, r#"<g id="grid" stroke="lightgray" stroke-width="0.500">"#);
            let n = (1.0 / step).round() as usize;
            for axis in Axis::ALL {
                for i in 1..n {
                    let v = i as f64 * step;
                    let k = axis.index();
                    let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                    let mut p = [0.0; 3];
                    let mut q = [0.0; 3];
                    p[k] = v;
                    p[j] = 1.0 - v;
                    q[k] = v;
                    q[l] = 1.0 - v;
                    let (x0, y0) = to_svg(p);
                    let (x1, y1) = to_svg(q);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}"/>"#
                    );
                }
            }
            let _ = writeln!(s, "</g>");
        }

        let corners: Vec<(f64, f64)> = Axis::ALL
            .iter()
            .map(|&a| to_svg(TernaryPoint::vertex(a).coords()))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon id="frame" points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}" fill="none" stroke="black" stroke-width="1.500"/>"#,
            corners[0].0, corners[0].1, corners[1].0, corners[1].1, corners[2].0, corners[2].1
        );
        let offsets = [(0.0, -12.0, "middle"), (-8.0, 20.0, "end"), (8.0, 20.0, "start")];
        for (i, label) in self.axis_labels.iter().enumerate() {
            let (dx, dy, anchor) = offsets[i];
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" text-anchor="{anchor}" font-family="sans-serif" font-size="14">{}</text>"#,
                corners[i].0 + dx,
                corners[i].1 + dy,
                escape(label)
            );
        }

        let _ = writeln!(s, r#"<g id="segments">"#);
        for (seg, style) in &self.segments {
            let (x0, y0) = to_svg(seg.start.coords());
            let (x1, y1) = to_svg(seg.end.coords());
            let dash = if style.dashed {
                r#" stroke-dasharray="6,4""#
            } else {
                ""
            };
            let _ = writeln!(
                s,
                r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}" stroke="{}" stroke-width="{:.3}"{dash}/>"#,
                escape(&style.stroke),
                style.width
            );
        }
        let _ = writeln!(s, "</g>");

        let _ = writeln!(s, r#"<g id="points">"#);
        for (p, style) in &self.points {
            let (x, y) = to_svg(p.coords());
            let _ = write!(
                s,
                r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="{}">"#,
                style.radius,
                escape(&style.fill)
            );
            let _ = writeln!(
                s,
                "<title>{}</title></circle>",
                escape(&format!("({:.4}, {:.4}, {:.4})", p.a(), p.b(), p.c()))
            );
        }
        let _ = writeln!(s, "</g>");

        let _ = writeln!(s, r#"<g id="labels" font-family="sans-serif" font-size="11">"#);
        for (p, style) in &self.points {
            if let Some(label) = &style.label {
                let (x, y) = to_svg(p.coords());
                let _ = writeln!(
                    s,
                    r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
                    x + style.radius + 2.0,
                    y - style.radius - 2.0,
                    escape(label)
                );
            }
        }
        let _ = writeln!(s, "</g>");
        s.push_str("</svg>\n");
        s
    }
}
