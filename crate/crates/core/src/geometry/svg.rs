//! Deterministic SVG and CSV output for drawings.

use std::fmt::Write;

use super::{CompactTriangulation, Point2, SQRT3};

#[derive(Clone, Debug)]
pub struct SvgOptions {
    pub width: u32,
    pub height: u32,
    pub stroke_width: f64,
    /// Radius of the dot drawn at each inserted vertex; `None` for no dots.
    pub vertex_radius: Option<f64>,
    /// Per-face shading weight in [0,1], in face order.
    pub face_shading: Option<Vec<f64>>,
    /// Text placed verbatim (escaped) in the `<metadata>` element.
    pub metadata: Option<String>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            width: 1000,
            height: 867,
            stroke_width: 0.5,
            vertex_radius: None,
            face_shading: None,
            metadata: None,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Render segments as `<line>` elements, optionally shading faces and
/// marking vertices. Output depends only on the inputs.
pub fn render_svg(m: &CompactTriangulation, opts: &SvgOptions) -> String {
    let pad = 2.0;
    let (w, h) = (f64::from(opts.width), f64::from(opts.height));
    let scale = (w - 2.0 * pad).min((h - 2.0 * pad) / (SQRT3 / 2.0));
    let map = |p: Point2| (pad + p.x * scale, h - pad - p.y * scale);

    let mut out = String::with_capacity(64 * (m.segments.len() + 8));
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        opts.width, opts.height, opts.width, opts.height
    );
    if let Some(meta) = &opts.metadata {
        let _ = writeln!(out, "<metadata>{}</metadata>", escape(meta));
    }
    if let Some(shade) = &opts.face_shading {
        out.push_str("<g stroke=\"none\" fill=\"#1f4e9c\">\n");
        for (f, &s) in m.faces.iter().zip(shade) {
            if s <= 0.0 {
                continue;
            }
            let pts: Vec<String> = f
                .corners
                .iter()
                .map(|&p| {
                    let (x, y) = map(p);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(
                out,
                "<polygon points=\"{}\" fill-opacity=\"{:.4}\"/>",
                pts.join(" "),
                s.min(1.0)
            );
        }
        out.push_str("</g>\n");
    }
    let _ = writeln!(
        out,
        "<g stroke=\"black\" stroke-width=\"{}\" stroke-linecap=\"round\">",
        opts.stroke_width
    );
    for s in &m.segments {
        let (x1, y1) = map(s[0]);
        let (x2, y2) = map(s[1]);
        let _ = writeln!(
            out,
            "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\"/>"
        );
    }
    out.push_str("</g>\n");
    if let Some(r) = opts.vertex_radius {
        out.push_str("<g fill=\"#c0392b\" stroke=\"none\">\n");
        for &v in &m.vertices {
            let (x, y) = map(v);
            let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r}\"/>");
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Vertex coordinates as CSV with 17 significant digits. `comment`, if
/// given, is written first as `#`-prefixed lines.
pub fn vertices_csv(m: &CompactTriangulation, comment: Option<&str>) -> String {
    let mut out = String::with_capacity(48 * (m.vertices.len() + 1));
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    out.push_str("x,y\n");
    for v in &m.vertices {
        let _ = writeln!(out, "{:.16e},{:.16e}", v.x, v.y);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::psi;
    use crate::labeling::{attach_splits, phi, SplittingLaw};
    use crate::rng::Seed;
    use crate::sampling::sample_uniform_ternary;

    #[test]
    fn root_triangle_has_three_lines() {
        let svg = render_svg(&CompactTriangulation::root_triangle(), &SvgOptions::default());
        assert_eq!(svg.matches("<line ").count(), 3);
        assert!(svg.contains("width=\"1000\" height=\"867\""));
    }

    #[test]
    fn deterministic_and_small() {
        let seed = Seed::new(4);
        let t = sample_uniform_ternary(10_000, seed);
        let m = psi(&phi(&attach_splits(&t, &SplittingLaw::Centroid, seed).unwrap())).unwrap();
        let opts = SvgOptions {
            vertex_radius: Some(0.8),
            metadata: Some("{\"seed\":4,\"note\":\"<x>\"}".into()),
            ..SvgOptions::default()
        };
        let a = render_svg(&m, &opts);
        let b = render_svg(&m, &opts);
        assert_eq!(a, b);
        assert!(a.len() < 20 * 1024 * 1024);
        assert_eq!(a.matches("<line ").count(), 3 + 3 * 10_000);
        assert!(a.contains("&lt;x&gt;"));
    }

    #[test]
    fn csv_rows() {
        let seed = Seed::new(1);
        let t = sample_uniform_ternary(5, seed);
        let m = psi(&phi(&attach_splits(&t, &SplittingLaw::Centroid, seed).unwrap())).unwrap();
        let csv = vertices_csv(&m, Some("cfg"));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# cfg");
        assert_eq!(lines[1], "x,y");
        assert_eq!(lines.len(), 7);
        let x: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
        assert_eq!(x, m.vertices[0].x);
    }
}
