//! SVG pictures of stratifications of the line and the plane.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::dh::DensityPoly;
use crate::error::{Error, Result};
use crate::linalg::{format_point, rat_to_f64, RatVec};
use crate::stratifier::Stratification;

const FILLS: [&str; 6] = ["#f4cccc", "#cfe2f3", "#d9ead3", "#fff2cc", "#d9d2e9", "#fce5cd"];

#[derive(Clone, Debug)]
pub struct RenderOptions {
    /// Drawing width in pixels; the height follows the aspect ratio.
    pub width: f64,
    pub margin: f64,
    pub dot_radius: f64,
    pub label_vertices: bool,
    pub label_densities: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { width: 480.0, margin: 60.0, dot_radius: 4.0, label_vertices: true, label_densities: true }
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.9}");
    if s == "-0.000000000" {
        "0.000000000".into()
    } else {
        s
    }
}

struct Frame {
    lo: [f64; 2],
    scale: f64,
    margin: f64,
    height: f64,
}

impl Frame {
    fn new(points: &[[f64; 2]], opts: &RenderOptions) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for j in 0..2 {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        let scale = opts.width / span;
        let height = (hi[1] - lo[1]) * scale;
        Self { lo, scale, margin: opts.margin, height }
    }

    fn map(&self, p: [f64; 2]) -> (String, String) {
        let x = self.margin + (p[0] - self.lo[0]) * self.scale;
        let y = self.margin + self.height - (p[1] - self.lo[1]) * self.scale;
        (num(x), num(y))
    }
}

fn planar(v: &RatVec, n: usize) -> [f64; 2] {
    if n == 1 {
        [rat_to_f64(&v[0]), 0.0]
    } else {
        [rat_to_f64(&v[0]), rat_to_f64(&v[1])]
    }
}

/// Vertices of a convex polygon in counterclockwise order.
fn cyclic(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let c = points.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
    let c = [c[0] / points.len() as f64, c[1] / points.len() as f64];
    let mut out = points.to_vec();
    out.sort_by(|a, b| {
        let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
        let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
        ta.total_cmp(&tb)
    });
    out
}

/// Draws chambers as filled polygons, one-dimensional strata as black
/// segments and points as labeled dots. Only ambient dimensions 1 and 2 are
/// supported.
pub fn render_svg(
    s: &Stratification,
    densities: &BTreeMap<usize, DensityPoly>,
    opts: &RenderOptions,
) -> Result<String> {
    let n = s.ambient_dim();
    if n != 1 && n != 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let all: Vec<[f64; 2]> = s
        .strata()
        .iter()
        .flat_map(|t| t.cells.iter().flat_map(|c| c.vertices().iter().map(|v| planar(v, n))))
        .collect();
    let frame = Frame::new(&all, opts);
    let w = num(opts.width + 2.0 * opts.margin);
    let h = num(frame.height + 2.0 * opts.margin);
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();

    if n == 2 {
        writeln!(out, r#"<g id="chambers" stroke="none">"#).unwrap();
        for t in s.strata().iter().filter(|t| t.dim == 2) {
            let fill = FILLS[t.id % FILLS.len()];
            for c in t.cells.iter().filter(|c| c.dim() == 2) {
                let pts: Vec<[f64; 2]> = c.vertices().iter().map(|v| planar(v, n)).collect();
                let coords: Vec<String> = cyclic(&pts)
                    .into_iter()
                    .map(|p| {
                        let (x, y) = frame.map(p);
                        format!("{x},{y}")
                    })
                    .collect();
                writeln!(out, r#"<polygon data-stratum="{}" fill="{fill}" points="{}"/>"#, t.id, coords.join(" "))
                    .unwrap();
            }
        }
        writeln!(out, "</g>").unwrap();
    }

    writeln!(out, r#"<g id="edges" stroke="black" stroke-width="2">"#).unwrap();
    for t in s.strata().iter().filter(|t| t.dim == 1) {
        for c in t.cells.iter().filter(|c| c.dim() == 1) {
            let (x1, y1) = frame.map(planar(&c.vertices()[0], n));
            let (x2, y2) = frame.map(planar(&c.vertices()[1], n));
            writeln!(out, r#"<line data-stratum="{}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#, t.id).unwrap();
        }
    }
    writeln!(out, "</g>").unwrap();

    writeln!(out, r#"<g id="points" fill="black" font-family="sans-serif" font-size="12">"#).unwrap();
    for t in s.strata().iter().filter(|t| t.dim == 0) {
        let v = &t.cells[0].vertices()[0];
        let (x, y) = frame.map(planar(v, n));
        writeln!(out, r#"<circle data-stratum="{}" cx="{x}" cy="{y}" r="{}"/>"#, t.id, num(opts.dot_radius)).unwrap();
        if opts.label_vertices {
            let p = frame.map([planar(v, n)[0] + 6.0 / frame.scale, planar(v, n)[1] + 6.0 / frame.scale]);
            writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, p.0, p.1, format_point(v)).unwrap();
        }
    }
    writeln!(out, "</g>").unwrap();

    if opts.label_densities && !densities.is_empty() {
        writeln!(out, r#"<g id="densities" font-family="serif" font-size="13" text-anchor="middle">"#).unwrap();
        for (id, p) in densities {
            let Some(t) = s.strata().get(*id) else { continue };
            let c = planar(&t.sample_point(), n);
            let c = if n == 1 { [c[0], 24.0 / frame.scale] } else { c };
            let (x, y) = frame.map(c);
            writeln!(out, r#"<text data-stratum="{id}" x="{x}" y="{y}">{p}</text>"#).unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dh::all_densities;
    use crate::fixtures::{prism_example, random_toric, simplex_sum, square_identity, RandomToricParams};
    use crate::par::Execution;
    use crate::toric::hamiltonian_stratification;

    fn count(svg: &str, tag: &str) -> usize {
        svg.matches(&format!("<{tag} ")).count()
    }

    #[test]
    fn prism_figure() {
        let a = prism_example();
        let s = hamiltonian_stratification(&a).unwrap();
        let d = all_densities(&a, &s, 3, Execution::Sequential).unwrap();
        let svg = render_svg(&s, &d, &RenderOptions::default()).unwrap();
        assert_eq!(count(&svg, "circle"), 7);
        assert_eq!(count(&svg, "line"), 10);
        assert_eq!(count(&svg, "polygon"), 4);
        assert!(svg.contains(">(1, 2)</text>"));
        assert!(svg.contains(">-x - y + 4</text>"));
        assert_eq!(svg, render_svg(&s, &d, &RenderOptions::default()).unwrap());
    }

    #[test]
    fn square_and_interval() {
        let s = hamiltonian_stratification(&square_identity()).unwrap();
        let svg = render_svg(&s, &BTreeMap::new(), &RenderOptions::default()).unwrap();
        assert_eq!((count(&svg, "circle"), count(&svg, "line"), count(&svg, "polygon")), (4, 4, 1));
        assert!(svg.contains(r#"cx="60.000000000" cy="540.000000000""#));

        let s = hamiltonian_stratification(&simplex_sum()).unwrap();
        let svg = render_svg(&s, &BTreeMap::new(), &RenderOptions::default()).unwrap();
        assert_eq!((count(&svg, "circle"), count(&svg, "line"), count(&svg, "polygon")), (2, 1, 0));
    }

    #[test]
    fn three_dimensional_is_unsupported() {
        let r = (0..).map(|seed| random_toric(seed, RandomToricParams::default())).find(|r| r.action.k() == 3).unwrap();
        let s = hamiltonian_stratification(&r.action).unwrap();
        assert_eq!(render_svg(&s, &BTreeMap::new(), &RenderOptions::default()), Err(Error::UnsupportedDimension(3)));
    }
}
