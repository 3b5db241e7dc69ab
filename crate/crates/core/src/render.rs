//! Static SVG output for carpets, approximate squares and tangent clouds.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::carpet::{Axis, DiagonalIfs};
use crate::error::{CarpetError, Result};
use crate::oracle::{self, PointCloud, Rect};
use crate::sequence::{SequenceSpec, Word};
use crate::symbolic::Symbolic;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Highlight {
    /// The cylinder of a finite word.
    Word { word: Word },
    /// The bounding rectangle of `Q_k(γ)`.
    Square { gamma: SequenceSpec, k: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSpec {
    pub depth: usize,
    pub fill: String,
    pub stroke: String,
    pub stroke_width: f64,
    pub highlight_fill: String,
    pub highlights: Vec<Highlight>,
    /// Sampling resolution for point clouds, relative to the unit square.
    pub resolution: f64,
    pub output: Option<std::path::PathBuf>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            depth: 3,
            fill: "#4a6fa5".into(),
            stroke: "none".into(),
            stroke_width: 0.002,
            highlight_fill: "#d1495b".into(),
            highlights: Vec::new(),
            resolution: 1.0 / 128.0,
            output: None,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self, ifs: &DiagonalIfs, budget: u64) -> Result<()> {
        let total = (ifs.len() as u64).checked_pow(self.depth as u32).unwrap_or(u64::MAX);
        if total > budget {
            return Err(CarpetError::Budget {
                what: "rectangles",
                needed: total,
                budget,
            });
        }
        if !(self.resolution > 0.0 && self.resolution <= 1.0) {
            return Err(CarpetError::DomainError {
                value: self.resolution,
                domain: "(0, 1]".into(),
            });
        }
        for h in &self.highlights {
            match h {
                Highlight::Word { word } => word.validate(ifs.len())?,
                Highlight::Square { gamma, .. } => gamma.validate(ifs.len())?,
            }
        }
        Ok(())
    }
}

/// Distances reported by a tangent comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDistances {
    /// `p_H(product; tangent)`.
    pub product_in_tangent: f64,
    /// `p_H(tangent; product)`.
    pub tangent_in_product: f64,
    pub hausdorff: f64,
    pub tangent_points: usize,
    pub product_points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentComparison {
    pub svg: String,
    pub distances: ComparisonDistances,
}

fn header(out: &mut String, title: &str) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"800\" viewBox=\"0 0 1 1\">\n",
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    // SVG's y axis points down.
    out.push_str("<g transform=\"matrix(1 0 0 -1 0 1)\">\n");
}

fn footer(out: &mut String) {
    out.push_str("</g>\n</svg>\n");
}

fn rect(out: &mut String, r: &Rect, fill: &str, stroke: &str, stroke_width: f64) {
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
        r.x,
        r.y,
        r.w,
        r.h,
        escape(fill),
        escape(stroke),
        stroke_width
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn word_rect(ifs: &DiagonalIfs, word: &[usize]) -> Rect {
    word.iter().fold(Rect::UNIT, |r, &i| r.image(ifs, i))
}

/// Rectangle of `π(Q_k(γ))`: the columns of `γ|L_k` times the rows of `γ|k`.
pub fn square_rect(ifs: &DiagonalIfs, gamma: &SequenceSpec, k: usize) -> Result<Rect> {
    let sym = Symbolic::new(ifs)?;
    let q = sym.approximate_square(gamma, k)?;
    // The projected word only fixes columns, so any representative gives
    // the same interval on the projected axis.
    let long = gamma.expand()?.prefix(q.stem.len() + q.proj.len());
    let stem = &long[..q.stem.len()];
    let (x_word, y_word) = match q.axis {
        Axis::Horizontal => (&long[..], stem),
        Axis::Vertical => (stem, &long[..]),
    };
    let x = word_rect(ifs, x_word);
    let y = word_rect(ifs, y_word);
    Ok(Rect {
        x: x.x,
        y: y.y,
        w: x.w,
        h: y.h,
    })
}

/// One `<rect>` per cylinder of length `spec.depth`, in lexicographic word
/// order, then the highlights.
pub fn render_carpet(ifs: &DiagonalIfs, spec: &RenderSpec, budget: u64) -> Result<String> {
    spec.validate(ifs, budget)?;
    let cover = oracle::cylinder_cover(ifs, spec.depth, budget)?;
    let mut out = String::new();
    header(
        &mut out,
        &format!("carpet with {} maps, depth {}", ifs.len(), spec.depth),
    );
    out.push_str(
        "<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"none\" stroke=\"#000000\" stroke-width=\"0.002\"/>\n",
    );
    if spec.depth > 0 {
        out.push_str("<g class=\"cylinders\">\n");
        for r in &cover.rects {
            rect(&mut out, r, &spec.fill, &spec.stroke, spec.stroke_width);
        }
        out.push_str("</g>\n");
    }
    if !spec.highlights.is_empty() {
        out.push_str("<g class=\"highlights\" fill-opacity=\"0.6\">\n");
        for h in &spec.highlights {
            let r = match h {
                Highlight::Word { word } => word_rect(ifs, word.letters()),
                Highlight::Square { gamma, k } => square_rect(ifs, gamma, *k)?,
            };
            rect(&mut out, &r, &spec.highlight_fill, "none", 0.0);
        }
        out.push_str("</g>\n");
    }
    footer(&mut out);
    Ok(out)
}

fn cloud(out: &mut String, class: &str, fill: &str, c: &PointCloud) {
    let side = c.resolution.max(1e-4);
    let _ = writeln!(out, "<g class=\"{class}\" fill=\"{fill}\" fill-opacity=\"0.5\">");
    for &(x, y) in &c.points {
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{side}\" height=\"{side}\"/>",
            x - side / 2.0,
            y - side / 2.0
        );
    }
    out.push_str("</g>\n");
}

/// Overlay of `Φ_{n,γ}(K) ∩ [0,1]²` and its product approximation, with
/// both one-sided distances in the `<metadata>` element.
pub fn render_tangent_comparison(
    ifs: &DiagonalIfs,
    gamma: &SequenceSpec,
    n: usize,
    spec: &RenderSpec,
    budget: u64,
) -> Result<TangentComparison> {
    spec.validate(ifs, u64::MAX)?;
    gamma.validate(ifs.len())?;
    let tangent = oracle::tangent_approx(ifs, gamma, n, spec.resolution, budget)?;
    let product = oracle::product_approx(ifs, gamma, n, spec.resolution, budget)?;
    let p_in_t = oracle::one_sided_distance(&product, &tangent)?;
    let t_in_p = oracle::one_sided_distance(&tangent, &product)?;
    let distances = ComparisonDistances {
        product_in_tangent: p_in_t,
        tangent_in_product: t_in_p,
        hausdorff: p_in_t.max(t_in_p),
        tangent_points: tangent.len(),
        product_points: product.len(),
    };
    let mut svg = String::new();
    header(&mut svg, &format!("tangent at level {n} of {gamma}"));
    let meta = serde_json::to_string(&distances).expect("plain struct serializes");
    let _ = writeln!(svg, "<metadata>{}</metadata>", escape(&meta));
    cloud(&mut svg, "tangent", "#4a6fa5", &tangent);
    cloud(&mut svg, "product", "#d1495b", &product);
    svg.push_str("</g>\n");
    svg.push_str("<g class=\"legend\" font-family=\"sans-serif\" font-size=\"0.025\">\n");
    svg.push_str("<rect x=\"0.02\" y=\"0.02\" width=\"0.02\" height=\"0.02\" fill=\"#4a6fa5\"/><text x=\"0.05\" y=\"0.04\">tangent</text>\n");
    svg.push_str("<rect x=\"0.02\" y=\"0.05\" width=\"0.02\" height=\"0.02\" fill=\"#d1495b\"/><text x=\"0.05\" y=\"0.07\">product</text>\n");
    let _ = writeln!(
        svg,
        "<text x=\"0.25\" y=\"0.04\">p_H(product; tangent) = {p_in_t:.3e}</text>"
    );
    svg.push_str("</g>\n</svg>\n");
    Ok(TangentComparison { svg, distances })
}

/// Writes a finished document to `path`.
pub fn write_svg(path: &std::path::Path, svg: &str) -> std::io::Result<()> {
    std::fs::write(path, svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{baranski_example, gl_example};
    use crate::Scalar;

    fn rects(svg: &str) -> Vec<Rect> {
        let body = svg.split("class=\"cylinders\"").nth(1).unwrap_or("");
        let body = body.split("</g>").next().unwrap();
        body.lines()
            .filter(|l| l.starts_with("<rect"))
            .map(|l| {
                let f = |k: &str| -> f64 {
                    let s = l.split(&format!(" {k}=\"")).nth(1).unwrap();
                    s[..s.find('"').unwrap()].parse().unwrap()
                };
                Rect {
                    x: f("x"),
                    y: f("y"),
                    w: f("width"),
                    h: f("height"),
                }
            })
            .collect()
    }

    #[test]
    fn figure_coordinates() {
        let ifs = baranski_example(Scalar::from_ratio(1, 40)).unwrap();
        let svg = render_carpet(
            &ifs,
            &RenderSpec {
                depth: 1,
                ..Default::default()
            },
            oracle::BUDGET,
        )
        .unwrap();
        let rs = rects(&svg);
        assert_eq!(rs.len(), 12);
        assert!(rs[0].x.abs() < 1e-12 && rs[0].y.abs() < 1e-12);
        assert!((rs[0].w - 0.3083333333333333).abs() < 1e-12 && (rs[0].h - 0.225).abs() < 1e-12);
    }

    #[test]
    fn depth_zero_and_nesting() {
        let ifs = gl_example();
        let svg = render_carpet(
            &ifs,
            &RenderSpec {
                depth: 0,
                ..Default::default()
            },
            oracle::BUDGET,
        )
        .unwrap();
        assert_eq!(svg.matches("<rect").count(), 1);
        let one = rects(
            &render_carpet(
                &ifs,
                &RenderSpec {
                    depth: 1,
                    ..Default::default()
                },
                oracle::BUDGET,
            )
            .unwrap(),
        );
        let two = rects(
            &render_carpet(
                &ifs,
                &RenderSpec {
                    depth: 2,
                    ..Default::default()
                },
                oracle::BUDGET,
            )
            .unwrap(),
        );
        assert_eq!(two.len(), 9);
        for (k, r) in two.iter().enumerate() {
            assert!(one[k / 3].contains(r));
        }
    }

    #[test]
    fn deterministic() {
        let spec = RenderSpec {
            depth: 2,
            highlights: vec![Highlight::Square {
                gamma: SequenceSpec::constant(0),
                k: 1,
            }],
            ..Default::default()
        };
        let a = render_carpet(&gl_example(), &spec, oracle::BUDGET).unwrap();
        assert_eq!(a, render_carpet(&gl_example(), &spec, oracle::BUDGET).unwrap());
    }

    #[test]
    fn highlighted_square_matches_the_symbolic_one() {
        // Q_1(0^∞) = columns of 0 0 0 times rows of 0.
        let r = square_rect(&gl_example(), &SequenceSpec::constant(0), 1).unwrap();
        assert_eq!(
            r,
            Rect {
                x: 0.0,
                y: 0.0,
                w: 0.125,
                h: 0.25
            }
        );
    }

    #[test]
    fn tangent_metadata_matches_the_oracle() {
        let ifs = gl_example();
        let g = SequenceSpec::constant(1);
        let spec = RenderSpec {
            resolution: 1.0 / 64.0,
            ..Default::default()
        };
        let cmp = render_tangent_comparison(&ifs, &g, 4, &spec, oracle::BUDGET).unwrap();
        let t = oracle::tangent_approx(&ifs, &g, 4, spec.resolution, oracle::BUDGET).unwrap();
        let p = oracle::product_approx(&ifs, &g, 4, spec.resolution, oracle::BUDGET).unwrap();
        assert_eq!(cmp.distances.hausdorff, oracle::hausdorff_distance(&t, &p).unwrap());
        assert!(cmp.svg.contains("<metadata>"));
    }

    #[test]
    fn baranski_has_no_tangent_comparison() {
        let ifs = baranski_example(Scalar::from_ratio(1, 40)).unwrap();
        let err = render_tangent_comparison(
            &ifs,
            &SequenceSpec::constant(0),
            2,
            &RenderSpec::default(),
            oracle::BUDGET,
        );
        assert!(matches!(err, Err(CarpetError::WrongKind { .. })));
    }
}
