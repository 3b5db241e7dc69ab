//! Brute-force geometry: cylinder covers, grid counts, tangent clouds and
//! Hausdorff distances, used as ground truth for the formulas.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::carpet::{Axis, DiagonalIfs};
use crate::error::{CarpetError, Result};
use crate::sequence::{Expanded, SequenceSpec};
use crate::symbolic::Symbolic;

/// Default cap on rectangles, cells and tree nodes.
pub const BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        x: 0.0,
        y: 0.0,
        w: 1.0,
        h: 1.0,
    };

    pub fn diameter(&self) -> f64 {
        self.w.hypot(self.h)
    }

    /// Image under the map of `ifs` with index `i`.
    pub fn image(&self, ifs: &DiagonalIfs, i: usize) -> Rect {
        let m = ifs.map(i);
        let (a, b) = (m.ratio(Axis::Horizontal), m.ratio(Axis::Vertical));
        Rect {
            x: self.x + self.w * m.translation(Axis::Horizontal),
            y: self.y + self.h * m.translation(Axis::Vertical),
            w: self.w * a,
            h: self.h * b,
        }
    }

    /// Point of `self` at relative position `(u, v)`.
    pub fn at(&self, (u, v): (f64, f64)) -> (f64, f64) {
        (self.x + self.w * u, self.y + self.h * v)
    }

    pub fn contains(&self, other: &Rect) -> bool {
        const EPS: f64 = 1e-12;
        other.x >= self.x - EPS
            && other.y >= self.y - EPS
            && other.x + other.w <= self.x + self.w + EPS
            && other.y + other.h <= self.y + self.h + EPS
    }

    /// Closed rectangles meet.
    pub fn meets(&self, other: &Rect) -> bool {
        self.x <= other.x + other.w
            && other.x <= self.x + self.w
            && self.y <= other.y + other.h
            && other.y <= self.y + self.h
    }

    fn meets_disc(&self, (cx, cy): (f64, f64), r: f64) -> bool {
        let dx = (self.x - cx).max(0.0).max(cx - self.x - self.w);
        let dy = (self.y - cy).max(0.0).max(cy - self.y - self.h);
        dx * dx + dy * dy <= r * r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverRule {
    /// All words of one length.
    UniformDepth,
    /// Words refined until their rectangle is small enough.
    Diameter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectCover {
    pub rects: Vec<Rect>,
    pub depth: usize,
    pub rule: CoverRule,
}

/// Images of the unit square under all words of length `depth`, in
/// lexicographic order.
pub fn cylinder_cover(ifs: &DiagonalIfs, depth: usize, budget: u64) -> Result<RectCover> {
    let total = (ifs.len() as u64).checked_pow(depth as u32).unwrap_or(u64::MAX);
    if total > budget {
        return Err(CarpetError::Budget {
            what: "rectangles",
            needed: total,
            budget,
        });
    }
    let mut rects = vec![Rect::UNIT];
    for _ in 0..depth {
        rects = rects
            .iter()
            .flat_map(|r| (0..ifs.len()).map(move |i| r.image(ifs, i)))
            .collect();
    }
    Ok(RectCover {
        rects,
        depth,
        rule: CoverRule::UniformDepth,
    })
}

/// Smallest uniform depth at which every rectangle has diameter at most
/// `max_diam`.
pub fn depth_for_diameter(ifs: &DiagonalIfs, max_diam: f64) -> usize {
    let a = ifs.ratios(Axis::Horizontal).into_iter().fold(0.0, f64::max);
    let b = ifs.ratios(Axis::Vertical).into_iter().fold(0.0, f64::max);
    let mut depth = 0;
    let (mut w, mut h) = (1.0f64, 1.0f64);
    while w.hypot(h) > max_diam {
        w *= a;
        h *= b;
        depth += 1;
    }
    depth
}

/// Rectangles of the words whose own rectangle has diameter at most
/// `max_diam` but whose parent's does not, restricted to rectangles
/// accepted by `keep` (a rejected rectangle is not refined).
pub fn diameter_cover(
    ifs: &DiagonalIfs,
    max_diam: f64,
    budget: u64,
    keep: impl Fn(&Rect) -> bool,
) -> Result<RectCover> {
    if !(max_diam > 0.0) {
        return Err(CarpetError::DomainError {
            value: max_diam,
            domain: "(0, ∞)".into(),
        });
    }
    let mut out = Vec::new();
    let mut stack = vec![(Rect::UNIT, 0usize)];
    let mut visited = 0u64;
    let mut depth = 0;
    while let Some((r, d)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(CarpetError::Budget {
                what: "tree nodes",
                needed: visited,
                budget,
            });
        }
        if !keep(&r) {
            continue;
        }
        if r.diameter() <= max_diam {
            depth = depth.max(d);
            out.push(r);
            continue;
        }
        for i in (0..ifs.len()).rev() {
            stack.push((r.image(ifs, i), d + 1));
        }
    }
    Ok(RectCover {
        rects: out,
        depth,
        rule: CoverRule::Diameter,
    })
}

/// Number of `δ`-grid cells `[iδ, (i+1)δ) × [jδ, (j+1)δ)` holding one of
/// the points.
pub fn grid_count(points: impl IntoIterator<Item = (f64, f64)>, delta: f64, budget: u64) -> Result<u64> {
    let mut cells = HashSet::new();
    for (x, y) in points {
        cells.insert(((x / delta).floor() as i64, (y / delta).floor() as i64));
        if cells.len() as u64 > budget {
            return Err(CarpetError::Budget {
                what: "grid cells",
                needed: cells.len() as u64,
                budget,
            });
        }
    }
    Ok(cells.len() as u64)
}

/// The point `T_w(p)` of `K` in each rectangle, `p` the fixed point of the
/// first map.
pub fn sample_points<'a>(ifs: &DiagonalIfs, cover: &'a RectCover) -> impl Iterator<Item = (f64, f64)> + 'a {
    let anchor = ifs.anchor_point();
    cover.rects.iter().map(move |r| r.at(anchor))
}

/// `N_δ`: grid cells of side `δ` holding a point of `K` from each rectangle
/// of the coarsest cylinder cover with diameters at most `δ/2`. Within a
/// factor four of the number of cells meeting `K`. `depth` must be large
/// enough for the depth-`depth` cover to meet the diameter bound.
pub fn box_count(ifs: &DiagonalIfs, delta: f64, depth: usize, budget: u64) -> Result<u64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(CarpetError::DomainError {
            value: delta,
            domain: "(0, 1]".into(),
        });
    }
    let needed = depth_for_diameter(ifs, delta / 2.0);
    if depth < needed {
        return Err(CarpetError::Invalid(format!(
            "depth {depth} leaves rectangles wider than δ/2; need {needed}"
        )));
    }
    let cover = diameter_cover(ifs, delta / 2.0, budget, |_| true)?;
    grid_count(sample_points(ifs, &cover), delta, budget)
}

/// `(log 1/δ, log N_δ)` pairs with the depth chosen per scale.
pub fn box_count_series(ifs: &DiagonalIfs, deltas: &[f64], budget: u64) -> Result<Vec<(f64, f64)>> {
    deltas
        .iter()
        .map(|&d| {
            let depth = depth_for_diameter(ifs, d / 2.0);
            let n = box_count(ifs, d, depth, budget)?;
            Ok(((1.0 / d).ln(), (n as f64).ln()))
        })
        .collect()
}

/// `π(γ)`, from the prefix whose rectangle has diameter below `precision`.
pub fn point_of(ifs: &DiagonalIfs, gamma: &Expanded, precision: f64) -> (f64, f64) {
    let mut r = Rect::UNIT;
    let mut n = 0;
    while r.diameter() > precision {
        r = r.image(ifs, gamma.letter(n));
        n += 1;
    }
    r.at((0.5, 0.5))
}

/// Grid count at mesh `r` of the part of `K` in the closed disc of radius
/// `big_r` about `π(γ)`, sampled like [`box_count`].
pub fn local_count(ifs: &DiagonalIfs, gamma: &SequenceSpec, big_r: f64, r: f64, budget: u64) -> Result<u64> {
    if !(r > 0.0 && big_r >= r) {
        return Err(CarpetError::Invalid(format!(
            "need 0 < r ≤ R, got r = {r}, R = {big_r}"
        )));
    }
    gamma.validate(ifs.len())?;
    let x = point_of(ifs, &gamma.expand()?, r / 10.0);
    let cover = diameter_cover(ifs, r / 2.0, budget, |rect| rect.meets_disc(x, big_r))?;
    let inside = sample_points(ifs, &cover).filter(|p| (p.0 - x.0).hypot(p.1 - x.1) <= big_r);
    grid_count(inside, r, budget)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<(f64, f64)>,
    pub resolution: f64,
}

impl PointCloud {
    pub fn new(points: Vec<(f64, f64)>, resolution: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(CarpetError::EmptyCloud);
        }
        Ok(PointCloud { points, resolution })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Affine map `t ↦ d + r t` composed along a word on one axis.
fn compose(ifs: &DiagonalIfs, word: &[usize], axis: Axis) -> (f64, f64) {
    word.iter().fold((0.0, 1.0), |(d, r), &i| {
        let m = ifs.map(i);
        (d + r * m.translation(axis), r * m.ratio(axis))
    })
}

fn in_unit(p: (f64, f64)) -> bool {
    const EPS: f64 = 1e-9;
    (-EPS..=1.0 + EPS).contains(&p.0) && (-EPS..=1.0 + EPS).contains(&p.1)
}

/// Tangent clouds need `bᵢ ≤ aᵢ` for every map and aligned columns,
/// which covers Gatzouras–Lalley carpets and products of equal ratios.
fn weakly_dominated(ifs: &DiagonalIfs) -> Result<Symbolic> {
    let sym = Symbolic::new(ifs)?;
    let dominated = ifs
        .maps()
        .iter()
        .all(|m| m.ratio(Axis::Vertical) <= m.ratio(Axis::Horizontal) + 1e-12);
    if !dominated || !ifs.classify().aligned(Axis::Horizontal) {
        return Err(CarpetError::WrongKind {
            expected: "Gatzouras-Lalley",
            found: sym.kind().to_string(),
        });
    }
    Ok(sym)
}

/// `Φ_{n,γ}(K) ∩ [0,1]²`, sampled by points `T_w(p)` of `K` whose
/// rectangles measure at most `resolution` after rescaling.
pub fn tangent_approx(
    ifs: &DiagonalIfs,
    gamma: &SequenceSpec,
    n: usize,
    resolution: f64,
    budget: u64,
) -> Result<PointCloud> {
    let sym = weakly_dominated(ifs)?;
    let g = gamma.expand()?;
    let l = sym.l_index(gamma, n)?;
    let (x0, sx) = compose(ifs, &g.prefix(l), Axis::Horizontal);
    let (y0, sy) = compose(ifs, &g.prefix(n), Axis::Vertical);
    let window = Rect {
        x: x0,
        y: y0,
        w: sx,
        h: sy,
    };
    let anchor = ifs.anchor_point();
    let mut points = Vec::new();
    let mut stack = vec![Rect::UNIT];
    let mut visited = 0u64;
    while let Some(r) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(CarpetError::Budget {
                what: "tree nodes",
                needed: visited,
                budget,
            });
        }
        if !r.meets(&window) {
            continue;
        }
        if r.w <= resolution * sx && r.h <= resolution * sy {
            let (px, py) = r.at(anchor);
            let p = ((px - x0) / sx, (py - y0) / sy);
            if in_unit(p) {
                points.push((p.0.clamp(0.0, 1.0), p.1.clamp(0.0, 1.0)));
            }
            continue;
        }
        for i in (0..ifs.len()).rev() {
            stack.push(r.image(ifs, i));
        }
    }
    PointCloud::new(points, resolution)
}

/// `η(K) × (S_{γ|n,2}^{-1}(K_{η(γ)}) ∩ [0,1])` on a grid of points of
/// both factors at the given resolution.
pub fn product_approx(
    ifs: &DiagonalIfs,
    gamma: &SequenceSpec,
    n: usize,
    resolution: f64,
    budget: u64,
) -> Result<PointCloud> {
    weakly_dominated(ifs)?;
    let g = gamma.expand()?;
    let cols = ifs.column_structure(Axis::Horizontal);
    // Points of η(K): images of the fixed point of the first column.
    let (d0, r0) = (cols.class_translation[0], cols.class_ratio[0]);
    let x_star = d0 / (1.0 - r0);
    let mut xs = Vec::new();
    let mut stack = vec![(0.0f64, 1.0f64)];
    let mut visited = 0u64;
    while let Some((d, r)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(CarpetError::Budget {
                what: "tree nodes",
                needed: visited,
                budget,
            });
        }
        if r <= resolution {
            xs.push(d + r * x_star);
            continue;
        }
        for c in (0..cols.num_classes()).rev() {
            stack.push((d + r * cols.class_translation[c], r * cols.class_ratio[c]));
        }
    }
    // Points of the fibre inside the level-n interval of γ, rescaled.
    let (y0, sy) = compose(ifs, &g.prefix(n), Axis::Vertical);
    let mut ys = Vec::new();
    let mut stack = vec![(0usize, 0.0f64, 1.0f64)];
    while let Some((level, d, r)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(CarpetError::Budget {
                what: "tree nodes",
                needed: visited,
                budget,
            });
        }
        if d > y0 + sy + 1e-12 * sy || d + r < y0 - 1e-12 * sy {
            continue;
        }
        if r <= resolution * sy {
            let tail = point_of(ifs, &shifted(&g, level), 1e-3 * resolution).1;
            let y = (d + r * tail - y0) / sy;
            if (-1e-9..=1.0 + 1e-9).contains(&y) {
                ys.push(y.clamp(0.0, 1.0));
            }
            continue;
        }
        let column = cols.class_of(g.letter(level));
        for &j in cols.members(column).iter().rev() {
            let m = ifs.map(j);
            stack.push((
                level + 1,
                d + r * m.translation(Axis::Vertical),
                r * m.ratio(Axis::Vertical),
            ));
        }
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let total = xs.len() as u64 * ys.len() as u64;
    if total > budget {
        return Err(CarpetError::Budget {
            what: "cloud points",
            needed: total,
            budget,
        });
    }
    let points = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    PointCloud::new(points, resolution)
}

fn shifted(g: &Expanded, k: usize) -> Expanded {
    let pre: Vec<usize> = (k..g.distinct_starts().max(k)).map(|n| g.letter(n)).collect();
    let start = g.distinct_starts().max(k);
    let q = g.period().len();
    let period: Vec<usize> = (start..start + q).map(|n| g.letter(n)).collect();
    Expanded::new(pre, period)
}

struct Grid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<(f64, f64)>>,
    bounds: (i64, i64, i64, i64),
}

impl Grid {
    fn new(points: &[(f64, f64)]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let extent = (x1 - x0).max(y1 - y0).max(1e-12);
        let cell = extent / (points.len() as f64).sqrt().max(1.0);
        let key = |v: f64| (v / cell).floor() as i64;
        let mut buckets: HashMap<(i64, i64), Vec<(f64, f64)>> = HashMap::new();
        for &(x, y) in points {
            buckets.entry((key(x), key(y))).or_default().push((x, y));
        }
        Grid {
            cell,
            buckets,
            bounds: (key(x0), key(x1), key(y0), key(y1)),
        }
    }

    fn nearest(&self, (x, y): (f64, f64)) -> f64 {
        let (cx, cy) = ((x / self.cell).floor() as i64, (y / self.cell).floor() as i64);
        let (bx0, bx1, by0, by1) = self.bounds;
        let gap = |c: i64, lo: i64, hi: i64| (lo - c).max(c - hi).max(0);
        let first = gap(cx, bx0, bx1).max(gap(cy, by0, by1));
        let last = (cx - bx0)
            .abs()
            .max((cx - bx1).abs())
            .max((cy - by0).abs())
            .max((cy - by1).abs());
        let mut best = f64::INFINITY;
        for ring in first..=last {
            if best <= (ring - 1).max(0) as f64 * self.cell {
                break;
            }
            for i in (cx - ring).max(bx0)..=(cx + ring).min(bx1) {
                let edge = (i - cx).abs() == ring;
                let js: Vec<i64> = if edge {
                    ((cy - ring).max(by0)..=(cy + ring).min(by1)).collect()
                } else {
                    vec![cy - ring, cy + ring]
                };
                for j in js {
                    if let Some(pts) = self.buckets.get(&(i, j)) {
                        for &(px, py) in pts {
                            best = best.min((px - x).hypot(py - y));
                        }
                    }
                }
            }
        }
        best
    }
}

/// `p_H(A; B) = max_{a ∈ A} min_{b ∈ B} |a − b|`.
pub fn one_sided_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(CarpetError::EmptyCloud);
    }
    let grid = Grid::new(&b.points);
    Ok(a.points.iter().map(|&p| grid.nearest(p)).fold(0.0, f64::max))
}

/// Hausdorff distance between two clouds.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    Ok(one_sided_distance(a, b)?.max(one_sided_distance(b, a)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% confidence interval for the slope.
    pub ci95: (f64, f64),
    pub n: usize,
}

impl Regression {
    /// The confidence interval widened by `tol` contains `value`.
    pub fn agrees_with(&self, value: f64, tol: f64) -> bool {
        self.ci95.0 - tol <= value && value <= self.ci95.1 + tol
    }
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn regression(points: &[(f64, f64)]) -> Result<Regression> {
    let n = points.len();
    if n < 3 {
        return Err(CarpetError::Invalid(format!(
            "regression needs at least 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CarpetError::Degenerate("all abscissae coincide".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let slope_stderr = (rss / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| CarpetError::Invalid(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(Regression {
        slope,
        intercept,
        slope_stderr,
        ci95: (slope - t * slope_stderr, slope + t * slope_stderr),
        n,
    })
}
