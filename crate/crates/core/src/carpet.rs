//! Diagonal iterated function systems, their column/row structure and the
//! Gatzouras–Lalley / Barański classification.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{CarpetError, Result};
use crate::scalar::Scalar;

/// Largest alphabet supported. Symbolic sets are stored as 128-bit letter masks.
pub const MAX_MAPS: usize = 128;

/// A coordinate axis of the plane. `Horizontal` is the first axis (x, the
/// column direction), `Vertical` the second (y, rows).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::Horizontal, Axis::Vertical];

    pub fn other(self) -> Axis {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }

    /// 1 for horizontal, 2 for vertical.
    pub fn number(self) -> u8 {
        match self {
            Axis::Horizontal => 1,
            Axis::Vertical => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Axis> {
        match n {
            1 => Ok(Axis::Horizontal),
            2 => Ok(Axis::Vertical),
            _ => Err(CarpetError::Invalid(format!("axis must be 1 or 2, got {n}"))),
        }
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            Axis::Horizontal => 0,
            Axis::Vertical => 1,
        }
    }
}

/// `(x, y) ↦ (a·x + dx, b·y + dy)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub a: Scalar,
    pub b: Scalar,
    pub dx: Scalar,
    pub dy: Scalar,
}

impl AffineMap {
    pub fn new(a: Scalar, b: Scalar, dx: Scalar, dy: Scalar) -> Self {
        AffineMap { a, b, dx, dy }
    }

    pub fn from_f64(a: f64, b: f64, dx: f64, dy: f64) -> Self {
        AffineMap::new(a.into(), b.into(), dx.into(), dy.into())
    }

    pub fn ratio_scalar(&self, axis: Axis) -> Scalar {
        match axis {
            Axis::Horizontal => self.a,
            Axis::Vertical => self.b,
        }
    }

    pub fn translation_scalar(&self, axis: Axis) -> Scalar {
        match axis {
            Axis::Horizontal => self.dx,
            Axis::Vertical => self.dy,
        }
    }

    #[inline]
    pub fn ratio(&self, axis: Axis) -> f64 {
        self.ratio_scalar(axis).value()
    }

    #[inline]
    pub fn translation(&self, axis: Axis) -> f64 {
        self.translation_scalar(axis).value()
    }

    /// The image of `[0, 1]` under the projected map on `axis`.
    pub fn interval(&self, axis: Axis) -> (Scalar, Scalar) {
        let d = self.translation_scalar(axis);
        (d, d + self.ratio_scalar(axis))
    }

    #[inline]
    pub fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (
            self.a.value() * x + self.dx.value(),
            self.b.value() * y + self.dy.value(),
        )
    }

    /// Same projected similarity on `axis`.
    pub fn same_projection(&self, other: &AffineMap, axis: Axis) -> bool {
        self.ratio_scalar(axis).eq_tol(&other.ratio_scalar(axis))
            && self.translation_scalar(axis).eq_tol(&other.translation_scalar(axis))
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |reason: String| CarpetError::InvalidMap { index, reason };
        for (name, v) in [("a", self.a), ("b", self.b), ("dx", self.dx), ("dy", self.dy)] {
            if !v.value().is_finite() {
                return Err(bad(format!("{name} is not finite")));
            }
        }
        for (name, r) in [("a", self.a), ("b", self.b)] {
            if !(Scalar::zero().lt_tol(&r) && r.lt_tol(&Scalar::one())) {
                return Err(bad(format!("ratio {name}={r} not in (0,1)")));
            }
        }
        for axis in Axis::BOTH {
            let (lo, hi) = self.interval(axis);
            if lo.lt_tol(&Scalar::zero()) || Scalar::one().lt_tol(&hi) {
                return Err(bad(format!(
                    "image [{}, {}] on axis {} leaves [0,1]",
                    lo.value(),
                    hi.value(),
                    axis.number()
                )));
            }
        }
        Ok(())
    }
}

/// A validated diagonal IFS on `[0,1]²` with at least two maps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalIfs {
    maps: Vec<AffineMap>,
}

#[derive(Deserialize)]
struct RawIfs {
    maps: Vec<AffineMap>,
}

impl<'de> Deserialize<'de> for DiagonalIfs {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawIfs::deserialize(deserializer)?;
        DiagonalIfs::new(raw.maps).map_err(serde::de::Error::custom)
    }
}

impl DiagonalIfs {
    pub fn new(maps: Vec<AffineMap>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(CarpetError::Invalid(format!(
                "a diagonal IFS needs at least 2 maps, got {}",
                maps.len()
            )));
        }
        if maps.len() > MAX_MAPS {
            return Err(CarpetError::Invalid(format!(
                "at most {MAX_MAPS} maps are supported, got {}",
                maps.len()
            )));
        }
        for (i, m) in maps.iter().enumerate() {
            m.validate(i)?;
        }
        Ok(DiagonalIfs { maps })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<RawIfs>(s)
            .map_err(|e| CarpetError::Parse(e.to_string()))
            .and_then(|raw| DiagonalIfs::new(raw.maps))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("carpet serializes")
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn map(&self, i: usize) -> &AffineMap {
        &self.maps[i]
    }

    pub fn ratios(&self, axis: Axis) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio(axis)).collect()
    }

    /// `log r_{i,axis}` for every map.
    pub fn log_ratios(&self, axis: Axis) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio(axis).ln()).collect()
    }

    pub fn min_ratio(&self) -> f64 {
        self.maps
            .iter()
            .flat_map(|m| [m.ratio(Axis::Horizontal), m.ratio(Axis::Vertical)])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn permuted(&self, order: &[usize]) -> Result<DiagonalIfs> {
        DiagonalIfs::new(order.iter().map(|&i| self.maps[i]).collect())
    }

    /// A point of the attractor: the fixed point of the first map.
    pub fn anchor_point(&self) -> (f64, f64) {
        let m = &self.maps[0];
        (m.dx.value() / (1.0 - m.a.value()), m.dy.value() / (1.0 - m.b.value()))
    }

    pub fn column_structure(&self, axis: Axis) -> ColumnStructure {
        ColumnStructure::build(self, axis)
    }

    pub fn classify(&self) -> ClassificationReport {
        classify(self)
    }
}

/// Partition of the alphabet into maps sharing the same projected map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnStructure {
    pub axis: Axis,
    pub classes: Vec<Vec<usize>>,
    pub class_ratio: Vec<f64>,
    pub class_translation: Vec<f64>,
    class_of: Vec<usize>,
    /// Ratio on the orthogonal axis of every member, per class.
    orthogonal: Vec<Vec<f64>>,
}

impl ColumnStructure {
    fn build(ifs: &DiagonalIfs, axis: Axis) -> Self {
        let mut reps: Vec<usize> = Vec::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, m) in ifs.maps().iter().enumerate() {
            match reps.iter().position(|&r| ifs.map(r).same_projection(m, axis)) {
                Some(c) => classes[c].push(i),
                None => {
                    reps.push(i);
                    classes.push(vec![i]);
                }
            }
        }
        let mut order: Vec<usize> = (0..classes.len()).collect();
        order.sort_by(|&x, &y| {
            let (mx, my) = (ifs.map(reps[x]), ifs.map(reps[y]));
            mx.translation_scalar(axis)
                .cmp_tol(&my.translation_scalar(axis))
                .then_with(|| mx.ratio_scalar(axis).cmp_tol(&my.ratio_scalar(axis)))
                .then(x.cmp(&y))
        });
        let classes: Vec<Vec<usize>> = order.iter().map(|&c| classes[c].clone()).collect();
        let mut class_of = vec![0; ifs.len()];
        for (c, members) in classes.iter().enumerate() {
            for &i in members {
                class_of[i] = c;
            }
        }
        let class_ratio = classes.iter().map(|m| ifs.map(m[0]).ratio(axis)).collect();
        let class_translation = classes.iter().map(|m| ifs.map(m[0]).translation(axis)).collect();
        let orthogonal = classes
            .iter()
            .map(|m| m.iter().map(|&i| ifs.map(i).ratio(axis.other())).collect())
            .collect();
        ColumnStructure {
            axis,
            classes,
            class_ratio,
            class_translation,
            class_of,
            orthogonal,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    #[inline]
    pub fn class_of(&self, letter: usize) -> usize {
        self.class_of[letter]
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.classes[class]
    }

    /// Orthogonal-axis ratios of the members of `class`; the similarity
    /// family generating slices through that column (or row).
    pub fn orthogonal_ratios(&self, class: usize) -> &[f64] {
        &self.orthogonal[class]
    }

    /// Bit mask of the letters in `class`.
    pub fn mask(&self, class: usize) -> u128 {
        self.classes[class].iter().fold(0u128, |acc, &i| acc | (1u128 << i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CarpetKind {
    GatzourasLalley,
    Baranski,
    Neither,
}

impl std::fmt::Display for CarpetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CarpetKind::GatzourasLalley => "Gatzouras-Lalley",
            CarpetKind::Baranski => "Baranski",
            CarpetKind::Neither => "neither",
        })
    }
}

/// Flags are indexed `[horizontal, vertical]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub kind: CarpetKind,
    pub interiors_disjoint: bool,
    pub aligned_or_disjoint: [bool; 2],
    pub strict_domination: bool,
    pub proj_ssc: [bool; 2],
}

impl ClassificationReport {
    pub fn aligned(&self, axis: Axis) -> bool {
        self.aligned_or_disjoint[axis.slot()]
    }

    pub fn ssc(&self, axis: Axis) -> bool {
        self.proj_ssc[axis.slot()]
    }
}

/// Open intervals `(lo1, hi1)` and `(lo2, hi2)` intersect.
fn open_overlap(i: (Scalar, Scalar), j: (Scalar, Scalar)) -> bool {
    let lo = if i.0.lt_tol(&j.0) { j.0 } else { i.0 };
    let hi = if i.1.lt_tol(&j.1) { i.1 } else { j.1 };
    lo.lt_tol(&hi)
}

fn same_interval(i: (Scalar, Scalar), j: (Scalar, Scalar)) -> bool {
    i.0.eq_tol(&j.0) && i.1.eq_tol(&j.1)
}

/// Convex hull `[min, max]` of the projected attractor on `axis`. For
/// increasing similarities the extremes are extreme fixed points.
pub fn projected_hull(ifs: &DiagonalIfs, axis: Axis) -> (Scalar, Scalar) {
    let fixed: Vec<Scalar> = ifs
        .maps()
        .iter()
        .map(|m| m.translation_scalar(axis) / (Scalar::one() - m.ratio_scalar(axis)))
        .collect();
    let lo = fixed.iter().copied().min_by(|a, b| a.cmp_tol(b)).expect("nonempty");
    let hi = fixed.iter().copied().max_by(|a, b| a.cmp_tol(b)).expect("nonempty");
    (lo, hi)
}

fn projected_ssc(ifs: &DiagonalIfs, cols: &ColumnStructure) -> bool {
    let (lo, hi) = projected_hull(ifs, cols.axis);
    let mut images: Vec<(Scalar, Scalar)> = cols
        .classes
        .iter()
        .map(|members| {
            let m = ifs.map(members[0]);
            let (r, d) = (m.ratio_scalar(cols.axis), m.translation_scalar(cols.axis));
            (d + r * lo, d + r * hi)
        })
        .collect();
    images.sort_by(|x, y| x.0.cmp_tol(&y.0));
    images.windows(2).all(|w| w[0].1.lt_tol(&w[1].0))
}

fn classify(ifs: &DiagonalIfs) -> ClassificationReport {
    let maps = ifs.maps();
    let n = maps.len();
    let mut interiors_disjoint = true;
    let mut aligned = [true, true];
    for i in 0..n {
        for j in (i + 1)..n {
            let xi = maps[i].interval(Axis::Horizontal);
            let xj = maps[j].interval(Axis::Horizontal);
            let yi = maps[i].interval(Axis::Vertical);
            let yj = maps[j].interval(Axis::Vertical);
            if open_overlap(xi, xj) && open_overlap(yi, yj) {
                interiors_disjoint = false;
            }
            for (slot, (p, q)) in [(xi, xj), (yi, yj)].into_iter().enumerate() {
                if !(same_interval(p, q) || !open_overlap(p, q)) {
                    aligned[slot] = false;
                }
            }
        }
    }
    let strict_domination = maps.iter().all(|m| m.b.lt_tol(&m.a));
    let proj_ssc = [
        projected_ssc(ifs, &ifs.column_structure(Axis::Horizontal)),
        projected_ssc(ifs, &ifs.column_structure(Axis::Vertical)),
    ];
    let kind = if interiors_disjoint && aligned[0] && strict_domination {
        CarpetKind::GatzourasLalley
    } else if interiors_disjoint && aligned[0] && aligned[1] {
        CarpetKind::Baranski
    } else {
        CarpetKind::Neither
    };
    ClassificationReport {
        kind,
        interiors_disjoint,
        aligned_or_disjoint: aligned,
        strict_domination,
        proj_ssc,
    }
}

/// Compare classes by their position; used to keep outputs stable.
pub fn compare_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}
