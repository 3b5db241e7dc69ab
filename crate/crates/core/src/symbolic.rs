//! Approximate squares, pseudo-cylinders and pointwise Assouad dimension.
//!
//! An approximate square is a pseudo-cylinder `P_j(i, u)`: the infinite
//! words starting with the stem `i` whose next `|u|` letters lie in the
//! classes `u` on axis `j`. The axis is the one along which the stem's
//! rectangle is longer (horizontal on ties), and `u` is the shortest class
//! word making the rectangle narrower along `j` than the stem's short side.
//! The valuation is `ρ = r_{i,j'}`.

use serde::{Deserialize, Serialize};

use crate::carpet::{Axis, CarpetKind, ColumnStructure, DiagonalIfs};
use crate::dims::{box_dim_from_projections, column_exponents, gl_assouad_lower, gl_box_dims, projected_box_dim};
use crate::error::{CarpetError, Result};
use crate::fibre::{FibreAssouad, NonAutoFibre};
use crate::scalar::Scalar;
use crate::sequence::{Block, Expanded, Repeat, SequenceSpec, Word};

/// Default cap on visited tree nodes.
pub const NODE_BUDGET: u64 = 10_000_000;
/// Log-scale slack when comparing products of ratios.
pub const LOG_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PseudoCylinder {
    pub stem: Word,
    /// Classes on `axis` of the letters following the stem.
    pub proj: Vec<usize>,
    pub axis: Axis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximateSquare {
    pub stem: Word,
    pub proj: Vec<usize>,
    pub axis: Axis,
    pub rho: f64,
}

impl ApproximateSquare {
    pub fn pseudo_cylinder(&self) -> PseudoCylinder {
        PseudoCylinder {
            stem: self.stem.clone(),
            proj: self.proj.clone(),
            axis: self.axis,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Wide,
    Tall,
}

/// A family of approximate squares at one scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub scale: f64,
    pub squares: Vec<ApproximateSquare>,
    /// The uniform Bernoulli masses of the members add up to one.
    pub complete: bool,
    pub visited: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaClass {
    Omega0,
    Omega1,
    Omega2,
}

impl OmegaClass {
    /// The projection axis governing tangents along sequences of this class.
    pub fn axis(self) -> Option<Axis> {
        match self {
            OmegaClass::Omega0 => None,
            OmegaClass::Omega1 => Some(Axis::Horizontal),
            OmegaClass::Omega2 => Some(Axis::Vertical),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    Yes,
    YesByInteriorWords,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseAssouad {
    pub value: f64,
    pub error_bound: f64,
    pub regularity: Regularity,
    /// True when only `dim_A(K, x) ≥ value` is certified.
    pub lower_bound_only: bool,
    pub axis: Axis,
    pub dim_b: f64,
    pub dim_b_proj: f64,
    /// `dim_B η(K) + dim_A` of the fibre.
    pub max_tangent_dim: f64,
    pub fibre: FibreAssouad,
}

/// Output of [`Symbolic::sequence_for_target`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSequence {
    pub alpha: f64,
    pub spec: SequenceSpec,
    /// `α − dim_B η(K)`.
    pub fibre_target: f64,
    /// Letter from the column with the largest exponent.
    pub letter_max: usize,
    /// Letter from the column with the smallest exponent.
    pub letter_min: usize,
    /// `(max-column letters, block length)` for each refinement round.
    pub rounds: Vec<(usize, usize)>,
    /// `dim_B η(K)` plus the fibre dimension of the tail block.
    pub limit: f64,
    pub limit_error: f64,
}

#[derive(Clone, Debug)]
struct Node {
    stem: Vec<usize>,
    proj: Vec<usize>,
    axis: Axis,
    log_h: f64,
    log_v: f64,
    log_rho: f64,
}

/// Symbolic view of a Gatzouras–Lalley or Barański carpet.
#[derive(Clone, Debug)]
pub struct Symbolic {
    ifs: DiagonalIfs,
    kind: CarpetKind,
    ssc: [bool; 2],
    cols: [ColumnStructure; 2],
    logs: [Vec<f64>; 2],
    class_logs: [Vec<f64>; 2],
    class_masks: [Vec<u128>; 2],
    full: u128,
}

impl Symbolic {
    pub fn new(ifs: &DiagonalIfs) -> Result<Self> {
        let report = ifs.classify();
        if report.kind == CarpetKind::Neither {
            return Err(CarpetError::WrongKind {
                expected: "Gatzouras-Lalley or Baranski",
                found: "neither".into(),
            });
        }
        let cols = [
            ifs.column_structure(Axis::Horizontal),
            ifs.column_structure(Axis::Vertical),
        ];
        let class_logs = [
            cols[0].class_ratio.iter().map(|r| r.ln()).collect(),
            cols[1].class_ratio.iter().map(|r| r.ln()).collect(),
        ];
        let class_masks = [
            (0..cols[0].num_classes()).map(|c| cols[0].mask(c)).collect(),
            (0..cols[1].num_classes()).map(|c| cols[1].mask(c)).collect(),
        ];
        let n = ifs.len();
        Ok(Symbolic {
            ifs: ifs.clone(),
            kind: report.kind,
            ssc: [report.ssc(Axis::Horizontal), report.ssc(Axis::Vertical)],
            logs: [ifs.log_ratios(Axis::Horizontal), ifs.log_ratios(Axis::Vertical)],
            cols,
            class_logs,
            class_masks,
            full: if n == 128 { u128::MAX } else { (1u128 << n) - 1 },
        })
    }

    pub fn ifs(&self) -> &DiagonalIfs {
        &self.ifs
    }

    pub fn kind(&self) -> CarpetKind {
        self.kind
    }

    pub fn validate_gl(&self) -> Result<()> {
        if self.kind != CarpetKind::GatzourasLalley {
            return Err(CarpetError::WrongKind {
                expected: "Gatzouras-Lalley",
                found: self.kind.to_string(),
            });
        }
        Ok(())
    }

    pub fn columns(&self, axis: Axis) -> &ColumnStructure {
        &self.cols[axis.slot()]
    }

    fn require_gl(&self) -> Result<()> {
        if self.kind == CarpetKind::GatzourasLalley {
            Ok(())
        } else {
            Err(CarpetError::WrongKind {
                expected: "Gatzouras-Lalley",
                found: self.kind.to_string(),
            })
        }
    }

    fn log_word(&self, word: &[usize], axis: Axis) -> f64 {
        word.iter().map(|&l| self.logs[axis.slot()][l]).sum()
    }

    fn log_proj(&self, proj: &[usize], axis: Axis) -> f64 {
        proj.iter().map(|&c| self.class_logs[axis.slot()][c]).sum()
    }

    /// Axis along which a rectangle with these log side lengths is longer.
    fn wide_axis(log_h: f64, log_v: f64) -> Axis {
        if log_h >= log_v - LOG_TOL {
            Axis::Horizontal
        } else {
            Axis::Vertical
        }
    }

    fn side(axis: Axis, log_h: f64, log_v: f64) -> f64 {
        match axis {
            Axis::Horizontal => log_h,
            Axis::Vertical => log_v,
        }
    }

    /// `L_k(γ)`: the first level at which the rectangle along the long axis
    /// of `γ|k` becomes shorter than its short side.
    pub fn l_index(&self, gamma: &SequenceSpec, k: usize) -> Result<usize> {
        gamma.validate(self.ifs.len())?;
        let g = gamma.expand()?;
        Ok(self.square_of(&g, k).0)
    }

    fn square_of(&self, g: &Expanded, k: usize) -> (usize, Axis, f64) {
        let stem = g.prefix(k);
        let (lh, lv) = (
            self.log_word(&stem, Axis::Horizontal),
            self.log_word(&stem, Axis::Vertical),
        );
        let axis = Self::wide_axis(lh, lv);
        let target = Self::side(axis.other(), lh, lv);
        let mut long = Self::side(axis, lh, lv);
        let mut l = k;
        while long >= target - LOG_TOL {
            long += self.logs[axis.slot()][g.letter(l)];
            l += 1;
        }
        (l, axis, target)
    }

    /// `Q_k(γ)`.
    pub fn approximate_square(&self, gamma: &SequenceSpec, k: usize) -> Result<ApproximateSquare> {
        gamma.validate(self.ifs.len())?;
        let g = gamma.expand()?;
        let (l, axis, target) = self.square_of(&g, k);
        let cols = self.columns(axis);
        Ok(ApproximateSquare {
            stem: Word(g.prefix(k)),
            proj: (k..l).map(|n| cols.class_of(g.letter(n))).collect(),
            axis,
            rho: target.exp(),
        })
    }

    pub fn validate_pseudo_cylinder(&self, pc: &PseudoCylinder) -> Result<()> {
        pc.stem.validate(self.ifs.len())?;
        let classes = self.columns(pc.axis).num_classes();
        match pc.proj.iter().find(|&&c| c >= classes) {
            Some(c) => Err(CarpetError::Invalid(format!(
                "class {c} does not exist on axis {}",
                pc.axis.number()
            ))),
            None => Ok(()),
        }
    }

    /// Wide if the pseudo-cylinder contains an approximate square with the
    /// same stem.
    pub fn classify_pseudo_cylinder(&self, pc: &PseudoCylinder) -> Result<Shape> {
        self.validate_pseudo_cylinder(pc)?;
        if pc.proj.is_empty() {
            return Ok(Shape::Wide);
        }
        let (lh, lv) = (
            self.log_word(&pc.stem.0, Axis::Horizontal),
            self.log_word(&pc.stem.0, Axis::Vertical),
        );
        if Self::wide_axis(lh, lv) != pc.axis {
            return Ok(Shape::Tall);
        }
        let head = &pc.proj[..pc.proj.len() - 1];
        let long = Self::side(pc.axis, lh, lv) + self.log_proj(head, pc.axis);
        if long >= Self::side(pc.axis.other(), lh, lv) - LOG_TOL {
            Ok(Shape::Wide)
        } else {
            Ok(Shape::Tall)
        }
    }

    fn node(&self, stem: Vec<usize>, proj: Vec<usize>, axis: Axis, log_h: f64, log_v: f64) -> Node {
        let log_rho = Self::side(axis.other(), log_h, log_v);
        Node {
            stem,
            proj,
            axis,
            log_h,
            log_v,
            log_rho,
        }
    }

    /// Approximate squares with the given stem whose class word starts with
    /// `prefix`.
    fn squares_on_stem(&self, stem: Vec<usize>, log_h: f64, log_v: f64, prefix: Vec<usize>, out: &mut Vec<Node>) {
        let axis = Self::wide_axis(log_h, log_v);
        let target = Self::side(axis.other(), log_h, log_v) - LOG_TOL;
        let start = Self::side(axis, log_h, log_v) + self.log_proj(&prefix, axis);
        let logs = &self.class_logs[axis.slot()];
        let mut stack = vec![(prefix, start)];
        while let Some((word, long)) = stack.pop() {
            if long < target {
                out.push(self.node(stem.clone(), word, axis, log_h, log_v));
                continue;
            }
            for c in (0..logs.len()).rev() {
                let mut w = word.clone();
                w.push(c);
                stack.push((w, long + logs[c]));
            }
        }
    }

    fn roots(&self) -> Vec<Node> {
        let mut out = Vec::new();
        self.squares_on_stem(Vec::new(), 0.0, 0.0, Vec::new(), &mut out);
        out
    }

    fn children(&self, q: &Node) -> Vec<Node> {
        let mut out = Vec::new();
        let cols = self.columns(q.axis);
        for x in 0..self.ifs.len() {
            if let Some(&c) = q.proj.first() {
                if cols.class_of(x) != c {
                    continue;
                }
            }
            let mut stem = q.stem.clone();
            stem.push(x);
            let lh = q.log_h + self.logs[0][x];
            let lv = q.log_v + self.logs[1][x];
            let prefix = if q.proj.is_empty() {
                Vec::new()
            } else {
                q.proj[1..].to_vec()
            };
            debug_assert!(prefix.is_empty() || Self::wide_axis(lh, lv) == q.axis);
            self.squares_on_stem(stem, lh, lv, prefix, &mut out);
        }
        out
    }

    fn mask_at(&self, stem: &[usize], proj: &[usize], axis: Axis, pos: usize) -> u128 {
        if pos < stem.len() {
            1u128 << stem[pos]
        } else if pos - stem.len() < proj.len() {
            self.class_masks[axis.slot()][proj[pos - stem.len()]]
        } else {
            self.full
        }
    }

    fn node_len(stem: &[usize], proj: &[usize]) -> usize {
        stem.len() + proj.len()
    }

    /// `inner ⊆ outer` as sets of infinite words.
    fn contained(&self, inner: (&[usize], &[usize], Axis), outer: (&[usize], &[usize], Axis)) -> bool {
        (0..Self::node_len(outer.0, outer.1)).all(|pos| {
            let a = self.mask_at(inner.0, inner.1, inner.2, pos);
            let b = self.mask_at(outer.0, outer.1, outer.2, pos);
            a & !b == 0
        })
    }

    fn intersects(&self, a: (&[usize], &[usize], Axis), b: (&[usize], &[usize], Axis)) -> bool {
        let len = Self::node_len(a.0, a.1).max(Self::node_len(b.0, b.1));
        (0..len).all(|pos| self.mask_at(a.0, a.1, a.2, pos) & self.mask_at(b.0, b.1, b.2, pos) != 0)
    }

    /// Uniform Bernoulli mass of a pseudo-cylinder.
    fn mass(&self, stem: &[usize], proj: &[usize], axis: Axis) -> f64 {
        let n = self.ifs.len() as f64;
        let cols = self.columns(axis);
        n.powi(-(stem.len() as i32)) * proj.iter().map(|&c| cols.members(c).len() as f64 / n).product::<f64>()
    }

    fn square(&self, q: Node) -> ApproximateSquare {
        ApproximateSquare {
            stem: Word(q.stem),
            proj: q.proj,
            axis: q.axis,
            rho: q.log_rho.exp(),
        }
    }

    /// Depth-first walk over the tree of approximate squares. `visit`
    /// returns whether to descend below a node.
    fn walk(&self, budget: u64, mut visit: impl FnMut(&Node) -> bool) -> Result<u64> {
        let mut stack = self.roots();
        stack.reverse();
        let mut visited = 0u64;
        while let Some(q) = stack.pop() {
            visited += 1;
            if visited > budget {
                return Err(CarpetError::Budget {
                    what: "tree nodes",
                    needed: visited,
                    budget,
                });
            }
            if visit(&q) {
                let mut kids = self.children(&q);
                kids.reverse();
                stack.extend(kids);
            }
        }
        Ok(visited)
    }

    /// `𝒮(r)`: approximate squares `Q` with `ρ(Q) ≤ r < ρ(parent)`.
    pub fn section_at_scale(&self, r: f64, budget: u64) -> Result<Section> {
        if !(r > 0.0 && r < 1.0) {
            return Err(CarpetError::DomainError {
                value: r,
                domain: "(0, 1)".into(),
            });
        }
        let log_r = r.ln() + LOG_TOL;
        let mut squares = Vec::new();
        let visited = self.walk(budget, |q| {
            if q.log_rho <= log_r {
                squares.push(q.clone());
                false
            } else {
                true
            }
        })?;
        let total: f64 = squares.iter().map(|q| self.mass(&q.stem, &q.proj, q.axis)).sum();
        Ok(Section {
            scale: r,
            complete: (total - 1.0).abs() < 1e-9,
            squares: squares.into_iter().map(|q| self.square(q)).collect(),
            visited,
        })
    }

    /// Number of members of `𝒮(r)` inside the cylinder `[i]`.
    pub fn squares_in_cylinder(&self, i: &Word, r: f64, budget: u64) -> Result<u64> {
        i.validate(self.ifs.len())?;
        if !(r > 0.0 && r < 1.0) {
            return Err(CarpetError::DomainError {
                value: r,
                domain: "(0, 1)".into(),
            });
        }
        let log_r = r.ln() + LOG_TOL;
        let cyl = (i.letters(), &[][..], Axis::Horizontal);
        let mut count = 0u64;
        self.walk(budget, |q| {
            let node = (&q.stem[..], &q.proj[..], q.axis);
            if !self.intersects(node, cyl) {
                return false;
            }
            if q.log_rho <= log_r {
                if self.contained(node, cyl) {
                    count += 1;
                }
                return false;
            }
            true
        })?;
        Ok(count)
    }

    /// The maximal section of approximate squares inside a pseudo-cylinder.
    pub fn pseudo_cylinder_cover(&self, pc: &PseudoCylinder, budget: u64) -> Result<Vec<ApproximateSquare>> {
        self.validate_pseudo_cylinder(pc)?;
        let outer = (pc.stem.letters(), &pc.proj[..], pc.axis);
        let mut found = Vec::new();
        self.walk(budget, |q| {
            let node = (&q.stem[..], &q.proj[..], q.axis);
            if self.contained(node, outer) {
                found.push(q.clone());
                false
            } else {
                self.intersects(node, outer)
            }
        })?;
        Ok(found.into_iter().map(|q| self.square(q)).collect())
    }

    /// Cylinders `[i·k]` making up `P(i, u)`.
    pub fn pseudo_cylinder_words(&self, pc: &PseudoCylinder, budget: u64) -> Result<Vec<Word>> {
        self.validate_pseudo_cylinder(pc)?;
        let cols = self.columns(pc.axis);
        let count = pc
            .proj
            .iter()
            .map(|&c| cols.members(c).len() as u64)
            .try_fold(1u64, |a, b| a.checked_mul(b));
        match count {
            Some(c) if c <= budget => {}
            _ => {
                return Err(CarpetError::Budget {
                    what: "pseudo-cylinder words",
                    needed: count.unwrap_or(u64::MAX),
                    budget,
                })
            }
        }
        let mut words = vec![pc.stem.0.clone()];
        for &c in &pc.proj {
            words = words
                .into_iter()
                .flat_map(|w| {
                    cols.members(c).iter().map(move |&x| {
                        let mut v = w.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        Ok(words.into_iter().map(Word).collect())
    }

    /// Symbolic containment of pseudo-cylinders.
    pub fn pseudo_cylinder_contains(&self, outer: &PseudoCylinder, inner: &PseudoCylinder) -> bool {
        self.contained(
            (inner.stem.letters(), &inner.proj, inner.axis),
            (outer.stem.letters(), &outer.proj, outer.axis),
        )
    }

    pub fn pseudo_cylinders_intersect(&self, a: &PseudoCylinder, b: &PseudoCylinder) -> bool {
        self.intersects((a.stem.letters(), &a.proj, a.axis), (b.stem.letters(), &b.proj, b.axis))
    }

    /// `Γ_k = χ₁(ξ_k)/χ₂(ξ_k)` for the letter frequencies `ξ_k` of `γ|k`.
    pub fn gamma_ratio(&self, gamma: &SequenceSpec, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(CarpetError::Invalid("Γ_k needs k ≥ 1".into()));
        }
        gamma.validate(self.ifs.len())?;
        let word = gamma.expand()?.prefix(k);
        Ok(self.log_word(&word, Axis::Horizontal) / self.log_word(&word, Axis::Vertical))
    }

    /// Class of `γ` by the limit of `Γ_k`, read off the period.
    pub fn omega_class(&self, gamma: &SequenceSpec) -> Result<OmegaClass> {
        gamma.validate(self.ifs.len())?;
        let g = gamma.expand()?;
        let h = -self.log_word(g.period(), Axis::Horizontal);
        let v = -self.log_word(g.period(), Axis::Vertical);
        Ok(if (h - v).abs() <= LOG_TOL * g.period().len() as f64 {
            OmegaClass::Omega0
        } else if h < v {
            OmegaClass::Omega1
        } else {
            OmegaClass::Omega2
        })
    }

    /// Words of length `n` whose horizontal projection lies inside `(0, 1)`.
    pub fn interior_words(&self, n: usize, budget: u64) -> Result<Vec<Word>> {
        self.require_gl()?;
        let total = (self.ifs.len() as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        if total > budget {
            return Err(CarpetError::Budget {
                what: "words",
                needed: total,
                budget,
            });
        }
        let mut level: Vec<(Vec<usize>, Scalar, Scalar)> = vec![(Vec::new(), Scalar::zero(), Scalar::one())];
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * self.ifs.len());
            for (w, d, a) in &level {
                for (x, m) in self.ifs.maps().iter().enumerate() {
                    let mut v = w.clone();
                    v.push(x);
                    next.push((v, *d + *a * m.dx, *a * m.a));
                }
            }
            level = next;
        }
        Ok(level
            .into_iter()
            .filter(|(_, d, a)| Scalar::zero().lt_tol(d) && (*d + *a).lt_tol(&Scalar::one()))
            .map(|(w, _, _)| Word(w))
            .collect())
    }

    fn is_interior(&self, word: &[usize]) -> bool {
        let (mut d, mut a) = (Scalar::zero(), Scalar::one());
        for &x in word {
            let m = self.ifs.map(x);
            d = d + a * m.dx;
            a = a * m.a;
        }
        Scalar::zero().lt_tol(&d) && (d + a).lt_tol(&Scalar::one())
    }

    /// Certified regularity of `π(γ)`: strong separation of the columns, or
    /// a repeating block whose column interval avoids the boundary.
    pub fn is_regular_point(&self, gamma: &SequenceSpec) -> Result<Regularity> {
        self.require_gl()?;
        gamma.validate(self.ifs.len())?;
        if self.ssc[0] {
            return Ok(Regularity::Yes);
        }
        let g = gamma.expand()?;
        Ok(if self.is_interior(g.period()) {
            Regularity::YesByInteriorWords
        } else {
            Regularity::Unknown
        })
    }

    /// `t` of a word: the dimension of the fibre window it spans.
    pub fn word_t(&self, word: &Word, tol: f64) -> Result<f64> {
        if word.is_empty() {
            return Err(CarpetError::Invalid("t needs a nonempty word".into()));
        }
        word.validate(self.ifs.len())?;
        let spec = SequenceSpec::Periodic {
            preperiod: word.clone(),
            period: Word(vec![word.0[0]]),
        };
        NonAutoFibre::from_carpet(&self.ifs, Axis::Horizontal, &spec)?.theta(0, word.len(), tol)
    }

    /// `(dim_B K, dim_B η_j(K))` for the given axis.
    fn box_dims(&self, axis: Axis, tol: f64) -> Result<(f64, f64)> {
        if self.kind == CarpetKind::GatzourasLalley {
            let b = gl_box_dims(&self.ifs, tol)?;
            let proj = projected_box_dim(self.columns(axis), tol)?.root;
            return Ok((b.dim_b.root, proj));
        }
        let d1 = projected_box_dim(self.columns(Axis::Horizontal), tol)?.root;
        let d2 = projected_box_dim(self.columns(Axis::Vertical), tol)?.root;
        let b = box_dim_from_projections(&self.ifs, d1, d2, tol)?.root;
        Ok((b, if axis == Axis::Horizontal { d1 } else { d2 }))
    }

    /// `max{dim_B K, dim_B η_j(K) + dim_A K_{η_j(γ)}}`, exact at regular
    /// points and a lower bound elsewhere.
    pub fn pointwise_assouad(&self, gamma: &SequenceSpec, m_max: usize, tol: f64) -> Result<PointwiseAssouad> {
        gamma.validate(self.ifs.len())?;
        let (axis, regularity) = if self.kind == CarpetKind::GatzourasLalley {
            (Axis::Horizontal, self.is_regular_point(gamma)?)
        } else {
            let axis = self.omega_class(gamma)?.axis().ok_or_else(|| {
                CarpetError::UnsupportedSpec("sequence lies in Ω₀, where no formula is available".into())
            })?;
            (
                axis,
                if self.ssc[axis.slot()] {
                    Regularity::Yes
                } else {
                    Regularity::Unknown
                },
            )
        };
        let (dim_b, dim_b_proj) = self.box_dims(axis, tol)?;
        let fibre = NonAutoFibre::from_carpet(&self.ifs, axis, gamma)?.fibre_assouad(m_max, tol)?;
        let max_tangent_dim = dim_b_proj + fibre.estimate;
        Ok(PointwiseAssouad {
            value: dim_b.max(max_tangent_dim),
            error_bound: fibre.error_bound,
            lower_bound_only: regularity == Regularity::Unknown,
            regularity,
            axis,
            dim_b,
            dim_b_proj,
            max_tangent_dim,
            fibre,
        })
    }

    /// `dim_B η_j(K)` plus the fibre Assouad estimate.
    pub fn max_tangent_dim(&self, gamma: &SequenceSpec, m_max: usize, tol: f64) -> Result<(f64, f64)> {
        let p = self.pointwise_assouad(gamma, m_max, tol)?;
        Ok((p.max_tangent_dim, p.error_bound))
    }

    /// A block program whose fibre has Assouad dimension close to
    /// `α − dim_B η(K)`.
    ///
    /// Round `r` emits a balanced word over one letter `i_A` of the column
    /// with the largest exponent and one letter `i_L` of the column with the
    /// smallest, with `4^r` letters and the share of `i_A` chosen so the
    /// word's `t` is closest to the target. The last round repeats forever.
    pub fn sequence_for_target(&self, alpha: f64, depth: usize, tol: f64) -> Result<TargetSequence> {
        self.require_gl()?;
        let b = gl_box_dims(&self.ifs, tol)?;
        let al = gl_assouad_lower(&self.ifs, tol)?;
        let (dim_b, proj) = (b.dim_b.root, b.dim_b_proj.root);
        if !(alpha >= dim_b - 1e-9 && alpha <= al.dim_a + 1e-9) {
            return Err(CarpetError::OutOfRange {
                alpha,
                lo: dim_b,
                hi: al.dim_a,
            });
        }
        if al.dim_a - al.dim_l <= 1e-12 {
            return Err(CarpetError::Degenerate("lower and Assouad dimensions coincide".into()));
        }
        let cols = self.columns(Axis::Horizontal);
        let t = column_exponents(cols, tol)?;
        let argmax = (0..t.len()).fold(0, |best, c| if t[c] > t[best] { c } else { best });
        let argmin = (0..t.len()).fold(0, |best, c| if t[c] < t[best] { c } else { best });
        let (letter_max, letter_min) = (cols.members(argmax)[0], cols.members(argmin)[0]);
        let target = alpha - proj;
        if alpha >= al.dim_a - 1e-12 {
            return Ok(TargetSequence {
                alpha,
                spec: SequenceSpec::constant(letter_max),
                fibre_target: target,
                letter_max,
                letter_min,
                rounds: vec![(1, 1)],
                limit: al.dim_a,
                limit_error: (al.dim_a - alpha).abs(),
            });
        }
        if depth == 0 {
            return Err(CarpetError::Invalid("depth must be at least 1".into()));
        }
        let fibre = NonAutoFibre::from_carpet(&self.ifs, Axis::Horizontal, &SequenceSpec::constant(letter_max))?;
        let theta_at = |count_max: usize, len: usize| -> Result<f64> {
            let mut counts = vec![0u64; t.len()];
            counts[argmax] += count_max as u64;
            counts[argmin] += (len - count_max) as u64;
            Ok(fibre.theta_of_counts(&counts, tol)?.root)
        };
        let share = self.target_share(&fibre, argmax, argmin, target);
        let mut blocks = Vec::with_capacity(depth);
        let mut rounds = Vec::with_capacity(depth);
        let mut limit = f64::NAN;
        for r in 1..=depth {
            let len = 4usize.pow(r as u32);
            let lo = (share * len as f64).floor() as usize;
            let hi = (lo + 1).min(len);
            let (mut count, mut value) = (lo, theta_at(lo, len)?);
            let up = theta_at(hi, len)?;
            if (up - target).abs() < (value - target).abs() {
                count = hi;
                value = up;
            }
            let word: Vec<usize> = (0..len)
                .map(|i| {
                    if ((i + 1) * count) / len > (i * count) / len {
                        letter_max
                    } else {
                        letter_min
                    }
                })
                .collect();
            let repeat = if r == depth { Repeat::Tail } else { Repeat::Times(1) };
            blocks.push(Block {
                word: Word(word),
                repeat,
            });
            rounds.push((count, len));
            limit = proj + value;
        }
        Ok(TargetSequence {
            alpha,
            spec: SequenceSpec::BlockProgram { blocks },
            fibre_target: target,
            letter_max,
            letter_min,
            rounds,
            limit,
            limit_error: (limit - alpha).abs(),
        })
    }

    /// Share `f` of max-column levels with `f log S_A + (1−f) log S_L = 0`
    /// at the target exponent.
    fn target_share(&self, fibre: &NonAutoFibre, a: usize, l: usize, target: f64) -> f64 {
        let log_sum = |c: usize| fibre.components()[c].iter().map(|r| r.powf(target)).sum::<f64>().ln();
        let (sa, sl) = (log_sum(a), log_sum(l));
        if sl >= 0.0 {
            0.0
        } else if sa <= 0.0 {
            1.0
        } else {
            -sl / (sa - sl)
        }
    }
}
