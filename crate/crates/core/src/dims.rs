//! Moran equations and the variational formulas for Hausdorff, box, Assouad
//! and lower dimensions of Gatzouras–Lalley and Barański carpets.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::carpet::{Axis, CarpetKind, ColumnStructure, DiagonalIfs};
use crate::error::{CarpetError, Result};
use crate::optimize::{
    entropy, maximize_interval, maximize_on_simplex, solve_decreasing, LocalMax, Region, RootReport, SimplexMax,
    SimplexObjective, RESTARTS, RESTART_AGREEMENT,
};

const SEED: u64 = 0x5eed_ca7e;

/// Similarity dimension: the `s ≥ 0` with `Σ rᵢˢ = 1`.
pub fn moran_dimension(ratios: &[f64], tol: f64) -> Result<RootReport> {
    weighted_moran(&vec![1.0; ratios.len()], ratios, tol)
}

/// The `s ≥ 0` with `Σ wᵢ rᵢˢ = 1`, for positive weights with `Σ wᵢ ≥ 1`.
pub fn weighted_moran(weights: &[f64], ratios: &[f64], tol: f64) -> Result<RootReport> {
    if ratios.is_empty() || weights.len() != ratios.len() {
        return Err(CarpetError::Invalid(
            "Moran equation needs a nonempty list of ratios".into(),
        ));
    }
    if let Some(&r) = ratios.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(CarpetError::Degenerate(format!("ratio {r} not in (0,1)")));
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(CarpetError::Invalid("weights must be positive".into()));
    }
    let total: f64 = weights.iter().sum();
    if total < 1.0 - tol {
        return Err(CarpetError::NoSolution(format!("weights sum to {total} < 1")));
    }
    let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let f = |s: f64| {
        let mut v = -1.0;
        let mut d = 0.0;
        for (w, l) in weights.iter().zip(&logs) {
            let term = w * (s * l).exp();
            v += term;
            d += term * l;
        }
        (v, d)
    };
    let max_log = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut hi = (total.ln() / -max_log).max(0.0);
    if total <= 1.0 {
        return Ok(RootReport {
            root: 0.0,
            residual: (total - 1.0).abs(),
            iterations: 0,
            bracket: (0.0, 0.0),
        });
    }
    while f(hi).0 > 0.0 {
        hi = hi * (1.0 + 1e-9) + 1e-12;
    }
    solve_decreasing(f, 0.0, hi, tol)
}

/// Nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|&x| !(x >= 0.0)) {
            return Err(CarpetError::Invalid("probability weights must be nonnegative".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(CarpetError::Invalid(format!("probability weights sum to {total}")));
        }
        Ok(ProbabilityVector(p))
    }

    /// Rescale a nonnegative vector onto the simplex.
    pub fn normalized(mut p: Vec<f64>) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if !(total > 0.0) {
            return Err(CarpetError::Invalid("cannot normalize a zero vector".into()));
        }
        for x in &mut p {
            *x /= total;
        }
        ProbabilityVector::new(p)
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `H(η p)/χ_j(p) + (H(p) − H(η p))/χ_{j'}(p)` where `η` groups letters by
/// their class on axis `j`.
#[derive(Clone, Debug)]
pub struct SplitEntropy {
    class_of: Vec<usize>,
    classes: usize,
    lyap_own: Vec<f64>,
    lyap_other: Vec<f64>,
}

impl SplitEntropy {
    pub fn new(ifs: &DiagonalIfs, axis: Axis) -> Self {
        let cols = ifs.column_structure(axis);
        SplitEntropy {
            class_of: (0..ifs.len()).map(|i| cols.class_of(i)).collect(),
            classes: cols.num_classes(),
            lyap_own: ifs.log_ratios(axis).iter().map(|l| -l).collect(),
            lyap_other: ifs.log_ratios(axis.other()).iter().map(|l| -l).collect(),
        }
    }

    fn class_mass(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.classes];
        for (i, &pi) in p.iter().enumerate() {
            q[self.class_of[i]] += pi;
        }
        q
    }

    /// `(χ_j(p), χ_{j'}(p))`.
    pub fn lyapunov(&self, p: &[f64]) -> (f64, f64) {
        let own = p.iter().zip(&self.lyap_own).map(|(a, b)| a * b).sum();
        let other = p.iter().zip(&self.lyap_other).map(|(a, b)| a * b).sum();
        (own, other)
    }
}

impl SimplexObjective for SplitEntropy {
    fn dim(&self) -> usize {
        self.class_of.len()
    }

    fn value(&self, p: &[f64]) -> f64 {
        let e = entropy(&self.class_mass(p));
        let h = entropy(p);
        let (x, y) = self.lyapunov(p);
        e / x + (h - e) / y
    }

    fn gradient(&self, p: &[f64], g: &mut [f64]) {
        let q = self.class_mass(p);
        let e = entropy(&q);
        let h = entropy(p);
        let (x, y) = self.lyapunov(p);
        for i in 0..p.len() {
            if p[i] <= 0.0 {
                g[i] = 0.0;
                continue;
            }
            let de = -(q[self.class_of[i]].ln() + 1.0);
            let dfibre = -(p[i] / q[self.class_of[i]]).ln();
            g[i] = de / x - e * self.lyap_own[i] / (x * x) + dfibre / y - (h - e) * self.lyap_other[i] / (y * y);
        }
    }

    fn hessian(&self, p: &[f64], support: &[usize]) -> Option<DMatrix<f64>> {
        let q = self.class_mass(p);
        let e = entropy(&q);
        let fib = entropy(p) - e;
        let (x, y) = self.lyapunov(p);
        let m = support.len();
        let mut out = DMatrix::zeros(m, m);
        let de = |i: usize| -(q[self.class_of[i]].ln() + 1.0);
        let df = |i: usize| -(p[i] / q[self.class_of[i]]).ln();
        for (a, &i) in support.iter().enumerate() {
            for (b, &k) in support.iter().enumerate() {
                let same = self.class_of[i] == self.class_of[k];
                let e_ik = if same { -1.0 / q[self.class_of[i]] } else { 0.0 };
                let h_ik = if i == k { -1.0 / p[i] } else { 0.0 };
                let f_ik = h_ik - e_ik;
                let (xi, xk, yi, yk) = (
                    self.lyap_own[i],
                    self.lyap_own[k],
                    self.lyap_other[i],
                    self.lyap_other[k],
                );
                out[(a, b)] =
                    e_ik / x - (de(i) * xk + de(k) * xi) / (x * x) + 2.0 * e * xi * xk / (x * x * x) + f_ik / y
                        - (df(i) * yk + df(k) * yi) / (y * y)
                        + 2.0 * fib * yi * yk / (y * y * y);
            }
        }
        Some(out)
    }
}

/// Value of the axis-`j` functional at `p`; natural log, `0 log 0 = 0`.
pub fn split_value(ifs: &DiagonalIfs, axis: Axis, p: &[f64]) -> Result<f64> {
    if p.len() != ifs.len() {
        return Err(CarpetError::Invalid(format!(
            "probability vector has {} entries for {} maps",
            p.len(),
            ifs.len()
        )));
    }
    Ok(SplitEntropy::new(ifs, axis).value(p))
}

fn require(ifs: &DiagonalIfs, kind: CarpetKind) -> Result<()> {
    let found = ifs.classify().kind;
    if found == kind {
        Ok(())
    } else {
        Err(CarpetError::WrongKind {
            expected: match kind {
                CarpetKind::GatzourasLalley => "Gatzouras-Lalley",
                CarpetKind::Baranski => "Baranski",
                CarpetKind::Neither => "general",
            },
            found: found.to_string(),
        })
    }
}

/// Box dimension of the projection on `axis`.
pub fn projected_box_dim(cols: &ColumnStructure, tol: f64) -> Result<RootReport> {
    moran_dimension(&cols.class_ratio, tol)
}

/// Moran exponent of the orthogonal ratios in each class on `axis`.
pub fn column_exponents(cols: &ColumnStructure, tol: f64) -> Result<Vec<f64>> {
    (0..cols.num_classes())
        .map(|c| moran_dimension(cols.orthogonal_ratios(c), tol).map(|r| r.root))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlBoxDims {
    pub dim_b_proj: RootReport,
    /// Solved as `Σ (aᵢ/bᵢ)^{dim_B η} bᵢ^s = 1`.
    pub dim_b: RootReport,
}

pub fn gl_box_dims(ifs: &DiagonalIfs, tol: f64) -> Result<GlBoxDims> {
    require(ifs, CarpetKind::GatzourasLalley)?;
    let cols = ifs.column_structure(Axis::Horizontal);
    let proj = projected_box_dim(&cols, tol)?;
    let s0 = proj.root;
    let weights: Vec<f64> = ifs
        .maps()
        .iter()
        .map(|m| (m.ratio(Axis::Horizontal) / m.ratio(Axis::Vertical)).powf(s0))
        .collect();
    let full = weighted_moran(&weights, &ifs.ratios(Axis::Vertical), tol)?;
    Ok(GlBoxDims {
        dim_b_proj: proj,
        dim_b: full,
    })
}

/// A maximiser with its optimisation diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub value: f64,
    pub p: ProbabilityVector,
    pub grad_norm: f64,
    pub iterations: usize,
    pub restarts: usize,
    /// Largest gap between the best value and another converged restart.
    pub spread: f64,
    /// True when the maximiser was found on `χ₁ = χ₂`.
    pub on_boundary: bool,
}

impl Maximum {
    fn from_run(best: &LocalMax, all: &SimplexMax, on_boundary: bool) -> Result<Self> {
        Ok(Maximum {
            value: best.value,
            p: ProbabilityVector::normalized(best.p.clone())?,
            grad_norm: best.grad_norm,
            iterations: best.iterations,
            restarts: all.restarts.len(),
            spread: all.spread(),
            on_boundary,
        })
    }
}

pub fn gl_hausdorff(ifs: &DiagonalIfs, tol: f64) -> Result<Maximum> {
    require(ifs, CarpetKind::GatzourasLalley)?;
    let objective = SplitEntropy::new(ifs, Axis::Horizontal);
    let run = maximize_on_simplex(&objective, &Region::simplex(ifs.len()), tol, RESTARTS, SEED)?;
    if !run.best.converged {
        return Err(CarpetError::ConvergenceFailure(format!(
            "projected gradient norm {:e} above {tol:e}",
            run.best.grad_norm
        )));
    }
    if run.spread() > RESTART_AGREEMENT {
        return Err(CarpetError::ConvergenceFailure(format!(
            "restart values disagree by {:e}",
            run.spread()
        )));
    }
    Maximum::from_run(&run.best, &run, false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssouadLower {
    pub dim_a: f64,
    pub dim_l: f64,
    pub dim_b_proj: f64,
    pub t: Vec<f64>,
}

pub fn gl_assouad_lower(ifs: &DiagonalIfs, tol: f64) -> Result<AssouadLower> {
    require(ifs, CarpetKind::GatzourasLalley)?;
    let cols = ifs.column_structure(Axis::Horizontal);
    let dim_b_proj = projected_box_dim(&cols, tol)?.root;
    let t = column_exponents(&cols, tol)?;
    let max_t = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_t = t.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(AssouadLower {
        dim_a: dim_b_proj + max_t,
        dim_l: dim_b_proj + min_t,
        dim_b_proj,
        t,
    })
}

/// `c_i` with `χ_j(p) − χ_{j'}(p) = c · p`; zero exactly when both ratios agree.
fn lyapunov_gap(ifs: &DiagonalIfs, axis: Axis) -> Vec<f64> {
    ifs.maps()
        .iter()
        .map(|m| {
            if m.ratio_scalar(axis).eq_tol(&m.ratio_scalar(axis.other())) {
                0.0
            } else {
                m.ratio(axis.other()).ln() - m.ratio(axis).ln()
            }
        })
        .collect()
}

/// `d_j`: the maximum of the axis-`j` functional over `{χ_j ≤ χ_{j'}}`, or
/// `None` when that set is empty.
pub fn directional_dim(ifs: &DiagonalIfs, axis: Axis, tol: f64) -> Result<Option<Maximum>> {
    let n = ifs.len();
    let objective = SplitEntropy::new(ifs, axis);
    let c = lyapunov_gap(ifs, axis);
    let any_pos = c.iter().any(|&x| x > 0.0);
    let any_neg = c.iter().any(|&x| x < 0.0);
    if any_pos && !any_neg {
        let zero: Vec<usize> = (0..n).filter(|&i| c[i] == 0.0).collect();
        if zero.is_empty() {
            return Ok(None);
        }
        let region = Region {
            support: zero,
            constraint: None,
        };
        let run = maximize_on_simplex(&objective, &region, tol, RESTARTS, SEED)?;
        return converged(&run.best, &run, true).map(Some);
    }
    let free = maximize_on_simplex(&objective, &Region::simplex(n), tol, RESTARTS, SEED)?;
    let inside = |r: &LocalMax| r.p.iter().zip(&c).map(|(p, c)| p * c).sum::<f64>() <= 1e-12;
    let mut best: Option<(LocalMax, &SimplexMax, bool)> = None;
    for r in free.restarts.iter().filter(|r| r.converged && inside(r)) {
        if best.as_ref().is_none_or(|b| r.value > b.0.value) {
            best = Some((r.clone(), &free, false));
        }
    }
    let boundary;
    if any_pos && any_neg {
        let region = Region {
            support: (0..n).collect(),
            constraint: Some(c.clone()),
        };
        boundary = maximize_on_simplex(&objective, &region, tol, RESTARTS, SEED)?;
        let r = &boundary.best;
        if best.as_ref().is_none_or(|b| r.value > b.0.value) {
            best = Some((r.clone(), &boundary, true));
        }
    }
    match best {
        Some((r, run, on_boundary)) => converged(&r, run, on_boundary).map(Some),
        None => Err(CarpetError::ConvergenceFailure(format!(
            "no converged maximiser on axis {}",
            axis.number()
        ))),
    }
}

fn converged(best: &LocalMax, run: &SimplexMax, on_boundary: bool) -> Result<Maximum> {
    if !best.converged {
        return Err(CarpetError::ConvergenceFailure(format!(
            "projected gradient norm {:e} after {} iterations",
            best.grad_norm, best.iterations
        )));
    }
    Maximum::from_run(best, run, on_boundary)
}

/// `min_{μ ≥ 0} log Σ wᵢ e^{μ uᵢ}` and its minimiser; `None` when the infimum
/// is `−∞` (every `uᵢ < 0`).
fn min_log_tilt(w: &[f64], u: &[f64]) -> Option<(f64, f64)> {
    let z = |mu: f64| -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for (wi, ui) in w.iter().zip(u) {
            let t = wi * (mu * ui).exp();
            v += t;
            d += t * ui;
        }
        (v, d)
    };
    if u.iter().all(|&x| x <= 0.0) {
        let zero: f64 = w.iter().zip(u).filter(|(_, &x)| x == 0.0).map(|(w, _)| w).sum();
        return (zero > 0.0).then(|| (zero.ln(), f64::INFINITY));
    }
    if z(0.0).1 >= 0.0 {
        return Some((z(0.0).0.ln(), 0.0));
    }
    let mut hi = 1.0;
    while z(hi).1 < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if z(mid).1 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    Some((z(mu).0.ln(), mu))
}

/// Growth rate `lim (1/k) log Σ_{|w|=k} ψˢ(w)` of the modified singular value
/// function, with `ψˢ(w) = a_w^{d₁} b_w^{s−d₁}` for wide cylinders and
/// `b_w^{d₂} a_w^{s−d₂}` for tall ones. By convex duality the wide part is
/// `min_{μ≥0} log Σ aᵢ^{d₁+μ} bᵢ^{s−d₁−μ}` and the tall part symmetric.
/// Returns the rate and its derivative in `s`.
pub fn singular_value_pressure(ifs: &DiagonalIfs, d1: f64, d2: f64, s: f64) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (axis, d) in [(Axis::Horizontal, d1), (Axis::Vertical, d2)] {
        let long = ifs.log_ratios(axis);
        let short = ifs.log_ratios(axis.other());
        let w: Vec<f64> = long
            .iter()
            .zip(&short)
            .map(|(l, t)| (d * l + (s - d) * t).exp())
            .collect();
        let u: Vec<f64> = ifs
            .maps()
            .iter()
            .zip(long.iter().zip(&short))
            .map(|(m, (l, t))| {
                if m.ratio_scalar(axis).eq_tol(&m.ratio_scalar(axis.other())) {
                    0.0
                } else {
                    l - t
                }
            })
            .collect();
        if let Some((value, mu)) = min_log_tilt(&w, &u) {
            if value > best.0 {
                let (mut z, mut dz) = (0.0, 0.0);
                for ((wi, ui), t) in w.iter().zip(&u).zip(&short) {
                    let tilt = if mu.is_finite() {
                        (mu * ui).exp()
                    } else if *ui == 0.0 {
                        1.0
                    } else {
                        0.0
                    };
                    z += wi * tilt;
                    dz += wi * tilt * t;
                }
                best = (value, dz / z);
            }
        }
    }
    best
}

/// Box dimension: the zero of [`singular_value_pressure`], with `d_j` the
/// projected box dimensions.
pub fn box_dim_from_projections(ifs: &DiagonalIfs, d1: f64, d2: f64, tol: f64) -> Result<RootReport> {
    solve_decreasing(|s| singular_value_pressure(ifs, d1, d2, s), 0.0, 2.0, tol)
}

/// Per-axis data in a [`DimensionReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub axis: Axis,
    pub dim_b_proj: f64,
    pub dim_b_proj_solve: RootReport,
    /// Moran exponent of each class' orthogonal ratios, in class order.
    pub t: Vec<f64>,
    pub assouad_candidate: f64,
    pub lower_candidate: f64,
    /// The variational maximum `d_j`; absent when `{χ_j ≤ χ_{j'}}` is empty.
    pub d: Option<Maximum>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub kind: CarpetKind,
    pub dim_h: f64,
    pub dim_b: f64,
    pub dim_a: f64,
    pub dim_l: f64,
    pub optimizer_p: ProbabilityVector,
    pub dim_b_solve: RootReport,
    /// Horizontal first; Gatzouras–Lalley carpets only report the horizontal
    /// direction.
    pub directions: Vec<DirectionReport>,
}

impl DimensionReport {
    pub fn direction(&self, axis: Axis) -> Option<&DirectionReport> {
        self.directions.iter().find(|d| d.axis == axis)
    }

    /// `d_j`, or `None` if absent.
    pub fn d(&self, axis: Axis) -> Option<f64> {
        self.direction(axis).and_then(|d| d.d.as_ref()).map(|m| m.value)
    }
}

fn direction_report(ifs: &DiagonalIfs, axis: Axis, d: Option<Maximum>, tol: f64) -> Result<DirectionReport> {
    let cols = ifs.column_structure(axis);
    let proj = projected_box_dim(&cols, tol)?;
    let t = column_exponents(&cols, tol)?;
    let max_t = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_t = t.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DirectionReport {
        axis,
        dim_b_proj: proj.root,
        assouad_candidate: proj.root + max_t,
        lower_candidate: proj.root + min_t,
        dim_b_proj_solve: proj,
        t,
        d,
    })
}

fn gl_report(ifs: &DiagonalIfs, tol: f64) -> Result<DimensionReport> {
    let boxes = gl_box_dims(ifs, tol)?;
    let haus = gl_hausdorff(ifs, tol)?;
    let al = gl_assouad_lower(ifs, tol)?;
    let dir = direction_report(ifs, Axis::Horizontal, Some(haus.clone()), tol)?;
    Ok(DimensionReport {
        kind: CarpetKind::GatzourasLalley,
        dim_h: haus.value,
        dim_b: boxes.dim_b.root,
        dim_a: al.dim_a,
        dim_l: al.dim_l,
        optimizer_p: haus.p,
        dim_b_solve: boxes.dim_b,
        directions: vec![dir],
    })
}

/// Dimensions of a Barański carpet; Gatzouras–Lalley carpets are handed to
/// the Gatzouras–Lalley formulas.
pub fn baranski_dims(ifs: &DiagonalIfs, tol: f64) -> Result<DimensionReport> {
    match ifs.classify().kind {
        CarpetKind::GatzourasLalley => return gl_report(ifs, tol),
        CarpetKind::Baranski => {}
        CarpetKind::Neither => {
            return Err(CarpetError::WrongKind {
                expected: "Baranski",
                found: "neither".into(),
            })
        }
    }
    let mut directions = Vec::with_capacity(2);
    for axis in Axis::BOTH {
        let d = directional_dim(ifs, axis, tol)?;
        directions.push(direction_report(ifs, axis, d, tol)?);
    }
    let best = directions
        .iter()
        .filter_map(|d| d.d.as_ref())
        .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal))
        .cloned()
        .ok_or_else(|| CarpetError::NoSolution("both constraint sets are empty".into()))?;
    let dim_b_solve = box_dim_from_projections(ifs, directions[0].dim_b_proj, directions[1].dim_b_proj, tol)?;
    let dim_a = directions
        .iter()
        .map(|d| d.assouad_candidate)
        .fold(f64::NEG_INFINITY, f64::max);
    let dim_l = directions
        .iter()
        .map(|d| d.lower_candidate)
        .fold(f64::INFINITY, f64::min);
    Ok(DimensionReport {
        kind: CarpetKind::Baranski,
        dim_h: best.value,
        dim_b: dim_b_solve.root,
        dim_a,
        dim_l,
        optimizer_p: best.p,
        dim_b_solve,
        directions,
    })
}

/// All dimensions for either carpet kind.
pub fn dimensions(ifs: &DiagonalIfs, tol: f64) -> Result<DimensionReport> {
    baranski_dims(ifs, tol)
}

/// The one-parameter family `z(p)` on a carpet whose maps come in two
/// blocks of identical ratios: block one (the wider maps) shares weight
/// `1 − p`, block two shares `p`.
#[derive(Clone, Debug)]
pub struct ReducedProfile {
    ifs: DiagonalIfs,
    block_one: Vec<usize>,
    block_two: Vec<usize>,
}

impl ReducedProfile {
    pub fn new(ifs: &DiagonalIfs) -> Result<Self> {
        let first = ifs.map(0);
        let same = |i: usize| {
            let m = ifs.map(i);
            m.a.eq_tol(&first.a) && m.b.eq_tol(&first.b)
        };
        let (mut one, mut two): (Vec<usize>, Vec<usize>) = (0..ifs.len()).partition(|&i| same(i));
        if two.is_empty() {
            return Err(CarpetError::Invalid("all maps share the same ratios".into()));
        }
        let other = ifs.map(two[0]);
        if !two
            .iter()
            .all(|&i| ifs.map(i).a.eq_tol(&other.a) && ifs.map(i).b.eq_tol(&other.b))
        {
            return Err(CarpetError::Invalid(
                "maps do not form two blocks of equal ratios".into(),
            ));
        }
        if other.a.value() > first.a.value() {
            std::mem::swap(&mut one, &mut two);
        }
        Ok(ReducedProfile {
            ifs: ifs.clone(),
            block_one: one,
            block_two: two,
        })
    }

    pub fn weights(&self, p: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&p) {
            return Err(CarpetError::DomainError {
                value: p,
                domain: "[0, 1]".into(),
            });
        }
        let mut z = vec![0.0; self.ifs.len()];
        for &i in &self.block_one {
            z[i] = (1.0 - p) / self.block_one.len() as f64;
        }
        for &i in &self.block_two {
            z[i] = p / self.block_two.len() as f64;
        }
        Ok(z)
    }

    /// `D_j(p)`, the axis-`j` functional along the family.
    pub fn d(&self, axis: Axis, p: f64) -> Result<f64> {
        split_value(&self.ifs, axis, &self.weights(p)?)
    }

    /// The parameter where `χ₁ = χ₂`, if the family crosses it.
    pub fn p0(&self) -> Option<f64> {
        let g = |i: usize| {
            let m = self.ifs.map(i);
            m.ratio(Axis::Horizontal).ln() - m.ratio(Axis::Vertical).ln()
        };
        let (g1, g2) = (g(self.block_one[0]), g(self.block_two[0]));
        let p = g1 / (g1 - g2);
        (g1 != g2 && (0.0..=1.0).contains(&p)).then_some(p)
    }

    /// `D₁` where `χ₁ ≤ χ₂` along the family and `D₂` elsewhere.
    pub fn profile(&self, p: f64) -> Result<f64> {
        let z = self.weights(p)?;
        let obj = SplitEntropy::new(&self.ifs, Axis::Horizontal);
        let (x1, x2) = obj.lyapunov(&z);
        if x1 <= x2 {
            Ok(obj.value(&z))
        } else {
            self.d(Axis::Vertical, p)
        }
    }

    /// `(argmax, max)` of `D_j` on `[lo, hi] ⊆ [0, 1]`.
    pub fn sup(&self, axis: Axis, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(CarpetError::DomainError {
                value: lo,
                domain: "0 ≤ lo ≤ hi ≤ 1".into(),
            });
        }
        let obj = SplitEntropy::new(&self.ifs, axis);
        Ok(maximize_interval(
            |p| self.weights(p).map(|z| obj.value(&z)).unwrap_or(f64::NEG_INFINITY),
            lo,
            hi,
            2001,
        ))
    }
}

/// `D_j(p)` on a two-block carpet.
pub fn baranski_profile_d(ifs: &DiagonalIfs, axis: Axis, p: f64) -> Result<f64> {
    ReducedProfile::new(ifs)?.d(axis, p)
}
