//! Scalar root finding for monotone equations and smooth maximisation over
//! (faces and linear slices of) the probability simplex.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CarpetError, Result};

/// Default tolerance for scalar roots.
pub const ROOT_TOL: f64 = 1e-12;
/// Default tolerance for optimisation (projected gradient norm).
pub const OPT_TOL: f64 = 1e-9;
/// Random restarts on top of the deterministic start.
pub const RESTARTS: usize = 16;
/// Restart values further apart than this are reported as non-convergence.
pub const RESTART_AGREEMENT: f64 = 1e-6;

/// Diagnostics for one solved scalar equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

impl RootReport {
    pub fn bracket_width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

/// Root of a strictly decreasing `f` on `[lo, hi]` with `f(lo) ≥ 0 ≥ f(hi)`.
///
/// `f` returns the value and derivative. A dozen bisection steps narrow the
/// bracket, then Newton steps that stay inside it (falling back to bisection)
/// polish the root.
pub fn solve_decreasing(f: impl Fn(f64) -> (f64, f64), lo: f64, hi: f64, tol: f64) -> Result<RootReport> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(CarpetError::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo < 0.0 || fhi > 0.0 {
        return Err(CarpetError::NoSolution(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    if flo == 0.0 {
        return Ok(RootReport {
            root: lo,
            residual: 0.0,
            iterations: 0,
            bracket: (lo, lo),
        });
    }
    if fhi == 0.0 {
        return Ok(RootReport {
            root: hi,
            residual: 0.0,
            iterations: 0,
            bracket: (hi, hi),
        });
    }
    let mut iterations = 0;
    let mut x = 0.5 * (a + b);
    for _ in 0..12 {
        iterations += 1;
        if f(x).0 > 0.0 {
            a = x;
        } else {
            b = x;
        }
        x = 0.5 * (a + b);
    }
    // Newton from the bisection point, kept inside the bracket.
    for _ in 0..60 {
        let (v, d) = f(x);
        if v == 0.0 {
            a = x;
            b = x;
            break;
        }
        if v > 0.0 {
            a = a.max(x);
        } else {
            b = b.min(x);
        }
        iterations += 1;
        let mut next = if d < 0.0 { x - v / d } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || b - a <= f64::EPSILON * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    let residual = f(x).0.abs();
    if residual > tol {
        return Err(CarpetError::ConvergenceFailure(format!(
            "root residual {residual:e} exceeds tolerance {tol:e} near {x}"
        )));
    }
    Ok(RootReport {
        root: x,
        residual,
        iterations,
        bracket: (a.min(x), b.max(x)),
    })
}

/// A smooth function on the simplex, given on the full index set. Gradients
/// are only read on the support of the current problem.
pub trait SimplexObjective {
    fn dim(&self) -> usize;
    fn value(&self, p: &[f64]) -> f64;
    fn gradient(&self, p: &[f64], g: &mut [f64]);

    /// Hessian restricted to `support`, if available in closed form.
    fn hessian(&self, _p: &[f64], _support: &[usize]) -> Option<DMatrix<f64>> {
        None
    }
}

/// Feasible region: probability vectors supported on `support`, optionally
/// restricted to the hyperplane `c · p = 0`.
#[derive(Clone, Debug)]
pub struct Region {
    pub support: Vec<usize>,
    pub constraint: Option<Vec<f64>>,
}

impl Region {
    pub fn simplex(n: usize) -> Self {
        Region {
            support: (0..n).collect(),
            constraint: None,
        }
    }

    fn c(&self, i: usize) -> f64 {
        self.constraint.as_ref().map_or(0.0, |c| c[i])
    }

    /// A point in the relative interior, or `None` if the region is empty.
    pub fn centre(&self, n: usize) -> Option<Vec<f64>> {
        self.sample(n, &mut |_| 1.0)
    }

    fn sample(&self, n: usize, draw: &mut dyn FnMut(usize) -> f64) -> Option<Vec<f64>> {
        let mut p = vec![0.0; n];
        if self.support.is_empty() {
            return None;
        }
        match &self.constraint {
            None => {
                for &i in &self.support {
                    p[i] = draw(i);
                }
            }
            Some(c) => {
                let pos: Vec<usize> = self.support.iter().copied().filter(|&i| c[i] > 0.0).collect();
                let neg: Vec<usize> = self.support.iter().copied().filter(|&i| c[i] < 0.0).collect();
                let zero: Vec<usize> = self.support.iter().copied().filter(|&i| c[i] == 0.0).collect();
                if pos.is_empty() != neg.is_empty() {
                    // One-signed constraint: only the zero-coefficient face is feasible.
                    if zero.is_empty() {
                        return None;
                    }
                    for &i in &zero {
                        p[i] = draw(i);
                    }
                } else {
                    for group in [&pos, &neg] {
                        let mut mass = 0.0;
                        for &i in group.iter() {
                            p[i] = draw(i);
                            mass += p[i] * c[i].abs();
                        }
                        for &i in group.iter() {
                            p[i] /= mass;
                        }
                    }
                    let scale = if zero.is_empty() { 0.0 } else { draw(usize::MAX) };
                    for &i in &zero {
                        p[i] = scale * draw(i) / zero.len() as f64;
                    }
                }
            }
        }
        let total: f64 = p.iter().sum();
        for v in &mut p {
            *v /= total;
        }
        Some(p)
    }

    /// The support actually usable: for one-signed constraints, only the
    /// zero-coefficient letters.
    fn effective(&self) -> Region {
        match &self.constraint {
            Some(c) => {
                let pos = self.support.iter().any(|&i| c[i] > 0.0);
                let neg = self.support.iter().any(|&i| c[i] < 0.0);
                if pos && neg {
                    self.clone()
                } else {
                    Region {
                        support: self.support.iter().copied().filter(|&i| c[i] == 0.0).collect(),
                        constraint: None,
                    }
                }
            }
            None => self.clone(),
        }
    }
}

/// Outcome of one local ascent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMax {
    pub value: f64,
    pub p: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Result of a multi-start maximisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexMax {
    pub best: LocalMax,
    /// Every restart's local maximum, deterministic start first.
    pub restarts: Vec<LocalMax>,
}

impl SimplexMax {
    /// Largest gap between the best value and any converged restart.
    pub fn spread(&self) -> f64 {
        self.restarts
            .iter()
            .filter(|r| r.converged)
            .map(|r| self.best.value - r.value)
            .fold(0.0, f64::max)
    }
}

struct Tangent {
    /// Orthonormal basis of the tangent space on the support (columns).
    basis: DMatrix<f64>,
}

impl Tangent {
    fn new(region: &Region) -> Tangent {
        let m = region.support.len();
        let rows = if region.constraint.is_some() { 2 } else { 1 };
        let mut a = DMatrix::<f64>::zeros(rows, m);
        for (k, &i) in region.support.iter().enumerate() {
            a[(0, k)] = 1.0;
            if rows == 2 {
                a[(1, k)] = region.c(i);
            }
        }
        let mut range: Vec<DVector<f64>> = Vec::new();
        for row in a.row_iter() {
            let mut v = row.transpose();
            for r in &range {
                let proj = r.dot(&v);
                v -= proj * r;
            }
            let norm = v.norm();
            if norm > 1e-12 {
                range.push(v / norm);
            }
        }
        let mut basis_cols: Vec<DVector<f64>> = Vec::new();
        for e in 0..m {
            if basis_cols.len() + range.len() == m {
                break;
            }
            let mut v = DVector::<f64>::zeros(m);
            v[e] = 1.0;
            for b in range.iter().chain(&basis_cols) {
                let proj = b.dot(&v);
                v -= proj * b;
            }
            let norm = v.norm();
            if norm > 1e-8 {
                basis_cols.push(v / norm);
            }
        }
        let basis = if basis_cols.is_empty() {
            DMatrix::zeros(m, 0)
        } else {
            DMatrix::from_columns(&basis_cols)
        };
        Tangent { basis }
    }

    fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

struct Ascent<'a, F: SimplexObjective + ?Sized> {
    f: &'a F,
    region: Region,
    tangent: Tangent,
    tol: f64,
}

impl<'a, F: SimplexObjective + ?Sized> Ascent<'a, F> {
    fn support_gradient(&self, p: &[f64]) -> DVector<f64> {
        let mut g = vec![0.0; self.f.dim()];
        self.f.gradient(p, &mut g);
        DVector::from_iterator(self.region.support.len(), self.region.support.iter().map(|&i| g[i]))
    }

    fn projected_norm(&self, g: &DVector<f64>) -> f64 {
        if self.tangent.dim() == 0 {
            return 0.0;
        }
        (self.tangent.basis.transpose() * g).norm()
    }

    /// `diag(p)`-preconditioned ascent direction and multiplier-corrected
    /// gradient on the support.
    fn direction(&self, p: &[f64], g: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let sup = &self.region.support;
        let (mut s_p, mut s_pc, mut s_pcc, mut s_pg, mut s_pcg) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (k, &i) in sup.iter().enumerate() {
            let c = self.region.c(i);
            s_p += p[i];
            s_pc += p[i] * c;
            s_pcc += p[i] * c * c;
            s_pg += p[i] * g[k];
            s_pcg += p[i] * c * g[k];
        }
        let (lambda, mu) = if self.region.constraint.is_some() {
            let det = s_p * s_pcc - s_pc * s_pc;
            if det.abs() > 1e-300 {
                ((s_pg * s_pcc - s_pc * s_pcg) / det, (s_p * s_pcg - s_pc * s_pg) / det)
            } else {
                (s_pg / s_p, 0.0)
            }
        } else {
            (s_pg / s_p, 0.0)
        };
        let r = DVector::from_iterator(
            sup.len(),
            sup.iter()
                .enumerate()
                .map(|(k, &i)| g[k] - lambda - mu * self.region.c(i)),
        );
        let d = DVector::from_iterator(sup.len(), sup.iter().enumerate().map(|(k, &i)| p[i] * r[k]));
        (d, r)
    }

    fn apply(&self, p: &[f64], d: &DVector<f64>, t: f64) -> Vec<f64> {
        let mut q = p.to_vec();
        for (k, &i) in self.region.support.iter().enumerate() {
            q[i] = p[i] + t * d[k];
        }
        let total: f64 = q.iter().sum();
        for v in &mut q {
            *v /= total;
        }
        q
    }

    /// Largest step keeping every support weight at least half its value.
    fn max_step(&self, p: &[f64], d: &DVector<f64>) -> f64 {
        let mut t = f64::INFINITY;
        for (k, &i) in self.region.support.iter().enumerate() {
            if d[k] < 0.0 {
                t = t.min(0.5 * p[i] / -d[k]);
            }
        }
        t
    }

    /// `√(Σ pᵢ rᵢ²)`: the multiplier-corrected gradient measured in the
    /// metric of the preconditioner, insensitive to vanishing weights.
    fn kkt(&self, p: &[f64], g: &DVector<f64>) -> f64 {
        let (d, r) = self.direction(p, g);
        d.dot(&r).max(0.0).sqrt()
    }

    fn stationary(&self, p: &[f64], g: &DVector<f64>) -> bool {
        self.projected_norm(g) <= self.tol || self.kkt(p, g) <= self.tol
    }

    /// Armijo ascent along the preconditioned direction until the KKT
    /// measure drops below `target`. Returns `false` if the line search
    /// stalled.
    fn ascend(&self, p: &mut Vec<f64>, value: &mut f64, target: f64, max_iter: usize, iterations: &mut usize) -> bool {
        let mut g = self.support_gradient(p);
        let mut step: f64 = 1.0;
        for _ in 0..max_iter {
            let (d, r) = self.direction(p, &g);
            let slope = d.dot(&r);
            if !(slope > target * target) {
                return true;
            }
            *iterations += 1;
            let t_max = self.max_step(p, &d);
            let mut t = (2.0 * step).min(t_max).min(1e6);
            let mut accepted = None;
            for _ in 0..80 {
                let q = self.apply(p, &d, t);
                let v = self.f.value(&q);
                if v.is_finite() && v >= *value + 1e-4 * t * slope {
                    accepted = Some((q, v));
                    break;
                }
                t *= 0.5;
            }
            let Some((q, v)) = accepted else { return false };
            let dp = q.iter().zip(p.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let dv = v - *value;
            *p = q;
            *value = v;
            step = t;
            g = self.support_gradient(p);
            if dp < 1e-12 && dv.abs() < 1e-12 * value.abs().max(1.0) && self.stationary(p, &g) {
                return true;
            }
        }
        true
    }

    fn run(&self, start: Vec<f64>) -> LocalMax {
        let mut p = start;
        let mut value = self.f.value(&p);
        if self.tangent.dim() == 0 {
            return LocalMax {
                value,
                p,
                grad_norm: 0.0,
                iterations: 0,
                converged: true,
            };
        }
        let mut iterations = 0;
        self.ascend(&mut p, &mut value, self.tol.max(1e-5), 4000, &mut iterations);
        let (mut p, mut value) = self.polish(p, value, &mut iterations);
        let g = self.support_gradient(&p);
        if !self.stationary(&p, &g) {
            self.ascend(&mut p, &mut value, 1e-2 * self.tol, 20000, &mut iterations);
        }
        let g = self.support_gradient(&p);
        LocalMax {
            value,
            grad_norm: self.projected_norm(&g),
            converged: self.stationary(&p, &g),
            p,
            iterations,
        }
    }

    fn reduced_hessian(&self, p: &[f64]) -> Option<DMatrix<f64>> {
        let k = self.tangent.dim();
        let b = &self.tangent.basis;
        if let Some(h) = self.f.hessian(p, &self.region.support) {
            return Some(b.transpose() * h * b);
        }
        let min_p = self.region.support.iter().map(|&i| p[i]).fold(f64::INFINITY, f64::min);
        let h = (1e-5 * min_p).clamp(1e-9, 1e-4);
        let mut hess = DMatrix::<f64>::zeros(k, k);
        for j in 0..k {
            let mut plus = p.to_vec();
            let mut minus = p.to_vec();
            for (row, &i) in self.region.support.iter().enumerate() {
                plus[i] += h * b[(row, j)];
                minus[i] -= h * b[(row, j)];
            }
            if minus.iter().any(|&v| v < 0.0) {
                return None;
            }
            let gp = b.transpose() * self.support_gradient(&plus);
            let gm = b.transpose() * self.support_gradient(&minus);
            hess.set_column(j, &((gp - gm) / (2.0 * h)));
        }
        Some(0.5 * (&hess + hess.transpose()))
    }

    /// Newton polish on the letters whose weight is not negligible; the
    /// rest stay frozen.
    fn polish(&self, p: Vec<f64>, value: f64, iterations: &mut usize) -> (Vec<f64>, f64) {
        let top = self.region.support.iter().map(|&i| p[i]).fold(0.0, f64::max);
        let active: Vec<usize> = self
            .region
            .support
            .iter()
            .copied()
            .filter(|&i| p[i] > 1e-12 * top)
            .collect();
        if active.len() == self.region.support.len() {
            return self.newton(p, value, iterations);
        }
        let sub = Region {
            support: active,
            constraint: self.region.constraint.clone(),
        };
        if sub.effective().support.len() != sub.support.len()
            || sub.effective().constraint.is_some() != sub.constraint.is_some()
        {
            return (p, value);
        }
        let inner = Ascent {
            f: self.f,
            tangent: Tangent::new(&sub),
            region: sub,
            tol: self.tol,
        };
        if inner.tangent.dim() == 0 {
            return (p, value);
        }
        inner.newton(p, value, iterations)
    }

    fn newton(&self, mut p: Vec<f64>, mut value: f64, iterations: &mut usize) -> (Vec<f64>, f64) {
        let b = &self.tangent.basis;
        let mut g = self.support_gradient(&p);
        let mut measure = self.kkt(&p, &g);
        for _ in 0..30 {
            if measure <= self.tol * 1e-2 {
                break;
            }
            let Some(hess) = self.reduced_hessian(&p) else { break };
            let rg = b.transpose() * &g;
            let Some(z) = (-&hess).cholesky().map(|c| c.solve(&rg)) else {
                break;
            };
            let d = b * z;
            let mut t = self.max_step(&p, &d).min(1.0);
            let mut improved = false;
            for _ in 0..40 {
                let q = self.apply(&p, &d, t);
                let v = self.f.value(&q);
                let gq = self.support_gradient(&q);
                let mq = self.kkt(&q, &gq);
                if v.is_finite() && v >= value - 1e-15 * value.abs().max(1.0) && mq < measure {
                    p = q;
                    value = v;
                    g = gq;
                    measure = mq;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            *iterations += 1;
            if !improved {
                break;
            }
        }
        (p, value)
    }
}

/// Maximise `f` over `region` from a deterministic interior start plus
/// `restarts` seeded random starts.
pub fn maximize_on_simplex<F: SimplexObjective + ?Sized>(
    f: &F,
    region: &Region,
    tol: f64,
    restarts: usize,
    seed: u64,
) -> Result<SimplexMax> {
    let n = f.dim();
    let region = region.effective();
    let centre = region
        .centre(n)
        .ok_or_else(|| CarpetError::NoSolution("feasible region is empty".into()))?;
    let ascent = Ascent {
        f,
        tangent: Tangent::new(&region),
        region: region.clone(),
        tol,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![centre];
    for _ in 0..restarts {
        let mut draw = |_: usize| -> f64 { -(1.0 - rng.gen::<f64>()).ln() + 1e-3 };
        if let Some(p) = region.sample(n, &mut draw) {
            starts.push(p);
        }
    }
    let runs: Vec<LocalMax> = starts.into_iter().map(|s| ascent.run(s)).collect();
    let best = runs
        .iter()
        .filter(|r| r.converged)
        .chain(runs.iter())
        .max_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| b.p.partial_cmp(&a.p).unwrap_or(std::cmp::Ordering::Equal))
        })
        .cloned()
        .expect("at least one start");
    Ok(SimplexMax { best, restarts: runs })
}

/// Maximise a scalar function on `[lo, hi]` by grid scan and golden-section
/// refinement around the best grid point.
pub fn maximize_interval(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize) -> (f64, f64) {
    let grid = grid.max(2);
    let h = (hi - lo) / (grid - 1) as f64;
    let (mut best_x, mut best_v) = (lo, f(lo));
    for k in 1..grid {
        let x = lo + k as f64 * h;
        let v = f(x);
        if v > best_v {
            best_x = x;
            best_v = v;
        }
    }
    let (mut a, mut b) = ((best_x - h).max(lo), (best_x + h).min(hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a < 1e-14 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x);
    if v >= best_v {
        (x, v)
    } else {
        (best_x, best_v)
    }
}

/// Shannon entropy with natural logarithm and `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// A uniformly random point of the open simplex.
pub fn random_simplex_point(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    p
}
