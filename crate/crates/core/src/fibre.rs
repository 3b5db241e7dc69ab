//! Non-autonomous self-similar fibres and their Assouad dimension.
//!
//! A fibre is a sequence of self-similar components on the line; level `k`
//! (1-based) uses component `c_k` with ratios `r_{c_k, j}`. The exponent
//! `θ(n, m)` is the similarity dimension of levels `n+1..=n+m`, i.e. the root
//! of `∏_k S_{c_k}(θ) = 1` with `S_c(θ) = Σ_j r_{c,j}^θ`. It only depends on
//! how often each component occurs in the window.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::carpet::{Axis, DiagonalIfs};
use crate::dims::moran_dimension;
use crate::error::{CarpetError, Result};
use crate::optimize::{solve_decreasing, RootReport};
use crate::sequence::{Expanded, SequenceSpec};

/// Cap on enumerated tuples for [`NonAutoFibre::theta_bruteforce`].
pub const BRUTEFORCE_CAP: u64 = 1_000_000;
/// Cap on distinct windows in [`NonAutoFibre::fibre_assouad`].
pub const WINDOW_CAP: usize = 100_000;
/// Solver slack used when checking submaximality.
pub const PROPERTY_SLACK: f64 = 1e-9;

const SEED: u64 = 0xf1b2_e5ee;
const CHECKPOINT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaQuery {
    pub n: usize,
    pub m: usize,
}

/// A sample `(n, m, k)` for the submaximality and continuity checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaTriple {
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonAutoFibre {
    components: Vec<Vec<f64>>,
    #[serde(skip)]
    logs: Vec<Vec<f64>>,
    component_dims: Vec<f64>,
    preperiod: Vec<usize>,
    period: Vec<usize>,
    r_min: f64,
    #[serde(skip)]
    levels: Expanded,
    /// Component counts of the preperiod at every multiple of `CHECKPOINT`.
    #[serde(skip)]
    pre_marks: Vec<Vec<u64>>,
    #[serde(skip)]
    period_prefix: Vec<Vec<u64>>,
}

impl NonAutoFibre {
    /// `components[c]` lists the ratios of component `c`; `levels` is a word
    /// over component indices.
    pub fn new(components: Vec<Vec<f64>>, levels: &SequenceSpec) -> Result<Self> {
        if components.is_empty() {
            return Err(CarpetError::Invalid("a fibre needs at least one component".into()));
        }
        for (c, comp) in components.iter().enumerate() {
            if comp.is_empty() {
                return Err(CarpetError::Invalid(format!("component {c} is empty")));
            }
            if let Some(r) = comp.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
                return Err(CarpetError::Degenerate(format!(
                    "component {c} has ratio {r} outside (0,1)"
                )));
            }
        }
        levels.validate(components.len())?;
        let levels = levels.expand()?;
        let component_dims = components
            .iter()
            .map(|c| moran_dimension(c, 1e-14).map(|r| r.root))
            .collect::<Result<Vec<_>>>()?;
        let logs = components.iter().map(|c| c.iter().map(|r| r.ln()).collect()).collect();
        let r_min = components.iter().flatten().copied().fold(1.0, f64::min);
        let nc = components.len();
        let mut pre_marks = Vec::with_capacity(levels.preperiod().len() / CHECKPOINT + 1);
        let mut running = vec![0u64; nc];
        for (i, &c) in levels.preperiod().iter().enumerate() {
            if i % CHECKPOINT == 0 {
                pre_marks.push(running.clone());
            }
            running[c] += 1;
        }
        pre_marks.push(running);
        let mut period_prefix = vec![vec![0u64; nc]];
        for &c in levels.period() {
            let mut next = period_prefix.last().expect("nonempty").clone();
            next[c] += 1;
            period_prefix.push(next);
        }
        Ok(NonAutoFibre {
            components,
            logs,
            component_dims,
            preperiod: levels.preperiod().to_vec(),
            period: levels.period().to_vec(),
            r_min,
            levels,
            pre_marks,
            period_prefix,
        })
    }

    /// A single self-similar component repeated at every level.
    pub fn constant(ratios: Vec<f64>) -> Result<Self> {
        NonAutoFibre::new(vec![ratios], &SequenceSpec::constant(0))
    }

    /// The slice through the point coded by `gamma`: components are the
    /// classes of `axis`, each carrying the ratios orthogonal to `axis`.
    pub fn from_carpet(ifs: &DiagonalIfs, axis: Axis, gamma: &SequenceSpec) -> Result<Self> {
        gamma.validate(ifs.len())?;
        let cols = ifs.column_structure(axis);
        let components = (0..cols.num_classes())
            .map(|c| cols.orthogonal_ratios(c).to_vec())
            .collect();
        NonAutoFibre::new(components, &gamma.map_letters(|l| cols.class_of(l)))
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Moran dimension of each component.
    pub fn component_dims(&self) -> &[f64] {
        &self.component_dims
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn levels(&self) -> &Expanded {
        &self.levels
    }

    /// Component used at 1-based level `k`.
    pub fn component_at(&self, k: usize) -> usize {
        assert!(k >= 1, "levels are numbered from 1");
        self.levels.letter(k - 1)
    }

    /// Component counts over 0-based positions `0..len`.
    fn prefix_counts(&self, len: usize) -> Vec<u64> {
        let pre = self.preperiod.len();
        if len <= pre {
            let mark = len / CHECKPOINT;
            let mut counts = self.pre_marks[mark].clone();
            for &c in &self.preperiod[mark * CHECKPOINT..len] {
                counts[c] += 1;
            }
            return counts;
        }
        let q = self.period.len();
        let rest = len - pre;
        let (full, part) = ((rest / q) as u64, rest % q);
        let total = &self.period_prefix[q];
        let tail = &self.period_prefix[part];
        self.pre_marks
            .last()
            .expect("nonempty")
            .iter()
            .zip(total)
            .zip(tail)
            .map(|((p, t), r)| p + full * t + r)
            .collect()
    }

    /// How often each component occurs on levels `n+1..=n+m`.
    pub fn window_counts(&self, n: usize, m: usize) -> Vec<u64> {
        let hi = self.prefix_counts(n + m);
        let lo = self.prefix_counts(n);
        hi.iter().zip(&lo).map(|(h, l)| h - l).collect()
    }

    /// Root of `Σ_c n_c log S_c(θ) = 0` for the given counts.
    pub fn theta_of_counts(&self, counts: &[u64], tol: f64) -> Result<RootReport> {
        let present: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
        if present.is_empty() {
            return Err(CarpetError::Invalid("θ needs m ≥ 1".into()));
        }
        if present.len() == 1 {
            let s = self.component_dims[present[0]];
            return Ok(RootReport {
                root: s,
                residual: 0.0,
                iterations: 0,
                bracket: (s, s),
            });
        }
        let total: f64 = present.iter().map(|&c| counts[c] as f64).sum();
        let weights: Vec<f64> = present.iter().map(|&c| counts[c] as f64 / total).collect();
        let f = |t: f64| {
            let mut v = 0.0;
            let mut d = 0.0;
            for (w, &c) in weights.iter().zip(&present) {
                let mut s = 0.0;
                let mut ds = 0.0;
                for l in &self.logs[c] {
                    let e = (t * l).exp();
                    s += e;
                    ds += e * l;
                }
                v += w * s.ln();
                d += w * ds / s;
            }
            (v, d)
        };
        let mut hi = present.iter().map(|&c| self.component_dims[c]).fold(0.0, f64::max);
        while f(hi).0 > 0.0 {
            hi = hi * (1.0 + 1e-12) + 1e-15;
        }
        solve_decreasing(f, 0.0, hi, tol)
    }

    pub fn theta_report(&self, n: usize, m: usize, tol: f64) -> Result<RootReport> {
        if m == 0 {
            return Err(CarpetError::Invalid("θ needs m ≥ 1".into()));
        }
        self.theta_of_counts(&self.window_counts(n, m), tol)
    }

    /// `θ(n, m)`: similarity dimension of levels `n+1..=n+m`.
    pub fn theta(&self, n: usize, m: usize, tol: f64) -> Result<f64> {
        self.theta_report(n, m, tol).map(|r| r.root)
    }

    /// `θ(n, m)` from the explicit list of all `m`-tuples of maps.
    pub fn theta_bruteforce(&self, n: usize, m: usize, tol: f64) -> Result<f64> {
        if m == 0 {
            return Err(CarpetError::Invalid("θ needs m ≥ 1".into()));
        }
        let mut count: u64 = 1;
        for k in n..n + m {
            count = count.saturating_mul(self.components[self.levels.letter(k)].len() as u64);
            if count > BRUTEFORCE_CAP {
                return Err(CarpetError::TooLarge {
                    count,
                    cap: BRUTEFORCE_CAP,
                });
            }
        }
        let mut products = vec![0.0f64];
        for k in n..n + m {
            let logs = &self.logs[self.levels.letter(k)];
            products = products.iter().flat_map(|p| logs.iter().map(move |l| p + l)).collect();
        }
        let f = |t: f64| {
            let mut v = -1.0;
            let mut d = 0.0;
            for l in &products {
                let e = (t * l).exp();
                v += e;
                d += e * l;
            }
            (v, d)
        };
        let mut hi = self.component_dims.iter().copied().fold(0.0, f64::max);
        while f(hi).0 > 0.0 {
            hi = hi * (1.0 + 1e-12) + 1e-15;
        }
        solve_decreasing(f, 0.0, hi, tol).map(|r| r.root)
    }

    /// `θ` of one full period, the limit of `θ(n, m)` as `m → ∞`.
    pub fn periodic_limit(&self, tol: f64) -> Result<f64> {
        let q = self.period.len();
        self.theta_of_counts(&self.period_prefix[q], tol).map(|r| r.root)
    }

    /// Submaximality and continuity checks on the given triples.
    ///
    /// For each `(n, m, k)` this checks
    /// `θ(n, m+k) ≤ max{θ(n, m), θ(n+m, k)}` and records
    /// `|θ(n, m+k) − θ(n', m)|·m/k` for a few `n ≤ n' ≤ n+k`; the largest
    /// such value is the fitted continuity constant.
    pub fn check_theta_properties(&self, samples: &[ThetaTriple], tol: f64) -> Result<PropertyReport> {
        let mut report = PropertyReport {
            samples: samples.len(),
            submax_violations: 0,
            max_submax_excess: f64::NEG_INFINITY,
            fitted_c: 0.0,
            worst: None,
        };
        for &t in samples {
            if t.m == 0 || t.k == 0 {
                return Err(CarpetError::Invalid("triples need m, k ≥ 1".into()));
            }
            let whole = self.theta(t.n, t.m + t.k, tol)?;
            let head = self.theta(t.n, t.m, tol)?;
            let tail = self.theta(t.n + t.m, t.k, tol)?;
            let excess = whole - head.max(tail);
            if excess > report.max_submax_excess {
                report.max_submax_excess = excess;
            }
            if excess > PROPERTY_SLACK {
                report.submax_violations += 1;
                report.worst.get_or_insert(t);
            }
            let shifts = t.k.min(8);
            for s in 0..=shifts {
                let n2 = t.n + s * t.k / shifts;
                let c = (whole - self.theta(n2, t.m, tol)?).abs() * t.m as f64 / t.k as f64;
                report.fitted_c = report.fitted_c.max(c);
            }
        }
        Ok(report)
    }

    /// Seeded random triples with `m, k ≤ max_len` and `n` ranging over all
    /// distinct shifts plus one more period.
    pub fn sample_triples(&self, count: usize, max_len: usize, seed: u64) -> Vec<ThetaTriple> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = self.levels.distinct_starts() + self.period.len();
        (0..count)
            .map(|_| ThetaTriple {
                n: rng.gen_range(0..span),
                m: rng.gen_range(1..=max_len.max(1)),
                k: rng.gen_range(1..=max_len.max(1)),
            })
            .collect()
    }

    /// `sup_n θ(n, m_max)` over every distinct window, with an error bound
    /// `C·(p + q)/m_max` against the limit, where `p`, `q` are the preperiod
    /// and period lengths and `C` is the fitted continuity constant.
    pub fn fibre_assouad(&self, m_max: usize, tol: f64) -> Result<FibreAssouad> {
        if m_max == 0 {
            return Err(CarpetError::Invalid("m_max must be at least 1".into()));
        }
        let starts = self.levels.distinct_starts();
        let mut counts = self.window_counts(0, m_max);
        let mut windows: HashMap<Vec<u64>, usize> = HashMap::new();
        windows.insert(counts.clone(), 0);
        for n in 1..starts {
            let out = self.levels.letter(n - 1);
            let inn = self.levels.letter(n - 1 + m_max);
            if out != inn {
                counts[out] -= 1;
                counts[inn] += 1;
                if !windows.contains_key(&counts) {
                    if windows.len() >= WINDOW_CAP {
                        return Err(CarpetError::UnsupportedSpec(format!(
                            "more than {WINDOW_CAP} distinct windows of length {m_max}"
                        )));
                    }
                    windows.insert(counts.clone(), n);
                }
            }
        }
        let mut best = (f64::NEG_INFINITY, 0usize);
        let mut ordered: Vec<(&Vec<u64>, &usize)> = windows.iter().collect();
        ordered.sort_by_key(|(_, &n)| n);
        for (c, &n) in ordered {
            let th = self.theta_of_counts(c, tol)?.root;
            if th > best.0 {
                best = (th, n);
            }
        }
        let fitted_c = if self.is_constant() {
            0.0
        } else {
            let samples = self.sample_triples(64, m_max.min(64), SEED);
            self.check_theta_properties(&samples, tol)?.fitted_c
        };
        Ok(FibreAssouad {
            estimate: best.0,
            error_bound: fitted_c * starts as f64 / m_max as f64,
            fitted_c,
            m_max,
            argmax_start: best.1,
            distinct_windows: windows.len(),
            periodic_limit: self.periodic_limit(tol)?,
        })
    }

    /// `sup θ(n, m)` over starts `n ∈ κℕ`, with `m` the largest multiple of
    /// `κ` not exceeding `m_max`.
    pub fn fibre_assouad_stride(&self, m_max: usize, kappa: usize, tol: f64) -> Result<f64> {
        if kappa == 0 || m_max < kappa {
            return Err(CarpetError::Invalid(format!("need 1 ≤ κ ≤ m_max, got κ = {kappa}")));
        }
        let m = m_max / kappa * kappa;
        let starts = self.preperiod.len() / kappa + self.period.len() + 1;
        if starts > WINDOW_CAP {
            return Err(CarpetError::UnsupportedSpec(format!(
                "more than {WINDOW_CAP} strided starts"
            )));
        }
        let mut best = f64::NEG_INFINITY;
        for j in 0..starts {
            best = best.max(self.theta(j * kappa, m, tol)?);
        }
        Ok(best)
    }

    /// True when only one component ever occurs.
    pub fn is_constant(&self) -> bool {
        let first = self.levels.letter(0);
        self.preperiod.iter().chain(&self.period).all(|&c| c == first)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FibreAssouad {
    pub estimate: f64,
    pub error_bound: f64,
    pub fitted_c: f64,
    pub m_max: usize,
    /// First start realising the estimate.
    pub argmax_start: usize,
    pub distinct_windows: usize,
    pub periodic_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub samples: usize,
    pub submax_violations: usize,
    /// Largest `θ(n, m+k) − max{θ(n, m), θ(n+m, k)}` seen.
    pub max_submax_excess: f64,
    pub fitted_c: f64,
    pub worst: Option<ThetaTriple>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-13;

    fn alternating() -> NonAutoFibre {
        NonAutoFibre::new(
            vec![vec![0.25, 0.25], vec![0.5]],
            &SequenceSpec::periodic(vec![], vec![0, 1]),
        )
        .unwrap()
    }

    #[test]
    fn constant_components() {
        let f = NonAutoFibre::constant(vec![0.25; 4]).unwrap();
        for (n, m) in [(0, 1), (3, 7), (100, 1000)] {
            assert!((f.theta(n, m, TOL).unwrap() - 1.0).abs() < 1e-12);
        }
        let g = NonAutoFibre::constant(vec![1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap();
        assert!((g.theta(5, 9, TOL).unwrap() - 0.7226295969).abs() < 1e-9);
        assert!((g.theta_bruteforce(0, 3, TOL).unwrap() - 0.7226295969).abs() < 1e-9);
        let a = g.fibre_assouad(50, TOL).unwrap();
        assert_eq!(a.estimate, g.component_dims()[0]);
        assert_eq!(a.error_bound, 0.0);
    }

    #[test]
    fn alternating_windows() {
        let f = alternating();
        let third = f.theta(0, 2, TOL).unwrap();
        assert!((third - 2f64.ln() / 8f64.ln()).abs() < 1e-12);
        assert!((f.theta_bruteforce(0, 2, TOL).unwrap() - third).abs() < 1e-10);
        // Odd windows starting on the two-map component beat even ones.
        let a = f.fibre_assouad(13, TOL).unwrap();
        let odd = f.theta(0, 13, TOL).unwrap();
        assert!((a.estimate - odd).abs() < 1e-12);
        assert!(a.estimate > third);
        assert_eq!(a.argmax_start, 0);
        assert!((a.periodic_limit - third).abs() < 1e-12);
    }

    #[test]
    fn level_indexing() {
        let f = NonAutoFibre::new(
            vec![vec![0.5], vec![0.25, 0.25]],
            &SequenceSpec::periodic(vec![1, 1, 0], vec![0, 1]),
        )
        .unwrap();
        assert_eq!(f.component_at(1), 1);
        assert_eq!(f.component_at(3), 0);
        assert_eq!(f.window_counts(0, 3), vec![1, 2]);
        assert_eq!(f.window_counts(2, 5), vec![3, 2]);
        assert_eq!(f.theta(0, 1, TOL).unwrap(), 0.5);
        assert_eq!(f.theta(2, 1, TOL).unwrap(), 0.0);
    }

    #[test]
    fn long_preperiod_counts_match_naive() {
        let pre: Vec<usize> = (0..1000).map(|i| (i * 7 + i / 13) % 3).collect();
        let spec = SequenceSpec::periodic(pre, vec![2, 0]);
        let f = NonAutoFibre::new(vec![vec![0.5, 0.3], vec![0.2], vec![0.4, 0.4, 0.1]], &spec).unwrap();
        for (n, m) in [(0, 1), (63, 2), (64, 900), (999, 5), (5, 3000)] {
            let mut naive = vec![0u64; 3];
            for k in n..n + m {
                naive[f.levels().letter(k)] += 1;
            }
            assert_eq!(f.window_counts(n, m), naive);
        }
    }

    #[test]
    fn bruteforce_cap() {
        let f = NonAutoFibre::constant(vec![0.25; 4]).unwrap();
        assert!(matches!(
            f.theta_bruteforce(0, 11, TOL),
            Err(CarpetError::TooLarge { .. })
        ));
    }

    #[test]
    fn properties_on_alternating() {
        let f = alternating();
        let samples = f.sample_triples(100, 20, 1);
        let r = f.check_theta_properties(&samples, TOL).unwrap();
        assert_eq!(r.submax_violations, 0);
        assert!(r.fitted_c.is_finite());
    }

    #[test]
    fn carpet_fibre_uses_column_heights() {
        let ifs = crate::instances::gl_example();
        let f = NonAutoFibre::from_carpet(&ifs, Axis::Horizontal, &SequenceSpec::constant(1)).unwrap();
        assert_eq!(f.components().len(), 2);
        assert!((f.theta(0, 4, TOL).unwrap() - 0.5).abs() < 1e-12);
        let g = NonAutoFibre::from_carpet(&ifs, Axis::Horizontal, &SequenceSpec::constant(2)).unwrap();
        assert_eq!(g.theta(0, 4, TOL).unwrap(), 0.0);
    }
}
