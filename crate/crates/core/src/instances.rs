//! Reference carpets and random instance generators.

use rand::Rng;

use crate::carpet::{AffineMap, CarpetKind, DiagonalIfs};
use crate::error::{CarpetError, Result};
use crate::scalar::Scalar;

fn q(n: i64, d: i64) -> Scalar {
    Scalar::from_ratio(n, d)
}

/// Two columns: `{(1/2,1/4,0,0), (1/2,1/4,0,1/2)}` and `{(1/4,1/8,1/2,0)}`.
pub fn gl_example() -> DiagonalIfs {
    DiagonalIfs::new(vec![
        AffineMap::new(q(1, 2), q(1, 4), q(0, 1), q(0, 1)),
        AffineMap::new(q(1, 2), q(1, 4), q(0, 1), q(1, 2)),
        AffineMap::new(q(1, 4), q(1, 8), q(1, 2), q(0, 1)),
    ])
    .expect("valid reference carpet")
}

/// One column of width 1/2 holding two maps of height 1/4.
pub fn single_column_gl() -> DiagonalIfs {
    DiagonalIfs::new(vec![
        AffineMap::new(q(1, 2), q(1, 4), q(0, 1), q(0, 1)),
        AffineMap::new(q(1, 2), q(1, 4), q(0, 1), q(1, 2)),
    ])
    .expect("valid reference carpet")
}

/// The four quadrants of the unit square.
pub fn product_carpet() -> DiagonalIfs {
    let mut maps = Vec::new();
    for dx in [0, 1] {
        for dy in [0, 1] {
            maps.push(AffineMap::new(q(1, 2), q(1, 2), q(dx, 2), q(dy, 2)));
        }
    }
    DiagonalIfs::new(maps).expect("valid reference carpet")
}

/// The twelve-map Barański carpet with five columns and four rows:
/// `β = 1/4 − δ`, `α₁ = 1/3 − δ`, `α₂ = 1/6 − δ`.
///
/// Letters 0..4 form the wide column (`a = α₁`, one map per row); letters
/// 4..12 are pairs of narrow maps (`a = α₂`) in columns 1, 2 (rows 0, 1) and
/// columns 3, 4 (rows 2, 3). Horizontal gaps are `5δ/4`, vertical gaps
/// `4δ/3`, so the construction fills `[0,1]²` exactly and for `δ = 0`
/// neighbouring rectangles touch.
pub fn baranski_example(delta: Scalar) -> Result<DiagonalIfs> {
    if delta.lt_tol(&Scalar::zero()) || !delta.lt_tol(&q(1, 6)) {
        return Err(CarpetError::DomainError {
            value: delta.value(),
            domain: "[0, 1/6)".into(),
        });
    }
    let beta = q(1, 4) - delta;
    let alpha1 = q(1, 3) - delta;
    let alpha2 = q(1, 6) - delta;
    let gap_x = q(5, 4) * delta;
    let gap_y = q(4, 3) * delta;
    let row = |i: i64| q(i, 1) * (beta + gap_y);
    let column = |k: i64| alpha1 + q(k, 1) * gap_x + q(k - 1, 1) * alpha2;
    let mut maps = Vec::with_capacity(12);
    for i in 0..4 {
        maps.push(AffineMap::new(alpha1, beta, Scalar::zero(), row(i)));
    }
    for (k, rows) in [(1, [0, 1]), (2, [0, 1]), (3, [2, 3]), (4, [2, 3])] {
        for i in rows {
            maps.push(AffineMap::new(alpha2, beta, column(k), row(i)));
        }
    }
    DiagonalIfs::new(maps)
}

/// `columns` evenly spaced columns of width `rho1`, each holding `per_column`
/// evenly spaced maps of height `rho2`.
pub fn uniform_subsystem(columns: usize, per_column: usize, rho1: Scalar, rho2: Scalar) -> Result<DiagonalIfs> {
    let mut maps = Vec::new();
    let spacing = |count: usize, size: Scalar| -> Scalar {
        if count <= 1 {
            Scalar::zero()
        } else {
            (Scalar::one() - size) / q(count as i64 - 1, 1)
        }
    };
    let sx = spacing(columns, rho1);
    let sy = spacing(per_column, rho2);
    for c in 0..columns {
        for r in 0..per_column {
            maps.push(AffineMap::new(rho1, rho2, sx * q(c as i64, 1), sy * q(r as i64, 1)));
        }
    }
    DiagonalIfs::new(maps)
}

/// Split `total` into `parts + 1` random nonnegative gaps.
fn random_gaps(rng: &mut impl Rng, parts: usize, total: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..=parts).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s * total).collect()
}

/// A random Gatzouras–Lalley carpet with 1 to 4 columns of 1 to 4 maps each
/// (at least two maps overall).
pub fn random_gl(rng: &mut impl Rng) -> DiagonalIfs {
    loop {
        let ncols = rng.gen_range(1..=4);
        let mut widths: Vec<f64> = (0..ncols).map(|_| rng.gen_range(0.1..0.5)).collect();
        let total: f64 = widths.iter().sum();
        if total > 0.95 {
            for w in &mut widths {
                *w *= 0.95 / total;
            }
        }
        let gaps = random_gaps(rng, ncols, 1.0 - widths.iter().sum::<f64>());
        let mut maps = Vec::new();
        let mut x = gaps[0];
        for (c, &w) in widths.iter().enumerate() {
            let count = rng.gen_range(1..=4usize);
            let cap = (w * 0.95).min(0.95 / count as f64);
            let heights: Vec<f64> = (0..count).map(|_| rng.gen_range(0.2..1.0) * cap).collect();
            let vgaps = random_gaps(rng, count, 1.0 - heights.iter().sum::<f64>());
            let mut y = vgaps[0];
            for (k, &h) in heights.iter().enumerate() {
                maps.push(AffineMap::from_f64(w, h, x, y));
                y += h + vgaps[k + 1];
            }
            x += w + gaps[c + 1];
        }
        if maps.len() >= 2 {
            if let Ok(ifs) = DiagonalIfs::new(maps) {
                return ifs;
            }
        }
    }
}

/// A random Barański carpet: a random subset (at least two cells) of a grid
/// of 2 to 4 columns and 2 to 4 rows with random widths and heights. Grids
/// that happen to be Gatzouras–Lalley are redrawn.
pub fn random_baranski(rng: &mut impl Rng) -> DiagonalIfs {
    loop {
        let ncols = rng.gen_range(2..=4);
        let nrows = rng.gen_range(2..=4);
        let grid = |rng: &mut _, n: usize| -> Vec<(f64, f64)> {
            let sizes: Vec<f64> = (0..n).map(|_| Rng::gen_range(rng, 0.1..1.0)).collect();
            let s: f64 = sizes.iter().sum();
            let fill = Rng::gen_range(rng, 0.6..0.95);
            let sizes: Vec<f64> = sizes.iter().map(|v| v / s * fill).collect();
            let gaps = random_gaps(rng, n, 1.0 - fill);
            let mut at = gaps[0];
            sizes
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let here = at;
                    at += v + gaps[k + 1];
                    (here, v)
                })
                .collect()
        };
        let cols = grid(rng, ncols);
        let rows = grid(rng, nrows);
        let mut maps = Vec::new();
        for &(x, w) in &cols {
            for &(y, h) in &rows {
                if rng.gen_bool(0.5) {
                    maps.push(AffineMap::from_f64(w, h, x, y));
                }
            }
        }
        if maps.len() >= 2 {
            if let Ok(ifs) = DiagonalIfs::new(maps) {
                if ifs.classify().kind == CarpetKind::Baranski {
                    return ifs;
                }
            }
        }
    }
}
