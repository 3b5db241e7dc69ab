//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 2 and 8 are known to fail: the quoted supremum values disagree
//! with the displayed profile functions, and the tangent distances decay
//! at rate κ² on the reference carpet. The run exits nonzero when the set
//! of failing criteria differs from that list.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use carpet_core::dims::{self, moran_dimension, ReducedProfile};
use carpet_core::instances::{self, baranski_example, gl_example};
use carpet_core::oracle::{self, BUDGET};
use carpet_core::{Axis, CarpetError, NonAutoFibre, Scalar, SequenceSpec, Symbolic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_RED: &[u32] = &[2, 8];
const TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn moran() -> Outcome {
    let (r, dt) = timed(|| moran_dimension(&[1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], TOL).unwrap());
    let err = (r.root - 0.72263).abs();
    check(
        err <= 5e-5 && dt < Duration::from_millis(1),
        format!("s = {:.8}, |s - 0.72263| = {err:.2e}, {dt:?}", r.root),
    )
}

fn reduced_profiles() -> Outcome {
    let ((d1, d2, p0), dt) = timed(|| {
        let ifs = baranski_example(Scalar::zero()).unwrap();
        let prof = ReducedProfile::new(&ifs).unwrap();
        let d1 = prof.sup(Axis::Horizontal, 0.0, 1.0).unwrap();
        let d2 = prof.sup(Axis::Vertical, 0.0, 1.0).unwrap();
        (d1, d2, prof.p0().unwrap())
    });
    let sups = (d1.1 - 0.489536).abs() <= 1e-4 && (d2.1 - 0.529533).abs() <= 1e-4;
    let argmax = p0 < d2.0 && d2.0 < 1.0;
    check(
        sups && argmax && dt < Duration::from_secs(1),
        format!(
            "sup D1 = {:.6} (want 0.489536), sup D2 = {:.6} (want 0.529533), argmax D2 = {:.6} in (p0 = {p0:.6}, 1): {argmax}, {dt:?}",
            d1.1, d2.1, d2.0
        ),
    )
}

fn counterexample() -> Outcome {
    let ifs = baranski_example(Scalar::from_ratio(1, 40)).unwrap();
    let r = dims::baranski_dims(&ifs, 1e-10).unwrap();
    let h = r.direction(Axis::Horizontal).unwrap();
    let v = r.direction(Axis::Vertical).unwrap();
    let d1 = h.d.as_ref().map_or(f64::NEG_INFINITY, |m| m.value);
    let d2 = v.d.as_ref().map_or(f64::NEG_INFINITY, |m| m.value);
    let (a1, a2) = (h.assouad_candidate, v.assouad_candidate);
    check(
        d2 - d1 > 1e-3 && a1 - a2 > 1e-3,
        format!("d1 = {d1:.10} < d2 = {d2:.10}; dim_B eta1 + t1 = {a1:.9} > dim_B eta2 + t2 = {a2:.9}"),
    )
}

fn random_fibre(rng: &mut ChaCha8Rng) -> NonAutoFibre {
    let components: Vec<Vec<f64>> = (0..rng.gen_range(2..=3))
        .map(|_| {
            let n = rng.gen_range(1..=3);
            let mut left = 0.95;
            (0..n)
                .map(|_| {
                    let r = rng.gen_range(0.05..0.45f64).min(left / 1.5);
                    left -= r;
                    r
                })
                .collect()
        })
        .collect();
    let c = components.len();
    let pre: Vec<usize> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..c)).collect();
    let period: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..c)).collect();
    NonAutoFibre::new(components, &SequenceSpec::periodic(pre, period)).unwrap()
}

fn theta_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut fibres = vec![NonAutoFibre::from_carpet(
        &gl_example(),
        Axis::Horizontal,
        &SequenceSpec::periodic(vec![2], vec![0, 1, 2]),
    )
    .unwrap()];
    fibres.extend((0..4).map(|_| random_fibre(&mut rng)));
    let (mut samples, mut violations, mut compared, mut worst_gap) = (0, 0, 0, 0.0f64);
    for (i, f) in fibres.iter().enumerate() {
        let triples = f.sample_triples(40, 12, 100 + i as u64);
        let report = f.check_theta_properties(&triples, TOL).unwrap();
        samples += report.samples;
        violations += report.submax_violations;
        for t in &triples {
            for (n, m) in [(t.n, t.m), (t.n, t.m + t.k)] {
                match f.theta_bruteforce(n, m, TOL) {
                    Ok(b) => {
                        worst_gap = worst_gap.max((b - f.theta(n, m, TOL).unwrap()).abs());
                        compared += 1;
                    }
                    Err(CarpetError::TooLarge { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
    check(
        samples == 200 && violations == 0 && worst_gap <= 1e-10,
        format!("{samples} samples, {violations} submaximality violations, {compared} brute-force checks, max gap {worst_gap:.2e}"),
    )
}

fn ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    for kind in ["GL", "Baranski"] {
        for i in 0..100 {
            let ifs = if kind == "GL" {
                instances::random_gl(&mut rng)
            } else {
                instances::random_baranski(&mut rng)
            };
            let r = dims::dimensions(&ifs, 1e-10).unwrap();
            if !(r.dim_l <= r.dim_h + 1e-9 && r.dim_h <= r.dim_b + 1e-9 && r.dim_b <= r.dim_a + 1e-9) {
                bad.push(format!("{kind} #{i}"));
            }
        }
    }
    let mut spread = 0.0f64;
    for (cols, per, r1, r2) in [
        (2, 2, (1, 3), (1, 4)),
        (3, 2, (1, 4), (1, 5)),
        (2, 3, (1, 3), (1, 6)),
        (1, 2, (1, 2), (1, 4)),
    ] {
        let ifs = instances::uniform_subsystem(
            cols,
            per,
            Scalar::from_ratio(r1.0, r1.1),
            Scalar::from_ratio(r2.0, r2.1),
        )
        .unwrap();
        let r = dims::dimensions(&ifs, 1e-12).unwrap();
        let v = [r.dim_l, r.dim_h, r.dim_b, r.dim_a];
        spread = spread.max(v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min));
    }
    check(
        bad.is_empty() && spread <= 1e-9,
        format!(
            "100 GL + 100 Barański instances, {} out of order {:?}; uniform subsystems spread {spread:.2e}",
            bad.len(),
            bad
        ),
    )
}

fn pointwise() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut carpets = vec![gl_example()];
    while carpets.len() < 6 {
        let ifs = instances::random_gl(&mut rng);
        if ifs.classify().ssc(Axis::Horizontal) {
            carpets.push(ifs);
        }
    }
    let (mut worst, mut worst_max) = (0.0f64, 0.0f64);
    let mut checked = 0;
    for ifs in &carpets {
        let sym = Symbolic::new(ifs).unwrap();
        let boxes = dims::gl_box_dims(ifs, TOL).unwrap();
        let dim_a = dims::gl_assouad_lower(ifs, TOL).unwrap().dim_a;
        let cols = ifs.column_structure(Axis::Horizontal);
        for c in 0..cols.num_classes() {
            let letter = cols.members(c)[0];
            let pw = sym.pointwise_assouad(&SequenceSpec::constant(letter), 64, TOL).unwrap();
            let t = moran_dimension(cols.orthogonal_ratios(c), TOL).unwrap().root;
            let expected = boxes.dim_b.root.max(boxes.dim_b_proj.root + t);
            worst = worst.max((pw.value - expected).abs());
            checked += 1;
        }
        let top = (0..cols.num_classes())
            .map(|c| {
                sym.pointwise_assouad(&SequenceSpec::constant(cols.members(c)[0]), 64, TOL)
                    .unwrap()
                    .value
            })
            .fold(f64::MIN, f64::max);
        worst_max = worst_max.max((top - dim_a).abs());
    }
    check(
        worst <= 1e-9 && worst_max <= 1e-9,
        format!("{checked} constant-column points on {} carpets, max deviation {worst:.2e}, max column vs dim_A {worst_max:.2e}", carpets.len()),
    )
}

fn box_slope() -> Outcome {
    let ifs = gl_example();
    let target = dims::gl_box_dims(&ifs, TOL).unwrap().dim_b.root;
    let (reg, dt) = timed(|| {
        let deltas: Vec<f64> = (4..=9).map(|k| 0.5f64.powi(k)).collect();
        oracle::regression(&oracle::box_count_series(&ifs, &deltas, BUDGET).unwrap()).unwrap()
    });
    check(
        reg.agrees_with(target, 0.05) && dt < Duration::from_secs(60),
        format!(
            "slope {:.4}, 95% CI [{:.4}, {:.4}] vs dim_B {target:.6}, {dt:?}",
            reg.slope, reg.ci95.0, reg.ci95.1
        ),
    )
}

fn tangent_rate() -> Outcome {
    let ifs = gl_example();
    let kappa = ifs
        .maps()
        .iter()
        .map(|m| m.ratio(Axis::Vertical) / m.ratio(Axis::Horizontal))
        .fold(0.0, f64::max);
    let gamma = SequenceSpec::constant(1);
    let (pts, dt) = timed(|| {
        (2..=6)
            .map(|n| {
                let res = kappa.powi(n) / 5.0;
                let t = oracle::tangent_approx(&ifs, &gamma, n as usize, res, BUDGET).unwrap();
                let p = oracle::product_approx(&ifs, &gamma, n as usize, res, BUDGET).unwrap();
                (n as f64, oracle::one_sided_distance(&p, &t).unwrap().ln())
            })
            .collect::<Vec<_>>()
    });
    let reg = oracle::regression(&pts).unwrap();
    let rate = reg.slope.exp();
    let off = (reg.slope - kappa.ln()).abs() / kappa.ln().abs();
    check(
        off <= 0.25 && dt < Duration::from_secs(120),
        format!(
            "gamma = 1^inf, fitted rate {rate:.4} vs kappa = {kappa}, log-rate off by {:.0}%, {dt:?}",
            off * 100.0
        ),
    )
}

fn target_sequences() -> Outcome {
    let ifs = gl_example();
    let sym = Symbolic::new(&ifs).unwrap();
    let boxes = dims::gl_box_dims(&ifs, TOL).unwrap();
    let dim_a = dims::gl_assouad_lower(&ifs, TOL).unwrap().dim_a;
    let mut parts = Vec::new();
    let mut pass = true;
    for q in [0.25, 0.5, 0.75] {
        let alpha = boxes.dim_b.root + q * (dim_a - boxes.dim_b.root);
        let (value, dt) = timed(|| {
            let t = sym.sequence_for_target(alpha, 4, TOL).unwrap();
            let fibre = NonAutoFibre::from_carpet(&ifs, Axis::Horizontal, &t.spec).unwrap();
            boxes.dim_b_proj.root + fibre.fibre_assouad(8192, TOL).unwrap().estimate
        });
        let err = (value - alpha).abs();
        pass &= err <= 0.02 && dt < Duration::from_secs(30);
        parts.push(format!("q = {q}: |{value:.5} - {alpha:.5}| = {err:.2e} ({dt:?})"));
    }
    check(pass, parts.join("; "))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "Moran solver", moran),
        (2, "reduced profiles at delta = 0", reduced_profiles),
        (3, "counterexample hypothesis at delta = 1/40", counterexample),
        (4, "theta properties", theta_properties),
        (5, "dimension ordering", ordering),
        (6, "pointwise formula", pointwise),
        (7, "box-count slope", box_slope),
        (8, "tangent-product rate", tangent_rate),
        (9, "target sequences", target_sequences),
    ];
    let mut red = Vec::new();
    for (id, name, run) in criteria {
        let o = run();
        println!(
            "criterion {id} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            red.push(id);
        }
    }
    if red == KNOWN_RED {
        println!("failing criteria {red:?} match the documented list");
        ExitCode::SUCCESS
    } else {
        println!("failing criteria {red:?} differ from the documented list {KNOWN_RED:?}");
        ExitCode::FAILURE
    }
}
