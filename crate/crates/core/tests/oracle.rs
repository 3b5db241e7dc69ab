use carpet_core::dims;
use carpet_core::instances::{gl_example, product_carpet, random_baranski, random_gl};
use carpet_core::oracle::*;
use carpet_core::{DiagonalIfs, SequenceSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> DiagonalIfs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed.is_multiple_of(2) {
        random_gl(&mut rng)
    } else {
        random_baranski(&mut rng)
    }
}

fn count(ifs: &DiagonalIfs, delta: f64) -> u64 {
    box_count(ifs, delta, depth_for_diameter(ifs, delta / 2.0), BUDGET).unwrap()
}

/// Largest fitted exponent of `local_count` over families `r = R 2^-j`.
fn steepest(ifs: &DiagonalIfs, gamma: &SequenceSpec, radii: &[i32]) -> f64 {
    radii
        .iter()
        .map(|&i| {
            let big_r = 0.5f64.powi(i);
            let pts: Vec<(f64, f64)> = (1..=8)
                .map(|j| {
                    let r = big_r * 0.5f64.powi(j);
                    (
                        (big_r / r).ln(),
                        (local_count(ifs, gamma, big_r, r, BUDGET).unwrap() as f64).ln(),
                    )
                })
                .collect();
            regression(&pts).unwrap().slope
        })
        .fold(f64::MIN, f64::max)
}

fn cloud() -> impl Strategy<Value = PointCloud> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..40).prop_map(|p| PointCloud::new(p, 0.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn box_counts_shrink_with_scale(seed in any::<u64>()) {
        let ifs = instance(seed);
        let mut last = 0;
        for k in 1..=6 {
            let delta = 0.5f64.powi(k);
            let n = count(&ifs, delta);
            prop_assert!(n >= last);
            prop_assert!(n as f64 <= (2.0 / delta).powi(2));
            last = n;
        }
    }

    #[test]
    fn local_counts_stay_below_box_counts(seed in any::<u64>(), letter in 0usize..64, k in 2i32..6, radius in 0usize..4) {
        let ifs = instance(seed);
        let delta = 0.5f64.powi(k);
        let big_r = [delta, 0.1, 0.4, 2.0][radius].max(delta);
        let gamma = SequenceSpec::constant(letter % ifs.len());
        let local = local_count(&ifs, &gamma, big_r, delta, BUDGET).unwrap();
        prop_assert!(local <= count(&ifs, delta));
        let single = local_count(&ifs, &gamma, delta, delta, BUDGET).unwrap();
        prop_assert!((1..=16).contains(&single));
    }

    #[test]
    fn hausdorff_distance_is_a_metric(a in cloud(), b in cloud(), c in cloud()) {
        let ab = hausdorff_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        prop_assert!(ab <= hausdorff_distance(&a, &c).unwrap() + hausdorff_distance(&c, &b).unwrap() + 1e-12);
        if ab == 0.0 {
            prop_assert!(one_sided_distance(&a, &b).unwrap() == 0.0 && one_sided_distance(&b, &a).unwrap() == 0.0);
        }
    }

    #[test]
    fn one_sided_distance_matches_a_direct_scan(a in cloud(), b in cloud()) {
        let direct = a
            .points
            .iter()
            .map(|p| b.points.iter().map(|q| (p.0 - q.0).hypot(p.1 - q.1)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        prop_assert_eq!(one_sided_distance(&a, &b).unwrap(), direct);
    }
}

#[test]
fn empty_clouds_are_rejected() {
    assert!(PointCloud::new(vec![], 0.1).is_err());
}

#[test]
fn local_exponent_at_the_max_column_is_the_assouad_dimension() {
    let ifs = gl_example();
    let dim_a = dims::gl_assouad_lower(&ifs, 1e-12).unwrap().dim_a;
    let s = steepest(&ifs, &SequenceSpec::constant(0), &[8, 10]);
    assert!((s - dim_a).abs() <= 0.1, "{s} vs {dim_a}");
}

#[test]
fn local_exponents_reach_the_box_dimension() {
    let ifs = gl_example();
    let dim_b = dims::gl_box_dims(&ifs, 1e-12).unwrap().dim_b.root;
    for gamma in [
        SequenceSpec::constant(1),
        SequenceSpec::constant(2),
        SequenceSpec::periodic(vec![], vec![0, 2]),
        SequenceSpec::periodic(vec![2, 2], vec![1, 2, 2]),
    ] {
        let s = steepest(&ifs, &gamma, &[2, 4, 6]);
        assert!(s >= dim_b - 0.1, "{gamma}: {s} vs {dim_b}");
    }
}

#[test]
fn product_carpet_tangents_fill_the_square() {
    let ifs = product_carpet();
    let grid: Vec<(f64, f64)> = (0..=16)
        .flat_map(|i| (0..=16).map(move |j| (i as f64 / 16.0, j as f64 / 16.0)))
        .collect();
    let square = PointCloud::new(grid, 1.0 / 16.0).unwrap();
    for n in 0..4 {
        let t = tangent_approx(&ifs, &SequenceSpec::constant(3), n, 1.0 / 16.0, BUDGET).unwrap();
        let p = product_approx(&ifs, &SequenceSpec::constant(3), n, 1.0 / 16.0, BUDGET).unwrap();
        assert!(hausdorff_distance(&t, &square).unwrap() <= 1.0 / 8.0);
        assert!(hausdorff_distance(&p, &square).unwrap() <= 1.0 / 8.0);
    }
}

#[test]
fn product_lies_near_the_tangent() {
    // p_H(product; tangent) ≲ κⁿ with κ = 1/2.
    let ifs = gl_example();
    for letter in 0..3 {
        let gamma = SequenceSpec::constant(letter);
        for n in 1..5 {
            let res = 0.5f64.powi(n) / 8.0;
            let t = tangent_approx(&ifs, &gamma, n as usize, res, BUDGET).unwrap();
            let p = product_approx(&ifs, &gamma, n as usize, res, BUDGET).unwrap();
            assert!(one_sided_distance(&p, &t).unwrap() <= 0.5f64.powi(n));
        }
    }
}

#[test]
fn tangents_need_dominated_maps() {
    let ifs = carpet_core::instances::baranski_example(carpet_core::Scalar::from_ratio(1, 40)).unwrap();
    assert!(tangent_approx(&ifs, &SequenceSpec::constant(0), 2, 0.1, BUDGET).is_err());
}
