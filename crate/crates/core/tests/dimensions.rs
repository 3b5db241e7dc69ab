use carpet_core::dims::{self, gl_hausdorff, moran_dimension, split_value};
use carpet_core::instances::{gl_example, random_baranski, random_gl};
use carpet_core::optimize::random_simplex_point;
use carpet_core::oracle::{self, BUDGET};
use carpet_core::{Axis, Symbolic};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ordering_on_random_instances(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ifs = if seed % 2 == 0 { random_gl(&mut rng) } else { random_baranski(&mut rng) };
        let r = dims::dimensions(&ifs, 1e-10).unwrap();
        prop_assert!(r.dim_l <= r.dim_h + 1e-9);
        prop_assert!(r.dim_h <= r.dim_b + 1e-9);
        prop_assert!(r.dim_b <= r.dim_a + 1e-9);
    }

    #[test]
    fn moran_residual_and_monotonicity(ratios in prop::collection::vec(0.05f64..0.3, 2..5), extra in 0.05f64..0.2, scale in 0.5f64..0.99) {
        let s = moran_dimension(&ratios, TOL).unwrap();
        prop_assert!(s.residual.abs() <= 1e-10);
        let mut more = ratios.clone();
        more.push(extra);
        if more.iter().sum::<f64>() < 1.0 {
            prop_assert!(moran_dimension(&more, TOL).unwrap().root > s.root);
        }
        let smaller: Vec<f64> = ratios.iter().map(|r| r * scale).collect();
        prop_assert!(moran_dimension(&smaller, TOL).unwrap().root < s.root);
    }

    #[test]
    fn baranski_branch_agrees_on_gl(seed in any::<u64>()) {
        let ifs = random_gl(&mut ChaCha8Rng::seed_from_u64(seed));
        let gl = dims::dimensions(&ifs, 1e-10).unwrap();
        let bar = dims::baranski_dims(&ifs, 1e-10).unwrap();
        prop_assert!((gl.dim_h - bar.dim_h).abs() < 1e-8, "{} vs {}", gl.dim_h, bar.dim_h);
        prop_assert!((gl.dim_b - bar.dim_b).abs() < 1e-8);
        prop_assert!((gl.dim_a - bar.dim_a).abs() < 1e-8);
        prop_assert!((gl.dim_l - bar.dim_l).abs() < 1e-8);
    }
}

#[test]
fn hausdorff_maximiser_is_interior_and_unbeaten() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for ifs in [gl_example(), random_gl(&mut rng), random_gl(&mut rng)] {
        let m = gl_hausdorff(&ifs, 1e-10).unwrap();
        assert!(m.p.min() > 0.0);
        for _ in 0..1000 {
            let p = random_simplex_point(ifs.len(), &mut rng);
            assert!(split_value(&ifs, Axis::Horizontal, &p).unwrap() <= m.value + 1e-7);
        }
    }
}

#[test]
fn baranski_box_dimension_matches_box_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 3 {
        let ifs = random_baranski(&mut rng);
        if ifs.len() > 5 {
            continue;
        }
        let dim_b = dims::baranski_dims(&ifs, 1e-10).unwrap().dim_b;
        let deltas: Vec<f64> = (4..=9).map(|k| 0.5f64.powi(k)).collect();
        let reg = oracle::regression(&oracle::box_count_series(&ifs, &deltas, BUDGET).unwrap()).unwrap();
        assert!(reg.agrees_with(dim_b, 0.1), "slope {:?} vs {dim_b}", reg);
        checked += 1;
    }
}

#[test]
fn disc_packing_sums_are_bounded() {
    // Sections of the square tree below a node of size R carry
    // Σ ρ^α ≤ C R^α for α above the Assouad dimension.
    let ifs = gl_example();
    let sym = Symbolic::new(&ifs).unwrap();
    let alpha = dims::gl_assouad_lower(&ifs, TOL).unwrap().dim_a + 0.05;
    let mut worst = 0.0f64;
    for letters in [vec![0usize], vec![1], vec![2], vec![0, 2], vec![2, 2], vec![1, 0, 2]] {
        let gamma = carpet_core::SequenceSpec::periodic(letters, vec![0]);
        for k in 0..3 {
            let q = sym.approximate_square(&gamma, k).unwrap();
            let pc = q.pseudo_cylinder();
            for j in 1..6 {
                let r = q.rho * 0.5f64.powi(j);
                let section = sym.section_at_scale(r, BUDGET).unwrap();
                let sum: f64 = section
                    .squares
                    .iter()
                    .filter(|s| sym.pseudo_cylinder_contains(&pc, &s.pseudo_cylinder()))
                    .map(|s| s.rho.powf(alpha))
                    .sum();
                worst = worst.max(sum / q.rho.powf(alpha));
            }
        }
    }
    assert!(worst < 20.0, "{worst}");
}
