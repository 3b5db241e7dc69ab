use carpet_core::instances::{random_baranski, random_gl};
use carpet_core::{Axis, CarpetKind, DiagonalIfs};
use proptest::prelude::*;
use rand::seq::SliceRandom;
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classification_ignores_map_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let ifs = instance(seed);
        let mut order: Vec<usize> = (0..ifs.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let permuted = ifs.permuted(&order).unwrap();
        prop_assert_eq!(ifs.classify(), permuted.classify());
    }

    #[test]
    fn gl_maps_are_strictly_wider(seed in any::<u64>()) {
        let ifs = instance(seed);
        if ifs.classify().kind == CarpetKind::GatzourasLalley {
            let gap = ifs.maps().iter().map(|m| m.ratio(Axis::Horizontal) - m.ratio(Axis::Vertical)).fold(f64::INFINITY, f64::min);
            prop_assert!(gap > 0.0);
        }
    }

    #[test]
    fn column_classes_partition_the_maps(seed in any::<u64>()) {
        let ifs = instance(seed);
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let cols = ifs.column_structure(axis);
            let mut all: Vec<usize> = cols.classes.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..ifs.len()).collect::<Vec<_>>());
            for c in 0..cols.num_classes() {
                for &i in cols.members(c) {
                    prop_assert_eq!(cols.class_of(i), c);
                }
            }
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let ifs = instance(seed);
        prop_assert_eq!(DiagonalIfs::from_json(&ifs.to_json()).unwrap(), ifs);
    }
}
