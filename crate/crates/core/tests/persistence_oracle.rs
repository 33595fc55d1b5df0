mod support;

use proptest::prelude::*;
use rand::Rng;
use swtest_core::geometry::{hausdorff, pairwise_distances};
use swtest_core::persistence::{bottleneck_distance, rips_persistence};
use swtest_core::rng::rng_from_seed;
use swtest_core::{CloudTag, FiltrationSpec, PointCloud};

use support::oracle::{diagram_pairs, naive_rips_pairs};

fn random_cloud(n: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = rng_from_seed(seed);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    PointCloud::from_points(&pts, CloudTag::Raw).unwrap()
}

#[test]
fn square_matches_oracle() {
    let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
    let dm = pairwise_distances(&PointCloud::from_points(&pts, CloudTag::Raw).unwrap()).unwrap();
    let expected = vec![
        (0, 0.0, 1.0),
        (0, 0.0, 1.0),
        (0, 0.0, 1.0),
        (0, 0.0, f64::INFINITY),
        (1, 1.0, 2f64.sqrt()),
    ];
    assert_eq!(naive_rips_pairs(&dm), expected);
    assert_eq!(diagram_pairs(&rips_persistence(&dm, &FiltrationSpec::full(1))), expected);
}

#[test]
fn matches_oracle_on_integer_grids_with_ties() {
    // many equal edge lengths stress tie handling
    for seed in 0..60 {
        let mut rng = rng_from_seed(1000 + seed);
        let n = rng.random_range(3..=8);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(0..3) as f64, rng.random_range(0..3) as f64])
            .collect();
        let dm = pairwise_distances(&PointCloud::from_points(&pts, CloudTag::Raw).unwrap()).unwrap();
        assert_eq!(
            diagram_pairs(&rips_persistence(&dm, &FiltrationSpec::full(1))),
            naive_rips_pairs(&dm),
            "cloud {pts:?}"
        );
    }
}

#[test]
fn matches_oracle_on_a_noisy_circle() {
    let mut rng = rng_from_seed(77);
    let pts: Vec<Vec<f64>> = (0..14)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 14.0 + rng.random_range(-0.1..0.1);
            vec![a.cos(), a.sin(), rng.random_range(-0.05..0.05)]
        })
        .collect();
    let dm = pairwise_distances(&PointCloud::from_points(&pts, CloudTag::Raw).unwrap()).unwrap();
    let fast = diagram_pairs(&rips_persistence(&dm, &FiltrationSpec::full(1)));
    assert_eq!(fast, naive_rips_pairs(&dm));
    assert!(fast.iter().any(|p| p.0 == 1 && p.2 - p.1 > 0.5));
}

#[test]
fn h0_count_equals_point_count() {
    for seed in 0..20 {
        let c = random_cloud(5 + seed as usize, 3, seed);
        let d = rips_persistence(&pairwise_distances(&c).unwrap(), &FiltrationSpec::full(1));
        assert_eq!(d.in_dim(0).count(), c.len());
    }
}

#[test]
fn raising_threshold_keeps_early_loops() {
    for seed in 0..20 {
        let c = random_cloud(15, 2, 300 + seed);
        let dm = pairwise_distances(&c).unwrap();
        let low = rips_persistence(&dm, &FiltrationSpec::with_threshold(1, 0.6).unwrap());
        let high = rips_persistence(&dm, &FiltrationSpec::with_threshold(1, 0.9).unwrap());
        for p in low.in_dim(1).filter(|p| !p.is_essential()) {
            assert!(high.in_dim(1).any(|q| q == p), "lost {p:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn random_clouds_match_oracle(n in 1usize..=7, dim in 1usize..=4, seed in any::<u64>()) {
        let c = random_cloud(n, dim, seed);
        let dm = pairwise_distances(&c).unwrap();
        prop_assert_eq!(
            diagram_pairs(&rips_persistence(&dm, &FiltrationSpec::full(1))),
            naive_rips_pairs(&dm)
        );
    }

    #[test]
    fn bottleneck_stability(n in 4usize..=12, seed in any::<u64>(), eps in 0.001f64..0.2) {
        let x = random_cloud(n, 2, seed);
        let mut rng = rng_from_seed(seed ^ 0x5555);
        let moved: Vec<f64> = x
            .coords()
            .iter()
            .map(|v| v + rng.random_range(-eps..eps) / 2f64.sqrt())
            .collect();
        let y = PointCloud::new(2, moved, CloudTag::Raw).unwrap();
        let dh = hausdorff(&x, &y).unwrap();
        let spec = FiltrationSpec::full(1);
        let dx = rips_persistence(&pairwise_distances(&x).unwrap(), &spec);
        let dy = rips_persistence(&pairwise_distances(&y).unwrap(), &spec);
        for dim in [0u8, 1] {
            prop_assert!(bottleneck_distance(&dx, &dy, dim) <= 2.0 * dh + 1e-12);
        }
    }

    #[test]
    fn hausdorff_is_a_metric(seed in any::<u64>()) {
        let a = random_cloud(5, 2, seed);
        let b = random_cloud(6, 2, seed.wrapping_add(1));
        let c = random_cloud(4, 2, seed.wrapping_add(2));
        let ab = hausdorff(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff(&b, &a).unwrap());
        prop_assert!(ab > 0.0);
        prop_assert!(ab <= hausdorff(&a, &c).unwrap() + hausdorff(&c, &b).unwrap() + 1e-12);
        let union_diam = {
            let mut all = a.coords().to_vec();
            all.extend_from_slice(b.coords());
            pairwise_distances(&PointCloud::new(2, all, CloudTag::Raw).unwrap()).unwrap().max_distance()
        };
        prop_assert!(ab <= union_diam);
    }
}
