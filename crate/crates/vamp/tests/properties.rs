//! Randomized invariants for the numeric kernels: metric axioms for the
//! histogram and contour distances, partition laws for the clusterer, and
//! scale behavior of the motion statistics.

use proptest::prelude::*;

use vamp::appearance::{emd_1d, hausdorff_directed, Channel, ColorHistogram};
use vamp::motion::{
    accelerations, acceleration_consistency, velocities, velocity_consistency, Normalization,
    Trajectory,
};
use vamp::sampling::{dbscan, Point2D};

fn histogram_strategy() -> impl Strategy<Value = ColorHistogram> {
    // up to 8 occupied bins, masses normalized to 1
    prop::collection::vec((0..256usize, 0.05f64..1.0), 1..=8).prop_map(|entries| {
        let mut bins = [0.0f64; 256];
        for &(b, m) in &entries {
            bins[b] += m;
        }
        let total: f64 = bins.iter().sum();
        for b in bins.iter_mut() {
            *b /= total;
        }
        ColorHistogram { bins, channel: Channel::R }
    })
}

fn hausdorff_symmetric(a: &[Point2D], b: &[Point2D]) -> Result<f64, vamp::appearance::AppearanceError> {
    Ok(hausdorff_directed(a, b)?.max(hausdorff_directed(b, a)?))
}

fn point_set_strategy(max: usize) -> impl Strategy<Value = Vec<Point2D>> {
    prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..=max)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point2D::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emd_is_a_bounded_metric(a in histogram_strategy(), b in histogram_strategy(), c in histogram_strategy()) {
        let dab = emd_1d(&a, &b).unwrap();
        let dba = emd_1d(&b, &a).unwrap();
        let daa = emd_1d(&a, &a).unwrap();
        let dac = emd_1d(&a, &c).unwrap();
        let dcb = emd_1d(&c, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&dab), "out of range: {dab}");
        prop_assert!((dab - dba).abs() < 1e-12, "asymmetric: {dab} vs {dba}");
        prop_assert!(daa.abs() < 1e-12, "self-distance {daa}");
        prop_assert!(dab <= dac + dcb + 1e-9, "triangle violated: {dab} > {dac} + {dcb}");
    }

    #[test]
    fn hausdorff_axioms(a in point_set_strategy(40), b in point_set_strategy(40), c in point_set_strategy(40)) {
        let h = hausdorff_symmetric(&a, &b).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert_eq!(h, hausdorff_symmetric(&b, &a).unwrap());
        prop_assert!(hausdorff_symmetric(&a, &a).unwrap() == 0.0);
        // directed distances never exceed the symmetric one
        prop_assert!(hausdorff_directed(&a, &b).unwrap() <= h);
        prop_assert!(hausdorff_directed(&b, &a).unwrap() <= h);
        let hac = hausdorff_symmetric(&a, &c).unwrap();
        let hcb = hausdorff_symmetric(&c, &b).unwrap();
        prop_assert!(h <= hac + hcb + 1e-9, "triangle violated: {} > {} + {}", h, hac, hcb);
    }

    #[test]
    fn hausdorff_translation_invariant(a in point_set_strategy(30), b in point_set_strategy(30),
                                       dx in -20.0f64..20.0, dy in -20.0f64..20.0) {
        let shift = |s: &[Point2D]| -> Vec<Point2D> {
            s.iter().map(|p| Point2D::new(p.x + dx, p.y + dy)).collect()
        };
        let h = hausdorff_symmetric(&a, &b).unwrap();
        let hs = hausdorff_symmetric(&shift(&a), &shift(&b)).unwrap();
        prop_assert!((h - hs).abs() < 1e-9, "{h} vs shifted {hs}");
    }

    #[test]
    fn dbscan_partitions_the_input(points in point_set_strategy(80),
                                   eps in 0.5f64..30.0, min_pts in 1usize..6) {
        let r = dbscan(&points, eps, min_pts).unwrap();
        let mut seen = vec![0usize; points.len()];
        for c in &r.clusters {
            prop_assert!(c.len() >= min_pts, "cluster smaller than min_pts");
            for &i in c {
                seen[i] += 1;
            }
        }
        for &i in &r.noise {
            seen[i] += 1;
        }
        prop_assert!(seen.iter().all(|&s| s == 1), "not a partition: {seen:?}");
    }

    #[test]
    fn dbscan_ignores_input_order(points in point_set_strategy(50), eps in 0.5f64..30.0) {
        let forward = dbscan(&points, eps, 3).unwrap();
        let mut reversed_points = points.clone();
        reversed_points.reverse();
        let reversed = dbscan(&reversed_points, eps, 3).unwrap();
        let n = points.len();
        let canon = |clusters: &[Vec<usize>], flip: bool| -> Vec<Vec<usize>> {
            let mut out: Vec<Vec<usize>> = clusters
                .iter()
                .map(|c| {
                    let mut c: Vec<usize> =
                        c.iter().map(|&i| if flip { n - 1 - i } else { i }).collect();
                    c.sort_unstable();
                    c
                })
                .collect();
            out.sort();
            out
        };
        prop_assert_eq!(canon(&forward.clusters, false), canon(&reversed.clusters, true));
    }

    #[test]
    fn speed_statistics_scale_invariant(steps in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..20),
                                        k in prop::sample::select(vec![0.25f64, 0.5, 2.0, 4.0])) {
        let mut pts = vec![Point2D::new(0.0, 0.0)];
        for (dx, dy) in &steps {
            let last = *pts.last().unwrap();
            pts.push(Point2D::new(last.x + dx, last.y + dy));
        }
        let traj = |p: Vec<Point2D>| Trajectory::new(p, Normalization::RawPixels, 1.0);
        let s0 = velocity_consistency(&velocities(&traj(pts.clone())).unwrap()).unwrap();
        let scaled: Vec<Point2D> = pts.iter().map(|p| Point2D::new(k * p.x, k * p.y)).collect();
        let s1 = velocity_consistency(&velocities(&traj(scaled)).unwrap()).unwrap();
        // k is a power of two, so the speed ratio is preserved exactly
        prop_assert!((s0 - s1).abs() < 1e-12, "{s0} vs {s1} at scale {k}");
    }

    #[test]
    fn consistency_scores_stay_in_unit_interval(speeds in prop::collection::vec(0.0f64..1000.0, 2..30)) {
        let sv = velocity_consistency(&speeds).unwrap();
        let sa = acceleration_consistency(&accelerations(&speeds).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&sv));
        prop_assert!((0.0..=1.0).contains(&sa));
    }

    #[test]
    fn acceleration_consistency_reversal_invariant(speeds in prop::collection::vec(0.0f64..100.0, 2..12)) {
        let a = accelerations(&speeds).unwrap();
        let mut rev = speeds.clone();
        rev.reverse();
        let ar = accelerations(&rev).unwrap();
        let fwd = acceleration_consistency(&a).unwrap();
        let bwd = acceleration_consistency(&ar).unwrap();
        // reversal negates every step difference, leaving the variance
        // unchanged up to summation order
        prop_assert!((fwd - bwd).abs() < 1e-12, "{fwd} vs {bwd}");
    }
}
