mod common;

use kdsum::clustering::{cut, hac, Linkage};
use kdsum::evaluation::{ari, clustering_accuracy, contingency};
use kdsum::kernels::{eval_aitken, eval_epanechnikov, eval_gaussian, eval_wvr};
use kdsum::similarity::{build_matrix, SimilarityConfig};
use kdsum::{DissimilarityMatrix, KernelSelection};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn continuous_kernels_peak_at_zero(x in -50.0..50.0f64, y in -50.0..50.0f64, l in 1e-3..1e3f64) {
        let g = eval_gaussian(x, y, l).unwrap();
        prop_assert!(g >= 0.0 && g <= eval_gaussian(x, x, l).unwrap());
        prop_assert_eq!(g, eval_gaussian(y, x, l).unwrap());
        let e = eval_epanechnikov(x, y, l).unwrap();
        prop_assert!(e >= 0.0 && e <= eval_epanechnikov(x, x, l).unwrap());
    }

    #[test]
    fn categorical_kernels_within_unit_interval(a in 0u32..8, b in 0u32..8, l in 0.0..=1.0f64) {
        let k = eval_aitken(a, b, l).unwrap();
        prop_assert!((0.0..=1.0).contains(&k));
        let w = eval_wvr(a, b, l).unwrap();
        prop_assert!((0.0..=1.0).contains(&w));
        prop_assert!(w <= eval_wvr(a, a, l).unwrap());
    }

    #[test]
    fn kdsum_matrix_is_a_dissimilarity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = common::random_dataset(&mut rng, 20, 5);
        let bw = common::random_interior_bandwidths(&mut rng, &ds);
        let cfg = SimilarityConfig::new(&ds, KernelSelection::GAUSSIAN, bw).unwrap();
        let m = build_matrix(&ds, &cfg).unwrap();
        for i in 0..ds.n() {
            prop_assert_eq!(m.get(i, i), 0.0);
            for j in 0..ds.n() {
                prop_assert!(m.get(i, j) >= 0.0);
                prop_assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn ari_and_accuracy_bounds(labels in prop::collection::vec((0usize..4, 0usize..4), 2..60)) {
        let (t, p): (Vec<usize>, Vec<usize>) = labels.into_iter().unzip();
        let a = ari(&contingency(&t, &p).unwrap()).unwrap();
        prop_assert!((-1.0..=1.0).contains(&a));
        prop_assert_eq!(ari(&contingency(&t, &t).unwrap()).unwrap(), 1.0);
        let ca = clustering_accuracy(&t, &p).unwrap();
        prop_assert!(ca > 0.0 && ca <= 1.0);
        prop_assert_eq!(clustering_accuracy(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn cut_gives_requested_cluster_count(points in prop::collection::vec(-10.0..10.0f64, 2..25), k in 1usize..6) {
        let n = points.len();
        let dm = DissimilarityMatrix::from_fn(n, |i, j| (points[i] - points[j]).abs()).unwrap();
        let k = k.min(n);
        for linkage in Linkage::ALL {
            let dg = hac(&dm, linkage).unwrap();
            prop_assert_eq!(dg.merges.len(), n - 1);
            let labels = cut(&dg, k).unwrap();
            prop_assert_eq!(labels.k(), k);
            prop_assert_eq!(labels.as_slice()[0], 0);
        }
    }
}
