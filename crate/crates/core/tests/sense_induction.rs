mod oracle;

use densem::senses::{
    agglomerative_cluster, collect_contexts, context2dm, contextual2dm, reduce_dimensions,
    ContextMode, ContextSet, KBounds, ReduceMethod, Reducer,
};
use densem::WordVectors;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// `per_group` noisy copies of each of `centers`; returns points and their group labels.
fn planted(
    rng: &mut ChaCha8Rng,
    centers: &[Vec<f64>],
    per_group: usize,
    noise: f64,
) -> (Vec<DVector<f64>>, Vec<usize>) {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (g, c) in centers.iter().enumerate() {
        for _ in 0..per_group {
            points.push(DVector::from_iterator(
                c.len(),
                c.iter().map(|x| x + noise * rng.random_range(-1.0..1.0)),
            ));
            labels.push(g);
        }
    }
    (points, labels)
}

fn orthogonal_centers(rng: &mut ChaCha8Rng, k: usize, d: usize) -> Vec<Vec<f64>> {
    let q = oracle::random_orthogonal(rng, d);
    (0..k)
        .map(|j| q.iter().map(|row| row[j]).collect())
        .collect()
}

fn assert_recovers(points: &[DVector<f64>], labels: &[usize], k: usize) {
    let r = agglomerative_cluster(points, KBounds::default()).unwrap();
    assert_eq!(r.k, k);
    assert_eq!(
        r.clusters.iter().map(|c| c.size).sum::<usize>(),
        points.len()
    );
    for c in &r.clusters {
        let group = labels[c.members[0]];
        assert!(
            c.members.iter().all(|&m| labels[m] == group),
            "cluster mixes groups"
        );
        let mean = c
            .members
            .iter()
            .fold(DVector::zeros(points[0].len()), |acc, &m| acc + &points[m])
            / c.size as f64;
        assert!((&c.centroid - mean).norm() < 1e-12);
    }
}

#[test]
fn two_planted_groups_give_two_clusters() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let centers = orthogonal_centers(&mut rng, 2, 6);
    let (points, labels) = planted(&mut rng, &centers, 5, 0.05);
    assert_recovers(&points, &labels, 2);
}

#[test]
fn three_planted_groups_give_three_clusters() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = orthogonal_centers(&mut rng, 3, 8);
        let (points, labels) = planted(&mut rng, &centers, 4, 0.05);
        assert_recovers(&points, &labels, 3);
    }
}

#[test]
fn planted_two_sense_context_set_is_mixed() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let centers = orthogonal_centers(&mut rng, 2, 10);
    let (instances, _) = planted(&mut rng, &centers, 15, 0.1);
    let dm = context2dm(
        &ContextSet {
            word: "w".into(),
            instances,
        },
        KBounds::default(),
    )
    .unwrap();
    assert!(dm.entropy() > 0.3, "entropy {}", dm.entropy());
}

#[test]
fn two_orthogonal_equal_clusters_give_ln_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let centers = orthogonal_centers(&mut rng, 2, 5);
    let (instances, _) = planted(&mut rng, &centers, 3, 0.0);
    let dm = context2dm(
        &ContextSet {
            word: "w".into(),
            instances,
        },
        KBounds::default(),
    )
    .unwrap();
    assert!((dm.entropy() - 2f64.ln()).abs() <= 1e-10);
}

#[test]
fn context_types_enumerate_window_neighbours() {
    let mut wv = WordVectors::new(2);
    for (w, v) in [
        ("a", [1.0, 0.0]),
        ("b", [0.0, 1.0]),
        ("c", [1.0, 1.0]),
        ("d", [2.0, 1.0]),
    ] {
        wv.insert(w, &v);
    }
    let sentences: Vec<Vec<String>> = ["a b a c", "d d c", "b a d"]
        .iter()
        .map(|s| s.split(' ').map(str::to_string).collect())
        .collect();
    for window in 1..=4 {
        let mut expected = std::collections::BTreeSet::new();
        for s in &sentences {
            for (i, w) in s.iter().enumerate() {
                if w == "a" {
                    for (j, other) in s.iter().enumerate() {
                        if j != i && i.abs_diff(j) <= window {
                            expected.insert(other.clone());
                        }
                    }
                }
            }
        }
        let ctx = collect_contexts(&sentences, &wv, "a", window, ContextMode::Types).unwrap();
        let got: std::collections::BTreeSet<Vec<u64>> = ctx
            .instances
            .iter()
            .map(|v| v.iter().map(|x| x.to_bits()).collect())
            .collect();
        let want: std::collections::BTreeSet<Vec<u64>> = expected
            .iter()
            .map(|w| wv.get(w).unwrap().iter().map(|x| x.to_bits()).collect())
            .collect();
        assert_eq!(got, want, "window {window}");
    }
    assert!(collect_contexts(&sentences, &wv, "zzz", 2, ContextMode::Types).is_err());
}

/// Covariance eigenvectors from the Jacobi oracle with the same sign rule.
fn oracle_pca(x: &[Vec<f64>], d_out: usize) -> Vec<Vec<f64>> {
    let (n, d) = (x.len(), x[0].len());
    let mean: Vec<f64> = (0..d)
        .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let xc: oracle::Mat = x
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(a, m)| a - m).collect())
        .collect();
    let cov = oracle::matmul(&oracle::transpose(&xc), &xc);
    let (vals, vecs) = oracle::jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let axes: Vec<Vec<f64>> = order[..d_out]
        .iter()
        .map(|&j| {
            let axis: Vec<f64> = vecs.iter().map(|row| row[j]).collect();
            let lead = (0..d).fold(0, |best, i| {
                if axis[i].abs() > axis[best].abs() {
                    i
                } else {
                    best
                }
            });
            if axis[lead] < 0.0 {
                axis.iter().map(|x| -x).collect()
            } else {
                axis
            }
        })
        .collect();
    xc.iter()
        .map(|r| {
            axes.iter()
                .map(|a| r.iter().zip(a).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect()
}

#[test]
fn pca_matches_covariance_eigenvectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x: Vec<Vec<f64>> = (0..20)
        .map(|_| oracle::random_vector(&mut rng, 16))
        .collect();
    let instances: Vec<DVector<f64>> = x.iter().map(|r| DVector::from_column_slice(r)).collect();
    let got = reduce_dimensions(&instances, ReduceMethod::Pca, 4).unwrap();
    let want = oracle_pca(&x, 4);
    for (g, w) in got.iter().zip(&want) {
        for (a, b) in g.iter().zip(w) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn full_rank_reduction_preserves_inner_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (n, d, r) = (12, 10, 4);
    let basis: Vec<Vec<f64>> = (0..r).map(|_| oracle::random_vector(&mut rng, d)).collect();
    let instances: Vec<DVector<f64>> = (0..n)
        .map(|_| {
            let coef = oracle::random_vector(&mut rng, r);
            DVector::from_fn(d, |j, _| (0..r).map(|k| coef[k] * basis[k][j]).sum())
        })
        .collect();
    let reduced = reduce_dimensions(&instances, ReduceMethod::Svd, r).unwrap();
    for i in 0..n {
        for j in 0..n {
            assert!((instances[i].dot(&instances[j]) - reduced[i].dot(&reduced[j])).abs() <= 1e-8);
        }
    }
    let mean = instances.iter().fold(DVector::zeros(d), |a, v| a + v) / n as f64;
    let reduced = reduce_dimensions(&instances, ReduceMethod::Pca, r).unwrap();
    for i in 0..n {
        for j in 0..n {
            let want = (&instances[i] - &mean).dot(&(&instances[j] - &mean));
            assert!((want - reduced[i].dot(&reduced[j])).abs() <= 1e-8);
        }
    }
}

#[test]
fn line_through_origin_reconstructs_from_one_component() {
    let v = DVector::from_vec(vec![0.6, -0.8, 0.0]);
    let instances: Vec<DVector<f64>> = [-2.0, 0.5, 1.0, 3.0].iter().map(|t| &v * *t).collect();
    for method in [ReduceMethod::Pca, ReduceMethod::Svd] {
        let reducer = Reducer::fit(&instances, method, 1).unwrap();
        assert!((reducer.axes.column(0).abs() - v.abs()).norm() <= 1e-12);
        assert!(
            reducer.axes[(1, 0)] > 0.0,
            "largest-magnitude component is positive"
        );
        for x in &instances {
            let r = reducer.transform(x).unwrap();
            assert!((&reducer.mean + &reducer.axes * r - x).norm() <= 1e-10);
        }
    }
}

#[test]
fn contextual_modes_give_a_mixed_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let centers: Vec<Vec<f64>> = (0..2)
        .map(|_| unit(oracle::random_vector(&mut rng, 16)))
        .collect();
    let (instances, _) = planted(&mut rng, &centers, 25, 0.05);
    let dm = contextual2dm(&instances, ReduceMethod::Svd, 4).unwrap();
    let big = dm.eigen().eigenvalues.iter().filter(|&&l| l > 0.1).count();
    assert!(big >= 2, "{:?}", dm.eigen().eigenvalues);
}

#[test]
fn contextual_orthogonal_pair_has_ln_two() {
    let instances = vec![
        DVector::from_vec(vec![1.0, 0.0, 0.0]),
        DVector::from_vec(vec![0.0, 2.0, 0.0]),
    ];
    let dm = contextual2dm(&instances, ReduceMethod::Svd, 2).unwrap();
    assert!((dm.entropy() - 2f64.ln()).abs() <= 1e-10);
    let one = contextual2dm(&instances[..1], ReduceMethod::Svd, 1).unwrap();
    assert!(one.entropy() <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clustering_respects_bounds_and_ignores_order(seed in any::<u64>(), n in 2usize..30, lo in 1usize..4, span in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<DVector<f64>> = (0..n).map(|_| DVector::from_vec(oracle::random_vector(&mut rng, 5))).collect();
        let bounds = KBounds { min: lo, max: lo + span };
        let r = agglomerative_cluster(&points, bounds).unwrap();
        prop_assert!(r.k >= bounds.min.min(n) && r.k <= bounds.max);
        prop_assert!(r.clusters.iter().all(|c| c.size >= 1));
        prop_assert_eq!(r.clusters.iter().map(|c| c.size).sum::<usize>(), n);

        let dm = context2dm(&ContextSet { word: "w".into(), instances: points.clone() }, bounds).unwrap();
        let mut shuffled = points.clone();
        shuffled.shuffle(&mut rng);
        let r2 = agglomerative_cluster(&shuffled, bounds).unwrap();
        prop_assert_eq!(r.k, r2.k);
        prop_assert_eq!(&r.merge_distances, &r2.merge_distances);
        let dm2 = context2dm(&ContextSet { word: "w".into(), instances: shuffled }, bounds).unwrap();
        prop_assert!((dm.as_matrix() - dm2.as_matrix()).amax() <= 1e-10);

        let o = oracle::from_dmatrix(dm.as_matrix());
        prop_assert!(oracle::max_asymmetry(&o) <= 1e-10);
        prop_assert!(oracle::min_eigenvalue(&o) >= -1e-8);
        prop_assert!((oracle::trace(&o) - 1.0).abs() <= 1e-12);
    }
}
