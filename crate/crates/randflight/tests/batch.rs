//! Batch-level properties of the parallel simulator.

use randflight::batch::simulate_batch_par;
use randflight::stats::{chi_square, histogram, ks_test};
use randflight_core::flight::{FlightParams, Model};
use randflight_core::SeriesControl;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let ctl = SeriesControl::default();
    for (model, d) in [(Model::X, 4), (Model::Y, 5), (Model::U3, 3)] {
        let p = FlightParams::new(model, d, 1.5, 2.0, 0.7).unwrap();
        let one = in_pool(1, || simulate_batch_par(&p, 20_001, 3, &ctl).unwrap());
        let many = in_pool(7, || simulate_batch_par(&p, 20_001, 3, &ctl).unwrap());
        assert_eq!(one, many);
        let other_seed = simulate_batch_par(&p, 20_001, 4, &ctl).unwrap();
        assert_ne!(one.positions, other_seed.positions);
    }
}

#[test]
fn batches_respect_the_support() {
    let ctl = SeriesControl::default();
    for (model, d) in [(Model::X, 2), (Model::X, 6), (Model::Y, 3), (Model::Y, 6), (Model::U3, 3)] {
        let p = FlightParams::new(model, d, 2.0, 3.0, 1.3).unwrap();
        let b = simulate_batch_par(&p, 50_000, 11, &ctl).unwrap();
        let worst = b.radii().fold(0.0f64, f64::max) / (2.0 * 1.3);
        assert!(worst <= 1.0 + 1e-12, "{model:?} d={d}: {worst}");
    }
}

#[test]
fn coordinates_are_exchangeable() {
    // every coordinate has the same law as the first one
    let ctl = SeriesControl::default();
    let p = FlightParams::new(Model::X, 3, 1.0, 1.0, 1.0).unwrap();
    let b = simulate_batch_par(&p, 60_000, 5, &ctl).unwrap();
    let mut x1: Vec<f64> = b.rows().map(|r| r[0]).collect();
    x1.sort_by(f64::total_cmp);
    let n = x1.len() as f64;
    let ecdf = |v: f64| x1.partition_point(|x| *x <= v) as f64 / n;
    for j in 1..3 {
        let xj: Vec<f64> = b.rows().map(|r| r[j]).collect();
        // two-sample comparison at significance 0.01 (critical D for equal sizes)
        let d = ks_test(&xj, ecdf).unwrap().statistic;
        assert!(d < 1.628 * (2.0 / n).sqrt(), "coordinate {j}: D = {d}");
    }
    let edges: Vec<f64> = (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect();
    let h1 = histogram(b.rows().map(|r| r[0]), &edges);
    let h3 = histogram(b.rows().map(|r| r[2]), &edges);
    let expected: Vec<f64> = h1.iter().zip(&h3).map(|(a, c)| 0.5 * (a + c) as f64).collect();
    let both: Vec<u64> = h1.iter().chain(&h3).copied().collect();
    let e2: Vec<f64> = expected.iter().chain(&expected).copied().collect();
    // homogeneity of two samples: (2 - 1)(bins - 1) degrees of freedom
    let chi = chi_square(&both, &e2, edges.len() - 1).unwrap();
    assert_eq!(chi.dof, edges.len() - 2);
    assert!(chi.passes(0.01), "{chi:?}");
}

#[test]
fn k_histogram_matches_count_law() {
    let ctl = SeriesControl::default();
    for (model, d) in [(Model::X, 3), (Model::Y, 4)] {
        let p = FlightParams::new(model, d, 1.0, 2.0, 1.0).unwrap();
        let n = 200_000;
        let b = simulate_batch_par(&p, n, 17, &ctl).unwrap();
        let dist = p.count_distribution(&ctl).unwrap();
        let mut obs = Vec::new();
        let mut exp = Vec::new();
        let mut tail = 1.0;
        let mut k = 0;
        while n as f64 * dist.pmf(k) >= 5.0 && n as f64 * (tail - dist.pmf(k)) >= 5.0 {
            obs.push(b.k_values.iter().filter(|x| **x == k).count() as u64);
            exp.push(n as f64 * dist.pmf(k));
            tail -= dist.pmf(k);
            k += 1;
        }
        obs.push(b.k_values.iter().filter(|x| **x >= k).count() as u64);
        exp.push(n as f64 * tail);
        let chi = chi_square(&obs, &exp, 0).unwrap();
        assert!(chi.passes(0.01), "{model:?} d={d}: {chi:?}");
    }
}
