mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{as_bars, bottleneck_within, kruskal, naive_barcode, random_int_matrix, random_real_matrix, sort_bars};
use relu_atlas::persistence::barcodes;
use relu_atlas::DistanceMatrix;

#[test]
fn optimized_reduction_matches_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let n = rng.random_range(1..=10);
        let d = random_int_matrix(&mut rng, n, 5);
        let got = as_bars(&barcodes(&d, 2, None).unwrap());
        let want = naive_barcode(&d, 2, None);
        assert_eq!(got, want, "case {case}, n = {n}");
    }
}

#[test]
fn truncated_filtrations_match_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..40 {
        let n = rng.random_range(2..=9);
        let d = random_int_matrix(&mut rng, n, 6);
        let t = f64::from(rng.random_range(1..=6));
        let got = as_bars(&barcodes(&d, 1, Some(t)).unwrap());
        assert_eq!(got, naive_barcode(&d, 1, Some(t)), "case {case}, t = {t}");
    }
}

#[test]
fn h0_deaths_are_mst_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..50 {
        let n = rng.random_range(2..=30);
        let d = if case % 2 == 0 { random_int_matrix(&mut rng, n, 9) } else { random_real_matrix(&mut rng, n) };
        let b = barcodes(&d, 0, None).unwrap();
        let mut deaths: Vec<f64> = b.dim(0).iter().filter_map(|iv| iv.death).collect();
        deaths.sort_by(f64::total_cmp);
        let (mst, components) = kruskal(&d, d.max_finite());
        assert_eq!(deaths, mst, "case {case}");
        assert_eq!(b.dim(0).iter().filter(|iv| iv.is_infinite()).count(), components);
    }
}

#[test]
fn infinite_h0_bars_count_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..30 {
        let n = rng.random_range(2..=25);
        let d = random_real_matrix(&mut rng, n);
        let t: f64 = rng.random_range(0.0..0.5);
        let b = barcodes(&d, 0, Some(t)).unwrap();
        let (mst, components) = kruskal(&d, t);
        assert_eq!(b.dim(0).iter().filter(|iv| iv.is_infinite()).count(), components);
        let mut deaths: Vec<f64> = b.dim(0).iter().filter_map(|iv| iv.death).collect();
        deaths.sort_by(f64::total_cmp);
        assert_eq!(deaths, mst);
    }
}

#[test]
fn infinite_entries_never_connect() {
    let inf = f64::INFINITY;
    let d = DistanceMatrix::from_square(3, vec![0.0, 1.0, inf, 1.0, 0.0, inf, inf, inf, 0.0]).unwrap();
    let b = barcodes(&d, 1, None).unwrap();
    assert_eq!(b.dim(0).iter().filter(|iv| iv.is_infinite()).count(), 2);
    assert_eq!(as_bars(&b), naive_barcode(&d, 1, None));
}

#[test]
fn scaling_scales_every_endpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..30 {
        let n = rng.random_range(2..=9);
        let d = random_real_matrix(&mut rng, n);
        let lambda: f64 = rng.random_range(0.1..10.0);
        let base = barcodes(&d, 2, None).unwrap();
        let scaled = barcodes(&d.scaled(lambda).unwrap(), 2, None).unwrap();
        for dim in 0..=2 {
            let want: Vec<(f64, Option<f64>)> =
                base.dim(dim).iter().map(|iv| (iv.birth * lambda, iv.death.map(|x| x * lambda))).collect();
            let got: Vec<(f64, Option<f64>)> = scaled.dim(dim).iter().map(|iv| (iv.birth, iv.death)).collect();
            assert_eq!(got, want, "dim {dim}, lambda {lambda}");
        }
    }
}

fn perturbed(rng: &mut impl Rng, d: &DistanceMatrix, eps: f64) -> DistanceMatrix {
    let n = d.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let v = (d.get(i, j) + rng.random_range(-eps..=eps)).max(0.0);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    DistanceMatrix::from_square(n, data).unwrap()
}

#[test]
fn small_perturbations_move_bars_little() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let eps = 0.02;
    for case in 0..40 {
        let n = rng.random_range(3..=9);
        let d = random_real_matrix(&mut rng, n);
        let e = perturbed(&mut rng, &d, eps);
        let (a, b) = (barcodes(&d, 1, None).unwrap(), barcodes(&e, 1, None).unwrap());
        for dim in 0..=1 {
            let finite = |bars: &[relu_atlas::Interval]| -> Vec<(f64, f64)> {
                bars.iter().filter_map(|iv| iv.death.map(|x| (iv.birth, x))).collect()
            };
            assert!(
                bottleneck_within(&finite(a.dim(dim)), &finite(b.dim(dim)), eps + 1e-12),
                "case {case} dim {dim}"
            );
            let mut births_a: Vec<(f64, Option<f64>)> =
                a.dim(dim).iter().filter(|iv| iv.is_infinite()).map(|iv| (iv.birth, None)).collect();
            let mut births_b: Vec<(f64, Option<f64>)> =
                b.dim(dim).iter().filter(|iv| iv.is_infinite()).map(|iv| (iv.birth, None)).collect();
            sort_bars(&mut births_a);
            sort_bars(&mut births_b);
            assert_eq!(births_a.len(), births_b.len());
            for (x, y) in births_a.iter().zip(&births_b) {
                assert!((x.0 - y.0).abs() <= eps + 1e-12);
            }
        }
    }
}

#[test]
fn bottleneck_helper_sanity() {
    assert!(bottleneck_within(&[(0.0, 1.0)], &[(0.04, 1.04)], 0.05));
    assert!(!bottleneck_within(&[(0.0, 1.0)], &[(0.2, 1.0)], 0.1));
    assert!(bottleneck_within(&[(0.0, 0.1)], &[], 0.05));
    assert!(!bottleneck_within(&[(0.0, 1.0)], &[], 0.4));
}
