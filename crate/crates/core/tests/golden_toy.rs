mod common;

use std::f64::consts::PI;

use kdsum::bandwidth::mscv_objective;
use kdsum::similarity::{build_matrix, psi, SimilarityConfig};
use kdsum::{BandwidthVector, BoundsConfig, KernelSelection, TypedDataset};

// Direct transcription of the kernel definitions, independent of the library.
fn gauss(delta: f64, lambda: f64) -> f64 {
    (-(delta * delta) / (2.0 * lambda * lambda)).exp() / (2.0 * PI).sqrt()
}

fn aitken(a: u32, b: u32, lambda: f64) -> f64 {
    if a == b {
        1.0
    } else {
        lambda
    }
}

fn wvr(a: u32, b: u32, lambda: f64) -> f64 {
    if a == b {
        1.0 - lambda
    } else {
        0.5 * (1.0 - lambda) * lambda.powi((a as i32 - b as i32).abs())
    }
}

// toy rows as (continuous, unordered, ordered)
const ROWS: [(f64, u32, u32); 5] = [
    (1.5, 1, 3),
    (1.5, 1, 3),
    (1.5, 0, 0),
    (0.0, 1, 0),
    (0.0, 0, 3),
];

fn oracle_psi(i: usize, j: usize, l: [f64; 3]) -> f64 {
    let (a, b) = (ROWS[i], ROWS[j]);
    gauss(a.0 - b.0, l[0]) / l[0] + aitken(a.1, b.1, l[1]) + wvr(a.2, b.2, l[2])
}

fn oracle_d(i: usize, j: usize, l: [f64; 3]) -> f64 {
    oracle_psi(i, i, l) + oracle_psi(j, j, l) - 2.0 * oracle_psi(i, j, l)
}

fn config(ds: &TypedDataset, l: [f64; 3]) -> SimilarityConfig {
    let bw = BandwidthVector::new(l.to_vec(), ds, &BoundsConfig::default()).unwrap();
    SimilarityConfig::new(ds, KernelSelection::GAUSSIAN, bw).unwrap()
}

fn assert_matches_oracle(l: [f64; 3]) {
    let ds = common::toy();
    let cfg = config(&ds, l);
    let m = build_matrix(&ds, &cfg).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let expected = oracle_d(i, j, l);
            let got = m.get(i, j);
            assert!(
                (got - expected).abs() <= 1e-9 * expected.abs().max(1.0),
                "d({i},{j}) at {l:?}: {got} vs {expected}"
            );
            let p = psi(ds.row(i), ds.row(j), &cfg).unwrap();
            assert!((p - oracle_psi(i, j, l)).abs() <= 1e-12 * p.abs().max(1.0));
        }
    }
}

#[test]
fn matrices_match_direct_formula() {
    assert_matches_oracle([0.01, 0.0, 0.0]);
    assert_matches_oracle([10.0, 1.0, 1.0]);
    assert_matches_oracle([1.027, 0.591, 4.94e-32]);
    assert_matches_oracle([0.7, 0.3, 0.6]);
}

#[test]
fn hand_values_case_one() {
    // continuous mismatch: 2 * (1 / (sqrt(2 pi) 0.01)) for rows 1.5 vs 0.0
    let ds = common::toy();
    let m = build_matrix(&ds, &config(&ds, [0.01, 0.0, 0.0])).unwrap();
    let c0 = 1.0 / ((2.0 * PI).sqrt() * 0.01);
    assert!((m.get(0, 2) - 4.0).abs() < 1e-12);
    assert!((m.get(0, 3) - (2.0 * c0 + 2.0)).abs() < 1e-9);
    assert!((m.get(0, 3) - 81.788).abs() < 5e-4);
    assert_eq!(m.get(0, 1), 0.0);
}

#[test]
fn hand_values_case_two() {
    let ds = common::toy();
    let m = build_matrix(&ds, &config(&ds, [10.0, 1.0, 1.0])).unwrap();
    // categorical terms vanish at the upper bounds; only the wide Gaussian remains
    let expected = 2.0 * (1.0 - (-(1.5f64 * 1.5) / 200.0).exp()) / ((2.0 * PI).sqrt() * 10.0);
    assert!((m.get(0, 3) - expected).abs() < 1e-15);
    assert!((m.get(0, 3) - 0.001).abs() < 5e-4);
    assert_eq!(m.get(0, 2), 0.0);
}

#[test]
fn objective_matches_leave_one_out_sum() {
    let ds = common::toy();
    for l in [[0.5, 0.2, 0.4], [2.0, 0.9, 0.1], [1.027, 0.591, 0.3]] {
        let bw = BandwidthVector::new(l.to_vec(), &ds, &BoundsConfig::default()).unwrap();
        let got = mscv_objective(&ds, &bw, KernelSelection::GAUSSIAN).unwrap();
        let expected: f64 = (0..5)
            .map(|i| {
                ((0..5)
                    .filter(|&j| j != i)
                    .map(|j| oracle_psi(i, j, l))
                    .sum::<f64>()
                    / 4.0)
                    .ln()
            })
            .sum();
        assert!((got - expected).abs() < 1e-10, "{l:?}: {got} vs {expected}");
    }
}
