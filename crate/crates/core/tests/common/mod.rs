#![allow(dead_code)]

use kdsum::{BandwidthVector, BoundsConfig, Column, TypedDataset, VariableSchema};
use rand::{Rng, RngCore};

/// The five-row mixed matrix used throughout the toy example.
pub fn toy() -> TypedDataset {
    TypedDataset::from_columns(
        vec![
            VariableSchema::continuous("c"),
            VariableSchema::unordered("u", 2),
            VariableSchema::ordered("o", 4),
        ],
        vec![
            Column::Continuous(vec![1.5, 1.5, 1.5, 0.0, 0.0]),
            Column::Categorical(vec![1, 1, 0, 1, 0]),
            Column::Categorical(vec![3, 3, 0, 0, 3]),
        ],
    )
    .unwrap()
}

/// Random mixed dataset with `1 <= p <= max_p` variables and `2 <= n <= max_n`
/// rows. Continuous values sit on a 0.5 grid and a few rows are copies, so
/// ties and identical rows occur.
pub fn random_dataset(rng: &mut impl RngCore, max_n: usize, max_p: usize) -> TypedDataset {
    let n = rng.random_range(2..=max_n);
    let p = rng.random_range(1..=max_p);
    let p_c = rng.random_range(0..=p);
    let p_u = rng.random_range(0..=p - p_c);
    let p_o = p - p_c - p_u;
    random_dataset_with(rng, n, p_c, p_u, p_o)
}

pub fn random_dataset_with(
    rng: &mut impl RngCore,
    n: usize,
    p_c: usize,
    p_u: usize,
    p_o: usize,
) -> TypedDataset {
    let mut schema = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut codes: Vec<(u32, Vec<u32>)> = Vec::new();
    for k in 0..p_c {
        schema.push(VariableSchema::continuous(format!("c{k}")));
        cols.push(
            (0..n)
                .map(|_| (rng.random_range(-6.0..6.0f64) * 2.0).round() / 2.0)
                .collect(),
        );
    }
    for k in 0..p_u + p_o {
        let g = rng.random_range(2..=5u32);
        schema.push(if k < p_u {
            VariableSchema::unordered(format!("u{k}"), g)
        } else {
            VariableSchema::ordered(format!("o{k}"), g)
        });
        codes.push((g, (0..n).map(|_| rng.random_range(0..g)).collect()));
    }
    // copy a few rows over others
    for _ in 0..n / 4 {
        let (src, dst) = (rng.random_range(0..n), rng.random_range(0..n));
        for c in &mut cols {
            c[dst] = c[src];
        }
        for (_, c) in &mut codes {
            c[dst] = c[src];
        }
    }
    let columns = cols
        .into_iter()
        .map(Column::Continuous)
        .chain(codes.into_iter().map(|(_, c)| Column::Categorical(c)))
        .collect();
    TypedDataset::from_columns(schema, columns).unwrap()
}

/// Bandwidths strictly inside their admissible ranges: continuous
/// log-uniform on [0.05, 20], categorical uniform on [0.01, 0.99].
pub fn random_interior_bandwidths(rng: &mut impl RngCore, ds: &TypedDataset) -> BandwidthVector {
    let values = (0..ds.p())
        .map(|k| {
            if k < ds.p_c() {
                10f64.powf(rng.random_range(0.05f64.log10()..20f64.log10()))
            } else {
                rng.random_range(0.01..0.99)
            }
        })
        .collect();
    BandwidthVector::new(values, ds, &BoundsConfig::default()).unwrap()
}

pub fn rows_equal(ds: &TypedDataset, i: usize, j: usize) -> bool {
    ds.row(i) == ds.row(j)
}
