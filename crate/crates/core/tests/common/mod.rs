#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use seqzap_core::{generate_problem, GramInverse, ProblemSpec, SparseProblem};

/// Gauss-Jordan inverse with partial pivoting, written against plain
/// row-major vectors so it shares nothing with the incremental update.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p != 0.0, "singular matrix");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            let f = row[col];
            if r != col && f != 0.0 {
                row.iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `A Aᵀ` for rows given as plain vectors.
pub fn gram_of(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|ri| {
            rows.iter()
                .map(|rj| ri.iter().zip(rj).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect()
}

pub fn rel_frobenius(approx: &DMatrix<f64>, exact: &[Vec<f64>]) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (i, row) in exact.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            diff += (approx[(i, j)] - e).powi(2);
            norm += e * e;
        }
    }
    (diff / norm).sqrt()
}

/// Draws `m` rows from a seeded problem and returns the Gram state and observations.
pub fn seeded_system(
    n: usize,
    k: usize,
    m: usize,
    seed: u64,
) -> (SparseProblem, GramInverse, DVector<f64>) {
    let mut p = generate_problem(ProblemSpec::new(n, k, seed)).unwrap();
    let mut g = GramInverse::new(n).unwrap();
    let mut ys = Vec::with_capacity(m);
    for _ in 0..m {
        let (a, y) = p.next_measurement();
        g.append_row(&a).unwrap();
        ys.push(y);
    }
    (p, g, DVector::from_vec(ys))
}
