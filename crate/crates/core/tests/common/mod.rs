//! Independent oracles and random instance generators shared by the
//! integration suites. Nothing here calls the code path it is used to check.
#![allow(dead_code)]

use graphon_opinion::{Partition, PiecewiseFn, StepGraphon};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `exp(A)` by scaling and squaring with a 30-term Taylor series.
pub fn expm_taylor(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm: f64 = a.iter().map(|v| v.abs()).sum();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(squarings);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Cut norm by enumerating every pair of group subsets `(S, T)` and summing
/// `b_jk ℓ_j ℓ_k` over `S × T` directly.
pub fn cut_norm_full(g: &StepGraphon) -> f64 {
    let n = g.groups();
    let l = g.partition().lengths();
    let mut best: f64 = 0.0;
    for s in 0u32..(1 << n) {
        for t in 0u32..(1 << n) {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    if s >> j & 1 == 1 && t >> k & 1 == 1 {
                        acc += g.blocks()[(j, k)] * l[j] * l[k];
                    }
                }
            }
            best = best.max(acc.abs());
        }
    }
    best
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// 3×3 Laplacian of the couplings, built entry by entry.
pub fn laplacian3(a12: f64, a13: f64, a23: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[a12 + a13, -a12, -a13, -a12, a12 + a23, -a23, -a13, -a23, a13 + a23])
}

/// Smaller non-trivial Laplacian eigenvalue: the Laplacian restricted to the
/// complement of the constant vector, diagonalised numerically.
pub fn lambda3_numeric(a12: f64, a13: f64, a23: f64) -> f64 {
    let q = DMatrix::from_row_slice(
        3,
        2,
        &[
            1.0 / 2f64.sqrt(),
            1.0 / 6f64.sqrt(),
            -1.0 / 2f64.sqrt(),
            1.0 / 6f64.sqrt(),
            0.0,
            -2.0 / 6f64.sqrt(),
        ],
    );
    let r = q.transpose() * laplacian3(a12, a13, a23) * q;
    sym_eigenvalues(&r)[0]
}

/// Random partition with `n` groups of random length.
pub fn random_partition(rng: &mut impl Rng, n: usize) -> Partition {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut breaks = vec![0.0];
    let mut acc = 0.0;
    for x in &w[..n - 1] {
        acc += x / total;
        breaks.push(acc);
    }
    breaks.push(1.0);
    Partition::new(breaks).unwrap()
}

/// Random partition whose breakpoints are multiples of `1/denominator`.
pub fn random_grid_partition(rng: &mut impl Rng, n: usize, denominator: usize) -> Partition {
    let mut cuts: Vec<usize> = Vec::new();
    while cuts.len() < n - 1 {
        let c = rng.random_range(1..denominator);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort();
    let mut breaks = vec![0.0];
    breaks.extend(cuts.iter().map(|&c| c as f64 / denominator as f64));
    breaks.push(1.0);
    Partition::new(breaks).unwrap()
}

/// Symmetric blocks uniform in `[-k, k]`.
pub fn random_blocks(rng: &mut impl Rng, n: usize, k: f64) -> DMatrix<f64> {
    let raw: Vec<f64> = (0..n * n).map(|_| rng.random_range(-k..=k)).collect();
    DMatrix::from_fn(n, n, |i, j| raw[i.min(j) * n + i.max(j)])
}

pub fn random_graphon(rng: &mut impl Rng, p: Partition, k: f64) -> StepGraphon {
    let n = p.len();
    let b = random_blocks(rng, n, k);
    StepGraphon::new(p, b, k).unwrap()
}

pub fn random_step_fn(rng: &mut impl Rng, cells: usize) -> PiecewiseFn {
    PiecewiseFn::uniform((0..cells).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Root-mean-square deviation from the group mean over agents `range`,
/// normalised by `M` (the L² norm of the embedded residual).
pub fn dispersion(u: &[f64], range: std::ops::Range<usize>) -> f64 {
    let m = u.len() as f64;
    let slice = &u[range];
    let mean = slice.iter().sum::<f64>() / slice.len() as f64;
    (slice.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m).sqrt()
}

/// Least-squares slope of `ys` against `xs`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
