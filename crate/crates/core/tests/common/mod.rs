#![allow(dead_code, clippy::needless_range_loop)]

use erasure_spectra::{ComplexMatrix, LawParams, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a Hermitian matrix, descending, by cyclic Jacobi on the
/// real symmetric embedding `[[A, -B], [B, A]]` of `H = A + iB`. Every
/// eigenvalue of `H` appears twice in the embedding.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut a = vec![vec![0.0f64; m]; m];
    for j in 0..n {
        for k in 0..n {
            let z = h[(j, k)];
            a[j][k] = z.re;
            a[j + n][k + n] = z.re;
            a[j][k + n] = -z.im;
            a[j + n][k] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut diag: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    diag.sort_by(|x, y| y.total_cmp(x));
    diag.into_iter().step_by(2).collect()
}

pub fn gram(m: &ComplexMatrix) -> ComplexMatrix {
    m * m.adjoint()
}

pub fn frobenius_sq(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Deterministic parameter pairs in `(lo, hi)²`.
pub fn random_pairs(count: usize, seed: u64, lo: f64, hi: f64) -> Vec<LawParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p = rng.random_range(lo..hi);
            let q = rng.random_range(lo..hi);
            LawParams::new(p, q).unwrap()
        })
        .collect()
}

/// Pairs on a chosen side of `p + q = 1`.
pub fn pairs_by_side(count: usize, seed: u64, below_one: bool) -> Vec<LawParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let p: f64 = rng.random_range(0.02..0.98);
        let q: f64 = rng.random_range(0.02..0.98);
        if (p + q < 1.0) == below_one && (p + q - 1.0).abs() > 1e-3 {
            out.push(LawParams::new(p, q).unwrap());
        }
    }
    out
}

pub fn grid_pairs() -> Vec<LawParams> {
    let vals = [0.1, 0.3, 0.5, 0.7, 0.9];
    vals.iter()
        .flat_map(|&p| vals.iter().map(move |&q| LawParams::new(p, q).unwrap()))
        .collect()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
