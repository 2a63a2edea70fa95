//! Matrix ensembles and Bernoulli erasure masks.
//!
//! All indices are zero-based: entry `(j, k)` of the DFT matrix is
//! `n^{-1/2} exp(-2πi jk/n)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Which unitary matrix gets restricted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Dft,
    Haar,
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ensemble::Dft => "dft",
            Ensemble::Haar => "haar",
        })
    }
}

impl FromStr for Ensemble {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dft" => Ok(Ensemble::Dft),
            "haar" => Ok(Ensemble::Haar),
            other => Err(format!("unknown ensemble `{other}` (expected dft or haar)")),
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Order-sensitive combination of two words through [`mix64`].
pub fn mix_pair(a: u64, b: u64) -> u64 {
    mix64(mix64(a) ^ b.rotate_left(32) ^ 0x6A09_E667_F3BC_C909)
}

/// Identifies one random stream: `master` seeds a ChaCha8 generator and
/// `stream` selects its stream counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RngSeed {
    pub master: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }

    /// Seed for a sub-draw of this one. `purpose` separates independent
    /// objects drawn for the same trial, `attempt` separates redraws.
    pub fn child(&self, purpose: u64, attempt: u64) -> RngSeed {
        RngSeed {
            master: mix_pair(mix_pair(self.master, self.stream), attempt),
            stream: purpose,
        }
    }
}

/// Standard complex normal (`E|z|^2 = 1`) via Box-Muller.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    // 1 - U lies in (0, 1], so the log is finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let radius = (-2.0 * u1.ln()).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
    let angle = 2.0 * PI * u2;
    C64::new(radius * angle.cos(), radius * angle.sin())
}

pub(crate) fn dft_entry(n: usize, j: usize, k: usize) -> C64 {
    // Reduce jk mod n first so the phase stays accurate for large n.
    let r = ((j as u128 * k as u128) % n as u128) as f64;
    let theta = -2.0 * PI * r / n as f64;
    C64::from_polar(1.0 / (n as f64).sqrt(), theta)
}

/// The unitary `n x n` DFT matrix.
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("DFT matrix needs n >= 1".into()));
    }
    Ok(ComplexMatrix::from_fn(n, n, |j, k| dft_entry(n, j, k)))
}

/// Haar-distributed `n x n` unitary.
///
/// QR of a complex Ginibre matrix, with column `j` of `Q` multiplied by the
/// phase of `R_jj` so that the triangular factor has a positive diagonal.
/// Without that correction the result depends on the QR sign convention and
/// is not Haar.
pub fn haar_sample(n: usize, seed: RngSeed) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("Haar sample needs n >= 1".into()));
    }
    let mut rng = seed.rng();
    let mut ginibre = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            ginibre[(j, k)] = complex_gaussian(&mut rng);
        }
    }
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { C64::new(1.0, 0.0) };
        for v in q.column_mut(j).iter_mut() {
            *v *= phase;
        }
    }
    Ok(q)
}

/// A realized erasure pattern: the surviving indices of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ProjectionMask {
    n: usize,
    kept: Vec<usize>,
}

impl ProjectionMask {
    /// Builds a mask from strictly increasing indices below `n`.
    pub fn from_indices(n: usize, kept: Vec<usize>) -> Result<Self> {
        if kept.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDimension(
                "mask indices must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = kept.last() {
            if last >= n {
                return Err(Error::InvalidDimension(format!(
                    "mask index {last} out of range for n = {n}"
                )));
            }
        }
        Ok(Self { n, kept })
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            kept: (0..n).collect(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    /// The mask selecting `inner` out of the indices this mask keeps.
    pub fn compose(&self, inner: &ProjectionMask) -> Result<ProjectionMask> {
        if inner.n != self.kept.len() {
            return Err(Error::MaskMismatch {
                mask: inner.n,
                matrix: self.kept.len(),
            });
        }
        Ok(ProjectionMask {
            n: self.n,
            kept: inner.kept.iter().map(|&i| self.kept[i]).collect(),
        })
    }
}

/// Keeps each index of `0..n` independently with probability `1 - erase_prob`.
pub fn bernoulli_mask(n: usize, erase_prob: f64, seed: RngSeed) -> Result<ProjectionMask> {
    if n == 0 {
        return Err(Error::InvalidDimension("mask needs n >= 1".into()));
    }
    if !(erase_prob > 0.0 && erase_prob < 1.0) {
        return Err(Error::param("erase_prob", erase_prob, "0 < erase_prob < 1"));
    }
    let mut rng = seed.rng();
    let kept = (0..n)
        .filter(|_| rng.random::<f64>() >= erase_prob)
        .collect();
    Ok(ProjectionMask { n, kept })
}

/// Submatrix on the kept rows and columns. An empty mask yields a matrix
/// with zero rows or columns; callers check `is_empty()`.
pub fn restrict(
    m: &ComplexMatrix,
    rows: &ProjectionMask,
    cols: &ProjectionMask,
) -> Result<ComplexMatrix> {
    if rows.n != m.nrows() {
        return Err(Error::MaskMismatch {
            mask: rows.n,
            matrix: m.nrows(),
        });
    }
    if cols.n != m.ncols() {
        return Err(Error::MaskMismatch {
            mask: cols.n,
            matrix: m.ncols(),
        });
    }
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |a, b| {
        m[(rows.kept[a], cols.kept[b])]
    }))
}

/// `restrict(dft_matrix(n), rows, cols)` without materializing the full matrix.
pub fn dft_restricted(rows: &ProjectionMask, cols: &ProjectionMask) -> Result<ComplexMatrix> {
    let n = rows.n;
    if n == 0 {
        return Err(Error::InvalidDimension("DFT matrix needs n >= 1".into()));
    }
    if cols.n != n {
        return Err(Error::MaskMismatch {
            mask: cols.n,
            matrix: n,
        });
    }
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |a, b| {
        dft_entry(n, rows.kept[a], cols.kept[b])
    }))
}

/// Largest entry modulus of `MᴴM - I`.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for j in 0..gram.nrows() {
        for k in 0..gram.ncols() {
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((gram[(j, k)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}
