//! Singular values of restricted unitaries.

use crate::error::{Error, Result};
use crate::mats::{bernoulli_mask, dft_restricted, haar_sample, restrict, ComplexMatrix, Ensemble, ProjectionMask, RngSeed};
use crate::theory::LawParams;

/// Squared singular values may leave `[0, 1]` by at most this much before
/// clamping; anything larger is reported as a numerical failure.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

/// Redraws allowed when a mask comes out empty.
pub const MAX_MASK_RETRIES: u32 = 64;

pub(crate) const PURPOSE_MATRIX: u64 = 0;
pub(crate) const PURPOSE_ROWS: u64 = 1;
pub(crate) const PURPOSE_COLS: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    /// Eigenvalues of `U_ΩT U_ΩTᴴ`.
    Eigen,
    /// Their square roots.
    Singular,
}

/// Spectrum of one restricted matrix, sorted descending.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectralSample {
    pub ambient_n: usize,
    pub rows_kept: usize,
    pub cols_kept: usize,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    /// How many times the masks were redrawn because one came out empty.
    pub retries: u32,
}

/// Singular values of `m` in descending order; empty for a matrix with no
/// rows or no columns.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut values: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Squares singular values of a restricted unitary into `[0, 1]`.
pub(crate) fn clamp_squares(singular: &[f64]) -> Result<Vec<f64>> {
    singular
        .iter()
        .map(|&s| {
            let v = s * s;
            if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&v) {
                return Err(Error::ClampViolation {
                    value: v,
                    tolerance: CLAMP_TOLERANCE,
                });
            }
            Ok(v.clamp(0.0, 1.0))
        })
        .collect()
}

/// Eigenvalues of `M_ΩT M_ΩTᴴ` for already-drawn masks. Rows follow `rows`
/// (erased with probability `q`), columns follow `cols` (erased with `p`).
pub fn masked_spectrum(
    ensemble: Ensemble,
    rows: &ProjectionMask,
    cols: &ProjectionMask,
    matrix_seed: RngSeed,
) -> Result<Vec<f64>> {
    let sub = match ensemble {
        Ensemble::Dft => dft_restricted(rows, cols)?,
        Ensemble::Haar => {
            let u = haar_sample(rows.ambient(), matrix_seed)?;
            restrict(&u, rows, cols)?
        }
    };
    clamp_squares(&singular_values(&sub))
}

/// One Monte Carlo draw: masks `Ω` (rows, erase `q`) and `T` (columns,
/// erase `p`), the ensemble matrix, and the `min(|Ω|, |T|)` eigenvalues of
/// `M_ΩT M_ΩTᴴ`.
pub fn restricted_spectrum(
    ensemble: Ensemble,
    n: usize,
    params: LawParams,
    seed: RngSeed,
) -> Result<SpectralSample> {
    if n == 0 {
        return Err(Error::InvalidDimension("ambient dimension must be >= 1".into()));
    }
    let mut attempt: u32 = 0;
    let (rows, cols) = loop {
        let rows = bernoulli_mask(n, params.q(), seed.child(PURPOSE_ROWS, attempt.into()))?;
        let cols = bernoulli_mask(n, params.p(), seed.child(PURPOSE_COLS, attempt.into()))?;
        if !rows.is_empty() && !cols.is_empty() {
            break (rows, cols);
        }
        attempt += 1;
        if attempt > MAX_MASK_RETRIES {
            return Err(Error::RetriesExhausted { attempts: attempt - 1 });
        }
    };
    let values = masked_spectrum(ensemble, &rows, &cols, seed.child(PURPOSE_MATRIX, 0))?;
    Ok(SpectralSample {
        ambient_n: n,
        rows_kept: rows.len(),
        cols_kept: cols.len(),
        values,
        kind: SpectrumKind::Eigen,
        retries: attempt,
    })
}

/// Replaces eigenvalues by singular values.
pub fn to_singular(sample: &SpectralSample) -> Result<SpectralSample> {
    if sample.kind == SpectrumKind::Singular {
        return Err(Error::AlreadySingular);
    }
    Ok(SpectralSample {
        values: sample.values.iter().map(|v| v.max(0.0).sqrt()).collect(),
        kind: SpectrumKind::Singular,
        ..sample.clone()
    })
}
