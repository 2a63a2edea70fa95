//! Spectra of randomly restricted unitary matrices.
//!
//! Rows and columns of an `n x n` unitary matrix (Haar-distributed or the
//! unitary DFT) are erased independently, rows with probability `q` and
//! columns with probability `p`. As `n` grows, the eigenvalues of
//! `U_ΩT U_ΩTᴴ` follow a deterministic law on `[0, 1]` that depends only on
//! `(p, q)`. This crate evaluates that law in closed form ([`theory`]),
//! samples the finite-`n` spectra ([`mats`], [`spectra`]) and measures the
//! distance between the two ([`empirics`]). The [`cli`] module backs the
//! `erasure-spectra` binary.

pub mod cli;
pub mod empirics;
mod error;
pub mod mats;
pub mod quadrature;
pub mod spectra;
pub mod theory;

pub use error::{Error, Result};
pub use mats::{ComplexMatrix, Ensemble, ProjectionMask, RngSeed, C64};
pub use spectra::{SpectralSample, SpectrumKind};
pub use theory::{LawEdges, LawParams, Normalization, SpectralLaw};
