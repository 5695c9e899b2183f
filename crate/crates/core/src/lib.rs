//! Bilateral filtering viewed as spectral filtering on a pixel graph.
//!
//! The bilateral filter is a weighted pixel average whose weights combine a
//! spatial Gaussian and an intensity (range) Gaussian. Placing those weights
//! on a graph — pixels as nodes, weights as edges, unit self-loops — turns
//! one filter pass into the row-stochastic operator `D⁻¹W`, and the filter
//! family into polynomials of the random-walk Laplacian `𝓛ᵣ = I − D⁻¹W`.
//!
//! This crate provides:
//!
//! - [`image`]: grayscale image I/O (PGM/PNG), noise injection, SNR metrics;
//! - [`graph`]: sparse bilateral-graph construction and operator application;
//! - [`kernels`]: spectral responses `h(λ)` on `[0, 2]` and truncated
//!   Chebyshev polynomial approximations of them;
//! - [`engine`]: fast pixel-domain application of polynomial filters as
//!   cascaded or recurrence-based iterated bilateral passes;
//! - [`oracle`]: exact dense eigendecomposition of the normalized Laplacian
//!   on small blocks, the ground truth the fast paths are tested against;
//! - [`synth`]: deterministic procedural test images.

pub mod engine;
pub mod error;
pub mod graph;
pub mod image;
pub mod kernels;
pub mod oracle;
pub mod synth;

pub use error::{Error, Result};
