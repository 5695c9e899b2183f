//! Exact dense spectral computations on small blocks — the ground truth
//! every fast path is checked against.
//!
//! The symmetric normalized Laplacian `𝓛 = I − D^{−1/2} W D^{−1/2}` of a
//! block graph is assembled densely and diagonalized with a symmetric
//! eigensolver (tridiagonalization + implicit-shift QL). Eigenvalues come
//! back ascending with eigenvector columns permuted consistently, ties
//! broken by original index, so "the first k components" is well defined.
//!
//! This module trades speed for exactness on purpose: it is the judge, not
//! the contestant. Blocks are capped at 8192 nodes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::BilateralGraph;

/// Node-count cap for dense decompositions (a 64×64 block has 4096 nodes).
pub const DENSE_CAP: usize = 8192;

/// Dense normalized Laplacian of a block graph.
pub fn dense_normalized_laplacian(graph: &BilateralGraph) -> Result<DMatrix<f64>> {
    let n = graph.n();
    if n > DENSE_CAP {
        return Err(Error::BlockTooLarge { n, cap: DENSE_CAP });
    }
    let sqrt_deg: Vec<f64> = graph.degree().iter().map(|d| d.sqrt()).collect();
    let mut lap = DMatrix::<f64>::identity(n, n);
    for (j, i, w) in graph.edges() {
        lap[(j, i)] -= w / (sqrt_deg[j] * sqrt_deg[i]);
    }
    Ok(lap)
}

/// Full eigenpairs `(Λ, U)` of the normalized Laplacian of a block.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    n: usize,
    eigenvalues: Vec<f64>,
    u: DMatrix<f64>,
    degree: Vec<f64>,
}

impl DenseSpectrum {
    /// Dense symmetric eigendecomposition of `𝓛`. Eigenvalues are sorted
    /// ascending; the zero mode and the `[0, 2]` containment are validated
    /// (with 1e-9 slack for rounding) before the spectrum is returned.
    pub fn decompose(graph: &BilateralGraph) -> Result<Self> {
        let lap = dense_normalized_laplacian(graph)?;
        let n = graph.n();
        let eig = lap.symmetric_eigen();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut u = DMatrix::<f64>::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            u.set_column(col, &eig.eigenvectors.column(src));
        }

        if eigenvalues[0] < -1e-9 || eigenvalues[n - 1] > 2.0 + 1e-9 {
            return Err(Error::Numerical(format!(
                "eigenvalues [{}, {}] escape [0, 2]",
                eigenvalues[0],
                eigenvalues[n - 1]
            )));
        }
        if eigenvalues[0] > 1e-9 {
            return Err(Error::Numerical(format!(
                "smallest eigenvalue {} is not the zero mode",
                eigenvalues[0]
            )));
        }

        Ok(Self {
            n,
            eigenvalues,
            u,
            degree: graph.degree().to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Eigenvalues in ascending order, inside `[−1e−9, 2 + 1e−9]`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvector columns, ordered like the eigenvalues.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Degree vector of the source graph.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Graph Fourier transform of a normalized signal: `x̃ = Uᵀ x̂`.
    pub fn gft(&self, xhat: &[f64]) -> Result<Vec<f64>> {
        self.check_len(xhat)?;
        let x = DVector::from_column_slice(xhat);
        Ok(self.u.tr_mul(&x).as_slice().to_vec())
    }

    /// Inverse transform: `x̂ = U x̃`.
    pub fn igft(&self, xtilde: &[f64]) -> Result<Vec<f64>> {
        self.check_len(xtilde)?;
        let x = DVector::from_column_slice(xtilde);
        Ok((&self.u * x).as_slice().to_vec())
    }

    /// Exact spectral filtering `U h(Λ) Uᵀ x̂` of a normalized signal.
    ///
    /// The response is evaluated at eigenvalues clamped into `[0, 2]`, so
    /// rounding overshoot at the interval ends cannot escape a kernel's
    /// domain.
    pub fn exact_spectral_filter(
        &self,
        response: impl Fn(f64) -> f64,
        xhat: &[f64],
    ) -> Result<Vec<f64>> {
        self.check_len(xhat)?;
        let x = DVector::from_column_slice(xhat);
        let mut xt = self.u.tr_mul(&x);
        for (i, v) in xt.iter_mut().enumerate() {
            *v *= response(self.eigenvalues[i].clamp(0.0, 2.0));
        }
        Ok((&self.u * xt).as_slice().to_vec())
    }

    /// Energy compaction curve: `E_k` is the fraction of `‖x̃‖²` carried by
    /// the `k` lowest-frequency coefficients, for `k = 1..=n`.
    pub fn energy_compaction(&self, xhat: &[f64]) -> Result<Vec<f64>> {
        let xt = self.gft(xhat)?;
        let total: f64 = xt.iter().map(|v| v * v).sum();
        if total == 0.0 {
            return Err(Error::ZeroSignal);
        }
        let mut acc = 0.0;
        Ok(xt
            .iter()
            .map(|v| {
                acc += v * v;
                acc / total
            })
            .collect())
    }

    /// `‖UΛUᵀ − 𝓛‖_max` against a fresh dense assembly of the Laplacian.
    pub fn reconstruction_error(&self, graph: &BilateralGraph) -> Result<f64> {
        let lap = dense_normalized_laplacian(graph)?;
        if lap.nrows() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: lap.nrows(),
            });
        }
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        let rebuilt = &self.u * lambda * self.u.transpose();
        Ok((rebuilt - lap).abs().max())
    }

    /// `‖UᵀU − I‖_max`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.u.tr_mul(&self.u);
        (gram - DMatrix::<f64>::identity(self.n, self.n))
            .abs()
            .max()
    }

    /// |cosine| between the first eigenvector and `D^{1/2}·1`, the analytic
    /// zero mode. 1 means perfectly aligned.
    pub fn zero_mode_alignment(&self) -> f64 {
        let mut v: Vec<f64> = self.degree.iter().map(|d| d.sqrt()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        let u0 = self.u.column(0);
        u0.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs()
    }
}

/// Measured spectral response of `(D⁻¹W)^power` on the graph: pairs
/// `(λ_i, u_iᵀ B^power u_i)` with `B = D^{−1/2} W D^{−1/2}`, the similar
/// symmetric form of the filter pass. For `power = 1` the response of the
/// true filter is exactly `1 − λ_i`.
pub fn empirical_spectral_response(graph: &BilateralGraph, power: u32) -> Result<Vec<(f64, f64)>> {
    let spectrum = DenseSpectrum::decompose(graph)?;
    let b = {
        let n = graph.n();
        let sqrt_deg: Vec<f64> = graph.degree().iter().map(|d| d.sqrt()).collect();
        let mut b = DMatrix::<f64>::zeros(n, n);
        for (j, i, w) in graph.edges() {
            b[(j, i)] = w / (sqrt_deg[j] * sqrt_deg[i]);
        }
        b
    };
    let mut table = Vec::with_capacity(spectrum.n());
    for i in 0..spectrum.n() {
        let ui = spectrum.u.column(i);
        let mut v = ui.clone_owned();
        for _ in 0..power {
            v = &b * v;
        }
        table.push((spectrum.eigenvalues[i], ui.dot(&v)));
    }
    Ok(table)
}
