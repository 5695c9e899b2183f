//! The bilateral-filter graph over pixel nodes.
//!
//! Nodes are the pixels of an image; edge weights combine a spatial Gaussian
//! and (in bilateral mode) an intensity Gaussian:
//!
//! `w_ij = exp(−‖p_i − p_j‖² / 2σ_d²) · exp(−(x[i] − x[j])² / 2σ_r²)`
//!
//! Every node carries a unit self-loop (`w_ii = 1`). Weights are computed
//! once from the image handed to [`BilateralGraph::build`] and never change,
//! so the graph is a fixed linear operator afterwards. The struct exposes
//! sparse application of one filter pass `D⁻¹W x`, the random-walk Laplacian
//! `𝓛ᵣ x = x − D⁻¹W x`, and the symmetric normalized Laplacian
//! `𝓛 x = x − D^{−1/2} W D^{−1/2} x`, whose spectrum lies in `[0, 2]`.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::ImageGrid;

/// Which similarity the edge weights encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphMode {
    /// Spatial × intensity Gaussian (the bilateral filter graph).
    Bilateral,
    /// Spatial Gaussian only; weights ignore the image content (the
    /// Gaussian-smoothing comparison graph).
    GaussianSpatial,
}

/// Parameters of the graph construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphParams {
    /// Spatial scale, in pixels.
    pub sigma_d: f64,
    /// Range (intensity) scale; unused in [`GraphMode::GaussianSpatial`].
    pub sigma_r: f64,
    /// Square window radius: edges exist only for `max(|dx|, |dy|) ≤ radius`.
    pub window_radius: usize,
    pub mode: GraphMode,
}

impl GraphParams {
    /// Bilateral graph with the default window radius `ceil(2σ_d)`.
    pub fn bilateral(sigma_d: f64, sigma_r: f64) -> Self {
        Self {
            sigma_d,
            sigma_r,
            window_radius: Self::default_radius(sigma_d),
            mode: GraphMode::Bilateral,
        }
    }

    /// Spatial-only comparison graph with the default window radius.
    pub fn gaussian_spatial(sigma_d: f64) -> Self {
        Self {
            sigma_d,
            sigma_r: 0.0,
            window_radius: Self::default_radius(sigma_d),
            mode: GraphMode::GaussianSpatial,
        }
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.window_radius = radius;
        self
    }

    /// Window truncation rule: neighbours further than `2σ_d` get no edge.
    pub fn default_radius(sigma_d: f64) -> usize {
        if sigma_d.is_finite() && sigma_d > 0.0 {
            ((2.0 * sigma_d).ceil() as usize).max(1)
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sigma_d.is_finite() || self.sigma_d <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma_d must be finite and > 0, got {}",
                self.sigma_d
            )));
        }
        if self.mode == GraphMode::Bilateral && (!self.sigma_r.is_finite() || self.sigma_r <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_r must be finite and > 0 in bilateral mode, got {}",
                self.sigma_r
            )));
        }
        if self.window_radius == 0 {
            return Err(Error::InvalidParameter("window_radius must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sparse symmetric adjacency (CSR, both triangles stored, sorted columns)
/// plus the degree vector. Immutable once built; all `apply_*` methods are
/// read-only and safe to call concurrently. The summation order inside each
/// row is fixed, so results are deterministic regardless of parallelism.
#[derive(Debug)]
pub struct BilateralGraph {
    width: usize,
    height: usize,
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    weights: Vec<f64>,
    degree: Vec<f64>,
    sqrt_degree: Vec<f64>,
    params: GraphParams,
    spmv_count: AtomicU64,
}

impl BilateralGraph {
    /// Builds the graph from an image. Weights are fixed from this image;
    /// later filtering never updates them.
    pub fn build(img: &ImageGrid, params: GraphParams) -> Result<Self> {
        params.validate()?;
        if img.is_empty() {
            return Err(Error::InvalidParameter("empty image".into()));
        }
        let (w, h) = (img.width(), img.height());
        let n = w * h;
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("{n} nodes over index cap")));
        }
        let r = params.window_radius;
        let side = 2 * r + 1;

        // Spatial factor depends only on (dx, dy); tabulate it once.
        let inv_two_sd2 = 1.0 / (2.0 * params.sigma_d * params.sigma_d);
        let mut spatial = vec![0.0f64; side * side];
        for dy in 0..side {
            for dx in 0..side {
                let ddy = dy as f64 - r as f64;
                let ddx = dx as f64 - r as f64;
                spatial[dy * side + dx] = (-(ddx * ddx + ddy * ddy) * inv_two_sd2).exp();
            }
        }

        // The window is clipped at borders, so row lengths are exact counts.
        let mut row_ptr = vec![0usize; n + 1];
        for y in 0..h {
            let rows = (y + r).min(h - 1) - y.saturating_sub(r) + 1;
            for x in 0..w {
                let cols = (x + r).min(w - 1) - x.saturating_sub(r) + 1;
                row_ptr[y * w + x + 1] = rows * cols;
            }
        }
        for j in 0..n {
            row_ptr[j + 1] += row_ptr[j];
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0u32; nnz];
        let mut weights = vec![0.0f64; nnz];

        // Fill one image row per task; each band is a disjoint slice.
        let mut bands: Vec<(usize, &mut [f64], &mut [u32])> = Vec::with_capacity(h);
        {
            let mut wrest: &mut [f64] = &mut weights;
            let mut crest: &mut [u32] = &mut col_idx;
            for y in 0..h {
                let len = row_ptr[(y + 1) * w] - row_ptr[y * w];
                let (wa, wb) = wrest.split_at_mut(len);
                let (ca, cb) = crest.split_at_mut(len);
                wrest = wb;
                crest = cb;
                bands.push((y, wa, ca));
            }
        }
        let data = img.data();
        let bilateral = params.mode == GraphMode::Bilateral;
        let inv_two_sr2 = if bilateral {
            1.0 / (2.0 * params.sigma_r * params.sigma_r)
        } else {
            0.0
        };
        bands.into_par_iter().for_each(|(y, wband, cband)| {
            let ylo = y.saturating_sub(r);
            let yhi = (y + r).min(h - 1);
            let mut k = 0;
            for x in 0..w {
                let xj = data[y * w + x];
                let xlo = x.saturating_sub(r);
                let xhi = (x + r).min(w - 1);
                for yi in ylo..=yhi {
                    let srow = (yi + r - y) * side;
                    let base = yi * w;
                    for xi in xlo..=xhi {
                        let s = spatial[srow + (xi + r - x)];
                        let weight = if bilateral {
                            let d = data[base + xi] - xj;
                            s * (-(d * d) * inv_two_sr2).exp()
                        } else {
                            s
                        };
                        wband[k] = weight;
                        cband[k] = (base + xi) as u32;
                        k += 1;
                    }
                }
            }
        });

        // Degrees summed in the same order the matvec uses, so D⁻¹W applied
        // to the all-ones signal is exactly 1.
        let degree: Vec<f64> = (0..n)
            .map(|j| weights[row_ptr[j]..row_ptr[j + 1]].iter().sum())
            .collect();
        let sqrt_degree = degree.iter().map(|d| d.sqrt()).collect();

        Ok(Self {
            width: w,
            height: h,
            n,
            row_ptr,
            col_idx,
            weights,
            degree,
            sqrt_degree,
            params,
            spmv_count: AtomicU64::new(0),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    /// Degree vector `D_jj = Σ_i w_ij`; at least 1 thanks to the self-loop.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// Stored weight of edge `(i, j)`, if inside the window.
    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        let row = &self.col_idx[lo..hi];
        row.binary_search(&(j as u32))
            .ok()
            .map(|k| self.weights[lo + k])
    }

    /// Iterates all stored entries as `(row, col, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |j| {
            (self.row_ptr[j]..self.row_ptr[j + 1])
                .map(move |k| (j, self.col_idx[k] as usize, self.weights[k]))
        })
    }

    /// Number of sparse adjacency applications since construction or the
    /// last reset. One filter pass, one Laplacian application, and each
    /// Chebyshev recurrence step all cost exactly one.
    pub fn spmv_count(&self) -> u64 {
        self.spmv_count.load(Ordering::Relaxed)
    }

    pub fn reset_spmv_count(&self) {
        self.spmv_count.store(0, Ordering::Relaxed);
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

    /// `W x` — one sparse pass, row-parallel with fixed in-row order.
    fn spmv(&self, x: &[f64]) -> Vec<f64> {
        self.spmv_count.fetch_add(1, Ordering::Relaxed);
        let mut out = vec![0.0; self.n];
        out.par_iter_mut()
            .with_min_len(256)
            .enumerate()
            .for_each(|(j, o)| {
                let mut acc = 0.0;
                for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                    acc += self.weights[k] * x[self.col_idx[k] as usize];
                }
                *o = acc;
            });
        out
    }

    /// One bilateral filtering pass `D⁻¹W x`.
    pub fn apply_bf(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut out = self.spmv(x);
        for (o, d) in out.iter_mut().zip(&self.degree) {
            *o /= d;
        }
        Ok(out)
    }

    /// Random-walk Laplacian `𝓛ᵣ x = x − D⁻¹W x`.
    pub fn apply_randomwalk_laplacian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let bf = self.apply_bf(x)?;
        Ok(x.iter().zip(bf).map(|(xi, bi)| xi - bi).collect())
    }

    /// Symmetric normalized Laplacian `𝓛 x = x − D^{−1/2} W D^{−1/2} x`.
    pub fn apply_normalized_laplacian(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let scaled: Vec<f64> = x
            .iter()
            .zip(&self.sqrt_degree)
            .map(|(xi, s)| xi / s)
            .collect();
        let ws = self.spmv(&scaled);
        Ok(x.iter()
            .zip(ws)
            .zip(&self.sqrt_degree)
            .map(|((xi, wi), s)| xi - wi / s)
            .collect())
    }

    /// `x̂ = D^{1/2} x`, the change of variables under which one filter pass
    /// becomes the symmetric operator `I − 𝓛`.
    pub fn normalize_signal(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(x.iter()
            .zip(&self.sqrt_degree)
            .map(|(xi, s)| xi * s)
            .collect())
    }

    /// Inverse of [`normalize_signal`](Self::normalize_signal): `D^{−1/2} x̂`.
    pub fn denormalize_signal(&self, xhat: &[f64]) -> Result<Vec<f64>> {
        self.check_len(xhat)?;
        Ok(xhat
            .iter()
            .zip(&self.sqrt_degree)
            .map(|(xi, s)| xi / s)
            .collect())
    }
}
