//! Canned experiment workflows exposed as `denoise` and `segment-prep`.

use anyhow::Result;

use sbf_core::engine::{self, Strategy};
use sbf_core::graph::{BilateralGraph, GraphParams};
use sbf_core::image::{add_white_noise, noise_sigma_for_snr, snr_db, ImageGrid, NoiseSpec};
use sbf_core::kernels::{fit_chebyshev, poly_sup_error, PolyFilter, SpectralKernel};

/// Points in the emitted response curves.
pub const RESPONSE_GRID: usize = 1001;

/// `(λ, h(λ), p(λ))` rows over a uniform grid on `[0, 2]`.
pub fn response_grid(kernel: &SpectralKernel, filter: &PolyFilter) -> Vec<Vec<f64>> {
    (0..RESPONSE_GRID)
        .map(|i| {
            let lambda = 2.0 * i as f64 / (RESPONSE_GRID - 1) as f64;
            vec![
                lambda,
                kernel.eval(lambda).expect("grid lambda in range"),
                filter.eval(lambda).expect("grid lambda in range"),
            ]
        })
        .collect()
}

/// Denoising experiment configuration.
///
/// The bilateral baseline runs at its published scales; the spectral filter
/// runs on a graph whose range scale defaults to roughly twice the noise
/// level, so the noise itself does not fragment the graph it is filtered on.
#[derive(Debug, Clone)]
pub struct DenoiseConfig {
    /// Target input SNR in dB; used when `sigma` is not given.
    pub target_snr_db: f64,
    /// Explicit noise level, overriding the SNR target.
    pub sigma: Option<f64>,
    pub seed: u64,
    /// Polynomial degree of the spectral filter.
    pub degree: usize,
    /// Graph for the one-pass bilateral baseline.
    pub bf_params: GraphParams,
    /// Graph for the spectral filter.
    pub proposed_params: GraphParams,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            target_snr_db: 20.0,
            sigma: None,
            seed: 0,
            degree: 5,
            bf_params: GraphParams::bilateral(2.0, 0.035),
            proposed_params: GraphParams::bilateral(2.0, 0.1),
        }
    }
}

/// All artifacts of one denoising run.
#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub sigma: f64,
    pub noisy: ImageGrid,
    pub bf: ImageGrid,
    pub proposed: ImageGrid,
    pub noisy_db: f64,
    pub bf_db: f64,
    pub proposed_db: f64,
}

impl DenoiseOutcome {
    /// The machine-parseable report line.
    pub fn report(&self) -> String {
        format!(
            "noisy={:.2} bf={:.2} proposed={:.2}",
            self.noisy_db, self.bf_db, self.proposed_db
        )
    }
}

/// Adds calibrated noise, then denoises with the one-pass bilateral
/// baseline and with the degree-`degree` approximation of the
/// `1/(1+λ²)` kernel. Both graphs are built from the noisy image.
pub fn denoise_experiment(clean: &ImageGrid, cfg: &DenoiseConfig) -> Result<DenoiseOutcome> {
    let sigma = match cfg.sigma {
        Some(s) => s,
        None => noise_sigma_for_snr(clean, cfg.target_snr_db)?,
    };
    let noisy = add_white_noise(clean, &NoiseSpec::new(sigma, cfg.seed)?);

    let bf_graph = BilateralGraph::build(&noisy, cfg.bf_params)?;
    let bf_data = bf_graph.apply_bf(noisy.data())?;
    let bf = ImageGrid::new(noisy.width(), noisy.height(), bf_data)?;

    let fit = fit_chebyshev(&SpectralKernel::denoise(), cfg.degree);
    let proposed = engine::filter_image(
        &noisy,
        cfg.proposed_params,
        &fit,
        Strategy::ChebyshevRecurrence,
    )?;

    Ok(DenoiseOutcome {
        sigma,
        noisy_db: snr_db(clean, &noisy)?,
        bf_db: snr_db(clean, &bf)?,
        proposed_db: snr_db(clean, &proposed)?,
        noisy,
        bf,
        proposed,
    })
}

/// Segmentation-preprocessing experiment configuration.
#[derive(Debug, Clone)]
pub struct SegmentPrepConfig {
    /// Number of bilateral passes for both iterated baselines.
    pub k: usize,
    /// Polynomial degree of the sharp low-pass approximation.
    pub degree: usize,
    pub cutoff: f64,
    pub steepness: f64,
    pub params: GraphParams,
}

impl Default for SegmentPrepConfig {
    fn default() -> Self {
        Self {
            k: 20,
            degree: 20,
            cutoff: 0.2,
            steepness: 50.0,
            params: GraphParams::bilateral(2.0, 0.05),
        }
    }
}

/// Images plus response curves from one segmentation-preprocessing run.
#[derive(Debug, Clone)]
pub struct SegmentPrepOutcome {
    /// `k` passes, graph rebuilt from each intermediate image.
    pub reweighted: ImageGrid,
    /// `k` passes on the fixed graph of the input image.
    pub fixed: ImageGrid,
    /// Sharp low-pass spectral filter on the fixed graph.
    pub proposed: ImageGrid,
    /// `(λ, h, p)` rows for the iterated-pass response `(1−λ)^k`.
    pub iterated_response: Vec<Vec<f64>>,
    /// `(λ, h, p)` rows for the sharp low-pass and its fit.
    pub proposed_response: Vec<Vec<f64>>,
    /// Sup-norm gap of the sharp low-pass fit on a 10001-point grid.
    pub proposed_sup_error: f64,
}

/// Runs the three smoothing variants and tabulates both spectral responses.
pub fn segment_prep_experiment(
    img: &ImageGrid,
    cfg: &SegmentPrepConfig,
) -> Result<SegmentPrepOutcome> {
    // Changing weights: rebuild the graph from every intermediate result.
    let mut reweighted = img.clone();
    for _ in 0..cfg.k {
        let g = BilateralGraph::build(&reweighted, cfg.params)?;
        let data = g.apply_bf(reweighted.data())?;
        reweighted = ImageGrid::new(img.width(), img.height(), data)?;
    }

    // Fixed weights: one graph from the input image.
    let graph = BilateralGraph::build(img, cfg.params)?;
    let fixed_data = engine::iterate_bf(&graph, img.data(), cfg.k)?;
    let fixed = ImageGrid::new(img.width(), img.height(), fixed_data)?;

    let kernel = SpectralKernel::sharp_lowpass(cfg.cutoff, cfg.steepness)?;
    let fit = fit_chebyshev(&kernel, cfg.degree);
    let proposed_data = engine::apply_chebyshev(&graph, &fit, img.data())?;
    let proposed = ImageGrid::new(img.width(), img.height(), proposed_data)?;

    let iterated_kernel = SpectralKernel::iterated_bf(cfg.k as u32);
    let iterated_fit = fit_chebyshev(&iterated_kernel, cfg.k);
    Ok(SegmentPrepOutcome {
        reweighted,
        fixed,
        proposed,
        iterated_response: response_grid(&iterated_kernel, &iterated_fit),
        proposed_response: response_grid(&kernel, &fit),
        proposed_sup_error: poly_sup_error(&kernel, &fit, 10001)?,
    })
}
