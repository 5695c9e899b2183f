//! `sbf` — graph-spectral bilateral filtering from the command line.
//!
//! Every subcommand is deterministic given its full flag set (noise is
//! seeded), and no subcommand mutates its input files.

pub mod csvout;
pub mod recipes;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sbf_core::engine::{self, Strategy};
use sbf_core::graph::{BilateralGraph, GraphParams};
use sbf_core::image::{
    add_white_noise, load_image, noise_sigma_for_snr, save_image, snr_db, ImageGrid, NoiseSpec,
};
use sbf_core::kernels::{fit_chebyshev, poly_sup_error, PolyFilter, RootFactor, SpectralKernel};
use sbf_core::oracle::DenseSpectrum;

use crate::csvout::{format_g12, write_csv};
use crate::recipes::{
    denoise_experiment, response_grid, segment_prep_experiment, DenoiseConfig, SegmentPrepConfig,
};

#[derive(Parser, Debug)]
#[command(
    name = "sbf",
    version,
    about = "Bilateral filtering as graph spectral filtering: filter, design, analyze"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One bilateral filter pass over an image
    Bf(BfArgs),
    /// Iterated bilateral filtering with fixed or changing weights
    Iterate(IterateArgs),
    /// Fit a polynomial to a spectral kernel and emit the response curve
    Design(DesignArgs),
    /// Apply a spectral kernel to an image
    Apply(ApplyArgs),
    /// Canned denoising experiment: noise, bilateral baseline, spectral filter
    Denoise(DenoiseArgs),
    /// Canned smoothing comparison: iterated passes vs sharp low-pass
    SegmentPrep(SegmentPrepArgs),
    /// Dense spectral analysis of a small image block
    Spectrum(SpectrumArgs),
    /// Signal-to-noise ratio between two images, in dB
    Snr(SnrArgs),
    /// Add seeded white Gaussian noise to an image
    Noise(NoiseArgs),
}

/// Graph construction flags shared by the filtering subcommands.
#[derive(Args, Debug, Clone, Copy)]
pub struct GraphFlags {
    /// Spatial Gaussian scale, in pixels
    #[arg(long, default_value_t = 2.0)]
    pub sigma_d: f64,
    /// Range (intensity) Gaussian scale
    #[arg(long, default_value_t = 0.035)]
    pub sigma_r: f64,
    /// Window radius in pixels [default: ceil(2*sigma-d)]
    #[arg(long)]
    pub radius: Option<usize>,
    /// Edge-weight mode
    #[arg(long, value_enum, default_value_t = GraphArg::Bilateral)]
    pub graph: GraphArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphArg {
    Bilateral,
    Gaussian,
}

impl GraphFlags {
    pub fn params(&self) -> GraphParams {
        let mut p = match self.graph {
            GraphArg::Bilateral => GraphParams::bilateral(self.sigma_d, self.sigma_r),
            GraphArg::Gaussian => GraphParams::gaussian_spatial(self.sigma_d),
        };
        if let Some(r) = self.radius {
            p = p.with_radius(r);
        }
        p
    }
}

/// `x,y,w,h` sub-image selection.
#[derive(Debug, Clone, Copy)]
pub struct Crop {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

fn parse_crop(s: &str) -> std::result::Result<Crop, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected x,y,w,h".to_string());
    }
    let mut v = [0usize; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("invalid crop component {part:?}"))?;
    }
    Ok(Crop {
        x: v[0],
        y: v[1],
        w: v[2],
        h: v[3],
    })
}

#[derive(Args, Debug)]
pub struct BfArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[command(flatten)]
    pub graph: GraphFlags,
    /// Crop the input to x,y,w,h before filtering
    #[arg(long, value_parser = parse_crop)]
    pub crop: Option<Crop>,
}

#[derive(Args, Debug)]
pub struct IterateArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Number of filter passes
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Rebuild the graph from each intermediate image (baseline mode;
    /// the default keeps the weights of the input image fixed)
    #[arg(long)]
    pub reweight: bool,
    #[command(flatten)]
    pub graph: GraphFlags,
    /// Crop the input to x,y,w,h before filtering
    #[arg(long, value_parser = parse_crop)]
    pub crop: Option<Crop>,
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    /// Kernel name (bf, denoise, sharp-lowpass, iterated-bf:K,
    /// sharp-lowpass:CUTOFF,STEEPNESS) or path to a kernel spec file
    #[arg(long)]
    pub kernel: String,
    /// Polynomial degree of the fit
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    /// Write (lambda, h, p) response rows to this CSV
    #[arg(long)]
    pub emit_response: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyArg {
    /// Root-product cascade of partial filter passes
    Cascade,
    /// Chebyshev three-term recurrence
    Cheb,
}

#[derive(Args, Debug)]
pub struct ApplyArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Kernel name or spec file (see `design --help`)
    #[arg(long)]
    pub kernel: String,
    /// Polynomial degree of the fit (recurrence strategy)
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    /// Realization strategy
    #[arg(long, value_enum, default_value_t = StrategyArg::Cheb)]
    pub strategy: StrategyArg,
    #[command(flatten)]
    pub graph: GraphFlags,
    /// Crop the input to x,y,w,h before filtering
    #[arg(long, value_parser = parse_crop)]
    pub crop: Option<Crop>,
}

#[derive(Args, Debug)]
pub struct DenoiseArgs {
    /// Clean input image
    pub input: PathBuf,
    /// Directory for noisy.pgm, bf.pgm, proposed.pgm
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Target input SNR in dB
    #[arg(long, default_value_t = 20.0)]
    pub snr: f64,
    /// Explicit noise sigma (overrides --snr)
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Noise seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Degree of the spectral denoising filter
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    /// Range scale of the spectral filter's graph (the bilateral baseline
    /// uses --sigma-r)
    #[arg(long, default_value_t = 0.1)]
    pub prop_sigma_r: f64,
    #[command(flatten)]
    pub graph: GraphFlags,
    /// Crop the input to x,y,w,h first
    #[arg(long, value_parser = parse_crop)]
    pub crop: Option<Crop>,
}

#[derive(Args, Debug)]
pub struct SegmentPrepArgs {
    pub input: PathBuf,
    /// Directory for reweighted.pgm, fixed.pgm, proposed.pgm and the
    /// response CSVs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Number of filter passes for the iterated baselines
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Degree of the sharp low-pass approximation
    #[arg(long, default_value_t = 20)]
    pub degree: usize,
    /// Low-pass cutoff frequency
    #[arg(long, default_value_t = 0.2)]
    pub cutoff: f64,
    /// Low-pass transition steepness
    #[arg(long, default_value_t = 50.0)]
    pub steepness: f64,
    /// Spatial Gaussian scale, in pixels
    #[arg(long, default_value_t = 2.0)]
    pub sigma_d: f64,
    /// Range (intensity) Gaussian scale
    #[arg(long, default_value_t = 0.05)]
    pub sigma_r: f64,
    /// Window radius in pixels [default: ceil(2*sigma-d)]
    #[arg(long)]
    pub radius: Option<usize>,
    /// Crop the input to x,y,w,h first
    #[arg(long, value_parser = parse_crop)]
    pub crop: Option<Crop>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    pub input: PathBuf,
    /// Analyze only the x,y,w,h block (dense decomposition is capped at
    /// 8192 nodes)
    #[arg(long, value_parser = parse_crop)]
    pub crop: Option<Crop>,
    #[command(flatten)]
    pub graph: GraphFlags,
    /// Write (k, lambda) eigenvalue rows to this CSV
    #[arg(long)]
    pub emit_eigs: Option<PathBuf>,
    /// Write (k, E_k) energy-compaction rows for the block's own signal
    #[arg(long)]
    pub emit_compaction: Option<PathBuf>,
    /// Print the normalized signal energy
    #[arg(long)]
    pub signal_energy: bool,
}

#[derive(Args, Debug)]
pub struct SnrArgs {
    pub reference: PathBuf,
    pub test: PathBuf,
}

#[derive(Args, Debug)]
pub struct NoiseArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Noise standard deviation in intensity units
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Choose sigma to hit this expected SNR in dB
    #[arg(long)]
    pub snr: Option<f64>,
    /// Noise seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Resolves a kernel argument: a known name, a parameterized name, or a
/// path to a kernel spec file.
pub fn resolve_kernel(spec: &str) -> Result<SpectralKernel> {
    match spec {
        "bf" => return Ok(SpectralKernel::bf()),
        "denoise" => return Ok(SpectralKernel::denoise()),
        "sharp-lowpass" => return Ok(SpectralKernel::sharp_lowpass(0.2, 50.0)?),
        _ => {}
    }
    if let Some(k) = spec.strip_prefix("iterated-bf:") {
        let k: u32 = k
            .parse()
            .with_context(|| format!("invalid iteration count in kernel name {spec:?}"))?;
        return Ok(SpectralKernel::iterated_bf(k));
    }
    if let Some(rest) = spec.strip_prefix("sharp-lowpass:") {
        let (c, s) = rest.split_once(',').with_context(|| {
            format!("expected sharp-lowpass:<cutoff>,<steepness>, got {spec:?}")
        })?;
        let cutoff: f64 = c.trim().parse().context("invalid cutoff")?;
        let steepness: f64 = s.trim().parse().context("invalid steepness")?;
        return Ok(SpectralKernel::sharp_lowpass(cutoff, steepness)?);
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading kernel spec {spec:?}"))?;
    Ok(SpectralKernel::parse_spec(&text)?)
}

fn load_input(path: &Path, crop: Option<Crop>) -> Result<ImageGrid> {
    let img = load_image(path)?;
    match crop {
        Some(c) => Ok(img.crop(c.x, c.y, c.w, c.h)?),
        None => Ok(img),
    }
}

fn save_grid(img: &ImageGrid, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    save_image(img, path)?;
    Ok(())
}

/// Parses `argv` and runs the selected workflow. Returns an error for the
/// caller to print as a one-line diagnostic; `--help`/`--version` output is
/// printed here and reported as success.
pub fn run<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::error::ErrorKind;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            bail!("{first} (try --help)");
        }
    };
    dispatch(cli.command)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Bf(args) => {
            let img = load_input(&args.input, args.crop)?;
            let graph = BilateralGraph::build(&img, args.graph.params())?;
            let out = graph.apply_bf(img.data())?;
            let out = ImageGrid::new(img.width(), img.height(), out)?;
            save_grid(&out, &args.output)
        }
        Command::Iterate(args) => {
            let img = load_input(&args.input, args.crop)?;
            let params = args.graph.params();
            let out = if args.reweight {
                let mut cur = img.clone();
                for _ in 0..args.k {
                    let graph = BilateralGraph::build(&cur, params)?;
                    let data = graph.apply_bf(cur.data())?;
                    cur = ImageGrid::new(img.width(), img.height(), data)?;
                }
                cur
            } else {
                let graph = BilateralGraph::build(&img, params)?;
                let data = engine::iterate_bf(&graph, img.data(), args.k)?;
                ImageGrid::new(img.width(), img.height(), data)?
            };
            save_grid(&out, &args.output)
        }
        Command::Design(args) => {
            let kernel = resolve_kernel(&args.kernel)?;
            let fit = fit_chebyshev(&kernel, args.degree);
            write_csv(
                &args.emit_response,
                &["lambda", "h", "p"],
                &response_grid(&kernel, &fit),
            )?;
            let sup = poly_sup_error(&kernel, &fit, 10001)?;
            println!("sup_error={}", format_g12(sup));
            Ok(())
        }
        Command::Apply(args) => {
            let img = load_input(&args.input, args.crop)?;
            let kernel = resolve_kernel(&args.kernel)?;
            let params = args.graph.params();
            let out = match args.strategy {
                StrategyArg::Cheb => {
                    let fit = fit_chebyshev(&kernel, args.degree);
                    engine::filter_image(&img, params, &fit, Strategy::ChebyshevRecurrence)?
                }
                StrategyArg::Cascade => {
                    let filter = match kernel {
                        SpectralKernel::BfLinear => {
                            PolyFilter::from_roots(1.0, vec![RootFactor::Real(1.0)])
                        }
                        SpectralKernel::IteratedBf(k) => {
                            PolyFilter::from_roots(1.0, vec![RootFactor::Real(1.0); k as usize])
                        }
                        _ => bail!(
                            "cascade strategy requires a root-form kernel \
                             (bf or iterated-bf:<k>); use --strategy cheb"
                        ),
                    };
                    engine::filter_image(&img, params, &filter, Strategy::Cascade)?
                }
            };
            save_grid(&out, &args.output)
        }
        Command::Denoise(args) => {
            let clean = load_input(&args.input, args.crop)?;
            let mut bf_params = args.graph.params();
            ensure!(
                bf_params.mode == sbf_core::graph::GraphMode::Bilateral,
                "denoise runs on bilateral graphs (drop --graph gaussian)"
            );
            let mut proposed_params = GraphParams::bilateral(args.graph.sigma_d, args.prop_sigma_r);
            if let Some(r) = args.graph.radius {
                bf_params = bf_params.with_radius(r);
                proposed_params = proposed_params.with_radius(r);
            }
            let cfg = DenoiseConfig {
                target_snr_db: args.snr,
                sigma: args.sigma,
                seed: args.seed,
                degree: args.degree,
                bf_params,
                proposed_params,
            };
            let out = denoise_experiment(&clean, &cfg)?;
            save_grid(&out.noisy, &args.out_dir.join("noisy.pgm"))?;
            save_grid(&out.bf, &args.out_dir.join("bf.pgm"))?;
            save_grid(&out.proposed, &args.out_dir.join("proposed.pgm"))?;
            println!("{}", out.report());
            Ok(())
        }
        Command::SegmentPrep(args) => {
            let img = load_input(&args.input, args.crop)?;
            let mut params = GraphParams::bilateral(args.sigma_d, args.sigma_r);
            if let Some(r) = args.radius {
                params = params.with_radius(r);
            }
            let cfg = SegmentPrepConfig {
                k: args.k,
                degree: args.degree,
                cutoff: args.cutoff,
                steepness: args.steepness,
                params,
            };
            let out = segment_prep_experiment(&img, &cfg)?;
            let dir = &args.out_dir;
            save_grid(&out.reweighted, &dir.join("reweighted.pgm"))?;
            save_grid(&out.fixed, &dir.join("fixed.pgm"))?;
            save_grid(&out.proposed, &dir.join("proposed.pgm"))?;
            write_csv(
                &dir.join("response_iterated.csv"),
                &["lambda", "h", "p"],
                &out.iterated_response,
            )?;
            write_csv(
                &dir.join("response_proposed.csv"),
                &["lambda", "h", "p"],
                &out.proposed_response,
            )?;
            println!(
                "reweighted={} fixed={} proposed={} iterated_csv={} proposed_csv={}",
                dir.join("reweighted.pgm").display(),
                dir.join("fixed.pgm").display(),
                dir.join("proposed.pgm").display(),
                dir.join("response_iterated.csv").display(),
                dir.join("response_proposed.csv").display(),
            );
            Ok(())
        }
        Command::Spectrum(args) => {
            let img = load_input(&args.input, args.crop)?;
            let graph = BilateralGraph::build(&img, args.graph.params())?;
            let spectrum = DenseSpectrum::decompose(&graph)?;
            if let Some(path) = &args.emit_eigs {
                let rows: Vec<Vec<f64>> = spectrum
                    .eigenvalues()
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| vec![(i + 1) as f64, l])
                    .collect();
                write_csv(path, &["k", "lambda"], &rows)?;
            }
            let xhat = graph.normalize_signal(img.data())?;
            if let Some(path) = &args.emit_compaction {
                let ek = spectrum.energy_compaction(&xhat)?;
                let rows: Vec<Vec<f64>> = ek
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| vec![(i + 1) as f64, e])
                    .collect();
                write_csv(path, &["k", "E_k"], &rows)?;
            }
            if args.signal_energy {
                let energy: f64 = xhat.iter().map(|v| v * v).sum();
                println!("signal_energy={}", format_g12(energy));
            }
            Ok(())
        }
        Command::Snr(args) => {
            let reference = load_image(&args.reference)?;
            let test = load_image(&args.test)?;
            println!("{:.2}", snr_db(&reference, &test)?);
            Ok(())
        }
        Command::Noise(args) => {
            ensure!(
                args.sigma.is_some() ^ args.snr.is_some(),
                "exactly one of --sigma or --snr is required"
            );
            let img = load_image(&args.input)?;
            let sigma = match args.sigma {
                Some(s) => s,
                None => noise_sigma_for_snr(&img, args.snr.unwrap())?,
            };
            let noisy = add_white_noise(&img, &NoiseSpec::new(sigma, args.seed)?);
            save_grid(&noisy, &args.output)?;
            println!(
                "sigma={} snr={:.2}",
                format_g12(sigma),
                snr_db(&img, &noisy)?
            );
            Ok(())
        }
    }
}
