//! Grayscale image handling: load/save, noise injection, fidelity metrics.
//!
//! Intensities live in `[0, 1]`. 8-bit files are mapped linearly from
//! `[0, 255]` on load; values are clipped and re-quantized only on save, so
//! intermediate signals (noisy or filtered) stay unclipped reals.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A width×height grid of real intensities, row-major.
///
/// This is the graph signal: one value per pixel node.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    /// Wraps raw row-major data. Fails unless `data.len() == width * height`.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a grid by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Constant-intensity grid.
    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row-major intensity data; the graph signal.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Extracts the `w×h` sub-image whose top-left corner is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::InvalidParameter("empty crop".into()));
        }
        if x + w > self.width || y + h > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop {x},{y},{w},{h} exceeds {}x{} image",
                self.width, self.height
            )));
        }
        Ok(Self::from_fn(w, h, |cx, cy| self.get(x + cx, y + cy)))
    }
}

/// Additive white Gaussian noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    /// Fails if `sigma` is negative or non-finite.
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(Self { sigma, seed })
    }
}

/// Loads an 8-bit grayscale image. Binary PGM (P5) and grayscale PNG are
/// recognized by their magic bytes; intensities are mapped to `[0, 1]` as
/// `byte / 255`.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"P5") {
        decode_pgm(&bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(&bytes)
    } else {
        Err(Error::Format(format!(
            "{}: not a binary PGM (P5) or PNG file",
            path.display()
        )))
    }
}

/// Saves as binary PGM or 8-bit grayscale PNG depending on the extension.
/// Intensities are clipped to `[0, 1]` and quantized as `round(i * 255)`
/// (round half up).
pub fn save_image(img: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let bytes = quantize(img);
    match ext.as_deref() {
        Some("pgm") => {
            let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
            out.extend_from_slice(&bytes);
            fs::write(path, out).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        Some("png") => {
            let buf = image::GrayImage::from_raw(img.width as u32, img.height as u32, bytes)
                .expect("buffer length matches dimensions");
            buf.save(path)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        }
        _ => Err(Error::Format(format!(
            "{}: unsupported output extension (use .pgm or .png)",
            path.display()
        ))),
    }
}

fn quantize(img: &ImageGrid) -> Vec<u8> {
    img.data
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

fn decode_pgm(bytes: &[u8]) -> Result<ImageGrid> {
    let mut pos = 2; // past "P5"
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        pos = skip_pgm_separators(bytes, pos)?;
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(Error::Format("PGM: malformed header".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| Error::Format("PGM: header value out of range".into()))?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("PGM: missing raster separator".into()));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::Format(format!(
            "PGM: maxval {maxval} unsupported (only 8-bit, maxval 255)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::Format("PGM: zero dimension".into()));
    }
    let n = width * height;
    let raster = &bytes[pos..];
    if raster.len() < n {
        return Err(Error::Format(format!(
            "PGM: raster truncated ({} bytes, expected {n})",
            raster.len()
        )));
    }
    let data = raster[..n].iter().map(|&b| f64::from(b) / 255.0).collect();
    ImageGrid::new(width, height, data)
}

fn skip_pgm_separators(bytes: &[u8], mut pos: usize) -> Result<usize> {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else if pos < bytes.len() {
            return Ok(pos);
        } else {
            return Err(Error::Format("PGM: truncated header".into()));
        }
    }
}

fn decode_png(bytes: &[u8]) -> Result<ImageGrid> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    match img {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let data = buf
                .into_raw()
                .iter()
                .map(|&b| f64::from(b) / 255.0)
                .collect();
            ImageGrid::new(w, h, data)
        }
        image::DynamicImage::ImageLuma16(_) => Err(Error::Format(
            "PNG: 16-bit grayscale unsupported (8-bit only)".into(),
        )),
        other => Err(Error::Format(format!(
            "PNG: {:?} is not 8-bit grayscale",
            other.color()
        ))),
    }
}

/// Adds i.i.d. Gaussian noise `e ~ N(0, sigma²)` to every pixel.
///
/// Deterministic given the seed: samples come from a ChaCha8 stream mapped
/// through the ziggurat standard normal, scaled by `sigma`. The output is
/// NOT clipped; clipping happens only at save time.
pub fn add_white_noise(img: &ImageGrid, spec: &NoiseSpec) -> ImageGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let data = img
        .data
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + spec.sigma * z
        })
        .collect();
    ImageGrid {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Signal-to-noise ratio in decibels:
/// `10·log10( Σ reference² / Σ (reference − test)² )`.
///
/// Zero error energy (test identical to reference) yields `+∞`.
pub fn snr_db(reference: &ImageGrid, test: &ImageGrid) -> Result<f64> {
    if reference.width != test.width || reference.height != test.height {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            got: test.len(),
        });
    }
    let signal: f64 = reference.data.iter().map(|v| v * v).sum();
    let error: f64 = reference
        .data
        .iter()
        .zip(&test.data)
        .map(|(r, t)| (r - t) * (r - t))
        .sum();
    if error == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / error).log10())
}

/// The noise standard deviation whose expected SNR against `img` equals
/// `target_db`: `sigma = sqrt( Σ img² / (n · 10^(target/10)) )`.
pub fn noise_sigma_for_snr(img: &ImageGrid, target_db: f64) -> Result<f64> {
    if !target_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target SNR must be finite, got {target_db}"
        )));
    }
    let signal: f64 = img.data.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let n = img.len() as f64;
    Ok((signal / (n * 10f64.powf(target_db / 10.0))).sqrt())
}

/// Adds white noise scaled so the expected SNR equals `target_db`.
pub fn calibrate_noise_to_snr(img: &ImageGrid, target_db: f64, seed: u64) -> Result<ImageGrid> {
    let sigma = noise_sigma_for_snr(img, target_db)?;
    Ok(add_white_noise(img, &NoiseSpec::new(sigma, seed)?))
}
