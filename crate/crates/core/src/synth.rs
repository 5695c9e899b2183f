//! Deterministic procedural test images.
//!
//! Every generator is a pure function of its arguments, so fixtures built
//! from them are reproducible across runs and platforms.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::image::ImageGrid;

/// Natural-looking textured content: a smooth illumination ramp, a curved
/// two-level region boundary, and two fine sinusoidal texture fields.
pub fn textured(width: usize, height: usize) -> ImageGrid {
    ImageGrid::from_fn(width, height, |x, y| {
        let (w, h) = (width.max(2) as f64, height.max(2) as f64);
        let (fx, fy) = (x as f64, y as f64);
        let ramp = 0.32 + 0.18 * fx / (w - 1.0);
        // Curved edge sweeping through the frame.
        let boundary = 0.55 * w + 0.18 * w * (2.2 * PI * fy / h).sin();
        let region = if fx > boundary { 0.22 } else { 0.0 };
        let texture = 0.055 * (2.0 * PI * fx / 5.3).sin() * (2.0 * PI * fy / 6.1).sin()
            + 0.035 * (2.0 * PI * (fx + fy) / 3.7).sin();
        (ramp + region + texture).clamp(0.02, 0.98)
    })
}

/// Piecewise-constant two-region content: a dark blob with an irregular
/// boundary on a brighter background. The sharp intensity step is what
/// separates a bilateral graph from a purely spatial one.
pub fn two_region(width: usize, height: usize) -> ImageGrid {
    ImageGrid::from_fn(width, height, |x, y| {
        let (w, h) = (width.max(2) as f64, height.max(2) as f64);
        let (fx, fy) = (x as f64 / (w - 1.0), y as f64 / (h - 1.0));
        // Blob centred off-middle with a wavy radius.
        let (cx, cy) = (0.38, 0.44);
        let angle = (fy - cy).atan2(fx - cx);
        let radius = 0.23 + 0.05 * (3.0 * angle).sin();
        let dist = ((fx - cx) * (fx - cx) + (fy - cy) * (fy - cy)).sqrt();
        if dist < radius {
            0.15
        } else {
            0.72
        }
    })
}

/// Uniform i.i.d. intensities in `[0, 1)` from a seeded ChaCha8 stream.
pub fn uniform_random(width: usize, height: usize, seed: u64) -> ImageGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageGrid::from_fn(width, height, |_, _| rng.random::<f64>())
}
