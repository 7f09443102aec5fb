//! Pixel-wise conditional-sampling baseline.
//!
//! For every pixel, a k×k inner patch is repeatedly refilled with samples
//! from a per-channel normal fitted to the surrounding l×l ring, the
//! classifier is re-run, and the averaged prediction drop is spread over the
//! patch. Windows are clipped at the image border; no padding is invented.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::classifiers::ClassifierHandle;
use crate::error::{Error, Result};
use crate::imagery::{RasterImage, SaliencyMap};

use super::diff::DifferenceFunction;
use super::ClassSelector;

/// Configuration of the pixel-wise baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    /// Inner (replaced) patch size.
    pub k: usize,
    /// Outer (conditioning) patch size; must exceed `k`.
    pub l: usize,
    /// Samples drawn per pixel.
    pub samples: usize,
    pub g: DifferenceFunction,
    pub seed: u64,
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::invalid("patch size k must be ≥ 1"));
        }
        if self.l <= self.k {
            return Err(Error::invalid(format!("outer patch l = {} must exceed k = {}", self.l, self.k)));
        }
        if self.samples < 1 {
            return Err(Error::invalid("sample count must be ≥ 1"));
        }
        Ok(())
    }
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { k: 10, l: 14, samples: 10, g: DifferenceFunction::Subtraction, seed: 0 }
    }
}

/// Result of a pixel-wise run. The map is signed: no clamping is applied.
#[derive(Debug, Clone)]
pub struct PixelwiseRun {
    pub map: SaliencyMap,
    pub class: usize,
    pub baseline_probs: Vec<f32>,
}

/// Spec-shaped entry point for a fixed class id.
pub fn pixelwise_pd(
    f: &ClassifierHandle,
    image: &RasterImage,
    class: usize,
    cfg: &BaselineConfig,
) -> Result<SaliencyMap> {
    pixelwise_explain(f, image, ClassSelector::Index(class), cfg).map(|run| run.map)
}

/// Full run with class resolution; makes exactly `1 + samples·W·H` calls.
pub fn pixelwise_explain(
    f: &ClassifierHandle,
    image: &RasterImage,
    class: ClassSelector,
    cfg: &BaselineConfig,
) -> Result<PixelwiseRun> {
    cfg.validate()?;
    let (w, h) = (image.width(), image.height());
    if w < cfg.l || h < cfg.l {
        return Err(Error::invalid(format!(
            "image {w}x{h} smaller than the outer patch size {}",
            cfg.l
        )));
    }

    let baseline_probs = f.predict(image)?;
    let class = class.resolve(&baseline_probs)?;
    let baseline = baseline_probs[class] as f64;

    let mut sums = vec![0f64; w * h];
    let mut counts = vec![0u64; w * h];
    let mut work = image.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    for cy in 0..h {
        for cx in 0..w {
            let inner = Window::centered(cx, cy, cfg.k, w, h);
            let outer = Window::centered(cx, cy, cfg.l, w, h);
            let stats = ring_stats(image, &outer, &inner);

            let dists: Vec<Normal<f32>> = (0..3)
                .map(|c| {
                    Normal::new(stats.mean[c] as f32, (stats.var[c] as f32).sqrt())
                        .map_err(|e| Error::invalid(e.to_string()))
                })
                .collect::<Result<_>>()?;

            let mut accum = 0f64;
            for _ in 0..cfg.samples {
                for y in inner.y0..=inner.y1 {
                    for x in inner.x0..=inner.x1 {
                        let rgb = [
                            dists[0].sample(&mut rng).clamp(0.0, 255.0),
                            dists[1].sample(&mut rng).clamp(0.0, 255.0),
                            dists[2].sample(&mut rng).clamp(0.0, 255.0),
                        ];
                        work.set_pixel(x, y, rgb);
                    }
                }
                accum += f.predict(&work)?[class] as f64;
            }
            // restore the patch before moving to the next pixel
            for y in inner.y0..=inner.y1 {
                for x in inner.x0..=inner.x1 {
                    work.set_pixel(x, y, image.pixel(x, y));
                }
            }

            let excluded = accum / cfg.samples as f64;
            let value = cfg.g.apply(baseline, excluded);
            for y in inner.y0..=inner.y1 {
                for x in inner.x0..=inner.x1 {
                    sums[y * w + x] += value;
                    counts[y * w + x] += 1;
                }
            }
        }
    }

    let data: Vec<f32> = sums
        .iter()
        .zip(&counts)
        .map(|(s, c)| (s / *c as f64) as f32)
        .collect();
    Ok(PixelwiseRun {
        map: SaliencyMap::new(w, h, data, true)?,
        class,
        baseline_probs,
    })
}

struct Window {
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

impl Window {
    /// `size`×`size` window centered at (cx, cy), clipped to the image.
    fn centered(cx: usize, cy: usize, size: usize, w: usize, h: usize) -> Self {
        let lo = (size - 1) / 2;
        let hi = size / 2;
        Self {
            x0: cx.saturating_sub(lo),
            x1: (cx + hi).min(w - 1),
            y0: cy.saturating_sub(lo),
            y1: (cy + hi).min(h - 1),
        }
    }

    fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

struct RingStats {
    mean: [f64; 3],
    var: [f64; 3],
}

/// Per-channel mean/variance of the ring `outer \ inner`. A clipped-away
/// ring falls back to the outer window; variance is floored at 1.0.
fn ring_stats(image: &RasterImage, outer: &Window, inner: &Window) -> RingStats {
    let mut sum = [0f64; 3];
    let mut sum_sq = [0f64; 3];
    let mut n = 0usize;
    let mut accumulate = |skip_inner: bool| {
        sum = [0.0; 3];
        sum_sq = [0.0; 3];
        n = 0;
        for y in outer.y0..=outer.y1 {
            for x in outer.x0..=outer.x1 {
                if skip_inner && inner.contains(x, y) {
                    continue;
                }
                let px = image.pixel(x, y);
                for c in 0..3 {
                    sum[c] += px[c] as f64;
                    sum_sq[c] += (px[c] as f64) * (px[c] as f64);
                }
                n += 1;
            }
        }
    };
    accumulate(true);
    if n == 0 {
        accumulate(false);
    }
    let mut mean = [0f64; 3];
    let mut var = [0f64; 3];
    for c in 0..3 {
        mean[c] = sum[c] / n as f64;
        var[c] = (sum_sq[c] / n as f64 - mean[c] * mean[c]).max(1.0);
    }
    RingStats { mean, var }
}
