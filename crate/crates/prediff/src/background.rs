//! Boundary-prior background model.
//!
//! Regions touching the image border are assumed to be mostly background.
//! Their mean colors are clustered with flat-kernel mean shift; the mode of
//! the largest cluster becomes the mean of a per-channel normal distribution
//! with a fixed shared variance. Sampling that distribution into a region
//! simulates the region's exclusion from the image.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::imagery::RasterImage;
use crate::segmentation::{boundary_regions, segment, SegmentationMap};

/// Per-channel normal background distribution on the [0, 255] scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundModel {
    pub mu: [f32; 3],
    /// Shared variance across channels.
    pub sigma2: f32,
}

/// Mean-shift outcome over a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub modes: Vec<[f32; 3]>,
    /// Per-point mode index, aligned with the input order.
    pub assignments: Vec<usize>,
    pub largest_mode: [f32; 3],
}

/// Knobs for [`estimate_background_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundParams {
    /// Flat-kernel radius on the RGB scale.
    pub bandwidth: f32,
    pub sigma2: f32,
    /// Segmentation target for the background estimate.
    pub bg_scale: usize,
}

impl Default for BackgroundParams {
    fn default() -> Self {
        Self { bandwidth: 25.0, sigma2: 10.0, bg_scale: 256 }
    }
}

/// Mean RGB vector per listed region, in ascending region-id order.
pub fn region_mean_colors(
    image: &RasterImage,
    seg: &SegmentationMap,
    regions: &BTreeSet<u32>,
) -> Result<Vec<[f32; 3]>> {
    if regions.is_empty() {
        return Err(Error::invalid("empty region set"));
    }
    if image.width() != seg.width() || image.height() != seg.height() {
        return Err(Error::invalid("segmentation does not match image dimensions"));
    }
    for &r in regions {
        if r as usize >= seg.region_count() {
            return Err(Error::invalid(format!("region id {r} out of range")));
        }
    }
    let mut sums = vec![[0f64; 3]; seg.region_count()];
    let mut counts = vec![0usize; seg.region_count()];
    for (i, &l) in seg.labels().iter().enumerate() {
        let l = l as usize;
        let d = image.data();
        sums[l][0] += d[i * 3] as f64;
        sums[l][1] += d[i * 3 + 1] as f64;
        sums[l][2] += d[i * 3 + 2] as f64;
        counts[l] += 1;
    }
    Ok(regions
        .iter()
        .map(|&r| {
            let r = r as usize;
            let n = counts[r] as f64;
            [
                (sums[r][0] / n) as f32,
                (sums[r][1] / n) as f32,
                (sums[r][2] / n) as f32,
            ]
        })
        .collect())
}

const SHIFT_TOLERANCE: f32 = 0.1;
const MAX_SHIFT_ITERATIONS: usize = 100;

/// Flat-kernel mean shift over RGB points.
///
/// Each point is iterated to convergence (shift < 0.1 or 100 iterations).
/// Converged positions within `bandwidth / 2` of an already discovered mode
/// join that mode; the largest cluster breaks ties by lowest mode index.
pub fn mean_shift(points: &[[f32; 3]], bandwidth: f32) -> Result<ClusterResult> {
    if points.is_empty() {
        return Err(Error::invalid("mean shift requires at least one point"));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::invalid("bandwidth must be positive"));
    }

    let mut modes: Vec<[f32; 3]> = Vec::new();
    let mut assignments = Vec::with_capacity(points.len());
    for &start in points {
        let converged = shift_to_mode(start, points, bandwidth);
        let merge = modes
            .iter()
            .position(|m| distance(*m, converged) <= bandwidth / 2.0);
        match merge {
            Some(idx) => assignments.push(idx),
            None => {
                modes.push(converged);
                assignments.push(modes.len() - 1);
            }
        }
    }

    let mut cluster_sizes = vec![0usize; modes.len()];
    for &a in &assignments {
        cluster_sizes[a] += 1;
    }
    let largest = cluster_sizes
        .iter()
        .enumerate()
        .max_by_key(|(i, &s)| (s, usize::MAX - *i))
        .map(|(i, _)| i)
        .unwrap();

    Ok(ClusterResult { largest_mode: modes[largest], modes, assignments })
}

/// One flat-kernel step: mean of all points within `bandwidth` of `at`.
pub fn flat_kernel_step(at: [f32; 3], points: &[[f32; 3]], bandwidth: f32) -> [f32; 3] {
    let mut sum = [0f64; 3];
    let mut n = 0usize;
    for p in points {
        if distance(at, *p) <= bandwidth {
            for c in 0..3 {
                sum[c] += p[c] as f64;
            }
            n += 1;
        }
    }
    if n == 0 {
        return at;
    }
    [
        (sum[0] / n as f64) as f32,
        (sum[1] / n as f64) as f32,
        (sum[2] / n as f64) as f32,
    ]
}

fn shift_to_mode(start: [f32; 3], points: &[[f32; 3]], bandwidth: f32) -> [f32; 3] {
    let mut at = start;
    for _ in 0..MAX_SHIFT_ITERATIONS {
        let next = flat_kernel_step(at, points, bandwidth);
        let moved = distance(at, next);
        at = next;
        if moved < SHIFT_TOLERANCE {
            break;
        }
    }
    at
}

fn distance(a: [f32; 3], b: [f32; 3]) -> f32 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Estimate the boundary-prior background distribution with default knobs
/// (bandwidth 25, σ² = 10, background segmentation target 256).
pub fn estimate_background(image: &RasterImage, seed: u64) -> Result<BackgroundModel> {
    estimate_background_with(image, seed, &BackgroundParams::default())
}

pub fn estimate_background_with(
    image: &RasterImage,
    seed: u64,
    params: &BackgroundParams,
) -> Result<BackgroundModel> {
    if !(params.sigma2 > 0.0) {
        return Err(Error::invalid("sigma2 must be positive"));
    }
    // Images smaller than the background scale clamp the target.
    let target = params.bg_scale.clamp(1, image.pixel_count());
    let seg = segment(image, target, seed)?;
    let boundary = boundary_regions(&seg);
    let means = region_mean_colors(image, &seg, &boundary)?;
    let clusters = mean_shift(&means, params.bandwidth)?;
    Ok(BackgroundModel {
        mu: [
            clusters.largest_mode[0].clamp(0.0, 255.0),
            clusters.largest_mode[1].clamp(0.0, 255.0),
            clusters.largest_mode[2].clamp(0.0, 255.0),
        ],
        sigma2: params.sigma2,
    })
}

/// Copy of `image` with every pixel of `region` replaced by independent
/// per-channel draws from `N(mu, sigma2)`, clamped to [0, 255]. All other
/// pixels are bit-identical to the input.
pub fn sample_exclusion(
    image: &RasterImage,
    seg: &SegmentationMap,
    region: u32,
    model: &BackgroundModel,
    rng: &mut impl Rng,
) -> Result<RasterImage> {
    if region as usize >= seg.region_count() {
        return Err(Error::invalid(format!("region id {region} out of range")));
    }
    if image.width() != seg.width() || image.height() != seg.height() {
        return Err(Error::invalid("segmentation does not match image dimensions"));
    }
    let sigma = model.sigma2.sqrt();
    let dists: Vec<Normal<f32>> = (0..3)
        .map(|c| Normal::new(model.mu[c], sigma).map_err(|e| Error::invalid(e.to_string())))
        .collect::<Result<_>>()?;

    let mut out = image.clone();
    let w = image.width();
    for (i, &l) in seg.labels().iter().enumerate() {
        if l == region {
            let (x, y) = (i % w, i / w);
            let rgb = [
                dists[0].sample(rng).clamp(0.0, 255.0),
                dists[1].sample(rng).clamp(0.0, 255.0),
                dists[2].sample(rng).clamp(0.0, 255.0),
            ];
            out.set_pixel(x, y, rgb);
        }
    }
    Ok(out)
}
