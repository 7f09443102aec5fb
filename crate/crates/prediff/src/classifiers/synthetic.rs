//! Synthetic oracle classifiers: deterministic, pure functions of the image,
//! used to verify the engines at desk scale.

use crate::error::{Error, Result};
use crate::imagery::RasterImage;

use super::Classifier;

/// Shared knobs for the color-matching oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    /// Primary target color.
    pub target: [f32; 3],
    /// Secondary target color (two-blob oracle).
    pub target_b: [f32; 3],
    /// Euclidean RGB distance below which a pixel matches.
    pub tolerance: f32,
    /// Matching-area fraction that saturates the score.
    pub reference_fraction: f32,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            target: [200.0, 30.0, 30.0],
            target_b: [30.0, 30.0, 200.0],
            tolerance: 80.0,
            reference_fraction: 0.25,
        }
    }
}

/// Ignores the image entirely and returns a fixed distribution.
pub struct ConstantOracle {
    probs: Vec<f32>,
}

impl ConstantOracle {
    pub fn new(probs: Vec<f32>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::invalid("constant oracle needs at least two classes"));
        }
        let sum: f32 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-4 || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("constant oracle probabilities must form a distribution"));
        }
        Ok(Self { probs })
    }
}

impl Classifier for ConstantOracle {
    fn num_classes(&self) -> usize {
        self.probs.len()
    }

    fn predict_raw(&self, _image: &RasterImage) -> Result<Vec<f32>> {
        Ok(self.probs.clone())
    }
}

/// Two-class oracle scoring the fraction of pixels near a target color.
///
/// Class 1 gets `clamp(matching_fraction / reference_fraction, 0, 1)`;
/// class 0 takes the remainder.
pub struct AreaFractionOracle {
    target: [f32; 3],
    tolerance: f32,
    reference_fraction: f32,
}

impl AreaFractionOracle {
    pub fn new(target: [f32; 3], tolerance: f32, reference_fraction: f32) -> Result<Self> {
        if !(tolerance > 0.0) || !(reference_fraction > 0.0) {
            return Err(Error::invalid("tolerance and reference fraction must be positive"));
        }
        Ok(Self { target, tolerance, reference_fraction })
    }

    pub fn from_params(p: &OracleParams) -> Result<Self> {
        Self::new(p.target, p.tolerance, p.reference_fraction)
    }
}

impl Classifier for AreaFractionOracle {
    fn num_classes(&self) -> usize {
        2
    }

    fn predict_raw(&self, image: &RasterImage) -> Result<Vec<f32>> {
        let frac = matching_fraction(image, self.target, self.tolerance);
        let v = (frac / self.reference_fraction).clamp(0.0, 1.0);
        Ok(vec![1.0 - v, v])
    }
}

/// Three-class oracle over two independent colored blobs.
///
/// Class 1 scores blob A's area, class 2 scores blob B's, class 0 absorbs the
/// rest, so erasing one blob cannot move the other blob's probability.
pub struct TwoBlobOracle {
    color_a: [f32; 3],
    color_b: [f32; 3],
    tolerance: f32,
    reference_fraction: f32,
}

impl TwoBlobOracle {
    pub fn new(
        color_a: [f32; 3],
        color_b: [f32; 3],
        tolerance: f32,
        reference_fraction: f32,
    ) -> Result<Self> {
        if !(tolerance > 0.0) || !(reference_fraction > 0.0) {
            return Err(Error::invalid("tolerance and reference fraction must be positive"));
        }
        Ok(Self { color_a, color_b, tolerance, reference_fraction })
    }

    pub fn from_params(p: &OracleParams) -> Result<Self> {
        Self::new(p.target, p.target_b, p.tolerance, p.reference_fraction)
    }
}

impl Classifier for TwoBlobOracle {
    fn num_classes(&self) -> usize {
        3
    }

    fn predict_raw(&self, image: &RasterImage) -> Result<Vec<f32>> {
        let va = (matching_fraction(image, self.color_a, self.tolerance)
            / self.reference_fraction)
            .clamp(0.0, 1.0);
        let vb = (matching_fraction(image, self.color_b, self.tolerance)
            / self.reference_fraction)
            .clamp(0.0, 1.0);
        let pa = 0.5 * va;
        let pb = 0.5 * vb;
        Ok(vec![1.0 - pa - pb, pa, pb])
    }
}

fn matching_fraction(image: &RasterImage, target: [f32; 3], tolerance: f32) -> f32 {
    let tol2 = tolerance * tolerance;
    let data = image.data();
    let mut matches = 0usize;
    for i in 0..image.pixel_count() {
        let dr = data[i * 3] - target[0];
        let dg = data[i * 3 + 1] - target[1];
        let db = data[i * 3 + 2] - target[2];
        if dr * dr + dg * dg + db * db <= tol2 {
            matches += 1;
        }
    }
    matches as f32 / image.pixel_count() as f32
}
