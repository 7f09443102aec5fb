//! Regional multi-scale prediction difference — the headline engine.
//!
//! The image is segmented at each ladder scale; every region's exclusion is
//! simulated once by background sampling, the classifier is re-run, and the
//! clamped prediction drop is written across the region. Per-scale maps are
//! averaged into the fused map.

use crate::background::{estimate_background_with, sample_exclusion, BackgroundParams};
use crate::classifiers::ClassifierHandle;
use crate::error::{Error, Result};
use crate::imagery::{RasterImage, SaliencyMap};
use crate::rng::{background_stream, region_stream, scale_stream};
use crate::segmentation::{segment_with, ScaleLadder, SegmentParams};

use super::diff::DifferenceFunction;
use super::ClassSelector;

/// Configuration of the regional engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PDConfig {
    /// Number of ladder scales (targets 2^1 … 2^r).
    pub r: u32,
    pub g: DifferenceFunction,
    pub seed: u64,
}

impl Default for PDConfig {
    fn default() -> Self {
        Self { r: 5, g: DifferenceFunction::Subtraction, seed: 0 }
    }
}

/// Result of a regional run: the fused map plus one map per scale.
#[derive(Debug, Clone)]
pub struct RegionalRun {
    pub fused: SaliencyMap,
    pub per_scale: Vec<SaliencyMap>,
    pub class: usize,
    pub baseline_probs: Vec<f32>,
}

/// Spec-shaped entry point with default segmentation/background knobs.
pub fn regional_pd(
    f: &ClassifierHandle,
    image: &RasterImage,
    class: usize,
    cfg: &PDConfig,
) -> Result<(SaliencyMap, Vec<SaliencyMap>)> {
    let run = regional_explain(
        f,
        image,
        ClassSelector::Index(class),
        cfg,
        &SegmentParams::default(),
        &BackgroundParams::default(),
    )?;
    Ok((run.fused, run.per_scale))
}

/// Full run with class resolution and explicit knobs.
///
/// Classifier calls: one baseline plus one per region per scale, which lies
/// in `[Σ 2^j, 2·Σ 2^j]` by the segmenter's count contract.
pub fn regional_explain(
    f: &ClassifierHandle,
    image: &RasterImage,
    class: ClassSelector,
    cfg: &PDConfig,
    segment_params: &SegmentParams,
    background_params: &BackgroundParams,
) -> Result<RegionalRun> {
    let ladder = ScaleLadder::new(cfg.r)?;
    let (w, h) = (image.width(), image.height());

    let baseline_probs = f.predict(image)?;
    let class = class.resolve(&baseline_probs)?;
    let baseline = baseline_probs[class] as f64;

    use rand::Rng;
    let background = estimate_background_with(
        image,
        background_stream(cfg.seed).random::<u64>(),
        background_params,
    )?;

    let mut per_scale = Vec::with_capacity(cfg.r as usize);
    for (idx, target) in ladder.target_counts().iter().enumerate() {
        let scale = idx as u32 + 1;
        let seg = segment_with(
            image,
            *target,
            scale_stream(cfg.seed, scale).random::<u64>(),
            segment_params,
        )?;
        let pixel_lists = seg.region_pixel_lists();
        let mut data = vec![0f32; w * h];
        for region in 0..seg.region_count() as u32 {
            let mut rng = region_stream(cfg.seed, scale, region);
            let excluded_image = sample_exclusion(image, &seg, region, &background, &mut rng)?;
            let p = f.predict(&excluded_image)?[class] as f64;
            let value = cfg.g.apply(baseline, p).max(0.0) as f32;
            for &px in &pixel_lists[region as usize] {
                data[px as usize] = value;
            }
        }
        per_scale.push(SaliencyMap::new(w, h, data, false)?);
    }

    let inv_r = 1.0 / cfg.r as f64;
    let mut fused = vec![0f32; w * h];
    for (i, slot) in fused.iter_mut().enumerate() {
        let sum: f64 = per_scale.iter().map(|m| m.data()[i] as f64).sum();
        *slot = (sum * inv_r) as f32;
    }

    Ok(RegionalRun {
        fused: SaliencyMap::new(w, h, fused, false)?,
        per_scale,
        class,
        baseline_probs,
    })
}

/// Predicted classifier-call interval for a regional run (baseline included).
pub fn regional_call_bounds(r: u32) -> Result<(u64, u64)> {
    if r == 0 || r > 62 {
        return Err(Error::invalid("scale count r outside [1, 62]"));
    }
    let regions: u64 = (1..=r).map(|j| 1u64 << j).sum();
    Ok((1 + regions, 1 + 2 * regions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{AreaFractionOracle, BackendKind, ConstantOracle};
    use crate::synth;

    fn handle(inner: Box<dyn crate::classifiers::Classifier>) -> ClassifierHandle {
        ClassifierHandle::new(BackendKind::Synthetic, inner)
    }

    fn red_oracle() -> ClassifierHandle {
        handle(Box::new(AreaFractionOracle::new([200.0, 30.0, 30.0], 60.0, 0.25).unwrap()))
    }

    #[test]
    fn uniform_image_call_count_is_exact() {
        // exact region counts on a uniform image: 1 + (2+4+8+16+32) calls
        let f = handle(Box::new(ConstantOracle::new(vec![0.5, 0.5]).unwrap()));
        let img = synth::uniform(64, 64, [128.0; 3]);
        let cfg = PDConfig { r: 5, ..Default::default() };
        regional_pd(&f, &img, 0, &cfg).unwrap();
        assert_eq!(f.call_count(), 63);
    }

    #[test]
    fn call_count_stays_within_bounds() {
        let f = red_oracle();
        let (img, _) = synth::disk_on_background(48, 48, (24, 24), 11.0, [200.0, 30.0, 30.0], [250.0; 3]);
        let cfg = PDConfig { r: 4, seed: 3, ..Default::default() };
        regional_pd(&f, &img, 1, &cfg).unwrap();
        let (lo, hi) = regional_call_bounds(4).unwrap();
        assert!(f.call_count() >= lo && f.call_count() <= hi, "{} outside [{lo}, {hi}]", f.call_count());
    }

    #[test]
    fn constant_classifier_gives_all_zero_maps() {
        let f = handle(Box::new(ConstantOracle::new(vec![0.3, 0.7]).unwrap()));
        let img = synth::uniform(32, 32, [77.0; 3]);
        let cfg = PDConfig { r: 3, ..Default::default() };
        let (fused, per_scale) = regional_pd(&f, &img, 1, &cfg).unwrap();
        assert!(fused.data().iter().all(|&v| v == 0.0));
        for m in per_scale {
            assert!(m.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn fused_is_mean_of_per_scale_maps() {
        let f = red_oracle();
        let (img, _) = synth::disk_on_background(40, 40, (20, 20), 9.0, [200.0, 30.0, 30.0], [250.0; 3]);
        let cfg = PDConfig { r: 3, seed: 1, ..Default::default() };
        let (fused, per_scale) = regional_pd(&f, &img, 1, &cfg).unwrap();
        for i in 0..fused.data().len() {
            let mean: f64 =
                per_scale.iter().map(|m| m.data()[i] as f64).sum::<f64>() / per_scale.len() as f64;
            let got = fused.data()[i] as f64;
            let tol = 1e-6 * mean.abs().max(1e-12);
            assert!((got - mean).abs() <= tol.max(1e-9), "pixel {i}: {got} vs {mean}");
        }
    }

    #[test]
    fn per_scale_maps_are_piecewise_constant_and_nonnegative() {
        let f = red_oracle();
        let (img, _) = synth::disk_on_background(32, 32, (16, 16), 8.0, [200.0, 30.0, 30.0], [250.0; 3]);
        let cfg = PDConfig { r: 3, seed: 2, ..Default::default() };
        let run = regional_explain(
            &f,
            &img,
            ClassSelector::Index(1),
            &cfg,
            &SegmentParams::default(),
            &BackgroundParams::default(),
        )
        .unwrap();
        use rand::Rng;
        for (idx, map) in run.per_scale.iter().enumerate() {
            assert!(map.data().iter().all(|&v| v >= 0.0));
            let scale = idx as u32 + 1;
            let seg = segment_with(
                &img,
                1 << scale,
                scale_stream(cfg.seed, scale).random::<u64>(),
                &SegmentParams::default(),
            )
            .unwrap();
            let mut region_value = vec![None; seg.region_count()];
            for (i, &l) in seg.labels().iter().enumerate() {
                let v = map.data()[i];
                match region_value[l as usize] {
                    None => region_value[l as usize] = Some(v),
                    Some(prev) => assert_eq!(prev.to_bits(), v.to_bits(), "region {l} not constant"),
                }
            }
        }
    }

    #[test]
    fn disk_recovered_by_thresholding_fused_map() {
        let f = red_oracle();
        let (img, mask) =
            synth::disk_on_background(64, 64, (32, 32), 14.0, [200.0, 30.0, 30.0], [250.0; 3]);
        let cfg = PDConfig { r: 5, seed: 4, ..Default::default() };
        let (fused, _) = regional_pd(&f, &img, 1, &cfg).unwrap();

        let max = fused.data().iter().cloned().fold(0.0f32, f32::max);
        assert!(max > 0.0);
        let mut inter = 0usize;
        let mut union = 0usize;
        for (i, &v) in fused.data().iter().enumerate() {
            let pred = v >= 0.5 * max;
            let truth = mask.data()[i];
            if pred && truth {
                inter += 1;
            }
            if pred || truth {
                union += 1;
            }
        }
        let iou = inter as f64 / union as f64;
        assert!(iou >= 0.5, "IoU {iou} below 0.5");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (img, _) = synth::disk_on_background(32, 32, (14, 18), 7.0, [200.0, 30.0, 30.0], [250.0; 3]);
        let cfg = PDConfig { r: 3, seed: 21, ..Default::default() };
        let a = regional_pd(&red_oracle(), &img, 1, &cfg).unwrap();
        let b = regional_pd(&red_oracle(), &img, 1, &cfg).unwrap();
        assert_eq!(a.0.data(), b.0.data());
        for (x, y) in a.1.iter().zip(&b.1) {
            assert_eq!(x.data(), y.data());
        }
    }

    #[test]
    fn inside_regions_outscore_outside_regions() {
        // with the area-fraction oracle, regions fully inside the disk must
        // strictly outscore regions fully outside (which sit at ~0)
        let f = red_oracle();
        let (img, mask) =
            synth::disk_on_background(64, 64, (32, 32), 16.0, [200.0, 30.0, 30.0], [250.0; 3]);
        let cfg = PDConfig { r: 5, seed: 6, ..Default::default() };
        let run = regional_explain(
            &f,
            &img,
            ClassSelector::Index(1),
            &cfg,
            &SegmentParams::default(),
            &BackgroundParams::default(),
        )
        .unwrap();

        use rand::Rng;
        let scale = 5u32;
        let seg = segment_with(
            &img,
            32,
            scale_stream(cfg.seed, scale).random::<u64>(),
            &SegmentParams::default(),
        )
        .unwrap();
        let map = &run.per_scale[4];
        let lists = seg.region_pixel_lists();
        let mut inside_min = f32::INFINITY;
        let mut outside_max = f32::NEG_INFINITY;
        for list in &lists {
            let all_in = list.iter().all(|&p| mask.data()[p as usize]);
            let all_out = list.iter().all(|&p| !mask.data()[p as usize]);
            let v = map.data()[list[0] as usize];
            if all_in {
                inside_min = inside_min.min(v);
            } else if all_out {
                outside_max = outside_max.max(v);
            }
        }
        assert!(inside_min > outside_max, "inside {inside_min} vs outside {outside_max}");
        assert!(outside_max <= 1e-3, "outside regions should score ~0, got {outside_max}");
    }
}
