//! Superpixel segmentation with a controllable region count.
//!
//! The segmenter is a k-means-style locally iterative clustering (SLIC-class)
//! over color + position, followed by a connectivity pass that relabels
//! disconnected fragments, absorbs slivers, and enforces the contract
//! `target ≤ region_count ≤ 2·target`. Granularity is the only property the
//! downstream engines rely on, so region-count fidelity is what this module
//! guarantees.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::imagery::RasterImage;
use crate::rng::scale_stream;

/// Per-pixel region labels partitioning an image at one scale.
///
/// Labels are dense (`0..region_count`) and every region is 4-connected.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    region_count: usize,
}

impl SegmentationMap {
    /// Build from a label raster, validating density of the label set.
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::invalid(format!(
                "expected {} labels for {}x{}, got {}",
                width * height,
                width,
                height,
                labels.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::invalid("empty segmentation"));
        }
        let max = *labels.iter().max().unwrap() as usize;
        let mut seen = vec![false; max + 1];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("region labels are not dense"));
        }
        Ok(Self { width, height, labels, region_count: max + 1 })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Pixel count per region.
    pub fn region_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.region_count];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Flat pixel indices grouped by region, one list per label.
    pub fn region_pixel_lists(&self) -> Vec<Vec<u32>> {
        let mut lists = vec![Vec::new(); self.region_count];
        for (i, &l) in self.labels.iter().enumerate() {
            lists[l as usize].push(i as u32);
        }
        lists
    }

    /// True when a flood fill from any pixel reaches its whole region.
    pub fn is_four_connected(&self) -> bool {
        let (w, h) = (self.width, self.height);
        let sizes = self.region_sizes();
        let mut seen_region = vec![false; self.region_count];
        let mut visited = vec![false; w * h];
        let mut stack = Vec::new();
        for start in 0..w * h {
            let region = self.labels[start] as usize;
            if seen_region[region] {
                continue;
            }
            seen_region[region] = true;
            let mut reached = 0usize;
            stack.push(start);
            visited[start] = true;
            while let Some(p) = stack.pop() {
                reached += 1;
                let (x, y) = (p % w, p / w);
                let mut push = |q: usize| {
                    if !visited[q] && self.labels[q] as usize == region {
                        visited[q] = true;
                        stack.push(q);
                    }
                };
                if x > 0 {
                    push(p - 1);
                }
                if x + 1 < w {
                    push(p + 1);
                }
                if y > 0 {
                    push(p - w);
                }
                if y + 1 < h {
                    push(p + w);
                }
            }
            if reached != sizes[region] {
                return false;
            }
        }
        true
    }
}

/// The multi-scale ladder of target region counts `2^1 … 2^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleLadder {
    r: u32,
}

impl ScaleLadder {
    pub fn new(r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("scale count r must be ≥ 1"));
        }
        if r > 24 {
            return Err(Error::invalid("scale count r too large (max 24)"));
        }
        Ok(Self { r })
    }

    pub fn scale_count(&self) -> u32 {
        self.r
    }

    pub fn target_counts(&self) -> Vec<usize> {
        (1..=self.r).map(|j| 1usize << j).collect()
    }
}

/// Color space used for clustering distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorSpace {
    #[default]
    Rgb,
    Lab,
}

impl ColorSpace {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rgb" => Ok(ColorSpace::Rgb),
            "lab" => Ok(ColorSpace::Lab),
            other => Err(Error::invalid(format!("unknown colorspace '{other}' (rgb|lab)"))),
        }
    }
}

/// Tunables for [`segment_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentParams {
    /// Spatial regularity weight on the [0, 255] color scale.
    pub compactness: f32,
    /// Clustering iteration budget.
    pub iterations: usize,
    pub color_space: ColorSpace,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self { compactness: 10.0, iterations: 10, color_space: ColorSpace::Rgb }
    }
}

/// Segment with default parameters. Deterministic for fixed
/// `(image, target_regions, seed)`; the achieved count lies in
/// `[target_regions, 2·target_regions]`.
pub fn segment(image: &RasterImage, target_regions: usize, seed: u64) -> Result<SegmentationMap> {
    segment_with(image, target_regions, seed, &SegmentParams::default())
}

pub fn segment_with(
    image: &RasterImage,
    target_regions: usize,
    seed: u64,
    params: &SegmentParams,
) -> Result<SegmentationMap> {
    let (w, h) = (image.width(), image.height());
    let n = w * h;
    if target_regions == 0 || target_regions > n {
        return Err(Error::invalid(format!(
            "target_regions {target_regions} outside [1, {n}]"
        )));
    }
    if target_regions == 1 {
        return SegmentationMap::new(w, h, vec![0; n]);
    }
    if target_regions == n {
        return SegmentationMap::new(w, h, (0..n as u32).collect());
    }

    let features = color_features(image, params.color_space);
    let labels = cluster(image, &features, target_regions, seed, params);
    let labels = enforce_contract(labels, w, h, target_regions);
    SegmentationMap::new(w, h, labels)
}

/// One segmentation per ladder scale, coarse to fine.
pub fn segment_ladder(
    image: &RasterImage,
    ladder: &ScaleLadder,
    seed: u64,
) -> Result<Vec<SegmentationMap>> {
    ladder
        .target_counts()
        .iter()
        .enumerate()
        .map(|(i, &target)| {
            let scale = i as u32 + 1;
            segment(image, target, scale_stream(seed, scale).random::<u64>())
        })
        .collect()
}

/// Region ids owning at least one pixel on the outermost row/column ring.
pub fn boundary_regions(seg: &SegmentationMap) -> BTreeSet<u32> {
    let (w, h) = (seg.width(), seg.height());
    let mut out = BTreeSet::new();
    for x in 0..w {
        out.insert(seg.label(x, 0));
        out.insert(seg.label(x, h - 1));
    }
    for y in 0..h {
        out.insert(seg.label(0, y));
        out.insert(seg.label(w - 1, y));
    }
    out
}

fn color_features(image: &RasterImage, space: ColorSpace) -> Vec<[f32; 3]> {
    let n = image.pixel_count();
    let mut out = Vec::with_capacity(n);
    let data = image.data();
    for i in 0..n {
        let rgb = [data[i * 3], data[i * 3 + 1], data[i * 3 + 2]];
        out.push(match space {
            ColorSpace::Rgb => rgb,
            ColorSpace::Lab => rgb_to_lab(rgb),
        });
    }
    out
}

/// sRGB in [0,255] to CIELAB (D65).
fn rgb_to_lab(rgb: [f32; 3]) -> [f32; 3] {
    fn inv_gamma(c: f32) -> f32 {
        let c = c / 255.0;
        if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    }
    let r = inv_gamma(rgb[0]);
    let g = inv_gamma(rgb[1]);
    let b = inv_gamma(rgb[2]);
    let x = (0.4124 * r + 0.3576 * g + 0.1805 * b) / 0.95047;
    let y = 0.2126 * r + 0.7152 * g + 0.0722 * b;
    let z = (0.0193 * r + 0.1192 * g + 0.9505 * b) / 1.08883;
    fn f(t: f32) -> f32 {
        if t > 0.008856 {
            t.cbrt()
        } else {
            7.787 * t + 16.0 / 116.0
        }
    }
    let (fx, fy, fz) = (f(x), f(y), f(z));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

struct Center {
    x: f32,
    y: f32,
    color: [f32; 3],
}

/// Grid dimensions whose product is ≥ target (exact when a divisor pair
/// exists), preferring cells whose aspect matches the image.
fn grid_dims(w: usize, h: usize, target: usize) -> (usize, usize) {
    let image_aspect = (w as f64 / h as f64).ln();
    let mut best: Option<(usize, usize, f64)> = None;
    for gh in 1..=target.min(h) {
        let gw = target.div_ceil(gh);
        if gw > w {
            continue;
        }
        let overshoot = (gw * gh - target) as f64;
        let aspect_penalty = ((gw as f64 / gh as f64).ln() - image_aspect).abs();
        let cost = overshoot * 1e6 + aspect_penalty;
        if best.map_or(true, |(_, _, c)| cost < c) {
            best = Some((gw, gh, cost));
        }
    }
    // target ≤ w*h guarantees at least gh = min(target, h) is feasible
    let (gw, gh, _) = best.expect("no feasible superpixel grid");
    (gw, gh)
}

fn cluster(
    image: &RasterImage,
    features: &[[f32; 3]],
    target: usize,
    seed: u64,
    params: &SegmentParams,
) -> Vec<u32> {
    let (w, h) = (image.width(), image.height());
    let (gw, gh) = grid_dims(w, h, target);
    let k = gw * gh;
    let step = ((w * h) as f32 / k as f32).sqrt().max(1.0);

    // Seeded jitter keeps cells connected while making the seed meaningful.
    let mut rng = scale_stream(seed, 0);
    let jitter = step / 16.0;
    let mut centers = Vec::with_capacity(k);
    for gy in 0..gh {
        for gx in 0..gw {
            let cx = (gx as f32 + 0.5) * w as f32 / gw as f32 + rng.random_range(-jitter..=jitter);
            let cy = (gy as f32 + 0.5) * h as f32 / gh as f32 + rng.random_range(-jitter..=jitter);
            let (px, py) = lowest_gradient_nearby(features, w, h, cx, cy);
            centers.push(Center { x: px as f32, y: py as f32, color: features[py * w + px] });
        }
    }

    let spatial_weight = (params.compactness / step) * (params.compactness / step);
    let mut labels = vec![u32::MAX; w * h];
    let mut best_d2 = vec![f32::INFINITY; w * h];

    for _ in 0..params.iterations {
        labels.fill(u32::MAX);
        best_d2.fill(f32::INFINITY);
        for (ci, c) in centers.iter().enumerate() {
            let reach = 2.0 * step;
            let x0 = (c.x - reach).floor().max(0.0) as usize;
            let x1 = ((c.x + reach).ceil() as usize).min(w - 1);
            let y0 = (c.y - reach).floor().max(0.0) as usize;
            let y1 = ((c.y + reach).ceil() as usize).min(h - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let p = y * w + x;
                    let d2 = distance2(c, features[p], x, y, spatial_weight);
                    if d2 < best_d2[p] {
                        best_d2[p] = d2;
                        labels[p] = ci as u32;
                    }
                }
            }
        }
        // Pixels outside every search window fall back to a full scan.
        for p in 0..w * h {
            if labels[p] == u32::MAX {
                let (x, y) = (p % w, p / w);
                let mut best = f32::INFINITY;
                for (ci, c) in centers.iter().enumerate() {
                    let d2 = distance2(c, features[p], x, y, spatial_weight);
                    if d2 < best {
                        best = d2;
                        labels[p] = ci as u32;
                    }
                }
            }
        }

        let mut acc = vec![(0f64, 0f64, [0f64; 3], 0usize); k];
        for p in 0..w * h {
            let (x, y) = (p % w, p / w);
            let a = &mut acc[labels[p] as usize];
            a.0 += x as f64;
            a.1 += y as f64;
            for c in 0..3 {
                a.2[c] += features[p][c] as f64;
            }
            a.3 += 1;
        }
        for (ci, a) in acc.iter().enumerate() {
            if a.3 > 0 {
                let inv = 1.0 / a.3 as f64;
                centers[ci].x = (a.0 * inv) as f32;
                centers[ci].y = (a.1 * inv) as f32;
                centers[ci].color =
                    [(a.2[0] * inv) as f32, (a.2[1] * inv) as f32, (a.2[2] * inv) as f32];
            }
        }
    }
    labels
}

#[inline]
fn distance2(c: &Center, color: [f32; 3], x: usize, y: usize, spatial_weight: f32) -> f32 {
    let dc = (c.color[0] - color[0]) * (c.color[0] - color[0])
        + (c.color[1] - color[1]) * (c.color[1] - color[1])
        + (c.color[2] - color[2]) * (c.color[2] - color[2]);
    let dx = c.x - x as f32;
    let dy = c.y - y as f32;
    dc + spatial_weight * (dx * dx + dy * dy)
}

/// Move a seed point to the 3×3 neighbor with the smallest color gradient.
fn lowest_gradient_nearby(
    features: &[[f32; 3]],
    w: usize,
    h: usize,
    cx: f32,
    cy: f32,
) -> (usize, usize) {
    let px = (cx.round() as isize).clamp(0, w as isize - 1) as usize;
    let py = (cy.round() as isize).clamp(0, h as isize - 1) as usize;
    if w < 3 || h < 3 {
        return (px, py);
    }
    let px = px.clamp(1, w - 2);
    let py = py.clamp(1, h - 2);
    let grad = |x: usize, y: usize| -> f32 {
        let mut g = 0.0;
        for c in 0..3 {
            let dx = features[y * w + x + 1][c] - features[y * w + x - 1][c];
            let dy = features[(y + 1) * w + x][c] - features[(y - 1) * w + x][c];
            g += dx * dx + dy * dy;
        }
        g
    };
    let mut best = (px, py);
    let mut best_g = f32::INFINITY;
    for y in py - 1..=py + 1 {
        for x in px - 1..=px + 1 {
            let g = grad(x, y);
            if g < best_g {
                best_g = g;
                best = (x, y);
            }
        }
    }
    best
}

/// Working partition: per-region pixel lists plus a label raster.
struct Partition {
    w: usize,
    h: usize,
    labels: Vec<u32>,
    pixels: Vec<Vec<u32>>,
}

impl Partition {
    fn live_count(&self) -> usize {
        self.pixels.iter().filter(|p| !p.is_empty()).count()
    }

    /// Neighbor labels of `region` with the touching pixel counts folded away;
    /// returns the adjacent region of maximal size (ties: lowest label).
    fn largest_neighbor(&self, region: usize, sizes: &[usize]) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut seen = BTreeSet::new();
        for &p in &self.pixels[region] {
            let p = p as usize;
            let (x, y) = (p % self.w, p / self.w);
            let mut consider = |q: usize| {
                let l = self.labels[q] as usize;
                if l != region && seen.insert(l) {
                    best = match best {
                        None => Some(l),
                        Some(b) => {
                            if sizes[l] > sizes[b] || (sizes[l] == sizes[b] && l < b) {
                                Some(l)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            };
            if x > 0 {
                consider(p - 1);
            }
            if x + 1 < self.w {
                consider(p + 1);
            }
            if y > 0 {
                consider(p - self.w);
            }
            if y + 1 < self.h {
                consider(p + self.w);
            }
        }
        best
    }

    fn merge_into(&mut self, from: usize, into: usize) {
        let moved = std::mem::take(&mut self.pixels[from]);
        for &p in &moved {
            self.labels[p as usize] = into as u32;
        }
        self.pixels[into].extend(moved);
    }
}

/// Relabel raw cluster output into dense, 4-connected regions and force the
/// achieved count into `[target, 2·target]`.
fn enforce_contract(cluster_labels: Vec<u32>, w: usize, h: usize, target: usize) -> Vec<u32> {
    let comp_labels = connected_components(&cluster_labels, w, h);
    let count = 1 + *comp_labels.iter().max().unwrap() as usize;
    let mut pixels = vec![Vec::new(); count];
    for (p, &l) in comp_labels.iter().enumerate() {
        pixels[l as usize].push(p as u32);
    }
    let mut part = Partition { w, h, labels: comp_labels, pixels };

    // Fold slivers into their largest neighbor while the lower bound allows.
    let min_size = std::cmp::max(1, (w * h) / (4 * target));
    loop {
        if part.live_count() <= target {
            break;
        }
        let sizes: Vec<usize> = part.pixels.iter().map(|p| p.len()).collect();
        let candidate = sizes
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0 && s < min_size)
            .min_by_key(|(i, &s)| (s, *i))
            .map(|(i, _)| i);
        let Some(region) = candidate else { break };
        let Some(neighbor) = part.largest_neighbor(region, &sizes) else { break };
        part.merge_into(region, neighbor);
    }

    // Upper bound: absorb the smallest region until ≤ 2·target.
    while part.live_count() > 2 * target {
        let sizes: Vec<usize> = part.pixels.iter().map(|p| p.len()).collect();
        let region = sizes
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .min_by_key(|(i, &s)| (s, *i))
            .map(|(i, _)| i)
            .expect("nonempty partition");
        let Some(neighbor) = part.largest_neighbor(region, &sizes) else { break };
        part.merge_into(region, neighbor);
    }

    // Lower bound: split the largest region along a BFS prefix (the prefix
    // stays connected; the remainder is re-split into components).
    while part.live_count() < target {
        let (region, _) = part
            .pixels
            .iter()
            .enumerate()
            .max_by_key(|(i, p)| (p.len(), usize::MAX - *i))
            .expect("nonempty partition");
        if part.pixels[region].len() < 2 {
            break;
        }
        split_region(&mut part, region);
    }

    densify(&part.labels)
}

fn split_region(part: &mut Partition, region: usize) {
    let members = std::mem::take(&mut part.pixels[region]);
    let member_set: BTreeSet<u32> = members.iter().copied().collect();
    let start = *members.iter().min().unwrap();

    let mut order = Vec::with_capacity(members.len());
    let mut visited = BTreeSet::new();
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(start);
    visited.insert(start);
    while let Some(p) = queue.pop_front() {
        order.push(p);
        for q in four_neighbors(p as usize, part.w, part.h) {
            let q = q as u32;
            if member_set.contains(&q) && visited.insert(q) {
                queue.push_back(q);
            }
        }
    }

    let keep = order.len().div_ceil(2);
    part.pixels[region] = order[..keep].to_vec();

    // Remainder pixels become one fresh region per connected component.
    let rest: BTreeSet<u32> = order[keep..].iter().copied().collect();
    let mut assigned = BTreeSet::new();
    for &p in &order[keep..] {
        if assigned.contains(&p) {
            continue;
        }
        let mut component = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(p);
        assigned.insert(p);
        while let Some(q) = queue.pop_front() {
            component.push(q);
            for nb in four_neighbors(q as usize, part.w, part.h) {
                let nb = nb as u32;
                if rest.contains(&nb) && assigned.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
        let new_label = part.pixels.len() as u32;
        for &q in &component {
            part.labels[q as usize] = new_label;
        }
        part.pixels.push(component);
    }
}

fn four_neighbors(p: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (p % w, p / w);
    let mut out = [usize::MAX; 4];
    let mut n = 0;
    if x > 0 {
        out[n] = p - 1;
        n += 1;
    }
    if x + 1 < w {
        out[n] = p + 1;
        n += 1;
    }
    if y > 0 {
        out[n] = p - w;
        n += 1;
    }
    if y + 1 < h {
        out[n] = p + w;
        n += 1;
    }
    out.into_iter().take(n)
}

/// 4-connected components of equal input labels, numbered in scan order.
fn connected_components(labels: &[u32], w: usize, h: usize) -> Vec<u32> {
    let mut out = vec![u32::MAX; labels.len()];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..labels.len() {
        if out[start] != u32::MAX {
            continue;
        }
        let source = labels[start];
        out[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            for q in four_neighbors(p, w, h) {
                if out[q] == u32::MAX && labels[q] == source {
                    out[q] = next;
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    out
}

/// Renumber labels densely in order of first appearance.
fn densify(labels: &[u32]) -> Vec<u32> {
    let max = *labels.iter().max().unwrap() as usize;
    let mut remap = vec![u32::MAX; max + 1];
    let mut next = 0u32;
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        if remap[l as usize] == u32::MAX {
            remap[l as usize] = next;
            next += 1;
        }
        out.push(remap[l as usize]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn single_region_covers_everything() {
        let img = synth::uniform(9, 7, [40.0, 80.0, 120.0]);
        let seg = segment(&img, 1, 0).unwrap();
        assert_eq!(seg.region_count(), 1);
        assert!(seg.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn rejects_target_above_pixel_count() {
        let img = synth::uniform(4, 4, [0.0; 3]);
        assert!(segment(&img, 17, 0).is_err());
        assert!(segment(&img, 0, 0).is_err());
    }

    #[test]
    fn uniform_image_target_four_is_grid_like() {
        let img = synth::uniform(64, 64, [128.0; 3]);
        let seg = segment(&img, 4, 7).unwrap();
        assert_eq!(seg.region_count(), 4);
        let expect = 64 * 64 / 4;
        for s in seg.region_sizes() {
            let dev = (s as f64 - expect as f64).abs() / expect as f64;
            assert!(dev <= 0.30, "area {s} deviates more than 30% from {expect}");
        }
        assert!(seg.is_four_connected());
    }

    #[test]
    fn uniform_ladder_counts_are_exact_powers() {
        let img = synth::uniform(64, 64, [200.0, 10.0, 10.0]);
        let maps = segment_ladder(&img, &ScaleLadder::new(3).unwrap(), 3).unwrap();
        let counts: Vec<usize> = maps.iter().map(|m| m.region_count()).collect();
        assert_eq!(counts, vec![2, 4, 8]);
    }

    #[test]
    fn ladder_r5_counts_near_targets() {
        let (img, _) = synth::disk_on_background(64, 64, (32, 32), 14.0, [200.0, 30.0, 30.0], [250.0; 3]);
        let maps = segment_ladder(&img, &ScaleLadder::new(5).unwrap(), 11).unwrap();
        assert_eq!(maps.len(), 5);
        for (j, m) in maps.iter().enumerate() {
            let target = 1usize << (j + 1);
            assert!(
                m.region_count() >= target && m.region_count() <= 2 * target,
                "scale {} count {} outside [{target}, {}]",
                j + 1,
                m.region_count(),
                2 * target
            );
        }
        // mean region area strictly shrinks with scale
        for pair in maps.windows(2) {
            assert!(pair[1].region_count() > pair[0].region_count());
        }
    }

    #[test]
    fn determinism_same_seed_same_labels() {
        let (img, _) = synth::disk_on_background(48, 48, (20, 26), 10.0, [30.0, 160.0, 40.0], [248.0; 3]);
        let a = segment(&img, 16, 42).unwrap();
        let b = segment(&img, 16, 42).unwrap();
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn disk_boundary_adheres_to_region_boundaries() {
        let (img, mask) = synth::disk_on_background(64, 64, (32, 32), 16.0, [210.0, 20.0, 20.0], [252.0; 3]);
        let seg = segment(&img, 16, 5).unwrap();

        // Oracle: analytic disk rim = mask pixels with a non-mask 4-neighbor.
        let mut rim = Vec::new();
        for y in 0..64 {
            for x in 0..64 {
                if mask.get(x, y) {
                    let edge = [(1i32, 0i32), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| {
                        let (nx, ny) = (x as i32 + dx, y as i32 + dy);
                        nx < 0 || ny < 0 || nx >= 64 || ny >= 64 || !mask.get(nx as usize, ny as usize)
                    });
                    if edge {
                        rim.push((x, y));
                    }
                }
            }
        }
        let mut seg_boundary = Vec::new();
        for y in 0..64usize {
            for x in 0..64usize {
                let l = seg.label(x, y);
                if (x + 1 < 64 && seg.label(x + 1, y) != l) || (y + 1 < 64 && seg.label(x, y + 1) != l) {
                    seg_boundary.push((x as i32, y as i32));
                }
            }
        }
        let within = rim
            .iter()
            .filter(|&&(x, y)| {
                seg_boundary.iter().any(|&(bx, by)| {
                    let (dx, dy) = (bx - x as i32, by - y as i32);
                    dx * dx + dy * dy <= 4
                })
            })
            .count();
        let frac = within as f64 / rim.len() as f64;
        assert!(frac >= 0.90, "only {frac:.2} of rim pixels near region boundaries");
    }

    #[test]
    fn boundary_regions_trivial_cases() {
        let img = synth::uniform(3, 3, [9.0; 3]);
        let seg = segment(&img, 1, 0).unwrap();
        assert_eq!(boundary_regions(&seg), BTreeSet::from([0]));

        let four = SegmentationMap::new(2, 2, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(boundary_regions(&four), BTreeSet::from([0, 1, 2, 3]));
    }

    #[test]
    fn boundary_regions_grid_outer_cells() {
        // 4x4 cell grid on 64x64: the 12 outer cells touch the ring.
        let mut labels = vec![0u32; 64 * 64];
        for y in 0..64 {
            for x in 0..64 {
                labels[y * 64 + x] = ((y / 16) * 4 + x / 16) as u32;
            }
        }
        let seg = SegmentationMap::new(64, 64, labels).unwrap();
        let boundary = boundary_regions(&seg);
        assert_eq!(boundary.len(), 12);
        for inner in [5u32, 6, 9, 10] {
            assert!(!boundary.contains(&inner));
        }
    }

    #[test]
    fn partition_property_holds() {
        let (img, _) = synth::disk_on_background(40, 30, (17, 14), 8.0, [20.0, 20.0, 220.0], [250.0; 3]);
        let seg = segment(&img, 10, 9).unwrap();
        let sizes = seg.region_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), 40 * 30);
        assert!(sizes.iter().all(|&s| s > 0));
        assert!(seg.is_four_connected());
        assert!(seg.region_count() >= 10 && seg.region_count() <= 20);
    }

    #[test]
    fn every_pixel_its_own_region_at_max_target() {
        let img = synth::uniform(4, 3, [1.0; 3]);
        let seg = segment(&img, 12, 0).unwrap();
        assert_eq!(seg.region_count(), 12);
    }

    #[test]
    fn lab_colorspace_still_meets_contract() {
        let (img, _) = synth::disk_on_background(32, 32, (16, 16), 8.0, [210.0, 40.0, 40.0], [250.0; 3]);
        let params = SegmentParams { color_space: ColorSpace::Lab, ..Default::default() };
        let seg = segment_with(&img, 8, 1, &params).unwrap();
        assert!(seg.region_count() >= 8 && seg.region_count() <= 16);
        assert!(seg.is_four_connected());
    }
}
