//! Core raster types and file I/O for images, masks and saliency maps.
//!
//! Images are held as row-major interleaved RGB `f32` samples on the
//! `[0, 255]` scale. Saliency maps round-trip bit-exactly through the
//! `PF-GRAY` raw float format; heatmaps and overlays are 8-bit renderings.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// H×W×3 image, row-major interleaved RGB, samples in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be nonzero"));
        }
        if data.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "expected {} samples for {}x{}x3, got {}",
                width * height * 3,
                width,
                height,
                data.len()
            )));
        }
        if let Some(s) = data.iter().find(|s| !(0.0..=255.0).contains(*s)) {
            return Err(Error::invalid(format!("sample {s} outside [0, 255]")));
        }
        Ok(Self { width, height, data })
    }

    /// Constant-color image.
    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// RGB triple at (x, y).
    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Overwrite the RGB triple at (x, y). Values are clamped to `[0, 255]`.
    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i] = rgb[0].clamp(0.0, 255.0);
        self.data[i + 1] = rgb[1].clamp(0.0, 255.0);
        self.data[i + 2] = rgb[2].clamp(0.0, 255.0);
    }
}

/// H×W relevance raster. `signed` marks maps that may carry negative values.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    signed: bool,
    data: Vec<f32>,
}

impl SaliencyMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>, signed: bool) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "expected {} values for {}x{}, got {}",
                width * height,
                width,
                height,
                data.len()
            )));
        }
        if !signed {
            if let Some(v) = data.iter().find(|v| **v < 0.0) {
                return Err(Error::invalid(format!(
                    "negative value {v} in unsigned saliency map"
                )));
            }
        }
        Ok(Self { width, height, signed, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, signed: false, data: vec![0.0; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn signed(&self) -> bool {
        self.signed
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    /// Values rescaled to `[0, 1]` by min-max. A constant map (no information)
    /// normalizes to all zeros.
    pub fn normalized(&self) -> Vec<f32> {
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(hi > lo) {
            return vec![0.0; self.data.len()];
        }
        let span = hi - lo;
        self.data.iter().map(|&v| (v - lo) / span).collect()
    }
}

/// Per-pixel boolean mask with the dimensions of the raster it annotates.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "expected {} mask entries for {}x{}, got {}",
                width * height,
                width,
                height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|b| **b).count()
    }
}

/// Output mode for [`save_saliency`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaliencyOutput {
    /// `PF-GRAY` raw float map, bit-exact round trip.
    Raw,
    /// 8-bit color-mapped rendering, min-max normalized per map.
    Heatmap,
}

/// Load an 8-bit RGB portable image and promote samples to `f32` in `[0, 255]`.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let dynimg = image::open(path).map_err(|source| Error::Image { path: path.into(), source })?;
    let rgb = dynimg.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::Format { path: path.into(), reason: "zero-sized image".into() });
    }
    let data = rgb.as_raw().iter().map(|&b| b as f32).collect();
    RasterImage::new(w, h, data)
}

/// Save an image as 8-bit RGB. Samples are rounded to the nearest integer, so
/// images loaded by [`load_image`] round-trip exactly.
pub fn save_image(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = image::RgbImage::new(image.width() as u32, image.height() as u32);
    for y in 0..image.height() {
        for x in 0..image.width() {
            let [r, g, b] = image.pixel(x, y);
            buf.put_pixel(x as u32, y as u32, image::Rgb([quant8(r), quant8(g), quant8(b)]));
        }
    }
    buf.save(path).map_err(|source| Error::Image { path: path.into(), source })
}

fn quant8(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Write a saliency map either as a raw float file or as a heatmap image.
pub fn save_saliency(map: &SaliencyMap, path: impl AsRef<Path>, mode: SaliencyOutput) -> Result<()> {
    match mode {
        SaliencyOutput::Raw => save_saliency_raw(map, path),
        SaliencyOutput::Heatmap => render_heatmap(map).save_err(path),
    }
}

/// Raw float map: text header `PF-GRAY <width> <height>\n`, then
/// width×height little-endian `f32`, row-major, top-to-bottom.
pub fn save_saliency_raw(map: &SaliencyMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io { path: path.into(), source };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write!(w, "PF-GRAY {} {}\n", map.width(), map.height()).map_err(io)?;
    for v in map.data() {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Read a `PF-GRAY` raw float map. The `signed` flag is recovered from the
/// stored values.
pub fn load_saliency_raw(path: impl AsRef<Path>) -> Result<SaliencyMap> {
    let path = path.as_ref();
    let io = |source| Error::Io { path: path.into(), source };
    let bad = |reason: &str| Error::Format { path: path.into(), reason: reason.into() };
    let mut r = BufReader::new(File::open(path).map_err(io)?);

    let mut header = Vec::new();
    r.read_until(b'\n', &mut header).map_err(io)?;
    let header = String::from_utf8(header).map_err(|_| bad("non-utf8 header"))?;
    let mut parts = header.trim_end_matches('\n').split(' ');
    if parts.next() != Some("PF-GRAY") {
        return Err(bad("missing PF-GRAY magic"));
    }
    let width: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad width"))?;
    let height: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad height"))?;
    if parts.next().is_some() {
        return Err(bad("trailing header fields"));
    }

    let mut bytes = vec![0u8; width * height * 4];
    r.read_exact(&mut bytes).map_err(io)?;
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let signed = data.iter().any(|&v| v < 0.0);
    SaliencyMap::new(width, height, data, signed)
}

/// Load an 8-bit grayscale mask; values ≥ 128 are true.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let dynimg = image::open(path).map_err(|source| Error::Image { path: path.into(), source })?;
    let gray = dynimg.to_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::Format { path: path.into(), reason: "zero-sized mask".into() });
    }
    let data = gray.as_raw().iter().map(|&b| b >= 128).collect();
    BinaryMask::new(w, h, data)
}

/// Save a mask as 8-bit grayscale (true = 255, false = 0).
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = image::GrayImage::new(mask.width() as u32, mask.height() as u32);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            buf.put_pixel(x as u32, y as u32, image::Luma([if mask.get(x, y) { 255 } else { 0 }]));
        }
    }
    buf.save(path).map_err(|source| Error::Image { path: path.into(), source })
}

/// Cold-to-hot anchors: deep blue → cyan → green → yellow → red.
const HEAT_ANCHORS: [(f32, [u8; 3]); 5] = [
    (0.0, [20, 28, 120]),
    (0.25, [0, 150, 200]),
    (0.5, [60, 200, 90]),
    (0.75, [250, 210, 30]),
    (1.0, [220, 30, 30]),
];

/// Map a normalized value in `[0, 1]` onto the heat color ramp.
pub fn heat_color(v: f32) -> [u8; 3] {
    let x = v.clamp(0.0, 1.0);
    let mut i = 0;
    while i + 2 < HEAT_ANCHORS.len() && x > HEAT_ANCHORS[i + 1].0 {
        i += 1;
    }
    let (x0, c0) = HEAT_ANCHORS[i];
    let (x1, c1) = HEAT_ANCHORS[i + 1];
    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    let lerp = |a: u8, b: u8| (a as f32 + t * (b as f32 - a as f32)).round() as u8;
    [lerp(c0[0], c1[0]), lerp(c0[1], c1[1]), lerp(c0[2], c1[2])]
}

/// Render a map to an 8-bit heatmap. All-zero (or constant) maps come out as
/// a single cold color.
pub fn render_heatmap(map: &SaliencyMap) -> image::RgbImage {
    let norm = map.normalized();
    let mut buf = image::RgbImage::new(map.width() as u32, map.height() as u32);
    for y in 0..map.height() {
        for x in 0..map.width() {
            let c = heat_color(norm[y * map.width() + x]);
            buf.put_pixel(x as u32, y as u32, image::Rgb(c));
        }
    }
    buf
}

/// Alpha-blend the heatmap rendering of `map` onto `base` (alpha on the heat side).
pub fn render_overlay(base: &RasterImage, map: &SaliencyMap, alpha: f32) -> Result<image::RgbImage> {
    if base.width() != map.width() || base.height() != map.height() {
        return Err(Error::invalid("overlay dimensions do not match"));
    }
    let a = alpha.clamp(0.0, 1.0);
    let norm = map.normalized();
    let mut buf = image::RgbImage::new(base.width() as u32, base.height() as u32);
    for y in 0..base.height() {
        for x in 0..base.width() {
            let heat = heat_color(norm[y * base.width() + x]);
            let img = base.pixel(x, y);
            let blend = |h: u8, i: f32| (a * h as f32 + (1.0 - a) * i).round().clamp(0.0, 255.0) as u8;
            buf.put_pixel(
                x as u32,
                y as u32,
                image::Rgb([blend(heat[0], img[0]), blend(heat[1], img[1]), blend(heat[2], img[2])]),
            );
        }
    }
    Ok(buf)
}

trait SaveErr {
    fn save_err(&self, path: impl AsRef<Path>) -> Result<()>;
}

impl SaveErr for image::RgbImage {
    fn save_err(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.save(path).map_err(|source| Error::Image { path: path.into(), source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn raster_image_rejects_bad_lengths_and_ranges() {
        assert!(RasterImage::new(2, 2, vec![0.0; 11]).is_err());
        assert!(RasterImage::new(2, 2, vec![256.0; 12]).is_err());
        assert!(RasterImage::new(0, 2, vec![]).is_err());
        assert!(RasterImage::new(2, 2, vec![0.0; 12]).is_ok());
    }

    #[test]
    fn load_all_white_and_black_pixels() {
        let dir = tmpdir();
        let white = dir.path().join("white.png");
        save_image(&RasterImage::filled(2, 2, [255.0, 255.0, 255.0]).unwrap(), &white).unwrap();
        let img = load_image(&white).unwrap();
        assert!(img.data().iter().all(|&s| s == 255.0));

        let black = dir.path().join("black.png");
        save_image(&RasterImage::filled(1, 1, [0.0, 0.0, 0.0]).unwrap(), &black).unwrap();
        let img = load_image(&black).unwrap();
        assert_eq!(img.data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn load_reads_dimensions_from_header() {
        // 256x256 asset written on the fly; the header is the oracle.
        let dir = tmpdir();
        let path = dir.path().join("asset.png");
        let data: Vec<f32> = (0..256 * 256 * 3).map(|i| (i % 251) as f32).collect();
        save_image(&RasterImage::new(256, 256, data).unwrap(), &path).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!((img.width(), img.height()), (256, 256));
        assert_eq!(img.data().len(), 196_608);
    }

    #[test]
    fn load_missing_file_errors() {
        assert!(load_image("/nonexistent/nope.png").is_err());
    }

    #[test]
    fn image_save_load_round_trip_exact() {
        let dir = tmpdir();
        let path = dir.path().join("rt.png");
        let data: Vec<f32> = (0..8 * 5 * 3).map(|i| ((i * 7) % 256) as f32).collect();
        let img = RasterImage::new(8, 5, data).unwrap();
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn raw_round_trip_bit_exact() {
        let dir = tmpdir();
        let path = dir.path().join("map.pfg");
        let data = vec![0.0f32, 1.5, 1e-20, 3.4e38, 255.0, 0.1 + 0.2];
        let map = SaliencyMap::new(3, 2, data.clone(), false).unwrap();
        save_saliency(&map, &path, SaliencyOutput::Raw).unwrap();
        let back = load_saliency_raw(&path).unwrap();
        assert_eq!(back.data(), map.data());
        assert_eq!((back.width(), back.height()), (3, 2));
    }

    #[test]
    fn raw_round_trip_preserves_sign_flag() {
        let dir = tmpdir();
        let path = dir.path().join("signed.pfg");
        let map = SaliencyMap::new(2, 1, vec![-0.5, 0.5], true).unwrap();
        save_saliency_raw(&map, &path).unwrap();
        let back = load_saliency_raw(&path).unwrap();
        assert!(back.signed());
        assert_eq!(back.data(), map.data());
    }

    #[test]
    fn heatmap_constant_zero_is_single_cold_color() {
        let map = SaliencyMap::zeros(4, 4);
        let heat = render_heatmap(&map);
        let first = *heat.get_pixel(0, 0);
        assert!(heat.pixels().all(|p| *p == first));
        assert_eq!(first.0, heat_color(0.0));
    }

    #[test]
    fn heatmap_single_nonzero_pixel_is_hottest() {
        let mut map = SaliencyMap::zeros(3, 3);
        map.set(1, 2, 0.25);
        let heat = render_heatmap(&map);
        assert_eq!(heat.get_pixel(1, 2).0, heat_color(1.0));
        assert_eq!(heat.get_pixel(0, 0).0, heat_color(0.0));
    }

    #[test]
    fn mask_round_trip_and_threshold() {
        let dir = tmpdir();
        let path = dir.path().join("mask.png");
        let mask = BinaryMask::new(2, 2, vec![true, false, false, true]).unwrap();
        save_mask(&mask, &path).unwrap();
        assert_eq!(load_mask(&path).unwrap(), mask);
    }

    #[test]
    fn unsigned_map_rejects_negative_values() {
        assert!(SaliencyMap::new(1, 1, vec![-0.1], false).is_err());
        assert!(SaliencyMap::new(1, 1, vec![-0.1], true).is_ok());
    }
}
