//! Synthetic benchmark imagery: uniform fields, disks, blob pairs and the
//! shape corpus used by the evaluation harness. Every generator is
//! deterministic and returns exact ground-truth masks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::imagery::{BinaryMask, RasterImage};

/// Constant-color image.
pub fn uniform(width: usize, height: usize, rgb: [f32; 3]) -> RasterImage {
    RasterImage::filled(width, height, rgb).expect("valid uniform image")
}

/// Filled disk on a flat background, with its exact mask.
pub fn disk_on_background(
    width: usize,
    height: usize,
    center: (usize, usize),
    radius: f32,
    disk_rgb: [f32; 3],
    background_rgb: [f32; 3],
) -> (RasterImage, BinaryMask) {
    let mut img = uniform(width, height, background_rgb);
    let mut mask = BinaryMask::filled(width, height, false);
    let r2 = radius * radius;
    for y in 0..height {
        for x in 0..width {
            let dx = x as f32 - center.0 as f32;
            let dy = y as f32 - center.1 as f32;
            if dx * dx + dy * dy <= r2 {
                img.set_pixel(x, y, disk_rgb);
                mask.set(x, y, true);
            }
        }
    }
    (img, mask)
}

/// Axis-aligned filled rectangle `[x0, x1) × [y0, y1)` painted in place.
pub fn paint_rect(
    img: &mut RasterImage,
    mask: &mut BinaryMask,
    (x0, y0): (usize, usize),
    (x1, y1): (usize, usize),
    rgb: [f32; 3],
) {
    for y in y0..y1.min(img.height()) {
        for x in x0..x1.min(img.width()) {
            img.set_pixel(x, y, rgb);
            mask.set(x, y, true);
        }
    }
}

/// Two disjoint colored blobs on a near-white background; returns the image
/// and one exact mask per blob.
pub fn two_blobs(
    width: usize,
    height: usize,
    color_a: [f32; 3],
    color_b: [f32; 3],
) -> (RasterImage, BinaryMask, BinaryMask) {
    let background = [250.0, 250.0, 250.0];
    let mut img = uniform(width, height, background);
    let mut mask_a = BinaryMask::filled(width, height, false);
    let mut mask_b = BinaryMask::filled(width, height, false);

    let ra = width.min(height) as f32 * 0.16;
    let ca = (width / 4, height / 2);
    let cb = (3 * width / 4, height / 2);
    let r2 = ra * ra;
    for y in 0..height {
        for x in 0..width {
            let da = sq_dist((x, y), ca);
            let db = sq_dist((x, y), cb);
            if da <= r2 {
                img.set_pixel(x, y, color_a);
                mask_a.set(x, y, true);
            } else if db <= r2 {
                img.set_pixel(x, y, color_b);
                mask_b.set(x, y, true);
            }
        }
    }
    (img, mask_a, mask_b)
}

fn sq_dist(p: (usize, usize), q: (usize, usize)) -> f32 {
    let dx = p.0 as f32 - q.0 as f32;
    let dy = p.1 as f32 - q.1 as f32;
    dx * dx + dy * dy
}

/// One synthetic corpus entry: a colored shape on a lightly textured
/// near-white background, plus its exact mask. Shapes cycle through disks,
/// rectangles and triangles; colors stay within the red-family ball that the
/// default area-fraction oracle targets.
pub fn corpus_entry(index: u32, width: usize, height: usize) -> (RasterImage, BinaryMask) {
    let mut rng = ChaCha8Rng::from_seed({
        let mut key = [0u8; 32];
        key[..4].copy_from_slice(&index.to_le_bytes());
        key[4] = 0xc0;
        key
    });

    let mut img = uniform(width, height, [250.0, 250.0, 250.0]);
    // Faint background texture, far outside any oracle tolerance.
    for y in 0..height {
        for x in 0..width {
            let n: f32 = rng.random_range(-4.0..=4.0);
            let [r, g, b] = img.pixel(x, y);
            img.set_pixel(x, y, [r + n, g + n, b + n]);
        }
    }
    let mut mask = BinaryMask::filled(width, height, false);

    // Red-family shades: distance ≤ ~80 from (200, 30, 30).
    let color = [
        rng.random_range(170.0..=230.0f32),
        rng.random_range(0.0..=70.0f32),
        rng.random_range(0.0..=70.0f32),
    ];

    let min_dim = width.min(height) as f32;
    let cx = rng.random_range(0.32..=0.68f32) * width as f32;
    let cy = rng.random_range(0.32..=0.68f32) * height as f32;
    let size = rng.random_range(0.17..=0.26f32) * min_dim;

    match index % 3 {
        0 => {
            // disk
            let r2 = size * size;
            for y in 0..height {
                for x in 0..width {
                    let dx = x as f32 - cx;
                    let dy = y as f32 - cy;
                    if dx * dx + dy * dy <= r2 {
                        img.set_pixel(x, y, color);
                        mask.set(x, y, true);
                    }
                }
            }
        }
        1 => {
            // rectangle
            let hw = size;
            let hh = size * rng.random_range(0.6..=1.0f32);
            for y in 0..height {
                for x in 0..width {
                    if (x as f32 - cx).abs() <= hw && (y as f32 - cy).abs() <= hh {
                        img.set_pixel(x, y, color);
                        mask.set(x, y, true);
                    }
                }
            }
        }
        _ => {
            // upward triangle
            let half = size * 1.2;
            for y in 0..height {
                for x in 0..width {
                    let fy = (y as f32 - (cy - half)) / (2.0 * half);
                    if (0.0..=1.0).contains(&fy) && (x as f32 - cx).abs() <= fy * half {
                        img.set_pixel(x, y, color);
                        mask.set(x, y, true);
                    }
                }
            }
        }
    }
    (img, mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_mask_matches_paint() {
        let (img, mask) = disk_on_background(32, 32, (16, 16), 8.0, [200.0, 0.0, 0.0], [255.0; 3]);
        for y in 0..32 {
            for x in 0..32 {
                let red = img.pixel(x, y)[0] < 250.0;
                assert_eq!(red, mask.get(x, y));
            }
        }
        assert!(mask.count_true() > 150 && mask.count_true() < 250);
    }

    #[test]
    fn two_blobs_are_disjoint() {
        let (_, a, b) = two_blobs(96, 64, [200.0, 30.0, 30.0], [30.0, 30.0, 200.0]);
        assert!(a.count_true() > 0 && b.count_true() > 0);
        for i in 0..a.data().len() {
            assert!(!(a.data()[i] && b.data()[i]));
        }
    }

    #[test]
    fn corpus_entries_are_deterministic_and_masked() {
        let (img1, mask1) = corpus_entry(4, 64, 64);
        let (img2, mask2) = corpus_entry(4, 64, 64);
        assert_eq!(img1, img2);
        assert_eq!(mask1, mask2);
        let frac = mask1.count_true() as f64 / (64.0 * 64.0);
        assert!(frac > 0.05 && frac < 0.45, "shape area fraction {frac}");
    }
}
