//! Shared fixtures for integration tests: the bundled Middlebury motorcycle
//! pair and deterministic synthetic stereo scenes with exact ground truth.

#![allow(dead_code)]

use std::path::PathBuf;

use mgm_stereo::pixelio::{self, DisparityMap, GrayImage};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

/// Middlebury 2014 motorcycle pair (half-size grayscale conversion) with
/// scale-4 ground truth; unknown regions are 0.
pub fn motorcycle() -> (GrayImage, GrayImage, DisparityMap) {
    let left = pixelio::read_pgm(data_dir().join("motorcycle_left.pgm")).unwrap();
    let right = pixelio::read_pgm(data_dir().join("motorcycle_right.pgm")).unwrap();
    let gt = pixelio::read_ground_truth(data_dir().join("motorcycle_gt.pgm"), 4).unwrap();
    (left, right, gt)
}

pub fn random_image(rng: &mut StdRng, width: usize, height: usize) -> GrayImage {
    let data = (0..width * height).map(|_| rng.random()).collect();
    GrayImage::from_vec(width, height, data).unwrap()
}

/// Band-limited random texture: a coarse bilinear lattice plus fine noise,
/// values kept inside [20, 235] so brightness-offset experiments cannot clip.
fn texture(rng: &mut StdRng, width: usize, height: usize) -> Vec<u8> {
    let cell = 6usize;
    let lw = width / cell + 2;
    let lh = height / cell + 2;
    let lattice: Vec<f32> = (0..lw * lh).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut out = vec![0u8; width * height];
    for row in 0..height {
        let gy = row as f32 / cell as f32;
        let y0 = gy as usize;
        let fy = gy - y0 as f32;
        for col in 0..width {
            let gx = col as f32 / cell as f32;
            let x0 = gx as usize;
            let fx = gx - x0 as f32;
            let v00 = lattice[y0 * lw + x0];
            let v01 = lattice[y0 * lw + x0 + 1];
            let v10 = lattice[(y0 + 1) * lw + x0];
            let v11 = lattice[(y0 + 1) * lw + x0 + 1];
            let smooth = v00 * (1.0 - fx) * (1.0 - fy)
                + v01 * fx * (1.0 - fy)
                + v10 * (1.0 - fx) * fy
                + v11 * fx * fy;
            let fine: f32 = rng.random_range(-12.0..12.0);
            let v = 20.0 + smooth * 195.0 + fine;
            out[row * width + col] = v.clamp(20.0, 235.0) as u8;
        }
    }
    out
}

/// Render a stereo pair from a left-view disparity field over a shared
/// texture. The right image is the texture itself; each left pixel samples
/// the texture displaced by its disparity, so every pixel has an exact
/// correspondence at its ground-truth disparity. Ground truth is marked
/// unknown where the match would fall outside the right image's census
/// interior.
fn render(disp: &[u8], width: usize, height: usize, window: usize, seed: u64) -> Scene {
    const MARGIN: usize = 64;
    let mut rng = StdRng::seed_from_u64(seed);
    let tex = texture(&mut rng, width + MARGIN, height);
    let half = window / 2;

    let mut left = GrayImage::new(width, height).unwrap();
    let mut right = GrayImage::new(width, height).unwrap();
    let mut gt = DisparityMap::new_invalid(width, height);
    for row in 0..height {
        for col in 0..width {
            let d = disp[row * width + col] as usize;
            debug_assert!(d < MARGIN);
            right.set(row, col, tex[row * (width + MARGIN) + col + MARGIN]);
            left.set(row, col, tex[row * (width + MARGIN) + col + MARGIN - d]);
            let observable = col >= d + half;
            gt.set(row, col, d as u8, observable);
        }
    }
    Scene { left, right, gt }
}

pub struct Scene {
    pub left: GrayImage,
    pub right: GrayImage,
    pub gt: DisparityMap,
}

/// Moderate scene: slanted background plane with a few large fronto-parallel
/// plateaus. Stands in for an "easy" Middlebury image.
pub fn scene_plateaus(width: usize, height: usize, seed: u64) -> Scene {
    let mut disp = vec![0u8; width * height];
    for row in 0..height {
        let bg = 8 + (10 * row) / height;
        for col in 0..width {
            disp[row * width + col] = bg as u8;
        }
    }
    let boxes = [
        (0.10, 0.15, 0.35, 0.50, 34u8),
        (0.55, 0.20, 0.85, 0.60, 26u8),
        (0.30, 0.62, 0.70, 0.92, 42u8),
    ];
    for &(x0, y0, x1, y1, d) in &boxes {
        let (c0, r0) = ((x0 * width as f64) as usize, (y0 * height as f64) as usize);
        let (c1, r1) = ((x1 * width as f64) as usize, (y1 * height as f64) as usize);
        for row in r0..r1.min(height) {
            for col in c0..c1.min(width) {
                disp[row * width + col] = d;
            }
        }
    }
    render(&disp, width, height, 7, seed)
}

/// Cluttered scene: the same background crossed by many thin slats at
/// alternating depths, giving a much higher density of disparity
/// discontinuities. Stands in for a "hard" Middlebury image.
pub fn scene_slats(width: usize, height: usize, seed: u64) -> Scene {
    let mut disp = vec![0u8; width * height];
    for row in 0..height {
        let bg = 8 + (8 * row) / height;
        for col in 0..width {
            disp[row * width + col] = bg as u8;
        }
    }
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5157);
    let slats = 14usize;
    for i in 0..slats {
        let x = (width * (i + 1)) / (slats + 1);
        let w = rng.random_range(5usize..9);
        let d = 24 + ((i * 7) % 29) as u8;
        let y0 = rng.random_range(0..height / 4);
        let y1 = height - rng.random_range(0..height / 4);
        for row in y0..y1 {
            for col in x..(x + w).min(width) {
                disp[row * width + col] = d;
            }
        }
    }
    for i in 0..3 {
        let y = (height * (i + 1)) / 5;
        let d = 30 + 6 * i as u8;
        for row in y..(y + 6).min(height) {
            for col in 0..width {
                disp[row * width + col] = d;
            }
        }
    }
    render(&disp, width, height, 7, seed)
}
