//! Accuracy metrics against ground truth, disparity-to-depth conversion and
//! the hardware frame-time model.

use std::fmt;

use crate::error::{Error, Result};
use crate::pixelio::DisparityMap;

/// Disparity accuracy over the pixels valid in both maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AccuracyReport {
    /// Root mean square disparity error.
    pub rmse: f64,
    /// Percentage of pixels with |estimate - truth| above the tolerance.
    pub pct_erroneous: f64,
    /// Error tolerance in pixels.
    pub tolerance: u8,
    /// Number of jointly valid pixels evaluated.
    pub evaluated_pixels: usize,
}

impl AccuracyReport {
    /// Machine-readable key=value lines.
    pub fn to_key_values(&self) -> String {
        format!(
            "rmse={:.4}\npct_erroneous={:.4}\ntolerance={}\nevaluated_pixels={}\n",
            self.rmse, self.pct_erroneous, self.tolerance, self.evaluated_pixels
        )
    }
}

impl fmt::Display for AccuracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rmse {:.2}, {:.2}% erroneous at tolerance {} over {} pixels",
            self.rmse, self.pct_erroneous, self.tolerance, self.evaluated_pixels
        )
    }
}

/// Compare an estimated disparity map against ground truth. Pixels invalid
/// in either map (borders, unknown truth) are excluded.
pub fn accuracy(est: &DisparityMap, gt: &DisparityMap, tolerance: u8) -> Result<AccuracyReport> {
    if est.width() != gt.width() || est.height() != gt.height() {
        return Err(Error::DimensionMismatch {
            reason: format!(
                "estimate {}x{} vs ground truth {}x{}",
                est.width(),
                est.height(),
                gt.width(),
                gt.height()
            ),
        });
    }
    let mut count = 0usize;
    let mut sq_sum = 0f64;
    let mut erroneous = 0usize;
    for i in 0..est.disparities().len() {
        if !est.validity()[i] || !gt.validity()[i] {
            continue;
        }
        let diff = est.disparities()[i] as i32 - gt.disparities()[i] as i32;
        sq_sum += (diff * diff) as f64;
        if diff.unsigned_abs() > tolerance as u32 {
            erroneous += 1;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::DegenerateInput {
            reason: "no jointly valid pixels to evaluate".to_string(),
        });
    }
    Ok(AccuracyReport {
        rmse: (sq_sum / count as f64).sqrt(),
        pct_erroneous: 100.0 * erroneous as f64 / count as f64,
        tolerance,
        evaluated_pixels: count,
    })
}

/// Per-pixel depth in meters; invalid where the disparity is unknown or
/// zero (infinite depth).
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depth: Vec<f32>,
    valid: Vec<bool>,
}

impl DepthMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self, row: usize, col: usize) -> f32 {
        self.depth[row * self.width + col]
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.width + col]
    }

    pub fn values(&self) -> &[f32] {
        &self.depth
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }
}

/// depth = baseline * focal / disparity, per valid pixel with disparity > 0.
pub fn disparity_to_depth(map: &DisparityMap, baseline_m: f64, focal_px: f64) -> Result<DepthMap> {
    if baseline_m <= 0.0 || focal_px <= 0.0 {
        return Err(Error::InvalidParameter {
            reason: format!("baseline {baseline_m} and focal length {focal_px} must be positive"),
        });
    }
    let n = map.disparities().len();
    let mut depth = vec![0f32; n];
    let mut valid = vec![false; n];
    for i in 0..n {
        let d = map.disparities()[i];
        if map.validity()[i] && d > 0 {
            depth[i] = (baseline_m * focal_px / d as f64) as f32;
            valid[i] = true;
        }
    }
    Ok(DepthMap {
        width: map.width(),
        height: map.height(),
        depth,
        valid,
    })
}

/// Parameters of the hardware frame-time model: a pipelined engine spends
/// (search range + pipeline depth) cycles per pixel, and independent blocks
/// split the frame evenly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingModel {
    pub clock_hz: f64,
    pub pipeline_depth: u32,
    pub blocks: u32,
    pub rows: u32,
    pub cols: u32,
    pub disparity_range: u32,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self {
            clock_hz: 100e6,
            pipeline_depth: 63,
            blocks: 1,
            rows: 480,
            cols: 640,
            disparity_range: 92,
        }
    }
}

/// Estimated frame rate:
/// blocks * clock / (rows * cols * (search range + pipeline depth)).
pub fn estimate_fps(model: &TimingModel) -> f64 {
    let cycles_per_frame = model.rows as f64
        * model.cols as f64
        * (model.disparity_range as f64 + model.pipeline_depth as f64);
    model.blocks as f64 * model.clock_hz / cycles_per_frame
}
