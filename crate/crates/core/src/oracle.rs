//! Slow, obviously-correct reference implementations.
//!
//! `mgm_full` materializes the whole aggregated cost volume and performs the
//! grouped-path recursion with exactly the streaming engine's arithmetic
//! (shift-divide, saturation, lowest-index tie-break); it must agree with
//! `aggregator::match_frame` bit for bit and serves as its test oracle.
//!
//! `sgm_paths` is the classical formulation: each path keeps its own
//! recursion and the per-path costs are summed before disparity selection,
//! without division or saturation. It is a quality baseline, not an
//! equivalent of the grouped engine, and its output is not expected to match
//! `mgm_full`. `census_wta` skips aggregation entirely.

use crate::census::{self, CensusField};
use crate::error::{Error, Result};
use crate::pixelio::{DisparityMap, GrayImage, RunConfig};

/// Materialized per-pixel aggregated costs, wide entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostVolume {
    rows: usize,
    cols: usize,
    d_range: usize,
    data: Vec<u16>,
}

impl CostVolume {
    pub fn new(rows: usize, cols: usize, d_range: usize) -> Self {
        Self {
            rows,
            cols,
            d_range,
            data: vec![0; rows * cols * d_range],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.d_range)
    }

    #[inline]
    pub fn costs(&self, row: usize, col: usize) -> &[u16] {
        let base = (row * self.cols + col) * self.d_range;
        &self.data[base..base + self.d_range]
    }

    pub fn set_costs(&mut self, row: usize, col: usize, costs: &[u8]) {
        let base = (row * self.cols + col) * self.d_range;
        for (dst, &src) in self.data[base..base + self.d_range].iter_mut().zip(costs) {
            *dst = src as u16;
        }
    }

    fn set_costs_u16(&mut self, row: usize, col: usize, costs: &[u16]) {
        let base = (row * self.cols + col) * self.d_range;
        self.data[base..base + self.d_range].copy_from_slice(costs);
    }
}

/// Lowest-index argmin; the tie-break rule shared by every selector.
pub(crate) fn argmin<T: Copy + PartialOrd>(costs: &[T]) -> usize {
    let mut best = 0;
    for (d, &c) in costs.iter().enumerate().skip(1) {
        if c < costs[best] {
            best = d;
        }
    }
    best
}

fn validate_pair(left: &GrayImage, right: &GrayImage, cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    if left.width() != right.width() || left.height() != right.height() {
        return Err(Error::DimensionMismatch {
            reason: format!(
                "left {}x{} vs right {}x{}",
                left.width(),
                left.height(),
                right.width(),
                right.height()
            ),
        });
    }
    if left.width() < cfg.disparity_range {
        return Err(Error::InvalidParameter {
            reason: format!(
                "image width {} smaller than disparity range {}",
                left.width(),
                cfg.disparity_range
            ),
        });
    }
    Ok(())
}

/// Raw census matching costs for every interior pixel, materialized.
struct RawCosts {
    rows: usize,
    cols: usize,
    d_range: usize,
    half: usize,
    data: Vec<u8>,
}

impl RawCosts {
    fn compute(left: &CensusField, right: &CensusField, d_range: usize, cost_cap: u8) -> Self {
        let rows = left.height();
        let cols = left.width();
        let half = left.half_window();
        let mut data = vec![cost_cap; rows * cols * d_range];
        let mut scratch = census::CostRowVector::new(d_range);
        for row in half..rows - half {
            for col in half..cols - half {
                census::cost_vector_into(left, right, row, col, cost_cap, &mut scratch);
                let base = (row * cols + col) * d_range;
                data[base..base + d_range].copy_from_slice(scratch.costs());
            }
        }
        Self {
            rows,
            cols,
            d_range,
            half,
            data,
        }
    }

    #[cfg(test)]
    fn uniform(rows: usize, cols: usize, d_range: usize, half: usize, value: u8) -> Self {
        Self {
            rows,
            cols,
            d_range,
            half,
            data: vec![value; rows * cols * d_range],
        }
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> &[u8] {
        let base = (row * self.cols + col) * self.d_range;
        &self.data[base..base + self.d_range]
    }

    fn is_interior(&self, row: isize, col: isize) -> bool {
        let half = self.half as isize;
        row >= half
            && row < self.rows as isize - half
            && col >= half
            && col < self.cols as isize - half
    }
}

/// Full-volume grouped-path MGM reference. Returns the disparity map and the
/// materialized aggregated costs.
pub fn mgm_full(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &RunConfig,
) -> Result<(DisparityMap, CostVolume)> {
    validate_pair(left, right, cfg)?;
    let census_left = census::census_transform(left, cfg.window)?;
    let census_right = census::census_transform(right, cfg.window)?;
    let raw = RawCosts::compute(&census_left, &census_right, cfg.disparity_range, cfg.cost_cap);
    Ok(mgm_aggregate(&raw, cfg))
}

fn mgm_aggregate(raw: &RawCosts, cfg: &RunConfig) -> (DisparityMap, CostVolume) {
    let (rows, cols, d_range, half) = (raw.rows, raw.cols, raw.d_range, raw.half);
    let p1 = cfg.p1 as u16;
    let p2 = cfg.p2 as u16;
    let cap = cfg.cost_cap as u16;

    let mut volume = CostVolume::new(rows, cols, d_range);
    let mut mins = vec![0u16; rows * cols];
    let mut map = DisparityMap::new_invalid(cols, rows);
    let mut pixel = vec![0u16; d_range];

    // the four neighbours of the single path group, as (d_row, d_col) offsets
    let group: [(isize, isize); 4] = [(1, 1), (1, 0), (1, -1), (0, 1)];

    for row in half..rows - half {
        for col in half..cols - half {
            let raw_here = raw.at(row, col);
            for (d, slot) in pixel.iter_mut().enumerate() {
                let mut sum = 0u16;
                for (dr, dc) in group {
                    let nr = row as isize - dr;
                    let nc = col as isize - dc;
                    if !raw.is_interior(nr, nc) {
                        continue; // border neighbour: effectively ignored
                    }
                    let neigh = volume.costs(nr as usize, nc as usize);
                    let m = mins[nr as usize * cols + nc as usize];
                    let mut best = neigh[d];
                    if d > 0 {
                        best = best.min(neigh[d - 1] + p1);
                    }
                    if d + 1 < d_range {
                        best = best.min(neigh[d + 1] + p1);
                    }
                    best = best.min(m + p2);
                    sum += best - m;
                }
                *slot = (raw_here[d] as u16 + (sum >> 2)).min(cap);
            }
            let winner = argmin(&pixel);
            map.set(row, col, winner as u8, true);
            volume.set_costs_u16(row, col, &pixel);
            mins[row * cols + col] = pixel[winner];
        }
    }
    (map, volume)
}

/// Path count for the classical SGM reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgmPaths {
    Four,
    Eight,
}

/// Classical SGM: separate recursion per path, costs summed at the end.
/// Four causal paths run in one forward pass; the eight-path variant adds a
/// second, reverse-order pass for the right/bottom paths.
pub fn sgm_paths(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &RunConfig,
    paths: SgmPaths,
) -> Result<DisparityMap> {
    validate_pair(left, right, cfg)?;
    let census_left = census::census_transform(left, cfg.window)?;
    let census_right = census::census_transform(right, cfg.window)?;
    let raw = RawCosts::compute(&census_left, &census_right, cfg.disparity_range, cfg.cost_cap);
    Ok(sgm_aggregate(&raw, cfg, paths))
}

fn sgm_aggregate(raw: &RawCosts, cfg: &RunConfig, paths: SgmPaths) -> DisparityMap {
    let (rows, cols, d_range, half) = (raw.rows, raw.cols, raw.d_range, raw.half);
    let causal: [(isize, isize); 4] = [(1, 1), (1, 0), (1, -1), (0, 1)];
    let anticausal: [(isize, isize); 4] = [(-1, -1), (-1, 0), (-1, 1), (0, -1)];

    let mut sum = vec![0u32; rows * cols * d_range];
    let mut path_costs = vec![0u32; rows * cols * d_range];

    let run_path = |offset: (isize, isize), forward: bool, sum: &mut [u32], path_costs: &mut [u32]| {
        let row_range: Vec<usize> = if forward {
            (half..rows - half).collect()
        } else {
            (half..rows - half).rev().collect()
        };
        let col_range: Vec<usize> = if forward {
            (half..cols - half).collect()
        } else {
            (half..cols - half).rev().collect()
        };
        for &row in &row_range {
            for &col in &col_range {
                let base = (row * cols + col) * d_range;
                let raw_here = raw.at(row, col);
                let nr = row as isize - offset.0;
                let nc = col as isize - offset.1;
                if raw.is_interior(nr, nc) {
                    let nbase = (nr as usize * cols + nc as usize) * d_range;
                    let neigh = &path_costs[nbase..nbase + d_range];
                    let m = *neigh.iter().min().unwrap();
                    let mut new = vec![0u32; d_range];
                    for (d, slot) in new.iter_mut().enumerate() {
                        let mut best = neigh[d];
                        if d > 0 {
                            best = best.min(neigh[d - 1] + cfg.p1 as u32);
                        }
                        if d + 1 < d_range {
                            best = best.min(neigh[d + 1] + cfg.p1 as u32);
                        }
                        best = best.min(m + cfg.p2 as u32);
                        *slot = raw_here[d] as u32 + best - m;
                    }
                    path_costs[base..base + d_range].copy_from_slice(&new);
                } else {
                    for (d, &c) in raw_here.iter().enumerate() {
                        path_costs[base + d] = c as u32;
                    }
                }
                for d in 0..d_range {
                    sum[base + d] += path_costs[base + d];
                }
            }
        }
    };

    for offset in causal {
        run_path(offset, true, &mut sum, &mut path_costs);
    }
    if paths == SgmPaths::Eight {
        for offset in anticausal {
            run_path(offset, false, &mut sum, &mut path_costs);
        }
    }

    let mut map = DisparityMap::new_invalid(cols, rows);
    for row in half..rows - half {
        for col in half..cols - half {
            let base = (row * cols + col) * d_range;
            let winner = argmin(&sum[base..base + d_range]);
            map.set(row, col, winner as u8, true);
        }
    }
    map
}

/// Winner-take-all baseline: per-pixel argmin of the raw census costs.
pub fn census_wta(left: &GrayImage, right: &GrayImage, cfg: &RunConfig) -> Result<DisparityMap> {
    validate_pair(left, right, cfg)?;
    let census_left = census::census_transform(left, cfg.window)?;
    let census_right = census::census_transform(right, cfg.window)?;
    let half = census_left.half_window();
    let mut map = DisparityMap::new_invalid(left.width(), left.height());
    let mut scratch = census::CostRowVector::new(cfg.disparity_range);
    for row in half..left.height() - half {
        for col in half..left.width() - half {
            census::cost_vector_into(&census_left, &census_right, row, col, cfg.cost_cap, &mut scratch);
            map.set(row, col, argmin(scratch.costs()) as u8, true);
        }
    }
    Ok(map)
}
