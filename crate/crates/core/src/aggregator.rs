//! Streaming single-storage MGM engine.
//!
//! The four causal paths (top-left, top, top-right, left) are grouped into a
//! single averaged smoothing term, so one row-major pass suffices and the
//! whole recursion state is one rolling row buffer `cost_row[width][D]`, one
//! left-neighbour buffer `cost_left[D]`, and their cached minima. Buffers are
//! re-initialized to the cost cap for every frame; a neighbour still holding
//! the cap contributes a zero smoothing term, which is how pixels at the
//! image edges are effectively ignored.

use crate::census::{self, CostRowVector};
use crate::error::{Error, Result};
use crate::oracle::CostVolume;
use crate::pixelio::{DisparityMap, GrayImage, RunConfig};

/// Smoothness penalties and the saturation bound for stored costs.
#[derive(Clone, Copy, Debug)]
pub struct PenaltyParams {
    pub p1: u8,
    pub p2: u8,
    pub cost_cap: u8,
}

impl From<&RunConfig> for PenaltyParams {
    fn from(cfg: &RunConfig) -> Self {
        Self {
            p1: cfg.p1,
            p2: cfg.p2,
            cost_cap: cfg.cost_cap,
        }
    }
}

/// Rolling aggregation buffers: costs of the row above (one grouped path),
/// costs of the left neighbour, and their cached minima.
pub struct AggState {
    width: usize,
    d_range: usize,
    cost_row: Vec<u8>,
    min_row: Vec<u8>,
    cost_left: Vec<u8>,
    min_left: u8,
}

impl AggState {
    pub fn new(width: usize, d_range: usize) -> Self {
        Self {
            width,
            d_range,
            cost_row: vec![0; width * d_range],
            min_row: vec![0; width],
            cost_left: vec![0; d_range],
            min_left: 0,
        }
    }

    /// Per-frame initialization: every entry takes `init` (the cost cap in
    /// normal operation).
    pub fn reset(&mut self, init: u8) {
        self.cost_row.fill(init);
        self.min_row.fill(init);
        self.cost_left.fill(init);
        self.min_left = init;
    }

    /// Row-start initialization: the left neighbour of the first column lies
    /// outside the image.
    pub fn begin_row(&mut self, init: u8) {
        self.cost_left.fill(init);
        self.min_left = init;
    }

    pub fn d_range(&self) -> usize {
        self.d_range
    }

    #[inline]
    fn row_costs(&self, col: usize) -> &[u8] {
        &self.cost_row[col * self.d_range..(col + 1) * self.d_range]
    }
}

/// Smoothing contribution of one neighbour at disparity `d`:
/// `min(L[d], L[d-1]+p1, L[d+1]+p1, min L + p2) - min L`, in `[0, p2]`.
#[inline]
pub fn smoothing_term(neigh_costs: &[u8], neigh_min: u8, d: usize, pen: &PenaltyParams) -> u16 {
    let m = neigh_min as u16;
    let mut best = neigh_costs[d] as u16;
    if d > 0 {
        best = best.min(neigh_costs[d - 1] as u16 + pen.p1 as u16);
    }
    if d + 1 < neigh_costs.len() {
        best = best.min(neigh_costs[d + 1] as u16 + pen.p1 as u16);
    }
    best = best.min(m + pen.p2 as u16);
    best - m
}

/// Aggregate one pixel: average the smoothing terms of the four grouped
/// neighbours (shift by 2), add the raw census costs, saturate at the cap.
/// Writes the new cost vector into `new_costs` and returns the winning
/// disparity (lowest index on ties) and the new cached minimum.
pub fn aggregate_pixel(
    raw: &CostRowVector,
    state: &AggState,
    col: usize,
    pen: &PenaltyParams,
    new_costs: &mut [u8],
) -> (usize, u8) {
    debug_assert_eq!(new_costs.len(), state.d_range);
    debug_assert!(col >= 1 && col + 1 < state.width);

    let top_left = state.row_costs(col - 1);
    let top = state.row_costs(col);
    let top_right = state.row_costs(col + 1);
    let tl_min = state.min_row[col - 1];
    let top_min = state.min_row[col];
    let tr_min = state.min_row[col + 1];

    let raw_costs = raw.costs();
    let mut best = u8::MAX;
    let mut best_d = 0usize;
    for d in 0..state.d_range {
        let sum = smoothing_term(top_left, tl_min, d, pen)
            + smoothing_term(top, top_min, d, pen)
            + smoothing_term(top_right, tr_min, d, pen)
            + smoothing_term(&state.cost_left, state.min_left, d, pen);
        let cost = (raw_costs[d] as u16 + (sum >> 2)).min(pen.cost_cap as u16) as u8;
        new_costs[d] = cost;
        if cost < best {
            best = cost;
            best_d = d;
        }
    }
    (best_d, best)
}

/// Buffer housekeeping after aggregating (row, col): the left neighbour's
/// costs move into the row buffer at the top-left slot of the next pixel,
/// then the freshly computed costs become the new left neighbour.
pub fn update_state(state: &mut AggState, col: usize, new_costs: &[u8], new_min: u8) {
    debug_assert!(col >= 1);
    let d = state.d_range;
    let dst = (col - 1) * d;
    state.cost_row[dst..dst + d].copy_from_slice(&state.cost_left);
    state.min_row[col - 1] = state.min_left;
    state.cost_left.copy_from_slice(new_costs);
    state.min_left = new_min;
}

/// Row epilogue: the last pixel's costs are still in `cost_left`; park them
/// in their own row-buffer column so the next row reads them as its top
/// neighbour.
fn flush_row_end(state: &mut AggState, last_col: usize) {
    let d = state.d_range;
    let dst = last_col * d;
    state.cost_row[dst..dst + d].copy_from_slice(&state.cost_left);
    state.min_row[last_col] = state.min_left;
}

/// Full-frame single-storage MGM match.
pub fn match_frame(left: &GrayImage, right: &GrayImage, cfg: &RunConfig) -> Result<DisparityMap> {
    match_frame_impl(left, right, cfg, cfg.cost_cap, false).map(|(map, _)| map)
}

/// As [`match_frame`] but with an explicit buffer initialization value, for
/// studying what a wrong (e.g. zero) per-frame initialization does.
pub fn match_frame_with_init(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &RunConfig,
    init: u8,
) -> Result<DisparityMap> {
    match_frame_impl(left, right, cfg, init, false).map(|(map, _)| map)
}

/// As [`match_frame`] but also captures every pixel's final aggregated cost
/// vector, for comparison against the full-volume reference.
pub fn match_frame_with_costs(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &RunConfig,
) -> Result<(DisparityMap, CostVolume)> {
    match_frame_impl(left, right, cfg, cfg.cost_cap, true)
        .map(|(map, vol)| (map, vol.expect("capture requested")))
}

fn match_frame_impl(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &RunConfig,
    init: u8,
    capture: bool,
) -> Result<(DisparityMap, Option<CostVolume>)> {
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

    let census_left = census::census_transform(left, cfg.window)?;
    let census_right = census::census_transform(right, cfg.window)?;
    let pen = PenaltyParams::from(cfg);
    let half = cfg.half_window();
    let width = left.width();
    let height = left.height();
    let d_range = cfg.disparity_range;

    let mut state = AggState::new(width, d_range);
    state.reset(init);

    let mut map = DisparityMap::new_invalid(width, height);
    let mut volume = capture.then(|| CostVolume::new(height, width, d_range));
    let mut raw = CostRowVector::new(d_range);
    let mut new_costs = vec![0u8; d_range];

    let last_col = width - 1 - half;
    for row in half..height - half {
        state.begin_row(init);
        for col in half..=last_col {
            census::cost_vector_into(&census_left, &census_right, row, col, pen.cost_cap, &mut raw);
            let (winner, new_min) = aggregate_pixel(&raw, &state, col, &pen, &mut new_costs);
            map.set(row, col, winner as u8, true);
            if let Some(vol) = volume.as_mut() {
                vol.set_costs(row, col, &new_costs);
            }
            update_state(&mut state, col, &new_costs, new_min);
        }
        flush_row_end(&mut state, last_col);
    }

    Ok((map, volume))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_image(rng: &mut StdRng, width: usize, height: usize) -> GrayImage {
        let data = (0..width * height).map(|_| rng.random()).collect();
        GrayImage::from_vec(width, height, data).unwrap()
    }

    fn small_cfg(d_range: usize) -> RunConfig {
        RunConfig {
            disparity_range: d_range,
            sections: 1,
            ..RunConfig::default()
        }
    }

    /// Literal evaluation of the four-way minimum, kept separate from the
    /// implementation on purpose.
    fn term_oracle(neigh: &[u8], d: usize, p1: u16, p2: u16) -> u16 {
        let m = neigh.iter().copied().min().unwrap() as u16;
        let mut candidates = vec![neigh[d] as u16, m + p2];
        if d > 0 {
            candidates.push(neigh[d - 1] as u16 + p1);
        }
        if d + 1 < neigh.len() {
            candidates.push(neigh[d + 1] as u16 + p1);
        }
        candidates.into_iter().min().unwrap() - m
    }

    #[test]
    fn cap_neighbour_contributes_nothing() {
        let pen = PenaltyParams { p1: 10, p2: 120, cost_cap: 255 };
        let neigh = vec![255u8; 16];
        for d in 0..16 {
            assert_eq!(smoothing_term(&neigh, 255, d, &pen), 0);
        }
    }

    #[test]
    fn single_support_term() {
        let pen = PenaltyParams { p1: 10, p2: 120, cost_cap: 255 };
        let mut neigh = vec![255u8; 8];
        neigh[0] = 0;
        assert_eq!(smoothing_term(&neigh, 0, 1, &pen), 10);
        assert_eq!(smoothing_term(&neigh, 0, 0, &pen), 0);
        // two steps away: only min + p2 applies
        assert_eq!(smoothing_term(&neigh, 0, 3, &pen), 120);
    }

    #[test]
    fn term_matches_literal_oracle() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..200 {
            let d_range = rng.random_range(2usize..24);
            let neigh: Vec<u8> = (0..d_range).map(|_| rng.random()).collect();
            let p1 = rng.random_range(1u8..40);
            let p2 = rng.random_range(p1 + 1..=200);
            let pen = PenaltyParams { p1, p2, cost_cap: 255 };
            let m = *neigh.iter().min().unwrap();
            for d in 0..d_range {
                assert_eq!(
                    smoothing_term(&neigh, m, d, &pen),
                    term_oracle(&neigh, d, p1 as u16, p2 as u16),
                );
                assert!(smoothing_term(&neigh, m, d, &pen) <= p2 as u16);
            }
        }
    }

    #[test]
    fn fresh_state_passes_raw_costs_through() {
        let pen = PenaltyParams { p1: 10, p2: 120, cost_cap: 255 };
        let mut state = AggState::new(10, 6);
        state.reset(255);
        let raw = CostRowVector::from_costs(vec![9, 4, 7, 4, 30, 2]);
        let mut out = vec![0u8; 6];
        let (winner, min) = aggregate_pixel(&raw, &state, 4, &pen, &mut out);
        assert_eq!(out, raw.costs());
        assert_eq!(winner, 5);
        assert_eq!(min, 2);
    }

    #[test]
    fn zero_costs_win_lowest_index() {
        let pen = PenaltyParams { p1: 10, p2: 120, cost_cap: 255 };
        let mut state = AggState::new(10, 6);
        state.reset(255);
        let raw = CostRowVector::from_costs(vec![0; 6]);
        let mut out = vec![0u8; 6];
        let (winner, min) = aggregate_pixel(&raw, &state, 4, &pen, &mut out);
        assert_eq!(out, vec![0; 6]);
        assert_eq!((winner, min), (0, 0));
    }

    #[test]
    fn tie_break_prefers_lowest_disparity() {
        let pen = PenaltyParams { p1: 10, p2: 120, cost_cap: 255 };
        let mut state = AggState::new(10, 6);
        state.reset(255);
        let raw = CostRowVector::from_costs(vec![9, 3, 5, 3, 9, 9]);
        let mut out = vec![0u8; 6];
        let (winner, _) = aggregate_pixel(&raw, &state, 4, &pen, &mut out);
        assert_eq!(winner, 1);
    }

    #[test]
    fn update_moves_left_into_top_left_slot() {
        let mut state = AggState::new(8, 4);
        state.reset(255);
        let first = [7u8, 8, 9, 10];
        state.cost_left.copy_from_slice(&first);
        state.min_left = 7;
        let second = [1u8, 2, 3, 4];
        update_state(&mut state, 3, &second, 1);
        assert_eq!(state.row_costs(2), &first);
        assert_eq!(state.min_row[2], 7);
        assert_eq!(&state.cost_left[..], &second);
        assert_eq!(state.min_left, 1);
        // columns at and right of the cursor still hold previous-row data
        assert_eq!(state.row_costs(3), &[255u8; 4]);
    }

    #[test]
    fn row_buffer_matches_reference_volume_row() {
        // After a full frame, cost_row holds the aggregated costs of the
        // final processed row, each vector parked in its own column.
        let mut rng = StdRng::seed_from_u64(21);
        let left = random_image(&mut rng, 14, 9);
        let right = random_image(&mut rng, 14, 9);
        let cfg = small_cfg(6);
        let half = cfg.half_window();

        let census_left = census::census_transform(&left, cfg.window).unwrap();
        let census_right = census::census_transform(&right, cfg.window).unwrap();
        let pen = PenaltyParams::from(&cfg);
        let mut state = AggState::new(14, 6);
        state.reset(255);
        let mut raw = CostRowVector::new(6);
        let mut new_costs = vec![0u8; 6];
        let last_col = 14 - 1 - half;
        for row in half..9 - half {
            state.begin_row(255);
            for col in half..=last_col {
                census::cost_vector_into(&census_left, &census_right, row, col, 255, &mut raw);
                let (_, new_min) = aggregate_pixel(&raw, &state, col, &pen, &mut new_costs);
                update_state(&mut state, col, &new_costs, new_min);
            }
            flush_row_end(&mut state, last_col);
        }

        let (_, volume) = oracle::mgm_full(&left, &right, &cfg).unwrap();
        let last_row = 9 - 1 - half;
        for col in half..=last_col {
            let expect: Vec<u8> = volume.costs(last_row, col).iter().map(|&c| c as u8).collect();
            assert_eq!(state.row_costs(col), &expect[..], "column {col}");
        }
    }

    #[test]
    fn row_start_reinitializes_left_buffer() {
        let mut state = AggState::new(8, 4);
        state.reset(255);
        state.cost_left.copy_from_slice(&[1, 2, 3, 4]);
        state.min_left = 1;
        state.begin_row(255);
        assert_eq!(&state.cost_left[..], &[255u8; 4]);
        assert_eq!(state.min_left, 255);
    }

    #[test]
    fn identical_images_give_zero_disparity() {
        let mut rng = StdRng::seed_from_u64(33);
        let img = random_image(&mut rng, 24, 18);
        let cfg = small_cfg(8);
        let map = match_frame(&img, &img, &cfg).unwrap();
        let mut seen = 0;
        for row in 0..18 {
            for col in 0..24 {
                if map.is_valid(row, col) {
                    assert_eq!(map.disparity(row, col), 0);
                    seen += 1;
                }
            }
        }
        assert_eq!(seen, (24 - 6) * (18 - 6));
    }

    #[test]
    fn smaller_windows_run_through_the_engine() {
        let mut rng = StdRng::seed_from_u64(37);
        let img = random_image(&mut rng, 20, 14);
        for window in [3usize, 5] {
            let cfg = RunConfig {
                window,
                disparity_range: 8,
                sections: 1,
                ..RunConfig::default()
            };
            let map = match_frame(&img, &img, &cfg).unwrap();
            let half = window / 2;
            assert_eq!(map.valid_count(), (20 - 2 * half) * (14 - 2 * half));
            for row in half..14 - half {
                for col in half..20 - half {
                    assert_eq!(map.disparity(row, col), 0);
                }
            }
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let mut rng = StdRng::seed_from_u64(34);
        let left = random_image(&mut rng, 20, 16);
        let right = random_image(&mut rng, 20, 16);
        let cfg = small_cfg(8);
        let a = match_frame(&left, &right, &cfg).unwrap();
        let b = match_frame(&left, &right, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = GrayImage::new(16, 16).unwrap();
        let b = GrayImage::new(16, 15).unwrap();
        assert!(matches!(
            match_frame(&a, &b, &small_cfg(8)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn narrow_image_rejected_for_search_range() {
        let a = GrayImage::new(10, 10).unwrap();
        assert!(matches!(
            match_frame(&a, &a, &small_cfg(16)),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn stored_costs_never_exceed_cap() {
        let mut rng = StdRng::seed_from_u64(35);
        let left = random_image(&mut rng, 30, 20);
        let right = random_image(&mut rng, 30, 20);
        let cfg = RunConfig {
            disparity_range: 12,
            p2: 60,
            cost_cap: 60,
            ..RunConfig::default()
        };
        let (_, volume) = match_frame_with_costs(&left, &right, &cfg).unwrap();
        for row in 3..17 {
            for col in 3..27 {
                for &c in volume.costs(row, col) {
                    assert!(c <= 60);
                }
            }
        }
    }

    #[test]
    fn first_interior_pixel_equals_raw_costs() {
        let mut rng = StdRng::seed_from_u64(36);
        let left = random_image(&mut rng, 16, 12);
        let right = random_image(&mut rng, 16, 12);
        let cfg = small_cfg(8);
        let (_, volume) = match_frame_with_costs(&left, &right, &cfg).unwrap();
        let lf = census::census_transform(&left, 7).unwrap();
        let rf = census::census_transform(&right, 7).unwrap();
        let raw = census::cost_vector(&lf, &rf, 3, 3, 8, 255);
        let got: Vec<u8> = volume.costs(3, 3).iter().map(|&c| c as u8).collect();
        assert_eq!(&got[..], raw.costs());
    }
}
