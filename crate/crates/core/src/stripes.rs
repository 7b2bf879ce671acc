//! Strip-parallel execution: the frame is split into K horizontal sections,
//! each matched by its own engine with fresh buffers, and the results are
//! stitched by owned rows.
//!
//! Sections read half a census window of extra rows above and below their
//! owned band so no seam row loses its census context; only aggregation
//! context is lost at a seam, since engines restart with cap-initialized
//! buffers exactly like independent hardware blocks.

use std::thread;

use crate::aggregator;
use crate::error::{Error, Result};
use crate::pixelio::{DisparityMap, GrayImage, RunConfig};

/// One horizontal section: the output rows it owns and the input row band it
/// reads. A section whose owned band contains no census-valid rows has
/// `read_height == 0` and computes nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Section {
    pub own_start: usize,
    pub own_height: usize,
    pub read_start: usize,
    pub read_height: usize,
}

impl Section {
    /// Census-valid output rows this section is responsible for, given the
    /// census half-window its plan was built with.
    pub fn valid_rows(&self, half: usize) -> std::ops::Range<usize> {
        if self.read_height == 0 {
            return 0..0;
        }
        let start = self.read_start + half;
        start..self.read_start + self.read_height - half
    }
}

/// Section layout for one frame height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionPlan {
    window: usize,
    sections: Vec<Section>,
}

impl SectionPlan {
    pub fn k(&self) -> usize {
        self.sections.len()
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }
}

/// Split `height` rows into K sections of ceil(height/K) owned rows, each
/// extended by window/2 context rows where the frame allows it.
pub fn plan_sections(height: usize, k: usize, window: usize) -> Result<SectionPlan> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            reason: "section count must be positive".to_string(),
        });
    }
    if window % 2 == 0 || window < 3 {
        return Err(Error::InvalidParameter {
            reason: format!("census window must be odd and >= 3, got {window}"),
        });
    }
    if height < k * window {
        return Err(Error::InvalidParameter {
            reason: format!("height {height} too small for {k} sections of window {window}"),
        });
    }

    let half = window / 2;
    let own = height.div_ceil(k);
    let mut sections = Vec::with_capacity(k);
    for i in 0..k {
        let own_start = (i * own).min(height);
        let own_end = ((i + 1) * own).min(height);
        // Clamp the owned band to the frame's census-valid rows, then grow a
        // census margin around it; that is the section's read band.
        let valid_start = own_start.max(half);
        let valid_end = own_end.min(height - half);
        let (read_start, read_height) = if valid_start < valid_end {
            (valid_start - half, valid_end + half - (valid_start - half))
        } else {
            (0, 0)
        };
        sections.push(Section {
            own_start,
            own_height: own_end - own_start,
            read_start,
            read_height,
        });
    }
    Ok(SectionPlan { window, sections })
}

/// Match a frame section-parallel: one engine per section, disjoint output
/// rows, deterministic regardless of scheduling.
pub fn match_frame_striped(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &RunConfig,
) -> Result<DisparityMap> {
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
    let plan = plan_sections(left.height(), cfg.sections, cfg.window)?;

    let mut results: Vec<(Section, Option<DisparityMap>)> = Vec::with_capacity(plan.k());
    thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::with_capacity(plan.k());
        for section in plan.sections() {
            let section = *section;
            handles.push(scope.spawn(move || -> Result<(Section, Option<DisparityMap>)> {
                if section.read_height == 0 {
                    return Ok((section, None));
                }
                let band_l = left.crop_rows(section.read_start, section.read_height)?;
                let band_r = right.crop_rows(section.read_start, section.read_height)?;
                let map = aggregator::match_frame(&band_l, &band_r, cfg)?;
                Ok((section, Some(map)))
            }));
        }
        for handle in handles {
            results.push(handle.join().expect("section worker panicked")?);
        }
        Ok(())
    })?;

    let half = cfg.half_window();
    let mut out = DisparityMap::new_invalid(left.width(), left.height());
    for (section, band) in results {
        let Some(band) = band else { continue };
        for row in section.valid_rows(half) {
            let band_row = row - section.read_start;
            for col in 0..left.width() {
                if band.is_valid(band_row, col) {
                    out.set(row, col, band.disparity(band_row, col), true);
                }
            }
        }
    }
    Ok(out)
}
