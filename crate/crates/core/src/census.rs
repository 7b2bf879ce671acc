//! Census transform and Hamming-distance matching costs.
//!
//! Each interior pixel gets a descriptor with one bit per window neighbour
//! (row-major scan, center skipped), set when the neighbour is strictly
//! darker than the center. Matching cost between two pixels is the popcount
//! of the XOR of their descriptors, so 7x7 costs never exceed 48 and always
//! fit the 8-bit cost storage used downstream. Comparing only orderings makes
//! the costs invariant to uniform intensity offsets.

use crate::error::{Error, Result};
use crate::pixelio::GrayImage;

/// Largest supported census window: 9x9 would need 80 descriptor bits.
pub const MAX_WINDOW: usize = 7;

/// Per-pixel census descriptor grid.
#[derive(Clone, Debug)]
pub struct CensusField {
    width: usize,
    height: usize,
    window: usize,
    desc: Vec<u64>,
}

impl CensusField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Border width on every side; descriptors inside it are 0 and invalid.
    pub fn half_window(&self) -> usize {
        self.window / 2
    }

    #[inline]
    pub fn descriptor(&self, row: usize, col: usize) -> u64 {
        self.desc[row * self.width + col]
    }

    /// True when (row, col) has a full census window inside the image.
    pub fn is_interior(&self, row: usize, col: usize) -> bool {
        let half = self.half_window();
        row >= half && row + half < self.height && col >= half && col + half < self.width
    }
}

/// Matching costs of one pixel across the disparity search range.
///
/// Entries at and beyond `valid_range` (disparities whose right-image window
/// would cross the border) are padded with the cost cap so they never win.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostRowVector {
    costs: Vec<u8>,
    valid_range: usize,
}

impl CostRowVector {
    pub fn new(d_range: usize) -> Self {
        Self {
            costs: vec![0; d_range],
            valid_range: 0,
        }
    }

    /// Wrap an externally built cost vector (all entries searchable).
    pub fn from_costs(costs: Vec<u8>) -> Self {
        let valid_range = costs.len();
        Self { costs, valid_range }
    }

    pub fn costs(&self) -> &[u8] {
        &self.costs
    }

    pub fn valid_range(&self) -> usize {
        self.valid_range
    }

    pub fn d_range(&self) -> usize {
        self.costs.len()
    }
}

/// Compute census descriptors for every interior pixel.
pub fn census_transform(img: &GrayImage, window: usize) -> Result<CensusField> {
    if window % 2 == 0 || window < 3 {
        return Err(Error::InvalidParameter {
            reason: format!("census window must be odd and >= 3, got {window}"),
        });
    }
    if window > MAX_WINDOW {
        return Err(Error::InvalidParameter {
            reason: format!("census window {window} unsupported: descriptors are limited to 64 bits"),
        });
    }
    if img.width() < window || img.height() < window {
        return Err(Error::InvalidParameter {
            reason: format!(
                "image {}x{} smaller than census window {window}",
                img.width(),
                img.height()
            ),
        });
    }

    let half = window / 2;
    let mut field = CensusField {
        width: img.width(),
        height: img.height(),
        window,
        desc: vec![0; img.width() * img.height()],
    };

    for row in half..img.height() - half {
        for col in half..img.width() - half {
            let center = img.get(row, col);
            let mut desc = 0u64;
            let mut bit = 0u32;
            for wr in row - half..=row + half {
                for wc in col - half..=col + half {
                    if wr == row && wc == col {
                        continue;
                    }
                    if img.get(wr, wc) < center {
                        desc |= 1 << bit;
                    }
                    bit += 1;
                }
            }
            field.desc[row * img.width() + col] = desc;
        }
    }
    Ok(field)
}

/// Fill `out` with the Hamming costs of left pixel (row, col) against right
/// pixels (row, col - d) for d in [0, D). Disparities that would push the
/// right window over the border are padded with `cost_cap`.
pub fn cost_vector_into(
    left: &CensusField,
    right: &CensusField,
    row: usize,
    col: usize,
    cost_cap: u8,
    out: &mut CostRowVector,
) {
    debug_assert!(left.is_interior(row, col));
    debug_assert_eq!(left.window, right.window);

    let half = left.half_window();
    let d_range = out.costs.len();
    let valid = (col - half + 1).min(d_range);
    let base = left.descriptor(row, col);
    let right_row = &right.desc[row * right.width..(row + 1) * right.width];
    for d in 0..valid {
        out.costs[d] = (base ^ right_row[col - d]).count_ones() as u8;
    }
    out.costs[valid..].fill(cost_cap);
    out.valid_range = valid;
}

/// Allocating variant of [`cost_vector_into`].
pub fn cost_vector(
    left: &CensusField,
    right: &CensusField,
    row: usize,
    col: usize,
    d_range: usize,
    cost_cap: u8,
) -> CostRowVector {
    let mut out = CostRowVector::new(d_range);
    cost_vector_into(left, right, row, col, cost_cap, &mut out);
    out
}
