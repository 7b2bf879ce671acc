//! Fixed-point remap: builds a rectified image by sampling a raw image at
//! the Q11.5 coordinates of a remap table with 4-neighbour bilinear
//! interpolation.

use crate::pixelio::{GrayImage, RemapTable, REMAP_FRAC_BITS, REMAP_ONE};

const FRAC_MASK: u16 = REMAP_ONE - 1;

/// Apply a remap table to a raw image. Output dimensions are the table's.
///
/// The blend is pure integer arithmetic: the four neighbours are weighted by
/// products of the 5-bit fractional parts (total weight 1024) and the sum is
/// rounded to nearest with a half-unit bias before shifting. Coordinates
/// whose interpolation footprint leaves the raw image produce 0; neighbours
/// with zero weight are not required to exist, so an identity table
/// reproduces the input exactly including its last row and column.
pub fn remap(raw: &GrayImage, table: &RemapTable) -> GrayImage {
    let src_w = raw.width();
    let src_h = raw.height();
    let mut data = vec![0u8; table.width() * table.height()];

    for row in 0..table.height() {
        for col in 0..table.width() {
            let (xf, yf) = table.coord(row, col);
            let xi = (xf >> REMAP_FRAC_BITS) as usize;
            let yi = (yf >> REMAP_FRAC_BITS) as usize;
            let fx = (xf & FRAC_MASK) as u32;
            let fy = (yf & FRAC_MASK) as u32;

            if xi >= src_w || yi >= src_h {
                continue;
            }
            if (fx > 0 && xi + 1 >= src_w) || (fy > 0 && yi + 1 >= src_h) {
                continue;
            }

            let p00 = raw.get(yi, xi) as u32;
            let p01 = if fx > 0 { raw.get(yi, xi + 1) as u32 } else { 0 };
            let p10 = if fy > 0 { raw.get(yi + 1, xi) as u32 } else { 0 };
            let p11 = if fx > 0 && fy > 0 {
                raw.get(yi + 1, xi + 1) as u32
            } else {
                0
            };

            let one = REMAP_ONE as u32;
            let acc = (one - fx) * (one - fy) * p00
                + fx * (one - fy) * p01
                + (one - fx) * fy * p10
                + fx * fy * p11;
            data[row * table.width() + col] = ((acc + 512) >> 10) as u8;
        }
    }

    GrayImage::from_vec(table.width(), table.height(), data).expect("table dimensions are positive")
}
