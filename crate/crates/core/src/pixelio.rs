//! Image, disparity and remap-table carriers plus their file formats.
//!
//! Images travel as binary PGM (P5, maxval <= 255). Remap tables use a small
//! binary format ("SMAP"): magic, little-endian u32 width and height, then
//! width*height pairs of little-endian u16 fixed-point coordinates with five
//! fractional bits (Q11.5). Disparity maps are written as scaled PGMs with 0
//! reserved for invalid pixels, the Middlebury ground-truth convention.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Number of fractional bits in remap coordinates.
pub const REMAP_FRAC_BITS: u32 = 5;
/// Fixed-point scale factor, 2^5.
pub const REMAP_ONE: u16 = 1 << REMAP_FRAC_BITS;

const SMAP_MAGIC: &[u8; 4] = b"SMAP";

/// 8-bit single-channel raster, row-major, top-to-bottom.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    /// All-zero image. Dimensions must be positive.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::from_vec(width, height, vec![0; width.checked_mul(height).unwrap_or(0)])
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter {
                reason: format!("image dimensions must be positive, got {width}x{height}"),
            });
        }
        if data.len() != width * height {
            return Err(Error::InvalidParameter {
                reason: format!(
                    "pixel data length {} does not match {width}x{height}",
                    data.len()
                ),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.data[row * self.width + col] = value;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    /// Copy of the row band [start, start+height).
    pub fn crop_rows(&self, start: usize, height: usize) -> Result<Self> {
        if start + height > self.height || height == 0 {
            return Err(Error::InvalidParameter {
                reason: format!(
                    "row band [{start}, {}) outside image of height {}",
                    start + height,
                    self.height
                ),
            });
        }
        let data = self.data[start * self.width..(start + height) * self.width].to_vec();
        Self::from_vec(self.width, height, data)
    }
}

/// Per-pixel disparity plus validity mask; the pipeline's primary output.
///
/// Invalid pixels (census borders, unknown ground truth) carry disparity 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    disp: Vec<u8>,
    valid: Vec<bool>,
}

impl DisparityMap {
    /// Map with every pixel invalid.
    pub fn new_invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            disp: vec![0; width * height],
            valid: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn disparity(&self, row: usize, col: usize) -> u8 {
        self.disp[row * self.width + col]
    }

    #[inline]
    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, disparity: u8, valid: bool) {
        let i = row * self.width + col;
        self.disp[i] = if valid { disparity } else { 0 };
        self.valid[i] = valid;
    }

    pub fn disparities(&self) -> &[u8] {
        &self.disp
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Per-pixel source coordinates for rectification, Q11.5 fixed point.
///
/// Entry (row, col) holds (x_fixed, y_fixed); the rectified pixel at
/// (row, col) samples the raw image at (x_fixed/32, y_fixed/32).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RemapTable {
    width: usize,
    height: usize,
    coords: Vec<(u16, u16)>,
}

impl RemapTable {
    pub fn from_vec(width: usize, height: usize, coords: Vec<(u16, u16)>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter {
                reason: format!("remap table dimensions must be positive, got {width}x{height}"),
            });
        }
        if coords.len() != width * height {
            return Err(Error::InvalidParameter {
                reason: format!(
                    "coordinate count {} does not match {width}x{height}",
                    coords.len()
                ),
            });
        }
        Ok(Self { width, height, coords })
    }

    /// Table mapping every pixel to itself.
    pub fn identity(width: usize, height: usize) -> Result<Self> {
        if width > 2048 || height > 2048 {
            return Err(Error::InvalidParameter {
                reason: format!("Q11.5 coordinates cannot address {width}x{height}"),
            });
        }
        let mut coords = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                coords.push(((col as u16) << REMAP_FRAC_BITS, (row as u16) << REMAP_FRAC_BITS));
            }
        }
        Self::from_vec(width, height, coords)
    }

    /// Table resampling a src_width x src_height image to the table's own
    /// dimensions (pixel-center aligned). Degenerates to the identity when
    /// the sizes match.
    pub fn rescale(
        src_width: usize,
        src_height: usize,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        if src_width == 0 || src_height == 0 || width == 0 || height == 0 {
            return Err(Error::InvalidParameter {
                reason: "rescale dimensions must be positive".to_string(),
            });
        }
        if src_width > 2048 || src_height > 2048 {
            return Err(Error::InvalidParameter {
                reason: format!("Q11.5 coordinates cannot address {src_width}x{src_height}"),
            });
        }
        let scale = REMAP_ONE as f64;
        let fx = src_width as f64 / width as f64;
        let fy = src_height as f64 / height as f64;
        let mut coords = Vec::with_capacity(width * height);
        for row in 0..height {
            let sy = ((row as f64 + 0.5) * fy - 0.5).max(0.0);
            let yq = ((sy * scale).round() as u16).min(((src_height - 1) as u16) << REMAP_FRAC_BITS);
            for col in 0..width {
                let sx = ((col as f64 + 0.5) * fx - 0.5).max(0.0);
                let xq =
                    ((sx * scale).round() as u16).min(((src_width - 1) as u16) << REMAP_FRAC_BITS);
                coords.push((xq, yq));
            }
        }
        Self::from_vec(width, height, coords)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Fixed-point (x, y) source coordinate for output pixel (row, col).
    #[inline]
    pub fn coord(&self, row: usize, col: usize) -> (u16, u16) {
        self.coords[row * self.width + col]
    }

    /// Real-valued source coordinate, fixed value / 32.
    pub fn coord_f64(&self, row: usize, col: usize) -> (f64, f64) {
        let (x, y) = self.coord(row, col);
        (x as f64 / REMAP_ONE as f64, y as f64 / REMAP_ONE as f64)
    }
}

/// Run parameters shared across the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// Census window side, odd, at most 7.
    pub window: usize,
    /// Disparity search range D; disparities are in [0, D-1].
    pub disparity_range: usize,
    /// Penalty for a +-1 disparity change between neighbours.
    pub p1: u8,
    /// Penalty for larger disparity jumps; must exceed p1.
    pub p2: u8,
    /// Saturation bound for aggregated costs (8-bit storage).
    pub cost_cap: u8,
    /// Horizontal sections processed by independent engines.
    pub sections: usize,
    /// Divisor between ground-truth PGM values and true disparities.
    pub gt_scale: u8,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            window: 7,
            disparity_range: 92,
            p1: 10,
            p2: 120,
            cost_cap: 255,
            sections: 5,
            gt_scale: 4,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window % 2 == 0 || self.window < 3 {
            return Err(Error::InvalidParameter {
                reason: format!("census window must be odd and >= 3, got {}", self.window),
            });
        }
        if self.window > 7 {
            return Err(Error::InvalidParameter {
                reason: format!(
                    "census window {} unsupported: descriptors are limited to 64 bits",
                    self.window
                ),
            });
        }
        if self.disparity_range == 0 || self.disparity_range > 256 {
            return Err(Error::InvalidParameter {
                reason: format!(
                    "disparity range must be in [1, 256], got {}",
                    self.disparity_range
                ),
            });
        }
        if self.p1 >= self.p2 {
            return Err(Error::InvalidParameter {
                reason: format!("penalties must satisfy p1 < p2, got p1={} p2={}", self.p1, self.p2),
            });
        }
        if self.p2 > self.cost_cap {
            return Err(Error::InvalidParameter {
                reason: format!(
                    "p2={} must not exceed cost cap {}",
                    self.p2, self.cost_cap
                ),
            });
        }
        if self.sections == 0 {
            return Err(Error::InvalidParameter {
                reason: "section count must be positive".to_string(),
            });
        }
        if self.gt_scale == 0 {
            return Err(Error::InvalidParameter {
                reason: "ground-truth scale must be positive".to_string(),
            });
        }
        Ok(())
    }

    /// Census half-window (border width on every side).
    pub fn half_window(&self) -> usize {
        self.window / 2
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// PGM header tokenizer: skips whitespace and '#' comment lines.
struct TokenReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> TokenReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos > start {
            Some(&self.bytes[start..self.pos])
        } else {
            None
        }
    }

    fn number(&mut self, path: &Path, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| format_err(path, format!("missing {what} in header")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                format_err(
                    path,
                    format!("invalid {what} token '{}'", String::from_utf8_lossy(tok)),
                )
            })
    }

    /// Byte offset just past the single whitespace that terminates the header.
    fn payload_offset(&self) -> usize {
        self.pos + 1
    }
}

/// Read a binary PGM (P5) file with maxval <= 255.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let mut rd = TokenReader::new(&bytes);

    let magic = rd
        .token()
        .ok_or_else(|| format_err(path, "empty file, expected PGM magic"))?;
    if magic != b"P5" {
        return Err(format_err(
            path,
            format!("expected magic 'P5', found '{}'", String::from_utf8_lossy(magic)),
        ));
    }
    let width = rd.number(path, "width")? as usize;
    let height = rd.number(path, "height")? as usize;
    let maxval = rd.number(path, "maxval")?;
    if width == 0 || height == 0 {
        return Err(format_err(path, format!("degenerate dimensions {width}x{height}")));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedDepth {
            path: path.to_path_buf(),
            maxval,
        });
    }

    let start = rd.payload_offset();
    let expected = width * height;
    let available = bytes.len().saturating_sub(start);
    if available < expected {
        return Err(Error::SizeMismatch {
            path: path.to_path_buf(),
            expected,
            actual: available,
        });
    }
    GrayImage::from_vec(width, height, bytes[start..start + expected].to_vec())
}

/// Write a binary PGM (P5) file, maxval 255. Round-trips bit-exactly
/// through `read_pgm`.
pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(32 + img.data.len());
    out.extend_from_slice(format!("P5\n{} {}\n255\n", img.width, img.height).as_bytes());
    out.extend_from_slice(&img.data);
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Read a binary SMAP remap table.
pub fn read_remap_table(path: impl AsRef<Path>) -> Result<RemapTable> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 12 {
        return Err(format_err(path, "file shorter than SMAP header"));
    }
    if &bytes[0..4] != SMAP_MAGIC {
        return Err(format_err(
            path,
            format!(
                "expected magic 'SMAP', found '{}'",
                String::from_utf8_lossy(&bytes[0..4])
            ),
        ));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if width == 0 || height == 0 {
        return Err(format_err(path, format!("degenerate dimensions {width}x{height}")));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| format_err(path, format!("implausible dimensions {width}x{height}")))?;
    let actual = bytes.len() - 12;
    if actual != expected {
        return Err(Error::SizeMismatch {
            path: path.to_path_buf(),
            expected,
            actual,
        });
    }
    let mut coords = Vec::with_capacity(width * height);
    for chunk in bytes[12..].chunks_exact(4) {
        let x = u16::from_le_bytes([chunk[0], chunk[1]]);
        let y = u16::from_le_bytes([chunk[2], chunk[3]]);
        coords.push((x, y));
    }
    RemapTable::from_vec(width, height, coords)
}

/// Write a remap table in the SMAP format.
pub fn write_remap_table(table: &RemapTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(12 + table.coords.len() * 4);
    out.extend_from_slice(SMAP_MAGIC);
    out.extend_from_slice(&(table.width as u32).to_le_bytes());
    out.extend_from_slice(&(table.height as u32).to_le_bytes());
    for &(x, y) in &table.coords {
        out.extend_from_slice(&x.to_le_bytes());
        out.extend_from_slice(&y.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Write a disparity map as a scaled PGM: pixel = disparity * scale,
/// invalid pixels as 0.
pub fn write_disparity(map: &DisparityMap, path: impl AsRef<Path>, scale: u8) -> Result<()> {
    let path = path.as_ref();
    if scale == 0 {
        return Err(Error::InvalidParameter {
            reason: "disparity scale must be positive".to_string(),
        });
    }
    let mut data = vec![0u8; map.disp.len()];
    for (i, (&d, &v)) in map.disp.iter().zip(&map.valid).enumerate() {
        if v {
            let scaled = d as u32 * scale as u32;
            if scaled > 255 {
                return Err(Error::Range {
                    reason: format!("disparity {d} * scale {scale} = {scaled} exceeds 255"),
                });
            }
            data[i] = scaled as u8;
        }
    }
    let img = GrayImage::from_vec(map.width, map.height, data)?;
    write_pgm(&img, path)
}

/// Read a scaled disparity PGM: disparity = pixel / gt_scale (integer
/// division), pixel 0 marks unknown.
pub fn read_ground_truth(path: impl AsRef<Path>, gt_scale: u8) -> Result<DisparityMap> {
    if gt_scale == 0 {
        return Err(Error::InvalidParameter {
            reason: "ground-truth scale must be positive".to_string(),
        });
    }
    let img = read_pgm(path)?;
    let mut map = DisparityMap::new_invalid(img.width, img.height);
    for row in 0..img.height {
        for col in 0..img.width {
            let px = img.get(row, col);
            if px != 0 {
                map.set(row, col, px / gt_scale, true);
            }
        }
    }
    Ok(map)
}
