//! Stereo disparity estimation built around a single-storage More Global
//! Matching (MGM) engine.
//!
//! The matcher aggregates census matching costs over the four causal paths
//! (top-left, top, top-right, left) grouped into a single averaged term, so
//! the whole recursion runs in one row-major pass over one rolling row buffer
//! plus one left-neighbour buffer. The crate also ships slow reference
//! implementations (full-volume MGM, classical 4/8-path SGM, plain
//! winner-take-all), fixed-point rectification, strip-parallel execution and
//! Middlebury-style evaluation utilities.

pub mod aggregator;
pub mod census;
pub mod error;
pub mod evalkit;
pub mod oracle;
pub mod pixelio;
pub mod rectify;
pub mod stripes;

pub use error::{Error, Result};
pub use pixelio::{DisparityMap, GrayImage, RemapTable, RunConfig};
