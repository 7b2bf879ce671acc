//! Batch front end for the stereo toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or file-format error,
//! 3 dimension or parameter error.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mgm_stereo::evalkit::{self, TimingModel};
use mgm_stereo::pixelio::{self, GrayImage, RemapTable, RunConfig};
use mgm_stereo::{oracle, rectify, stripes, Error as CoreError};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Parser)]
#[command(
    name = "mgmstereo",
    version,
    about = "Stereo disparity toolkit: census costs aggregated by a single-pass 4-path MGM engine, \
             with reference matchers, fixed-point rectification and evaluation utilities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rectify a raw image with a fixed-point remap table
    Rectify {
        /// Raw input image (PGM)
        #[arg(long)]
        raw: PathBuf,
        /// Remap table (SMAP)
        #[arg(long)]
        map: PathBuf,
        /// Rectified output image (PGM)
        #[arg(long)]
        out: PathBuf,
    },
    /// Match a rectified pair and write a scaled disparity PGM
    Match(MatchArgs),
    /// Evaluate a disparity file against ground truth
    Eval {
        /// Estimated disparity (scaled PGM)
        #[arg(long)]
        est: PathBuf,
        /// Ground-truth disparity (scaled PGM, 0 = unknown)
        #[arg(long)]
        gt: PathBuf,
        /// Scale divisor applied to both files
        #[arg(long, default_value_t = 4)]
        gt_scale: u8,
        /// Error tolerance in pixels
        #[arg(long, default_value_t = 5)]
        tolerance: u8,
        /// Optional key=value report file
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Convert a disparity file to metric depth
    Depth {
        /// Disparity input (scaled PGM, 0 = unknown)
        #[arg(long)]
        disp: PathBuf,
        /// Scale divisor of the disparity file
        #[arg(long, default_value_t = 2)]
        scale: u8,
        /// Stereo baseline in meters
        #[arg(long)]
        baseline: f64,
        /// Focal length in pixels
        #[arg(long)]
        focal: f64,
        /// Output text file: "depth W H" header, one row per line, meters,
        /// "-" for invalid pixels
        #[arg(long)]
        out: PathBuf,
    },
    /// Time the matcher on synthetic frames, next to the hardware model
    Bench {
        #[arg(long, default_value_t = 640)]
        width: usize,
        #[arg(long, default_value_t = 480)]
        height: usize,
        #[arg(long, default_value_t = 92)]
        dmax: usize,
        #[arg(long, default_value_t = 5)]
        sections: usize,
        #[arg(long, default_value_t = 3)]
        repeat: usize,
    },
}

#[derive(Args)]
struct MatchArgs {
    /// Left (base) image, PGM
    #[arg(long)]
    left: PathBuf,
    /// Right image, PGM
    #[arg(long)]
    right: PathBuf,
    /// Output disparity PGM
    #[arg(long)]
    out: PathBuf,
    /// Matcher: mgm, mgm-full, sgm4, sgm8 or wta
    #[arg(long)]
    algo: Option<String>,
    /// Independent horizontal sections for the mgm engine
    #[arg(long)]
    sections: Option<usize>,
    #[arg(long)]
    p1: Option<u8>,
    #[arg(long)]
    p2: Option<u8>,
    /// Disparity search range
    #[arg(long)]
    dmax: Option<usize>,
    /// Census window side (odd, at most 7)
    #[arg(long)]
    window: Option<usize>,
    /// Multiplier applied to disparities in the output PGM
    #[arg(long)]
    scale: Option<u8>,
    /// Resize both inputs to WxH before matching (fixed-point bilinear)
    #[arg(long)]
    resize: Option<String>,
    /// key=value file preloading the flags above; explicit flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Core(CoreError),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(
                CoreError::Io { .. }
                | CoreError::Format { .. }
                | CoreError::UnsupportedDepth { .. }
                | CoreError::SizeMismatch { .. },
            ) => 2,
            CliError::Core(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Rectify { raw, map, out } => run_rectify(&raw, &map, &out),
        Command::Match(args) => run_match(args),
        Command::Eval {
            est,
            gt,
            gt_scale,
            tolerance,
            report,
        } => run_eval(&est, &gt, gt_scale, tolerance, report.as_deref()),
        Command::Depth {
            disp,
            scale,
            baseline,
            focal,
            out,
        } => run_depth(&disp, scale, baseline, focal, &out),
        Command::Bench {
            width,
            height,
            dmax,
            sections,
            repeat,
        } => run_bench(width, height, dmax, sections, repeat),
    }
}

fn run_rectify(raw: &Path, map: &Path, out: &Path) -> Result<(), CliError> {
    let raw_img = pixelio::read_pgm(raw)?;
    let table = pixelio::read_remap_table(map)?;
    let rectified = rectify::remap(&raw_img, &table);
    pixelio::write_pgm(&rectified, out)?;
    println!(
        "rectified {}x{} -> {}",
        rectified.width(),
        rectified.height(),
        out.display()
    );
    Ok(())
}

const CONFIG_KEYS: [&str; 8] = [
    "algo", "window", "dmax", "p1", "p2", "sections", "scale", "resize",
];

/// key=value lines; '#' starts a comment, blank lines ignored.
fn read_config(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Core(CoreError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected key=value, found '{line}'",
                path.display(),
                lineno + 1
            )));
        };
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(CliError::Usage(format!(
                "{}:{}: unknown config key '{key}' (expected one of {})",
                path.display(),
                lineno + 1,
                CONFIG_KEYS.join(", ")
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Flag beats config file beats built-in default.
fn resolve<T: FromStr + Copy>(
    flag: Option<T>,
    config: &HashMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match config.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|_| CliError::Usage(format!("config value {key}={raw} is not valid"))),
        None => Ok(default),
    }
}

fn parse_resize(spec: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = spec.split('x').collect();
    if parts.len() == 2 {
        if let (Ok(w), Ok(h)) = (parts[0].parse(), parts[1].parse()) {
            return Ok((w, h));
        }
    }
    Err(CliError::Usage(format!(
        "--resize expects WxH (e.g. 640x480), found '{spec}'"
    )))
}

fn run_match(args: MatchArgs) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => read_config(path)?,
        None => HashMap::new(),
    };

    let defaults = RunConfig::default();
    let cfg = RunConfig {
        window: resolve(args.window, &config, "window", defaults.window)?,
        disparity_range: resolve(args.dmax, &config, "dmax", defaults.disparity_range)?,
        p1: resolve(args.p1, &config, "p1", defaults.p1)?,
        p2: resolve(args.p2, &config, "p2", defaults.p2)?,
        sections: resolve(args.sections, &config, "sections", defaults.sections)?,
        ..defaults
    };
    // 92 * 2 = 184 still fits the 8-bit output
    let scale = resolve(args.scale, &config, "scale", 2u8)?;
    let algo = match args.algo {
        Some(a) => a,
        None => config.get("algo").cloned().unwrap_or_else(|| "mgm".to_string()),
    };
    let resize = match args.resize {
        Some(r) => Some(r),
        None => config.get("resize").cloned(),
    };

    let mut left = pixelio::read_pgm(&args.left)?;
    let mut right = pixelio::read_pgm(&args.right)?;
    if let Some(spec) = resize {
        let (w, h) = parse_resize(&spec)?;
        let table_l = RemapTable::rescale(left.width(), left.height(), w, h)?;
        let table_r = RemapTable::rescale(right.width(), right.height(), w, h)?;
        left = rectify::remap(&left, &table_l);
        right = rectify::remap(&right, &table_r);
    }

    let map = match algo.as_str() {
        "mgm" => stripes::match_frame_striped(&left, &right, &cfg)?,
        "mgm-full" => oracle::mgm_full(&left, &right, &cfg)?.0,
        "sgm4" => oracle::sgm_paths(&left, &right, &cfg, oracle::SgmPaths::Four)?,
        "sgm8" => oracle::sgm_paths(&left, &right, &cfg, oracle::SgmPaths::Eight)?,
        "wta" => oracle::census_wta(&left, &right, &cfg)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown matcher '{other}' (expected mgm, mgm-full, sgm4, sgm8 or wta)"
            )))
        }
    };
    pixelio::write_disparity(&map, &args.out, scale)?;
    println!(
        "{algo}: {} valid pixels, disparity x{scale} -> {}",
        map.valid_count(),
        args.out.display()
    );
    Ok(())
}

fn run_eval(
    est: &Path,
    gt: &Path,
    gt_scale: u8,
    tolerance: u8,
    report: Option<&Path>,
) -> Result<(), CliError> {
    let est_map = pixelio::read_ground_truth(est, gt_scale)?;
    let gt_map = pixelio::read_ground_truth(gt, gt_scale)?;
    let r = evalkit::accuracy(&est_map, &gt_map, tolerance)?;
    println!("rmse={:.2} pct={:.2}", r.rmse, r.pct_erroneous);
    if let Some(path) = report {
        fs::write(path, r.to_key_values()).map_err(|e| {
            CliError::Core(CoreError::Io {
                path: path.to_path_buf(),
                source: e,
            })
        })?;
    }
    Ok(())
}

fn run_depth(
    disp: &Path,
    scale: u8,
    baseline: f64,
    focal: f64,
    out: &Path,
) -> Result<(), CliError> {
    let map = pixelio::read_ground_truth(disp, scale)?;
    let depth = evalkit::disparity_to_depth(&map, baseline, focal)?;

    let mut text = format!("depth {} {}\n", depth.width(), depth.height());
    let mut min = f32::INFINITY;
    let mut max = 0f32;
    let mut valid = 0usize;
    for row in 0..depth.height() {
        for col in 0..depth.width() {
            if col > 0 {
                text.push(' ');
            }
            if depth.is_valid(row, col) {
                let v = depth.depth(row, col);
                let _ = write!(text, "{v:.4}");
                min = min.min(v);
                max = max.max(v);
                valid += 1;
            } else {
                text.push('-');
            }
        }
        text.push('\n');
    }
    fs::write(out, text).map_err(|e| {
        CliError::Core(CoreError::Io {
            path: out.to_path_buf(),
            source: e,
        })
    })?;
    if valid > 0 {
        println!("depth range [{min:.3}, {max:.3}] m over {valid} valid pixels");
    } else {
        println!("no valid pixels");
    }
    Ok(())
}

fn run_bench(
    width: usize,
    height: usize,
    dmax: usize,
    sections: usize,
    repeat: usize,
) -> Result<(), CliError> {
    let mut rng = StdRng::seed_from_u64(42);
    let make = |rng: &mut StdRng| -> Result<GrayImage, CliError> {
        let data = (0..width * height).map(|_| rng.random()).collect();
        Ok(GrayImage::from_vec(width, height, data)?)
    };
    let left = make(&mut rng)?;
    let right = make(&mut rng)?;
    let cfg = RunConfig {
        disparity_range: dmax,
        sections,
        ..RunConfig::default()
    };

    let mut best = 0f64;
    let mut sum = 0f64;
    for i in 0..repeat {
        let start = Instant::now();
        let map = stripes::match_frame_striped(&left, &right, &cfg)?;
        let dt = start.elapsed().as_secs_f64();
        let fps = 1.0 / dt;
        best = best.max(fps);
        sum += fps;
        println!(
            "run {}: {:.2} fps ({:.1} ms, {} valid pixels)",
            i + 1,
            fps,
            dt * 1e3,
            map.valid_count()
        );
    }
    if repeat > 0 {
        println!(
            "measured: best {best:.2} fps, mean {:.2} fps over {repeat} runs ({sections} sections)",
            sum / repeat as f64
        );
    }
    let model = TimingModel {
        blocks: sections as u32,
        rows: height as u32,
        cols: width as u32,
        disparity_range: dmax as u32,
        ..TimingModel::default()
    };
    println!(
        "model: {:.1} fps ({} blocks at 100 MHz, pipeline depth {})",
        evalkit::estimate_fps(&model),
        model.blocks,
        model.pipeline_depth
    );
    Ok(())
}
