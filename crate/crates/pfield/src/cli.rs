//! Command-line surface. Each subcommand reads its inputs, calls into the
//! core crate and writes files or a JSON report on stdout.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pfield_core::nalgebra::Matrix3;
use pfield_core::calibrate::wrap_angle;
use pfield_core::metric::{pfd_masked, RotationSearch};
use pfield_core::synth::{sample_pano_crop, CameraSampler, PanoCropRequest};
use pfield_core::{
    calibrate, decode_bins, encode_bins, fixed_center_calibrate, hflip_field, merge, pano_crop, plan_windows,
    rank_candidates, render_overlay, rotation_adjust, synth_field, BinCodecConfig, CalibrationResult, FieldTransform,
    Init, MetricConfig, OptimizerConfig, OverlayStyle, PerspectiveField, Rect, RgbImage, WindowConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera_file::{read_camera, write_camera, write_json, CameraFile, ModelName};
use crate::error::Error;
use crate::format::{read_bin_field, read_field, write_bin_field, write_field};
use crate::imageio::{read_image, write_png};

const EXIT_CODES: &str = "\
Exit codes:
   0  success
   2  usage error (unknown flag, bad argument value)
   3  file could not be read or written
   4  JSON or image content could not be decoded
   5  invariant violation (invalid camera, field, size or parameter)
   6  computation failed (no overlap, all pixels masked, ...)
  10  field file: bad magic
  11  field file: unsupported version
  12  field file: truncated payload
  13  field file: NaN or infinite value
  14  field file: up vector not unit length
  15  field file: other malformed content

Errors are written to stderr as one JSON object:
  {\"error\": <code>, \"message\": <text>, \"exit_code\": <n>}

PF_THREADS caps the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "pfield", version, about = "Perspective field tools", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render the field of a parametric camera.
    Synth(SynthArgs),
    /// Cut perspective crops and their fields out of an equirectangular panorama.
    PanoCrop(PanoCropArgs),
    /// Apply an image-plane transform to a field.
    Transform(TransformArgs),
    /// Recover camera parameters from a field.
    Calibrate(CalibrateArgs),
    /// Average perspective field discrepancy between two fields.
    Apfd(ApfdArgs),
    /// Rank candidate fields against a patch of a background field.
    Rank(RankArgs),
    /// Write a sliding-window layout for an image size.
    PlanWindows(PlanWindowsArgs),
    /// Merge per-window fields into one field.
    Aggregate(AggregateArgs),
    /// Quantize a field into up/latitude bins.
    EncodeBins(EncodeBinsArgs),
    /// Turn bin indices back into a field.
    DecodeBins(DecodeBinsArgs),
    /// Draw up-vector arrows and the latitude color map over an image.
    Viz(VizArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub camera: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write an overlay on a gray background.
    #[arg(long)]
    pub png: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PanoCropArgs {
    #[arg(long)]
    pub pano: PathBuf,
    #[arg(long, conflicts_with = "sample", required_unless_present = "sample")]
    pub camera: Option<PathBuf>,
    /// Draw cameras from the training distribution.
    #[arg(long)]
    pub sample: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Crop width for sampled cameras.
    #[arg(long, default_value_t = 640)]
    pub width: usize,
    /// Crop height for sampled cameras.
    #[arg(long, default_value_t = 480)]
    pub height: usize,
    /// Redraw crops that are entirely black or white.
    #[arg(long)]
    pub reject_blank: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformOp {
    Crop,
    Resize,
    Rotate,
    Hflip,
    Homography,
}

#[derive(Debug, Args)]
#[command(after_help = "\
Parameters per operation:
  crop        x,y,w,h
  resize      w,h
  rotate      degrees (counterclockwise on screen, about the image center)
  hflip       none
  homography  h11,h12,h13,h21,h22,h23,h31,h32,h33[,out_w,out_h]  (input to output pixels)")]
pub struct TransformArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub op: TransformOp,
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    pub params: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitMethod {
    /// Center roll/pitch, FoV as the top-bottom latitude difference.
    Heuristic,
    /// Center roll/pitch, FoV solved from the edge latitudes.
    Geometric,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Keep the principal point at the image center.
    #[arg(long)]
    pub fixed_center: bool,
    /// Evaluate the objective on every pixel instead of a 64x64 grid.
    #[arg(long)]
    pub full_res: bool,
    #[arg(long, value_enum, default_value_t = InitMethod::Geometric)]
    pub init: InitMethod,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ApfdArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Image whose non-black pixels select the pixels to compare.
    #[arg(long)]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub background: PathBuf,
    #[arg(long = "box", value_name = "X,Y,W,H")]
    pub region: String,
    /// Directory of candidate `.pfld` files.
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub adjust_rotation: bool,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct PlanWindowsArgs {
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long, default_value_t = 12)]
    pub rows: usize,
    #[arg(long, default_value_t = 18)]
    pub cols: usize,
    /// Window size as a fraction of the image size.
    #[arg(long, default_value_t = 0.5)]
    pub frac: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Directory holding the window files named in the layout.
    #[arg(long)]
    pub windows: PathBuf,
    #[arg(long)]
    pub layout: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeBinsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 72)]
    pub up_bins: u16,
    #[arg(long, default_value_t = 180)]
    pub latitude_bins: u16,
}

#[derive(Debug, Args)]
pub struct DecodeBinsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VizArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub stride: usize,
    #[arg(long, default_value_t = 10.0)]
    pub contour_deg: f64,
}

/// Runs one parsed command; the returned string, if any, goes to stdout.
pub fn run(cli: Cli) -> Result<Option<String>, Error> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::PanoCrop(a) => pano(a),
        Command::Transform(a) => transform(a),
        Command::Calibrate(a) => calibrate_cmd(a),
        Command::Apfd(a) => apfd(a),
        Command::Rank(a) => rank(a),
        Command::PlanWindows(a) => plan(a),
        Command::Aggregate(a) => aggregate(a),
        Command::EncodeBins(a) => encode(a),
        Command::DecodeBins(a) => decode(a),
        Command::Viz(a) => viz(a),
    }
}

fn json<T: Serialize>(value: &T) -> Option<String> {
    Some(serde_json::to_string_pretty(value).expect("plain data serializes"))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, Error> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            let v: f64 = s.trim().parse().map_err(|_| Error::usage(format!("{what}: cannot parse {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::usage(format!("{what}: {s:?} is not finite")))
            }
        })
        .collect()
}

fn parse_counts(text: &str, what: &str, n: usize) -> Result<Vec<usize>, Error> {
    let vals: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::usage(format!("{what}: cannot parse {s:?}"))))
        .collect::<Result<_, _>>()?;
    if vals.len() != n {
        return Err(Error::usage(format!("{what}: expected {n} comma-separated integers")));
    }
    Ok(vals)
}

const GRAY: [u8; 3] = [128, 128, 128];

fn synth(a: SynthArgs) -> Result<Option<String>, Error> {
    let cam = read_camera(&a.camera)?;
    let field = synth_field(&cam)?;
    write_field(&a.out, &field)?;
    if let Some(png) = &a.png {
        let bg = RgbImage::filled(cam.width, cam.height, GRAY);
        write_png(png, &render_overlay(&bg, &field, &OverlayStyle::default())?)?;
    }
    Ok(None)
}

#[derive(Serialize)]
struct CropRecord {
    image: String,
    field: String,
    camera: CameraFile,
}

fn pano(a: PanoCropArgs) -> Result<Option<String>, Error> {
    let pano_img = read_image(&a.pano)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    if a.count == 0 {
        return Err(Error::usage("--count must be at least 1"));
    }
    let fixed = a.camera.as_deref().map(read_camera).transpose()?;
    if fixed.is_some() && a.count != 1 {
        return Err(Error::usage("--count only applies with --sample"));
    }
    let mut req = PanoCropRequest::new(CameraSampler::training(a.width, a.height));
    req.reject_blank = a.reject_blank;
    let records = (0..a.count)
        .into_par_iter()
        .map(|k| {
            // One stream per crop keeps output independent of thread count.
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            rng.set_stream(k as u64);
            let (cam, img, field) = match fixed {
                Some(cam) => {
                    let (img, field) = pano_crop(&pano_img, &cam)?;
                    (cam, img, field)
                }
                None => sample_pano_crop(&pano_img, &req, &mut rng)?,
            };
            let stem = format!("crop_{k:04}");
            let (img_name, field_name) = (format!("{stem}.png"), format!("{stem}.pfld"));
            write_png(&a.out_dir.join(&img_name), &img)?;
            write_field(&a.out_dir.join(&field_name), &field)?;
            write_camera(&a.out_dir.join(format!("{stem}.json")), &cam)?;
            Ok(CropRecord { image: img_name, field: field_name, camera: CameraFile::from_spec(&cam) })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(json(&records))
}

fn transform(a: TransformArgs) -> Result<Option<String>, Error> {
    let field = read_field(&a.input)?;
    let size = field.size();
    let p = parse_list(&a.params, "--params")?;
    let arity = |n: &[usize]| -> Result<(), Error> {
        if n.contains(&p.len()) {
            Ok(())
        } else {
            Err(Error::usage(format!("--op {:?} takes {n:?} parameters, got {}", a.op, p.len())))
        }
    };
    let out = match a.op {
        TransformOp::Hflip => {
            arity(&[0])?;
            hflip_field(&field)
        }
        TransformOp::Crop => {
            let n = parse_counts(&a.params, "--params", 4)?;
            field.region(n[0], n[1], n[2], n[3])?
        }
        TransformOp::Resize => {
            let n = parse_counts(&a.params, "--params", 2)?;
            FieldTransform::resize(size, n[0], n[1])?.apply(&field)?
        }
        TransformOp::Rotate => {
            arity(&[1])?;
            FieldTransform::rotate(size, p[0].to_radians())?.apply(&field)?
        }
        TransformOp::Homography => {
            arity(&[9, 11])?;
            let out_size = if p.len() == 11 {
                let n = parse_counts(&a.params.split(',').skip(9).collect::<Vec<_>>().join(","), "--params", 2)?;
                (n[0], n[1])
            } else {
                size
            };
            let m = Matrix3::from_row_slice(&p[..9]);
            FieldTransform::homography(size, out_size, m)?.apply(&field)?
        }
    };
    write_field(&a.out, &out)?;
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub model: ModelName,
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub vfov_deg: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub fov_star_deg: f64,
    /// Objective value in radians.
    pub final_loss: f64,
    pub iterations: usize,
    pub termination: String,
}

impl CalibrationReport {
    pub fn new(r: &CalibrationResult, width: usize, height: usize) -> Self {
        Self {
            model: ModelName::Pinhole,
            roll_deg: r.params.roll.to_degrees(),
            pitch_deg: r.params.pitch.to_degrees(),
            vfov_deg: r.vfov.to_degrees(),
            cx: r.params.cx,
            cy: r.params.cy,
            width,
            height,
            fov_star_deg: r.fov_star.to_degrees(),
            final_loss: r.final_loss,
            iterations: r.iterations,
            termination: r.termination.as_str().to_owned(),
        }
    }
}

fn calibrate_cmd(a: CalibrateArgs) -> Result<Option<String>, Error> {
    let field = read_field(&a.input)?;
    let cfg = OptimizerConfig { grid: if a.full_res { None } else { OptimizerConfig::default().grid }, ..Default::default() };
    let init = match a.init {
        InitMethod::Heuristic => Init::Heuristic,
        InitMethod::Geometric => Init::Geometric,
    };
    let result = if a.fixed_center {
        fixed_center_calibrate(&field, &cfg, init)?
    } else {
        calibrate(&field, &cfg, init)?
    };
    let report = CalibrationReport::new(&result, field.width(), field.height());
    write_json(&a.out, &report)?;
    Ok(json(&report))
}

#[derive(Serialize)]
struct ApfdReport {
    apfd_deg: f64,
    up_deg: f64,
    latitude_deg: f64,
    lambda: f64,
    pixels: usize,
}

fn read_mask(path: &Path, size: (usize, usize)) -> Result<Vec<bool>, Error> {
    let img = read_image(path)?;
    if (img.width(), img.height()) != size {
        return Err(pfield_core::Error::DimensionMismatch { expected: size, found: (img.width(), img.height()) }.into());
    }
    Ok(img.as_raw().chunks_exact(3).map(|p| p.iter().any(|&c| c != 0)).collect())
}

fn apfd(a: ApfdArgs) -> Result<Option<String>, Error> {
    let fa = read_field(&a.a)?;
    let fb = read_field(&a.b)?;
    let cfg = MetricConfig::new(a.lambda)?;
    let mask = a.mask.as_deref().map(|p| read_mask(p, fa.size())).transpose()?;
    let r = pfd_masked(&fa, &fb, mask.as_deref(), &cfg)?;
    Ok(json(&ApfdReport {
        apfd_deg: r.apfd.to_degrees(),
        up_deg: r.up_term.to_degrees(),
        latitude_deg: r.lat_term.to_degrees(),
        lambda: a.lambda,
        pixels: r.pixel_count,
    }))
}

#[derive(Serialize)]
struct RankEntry {
    rank: usize,
    file: String,
    apfd_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rotation_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unadjusted_apfd_deg: Option<f64>,
}

fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, Error> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    files.sort();
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn rank(a: RankArgs) -> Result<Option<String>, Error> {
    let bg = read_field(&a.background)?;
    let b = parse_counts(&a.region, "--box", 4)?;
    let patch = bg.region(b[0], b[1], b[2], b[3])?;
    let cfg = MetricConfig::new(a.lambda)?;
    let files = list_files(&a.candidates, "pfld")?;
    let candidates = files.par_iter().map(|p| read_field(p)).collect::<Result<Vec<_>, _>>()?;
    let entries: Vec<RankEntry> = if a.adjust_rotation {
        if candidates.is_empty() {
            return Err(pfield_core::Error::EmptyCandidates.into());
        }
        let search = RotationSearch::default();
        let mut adjusted = candidates
            .par_iter()
            .zip(&files)
            .map(|(c, p)| {
                let r = rotation_adjust(&patch, c, &search, &cfg)?;
                Ok((file_name(p), r.score, wrap_angle(r.angle), r.unadjusted_score))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        adjusted.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
        adjusted
            .into_iter()
            .enumerate()
            .map(|(i, (file, score, angle, raw))| RankEntry {
                rank: i + 1,
                file,
                apfd_deg: score.to_degrees(),
                rotation_deg: Some(angle.to_degrees()),
                unadjusted_apfd_deg: Some(raw.to_degrees()),
            })
            .collect()
    } else {
        rank_candidates(&patch, &candidates, &cfg)?
            .into_iter()
            .enumerate()
            .map(|(i, r)| RankEntry {
                rank: i + 1,
                file: file_name(&files[r.index]),
                apfd_deg: r.score.to_degrees(),
                rotation_deg: None,
                unadjusted_apfd_deg: None,
            })
            .collect()
    };
    Ok(json(&entries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    /// Field file, relative to the windows directory.
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub width: usize,
    pub height: usize,
    pub windows: Vec<WindowEntry>,
}

fn plan(a: PlanWindowsArgs) -> Result<Option<String>, Error> {
    let cfg = WindowConfig { height_frac: a.frac, width_frac: a.frac, rows: a.rows, cols: a.cols };
    let p = plan_windows(a.width, a.height, &cfg)?;
    let layout = Layout {
        width: p.width,
        height: p.height,
        windows: p
            .windows
            .iter()
            .enumerate()
            .map(|(i, r)| WindowEntry {
                x: r.x,
                y: r.y,
                width: r.width,
                height: r.height,
                file: format!("window_{i:04}.pfld"),
            })
            .collect(),
    };
    write_json(&a.out, &layout)?;
    Ok(None)
}

fn aggregate(a: AggregateArgs) -> Result<Option<String>, Error> {
    let text = fs::read_to_string(&a.layout).map_err(|e| Error::io(&a.layout, e))?;
    let layout: Layout = serde_json::from_str(&text).map_err(|e| Error::decode(&a.layout, e))?;
    let windows = layout
        .windows
        .par_iter()
        .map(|w| {
            let f: PerspectiveField = read_field(&a.windows.join(&w.file))?;
            Ok((Rect { x: w.x, y: w.y, width: w.width, height: w.height }, f))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let merged = merge(layout.width, layout.height, &windows)?;
    write_field(&a.out, &merged)?;
    Ok(None)
}

fn encode(a: EncodeBinsArgs) -> Result<Option<String>, Error> {
    let field = read_field(&a.input)?;
    let cfg = BinCodecConfig { up_bins: a.up_bins, latitude_bins: a.latitude_bins };
    write_bin_field(&a.out, &encode_bins(&field, &cfg)?, &cfg)?;
    Ok(None)
}

fn decode(a: DecodeBinsArgs) -> Result<Option<String>, Error> {
    let (bins, cfg) = read_bin_field(&a.input)?;
    write_field(&a.out, &decode_bins(&bins, &cfg)?)?;
    Ok(None)
}

fn viz(a: VizArgs) -> Result<Option<String>, Error> {
    let img = read_image(&a.image)?;
    let field = read_field(&a.field)?;
    if !(a.contour_deg >= 0.0 && a.contour_deg.is_finite()) {
        return Err(Error::usage("--contour-deg must be a non-negative number"));
    }
    let style = OverlayStyle { stride: a.stride, contour_deg: a.contour_deg, ..Default::default() };
    write_png(&a.out, &render_overlay(&img, &field, &style)?)?;
    Ok(None)
}
