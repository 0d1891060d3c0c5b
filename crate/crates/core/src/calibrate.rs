//! Pinhole camera recovery from a perspective field.
//!
//! The field is matched by a synthesized one: roll, pitch, relative focal
//! length and principal point are initialized from a few field samples and
//! then refined by Adam on the APFD between the synthesized and target
//! fields. Gradients come from central finite differences. The focal
//! length is optimized as `ln(rf)`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector2;
use num_traits::Euclid;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::camera::{rf_from_vfov, vfov_from_rf, PinholeEval};
use crate::metric::angle_between;
use crate::{CameraSpec, Error, PerspectiveField, Result};

/// Loss charged for parameters that do not describe a camera.
const PENALTY: f64 = 1e3;

/// The five optimizable pinhole parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibParams {
    pub roll: f64,
    pub pitch: f64,
    /// Focal length over image height.
    pub rf: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CalibParams {
    pub fn from_camera(cam: &CameraSpec) -> Self {
        Self {
            roll: cam.roll,
            pitch: cam.pitch,
            rf: cam.rf(),
            cx: cam.cx,
            cy: cam.cy,
        }
    }

    pub fn vfov(&self) -> f64 {
        vfov_from_rf(self.rf)
    }

    pub fn to_camera(&self, width: usize, height: usize) -> CameraSpec {
        CameraSpec::pinhole(width, height, self.roll, self.pitch, self.vfov())
            .with_principal_point(self.cx, self.cy)
    }

    fn first_non_finite(&self) -> Option<&'static str> {
        [
            ("roll", self.roll),
            ("pitch", self.pitch),
            ("rf", self.rf),
            ("cx", self.cx),
            ("cy", self.cy),
        ]
        .into_iter()
        .find(|(_, v)| !v.is_finite())
        .map(|(n, _)| n)
    }

    fn to_vector(self) -> [f64; 5] {
        [self.roll, self.pitch, self.rf.ln(), self.cx, self.cy]
    }

    fn from_vector(v: &[f64; 5]) -> Self {
        Self {
            roll: v[0],
            pitch: v[1],
            rf: v[2].exp(),
            cx: v[3],
            cy: v[4],
        }
    }

    /// Angles wrapped so that pitch lies in `[-pi/2, pi/2]` and roll in
    /// `(-pi, pi]`, describing the same camera.
    pub fn wrapped(mut self) -> Self {
        let mut pitch = wrap_angle(self.pitch);
        let mut roll = self.roll;
        if pitch > FRAC_PI_2 {
            pitch = PI - pitch;
            roll += PI;
        } else if pitch < -FRAC_PI_2 {
            pitch = -PI - pitch;
            roll += PI;
        }
        self.pitch = pitch;
        self.roll = wrap_angle(roll);
        self
    }
}

/// Wraps into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = Euclid::rem_euclid(&(a + PI), &(2.0 * PI)) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    /// Stop once the loss drops below this value.
    pub loss_floor: f64,
    /// Stop once consecutive losses differ by less than this value.
    pub plateau: f64,
    /// Up/latitude weight of the objective.
    pub lambda: f64,
    /// Evaluation grid side; `None` evaluates every pixel.
    pub grid: Option<usize>,
    /// Central-difference step for every parameter (radians for angles,
    /// natural-log units for the focal length).
    pub fd_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_iters: 1000,
            loss_floor: 1e-7,
            plateau: 1e-9,
            lambda: 0.5,
            grid: Some(64),
            fd_step: 1e-4,
        }
    }
}

impl OptimizerConfig {
    fn check(&self) -> Result<()> {
        let positive = [
            self.learning_rate,
            self.epsilon,
            self.loss_floor,
            self.plateau,
            self.fd_step,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        let betas = (0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2);
        if !positive || !betas || !(0.0..=1.0).contains(&self.lambda) || self.grid == Some(0) {
            return Err(Error::InvalidConfig("invalid optimizer configuration".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    LossFloor,
    Plateau,
    MaxIters,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::LossFloor => "loss_floor",
            Termination::Plateau => "plateau",
            Termination::MaxIters => "max_iters",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    /// Best parameters seen during the run.
    pub params: CalibParams,
    pub vfov: f64,
    pub fov_star: f64,
    pub final_loss: f64,
    /// Number of parameter updates performed.
    pub iterations: usize,
    pub termination: Termination,
    /// Loss before each update, plus the loss after the last update when the
    /// iteration budget ran out.
    pub loss_trace: Vec<f64>,
}

impl CalibrationResult {
    pub fn camera(&self, width: usize, height: usize) -> CameraSpec {
        self.params.to_camera(width, height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// [`init_heuristic`].
    Heuristic,
    /// [`init_geometric`].
    Geometric,
    Provided(CalibParams),
}

/// Target samples on the evaluation grid.
struct Objective {
    width: usize,
    height: usize,
    lambda: f64,
    points: Vec<Sample>,
}

struct Sample {
    u: f64,
    v: f64,
    up: [f64; 2],
    lat: f64,
}

impl Objective {
    fn new(target: &PerspectiveField, lambda: f64, grid: Option<usize>) -> Result<Self> {
        let (w, h) = target.size();
        let total = target.len();
        let valid = target.valid_count();
        if valid == 0 {
            return Err(Error::AllMasked);
        }
        if 4 * valid < total {
            return Err(Error::InsufficientCoverage { valid, total });
        }
        let (gx, gy) = match grid {
            Some(n) => (n.min(w), n.min(h)),
            None => (w, h),
        };
        let pick = |k: usize, g: usize, n: usize| ((k as f64 + 0.5) * n as f64 / g as f64).floor() as usize;
        let mut points = Vec::with_capacity(gx * gy);
        for j in 0..gy {
            let y = pick(j, gy, h).min(h - 1);
            for i in 0..gx {
                let x = pick(i, gx, w).min(w - 1);
                if let (Some(up), Some(lat)) = (target.up(x, y), target.latitude(x, y)) {
                    points.push(Sample {
                        u: x as f64 + 0.5,
                        v: y as f64 + 0.5,
                        up: [f64::from(up[0]), f64::from(up[1])],
                        lat: f64::from(lat),
                    });
                }
            }
        }
        if points.is_empty() {
            return Err(Error::AllMasked);
        }
        Ok(Self {
            width: w,
            height: h,
            lambda,
            points,
        })
    }

    fn eval(&self, p: &CalibParams) -> f64 {
        let finite = [p.roll, p.pitch, p.rf, p.cx, p.cy].iter().all(|v| v.is_finite());
        if !finite || !(p.rf > 0.0) {
            return PENALTY;
        }
        let focal = p.rf * self.height as f64;
        let pp = Vector2::new(p.cx * self.width as f64, p.cy * self.height as f64);
        let cam = PinholeEval::from_parts(p.roll, p.pitch, focal, pp);
        let lambda = self.lambda;
        let mut sum = 0.0;
        for s in &self.points {
            sum += match cam.sample(s.u, s.v) {
                Some((up, lat)) => lambda * angle_between(up, s.up) + (1.0 - lambda) * (lat - s.lat).abs(),
                None => lambda * FRAC_PI_2 + (1.0 - lambda) * (FRAC_PI_2 - s.lat.abs()),
            };
        }
        let loss = sum / self.points.len() as f64;
        if loss.is_finite() {
            loss
        } else {
            PENALTY
        }
    }
}

/// APFD (radians) between the field synthesized from `params` and `target`,
/// evaluated on the configured grid.
pub fn objective(params: &CalibParams, target: &PerspectiveField, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(Objective::new(target, cfg.lambda, cfg.grid)?.eval(params))
}

/// Initial parameters read off the field: roll from the Up-vector at the
/// image center, pitch from the center latitude and vertical FoV from the
/// latitude difference between the top and bottom edge midpoints. The
/// principal point starts centered.
pub fn init_heuristic(field: &PerspectiveField) -> Result<CalibParams> {
    if field.valid_count() == 0 {
        return Err(Error::AllMasked);
    }
    let (w, h) = (field.width() as f64, field.height() as f64);
    let (up, lat_center) = sample_at(field, w / 2.0, h / 2.0);
    let (_, lat_top) = sample_at(field, w / 2.0, 0.0);
    let (_, lat_bottom) = sample_at(field, w / 2.0, h);
    let roll = (-up[0]).atan2(-up[1]);
    let vfov = (lat_top - lat_bottom).clamp(1f64.to_radians(), 179f64.to_radians());
    Ok(CalibParams {
        roll,
        pitch: lat_center,
        rf: rf_from_vfov(vfov),
        cx: 0.5,
        cy: 0.5,
    })
}

/// Same samples as [`init_heuristic`], but the focal length is solved from
/// the top and bottom latitudes given the roll and pitch already read off
/// the center, instead of taking their difference as the FoV. Exact for a
/// centered pinhole camera at any roll and pitch; the plain difference
/// underestimates the FoV badly once the camera is rolled.
///
/// With half-FoV `h`, the edge midpoints satisfy
/// `sin l = cos(roll) cos(pitch) (+/-) sin h + sin(pitch) cos h`. `h` is
/// fitted to both latitudes by least squares in latitude, which keeps the
/// estimate stable when the field is quantized.
pub fn init_geometric(field: &PerspectiveField) -> Result<CalibParams> {
    let mut p = init_heuristic(field)?;
    let (w, h) = (field.width() as f64, field.height() as f64);
    let (_, lat_top) = sample_at(field, w / 2.0, 0.0);
    let (_, lat_bottom) = sample_at(field, w / 2.0, h);
    let vert = p.roll.cos() * p.pitch.cos();
    let depth = p.pitch.sin();
    let residual = |half: f64| {
        let (s, c) = half.sin_cos();
        let top = (vert * s + depth * c).clamp(-1.0, 1.0).asin();
        let bottom = (-vert * s + depth * c).clamp(-1.0, 1.0).asin();
        (top - lat_top).powi(2) + (bottom - lat_bottom).powi(2)
    };
    let (lo, hi) = (0.5f64.to_radians(), 89.5f64.to_radians());
    const STEPS: usize = 1780;
    let step = (hi - lo) / STEPS as f64;
    let best = (0..=STEPS)
        .map(|i| lo + step * i as f64)
        .min_by(|a, b| residual(*a).total_cmp(&residual(*b)))
        .unwrap_or(lo);
    // Golden-section refinement inside the winning scan cell.
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if residual(c) < residual(d) {
            b = d;
        } else {
            a = c;
        }
    }
    p.rf = rf_from_vfov(a + b);
    Ok(p)
}

/// Up-vector and latitude at a continuous image point: bilinear between
/// pixel centers, linear extrapolation across the outer half pixel. Falls
/// back to the nearest valid pixel when any neighbour is masked.
fn sample_at(field: &PerspectiveField, x: f64, y: f64) -> ([f64; 2], f64) {
    let (w, h) = field.size();
    let axis = |p: f64, n: usize| -> (usize, usize, f64) {
        if n == 1 {
            return (0, 0, 0.0);
        }
        let s = p - 0.5;
        let i0 = (s.floor().max(0.0) as usize).min(n - 2);
        (i0, i0 + 1, s - i0 as f64)
    };
    let (x0, x1, fx) = axis(x, w);
    let (y0, y1, fy) = axis(y, h);
    let taps = [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x1, y0, fx * (1.0 - fy)),
        (x0, y1, (1.0 - fx) * fy),
        (x1, y1, fx * fy),
    ];
    if taps.iter().all(|&(tx, ty, _)| field.is_valid(tx, ty)) {
        let mut up = [0.0; 2];
        let mut lat = 0.0;
        for (tx, ty, wgt) in taps {
            let u = field.up_plane()[field.index(tx, ty)];
            up[0] += wgt * f64::from(u[0]);
            up[1] += wgt * f64::from(u[1]);
            lat += wgt * f64::from(field.latitude_plane()[field.index(tx, ty)]);
        }
        let n = (up[0] * up[0] + up[1] * up[1]).sqrt();
        if n > 1e-9 {
            return ([up[0] / n, up[1] / n], lat.clamp(-FRAC_PI_2, FRAC_PI_2));
        }
    }
    let (nx, ny) = nearest_valid(field, x, y);
    let u = field.up(nx, ny).expect("nearest pixel is valid");
    let l = field.latitude(nx, ny).expect("nearest pixel is valid");
    ([f64::from(u[0]), f64::from(u[1])], f64::from(l))
}

fn nearest_valid(field: &PerspectiveField, x: f64, y: f64) -> (usize, usize) {
    let mut best = (f64::INFINITY, (0, 0));
    for py in 0..field.height() {
        for px in 0..field.width() {
            if field.is_valid(px, py) {
                let d = (px as f64 + 0.5 - x).powi(2) + (py as f64 + 0.5 - y).powi(2);
                if d < best.0 {
                    best = (d, (px, py));
                }
            }
        }
    }
    best.1
}

/// Recovers all five parameters.
pub fn calibrate(target: &PerspectiveField, cfg: &OptimizerConfig, init: Init) -> Result<CalibrationResult> {
    run(target, cfg, init, 5)
}

/// Recovers roll, pitch and focal length with the principal point held at
/// the image center.
pub fn fixed_center_calibrate(
    target: &PerspectiveField,
    cfg: &OptimizerConfig,
    init: Init,
) -> Result<CalibrationResult> {
    let init = match init {
        Init::Provided(p) => Init::Provided(CalibParams { cx: 0.5, cy: 0.5, ..p }),
        other => other,
    };
    run(target, cfg, init, 3)
}

fn run(target: &PerspectiveField, cfg: &OptimizerConfig, init: Init, free: usize) -> Result<CalibrationResult> {
    cfg.check()?;
    let objective = Objective::new(target, cfg.lambda, cfg.grid)?;
    let start = match init {
        Init::Heuristic => init_heuristic(target)?,
        Init::Geometric => init_geometric(target)?,
        Init::Provided(p) => p,
    };
    if let Some(parameter) = start.first_non_finite() {
        return Err(Error::NonFiniteLoss { parameter });
    }
    if !(start.rf > 0.0) {
        return Err(Error::NonFiniteLoss { parameter: "rf" });
    }

    let loss_of = |theta: &[f64; 5]| objective.eval(&CalibParams::from_vector(theta));
    let mut theta = start.to_vector();
    let mut m = [0.0; 5];
    let mut v = [0.0; 5];
    let mut trace = Vec::new();
    let mut best = (f64::INFINITY, theta);
    let mut prev: Option<f64> = None;
    let mut iterations = 0;
    let mut termination = Termination::MaxIters;

    loop {
        let loss = loss_of(&theta);
        trace.push(loss);
        if loss < best.0 {
            best = (loss, theta);
        }
        if loss < cfg.loss_floor {
            termination = Termination::LossFloor;
            break;
        }
        if prev.is_some_and(|p| (loss - p).abs() < cfg.plateau) {
            termination = Termination::Plateau;
            break;
        }
        if iterations == cfg.max_iters {
            break;
        }
        prev = Some(loss);

        let mut grad = [0.0; 5];
        for k in 0..free {
            let mut plus = theta;
            let mut minus = theta;
            plus[k] += cfg.fd_step;
            minus[k] -= cfg.fd_step;
            grad[k] = (loss_of(&plus) - loss_of(&minus)) / (2.0 * cfg.fd_step);
        }
        iterations += 1;
        let t = iterations as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        for k in 0..free {
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
            theta[k] -= cfg.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + cfg.epsilon);
        }
        theta[3] = theta[3].clamp(-0.5, 1.5);
        theta[4] = theta[4].clamp(-0.5, 1.5);
    }

    let params = CalibParams::from_vector(&best.1).wrapped();
    let cam = params.to_camera(target.width(), target.height());
    Ok(CalibrationResult {
        params,
        vfov: params.vfov(),
        fov_star: cam.fov_star()?,
        final_loss: best.0,
        iterations,
        termination,
        loss_trace: trace,
    })
}
