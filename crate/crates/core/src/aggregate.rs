//! Sliding-window merging of per-window fields into one image-sized field.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::{Error, PerspectiveField, Result};

/// Merged Up-vectors shorter than this are treated as undefined.
pub const MIN_MEAN_NORM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig {
    /// Window height as a fraction of the image height.
    pub height_frac: f64,
    pub width_frac: f64,
    /// Placements along the vertical axis.
    pub rows: usize,
    pub cols: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            height_frac: 0.5,
            width_frac: 0.5,
            rows: 12,
            cols: 18,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    pub width: usize,
    pub height: usize,
    pub windows: Vec<Rect>,
}

impl WindowPlan {
    /// Number of windows covering each pixel, row-major.
    pub fn coverage(&self) -> Vec<u32> {
        let mut cov = vec![0u32; self.width * self.height];
        for r in &self.windows {
            for y in r.y..r.y + r.height {
                for c in &mut cov[y * self.width + r.x..y * self.width + r.x + r.width] {
                    *c += 1;
                }
            }
        }
        cov
    }
}

fn positions(extent: usize, window: usize, count: usize) -> Vec<usize> {
    if count == 1 {
        return vec![(extent - window) / 2];
    }
    let span = (extent - window) as f64;
    (0..count)
        .map(|i| (span * i as f64 / (count - 1) as f64).round() as usize)
        .collect()
}

/// Uniform grid of equally sized windows; first and last placements touch
/// the image borders so every pixel is covered.
pub fn plan_windows(width: usize, height: usize, cfg: &WindowConfig) -> Result<WindowPlan> {
    if cfg.rows == 0 || cfg.cols == 0 {
        return Err(Error::InvalidConfig("window grid must be at least 1x1".into()));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidConfig("image size must be positive".into()));
    }
    if !(cfg.height_frac > 0.0 && cfg.width_frac > 0.0) {
        return Err(Error::InvalidConfig("window fractions must be positive".into()));
    }
    let wh = ((cfg.height_frac * height as f64).round() as usize).max(1);
    let ww = ((cfg.width_frac * width as f64).round() as usize).max(1);
    if wh > height || ww > width {
        return Ok(WindowPlan {
            width,
            height,
            windows: vec![Rect { x: 0, y: 0, width, height }],
        });
    }
    let ys = positions(height, wh, cfg.rows);
    let xs = positions(width, ww, cfg.cols);
    let windows = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| Rect { x, y, width: ww, height: wh }))
        .collect();
    Ok(WindowPlan { width, height, windows })
}

/// Per-pixel mean over all windows covering the pixel: latitude by
/// arithmetic mean, Up-vector by vector mean then renormalized. Pixels no
/// valid window covers, or whose mean Up-vector vanishes, are masked.
pub fn merge(width: usize, height: usize, windows: &[(Rect, PerspectiveField)]) -> Result<PerspectiveField> {
    if windows.is_empty() {
        return Err(Error::EmptyWindows);
    }
    let n = width * height;
    let mut up = vec![[0.0f64; 2]; n];
    let mut lat = vec![0.0f64; n];
    let mut count = vec![0u32; n];
    for (r, f) in windows {
        if f.size() != (r.width, r.height) {
            return Err(Error::DimensionMismatch {
                expected: (r.width, r.height),
                found: f.size(),
            });
        }
        if r.x + r.width > width || r.y + r.height > height {
            return Err(Error::IncompatibleSizes(format!(
                "window {}x{}+{}+{} exceeds {width}x{height}",
                r.width, r.height, r.x, r.y
            )));
        }
        for wy in 0..r.height {
            for wx in 0..r.width {
                let (Some(u), Some(l)) = (f.up(wx, wy), f.latitude(wx, wy)) else {
                    continue;
                };
                let i = (r.y + wy) * width + r.x + wx;
                up[i][0] += f64::from(u[0]);
                up[i][1] += f64::from(u[1]);
                lat[i] += f64::from(l);
                count[i] += 1;
            }
        }
    }
    Ok(PerspectiveField::from_fn(width, height, |x, y| {
        let i = y * width + x;
        let c = count[i];
        if c == 0 {
            return None;
        }
        let c = f64::from(c);
        let [sx, sy] = up[i];
        let norm = (sx * sx + sy * sy).sqrt() / c;
        (norm >= MIN_MEAN_NORM).then(|| ([sx, sy], lat[i] / c))
    }))
}
