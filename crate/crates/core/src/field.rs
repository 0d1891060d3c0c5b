//! Perspective field value type and world conventions.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Tolerance on `|up| - 1` for unmasked pixels.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Gravity and axis conventions of the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldConvention {
    gravity: Vector3<f64>,
}

impl WorldConvention {
    /// Y-up world with gravity `(0, -1, 0)`.
    pub const fn y_up() -> Self {
        Self {
            gravity: Vector3::new(0.0, -1.0, 0.0),
        }
    }

    pub fn gravity(&self) -> Vector3<f64> {
        self.gravity
    }

    pub fn world_up(&self) -> Vector3<f64> {
        -self.gravity
    }
}

impl Default for WorldConvention {
    fn default() -> Self {
        Self::y_up()
    }
}

/// Per-pixel Up-vectors and Latitudes on a `width x height` grid.
///
/// Storage is row-major `f32`. Pixels with `false` in the mask carry
/// unspecified values and must be ignored by consumers.
#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveField {
    width: usize,
    height: usize,
    up: Vec<[f32; 2]>,
    latitude: Vec<f32>,
    mask: Option<Vec<bool>>,
}

impl PerspectiveField {
    /// Builds a field and checks every invariant.
    pub fn new(
        width: usize,
        height: usize,
        up: Vec<[f32; 2]>,
        latitude: Vec<f32>,
        mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        let n = width * height;
        if up.len() != n || latitude.len() != n || mask.as_ref().is_some_and(|m| m.len() != n) {
            return Err(Error::InvalidField(format!(
                "plane lengths do not match {width}x{height}"
            )));
        }
        let field = Self {
            width,
            height,
            up,
            latitude,
            mask,
        };
        field.validate()?;
        Ok(field)
    }

    /// Builds a field from a per-pixel generator; `None` marks the pixel
    /// invalid. The mask is omitted when every pixel is valid.
    pub fn from_fn<F>(width: usize, height: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Option<([f64; 2], f64)>,
    {
        let n = width * height;
        let mut up = Vec::with_capacity(n);
        let mut latitude = Vec::with_capacity(n);
        let mut mask = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                match f(x, y) {
                    Some((u, lat)) => {
                        let norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
                        if norm.is_finite() && norm > 0.0 && lat.is_finite() {
                            up.push([(u[0] / norm) as f32, (u[1] / norm) as f32]);
                            latitude.push(lat.clamp(-FRAC_PI_2, FRAC_PI_2) as f32);
                            mask.push(true);
                        } else {
                            up.push([0.0, 0.0]);
                            latitude.push(0.0);
                            mask.push(false);
                        }
                    }
                    None => {
                        up.push([0.0, 0.0]);
                        latitude.push(0.0);
                        mask.push(false);
                    }
                }
            }
        }
        let mask = if mask.iter().all(|&m| m) {
            None
        } else {
            Some(mask)
        };
        Self {
            width,
            height,
            up,
            latitude,
            mask,
        }
    }

    /// Checks unit norm and latitude range on every valid pixel.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.len() {
            if !self.is_valid_index(i) {
                continue;
            }
            let [ux, uy] = self.up[i];
            let norm = (f64::from(ux).powi(2) + f64::from(uy).powi(2)).sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::InvalidField(format!(
                    "up vector at pixel ({}, {}) has norm {norm}",
                    i % self.width,
                    i / self.width
                )));
            }
            let lat = f64::from(self.latitude[i]);
            // Stored as f32, and pi/2 rounds up in f32.
            let limit = f64::from(FRAC_PI_2 as f32);
            if !(-limit..=limit).contains(&lat) {
                return Err(Error::InvalidField(format!(
                    "latitude {lat} at pixel ({}, {}) is out of range",
                    i % self.width,
                    i / self.width
                )));
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn up_plane(&self) -> &[[f32; 2]] {
        &self.up
    }

    pub fn latitude_plane(&self) -> &[f32] {
        &self.latitude
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn is_valid_index(&self, i: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[i])
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.is_valid_index(self.index(x, y))
    }

    /// Up-vector at a valid pixel.
    #[inline]
    pub fn up(&self, x: usize, y: usize) -> Option<[f32; 2]> {
        let i = self.index(x, y);
        self.is_valid_index(i).then(|| self.up[i])
    }

    /// Latitude at a valid pixel.
    #[inline]
    pub fn latitude(&self, x: usize, y: usize) -> Option<f32> {
        let i = self.index(x, y);
        self.is_valid_index(i).then(|| self.latitude[i])
    }

    pub fn valid_count(&self) -> usize {
        match &self.mask {
            Some(m) => m.iter().filter(|&&v| v).count(),
            None => self.len(),
        }
    }

    /// Returns a copy with `extra` and-ed into the validity mask.
    pub fn with_mask(&self, extra: &[bool]) -> Result<Self> {
        if extra.len() != self.len() {
            return Err(Error::InvalidField(format!(
                "mask length {} does not match {}x{}",
                extra.len(),
                self.width,
                self.height
            )));
        }
        let mask = (0..self.len())
            .map(|i| extra[i] && self.is_valid_index(i))
            .collect();
        Ok(Self {
            mask: Some(mask),
            ..self.clone()
        })
    }

    /// Copies the axis-aligned region `[x, x + w) x [y, y + h)`.
    pub fn region(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::IncompatibleSizes(format!(
                "region {w}x{h}+{x}+{y} exceeds field {}x{}",
                self.width, self.height
            )));
        }
        let mut up = Vec::with_capacity(w * h);
        let mut latitude = Vec::with_capacity(w * h);
        let mut mask = self.mask.as_ref().map(|_| Vec::with_capacity(w * h));
        for row in y..y + h {
            let start = self.index(x, row);
            up.extend_from_slice(&self.up[start..start + w]);
            latitude.extend_from_slice(&self.latitude[start..start + w]);
            if let (Some(dst), Some(src)) = (mask.as_mut(), self.mask.as_ref()) {
                dst.extend_from_slice(&src[start..start + w]);
            }
        }
        Ok(Self {
            width: w,
            height: h,
            up,
            latitude,
            mask,
        })
    }
}
