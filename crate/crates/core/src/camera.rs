//! Parametric cameras and their pixel/ray mappings.
//!
//! A camera is oriented by roll and pitch relative to a level camera that
//! looks along world `+Z` with image `-y` pointing at world up. The
//! world-to-camera map is `Rz(roll) * Rx(pitch) * D` where `D = diag(1, -1, 1)`
//! flips the Y-up world into the y-down camera frame. Positive pitch tilts
//! the optical axis upward; positive roll turns the projected world-up
//! counterclockwise on screen (roll = 90 deg makes it point left).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector2, Vector3};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::{Error, Result, WorldConvention};

/// Relative finite-difference step for [`CameraSpec::up_vector_finite_diff`].
pub const DEFAULT_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CameraModel {
    Pinhole,
    /// Gravity-aligned rectangular crop of an equirectangular panorama.
    /// `vfov` is the latitude span, the longitude span follows from the
    /// aspect ratio, `pitch` is the latitude at the principal point.
    Equirectangular,
    /// Sphere-plus-offset projection with a single distortion parameter.
    UnifiedSpherical { xi: f64 },
}

impl CameraModel {
    pub fn name(&self) -> &'static str {
        match self {
            CameraModel::Pinhole => "pinhole",
            CameraModel::Equirectangular => "equirectangular",
            CameraModel::UnifiedSpherical { .. } => "unified_spherical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSpec {
    pub model: CameraModel,
    pub roll: f64,
    pub pitch: f64,
    /// Vertical field of view.
    pub vfov: f64,
    /// Principal point relative to the image size; `(0.5, 0.5)` is centered.
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

/// Relative focal length (focal length over image height) for a vertical FoV.
pub fn rf_from_vfov(vfov: f64) -> f64 {
    1.0 / (2.0 * (vfov / 2.0).tan())
}

pub fn vfov_from_rf(rf: f64) -> f64 {
    2.0 * (1.0 / (2.0 * rf)).atan()
}

impl CameraSpec {
    /// Centered pinhole camera.
    pub fn pinhole(width: usize, height: usize, roll: f64, pitch: f64, vfov: f64) -> Self {
        Self {
            model: CameraModel::Pinhole,
            roll,
            pitch,
            vfov,
            cx: 0.5,
            cy: 0.5,
            width,
            height,
        }
    }

    pub fn with_principal_point(mut self, cx: f64, cy: f64) -> Self {
        self.cx = cx;
        self.cy = cy;
        self
    }

    pub fn with_model(mut self, model: CameraModel) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidCamera(msg.into()));
        if self.width == 0 || self.height == 0 {
            return bad("image size must be positive");
        }
        let finite = [self.roll, self.pitch, self.vfov, self.cx, self.cy]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return bad("parameters must be finite");
        }
        if !(self.roll > -PI && self.roll <= PI) {
            return bad("roll must lie in (-pi, pi]");
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&self.pitch) {
            return bad("pitch must lie in [-pi/2, pi/2]");
        }
        match self.model {
            CameraModel::Pinhole => {
                if !(self.vfov > 0.0 && self.vfov < PI) {
                    return bad("vfov must lie in (0, pi)");
                }
            }
            CameraModel::UnifiedSpherical { xi } => {
                if !(self.vfov > 0.0 && self.vfov < PI) {
                    return bad("vfov must lie in (0, pi)");
                }
                if !(xi.is_finite() && xi >= 0.0) {
                    return bad("xi must be finite and non-negative");
                }
            }
            CameraModel::Equirectangular => {
                if !(self.vfov > 0.0 && self.vfov <= PI) {
                    return bad("vfov must lie in (0, pi]");
                }
                if self.roll != 0.0 {
                    return bad("equirectangular crops are gravity aligned; roll must be 0");
                }
            }
        }
        let rf = self.rf();
        if !(rf.is_finite() && rf > 0.0) {
            return Err(Error::InvalidCamera(format!("relative focal length {rf} is degenerate")));
        }
        Ok(())
    }

    pub fn rf(&self) -> f64 {
        rf_from_vfov(self.vfov)
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        self.height as f64 * self.rf()
    }

    /// Principal point in pixels.
    pub fn principal_point(&self) -> Vector2<f64> {
        Vector2::new(self.cx * self.width as f64, self.cy * self.height as f64)
    }

    /// World-to-camera map, including the Y-up to y-down flip.
    pub fn world_to_camera(&self) -> Matrix3<f64> {
        let (sr, cr) = self.roll.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let rz = Matrix3::new(cr, sr, 0.0, -sr, cr, 0.0, 0.0, 0.0, 1.0);
        let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cp, sp, 0.0, -sp, cp);
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        rz * rx * flip
    }

    /// Intrinsic matrix of the pinhole part of the model.
    pub fn intrinsics(&self) -> Matrix3<f64> {
        let f = self.focal();
        let pp = self.principal_point();
        Matrix3::new(f, 0.0, pp.x, 0.0, f, pp.y, 0.0, 0.0, 1.0)
    }

    /// Unit world-frame viewing ray through a continuous image point, or
    /// `None` when the point is outside the model's domain.
    pub fn ray_at(&self, u: f64, v: f64) -> Option<Vector3<f64>> {
        let (w, h) = (self.width as f64, self.height as f64);
        match self.model {
            CameraModel::Equirectangular => {
                let lon = (u - self.cx * w) * self.vfov / h;
                let lat = self.pitch - (v - self.cy * h) * self.vfov / h;
                if lat.abs() > FRAC_PI_2 || lon.abs() > PI {
                    return None;
                }
                let (sl, cl) = lat.sin_cos();
                let (so, co) = lon.sin_cos();
                Some(Vector3::new(cl * so, sl, cl * co))
            }
            CameraModel::Pinhole => {
                let f = self.focal();
                let c = Vector3::new((u - self.cx * w) / f, (v - self.cy * h) / f, 1.0);
                Some(self.world_to_camera().transpose() * c.normalize())
            }
            CameraModel::UnifiedSpherical { xi } => {
                let f = self.focal();
                let (mx, my) = ((u - self.cx * w) / f, (v - self.cy * h) / f);
                let r2 = mx * mx + my * my;
                let disc = 1.0 + (1.0 - xi * xi) * r2;
                if disc < 0.0 {
                    return None;
                }
                let eta = (xi + disc.sqrt()) / (r2 + 1.0);
                let s = Vector3::new(eta * mx, eta * my, eta - xi);
                if xi > 1.0 && s.z < -1.0 / xi {
                    return None;
                }
                Some(self.world_to_camera().transpose() * s.normalize())
            }
        }
    }

    /// Continuous image coordinates of a world point.
    pub fn project(&self, point: &Vector3<f64>) -> Option<Vector2<f64>> {
        let (w, h) = (self.width as f64, self.height as f64);
        match self.model {
            CameraModel::Equirectangular => {
                let n = point.norm();
                if n == 0.0 {
                    return None;
                }
                let lon = point.x.atan2(point.z);
                let lat = (point.y / n).clamp(-1.0, 1.0).asin();
                Some(Vector2::new(
                    lon * h / self.vfov + self.cx * w,
                    (self.cy - (lat - self.pitch) / self.vfov) * h,
                ))
            }
            CameraModel::Pinhole => {
                let c = self.world_to_camera() * point;
                if c.z <= 0.0 {
                    return None;
                }
                let f = self.focal();
                Some(Vector2::new(f * c.x / c.z + self.cx * w, f * c.y / c.z + self.cy * h))
            }
            CameraModel::UnifiedSpherical { xi } => {
                let c = self.world_to_camera() * point;
                let n = c.norm();
                if n == 0.0 {
                    return None;
                }
                let s = c / n;
                let denom = s.z + xi;
                if denom <= 1e-12 || (xi > 1.0 && s.z < -1.0 / xi) {
                    return None;
                }
                let f = self.focal();
                Some(Vector2::new(
                    f * s.x / denom + self.cx * w,
                    f * s.y / denom + self.cy * h,
                ))
            }
        }
    }

    /// Viewing rays through every pixel center.
    pub fn pixel_rays(&self) -> RayField {
        let mut rays = Vec::with_capacity(self.width * self.height);
        for v in 0..self.height {
            for u in 0..self.width {
                rays.push(self.ray_at(u as f64 + 0.5, v as f64 + 0.5));
            }
        }
        RayField {
            width: self.width,
            height: self.height,
            rays,
        }
    }

    /// Up-vector by finite displacement along world up: the normalized image
    /// motion of `X = depth * ray(pixel)` when moved by `step` against
    /// gravity. Works for every model.
    pub fn up_vector_finite_diff(
        &self,
        u: f64,
        v: f64,
        depth: f64,
        step: f64,
    ) -> Result<Vector2<f64>> {
        if !(depth > 0.0 && step > 0.0) {
            return Err(Error::InvalidConfig("depth and step must be positive".into()));
        }
        let conv = WorldConvention::default();
        let ray = self.ray_at(u, v).ok_or(Error::OutsideProjection)?;
        let x = ray * depth;
        let moved = x - conv.gravity() * step;
        let p0 = self.project(&x).ok_or(Error::OutsideProjection)?;
        let p1 = self.project(&moved).ok_or(Error::OutsideProjection)?;
        let d = p1 - p0;
        let n = d.norm();
        if !(n >= 1e-12) {
            return Err(Error::VanishingUpDisplacement);
        }
        Ok(d / n)
    }

    /// Closed-form pinhole Up-vector from the differential of the projection.
    pub fn up_vector_analytic(&self, u: f64, v: f64) -> Result<Vector2<f64>> {
        if self.model != CameraModel::Pinhole {
            return Err(Error::InvalidCamera("analytic up vector needs a pinhole camera".into()));
        }
        let up = WorldConvention::default().world_up();
        let dp = self.intrinsics() * self.world_to_camera() * up;
        let d = Vector2::new(dp.x - u * dp.z, dp.y - v * dp.z);
        let scale = dp.norm() * (1.0 + u.abs() + v.abs());
        let n = d.norm();
        if !(n > 1e-12 * scale) {
            return Err(Error::UndefinedUpDirection);
        }
        Ok(d / n)
    }

    /// Angle between the rays through the midpoints of the top and bottom
    /// image edges.
    pub fn fov_star(&self) -> Result<f64> {
        let u = self.width as f64 / 2.0;
        let top = self.ray_at(u, 0.0).ok_or(Error::OutsideProjection)?;
        let bottom = self.ray_at(u, self.height as f64).ok_or(Error::OutsideProjection)?;
        Ok(top.cross(&bottom).norm().atan2(top.dot(&bottom)))
    }
}

/// Per-pixel unit viewing rays in the world frame; `None` where the model
/// has no ray.
#[derive(Debug, Clone, PartialEq)]
pub struct RayField {
    pub width: usize,
    pub height: usize,
    pub rays: Vec<Option<Vector3<f64>>>,
}

impl RayField {
    pub fn ray(&self, x: usize, y: usize) -> Option<Vector3<f64>> {
        self.rays[y * self.width + x]
    }

    pub fn latitudes(&self, conv: &WorldConvention) -> Vec<Option<f64>> {
        self.rays
            .iter()
            .map(|r| r.map(|r| latitude_of(&r, conv)))
            .collect()
    }
}

/// Signed angle between a unit ray and the horizontal plane, positive above.
pub fn latitude_of(ray: &Vector3<f64>, conv: &WorldConvention) -> f64 {
    ray.dot(&conv.world_up()).clamp(-1.0, 1.0).asin()
}

/// Fast per-pixel pinhole evaluation used by synthesis and calibration.
///
/// With `a` the world-up direction expressed in the camera frame, a pixel
/// `x` has latitude `asin(a . ray)` and Up-vector along
/// `f * a.xy + (pp - x) * a.z`.
#[derive(Debug, Clone, Copy)]
pub struct PinholeEval {
    up_cam: Vector3<f64>,
    focal: f64,
    pp: Vector2<f64>,
}

impl PinholeEval {
    pub fn new(cam: &CameraSpec) -> Self {
        Self::from_parts(cam.roll, cam.pitch, cam.focal(), cam.principal_point())
    }

    pub fn from_parts(roll: f64, pitch: f64, focal: f64, pp: Vector2<f64>) -> Self {
        let (sr, cr) = roll.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        Self {
            up_cam: Vector3::new(-sr * cp, -cr * cp, sp),
            focal,
            pp,
        }
    }

    /// `(up, latitude)` at a continuous image point; `None` at the vertical
    /// vanishing point.
    #[inline]
    pub fn sample(&self, u: f64, v: f64) -> Option<([f64; 2], f64)> {
        let a = &self.up_cam;
        let (dx, dy) = (u - self.pp.x, v - self.pp.y);
        let cx = dx / self.focal;
        let cy = dy / self.focal;
        let s = (a.x * cx + a.y * cy + a.z) / (cx * cx + cy * cy + 1.0).sqrt();
        let lat = s.clamp(-1.0, 1.0).asin();
        let ux = self.focal * a.x - dx * a.z;
        let uy = self.focal * a.y - dy * a.z;
        let n = (ux * ux + uy * uy).sqrt();
        let scale = self.focal + dx.abs() + dy.abs();
        if !(n > 1e-12 * scale) {
            return None;
        }
        Some(([ux / n, uy / n], lat))
    }
}
