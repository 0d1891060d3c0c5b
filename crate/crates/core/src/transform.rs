//! Equivariant image-plane transforms of perspective fields.
//!
//! Every transform is a 3x3 projective map `H` from source to output
//! continuous image coordinates. Applying it pulls each output pixel back
//! through `H^-1`, interpolates the latitude bilinearly and maps the source
//! Up-vector through the Jacobian of `H`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Matrix2, Matrix3, SMatrix, SVector, Vector2, Vector3};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::image::{to_u8, RgbImage};
use crate::{Error, PerspectiveField, Result};

/// Neighbouring Up-vectors closer than this angle are blended; otherwise
/// the nearest one is used.
const COHERENT_COS: f64 = 0.866_025_403_784_438_6; // cos 30 deg

const EDGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Identity,
    Crop,
    Resize,
    Rotate,
    HFlip,
    Homography,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldTransform {
    kind: TransformKind,
    matrix: Matrix3<f64>,
    inverse: Matrix3<f64>,
    input: (usize, usize),
    output: (usize, usize),
}

impl FieldTransform {
    pub fn new(
        kind: TransformKind,
        matrix: Matrix3<f64>,
        input: (usize, usize),
        output: (usize, usize),
    ) -> Result<Self> {
        if input.0 == 0 || input.1 == 0 || output.0 == 0 || output.1 == 0 {
            return Err(Error::IncompatibleSizes("image sizes must be positive".into()));
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularTransform);
        }
        let scale = matrix.norm();
        let det = matrix.determinant();
        if !(det.abs() > 1e-12 * scale * scale * scale) {
            return Err(Error::SingularTransform);
        }
        let inverse = matrix.try_inverse().ok_or(Error::SingularTransform)?;
        Ok(Self {
            kind,
            matrix,
            inverse,
            input,
            output,
        })
    }

    pub fn identity(width: usize, height: usize) -> Self {
        Self::new(TransformKind::Identity, Matrix3::identity(), (width, height), (width, height))
            .expect("identity is invertible")
    }

    /// Keeps the window with top-left corner `(x, y)` and size `width x height`.
    pub fn crop(input: (usize, usize), x: f64, y: f64, width: usize, height: usize) -> Result<Self> {
        let m = Matrix3::new(1.0, 0.0, -x, 0.0, 1.0, -y, 0.0, 0.0, 1.0);
        Self::new(TransformKind::Crop, m, input, (width, height))
    }

    pub fn resize(input: (usize, usize), width: usize, height: usize) -> Result<Self> {
        if input.0 == 0 || input.1 == 0 {
            return Err(Error::IncompatibleSizes("image sizes must be positive".into()));
        }
        let sx = width as f64 / input.0 as f64;
        let sy = height as f64 / input.1 as f64;
        let m = Matrix3::new(sx, 0.0, 0.0, 0.0, sy, 0.0, 0.0, 0.0, 1.0);
        Self::new(TransformKind::Resize, m, input, (width, height))
    }

    /// Rotation about the image center by `angle`, counterclockwise as seen
    /// on screen. Output keeps the input size.
    pub fn rotate(input: (usize, usize), angle: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let (cx, cy) = (input.0 as f64 / 2.0, input.1 as f64 / 2.0);
        let r = Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0);
        let to = Matrix3::new(1.0, 0.0, cx, 0.0, 1.0, cy, 0.0, 0.0, 1.0);
        let from = Matrix3::new(1.0, 0.0, -cx, 0.0, 1.0, -cy, 0.0, 0.0, 1.0);
        Self::new(TransformKind::Rotate, to * r * from, input, input)
    }

    pub fn hflip(input: (usize, usize)) -> Result<Self> {
        let m = Matrix3::new(-1.0, 0.0, input.0 as f64, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        Self::new(TransformKind::HFlip, m, input, input)
    }

    pub fn homography(input: (usize, usize), output: (usize, usize), m: Matrix3<f64>) -> Result<Self> {
        Self::new(TransformKind::Homography, m, input, output)
    }

    /// Homography sending four source points onto four output points.
    pub fn from_correspondences(
        input: (usize, usize),
        output: (usize, usize),
        src: &[[f64; 2]; 4],
        dst: &[[f64; 2]; 4],
    ) -> Result<Self> {
        let mut a = SMatrix::<f64, 8, 8>::zeros();
        let mut b = SVector::<f64, 8>::zeros();
        for i in 0..4 {
            let ([x, y], [u, v]) = (src[i], dst[i]);
            let r = 2 * i;
            a.row_mut(r).copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
            a.row_mut(r + 1).copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
            b[r] = u;
            b[r + 1] = v;
        }
        let h = a.lu().solve(&b).ok_or(Error::SingularTransform)?;
        let m = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0);
        Self::homography(input, output, m)
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn input_size(&self) -> (usize, usize) {
        self.input
    }

    pub fn output_size(&self) -> (usize, usize) {
        self.output
    }

    pub fn map_forward(&self, p: Vector2<f64>) -> Option<Vector2<f64>> {
        project(&self.matrix, p)
    }

    pub fn map_back(&self, p: Vector2<f64>) -> Option<Vector2<f64>> {
        project(&self.inverse, p)
    }

    /// Jacobian of the forward map at a source point.
    pub fn jacobian_at(&self, p: Vector2<f64>) -> Option<Matrix2<f64>> {
        let m = &self.matrix;
        let w = m[(2, 0)] * p.x + m[(2, 1)] * p.y + m[(2, 2)];
        if w <= 0.0 {
            return None;
        }
        let y = project(m, p)?;
        Some(Matrix2::new(
            (m[(0, 0)] - y.x * m[(2, 0)]) / w,
            (m[(0, 1)] - y.x * m[(2, 1)]) / w,
            (m[(1, 0)] - y.y * m[(2, 0)]) / w,
            (m[(1, 1)] - y.y * m[(2, 1)]) / w,
        ))
    }

    /// Source point for an output pixel center, if it lands on the source
    /// image in front of the projective horizon.
    fn source_of(&self, u: usize, v: usize) -> Option<Vector2<f64>> {
        let p = self.map_back(Vector2::new(u as f64 + 0.5, v as f64 + 0.5))?;
        let m = &self.matrix;
        if m[(2, 0)] * p.x + m[(2, 1)] * p.y + m[(2, 2)] <= 0.0 {
            return None;
        }
        let (w, h) = (self.input.0 as f64, self.input.1 as f64);
        let inside = p.x >= -EDGE_EPS && p.x <= w + EDGE_EPS && p.y >= -EDGE_EPS && p.y <= h + EDGE_EPS;
        inside.then_some(p)
    }

    pub fn apply(&self, field: &PerspectiveField) -> Result<PerspectiveField> {
        if field.size() != self.input {
            return Err(Error::DimensionMismatch {
                expected: self.input,
                found: field.size(),
            });
        }
        let (ow, oh) = self.output;
        Ok(PerspectiveField::from_fn(ow, oh, |u, v| {
            let p = self.source_of(u, v)?;
            let s = Stencil::at(field.width(), field.height(), p);
            let mut lat = 0.0;
            for &(i, wgt) in s.taps() {
                if !field.is_valid_index(i) {
                    return None;
                }
                lat += wgt * f64::from(field.latitude_plane()[i]);
            }
            let up = s.blend_up(field);
            let j = self.jacobian_at(p)?;
            let mapped = j * up;
            let n = mapped.norm();
            (n > 1e-12).then(|| ([mapped.x / n, mapped.y / n], lat))
        }))
    }

    /// Resamples an image through the same map; uncovered pixels are black.
    pub fn warp_image(&self, image: &RgbImage) -> Result<RgbImage> {
        if (image.width(), image.height()) != self.input {
            return Err(Error::DimensionMismatch {
                expected: self.input,
                found: (image.width(), image.height()),
            });
        }
        let (ow, oh) = self.output;
        Ok(RgbImage::from_fn(ow, oh, |u, v| match self.source_of(u, v) {
            Some(p) => to_u8(image.sample_bilinear(p.x - 0.5, p.y - 0.5, false)),
            None => [0, 0, 0],
        }))
    }
}

fn project(m: &Matrix3<f64>, p: Vector2<f64>) -> Option<Vector2<f64>> {
    let q = m * Vector3::new(p.x, p.y, 1.0);
    (q.z != 0.0).then(|| Vector2::new(q.x / q.z, q.y / q.z))
}

/// Bilinear taps around a continuous source point (pixel centers at +0.5),
/// clamped at the border; zero-weight taps are dropped.
struct Stencil {
    taps: [(usize, f64); 4],
    len: usize,
    nearest: usize,
}

impl Stencil {
    fn at(width: usize, height: usize, p: Vector2<f64>) -> Self {
        let sx = (p.x - 0.5).clamp(0.0, (width - 1) as f64);
        let sy = (p.y - 0.5).clamp(0.0, (height - 1) as f64);
        let (x0, y0) = (sx.floor(), sy.floor());
        let (fx, fy) = (sx - x0, sy - y0);
        let (x0, y0) = (x0 as usize, y0 as usize);
        let (x1, y1) = ((x0 + 1).min(width - 1), (y0 + 1).min(height - 1));
        let mut taps = [(0, 0.0); 4];
        let mut len = 0;
        for (x, y, w) in [
            (x0, y0, (1.0 - fx) * (1.0 - fy)),
            (x1, y0, fx * (1.0 - fy)),
            (x0, y1, (1.0 - fx) * fy),
            (x1, y1, fx * fy),
        ] {
            if w > 0.0 {
                taps[len] = (y * width + x, w);
                len += 1;
            }
        }
        let nx = (p.x.floor().max(0.0) as usize).min(width - 1);
        let ny = (p.y.floor().max(0.0) as usize).min(height - 1);
        Self {
            taps,
            len,
            nearest: ny * width + nx,
        }
    }

    fn taps(&self) -> &[(usize, f64)] {
        &self.taps[..self.len]
    }

    /// Weighted mean of the tap Up-vectors when they agree, else the nearest.
    fn blend_up(&self, field: &PerspectiveField) -> Vector2<f64> {
        let plane = field.up_plane();
        let get = |i: usize| Vector2::new(f64::from(plane[i][0]), f64::from(plane[i][1]));
        let near = get(self.nearest);
        let coherent = self.taps().iter().all(|&(i, _)| get(i).dot(&near) >= COHERENT_COS);
        if !coherent {
            return near;
        }
        let sum: Vector2<f64> = self.taps().iter().map(|&(i, w)| get(i) * w).sum();
        let n = sum.norm();
        if n > 1e-12 {
            sum / n
        } else {
            near
        }
    }
}

/// `t2` after `t1`.
pub fn compose(t1: &FieldTransform, t2: &FieldTransform) -> Result<FieldTransform> {
    if t1.output != t2.input {
        return Err(Error::IncompatibleSizes(format!(
            "first transform outputs {:?} but second expects {:?}",
            t1.output, t2.input
        )));
    }
    use TransformKind::*;
    let kind = match (t1.kind, t2.kind) {
        (Identity, k) | (k, Identity) => k,
        (Crop, Crop) => Crop,
        (Resize, Resize) => Resize,
        _ => Homography,
    };
    FieldTransform::new(kind, t2.matrix * t1.matrix, t1.input, t2.output)
}

/// Exact horizontal mirror: pixel columns reversed, Up x-component negated.
pub fn hflip_field(field: &PerspectiveField) -> PerspectiveField {
    let (w, h) = field.size();
    let mut up = Vec::with_capacity(field.len());
    let mut lat = Vec::with_capacity(field.len());
    let mut mask = field.mask().map(|_| Vec::with_capacity(field.len()));
    for y in 0..h {
        for x in 0..w {
            let i = field.index(w - 1 - x, y);
            let [ux, uy] = field.up_plane()[i];
            up.push([-ux, uy]);
            lat.push(field.latitude_plane()[i]);
            if let (Some(dst), Some(src)) = (mask.as_mut(), field.mask()) {
                dst.push(src[i]);
            }
        }
    }
    PerspectiveField::new(w, h, up, lat, mask).expect("mirroring preserves field invariants")
}
