//! Ground-truth field synthesis, panorama cropping and training-style
//! perturbations.

use core::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector2;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::camera::{latitude_of, CameraModel, PinholeEval, DEFAULT_FD_STEP};
use crate::image::{to_u8, RgbImage};
use crate::transform::{compose, FieldTransform};
use crate::{CameraSpec, Error, PerspectiveField, Result, WorldConvention};

/// Latitude clamp for panorama lookups, keeps longitude defined at the poles.
pub const POLE_EPS: f64 = 1e-6;

/// Per-pixel field evaluator for a camera.
#[derive(Debug, Clone, Copy)]
pub struct FieldSampler {
    cam: CameraSpec,
    pinhole: Option<PinholeEval>,
}

impl FieldSampler {
    pub fn new(cam: &CameraSpec) -> Result<Self> {
        cam.validate()?;
        let pinhole = (cam.model == CameraModel::Pinhole).then(|| PinholeEval::new(cam));
        Ok(Self { cam: *cam, pinhole })
    }

    /// `(up, latitude)` at a continuous image point, `None` where the model
    /// has no ray or the Up-vector is undefined.
    pub fn sample(&self, u: f64, v: f64) -> Option<([f64; 2], f64)> {
        if let Some(p) = &self.pinhole {
            return p.sample(u, v);
        }
        let cam = &self.cam;
        let lat = match cam.model {
            CameraModel::Equirectangular => {
                let lat = cam.pitch - (v - cam.cy * cam.height as f64) * cam.vfov / cam.height as f64;
                if lat.abs() > FRAC_PI_2 {
                    return None;
                }
                lat
            }
            _ => latitude_of(&cam.ray_at(u, v)?, &WorldConvention::default()),
        };
        let up = cam.up_vector_finite_diff(u, v, 1.0, DEFAULT_FD_STEP).ok()?;
        Some(([up.x, up.y], lat))
    }
}

/// Ground-truth perspective field of a camera. Pixels without a ray or with
/// an undefined Up-vector are masked.
pub fn synth_field(cam: &CameraSpec) -> Result<PerspectiveField> {
    let sampler = FieldSampler::new(cam)?;
    Ok(PerspectiveField::from_fn(cam.width, cam.height, |x, y| {
        sampler.sample(x as f64 + 0.5, y as f64 + 0.5)
    }))
}

/// Renders the view of `cam` from an equirectangular panorama together with
/// its ground-truth field.
pub fn pano_crop(pano: &RgbImage, cam: &CameraSpec) -> Result<(RgbImage, PerspectiveField)> {
    let (pw, ph) = (pano.width(), pano.height());
    if pw == 0 || pw != 2 * ph {
        return Err(Error::NotEquirectangular { width: pw, height: ph });
    }
    let field = synth_field(cam)?;
    let image = RgbImage::from_fn(cam.width, cam.height, |x, y| {
        match cam.ray_at(x as f64 + 0.5, y as f64 + 0.5) {
            Some(r) => {
                let lon = r.x.atan2(r.z);
                let lat = r.y.clamp(-1.0, 1.0).asin().clamp(-FRAC_PI_2 + POLE_EPS, FRAC_PI_2 - POLE_EPS);
                let (px, py) = pano_coords(pw, ph, lon, lat);
                to_u8(pano.sample_bilinear(px, py, true))
            }
            None => [0, 0, 0],
        }
    });
    Ok((image, field))
}

/// Pixel-center coordinates in a `width x height` panorama.
pub fn pano_coords(width: usize, height: usize, lon: f64, lat: f64) -> (f64, f64) {
    let px = (lon / TAU + 0.5) * width as f64 - 0.5;
    let py = (0.5 - lat / PI) * height as f64 - 0.5;
    (px, py)
}

/// Uniform camera sampler over roll, pitch and vertical FoV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSampler {
    pub width: usize,
    pub height: usize,
    pub roll: (f64, f64),
    pub pitch: (f64, f64),
    pub vfov: (f64, f64),
}

impl CameraSampler {
    /// Training distribution: roll in [-45, 45] deg, pitch in [-90, 90] deg,
    /// vertical FoV in [30, 120] deg, centered principal point.
    pub fn training(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            roll: (-45f64.to_radians(), 45f64.to_radians()),
            pitch: (-FRAC_PI_2, FRAC_PI_2),
            vfov: (30f64.to_radians(), 120f64.to_radians()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CameraSpec {
        let mut draw = |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.random::<f64>();
        let roll = draw(self.roll);
        let pitch = draw(self.pitch);
        let vfov = draw(self.vfov);
        CameraSpec::pinhole(self.width, self.height, roll, pitch, vfov)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanoCropRequest {
    pub sampler: CameraSampler,
    /// Redraw crops whose pixels are all black or all white.
    pub reject_blank: bool,
    pub max_attempts: usize,
}

impl PanoCropRequest {
    pub fn new(sampler: CameraSampler) -> Self {
        Self {
            sampler,
            reject_blank: false,
            max_attempts: 16,
        }
    }
}

/// Draws a camera and renders its crop. With `reject_blank` the last draw
/// is returned if every attempt was blank.
pub fn sample_pano_crop<R: Rng + ?Sized>(
    pano: &RgbImage,
    req: &PanoCropRequest,
    rng: &mut R,
) -> Result<(CameraSpec, RgbImage, PerspectiveField)> {
    let attempts = req.max_attempts.max(1);
    let mut i = 0;
    loop {
        let cam = req.sampler.sample(rng);
        let (image, field) = pano_crop(pano, &cam)?;
        i += 1;
        if !req.reject_blank || !image.is_blank() || i >= attempts {
            return Ok((cam, image, field));
        }
    }
}

/// Image, field and the transform that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    pub image: RgbImage,
    pub field: PerspectiveField,
    pub transform: FieldTransform,
}

fn check_pair(image: &RgbImage, field: &PerspectiveField) -> Result<()> {
    if (image.width(), image.height()) != field.size() {
        return Err(Error::DimensionMismatch {
            expected: field.size(),
            found: (image.width(), image.height()),
        });
    }
    Ok(())
}

/// Random square window covering a quarter of the source area, resized to
/// `output`.
pub fn perturb_crop<R: Rng + ?Sized>(
    image: &RgbImage,
    field: &PerspectiveField,
    output: (usize, usize),
    rng: &mut R,
) -> Result<Perturbed> {
    check_pair(image, field)?;
    let (w, h) = field.size();
    let side = (((w * h) as f64).sqrt() / 2.0).floor() as usize;
    let side = side.clamp(1, w.min(h));
    let x = rng.random_range(0..=w - side);
    let y = rng.random_range(0..=h - side);
    let crop = FieldTransform::crop((w, h), x as f64, y as f64, side, side)?;
    let resize = FieldTransform::resize((side, side), output.0, output.1)?;
    let t = compose(&crop, &resize)?;
    Ok(Perturbed {
        image: t.warp_image(image)?,
        field: t.apply(field)?,
        transform: t,
    })
}

/// Random four-point perspective warp. Each corner moves inward by
/// `|N(0, s)|` of the image size with `s` drawn from `[0.1, 0.2]`; the moved
/// quad is stretched back onto the full frame.
pub fn perturb_warp<R: Rng + ?Sized>(
    image: &RgbImage,
    field: &PerspectiveField,
    rng: &mut R,
) -> Result<Perturbed> {
    check_pair(image, field)?;
    let t = random_warp(field.size(), rng)?;
    Ok(Perturbed {
        image: t.warp_image(image)?,
        field: t.apply(field)?,
        transform: t,
    })
}

/// Draws the homography used by [`perturb_warp`].
pub fn random_warp<R: Rng + ?Sized>(size: (usize, usize), rng: &mut R) -> Result<FieldTransform> {
    let (w, h) = (size.0 as f64, size.1 as f64);
    let dst = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
    let inward = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
    for _ in 0..100 {
        let scale = rng.random_range(0.1..=0.2);
        let normal = Normal::new(0.0, scale).map_err(|_| Error::InvalidConfig("bad warp scale".into()))?;
        let mut src = dst;
        for (p, dir) in src.iter_mut().zip(&inward) {
            let dx = normal.sample(rng).abs().min(0.45) * w;
            let dy = normal.sample(rng).abs().min(0.45) * h;
            p[0] += dir[0] * dx;
            p[1] += dir[1] * dy;
        }
        if !is_convex(&src) {
            continue;
        }
        match FieldTransform::from_correspondences(size, size, &src, &dst) {
            Ok(t) => return Ok(t),
            Err(Error::SingularTransform) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SingularTransform)
}

fn is_convex(quad: &[[f64; 2]; 4]) -> bool {
    (0..4).all(|i| {
        let a = Vector2::from(quad[i]);
        let b = Vector2::from(quad[(i + 1) % 4]);
        let c = Vector2::from(quad[(i + 2) % 4]);
        let (e1, e2) = (b - a, c - b);
        e1.x * e2.y - e1.y * e2.x > 0.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::rf_from_vfov;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    fn up_angle(a: [f32; 2], b: [f32; 2]) -> f64 {
        let (ax, ay, bx, by) = (a[0] as f64, a[1] as f64, b[0] as f64, b[1] as f64);
        (ax * by - ay * bx).abs().atan2(ax * bx + ay * by)
    }

    /// Smooth test panorama: color varies slowly with longitude and latitude.
    fn smooth_pano(w: usize) -> RgbImage {
        let h = w / 2;
        RgbImage::from_fn(w, h, |x, y| {
            let lon = (x as f64 + 0.5) / w as f64 * TAU;
            let lat = (y as f64 + 0.5) / h as f64 * PI;
            [
                (127.5 + 100.0 * lon.sin()) as u8,
                (127.5 + 100.0 * lat.cos()) as u8,
                (127.5 + 60.0 * (2.0 * lon).cos() * lat.sin()) as u8,
            ]
        })
    }

    #[test]
    fn level_camera_field() {
        let f = synth_field(&CameraSpec::pinhole(40, 31, 0.0, 0.0, deg(90.0))).unwrap();
        assert_eq!(f.valid_count(), f.len());
        for y in 0..31 {
            for x in 0..40 {
                let [ux, uy] = f.up(x, y).unwrap();
                assert!(ux.abs() < 1e-7 && (uy + 1.0).abs() < 1e-7);
            }
        }
        for x in 0..40 {
            assert!(f.latitude(x, 15).unwrap().abs() < 1e-7);
        }
    }

    #[test]
    fn shifted_principal_point_keeps_verticals_parallel() {
        let cam = CameraSpec::pinhole(40, 30, 0.0, 0.0, deg(60.0)).with_principal_point(0.5, 0.2);
        let f = synth_field(&cam).unwrap();
        for y in 0..30 {
            for x in 0..40 {
                assert!(up_angle(f.up(x, y).unwrap(), [0.0, -1.0]) < 1e-6);
            }
        }
        // Horizon sits at row cy * H = 6 instead of the middle.
        let row_of_zero = (0..30)
            .min_by(|&a, &b| {
                f.latitude(0, a).unwrap().abs().total_cmp(&f.latitude(0, b).unwrap().abs())
            })
            .unwrap();
        assert!(row_of_zero == 5 || row_of_zero == 6);
    }

    #[test]
    fn synthesis_commutes_with_crop() {
        let (w, h) = (80, 60);
        let cam = CameraSpec::pinhole(w, h, deg(-12.0), deg(25.0), deg(70.0)).with_principal_point(0.52, 0.47);
        let full = synth_field(&cam).unwrap();
        let (x0, y0, cw, ch) = (13usize, 9usize, 41usize, 30usize);
        let cropped = FieldTransform::crop((w, h), x0 as f64, y0 as f64, cw, ch)
            .unwrap()
            .apply(&full)
            .unwrap();
        let f = cam.focal();
        let sub = CameraSpec {
            vfov: 2.0 * (ch as f64 / (2.0 * f)).atan(),
            cx: (cam.cx * w as f64 - x0 as f64) / cw as f64,
            cy: (cam.cy * h as f64 - y0 as f64) / ch as f64,
            width: cw,
            height: ch,
            ..cam
        };
        assert!((sub.focal() - f).abs() < 1e-9);
        let direct = synth_field(&sub).unwrap();
        for y in 1..ch - 1 {
            for x in 1..cw - 1 {
                assert!(up_angle(cropped.up(x, y).unwrap(), direct.up(x, y).unwrap()).to_degrees() < 0.2);
                let dl = (cropped.latitude(x, y).unwrap() - direct.latitude(x, y).unwrap()).abs();
                assert!(f64::from(dl).to_degrees() < 0.2);
            }
        }
    }

    #[test]
    fn whole_pano_latitude_is_pixel_latitude() {
        let (w, h) = (64, 32);
        let cam = CameraSpec {
            model: CameraModel::Equirectangular,
            roll: 0.0,
            pitch: 0.0,
            vfov: PI,
            cx: 0.5,
            cy: 0.5,
            width: w,
            height: h,
        };
        let f = synth_field(&cam).unwrap();
        for y in 0..h {
            let expected = (FRAC_PI_2 - (y as f64 + 0.5) * PI / h as f64) as f32;
            for x in 0..w {
                assert_eq!(f.latitude(x, y).unwrap(), expected);
                let [ux, uy] = f.up(x, y).unwrap();
                assert!(ux.abs() < 1e-6 && (uy + 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn distorted_field_masks_outside_domain() {
        let cam = CameraSpec::pinhole(64, 64, 0.0, 0.0, deg(170.0))
            .with_model(CameraModel::UnifiedSpherical { xi: 1.8 });
        let f = synth_field(&cam).unwrap();
        assert!(f.valid_count() < f.len());
        assert!(f.is_valid(32, 32));
        f.validate().unwrap();
    }

    #[test]
    fn constant_pano_gives_constant_crop() {
        let pano = RgbImage::filled(64, 32, [12, 200, 77]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sampler = CameraSampler::training(24, 18);
        for _ in 0..5 {
            let (img, _) = pano_crop(&pano, &sampler.sample(&mut rng)).unwrap();
            assert!(img.as_raw().chunks(3).all(|p| p == [12, 200, 77]));
        }
    }

    #[test]
    fn rejects_non_equirectangular() {
        let pano = RgbImage::new(30, 20);
        let cam = CameraSpec::pinhole(8, 8, 0.0, 0.0, deg(60.0));
        assert_eq!(
            pano_crop(&pano, &cam).unwrap_err(),
            Error::NotEquirectangular { width: 30, height: 20 }
        );
    }

    fn psnr(a: &RgbImage, b: &RgbImage) -> f64 {
        let mse: f64 = a
            .as_raw()
            .iter()
            .zip(b.as_raw())
            .map(|(&p, &q)| (f64::from(p) - f64::from(q)).powi(2))
            .sum::<f64>()
            / a.as_raw().len() as f64;
        10.0 * (255.0f64 * 255.0 / mse.max(1e-12)).log10()
    }

    #[test]
    fn narrow_view_is_scaled_central_patch() {
        let pano = smooth_pano(1024);
        let (w, h) = (64, 48);
        let cam = CameraSpec::pinhole(w, h, 0.0, 0.0, deg(5.0));
        let (crop, _) = pano_crop(&pano, &cam).unwrap();
        // Small-angle oracle: longitude and latitude linear in pixel offset.
        let f = h as f64 * rf_from_vfov(deg(5.0));
        let oracle = RgbImage::from_fn(w, h, |x, y| {
            let lon = (x as f64 + 0.5 - w as f64 / 2.0) / f;
            let lat = -(y as f64 + 0.5 - h as f64 / 2.0) / f;
            let (px, py) = pano_coords(1024, 512, lon, lat);
            to_u8(pano.sample_bilinear(px, py, true))
        });
        assert!(psnr(&crop, &oracle) > 40.0, "{}", psnr(&crop, &oracle));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let pano = smooth_pano(256);
        let req = PanoCropRequest::new(CameraSampler::training(32, 24));
        let a = sample_pano_crop(&pano, &req, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_pano_crop(&pano, &req, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blank_crops_are_redrawn_when_requested() {
        // Top half white, bottom half black: level views are never blank
        // but views far above or below are.
        let pano = RgbImage::from_fn(128, 64, |_, y| if y < 32 { [255; 3] } else { [0; 3] });
        let mut req = PanoCropRequest::new(CameraSampler {
            pitch: (deg(60.0), deg(89.0)),
            vfov: (deg(30.0), deg(31.0)),
            roll: (0.0, 0.0),
            width: 16,
            height: 16,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, img, _) = sample_pano_crop(&pano, &req, &mut rng).unwrap();
        assert!(img.is_blank());
        req.reject_blank = true;
        req.sampler.pitch = (deg(-5.0), deg(89.0));
        req.max_attempts = 1000;
        let (_, img, _) = sample_pano_crop(&pano, &req, &mut rng).unwrap();
        assert!(!img.is_blank());
    }

    #[test]
    fn sampler_histograms_are_uniform() {
        let sampler = CameraSampler::training(8, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        const BINS: usize = 10;
        const N: usize = 10_000;
        let mut hist = [[0usize; BINS]; 3];
        for _ in 0..N {
            let c = sampler.sample(&mut rng);
            for (k, (v, (lo, hi))) in [(c.roll, sampler.roll), (c.pitch, sampler.pitch), (c.vfov, sampler.vfov)]
                .into_iter()
                .enumerate()
            {
                assert!(v >= lo && v <= hi);
                let b = (((v - lo) / (hi - lo)) * BINS as f64).min(BINS as f64 - 1.0) as usize;
                hist[k][b] += 1;
            }
        }
        let expected = (N / BINS) as f64;
        for h in hist {
            let chi2: f64 = h.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
            // 9 degrees of freedom, p = 0.001 critical value.
            assert!(chi2 < 27.88, "chi2 = {chi2}");
        }
    }

    #[test]
    fn crop_perturbation_covers_a_quarter() {
        let cam = CameraSpec::pinhole(64, 64, deg(5.0), deg(-10.0), deg(80.0));
        let field = synth_field(&cam).unwrap();
        let img = RgbImage::filled(64, 64, [50, 60, 70]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = perturb_crop(&img, &field, (48, 48), &mut rng).unwrap();
        assert_eq!(p.field.size(), (48, 48));
        // Window side 32 resized to 48.
        let m = p.transform.matrix();
        assert!((m[(0, 0)] - 1.5).abs() < 1e-12 && (m[(1, 1)] - 1.5).abs() < 1e-12);
        assert_eq!(p.field.valid_count(), p.field.len());
        assert!(p.image.as_raw().chunks(3).all(|q| q == [50, 60, 70]));
    }

    #[test]
    fn warp_perturbation_is_deterministic_and_valid() {
        let cam = CameraSpec::pinhole(48, 40, 0.0, deg(15.0), deg(70.0));
        let field = synth_field(&cam).unwrap();
        let img = RgbImage::filled(48, 40, [9, 9, 9]);
        let a = perturb_warp(&img, &field, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let b = perturb_warp(&img, &field, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
        a.field.validate().unwrap();
        assert!(a.field.valid_count() > a.field.len() / 2);
        // Up-vectors follow the homography Jacobian.
        let t = a.transform;
        let (u, v) = (20usize, 18usize);
        let src = t.map_back(Vector2::new(u as f64 + 0.5, v as f64 + 0.5)).unwrap();
        let s = FieldSampler::new(&cam).unwrap().sample(src.x, src.y).unwrap().0;
        let mapped = t.jacobian_at(src).unwrap() * Vector2::new(s[0], s[1]);
        let got = a.field.up(u, v).unwrap();
        assert!(up_angle(got, [mapped.x as f32, mapped.y as f32]).to_degrees() < 0.2);
    }
}
