//! Discrete class encoding of perspective fields.
//!
//! Up-vectors are quantized to `up_bins` evenly spaced directions with bin
//! `k` centered at angle `2*pi*k / up_bins`, measured from `+x` toward `+y`
//! in image coordinates. Latitudes are quantized to `latitude_bins` equal
//! cells tiling `[-pi/2, pi/2]`, centers at cell midpoints. Assignment is
//! to the nearest center; exact ties go to the lower index.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use num_traits::Euclid;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::{Error, PerspectiveField, Result};

/// Index written for masked pixels.
pub const MASKED_BIN: u16 = u16::MAX;

const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinCodecConfig {
    pub up_bins: u16,
    pub latitude_bins: u16,
}

impl Default for BinCodecConfig {
    fn default() -> Self {
        Self {
            up_bins: 72,
            latitude_bins: 180,
        }
    }
}

impl BinCodecConfig {
    pub fn up_bin_width(&self) -> f64 {
        TAU / f64::from(self.up_bins)
    }

    pub fn latitude_bin_width(&self) -> f64 {
        PI / f64::from(self.latitude_bins)
    }

    /// Angle of up-bin `k`, in `[0, 2*pi)`.
    pub fn up_center(&self, k: u16) -> f64 {
        f64::from(k) * self.up_bin_width()
    }

    pub fn latitude_center(&self, j: u16) -> f64 {
        -FRAC_PI_2 + (f64::from(j) + 0.5) * self.latitude_bin_width()
    }

    fn check(&self) -> Result<()> {
        if self.up_bins == 0 || self.latitude_bins == 0 || self.up_bins == MASKED_BIN || self.latitude_bins == MASKED_BIN {
            return Err(Error::InvalidConfig("bin counts must be in 1..65535".into()));
        }
        Ok(())
    }

    /// Nearest up-bin for a direction given by its angle.
    pub fn up_index(&self, angle: f64) -> u16 {
        let n = self.up_bins;
        let width = self.up_bin_width();
        let a = Euclid::rem_euclid(&angle, &TAU);
        let lo = ((a / width).floor() as i64).rem_euclid(i64::from(n)) as u16;
        let hi = (lo + 1) % n;
        let d_lo = angular_distance(a, self.up_center(lo));
        let d_hi = angular_distance(a, self.up_center(hi));
        if d_hi + TIE_EPS < d_lo {
            hi
        } else if d_lo + TIE_EPS < d_hi {
            lo
        } else {
            lo.min(hi)
        }
    }

    /// Nearest latitude bin.
    pub fn latitude_index(&self, lat: f64) -> u16 {
        let n = self.latitude_bins;
        let s = (lat + FRAC_PI_2) / self.latitude_bin_width() - 0.5;
        let lo = s.floor().clamp(0.0, f64::from(n - 1)) as u16;
        let hi = (lo + 1).min(n - 1);
        let d_lo = (lat - self.latitude_center(lo)).abs();
        let d_hi = (lat - self.latitude_center(hi)).abs();
        if d_hi + TIE_EPS < d_lo {
            hi
        } else {
            lo
        }
    }
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = Euclid::rem_euclid(&(a - b), &TAU);
    d.min(TAU - d)
}

/// Per-pixel class indices; [`MASKED_BIN`] marks masked pixels in both planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinField {
    pub width: usize,
    pub height: usize,
    pub up: Vec<u16>,
    pub latitude: Vec<u16>,
}

pub fn encode_bins(field: &PerspectiveField, cfg: &BinCodecConfig) -> Result<BinField> {
    cfg.check()?;
    let n = field.len();
    let mut up = Vec::with_capacity(n);
    let mut latitude = Vec::with_capacity(n);
    for i in 0..n {
        if field.is_valid_index(i) {
            let [ux, uy] = field.up_plane()[i];
            up.push(cfg.up_index(f64::from(uy).atan2(f64::from(ux))));
            latitude.push(cfg.latitude_index(f64::from(field.latitude_plane()[i])));
        } else {
            up.push(MASKED_BIN);
            latitude.push(MASKED_BIN);
        }
    }
    Ok(BinField {
        width: field.width(),
        height: field.height(),
        up,
        latitude,
    })
}

pub fn decode_bins(bins: &BinField, cfg: &BinCodecConfig) -> Result<PerspectiveField> {
    cfg.check()?;
    let n = bins.width * bins.height;
    if bins.up.len() != n || bins.latitude.len() != n {
        return Err(Error::InvalidField("bin plane lengths do not match size".into()));
    }
    for i in 0..n {
        let (x, y) = (i % bins.width, i / bins.width);
        let (ku, kl) = (bins.up[i], bins.latitude[i]);
        // A pixel is masked only when both planes carry the sentinel.
        if ku == MASKED_BIN && kl == MASKED_BIN {
            continue;
        }
        if ku >= cfg.up_bins {
            return Err(Error::BinIndexOutOfRange { kind: "up", x, y, index: ku });
        }
        if kl >= cfg.latitude_bins {
            return Err(Error::BinIndexOutOfRange { kind: "latitude", x, y, index: kl });
        }
    }
    Ok(PerspectiveField::from_fn(bins.width, bins.height, |x, y| {
        let i = y * bins.width + x;
        let (ku, kl) = (bins.up[i], bins.latitude[i]);
        if ku == MASKED_BIN {
            return None;
        }
        let a = cfg.up_center(ku);
        Some(([a.cos(), a.sin()], cfg.latitude_center(kl)))
    }))
}
