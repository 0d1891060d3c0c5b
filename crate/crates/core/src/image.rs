//! Minimal 8-bit RGB raster used for panorama crops and overlays.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, [0, 0, 0])
    }

    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Self {
        let mut data = vec![0u8; width * height * 3];
        for px in data.chunks_exact_mut(3) {
            px.copy_from_slice(&color);
        }
        Self { width, height, data }
    }

    /// Wraps an interleaved RGB buffer; `None` on length mismatch.
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Option<Self> {
        (data.len() == width * height * 3).then_some(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: usize, y: usize, c: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&c);
    }

    /// Bilinear sample at pixel-center coordinates (pixel `(x, y)` sits at
    /// `(x, y)`). Columns wrap when `wrap_x` is set, otherwise they clamp;
    /// rows always clamp.
    pub fn sample_bilinear(&self, x: f64, y: f64, wrap_x: bool) -> [f64; 3] {
        let (w, h) = (self.width as i64, self.height as i64);
        let x0 = x.floor();
        let y0 = y.floor();
        let (fx, fy) = (x - x0, y - y0);
        let col = |c: i64| -> usize {
            if wrap_x {
                c.rem_euclid(w) as usize
            } else {
                c.clamp(0, w - 1) as usize
            }
        };
        let row = |r: i64| -> usize { r.clamp(0, h - 1) as usize };
        let (xa, xb) = (col(x0 as i64), col(x0 as i64 + 1));
        let (ya, yb) = (row(y0 as i64), row(y0 as i64 + 1));
        let (p00, p10, p01, p11) = (self.get(xa, ya), self.get(xb, ya), self.get(xa, yb), self.get(xb, yb));
        let mut out = [0.0; 3];
        for c in 0..3 {
            let top = f64::from(p00[c]) * (1.0 - fx) + f64::from(p10[c]) * fx;
            let bot = f64::from(p01[c]) * (1.0 - fx) + f64::from(p11[c]) * fx;
            out[c] = top * (1.0 - fy) + bot * fy;
        }
        out
    }

    /// True when every pixel is pure black or every pixel is pure white.
    pub fn is_blank(&self) -> bool {
        let all = |v: u8| self.data.iter().all(|&b| b == v);
        all(0) || all(255)
    }
}

pub(crate) fn to_u8(c: [f64; 3]) -> [u8; 3] {
    c.map(|v| v.round().clamp(0.0, 255.0) as u8)
}
