//! Overlay rendering: green Up-vector arrows on a regular grid and a
//! blue-white-red latitude color map with iso-latitude contours.

use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::{Error, PerspectiveField, Result, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayStyle {
    /// Arrow spacing in pixels; 0 disables arrows.
    pub stride: usize,
    /// Contour spacing in degrees; 0 disables contours.
    pub contour_deg: f64,
    /// Color map opacity over the image.
    pub alpha: f64,
    pub arrow_color: [u8; 3],
    pub contour_color: [u8; 3],
}

impl Default for OverlayStyle {
    fn default() -> Self {
        Self {
            stride: 16,
            contour_deg: 10.0,
            alpha: 0.5,
            arrow_color: [0, 255, 0],
            contour_color: [32, 32, 32],
        }
    }
}

/// Color-map entry for a latitude; `-pi/2` is blue, `0` white, `pi/2` red.
pub fn latitude_color(lat: f64) -> [u8; 3] {
    let t = ((lat + FRAC_PI_2) / PI).clamp(0.0, 1.0);
    COLORMAP[(t * 255.0).round() as usize]
}

pub fn render_overlay(image: &RgbImage, field: &PerspectiveField, style: &OverlayStyle) -> Result<RgbImage> {
    if (image.width(), image.height()) != field.size() {
        return Err(Error::DimensionMismatch {
            expected: field.size(),
            found: (image.width(), image.height()),
        });
    }
    let (w, h) = field.size();
    let mut out = image.clone();
    let a = (style.alpha.clamp(0.0, 1.0) * 256.0).round() as u32;
    for y in 0..h {
        for x in 0..w {
            let Some(lat) = field.latitude(x, y) else { continue };
            let c = latitude_color(f64::from(lat));
            let p = image.get(x, y);
            let mut o = [0u8; 3];
            for k in 0..3 {
                o[k] = ((u32::from(p[k]) * (256 - a) + u32::from(c[k]) * a + 128) >> 8) as u8;
            }
            out.put(x, y, o);
        }
    }

    if style.contour_deg > 0.0 {
        let bucket = |x: usize, y: usize| {
            field
                .latitude(x, y)
                .map(|l| (f64::from(l).to_degrees() / style.contour_deg).floor() as i64)
        };
        for y in 0..h {
            for x in 0..w {
                let Some(b) = bucket(x, y) else { continue };
                let mut neighbours = [None; 4];
                if x > 0 {
                    neighbours[0] = bucket(x - 1, y);
                }
                if x + 1 < w {
                    neighbours[1] = bucket(x + 1, y);
                }
                if y > 0 {
                    neighbours[2] = bucket(x, y - 1);
                }
                if y + 1 < h {
                    neighbours[3] = bucket(x, y + 1);
                }
                // Lines are drawn on the lower side of each level crossing.
                if neighbours.iter().flatten().any(|&n| n > b) {
                    out.put(x, y, style.contour_color);
                }
            }
        }
    }

    if style.stride > 0 {
        let s = style.stride;
        let len = 0.8 * s as f64;
        let mut y = s / 2;
        while y < h {
            let mut x = s / 2;
            while x < w {
                if let Some([ux, uy]) = field.up(x, y) {
                    let (ux, uy) = (f64::from(ux), f64::from(uy));
                    let (x0, y0) = (x as f64 + 0.5, y as f64 + 0.5);
                    let tip = (x0 + len * ux, y0 + len * uy);
                    draw_line(&mut out, field, (x0, y0), tip, style.arrow_color);
                    for side in [-1.0, 1.0] {
                        let ang = side * 150f64.to_radians();
                        let (s, c) = ang.sin_cos();
                        let dx = c * ux - s * uy;
                        let dy = s * ux + c * uy;
                        let end = (tip.0 + 0.3 * len * dx, tip.1 + 0.3 * len * dy);
                        draw_line(&mut out, field, tip, end, style.arrow_color);
                    }
                }
                x += s;
            }
            y += s;
        }
    }
    Ok(out)
}

/// Integer Bresenham between rounded endpoints; skips masked and
/// out-of-bounds pixels.
fn draw_line(img: &mut RgbImage, field: &PerspectiveField, from: (f64, f64), to: (f64, f64), color: [u8; 3]) {
    let (mut x0, mut y0) = (from.0.floor() as i64, from.1.floor() as i64);
    let (x1, y1) = (to.0.floor() as i64, to.1.floor() as i64);
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (w, h) = (img.width() as i64, img.height() as i64);
    loop {
        if x0 >= 0 && y0 >= 0 && x0 < w && y0 < h && field.is_valid(x0 as usize, y0 as usize) {
            img.put(x0 as usize, y0 as usize, color);
        }
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

/// Diverging blue-white-red map. Entries 0..=127 ramp from blue to white,
/// 128..=255 from white to red, so latitude 0 lands on white.
#[rustfmt::skip]
pub const COLORMAP: [[u8; 3]; 256] = [
    [0, 0, 255], [2, 2, 255], [4, 4, 255], [6, 6, 255],
    [8, 8, 255], [10, 10, 255], [12, 12, 255], [14, 14, 255],
    [16, 16, 255], [18, 18, 255], [20, 20, 255], [22, 22, 255],
    [24, 24, 255], [26, 26, 255], [28, 28, 255], [30, 30, 255],
    [32, 32, 255], [34, 34, 255], [36, 36, 255], [38, 38, 255],
    [40, 40, 255], [42, 42, 255], [44, 44, 255], [46, 46, 255],
    [48, 48, 255], [50, 50, 255], [52, 52, 255], [54, 54, 255],
    [56, 56, 255], [58, 58, 255], [60, 60, 255], [62, 62, 255],
    [64, 64, 255], [66, 66, 255], [68, 68, 255], [70, 70, 255],
    [72, 72, 255], [74, 74, 255], [76, 76, 255], [78, 78, 255],
    [80, 80, 255], [82, 82, 255], [84, 84, 255], [86, 86, 255],
    [88, 88, 255], [90, 90, 255], [92, 92, 255], [94, 94, 255],
    [96, 96, 255], [98, 98, 255], [100, 100, 255], [102, 102, 255],
    [104, 104, 255], [106, 106, 255], [108, 108, 255], [110, 110, 255],
    [112, 112, 255], [114, 114, 255], [116, 116, 255], [118, 118, 255],
    [120, 120, 255], [122, 122, 255], [124, 124, 255], [126, 126, 255],
    [129, 129, 255], [131, 131, 255], [133, 133, 255], [135, 135, 255],
    [137, 137, 255], [139, 139, 255], [141, 141, 255], [143, 143, 255],
    [145, 145, 255], [147, 147, 255], [149, 149, 255], [151, 151, 255],
    [153, 153, 255], [155, 155, 255], [157, 157, 255], [159, 159, 255],
    [161, 161, 255], [163, 163, 255], [165, 165, 255], [167, 167, 255],
    [169, 169, 255], [171, 171, 255], [173, 173, 255], [175, 175, 255],
    [177, 177, 255], [179, 179, 255], [181, 181, 255], [183, 183, 255],
    [185, 185, 255], [187, 187, 255], [189, 189, 255], [191, 191, 255],
    [193, 193, 255], [195, 195, 255], [197, 197, 255], [199, 199, 255],
    [201, 201, 255], [203, 203, 255], [205, 205, 255], [207, 207, 255],
    [209, 209, 255], [211, 211, 255], [213, 213, 255], [215, 215, 255],
    [217, 217, 255], [219, 219, 255], [221, 221, 255], [223, 223, 255],
    [225, 225, 255], [227, 227, 255], [229, 229, 255], [231, 231, 255],
    [233, 233, 255], [235, 235, 255], [237, 237, 255], [239, 239, 255],
    [241, 241, 255], [243, 243, 255], [245, 245, 255], [247, 247, 255],
    [249, 249, 255], [251, 251, 255], [253, 253, 255], [255, 255, 255],
    [255, 255, 255], [255, 253, 253], [255, 251, 251], [255, 249, 249],
    [255, 247, 247], [255, 245, 245], [255, 243, 243], [255, 241, 241],
    [255, 239, 239], [255, 237, 237], [255, 235, 235], [255, 233, 233],
    [255, 231, 231], [255, 229, 229], [255, 227, 227], [255, 225, 225],
    [255, 223, 223], [255, 221, 221], [255, 219, 219], [255, 217, 217],
    [255, 215, 215], [255, 213, 213], [255, 211, 211], [255, 209, 209],
    [255, 207, 207], [255, 205, 205], [255, 203, 203], [255, 201, 201],
    [255, 199, 199], [255, 197, 197], [255, 195, 195], [255, 193, 193],
    [255, 191, 191], [255, 189, 189], [255, 187, 187], [255, 185, 185],
    [255, 183, 183], [255, 181, 181], [255, 179, 179], [255, 177, 177],
    [255, 175, 175], [255, 173, 173], [255, 171, 171], [255, 169, 169],
    [255, 167, 167], [255, 165, 165], [255, 163, 163], [255, 161, 161],
    [255, 159, 159], [255, 157, 157], [255, 155, 155], [255, 153, 153],
    [255, 151, 151], [255, 149, 149], [255, 147, 147], [255, 145, 145],
    [255, 143, 143], [255, 141, 141], [255, 139, 139], [255, 137, 137],
    [255, 135, 135], [255, 133, 133], [255, 131, 131], [255, 129, 129],
    [255, 126, 126], [255, 124, 124], [255, 122, 122], [255, 120, 120],
    [255, 118, 118], [255, 116, 116], [255, 114, 114], [255, 112, 112],
    [255, 110, 110], [255, 108, 108], [255, 106, 106], [255, 104, 104],
    [255, 102, 102], [255, 100, 100], [255, 98, 98], [255, 96, 96],
    [255, 94, 94], [255, 92, 92], [255, 90, 90], [255, 88, 88],
    [255, 86, 86], [255, 84, 84], [255, 82, 82], [255, 80, 80],
    [255, 78, 78], [255, 76, 76], [255, 74, 74], [255, 72, 72],
    [255, 70, 70], [255, 68, 68], [255, 66, 66], [255, 64, 64],
    [255, 62, 62], [255, 60, 60], [255, 58, 58], [255, 56, 56],
    [255, 54, 54], [255, 52, 52], [255, 50, 50], [255, 48, 48],
    [255, 46, 46], [255, 44, 44], [255, 42, 42], [255, 40, 40],
    [255, 38, 38], [255, 36, 36], [255, 34, 34], [255, 32, 32],
    [255, 30, 30], [255, 28, 28], [255, 26, 26], [255, 24, 24],
    [255, 22, 22], [255, 20, 20], [255, 18, 18], [255, 16, 16],
    [255, 14, 14], [255, 12, 12], [255, 10, 10], [255, 8, 8],
    [255, 6, 6], [255, 4, 4], [255, 2, 2], [255, 0, 0],
];
