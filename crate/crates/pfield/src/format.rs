//! Binary containers for fields (`PFLD`) and bin-encoded fields (`PBIN`).
//!
//! `PFLD` layout, all little-endian:
//!
//! ```text
//! magic   "PFLD"                 4 bytes
//! version u32 = 1
//! width   u32
//! height  u32
//! flags   u32                    bit 0: mask plane present
//! up_x    f32 x W*H              row-major
//! up_y    f32 x W*H
//! lat     f32 x W*H              radians
//! mask    u8  x W*H              optional, 1 = valid, 0 = masked
//! ```
//!
//! `PBIN` layout:
//!
//! ```text
//! magic         "PBIN"
//! version       u32 = 1
//! width, height u32
//! up_bins       u16
//! lat_bins      u16
//! up            u16 x W*H        65535 marks a masked pixel
//! lat           u16 x W*H
//! ```

use std::fs;
use std::path::Path;

use pfield_core::field::UNIT_TOLERANCE;
use pfield_core::{BinCodecConfig, BinField, PerspectiveField};

use crate::error::{Error, FormatError};

pub const FIELD_MAGIC: [u8; 4] = *b"PFLD";
pub const BINS_MAGIC: [u8; 4] = *b"PBIN";
pub const VERSION: u32 = 1;
/// Up-vectors further than this from unit length are rejected on read;
/// closer ones are renormalized.
pub const READ_UNIT_TOLERANCE: f64 = 1e-3;

const FLAG_MASK: u32 = 1;
const FIELD_HEADER: usize = 20;
const BINS_HEADER: usize = 20;

pub fn encode_field(field: &PerspectiveField) -> Result<Vec<u8>, FormatError> {
    let (w, h) = field.size();
    let n = field.len();
    let mask = field.mask();
    let mut out = Vec::with_capacity(FIELD_HEADER + 12 * n + mask.map_or(0, |_| n));
    out.extend_from_slice(&FIELD_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&dim(w)?.to_le_bytes());
    out.extend_from_slice(&dim(h)?.to_le_bytes());
    let flags = if mask.is_some() { FLAG_MASK } else { 0 };
    out.extend_from_slice(&flags.to_le_bytes());
    let up = field.up_plane();
    let planes: [&dyn Fn(usize) -> f32; 3] = [&|i| up[i][0], &|i| up[i][1], &|i| field.latitude_plane()[i]];
    for (p, plane) in planes.iter().enumerate() {
        for i in 0..n {
            let v = plane(i);
            if !v.is_finite() {
                return Err(FormatError::NonFinite { plane: PLANE_NAMES[p], x: i % w, y: i / w });
            }
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    if let Some(m) = mask {
        out.extend(m.iter().map(|&v| u8::from(v)));
    }
    Ok(out)
}

const PLANE_NAMES: [&str; 3] = ["up_x", "up_y", "latitude"];

fn dim(v: usize) -> Result<u32, FormatError> {
    u32::try_from(v).map_err(|_| FormatError::Malformed(format!("dimension {v} does not fit in u32")))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> &'a [u8] {
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        s
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take(4).try_into().unwrap())
    }

    fn u16(&mut self) -> u16 {
        u16::from_le_bytes(self.take(2).try_into().unwrap())
    }

    fn f32(&mut self) -> f32 {
        f32::from_le_bytes(self.take(4).try_into().unwrap())
    }
}

fn check_header(bytes: &[u8], magic: [u8; 4], header: usize) -> Result<(), FormatError> {
    if bytes.len() < 4 || bytes[..4] != magic {
        let found = bytes.get(..4.min(bytes.len())).unwrap_or_default();
        return Err(FormatError::BadMagic {
            expected: String::from_utf8_lossy(&magic).into_owned(),
            found: String::from_utf8_lossy(found).into_owned(),
        });
    }
    if bytes.len() < header {
        return Err(FormatError::Truncated { expected: header, found: bytes.len() });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    Ok(())
}

fn expect_len(bytes: &[u8], expected: usize) -> Result<(), FormatError> {
    match bytes.len().cmp(&expected) {
        std::cmp::Ordering::Less => Err(FormatError::Truncated { expected, found: bytes.len() }),
        std::cmp::Ordering::Greater => Err(FormatError::Malformed(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        ))),
        std::cmp::Ordering::Equal => Ok(()),
    }
}

fn payload_len(w: usize, h: usize, per_pixel: usize, header: usize) -> Result<usize, FormatError> {
    w.checked_mul(h)
        .and_then(|n| n.checked_mul(per_pixel))
        .and_then(|n| n.checked_add(header))
        .ok_or_else(|| FormatError::Malformed(format!("{w}x{h} is too large")))
}

pub fn decode_field(bytes: &[u8]) -> Result<PerspectiveField, FormatError> {
    check_header(bytes, FIELD_MAGIC, FIELD_HEADER)?;
    let mut r = Reader { bytes, pos: 8 };
    let w = r.u32() as usize;
    let h = r.u32() as usize;
    let flags = r.u32();
    if flags & !FLAG_MASK != 0 {
        return Err(FormatError::Malformed(format!("unknown flags {flags:#x}")));
    }
    let has_mask = flags & FLAG_MASK != 0;
    let expected = payload_len(w, h, 12 + usize::from(has_mask), FIELD_HEADER)?;
    expect_len(bytes, expected)?;

    let n = w * h;
    let mut planes = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for (p, plane) in planes.iter_mut().enumerate() {
        for i in 0..n {
            let v = r.f32();
            if !v.is_finite() {
                return Err(FormatError::NonFinite { plane: PLANE_NAMES[p], x: i % w, y: i / w });
            }
            plane.push(v);
        }
    }
    let mask = if has_mask {
        let raw = r.take(n);
        if let Some(i) = raw.iter().position(|&b| b > 1) {
            return Err(FormatError::Malformed(format!(
                "mask byte {} at pixel ({}, {}) is not 0 or 1",
                raw[i],
                i % w,
                i / w
            )));
        }
        Some(raw.iter().map(|&b| b == 1).collect::<Vec<_>>())
    } else {
        None
    };

    let [ux, uy, latitude] = planes;
    let mut up: Vec<[f32; 2]> = ux.into_iter().zip(uy).map(|(x, y)| [x, y]).collect();
    for (i, u) in up.iter_mut().enumerate() {
        if mask.as_ref().is_some_and(|m| !m[i]) {
            continue;
        }
        let norm = (f64::from(u[0]).powi(2) + f64::from(u[1]).powi(2)).sqrt();
        let dev = (norm - 1.0).abs();
        if dev > READ_UNIT_TOLERANCE {
            return Err(FormatError::NonUnit { x: i % w, y: i / w, norm });
        }
        // Leave in-tolerance values untouched so read(write(f)) is bit-exact.
        if dev > UNIT_TOLERANCE {
            *u = [(f64::from(u[0]) / norm) as f32, (f64::from(u[1]) / norm) as f32];
        }
    }
    PerspectiveField::new(w, h, up, latitude, mask).map_err(|e| FormatError::Malformed(e.to_string()))
}

pub fn encode_bin_field(bins: &BinField, cfg: &BinCodecConfig) -> Result<Vec<u8>, FormatError> {
    let n = bins.width * bins.height;
    if bins.up.len() != n || bins.latitude.len() != n {
        return Err(FormatError::Malformed("bin planes do not match the declared size".into()));
    }
    let mut out = Vec::with_capacity(BINS_HEADER + 4 * n);
    out.extend_from_slice(&BINS_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&dim(bins.width)?.to_le_bytes());
    out.extend_from_slice(&dim(bins.height)?.to_le_bytes());
    out.extend_from_slice(&cfg.up_bins.to_le_bytes());
    out.extend_from_slice(&cfg.latitude_bins.to_le_bytes());
    for v in bins.up.iter().chain(&bins.latitude) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Range checks on the indices happen at decode time in the core codec.
pub fn decode_bin_field(bytes: &[u8]) -> Result<(BinField, BinCodecConfig), FormatError> {
    check_header(bytes, BINS_MAGIC, BINS_HEADER)?;
    let mut r = Reader { bytes, pos: 8 };
    let width = r.u32() as usize;
    let height = r.u32() as usize;
    let cfg = BinCodecConfig { up_bins: r.u16(), latitude_bins: r.u16() };
    expect_len(bytes, payload_len(width, height, 4, BINS_HEADER)?)?;
    let n = width * height;
    let up = (0..n).map(|_| r.u16()).collect();
    let latitude = (0..n).map(|_| r.u16()).collect();
    Ok((BinField { width, height, up, latitude }, cfg))
}

pub fn read_field(path: &Path) -> Result<PerspectiveField, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_field(&bytes).map_err(|e| Error::format(path, e))
}

pub fn write_field(path: &Path, field: &PerspectiveField) -> Result<(), Error> {
    let bytes = encode_field(field).map_err(|e| Error::format(path, e))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_bin_field(path: &Path) -> Result<(BinField, BinCodecConfig), Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_bin_field(&bytes).map_err(|e| Error::format(path, e))
}

pub fn write_bin_field(path: &Path, bins: &BinField, cfg: &BinCodecConfig) -> Result<(), Error> {
    let bytes = encode_bin_field(bins, cfg).map_err(|e| Error::format(path, e))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
