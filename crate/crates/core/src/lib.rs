//! Perspective fields: a per-pixel camera representation made of an
//! image-plane Up-vector and a Latitude angle.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the pure numerical
//! pieces: camera models, field synthesis, equivariant field transforms,
//! the discrepancy metric, camera recovery and sliding-window merging.
//! File formats, image codecs and the command-line tool live in the `pfield`
//! crate.
//!
//! Conventions used throughout:
//!
//! * world frame is Y-up, gravity is `(0, -1, 0)`;
//! * image coordinates are continuous with `x` to the right and `y` down,
//!   pixel `(u, v)` has its center at `(u + 0.5, v + 0.5)`;
//! * angles are radians.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod bins;
pub mod calibrate;
pub mod camera;
mod error;
pub mod field;
pub mod image;
pub mod metric;
pub mod synth;
pub mod transform;
pub mod viz;

pub use error::{Error, Result};
pub use nalgebra;

pub use aggregate::{merge, plan_windows, Rect, WindowConfig, WindowPlan};
pub use bins::{decode_bins, encode_bins, BinCodecConfig, BinField};
pub use calibrate::{
    calibrate, fixed_center_calibrate, init_geometric, init_heuristic, objective, CalibParams, CalibrationResult,
    Init, OptimizerConfig, Termination,
};
pub use camera::{CameraModel, CameraSpec, RayField};
pub use field::{PerspectiveField, WorldConvention};
pub use image::RgbImage;
pub use metric::{pfd, rank_candidates, rotation_adjust, MetricConfig, MetricReport};
pub use synth::{pano_crop, synth_field};
pub use transform::{compose, hflip_field, FieldTransform, TransformKind};
pub use viz::{latitude_color, render_overlay, OverlayStyle};
