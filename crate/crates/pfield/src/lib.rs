//! File formats, image IO and the command-line tool for perspective fields.
//! The numerical work lives in [`pfield_core`], re-exported as [`core`].

pub use pfield_core as core;

pub mod camera_file;
pub mod cli;
pub mod error;
pub mod format;
pub mod imageio;

pub use camera_file::{read_camera, write_camera, CameraFile};
pub use error::{Error, FormatError};
pub use format::{decode_field, encode_field, read_field, write_field};
