//! PNG/JPEG codec glue between `image` and [`RgbImage`].

use std::path::Path;

use pfield_core::RgbImage;

use crate::error::Error;

/// Loads any PNG or JPEG as 8-bit RGB; alpha and extra depth are dropped.
pub fn read_image(path: &Path) -> Result<RgbImage, Error> {
    if !path.exists() {
        return Err(Error::io(path, std::io::Error::from(std::io::ErrorKind::NotFound)));
    }
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::decode(path, other),
    })?;
    let rgb = img.into_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    Ok(RgbImage::from_raw(w, h, rgb.into_raw()).expect("buffer matches dimensions"))
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<(), Error> {
    let w = u32::try_from(img.width()).map_err(|_| Error::usage("image too wide"))?;
    let h = u32::try_from(img.height()).map_err(|_| Error::usage("image too tall"))?;
    image::save_buffer_with_format(path, img.as_raw(), w, h, image::ExtendedColorType::Rgb8, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::decode(path, other),
        })
}
