//! JSON camera description. Angles are degrees here and radians everywhere
//! else.

use std::fs;
use std::path::Path;

use pfield_core::camera::CameraModel;
use pfield_core::CameraSpec;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Pinhole,
    Equirectangular,
    UnifiedSpherical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraFile {
    pub model: ModelName,
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub vfov_deg: f64,
    #[serde(default = "centered")]
    pub cx: f64,
    #[serde(default = "centered")]
    pub cy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    pub width: usize,
    pub height: usize,
}

fn centered() -> f64 {
    0.5
}

impl CameraFile {
    pub fn from_spec(cam: &CameraSpec) -> Self {
        let (model, xi) = match cam.model {
            CameraModel::Pinhole => (ModelName::Pinhole, None),
            CameraModel::Equirectangular => (ModelName::Equirectangular, None),
            CameraModel::UnifiedSpherical { xi } => (ModelName::UnifiedSpherical, Some(xi)),
        };
        Self {
            model,
            roll_deg: cam.roll.to_degrees(),
            pitch_deg: cam.pitch.to_degrees(),
            vfov_deg: cam.vfov.to_degrees(),
            cx: cam.cx,
            cy: cam.cy,
            xi,
            width: cam.width,
            height: cam.height,
        }
    }

    pub fn to_spec(&self) -> Result<CameraSpec, pfield_core::Error> {
        let model = match (self.model, self.xi) {
            (ModelName::Pinhole, None) => CameraModel::Pinhole,
            (ModelName::Equirectangular, None) => CameraModel::Equirectangular,
            (ModelName::UnifiedSpherical, Some(xi)) => CameraModel::UnifiedSpherical { xi },
            (ModelName::UnifiedSpherical, None) => {
                return Err(pfield_core::Error::InvalidCamera("unified_spherical needs xi".into()))
            }
            (_, Some(_)) => {
                return Err(pfield_core::Error::InvalidCamera("xi is only valid for unified_spherical".into()))
            }
        };
        let cam = CameraSpec::pinhole(
            self.width,
            self.height,
            self.roll_deg.to_radians(),
            self.pitch_deg.to_radians(),
            self.vfov_deg.to_radians(),
        )
        .with_principal_point(self.cx, self.cy)
        .with_model(model);
        cam.validate()?;
        Ok(cam)
    }
}

pub fn read_camera(path: &Path) -> Result<CameraSpec, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: CameraFile = serde_json::from_str(&text).map_err(|e| Error::decode(path, e))?;
    Ok(file.to_spec()?)
}

pub fn write_camera(path: &Path, cam: &CameraSpec) -> Result<(), Error> {
    write_json(path, &CameraFile::from_spec(cam))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
