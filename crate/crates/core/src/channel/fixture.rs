//! JSON persistence of channel realizations.
//!
//! Only the geometry, gain model, seed and path records are stored; every
//! matrix is re-derived from the paths on load. Complex gains are written
//! as `[re, im]` pairs and grid points as `{"i1": .., "i2": ..}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChannelRealization, GainModel, PathSet, SystemGeometry};
use crate::angular::build_dictionary;
use crate::{Error, Result};

pub const FIXTURE_FORMAT: &str = "ris-dsomp/channel-fixture/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFixture {
    pub format: String,
    pub geometry: SystemGeometry,
    pub gains: GainModel,
    /// Seed the paths were sampled with.
    pub seed: u64,
    pub paths: PathSet,
}

impl ChannelFixture {
    pub fn new(geometry: SystemGeometry, gains: GainModel, seed: u64, paths: PathSet) -> Self {
        Self {
            format: FIXTURE_FORMAT.to_string(),
            geometry,
            gains,
            seed,
            paths,
        }
    }

    /// Rebuilds the full realization from the stored paths.
    pub fn realize(&self) -> Result<ChannelRealization> {
        let um = build_dictionary(self.geometry.bs);
        let un = build_dictionary(self.geometry.ris);
        ChannelRealization::from_paths(&self.geometry, self.paths.clone(), &um, &un)
    }
}

pub fn save_fixture(fixture: &ChannelFixture, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(fixture)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_fixture(path: &Path) -> Result<ChannelFixture> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fixture: ChannelFixture = serde_json::from_str(&text)?;
    if fixture.format != FIXTURE_FORMAT {
        return Err(Error::Config(format!(
            "{}: unsupported fixture format `{}`",
            path.display(),
            fixture.format
        )));
    }
    fixture.geometry.validate()?;
    fixture.gains.validate()?;
    fixture.paths.validate(&fixture.geometry)?;
    Ok(fixture)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_paths;

    #[test]
    fn round_trip_reproduces_matrices() {
        let geom = SystemGeometry::desk_scale(2);
        let gains = GainModel::default();
        let paths = sample_paths(&geom, &gains, 11).unwrap();
        let fixture = ChannelFixture::new(geom, gains, 11, paths);
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("fx.json");
        save_fixture(&fixture, &file).unwrap();
        let loaded = load_fixture(&file).unwrap();
        assert_eq!(loaded, fixture);
        let a = fixture.realize().unwrap();
        let b = loaded.realize().unwrap();
        assert_eq!(a.angular, b.angular);
        assert_eq!(a.cascaded, b.cascaded);
    }

    #[test]
    fn unknown_keys_and_formats_are_rejected() {
        let geom = SystemGeometry::desk_scale(0);
        let gains = GainModel::default();
        let paths = sample_paths(&geom, &gains, 1).unwrap();
        let mut value = serde_json::to_value(ChannelFixture::new(geom, gains, 1, paths)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("fx.json");

        value["format"] = "something-else".into();
        fs::write(&file, value.to_string()).unwrap();
        assert!(matches!(load_fixture(&file), Err(Error::Config(_))));

        value["format"] = FIXTURE_FORMAT.into();
        value["extra"] = 1.into();
        fs::write(&file, value.to_string()).unwrap();
        assert!(matches!(load_fixture(&file), Err(Error::Json(_))));
    }
}
