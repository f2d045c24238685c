//! On-disk dataset: directory layout, `meta_data.csv`, curation and splits.

mod clean;
mod split;
mod stats;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::mission::{MapType, MissionPlan, Waypoint};

pub use clean::{cleanup, cleanup_dir, CleanReport, DEFAULT_ENTROPY_THRESHOLD};
pub use split::{
    make_split, LabelStats, Split, SplitAssignment, SplitFractions, SplitManifest, DEFAULT_SEED,
};
pub use stats::{entropy_stats, EntropyStats, HIST_BINS, HIST_MAX};

pub const META_FILE: &str = "meta_data.csv";
pub const META_HEADER: [&str; 7] = [
    "img_names",
    "columns",
    "rows",
    "Lat",
    "Lon",
    "Alt",
    "entropy",
];
pub const MISSION_FILE: &str = "mission.json";
pub const SPLIT_MANIFEST_FILE: &str = "split_manifest.json";
pub const ENTROPY_HIST_FILE: &str = "entropy_hist.csv";

/// One row of `meta_data.csv`. `alt` holds the zoom level, not meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    #[serde(rename = "img_names")]
    pub img_name: String,
    #[serde(rename = "columns")]
    pub col: u32,
    #[serde(rename = "rows")]
    pub row: u32,
    #[serde(rename = "Lat")]
    pub lat: f64,
    #[serde(rename = "Lon")]
    pub lon: f64,
    #[serde(rename = "Alt")]
    pub alt: u8,
    pub entropy: f64,
}

impl MetaRecord {
    pub fn for_waypoint(w: &Waypoint, entropy: f64) -> Self {
        MetaRecord {
            img_name: image_name(w),
            col: w.col,
            row: w.row,
            lat: w.center.lat,
            lon: w.center.lon,
            alt: w.zoom,
            entropy,
        }
    }
}

/// `{row:04}_{col:04}_{lat:.6}_{lon:.6}.png`
pub fn image_name(w: &Waypoint) -> String {
    format!(
        "{:04}_{:04}_{:.6}_{:.6}.png",
        w.row, w.col, w.center.lat, w.center.lon
    )
}

/// Folder name for one map type: `{map_type}_{round(overlap * 100)}`.
pub fn maptype_dir_name(map_type: MapType, overlap: f64) -> String {
    format!("{map_type}_{}", (overlap * 100.0).round() as i64)
}

/// `{data_dir}/{mission}/{map_type}_{overlap_percent}`
pub fn maptype_dir(data_dir: &Path, mission: &str, map_type: MapType, overlap: f64) -> PathBuf {
    data_dir
        .join(mission)
        .join(maptype_dir_name(map_type, overlap))
}

/// Map type and overlap percent encoded in a map-type folder name.
pub fn parse_maptype_dir(dir: &Path) -> Result<(MapType, i64)> {
    let name = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Dataset(format!("{} has no folder name", dir.display())))?;
    let (mt, pct) = name.rsplit_once('_').ok_or_else(|| {
        Error::Dataset(format!(
            "folder {name:?} is not named {{map_type}}_{{overlap}}"
        ))
    })?;
    let pct = pct
        .parse()
        .map_err(|_| Error::Dataset(format!("folder {name:?} has a non-numeric overlap suffix")))?;
    Ok((mt.parse()?, pct))
}

/// The folder holding `other` imagery of the same mission and overlap.
pub fn sibling_dir(dir: &Path, other: MapType) -> Result<PathBuf> {
    let (_, pct) = parse_maptype_dir(dir)?;
    let parent = dir.parent().unwrap_or_else(|| Path::new("."));
    Ok(parent.join(format!("{other}_{pct}")))
}

pub fn write_meta_csv(path: &Path, records: &[MetaRecord]) -> Result<()> {
    let mut seen = HashSet::new();
    for r in records {
        if !seen.insert((r.row, r.col)) {
            return Err(Error::Dataset(format!(
                "duplicate (row, col) = ({}, {})",
                r.row, r.col
            )));
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(META_HEADER)?;
    for r in records {
        // Nine decimals keep re-projected centers well below a millimeter.
        w.write_record([
            r.img_name.clone(),
            r.col.to_string(),
            r.row.to_string(),
            format!("{:.9}", r.lat),
            format!("{:.9}", r.lon),
            r.alt.to_string(),
            r.entropy.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_meta_csv(path: &Path) -> Result<Vec<MetaRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != META_HEADER {
        return Err(Error::Dataset(format!(
            "{} has header {:?}, expected {:?}",
            path.display(),
            header,
            META_HEADER
        )));
    }
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub(crate) fn csv_io(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::io(path, io);
        }
        unreachable!()
    }
    Error::Csv(e)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// True when `path` is an image with exactly the given dimensions.
pub fn has_image(path: &Path, dims: (u32, u32)) -> bool {
    path.is_file() && crate::imaging::image_dimensions(path).ok() == Some(dims)
}

/// Writes one image per waypoint into `dir` plus `meta_data.csv`.
///
/// Files already present with the right dimensions are left alone.
pub fn write_dataset(
    dir: &Path,
    plan: &MissionPlan,
    images: &[Image],
    entropies: &[f64],
) -> Result<Vec<MetaRecord>> {
    if images.len() != plan.waypoints.len() || entropies.len() != plan.waypoints.len() {
        return Err(Error::Dataset(format!(
            "{} waypoints but {} images and {} entropies",
            plan.waypoints.len(),
            images.len(),
            entropies.len()
        )));
    }
    ensure_dir(dir)?;
    let mut records = Vec::with_capacity(images.len());
    for ((w, img), &h) in plan.waypoints.iter().zip(images).zip(entropies) {
        let rec = MetaRecord::for_waypoint(w, h);
        let path = dir.join(&rec.img_name);
        if !has_image(&path, (img.width(), img.height())) {
            img.save_png(&path)?;
        }
        records.push(rec);
    }
    write_meta_csv(&dir.join(META_FILE), &records)?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomath::{CameraSpec, GeoPoint};
    use crate::mission::plan_list;

    fn plan3() -> MissionPlan {
        let pts: Vec<_> = [(35.1, -89.9), (35.2, -89.8), (35.3, -89.7)]
            .iter()
            .map(|&(a, b)| (GeoPoint::new(a, b).unwrap(), 120.0))
            .collect();
        plan_list(&pts, &CameraSpec::default()).unwrap()
    }

    #[test]
    fn names_and_dirs() {
        assert_eq!(maptype_dir_name(MapType::Satellite, 0.0), "satellite_0");
        assert_eq!(maptype_dir_name(MapType::Roadmap, 0.25), "roadmap_25");
        let d = maptype_dir(Path::new("data"), "m", MapType::Terrain, 0.3);
        assert_eq!(d, Path::new("data/m/terrain_30"));
        assert_eq!(parse_maptype_dir(&d).unwrap(), (MapType::Terrain, 30));
        assert_eq!(
            sibling_dir(&d, MapType::Roadmap).unwrap(),
            Path::new("data/m/roadmap_30")
        );
        let w = plan3().waypoints[1];
        assert_eq!(image_name(&w), "0001_0000_35.200000_-89.800000.png");
    }

    #[test]
    fn writes_three_files_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let plan = plan3();
        let imgs = vec![Image::filled(8, 6, 3, 1).unwrap(); 3];
        let recs = write_dataset(dir.path(), &plan, &imgs, &[0.0, 1.0, 2.5]).unwrap();
        let back = read_meta_csv(&dir.path().join(META_FILE)).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(a.img_name, b.img_name);
            assert!(dir.path().join(&a.img_name).is_file());
            assert!((a.lat - b.lat).abs() < 1e-9);
        }
        assert_eq!(back[2].entropy, 2.5);
        let text = fs::read_to_string(dir.path().join(META_FILE)).unwrap();
        assert!(text.starts_with("img_names,columns,rows,Lat,Lon,Alt,entropy\n"));
        assert!(write_dataset(dir.path(), &plan, &imgs[..2], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_foreign_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_meta_csv(&p), Err(Error::Dataset(_))));
    }
}
