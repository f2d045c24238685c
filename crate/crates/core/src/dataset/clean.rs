use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_meta_csv, sibling_dir, MetaRecord, META_FILE};
use crate::error::{Error, Result};
use crate::mission::MapType;

/// Images below this many bits carry too little detail to keep.
pub const DEFAULT_ENTROPY_THRESHOLD: f64 = 2.1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    pub threshold: f64,
    /// Map type whose entropies decided, when cross-filtering applied.
    pub reference: Option<MapType>,
    pub retained: Vec<MetaRecord>,
    pub discarded: Vec<MetaRecord>,
    /// Records that had no counterpart and were judged on their own entropy.
    pub fallbacks: usize,
}

/// Partitions `records` by entropy, keeping `H >= threshold`.
///
/// When `reference` holds roadmap records and `map_type` is not roadmap, each
/// record is judged by the roadmap record at the same (row, col). Records
/// without a counterpart fall back to their own entropy with a warning.
pub fn cleanup(
    records: &[MetaRecord],
    map_type: MapType,
    threshold: f64,
    reference: Option<&[MetaRecord]>,
) -> Result<CleanReport> {
    if !threshold.is_finite() {
        return Err(Error::domain("entropy threshold must be finite"));
    }
    let by_cell: Option<HashMap<(u32, u32), f64>> = reference
        .filter(|_| map_type != MapType::Roadmap)
        .map(|refs| refs.iter().map(|r| ((r.row, r.col), r.entropy)).collect());
    let mut report = CleanReport {
        threshold,
        reference: by_cell.as_ref().map(|_| MapType::Roadmap),
        ..CleanReport::default()
    };
    for r in records {
        let h = match &by_cell {
            Some(m) => match m.get(&(r.row, r.col)) {
                Some(&h) => h,
                None => {
                    log::warn!(
                        "no roadmap record for ({}, {}), using own entropy for {}",
                        r.row,
                        r.col,
                        r.img_name
                    );
                    report.fallbacks += 1;
                    r.entropy
                }
            },
            None => r.entropy,
        };
        if h >= threshold {
            report.retained.push(r.clone());
        } else {
            report.discarded.push(r.clone());
        }
    }
    Ok(report)
}

/// [`cleanup`] on a map-type folder, looking for a roadmap sibling first.
pub fn cleanup_dir(dir: &Path, threshold: f64) -> Result<CleanReport> {
    let meta = dir.join(META_FILE);
    if !meta.is_file() {
        return Err(Error::io(
            &meta,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no dataset metadata"),
        ));
    }
    let (map_type, _) = super::parse_maptype_dir(dir)?;
    let records = read_meta_csv(&meta)?;
    let reference = if map_type == MapType::Roadmap {
        None
    } else {
        let r = sibling_dir(dir, MapType::Roadmap)?.join(META_FILE);
        if r.is_file() {
            log::info!(
                "filtering {map_type} by roadmap entropies in {}",
                r.display()
            );
            Some(read_meta_csv(&r)?)
        } else {
            None
        }
    };
    cleanup(&records, map_type, threshold, reference.as_deref())
}
