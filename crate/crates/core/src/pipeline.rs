//! Mission execution: fetch every waypoint, crop, score, resize, persist.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::dataset::{self, has_image, MetaRecord, META_FILE};
use crate::error::{Error, Result};
use crate::exec::{map_bounded, ExecMode};
use crate::geomath::MAX_RESOLUTION;
use crate::imaging::{
    crop_vmargin, margin_request_height, resize_with, shannon_entropy, vmargin_rows,
};
use crate::mission::{MissionPlan, Waypoint};
use crate::provider::{CaptureSpec, ImageProvider};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOptions {
    /// Share of the requested height cropped away, half at the top and half
    /// at the bottom, to drop the provider watermark.
    pub vmargin: f64,
    /// Final `(width, height, channels)`; `None` keeps the cropped capture.
    pub img_size: Option<(u32, u32, u8)>,
    pub retry: u32,
    pub concurrency: usize,
    pub hide_labels: bool,
    pub mode: ExecMode,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            vmargin: 0.2,
            img_size: None,
            retry: 3,
            concurrency: 4,
            hide_labels: true,
            mode: ExecMode::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub dir: PathBuf,
    pub records: Vec<MetaRecord>,
    pub fetched: usize,
    pub reused: usize,
    /// Waypoints whose cropped height fell short of the planned height
    /// because the request hit the size cap.
    pub short: Vec<(u32, u32, u32)>,
}

/// What gets requested and what ends up on disk for one waypoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CaptureShape {
    pub request: (u32, u32),
    pub cropped: (u32, u32),
    pub stored: (u32, u32),
}

pub fn capture_shape(w: &Waypoint, opts: &PipelineOptions) -> CaptureShape {
    let req_h = margin_request_height(w.res_y, opts.vmargin, MAX_RESOLUTION);
    let cropped = (w.res_x, req_h - 2 * vmargin_rows(req_h, opts.vmargin));
    let stored = opts.img_size.map(|(x, y, _)| (x, y)).unwrap_or(cropped);
    CaptureShape {
        request: (w.res_x, req_h),
        cropped,
        stored,
    }
}

enum Outcome {
    Reused(MetaRecord),
    Fetched(MetaRecord),
}

/// Runs the whole mission into `dir` and writes `meta_data.csv`.
///
/// Images already on disk with the expected size and listed in a previous
/// `meta_data.csv` are kept and not fetched again. Every finished image is
/// written before the next error is reported, so an interrupted run resumes
/// where it stopped.
pub fn run_mission(
    plan: &MissionPlan,
    provider: &dyn ImageProvider,
    dir: &Path,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    if !(0.0..0.5).contains(&opts.vmargin) {
        return Err(Error::domain(format!(
            "vmargin {} must lie in [0, 0.5)",
            opts.vmargin
        )));
    }
    dataset::ensure_dir(dir)?;
    let meta_path = dir.join(META_FILE);
    let previous: HashMap<String, MetaRecord> = if meta_path.is_file() {
        match dataset::read_meta_csv(&meta_path) {
            Ok(recs) => recs.into_iter().map(|r| (r.img_name.clone(), r)).collect(),
            Err(e) => {
                log::warn!("ignoring unreadable {}: {e}", meta_path.display());
                HashMap::new()
            }
        }
    } else {
        HashMap::new()
    };

    let total = plan.waypoints.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let outcomes = map_bounded(&plan.waypoints, opts.concurrency.max(1), opts.mode, |w| {
        let r = capture_one(w, plan, provider, dir, opts, &previous);
        let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        if n.is_multiple_of(100) || n == total {
            log::info!("{n}/{total} captures processed");
        }
        r
    });

    let mut report = PipelineReport {
        dir: dir.to_path_buf(),
        records: Vec::with_capacity(total),
        fetched: 0,
        reused: 0,
        short: Vec::new(),
    };
    let mut first_err = None;
    for (w, o) in plan.waypoints.iter().zip(outcomes) {
        match o {
            Ok(Outcome::Reused(r)) => {
                report.reused += 1;
                report.records.push(r);
            }
            Ok(Outcome::Fetched(r)) => {
                report.fetched += 1;
                report.records.push(r);
            }
            Err(e) => {
                log::error!("waypoint ({}, {}) failed: {e}", w.row, w.col);
                first_err.get_or_insert(e);
            }
        }
        let shape = capture_shape(w, opts);
        if shape.cropped.1 < w.res_y {
            report.short.push((w.row, w.col, w.res_y - shape.cropped.1));
        }
    }
    if let Some(e) = first_err {
        // Keep what finished so the next run can resume from it.
        merge_meta(&meta_path, &previous, &report.records)?;
        return Err(e);
    }
    dataset::write_meta_csv(&meta_path, &report.records)?;
    Ok(report)
}

fn merge_meta(
    path: &Path,
    previous: &HashMap<String, MetaRecord>,
    fresh: &[MetaRecord],
) -> Result<()> {
    let mut all: Vec<MetaRecord> = previous.values().cloned().collect();
    all.retain(|r| {
        !fresh
            .iter()
            .any(|f| f.img_name == r.img_name || (f.row, f.col) == (r.row, r.col))
    });
    all.extend(fresh.iter().cloned());
    all.sort_by_key(|r| (r.row, r.col));
    dataset::write_meta_csv(path, &all)
}

fn capture_one(
    w: &Waypoint,
    plan: &MissionPlan,
    provider: &dyn ImageProvider,
    dir: &Path,
    opts: &PipelineOptions,
    previous: &HashMap<String, MetaRecord>,
) -> Result<Outcome> {
    let shape = capture_shape(w, opts);
    let name = dataset::image_name(w);
    let path = dir.join(&name);
    if let Some(prev) = previous.get(&name) {
        if has_image(&path, shape.stored) {
            return Ok(Outcome::Reused(MetaRecord::for_waypoint(w, prev.entropy)));
        }
    }
    let spec = CaptureSpec {
        res_x: shape.request.0,
        res_y: shape.request.1,
        hide_labels: opts.hide_labels,
        ..CaptureSpec::for_waypoint(w, plan.spec.map_type)
    };
    let got = provider.fetch(&spec, opts.retry)?;
    if (got.image.width(), got.image.height()) != shape.request {
        return Err(Error::Protocol(format!(
            "asked for {}x{}, received {}x{}",
            shape.request.0,
            shape.request.1,
            got.image.width(),
            got.image.height()
        )));
    }
    let cropped = crop_vmargin(&got.image, opts.vmargin)?;
    let entropy = shannon_entropy(&cropped).value;
    let out = match opts.img_size {
        Some(target) => resize_with(&cropped, target, ExecMode::Sequential)?,
        None => cropped,
    };
    out.save_png(&path)?;
    Ok(Outcome::Fetched(MetaRecord::for_waypoint(w, entropy)))
}
