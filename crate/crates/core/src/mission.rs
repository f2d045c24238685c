//! Mission planning: single captures, point lists, and raster surveys.
//!
//! A raster is laid out on a UTM lattice pinned to the zone (and hemisphere)
//! of the top-left corner. The first center sits on the top-left corner;
//! centers advance east by `width * (1 - overlap)` and south by
//! `height * (1 - overlap)`, row-major.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::geodesy::{latlon_to_utm, latlon_to_utm_in, utm_to_latlon, UtmCoord};
use crate::geomath::{
    footprint_dims, zoom_from_bbox, CameraSpec, Footprint, GeoBBox, GeoPoint, ZoomSpec,
    MAX_RESOLUTION,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapType {
    #[default]
    Satellite,
    Roadmap,
    Terrain,
}

impl MapType {
    pub fn as_str(self) -> &'static str {
        match self {
            MapType::Satellite => "satellite",
            MapType::Roadmap => "roadmap",
            MapType::Terrain => "terrain",
        }
    }

    /// Highest zoom requested for this map type. Coverage at high zoom
    /// still varies by region on the service side.
    pub fn max_zoom(self) -> u8 {
        crate::geomath::MAX_ZOOM
    }
}

impl fmt::Display for MapType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MapType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "satellite" => Ok(MapType::Satellite),
            "roadmap" => Ok(MapType::Roadmap),
            "terrain" => Ok(MapType::Terrain),
            other => Err(Error::Config(format!(
                "unknown map type {other:?} (expected satellite, roadmap or terrain)"
            ))),
        }
    }
}

/// How many cells a raster axis gets for a given span.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgePolicy {
    /// `floor(span / step) + 1`: keep stepping until the far corner is inside a footprint.
    CoverEdge,
    /// `max(1, floor(span / step))`: only whole steps that fit inside the span.
    /// A strip narrower than one step along the far edges is left out.
    #[default]
    Truncate,
}

/// Which UTM distances define the raster spans.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpanMeasure {
    /// Easting and northing differences between the top-left and bottom-right corners.
    Corners,
    /// Easting difference top-left to bottom-right; northing difference down
    /// the west edge (top-left to bottom-left). Away from the central meridian
    /// grid convergence tilts parallels, so this northing span is shorter.
    #[default]
    WestEdge,
}

/// Raster stepping convention. The default (`WestEdge`, `Truncate`) gives
/// 1806 captures for the Agricenter box at 120 m, the reference count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RasterOptions {
    pub edge: EdgePolicy,
    pub span: SpanMeasure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MissionKind {
    Single { center: GeoPoint, agl: f64 },
    List { points: Vec<(GeoPoint, f64)> },
    Raster { bbox: GeoBBox, agl: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionSpec {
    pub kind: MissionKind,
    pub camera: CameraSpec,
    pub overlap: f64,
    pub map_type: MapType,
    #[serde(default)]
    pub raster: RasterOptions,
}

impl MissionSpec {
    pub fn new(kind: MissionKind, camera: CameraSpec) -> Self {
        MissionSpec {
            kind,
            camera,
            overlap: 0.0,
            map_type: MapType::Satellite,
            raster: RasterOptions::default(),
        }
    }

    pub fn with_overlap(mut self, overlap: f64) -> Self {
        self.overlap = overlap;
        self
    }

    pub fn with_map_type(mut self, map_type: MapType) -> Self {
        self.map_type = map_type;
        self
    }

    pub fn with_raster_options(mut self, raster: RasterOptions) -> Self {
        self.raster = raster;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::domain(format!(
                "overlap {} must lie in [0, 1)",
                self.overlap
            )));
        }
        CameraSpec::new(
            self.camera.fov_diag,
            self.camera.aspect_w,
            self.camera.aspect_h,
        )?;
        if let MissionKind::List { points } = &self.kind {
            if points.is_empty() {
                return Err(Error::domain("point list is empty"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub row: u32,
    pub col: u32,
    pub center: GeoPoint,
    pub zoom: u8,
    pub res_x: u32,
    pub res_y: u32,
    pub agl: f64,
    /// Lattice position, for raster plans.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub utm: Option<UtmCoord>,
}

impl Waypoint {
    pub fn zoom_spec(&self) -> ZoomSpec {
        ZoomSpec {
            zoom: self.zoom,
            res_x: self.res_x,
            res_y: self.res_y,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterLayout {
    pub footprint: Footprint,
    pub step_x_m: f64,
    pub step_y_m: f64,
    pub span_e_m: f64,
    pub span_n_m: f64,
    pub origin: UtmCoord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionPlan {
    pub spec: MissionSpec,
    pub waypoints: Vec<Waypoint>,
    pub n_rows: u32,
    pub n_cols: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub raster: Option<RasterLayout>,
}

/// Zoom and resolution for one nadir capture at `center` from `agl` meters.
pub fn capture_zoom(center: GeoPoint, agl: f64, cam: &CameraSpec) -> Result<ZoomSpec> {
    let fp = footprint_dims(agl, cam)?;
    let bbox = crate::geodesy::bbox_from_meters(center, &fp)?;
    zoom_from_bbox(&bbox, MAX_RESOLUTION)
}

fn clamp_zoom_to_map(z: ZoomSpec, map_type: MapType) -> Result<ZoomSpec> {
    if z.zoom > map_type.max_zoom() {
        return Err(Error::domain(format!(
            "zoom {} exceeds the {} map type maximum of {}",
            z.zoom,
            map_type,
            map_type.max_zoom()
        )));
    }
    Ok(z)
}

fn waypoint(row: u32, col: u32, center: GeoPoint, agl: f64, z: ZoomSpec) -> Waypoint {
    Waypoint {
        row,
        col,
        center,
        zoom: z.zoom,
        res_x: z.res_x,
        res_y: z.res_y,
        agl,
        utm: None,
    }
}

pub fn plan_single(center: GeoPoint, agl: f64, cam: &CameraSpec) -> Result<MissionPlan> {
    plan(&MissionSpec::new(MissionKind::Single { center, agl }, *cam))
}

pub fn plan_list(points: &[(GeoPoint, f64)], cam: &CameraSpec) -> Result<MissionPlan> {
    plan(&MissionSpec::new(
        MissionKind::List {
            points: points.to_vec(),
        },
        *cam,
    ))
}

pub fn plan_raster(spec: &MissionSpec) -> Result<MissionPlan> {
    plan_raster_with(spec, ExecMode::default())
}

pub fn plan(spec: &MissionSpec) -> Result<MissionPlan> {
    plan_with(spec, ExecMode::default())
}

pub fn plan_with(spec: &MissionSpec, mode: ExecMode) -> Result<MissionPlan> {
    spec.validate()?;
    match &spec.kind {
        MissionKind::Single { center, agl } => {
            let z = clamp_zoom_to_map(capture_zoom(*center, *agl, &spec.camera)?, spec.map_type)?;
            Ok(MissionPlan {
                spec: spec.clone(),
                waypoints: vec![waypoint(0, 0, *center, *agl, z)],
                n_rows: 1,
                n_cols: 1,
                raster: None,
            })
        }
        MissionKind::List { points } => {
            let waypoints = points
                .iter()
                .enumerate()
                .map(|(i, (p, agl))| {
                    let z =
                        clamp_zoom_to_map(capture_zoom(*p, *agl, &spec.camera)?, spec.map_type)?;
                    Ok(waypoint(i as u32, 0, *p, *agl, z))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MissionPlan {
                spec: spec.clone(),
                n_rows: waypoints.len() as u32,
                n_cols: 1,
                waypoints,
                raster: None,
            })
        }
        MissionKind::Raster { .. } => plan_raster_with(spec, mode),
    }
}

fn axis_cells(span: f64, step: f64, edge: EdgePolicy) -> u32 {
    let fitted = if span > 0.0 {
        (span / step).floor() as u32
    } else {
        0
    };
    match edge {
        EdgePolicy::CoverEdge => fitted + 1,
        EdgePolicy::Truncate => fitted.max(1),
    }
}

pub fn plan_raster_with(spec: &MissionSpec, mode: ExecMode) -> Result<MissionPlan> {
    spec.validate()?;
    let MissionKind::Raster { bbox, agl } = &spec.kind else {
        return Err(Error::domain("raster planning needs a raster mission"));
    };
    let bbox = GeoBBox::new(bbox.top_left, bbox.bottom_right)?;
    let agl = *agl;

    let tl = latlon_to_utm(bbox.top_left, None)?;
    let pin = |p: GeoPoint| latlon_to_utm_in(p, Some(tl.zone), tl.hemisphere);
    let br = pin(bbox.bottom_right)?;
    let span_e = br.easting - tl.easting;
    let span_n = match spec.raster.span {
        SpanMeasure::Corners => tl.northing - br.northing,
        SpanMeasure::WestEdge => {
            let bl = pin(GeoPoint::new(bbox.bottom_right.lat, bbox.top_left.lon)?)?;
            tl.northing - bl.northing
        }
    };

    let footprint = footprint_dims(agl, &spec.camera)?;
    let step_x = footprint.width_m * (1.0 - spec.overlap);
    let step_y = footprint.height_m * (1.0 - spec.overlap);
    let n_cols = axis_cells(span_e, step_x, spec.raster.edge);
    let n_rows = axis_cells(span_n, step_y, spec.raster.edge);

    let z = clamp_zoom_to_map(
        capture_zoom(bbox.center(), agl, &spec.camera)?,
        spec.map_type,
    )?;

    let n = n_rows as usize * n_cols as usize;
    let cells = exec::map_range(n, mode, |i| {
        let row = (i / n_cols as usize) as u32;
        let col = (i % n_cols as usize) as u32;
        let utm = UtmCoord {
            easting: tl.easting + col as f64 * step_x,
            northing: tl.northing - row as f64 * step_y,
            ..tl
        };
        utm_to_latlon(utm).map(|center| Waypoint {
            utm: Some(utm),
            ..waypoint(row, col, center, agl, z)
        })
    });
    let waypoints = cells.into_iter().collect::<Result<Vec<_>>>()?;

    Ok(MissionPlan {
        spec: spec.clone(),
        waypoints,
        n_rows,
        n_cols,
        raster: Some(RasterLayout {
            footprint,
            step_x_m: step_x,
            step_y_m: step_y,
            span_e_m: span_e,
            span_n_m: span_n,
            origin: tl,
        }),
    })
}

/// Parsed form of the `coords` argument.
#[derive(Clone, Debug, PartialEq)]
pub enum Coords {
    Single { center: GeoPoint, agl: f64 },
    Raster { bbox: GeoBBox, agl: f64 },
    File(PathBuf),
}

pub const COORDS_GRAMMAR: &str = "expected \"{lat}_{lon}_{agl}\", \
\"{latTL}_{lonTL}_{latBR}_{lonBR}_{agl}\", or a path to a file of `lat lon agl` lines";

fn parse_number(s: &str, what: &str, line: Option<usize>) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("invalid {what} {s:?}")))
}

fn parse_agl(s: &str, line: Option<usize>) -> Result<f64> {
    let agl = parse_number(s, "altitude", line)?;
    if agl <= 0.0 {
        return Err(Error::parse(
            line,
            format!("altitude must be positive, got {agl}"),
        ));
    }
    Ok(agl)
}

fn point(lat: f64, lon: f64, line: Option<usize>) -> Result<GeoPoint> {
    GeoPoint::new(lat, lon).map_err(|e| Error::parse(line, e.to_string()))
}

impl Coords {
    /// Parses a coordinate string only; never touches the filesystem.
    pub fn parse_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split('_').collect();
        let num = |i: usize, what: &str| parse_number(parts[i], what, None);
        match parts.len() {
            3 => Ok(Coords::Single {
                center: point(num(0, "latitude")?, num(1, "longitude")?, None)?,
                agl: parse_agl(parts[2], None)?,
            }),
            5 => {
                let tl = point(
                    num(0, "top-left latitude")?,
                    num(1, "top-left longitude")?,
                    None,
                )?;
                let br = point(
                    num(2, "bottom-right latitude")?,
                    num(3, "bottom-right longitude")?,
                    None,
                )?;
                Ok(Coords::Raster {
                    bbox: GeoBBox::new(tl, br).map_err(|e| Error::parse(None, e.to_string()))?,
                    agl: parse_agl(parts[4], None)?,
                })
            }
            n => Err(Error::parse(
                None,
                format!("coordinate string {s:?} has {n} field(s); {COORDS_GRAMMAR}"),
            )),
        }
    }

    /// Resolves a `coords` argument: an existing file path, or a coordinate string.
    pub fn parse(s: &str) -> Result<Self> {
        let as_path = Path::new(s);
        let is_file = as_path.is_file();
        match (is_file, Coords::parse_str(s)) {
            (true, Ok(_)) => Err(Error::Config(format!(
                "coords {s:?} is both an existing file and a valid coordinate string"
            ))),
            (true, Err(_)) => Ok(Coords::File(as_path.to_path_buf())),
            (false, parsed) => parsed,
        }
    }

    /// Center and altitude for a single capture: a raster's top-left corner,
    /// or the first line of a file.
    pub fn single_target(&self) -> Result<(GeoPoint, f64)> {
        match self {
            Coords::Single { center, agl } => Ok((*center, *agl)),
            Coords::Raster { bbox, agl } => Ok((bbox.top_left, *agl)),
            Coords::File(path) => read_coords_file(path)?.into_iter().next().ok_or_else(|| {
                Error::parse(None, format!("{} has no coordinates", path.display()))
            }),
        }
    }

    pub fn list_targets(&self) -> Result<Vec<(GeoPoint, f64)>> {
        match self {
            Coords::File(path) => read_coords_file(path),
            Coords::Single { center, agl } => Ok(vec![(*center, *agl)]),
            Coords::Raster { .. } => Err(Error::Config(
                "a point list needs a coordinates file or a single-point string".into(),
            )),
        }
    }
}

pub fn read_coords_file(path: &Path) -> Result<Vec<(GeoPoint, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_coords_text(&text)
}

/// Parses whitespace-separated `lat lon agl` lines. Blank lines are skipped.
pub fn parse_coords_text(text: &str) -> Result<Vec<(GeoPoint, f64)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = Some(i + 1);
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::parse(
                line,
                format!("expected `lat lon agl`, found {} field(s)", fields.len()),
            ));
        }
        let lat = parse_number(fields[0], "latitude", line)?;
        let lon = parse_number(fields[1], "longitude", line)?;
        out.push((point(lat, lon, line)?, parse_agl(fields[2], line)?));
    }
    if out.is_empty() {
        return Err(Error::parse(None, "coordinates file is empty"));
    }
    Ok(out)
}
