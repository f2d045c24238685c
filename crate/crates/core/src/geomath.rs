//! Camera footprint geometry and Web Mercator world-pixel / zoom math.
//!
//! World coordinates live on the 256x256 zoom-0 tile with the origin in the
//! north-west corner: x grows eastward, y grows southward. At zoom `z` one
//! requested image pixel spans `2^-z` world pixels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixels per radian on the zoom-0 tile.
pub const PIXELS_PER_RADIAN: f64 = 256.0 / (2.0 * PI);
/// Degrees to radians.
pub const DEG_TO_RAD: f64 = PI / 180.0;
/// Equatorial circumference of the spherical earth, meters.
pub const EARTH_CIRCUMFERENCE_M: f64 = 40_075_017.0;
/// Ground meters per zoom-0 pixel at the equator.
pub const BASE_METERS_PER_PIXEL: f64 = EARTH_CIRCUMFERENCE_M / 256.0;
/// Largest latitude accepted as Mercator-projectable.
pub const MAX_MERCATOR_LAT: f64 = 85.051_128_78;
pub const WORLD_SIZE: f64 = 256.0;
pub const WORLD_CENTER: f64 = 128.0;
pub const MIN_ZOOM: u8 = 0;
pub const MAX_ZOOM: u8 = 22;
/// Largest image side the static map service will return.
pub const MAX_RESOLUTION: u32 = 640;

// Slack for floating-point noise when comparing world-pixel extents.
const WORLD_EPS: f64 = 1e-6;
const RES_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    /// Validates latitude and normalizes longitude from `[-180, 360)` into `[-180, 180)`.
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(Error::domain("coordinates must be finite"));
        }
        if lat.abs() > MAX_MERCATOR_LAT {
            return Err(Error::domain(format!(
                "latitude {lat} beyond the Mercator limit ±{MAX_MERCATOR_LAT}"
            )));
        }
        if !(-180.0..360.0).contains(&lon) {
            return Err(Error::domain(format!(
                "longitude {lon} outside the accepted range [-180, 360)"
            )));
        }
        Ok(GeoPoint {
            lat,
            lon: normalize_lon(lon),
        })
    }

    /// Corner constructor that keeps `lon == 180` for the eastern world edge.
    pub(crate) fn edge(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }
}

fn normalize_lon(lon: f64) -> f64 {
    if lon >= 180.0 {
        lon - 360.0
    } else {
        lon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MercatorPoint {
    pub x: f64,
    pub y: f64,
}

impl MercatorPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let inside = |v: f64| (-WORLD_EPS..=WORLD_SIZE + WORLD_EPS).contains(&v);
        if !(inside(x) && inside(y)) {
            return Err(Error::OutOfWorld { x, y });
        }
        Ok(MercatorPoint {
            x: x.clamp(0.0, WORLD_SIZE),
            y: y.clamp(0.0, WORLD_SIZE),
        })
    }
}

/// Nadir camera described by its diagonal field of view and aspect ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub fov_diag: f64,
    pub aspect_w: u32,
    pub aspect_h: u32,
}

impl CameraSpec {
    pub fn new(fov_diag: f64, aspect_w: u32, aspect_h: u32) -> Result<Self> {
        if !(fov_diag > 0.0 && fov_diag < 180.0) {
            return Err(Error::domain(format!(
                "diagonal field of view {fov_diag} must lie strictly between 0 and 180 degrees"
            )));
        }
        if aspect_w == 0 || aspect_h == 0 {
            return Err(Error::domain("aspect ratio components must be positive"));
        }
        Ok(CameraSpec {
            fov_diag,
            aspect_w,
            aspect_h,
        })
    }
}

impl Default for CameraSpec {
    fn default() -> Self {
        CameraSpec {
            fov_diag: 78.8,
            aspect_w: 4,
            aspect_h: 3,
        }
    }
}

/// Ground rectangle seen by the camera. Width is east-west, height north-south.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub diag_m: f64,
    pub width_m: f64,
    pub height_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZoomSpec {
    pub zoom: u8,
    pub res_x: u32,
    pub res_y: u32,
}

impl ZoomSpec {
    pub fn new(zoom: u8, res_x: u32, res_y: u32) -> Result<Self> {
        check_zoom(zoom)?;
        for r in [res_x, res_y] {
            if r == 0 || r > MAX_RESOLUTION {
                return Err(Error::domain(format!(
                    "resolution {res_x}x{res_y} outside 1..={MAX_RESOLUTION}"
                )));
            }
        }
        Ok(ZoomSpec { zoom, res_x, res_y })
    }
}

/// Axis-aligned lat/lon box. No antimeridian crossing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoBBox {
    pub top_left: GeoPoint,
    pub bottom_right: GeoPoint,
}

impl GeoBBox {
    pub fn new(top_left: GeoPoint, bottom_right: GeoPoint) -> Result<Self> {
        if top_left.lat.is_nan() || top_left.lat <= bottom_right.lat {
            return Err(Error::domain(format!(
                "bounding box top latitude {} must exceed bottom latitude {}",
                top_left.lat, bottom_right.lat
            )));
        }
        if top_left.lon.is_nan() || top_left.lon >= bottom_right.lon {
            return Err(Error::domain(format!(
                "bounding box left longitude {} must be west of right longitude {}",
                top_left.lon, bottom_right.lon
            )));
        }
        Ok(GeoBBox {
            top_left,
            bottom_right,
        })
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint {
            lat: 0.5 * (self.top_left.lat + self.bottom_right.lat),
            lon: 0.5 * (self.top_left.lon + self.bottom_right.lon),
        }
    }
}

fn check_zoom(zoom: u8) -> Result<()> {
    if zoom > MAX_ZOOM {
        return Err(Error::domain(format!(
            "zoom {zoom} outside {MIN_ZOOM}..={MAX_ZOOM}"
        )));
    }
    Ok(())
}

/// Ground footprint of a nadir camera at `agl` meters.
pub fn footprint_dims(agl: f64, cam: &CameraSpec) -> Result<Footprint> {
    if !(agl.is_finite() && agl > 0.0) {
        return Err(Error::domain(format!(
            "altitude above ground must be positive, got {agl}"
        )));
    }
    let cam = CameraSpec::new(cam.fov_diag, cam.aspect_w, cam.aspect_h)?;
    let diag_m = 2.0 * agl * (DEG_TO_RAD * cam.fov_diag / 2.0).tan();
    let theta = (cam.aspect_w as f64 / cam.aspect_h as f64).atan();
    Ok(Footprint {
        diag_m,
        width_m: diag_m * theta.sin(),
        height_m: diag_m * theta.cos(),
    })
}

pub fn latlon_to_world(p: GeoPoint) -> Result<MercatorPoint> {
    if p.lat.abs() > MAX_MERCATOR_LAT {
        return Err(Error::domain(format!(
            "latitude {} beyond the Mercator limit",
            p.lat
        )));
    }
    let s = (DEG_TO_RAD * p.lat).sin();
    let x = WORLD_CENTER + PIXELS_PER_RADIAN * DEG_TO_RAD * p.lon;
    let y = WORLD_CENTER - PIXELS_PER_RADIAN / 2.0 * ((1.0 + s) / (1.0 - s)).ln();
    MercatorPoint::new(x, y)
}

/// Inverse projection without longitude normalization; `x == 256` yields `lon == 180`.
fn world_to_latlon_raw(x: f64, y: f64) -> (f64, f64) {
    let lon = (x - WORLD_CENTER) / (PIXELS_PER_RADIAN * DEG_TO_RAD);
    let lat = ((WORLD_CENTER - y) / PIXELS_PER_RADIAN).tanh().asin() / DEG_TO_RAD;
    (lat, lon)
}

pub fn world_to_latlon(m: MercatorPoint) -> GeoPoint {
    let (lat, lon) = world_to_latlon_raw(m.x, m.y);
    GeoPoint {
        lat: lat.clamp(-MAX_MERCATOR_LAT, MAX_MERCATOR_LAT),
        lon: normalize_lon(lon),
    }
}

/// Latitude of a world-pixel row, used by renderers that walk rows directly.
pub fn world_y_to_lat(y: f64) -> f64 {
    world_to_latlon_raw(WORLD_CENTER, y).0
}

/// World pixels covered by one image pixel at `zoom`: `2^-zoom`.
pub fn pixel_size(zoom: u8) -> Result<f64> {
    check_zoom(zoom)?;
    Ok(1.0 / (1u64 << zoom) as f64)
}

pub fn meters_per_pixel(zoom: u8, lat: f64) -> Result<f64> {
    check_zoom(zoom)?;
    if lat.abs() > MAX_MERCATOR_LAT {
        return Err(Error::domain(format!(
            "latitude {lat} beyond the Mercator limit"
        )));
    }
    Ok(BASE_METERS_PER_PIXEL * (DEG_TO_RAD * lat).cos() / (1u64 << zoom) as f64)
}

/// Ground meters covered by one 256-pixel tile side at the equator.
pub fn meters_per_tile(zoom: u8) -> Result<f64> {
    check_zoom(zoom)?;
    Ok(EARTH_CIRCUMFERENCE_M / (1u64 << zoom) as f64)
}

/// One row of the zoom-level reference table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZoomLevelInfo {
    pub zoom: u8,
    pub tiles: u64,
    pub tile_width_deg: f64,
    pub meters_per_pixel: f64,
    pub meters_per_tile: f64,
}

/// Reference values for every supported zoom level, evaluated at the equator.
pub fn zoom_guide() -> Vec<ZoomLevelInfo> {
    (MIN_ZOOM..=MAX_ZOOM)
        .map(|z| {
            let n = 1u64 << z;
            ZoomLevelInfo {
                zoom: z,
                tiles: n * n,
                tile_width_deg: 360.0 / n as f64,
                meters_per_pixel: BASE_METERS_PER_PIXEL / n as f64,
                meters_per_tile: EARTH_CIRCUMFERENCE_M / n as f64,
            }
        })
        .collect()
}

/// Bounding box shown by an image of `z.res_x` x `z.res_y` pixels centered on `center`.
pub fn bbox_from_center_zoom(center: GeoPoint, z: ZoomSpec) -> Result<GeoBBox> {
    if z.res_x == 0 || z.res_y == 0 {
        return Err(Error::domain("resolution must be at least 1x1"));
    }
    let c = latlon_to_world(center)?;
    let px = pixel_size(z.zoom)?;
    let half_w = z.res_x as f64 * px / 2.0;
    let half_h = z.res_y as f64 * px / 2.0;
    let (x0, y0) = (c.x - half_w, c.y - half_h);
    let (x1, y1) = (c.x + half_w, c.y + half_h);
    for (x, y) in [(x0, y0), (x1, y1)] {
        if !(-WORLD_EPS..=WORLD_SIZE + WORLD_EPS).contains(&x)
            || !(-WORLD_EPS..=WORLD_SIZE + WORLD_EPS).contains(&y)
        {
            return Err(Error::OutOfWorld { x, y });
        }
    }
    let clamp = |v: f64| v.clamp(0.0, WORLD_SIZE);
    let (tl_lat, tl_lon) = world_to_latlon_raw(clamp(x0), clamp(y0));
    let (br_lat, br_lon) = world_to_latlon_raw(clamp(x1), clamp(y1));
    GeoBBox::new(
        GeoPoint::edge(tl_lat, tl_lon),
        GeoPoint::edge(br_lat, br_lon),
    )
}

/// World-pixel width and height of a bounding box.
pub fn bbox_world_extent(bbox: &GeoBBox) -> Result<(f64, f64)> {
    let tl = latlon_to_world(bbox.top_left)?;
    let br = latlon_to_world(GeoPoint::edge(bbox.bottom_right.lat, bbox.bottom_right.lon))?;
    Ok((br.x - tl.x, br.y - tl.y))
}

fn round_half_up(v: f64) -> u32 {
    (v + 0.5).floor() as u32
}

/// Highest zoom at which the box still fits in `max_res` pixels, plus the matching resolution.
pub fn zoom_from_bbox(bbox: &GeoBBox, max_res: u32) -> Result<ZoomSpec> {
    if max_res == 0 || max_res > MAX_RESOLUTION {
        return Err(Error::domain(format!(
            "maximum resolution {max_res} outside 1..={MAX_RESOLUTION}"
        )));
    }
    let bbox = GeoBBox::new(bbox.top_left, bbox.bottom_right)?;
    let (dx, dy) = bbox_world_extent(&bbox)?;
    let span = dx.max(dy);
    if span.is_nan() || span <= 0.0 {
        return Err(Error::domain("bounding box has no extent"));
    }
    let cap = max_res as f64;
    let fits = |z: u8| span * (1u64 << z) as f64 <= cap + RES_EPS;

    let guess = (-(span / cap).log2()).floor();
    let mut zoom = guess.clamp(MIN_ZOOM as f64, MAX_ZOOM as f64) as u8;
    // log2 of a computed extent can land one step off an exact power of two.
    while zoom < MAX_ZOOM && fits(zoom + 1) {
        zoom += 1;
    }
    while zoom > MIN_ZOOM && !fits(zoom) {
        zoom -= 1;
    }

    let scale = (1u64 << zoom) as f64;
    let res = |d: f64| round_half_up(d * scale).clamp(1, max_res);
    Ok(ZoomSpec {
        zoom,
        res_x: res(dx),
        res_y: res(dy),
    })
}
