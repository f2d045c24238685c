//! Metric geodesy: spherical point offsets and UTM on the WGS-84 ellipsoid.
//!
//! UTM uses Krüger's n-series to sixth order in both directions. The inverse
//! recovers geodetic latitude from the conformal one with Newton iteration on
//! `tan(lat)`, which converges to machine precision in a few steps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geomath::{
    Footprint, GeoBBox, GeoPoint, DEG_TO_RAD, EARTH_CIRCUMFERENCE_M, MAX_MERCATOR_LAT,
};

/// Radius of the spherical earth used for offsets, `C_e / 2π`.
pub const SPHERE_RADIUS_M: f64 = EARTH_CIRCUMFERENCE_M / (2.0 * PI);

const WGS84_A: f64 = 6_378_137.0;
const WGS84_F: f64 = 1.0 / 298.257_223_563;
const UTM_K0: f64 = 0.9996;
const UTM_FALSE_EASTING: f64 = 500_000.0;
const UTM_FALSE_NORTHING_SOUTH: f64 = 10_000_000.0;
/// UTM is only defined here for |lat| below this.
pub const UTM_MAX_LAT: f64 = 84.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    North,
    South,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtmCoord {
    pub easting: f64,
    pub northing: f64,
    pub zone: u8,
    pub hemisphere: Hemisphere,
}

/// Destination after moving `dist` meters from `(lat, lon)` (radians) along
/// the great circle with initial `bearing` (radians, clockwise from north).
fn great_circle_destination(lat: f64, lon: f64, bearing: f64, dist: f64) -> (f64, f64) {
    let d = dist / SPHERE_RADIUS_M;
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_d, cos_d) = d.sin_cos();
    let lat2 = (sin_lat * cos_d + cos_lat * sin_d * bearing.cos()).asin();
    let lon2 = lon + (bearing.sin() * sin_d * cos_lat).atan2(cos_d - sin_lat * lat2.sin());
    (lat2, lon2)
}

/// Moves `d_east` meters east, then `d_north` meters north, along great circles.
pub fn offset_point(origin: GeoPoint, d_east: f64, d_north: f64) -> Result<GeoPoint> {
    if !(d_east.is_finite() && d_north.is_finite()) {
        return Err(Error::domain("offsets must be finite"));
    }
    let (mut lat, mut lon) = (origin.lat * DEG_TO_RAD, origin.lon * DEG_TO_RAD);
    if d_east != 0.0 {
        let bearing = if d_east > 0.0 { PI / 2.0 } else { -PI / 2.0 };
        (lat, lon) = great_circle_destination(lat, lon, bearing, d_east.abs());
    }
    if d_north != 0.0 {
        let bearing = if d_north > 0.0 { 0.0 } else { PI };
        (lat, lon) = great_circle_destination(lat, lon, bearing, d_north.abs());
    }
    let lat_deg = lat / DEG_TO_RAD;
    if lat_deg.abs() > MAX_MERCATOR_LAT {
        return Err(Error::domain(format!(
            "offset destination latitude {lat_deg:.6} beyond the Mercator limit"
        )));
    }
    let lon_deg = (lon / DEG_TO_RAD + 180.0).rem_euclid(360.0) - 180.0;
    GeoPoint::new(lat_deg, lon_deg)
}

/// Lat/lon box of a footprint centered on `center`.
pub fn bbox_from_meters(center: GeoPoint, fp: &Footprint) -> Result<GeoBBox> {
    let tl = offset_point(center, -fp.width_m / 2.0, fp.height_m / 2.0)?;
    let br = offset_point(center, fp.width_m / 2.0, -fp.height_m / 2.0)?;
    GeoBBox::new(tl, br)
}

pub fn utm_zone_for_lon(lon: f64) -> u8 {
    let z = ((lon + 180.0) / 6.0).floor() as i64 + 1;
    z.clamp(1, 60) as u8
}

fn central_meridian(zone: u8) -> f64 {
    (zone as f64 * 6.0 - 183.0) * DEG_TO_RAD
}

struct Kruger {
    e: f64,
    a_rect: f64,
    alpha: [f64; 6],
    beta: [f64; 6],
}

impl Kruger {
    fn wgs84() -> Self {
        let f = WGS84_F;
        let n = f / (2.0 - f);
        let (n2, n3) = (n * n, n * n * n);
        let (n4, n5, n6) = (n3 * n, n3 * n2, n3 * n3);
        let a_rect = WGS84_A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
        let alpha = [
            n / 2.0 - 2.0 / 3.0 * n2 + 5.0 / 16.0 * n3 + 41.0 / 180.0 * n4 - 127.0 / 288.0 * n5
                + 7891.0 / 37800.0 * n6,
            13.0 / 48.0 * n2 - 3.0 / 5.0 * n3 + 557.0 / 1440.0 * n4 + 281.0 / 630.0 * n5
                - 1_983_433.0 / 1_935_360.0 * n6,
            61.0 / 240.0 * n3 - 103.0 / 140.0 * n4
                + 15061.0 / 26880.0 * n5
                + 167_603.0 / 181_440.0 * n6,
            49561.0 / 161_280.0 * n4 - 179.0 / 168.0 * n5 + 6_601_661.0 / 7_257_600.0 * n6,
            34729.0 / 80640.0 * n5 - 3_418_889.0 / 1_995_840.0 * n6,
            212_378_941.0 / 319_334_400.0 * n6,
        ];
        let beta = [
            n / 2.0 - 2.0 / 3.0 * n2 + 37.0 / 96.0 * n3 - 1.0 / 360.0 * n4 - 81.0 / 512.0 * n5
                + 96199.0 / 604_800.0 * n6,
            n2 / 48.0 + n3 / 15.0 - 437.0 / 1440.0 * n4 + 46.0 / 105.0 * n5
                - 1_118_711.0 / 3_870_720.0 * n6,
            17.0 / 480.0 * n3 - 37.0 / 840.0 * n4 - 209.0 / 4480.0 * n5 + 5569.0 / 90720.0 * n6,
            4397.0 / 161_280.0 * n4 - 11.0 / 504.0 * n5 - 830_251.0 / 7_257_600.0 * n6,
            4583.0 / 161_280.0 * n5 - 108_847.0 / 3_991_680.0 * n6,
            20_648_693.0 / 638_668_800.0 * n6,
        ];
        Kruger {
            e: (f * (2.0 - f)).sqrt(),
            a_rect,
            alpha,
            beta,
        }
    }

    /// tan(geodetic lat) -> tan(conformal lat).
    fn tau_prime(&self, tau: f64) -> f64 {
        let e = self.e;
        let sigma = (e * (e * tau / (1.0 + tau * tau).sqrt()).atanh()).sinh();
        tau * (1.0 + sigma * sigma).sqrt() - sigma * (1.0 + tau * tau).sqrt()
    }

    fn tau_from_prime(&self, tau_p: f64) -> f64 {
        let e2m = 1.0 - self.e * self.e;
        let mut tau = tau_p;
        for _ in 0..8 {
            let tp = self.tau_prime(tau);
            let d = (tau_p - tp) / (1.0 + tp * tp).sqrt() * (1.0 + e2m * tau * tau)
                / (e2m * (1.0 + tau * tau).sqrt());
            tau += d;
            if d.abs() <= 1e-15 * tau.abs().max(1.0) {
                break;
            }
        }
        tau
    }

    /// (lat, dlon) radians -> (xi, eta) normalized by k0 * A.
    fn forward(&self, lat: f64, dlon: f64) -> (f64, f64) {
        let tau_p = self.tau_prime(lat.tan());
        let (sin_l, cos_l) = dlon.sin_cos();
        let xi_p = tau_p.atan2(cos_l);
        let eta_p = (sin_l / (tau_p * tau_p + cos_l * cos_l).sqrt()).asinh();
        let mut xi = xi_p;
        let mut eta = eta_p;
        for (j, a) in self.alpha.iter().enumerate() {
            let k = 2.0 * (j + 1) as f64;
            xi += a * (k * xi_p).sin() * (k * eta_p).cosh();
            eta += a * (k * xi_p).cos() * (k * eta_p).sinh();
        }
        (xi, eta)
    }

    fn inverse(&self, xi: f64, eta: f64) -> (f64, f64) {
        let mut xi_p = xi;
        let mut eta_p = eta;
        for (j, b) in self.beta.iter().enumerate() {
            let k = 2.0 * (j + 1) as f64;
            xi_p -= b * (k * xi).sin() * (k * eta).cosh();
            eta_p -= b * (k * xi).cos() * (k * eta).sinh();
        }
        let sinh_eta = eta_p.sinh();
        let cos_xi = xi_p.cos();
        let tau_p = xi_p.sin() / (sinh_eta * sinh_eta + cos_xi * cos_xi).sqrt();
        let lat = self.tau_from_prime(tau_p).atan();
        let dlon = sinh_eta.atan2(cos_xi);
        (lat, dlon)
    }
}

fn kruger() -> &'static Kruger {
    use std::sync::OnceLock;
    static K: OnceLock<Kruger> = OnceLock::new();
    K.get_or_init(Kruger::wgs84)
}

/// Projects into UTM. `pinned_zone` forces a zone instead of the one the
/// longitude falls in; the hemisphere always follows the latitude.
pub fn latlon_to_utm(p: GeoPoint, pinned_zone: Option<u8>) -> Result<UtmCoord> {
    let hemisphere = if p.lat >= 0.0 {
        Hemisphere::North
    } else {
        Hemisphere::South
    };
    latlon_to_utm_in(p, pinned_zone, hemisphere)
}

/// Like [`latlon_to_utm`] but with the hemisphere's false northing pinned too,
/// so a lattice spanning the equator stays continuous.
pub fn latlon_to_utm_in(
    p: GeoPoint,
    pinned_zone: Option<u8>,
    hemisphere: Hemisphere,
) -> Result<UtmCoord> {
    if p.lat.is_nan() || p.lat.abs() >= UTM_MAX_LAT {
        return Err(Error::domain(format!(
            "latitude {} outside the UTM range ±{UTM_MAX_LAT}",
            p.lat
        )));
    }
    let zone = match pinned_zone {
        Some(z) if (1..=60).contains(&z) => z,
        Some(z) => return Err(Error::domain(format!("UTM zone {z} outside 1..=60"))),
        None => utm_zone_for_lon(p.lon),
    };
    let k = kruger();
    let mut dlon = p.lon * DEG_TO_RAD - central_meridian(zone);
    dlon = (dlon + PI).rem_euclid(2.0 * PI) - PI;
    let (xi, eta) = k.forward(p.lat * DEG_TO_RAD, dlon);
    let northing = UTM_K0 * k.a_rect * xi
        + match hemisphere {
            Hemisphere::North => 0.0,
            Hemisphere::South => UTM_FALSE_NORTHING_SOUTH,
        };
    Ok(UtmCoord {
        easting: UTM_FALSE_EASTING + UTM_K0 * k.a_rect * eta,
        northing,
        zone,
        hemisphere,
    })
}

pub fn utm_to_latlon(u: UtmCoord) -> Result<GeoPoint> {
    if !(1..=60).contains(&u.zone) {
        return Err(Error::domain(format!("UTM zone {} outside 1..=60", u.zone)));
    }
    if !(u.easting.is_finite() && u.northing.is_finite()) {
        return Err(Error::domain("UTM coordinates must be finite"));
    }
    let k = kruger();
    let n0 = match u.hemisphere {
        Hemisphere::North => 0.0,
        Hemisphere::South => UTM_FALSE_NORTHING_SOUTH,
    };
    let xi = (u.northing - n0) / (UTM_K0 * k.a_rect);
    let eta = (u.easting - UTM_FALSE_EASTING) / (UTM_K0 * k.a_rect);
    let (lat, dlon) = k.inverse(xi, eta);
    let lon = ((central_meridian(u.zone) + dlon) / DEG_TO_RAD + 180.0).rem_euclid(360.0) - 180.0;
    GeoPoint::new(lat / DEG_TO_RAD, lon)
}
