//! Image acquisition for one capture: a static-map HTTP client and an
//! offline procedural mock behind the same [`ImageProvider`] trait.

mod http;
mod mock;
mod url;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geomath::{GeoPoint, MAX_RESOLUTION};
use crate::imaging::Image;
use crate::mission::{MapType, Waypoint};

pub use http::{Backoff, HttpProvider, HttpResponse, Transport, TransportFailure, UreqTransport};
pub use mock::{mock_render, mock_render_with, render_region, MockProvider, MockStyle};
pub use url::{build_url, DEFAULT_ENDPOINT, HIDE_LABELS_STYLE};

/// Environment variable consulted for the API key.
pub const API_KEY_ENV: &str = "UAVSIM_API_KEY";
/// Secrets file consulted last for the API key.
pub const API_KEY_FILE: &str = ".uavsim_api_key";

/// Everything a provider needs for one image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureSpec {
    pub center: GeoPoint,
    pub zoom: u8,
    pub res_x: u32,
    pub res_y: u32,
    pub map_type: MapType,
    pub hide_labels: bool,
}

impl CaptureSpec {
    pub fn for_waypoint(w: &Waypoint, map_type: MapType) -> Self {
        CaptureSpec {
            center: w.center,
            zoom: w.zoom,
            res_x: w.res_x,
            res_y: w.res_y,
            map_type,
            hide_labels: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for r in [self.res_x, self.res_y] {
            if r == 0 || r > MAX_RESOLUTION {
                return Err(Error::domain(format!(
                    "requested size {}x{} outside 1..={MAX_RESOLUTION}",
                    self.res_x, self.res_y
                )));
            }
        }
        if self.zoom > self.map_type.max_zoom() {
            return Err(Error::domain(format!(
                "zoom {} above the {} maximum {}",
                self.zoom,
                self.map_type,
                self.map_type.max_zoom()
            )));
        }
        GeoPoint::new(self.center.lat, self.center.lon)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProviderResult {
    pub image: Image,
    pub content_type: String,
    pub attempts: u32,
}

pub trait ImageProvider: Send + Sync {
    /// Acquire one image, retrying transient failures up to `retry` times.
    fn fetch(&self, spec: &CaptureSpec, retry: u32) -> Result<ProviderResult>;
}

/// API key that never shows up in logs or serialized config.
#[derive(Clone, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Result<Self> {
        let key = key.into().trim().to_string();
        if key.is_empty() {
            return Err(Error::Config("API key is empty".into()));
        }
        Ok(ApiKey(key))
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    /// Explicit value, then the environment value, then the secrets file.
    pub fn resolve(
        explicit: Option<&str>,
        env_value: Option<&str>,
        secrets_file: Option<&Path>,
    ) -> Result<Self> {
        if let Some(k) = explicit.filter(|k| !k.trim().is_empty()) {
            return ApiKey::new(k);
        }
        if let Some(k) = env_value.filter(|k| !k.trim().is_empty()) {
            return ApiKey::new(k);
        }
        if let Some(path) = secrets_file.filter(|p| p.is_file()) {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            if let Some(line) = text.lines().map(str::trim).find(|l| !l.is_empty()) {
                return ApiKey::new(line);
            }
        }
        Err(Error::Config(format!(
            "no API key: pass one explicitly, set {API_KEY_ENV}, or write it to {API_KEY_FILE}"
        )))
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(<redacted>)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join(API_KEY_FILE);
        std::fs::write(&file, "\nfrom-file\n").unwrap();
        let k = ApiKey::resolve(Some("cli"), Some("env"), Some(&file)).unwrap();
        assert_eq!(k.expose(), "cli");
        let k = ApiKey::resolve(None, Some("env"), Some(&file)).unwrap();
        assert_eq!(k.expose(), "env");
        let k = ApiKey::resolve(Some("  "), None, Some(&file)).unwrap();
        assert_eq!(k.expose(), "from-file");
        assert!(ApiKey::resolve(None, None, Some(&dir.path().join("missing"))).is_err());
    }

    #[test]
    fn key_debug_is_redacted() {
        let k = ApiKey::new("super-secret").unwrap();
        assert!(!format!("{k:?}").contains("super"));
    }

    #[test]
    fn capture_spec_caps_resolution() {
        let spec = CaptureSpec {
            center: GeoPoint::new(35.16, -89.90).unwrap(),
            zoom: 18,
            res_x: 641,
            res_y: 640,
            map_type: MapType::Satellite,
            hide_labels: false,
        };
        assert!(spec.validate().is_err());
        assert!(CaptureSpec { res_x: 640, ..spec }.validate().is_ok());
        assert!(CaptureSpec {
            res_x: 640,
            zoom: 23,
            ..spec
        }
        .validate()
        .is_err());
    }
}
