//! Layered configuration: command line over `config.json` over built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uavsim::dataset::{DEFAULT_ENTROPY_THRESHOLD, DEFAULT_SEED};
use uavsim::mission::{EdgePolicy, SpanMeasure};
use uavsim::{Error, MapType, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// Google Static Maps over HTTPS; needs an API key.
    #[default]
    Http,
    /// Offline procedural imagery.
    Mock,
}

/// Every setting, each optional. One of these comes from the command line and
/// one from the config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartialConfig {
    pub coords: Option<String>,
    pub fov: Option<f64>,
    pub aspect_ratio: Option<(u32, u32)>,
    pub map_type: Option<MapType>,
    pub data_dir: Option<PathBuf>,
    pub mission_name: Option<String>,
    pub vmargin: Option<f64>,
    pub img_size: Option<(u32, u32, u8)>,
    pub overlap: Option<f64>,
    pub seed: Option<u64>,
    pub retry: Option<u32>,
    pub api_key: Option<String>,
    pub concurrency: Option<usize>,
    pub entropy_threshold: Option<f64>,
    pub split: Option<(f64, f64, f64)>,
    pub provider: Option<ProviderKind>,
    pub hide_labels: Option<bool>,
    pub mock_density: Option<f64>,
    pub edge: Option<EdgePolicy>,
    pub span: Option<SpanMeasure>,
}

const KNOWN_KEYS: &[&str] = &[
    "coords",
    "fov",
    "aspect_ratio",
    "map_type",
    "data_dir",
    "mission_name",
    "vmargin",
    "img_size",
    "overlap",
    "seed",
    "retry",
    "api_key",
    "concurrency",
    "entropy_threshold",
    "split",
    "provider",
    "hide_labels",
    "mock_density",
    "edge",
    "span",
];

impl PartialConfig {
    /// Parses a `config.json` body, rejecting keys this tool does not know.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("config file must hold a JSON object".into()))?;
        let unknown: Vec<&str> = obj
            .keys()
            .map(String::as_str)
            .filter(|k| !KNOWN_KEYS.contains(k))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Config(format!(
                "unknown config key(s): {}",
                unknown.join(", ")
            )));
        }
        serde_json::from_value(value).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub coords: Option<String>,
    pub fov: f64,
    pub aspect_ratio: (u32, u32),
    pub map_type: MapType,
    pub data_dir: PathBuf,
    pub mission_name: Option<String>,
    pub vmargin: f64,
    pub img_size: Option<(u32, u32, u8)>,
    pub overlap: f64,
    pub seed: u64,
    pub retry: u32,
    #[serde(serialize_with = "redact")]
    pub api_key: Option<String>,
    pub concurrency: usize,
    pub entropy_threshold: f64,
    pub split: (f64, f64, f64),
    pub provider: ProviderKind,
    pub hide_labels: bool,
    pub mock_density: f64,
    pub edge: EdgePolicy,
    pub span: SpanMeasure,
}

fn redact<S: serde::Serializer>(
    key: &Option<String>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match key {
        Some(_) => s.serialize_str("<redacted>"),
        None => s.serialize_none(),
    }
}

impl Default for Config {
    fn default() -> Self {
        Config {
            coords: None,
            fov: 78.8,
            aspect_ratio: (4, 3),
            map_type: MapType::Satellite,
            data_dir: PathBuf::from("datasets"),
            mission_name: None,
            vmargin: 0.2,
            img_size: None,
            overlap: 0.0,
            seed: DEFAULT_SEED,
            retry: 3,
            api_key: None,
            concurrency: 4,
            entropy_threshold: DEFAULT_ENTROPY_THRESHOLD,
            split: (0.8, 0.1, 0.1),
            provider: ProviderKind::Http,
            hide_labels: true,
            mock_density: 0.6,
            edge: EdgePolicy::default(),
            span: SpanMeasure::default(),
        }
    }
}

/// Field-wise precedence: `cli`, then `file`, then `defaults`.
pub fn resolve_config(cli: &PartialConfig, file: &PartialConfig, defaults: &Config) -> Config {
    macro_rules! pick {
        ($f:ident) => {
            cli.$f
                .clone()
                .or_else(|| file.$f.clone())
                .unwrap_or_else(|| defaults.$f.clone())
        };
        ($f:ident, opt) => {
            cli.$f
                .clone()
                .or_else(|| file.$f.clone())
                .or_else(|| defaults.$f.clone())
        };
    }
    Config {
        coords: pick!(coords, opt),
        fov: pick!(fov),
        aspect_ratio: pick!(aspect_ratio),
        map_type: pick!(map_type),
        data_dir: pick!(data_dir),
        mission_name: pick!(mission_name, opt),
        vmargin: pick!(vmargin),
        img_size: pick!(img_size, opt),
        overlap: pick!(overlap),
        seed: pick!(seed),
        retry: pick!(retry),
        api_key: pick!(api_key, opt),
        concurrency: pick!(concurrency),
        entropy_threshold: pick!(entropy_threshold),
        split: pick!(split),
        provider: pick!(provider),
        hide_labels: pick!(hide_labels),
        mock_density: pick!(mock_density),
        edge: pick!(edge),
        span: pick!(span),
    }
}

impl Config {
    /// Folder name for this mission: `mission_name`, else the coordinate
    /// string, else the coordinates file stem.
    pub fn mission(&self) -> Result<String> {
        if let Some(name) = &self.mission_name {
            return Ok(name.clone());
        }
        let coords = self.coords.as_deref().ok_or_else(|| missing("coords"))?;
        let path = Path::new(coords);
        let name = if path.is_file() {
            path.file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("mission")
                .to_string()
        } else {
            coords.trim().to_string()
        };
        Ok(name
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                    c
                } else {
                    '_'
                }
            })
            .collect())
    }

    pub fn coords(&self) -> Result<&str> {
        self.coords.as_deref().ok_or_else(|| missing("coords"))
    }
}

fn missing(what: &str) -> Error {
    Error::Parse {
        line: None,
        msg: format!("no {what} given; {}", uavsim::mission::COORDS_GRAMMAR),
    }
}
