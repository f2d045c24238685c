//! Command-line front end: argument parsing, config layering and the
//! download/clean/stats commands.

pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use uavsim::dataset::{self, SplitFractions, MISSION_FILE, SPLIT_MANIFEST_FILE};
use uavsim::geomath::CameraSpec;
use uavsim::mission::{
    plan, Coords, EdgePolicy, MissionKind, MissionPlan, MissionSpec, RasterOptions, SpanMeasure,
};
use uavsim::pipeline::{capture_shape, run_mission, PipelineOptions};
use uavsim::provider::{
    ApiKey, HttpProvider, ImageProvider, MockProvider, MockStyle, API_KEY_ENV, API_KEY_FILE,
};
use uavsim::{Error, MapType, Result};

pub use config::{resolve_config, Config, PartialConfig, ProviderKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_AUTH: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "uavsim",
    version,
    about = "Virtual nadir-camera UAV for aerial image datasets"
)]
pub struct Cli {
    /// JSON config file; `./config.json` is used when present.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Only print warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capture one image at `lat_lon_agl`.
    DownloadSingle(DownloadArgs),
    /// Capture one image per `lat lon agl` line of a file.
    DownloadFromList(DownloadArgs),
    /// Capture a raster over `latTL_lonTL_latBR_lonBR_agl`.
    DownloadRaster(DownloadArgs),
    /// Filter a dataset by entropy and write the split manifest.
    Clean(CurateArgs),
    /// Write the entropy histogram of a dataset.
    Stats(CurateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Coordinate string or path to a coordinates file.
    #[arg(long)]
    pub coords: Option<String>,
    /// Diagonal field of view in degrees [default: 78.8].
    #[arg(long)]
    pub fov: Option<f64>,
    /// Aspect ratio as two integers, e.g. `4 3` [default: 4 3].
    #[arg(long, num_args = 2, value_names = ["W", "H"])]
    pub aspect_ratio: Option<Vec<u32>>,
    /// satellite, roadmap or terrain [default: satellite].
    #[arg(long)]
    pub map_type: Option<MapType>,
    /// Root folder of all datasets [default: datasets].
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Mission folder name [default: derived from --coords].
    #[arg(long)]
    pub mission_name: Option<String>,
    /// Share of image height cropped away, half at each edge [default: 0.2].
    #[arg(long)]
    pub vmargin: Option<f64>,
    /// Resize stored images to W H C (C is 1 or 3).
    #[arg(long, num_args = 3, value_names = ["W", "H", "C"])]
    pub img_size: Option<Vec<u32>>,
    /// Overlap between neighbouring raster images, in [0, 1) [default: 0].
    #[arg(long)]
    pub overlap: Option<f64>,
    /// Seed for the mock imagery and the dataset split [default: 2024].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Retries per image after a transient failure [default: 3].
    #[arg(long)]
    pub retry: Option<u32>,
    /// Static-maps API key (else $UAVSIM_API_KEY, else ./.uavsim_api_key).
    #[arg(long)]
    pub api_key: Option<String>,
    /// Downloads in flight at once [default: 4].
    #[arg(long)]
    pub concurrency: Option<usize>,
    /// Images below this many bits are discarded [default: 2.1].
    #[arg(long)]
    pub entropy_threshold: Option<f64>,
    /// Train, validation and test fractions [default: 0.8 0.1 0.1].
    #[arg(long, num_args = 3, value_names = ["TRAIN", "VAL", "TEST"])]
    pub split: Option<Vec<f64>>,
    /// Image source [default: http].
    #[arg(long, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Keep street names and labels in the imagery.
    #[arg(long)]
    pub show_labels: bool,
    /// Share of textured cells in mock imagery [default: 0.6].
    #[arg(long)]
    pub mock_density: Option<f64>,
    /// Raster cells per axis: cover-edge or truncate [default: truncate].
    #[arg(long, value_parser = parse_kebab::<EdgePolicy>)]
    pub edge: Option<EdgePolicy>,
    /// Raster span measurement: corners or west-edge [default: west-edge].
    #[arg(long, value_parser = parse_kebab::<SpanMeasure>)]
    pub span: Option<SpanMeasure>,
}

#[derive(Debug, Clone, Args)]
pub struct DownloadArgs {
    #[command(flatten)]
    pub settings: Settings,
    /// Print the plan and exit without downloading.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CurateArgs {
    #[command(flatten)]
    pub settings: Settings,
    /// Map-type folder to work on [default: from the mission settings].
    #[arg(long)]
    pub dir: Option<PathBuf>,
    /// For `stats`: include images discarded by `clean`.
    #[arg(long)]
    pub all: bool,
}

fn parse_kebab<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

impl Settings {
    fn to_partial(&self) -> PartialConfig {
        PartialConfig {
            coords: self.coords.clone(),
            fov: self.fov,
            aspect_ratio: self.aspect_ratio.as_ref().map(|v| (v[0], v[1])),
            map_type: self.map_type,
            data_dir: self.data_dir.clone(),
            mission_name: self.mission_name.clone(),
            vmargin: self.vmargin,
            img_size: self.img_size.as_ref().map(|v| (v[0], v[1], v[2] as u8)),
            overlap: self.overlap,
            seed: self.seed,
            retry: self.retry,
            api_key: self.api_key.clone(),
            concurrency: self.concurrency,
            entropy_threshold: self.entropy_threshold,
            split: self.split.as_ref().map(|v| (v[0], v[1], v[2])),
            provider: self.provider,
            hide_labels: self.show_labels.then_some(false),
            mock_density: self.mock_density,
            edge: self.edge,
            span: self.span,
        }
    }
}

/// Exit status for an error: 2 bad input, 3 auth/quota, 4 I/O, 1 anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Config(_) => EXIT_USAGE,
        Error::Auth { .. } => EXIT_AUTH,
        Error::Io { .. } => EXIT_IO,
        Error::Csv(c) if c.is_io_error() => EXIT_IO,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` and runs the command. Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_file_config(cli: &Cli) -> Result<PartialConfig> {
    match &cli.config {
        Some(p) => PartialConfig::load(p),
        None if Path::new("config.json").is_file() => PartialConfig::load(Path::new("config.json")),
        None => Ok(PartialConfig::default()),
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let file = load_file_config(cli)?;
    let resolve = |s: &Settings| resolve_config(&s.to_partial(), &file, &Config::default());
    match &cli.command {
        Command::DownloadSingle(a) => download(Mode::Single, &resolve(&a.settings), a.dry_run),
        Command::DownloadFromList(a) => download(Mode::List, &resolve(&a.settings), a.dry_run),
        Command::DownloadRaster(a) => download(Mode::Raster, &resolve(&a.settings), a.dry_run),
        Command::Clean(a) => clean(&resolve(&a.settings), a.dir.as_deref()),
        Command::Stats(a) => stats(&resolve(&a.settings), a.dir.as_deref(), a.all),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Single,
    List,
    Raster,
}

/// Builds the mission for `mode` from the resolved config.
pub fn mission_spec(cfg: &Config, raster_only: bool) -> Result<MissionSpec> {
    let coords = Coords::parse(cfg.coords()?)?;
    let camera = CameraSpec::new(cfg.fov, cfg.aspect_ratio.0, cfg.aspect_ratio.1)
        .map_err(|e| Error::Config(e.to_string()))?;
    let kind = match coords {
        Coords::Raster { bbox, agl } => MissionKind::Raster { bbox, agl },
        _ if raster_only => {
            return Err(Error::Parse {
                line: None,
                msg: format!(
                    "a raster needs two corners; {}",
                    uavsim::mission::COORDS_GRAMMAR
                ),
            })
        }
        other => {
            let (center, agl) = other.single_target()?;
            MissionKind::Single { center, agl }
        }
    };
    Ok(MissionSpec::new(kind, camera)
        .with_overlap(cfg.overlap)
        .with_map_type(cfg.map_type)
        .with_raster_options(RasterOptions {
            edge: cfg.edge,
            span: cfg.span,
        }))
}

fn build_plan(mode: Mode, cfg: &Config) -> Result<MissionPlan> {
    let spec = match mode {
        Mode::Raster => mission_spec(cfg, true)?,
        Mode::Single => mission_spec(cfg, false)?,
        Mode::List => {
            let points = Coords::parse(cfg.coords()?)?.list_targets()?;
            let base = mission_spec(cfg, false)?;
            MissionSpec {
                kind: MissionKind::List { points },
                ..base
            }
        }
    };
    plan(&spec)
}

fn pipeline_options(cfg: &Config) -> PipelineOptions {
    PipelineOptions {
        vmargin: cfg.vmargin,
        img_size: cfg.img_size,
        retry: cfg.retry,
        concurrency: cfg.concurrency,
        hide_labels: cfg.hide_labels,
        ..PipelineOptions::default()
    }
}

fn provider(cfg: &Config) -> Result<Box<dyn ImageProvider>> {
    match cfg.provider {
        ProviderKind::Mock => Ok(Box::new(MockProvider::new(cfg.seed).with_style(
            MockStyle {
                density: cfg.mock_density,
                patchy: true,
            },
        ))),
        ProviderKind::Http => {
            let env = std::env::var(API_KEY_ENV).ok();
            let key = ApiKey::resolve(
                cfg.api_key.as_deref(),
                env.as_deref(),
                Some(Path::new(API_KEY_FILE)),
            )?;
            Ok(Box::new(HttpProvider::new(key)))
        }
    }
}

#[derive(Serialize)]
struct MissionSnapshot<'a> {
    config: &'a Config,
    mission: &'a str,
    n_waypoints: usize,
    n_rows: u32,
    n_cols: u32,
    zoom: u8,
    res_x: u32,
    res_y: u32,
    request_height: u32,
    stored_height: u32,
}

fn download(mode: Mode, cfg: &Config, dry_run: bool) -> Result<()> {
    let plan = build_plan(mode, cfg)?;
    let opts = pipeline_options(cfg);
    let mission = cfg.mission()?;
    let dir = dataset::maptype_dir(&cfg.data_dir, &mission, cfg.map_type, cfg.overlap);
    let first = plan.waypoints[0];
    let shape = capture_shape(&first, &opts);

    println!("mission      {mission}");
    println!("output       {}", dir.display());
    println!(
        "waypoints    {} ({} rows x {} cols)",
        plan.waypoints.len(),
        plan.n_rows,
        plan.n_cols
    );
    println!("zoom         {}", first.zoom);
    println!("resolution   {}x{}", first.res_x, first.res_y);
    println!(
        "request      {}x{} ({} requests)",
        shape.request.0,
        shape.request.1,
        plan.waypoints.len()
    );
    if dry_run {
        return Ok(());
    }

    let provider = provider(cfg)?;
    dataset::ensure_dir(&dir)?;
    let snapshot = MissionSnapshot {
        config: cfg,
        mission: &mission,
        n_waypoints: plan.waypoints.len(),
        n_rows: plan.n_rows,
        n_cols: plan.n_cols,
        zoom: first.zoom,
        res_x: first.res_x,
        res_y: first.res_y,
        request_height: shape.request.1,
        stored_height: shape.stored.1,
    };
    dataset::write_json(&dir.join(MISSION_FILE), &snapshot)?;
    let report = run_mission(&plan, provider.as_ref(), &dir, &opts)?;
    if !report.short.is_empty() {
        log::warn!(
            "{} image(s) are shorter than planned: the margin request hit the 640 px cap",
            report.short.len()
        );
    }
    println!("fetched      {}", report.fetched);
    println!("reused       {}", report.reused);
    Ok(())
}

fn target_dir(cfg: &Config, dir: Option<&Path>) -> Result<PathBuf> {
    match dir {
        Some(d) => Ok(d.to_path_buf()),
        None => Ok(dataset::maptype_dir(
            &cfg.data_dir,
            &cfg.mission()?,
            cfg.map_type,
            cfg.overlap,
        )),
    }
}

fn clean(cfg: &Config, dir: Option<&Path>) -> Result<()> {
    let dir = target_dir(cfg, dir)?;
    let report = dataset::cleanup_dir(&dir, cfg.entropy_threshold)?;
    let total = report.retained.len() + report.discarded.len();
    println!("threshold    {}", report.threshold);
    if let Some(r) = report.reference {
        println!("judged by    {r}");
    }
    println!("retained     {} of {total}", report.retained.len());
    println!("discarded    {}", report.discarded.len());
    let (a, b, c) = cfg.split;
    let manifest = dataset::make_split(
        &report.retained,
        SplitFractions::new(a, b, c)?,
        cfg.seed,
        None,
    )?
    .with_cleaning(&report);
    let path = dir.join(SPLIT_MANIFEST_FILE);
    dataset::write_json(&path, &manifest)?;
    println!("manifest     {}", path.display());
    Ok(())
}

fn stats(cfg: &Config, dir: Option<&Path>, all: bool) -> Result<()> {
    let dir = target_dir(cfg, dir)?;
    let mut records = dataset::read_meta_csv(&dir.join(dataset::META_FILE))?;
    let manifest_path = dir.join(SPLIT_MANIFEST_FILE);
    if !all && manifest_path.is_file() {
        let manifest: dataset::SplitManifest = dataset::read_json(&manifest_path)?;
        records.retain(|r| !manifest.discarded.contains(&r.img_name));
    }
    let entropies: Vec<f64> = records.iter().map(|r| r.entropy).collect();
    let s = dataset::entropy_stats(&entropies, cfg.entropy_threshold)?;
    let path = dir.join(dataset::ENTROPY_HIST_FILE);
    s.write_csv(&path)?;
    println!("images       {}", s.n);
    println!("below {:<6} {:.4}", s.threshold, s.below_threshold);
    println!("histogram    {}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Auth { status: 403 }), EXIT_AUTH);
        assert_eq!(
            exit_code(&Error::Parse {
                line: None,
                msg: String::new()
            }),
            EXIT_USAGE
        );
        let io = Error::Io {
            path: "x".into(),
            source: std::io::Error::other("x"),
        };
        assert_eq!(exit_code(&io), EXIT_IO);
        assert_eq!(exit_code(&Error::Protocol("x".into())), EXIT_FAILURE);
    }

    #[test]
    fn parses_knobs() {
        let cli = Cli::try_parse_from([
            "uavsim",
            "download-raster",
            "--coords",
            "1_2_0_3_100",
            "--aspect-ratio",
            "16",
            "9",
            "--edge",
            "truncate",
            "--span",
            "west-edge",
            "--provider",
            "mock",
            "--map-type",
            "roadmap",
        ])
        .unwrap();
        let Command::DownloadRaster(a) = cli.command else {
            panic!()
        };
        let p = a.settings.to_partial();
        assert_eq!(p.aspect_ratio, Some((16, 9)));
        assert_eq!(p.edge, Some(EdgePolicy::Truncate));
        assert_eq!(p.span, Some(SpanMeasure::WestEdge));
        assert_eq!(p.provider, Some(ProviderKind::Mock));
        assert_eq!(p.map_type, Some(MapType::Roadmap));
        assert_eq!(p.hide_labels, None);
    }
}
