use std::path::Path;
use std::process::{Command, Output};

use uavsim::dataset::{self, SplitManifest, SPLIT_MANIFEST_FILE};
use uavsim::geomath::{CameraSpec, GeoPoint};
use uavsim::imaging::{shannon_entropy, Image};
use uavsim::mission::plan_list;

fn uavsim(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavsim"))
        .current_dir(cwd)
        .args(args)
        .env_remove("UAVSIM_API_KEY")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn malformed_coords_exit_2_with_hint() {
    let dir = tempfile::tempdir().unwrap();
    let o = uavsim(
        dir.path(),
        &[
            "download-single",
            "--coords",
            "35.16_-89.90",
            "--provider",
            "mock",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("{lat}_{lon}_{agl}"));
}

#[test]
fn raster_command_wants_two_corners() {
    let dir = tempfile::tempdir().unwrap();
    let o = uavsim(
        dir.path(),
        &[
            "download-raster",
            "--coords",
            "35.16_-89.90_120",
            "--dry-run",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = uavsim(
        dir.path(),
        &["download-single", "--coords", "35.16_-89.90_120"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("API key"));
}

#[test]
fn dry_run_reports_agricenter_raster() {
    let dir = tempfile::tempdir().unwrap();
    let o = uavsim(
        dir.path(),
        &[
            "download-raster",
            "--coords",
            "35.16_-89.90_35.115_-89.823_120",
            "--dry-run",
        ],
    );
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(
        out.contains("waypoints    1806 (42 rows x 43 cols)"),
        "{out}"
    );
    assert!(out.contains("zoom         18"));
    assert!(!dir.path().join("datasets").exists());
}

#[test]
fn config_file_and_cli_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"coords": "35.128039_-89.799163_126", "fov": 60, "overlap": 0.3, "provider": "mock", "mission_name": "fig1", "api_key": "SECRET-123"}"#,
    )
    .unwrap();
    let o = uavsim(dir.path(), &["download-single", "--fov", "90", "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let snap = std::fs::read_to_string(dir.path().join("datasets/fig1/satellite_30/mission.json"))
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&snap).unwrap();
    assert_eq!(v["config"]["fov"], 90.0);
    assert_eq!(v["config"]["overlap"], 0.3);
    assert_eq!(v["config"]["seed"], 2024);
    assert!(!snap.contains("SECRET"));

    std::fs::write(dir.path().join("bad.json"), r#"{"fov": 60, "zoom": 3}"#).unwrap();
    let o = uavsim(dir.path(), &["download-single", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zoom"));
}

#[test]
fn list_download_writes_one_image_per_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("points.txt"),
        "35.10 -89.90 120\n\n35.11 -89.91 150\n35.12 -89.92 90\n",
    )
    .unwrap();
    let o = uavsim(
        dir.path(),
        &[
            "download-from-list",
            "--coords",
            "points.txt",
            "--provider",
            "mock",
            "--quiet",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs =
        dataset::read_meta_csv(&dir.path().join("datasets/points/satellite_0/meta_data.csv"))
            .unwrap();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs.iter().map(|r| r.row).collect::<Vec<_>>(), [0, 1, 2]);
}

/// A ten-image dataset whose even rows are constant images.
fn half_constant_dataset(root: &Path) -> std::path::PathBuf {
    let pts: Vec<_> = (0..10)
        .map(|i| (GeoPoint::new(35.1 + i as f64 * 1e-3, -89.9).unwrap(), 120.0))
        .collect();
    let plan = plan_list(&pts, &CameraSpec::default()).unwrap();
    let images: Vec<Image> = (0..10u32)
        .map(|i| {
            if i % 2 == 0 {
                Image::filled(16, 12, 1, 90).unwrap()
            } else {
                Image::new(16, 12, 1, (0..192).map(|v| (v * 7 % 256) as u8).collect()).unwrap()
            }
        })
        .collect();
    let entropies: Vec<f64> = images.iter().map(|i| shannon_entropy(i).value).collect();
    let dir = root.join("roadmap_0");
    dataset::write_dataset(&dir, &plan, &images, &entropies).unwrap();
    dir
}

#[test]
fn clean_then_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = half_constant_dataset(tmp.path());
    let d = dir.to_str().unwrap();

    let o = uavsim(tmp.path(), &["clean", "--dir", d, "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("discarded    5"));
    let m: SplitManifest = dataset::read_json(&dir.join(SPLIT_MANIFEST_FILE)).unwrap();
    assert_eq!(m.discarded.len(), 5);
    assert_eq!(m.entropy_threshold, Some(2.1));
    assert_eq!(m.assignments.len(), 5);
    let names: Vec<_> = std::fs::read_dir(&dir).unwrap().collect();
    assert_eq!(names.len(), 10 + 2, "cleaning must not delete images");

    let o = uavsim(tmp.path(), &["stats", "--dir", d]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("images       5"));
    assert!(stdout(&o).contains("0.0000"));
    let hist = std::fs::read_to_string(dir.join("entropy_hist.csv")).unwrap();
    assert!(hist.starts_with("bin_start,bin_end,count\n"));
    assert_eq!(hist.lines().count(), 65);

    let o = uavsim(tmp.path(), &["stats", "--dir", d, "--all"]);
    assert!(stdout(&o).contains("images       10"));
    assert!(stdout(&o).contains("0.5000"));

    let o = uavsim(
        tmp.path(),
        &["clean", "--dir", d, "--entropy-threshold", "0", "--quiet"],
    );
    assert!(o.status.success());
    let m: SplitManifest = dataset::read_json(&dir.join(SPLIT_MANIFEST_FILE)).unwrap();
    assert_eq!(m.entropy_threshold, Some(0.0));
    assert!(m.discarded.is_empty());
}

#[test]
fn clean_missing_dataset_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let o = uavsim(tmp.path(), &["clean", "--dir", "nowhere/satellite_0"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn satellite_cleaned_by_roadmap_counterpart() {
    let tmp = tempfile::tempdir().unwrap();
    let coords = "35.14_-89.87_35.13_-89.86_120";
    for mt in ["roadmap", "satellite"] {
        let o = uavsim(
            tmp.path(),
            &[
                "download-raster",
                "--coords",
                coords,
                "--provider",
                "mock",
                "--map-type",
                mt,
                "--mission-name",
                "m",
                "--quiet",
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = uavsim(
        tmp.path(),
        &[
            "clean",
            "--coords",
            coords,
            "--mission-name",
            "m",
            "--split",
            "0.5",
            "0.25",
            "0.25",
        ],
    );
    let out = stdout(&o);
    assert!(out.contains("judged by    roadmap"), "{out}");
    let road =
        dataset::read_meta_csv(&tmp.path().join("datasets/m/roadmap_0/meta_data.csv")).unwrap();
    let m: SplitManifest = dataset::read_json(
        &tmp.path()
            .join("datasets/m/satellite_0")
            .join(SPLIT_MANIFEST_FILE),
    )
    .unwrap_or_else(|_| panic!("{out} {}", String::from_utf8_lossy(&o.stderr)));
    let low = road.iter().filter(|r| r.entropy < 2.1).count();
    assert!(
        low > 0 && low < road.len(),
        "mock roadmap should mix blank and busy tiles"
    );
    assert_eq!(m.discarded.len(), low);
}
