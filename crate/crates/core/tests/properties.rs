use proptest::prelude::*;

use uavsim::geodesy::{latlon_to_utm, utm_to_latlon};
use uavsim::geomath::{
    bbox_from_center_zoom, footprint_dims, latlon_to_world, world_to_latlon, zoom_from_bbox,
    CameraSpec, GeoBBox, GeoPoint, ZoomSpec,
};
use uavsim::imaging::{shannon_entropy, Image};
use uavsim::mission::{plan_raster, MissionKind, MissionSpec};

fn point() -> impl Strategy<Value = GeoPoint> {
    (-85.0..85.0f64, -180.0..180.0f64).prop_map(|(a, b)| GeoPoint::new(a, b).unwrap())
}

fn raster(tl: GeoPoint, d_lat: f64, d_lon: f64, agl: f64, overlap: f64) -> usize {
    let br = GeoPoint::new(tl.lat - d_lat, tl.lon + d_lon).unwrap();
    let spec = MissionSpec::new(
        MissionKind::Raster {
            bbox: GeoBBox::new(tl, br).unwrap(),
            agl,
        },
        CameraSpec::default(),
    )
    .with_overlap(overlap);
    plan_raster(&spec).unwrap().waypoints.len()
}

proptest! {
    #[test]
    fn projection_round_trip(p in point()) {
        let q = world_to_latlon(latlon_to_world(p).unwrap());
        prop_assert!((p.lat - q.lat).abs() < 1e-9);
        prop_assert!((p.lon - q.lon).abs() < 1e-9);
    }

    #[test]
    fn footprint_invariants(agl in 1.0..5000.0f64, fov in 1.0..170.0f64, aw in 1u32..32, ah in 1u32..32) {
        let cam = CameraSpec::new(fov, aw, ah).unwrap();
        let f = footprint_dims(agl, &cam).unwrap();
        let d2 = f.width_m * f.width_m + f.height_m * f.height_m;
        prop_assert!((d2.sqrt() - f.diag_m).abs() <= 1e-9 * f.diag_m);
        prop_assert!((f.width_m / f.height_m - aw as f64 / ah as f64).abs() <= 1e-9 * aw as f64 / ah as f64);
        let higher = footprint_dims(agl * 1.5, &cam).unwrap();
        prop_assert!(higher.diag_m > f.diag_m);
    }

    #[test]
    fn zoom_is_maximal(c in (-70.0..70.0f64, -170.0..170.0f64), zoom in 1u8..=21, rx in 1u32..=640, ry in 1u32..=640) {
        let c = GeoPoint::new(c.0, c.1).unwrap();
        let bbox = bbox_from_center_zoom(c, ZoomSpec::new(zoom, rx, ry).unwrap());
        // Low zooms with large images can reach past the world edge.
        prop_assume!(bbox.is_ok());
        let bbox = bbox.unwrap();
        let z = zoom_from_bbox(&bbox, 640).unwrap();
        prop_assert!(z.res_x <= 640 && z.res_y <= 640);
        prop_assert!(z.zoom >= zoom);
        if z.zoom < 22 {
            // One level deeper the box would need more than 640 pixels.
            let deeper = 2 * rx.max(ry) * (1 << (z.zoom - zoom));
            prop_assert!(deeper > 640);
        }
        if rx.max(ry) > 320 {
            prop_assert_eq!(z.zoom, zoom);
        }
    }

    #[test]
    fn utm_round_trip(lat in -83.9..83.9f64, lon in -180.0..180.0f64) {
        let p = GeoPoint::new(lat, lon).unwrap();
        let u = latlon_to_utm(p, None).unwrap();
        prop_assert!((1..=60).contains(&u.zone));
        let q = utm_to_latlon(u).unwrap();
        prop_assert!((p.lat - q.lat).abs() < 1e-9);
        prop_assert!((p.lon - q.lon).abs() < 1e-9);
    }

    #[test]
    fn entropy_bounds_and_invariance(pixels in proptest::collection::vec(any::<u8>(), 1..400), seed in any::<u64>()) {
        let n = pixels.len() as u32;
        let img = Image::new(n, 1, 1, pixels.clone()).unwrap();
        let h = shannon_entropy(&img).value;
        prop_assert!((0.0..=8.0).contains(&h));
        let mut perm = pixels.clone();
        perm.rotate_left((seed % n as u64) as usize);
        perm.reverse();
        let h2 = shannon_entropy(&Image::new(n, 1, 1, perm).unwrap()).value;
        prop_assert_eq!(h, h2);
        let relabel = pixels.iter().map(|v| v.wrapping_add(seed as u8)).collect();
        let h3 = shannon_entropy(&Image::new(n, 1, 1, relabel).unwrap()).value;
        prop_assert!((h - h3).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn raster_count_monotone(
        lat in -60.0..60.0f64,
        lon in -170.0..170.0f64,
        d_lat in 0.001..0.02f64,
        d_lon in 0.001..0.02f64,
        agl in 60.0..300.0f64,
        overlap in 0.0..0.6f64,
    ) {
        let tl = GeoPoint::new(lat, lon).unwrap();
        let base = raster(tl, d_lat, d_lon, agl, overlap);
        prop_assert!(raster(tl, d_lat, d_lon, agl * 1.3, overlap) <= base);
        prop_assert!(raster(tl, d_lat, d_lon, agl, overlap * 0.5) <= base);
        prop_assert!(base >= 1);
    }
}
