//! Offline map backend. Every pixel is a pure function of its global pixel
//! coordinate at the requested zoom, the map type and the seed, so captures
//! of adjacent areas line up without seams.

use super::{CaptureSpec, ImageProvider, ProviderResult};
use crate::error::Result;
use crate::exec::{fill_rows, ExecMode};
use crate::geomath::{latlon_to_world, world_y_to_lat, WORLD_SIZE};
use crate::imaging::Image;
use crate::mission::MapType;

const CELL_PX: i64 = 16;
const REGION_PX: i64 = 512;
/// Graticule spacing in world pixels at the capture zoom.
const GRATICULE_PX: f64 = 128.0;
/// Share of regions left blank when `patchy` is on.
const BLANK_REGION_SHARE: f64 = 0.35;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MockStyle {
    /// Share of texture cells that carry features, in [0, 1]. Zero renders a
    /// constant image.
    pub density: f64,
    /// Blank out whole 512 px regions of roadmap imagery, like empty farmland.
    pub patchy: bool,
}

impl Default for MockStyle {
    fn default() -> Self {
        MockStyle {
            density: 0.6,
            patchy: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MockProvider {
    pub seed: u64,
    pub style: MockStyle,
}

impl MockProvider {
    pub fn new(seed: u64) -> Self {
        MockProvider {
            seed,
            style: MockStyle::default(),
        }
    }

    pub fn with_style(mut self, style: MockStyle) -> Self {
        self.style = style;
        self
    }
}

impl ImageProvider for MockProvider {
    fn fetch(&self, spec: &CaptureSpec, _retry: u32) -> Result<ProviderResult> {
        mock_render_with(spec, self.seed, &self.style, ExecMode::Sequential)
    }
}

pub fn mock_render(spec: &CaptureSpec, seed: u64) -> Result<ProviderResult> {
    mock_render_with(spec, seed, &MockStyle::default(), ExecMode::Sequential)
}

pub fn mock_render_with(
    spec: &CaptureSpec,
    seed: u64,
    style: &MockStyle,
    mode: ExecMode,
) -> Result<ProviderResult> {
    spec.validate()?;
    let (gx0, gy0) = capture_origin(spec)?;
    let image = render_region(
        (gx0, gy0),
        (spec.res_x, spec.res_y),
        spec.zoom,
        spec.map_type,
        seed,
        style,
        mode,
    )?;
    Ok(ProviderResult {
        image,
        content_type: "image/png".into(),
        attempts: 1,
    })
}

/// Global pixel of the top-left corner of a capture centred on `spec.center`.
fn capture_origin(spec: &CaptureSpec) -> Result<(i64, i64)> {
    let w = latlon_to_world(spec.center)?;
    let scale = (1u64 << spec.zoom) as f64;
    let gx0 = (w.x * scale - spec.res_x as f64 / 2.0).round() as i64;
    let gy0 = (w.y * scale - spec.res_y as f64 / 2.0).round() as i64;
    Ok((gx0, gy0))
}

/// Renders `size` pixels whose top-left corner sits at global pixel `origin`.
pub fn render_region(
    origin: (i64, i64),
    size: (u32, u32),
    zoom: u8,
    map_type: MapType,
    seed: u64,
    style: &MockStyle,
    mode: ExecMode,
) -> Result<Image> {
    let (w, h) = (size.0 as usize, size.1 as usize);
    let mut pixels = vec![0u8; w * h * 3];
    let salt = mix(seed ^ mix(zoom as u64 + 1) ^ mix(map_type as u64 + 101));
    let world_px = WORLD_SIZE * (1u64 << zoom) as f64;
    let density = style.density.clamp(0.0, 1.0);
    let background = palette(map_type, 0);
    fill_rows(&mut pixels, w * 3, mode, |row, buf| {
        let gy = origin.1 + row as i64;
        let lat_line = density > 0.0 && crosses_lat_graticule(gy, zoom, world_px);
        for (col, px) in buf.chunks_exact_mut(3).enumerate() {
            let gx = origin.0 + col as i64;
            let rgb = if density == 0.0 || blank_region(gx, gy, map_type, style, salt) {
                background
            } else if lat_line
                || (gx as f64 / GRATICULE_PX).floor() != ((gx + 1) as f64 / GRATICULE_PX).floor()
            {
                palette(map_type, 255)
            } else {
                texel(gx, gy, map_type, density, salt)
            };
            px.copy_from_slice(&rgb);
        }
    });
    Image::new(size.0, size.1, 3, pixels)
}

fn crosses_lat_graticule(gy: i64, zoom: u8, world_px: f64) -> bool {
    // Latitude lines at the spacing the longitude lines have at the equator.
    let step = 360.0 * GRATICULE_PX / world_px;
    let lat = |y: i64| world_y_to_lat(y as f64 / (1u64 << zoom) as f64);
    (lat(gy) / step).floor() != (lat(gy + 1) / step).floor()
}

fn blank_region(gx: i64, gy: i64, map_type: MapType, style: &MockStyle, salt: u64) -> bool {
    if !style.patchy || map_type != MapType::Roadmap {
        return false;
    }
    let h = unit(hash2(
        gx.div_euclid(REGION_PX),
        gy.div_euclid(REGION_PX),
        salt ^ 0x5eed,
    ));
    h < BLANK_REGION_SHARE
}

fn texel(gx: i64, gy: i64, map_type: MapType, density: f64, salt: u64) -> [u8; 3] {
    let cell = hash2(gx.div_euclid(CELL_PX), gy.div_euclid(CELL_PX), salt);
    if unit(cell) >= density {
        return palette(map_type, 0);
    }
    let level = 32 + (cell >> 40) as u8 % 192;
    let mut rgb = palette(map_type, level);
    if map_type == MapType::Satellite {
        let n = hash2(gx, gy, salt ^ 0xa11ce) as u8 % 17;
        for c in &mut rgb {
            *c = c.saturating_add(n).saturating_sub(8);
        }
    }
    rgb
}

fn palette(map_type: MapType, level: u8) -> [u8; 3] {
    let l = level as u16;
    match map_type {
        MapType::Satellite => [(l * 3 / 5) as u8, (l * 4 / 5) as u8, (l / 2) as u8],
        MapType::Roadmap => {
            if level == 0 {
                [242, 240, 233]
            } else {
                [
                    255 - (l / 3) as u8,
                    255 - (l / 2) as u8,
                    160 + (l / 4) as u8,
                ]
            }
        }
        MapType::Terrain => [
            120 + (l / 3) as u8,
            140 + (l / 4) as u8,
            100 + (l / 5) as u8,
        ],
    }
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash2(x: i64, y: i64, salt: u64) -> u64 {
    mix(mix(x as u64 ^ salt).wrapping_add(y as u64))
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomath::GeoPoint;
    use crate::imaging::shannon_entropy;

    fn spec(map_type: MapType) -> CaptureSpec {
        CaptureSpec {
            center: GeoPoint::new(35.14, -89.86).unwrap(),
            zoom: 17,
            res_x: 96,
            res_y: 64,
            map_type,
            hide_labels: true,
        }
    }

    #[test]
    fn deterministic() {
        let a = mock_render(&spec(MapType::Satellite), 7).unwrap();
        let b = mock_render(&spec(MapType::Satellite), 7).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.attempts, 1);
        let c = mock_render(&spec(MapType::Satellite), 8).unwrap();
        assert_ne!(a.image, c.image);
    }

    #[test]
    fn zero_density_is_constant() {
        let style = MockStyle {
            density: 0.0,
            patchy: false,
        };
        for mt in [MapType::Satellite, MapType::Roadmap, MapType::Terrain] {
            let r = mock_render_with(&spec(mt), 1, &style, ExecMode::Sequential).unwrap();
            assert_eq!(shannon_entropy(&r.image).value, 0.0);
        }
    }

    #[test]
    fn modes_agree() {
        let style = MockStyle::default();
        let a = mock_render_with(&spec(MapType::Roadmap), 3, &style, ExecMode::Sequential).unwrap();
        let b = mock_render_with(&spec(MapType::Roadmap), 3, &style, ExecMode::Parallel).unwrap();
        assert_eq!(a.image, b.image);
    }

    #[test]
    fn textured_has_entropy() {
        let r = mock_render(&spec(MapType::Satellite), 1).unwrap();
        assert!(shannon_entropy(&r.image).value > 3.0);
    }
}
