//! Post-capture raster processing: watermark-margin crop, resize, grayscale,
//! and histogram entropy.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};

/// 8-bit image with 1 (gray) or 3 (RGB) interleaved channels, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::domain(format!(
                "unsupported channel count {channels}"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::domain(format!(
                "pixel buffer holds {} bytes, {width}x{height}x{channels} needs {expected}",
                pixels.len()
            )));
        }
        Ok(Image {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Result<Self> {
        Image::new(
            width,
            height,
            channels,
            vec![value; width as usize * height as usize * channels as usize],
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    fn row_len(&self) -> usize {
        self.width as usize * self.channels as usize
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory(bytes)?;
        Ok(Image::from_dynamic(img))
    }

    pub fn from_dynamic(img: DynamicImage) -> Self {
        let (width, height) = (img.width(), img.height());
        match img {
            DynamicImage::ImageLuma8(buf) => Image {
                width,
                height,
                channels: 1,
                pixels: buf.into_raw(),
            },
            DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_) => Image {
                width,
                height,
                channels: 1,
                pixels: img.to_luma8().into_raw(),
            },
            other => Image {
                width,
                height,
                channels: 3,
                pixels: other.to_rgb8().into_raw(),
            },
        }
    }

    fn to_dynamic(&self) -> DynamicImage {
        match self.channels {
            1 => DynamicImage::ImageLuma8(
                image::GrayImage::from_raw(self.width, self.height, self.pixels.clone())
                    .expect("buffer size checked at construction"),
            ),
            _ => DynamicImage::ImageRgb8(
                image::RgbImage::from_raw(self.width, self.height, self.pixels.clone())
                    .expect("buffer size checked at construction"),
            ),
        }
    }

    /// PNG bytes with the encoder's default settings.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = Cursor::new(Vec::new());
        self.to_dynamic().write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes = self.encode_png()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Image::decode(&bytes)
    }
}

/// Reads only the header of an image file to get its dimensions.
pub fn image_dimensions(path: &Path) -> Result<(u32, u32)> {
    Ok(image::image_dimensions(path)?)
}

fn round_u8(v: f64) -> u8 {
    // Values are non-negative here, so half-away-from-zero is floor(v + 0.5).
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn luma(r: u8, g: u8, b: u8) -> u8 {
    round_u8(0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
}

/// Rows removed from each edge by [`crop_vmargin`].
pub fn vmargin_rows(height: u32, vmargin: f64) -> u32 {
    (height as f64 * vmargin / 2.0).floor() as u32
}

/// Height to request so that cropping `vmargin` leaves `target` rows.
///
/// Starts from `round(target / (1 - vmargin))` and takes the nearest height
/// that fits exactly. Returns the chosen height, capped at `cap`.
pub fn margin_request_height(target: u32, vmargin: f64, cap: u32) -> u32 {
    if vmargin <= 0.0 {
        return target.min(cap);
    }
    let guess = (target as f64 / (1.0 - vmargin) + 0.5).floor() as i64;
    let exact = [0, -1, 1, -2, 2, -3, 3]
        .iter()
        .map(|d| guess + d)
        .filter(|&h| h >= target as i64)
        .find(|&h| h as u32 - 2 * vmargin_rows(h as u32, vmargin) == target);
    (exact.unwrap_or(guess) as u32).min(cap)
}

/// Removes `floor(height * vmargin / 2)` rows from the top and from the bottom.
pub fn crop_vmargin(img: &Image, vmargin: f64) -> Result<Image> {
    if !(0.0..0.5).contains(&vmargin) {
        return Err(Error::domain(format!(
            "vmargin {vmargin} must lie in [0, 0.5)"
        )));
    }
    if img.height < 2 && vmargin > 0.0 {
        return Err(Error::domain("image too short to crop a margin"));
    }
    let cut = vmargin_rows(img.height, vmargin);
    let height = img.height - 2 * cut;
    if height < 1 {
        return Err(Error::domain("margin crop leaves no rows"));
    }
    let row = img.row_len();
    let start = cut as usize * row;
    let pixels = img.pixels[start..start + height as usize * row].to_vec();
    Image::new(img.width, height, img.channels, pixels)
}

/// Converts to `channels` (1 or 3): RGB to gray by luma, gray to RGB by replication.
pub fn convert_channels(img: &Image, channels: u8) -> Result<Image> {
    match (img.channels, channels) {
        (a, b) if a == b => Ok(img.clone()),
        (3, 1) => {
            let pixels = img
                .pixels
                .chunks_exact(3)
                .map(|p| luma(p[0], p[1], p[2]))
                .collect();
            Image::new(img.width, img.height, 1, pixels)
        }
        (1, 3) => {
            let pixels = img.pixels.iter().flat_map(|&v| [v, v, v]).collect();
            Image::new(img.width, img.height, 3, pixels)
        }
        (_, c) => Err(Error::domain(format!("unsupported channel count {c}"))),
    }
}

pub fn to_grayscale(img: &Image) -> Image {
    convert_channels(img, 1).expect("1 and 3 channels are always convertible")
}

/// Bilinear resampling with pixel-center alignment; channel conversion first.
pub fn resize(img: &Image, target: (u32, u32, u8)) -> Result<Image> {
    resize_with(img, target, ExecMode::default())
}

pub fn resize_with(img: &Image, target: (u32, u32, u8), mode: ExecMode) -> Result<Image> {
    let (w, h, c) = target;
    if w == 0 || h == 0 {
        return Err(Error::domain("resize target must be at least 1x1"));
    }
    let src = convert_channels(img, c)?;
    if (w, h) == (src.width, src.height) {
        return Ok(src);
    }
    let (sw, sh) = (src.width as usize, src.height as usize);
    let ch = c as usize;
    let sx = src.width as f64 / w as f64;
    let sy = src.height as f64 / h as f64;

    // Source sample positions and weights per output column.
    let cols: Vec<(usize, usize, f64)> = (0..w as usize)
        .map(|x| {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = fx.floor() as usize;
            (x0, (x0 + 1).min(sw - 1), fx - x0 as f64)
        })
        .collect();

    let mut out = vec![0u8; w as usize * h as usize * ch];
    exec::fill_rows(&mut out, w as usize * ch, mode, |y, row| {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let ty = fy - y0 as f64;
        let at = |yy: usize, xx: usize, k: usize| src.pixels[(yy * sw + xx) * ch + k] as f64;
        for (x, &(x0, x1, tx)) in cols.iter().enumerate() {
            for k in 0..ch {
                let top = at(y0, x0, k) * (1.0 - tx) + at(y0, x1, k) * tx;
                let bottom = at(y1, x0, k) * (1.0 - tx) + at(y1, x1, k) * tx;
                row[x * ch + k] = round_u8(top * (1.0 - ty) + bottom * ty);
            }
        }
    });
    Image::new(w, h, c, out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// Bits, in `[0, 8]`.
    pub value: f64,
    pub histogram: Vec<u64>,
    pub n_pixels: u64,
}

/// Shannon entropy of the grayscale intensity histogram, in bits.
pub fn shannon_entropy(img: &Image) -> EntropyReport {
    let mut histogram = vec![0u64; 256];
    if img.channels == 1 {
        for &v in &img.pixels {
            histogram[v as usize] += 1;
        }
    } else {
        for p in img.pixels.chunks_exact(3) {
            histogram[luma(p[0], p[1], p[2]) as usize] += 1;
        }
    }
    let n_pixels = (img.pixels.len() / img.channels as usize) as u64;
    EntropyReport {
        value: entropy_from_histogram(&histogram, n_pixels),
        histogram,
        n_pixels,
    }
}

pub fn entropy_from_histogram(histogram: &[u64], n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let h: f64 = histogram
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // A single occupied bin yields -1 * log2(1) = -0.0.
    h.max(0.0)
}

/// Entropy of many images at once.
pub fn entropy_batch(images: &[Image], mode: ExecMode) -> Vec<f64> {
    exec::map_slice(images, mode, |img| shannon_entropy(img).value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_examples() {
        let img = Image::filled(640, 768, 3, 9).unwrap();
        let c = crop_vmargin(&img, 0.2).unwrap();
        assert_eq!((c.width(), c.height()), (640, 616));
        let img = Image::filled(640, 640, 1, 9).unwrap();
        assert_eq!(crop_vmargin(&img, 0.2).unwrap().height(), 512);
        assert_eq!(crop_vmargin(&img, 0.0).unwrap(), img);
        assert!(crop_vmargin(&img, 0.5).is_err());
        assert!(crop_vmargin(&Image::filled(4, 1, 1, 0).unwrap(), 0.2).is_err());
    }

    #[test]
    fn crop_keeps_middle_rows() {
        let pixels: Vec<u8> = (0..10).collect();
        let img = Image::new(1, 10, 1, pixels).unwrap();
        let c = crop_vmargin(&img, 0.2).unwrap();
        assert_eq!(c.pixels(), &[1, 2, 3, 4, 5, 6, 7, 8]);
    }

    #[test]
    fn margin_request_hits_target() {
        for target in [1u32, 50, 242, 254, 300, 511, 512] {
            let h = margin_request_height(target, 0.2, 640);
            if h < 640 {
                assert_eq!(h - 2 * vmargin_rows(h, 0.2), target, "target {target}");
            }
        }
        assert_eq!(margin_request_height(512, 0.2, 640), 640);
        assert_eq!(margin_request_height(600, 0.2, 640), 640);
        assert_eq!(margin_request_height(242, 0.0, 640), 242);
    }

    #[test]
    fn resize_identity_and_constant() {
        let img = Image::new(2, 2, 1, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(resize(&img, (2, 2, 1)).unwrap(), img);
        let k = Image::filled(37, 11, 3, 77).unwrap();
        let r = resize(&k, (5, 23, 3)).unwrap();
        assert!(r.pixels().iter().all(|&v| v == 77));
    }

    #[test]
    fn checkerboard_to_single_pixel() {
        let img = Image::new(2, 2, 1, vec![0, 255, 255, 0]).unwrap();
        let r = resize(&img, (1, 1, 1)).unwrap();
        // Mean 127.5 rounds half away from zero.
        assert_eq!(r.pixels(), &[128]);
    }

    #[test]
    fn channel_conversion() {
        let rgb = Image::new(1, 1, 3, vec![255, 0, 0]).unwrap();
        assert_eq!(convert_channels(&rgb, 1).unwrap().pixels(), &[76]);
        let white = Image::new(1, 1, 3, vec![255, 255, 255]).unwrap();
        assert_eq!(to_grayscale(&white).pixels(), &[255]);
        let g = Image::new(1, 1, 1, vec![42]).unwrap();
        assert_eq!(convert_channels(&g, 3).unwrap().pixels(), &[42, 42, 42]);
        assert!(resize(&g, (0, 1, 1)).is_err());
    }

    #[test]
    fn entropy_examples() {
        let k = Image::filled(10, 10, 1, 200).unwrap();
        assert_eq!(shannon_entropy(&k).value, 0.0);
        let half: Vec<u8> = (0..100).map(|i| if i < 50 { 10 } else { 240 }).collect();
        assert_eq!(
            shannon_entropy(&Image::new(10, 10, 1, half).unwrap()).value,
            1.0
        );
        let all: Vec<u8> = (0..=255).collect();
        let r = shannon_entropy(&Image::new(16, 16, 1, all).unwrap());
        assert_eq!(r.value, 8.0);
        assert_eq!(r.n_pixels, 256);
        assert_eq!(r.histogram.iter().sum::<u64>(), 256);
    }

    #[test]
    fn entropy_of_rgb_uses_luma() {
        let rgb = Image::new(2, 1, 3, vec![255, 0, 0, 0, 0, 255]).unwrap();
        let r = shannon_entropy(&rgb);
        assert_eq!(r.histogram[76], 1);
        assert_eq!(r.histogram[29], 1);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn png_round_trip() {
        let pixels: Vec<u8> = (0..48).collect();
        let img = Image::new(4, 4, 3, pixels).unwrap();
        let back = Image::decode(&img.encode_png().unwrap()).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(Image::new(2, 2, 1, vec![0; 3]).is_err());
        assert!(Image::new(2, 2, 4, vec![0; 16]).is_err());
    }
}
