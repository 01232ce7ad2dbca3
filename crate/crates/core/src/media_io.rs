//! Images and frame sequences as `(height, width, 3)` / `(frames, height, width, 3)`
//! tensors with samples scaled to `[0, 1]`.
//!
//! PNG goes through the `png` crate; binary PPM (P6) is handled here.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Interleaved 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

fn media_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Media {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

impl RgbImage {
    pub fn to_tensor(&self) -> DenseTensor {
        let (h, w) = (self.height, self.width);
        let mut data = vec![0.0; h * w * 3];
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    data[y + x * h + c * h * w] = self.pixels[(y * w + x) * 3 + c] as f64 / 255.0;
                }
            }
        }
        DenseTensor::new(vec![h, w, 3], data).expect("shape matches buffer")
    }

    /// Clamps to `[0, 1]` and rounds to 8 bits.
    pub fn from_tensor(t: &DenseTensor) -> Result<Self> {
        if t.order() != 3 || t.dims()[2] != 3 {
            return Err(Error::InvalidShape {
                dims: t.dims().to_vec(),
                reason: "an image tensor must be (height, width, 3)".into(),
            });
        }
        let (h, w) = (t.dims()[0], t.dims()[1]);
        let data = t.data();
        let mut pixels = vec![0u8; h * w * 3];
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    pixels[(y * w + x) * 3 + c] = quantize(data[y + x * h + c * h * w]);
                }
            }
        }
        Ok(Self {
            width: w,
            height: h,
            pixels,
        })
    }
}

pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn load_image(path: impl AsRef<Path>) -> Result<DenseTensor> {
    Ok(read_rgb(path.as_ref())?.to_tensor())
}

/// Writes PPM when the extension is `.ppm`, PNG otherwise.
pub fn save_image(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let img = RgbImage::from_tensor(t)?;
    let is_ppm = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
    if is_ppm {
        write_ppm(&img, path)
    } else {
        write_png(&img, path)
    }
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path).map_err(|e| media_err(path, e.to_string()))?;
    if bytes.starts_with(b"\x89PNG") {
        read_png(path)
    } else if bytes.starts_with(b"P6") {
        parse_ppm(&bytes).map_err(|m| media_err(path, m))
    } else {
        Err(media_err(
            path,
            "unsupported format (expected PNG or binary PPM)",
        ))
    }
}

fn read_png(path: &Path) -> Result<RgbImage> {
    let file = File::open(path)?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder
        .read_info()
        .map_err(|e| media_err(path, e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| media_err(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| media_err(path, e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let channels = match info.color_type {
        png::ColorType::Grayscale => {
            warn!(
                "{}: grayscale image expanded to three channels",
                path.display()
            );
            1
        }
        png::ColorType::GrayscaleAlpha => {
            warn!(
                "{}: grayscale image expanded to three channels, alpha dropped",
                path.display()
            );
            2
        }
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => {
            warn!("{}: alpha channel dropped", path.display());
            4
        }
        other => return Err(media_err(path, format!("unsupported color type {other:?}"))),
    };
    let mut pixels = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        let line = &buf[y * info.line_size..y * info.line_size + w * channels];
        for px in line.chunks_exact(channels) {
            if channels <= 2 {
                pixels.extend_from_slice(&[px[0]; 3]);
            } else {
                pixels.extend_from_slice(&px[..3]);
            }
        }
    }
    Ok(RgbImage {
        width: w,
        height: h,
        pixels,
    })
}

fn write_png(img: &RgbImage, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), img.width as u32, img.height as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| media_err(path, e.to_string()))?;
    writer
        .write_image_data(&img.pixels)
        .map_err(|e| media_err(path, e.to_string()))?;
    writer
        .finish()
        .map_err(|e| media_err(path, e.to_string()))?;
    Ok(())
}

fn write_ppm(img: &RgbImage, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P6\n{} {}\n255\n", img.width, img.height)?;
    out.write_all(&img.pixels)?;
    out.flush()?;
    Ok(())
}

/// Parses a binary P6 PPM with 8-bit samples.
pub fn parse_ppm(bytes: &[u8]) -> std::result::Result<RgbImage, String> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("malformed PPM header")?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("malformed PPM header".into());
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err("PPM has zero size".into());
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported PPM maxval {maxval}"));
    }
    let need = width * height * 3;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| format!("PPM raster truncated: need {need} bytes"))?;
    let pixels = if maxval == 255 {
        raster.to_vec()
    } else {
        raster
            .iter()
            .map(|&v| ((v as u32 * 255 + maxval as u32 / 2) / maxval as u32) as u8)
            .collect()
    };
    Ok(RgbImage {
        width,
        height,
        pixels,
    })
}

/// `*` matches any run, `?` a single character.
pub fn wildcard_match(pattern: &str, name: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let n: Vec<char> = name.chars().collect();
    let (mut pi, mut ni) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ni < n.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == n[ni]) {
            pi += 1;
            ni += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ni));
            pi += 1;
        } else if let Some((sp, sn)) = star {
            pi = sp + 1;
            ni = sn + 1;
            star = Some((sp, sn + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

/// Files in `dir` whose names match `pattern`, in lexicographic order.
pub fn list_frames(dir: &Path, pattern: &str) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| media_err(dir, e.to_string()))? {
        let entry = entry?;
        if !entry.file_type()?.is_file() {
            continue;
        }
        if entry
            .file_name()
            .to_str()
            .is_some_and(|n| wildcard_match(pattern, n))
        {
            paths.push(entry.path());
        }
    }
    paths.sort();
    Ok(paths)
}

/// Stacks matching frames into a `(frames, height, width, 3)` tensor.
pub fn load_frames(dir: impl AsRef<Path>, pattern: &str) -> Result<DenseTensor> {
    let dir = dir.as_ref();
    let paths = list_frames(dir, pattern)?;
    if paths.is_empty() {
        return Err(media_err(dir, format!("no frames match {pattern:?}")));
    }
    let frames: Vec<RgbImage> = paths.iter().map(|p| read_rgb(p)).collect::<Result<_>>()?;
    let (h, w) = (frames[0].height, frames[0].width);
    for (p, f) in paths.iter().zip(&frames) {
        if (f.height, f.width) != (h, w) {
            return Err(media_err(
                p,
                format!(
                    "frame is {}x{}, expected {h}x{w} like {}",
                    f.height,
                    f.width,
                    paths[0].display()
                ),
            ));
        }
    }
    let n = frames.len();
    let mut data = vec![0.0; n * h * w * 3];
    for (f, img) in frames.iter().enumerate() {
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    data[f + y * n + x * n * h + c * n * h * w] =
                        img.pixels[(y * w + x) * 3 + c] as f64 / 255.0;
                }
            }
        }
    }
    DenseTensor::new(vec![n, h, w, 3], data)
}

/// Slices a `(frames, height, width, 3)` tensor into one image per frame.
pub fn frame_images(t: &DenseTensor) -> Result<Vec<DenseTensor>> {
    if t.order() != 4 || t.dims()[3] != 3 {
        return Err(Error::InvalidShape {
            dims: t.dims().to_vec(),
            reason: "a frame tensor must be (frames, height, width, 3)".into(),
        });
    }
    let (n, h, w) = (t.dims()[0], t.dims()[1], t.dims()[2]);
    let src = t.data();
    (0..n)
        .map(|f| {
            DenseTensor::from_fn(vec![h, w, 3], |i| {
                src[f + i[0] * n + i[1] * n * h + i[2] * n * h * w]
            })
        })
        .collect()
}

/// Writes `frame_00001.png`, … into `dir`, creating it if needed.
pub fn save_frames(t: &DenseTensor, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (i, frame) in frame_images(t)?.iter().enumerate() {
        let path = dir.join(format!("frame_{:05}.png", i + 1));
        save_image(frame, &path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_clamps() {
        assert_eq!(quantize(1.3), 255);
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(0.5), 128);
    }

    #[test]
    fn wildcard() {
        assert!(wildcard_match("*.png", "frame_001.png"));
        assert!(wildcard_match("frame_???.png", "frame_001.png"));
        assert!(!wildcard_match("*.png", "frame_001.ppm"));
        assert!(wildcard_match("*", "anything"));
        assert!(wildcard_match("a*b*c", "aXXbYYc"));
        assert!(!wildcard_match("a*b*c", "aXXbYY"));
    }

    #[test]
    fn ppm_header_with_comment() {
        let mut bytes = b"P6\n# note\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 0, 0, 255]);
        let img = parse_ppm(&bytes).unwrap();
        assert_eq!((img.width, img.height), (2, 1));
        let t = img.to_tensor();
        assert_eq!(t.dims(), &[1, 2, 3]);
        assert_eq!(t.get(&[0, 0, 0]), 1.0);
        assert_eq!(t.get(&[0, 1, 2]), 1.0);
        assert!(parse_ppm(&bytes[..bytes.len() - 1]).is_err());
        assert!(parse_ppm(b"P6\n2 1\n65535\n").is_err());
    }

    #[test]
    fn tensor_shape_checks() {
        let t = DenseTensor::zeros(vec![2, 2, 4]).unwrap();
        assert!(RgbImage::from_tensor(&t).is_err());
        assert!(frame_images(&t).is_err());
    }
}
