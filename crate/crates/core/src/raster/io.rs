use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use super::{ImageBuffer, ValueRange};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageKind {
    Png8,
    Png16,
    Pfm,
}

impl ImageKind {
    /// `.pfm` files are PFM; `.png` files are classified by their stored
    /// bit depth (the file must exist).
    pub fn detect(path: &Path) -> Result<Self> {
        match extension(path).as_deref() {
            Some("pfm") => Ok(ImageKind::Pfm),
            Some("png") => {
                let dynimg = decode_png(path)?;
                match dynimg {
                    DynamicImage::ImageLuma8(_)
                    | DynamicImage::ImageLumaA8(_)
                    | DynamicImage::ImageRgb8(_)
                    | DynamicImage::ImageRgba8(_) => Ok(ImageKind::Png8),
                    _ => Ok(ImageKind::Png16),
                }
            }
            _ => Err(Error::Format(format!("cannot infer image kind of {}", path.display()))),
        }
    }

    /// Output kind implied by a path's extension; PNG defaults to 8 bits.
    pub fn for_output(path: &Path, png16: bool) -> Result<Self> {
        match extension(path).as_deref() {
            Some("pfm") => Ok(ImageKind::Pfm),
            Some("png") if png16 => Ok(ImageKind::Png16),
            Some("png") => Ok(ImageKind::Png8),
            _ => Err(Error::Format(format!(
                "unsupported output extension for {}",
                path.display()
            ))),
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

pub fn load_image(path: impl AsRef<Path>, kind: ImageKind) -> Result<ImageBuffer> {
    let path = path.as_ref();
    match kind {
        ImageKind::Png8 | ImageKind::Png16 => load_png(path, kind),
        ImageKind::Pfm => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_pfm(&bytes)
        }
    }
}

pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>, kind: ImageKind) -> Result<()> {
    let path = path.as_ref();
    match kind {
        ImageKind::Png8 | ImageKind::Png16 => save_png(img, path, kind),
        ImageKind::Pfm => {
            let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let mut out = BufWriter::new(file);
            out.write_all(&encode_pfm(img))
                .and_then(|_| out.flush())
                .map_err(|e| Error::io(path, e))
        }
    }
}

fn decode_png(path: &Path) -> Result<DynamicImage> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ImageReader::with_format(BufReader::new(file), ImageFormat::Png)
        .decode()
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Format(format!("{}: {other}", path.display())),
        })
}

fn load_png(path: &Path, kind: ImageKind) -> Result<ImageBuffer> {
    let dynimg = decode_png(path)?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    let gray = matches!(
        dynimg,
        DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
    );
    let channels = if gray { 1 } else { 3 };
    let interleaved: Vec<f64> = match (kind, &dynimg) {
        (
            ImageKind::Png8,
            DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageRgb8(_)
            | DynamicImage::ImageRgba8(_),
        ) => {
            if gray {
                dynimg
                    .to_luma8()
                    .into_raw()
                    .into_iter()
                    .map(|b| b as f64 / 255.0)
                    .collect()
            } else {
                dynimg
                    .to_rgb8()
                    .into_raw()
                    .into_iter()
                    .map(|b| b as f64 / 255.0)
                    .collect()
            }
        }
        (
            ImageKind::Png16,
            DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_),
        ) => {
            if gray {
                dynimg
                    .to_luma16()
                    .into_raw()
                    .into_iter()
                    .map(|b| b as f64 / 65535.0)
                    .collect()
            } else {
                dynimg
                    .to_rgb16()
                    .into_raw()
                    .into_iter()
                    .map(|b| b as f64 / 65535.0)
                    .collect()
            }
        }
        _ => {
            return Err(Error::Format(format!(
                "{}: unsupported bit depth / color type {:?} for {kind:?}",
                path.display(),
                dynimg.color()
            )))
        }
    };
    ImageBuffer::new(
        w,
        h,
        channels,
        deinterleave(&interleaved, w * h, channels),
        ValueRange::UNIT,
    )
}

fn save_png(img: &ImageBuffer, path: &Path, kind: ImageKind) -> Result<()> {
    let (w, h, c) = img.dims();
    let inter = interleave(img);
    let dynimg = match kind {
        ImageKind::Png8 => {
            let bytes: Vec<u8> = inter.iter().map(|&v| quantize(v, 255.0) as u8).collect();
            if c == 1 {
                DynamicImage::ImageLuma8(image::GrayImage::from_raw(w as u32, h as u32, bytes).expect("sized"))
            } else {
                DynamicImage::ImageRgb8(image::RgbImage::from_raw(w as u32, h as u32, bytes).expect("sized"))
            }
        }
        _ => {
            let words: Vec<u16> = inter.iter().map(|&v| quantize(v, 65535.0) as u16).collect();
            if c == 1 {
                DynamicImage::ImageLuma16(image::ImageBuffer::from_raw(w as u32, h as u32, words).expect("sized"))
            } else {
                DynamicImage::ImageRgb16(image::ImageBuffer::from_raw(w as u32, h as u32, words).expect("sized"))
            }
        }
    };
    dynimg.save_with_format(path, ImageFormat::Png).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(other.to_string()),
    })
}

/// Clamp to [0,1], scale, round half away from zero.
fn quantize(v: f64, max: f64) -> f64 {
    (v.clamp(0.0, 1.0) * max).round()
}

fn interleave(img: &ImageBuffer) -> Vec<f64> {
    let (n, c) = (img.plane_len(), img.channels());
    let mut out = vec![0.0; n * c];
    for (ch, plane) in img.planes().enumerate() {
        for (i, &v) in plane.iter().enumerate() {
            out[i * c + ch] = v;
        }
    }
    out
}

fn deinterleave(inter: &[f64], n: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * c];
    for (i, px) in inter.chunks_exact(c).enumerate() {
        for (ch, &v) in px.iter().enumerate() {
            out[ch * n + i] = v;
        }
    }
    out
}

/// Encodes as little-endian PFM (negative scale), rows bottom-to-top.
/// Samples are stored as `f32`.
pub(crate) fn encode_pfm(img: &ImageBuffer) -> Vec<u8> {
    let (w, h, c) = img.dims();
    let tag = if c == 1 { "Pf" } else { "PF" };
    let mut out = format!("{tag}\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * c * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            for ch in 0..c {
                out.extend_from_slice(&(img.get(x, y, ch) as f32).to_le_bytes());
            }
        }
    }
    out
}

pub(crate) fn decode_pfm(bytes: &[u8]) -> Result<ImageBuffer> {
    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PFM header".into()));
        }
        String::from_utf8(bytes[start..pos].to_vec()).map_err(|_| Error::Format("non-ASCII PFM header".into()))
    };
    let channels = match token()?.as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => return Err(Error::Format(format!("bad PFM magic {other:?}"))),
    };
    let parse_dim = |s: String| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::Format(format!("bad PFM dimension {s:?}")))
    };
    let w = parse_dim(token()?)?;
    let h = parse_dim(token()?)?;
    let scale_tok = token()?;
    let scale: f64 = scale_tok
        .parse()
        .ok()
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| Error::Format(format!("bad PFM scale {scale_tok:?}")))?;
    // exactly one whitespace byte separates the header from the raster
    let body_start = pos + 1;
    let little = scale < 0.0;
    let n = w
        .checked_mul(h)
        .and_then(|p| p.checked_mul(channels))
        .ok_or_else(|| Error::Format("PFM dimensions overflow".into()))?;
    let body = bytes
        .get(body_start..)
        .filter(|b| b.len() >= n * 4)
        .ok_or_else(|| Error::Format(format!("PFM raster truncated: need {} bytes", n * 4)))?;
    let mut data = vec![0.0; n];
    let plane = w * h;
    for (i, chunk) in body[..n * 4].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        if !v.is_finite() {
            return Err(Error::Format(format!("non-finite PFM sample at index {i}")));
        }
        let (px, ch) = (i / channels, i % channels);
        let (x, yr) = (px % w, px / w);
        let y = h - 1 - yr;
        data[ch * plane + y * w + x] = v as f64;
    }
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    ImageBuffer::new(w, h, channels, data, ValueRange::widened(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn png8_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.png");
        image::GrayImage::from_raw(2, 2, vec![0, 255, 128, 64])
            .unwrap()
            .save(&p)
            .unwrap();
        let img = load_image(&p, ImageKind::Png8).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
        assert_eq!(ImageKind::detect(&p).unwrap(), ImageKind::Png8);
        assert!(matches!(load_image(&p, ImageKind::Png16), Err(Error::Format(_))));
    }

    #[test]
    fn png8_quantization_rules() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.png");
        let img = ImageBuffer::from_gray(2, 1, vec![0.5, 1.7]).unwrap();
        save_image(&img, &p, ImageKind::Png8).unwrap();
        let raw = image::open(&p).unwrap().to_luma8().into_raw();
        assert_eq!(raw, vec![128, 255]);
    }

    #[test]
    fn pfm_single_value() {
        let img = decode_pfm(b"Pf\n1 1\n-1.0\n\x00\x00\x60\x40").unwrap();
        assert_eq!(img.data(), &[3.5]);
        let r = img.declared_range();
        assert_eq!(r.lo, 3.5);
        assert!(r.hi > 3.5);
    }

    #[test]
    fn pfm_big_endian_and_row_order() {
        let mut bytes = b"Pf\n1 2\n1.0\n".to_vec();
        bytes.extend_from_slice(&1.0f32.to_be_bytes());
        bytes.extend_from_slice(&2.0f32.to_be_bytes());
        let img = decode_pfm(&bytes).unwrap();
        // bottom row first on disk
        assert_eq!(img.data(), &[2.0, 1.0]);
    }

    #[test]
    fn pfm_errors() {
        assert!(matches!(decode_pfm(b"P6\n1 1\n-1.0\n"), Err(Error::Format(_))));
        assert!(matches!(decode_pfm(b"Pf\n2 2\n-1.0\n\0\0\0\0"), Err(Error::Format(_))));
        let mut nan = b"Pf\n1 1\n-1.0\n".to_vec();
        nan.extend_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode_pfm(&nan), Err(Error::Format(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_image("/nonexistent/x.pfm", ImageKind::Pfm).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        let err = load_image("/nonexistent/x.png", ImageKind::Png8).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn corrupt_png_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.png");
        fs::write(&p, b"\x89PNG\r\n\x1a\nnot really").unwrap();
        assert!(matches!(load_image(&p, ImageKind::Png8), Err(Error::Format(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pfm_round_trip_is_exact(
            rgb in any::<bool>(),
            vals in prop::collection::vec(-1e4f32..1e4, 5 * 3 * 3),
        ) {
            let c = if rgb { 3 } else { 1 };
            let data: Vec<f64> = vals[..15 * c].iter().map(|&v| v as f64).collect();
            let img = ImageBuffer::new(5, 3, c, data, ValueRange::UNIT).unwrap();
            let back = decode_pfm(&encode_pfm(&img)).unwrap();
            prop_assert_eq!(back.data(), img.data());
        }

        #[test]
        fn png16_round_trip(rgb in any::<bool>(), words in prop::collection::vec(any::<u16>(), 4 * 4 * 3)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("r.png");
            let c = if rgb { 3 } else { 1 };
            let data: Vec<f64> = words[..16 * c].iter().map(|&w| w as f64 / 65535.0).collect();
            let img = ImageBuffer::new(4, 4, c, data, ValueRange::UNIT).unwrap();
            save_image(&img, &p, ImageKind::Png16).unwrap();
            let back = load_image(&p, ImageKind::Png16).unwrap();
            prop_assert_eq!(back.data(), img.data());
            let again = dir.path().join("r2.png");
            save_image(&back, &again, ImageKind::Png16).unwrap();
            prop_assert_eq!(fs::read(&p).unwrap(), fs::read(&again).unwrap());
        }

        #[test]
        fn png16_error_bound(vals in prop::collection::vec(0.0f64..=1.0, 9)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("q.png");
            let img = ImageBuffer::from_gray(3, 3, vals).unwrap();
            save_image(&img, &p, ImageKind::Png16).unwrap();
            let back = load_image(&p, ImageKind::Png16).unwrap();
            prop_assert!(back.max_abs_diff(&img) <= 1.0 / 65535.0);
        }
    }
}
