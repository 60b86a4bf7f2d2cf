//! Binary 8-bit PGM (P5) input and output.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use super::GrayImage;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Decodes an 8-bit binary PGM from memory.
pub fn decode<T: Real>(bytes: &[u8]) -> Result<GrayImage<T>> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::Parse("not a binary PGM (missing P5 magic)".into()));
    }
    let decoder = PnmDecoder::new(bytes).map_err(|e| Error::Parse(format!("PGM header: {e}")))?;
    let image =
        DynamicImage::from_decoder(decoder).map_err(|e| Error::Parse(format!("PGM body: {e}")))?;
    let DynamicImage::ImageLuma8(gray) = image else {
        return Err(Error::Parse(
            "only 8-bit PGM (maxval <= 255) is supported".into(),
        ));
    };
    let (w, h) = gray.dimensions();
    let pixels = gray
        .into_raw()
        .into_iter()
        .map(|v| T::lit(f64::from(v)))
        .collect();
    GrayImage::new(w as usize, h as usize, pixels)
}

pub fn read<T: Real>(path: impl AsRef<Path>) -> Result<GrayImage<T>> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Encodes `image` as P5, rounding and clamping each value into 0..=255.
pub fn encode<T: Real>(image: &GrayImage<T>) -> Result<Vec<u8>> {
    let bytes: Vec<u8> = image
        .pixels()
        .iter()
        .map(|v| v.as_f64().round().clamp(0.0, 255.0) as u8)
        .collect();
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(
            &bytes,
            image.width() as u32,
            image.height() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| Error::Parse(format!("PGM encode: {e}")))?;
    Ok(out)
}

pub fn write<T: Real>(path: impl AsRef<Path>, image: &GrayImage<T>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(image)?;
    File::create(path)
        .and_then(|f| {
            let mut w = BufWriter::new(f);
            w.write_all(&bytes)?;
            w.flush()
        })
        .map_err(|e| Error::io(path, e))
}

/// Linearly rescales a real raster onto 0..=255 (min to 0, max to 255) for viewing.
pub fn rescale_for_display<T: Real>(
    width: usize,
    height: usize,
    values: &[T],
) -> Result<GrayImage<f64>> {
    let (lo, hi) = values
        .iter()
        .map(|v| v.as_f64())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    let pixels = values
        .iter()
        .map(|v| {
            if span > 0.0 {
                (v.as_f64() - lo) / span * 255.0
            } else {
                0.0
            }
        })
        .collect();
    GrayImage::new(width, height, pixels)
}
