use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ColorType, DynamicImage, ExtendedColorType, ImageEncoder, ImageError, ImageFormat};

use super::RasterImage;
use crate::error::{Error, Result};

fn map_image_error(e: ImageError) -> Error {
    match e {
        ImageError::Unsupported(u) => Error::Unsupported(u.to_string()),
        other => Error::Decode(other.to_string()),
    }
}

/// Decodes a PNG or baseline JPEG stream into an 8-bit gray or RGB raster.
///
/// Alpha is dropped and 16-bit samples are scaled down to 8 bits.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    let format = image::guess_format(bytes).map_err(map_image_error)?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(Error::Unsupported(format!("{format:?} streams are not supported")));
    }
    let dynamic = image::load_from_memory_with_format(bytes, format).map_err(map_image_error)?;
    from_dynamic(dynamic)
}

fn from_dynamic(dynamic: DynamicImage) -> Result<RasterImage> {
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    match dynamic.color() {
        ColorType::L8 | ColorType::L16 | ColorType::La8 | ColorType::La16 => {
            RasterImage::new(w, h, 1, dynamic.into_luma8().into_raw())
        }
        ColorType::Rgb8 | ColorType::Rgb16 | ColorType::Rgba8 | ColorType::Rgba16 => {
            RasterImage::new(w, h, 3, dynamic.into_rgb8().into_raw())
        }
        other => Err(Error::Unsupported(format!("sample layout {other:?}"))),
    }
}

pub fn read_image(path: &Path) -> Result<RasterImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Decode(m) => Error::Decode(format!("{}: {m}", path.display())),
        Error::Unsupported(m) => Error::Unsupported(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Lossless PNG encoding of an 8-bit raster.
pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let color = if img.channels() == 1 {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    };
    PngEncoder::new(&mut out)
        .write_image(img.data(), img.width() as u32, img.height() as u32, color)
        .map_err(|e| Error::Decode(format!("PNG encoding failed: {e}")))?;
    Ok(out)
}

pub fn write_png(path: &Path, img: &RasterImage) -> Result<()> {
    let bytes = encode_png(img)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
