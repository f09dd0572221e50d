use std::io::Cursor;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use image::{DynamicImage, ImageFormat};

use super::BackendError;

pub fn encode_png(image: &DynamicImage) -> Result<Vec<u8>, BackendError> {
    super::check_image_size(image.width(), image.height())?;
    let mut buf = Cursor::new(Vec::new());
    image
        .write_to(&mut buf, ImageFormat::Png)
        .map_err(|e| BackendError::Decode(e.to_string()))?;
    Ok(buf.into_inner())
}

pub fn decode_png(bytes: &[u8]) -> Result<DynamicImage, BackendError> {
    let image = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| BackendError::Decode(e.to_string()))?;
    super::check_image_size(image.width(), image.height())?;
    Ok(image)
}

pub fn encode_png_b64(image: &DynamicImage) -> Result<String, BackendError> {
    Ok(STANDARD.encode(encode_png(image)?))
}

pub fn decode_png_b64(text: &str) -> Result<DynamicImage, BackendError> {
    let bytes = STANDARD
        .decode(text.trim())
        .map_err(|e| BackendError::Decode(format!("bad base64: {e}")))?;
    decode_png(&bytes)
}
