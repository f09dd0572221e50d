//! Class tokens stamped into the top-left corner of restyled images by the in-process
//! style-transfer doubles.
//!
//! A stamp is a `16 x 16` block whose pixels all equal `[MARKER, hi, lo]`, where
//! `(hi, lo)` are the big-endian bytes of a 16-bit token. Grey images replicated to RGB
//! have equal channels everywhere, so they can only read as stamped if the token is
//! `0x5A5A`, which is never issued.

use image::{DynamicImage, GrayImage, Rgb, RgbImage};

pub const BLOCK: u32 = 16;
pub const MARKER: u8 = 0x5A;
const RESERVED: u16 = u16::from_be_bytes([MARKER, MARKER]);

/// Replicates a grey image to three channels.
pub fn gray_to_rgb(depth: &GrayImage) -> RgbImage {
    RgbImage::from_fn(depth.width(), depth.height(), |x, y| {
        let v = depth.get_pixel(x, y)[0];
        Rgb([v, v, v])
    })
}

/// Writes `token` into the corner block. Images smaller than the block are left as-is.
pub fn stamp(image: &mut RgbImage, token: u16) {
    assert_ne!(token, RESERVED, "token 0x5A5A is reserved");
    if image.width() < BLOCK || image.height() < BLOCK {
        return;
    }
    let [hi, lo] = token.to_be_bytes();
    for y in 0..BLOCK {
        for x in 0..BLOCK {
            image.put_pixel(x, y, Rgb([MARKER, hi, lo]));
        }
    }
}

/// Token stamped into `image`, if any.
pub fn read_stamp(image: &DynamicImage) -> Option<u16> {
    let rgb = match image {
        DynamicImage::ImageRgb8(rgb) => rgb,
        _ => return None,
    };
    if rgb.width() < BLOCK || rgb.height() < BLOCK {
        return None;
    }
    let first = *rgb.get_pixel(0, 0);
    if first[0] != MARKER {
        return None;
    }
    for y in 0..BLOCK {
        for x in 0..BLOCK {
            if *rgb.get_pixel(x, y) != first {
                return None;
            }
        }
    }
    let token = u16::from_be_bytes([first[1], first[2]]);
    (token != RESERVED).then_some(token)
}

/// True for pixels inside the stamp block.
pub fn in_block(x: u32, y: u32) -> bool {
    x < BLOCK && y < BLOCK
}
