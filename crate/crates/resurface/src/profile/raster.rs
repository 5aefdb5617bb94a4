//! Grayscale images and 64-bit average-hash fingerprints.
//!
//! The fingerprint reduces an image to an 8×8 grid of brightness bits: block
//! `(r, c)` covers pixel rows `⌊r·H/8⌋ .. ⌊(r+1)·H/8⌋` (likewise columns),
//! and its bit is 1 exactly when the block's mean brightness strictly exceeds
//! the global mean. Bits pack row-major with the top-left block in the most
//! significant bit. Comparisons are done in exact integer arithmetic, so the
//! fingerprint is invariant to adding a constant to every pixel or scaling
//! all pixels by a positive factor (ties resolve to 0 either way).
//!
//! Images smaller than 8×8 cannot fill the grid and are rejected.

use crate::error::{Error, Result};

/// An 8-bit grayscale image, pixels in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Raster {
    /// Build a raster from row-major `pixels`.
    ///
    /// # Errors
    ///
    /// Rejects zero dimensions and a pixel buffer whose length is not
    /// `width * height`.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidRaster(format!(
                "{width}x{height} needs {expected} pixels, got {}",
                pixels.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Row-major pixel data.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    fn pixel(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

/// 64-bit average-hash fingerprint of `image`.
///
/// # Errors
///
/// [`Error::ImageTooSmall`] for images narrower or shorter than 8 pixels.
pub fn average_hash(image: &Raster) -> Result<u64> {
    if image.width < 8 || image.height < 8 {
        return Err(Error::ImageTooSmall {
            width: image.width,
            height: image.height,
        });
    }
    let total_count = image.pixels.len() as u128;
    let total_sum: u128 = image.pixels.iter().map(|&p| p as u128).sum();

    let mut bits = 0u64;
    for block_row in 0..8u32 {
        let y0 = block_row * image.height / 8;
        let y1 = (block_row + 1) * image.height / 8;
        for block_col in 0..8u32 {
            let x0 = block_col * image.width / 8;
            let x1 = (block_col + 1) * image.width / 8;
            let mut block_sum = 0u128;
            for y in y0..y1 {
                for x in x0..x1 {
                    block_sum += image.pixel(x, y) as u128;
                }
            }
            let block_count = ((y1 - y0) as u128) * ((x1 - x0) as u128);
            // block_sum/block_count > total_sum/total_count, cross-multiplied
            // so equality (a tie) exactly yields a 0 bit.
            if block_sum * total_count > total_sum * block_count {
                let index = block_row * 8 + block_col;
                bits |= 1u64 << (63 - index);
            }
        }
    }
    Ok(bits)
}

/// Image agreement feature for a profile pair: 1.0 when both images are
/// absent, 0.0 when exactly one is, otherwise 1.0 iff the two fingerprints
/// are identical.
///
/// # Errors
///
/// Propagates [`Error::ImageTooSmall`] from hashing.
pub fn image_match(a: Option<&Raster>, b: Option<&Raster>) -> Result<f64> {
    match (a, b) {
        (None, None) => Ok(1.0),
        (None, Some(_)) | (Some(_), None) => Ok(0.0),
        (Some(a), Some(b)) => Ok(if average_hash(a)? == average_hash(b)? {
            1.0
        } else {
            0.0
        }),
    }
}
