//! Exposure-gamma tone mapping from linear HDR to display range.

use super::ImageBuffer;
use crate::error::{Error, Result};

/// Tone-mapped image with every channel in [0, 1]. Carries the source mask
/// so downstream consumers can keep masking after the HDR data is gone.
#[derive(Debug, Clone)]
pub struct DisplayImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[f64; 3]>,
    pub mask: Vec<bool>,
}

/// Map each channel through c' = clamp((e * c)^(1/gamma), 0, 1).
pub fn tone_map(hdr: &ImageBuffer, exposure: f64, gamma: f64) -> Result<DisplayImage> {
    if !(exposure > 0.0) || !(gamma > 0.0) {
        return Err(Error::invalid(format!(
            "tone_map requires positive exposure and gamma, got e={exposure} gamma={gamma}"
        )));
    }
    let inv_gamma = 1.0 / gamma;
    let pixels = hdr
        .pixels
        .iter()
        .map(|px| {
            let mut out = [0.0; 3];
            for (o, &c) in out.iter_mut().zip(px.iter()) {
                *o = (exposure * c as f64).max(0.0).powf(inv_gamma).clamp(0.0, 1.0);
            }
            out
        })
        .collect();
    Ok(DisplayImage {
        width: hdr.width,
        height: hdr.height,
        pixels,
        mask: hdr.mask.clone(),
    })
}
