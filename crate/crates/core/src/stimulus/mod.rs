//! Synthetic stimulus generation: analytic BRDFs, procedural geometry and
//! illumination, a direct-lighting renderer, tone mapping, and the virtual
//! glossmeter.

pub mod brdf;
pub mod envmap;
pub mod geometry;
pub mod meter;
pub mod render;
pub mod tonemap;
pub mod vec3;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use brdf::{eval_brdf, hemispherical_reflectance};
pub use envmap::{generate_environment, high_freq_content, EnvironmentMap};
pub use geometry::{generate_geometry, SurfaceField};
pub use meter::radiance_meter;
pub use render::render;
pub use tonemap::{tone_map, DisplayImage};

/// Linear RGB triple.
pub type Rgb = [f64; 3];

/// Surface reflectance model of one stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum MaterialSpec {
    /// Lambert diffuse plus one GGX specular lobe with the standard
    /// `F0 = 0.08 * specular` remapping and `alpha = roughness^2`.
    DisneyPrincipled {
        base_color: Rgb,
        roughness: f64,
        specular: f64,
    },
    /// Normalized Ward lobe with the Duer correction factor.
    WardDuer {
        diffuse_albedo: Rgb,
        specular_albedo: f64,
        lobe_width: f64,
    },
    /// Near-mirror microfacet reference surface with an absorbing substrate.
    GgxBlackGlass { ior: f64, micro_roughness: f64 },
}

impl MaterialSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MaterialSpec::DisneyPrincipled { base_color, roughness, specular } => {
                base_color.iter().all(|c| (0.0..=1.0).contains(c))
                    && (0.0..=1.0).contains(&roughness)
                    && specular >= 0.0
            }
            MaterialSpec::WardDuer { diffuse_albedo, specular_albedo, lobe_width } => {
                diffuse_albedo.iter().all(|c| (0.0..=1.0).contains(c))
                    && specular_albedo >= 0.0
                    && lobe_width > 0.0
            }
            MaterialSpec::GgxBlackGlass { ior, micro_roughness } => {
                ior > 1.0 && micro_roughness > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("material out of range: {self:?}")))
        }
    }
}

/// Base shape of the rendered object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseShape {
    Sphere,
    BumpySphere,
}

/// Object geometry: a unit sphere, optionally radially displaced by smooth
/// seeded noise and rotated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub base_shape: BaseShape,
    /// Displacement amplitude as a fraction of the sphere radius.
    pub bumpiness: f64,
    /// XYZ Euler rotation in degrees.
    pub rotation: [f64; 3],
    /// Seed for the bump noise field.
    pub seed: u64,
}

impl GeometrySpec {
    pub fn sphere() -> Self {
        GeometrySpec {
            base_shape: BaseShape::Sphere,
            bumpiness: 0.0,
            rotation: [0.0; 3],
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bumpiness < 0.0 {
            return Err(Error::invalid(format!(
                "bumpiness must be >= 0, got {}",
                self.bumpiness
            )));
        }
        if self.base_shape == BaseShape::Sphere && self.bumpiness != 0.0 {
            return Err(Error::invalid(
                "base_shape sphere requires bumpiness 0 (use bumpy_sphere)",
            ));
        }
        Ok(())
    }

    /// Effective displacement amplitude (zero for the plain sphere).
    pub fn amplitude(&self) -> f64 {
        match self.base_shape {
            BaseShape::Sphere => 0.0,
            BaseShape::BumpySphere => self.bumpiness,
        }
    }
}

/// Environment illumination. `Procedural` maps are sums of random spherical
/// Gaussian lobes whose angular width shrinks as `freq_level` rises.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IlluminationSpec {
    Procedural {
        /// 1 (lowest high-frequency content) ..= 5 (highest).
        freq_level: u8,
        seed: u64,
        /// Lat-long resolution as (width, height) pixels.
        resolution: (u32, u32),
    },
    Blurred {
        source: Box<IlluminationSpec>,
        /// Gaussian kernel side length in pixels.
        kernel_size: u32,
    },
}

impl IlluminationSpec {
    pub fn resolution(&self) -> (u32, u32) {
        match self {
            IlluminationSpec::Procedural { resolution, .. } => *resolution,
            IlluminationSpec::Blurred { source, .. } => source.resolution(),
        }
    }

    /// Frequency level of the underlying procedural map.
    pub fn base_freq_level(&self) -> u8 {
        match self {
            IlluminationSpec::Procedural { freq_level, .. } => *freq_level,
            IlluminationSpec::Blurred { source, .. } => source.base_freq_level(),
        }
    }

    pub fn is_blurred(&self) -> bool {
        matches!(self, IlluminationSpec::Blurred { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            IlluminationSpec::Procedural { freq_level, resolution, .. } => {
                if !(1..=5).contains(freq_level) {
                    return Err(Error::invalid(format!(
                        "freq_level must be in 1..=5, got {freq_level}"
                    )));
                }
                if resolution.0 < 16 || resolution.1 < 8 {
                    return Err(Error::invalid(format!(
                        "environment resolution must be at least 16x8, got {resolution:?}"
                    )));
                }
                Ok(())
            }
            IlluminationSpec::Blurred { source, kernel_size } => {
                source.validate()?;
                let (w, h) = source.resolution();
                if *kernel_size == 0 || *kernel_size > w || *kernel_size > h {
                    return Err(Error::invalid(format!(
                        "blur kernel {kernel_size} does not fit a {w}x{h} map"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Pinhole camera on the +z axis looking at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub distance: f64,
    pub fov_deg: f64,
}

impl Default for CameraSpec {
    fn default() -> Self {
        // Object fills roughly 70% of the frame at the default bump range.
        CameraSpec { distance: 3.2, fov_deg: 48.0 }
    }
}

/// Raster and sampling settings for one render.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderSettings {
    pub width: u32,
    pub height: u32,
    pub samples_per_pixel: u32,
    pub exposure: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings {
            width: 64,
            height: 64,
            samples_per_pixel: 16,
            exposure: 2.0,
            gamma: 2.2,
            seed: 0,
        }
    }
}

/// Full description of one stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub geometry: GeometrySpec,
    pub material: MaterialSpec,
    pub illumination: IlluminationSpec,
    pub camera: CameraSpec,
    pub render: RenderSettings,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.material.validate()?;
        self.illumination.validate()?;
        if self.render.samples_per_pixel == 0 {
            return Err(Error::invalid("samples_per_pixel must be > 0"));
        }
        if self.render.width == 0 || self.render.height == 0 {
            return Err(Error::invalid("render resolution must be non-zero"));
        }
        if self.render.exposure <= 0.0 || self.render.gamma <= 0.0 {
            return Err(Error::invalid("exposure and gamma must be > 0"));
        }
        if self.camera.distance <= 0.0 || !(0.0..180.0).contains(&self.camera.fov_deg)
            || self.camera.fov_deg <= 0.0
        {
            return Err(Error::invalid("camera distance/fov out of range"));
        }
        Ok(())
    }
}

/// Linear HDR raster plus a foreground mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    pub width: u32,
    pub height: u32,
    /// Row-major linear RGB, non-negative.
    pub pixels: Vec<[f32; 3]>,
    /// True where the center camera ray hits the object.
    pub mask: Vec<bool>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32) -> Self {
        let n = (width as usize) * (height as usize);
        ImageBuffer {
            width,
            height,
            pixels: vec![[0.0; 3]; n],
            mask: vec![false; n],
        }
    }

    pub fn foreground_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Rec.709 luminance of one pixel.
    pub fn luminance(px: [f32; 3]) -> f64 {
        0.2126 * px[0] as f64 + 0.7152 * px[1] as f64 + 0.0722 * px[2] as f64
    }

    /// Mean luminance over masked pixels whose eight neighbours are all
    /// masked too. Rim pixels are partially covered by the object and mix in
    /// background radiance, so radiometric checks should use this mean.
    pub fn mean_interior_luminance(&self) -> f64 {
        let (w, h) = (self.width as usize, self.height as usize);
        let masked = |x: isize, y: isize| -> bool {
            x >= 0
                && y >= 0
                && (x as usize) < w
                && (y as usize) < h
                && self.mask[y as usize * w + x as usize]
        };
        let mut sum = 0.0;
        let mut n = 0usize;
        for y in 0..h as isize {
            for x in 0..w as isize {
                if !masked(x, y) {
                    continue;
                }
                let interior = (-1..=1).all(|dy| {
                    (-1..=1).all(|dx| masked(x + dx, y + dy))
                });
                if interior {
                    sum += Self::luminance(self.pixels[y as usize * w + x as usize]);
                    n += 1;
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Mean Rec.709 luminance over masked (foreground) pixels.
    pub fn mean_masked_luminance(&self) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (px, &m) in self.pixels.iter().zip(&self.mask) {
            if m {
                sum += Self::luminance(*px);
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}
