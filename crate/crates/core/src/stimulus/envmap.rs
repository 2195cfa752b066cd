//! Procedural lat-long environment maps: generation from spherical Gaussian
//! lobes, Gaussian blurring with correct spherical wrapping, importance
//! sampling, and a spectral frequency-content measure.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::vec3::{vec3, Vec3};
use super::{IlluminationSpec, Rgb};
use crate::error::{Error, Result};

/// Flat base radiance added under the Gaussian lobes so no direction is
/// fully dark.
const AMBIENT: f64 = 0.15;

/// A lat-long radiance map with precomputed luminance CDFs for importance
/// sampling. Row 0 is the top of the map (polar angle near zero); the
/// vertical axis of the world is +y.
#[derive(Debug, Clone)]
pub struct EnvironmentMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<Rgb>,
    /// Per-texel selection probability (luminance times row solid-angle
    /// weight, normalized over the map).
    texel_prob: Vec<f64>,
    row_cdf: Vec<f64>,
    cond_cdf: Vec<f64>,
}

fn luminance(c: Rgb) -> f64 {
    0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2]
}

/// Build the radiance map described by `spec`.
pub fn generate_environment(spec: &IlluminationSpec) -> Result<EnvironmentMap> {
    spec.validate()?;
    match spec {
        IlluminationSpec::Procedural { freq_level, seed, resolution } => {
            Ok(procedural_map(*freq_level, *seed, *resolution))
        }
        IlluminationSpec::Blurred { source, kernel_size } => {
            let base = generate_environment(source)?;
            blur_map(&base, *kernel_size)
        }
    }
}

/// Gaussian lobe population for one frequency level: more and narrower
/// lobes as the level rises, with amplitude scaled to keep the total energy
/// roughly constant across levels.
fn procedural_map(freq_level: u8, seed: u64, resolution: (u32, u32)) -> EnvironmentMap {
    let (w, h) = resolution;
    let count = 3usize << (freq_level - 1);
    let kappa = 2.0 * 5f64.powi(freq_level as i32 - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lobes: Vec<(Vec3, Rgb, f64)> = (0..count)
        .map(|_| {
            let axis = loop {
                let v = vec3(
                    rng.gen::<f64>() * 2.0 - 1.0,
                    rng.gen::<f64>() * 2.0 - 1.0,
                    rng.gen::<f64>() * 2.0 - 1.0,
                );
                let l = v.length();
                if (1e-3..=1.0).contains(&l) {
                    break v / l;
                }
            };
            let color = [
                0.25 + 0.75 * rng.gen::<f64>(),
                0.25 + 0.75 * rng.gen::<f64>(),
                0.25 + 0.75 * rng.gen::<f64>(),
            ];
            let amp = (kappa / count as f64) * (0.5 + rng.gen::<f64>());
            (axis, color, amp)
        })
        .collect();

    let mut data = vec![[0.0; 3]; (w * h) as usize];
    for y in 0..h {
        let theta = PI * (y as f64 + 0.5) / h as f64;
        let (st, ct) = theta.sin_cos();
        for x in 0..w {
            let phi = TAU * (x as f64 + 0.5) / w as f64;
            let dir = vec3(st * phi.cos(), ct, st * phi.sin());
            let mut c = [AMBIENT; 3];
            for (axis, color, amp) in &lobes {
                let e = amp * (kappa * (dir.dot(*axis) - 1.0)).exp();
                c[0] += e * color[0];
                c[1] += e * color[1];
                c[2] += e * color[2];
            }
            data[(y * w + x) as usize] = c;
        }
    }
    EnvironmentMap::from_data(w, h, data)
}

/// Gaussian tap offsets for a `size`-tap kernel. Even sizes use symmetric
/// half-integer offsets, odd sizes the usual centered integers.
fn kernel_taps(size: u32) -> Vec<(f64, f64)> {
    let sigma = size as f64 / 6.0;
    let offsets: Vec<f64> = if size % 2 == 0 {
        let half = size as i64 / 2;
        (-half..half).map(|i| i as f64 + 0.5).collect()
    } else {
        let half = size as i64 / 2;
        (-half..=half).map(|i| i as f64).collect()
    };
    let mut taps: Vec<(f64, f64)> = offsets
        .into_iter()
        .map(|o| (o, (-(o * o) / (2.0 * sigma * sigma)).exp()))
        .collect();
    let total: f64 = taps.iter().map(|(_, w)| w).sum();
    for t in &mut taps {
        t.1 /= total;
    }
    taps
}

/// Latitude wrap: indices past a pole reflect back and jump half a turn in
/// longitude, which is where those directions actually live on the sphere.
fn wrap_pole(x: i64, y: i64, w: i64, h: i64) -> (usize, usize) {
    let (mut x, mut y) = (x, y);
    loop {
        if y < 0 {
            y = -1 - y;
            x += w / 2;
        } else if y >= h {
            y = 2 * h - 1 - y;
            x += w / 2;
        } else {
            break;
        }
    }
    (x.rem_euclid(w) as usize, y as usize)
}

/// Read the map at a possibly fractional, possibly out-of-range position.
/// Half-integer positions average the two adjacent texels.
fn tap(data: &[Rgb], w: i64, h: i64, x: f64, y: f64) -> Rgb {
    let fetch = |xi: i64, yi: i64| -> Rgb {
        let (xu, yu) = wrap_pole(xi, yi, w, h);
        data[yu * w as usize + xu]
    };
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    if fx == 0.0 && fy == 0.0 {
        return fetch(x0 as i64, y0 as i64);
    }
    let mut out = [0.0; 3];
    for (yi, wy) in [(y0 as i64, 1.0 - fy), (y0 as i64 + 1, fy)] {
        if wy == 0.0 {
            continue;
        }
        for (xi, wx) in [(x0 as i64, 1.0 - fx), (x0 as i64 + 1, fx)] {
            if wx == 0.0 {
                continue;
            }
            let c = fetch(xi, yi);
            for k in 0..3 {
                out[k] += wy * wx * c[k];
            }
        }
    }
    out
}

/// Separable Gaussian blur: periodic in longitude, pole-reflected in
/// latitude. The kernel is normalized, so the plain pixel sum is preserved.
pub fn blur_map(src: &EnvironmentMap, kernel_size: u32) -> Result<EnvironmentMap> {
    if kernel_size == 0 {
        return Err(Error::invalid("blur kernel size must be positive"));
    }
    if kernel_size > src.width.min(src.height) {
        return Err(Error::invalid(format!(
            "blur kernel {} exceeds map resolution {}x{}",
            kernel_size, src.width, src.height
        )));
    }
    let (w, h) = (src.width as i64, src.height as i64);
    let taps = kernel_taps(kernel_size);

    let mut horiz = vec![[0.0; 3]; src.data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (o, wt) in &taps {
                let c = tap(&src.data, w, h, x as f64 + o, y as f64);
                for k in 0..3 {
                    acc[k] += wt * c[k];
                }
            }
            horiz[(y * w + x) as usize] = acc;
        }
    }
    let mut out = vec![[0.0; 3]; src.data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (o, wt) in &taps {
                let c = tap(&horiz, w, h, x as f64, y as f64 + o);
                for k in 0..3 {
                    acc[k] += wt * c[k];
                }
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    Ok(EnvironmentMap::from_data(src.width, src.height, out))
}

impl EnvironmentMap {
    /// Wrap raw radiance data and precompute the sampling distribution.
    pub fn from_data(width: u32, height: u32, data: Vec<Rgb>) -> Self {
        assert_eq!(data.len(), (width * height) as usize);
        let (w, h) = (width as usize, height as usize);
        let mut texel_prob = vec![0.0; data.len()];
        for y in 0..h {
            let sin_theta = (PI * (y as f64 + 0.5) / h as f64).sin();
            for x in 0..w {
                texel_prob[y * w + x] = luminance(data[y * w + x]).max(0.0) * sin_theta;
            }
        }
        let total: f64 = texel_prob.iter().sum();
        if total > 0.0 {
            for p in &mut texel_prob {
                *p /= total;
            }
        } else {
            let uniform = 1.0 / texel_prob.len() as f64;
            texel_prob.fill(uniform);
        }
        let mut row_cdf = vec![0.0; h];
        let mut cond_cdf = vec![0.0; data.len()];
        let mut row_acc = 0.0;
        for y in 0..h {
            let row_sum: f64 = texel_prob[y * w..(y + 1) * w].iter().sum();
            let mut acc = 0.0;
            for x in 0..w {
                acc += texel_prob[y * w + x];
                cond_cdf[y * w + x] = if row_sum > 0.0 { acc / row_sum } else { (x + 1) as f64 / w as f64 };
            }
            cond_cdf[(y + 1) * w - 1] = 1.0;
            row_acc += row_sum;
            row_cdf[y] = row_acc;
        }
        row_cdf[h - 1] = 1.0;
        EnvironmentMap { width, height, data, texel_prob, row_cdf, cond_cdf }
    }

    /// Texel coordinates of a unit direction.
    fn dir_to_texel(&self, dir: Vec3) -> (usize, usize) {
        let theta = dir.y.clamp(-1.0, 1.0).acos();
        let phi = dir.z.atan2(dir.x).rem_euclid(TAU);
        let x = ((phi / TAU * self.width as f64) as usize).min(self.width as usize - 1);
        let y = ((theta / PI * self.height as f64) as usize).min(self.height as usize - 1);
        (x, y)
    }

    /// Radiance arriving from direction `dir` (nearest texel).
    pub fn value(&self, dir: Vec3) -> Rgb {
        let (x, y) = self.dir_to_texel(dir);
        self.data[y * self.width as usize + x]
    }

    /// Solid-angle pdf that `sample` produces `dir`.
    pub fn pdf(&self, dir: Vec3) -> f64 {
        let (x, y) = self.dir_to_texel(dir);
        let p = self.texel_prob[y * self.width as usize + x];
        let sin_theta = (1.0 - dir.y * dir.y).max(0.0).sqrt().max(1e-9);
        p * (self.width as f64 * self.height as f64) / (2.0 * PI * PI * sin_theta)
    }

    /// Draw a direction proportional to luminance times solid angle.
    /// Returns the direction and its solid-angle pdf.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (Vec3, f64) {
        let (w, h) = (self.width as usize, self.height as usize);
        let u1: f64 = rng.gen();
        let y = match self.row_cdf.binary_search_by(|c| c.partial_cmp(&u1).unwrap()) {
            Ok(i) | Err(i) => i.min(h - 1),
        };
        let row = &self.cond_cdf[y * w..(y + 1) * w];
        let u2: f64 = rng.gen();
        let x = match row.binary_search_by(|c| c.partial_cmp(&u2).unwrap()) {
            Ok(i) | Err(i) => i.min(w - 1),
        };
        // Uniform jitter inside the texel, in (theta, phi) space.
        let theta = PI * (y as f64 + rng.gen::<f64>()) / h as f64;
        let phi = TAU * (x as f64 + rng.gen::<f64>()) / w as f64;
        let (st, ct) = theta.sin_cos();
        let dir = vec3(st * phi.cos(), ct, st * phi.sin());
        let p = self.texel_prob[y * w + x];
        let pdf = p * (w as f64 * h as f64) / (2.0 * PI * PI * st.max(1e-9));
        (dir, pdf)
    }

    /// Plain sum of all channels over all texels.
    pub fn pixel_sum(&self) -> f64 {
        self.data.iter().map(|c| c[0] + c[1] + c[2]).sum()
    }

    /// Mean radiance weighted by texel solid angle, channel-averaged.
    pub fn mean_radiance(&self) -> f64 {
        let h = self.height as usize;
        let w = self.width as usize;
        let mut num = 0.0;
        let mut den = 0.0;
        for y in 0..h {
            let sin_theta = (PI * (y as f64 + 0.5) / h as f64).sin();
            for x in 0..w {
                let c = self.data[y * w + x];
                num += sin_theta * (c[0] + c[1] + c[2]) / 3.0;
                den += sin_theta;
            }
        }
        num / den
    }
}

/// Fraction of non-DC spectral energy of the map's luminance at normalized
/// radial frequency at or above `cutoff`. A constant map returns 0.
///
/// The map is mirrored vertically before the transform. Longitude is
/// genuinely periodic, latitude is not; without the even extension the
/// top-to-bottom jump leaks artificial energy into every vertical frequency.
pub fn high_freq_content(env: &EnvironmentMap, cutoff: f64) -> f64 {
    let (w, h) = (env.width as usize, env.height as usize);
    let lum: Vec<f64> = env.data.iter().map(|&c| luminance(c)).collect();
    let ext = mirror_rows(&lum, w, h);
    spectral_fraction(&dft2(&ext, w, 2 * h), w, 2 * h, cutoff)
}

/// Stack the image on top of its vertical flip, doubling the height.
fn mirror_rows(img: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * w * h);
    out.extend_from_slice(img);
    for y in (0..h).rev() {
        out.extend_from_slice(&img[y * w..(y + 1) * w]);
    }
    out
}

/// Shared tail of the frequency-content measure: fraction of non-DC power at
/// radial frequency >= cutoff. Round-off guard: spectra that are non-DC only
/// through float noise count as constant.
fn spectral_fraction(spec: &[(f64, f64)], w: usize, h: usize, cutoff: f64) -> f64 {
    let dc = {
        let (re, im) = spec[0];
        re * re + im * im
    };
    let mut total = 0.0;
    let mut high = 0.0;
    for fy in 0..h {
        for fx in 0..w {
            if fx == 0 && fy == 0 {
                continue;
            }
            let (re, im) = spec[fy * w + fx];
            let e = re * re + im * im;
            total += e;
            let u = fx.min(w - fx) as f64 / w as f64;
            let v = fy.min(h - fy) as f64 / h as f64;
            if (u * u + v * v).sqrt() >= cutoff {
                high += e;
            }
        }
    }
    if total <= 1e-20 * dc.max(1e-300) {
        0.0
    } else {
        high / total
    }
}

/// Separable 2D DFT of a real image; returns (re, im) per frequency bin.
fn dft2(img: &[f64], w: usize, h: usize) -> Vec<(f64, f64)> {
    // Rows first.
    let mut rows = vec![(0.0, 0.0); w * h];
    for y in 0..h {
        for fx in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for x in 0..w {
                let ang = -TAU * fx as f64 * x as f64 / w as f64;
                let v = img[y * w + x];
                re += v * ang.cos();
                im += v * ang.sin();
            }
            rows[y * w + fx] = (re, im);
        }
    }
    // Then columns of the intermediate.
    let mut out = vec![(0.0, 0.0); w * h];
    for fx in 0..w {
        for fy in 0..h {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                let ang = -TAU * fy as f64 * y as f64 / h as f64;
                let (r, i) = rows[y * w + fx];
                let (c, s) = (ang.cos(), ang.sin());
                re += r * c - i * s;
                im += r * s + i * c;
            }
            out[fy * w + fx] = (re, im);
        }
    }
    out
}
