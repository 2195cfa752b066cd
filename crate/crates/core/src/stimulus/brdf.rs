//! Analytic BRDF evaluation and importance sampling.
//!
//! All evaluation paths are written so that swapping the two directions
//! produces bit-identical results: half vectors, Fresnel cosines and
//! shadowing terms are built from symmetric expressions only.

use std::f64::consts::PI;

use rand::Rng;

use super::vec3::{orthonormal_basis, reflect, Vec3};
use super::{MaterialSpec, Rgb};

/// Directions closer to the horizon than this are treated as degenerate.
pub const EPS_DIR: f64 = 1e-8;

/// Lower clamp on microfacet lobe width; avoids the delta-lobe singularity
/// at roughness 0.
pub const MIN_ALPHA: f64 = 1e-3;

fn ggx_alpha(roughness: f64) -> f64 {
    (roughness * roughness).max(MIN_ALPHA)
}

/// GGX normal distribution, parameterized by cos of the half-vector angle.
fn ggx_d(cos_h: f64, alpha: f64) -> f64 {
    if cos_h <= 0.0 {
        return 0.0;
    }
    let a2 = alpha * alpha;
    let t = cos_h * cos_h * (a2 - 1.0) + 1.0;
    a2 / (PI * t * t)
}

/// Smith monodirectional shadowing for GGX.
fn smith_g1(cos_v: f64, alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    2.0 * cos_v / (cos_v + (a2 + (1.0 - a2) * cos_v * cos_v).sqrt())
}

/// Schlick Fresnel with the grazing endpoint scaled down for very small f0,
/// so a zero-specular material really has no specular response.
fn schlick(f0: f64, cos_d: f64) -> f64 {
    let f90 = (50.0 * f0).min(1.0);
    let m = (1.0 - cos_d).clamp(0.0, 1.0);
    let m2 = m * m;
    f0 + (f90 - f0) * m2 * m2 * m
}

/// Unpolarized Fresnel reflectance for a dielectric, external incidence.
pub fn fresnel_dielectric(cos_i: f64, ior: f64) -> f64 {
    let cos_i = cos_i.clamp(0.0, 1.0);
    let sin2_t = (1.0 - cos_i * cos_i) / (ior * ior);
    if sin2_t >= 1.0 {
        return 1.0;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    let r_par = (ior * cos_i - cos_t) / (ior * cos_i + cos_t);
    let r_perp = (cos_i - ior * cos_t) / (cos_i + ior * cos_t);
    0.5 * (r_par * r_par + r_perp * r_perp)
}

/// Symmetric half-vector data for a direction pair in the upper hemisphere.
struct HalfVector {
    cos_h: f64,
    /// cos of the angle between either direction and the half vector,
    /// computed symmetrically.
    cos_d: f64,
}

fn half_vector(wi: Vec3, wo: Vec3, n: Vec3) -> Option<HalfVector> {
    let sum = wi + wo;
    let len = sum.length();
    if len < EPS_DIR {
        return None;
    }
    let h = sum / len;
    let cos_d = 0.5 * (h.dot(wi) + h.dot(wo));
    Some(HalfVector { cos_h: h.dot(n), cos_d })
}

/// Evaluate the BRDF for light direction `wi`, view direction `wo` and
/// shading normal `n` (all unit length, pointing away from the surface).
///
/// Degenerate or below-horizon configurations return zero in every channel;
/// the result is always finite and non-negative.
pub fn eval_brdf(material: &MaterialSpec, wi: Vec3, wo: Vec3, n: Vec3) -> Rgb {
    let ci = wi.dot(n);
    let co = wo.dot(n);
    if ci < EPS_DIR || co < EPS_DIR {
        return [0.0; 3];
    }
    match *material {
        MaterialSpec::DisneyPrincipled { base_color, roughness, specular } => {
            let mut out = [
                base_color[0] / PI,
                base_color[1] / PI,
                base_color[2] / PI,
            ];
            if let Some(h) = half_vector(wi, wo, n) {
                let alpha = ggx_alpha(roughness);
                let f0 = 0.08 * specular;
                let d = ggx_d(h.cos_h, alpha);
                let g = smith_g1(ci, alpha) * smith_g1(co, alpha);
                let f = schlick(f0, h.cos_d);
                let spec = d * g * f / (4.0 * ci * co);
                for c in &mut out {
                    *c += spec;
                }
            }
            out
        }
        MaterialSpec::WardDuer { diffuse_albedo, specular_albedo, lobe_width } => {
            let mut out = [
                diffuse_albedo[0] / PI,
                diffuse_albedo[1] / PI,
                diffuse_albedo[2] / PI,
            ];
            if specular_albedo > 0.0 {
                if let Some(h) = half_vector(wi, wo, n) {
                    if h.cos_h > EPS_DIR {
                        let a2 = lobe_width * lobe_width;
                        let tan2 = (1.0 - h.cos_h * h.cos_h) / (h.cos_h * h.cos_h);
                        let lobe = specular_albedo * (-tan2 / a2).exp()
                            / (4.0 * PI * a2 * ci * co);
                        for c in &mut out {
                            *c += lobe;
                        }
                    }
                }
            }
            out
        }
        MaterialSpec::GgxBlackGlass { ior, micro_roughness } => {
            let alpha = micro_roughness.max(MIN_ALPHA);
            match half_vector(wi, wo, n) {
                Some(h) => {
                    let d = ggx_d(h.cos_h, alpha);
                    let g = smith_g1(ci, alpha) * smith_g1(co, alpha);
                    let f = fresnel_dielectric(h.cos_d, ior);
                    let spec = d * g * f / (4.0 * ci * co);
                    [spec; 3]
                }
                None => [0.0; 3],
            }
        }
    }
}

/// Mean of an RGB triple; used for sampling weights.
fn mean_rgb(c: Rgb) -> f64 {
    (c[0] + c[1] + c[2]) / 3.0
}

/// Probability of routing a sample through the specular lobe.
fn specular_select_prob(material: &MaterialSpec) -> f64 {
    match *material {
        MaterialSpec::DisneyPrincipled { base_color, specular, .. } => {
            let spec = 0.08 * specular;
            let diff = mean_rgb(base_color);
            if spec + diff <= 0.0 {
                0.0
            } else {
                (spec / (spec + diff)).clamp(0.1, 0.9)
            }
        }
        MaterialSpec::WardDuer { diffuse_albedo, specular_albedo, .. } => {
            let diff = mean_rgb(diffuse_albedo);
            if specular_albedo + diff <= 0.0 {
                0.0
            } else {
                (specular_albedo / (specular_albedo + diff)).clamp(0.1, 0.9)
            }
        }
        MaterialSpec::GgxBlackGlass { .. } => 1.0,
    }
}

fn cosine_sample_hemisphere(n: Vec3, u1: f64, u2: f64) -> Vec3 {
    let (t, b) = orthonormal_basis(n);
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    let x = r * phi.cos();
    let y = r * phi.sin();
    let z = (1.0 - u1).max(0.0).sqrt();
    (x * t + y * b + z * n).normalized()
}

/// Sample a half vector from the material's specular NDF.
fn sample_half(material: &MaterialSpec, n: Vec3, u1: f64, u2: f64) -> Vec3 {
    let (t, b) = orthonormal_basis(n);
    let phi = 2.0 * PI * u2;
    let tan2 = match *material {
        MaterialSpec::DisneyPrincipled { roughness, .. } => {
            let a = ggx_alpha(roughness);
            a * a * u1 / (1.0 - u1).max(1e-12)
        }
        MaterialSpec::GgxBlackGlass { micro_roughness, .. } => {
            let a = micro_roughness.max(MIN_ALPHA);
            a * a * u1 / (1.0 - u1).max(1e-12)
        }
        MaterialSpec::WardDuer { lobe_width, .. } => {
            -(lobe_width * lobe_width) * u1.max(1e-12).ln()
        }
    };
    let cos_h = 1.0 / (1.0 + tan2).sqrt();
    let sin_h = (1.0 - cos_h * cos_h).max(0.0).sqrt();
    (sin_h * phi.cos() * t + sin_h * phi.sin() * b + cos_h * n).normalized()
}

/// Density of `sample_half` with respect to solid angle around `n`.
fn half_pdf(material: &MaterialSpec, cos_h: f64) -> f64 {
    if cos_h <= 0.0 {
        return 0.0;
    }
    match *material {
        MaterialSpec::DisneyPrincipled { roughness, .. } => {
            ggx_d(cos_h, ggx_alpha(roughness)) * cos_h
        }
        MaterialSpec::GgxBlackGlass { micro_roughness, .. } => {
            ggx_d(cos_h, micro_roughness.max(MIN_ALPHA)) * cos_h
        }
        MaterialSpec::WardDuer { lobe_width, .. } => {
            let a2 = lobe_width * lobe_width;
            let tan2 = (1.0 - cos_h * cos_h) / (cos_h * cos_h);
            (-tan2 / a2).exp() / (PI * a2 * cos_h * cos_h * cos_h)
        }
    }
}

/// Solid-angle pdf of `sample_brdf` producing `wi` for the given `wo`.
pub fn pdf_brdf(material: &MaterialSpec, wi: Vec3, wo: Vec3, n: Vec3) -> f64 {
    let ci = wi.dot(n);
    if ci <= 0.0 || wo.dot(n) <= 0.0 {
        return 0.0;
    }
    let p_spec = specular_select_prob(material);
    let diffuse = ci / PI;
    let spec = match half_vector(wi, wo, n) {
        Some(h) if h.cos_d > EPS_DIR => half_pdf(material, h.cos_h) / (4.0 * h.cos_d),
        _ => 0.0,
    };
    p_spec * spec + (1.0 - p_spec) * diffuse
}

/// Draw an incident direction from a pdf roughly proportional to the BRDF.
/// Returns `(wi, pdf, f)`; pdf 0 flags an unusable sample.
pub fn sample_brdf<R: Rng>(
    material: &MaterialSpec,
    wo: Vec3,
    n: Vec3,
    rng: &mut R,
) -> (Vec3, f64, Rgb) {
    let p_spec = specular_select_prob(material);
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let pick_spec = rng.gen::<f64>() < p_spec;
    let wi = if pick_spec {
        let h = sample_half(material, n, u1, u2);
        reflect(wo, h)
    } else {
        cosine_sample_hemisphere(n, u1, u2)
    };
    if wi.dot(n) <= EPS_DIR {
        return (wi, 0.0, [0.0; 3]);
    }
    let pdf = pdf_brdf(material, wi, wo, n);
    if pdf <= 0.0 || !pdf.is_finite() {
        return (wi, 0.0, [0.0; 3]);
    }
    (wi, pdf, eval_brdf(material, wi, wo, n))
}

/// Monte-Carlo directional-hemispherical reflectance for a view direction
/// `wo`: the fraction of incident energy from `wo` reflected anywhere above
/// the horizon. Channel-averaged.
pub fn hemispherical_reflectance<R: Rng>(
    material: &MaterialSpec,
    wo: Vec3,
    n: Vec3,
    samples: u32,
    rng: &mut R,
) -> f64 {
    let mut acc = 0.0;
    for _ in 0..samples {
        let (wi, pdf, f) = sample_brdf(material, wo, n, rng);
        if pdf > 0.0 {
            acc += mean_rgb(f) * wi.dot(n) / pdf;
        }
    }
    acc / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::vec3::vec3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const N: Vec3 = vec3(0.0, 0.0, 1.0);

    fn unit_from_angles(theta_deg: f64, phi_deg: f64) -> Vec3 {
        let (st, ct) = theta_deg.to_radians().sin_cos();
        let (sp, cp) = phi_deg.to_radians().sin_cos();
        vec3(st * cp, st * sp, ct)
    }

    fn random_upper<R: Rng>(rng: &mut R) -> Vec3 {
        loop {
            let v = vec3(
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>(),
            );
            let l = v.length();
            if l > 1e-3 && v.z / l > 1e-3 {
                return v / l;
            }
        }
    }

    fn grid_materials() -> Vec<MaterialSpec> {
        let mut mats = vec![
            MaterialSpec::WardDuer {
                diffuse_albedo: [0.3, 0.2, 0.1],
                specular_albedo: 0.5,
                lobe_width: 0.05,
            },
            MaterialSpec::GgxBlackGlass { ior: 1.567, micro_roughness: 0.001 },
        ];
        for r in [0.0, 0.25, 0.5] {
            for s in [0.1, 2.5, 5.0] {
                mats.push(MaterialSpec::DisneyPrincipled {
                    base_color: [0.5, 0.5, 0.5],
                    roughness: r,
                    specular: s,
                });
            }
        }
        mats
    }

    #[test]
    fn diffuse_only_at_normal_incidence_with_zero_specular() {
        let m = MaterialSpec::DisneyPrincipled {
            base_color: [1.0, 1.0, 1.0],
            roughness: 1.0,
            specular: 0.0,
        };
        let f = eval_brdf(&m, N, N, N);
        for c in f {
            assert!((c - 1.0 / PI).abs() < 1e-12, "got {c}, want 1/pi");
        }
    }

    #[test]
    fn reciprocity_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for material in grid_materials() {
            for _ in 0..200 {
                let wi = random_upper(&mut rng);
                let wo = random_upper(&mut rng);
                let a = eval_brdf(&material, wi, wo, N);
                let b = eval_brdf(&material, wo, wi, N);
                for k in 0..3 {
                    assert_eq!(a[k].to_bits(), b[k].to_bits(), "{material:?}");
                }
            }
        }
    }

    #[test]
    fn degenerate_directions_return_zero() {
        let m = MaterialSpec::GgxBlackGlass { ior: 1.567, micro_roughness: 0.001 };
        let grazing = vec3(1.0, 0.0, 1e-9).normalized();
        let f = eval_brdf(&m, grazing, N, N);
        assert_eq!(f, [0.0; 3]);
        let below = vec3(0.2, 0.0, -0.9).normalized();
        assert_eq!(eval_brdf(&m, below, N, N), [0.0; 3]);
        for c in eval_brdf(&m, N, N, N) {
            assert!(c.is_finite());
        }
    }

    #[test]
    fn ward_mirror_peak_dominates_off_mirror() {
        // Spec example: on-mirror value at least 10x the 30-degrees-off value.
        let m = MaterialSpec::WardDuer {
            diffuse_albedo: [0.0; 3],
            specular_albedo: 0.5,
            lobe_width: 0.05,
        };
        let wi = unit_from_angles(20.0, 0.0);
        let mirror = unit_from_angles(20.0, 180.0);
        let off = unit_from_angles(50.0, 180.0);
        let on_val = eval_brdf(&m, wi, mirror, N)[0];
        let off_val = eval_brdf(&m, wi, off, N)[0];
        assert!(on_val > 0.0);
        assert!(on_val >= 10.0 * off_val, "on {on_val} off {off_val}");
    }

    #[test]
    fn ward_lobe_matches_direct_formula() {
        let (rho_s, alpha) = (0.5, 0.05);
        let m = MaterialSpec::WardDuer {
            diffuse_albedo: [0.0; 3],
            specular_albedo: rho_s,
            lobe_width: alpha,
        };
        let wi = unit_from_angles(25.0, 10.0);
        let wo = unit_from_angles(40.0, 160.0);
        let h = (wi + wo).normalized();
        let tan2 = (1.0 - h.dot(N).powi(2)) / h.dot(N).powi(2);
        let want = rho_s * (-tan2 / (alpha * alpha)).exp()
            / (4.0 * PI * alpha * alpha * wi.dot(N) * wo.dot(N));
        let got = eval_brdf(&m, wi, wo, N)[0];
        assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn sampled_pdf_is_consistent_with_pdf_brdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for material in grid_materials() {
            let wo = unit_from_angles(35.0, 0.0);
            for _ in 0..100 {
                let (wi, pdf, _) = sample_brdf(&material, wo, N, &mut rng);
                if pdf > 0.0 {
                    let direct = pdf_brdf(&material, wi, wo, N);
                    assert!(
                        (pdf - direct).abs() <= 1e-9 * pdf.max(1.0),
                        "{material:?}: {pdf} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn lambertian_hemispherical_reflectance_matches_albedo() {
        let m = MaterialSpec::DisneyPrincipled {
            base_color: [0.6, 0.6, 0.6],
            roughness: 0.4,
            specular: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let wo = unit_from_angles(30.0, 0.0);
        let r = hemispherical_reflectance(&m, wo, N, 40_000, &mut rng);
        // Schlick tail with f0 = 0 adds well under 1%.
        assert!((r - 0.6).abs() < 0.01, "got {r}");
    }

    #[test]
    fn fresnel_black_glass_normal_incidence() {
        // ((n-1)/(n+1))^2 for n = 1.567
        let f0 = fresnel_dielectric(1.0, 1.567);
        let want = ((1.567 - 1.0) / (1.567 + 1.0f64)).powi(2);
        assert!((f0 - want).abs() < 1e-12);
        assert!((fresnel_dielectric(0.0, 1.567) - 1.0).abs() < 1e-9);
    }
}
