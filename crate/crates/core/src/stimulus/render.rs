//! Direct-lighting renderer: one bounce from an environment map, with
//! multiple importance sampling between light and BRDF strategies. No
//! shadow rays; the environment is taken as visible from every point.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::brdf::{eval_brdf, pdf_brdf, sample_brdf, EPS_DIR};
use super::envmap::{generate_environment, EnvironmentMap};
use super::geometry::{generate_geometry, SurfaceField};
use super::vec3::{vec3, Vec3};
use super::{ImageBuffer, MaterialSpec, SceneSpec};
use crate::error::Result;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-pixel stream so the image does not depend on traversal
/// order.
fn pixel_rng(seed: u64, x: u32, y: u32) -> ChaCha8Rng {
    let mixed = splitmix64(seed ^ splitmix64(((x as u64) << 32) | y as u64 | 1));
    ChaCha8Rng::seed_from_u64(mixed)
}

fn power_heuristic(pdf_a: f64, pdf_b: f64) -> f64 {
    let a2 = pdf_a * pdf_a;
    a2 / (a2 + pdf_b * pdf_b)
}

/// Direct radiance leaving the surface point towards `wo`.
fn shade<R: Rng>(
    material: &MaterialSpec,
    env: &EnvironmentMap,
    n: Vec3,
    wo: Vec3,
    rng: &mut R,
) -> [f64; 3] {
    if wo.dot(n) <= EPS_DIR {
        return [0.0; 3];
    }
    let mut out = [0.0; 3];

    // Light strategy: pick a direction from the environment distribution.
    let (wl, pdf_e) = env.sample(rng);
    let cos_l = wl.dot(n);
    if pdf_e > 0.0 && cos_l > EPS_DIR {
        let f = eval_brdf(material, wl, wo, n);
        let pdf_b = pdf_brdf(material, wl, wo, n);
        let w = power_heuristic(pdf_e, pdf_b);
        let radiance = env.value(wl);
        let scale = w * cos_l / pdf_e;
        for k in 0..3 {
            out[k] += scale * f[k] * radiance[k];
        }
    }

    // BRDF strategy: pick a direction from the material's own lobes.
    let (wi, pdf_b, f) = sample_brdf(material, wo, n, rng);
    if pdf_b > 0.0 {
        let pdf_e2 = env.pdf(wi);
        let w = power_heuristic(pdf_b, pdf_e2);
        let radiance = env.value(wi);
        let scale = w * wi.dot(n) / pdf_b;
        for k in 0..3 {
            out[k] += scale * f[k] * radiance[k];
        }
    }
    out
}

/// Render the scene, building geometry and environment from the spec.
pub fn render(scene: &SceneSpec) -> Result<ImageBuffer> {
    scene.validate()?;
    let surface = generate_geometry(&scene.geometry);
    let env = generate_environment(&scene.illumination)?;
    render_with(scene, &surface, &env)
}

/// Render with prebuilt geometry and environment; lets callers reuse both
/// across scenes that share specs.
pub fn render_with(
    scene: &SceneSpec,
    surface: &SurfaceField,
    env: &EnvironmentMap,
) -> Result<ImageBuffer> {
    scene.validate()?;
    Ok(render_oriented(scene, surface, env, false))
}

/// `flip` turns the camera to look directly away from the object; used to
/// check that the mask really tracks ray-object intersections.
fn render_oriented(
    scene: &SceneSpec,
    surface: &SurfaceField,
    env: &EnvironmentMap,
    flip: bool,
) -> ImageBuffer {
    let rs = &scene.render;
    let (width, height) = (rs.width, rs.height);
    let origin = vec3(0.0, 0.0, scene.camera.distance);
    let forward = if flip { 1.0 } else { -1.0 };
    let tan_half = (scene.camera.fov_deg.to_radians() * 0.5).tan();
    let aspect = width as f64 / height as f64;
    let spp = rs.samples_per_pixel;

    let ray_dir = |px: f64, py: f64| -> Vec3 {
        let u = 2.0 * px / width as f64 - 1.0;
        let v = 1.0 - 2.0 * py / height as f64;
        vec3(u * tan_half * aspect, v * tan_half, forward).normalized()
    };

    let mut img = ImageBuffer::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let idx = (y * width + x) as usize;
            let center = ray_dir(x as f64 + 0.5, y as f64 + 0.5);
            img.mask[idx] = surface.intersect(origin, center).is_some();

            let mut rng = pixel_rng(rs.seed, x, y);
            let mut acc = [0.0f64; 3];
            for _ in 0..spp {
                let dir = ray_dir(x as f64 + rng.gen::<f64>(), y as f64 + rng.gen::<f64>());
                let sample = match surface.intersect(origin, dir) {
                    Some(hit) => {
                        shade(&scene.material, env, hit.normal, -1.0 * dir, &mut rng)
                    }
                    None => env.value(dir),
                };
                for k in 0..3 {
                    acc[k] += sample[k];
                }
            }
            let inv = 1.0 / spp as f64;
            img.pixels[idx] = [
                (acc[0] * inv) as f32,
                (acc[1] * inv) as f32,
                (acc[2] * inv) as f32,
            ];
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::{
        CameraSpec, GeometrySpec, IlluminationSpec, RenderSettings,
    };

    fn small_scene(material: MaterialSpec) -> SceneSpec {
        SceneSpec {
            geometry: GeometrySpec::sphere(),
            material,
            illumination: IlluminationSpec::Procedural {
                freq_level: 2,
                seed: 3,
                resolution: (32, 16),
            },
            camera: CameraSpec::default(),
            render: RenderSettings {
                width: 24,
                height: 24,
                samples_per_pixel: 8,
                ..RenderSettings::default()
            },
        }
    }

    fn grey(r: f64, s: f64) -> MaterialSpec {
        MaterialSpec::DisneyPrincipled { base_color: [0.5; 3], roughness: r, specular: s }
    }

    #[test]
    fn identical_specs_render_identically() {
        let scene = small_scene(grey(0.3, 1.0));
        let a = render(&scene).unwrap();
        let b = render(&scene).unwrap();
        assert_eq!(a.pixels, b.pixels);
        assert_eq!(a.mask, b.mask);
    }

    #[test]
    fn mask_marks_the_object_disc() {
        let scene = small_scene(grey(0.3, 1.0));
        let img = render(&scene).unwrap();
        let w = scene.render.width as usize;
        assert!(img.mask[(w / 2) * w + w / 2], "center pixel must be on the object");
        assert!(!img.mask[0], "corner pixel must be background");
        let count = img.foreground_count();
        assert!(count > 0 && count < img.mask.len());
    }

    #[test]
    fn flipped_camera_sees_no_object() {
        let scene = small_scene(grey(0.3, 1.0));
        let surface = generate_geometry(&scene.geometry);
        let env = generate_environment(&scene.illumination).unwrap();
        let img = render_oriented(&scene, &surface, &env, true);
        assert!(img.mask.iter().all(|&m| !m));
        assert!(img.pixels.iter().any(|px| px[0] > 0.0));
    }

    #[test]
    fn black_material_renders_near_black() {
        let mut scene = small_scene(MaterialSpec::DisneyPrincipled {
            base_color: [0.0; 3],
            roughness: 0.5,
            specular: 0.02,
        });
        scene.render.samples_per_pixel = 16;
        let env = generate_environment(&scene.illumination).unwrap();
        let img = render(&scene).unwrap();
        let masked = img.mean_interior_luminance();
        let env_mean = env.mean_radiance();
        assert!(
            masked < 0.01 * env_mean,
            "object too bright: {masked} vs env {env_mean}"
        );
    }

    #[test]
    fn lambertian_furnace_matches_albedo() {
        let albedo = 0.6;
        let mut scene = small_scene(grey(0.5, 0.0));
        scene.material = MaterialSpec::DisneyPrincipled {
            base_color: [albedo; 3],
            roughness: 0.5,
            specular: 0.0,
        };
        scene.render.samples_per_pixel = 64;
        let surface = generate_geometry(&scene.geometry);
        let env = EnvironmentMap::from_data(32, 16, vec![[1.0; 3]; 32 * 16]);
        let img = render_with(&scene, &surface, &env).unwrap();
        let mean = img.mean_interior_luminance();
        assert!(
            (mean - albedo).abs() <= 0.02 * albedo,
            "furnace mean {mean} vs albedo {albedo}"
        );
    }

    #[test]
    fn background_shows_the_environment() {
        let mut scene = small_scene(grey(0.2, 2.0));
        scene.render.samples_per_pixel = 4;
        let surface = generate_geometry(&scene.geometry);
        let env = EnvironmentMap::from_data(32, 16, vec![[0.25, 0.5, 0.75]; 32 * 16]);
        let img = render_with(&scene, &surface, &env).unwrap();
        let corner = img.pixels[0];
        assert!((corner[0] - 0.25).abs() < 1e-6);
        assert!((corner[1] - 0.5).abs() < 1e-6);
        assert!((corner[2] - 0.75).abs() < 1e-6);
    }

    #[test]
    fn zero_samples_rejected() {
        let mut scene = small_scene(grey(0.3, 1.0));
        scene.render.samples_per_pixel = 0;
        assert!(render(&scene).is_err());
    }
}
