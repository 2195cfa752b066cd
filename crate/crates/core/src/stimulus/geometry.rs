//! Procedural surface geometry: a unit sphere, optionally displaced along
//! the radial direction by a smooth seeded bump field.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::vec3::{vec3, Mat3, Vec3};
use super::GeometrySpec;

/// Base radius of every generated surface.
pub const BASE_RADIUS: f64 = 1.0;

const WAVE_COUNT: usize = 8;
const MARCH_STEPS: usize = 32;
const BISECT_ITERS: usize = 48;

/// One cosine wave of the bump field, oriented along `axis`.
#[derive(Debug, Clone, Copy)]
struct Wave {
    axis: Vec3,
    freq: f64,
    phase: f64,
}

/// A renderable surface: radius as a function of direction plus the
/// matching analytic normal field.
#[derive(Debug, Clone)]
pub struct SurfaceField {
    amplitude: f64,
    rotation: Mat3,
    inv_rotation: Mat3,
    waves: Vec<Wave>,
}

/// Ray-surface intersection result.
#[derive(Debug, Clone, Copy)]
pub struct Hit {
    pub t: f64,
    pub point: Vec3,
    pub normal: Vec3,
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = vec3(
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        );
        let l = v.length();
        if (1e-3..=1.0).contains(&l) {
            return v / l;
        }
    }
}

/// Build the surface described by `spec`. The bump field is fully
/// determined by `spec.seed`.
pub fn generate_geometry(spec: &GeometrySpec) -> SurfaceField {
    let [rx, ry, rz] = spec.rotation;
    let rotation = Mat3::from_euler_deg(rx, ry, rz);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let waves = (0..WAVE_COUNT)
        .map(|_| Wave {
            axis: random_unit(&mut rng),
            freq: 3.0 + 6.0 * rng.gen::<f64>(),
            phase: std::f64::consts::TAU * rng.gen::<f64>(),
        })
        .collect();
    SurfaceField {
        amplitude: spec.amplitude(),
        rotation,
        inv_rotation: rotation.transpose(),
        waves,
    }
}

impl SurfaceField {
    /// Bump field value in [-1, 1] for a unit direction in object space.
    fn eta(&self, d: Vec3) -> f64 {
        let mut sum = 0.0;
        for w in &self.waves {
            sum += (w.freq * d.dot(w.axis) + w.phase).cos();
        }
        sum / WAVE_COUNT as f64
    }

    /// Gradient of `eta` with respect to the (unconstrained) direction.
    fn eta_grad(&self, d: Vec3) -> Vec3 {
        let mut g = Vec3::ZERO;
        for w in &self.waves {
            g = g - w.freq * (w.freq * d.dot(w.axis) + w.phase).sin() * w.axis;
        }
        g / WAVE_COUNT as f64
    }

    /// Surface radius along world-space unit direction `d`.
    pub fn radius_in_direction(&self, d: Vec3) -> f64 {
        if self.amplitude == 0.0 {
            return BASE_RADIUS;
        }
        BASE_RADIUS * (1.0 + self.amplitude * self.eta(self.inv_rotation.mul_vec(d)))
    }

    /// Largest radius the surface can reach; bounds the march interval.
    pub fn outer_radius(&self) -> f64 {
        BASE_RADIUS * (1.0 + self.amplitude)
    }

    /// Signed distance proxy: positive outside the surface, negative inside.
    fn level(&self, p: Vec3) -> f64 {
        p.length() - self.radius_in_direction(p.normalized())
    }

    /// Outward unit normal at a point on (or near) the surface.
    pub fn normal_at(&self, p: Vec3) -> Vec3 {
        let len = p.length();
        let d = p / len;
        if self.amplitude == 0.0 {
            return d;
        }
        let q = self.inv_rotation.mul_vec(d);
        let g = self.rotation.mul_vec(self.eta_grad(q));
        // Project the gradient onto the tangent plane at d before adding.
        let tangential = g - d.dot(g) * d;
        (d - (BASE_RADIUS * self.amplitude / len) * tangential).normalized()
    }

    /// Intersect the ray `origin + t * dir` (with unit `dir`) against the
    /// surface, returning the nearest hit with `t > 0`.
    pub fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<Hit> {
        let (t0, t1) = sphere_interval(origin, dir, self.outer_radius())?;
        if self.amplitude == 0.0 {
            // Rays starting inside the sphere are not part of our scenes.
            if t0 <= 1e-9 {
                return None;
            }
            let point = origin + t0 * dir;
            return Some(Hit { t: t0, point, normal: point.normalized() });
        }
        // March the bounding interval looking for the first sign change,
        // then bisect it down to the surface.
        let t_start = t0.max(1e-9);
        let mut prev_t = t_start;
        if self.level(origin + prev_t * dir) <= 0.0 {
            return None;
        }
        let step = (t1 - t_start) / MARCH_STEPS as f64;
        for i in 1..=MARCH_STEPS {
            let t = t_start + step * i as f64;
            let f = self.level(origin + t * dir);
            if f <= 0.0 {
                let (mut lo, mut hi) = (prev_t, t);
                for _ in 0..BISECT_ITERS {
                    let mid = 0.5 * (lo + hi);
                    if self.level(origin + mid * dir) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_hit = 0.5 * (lo + hi);
                let point = origin + t_hit * dir;
                return Some(Hit { t: t_hit, point, normal: self.normal_at(point) });
            }
            prev_t = t;
        }
        None
    }
}

/// Entry and exit parameters of a ray through the origin-centered sphere of
/// radius `r`, or `None` if it misses or lies entirely behind the origin.
fn sphere_interval(origin: Vec3, dir: Vec3, r: f64) -> Option<(f64, f64)> {
    let b = origin.dot(dir);
    let c = origin.dot(origin) - r * r;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let (t0, t1) = (-b - sq, -b + sq);
    if t1 <= 0.0 {
        return None;
    }
    Some((t0.max(0.0), t1))
}
