//! Virtual radiance meter: mirror-direction radiance of a flat sample under
//! a unit-irradiance directional source.

use super::brdf::eval_brdf;
use super::vec3::vec3;
use super::MaterialSpec;
use crate::error::{Error, Result};

/// Radiance reflected into the mirror direction when a directional source
/// of unit (beam-perpendicular) irradiance hits a flat surface of the given
/// material at `incidence_deg` from the normal.
pub fn radiance_meter(material: &MaterialSpec, incidence_deg: f64) -> Result<f64> {
    if !(incidence_deg > 0.0 && incidence_deg < 90.0) {
        return Err(Error::invalid(format!(
            "meter incidence must be in (0, 90) degrees, got {incidence_deg}"
        )));
    }
    material.validate()?;
    let n = vec3(0.0, 0.0, 1.0);
    let (s, c) = incidence_deg.to_radians().sin_cos();
    let wi = vec3(s, 0.0, c);
    let wo = vec3(-s, 0.0, c);
    let f = eval_brdf(material, wi, wo, n);
    let radiance = (f[0] + f[1] + f[2]) / 3.0 * c;
    if !radiance.is_finite() {
        return Err(Error::non_finite("radiance_meter", format!("{material:?}")));
    }
    Ok(radiance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lambertian_matches_analytic_value() {
        let rho = 0.42;
        let m = MaterialSpec::DisneyPrincipled {
            base_color: [rho; 3],
            roughness: 0.8,
            specular: 0.0,
        };
        let got = radiance_meter(&m, 20.0).unwrap();
        let want = rho * (20f64.to_radians().cos()) / PI;
        // The GGX lobe with f0 = 0 contributes nothing.
        assert!((got - want).abs() < 1e-12, "got {got} want {want}");
    }

    #[test]
    fn all_black_material_reads_zero() {
        let m = MaterialSpec::DisneyPrincipled {
            base_color: [0.0; 3],
            roughness: 0.5,
            specular: 0.0,
        };
        assert_eq!(radiance_meter(&m, 20.0).unwrap(), 0.0);
    }

    #[test]
    fn sharper_glass_reads_brighter() {
        let sharp = MaterialSpec::GgxBlackGlass { ior: 1.567, micro_roughness: 0.001 };
        let dull = MaterialSpec::GgxBlackGlass { ior: 1.567, micro_roughness: 0.1 };
        let a = radiance_meter(&sharp, 20.0).unwrap();
        let b = radiance_meter(&dull, 20.0).unwrap();
        assert!(a > b, "sharp {a} should exceed dull {b}");
    }

    #[test]
    fn out_of_range_incidence_rejected() {
        let m = MaterialSpec::GgxBlackGlass { ior: 1.567, micro_roughness: 0.001 };
        assert!(radiance_meter(&m, 0.0).is_err());
        assert!(radiance_meter(&m, 90.0).is_err());
        assert!(radiance_meter(&m, -5.0).is_err());
    }
}
