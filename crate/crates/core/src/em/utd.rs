//! Kouyoumjian-Pathak diffraction coefficients for a perfectly conducting
//! wedge under spherical-wave incidence.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::special::transition_function;
use super::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::geometry::WedgeEdge;

/// Edge-fixed angles: `phi_*` measured from face a through the exterior
/// (in `[0, n pi]`), `beta_0` the angle between the incident ray and the edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionAngles {
    pub phi_incident: f64,
    pub phi_diffracted: f64,
    pub beta_0: f64,
}

/// `(D_s, D_h)` soft/hard coefficients for `edge`.
pub fn utd_diffraction(
    edge: &WedgeEdge,
    s_incident: f64,
    s_diffracted: f64,
    angles: DiffractionAngles,
    frequency_hz: f64,
) -> Result<(Complex64, Complex64)> {
    wedge_coefficients(edge.exterior_wedge_index_n, s_incident, s_diffracted, angles, frequency_hz)
}

/// Same as [`utd_diffraction`] for a bare wedge index `n`.
pub fn wedge_coefficients(
    n: f64,
    s_incident: f64,
    s_diffracted: f64,
    angles: DiffractionAngles,
    frequency_hz: f64,
) -> Result<(Complex64, Complex64)> {
    let sin_b = angles.beta_0.sin();
    if sin_b.abs() < 1e-12 {
        return Err(Error::DegenerateGeometry("ray parallel to the diffracting edge"));
    }
    let k = 2.0 * PI * frequency_hz / SPEED_OF_LIGHT;
    let l = s_incident * s_diffracted / (s_incident + s_diffracted) * sin_b * sin_b;
    let kl = k * l;

    let (phi, phi_i) = (angles.phi_diffracted, angles.phi_incident);
    let minus = phi - phi_i;
    let plus = phi + phi_i;
    let isb = cot_term(n, kl, minus, 1.0) + cot_term(n, kl, minus, -1.0);
    let rsb = cot_term(n, kl, plus, 1.0) + cot_term(n, kl, plus, -1.0);

    let pre = -Complex64::from_polar(1.0, -PI / 4.0) / (2.0 * n * (2.0 * PI * k).sqrt() * sin_b);
    Ok((pre * (isb - rsb), pre * (isb + rsb)))
}

/// `cot((pi + sign*beta) / 2n) * F(kL a^sign(beta))`, with the
/// shadow-boundary limit substituted where the cotangent is singular.
fn cot_term(n: f64, kl: f64, beta: f64, sign: f64) -> Complex64 {
    let x = (PI + sign * beta) / (2.0 * n);
    let delta = x - (x / PI).round() * PI;
    if delta.abs() < 1e-9 {
        let eps = 2.0 * n * delta;
        let rot = Complex64::from_polar(1.0, PI / 4.0);
        let sgn = if eps >= 0.0 { 1.0 } else { -1.0 };
        return n * ((2.0 * PI * kl).sqrt() * sgn - 2.0 * kl * eps * rot) * rot;
    }
    let big_n = ((beta + sign * PI) / (2.0 * PI * n)).round();
    let c = ((2.0 * n * PI * big_n - beta) / 2.0).cos();
    let a = 2.0 * c * c;
    transition_function(kl * a) / delta.tan()
}
