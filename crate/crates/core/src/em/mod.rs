//! Electromagnetic kernels: material permittivity, Fresnel reflection,
//! rough-surface attenuation, antenna patterns and PEC wedge diffraction.

mod antenna;
pub mod special;
mod utd;

pub use antenna::{antenna_gain, AntennaModel, Pattern};
pub use utd::{utd_diffraction, DiffractionAngles};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Material;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// `eps' - j eps''` relative to vacuum, with `eps'' >= 0` for passive media.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPermittivity {
    pub real_part: f64,
    pub imag_part: f64,
}

impl ComplexPermittivity {
    pub fn lossless(relative_permittivity: f64) -> Self {
        Self {
            real_part: relative_permittivity,
            imag_part: 0.0,
        }
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.real_part, -self.imag_part)
    }
}

/// Reflecting medium as seen by the Fresnel kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Medium {
    Pec,
    Dielectric(ComplexPermittivity),
}

impl Medium {
    pub fn of(material: &Material, frequency_hz: f64) -> Self {
        if material.is_pec {
            Medium::Pec
        } else {
            Medium::Dielectric(permittivity_unchecked(material, frequency_hz))
        }
    }
}

fn permittivity_unchecked(m: &Material, f: f64) -> ComplexPermittivity {
    ComplexPermittivity {
        real_part: m.relative_permittivity,
        imag_part: m.conductivity / (2.0 * std::f64::consts::PI * f * EPSILON_0),
    }
}

/// `eps_r - j sigma / (2 pi f eps0)`.
pub fn complex_permittivity(m: &Material, frequency_hz: f64) -> Result<ComplexPermittivity> {
    if m.is_pec {
        return Err(Error::PecMaterial(m.name.clone()));
    }
    Ok(permittivity_unchecked(m, frequency_hz))
}

/// Reflection coefficients `(gamma_s, gamma_p)` at incidence angle
/// `theta_i` (radians from the normal).
///
/// `gamma_s` refers to the field component perpendicular to the plane of
/// incidence, `gamma_p` to the in-plane component, in the basis where a PEC
/// gives `(-1, +1)`.
pub fn fresnel_coefficients(medium: Medium, theta_i: f64) -> (Complex64, Complex64) {
    let eps = match medium {
        Medium::Pec => return (Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)),
        Medium::Dielectric(e) => e.as_complex(),
    };
    let (sin_t, cos_t) = theta_i.sin_cos();
    let root = (eps - sin_t * sin_t).sqrt();
    let gs = (cos_t - root) / (cos_t + root);
    let gp = (eps * cos_t - root) / (eps * cos_t + root);
    (gs, gp)
}

/// Specular attenuation of a rough surface, `exp(-g) I0(g)` with
/// `g = (4 pi sigma_h cos(theta_i) / lambda)^2 / 2`.
pub fn roughness_attenuation(sigma_h: f64, theta_i: f64, lambda: f64) -> f64 {
    if sigma_h == 0.0 {
        return 1.0;
    }
    let dphi = 4.0 * std::f64::consts::PI * sigma_h * theta_i.cos() / lambda;
    let g = 0.5 * dphi * dphi;
    special::bessel_i0_scaled(g).min(1.0)
}
