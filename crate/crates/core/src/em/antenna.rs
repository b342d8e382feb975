use crate::geometry::{any_perpendicular, Point3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    Isotropic,
    /// `1.5 sin^2(theta)` about the polarization axis.
    ShortDipoleVertical,
}

impl Pattern {
    pub fn name(&self) -> &'static str {
        match self {
            Pattern::Isotropic => "isotropic",
            Pattern::ShortDipoleVertical => "short_dipole_vertical",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "isotropic" => Some(Pattern::Isotropic),
            "short_dipole_vertical" => Some(Pattern::ShortDipoleVertical),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaModel {
    pub position: Point3,
    pub pattern: Pattern,
    /// Unit polarization axis; `z` for vertical antennas.
    pub polarization: Vector3,
}

impl AntennaModel {
    pub fn vertical(position: Point3, pattern: Pattern) -> Self {
        Self {
            position,
            pattern,
            polarization: Vector3::z(),
        }
    }
}

/// Power gain toward `direction` and the unit E-field polarization of a
/// wave leaving (or arriving along) that direction.
///
/// The polarization is the spherical theta-hat of the antenna axis, i.e. the
/// axis projected onto the plane transverse to `direction`, negated.
pub fn antenna_gain(a: &AntennaModel, direction: &Vector3) -> (f64, Vector3) {
    let axis = a.polarization;
    let c = direction.dot(&axis);
    let transverse = direction * c - axis;
    let len = transverse.norm();
    let pol = if len > 1e-12 {
        transverse / len
    } else {
        any_perpendicular(direction)
    };
    let gain = match a.pattern {
        Pattern::Isotropic => 1.0,
        Pattern::ShortDipoleVertical => 1.5 * (1.0 - c * c).max(0.0),
    };
    (gain, pol)
}
