use serde::Serialize;

/// Index into [`Scene::materials`](super::Scene).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MaterialId(pub usize);

/// Electrical and surface description of a reflecting body.
///
/// For PEC materials the permittivity and conductivity are never read.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Material {
    pub name: String,
    pub relative_permittivity: f64,
    /// S/m
    pub conductivity: f64,
    pub is_pec: bool,
    /// RMS surface height deviation in meters.
    pub roughness_rms: f64,
}

/// Names accepted by [`Material::preset`].
pub const PRESET_NAMES: [&str; 5] = ["pec", "olive_oil", "coca_cola", "concrete_default", "air"];

impl Material {
    pub fn dielectric(name: &str, relative_permittivity: f64, conductivity: f64) -> Self {
        Self {
            name: name.to_string(),
            relative_permittivity,
            conductivity,
            is_pec: false,
            roughness_rms: 0.0,
        }
    }

    pub fn pec() -> Self {
        Self {
            name: "pec".to_string(),
            relative_permittivity: 1.0,
            conductivity: 0.0,
            is_pec: true,
            roughness_rms: 0.0,
        }
    }

    pub fn air() -> Self {
        Self::dielectric("air", 1.0, 0.0)
    }

    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "pec" => Self::pec(),
            "olive_oil" => Self::dielectric("olive_oil", 2.87, 0.0289),
            "coca_cola" => Self::dielectric("coca_cola", 71.25, 4.1991),
            "concrete_default" => Self::dielectric("concrete_default", 5.31, 0.1),
            "air" => Self::air(),
            _ => return None,
        })
    }

    pub fn with_roughness(mut self, roughness_rms: f64) -> Self {
        self.roughness_rms = roughness_rms;
        self
    }

    /// Free space: no facets are generated for bodies made of it.
    pub fn is_transparent(&self) -> bool {
        !self.is_pec && self.relative_permittivity == 1.0 && self.conductivity == 0.0
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.is_pec {
            if !(self.relative_permittivity >= 1.0) || !self.relative_permittivity.is_finite() {
                return Err(format!("material `{}`: relative_permittivity must be >= 1", self.name));
            }
            if !(self.conductivity >= 0.0) || !self.conductivity.is_finite() {
                return Err(format!("material `{}`: conductivity must be >= 0", self.name));
            }
        }
        if !(self.roughness_rms >= 0.0) || !self.roughness_rms.is_finite() {
            return Err(format!("material `{}`: roughness_rms must be >= 0", self.name));
        }
        Ok(())
    }
}
