//! INI-style scenario files.
//!
//! ```text
//! # every key is optional
//! [warehouse]
//! item_material = coca_cola
//! rng_seed = 7
//!
//! [grid]
//! grid_spacing = 0.25
//!
//! [materials.wet_cardboard]
//! relative_permittivity = 3.1
//! conductivity = 0.05
//! ```
//!
//! Keys are checked strictly: unknown sections or keys and repeated keys
//! are errors. `item_material` and `floor_material` name either a
//! `[materials.<name>]` section or a built-in preset.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::coverage::ScenarioSpec;
use crate::em::Pattern;
use crate::error::{Error, Result};
use crate::geometry::{Material, Point3, PRESET_NAMES};

struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn range_error(e: &Entry, what: &str) -> Error {
    Error::Range(format!("line {}: `{}` {what}, got {}", e.line, e.key, e.value))
}

fn float(e: &Entry) -> Result<f64> {
    let v: f64 = e
        .value
        .parse()
        .map_err(|_| parse_error(e.line, format!("`{}` is not a number: {}", e.key, e.value)))?;
    if !v.is_finite() {
        return Err(range_error(e, "must be finite"));
    }
    Ok(v)
}

fn positive(e: &Entry) -> Result<f64> {
    let v = float(e)?;
    if v <= 0.0 {
        return Err(range_error(e, "must be positive"));
    }
    Ok(v)
}

fn non_negative(e: &Entry) -> Result<f64> {
    let v = float(e)?;
    if v < 0.0 {
        return Err(range_error(e, "must be non-negative"));
    }
    Ok(v)
}

fn integer<T: std::str::FromStr>(e: &Entry) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| parse_error(e.line, format!("`{}` is not a non-negative integer: {}", e.key, e.value)))
}

fn boolean(e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(parse_error(e.line, format!("`{}` must be true or false, got {}", e.key, e.value))),
    }
}

fn pattern(e: &Entry) -> Result<Pattern> {
    Pattern::from_name(&e.value).ok_or_else(|| parse_error(e.line, format!("unknown antenna pattern `{}`", e.value)))
}

fn unknown(section: &str, e: &Entry) -> Error {
    Error::UnknownKey {
        line: e.line,
        section: section.to_string(),
        key: e.key.clone(),
    }
}

/// Splits the text into sections, rejecting malformed lines and repeats.
fn tokenize(text: &str) -> Result<Vec<(String, usize, Vec<Entry>)>> {
    let mut sections: Vec<(String, usize, Vec<Entry>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line, "section header is missing `]`"))?
                .trim();
            if name.is_empty() {
                return Err(parse_error(line, "empty section name"));
            }
            if sections.iter().any(|s| s.0 == name) {
                return Err(parse_error(line, format!("section [{name}] appears twice")));
            }
            sections.push((name.to_string(), line, Vec::new()));
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(parse_error(line, "empty key or value"));
        }
        let Some(section) = sections.last_mut() else {
            return Err(parse_error(line, "key outside of any section"));
        };
        if section.2.iter().any(|e| e.key == key) {
            return Err(parse_error(line, format!("key `{key}` repeated")));
        }
        section.2.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(sections)
}

fn parse_material(name: &str, entries: &[Entry]) -> Result<Material> {
    let mut m = Material::dielectric(name, 1.0, 0.0);
    for e in entries {
        match e.key.as_str() {
            "relative_permittivity" => {
                let v = float(e)?;
                if v < 1.0 {
                    return Err(range_error(e, "must be at least 1"));
                }
                m.relative_permittivity = v;
            }
            "conductivity" => m.conductivity = non_negative(e)?,
            "is_pec" => m.is_pec = boolean(e)?,
            "roughness_rms" => m.roughness_rms = non_negative(e)?,
            _ => return Err(unknown(&format!("materials.{name}"), e)),
        }
    }
    Ok(m)
}

/// Parses a scenario file, filling every absent key with its default.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec> {
    let sections = tokenize(text)?;

    let mut custom: BTreeMap<String, Material> = BTreeMap::new();
    for (name, line, entries) in &sections {
        if let Some(m) = name.strip_prefix("materials.") {
            if m.is_empty() || !m.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(parse_error(*line, format!("bad material name `{m}`")));
            }
            custom.insert(m.to_string(), parse_material(m, entries)?);
        }
    }
    let material = |e: &Entry| -> Result<Material> {
        custom
            .get(&e.value)
            .cloned()
            .or_else(|| Material::preset(&e.value))
            .ok_or_else(|| {
                parse_error(
                    e.line,
                    format!(
                        "unknown material `{}` (define [materials.{}] or use one of {})",
                        e.value,
                        e.value,
                        PRESET_NAMES.join(", ")
                    ),
                )
            })
    };

    let mut spec = ScenarioSpec::default();
    let (mut tx_x, mut tx_y) = (None, None);
    for (name, line, entries) in &sections {
        match name.as_str() {
            "warehouse" => {
                let w = &mut spec.warehouse;
                for e in entries {
                    match e.key.as_str() {
                        "area_x" => w.area_x = positive(e)?,
                        "area_y" => w.area_y = positive(e)?,
                        "cluster_count" => w.cluster_count = integer(e)?,
                        "racks_per_cluster" => w.racks_per_cluster = integer(e)?,
                        "corridor_width" => w.corridor_width = non_negative(e)?,
                        "inter_rack_gap" => w.inter_rack_gap = non_negative(e)?,
                        "plate_thickness" => w.plate_thickness = positive(e)?,
                        "layer_air_gap" => w.layer_air_gap = non_negative(e)?,
                        "layer_count" => w.layer_count = integer(e)?,
                        "rack_footprint_x" => w.rack_footprint.0 = positive(e)?,
                        "rack_footprint_y" => w.rack_footprint.1 = positive(e)?,
                        "layer_pitch" => w.layer_pitch = positive(e)?,
                        "cluster_depth" => w.cluster_depth = positive(e)?,
                        "rack_roughness" => w.rack_roughness = non_negative(e)?,
                        "item_material" => w.item_material = material(e)?,
                        "floor_material" => w.floor_material = material(e)?,
                        "rng_seed" => w.rng_seed = integer(e)?,
                        _ => return Err(unknown(name, e)),
                    }
                }
            }
            "tx" => {
                for e in entries {
                    match e.key.as_str() {
                        "x" => tx_x = Some(float(e)?),
                        "y" => tx_y = Some(float(e)?),
                        "z" => spec.tx_position.z = positive(e)?,
                        "power_dbm" => spec.budget.tx_power_dbm = float(e)?,
                        "pattern" => spec.tx_antenna.pattern = pattern(e)?,
                        _ => return Err(unknown(name, e)),
                    }
                }
            }
            "band" => {
                for e in entries {
                    match e.key.as_str() {
                        "center_frequency_hz" => spec.band.center_frequency = positive(e)?,
                        "bandwidth_hz" => spec.band.bandwidth = non_negative(e)?,
                        "sample_count" => {
                            spec.band.sample_count = integer(e)?;
                            if spec.band.sample_count == 0 {
                                return Err(range_error(e, "must be at least 1"));
                            }
                        }
                        "max_path_loss_db" => spec.budget.max_path_loss_db = positive(e)?,
                        _ => return Err(unknown(name, e)),
                    }
                }
            }
            "tracer" => {
                let t = &mut spec.tracer;
                for e in entries {
                    match e.key.as_str() {
                        "max_reflections" => t.max_reflections = integer(e)?,
                        "enable_diffraction" => t.enable_diffraction = boolean(e)?,
                        "max_reflections_with_diffraction" => t.max_reflections_with_diffraction = integer(e)?,
                        "path_loss_budget_db" => t.path_loss_budget_db = positive(e)?,
                        "visibility_culling" => t.visibility_culling = boolean(e)?,
                        _ => return Err(unknown(name, e)),
                    }
                }
            }
            "grid" => {
                for e in entries {
                    match e.key.as_str() {
                        "grid_spacing" => spec.grid_spacing = positive(e)?,
                        "rx_height" => spec.rx_height = positive(e)?,
                        "corridor_margin" => spec.corridor_margin = non_negative(e)?,
                        "rx_pattern" => spec.rx_antenna.pattern = pattern(e)?,
                        _ => return Err(unknown(name, e)),
                    }
                }
            }
            n if n.starts_with("materials.") => {}
            _ => return Err(parse_error(*line, format!("unknown section [{name}]"))),
        }
    }

    spec.tx_position.x = tx_x.unwrap_or(0.5 * spec.warehouse.area_x);
    spec.tx_position.y = tx_y.unwrap_or(0.5 * spec.warehouse.area_y);
    spec.rx_antenna.position = Point3::new(0.0, 0.0, spec.rx_height);
    spec.tx_antenna.position = spec.tx_position;
    spec.tracer.pruning_frequency_hz = spec.band.lowest_frequency();
    spec.validate()?;
    Ok(spec)
}

/// Writes `spec` with every key explicit. Parsing the result gives back
/// an identical spec.
pub fn serialize_scenario(spec: &ScenarioSpec) -> String {
    let w = &spec.warehouse;
    let mut defs: Vec<&Material> = Vec::new();
    for m in [&w.item_material, &w.floor_material] {
        if Material::preset(&m.name).as_ref() != Some(m) && !defs.iter().any(|d| d.name == m.name) {
            defs.push(m);
        }
    }

    let mut out = String::new();
    let mut section = |name: &str, pairs: Vec<(&str, String)>| {
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "[{name}]");
        for (k, v) in pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
    };
    section(
        "warehouse",
        vec![
            ("area_x", w.area_x.to_string()),
            ("area_y", w.area_y.to_string()),
            ("cluster_count", w.cluster_count.to_string()),
            ("racks_per_cluster", w.racks_per_cluster.to_string()),
            ("corridor_width", w.corridor_width.to_string()),
            ("inter_rack_gap", w.inter_rack_gap.to_string()),
            ("plate_thickness", w.plate_thickness.to_string()),
            ("layer_air_gap", w.layer_air_gap.to_string()),
            ("layer_count", w.layer_count.to_string()),
            ("rack_footprint_x", w.rack_footprint.0.to_string()),
            ("rack_footprint_y", w.rack_footprint.1.to_string()),
            ("layer_pitch", w.layer_pitch.to_string()),
            ("cluster_depth", w.cluster_depth.to_string()),
            ("rack_roughness", w.rack_roughness.to_string()),
            ("item_material", w.item_material.name.clone()),
            ("floor_material", w.floor_material.name.clone()),
            ("rng_seed", w.rng_seed.to_string()),
        ],
    );
    let t = &spec.tx_position;
    section(
        "tx",
        vec![
            ("x", t.x.to_string()),
            ("y", t.y.to_string()),
            ("z", t.z.to_string()),
            ("power_dbm", spec.budget.tx_power_dbm.to_string()),
            ("pattern", spec.tx_antenna.pattern.name().to_string()),
        ],
    );
    section(
        "band",
        vec![
            ("center_frequency_hz", spec.band.center_frequency.to_string()),
            ("bandwidth_hz", spec.band.bandwidth.to_string()),
            ("sample_count", spec.band.sample_count.to_string()),
            ("max_path_loss_db", spec.budget.max_path_loss_db.to_string()),
        ],
    );
    let c = &spec.tracer;
    section(
        "tracer",
        vec![
            ("max_reflections", c.max_reflections.to_string()),
            ("enable_diffraction", c.enable_diffraction.to_string()),
            ("max_reflections_with_diffraction", c.max_reflections_with_diffraction.to_string()),
            ("path_loss_budget_db", c.path_loss_budget_db.to_string()),
            ("visibility_culling", c.visibility_culling.to_string()),
        ],
    );
    section(
        "grid",
        vec![
            ("grid_spacing", spec.grid_spacing.to_string()),
            ("rx_height", spec.rx_height.to_string()),
            ("corridor_margin", spec.corridor_margin.to_string()),
            ("rx_pattern", spec.rx_antenna.pattern.name().to_string()),
        ],
    );
    for m in defs {
        section(
            &format!("materials.{}", m.name),
            vec![
                ("relative_permittivity", m.relative_permittivity.to_string()),
                ("conductivity", m.conductivity.to_string()),
                ("is_pec", m.is_pec.to_string()),
                ("roughness_rms", m.roughness_rms.to_string()),
            ],
        );
    }
    out
}
