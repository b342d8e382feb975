//! Result encodings: grid CSV, binary pixmap heatmap and path dumps.

use std::io::{BufRead, Write};

use crate::band::{band_averaged_power, LinkBudget, UwbBand};
use crate::coverage::PowerGrid;
use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::tracer::{InteractionKind, PropagationPath};

pub const CSV_HEADER: &str = "x_m,y_m,power_dbm";

fn format_power(v: f64, interior: bool) -> String {
    if interior {
        "nan".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

/// One row per cell, y-major with x fastest, six decimals. No-coverage
/// cells are written as `-inf`, interior cells as `nan`.
pub fn write_grid_csv<W: Write>(grid: &PowerGrid, out: &mut W) -> Result<()> {
    let mut s = String::with_capacity(32 * (grid.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for i in 0..grid.len() {
        let (x, y) = grid.cell_center(i);
        s.push_str(&format!("{x:.6},{y:.6},{}\n", format_power(grid.values[i], grid.interior[i])));
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Reads a grid written by [`write_grid_csv`]. The corridor mask is not
/// stored in the file and comes back all false.
pub fn read_grid_csv<R: BufRead>(input: R) -> Result<PowerGrid> {
    let mut rows: Vec<(f64, f64, f64, bool)> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if n == 1 {
            if line.trim() != CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `{CSV_HEADER}`"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::Parse {
            line: n,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 3 {
            return Err(bad("expected three comma-separated fields"));
        }
        let x: f64 = f[0].parse().map_err(|_| bad("bad x"))?;
        let y: f64 = f[1].parse().map_err(|_| bad("bad y"))?;
        let (v, interior) = match f[2] {
            "nan" => (f64::NEG_INFINITY, true),
            "-inf" => (f64::NEG_INFINITY, false),
            s => (s.parse().map_err(|_| bad("bad power"))?, false),
        };
        rows.push((x, y, v, interior));
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "grid has no cells".into(),
        });
    }
    let nx = rows.iter().take_while(|r| r.1 == rows[0].1).count();
    if rows.len() % nx != 0 {
        return Err(Error::Parse {
            line: rows.len() + 1,
            message: "rows do not form a rectangle".into(),
        });
    }
    let ny = rows.len() / nx;
    let spacing = round6(if nx > 1 {
        rows[1].0 - rows[0].0
    } else if ny > 1 {
        rows[nx].1 - rows[0].1
    } else {
        2.0 * rows[0].0
    });
    if !(spacing > 0.0) {
        return Err(Error::Parse {
            line: 2,
            message: "cannot infer a positive spacing".into(),
        });
    }
    let origin = (round6(rows[0].0 - 0.5 * spacing), round6(rows[0].1 - 0.5 * spacing));
    let grid = PowerGrid {
        origin,
        spacing,
        nx,
        ny,
        values: rows.iter().map(|r| r.2).collect(),
        // not recorded in the file
        rx_height: f64::NAN,
        corridor_mask: vec![false; rows.len()],
        interior: rows.iter().map(|r| r.3).collect(),
    };
    for (i, r) in rows.iter().enumerate() {
        let (x, y) = grid.cell_center(i);
        if (x - r.0).abs() > 2e-6 || (y - r.1).abs() > 2e-6 {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("cell ({}, {}) is off the regular grid", r.0, r.1),
            });
        }
    }
    Ok(grid)
}

/// Color ramp for [`write_heatmap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapStyle {
    /// Cells below this are black.
    pub threshold_dbm: f64,
    /// Pure blue at `low`, green at `mid`, red at `high`; clamped outside.
    pub low_dbm: f64,
    pub mid_dbm: f64,
    pub high_dbm: f64,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        Self {
            threshold_dbm: LinkBudget::default().threshold_dbm(),
            low_dbm: -90.0,
            mid_dbm: -65.0,
            high_dbm: -40.0,
        }
    }
}

pub const INTERIOR_GRAY: [u8; 3] = [128, 128, 128];

impl HeatmapStyle {
    pub fn color(&self, value_dbm: f64, interior: bool) -> [u8; 3] {
        if interior {
            return INTERIOR_GRAY;
        }
        if !(value_dbm >= self.threshold_dbm) {
            return [0, 0, 0];
        }
        let v = value_dbm.clamp(self.low_dbm, self.high_dbm);
        let level = |t: f64| (255.0 * t).round() as u8;
        if v <= self.mid_dbm {
            let g = level((v - self.low_dbm) / (self.mid_dbm - self.low_dbm));
            [0, g, 255 - g]
        } else {
            let r = level((v - self.mid_dbm) / (self.high_dbm - self.mid_dbm));
            [r, 255 - r, 0]
        }
    }
}

/// Binary PPM (P6), one pixel per cell, first row = minimum y.
pub fn write_heatmap<W: Write>(grid: &PowerGrid, style: &HeatmapStyle, out: &mut W) -> Result<()> {
    let mut bytes = format!("P6\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    bytes.reserve(3 * grid.len());
    for i in 0..grid.len() {
        bytes.extend_from_slice(&style.color(grid.values[i], grid.interior[i]));
    }
    out.write_all(&bytes)?;
    Ok(())
}

/// Human-readable listing of evaluated paths to one receiver: interactions,
/// delay in ns and the power at the band center in dBm. Paths must carry
/// amplitudes at every band sample and at the band center.
pub fn write_path_dump<W: Write>(
    scene: &Scene,
    paths: &[PropagationPath],
    band: &UwbBand,
    budget: &LinkBudget,
    out: &mut W,
) -> Result<()> {
    let center = band.center_frequency;
    let band_dbm = band_averaged_power(paths, band, budget)?;
    if let Some(p) = paths.first() {
        writeln!(
            out,
            "rx {:.4} {:.4} {:.4}  paths {}  band_power_dbm {}",
            p.rx.x,
            p.rx.y,
            p.rx.z,
            paths.len(),
            fixed4(band_dbm)
        )?;
    }
    for (k, p) in paths.iter().enumerate() {
        let a = p.amplitude_at(center)?;
        let mut chain = String::new();
        for it in &p.interactions {
            let q = it.point;
            match it.kind {
                InteractionKind::Reflection(f) => {
                    let m = &scene.facet_material(f).name;
                    chain.push_str(&format!(" R{}[{m}]({:.4},{:.4},{:.4})", f.0, q.x, q.y, q.z));
                }
                InteractionKind::Diffraction(e) => {
                    chain.push_str(&format!(" D{}({:.4},{:.4},{:.4})", e.0, q.x, q.y, q.z));
                }
            }
        }
        if chain.is_empty() {
            chain.push_str(" LOS");
        }
        writeln!(
            out,
            "{k:4} length_m {:.4} delay_ns {:.4} power_dbm {}{}",
            p.total_length,
            p.delay * 1e9,
            dbm(a.norm_sqr(), budget),
            chain
        )?;
    }
    Ok(())
}

fn dbm(linear: f64, budget: &LinkBudget) -> String {
    if linear > 0.0 {
        fixed4(budget.tx_power_dbm + 10.0 * linear.log10())
    } else {
        "-inf".to_string()
    }
}

/// Four-decimal rendering used for all numeric report output.
pub fn fixed4(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.4}")
    }
}
