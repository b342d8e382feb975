//! Receiver-grid sweep and the statistics drawn from it.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::band::{band_samples, weighted_power_dbm, LinkBudget, UwbBand};
use crate::em::{AntennaModel, Pattern};
use crate::error::{Error, Result};
use crate::geometry::{generate_warehouse, Point3, Rect, Scene, WarehouseSpec};
use crate::tracer::{evaluate_band, Tracer, TracerConfig};

/// Everything needed to reproduce one coverage map.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub warehouse: WarehouseSpec,
    pub tx_position: Point3,
    pub rx_height: f64,
    pub grid_spacing: f64,
    /// Width of the perimeter strip counted as walkway, m.
    pub corridor_margin: f64,
    pub band: UwbBand,
    pub budget: LinkBudget,
    pub tracer: TracerConfig,
    pub tx_antenna: AntennaModel,
    pub rx_antenna: AntennaModel,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        let warehouse = WarehouseSpec::default();
        let tx_position = Point3::new(0.5 * warehouse.area_x, 0.5 * warehouse.area_y, 1.5);
        Self {
            warehouse,
            tx_position,
            rx_height: 0.2,
            grid_spacing: 0.1,
            corridor_margin: 0.5,
            band: UwbBand::default(),
            budget: LinkBudget::default(),
            tracer: TracerConfig::default(),
            tx_antenna: AntennaModel::vertical(tx_position, Pattern::ShortDipoleVertical),
            rx_antenna: AntennaModel::vertical(Point3::new(0.0, 0.0, 0.2), Pattern::ShortDipoleVertical),
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.warehouse.validate()?;
        self.tracer.validate()?;
        let t = &self.tx_position;
        if !(t.x >= 0.0 && t.x <= self.warehouse.area_x && t.y >= 0.0 && t.y <= self.warehouse.area_y && t.z > 0.0) {
            return Err(Error::Range(format!(
                "tx ({}, {}, {}) lies outside the warehouse",
                t.x, t.y, t.z
            )));
        }
        if !(self.grid_spacing > 0.0) || !self.grid_spacing.is_finite() {
            return Err(Error::Range(format!("grid_spacing must be positive, got {}", self.grid_spacing)));
        }
        if !(self.rx_height > 0.0) || !self.rx_height.is_finite() {
            return Err(Error::Range(format!("rx_height must be positive, got {}", self.rx_height)));
        }
        if !(self.corridor_margin >= 0.0) {
            return Err(Error::Range("corridor_margin must be non-negative".into()));
        }
        if self.band.sample_count == 0 || !(self.band.bandwidth >= 0.0) || !(self.band.center_frequency > 0.0) {
            return Err(Error::Range("band needs a positive carrier, non-negative width and >= 1 sample".into()));
        }
        if self.band.center_frequency - 0.5 * self.band.bandwidth <= 0.0 {
            return Err(Error::Range("band extends to non-positive frequencies".into()));
        }
        Ok(())
    }

    pub fn build_scene(&self) -> Result<Scene> {
        generate_warehouse(&self.warehouse)
    }

    /// Transmit antenna placed at `tx_position`.
    pub fn tx_antenna_model(&self) -> AntennaModel {
        AntennaModel {
            position: self.tx_position,
            ..self.tx_antenna
        }
    }

    pub fn rx_antenna_at(&self, p: Point3) -> AntennaModel {
        AntennaModel {
            position: p,
            ..self.rx_antenna
        }
    }

    pub fn tx_xy(&self) -> (f64, f64) {
        (self.tx_position.x, self.tx_position.y)
    }

    /// Whether a floor point belongs to the walkway: an inter-cluster
    /// corridor, or within `corridor_margin` of the perimeter and outside
    /// every cluster.
    pub fn is_corridor(&self, x: f64, y: f64) -> bool {
        let w = &self.warehouse;
        if w.corridor_rects().iter().any(|r| r.contains(x, y)) {
            return true;
        }
        let m = self.corridor_margin;
        let near_edge = x <= m || y <= m || x >= w.area_x - m || y >= w.area_y - m;
        near_edge && !w.cluster_rects().iter().any(|r| r.contains(x, y))
    }

    /// Empty grid covering the floor, with the corridor mask filled in.
    pub fn empty_grid(&self) -> PowerGrid {
        let nx = cells_along(self.warehouse.area_x, self.grid_spacing);
        let ny = cells_along(self.warehouse.area_y, self.grid_spacing);
        let mut g = PowerGrid {
            origin: (0.0, 0.0),
            spacing: self.grid_spacing,
            nx,
            ny,
            values: vec![f64::NEG_INFINITY; nx * ny],
            rx_height: self.rx_height,
            corridor_mask: vec![false; nx * ny],
            interior: vec![false; nx * ny],
        };
        for i in 0..nx * ny {
            let (x, y) = g.cell_center(i);
            g.corridor_mask[i] = self.is_corridor(x, y);
        }
        g
    }
}

fn cells_along(extent: f64, spacing: f64) -> usize {
    ((extent / spacing) - 1e-9).ceil().max(1.0) as usize
}

/// Received power on a regular floor grid, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerGrid {
    /// Minimum corner of cell (0, 0).
    pub origin: (f64, f64),
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    /// dBm; `-inf` for no coverage.
    pub values: Vec<f64>,
    pub rx_height: f64,
    pub corridor_mask: Vec<bool>,
    /// Cells whose receiver point lies inside solid geometry.
    pub interior: Vec<bool>,
}

impl PowerGrid {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn cell_center(&self, idx: usize) -> (f64, f64) {
        let ix = idx % self.nx;
        let iy = idx / self.nx;
        (
            self.origin.0 + (ix as f64 + 0.5) * self.spacing,
            self.origin.1 + (iy as f64 + 0.5) * self.spacing,
        )
    }

    pub fn valid_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| !self.interior[i])
    }

    pub fn with_offset(&self, db: f64) -> PowerGrid {
        let mut g = self.clone();
        for v in &mut g.values {
            *v += db;
        }
        g
    }
}

/// Sweeps the receiver grid for one band.
pub fn compute_power_map(scene: &Scene, spec: &ScenarioSpec) -> Result<PowerGrid> {
    Ok(compute_power_maps(scene, spec, &[spec.band.clone()])?.remove(0))
}

/// Sweeps the receiver grid once and band-averages the same path sets under
/// each of `bands`. Cells are independent; results are written back by cell
/// index, so the output does not depend on the thread count.
pub fn compute_power_maps(scene: &Scene, spec: &ScenarioSpec, bands: &[UwbBand]) -> Result<Vec<PowerGrid>> {
    spec.validate()?;
    if bands.is_empty() {
        return Ok(Vec::new());
    }
    let lowest = bands.iter().map(|b| b.lowest_frequency()).fold(f64::INFINITY, f64::min);
    let cfg = TracerConfig {
        pruning_frequency_hz: lowest,
        ..spec.tracer
    };
    let tracer = Tracer::new(scene, spec.tx_position, cfg)?;
    let tx_antenna = spec.tx_antenna_model();

    let samples: Vec<Vec<(f64, f64)>> = bands.iter().map(band_samples).collect();
    let frequencies: Vec<f64> = samples.iter().flatten().map(|s| s.0).collect();

    let template = spec.empty_grid();
    let cells: Vec<Option<Vec<f64>>> = (0..template.len())
        .into_par_iter()
        .map(|idx| {
            let (x, y) = template.cell_center(idx);
            let rx = Point3::new(x, y, spec.rx_height);
            if scene.is_interior(&rx) {
                return None;
            }
            let rx_antenna = spec.rx_antenna_at(rx);
            let mut channel = vec![Complex64::new(0.0, 0.0); frequencies.len()];
            for mut path in tracer.paths_to(&rx) {
                evaluate_band(scene, &mut path, &frequencies, &tx_antenna, &rx_antenna);
                for (h, (_, a)) in channel.iter_mut().zip(&path.amplitude) {
                    *h += a;
                }
            }
            let mut offset = 0;
            let powers = samples
                .iter()
                .map(|s| {
                    let p = weighted_power_dbm(&channel[offset..offset + s.len()], s, &spec.budget);
                    offset += s.len();
                    p
                })
                .collect();
            Some(powers)
        })
        .collect();

    Ok((0..bands.len())
        .map(|b| {
            let mut g = template.clone();
            for (i, c) in cells.iter().enumerate() {
                match c {
                    Some(p) => g.values[i] = p[b],
                    None => g.interior[i] = true,
                }
            }
            g
        })
        .collect())
}

/// 4-connected set of below-threshold cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowRegion {
    pub cells: Vec<usize>,
    /// Mean cell center, m.
    pub centroid: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageStats {
    pub covered_fraction: f64,
    /// `NaN` when the grid has no valid corridor cells.
    pub corridor_covered_fraction: f64,
    pub valid_cell_count: usize,
    pub shadow_cell_count: usize,
    pub shadow_regions: Vec<ShadowRegion>,
}

/// Coverage over non-interior cells at `threshold_dbm`.
pub fn coverage_stats(grid: &PowerGrid, threshold_dbm: f64) -> CoverageStats {
    let n = grid.len();
    let shadow: Vec<bool> = (0..n)
        .map(|i| !grid.interior[i] && !(grid.values[i] >= threshold_dbm))
        .collect();
    let valid = grid.valid_cells().count();
    let shadow_cell_count = shadow.iter().filter(|&&s| s).count();
    let corridor: Vec<usize> = grid.valid_cells().filter(|&i| grid.corridor_mask[i]).collect();
    let corridor_covered = corridor.iter().filter(|&&i| !shadow[i]).count();

    let mut seen = vec![false; n];
    let mut regions = Vec::new();
    for start in 0..n {
        if !shadow[start] || seen[start] {
            continue;
        }
        let mut cells = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            cells.push(i);
            let (ix, iy) = (i % grid.nx, i / grid.nx);
            let mut visit = |j: usize| {
                if shadow[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if ix > 0 {
                visit(i - 1);
            }
            if ix + 1 < grid.nx {
                visit(i + 1);
            }
            if iy > 0 {
                visit(i - grid.nx);
            }
            if iy + 1 < grid.ny {
                visit(i + grid.nx);
            }
        }
        cells.sort_unstable();
        let (sx, sy) = cells.iter().fold((0.0, 0.0), |(sx, sy), &i| {
            let (x, y) = grid.cell_center(i);
            (sx + x, sy + y)
        });
        let k = cells.len() as f64;
        regions.push(ShadowRegion {
            centroid: (sx / k, sy / k),
            cells,
        });
    }

    CoverageStats {
        covered_fraction: if valid == 0 {
            f64::NAN
        } else {
            1.0 - shadow_cell_count as f64 / valid as f64
        },
        corridor_covered_fraction: if corridor.is_empty() {
            f64::NAN
        } else {
            corridor_covered as f64 / corridor.len() as f64
        },
        valid_cell_count: valid,
        shadow_cell_count,
        shadow_regions: regions,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyConfig {
    pub stop_distance: f64,
    pub threshold_dbm: f64,
}

impl Default for SafetyConfig {
    fn default() -> Self {
        Self {
            stop_distance: 6.0,
            threshold_dbm: LinkBudget::default().threshold_dbm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeMask {
    Corridor,
    All,
}

/// Largest horizontal radius around `tx_xy` within which every masked,
/// non-interior cell meets the threshold. The radius stops at the last
/// covered cell before the nearest failing one, so it is 0 when the nearest
/// masked cell already fails.
pub fn safe_range(grid: &PowerGrid, tx_xy: (f64, f64), safety: &SafetyConfig, mask: RangeMask) -> f64 {
    let mut cells: Vec<(f64, bool)> = grid
        .valid_cells()
        .filter(|&i| mask == RangeMask::All || grid.corridor_mask[i])
        .map(|i| {
            let (x, y) = grid.cell_center(i);
            let d = (x - tx_xy.0).hypot(y - tx_xy.1);
            (d, grid.values[i] >= safety.threshold_dbm)
        })
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut r = 0.0;
    for (d, ok) in cells {
        if !ok {
            break;
        }
        r = d;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapComparison {
    pub classification_disagreement_fraction: f64,
    /// `NaN` when no cell is covered in both maps.
    pub mean_abs_diff_db: f64,
    /// `covered_fraction(a) - covered_fraction(b)`.
    pub coverage_delta: f64,
}

/// Cell-by-cell comparison over cells that are valid in both grids.
pub fn compare_maps(a: &PowerGrid, b: &PowerGrid, threshold_dbm: f64) -> Result<MapComparison> {
    if a.nx != b.nx || a.ny != b.ny {
        return Err(Error::DimensionMismatch(a.nx, a.ny, b.nx, b.ny));
    }
    let mut both_valid = 0usize;
    let mut disagree = 0usize;
    let mut diff_sum = 0.0;
    let mut diff_n = 0usize;
    for i in 0..a.len() {
        if a.interior[i] || b.interior[i] {
            continue;
        }
        both_valid += 1;
        let ca = a.values[i] >= threshold_dbm;
        let cb = b.values[i] >= threshold_dbm;
        if ca != cb {
            disagree += 1;
        }
        if ca && cb {
            diff_sum += (a.values[i] - b.values[i]).abs();
            diff_n += 1;
        }
    }
    let sa = coverage_stats(a, threshold_dbm);
    let sb = coverage_stats(b, threshold_dbm);
    Ok(MapComparison {
        classification_disagreement_fraction: if both_valid == 0 {
            0.0
        } else {
            disagree as f64 / both_valid as f64
        },
        mean_abs_diff_db: if diff_n == 0 { f64::NAN } else { diff_sum / diff_n as f64 },
        coverage_delta: sa.covered_fraction - sb.covered_fraction,
    })
}

/// Index of a cluster that shadows `point` as seen from `tx_xy`: the
/// straight line from the transmitter crosses the cluster footprint and the
/// point is farther from the transmitter than the cluster's center.
pub fn occluding_cluster(point: (f64, f64), tx_xy: (f64, f64), clusters: &[Rect]) -> Option<usize> {
    let dist = |p: (f64, f64)| (p.0 - tx_xy.0).hypot(p.1 - tx_xy.1);
    clusters
        .iter()
        .position(|r| segment_hits_rect(tx_xy, point, r) && dist(point) > dist(r.center()))
}

/// Liang-Barsky test of segment `a -> b` against a closed rectangle.
fn segment_hits_rect(a: (f64, f64), b: (f64, f64), r: &Rect) -> bool {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [(-dx, a.0 - r.x0), (dx, r.x1 - a.0), (-dy, a.1 - r.y0), (dy, r.y1 - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    t0 <= t1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: Vec<f64>, nx: usize, ny: usize) -> PowerGrid {
        PowerGrid {
            origin: (0.0, 0.0),
            spacing: 1.0,
            nx,
            ny,
            rx_height: 0.2,
            corridor_mask: vec![true; values.len()],
            interior: vec![false; values.len()],
            values,
        }
    }

    #[test]
    fn all_covered() {
        let s = coverage_stats(&grid(vec![-50.0; 12], 4, 3), -90.0);
        assert_eq!(s.covered_fraction, 1.0);
        assert_eq!(s.corridor_covered_fraction, 1.0);
        assert!(s.shadow_regions.is_empty());
    }

    #[test]
    fn all_shadowed_is_one_region() {
        let s = coverage_stats(&grid(vec![-95.0; 12], 4, 3), -90.0);
        assert_eq!(s.covered_fraction, 0.0);
        assert_eq!(s.shadow_regions.len(), 1);
        assert_eq!(s.shadow_regions[0].cells.len(), 12);
    }

    #[test]
    fn diagonal_cells_are_separate_regions() {
        let v = vec![-95.0, -50.0, -50.0, -95.0];
        let s = coverage_stats(&grid(v, 2, 2), -90.0);
        assert_eq!(s.shadow_regions.len(), 2);
        assert_eq!(s.shadow_cell_count, 2);
    }

    #[test]
    fn interior_cells_leave_the_denominator() {
        let mut g = grid(vec![-50.0, f64::NEG_INFINITY, -95.0, -50.0], 2, 2);
        g.interior[1] = true;
        let s = coverage_stats(&g, -90.0);
        assert_eq!(s.valid_cell_count, 3);
        assert!((s.covered_fraction - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn safe_range_cases() {
        let g = grid(vec![-50.0; 9], 3, 3);
        let safety = SafetyConfig::default();
        let r = safe_range(&g, (1.5, 1.5), &safety, RangeMask::All);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let strict = SafetyConfig {
            threshold_dbm: -10.0,
            ..safety
        };
        assert_eq!(safe_range(&g, (1.5, 1.5), &strict, RangeMask::All), 0.0);
        let mut h = g.clone();
        h.values[0] = -95.0;
        assert!((safe_range(&h, (1.5, 1.5), &safety, RangeMask::All) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_maps_agree() {
        let g = grid(vec![-50.0, -95.0, -70.0, f64::NEG_INFINITY], 2, 2);
        let c = compare_maps(&g, &g, -90.0).unwrap();
        assert_eq!(c.classification_disagreement_fraction, 0.0);
        assert_eq!(c.mean_abs_diff_db, 0.0);
        assert_eq!(c.coverage_delta, 0.0);
    }

    #[test]
    fn mismatched_maps_are_rejected() {
        let a = grid(vec![-50.0; 4], 2, 2);
        let b = grid(vec![-50.0; 6], 3, 2);
        assert!(matches!(compare_maps(&a, &b, -90.0), Err(Error::DimensionMismatch(2, 2, 3, 2))));
    }

    #[test]
    fn default_grid_and_corridors() {
        let spec = ScenarioSpec {
            grid_spacing: 0.25,
            ..Default::default()
        };
        let g = spec.empty_grid();
        assert_eq!((g.nx, g.ny), (88, 32));
        // inter-cluster corridor
        assert!(spec.is_corridor(4.5, 4.0));
        // perimeter aisle
        assert!(spec.is_corridor(2.0, 0.25));
        // inside a cluster
        assert!(!spec.is_corridor(2.0, 4.0));
        let odd = ScenarioSpec {
            grid_spacing: 0.3,
            ..Default::default()
        };
        assert_eq!(odd.empty_grid().nx, 74);
    }

    #[test]
    fn shadowing_cluster_lies_between() {
        let r = Rect {
            x0: 4.0,
            y0: 1.0,
            x1: 6.0,
            y1: 7.0,
        };
        assert_eq!(occluding_cluster((8.0, 4.0), (2.0, 4.0), &[r]), Some(0));
        assert_eq!(occluding_cluster((1.0, 4.0), (2.0, 4.0), &[r]), None);
        assert_eq!(occluding_cluster((8.0, 0.5), (2.0, 0.5), &[r]), None);
    }
}
