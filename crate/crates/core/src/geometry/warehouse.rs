//! Parametric warehouse: a floor plus clusters of vertically stratified racks.
//!
//! Each rack is `layer_count` layers stacked at `layer_pitch`. A layer is a
//! PEC plate of `plate_thickness` at its bottom, an item slab filling the
//! rack footprint above it, and `layer_air_gap` of free space on top. Racks
//! are axis-aligned and placed uniformly at random inside their cluster
//! rectangle by rejection sampling against the clearance rule. The PRNG is
//! ChaCha8 seeded with `rng_seed` through `SeedableRng::seed_from_u64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Aabb, Facet, FacetId, Material, MaterialId, Point3, Scene, Solid, WedgeEdge};
use crate::error::{Error, Result};

pub const PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct WarehouseSpec {
    pub area_x: f64,
    pub area_y: f64,
    pub cluster_count: usize,
    pub racks_per_cluster: usize,
    pub corridor_width: f64,
    pub inter_rack_gap: f64,
    pub plate_thickness: f64,
    pub layer_air_gap: f64,
    pub layer_count: usize,
    /// Rack extent along x and y.
    pub rack_footprint: (f64, f64),
    pub layer_pitch: f64,
    /// Extent of every cluster rectangle along y; clusters are centered in y.
    pub cluster_depth: f64,
    /// RMS roughness applied to every rack surface (plates and items).
    pub rack_roughness: f64,
    pub item_material: Material,
    pub floor_material: Material,
    pub rng_seed: u64,
}

impl Default for WarehouseSpec {
    fn default() -> Self {
        Self {
            area_x: 22.0,
            area_y: 8.0,
            cluster_count: 4,
            racks_per_cluster: 7,
            corridor_width: 1.5,
            inter_rack_gap: 0.05,
            plate_thickness: 0.02,
            layer_air_gap: 0.10,
            layer_count: 4,
            rack_footprint: (1.2, 0.8),
            layer_pitch: 0.5,
            cluster_depth: 6.0,
            rack_roughness: 0.05,
            item_material: Material::air(),
            floor_material: Material::preset("concrete_default").expect("preset"),
            rng_seed: 42,
        }
    }
}

/// Cluster footprint `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }
}

/// Where one rack landed; `x`, `y` is its minimum corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RackPlacement {
    pub cluster: usize,
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub size_x: f64,
    pub size_y: f64,
    pub height: f64,
}

impl RackPlacement {
    /// Clearance to `other` along the better-separated axis; negative when overlapping.
    pub fn clearance(&self, other: &RackPlacement) -> f64 {
        let gx = (other.x - (self.x + self.size_x)).max(self.x - (other.x + other.size_x));
        let gy = (other.y - (self.y + self.size_y)).max(self.y - (other.y + other.size_y));
        gx.max(gy)
    }
}

impl WarehouseSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("area_x", self.area_x),
            ("area_y", self.area_y),
            ("plate_thickness", self.plate_thickness),
            ("layer_pitch", self.layer_pitch),
            ("rack_footprint_x", self.rack_footprint.0),
            ("rack_footprint_y", self.rack_footprint.1),
            ("cluster_depth", self.cluster_depth),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("corridor_width", self.corridor_width),
            ("inter_rack_gap", self.inter_rack_gap),
            ("layer_air_gap", self.layer_air_gap),
            ("rack_roughness", self.rack_roughness),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.plate_thickness + self.layer_air_gap > self.layer_pitch {
            return Err(Error::InvalidSpec(
                "plate_thickness + layer_air_gap exceeds layer_pitch".into(),
            ));
        }
        if self.cluster_depth > self.area_y {
            return Err(Error::InvalidSpec("cluster_depth exceeds area_y".into()));
        }
        self.item_material.validate().map_err(Error::InvalidSpec)?;
        self.floor_material.validate().map_err(Error::InvalidSpec)?;
        if self.cluster_count > 0 {
            let w = self.cluster_width();
            if !(w > 0.0) {
                return Err(Error::InvalidSpec("corridors leave no room for clusters".into()));
            }
            if self.racks_per_cluster > 0
                && (w < self.rack_footprint.0 || self.cluster_depth < self.rack_footprint.1)
            {
                return Err(Error::InvalidSpec("rack footprint does not fit in a cluster".into()));
            }
        }
        Ok(())
    }

    pub fn cluster_width(&self) -> f64 {
        let n = self.cluster_count as f64;
        (self.area_x - (n - 1.0) * self.corridor_width) / n
    }

    pub fn rack_height(&self) -> f64 {
        self.layer_count as f64 * self.layer_pitch
    }

    /// Cluster rectangles along x, separated by corridors, centered in y.
    pub fn cluster_rects(&self) -> Vec<Rect> {
        let w = self.cluster_width();
        let y0 = 0.5 * (self.area_y - self.cluster_depth);
        (0..self.cluster_count)
            .map(|c| {
                let x0 = c as f64 * (w + self.corridor_width);
                Rect {
                    x0,
                    y0,
                    x1: x0 + w,
                    y1: y0 + self.cluster_depth,
                }
            })
            .collect()
    }

    /// Inter-cluster corridor strips, full warehouse depth.
    pub fn corridor_rects(&self) -> Vec<Rect> {
        let rects = self.cluster_rects();
        rects
            .windows(2)
            .map(|w| Rect {
                x0: w[0].x1,
                y0: 0.0,
                x1: w[1].x0,
                y1: self.area_y,
            })
            .collect()
    }
}

fn place_racks(spec: &WarehouseSpec) -> Result<Vec<RackPlacement>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let (fx, fy) = spec.rack_footprint;
    let height = spec.rack_height();
    let mut racks = Vec::with_capacity(spec.cluster_count * spec.racks_per_cluster);
    for (c, rect) in spec.cluster_rects().iter().enumerate() {
        let first = racks.len();
        for r in 0..spec.racks_per_cluster {
            let mut placed = None;
            for _ in 0..PLACEMENT_ATTEMPTS {
                let x = rect.x0 + rng.random::<f64>() * (rect.x1 - rect.x0 - fx);
                let y = rect.y0 + rng.random::<f64>() * (rect.y1 - rect.y0 - fy);
                let cand = RackPlacement {
                    cluster: c,
                    index: r,
                    x,
                    y,
                    size_x: fx,
                    size_y: fy,
                    height,
                };
                if racks[first..]
                    .iter()
                    .all(|o: &RackPlacement| cand.clearance(o) >= spec.inter_rack_gap)
                {
                    placed = Some(cand);
                    break;
                }
            }
            match placed {
                Some(p) => racks.push(p),
                None => {
                    return Err(Error::PackingFailed {
                        cluster: c,
                        rack: r,
                        attempts: PLACEMENT_ATTEMPTS,
                    })
                }
            }
        }
    }
    Ok(racks)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Face {
    MinX,
    MaxX,
    MinY,
    MaxY,
    Bottom,
    Top,
}

const SIDES: [Face; 4] = [Face::MinX, Face::MaxX, Face::MinY, Face::MaxY];

fn box_face(b: &Aabb, face: Face) -> Vec<Point3> {
    let (x0, y0, z0) = (b.min.x, b.min.y, b.min.z);
    let (x1, y1, z1) = (b.max.x, b.max.y, b.max.z);
    let p = Point3::new;
    match face {
        Face::Top => vec![p(x0, y0, z1), p(x1, y0, z1), p(x1, y1, z1), p(x0, y1, z1)],
        Face::Bottom => vec![p(x0, y0, z0), p(x0, y1, z0), p(x1, y1, z0), p(x1, y0, z0)],
        Face::MaxX => vec![p(x1, y0, z0), p(x1, y1, z0), p(x1, y1, z1), p(x1, y0, z1)],
        Face::MinX => vec![p(x0, y0, z0), p(x0, y0, z1), p(x0, y1, z1), p(x0, y1, z0)],
        Face::MaxY => vec![p(x0, y1, z0), p(x0, y1, z1), p(x1, y1, z1), p(x1, y1, z0)],
        Face::MinY => vec![p(x0, y0, z0), p(x1, y0, z0), p(x1, y0, z1), p(x0, y0, z1)],
    }
}

/// Shared segment of two adjacent box faces.
fn box_edge(b: &Aabb, a: Face, c: Face) -> (Point3, Point3) {
    let (x0, y0, z0) = (b.min.x, b.min.y, b.min.z);
    let (x1, y1, z1) = (b.max.x, b.max.y, b.max.z);
    let p = Point3::new;
    let z_of = |f: Face| if f == Face::Top { z1 } else { z0 };
    match (a, c) {
        (Face::MinY, h @ (Face::Top | Face::Bottom)) => (p(x0, y0, z_of(h)), p(x1, y0, z_of(h))),
        (Face::MaxY, h @ (Face::Top | Face::Bottom)) => (p(x0, y1, z_of(h)), p(x1, y1, z_of(h))),
        (Face::MinX, h @ (Face::Top | Face::Bottom)) => (p(x0, y0, z_of(h)), p(x0, y1, z_of(h))),
        (Face::MaxX, h @ (Face::Top | Face::Bottom)) => (p(x1, y0, z_of(h)), p(x1, y1, z_of(h))),
        (Face::MinX, Face::MinY) => (p(x0, y0, z0), p(x0, y0, z1)),
        (Face::MaxX, Face::MinY) => (p(x1, y0, z0), p(x1, y0, z1)),
        (Face::MaxX, Face::MaxY) => (p(x1, y1, z0), p(x1, y1, z1)),
        (Face::MinX, Face::MaxY) => (p(x0, y1, z0), p(x0, y1, z1)),
        _ => unreachable!("faces are not adjacent"),
    }
}

const FLOOR: MaterialId = MaterialId(0);
const PLATE: MaterialId = MaterialId(1);
const ITEM: MaterialId = MaterialId(2);

/// Builds the warehouse scene. Pure function of `spec`.
pub fn generate_warehouse(spec: &WarehouseSpec) -> Result<Scene> {
    spec.validate()?;
    let racks = place_racks(spec)?;

    let materials = vec![
        spec.floor_material.clone(),
        Material::pec().with_roughness(spec.rack_roughness),
        spec.item_material.clone().with_roughness(spec.rack_roughness),
    ];
    let with_items = !spec.item_material.is_transparent();

    let mut facets = vec![Facet::new(
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(spec.area_x, 0.0, 0.0),
            Point3::new(spec.area_x, spec.area_y, 0.0),
            Point3::new(0.0, spec.area_y, 0.0),
        ],
        FLOOR,
        None,
    )?];
    let mut solids = Vec::new();
    let mut edges = Vec::new();

    for rack in &racks {
        for layer in 0..spec.layer_count {
            let z0 = layer as f64 * spec.layer_pitch;
            let plate_top = z0 + spec.plate_thickness;
            let item_top = z0 + spec.layer_pitch - spec.layer_air_gap;
            let plate = Aabb::new(
                Point3::new(rack.x, rack.y, z0),
                Point3::new(rack.x + rack.size_x, rack.y + rack.size_y, plate_top),
            );
            let has_item = with_items && item_top > plate_top;

            let plate_solid = solids.len();
            solids.push(Solid {
                bounds: plate,
                material: PLATE,
            });
            // the lowest plate rests on the floor; an item covers the plate top
            let mut faces = Vec::new();
            if z0 > 0.0 {
                faces.push(Face::Bottom);
            }
            faces.extend(SIDES);
            if !has_item {
                faces.push(Face::Top);
            }
            let mut ids = Vec::with_capacity(faces.len());
            for &face in &faces {
                ids.push((face, FacetId(facets.len())));
                facets.push(Facet::new(box_face(&plate, face), PLATE, Some(plate_solid))?);
            }
            let find = |f: Face| ids.iter().find(|(g, _)| *g == f).map(|(_, id)| *id);
            let mut pairs: Vec<(Face, Face)> = Vec::new();
            for h in [Face::Bottom, Face::Top] {
                if find(h).is_some() {
                    for s in SIDES {
                        pairs.push((s, h));
                    }
                }
            }
            pairs.extend([
                (Face::MinX, Face::MinY),
                (Face::MaxX, Face::MinY),
                (Face::MaxX, Face::MaxY),
                (Face::MinX, Face::MaxY),
            ]);
            for (a, b) in pairs {
                let (ia, ib) = (find(a).expect("face"), find(b).expect("face"));
                let (s, e) = box_edge(&plate, a, b);
                edges.push(WedgeEdge::new(s, e, (ia, &facets[ia.0]), (ib, &facets[ib.0]))?);
            }

            if has_item {
                let slab = Aabb::new(
                    Point3::new(rack.x, rack.y, plate_top),
                    Point3::new(rack.x + rack.size_x, rack.y + rack.size_y, item_top),
                );
                let slab_solid = solids.len();
                solids.push(Solid {
                    bounds: slab,
                    material: ITEM,
                });
                let mut ids = Vec::with_capacity(5);
                for face in SIDES.into_iter().chain([Face::Top]) {
                    ids.push((face, FacetId(facets.len())));
                    facets.push(Facet::new(box_face(&slab, face), ITEM, Some(slab_solid))?);
                }
                let find = |f: Face| ids.iter().find(|(g, _)| *g == f).map(|(_, id)| *id).expect("face");
                // slab sides are flush with the plate sides, so the seam
                // between them is not a wedge
                let pairs = SIDES.map(|s| (s, Face::Top)).into_iter().chain([
                    (Face::MinX, Face::MinY),
                    (Face::MaxX, Face::MinY),
                    (Face::MaxX, Face::MaxY),
                    (Face::MinX, Face::MaxY),
                ]);
                for (a, b) in pairs {
                    let (ia, ib) = (find(a), find(b));
                    let (s, e) = box_edge(&slab, a, b);
                    edges.push(WedgeEdge::new(s, e, (ia, &facets[ia.0]), (ib, &facets[ib.0]))?);
                }
            }
        }
    }

    Ok(Scene::new(materials, facets, edges, solids, racks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout_places_all_racks() {
        let spec = WarehouseSpec::default();
        let scene = generate_warehouse(&spec).unwrap();
        assert_eq!(scene.racks.len(), 28);
        for r in &scene.racks {
            assert!(r.x >= 0.0 && r.x + r.size_x <= spec.area_x);
            assert!(r.y >= 0.0 && r.y + r.size_y <= spec.area_y);
        }
        for (i, a) in scene.racks.iter().enumerate() {
            for b in &scene.racks[i + 1..] {
                assert!(a.clearance(b) >= spec.inter_rack_gap);
            }
        }
        // empty racks: 4 plates, each with sides and top, bottom except on the floor
        assert_eq!(scene.facets.len(), 1 + 28 * (5 + 3 * 6));
        assert_eq!(scene.edges.len(), 28 * (8 + 3 * 12));
    }

    #[test]
    fn no_clusters_means_floor_only() {
        let spec = WarehouseSpec {
            cluster_count: 0,
            ..Default::default()
        };
        let scene = generate_warehouse(&spec).unwrap();
        assert_eq!(scene.facets.len(), 1);
        assert!(scene.edges.is_empty() && scene.racks.is_empty());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let spec = WarehouseSpec {
            item_material: Material::preset("coca_cola").unwrap(),
            ..Default::default()
        };
        let a = generate_warehouse(&spec).unwrap();
        let b = generate_warehouse(&spec).unwrap();
        assert_eq!(a, b);
        let bytes = |s: &Scene| serde_json::to_vec(&(&s.facets, &s.edges, &s.racks)).unwrap();
        assert_eq!(bytes(&a), bytes(&b));
        let other = generate_warehouse(&WarehouseSpec { rng_seed: 7, ..spec }).unwrap();
        assert_ne!(a.racks, other.racks);
    }

    #[test]
    fn normals_point_out_of_their_solid() {
        let spec = WarehouseSpec {
            item_material: Material::preset("olive_oil").unwrap(),
            ..Default::default()
        };
        let scene = generate_warehouse(&spec).unwrap();
        for f in &scene.facets {
            if let Some(s) = f.solid {
                let to_center = scene.solids[s].bounds.center() - f.centroid();
                assert!(f.unit_normal.dot(&to_center) < 0.0);
            }
        }
    }

    #[test]
    fn filled_racks_have_item_edges() {
        let spec = WarehouseSpec {
            item_material: Material::preset("coca_cola").unwrap(),
            ..Default::default()
        };
        let scene = generate_warehouse(&spec).unwrap();
        // plate: sides (+ bottom above the floor); item: sides + top
        assert_eq!(scene.facets.len(), 1 + 28 * (4 + 3 * 5 + 4 * 5));
        assert_eq!(scene.edges.len(), 28 * (4 + 3 * 8 + 4 * 8));
        assert_eq!(scene.solids.len(), 28 * 8);
        for e in &scene.edges {
            assert!((e.exterior_wedge_index_n - 1.5).abs() < 1e-12);
            let fa = scene.facet(e.face_a);
            let fb = scene.facet(e.face_b);
            for p in [e.start, e.end] {
                assert!(fa.plane().signed_distance(&p).abs() < 1e-9);
                assert!(fb.plane().signed_distance(&p).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn invalid_dimensions_are_rejected() {
        let spec = WarehouseSpec {
            area_x: -1.0,
            ..Default::default()
        };
        assert!(matches!(generate_warehouse(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn overfull_cluster_fails_to_pack() {
        let spec = WarehouseSpec {
            racks_per_cluster: 40,
            ..Default::default()
        };
        assert!(matches!(generate_warehouse(&spec), Err(Error::PackingFailed { .. })));
    }
}
