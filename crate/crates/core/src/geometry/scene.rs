use serde::Serialize;

use super::{Aabb, Bvh, Material, MaterialId, Plane, Point3, Vector3, RackPlacement, SELF_HIT_EPS};
use crate::error::{Error, Result};

/// Index into [`Scene::facets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FacetId(pub usize);

/// Index into [`Scene::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeId(pub usize);

/// Planar convex polygon, vertices counter-clockwise seen from the normal side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Facet {
    pub vertices: Vec<Point3>,
    pub unit_normal: Vector3,
    pub material: MaterialId,
    /// Solid this facet bounds, if any.
    pub solid: Option<usize>,
    #[serde(skip)]
    plane: Plane,
    /// In-plane half-spaces, one per polygon edge, positive inside.
    #[serde(skip)]
    edge_planes: Vec<Plane>,
    #[serde(skip)]
    bounds: Aabb,
}

impl Facet {
    pub fn new(vertices: Vec<Point3>, material: MaterialId, solid: Option<usize>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateGeometry("facet needs at least three vertices"));
        }
        // Newell normal
        let mut n = Vector3::zeros();
        for i in 0..vertices.len() {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % vertices.len()];
            n.x += (a.y - b.y) * (a.z + b.z);
            n.y += (a.z - b.z) * (a.x + b.x);
            n.z += (a.x - b.x) * (a.y + b.y);
        }
        let len = n.norm();
        if len < 1e-18 {
            return Err(Error::DegenerateGeometry("facet has zero area"));
        }
        let unit_normal = n / len;
        let plane = Plane::from_point_normal(&vertices[0], unit_normal);
        if vertices.iter().any(|v| plane.signed_distance(v).abs() > 1e-9) {
            return Err(Error::DegenerateGeometry("facet vertices are not coplanar"));
        }
        let mut edge_planes = Vec::with_capacity(vertices.len());
        for i in 0..vertices.len() {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % vertices.len()];
            let inward = unit_normal.cross(&(b - a));
            let l = inward.norm();
            if l < 1e-15 {
                return Err(Error::DegenerateGeometry("facet has a repeated vertex"));
            }
            edge_planes.push(Plane::from_point_normal(a, inward / l));
        }
        for ep in &edge_planes {
            if vertices.iter().any(|v| ep.signed_distance(v) < -1e-9) {
                return Err(Error::DegenerateGeometry("facet polygon is not convex"));
            }
        }
        let bounds = Aabb::from_points(vertices.iter());
        Ok(Self {
            vertices,
            unit_normal,
            material,
            solid,
            plane,
            edge_planes,
            bounds,
        })
    }

    #[inline]
    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn centroid(&self) -> Point3 {
        super::polygon_centroid(&self.vertices)
    }

    /// In-polygon test for a point assumed to lie on the facet plane.
    #[inline]
    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        self.edge_planes.iter().all(|e| e.signed_distance(p) >= -tol)
    }

    /// Ray parameter of the crossing with this facet, restricted to `(t_min, t_max)`.
    #[inline]
    pub fn intersect(&self, origin: &Point3, dir: &Vector3, t_min: f64, t_max: f64) -> Option<f64> {
        let denom = self.unit_normal.dot(dir);
        if denom.abs() < 1e-15 {
            return None;
        }
        let t = -self.plane.signed_distance(origin) / denom;
        if !(t > t_min && t < t_max) {
            return None;
        }
        let p = origin + dir * t;
        self.contains(&p, 1e-12).then_some(t)
    }
}

/// Straight wedge edge shared by two facets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WedgeEdge {
    pub start: Point3,
    pub end: Point3,
    pub face_a: FacetId,
    pub face_b: FacetId,
    /// Exterior wedge index, `2 - interior_angle / pi`.
    pub exterior_wedge_index_n: f64,
    /// Unit vector along the edge, `start -> end`.
    pub direction: Vector3,
    pub length: f64,
    /// Unit vector lying in face a, perpendicular to the edge, pointing into the face.
    pub face_a_tangent: Vector3,
    /// Outward normal of face a.
    pub face_a_normal: Vector3,
}

impl WedgeEdge {
    pub fn new(start: Point3, end: Point3, face_a: (FacetId, &Facet), face_b: (FacetId, &Facet)) -> Result<Self> {
        let axis = end - start;
        let length = axis.norm();
        if length < 1e-12 {
            return Err(Error::DegenerateGeometry("edge has zero length"));
        }
        let direction = axis / length;
        let na = face_a.1.unit_normal;
        let nb = face_b.1.unit_normal;
        let mut ta = direction.cross(&na);
        let mid = nalgebra::center(&start, &end);
        if (face_a.1.centroid() - mid).dot(&ta) < 0.0 {
            ta = -ta;
        }
        let mut tb = direction.cross(&nb);
        if (face_b.1.centroid() - mid).dot(&tb) < 0.0 {
            tb = -tb;
        }
        // interior angle between the two faces, measured through the solid
        let interior = ta.dot(&tb).clamp(-1.0, 1.0).acos();
        let n = 2.0 - interior / std::f64::consts::PI;
        if !(n > 1.0 && n <= 2.0) {
            return Err(Error::DegenerateGeometry("wedge index outside (1, 2]"));
        }
        Ok(Self {
            start,
            end,
            face_a: face_a.0,
            face_b: face_b.0,
            exterior_wedge_index_n: n,
            direction,
            length,
            face_a_tangent: ta,
            face_a_normal: na,
        })
    }

    /// Angle of `v` around the edge, measured from face a through the
    /// exterior region, in `[0, 2*pi)`. The exterior spans `[0, n*pi]`.
    pub fn angle_from_face_a(&self, v: &Vector3) -> f64 {
        let y = v.dot(&self.face_a_normal);
        let x = v.dot(&self.face_a_tangent);
        let a = y.atan2(x);
        if a < 0.0 {
            a + 2.0 * std::f64::consts::PI
        } else {
            a
        }
    }

    pub fn point_at(&self, t: f64) -> Point3 {
        self.start + self.direction * t
    }
}

/// Closed axis-aligned solid body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solid {
    pub bounds: Aabb,
    pub material: MaterialId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub facet: FacetId,
    pub distance: f64,
    pub point: Point3,
}

/// Immutable traced world.
#[derive(Debug, Clone)]
pub struct Scene {
    pub materials: Vec<Material>,
    pub facets: Vec<Facet>,
    pub edges: Vec<WedgeEdge>,
    pub solids: Vec<Solid>,
    pub racks: Vec<RackPlacement>,
    pub bounds: Aabb,
    index: Bvh,
    edge_index: Bvh,
}

impl PartialEq for Scene {
    fn eq(&self, other: &Self) -> bool {
        self.materials == other.materials
            && self.facets == other.facets
            && self.edges == other.edges
            && self.solids == other.solids
            && self.racks == other.racks
    }
}

impl Scene {
    pub fn new(
        materials: Vec<Material>,
        facets: Vec<Facet>,
        edges: Vec<WedgeEdge>,
        solids: Vec<Solid>,
        racks: Vec<RackPlacement>,
    ) -> Self {
        let boxes: Vec<Aabb> = facets.iter().map(|f| f.bounds).collect();
        let bounds = boxes.iter().fold(Aabb::empty(), |a, b| a.union(b));
        let index = Bvh::build(&boxes);
        let edge_boxes: Vec<Aabb> = edges.iter().map(|e| Aabb::from_points([&e.start, &e.end])).collect();
        let edge_index = Bvh::build(&edge_boxes);
        Self {
            materials,
            facets,
            edges,
            solids,
            racks,
            bounds,
            index,
            edge_index,
        }
    }

    /// Scene built from bare facets, with every facet made of `material`.
    pub fn from_facets(material: Material, polygons: Vec<Vec<Point3>>) -> Result<Self> {
        let facets = polygons
            .into_iter()
            .map(|v| Facet::new(v, MaterialId(0), None))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(vec![material], facets, Vec::new(), Vec::new(), Vec::new()))
    }

    pub fn facet(&self, id: FacetId) -> &Facet {
        &self.facets[id.0]
    }

    pub fn edge(&self, id: EdgeId) -> &WedgeEdge {
        &self.edges[id.0]
    }

    pub fn material(&self, id: MaterialId) -> &Material {
        &self.materials[id.0]
    }

    pub fn facet_material(&self, id: FacetId) -> &Material {
        self.material(self.facets[id.0].material)
    }

    pub fn index(&self) -> &Bvh {
        &self.index
    }

    /// Hierarchy over wedge-edge bounding boxes.
    pub fn edge_index(&self) -> &Bvh {
        &self.edge_index
    }

    /// Nearest facet crossing along the ray with distance in `(SELF_HIT_EPS, t_max)`.
    pub fn intersect_ray(&self, origin: &Point3, direction: &Vector3, t_max: f64) -> Option<Hit> {
        let mut best: Option<(f64, usize)> = None;
        self.index.traverse_ray(origin, direction, 0.0, t_max, |i, t_hi| {
            // keep equal-distance ties so the lowest id wins, matching the brute-force scan
            if let Some(t) = self.facets[i].intersect(origin, direction, SELF_HIT_EPS, t_hi.next_up()) {
                let better = match best {
                    None => true,
                    Some((bt, bi)) => t < bt || (t == bt && i < bi),
                };
                if better {
                    best = Some((t, i));
                }
            }
            Some(best.map_or(t_max, |b| b.0))
        });
        best.map(|(t, i)| Hit {
            facet: FacetId(i),
            distance: t,
            point: origin + direction * t,
        })
    }

    /// Linear scan over all facets; the reference for [`Scene::intersect_ray`].
    pub fn intersect_ray_brute_force(&self, origin: &Point3, direction: &Vector3, t_max: f64) -> Option<Hit> {
        let mut best: Option<(f64, usize)> = None;
        for (i, f) in self.facets.iter().enumerate() {
            if let Some(t) = f.intersect(origin, direction, SELF_HIT_EPS, t_max) {
                if best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, i));
                }
            }
        }
        best.map(|(t, i)| Hit {
            facet: FacetId(i),
            distance: t,
            point: origin + direction * t,
        })
    }

    /// True iff no facet crosses the open segment `(p, q)` farther than
    /// [`SELF_HIT_EPS`] from either endpoint.
    pub fn segment_clear(&self, p: &Point3, q: &Point3) -> bool {
        let d = q - p;
        let len = d.norm();
        if len <= 2.0 * SELF_HIT_EPS {
            return true;
        }
        let dir = d / len;
        let t_hi = len - SELF_HIT_EPS;
        let mut clear = true;
        self.index.traverse_ray(p, &dir, 0.0, t_hi, |i, _| {
            if self.facets[i].intersect(p, &dir, SELF_HIT_EPS, t_hi).is_some() {
                clear = false;
                None
            } else {
                Some(t_hi)
            }
        });
        clear
    }

    /// True when `p` lies strictly inside a solid body.
    pub fn is_interior(&self, p: &Point3) -> bool {
        self.solids.iter().any(|s| s.bounds.contains_strict(p))
    }
}

/// Nearest hit along a unit-direction ray, or `None` on a miss.
pub fn intersect_ray(scene: &Scene, origin: &Point3, direction: &Vector3) -> Option<Hit> {
    debug_assert!((direction.norm() - 1.0).abs() < 1e-9);
    scene.intersect_ray(origin, direction, f64::INFINITY)
}

/// Whether the open segment `(p, q)` is unobstructed.
pub fn segment_clear(scene: &Scene, p: &Point3, q: &Point3) -> bool {
    scene.segment_clear(p, q)
}
