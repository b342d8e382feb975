//! Scene geometry: materials, planar facets, wedge edges, the warehouse
//! generator and the ray queries the tracer is built on.

mod bvh;
mod material;
mod scene;
mod warehouse;

pub use bvh::Bvh;
pub use material::{Material, MaterialId, PRESET_NAMES};
pub use scene::{intersect_ray, segment_clear, Facet, FacetId, Hit, Scene, Solid, WedgeEdge, EdgeId};
pub use warehouse::{generate_warehouse, RackPlacement, Rect, WarehouseSpec, PLACEMENT_ATTEMPTS};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

/// Hits closer than this to a ray origin or segment endpoint are ignored.
pub const SELF_HIT_EPS: f64 = 1e-9;

/// Oriented plane `normal · x = offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vector3,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Vector3, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn from_point_normal(point: &Point3, normal: Vector3) -> Self {
        Self {
            normal,
            offset: normal.dot(&point.coords),
        }
    }

    /// Plane through three points, oriented by the right-hand rule.
    pub fn through(a: &Point3, b: &Point3, c: &Point3) -> Option<Self> {
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len < 1e-300 {
            return None;
        }
        Some(Self::from_point_normal(a, n / len))
    }

    #[inline]
    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            offset: -self.offset,
        }
    }

    /// Parameter `t` where `origin + t * dir` meets the plane.
    #[inline]
    pub fn ray_parameter(&self, origin: &Point3, dir: &Vector3) -> Option<f64> {
        let denom = self.normal.dot(dir);
        if denom.abs() < 1e-300 {
            return None;
        }
        Some((self.offset - self.normal.dot(&origin.coords)) / denom)
    }
}

/// Reflection of `p` across `plane`.
#[inline]
pub fn mirror_point(p: &Point3, plane: &Plane) -> Point3 {
    p - plane.normal * (2.0 * plane.signed_distance(p))
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn new(min: Point3, max: Point3) -> Self {
        Self { min, max }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn center(&self) -> Point3 {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn extent(&self) -> Vector3 {
        self.max - self.min
    }

    pub fn contains_strict(&self, p: &Point3) -> bool {
        (0..3).all(|k| p[k] > self.min[k] && p[k] < self.max[k])
    }

    /// Slab test; returns the entry/exit parameters clipped to `[t_min, t_max]`.
    #[inline]
    pub fn ray_interval(&self, origin: &Point3, inv_dir: &Vector3, t_min: f64, t_max: f64) -> Option<(f64, f64)> {
        let mut lo = t_min;
        let mut hi = t_max;
        for k in 0..3 {
            let t0 = (self.min[k] - origin[k]) * inv_dir[k];
            let t1 = (self.max[k] - origin[k]) * inv_dir[k];
            let (a, b) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            // NaN from 0 * inf keeps the current bound
            if a > lo {
                lo = a;
            }
            if b < hi {
                hi = b;
            }
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }

    /// True when the whole box lies strictly on the negative side of `plane`.
    #[inline]
    pub fn outside(&self, plane: &Plane, eps: f64) -> bool {
        // farthest corner along the normal
        let n = &plane.normal;
        let p = Point3::new(
            if n.x >= 0.0 { self.max.x } else { self.min.x },
            if n.y >= 0.0 { self.max.y } else { self.min.y },
            if n.z >= 0.0 { self.max.z } else { self.min.z },
        );
        plane.signed_distance(&p) < -eps
    }
}

/// Sutherland-Hodgman clip of a convex polygon to the half-space
/// `signed_distance >= eps`.
pub fn clip_polygon(poly: &[Point3], plane: &Plane, eps: f64) -> Vec<Point3> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        let da = plane.signed_distance(a) - eps;
        let db = plane.signed_distance(b) - eps;
        if da >= 0.0 {
            out.push(*a);
        }
        if (da >= 0.0) != (db >= 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Area of a planar polygon.
pub fn polygon_area(poly: &[Point3]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = Vector3::zeros();
    let o = poly[0];
    for i in 1..poly.len() - 1 {
        acc += (poly[i] - o).cross(&(poly[i + 1] - o));
    }
    0.5 * acc.norm()
}

pub fn polygon_centroid(poly: &[Point3]) -> Point3 {
    let mut acc = Vector3::zeros();
    for p in poly {
        acc += p.coords;
    }
    Point3::from(acc / poly.len() as f64)
}

/// Any unit vector perpendicular to `v`.
pub fn any_perpendicular(v: &Vector3) -> Vector3 {
    let pick = if v.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    v.cross(&pick).normalize()
}
