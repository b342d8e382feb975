#![allow(dead_code)]

use num_complex::Complex64;

use warewave::em::{AntennaModel, Pattern};
use warewave::geometry::{Facet, FacetId, Material, MaterialId, Point3, Scene, Vector3, WedgeEdge};
use warewave::tracer::{evaluate_path, PropagationPath, Tracer, TracerConfig};

pub const FC: f64 = 3.994e9;
pub const C0: f64 = 299_792_458.0;

pub fn lambda(f: f64) -> f64 {
    C0 / f
}

pub fn isotropic(p: Point3, axis: Vector3) -> AntennaModel {
    AntennaModel {
        position: p,
        pattern: Pattern::Isotropic,
        polarization: axis,
    }
}

/// Square PEC ground in the z = 0 plane, normal up.
pub fn ground(material: Material, half: f64) -> Scene {
    Scene::from_facets(
        material,
        vec![vec![
            Point3::new(-half, -half, 0.0),
            Point3::new(half, -half, 0.0),
            Point3::new(half, half, 0.0),
            Point3::new(-half, half, 0.0),
        ]],
    )
    .unwrap()
}

pub fn config(max_reflections: usize, diffraction: bool, with_diffraction: usize) -> TracerConfig {
    TracerConfig {
        max_reflections,
        enable_diffraction: diffraction,
        max_reflections_with_diffraction: with_diffraction,
        ..TracerConfig::default()
    }
}

/// Coherent sum of all traced paths at one frequency.
pub fn field(scene: &Scene, paths: &[PropagationPath], f: f64, tx: &AntennaModel, rx: &AntennaModel) -> Complex64 {
    paths.iter().map(|p| evaluate_path(scene, p, f, tx, rx)).sum()
}

pub fn db(a: Complex64) -> f64 {
    10.0 * a.norm_sqr().log10()
}

pub fn trace(scene: &Scene, tx: Point3, rx: Point3, cfg: TracerConfig) -> Vec<PropagationPath> {
    Tracer::new(scene, tx, cfg).unwrap().paths_to(&rx)
}

/// PEC wedge in the xz plane with its edge along y through the origin.
/// Face a lies along +x (normal +z), face b leaves the edge at
/// `interior` radians from face a, measured through the solid. A zero
/// interior angle gives a half-plane screen.
pub fn wedge(interior: f64, reach: f64, half_width: f64) -> Scene {
    let (s, c) = (-interior).sin_cos();
    let tb = Vector3::new(c, 0.0, s);
    let w = half_width;
    let y = |p: Point3, dy: f64| Point3::new(p.x, dy, p.z);
    let o = Point3::origin();
    let a_far = Point3::new(reach, 0.0, 0.0);
    let b_far = o + tb * reach;
    // face a seen from +z, counter-clockwise
    let face_a = vec![y(o, -w), y(a_far, -w), y(a_far, w), y(o, w)];
    let mut face_b = vec![y(o, -w), y(b_far, -w), y(b_far, w), y(o, w)];
    let fb = Facet::new(face_b.clone(), MaterialId(0), None).unwrap();
    // face b normal must point away from face a's side of it
    let away = Vector3::new(1.0, 0.0, 0.0) - tb * tb.x;
    let outward_ok = if away.norm() > 1e-9 {
        fb.unit_normal.dot(&away) < 0.0
    } else {
        fb.unit_normal.z < 0.0
    };
    if !outward_ok {
        face_b.reverse();
    }
    let fa = Facet::new(face_a, MaterialId(0), None).unwrap();
    let fb = Facet::new(face_b, MaterialId(0), None).unwrap();
    let edge = WedgeEdge::new(Point3::new(0.0, -w, 0.0), Point3::new(0.0, w, 0.0), (FacetId(0), &fa), (FacetId(1), &fb))
        .unwrap();
    Scene::new(vec![Material::pec()], vec![fa, fb], vec![edge], Vec::new(), Vec::new())
}

/// Vertical wall rectangle from `a` to `b` (floor plan) spanning
/// `z0..z1`, normal pointing to the left of `a -> b`.
pub fn wall(a: (f64, f64), b: (f64, f64), z0: f64, z1: f64) -> Vec<Point3> {
    vec![
        Point3::new(a.0, a.1, z0),
        Point3::new(a.0, a.1, z1),
        Point3::new(b.0, b.1, z1),
        Point3::new(b.0, b.1, z0),
    ]
}

/// Runtime allowance multiplier: limits are stated for four cores.
pub fn core_scale() -> f64 {
    let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1) as f64;
    (4.0 / n).max(1.0)
}
