//! Single-edge diffraction search.
//!
//! A diffracted path is a transmitter-side image (the transmitter itself or
//! a node of the transmitter image tree), an edge, and a receiver-side image
//! built the same way around the receiver. With both sides unfolded the
//! diffraction point is the point on the edge line minimizing
//! `|S - D| + |D - R|`, which has a closed form: rotating `R` about the
//! edge into the half-plane opposite `S` turns the problem into a straight
//! line crossing the axis.

use super::image_tree::{ImageTree, TreeLimits, NO_PARENT};
use super::{Interaction, InteractionKind, PropagationPath};
use crate::geometry::{EdgeId, Point3, Scene, WedgeEdge};
use std::f64::consts::PI;

/// Diffraction points closer than this to an edge end are rejected, m.
const END_EPS: f64 = 1e-9;
/// Margin keeping both rays strictly inside the exterior wedge, rad.
const ANGLE_EPS: f64 = 1e-9;

struct Side {
    /// Image-tree node, or `NO_PARENT` for the end point itself.
    node: u32,
    depth: usize,
    point: Point3,
    /// Edges that can lie inside this side's beam.
    edges: Vec<u32>,
}

/// Transmitter-side diffraction sources, computed once per transmitter.
pub(super) struct Sources {
    max_reflections: usize,
    sides: Vec<Side>,
}

impl Sources {
    pub fn new(scene: &Scene, tree: &ImageTree, max_reflections: usize, max_length: f64) -> Self {
        Self {
            max_reflections,
            sides: sides_of(scene, tree, max_reflections, max_length),
        }
    }

    pub fn paths_to(
        &self,
        scene: &Scene,
        tx_tree: &ImageTree,
        tx: Point3,
        rx: Point3,
        max_length: f64,
    ) -> Vec<PropagationPath> {
        let rx_tree = ImageTree::build(
            scene,
            rx,
            &TreeLimits {
                max_depth: self.max_reflections,
                max_length,
                visibility_culling: false,
            },
        );
        let post = sides_of(scene, &rx_tree, self.max_reflections, max_length);
        let mut out = Vec::new();
        for pre in &self.sides {
            for sink in &post {
                if pre.depth + sink.depth > self.max_reflections {
                    continue;
                }
                let edges = if pre.depth == 0 && sink.depth > 0 { &sink.edges } else { &pre.edges };
                for &e in edges {
                    let edge = &scene.edges[e as usize];
                    let Some(d) = keller_point(edge, &pre.point, &sink.point) else {
                        continue;
                    };
                    if (pre.point - d).norm() + (d - sink.point).norm() > max_length {
                        continue;
                    }
                    if pre.node != NO_PARENT && !tx_tree.in_beam(pre.node as usize, &d) {
                        continue;
                    }
                    if sink.depth > 0 && !rx_tree.in_beam(sink.node as usize, &d) {
                        continue;
                    }
                    if !in_exterior(edge, &(pre.point - d)) || !in_exterior(edge, &(sink.point - d)) {
                        continue;
                    }
                    let Some(before) = chain(scene, tx_tree, pre.node, tx, &d) else {
                        continue;
                    };
                    let Some(mut after) = chain(scene, &rx_tree, sink.node, rx, &d) else {
                        continue;
                    };
                    after.reverse();
                    let mut interactions = before;
                    interactions.push(Interaction {
                        kind: InteractionKind::Diffraction(EdgeId(e as usize)),
                        point: d,
                    });
                    interactions.extend(after);
                    out.push(PropagationPath::new(tx, rx, interactions));
                }
            }
        }
        out
    }
}

fn sides_of(scene: &Scene, tree: &ImageTree, max_reflections: usize, max_length: f64) -> Vec<Side> {
    let source = tree.source;
    let near = |e: &WedgeEdge, p: &Point3| segment_distance(e, p) <= max_length;
    let mut sides = vec![Side {
        node: NO_PARENT,
        depth: 0,
        point: source,
        edges: (0..scene.edges.len() as u32)
            .filter(|&i| near(&scene.edges[i as usize], &source))
            .collect(),
    }];
    let mut planes = Vec::new();
    for (k, n) in tree.nodes.iter().enumerate() {
        if n.depth as usize > max_reflections {
            continue;
        }
        planes.clear();
        planes.push(n.plane);
        planes.extend_from_slice(tree.beam(k));
        let mut edges = Vec::new();
        scene.edge_index().for_each_in_convex(&planes, 1e-9, |i| {
            if near(&scene.edges[i], &n.image) {
                edges.push(i as u32);
            }
        });
        edges.sort_unstable();
        if !edges.is_empty() {
            sides.push(Side {
                node: k as u32,
                depth: n.depth as usize,
                point: n.image,
                edges,
            });
        }
    }
    sides
}

fn segment_distance(e: &WedgeEdge, p: &Point3) -> f64 {
    let t = (p - e.start).dot(&e.direction).clamp(0.0, e.length);
    (p - e.point_at(t)).norm()
}

/// Point on the open edge segment where the Keller cone condition holds for
/// rays from `s` and toward `r`.
pub(crate) fn keller_point(edge: &WedgeEdge, s: &Point3, r: &Point3) -> Option<Point3> {
    let a = (s - edge.start).dot(&edge.direction);
    let b = (r - edge.start).dot(&edge.direction);
    let ra = (s - edge.point_at(a)).norm();
    let rb = (r - edge.point_at(b)).norm();
    if ra + rb <= 1e-12 {
        return None;
    }
    let t = a + (b - a) * ra / (ra + rb);
    if !(t > END_EPS && t < edge.length - END_EPS) {
        return None;
    }
    Some(edge.point_at(t))
}

/// Whether direction `v` (away from the edge) points strictly into the
/// wedge's exterior and is not parallel to the edge.
pub(crate) fn in_exterior(edge: &WedgeEdge, v: &nalgebra::Vector3<f64>) -> bool {
    let len = v.norm();
    if len <= 1e-12 {
        return false;
    }
    let axial = v.dot(&edge.direction) / len;
    if 1.0 - axial.abs() < 1e-12 {
        return false;
    }
    let phi = edge.angle_from_face_a(v);
    phi > ANGLE_EPS && phi < edge.exterior_wedge_index_n * PI - ANGLE_EPS
}

/// Reflections linking `end` to the diffraction point through `node`,
/// ordered from `end`, or `None` if any leg is blocked.
fn chain(scene: &Scene, tree: &ImageTree, node: u32, end: Point3, d: &Point3) -> Option<Vec<Interaction>> {
    if node == NO_PARENT {
        return scene.segment_clear(&end, d).then(Vec::new);
    }
    let pts = tree.trace_back(scene, node, d)?;
    Some(
        pts.into_iter()
            .map(|(f, p)| Interaction {
                kind: InteractionKind::Reflection(f),
                point: p,
            })
            .collect(),
    )
}
