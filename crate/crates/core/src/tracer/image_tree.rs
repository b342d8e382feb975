//! Image-source tree for a fixed source point.
//!
//! Node `k` stands for one ordered facet sequence. It stores the source
//! mirrored across every facet of the sequence and the beam through which
//! that image can illuminate: the pyramid from the image through the
//! window, the part of the last facet reachable through all earlier
//! windows. Windows are clipped exactly, so a receiver outside a node's
//! beam cannot be reached through that sequence.

use crate::geometry::{
    clip_polygon, mirror_point, polygon_area, polygon_centroid, FacetId, Plane, Point3, Scene,
};

pub(crate) const NO_PARENT: u32 = u32::MAX;

/// Strictly-in-front tolerance for points against facet planes.
pub(crate) const FRONT_EPS: f64 = 1e-9;
/// Slack when testing points against beam side planes.
const BEAM_EPS: f64 = 1e-9;
/// Reflection points may sit this far outside their polygon.
pub(crate) const CONTAINS_TOL: f64 = 1e-9;
/// Windows smaller than this are treated as empty, m^2.
const MIN_WINDOW_AREA: f64 = 1e-10;
/// Target spacing of visibility samples on a window, m.
const SAMPLE_SPACING: f64 = 0.2;
/// Cap on lattice subdivisions per fan triangle.
const MAX_SUBDIVISIONS: usize = 8;

#[derive(Debug, Clone)]
pub(crate) struct ImageNode {
    pub parent: u32,
    pub facet: FacetId,
    pub depth: u8,
    pub image: Point3,
    /// Plane of `facet`, positive on the reflecting side.
    pub plane: Plane,
    beam_start: u32,
    beam_len: u16,
}

#[derive(Debug, Clone)]
pub(crate) struct ImageTree {
    pub source: Point3,
    pub nodes: Vec<ImageNode>,
    beam_planes: Vec<Plane>,
}

pub(crate) struct TreeLimits {
    pub max_depth: usize,
    /// Unfolded paths longer than this cannot matter.
    pub max_length: f64,
    /// Drop windows that no sampled point can be reached through.
    pub visibility_culling: bool,
}

impl ImageTree {
    pub fn build(scene: &Scene, source: Point3, limits: &TreeLimits) -> Self {
        let mut tree = ImageTree {
            source,
            nodes: Vec::new(),
            beam_planes: Vec::new(),
        };
        if limits.max_depth == 0 {
            return tree;
        }

        // level 1: every facet the source sits in front of
        let mut frontier: Vec<u32> = Vec::new();
        for (i, f) in scene.facets.iter().enumerate() {
            let d = f.plane().signed_distance(&source);
            if d <= FRONT_EPS || d > limits.max_length {
                continue;
            }
            let window = f.vertices.clone();
            if limits.visibility_culling && !tree.window_visible(scene, None, &window) {
                continue;
            }
            let image = mirror_point(&source, f.plane());
            frontier.push(tree.push_node(NO_PARENT, FacetId(i), 1, image, f.plane(), &window));
        }

        for depth in 2..=limits.max_depth {
            let mut next = Vec::new();
            let mut query: Vec<Plane> = Vec::new();
            let mut candidates: Vec<usize> = Vec::new();
            for parent in &frontier {
                let p = &tree.nodes[*parent as usize];
                let parent_image = p.image;
                let parent_facet = p.facet;
                let parent_plane = p.plane;
                query.clear();
                query.push(parent_plane);
                query.extend_from_slice(tree.beam(*parent as usize));
                candidates.clear();
                scene.index().for_each_in_convex(&query, 1e-9, |i| candidates.push(i));
                candidates.sort_unstable();
                for &i in &candidates {
                    if i == parent_facet.0 {
                        continue;
                    }
                    let f = &scene.facets[i];
                    let d = f.plane().signed_distance(&parent_image);
                    if d <= FRONT_EPS || d > limits.max_length {
                        continue;
                    }
                    // coplanar facets cannot follow each other
                    if (f.unit_normal - parent_plane.normal).norm() < 1e-12
                        && (f.plane().offset - parent_plane.offset).abs() < 1e-12
                    {
                        continue;
                    }
                    let mut window = clip_polygon(&f.vertices, &parent_plane, FRONT_EPS);
                    for bp in tree.beam(*parent as usize) {
                        if window.len() < 3 {
                            break;
                        }
                        window = clip_polygon(&window, bp, 0.0);
                    }
                    if window.len() < 3 || polygon_area(&window) < MIN_WINDOW_AREA {
                        continue;
                    }
                    if limits.visibility_culling && !tree.window_visible(scene, Some(*parent), &window) {
                        continue;
                    }
                    let image = mirror_point(&parent_image, f.plane());
                    next.push(tree.push_node(*parent, FacetId(i), depth as u8, image, f.plane(), &window));
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        tree
    }

    fn push_node(&mut self, parent: u32, facet: FacetId, depth: u8, image: Point3, plane: &Plane, window: &[Point3]) -> u32 {
        let centroid = polygon_centroid(window);
        let beam_start = self.beam_planes.len() as u32;
        for k in 0..window.len() {
            let a = &window[k];
            let b = &window[(k + 1) % window.len()];
            if let Some(mut bp) = Plane::through(&image, a, b) {
                if bp.signed_distance(&centroid) < 0.0 {
                    bp = bp.flipped();
                }
                self.beam_planes.push(bp);
            }
        }
        let beam_len = (self.beam_planes.len() as u32 - beam_start) as u16;
        self.nodes.push(ImageNode {
            parent,
            facet,
            depth,
            image,
            plane: *plane,
            beam_start,
            beam_len,
        });
        (self.nodes.len() - 1) as u32
    }

    #[inline]
    pub fn beam(&self, node: usize) -> &[Plane] {
        let n = &self.nodes[node];
        &self.beam_planes[n.beam_start as usize..n.beam_start as usize + n.beam_len as usize]
    }

    /// Whether `p` can be reached through node `node`'s window: in front of
    /// its facet and inside its beam.
    #[inline]
    pub fn in_beam(&self, node: usize, p: &Point3) -> bool {
        let n = &self.nodes[node];
        n.plane.signed_distance(p) > FRONT_EPS && self.beam(node).iter().all(|bp| bp.signed_distance(p) >= -BEAM_EPS)
    }

    /// Reflection points of the sequence ending at `node` toward `target`,
    /// ordered from the source. `None` unless every point lies on its facet
    /// and every leg, including source and target legs, is unobstructed.
    pub fn trace_back(&self, scene: &Scene, node: u32, target: &Point3) -> Option<Vec<(FacetId, Point3)>> {
        let mut points = Vec::with_capacity(self.nodes[node as usize].depth as usize);
        let mut target = *target;
        let mut cur = node;
        while cur != NO_PARENT {
            let n = &self.nodes[cur as usize];
            if n.plane.signed_distance(&target) <= FRONT_EPS {
                return None;
            }
            let dir = target - n.image;
            let t = n.plane.ray_parameter(&n.image, &dir)?;
            if !(t > 0.0 && t < 1.0) {
                return None;
            }
            let p = n.image + dir * t;
            if !scene.facet(n.facet).contains(&p, CONTAINS_TOL) {
                return None;
            }
            if !scene.segment_clear(&p, &target) {
                return None;
            }
            points.push((n.facet, p));
            target = p;
            cur = n.parent;
        }
        if !scene.segment_clear(&self.source, &target) {
            return None;
        }
        points.reverse();
        Some(points)
    }

    /// Sampled test: can any point of `window` (on a child of `parent`) be
    /// reached from the source through the parent chain?
    fn window_visible(&self, scene: &Scene, parent: Option<u32>, window: &[Point3]) -> bool {
        let reach = |w: &Point3| match parent {
            None => scene.segment_clear(&self.source, w),
            Some(p) => self.trace_back(scene, p, w).is_some(),
        };
        window_samples(window).iter().any(reach)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Centroid first, then a triangular lattice over the centroid fan, pulled
/// slightly inside the polygon.
fn window_samples(window: &[Point3]) -> Vec<Point3> {
    let c = polygon_centroid(window);
    let mut out = vec![c];
    let shrink = 0.995;
    for k in 0..window.len() {
        let a = window[k] - c;
        let b = window[(k + 1) % window.len()] - c;
        let reach = a.norm().max(b.norm()).max((a - b).norm());
        let m = ((reach / SAMPLE_SPACING).ceil() as usize).clamp(1, MAX_SUBDIVISIONS);
        for i in 0..=m {
            for j in 0..=(m - i) {
                if i == 0 && j == 0 {
                    continue;
                }
                // skip the b-edge; the next triangle owns it
                if i == 0 {
                    continue;
                }
                let u = i as f64 / m as f64;
                let v = j as f64 / m as f64;
                out.push(c + (a * u + b * v) * shrink);
            }
        }
    }
    out
}
