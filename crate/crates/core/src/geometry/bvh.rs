//! Binary bounding volume hierarchy over facet bounding boxes.
//!
//! Built once by recursive median splits along the widest centroid axis;
//! construction is deterministic (ties broken by primitive index).

use super::{Aabb, Plane, Point3, Vector3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: first primitive slot. Interior: index of the right child (left is `self + 1`).
    index: u32,
    /// Leaf primitive count; zero for interior nodes.
    count: u32,
}

#[derive(Debug, Clone, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Primitive indices in leaf order.
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(boxes: &[Aabb]) -> Self {
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * boxes.len().max(1)),
            order: (0..boxes.len() as u32).collect(),
        };
        if boxes.is_empty() {
            return bvh;
        }
        let centers: Vec<Point3> = boxes.iter().map(Aabb::center).collect();
        let n = boxes.len();
        bvh.build_range(boxes, &centers, 0, n);
        bvh
    }

    fn build_range(&mut self, boxes: &[Aabb], centers: &[Point3], start: usize, end: usize) -> usize {
        let slot = self.nodes.len();
        let bounds = self.order[start..end]
            .iter()
            .fold(Aabb::empty(), |acc, &i| acc.union(&boxes[i as usize]));
        self.nodes.push(Node {
            bounds,
            index: start as u32,
            count: (end - start) as u32,
        });
        if end - start <= LEAF_SIZE {
            return slot;
        }
        let cb = Aabb::from_points(self.order[start..end].iter().map(|&i| &centers[i as usize]));
        let ext = cb.extent();
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        if ext[axis] <= 0.0 {
            // all centroids coincide; split by index
        } else {
            self.order[start..end].sort_by(|&a, &b| {
                centers[a as usize][axis]
                    .total_cmp(&centers[b as usize][axis])
                    .then(a.cmp(&b))
            });
        }
        let mid = start + (end - start) / 2;
        self.build_range(boxes, centers, start, mid);
        let right = self.build_range(boxes, centers, mid, end);
        self.nodes[slot].index = right as u32;
        self.nodes[slot].count = 0;
        slot
    }

    /// Visits candidate primitives whose boxes overlap the ray interval.
    /// `visit` returns a new upper bound for `t` (shrinking the search) or
    /// `None` to stop early.
    pub fn traverse_ray<F>(&self, origin: &Point3, dir: &Vector3, t_min: f64, t_max: f64, mut visit: F)
    where
        F: FnMut(usize, f64) -> Option<f64>,
    {
        if self.nodes.is_empty() {
            return;
        }
        let inv = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut t_hi = t_max;
        let mut stack: [u32; 64] = [0; 64];
        let mut sp = 1usize;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if node.bounds.ray_interval(origin, &inv, t_min, t_hi).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.index as usize;
                for &prim in &self.order[s..s + node.count as usize] {
                    match visit(prim as usize, t_hi) {
                        Some(t) => t_hi = t_hi.min(t),
                        None => return,
                    }
                }
            } else {
                let left = stack[sp] + 1;
                let right = node.index;
                // descend the nearer child first
                let nl = &self.nodes[left as usize].bounds;
                let nr = &self.nodes[right as usize].bounds;
                let dl = nl.ray_interval(origin, &inv, t_min, t_hi).map(|r| r.0);
                let dr = nr.ray_interval(origin, &inv, t_min, t_hi).map(|r| r.0);
                match (dl, dr) {
                    (Some(a), Some(b)) => {
                        if a <= b {
                            stack[sp] = right;
                            stack[sp + 1] = left;
                        } else {
                            stack[sp] = left;
                            stack[sp + 1] = right;
                        }
                        sp += 2;
                    }
                    (Some(_), None) => {
                        stack[sp] = left;
                        sp += 1;
                    }
                    (None, Some(_)) => {
                        stack[sp] = right;
                        sp += 1;
                    }
                    (None, None) => {}
                }
            }
        }
    }

    /// Visits every primitive whose box is not entirely outside one of
    /// `planes` (the convex region is the intersection of the positive sides).
    pub fn for_each_in_convex<F: FnMut(usize)>(&self, planes: &[Plane], eps: f64, mut visit: F) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            if planes.iter().any(|p| node.bounds.outside(p, eps)) {
                continue;
            }
            if node.count > 0 {
                let s = node.index as usize;
                for &prim in &self.order[s..s + node.count as usize] {
                    visit(prim as usize);
                }
            } else {
                stack.push(node.index);
                stack.push(i + 1);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}
