//! Bounding-volume hierarchy over triangle soups, generic over the box
//! dimension, used to cull candidate pairs before the exact (and
//! expensive) triangle–triangle predicates run.
//!
//! The tree is a flat array of nodes built by median split along the
//! longest centroid axis. Queries return candidate index pairs in a
//! deterministic order (sorted before being handed back), so downstream
//! stages that iterate candidates stay reproducible.

use crate::geom::{Aabb4, Bounds, Vec4};

#[derive(Debug, Clone, Copy)]
struct Node<B> {
    bounds: B,
    /// Left child index, or `usize::MAX` for a leaf.
    left: usize,
    /// Right child index for inner nodes; start of the item range for leaves.
    right_or_start: usize,
    /// Item count for leaves; 0 for inner nodes.
    count: usize,
}

/// Static BVH over a set of bounded items (typically mesh triangles).
#[derive(Debug, Clone)]
pub struct Bvh<B> {
    nodes: Vec<Node<B>>,
    /// Item indices, permuted so each leaf owns a contiguous range.
    items: Vec<u32>,
}

const LEAF_SIZE: usize = 8;

impl<B: Bounds> Bvh<B> {
    /// Builds a hierarchy over `boxes[i]`, one per item index `i`.
    ///
    /// Returns an empty tree for an empty input.
    pub fn build(boxes: &[B]) -> Self {
        let mut items: Vec<u32> = (0..boxes.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * boxes.len().max(1));
        if !boxes.is_empty() {
            build_node(boxes, &mut items, 0, boxes.len(), &mut nodes);
        }
        Bvh { nodes, items }
    }

    /// All item pairs `(i, j)` with `i < j` whose boxes overlap once
    /// inflated by `margin`. Sorted, so iteration order is deterministic.
    pub fn self_pairs(&self, boxes: &[B], margin: f64) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![(0usize, 0usize)];
        while let Some((a, b)) = stack.pop() {
            let (na, nb) = (&self.nodes[a], &self.nodes[b]);
            if !na.bounds.intersects(nb.bounds, margin) {
                continue;
            }
            match (
                na.count > 0 || na.left == usize::MAX,
                nb.count > 0 || nb.left == usize::MAX,
            ) {
                (true, true) => {
                    let ia = &self.items[na.right_or_start..na.right_or_start + na.count];
                    let ib = &self.items[nb.right_or_start..nb.right_or_start + nb.count];
                    if a == b {
                        for (k, &x) in ia.iter().enumerate() {
                            for &y in &ia[k + 1..] {
                                if boxes[x as usize].intersects(boxes[y as usize], margin) {
                                    out.push((x.min(y), x.max(y)));
                                }
                            }
                        }
                    } else {
                        for &x in ia {
                            for &y in ib {
                                if x != y && boxes[x as usize].intersects(boxes[y as usize], margin)
                                {
                                    out.push((x.min(y), x.max(y)));
                                }
                            }
                        }
                    }
                }
                _ => {
                    if a == b {
                        let (l, r) = (na.left, na.right_or_start);
                        stack.push((l, l));
                        stack.push((r, r));
                        stack.push((l, r));
                    } else {
                        // Descend into the node with the larger extent to
                        // keep the recursion balanced.
                        let widen_a = nb.count > 0
                            || nb.left == usize::MAX
                            || (na.count == 0
                                && na.left != usize::MAX
                                && node_extent(na) >= node_extent(nb));
                        if widen_a {
                            stack.push((na.left, b));
                            stack.push((na.right_or_start, b));
                        } else {
                            stack.push((a, nb.left));
                            stack.push((a, nb.right_or_start));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn node_extent<B: Bounds>(n: &Node<B>) -> f64 {
    let mut e = 0.0f64;
    for axis in 0..B::DIM {
        e = e.max(n.bounds.extent(axis));
    }
    e
}

fn build_node<B: Bounds>(
    boxes: &[B],
    items: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node<B>>,
) -> usize {
    let slice = &items[start..end];
    let mut bounds = boxes[slice[0] as usize];
    for &i in &slice[1..] {
        bounds = bounds.union(boxes[i as usize]);
    }
    let idx = nodes.len();
    nodes.push(Node {
        bounds,
        left: usize::MAX,
        right_or_start: start,
        count: end - start,
    });
    if end - start <= LEAF_SIZE {
        return idx;
    }
    // Longest axis of the centroid spread.
    let mut best_axis = 0;
    let mut best_spread = -1.0f64;
    for axis in 0..B::DIM {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &i in items[start..end].iter() {
            let c = boxes[i as usize].centroid(axis);
            lo = lo.min(c);
            hi = hi.max(c);
        }
        if hi - lo > best_spread {
            best_spread = hi - lo;
            best_axis = axis;
        }
    }
    let mid = (start + end) / 2;
    items[start..end].sort_unstable_by(|&a, &b| {
        boxes[a as usize]
            .centroid(best_axis)
            .total_cmp(&boxes[b as usize].centroid(best_axis))
            .then(a.cmp(&b))
    });
    let left = build_node(boxes, items, start, mid, nodes);
    let right = build_node(boxes, items, mid, end, nodes);
    nodes[idx].left = left;
    nodes[idx].right_or_start = right;
    nodes[idx].count = 0;
    idx
}

/// Nearest-point search support for 4-dimensional boxes: returns every
/// item whose box lies within `radius` of `p`, nearest box first.
pub fn within_radius_4d(bvh: &Bvh<Aabb4>, boxes: &[Aabb4], p: Vec4, radius: f64) -> Vec<u32> {
    let mut out: Vec<(f64, u32)> = Vec::new();
    if bvh.nodes.is_empty() {
        return Vec::new();
    }
    let r_sq = radius * radius;
    let mut stack = vec![0usize];
    while let Some(n) = stack.pop() {
        let node = &bvh.nodes[n];
        if node.bounds.dist_sq(p) > r_sq {
            continue;
        }
        if node.count > 0 || node.left == usize::MAX {
            for &i in &bvh.items[node.right_or_start..node.right_or_start + node.count] {
                let d = boxes[i as usize].dist_sq(p);
                if d <= r_sq {
                    out.push((d, i));
                }
            }
        } else {
            stack.push(node.left);
            stack.push(node.right_or_start);
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out.into_iter().map(|(_, i)| i).collect()
}
