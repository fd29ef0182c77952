use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::view::Viewport;

pub const DEFAULT_LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: u32,
    pub distance: f64,
}

/// Max-heap entry keyed by `(squared distance, id)`.
#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    id: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Static kd-tree over the finite 2D points. Nodes are implicit: a range
/// `lo..hi` larger than the leaf size splits at its midpoint on the axis of
/// larger spread, and the split axis is stored at the midpoint position.
#[derive(Debug, Clone)]
pub struct SpatialIndex2D {
    points: Vec<[f64; 2]>,
    ids: Vec<u32>,
    axes: Vec<u8>,
    leaf_size: usize,
}

impl SpatialIndex2D {
    pub fn build(points: &[[f64; 2]]) -> Self {
        Self::with_leaf_size(points, DEFAULT_LEAF_SIZE)
    }

    /// Indexes every row with finite coordinates; row ids are slice positions.
    pub fn with_leaf_size(points: &[[f64; 2]], leaf_size: usize) -> Self {
        let mut entries: Vec<([f64; 2], u32)> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| p[0].is_finite() && p[1].is_finite())
            .map(|(i, p)| (*p, i as u32))
            .collect();
        let leaf_size = leaf_size.max(1);
        let mut axes = vec![0u8; entries.len()];
        build_node(&mut entries, &mut axes, leaf_size);
        let (points, ids) = entries.into_iter().unzip();
        SpatialIndex2D {
            points,
            ids,
            axes,
            leaf_size,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids.contains(&id)
    }

    /// Exact k nearest neighbours by Euclidean distance, ties by row id.
    pub fn knn(&self, query: [f64; 2], k: usize) -> Vec<Neighbor> {
        if k == 0 || self.is_empty() || !(query[0].is_finite() && query[1].is_finite()) {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, self.len(), query, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter()
            .map(|c| Neighbor {
                id: c.id,
                distance: c.d2.sqrt(),
            })
            .collect()
    }

    fn offer_at(&self, i: usize, q: [f64; 2], k: usize, heap: &mut BinaryHeap<Candidate>) {
        let p = self.points[i];
        offer(heap, k, (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2), self.ids[i]);
    }

    fn search(&self, lo: usize, hi: usize, q: [f64; 2], k: usize, heap: &mut BinaryHeap<Candidate>) {
        if hi - lo <= self.leaf_size {
            for i in lo..hi {
                self.offer_at(i, q, k, heap);
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let axis = self.axes[mid] as usize;
        self.offer_at(mid, q, k, heap);
        let diff = q[axis] - self.points[mid][axis];
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(near.0, near.1, q, k, heap);
        // equal distances still need a look because ids break ties
        let worst = if heap.len() < k { f64::INFINITY } else { heap.peek().unwrap().d2 };
        if diff * diff <= worst {
            self.search(far.0, far.1, q, k, heap);
        }
    }

    /// Nearest indexed point within `radius_px` of a screen position, by screen distance.
    pub fn pick(&self, screen: [f64; 2], radius_px: f64, viewport: &Viewport) -> Option<u32> {
        let q = viewport.to_data(screen[0], screen[1]);
        let hit = self.knn(q, 1).into_iter().next()?;
        (hit.distance * viewport.zoom <= radius_px).then_some(hit.id)
    }
}

fn offer(heap: &mut BinaryHeap<Candidate>, k: usize, d2: f64, id: u32) {
    let c = Candidate { d2, id };
    if heap.len() < k {
        heap.push(c);
    } else if c < *heap.peek().unwrap() {
        heap.pop();
        heap.push(c);
    }
}

fn build_node(entries: &mut [([f64; 2], u32)], axes: &mut [u8], leaf: usize) {
    if entries.len() <= leaf {
        return;
    }
    let spread = |a: usize| {
        let (lo, hi) = entries
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.0[a]), hi.max(e.0[a])));
        hi - lo
    };
    let axis = usize::from(spread(1) > spread(0));
    let mid = entries.len() / 2;
    axes[mid] = axis as u8;
    entries.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]).then(a.1.cmp(&b.1)));
    let (left, rest) = entries.split_at_mut(mid);
    let (left_axes, rest_axes) = axes.split_at_mut(mid);
    build_node(left, left_axes, leaf);
    build_node(&mut rest[1..], &mut rest_axes[1..], leaf);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_on_point_returns_it() {
        let pts: Vec<[f64; 2]> = (0..100).map(|i| [(i % 10) as f64, (i / 10) as f64]).collect();
        let idx = SpatialIndex2D::with_leaf_size(&pts, 3);
        let r = idx.knn([4.0, 7.0], 1);
        assert_eq!(r, vec![Neighbor { id: 74, distance: 0.0 }]);
    }

    #[test]
    fn collinear_order() {
        let idx = SpatialIndex2D::build(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]);
        let r = idx.knn([0.0, 0.0], 2);
        assert_eq!(r.iter().map(|n| n.id).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn ties_resolve_by_id_and_non_finite_rows_are_skipped() {
        let pts = [[1.0, 0.0], [f64::NAN, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let idx = SpatialIndex2D::with_leaf_size(&pts, 1);
        assert_eq!(idx.len(), 4);
        assert!(!idx.contains(1));
        let r = idx.knn([0.0, 0.0], 3);
        assert_eq!(r.iter().map(|n| n.id).collect::<Vec<_>>(), vec![0, 2, 3]);
    }

    #[test]
    fn empty_index() {
        assert!(SpatialIndex2D::build(&[]).knn([0.0, 0.0], 3).is_empty());
    }

    #[test]
    fn pick_uses_screen_radius() {
        let idx = SpatialIndex2D::build(&[[0.0, 0.0], [10.0, 10.0]]);
        let vp = Viewport::new([0.0, 0.0], 2.0, 100, 100).unwrap();
        assert_eq!(idx.pick([50.0, 50.0], 1.0, &vp), Some(0));
        assert_eq!(idx.pick([53.0, 50.0], 2.0, &vp), None);
        assert_eq!(idx.pick([53.0, 50.0], 3.0, &vp), Some(0));
    }
}
