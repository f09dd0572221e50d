//! Exact k-nearest-neighbour queries over a static point set.
//!
//! Ties in distance are broken by point index, so results do not depend on how the
//! tree happened to be split.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::Point3;
use crate::scalar::Real;

const LEAF: usize = 8;

pub struct KdTree<'a, T> {
    points: &'a [Point3<T>],
    order: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate<T> {
    dist2: T,
    index: usize,
}

impl<T: Real> Eq for Candidate<T> {}

impl<T: Real> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .partial_cmp(&other.dist2)
            .unwrap_or(Ordering::Equal)
            .then(self.index.cmp(&other.index))
    }
}

fn dist2<T: Real>(a: &Point3<T>, b: &Point3<T>) -> T {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

impl<'a, T: Real> KdTree<'a, T> {
    pub fn build(points: &'a [Point3<T>]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        split(points, &mut order, 0);
        Self { points, order }
    }

    /// The `k` points closest to `points[query]`, excluding `query` itself, nearest first.
    pub fn nearest_excluding(&self, query: usize, k: usize) -> Vec<usize> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        let target = self.points[query];
        self.search(0, self.order.len(), 0, &target, query, k, &mut heap);
        let mut found: Vec<Candidate<T>> = heap.into_vec();
        found.sort();
        found.into_iter().map(|c| c.index).collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        lo: usize,
        hi: usize,
        depth: usize,
        target: &Point3<T>,
        skip: usize,
        k: usize,
        heap: &mut BinaryHeap<Candidate<T>>,
    ) {
        if hi - lo <= LEAF {
            for &i in &self.order[lo..hi] {
                offer(heap, k, skip, i, dist2(&self.points[i], target));
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let axis = depth % 3;
        let pivot = self.order[mid];
        offer(heap, k, skip, pivot, dist2(&self.points[pivot], target));
        let diff = target[axis] - self.points[pivot][axis];
        let (near, far) = if diff < T::zero() {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, depth + 1, target, skip, k, heap);
        let full = heap.len() == k;
        if !full || diff * diff <= heap.peek().map(|c| c.dist2).unwrap_or(T::infinity()) {
            self.search(far.0, far.1, depth + 1, target, skip, k, heap);
        }
    }
}

fn offer<T: Real>(heap: &mut BinaryHeap<Candidate<T>>, k: usize, skip: usize, index: usize, d2: T) {
    if index == skip || k == 0 {
        return;
    }
    let c = Candidate { dist2: d2, index };
    if heap.len() < k {
        heap.push(c);
    } else if let Some(worst) = heap.peek() {
        if c < *worst {
            heap.pop();
            heap.push(c);
        }
    }
}

fn split<T: Real>(points: &[Point3<T>], order: &mut [usize], depth: usize) {
    if order.len() <= LEAF {
        return;
    }
    let axis = depth % 3;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis]
            .partial_cmp(&points[b][axis])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    split(points, left, depth + 1);
    split(points, &mut right[1..], depth + 1);
}
