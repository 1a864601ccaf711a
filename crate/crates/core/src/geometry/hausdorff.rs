//! Hausdorff distance between segment sets.

use rayon::prelude::*;

use super::{CompactTriangulation, Point2};

/// Exact distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point2::new(a.x + t * dx, a.y + t * dy))
}

/// Uniform grid over segment bounding boxes for nearest-segment queries.
pub struct SegmentIndex<'a> {
    segments: &'a [[Point2; 2]],
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> SegmentIndex<'a> {
    pub fn new(segments: &'a [[Point2; 2]]) -> Self {
        let (mut lo, mut hi) = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for s in segments {
            for p in s {
                lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        if segments.is_empty() {
            lo = Point2::new(0.0, 0.0);
            hi = lo;
        }
        let side = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let g = ((segments.len() as f64).sqrt().ceil() as usize).clamp(1, 1024);
        let cell = side / g as f64;
        let nx = (((hi.x - lo.x) / cell) as usize + 1).min(g);
        let ny = (((hi.y - lo.y) / cell) as usize + 1).min(g);
        let mut idx = SegmentIndex {
            segments,
            origin: lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for (k, s) in segments.iter().enumerate() {
            let (i0, j0) = idx.cell_of(Point2::new(s[0].x.min(s[1].x), s[0].y.min(s[1].y)));
            let (i1, j1) = idx.cell_of(Point2::new(s[0].x.max(s[1].x), s[0].y.max(s[1].y)));
            for i in i0..=i1 {
                for j in j0..=j1 {
                    idx.buckets[j * nx + i].push(k as u32);
                }
            }
        }
        idx
    }

    fn cell_of(&self, p: Point2) -> (usize, usize) {
        let f = |v: f64, o: f64, n: usize| {
            let c = ((v - o) / self.cell).floor();
            if c.is_nan() || c < 0.0 {
                0
            } else {
                (c as usize).min(n - 1)
            }
        };
        (f(p.x, self.origin.x, self.nx), f(p.y, self.origin.y, self.ny))
    }

    /// Distance from `p` to the nearest indexed segment.
    pub fn nearest(&self, p: Point2) -> f64 {
        if self.segments.is_empty() {
            return f64::INFINITY;
        }
        let (ci, cj) = self.cell_of(p);
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny);
        for r in 0..=max_ring {
            let (i0, i1) = (ci as isize - r as isize, ci as isize + r as isize);
            let (j0, j1) = (cj as isize - r as isize, cj as isize + r as isize);
            for j in j0..=j1 {
                if j < 0 || j >= self.ny as isize {
                    continue;
                }
                let on_edge = j == j0 || j == j1;
                let step = if on_edge { 1 } else { (i1 - i0).max(1) as usize };
                let mut i = i0;
                while i <= i1 {
                    if i >= 0 && i < self.nx as isize {
                        for &k in &self.buckets[j as usize * self.nx + i as usize] {
                            let s = &self.segments[k as usize];
                            best = best.min(point_segment_distance(p, s[0], s[1]));
                        }
                    }
                    i += step as isize;
                }
            }
            // Cells beyond ring r are at least r cells away.
            if best <= r as f64 * self.cell {
                break;
            }
        }
        best
    }
}

/// `sup_{a ∈ A} d(a, B)` with `A` sampled at spacing at most `eps`.
pub fn directed_hausdorff(a: &[[Point2; 2]], b: &SegmentIndex<'_>, eps: f64) -> f64 {
    a.par_iter()
        .map(|s| {
            let len = s[0].dist(s[1]);
            let k = ((len / eps).ceil() as usize).max(1);
            (0..=k)
                .map(|j| {
                    let t = j as f64 / k as f64;
                    let p = Point2::new(
                        s[0].x + t * (s[1].x - s[0].x),
                        s[0].y + t * (s[1].y - s[0].y),
                    );
                    b.nearest(p)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between the segment sets of two drawings, within
/// `eps / 2` below the exact value.
pub fn hausdorff_distance(m1: &CompactTriangulation, m2: &CompactTriangulation, eps: f64) -> f64 {
    assert!(eps > 0.0, "resolution must be positive");
    let i1 = SegmentIndex::new(&m1.segments);
    let i2 = SegmentIndex::new(&m2.segments);
    directed_hausdorff(&m1.segments, &i2, eps).max(directed_hausdorff(&m2.segments, &i1, eps))
}
