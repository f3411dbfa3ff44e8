//! Point-in-polygon queries, orientation and self-intersection tests for
//! the closed boundary polylines.

use crate::system::State;

/// Distance at which a query point counts as lying on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Result of a point-in-region query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
    /// Within [`BOUNDARY_TOL`] of the boundary polyline.
    OnBoundary,
}

/// Twice the signed area of a ring (positive for counterclockwise).
pub fn signed_area2(ring: &[State]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a.x1 * b.x2 - b.x1 * a.x2;
    }
    acc
}

fn cross(o: State, a: State, b: State) -> f64 {
    (a.x1 - o.x1) * (b.x2 - o.x2) - (a.x2 - o.x2) * (b.x1 - o.x1)
}

fn point_segment_distance(p: State, a: State, b: State) -> f64 {
    let (dx, dy) = (b.x1 - a.x1, b.x2 - a.x2);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x1 - a.x1) * dx + (p.x2 - a.x2) * dy) / len2).clamp(0.0, 1.0);
    p.distance(State::new(a.x1 + t * dx, a.x2 + t * dy))
}

/// A closed polygon prepared for repeated containment queries.
///
/// Edges are bucketed by their `x2` span so a winding-number query touches
/// only the edges whose span straddles the query ordinate.
pub struct PreparedPolygon {
    ring: Vec<State>,
    buckets: Vec<Vec<u32>>,
    y_min: f64,
    inv_bucket_h: f64,
    bbox_min: State,
    bbox_max: State,
}

impl PreparedPolygon {
    /// Build from a ring (closing edge implied, no repeated last vertex).
    pub fn new(ring: &[State]) -> Self {
        assert!(ring.len() >= 3, "polygon needs at least 3 vertices");
        let mut bbox_min = State::new(f64::INFINITY, f64::INFINITY);
        let mut bbox_max = State::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for s in ring {
            bbox_min.x1 = bbox_min.x1.min(s.x1);
            bbox_min.x2 = bbox_min.x2.min(s.x2);
            bbox_max.x1 = bbox_max.x1.max(s.x1);
            bbox_max.x2 = bbox_max.x2.max(s.x2);
        }
        let n_buckets = ring.len().clamp(16, 4096);
        let span = (bbox_max.x2 - bbox_min.x2).max(f64::MIN_POSITIVE);
        let inv_bucket_h = n_buckets as f64 / span;
        let mut buckets = vec![Vec::new(); n_buckets];
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            let (lo, hi) = if a.x2 <= b.x2 { (a.x2, b.x2) } else { (b.x2, a.x2) };
            let lo_idx = (((lo - bbox_min.x2) * inv_bucket_h) as usize).min(n_buckets - 1);
            let hi_idx = (((hi - bbox_min.x2) * inv_bucket_h) as usize).min(n_buckets - 1);
            for bucket in buckets.iter_mut().take(hi_idx + 1).skip(lo_idx) {
                bucket.push(i as u32);
            }
        }
        Self {
            ring: ring.to_vec(),
            buckets,
            y_min: bbox_min.x2,
            inv_bucket_h,
            bbox_min,
            bbox_max,
        }
    }

    pub fn ring(&self) -> &[State] {
        &self.ring
    }

    fn bucket_of(&self, y: f64) -> usize {
        (((y - self.y_min) * self.inv_bucket_h).max(0.0) as usize).min(self.buckets.len() - 1)
    }

    fn edge(&self, i: u32) -> (State, State) {
        let i = i as usize;
        (self.ring[i], self.ring[(i + 1) % self.ring.len()])
    }

    /// Winding number about `p` (counterclockwise positive).
    pub fn winding_number(&self, p: State) -> i32 {
        if p.x2 < self.bbox_min.x2 || p.x2 > self.bbox_max.x2 {
            return 0;
        }
        let mut wn = 0i32;
        for &i in &self.buckets[self.bucket_of(p.x2)] {
            let (a, b) = self.edge(i);
            if a.x2 <= p.x2 {
                if b.x2 > p.x2 && cross(a, b, p) > 0.0 {
                    wn += 1;
                }
            } else if b.x2 <= p.x2 && cross(a, b, p) < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    fn near_boundary(&self, p: State) -> bool {
        let lo = self.bucket_of(p.x2 - BOUNDARY_TOL);
        let hi = self.bucket_of(p.x2 + BOUNDARY_TOL);
        for bucket in &self.buckets[lo..=hi] {
            for &i in bucket {
                let (a, b) = self.edge(i);
                if point_segment_distance(p, a, b) <= BOUNDARY_TOL {
                    return true;
                }
            }
        }
        false
    }

    pub fn contains(&self, p: State) -> Containment {
        if p.x1 < self.bbox_min.x1 - BOUNDARY_TOL
            || p.x1 > self.bbox_max.x1 + BOUNDARY_TOL
            || p.x2 < self.bbox_min.x2 - BOUNDARY_TOL
            || p.x2 > self.bbox_max.x2 + BOUNDARY_TOL
        {
            return Containment::Outside;
        }
        if self.near_boundary(p) {
            return Containment::OnBoundary;
        }
        if self.winding_number(p) != 0 {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }

    /// Nearest boundary edge to `p`: `(edge index, distance)`.
    pub fn nearest_edge(&self, p: State) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for i in 0..self.ring.len() {
            let a = self.ring[i];
            let b = self.ring[(i + 1) % self.ring.len()];
            let d = point_segment_distance(p, a, b);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Unit normal of the nearest edge pointing into the polygon interior.
    pub fn inward_normal_at(&self, p: State) -> State {
        let (i, _) = self.nearest_edge(p);
        let a = self.ring[i];
        let b = self.ring[(i + 1) % self.ring.len()];
        let (tx, ty) = (b.x1 - a.x1, b.x2 - a.x2);
        let len = tx.hypot(ty).max(f64::MIN_POSITIVE);
        // Left of the edge direction is inward for a counterclockwise ring.
        let ccw = signed_area2(&self.ring) > 0.0;
        if ccw {
            State::new(-ty / len, tx / len)
        } else {
            State::new(ty / len, -tx / len)
        }
    }
}

fn segments_properly_intersect(a: State, b: State, c: State, d: State) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on_segment = |p: State, q: State, r: State| {
        r.x1 >= p.x1.min(q.x1)
            && r.x1 <= p.x1.max(q.x1)
            && r.x2 >= p.x2.min(q.x2)
            && r.x2 <= p.x2.max(q.x2)
    };
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Whether the ring is simple: no two non-adjacent edges touch or cross.
///
/// Sweeps edges sorted by their minimum `x1` with an active window, so the
/// expected cost stays near-linear for boundary-like rings.
pub fn ring_is_simple(ring: &[State]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    let xmin = |i: u32| {
        let a = ring[i as usize];
        let b = ring[(i as usize + 1) % n];
        a.x1.min(b.x1)
    };
    let xmax = |i: u32| {
        let a = ring[i as usize];
        let b = ring[(i as usize + 1) % n];
        a.x1.max(b.x1)
    };
    order.sort_by(|&i, &j| xmin(i).total_cmp(&xmin(j)));
    for (pos, &i) in order.iter().enumerate() {
        let hi = xmax(i);
        for &j in order.iter().skip(pos + 1) {
            if xmin(j) > hi {
                break;
            }
            let adjacent = (i as usize + 1) % n == j as usize || (j as usize + 1) % n == i as usize;
            if adjacent {
                continue;
            }
            let (a, b) = (ring[i as usize], ring[(i as usize + 1) % n]);
            let (c, d) = (ring[j as usize], ring[(j as usize + 1) % n]);
            if segments_properly_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Resample a polyline to `n_edges + 1` points uniform in arc length.
/// The original endpoints are preserved exactly.
pub fn resample_polyline(points: &[State], n_edges: usize) -> Vec<State> {
    assert!(points.len() >= 2 && n_edges >= 1);
    let mut cum = Vec::with_capacity(points.len());
    cum.push(0.0);
    for w in points.windows(2) {
        cum.push(cum.last().unwrap() + w[0].distance(w[1]));
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(n_edges + 1);
    out.push(points[0]);
    let mut seg = 0usize;
    for k in 1..n_edges {
        let target = total * k as f64 / n_edges as f64;
        while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let span = (cum[seg + 1] - cum[seg]).max(f64::MIN_POSITIVE);
        let t = (target - cum[seg]) / span;
        let (a, b) = (points[seg], points[seg + 1]);
        out.push(State::new(a.x1 + t * (b.x1 - a.x1), a.x2 + t * (b.x2 - a.x2)));
    }
    out.push(*points.last().unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<State> {
        vec![
            State::new(0.0, 0.0),
            State::new(1.0, 0.0),
            State::new(1.0, 1.0),
            State::new(0.0, 1.0),
        ]
    }

    #[test]
    fn winding_and_containment_on_a_square() {
        let poly = PreparedPolygon::new(&square());
        assert_eq!(poly.contains(State::new(0.5, 0.5)), Containment::Inside);
        assert_eq!(poly.contains(State::new(1.5, 0.5)), Containment::Outside);
        assert_eq!(poly.contains(State::new(0.5, 0.0)), Containment::OnBoundary);
        assert_eq!(poly.winding_number(State::new(0.5, 0.5)), 1);
        assert_eq!(poly.winding_number(State::new(100.0, 100.0)), 0);
    }

    #[test]
    fn clockwise_ring_winds_negative() {
        let mut ring = square();
        ring.reverse();
        let poly = PreparedPolygon::new(&ring);
        assert_eq!(poly.winding_number(State::new(0.5, 0.5)), -1);
        assert_eq!(poly.contains(State::new(0.5, 0.5)), Containment::Inside);
    }

    #[test]
    fn inward_normal_points_inside() {
        for flip in [false, true] {
            let mut ring = square();
            if flip {
                ring.reverse();
            }
            let poly = PreparedPolygon::new(&ring);
            let n = poly.inward_normal_at(State::new(0.5, 0.0));
            assert!(n.x2 > 0.9, "normal {n:?} should point up into the square");
        }
    }

    #[test]
    fn simplicity_detects_a_bowtie()
    {
        assert!(ring_is_simple(&square()));
        let bowtie = vec![
            State::new(0.0, 0.0),
            State::new(1.0, 1.0),
            State::new(1.0, 0.0),
            State::new(0.0, 1.0),
        ];
        assert!(!ring_is_simple(&bowtie));
    }

    #[test]
    fn resampling_respects_spacing_and_endpoints() {
        let line = vec![State::new(0.0, 0.0), State::new(3.0, 4.0)];
        let pts = resample_polyline(&line, 10);
        assert_eq!(pts.len(), 11);
        assert_eq!(pts[0], line[0]);
        assert_eq!(pts[10], line[1]);
        for w in pts.windows(2) {
            assert!((w[0].distance(w[1]) - 0.5).abs() < 1e-12);
        }
    }
}
