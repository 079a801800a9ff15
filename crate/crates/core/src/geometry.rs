//! 2D geometric primitives: vectors, oriented rectangles, polygons and the
//! separating-axis overlap test used for collision checks.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_heading(heading: f64) -> Self {
        Vec2::new(heading.cos(), heading.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

/// Rectangle with an arbitrary orientation, used as a vehicle footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Vec2,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl OrientedBox {
    pub fn new(center: Vec2, heading: f64, length: f64, width: f64) -> Self {
        debug_assert!(length > 0.0 && width > 0.0);
        OrientedBox {
            center,
            heading,
            length,
            width,
        }
    }

    /// Corners in CCW order starting front-left.
    pub fn corners(&self) -> [Vec2; 4] {
        let u = Vec2::from_heading(self.heading);
        let v = u.perp();
        let hl = self.length / 2.0;
        let hw = self.width / 2.0;
        [
            self.center + u.scale(hl) + v.scale(hw),
            self.center + u.scale(-hl) + v.scale(hw),
            self.center + u.scale(-hl) + v.scale(-hw),
            self.center + u.scale(hl) + v.scale(-hw),
        ]
    }

    /// Midpoint of the front edge.
    pub fn front_point(&self) -> Vec2 {
        self.center + Vec2::from_heading(self.heading).scale(self.length / 2.0)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let u = Vec2::from_heading(self.heading);
        let d = p - self.center;
        let lon = d.dot(u);
        let lat = d.dot(u.perp());
        lon.abs() <= self.length / 2.0 + 1e-12 && lat.abs() <= self.width / 2.0 + 1e-12
    }
}

fn project(corners: &[Vec2; 4], axis: Vec2) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in corners {
        let p = c.dot(axis);
        lo = lo.min(p);
        hi = hi.max(p);
    }
    (lo, hi)
}

/// Separating-axis overlap test over the 4 edge normals of the two
/// rectangles. Touching counts as overlap.
pub fn obb_overlap(a: &OrientedBox, b: &OrientedBox) -> bool {
    let ca = a.corners();
    let cb = b.corners();
    let axes = [
        Vec2::from_heading(a.heading),
        Vec2::from_heading(a.heading).perp(),
        Vec2::from_heading(b.heading),
        Vec2::from_heading(b.heading).perp(),
    ];
    for axis in axes {
        let (alo, ahi) = project(&ca, axis);
        let (blo, bhi) = project(&cb, axis);
        if ahi < blo || bhi < alo {
            return false;
        }
    }
    true
}

/// Orientation of the triple (a, b, c): > 0 CCW, < 0 CW, 0 collinear.
fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    orient(a, b, p).abs() < 1e-12
        && p.x >= a.x.min(b.x) - 1e-12
        && p.x <= a.x.max(b.x) + 1e-12
        && p.y >= a.y.min(b.y) - 1e-12
        && p.y <= a.y.max(b.y) + 1e-12
}

/// Proper or touching intersection of segments [a,b] and [c,d]. Grazing a
/// shared endpoint counts (inclusive rule).
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b)
}

/// Even-odd point-in-polygon test. Points on the boundary count as inside.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        if on_segment(poly[i], poly[(i + 1) % n], p) {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < xint {
                inside = !inside;
            }
        }
    }
    inside
}

/// True iff the segment [p1,p2] crosses the polygon boundary or lies inside
/// the polygon. Grazing a vertex counts as an intersection.
pub fn segment_intersects_polygon(p1: Vec2, p2: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        if segments_intersect(p1, p2, poly[i], poly[(i + 1) % n]) {
            return true;
        }
    }
    point_in_polygon(p1, poly) || point_in_polygon(p2, poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square(cx: f64, cy: f64, half: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(cx - half, cy - half),
            Vec2::new(cx + half, cy - half),
            Vec2::new(cx + half, cy + half),
            Vec2::new(cx - half, cy + half),
        ]
    }

    /// Dense point-membership oracle: sample boundary and interior points of
    /// each box and test membership in the other.
    fn overlap_oracle(a: &OrientedBox, b: &OrientedBox) -> bool {
        let sample_in = |bx: &OrientedBox, other: &OrientedBox| {
            let u = Vec2::from_heading(bx.heading);
            let v = u.perp();
            let n = 100;
            for i in 0..=n {
                for j in 0..=n {
                    let lon = (i as f64 / n as f64 - 0.5) * bx.length;
                    let lat = (j as f64 / n as f64 - 0.5) * bx.width;
                    let p = bx.center + u.scale(lon) + v.scale(lat);
                    if other.contains(p) {
                        return true;
                    }
                }
            }
            false
        };
        sample_in(a, b) || sample_in(b, a)
    }

    #[test]
    fn identical_boxes_overlap() {
        let b = OrientedBox::new(Vec2::new(1.0, 2.0), 0.3, 4.0, 2.0);
        assert!(obb_overlap(&b, &b));
    }

    #[test]
    fn distant_boxes_do_not_overlap() {
        let a = OrientedBox::new(Vec2::ZERO, 0.0, 2.0, 4.0);
        let b = OrientedBox::new(Vec2::new(10.0, 0.0), 0.0, 2.0, 4.0);
        assert!(!obb_overlap(&a, &b));
    }

    #[test]
    fn rotated_pair_matches_oracle() {
        let a = OrientedBox::new(Vec2::ZERO, 0.0, 4.0, 2.0);
        let b = OrientedBox::new(
            Vec2::new(3.0, 0.0),
            std::f64::consts::FRAC_PI_4,
            4.0,
            2.0,
        );
        assert_eq!(obb_overlap(&a, &b), overlap_oracle(&a, &b));
        assert!(obb_overlap(&a, &b));
    }

    #[test]
    fn touching_boxes_count_as_overlap() {
        let a = OrientedBox::new(Vec2::ZERO, 0.0, 4.0, 2.0);
        let b = OrientedBox::new(Vec2::new(4.0, 0.0), 0.0, 4.0, 2.0);
        assert!(obb_overlap(&a, &b));
    }

    #[test]
    fn segment_through_square_interior() {
        let sq = square(0.0, 0.0, 1.0);
        assert!(segment_intersects_polygon(
            Vec2::new(-5.0, 0.0),
            Vec2::new(5.0, 0.0),
            &sq
        ));
    }

    #[test]
    fn segment_fully_outside() {
        let sq = square(0.0, 0.0, 1.0);
        assert!(!segment_intersects_polygon(
            Vec2::new(-5.0, 5.0),
            Vec2::new(5.0, 5.0),
            &sq
        ));
    }

    #[test]
    fn segment_grazing_vertex_is_inclusive() {
        let sq = square(0.0, 0.0, 1.0);
        // Passes exactly through the corner (1, 1).
        assert!(segment_intersects_polygon(
            Vec2::new(0.0, 2.0),
            Vec2::new(2.0, 0.0),
            &sq
        ));
        // Perturbed outward by 1e-9: clears the corner.
        assert!(!segment_intersects_polygon(
            Vec2::new(0.0, 2.0 + 1e-9),
            Vec2::new(2.0 + 1e-9, 0.0),
            &sq
        ));
        // Perturbed inward: still intersects.
        assert!(segment_intersects_polygon(
            Vec2::new(0.0, 2.0 - 1e-9),
            Vec2::new(2.0 - 1e-9, 0.0),
            &sq
        ));
    }

    #[test]
    fn segment_inside_polygon_counts() {
        let sq = square(0.0, 0.0, 10.0);
        assert!(segment_intersects_polygon(
            Vec2::new(-1.0, 0.0),
            Vec2::new(1.0, 0.0),
            &sq
        ));
    }

    fn arb_box() -> impl Strategy<Value = OrientedBox> {
        (
            -10.0..10.0f64,
            -10.0..10.0f64,
            0.0..std::f64::consts::TAU,
            0.5..6.0f64,
            0.5..4.0f64,
        )
            .prop_map(|(x, y, h, l, w)| OrientedBox::new(Vec2::new(x, y), h, l, w))
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric(a in arb_box(), b in arb_box()) {
            prop_assert_eq!(obb_overlap(&a, &b), obb_overlap(&b, &a));
        }

        #[test]
        fn overlap_agrees_with_point_oracle(a in arb_box(), b in arb_box()) {
            let sat = obb_overlap(&a, &b);
            let oracle = overlap_oracle(&a, &b);
            // The sampled oracle misses overlaps thinner than its grid pitch
            // and cannot flag near-touching gaps; skip margin cases.
            if sat != oracle {
                let gap = sat_gap(&a, &b).abs();
                prop_assert!(gap < 0.1, "disagreement with gap {}", gap);
            }
        }
    }

    /// Signed separation along the best separating axis (negative = overlap
    /// depth). Used only to exclude margin cases in the property test.
    fn sat_gap(a: &OrientedBox, b: &OrientedBox) -> f64 {
        let ca = a.corners();
        let cb = b.corners();
        let axes = [
            Vec2::from_heading(a.heading),
            Vec2::from_heading(a.heading).perp(),
            Vec2::from_heading(b.heading),
            Vec2::from_heading(b.heading).perp(),
        ];
        let mut best = f64::NEG_INFINITY;
        for axis in axes {
            let (alo, ahi) = project(&ca, axis);
            let (blo, bhi) = project(&cb, axis);
            let gap = (blo - ahi).max(alo - bhi);
            best = best.max(gap);
        }
        best
    }
}
