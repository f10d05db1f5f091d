//! Small planar geometry kernel: points, convex polygons and half-plane
//! clipping with per-edge labels.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn midpoint(self, other: Vec2) -> Vec2 {
        Vec2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Angle from the positive x axis, in (-pi, pi].
    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Vec2,
    pub max: Vec2,
}

impl BoundingBox {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        BoundingBox { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn inflate(&self, margin: f64) -> BoundingBox {
        BoundingBox {
            min: Vec2::new(self.min.x - margin, self.min.y - margin),
            max: Vec2::new(self.max.x + margin, self.max.y + margin),
        }
    }
}

/// Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Signed area of a closed polygon (positive for counter-clockwise order).
pub fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

/// Area centroid of a simple polygon. Falls back to the vertex mean for
/// degenerate input.
pub fn centroid(vertices: &[Vec2]) -> Vec2 {
    let n = vertices.len();
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    // Shift to the first vertex to limit cancellation far from the origin.
    let o = vertices.first().copied().unwrap_or_default();
    for i in 0..n {
        let p = vertices[i] - o;
        let q = vertices[(i + 1) % n] - o;
        let c = p.cross(q);
        a2 += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    if a2.abs() <= f64::MIN_POSITIVE {
        let s = vertices.iter().fold(Vec2::ZERO, |acc, &v| acc + v);
        return s * (1.0 / n.max(1) as f64);
    }
    o + Vec2::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

/// `∫_P |x − c|² dx` for a counter-clockwise polygon `P` and point `c`.
pub fn polar_moment_about(vertices: &[Vec2], c: Vec2) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = vertices[i] - c;
        let q = vertices[(i + 1) % n] - c;
        let w = p.cross(q);
        acc += w * (p.x * p.x + p.x * q.x + q.x * q.x + p.y * p.y + p.y * q.y + q.y * q.y);
    }
    acc / 12.0
}

/// Largest distance between any two vertices.
pub fn diameter(vertices: &[Vec2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in vertices.iter().enumerate() {
        for &b in &vertices[i + 1..] {
            d = d.max(a.dist(b));
        }
    }
    d
}

/// Strict point-in-convex-polygon test for counter-clockwise vertices.
pub fn convex_contains_strict(vertices: &[Vec2], p: Vec2) -> bool {
    let n = vertices.len();
    n >= 3
        && (0..n).all(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            (b - a).cross(p - a) > 0.0
        })
}

/// Convex polygon whose edges remember which clipping object created them.
///
/// Edge `i` runs from `vertices[i]` to `vertices[i + 1]` and carries
/// `labels[i]`. Vertices are kept counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPolygon<L> {
    pub vertices: Vec<Vec2>,
    pub labels: Vec<L>,
}

impl<L: Copy + PartialEq> LabeledPolygon<L> {
    /// Counter-clockwise rectangle with one label per side (bottom, right,
    /// top, left).
    pub fn rectangle(bbox: &BoundingBox, side_labels: [L; 4]) -> Self {
        LabeledPolygon {
            vertices: vec![
                bbox.min,
                Vec2::new(bbox.max.x, bbox.min.y),
                bbox.max,
                Vec2::new(bbox.min.x, bbox.max.y),
            ],
            labels: side_labels.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Keeps the part of the polygon where `(x - origin) . normal <= 0`.
    /// New edges lying on the clipping line are labelled `label`.
    pub fn clip(&mut self, origin: Vec2, normal: Vec2, label: L) {
        let n = self.vertices.len();
        if n == 0 {
            return;
        }
        let side: Vec<f64> = self
            .vertices
            .iter()
            .map(|&v| (v - origin).dot(normal))
            .collect();
        if side.iter().all(|&s| s <= 0.0) {
            return;
        }
        let mut verts = Vec::with_capacity(n + 1);
        let mut labels = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b) = (self.vertices[i], self.vertices[j]);
            let (sa, sb) = (side[i], side[j]);
            let a_in = sa <= 0.0;
            let b_in = sb <= 0.0;
            match (a_in, b_in) {
                (true, true) => {
                    verts.push(a);
                    labels.push(self.labels[i]);
                }
                (true, false) => {
                    verts.push(a);
                    labels.push(self.labels[i]);
                    let t = sa / (sa - sb);
                    verts.push(a + (b - a) * t);
                    labels.push(label);
                }
                (false, true) => {
                    let t = sa / (sa - sb);
                    verts.push(a + (b - a) * t);
                    labels.push(self.labels[i]);
                }
                (false, false) => {}
            }
        }
        self.vertices = verts;
        self.labels = labels;
        self.dedup(0.0);
    }

    /// Removes vertices that coincide (within `tol`) with their successor,
    /// dropping the zero-length edge they start.
    pub fn dedup(&mut self, tol: f64) {
        let mut i = 0;
        while self.vertices.len() > 1 && i < self.vertices.len() {
            let j = (i + 1) % self.vertices.len();
            if self.vertices[i].dist(self.vertices[j]) <= tol {
                self.vertices.remove(i);
                self.labels.remove(i);
            } else {
                i += 1;
            }
        }
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Largest vertex distance from `p`.
    pub fn max_radius(&self, p: Vec2) -> f64 {
        self.vertices.iter().map(|&v| v.dist(p)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polygon_measures() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert_relative_eq!(signed_area(&sq), 2.0);
        let c = centroid(&sq);
        assert_relative_eq!(c.x, 1.0);
        assert_relative_eq!(c.y, 0.5);
        assert_relative_eq!(diameter(&sq), 5f64.sqrt());
        // (b h^3 + h b^3) / 12 about the centroid, plus A d^2 about a corner.
        assert_relative_eq!(polar_moment_about(&sq, c), (2.0 + 8.0) / 12.0, max_relative = 1e-15);
        assert_relative_eq!(
            polar_moment_about(&sq, Vec2::ZERO),
            10.0 / 12.0 + 2.0 * 1.25,
            max_relative = 1e-15
        );
        assert!(convex_contains_strict(&sq, c));
        assert!(!convex_contains_strict(&sq, Vec2::new(2.0, 0.5)));
    }

    #[test]
    fn segment_distance() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 0.0);
        assert_eq!(point_segment_distance(Vec2::new(0.5, 0.5), a, b), 0.5);
        assert_eq!(point_segment_distance(Vec2::new(2.0, 0.0), a, b), 1.0);
    }

    #[test]
    fn clip_labels_new_edge() {
        let bbox = BoundingBox::new(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0));
        let mut poly = LabeledPolygon::rectangle(&bbox, [0u8, 1, 2, 3]);
        // keep x <= 0.5
        poly.clip(Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), 9);
        assert_relative_eq!(poly.area(), 3.0);
        assert_eq!(poly.len(), 4);
        let cut = poly.labels.iter().position(|&l| l == 9).unwrap();
        let a = poly.vertices[cut];
        let b = poly.vertices[(cut + 1) % poly.len()];
        assert_relative_eq!(a.x, 0.5);
        assert_relative_eq!(b.x, 0.5);
        assert!(!poly.labels.contains(&1));
    }

    #[test]
    fn clip_through_vertex_has_no_zero_edges() {
        let bbox = BoundingBox::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
        let mut poly = LabeledPolygon::rectangle(&bbox, [0u8, 1, 2, 3]);
        // diagonal cut through two corners: keep x + y <= 1
        poly.clip(Vec2::new(0.5, 0.5), Vec2::new(1.0, 1.0), 7);
        assert_eq!(poly.len(), 3);
        assert_relative_eq!(poly.area(), 0.5);
        for i in 0..poly.len() {
            assert!(poly.vertices[i].dist(poly.vertices[(i + 1) % poly.len()]) > 0.0);
        }
    }
}
