//! Planar geometry primitives: points, polygon measures, clipping,
//! point location and distances.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

/// Signed shoelace area (positive for counterclockwise loops).
pub fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        twice += a.cross(b);
    }
    0.5 * twice
}

/// Area centroid of a simple polygon with non-zero area.
pub fn centroid(points: &[Vec2]) -> Vec2 {
    let n = points.len();
    let area = signed_area(points);
    if area == 0.0 {
        let s = points.iter().fold(Vec2::ZERO, |acc, &p| acc + p);
        return s / n as f64;
    }
    // Shift to the first vertex to limit cancellation.
    let o = points[0];
    let mut c = Vec2::ZERO;
    for i in 0..n {
        let a = points[i] - o;
        let b = points[(i + 1) % n] - o;
        let w = a.cross(b);
        c += (a + b) * w;
    }
    o + c / (6.0 * area)
}

pub fn perimeter(points: &[Vec2]) -> f64 {
    let n = points.len();
    (0..n).map(|i| (points[(i + 1) % n] - points[i]).norm()).sum()
}

/// Largest distance between two vertices, which is the diameter of the
/// polygon's convex hull and therefore of the polygon.
pub fn diameter(points: &[Vec2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            d = d.max((b - a).norm());
        }
    }
    d
}

/// Even-odd point location. Points exactly on the boundary may land on
/// either side.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = poly[i];
        let b = poly[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn distance_to_segment(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Distance from `p` to the boundary of a polygon.
pub fn distance_to_boundary(p: Vec2, poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| distance_to_segment(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Sutherland–Hodgman clipping of an arbitrary subject polygon against a
/// convex, counterclockwise clip polygon. The area of the result equals the
/// area of the intersection even when the subject is non-convex (the output
/// may then contain zero-width bridges).
pub fn clip_convex(subject: &[Vec2], clip: &[Vec2]) -> Vec<Vec2> {
    let mut output: Vec<Vec2> = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let dir = b - a;
        let side = |p: Vec2| dir.cross(p - a);
        let input = std::mem::take(&mut output);
        let mut prev = *input.last().unwrap();
        let mut prev_side = side(prev);
        for &cur in &input {
            let cur_side = side(cur);
            if cur_side >= 0.0 {
                if prev_side < 0.0 {
                    output.push(intersect(prev, cur, prev_side, cur_side));
                }
                output.push(cur);
            } else if prev_side >= 0.0 {
                output.push(intersect(prev, cur, prev_side, cur_side));
            }
            prev = cur;
            prev_side = cur_side;
        }
    }
    output
}

#[inline]
fn intersect(p: Vec2, q: Vec2, sp: f64, sq: f64) -> Vec2 {
    let s = sp / (sp - sq);
    p + (q - p) * s
}

/// Ear-clipping triangulation of a simple polygon given in either
/// orientation. Returned triangles are counterclockwise.
pub fn triangulate(points: &[Vec2]) -> Vec<[Vec2; 3]> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    if signed_area(points) < 0.0 {
        idx.reverse();
    }
    let mut tris = Vec::with_capacity(points.len().saturating_sub(2));
    let mut guard = 0;
    while idx.len() > 3 && guard < 4 * points.len() * points.len() {
        guard += 1;
        let n = idx.len();
        let mut clipped = false;
        for i in 0..n {
            let a = points[idx[(i + n - 1) % n]];
            let b = points[idx[i]];
            let c = points[idx[(i + 1) % n]];
            if (b - a).cross(c - b) <= 0.0 {
                continue;
            }
            let tri = [a, b, c];
            let blocked = idx.iter().enumerate().any(|(j, &k)| {
                j != i && j != (i + n - 1) % n && j != (i + 1) % n && in_triangle(points[k], &tri)
            });
            if !blocked {
                tris.push(tri);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        tris.push([points[idx[0]], points[idx[1]], points[idx[2]]]);
    } else if idx.len() > 3 {
        // Numerically degenerate remainder: fall back to a fan.
        for i in 1..idx.len() - 1 {
            tris.push([points[idx[0]], points[idx[i]], points[idx[i + 1]]]);
        }
    }
    tris
}

fn in_triangle(p: Vec2, t: &[Vec2; 3]) -> bool {
    let d0 = (t[1] - t[0]).cross(p - t[0]);
    let d1 = (t[2] - t[1]).cross(p - t[1]);
    let d2 = (t[0] - t[2]).cross(p - t[2]);
    d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0
}

/// Whether the polygon with these vertices is convex (allowing collinear
/// vertices), in either orientation.
pub fn is_convex(points: &[Vec2]) -> bool {
    let n = points.len();
    let mut pos = false;
    let mut neg = false;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let c = points[(i + 2) % n];
        let z = (b - a).cross(c - b);
        pos |= z > 0.0;
        neg |= z < 0.0;
    }
    !(pos && neg)
}

/// Area of `subject ∩ region` where `region` is any simple polygon.
pub fn intersection_area(subject: &[Vec2], region: &[Vec2]) -> f64 {
    if is_convex(region) {
        let mut ccw = region.to_vec();
        if signed_area(&ccw) < 0.0 {
            ccw.reverse();
        }
        return signed_area(&clip_convex(subject, &ccw)).abs();
    }
    triangulate(region)
        .iter()
        .map(|t| signed_area(&clip_convex(subject, t)).abs())
        .sum()
}

/// Proper or touching intersection of closed segments `[a, b]` and `[c, d]`.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2, z: f64| {
        z == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

/// A polygon is simple when no two non-adjacent edges meet.
pub fn is_simple(points: &[Vec2]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (points[j], points[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}
