//! Quadrature rules on intervals, segments and polygonal cells.

use crate::geometry::{signed_area, triangulate, Vec2};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one point");
    let mut rule = vec![(0.0, 0.0); n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = (-x, w);
        rule[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        rule[n / 2].0 = 0.0;
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`; weights sum to `b - a`.
pub fn gauss_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// A weighted point set over a planar region.
pub type PlanarRule = Vec<(Vec2, f64)>;

/// How a cell is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellRuleKind {
    /// `k x k` tensor Gauss rule on quadrilaterals (collapsed rule on
    /// triangles).
    Gauss(usize),
    /// `k^2` midpoint samples.
    Midpoint(usize),
}

/// Quadrature rule over a simple polygon. Convex-enough quadrilaterals
/// (positive bilinear Jacobian) use the bilinear map from the unit square;
/// everything else is triangulated.
pub fn polygon_rule(points: &[Vec2], kind: CellRuleKind) -> PlanarRule {
    if points.len() == 4 {
        let q = [points[0], points[1], points[2], points[3]];
        if bilinear_is_regular(&q) {
            return bilinear_rule(&q, kind);
        }
    }
    triangulate(points)
        .iter()
        .flat_map(|t| triangle_rule(t, kind))
        .collect()
}

fn bilinear_map(q: &[Vec2; 4], s: f64, t: f64) -> (Vec2, f64) {
    let p = q[0] * ((1.0 - s) * (1.0 - t)) + q[1] * (s * (1.0 - t)) + q[2] * (s * t) + q[3] * ((1.0 - s) * t);
    let ds = (q[1] - q[0]) * (1.0 - t) + (q[2] - q[3]) * t;
    let dt = (q[3] - q[0]) * (1.0 - s) + (q[2] - q[1]) * s;
    (p, ds.cross(dt))
}

fn bilinear_is_regular(q: &[Vec2; 4]) -> bool {
    [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
        .iter()
        .all(|&(s, t)| bilinear_map(q, s, t).1 > 0.0)
}

fn unit_rule(kind: CellRuleKind) -> Vec<(f64, f64)> {
    match kind {
        CellRuleKind::Gauss(n) => gauss_interval(n, 0.0, 1.0),
        CellRuleKind::Midpoint(k) => {
            let w = 1.0 / k as f64;
            (0..k).map(|i| ((i as f64 + 0.5) * w, w)).collect()
        }
    }
}

fn bilinear_rule(q: &[Vec2; 4], kind: CellRuleKind) -> PlanarRule {
    let r = unit_rule(kind);
    let mut out = Vec::with_capacity(r.len() * r.len());
    for &(t, wt) in &r {
        for &(s, ws) in &r {
            let (p, jac) = bilinear_map(q, s, t);
            out.push((p, ws * wt * jac));
        }
    }
    out
}

fn triangle_rule(t: &[Vec2; 3], kind: CellRuleKind) -> PlanarRule {
    let area = signed_area(t).abs();
    match kind {
        CellRuleKind::Gauss(n) => {
            // Collapsed (Duffy) tensor rule.
            let r = gauss_interval(n, 0.0, 1.0);
            let mut out = Vec::with_capacity(n * n);
            for &(u, wu) in &r {
                for &(v, wv) in &r {
                    let p = t[0] + (t[1] - t[0]) * u + (t[2] - t[1]) * (u * v);
                    out.push((p, 2.0 * area * u * wu * wv));
                }
            }
            out
        }
        CellRuleKind::Midpoint(k) => {
            let kf = k as f64;
            let w = area / (kf * kf);
            let at = |b1: f64, b2: f64| t[0] + (t[1] - t[0]) * b1 + (t[2] - t[0]) * b2;
            let mut out = Vec::with_capacity(k * k);
            for i in 0..k {
                for j in 0..k - i {
                    let (fi, fj) = (i as f64, j as f64);
                    out.push((at((fi + 1.0 / 3.0) / kf, (fj + 1.0 / 3.0) / kf), w));
                    if i + j + 2 <= k {
                        out.push((at((fi + 2.0 / 3.0) / kf, (fj + 2.0 / 3.0) / kf), w));
                    }
                }
            }
            out
        }
    }
}

/// Gauss rule along the segment `a -> b`; weights sum to its length.
pub fn segment_rule(n: usize, a: Vec2, b: Vec2) -> Vec<(Vec2, f64)> {
    let len = (b - a).norm();
    gauss_interval(n, 0.0, 1.0)
        .into_iter()
        .map(|(s, w)| (a + (b - a) * s, w * len))
        .collect()
}
