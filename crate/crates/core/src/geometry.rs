//! Planar vector helpers shared by the kernel and the pipeline.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector for a heading in degrees, counter-clockwise from +x.
    pub fn from_heading_deg(heading: f64) -> Self {
        let r = heading.to_radians();
        Self::new(r.cos(), r.sin())
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise perpendicular (the "left" of a direction).
    pub fn left_normal(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn rotate_deg(self, deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle in degrees into `[0, 360)`.
pub fn normalize_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Signed difference `to - from` wrapped into `(-180, 180]`.
pub fn signed_angle_diff_deg(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Intersection of the lines `p + s*u` and `q + t*v`; `None` when parallel.
pub fn line_intersection(p: Vec2, u: Vec2, q: Vec2, v: Vec2) -> Option<Vec2> {
    let denom = u.cross(v);
    if denom.abs() < 1e-15 {
        return None;
    }
    let s = (q - p).cross(v) / denom;
    Some(p + u * s)
}

/// Point-in-polygon for a convex polygon given in either winding; boundary counts as inside.
pub fn convex_contains(poly: &[Vec2], p: Vec2) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let eps = 1e-9;
    let mut sign = 0.0_f64;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let c = (b - a).cross(p - a);
        if c.abs() <= eps * (b - a).norm().max(1.0) {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    true
}

/// Signed area (positive for counter-clockwise winding).
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| poly[i].cross(poly[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

pub fn centroid(poly: &[Vec2]) -> Vec2 {
    let n = poly.len() as f64;
    poly.iter().fold(Vec2::default(), |acc, &p| acc + p) * (1.0 / n)
}

/// Minimum overlap of the projections of two convex polygons over all edge normals.
/// Positive means the interiors intersect; zero or negative means separated or touching.
pub fn convex_penetration(a: &[Vec2], b: &[Vec2]) -> f64 {
    let mut depth = f64::INFINITY;
    for poly in [a, b] {
        for i in 0..poly.len() {
            let edge = poly[(i + 1) % poly.len()] - poly[i];
            let len = edge.norm();
            if len == 0.0 {
                continue;
            }
            let axis = edge.left_normal() * (1.0 / len);
            let (amin, amax) = project(a, axis);
            let (bmin, bmax) = project(b, axis);
            depth = depth.min(amax.min(bmax) - amin.max(bmin));
        }
    }
    depth
}

fn project(poly: &[Vec2], axis: Vec2) -> (f64, f64) {
    poly.iter()
        .map(|p| p.dot(axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_wrapping() {
        assert_eq!(normalize_deg(-90.0), 270.0);
        assert_eq!(normalize_deg(360.0), 0.0);
        assert_eq!(signed_angle_diff_deg(350.0, 10.0), 20.0);
        assert_eq!(signed_angle_diff_deg(10.0, 350.0), -20.0);
        assert_eq!(signed_angle_diff_deg(0.0, 180.0), 180.0);
    }

    #[test]
    fn unit_square_containment() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(convex_contains(&sq, Vec2::new(0.5, 0.5)));
        assert!(convex_contains(&sq, Vec2::new(1.0, 0.5)));
        assert!(!convex_contains(&sq, Vec2::new(1.5, 0.5)));
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert!(convex_contains(&rev, Vec2::new(0.25, 0.75)));
        assert!((signed_area(&sq) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn penetration_of_shifted_squares() {
        let a = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let b: Vec<_> = a.iter().map(|&p| p + Vec2::new(0.75, 0.0)).collect();
        assert!((convex_penetration(&a, &b) - 0.25).abs() < 1e-12);
        let c: Vec<_> = a.iter().map(|&p| p + Vec2::new(2.0, 0.0)).collect();
        assert!(convex_penetration(&a, &c) < 0.0);
    }
}
