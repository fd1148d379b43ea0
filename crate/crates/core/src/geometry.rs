//! Planar primitives: points, lines, reflections, folds and convex polygons.
//!
//! Everything is plain binary64. Membership and degeneracy decisions use the
//! fixed tolerance [`GEOM_TOL`].

use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Tolerance for membership and degeneracy tests.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Builds a point, rejecting NaN and infinite coordinates.
    pub fn checked(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Linear interpolation `self + s (other - self)`.
    #[inline]
    pub fn lerp(self, other: Point, s: f64) -> Point {
        self + (other - self) * s
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// The locus `nx·x + ny·y = offset`, stored with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    nx: f64,
    ny: f64,
    offset: f64,
}

impl Line {
    pub fn new(nx: f64, ny: f64, offset: f64) -> Result<Self, GeometryError> {
        let len = nx.hypot(ny);
        if !(len.is_finite() && offset.is_finite()) || len < GEOM_TOL {
            return Err(GeometryError::DegenerateLine);
        }
        Ok(Self {
            nx: nx / len,
            ny: ny / len,
            offset: offset / len,
        })
    }

    /// The vertical line `x = x0`.
    pub fn vertical(x0: f64) -> Self {
        Self {
            nx: 1.0,
            ny: 0.0,
            offset: x0,
        }
    }

    /// The horizontal line `y = y0`.
    pub fn horizontal(y0: f64) -> Self {
        Self {
            nx: 0.0,
            ny: 1.0,
            offset: y0,
        }
    }

    /// The line through two distinct points.
    pub fn through(p: Point, q: Point) -> Result<Self, GeometryError> {
        let d = q - p;
        Self::new(-d.y, d.x, -d.y * p.x + d.x * p.y)
    }

    #[inline]
    pub fn normal(&self) -> Point {
        Point::new(self.nx, self.ny)
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed distance, positive on the side the normal points to.
    #[inline]
    pub fn signed_distance(&self, p: Point) -> f64 {
        self.nx * p.x + self.ny * p.y - self.offset
    }

    #[inline]
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.signed_distance(p).abs() <= tol
    }
}

/// Mirror image of `p` across `l`.
#[inline]
pub fn reflect(p: Point, l: &Line) -> Point {
    let s = 2.0 * l.signed_distance(p);
    Point::new(p.x - s * l.nx, p.y - s * l.ny)
}

/// Fold of the plane along `l` that keeps the side containing `anchor`.
///
/// Points on `l` itself are left unchanged.
pub fn fold(p: Point, l: &Line, anchor: Point) -> Result<Point, GeometryError> {
    let side = l.signed_distance(anchor);
    if side.abs() <= GEOM_TOL {
        return Err(GeometryError::AnchorOnLine);
    }
    Ok(fold_unchecked(p, l, side > 0.0))
}

/// Fold with the anchor side already resolved (`positive` = anchor has a
/// positive signed distance).
#[inline]
pub(crate) fn fold_unchecked(p: Point, l: &Line, positive: bool) -> Point {
    let d = l.signed_distance(p);
    if (d > 0.0 && !positive) || (d < 0.0 && positive) {
        reflect(p, l)
    } else {
        p
    }
}

/// Convex polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolygonDomain {
    vertices: Vec<Point>,
    #[serde(skip)]
    edges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Edge {
    start: Point,
    // Inward unit normal.
    normal: Point,
}

impl PolygonDomain {
    /// Validates convexity and area, reorienting clockwise input.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut vertices = vertices;
        let area = signed_area(&vertices);
        let scale = bbox_diameter(&vertices).max(1.0);
        if area.abs() <= GEOM_TOL * scale * scale {
            return Err(GeometryError::DegenerateDomain);
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) < -GEOM_TOL * scale * scale {
                return Err(GeometryError::NotConvex);
            }
        }
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let a = vertices[i];
            let d = vertices[(i + 1) % n] - a;
            let len = d.norm();
            if len <= GEOM_TOL * scale {
                return Err(GeometryError::DegenerateDomain);
            }
            edges.push(Edge {
                start: a,
                normal: Point::new(-d.y / len, d.x / len),
            });
        }
        Ok(Self { vertices, edges })
    }

    /// The triangle `Ω((0,0),(2,0),(1,1))` on which every map of the family lives.
    pub fn standard_triangle() -> Self {
        Self::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 1.0),
        ])
        .expect("standard triangle is valid")
    }

    /// Axis-aligned rectangle `[x0,x1] × [y0,y1]`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len() as f64;
        self.vertices.iter().fold(Point::ORIGIN, |acc, &v| acc + v) * (1.0 / n)
    }

    /// `(xmin, xmax, ymin, ymax)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        bbox(&self.vertices)
    }

    /// Largest half-plane violation; non-positive inside.
    #[inline]
    pub fn max_violation(&self, p: Point) -> f64 {
        self.edges
            .iter()
            .map(|e| -(p - e.start).dot(e.normal))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True iff `p` is inside or within `tol` of the boundary.
    #[inline]
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.edges
            .iter()
            .all(|e| (p - e.start).dot(e.normal) >= -tol)
    }

    /// Euclidean distance from `p` to the polygon (zero inside).
    pub fn distance_outside(&self, p: Point) -> f64 {
        if self.contains(p, 0.0) {
            return 0.0;
        }
        self.closest_boundary_point(p).dist(p)
    }

    /// Distance from `p` to the boundary, whether inside or outside.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.closest_boundary_point(p).dist(p)
    }

    /// Nearest point of the polygon to `p`.
    pub fn project(&self, p: Point) -> Point {
        if self.contains(p, 0.0) {
            p
        } else {
            self.closest_boundary_point(p)
        }
    }

    fn closest_boundary_point(&self, p: Point) -> Point {
        let n = self.vertices.len();
        let mut best = self.vertices[0];
        let mut best_d = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let q = closest_on_segment(p, a, b);
            let d = q.dist(p);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Part of the polygon on the side of `l` containing `keep`, or `None`
    /// when that part has no area.
    pub fn clip(&self, l: &Line, keep: Point) -> Option<PolygonDomain> {
        let sign = if l.signed_distance(keep) >= 0.0 {
            1.0
        } else {
            -1.0
        };
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let da = sign * l.signed_distance(a);
            let db = sign * l.signed_distance(b);
            if da >= 0.0 {
                out.push(a);
            }
            if (da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0) {
                out.push(a.lerp(b, da / (da - db)));
            }
        }
        dedup_ring(&mut out);
        PolygonDomain::new(out).ok()
    }

    /// Image under a map that is known to send this polygon to a convex set
    /// (affine maps, reflections).
    pub fn map_vertices(&self, f: impl Fn(Point) -> Point) -> Result<PolygonDomain, GeometryError> {
        PolygonDomain::new(self.vertices.iter().map(|&v| f(v)).collect())
    }

    /// `n` deterministic uniform samples by rejection over the bounding box.
    pub fn sample(&self, n: usize, rng_seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        self.sample_with(&mut rng, n)
    }

    pub(crate) fn sample_with<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<Point> {
        let (x0, x1, y0, y1) = self.bbox();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let p = Point::new(rng.gen_range(x0..=x1), rng.gen_range(y0..=y1));
            if self.contains(p, 0.0) {
                out.push(p);
            }
        }
        out
    }
}

fn closest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return a;
    }
    let s = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    a + d * s
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

fn bbox(v: &[Point]) -> (f64, f64, f64, f64) {
    v.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(x0, x1, y0, y1), p| (x0.min(p.x), x1.max(p.x), y0.min(p.y), y1.max(p.y)),
    )
}

fn bbox_diameter(v: &[Point]) -> f64 {
    let (x0, x1, y0, y1) = bbox(v);
    (x1 - x0).hypot(y1 - y0)
}

fn dedup_ring(v: &mut Vec<Point>) {
    v.dedup_by(|a, b| a.dist(*b) <= GEOM_TOL);
    while v.len() > 1 && v[0].dist(v[v.len() - 1]) <= GEOM_TOL {
        v.pop();
    }
}
