//! The concrete map families: tent maps `λ_μ`, their products `Γ_μ`, the
//! family `Λ_t`, the baker maps `Ψ_{a,b}` and generic EBMs assembled from
//! folds and an expanding linear part.

use std::f64::consts::SQRT_2;
use std::ops::Mul;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fold_unchecked, Line, Point, PolygonDomain, GEOM_TOL};

/// Snap-in tolerance for single evaluations.
pub const EVAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub fn scale(s: f64) -> Self {
        Self::diag(s, s)
    }

    /// Reflection across a line through the origin with unit normal `n`.
    pub fn reflection(n: Point) -> Self {
        Self::new(
            1.0 - 2.0 * n.x * n.x,
            -2.0 * n.x * n.y,
            -2.0 * n.x * n.y,
            1.0 - 2.0 * n.y * n.y,
        )
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.abs() < 1e-300 || !d.is_finite() {
            return None;
        }
        Some(Self::new(
            self.m22 / d,
            -self.m12 / d,
            -self.m21 / d,
            self.m11 / d,
        ))
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.m11 * p.x + self.m12 * p.y,
            self.m21 * p.x + self.m22 * p.y,
        )
    }

    /// Real eigenvalues sorted by decreasing value, or `None` for a complex pair.
    pub fn real_eigenvalues(&self) -> Option<(f64, f64)> {
        let tr = self.trace();
        let disc = tr * tr - 4.0 * self.det();
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        // Stable quadratic roots.
        let q = -0.5 * (-tr - tr.signum() * s);
        let (r1, r2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q, self.det() / q)
        };
        Some(if r1 >= r2 { (r1, r2) } else { (r2, r1) })
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        (self.m11 - o.m11)
            .abs()
            .max((self.m12 - o.m12).abs())
            .max((self.m21 - o.m21).abs())
            .max((self.m22 - o.m22).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TentParam {
    mu: f64,
}

impl TentParam {
    pub fn new(mu: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&mu) {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
            });
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// The invariant interval `I_μ = [μ(2−μ), μ]`.
    pub fn invariant_interval(&self) -> (f64, f64) {
        (self.mu * (2.0 - self.mu), self.mu)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaParam {
    t: f64,
}

impl LambdaParam {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
            });
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn is_expanding(&self) -> bool {
        self.t > std::f64::consts::FRAC_1_SQRT_2
    }
}

/// A parameter pair `(a, b)` of the baker family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
}

impl Params {
    /// Checks `1 < a ≤ 2`, `1 ≤ b ≤ 2`, `ab ≤ 2`.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 1.0 && a <= 2.0) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
            });
        }
        Self::closure(a, b)
    }

    /// Like [`Params::new`] but admits `a = 1` and a rounding margin on
    /// `ab ≤ 2`, i.e. the closure of the parameter set.
    pub fn closure(a: f64, b: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&a) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
            });
        }
        if !(1.0..=2.0).contains(&b) || a * b > 2.0 + 1e-12 {
            return Err(Error::InvalidParameter {
                name: "b",
                value: b,
            });
        }
        Ok(Self { a, b })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TentSide {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchId {
    T0Minus,
    T0Plus,
    T1Minus,
    T1Plus,
    T0,
    T1,
    Left,
    Right,
    Product(TentSide, TentSide),
    /// Bit `i` set iff fold `i` reflected the point.
    Folds(u32),
}

#[inline]
fn tent(mu: f64, x: f64) -> f64 {
    if x <= 1.0 {
        mu * x
    } else {
        mu * (2.0 - x)
    }
}

#[inline]
fn side(x: f64) -> TentSide {
    if x <= 1.0 {
        TentSide::Left
    } else {
        TentSide::Right
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=2.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { x, y: 0.0 })
    }
}

pub fn tent_eval(mu: TentParam, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(tent(mu.mu, x))
}

pub fn tent_product_eval(mu: TentParam, p: Point) -> Result<Point> {
    if !((0.0..=2.0).contains(&p.x) && (0.0..=2.0).contains(&p.y)) {
        return Err(Error::OutOfDomain { x: p.x, y: p.y });
    }
    Ok(Point::new(tent(mu.mu, p.x), tent(mu.mu, p.y)))
}

fn triangle_snap(p: Point, tol: f64) -> Result<Point> {
    // 𝒯 = {y ≥ 0, y ≤ x, y ≤ 2 − x}
    let viol = (-p.y).max(p.y - p.x).max(p.y + p.x - 2.0);
    if viol <= 0.0 {
        return Ok(p);
    }
    if !p.is_finite() || viol > tol * 2.0 {
        return Err(Error::OutOfDomain { x: p.x, y: p.y });
    }
    Ok(TRIANGLE.with(|t| t.project(p)))
}

thread_local! {
    static TRIANGLE: PolygonDomain = PolygonDomain::standard_triangle();
}

#[inline]
fn lambda_raw(t: f64, p: Point) -> (Point, BranchId) {
    if p.x <= 1.0 {
        (Point::new(t * (p.x + p.y), t * (p.x - p.y)), BranchId::T0)
    } else {
        (
            Point::new(t * (2.0 - p.x + p.y), t * (2.0 - p.x - p.y)),
            BranchId::T1,
        )
    }
}

pub fn lambda_eval(t: LambdaParam, p: Point) -> Result<Point> {
    let p = triangle_snap(p, EVAL_TOL)?;
    Ok(lambda_raw(t.t, p).0)
}

#[inline]
fn psi_classify(b: f64, p: Point) -> BranchId {
    if p.x <= 1.0 {
        if p.x + p.y <= b {
            BranchId::T0Minus
        } else {
            BranchId::T0Plus
        }
    } else if p.x - p.y >= 2.0 - b {
        BranchId::T1Minus
    } else {
        BranchId::T1Plus
    }
}

/// Evaluates the branch formula `branch` of `Ψ_{a,b}` at `p`, regardless of
/// which branch `p` belongs to.
#[inline]
pub fn psi_branch_formula(prm: Params, branch: BranchId, p: Point) -> Point {
    let (a, b) = (prm.a, prm.b);
    match branch {
        BranchId::T0Minus => Point::new(a * p.x, a * p.y),
        BranchId::T0Plus => Point::new(a * (b - p.y), a * (b - p.x)),
        BranchId::T1Minus => Point::new(a * (2.0 - p.x), a * p.y),
        BranchId::T1Plus => Point::new(a * (b - p.y), a * (b - 2.0 + p.x)),
        _ => unreachable!("not a baker-map branch"),
    }
}

#[inline]
fn psi_raw(prm: Params, p: Point) -> (Point, BranchId) {
    let br = psi_classify(prm.b, p);
    (psi_branch_formula(prm, br, p), br)
}

pub fn psi_branch(prm: Params, p: Point) -> Result<BranchId> {
    let p = triangle_snap(p, EVAL_TOL)?;
    Ok(psi_classify(prm.b, p))
}

pub fn psi_eval(prm: Params, p: Point) -> Result<Point> {
    let p = triangle_snap(p, EVAL_TOL)?;
    Ok(psi_raw(prm, p).0)
}

/// `Ψ^n` without domain checks; `p` must lie in `𝒯`.
#[inline]
pub fn psi_iter(prm: Params, mut p: Point, n: usize) -> Point {
    for _ in 0..n {
        p = psi_raw(prm, p).0;
    }
    p
}

pub fn psi_differential(prm: Params, branch: BranchId) -> Result<Mat2> {
    let a = prm.a;
    match branch {
        BranchId::T0Minus => Ok(Mat2::new(a, 0.0, 0.0, a)),
        BranchId::T0Plus => Ok(Mat2::new(0.0, -a, -a, 0.0)),
        BranchId::T1Minus => Ok(Mat2::new(-a, 0.0, 0.0, a)),
        BranchId::T1Plus => Ok(Mat2::new(0.0, -a, a, 0.0)),
        other => Err(Error::InvalidSpec(format!(
            "{other:?} is not a baker-map branch"
        ))),
    }
}

/// `A_t = [[t, t], [t, −t]]`.
pub fn lambda_matrix(t: f64) -> Mat2 {
    Mat2::new(t, t, t, -t)
}

/// Expanding Baker Map: folds applied in order, then `Q ↦ P + A(Q − P)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericEbm {
    domain: PolygonDomain,
    fold_lines: Vec<Line>,
    #[serde(skip)]
    fold_sides: Vec<bool>,
    anchor: Point,
    linear: Mat2,
}

impl GenericEbm {
    pub fn new(
        domain: PolygonDomain,
        fold_lines: Vec<Line>,
        anchor: Point,
        linear: Mat2,
    ) -> Result<Self> {
        if !linear.is_finite() || linear.det().abs() <= 1.0 {
            return Err(Error::NotExpanding(linear.det().abs()));
        }
        if fold_lines.len() > 32 {
            return Err(Error::InvalidSpec("at most 32 folds".into()));
        }
        if !domain.contains(anchor, GEOM_TOL) {
            return Err(Error::OutOfDomain {
                x: anchor.x,
                y: anchor.y,
            });
        }
        let mut fold_sides = Vec::with_capacity(fold_lines.len());
        let mut region = domain.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for (index, l) in fold_lines.iter().enumerate() {
            let s = l.signed_distance(anchor);
            if s.abs() <= GEOM_TOL {
                return Err(crate::GeometryError::AnchorOnLine.into());
            }
            let positive = s > 0.0;
            let kept = region.clip(l, anchor).ok_or(Error::BadFold { index })?;
            let tests = region
                .vertices()
                .iter()
                .copied()
                .chain(region.sample_with(&mut rng, 1000));
            for v in tests {
                if !kept.contains(fold_unchecked(v, l, positive), 1e-10) {
                    return Err(Error::BadFold { index });
                }
            }
            fold_sides.push(positive);
            region = kept;
        }
        Ok(Self {
            domain,
            fold_lines,
            fold_sides,
            anchor,
            linear,
        })
    }

    /// `Ψ_{a,b}` as `EBM(𝒯, 𝒞, ℒ(b), 𝒪, B_a)`.
    pub fn psi(prm: Params) -> Result<Self> {
        Self::new(
            PolygonDomain::standard_triangle(),
            vec![Line::vertical(1.0), Line::new(1.0, 1.0, prm.b)?],
            Point::ORIGIN,
            Mat2::scale(prm.a),
        )
    }

    /// `Λ_t` as one fold along `𝒞` followed by `A_t`; needs `t > 1/√2`.
    pub fn lambda(t: LambdaParam) -> Result<Self> {
        Self::new(
            PolygonDomain::standard_triangle(),
            vec![Line::vertical(1.0)],
            Point::ORIGIN,
            lambda_matrix(t.t),
        )
    }

    /// `Γ_μ` on `[0,2]²` as folds along `x = 1` and `y = 1` followed by `μ·I`.
    pub fn tent_product(mu: TentParam) -> Result<Self> {
        Self::new(
            PolygonDomain::rectangle(0.0, 2.0, 0.0, 2.0)?,
            vec![Line::vertical(1.0), Line::horizontal(1.0)],
            Point::ORIGIN,
            Mat2::scale(mu.mu),
        )
    }

    pub fn domain(&self) -> &PolygonDomain {
        &self.domain
    }

    pub fn fold_lines(&self) -> &[Line] {
        &self.fold_lines
    }

    pub fn anchor(&self) -> Point {
        self.anchor
    }

    pub fn linear(&self) -> Mat2 {
        self.linear
    }

    #[inline]
    fn raw(&self, p: Point) -> (Point, BranchId) {
        let mut q = p;
        let mut mask = 0u32;
        for (i, (l, &pos)) in self.fold_lines.iter().zip(&self.fold_sides).enumerate() {
            let r = fold_unchecked(q, l, pos);
            if r != q {
                mask |= 1 << i;
            }
            q = r;
        }
        (
            self.anchor + self.linear.apply(q - self.anchor),
            BranchId::Folds(mask),
        )
    }

    fn differential(&self, mask: u32) -> Mat2 {
        let mut m = Mat2::IDENTITY;
        for (i, l) in self.fold_lines.iter().enumerate() {
            if mask & (1 << i) != 0 {
                m = Mat2::reflection(l.normal()) * m;
            }
        }
        self.linear * m
    }
}

pub fn ebm_eval(e: &GenericEbm, p: Point) -> Result<Point> {
    let p = snap(&e.domain, p, EVAL_TOL)?;
    let q = e.raw(p).0;
    if !e.domain.contains(q, EVAL_TOL) {
        return Err(Error::ImageEscapesDomain { x: q.x, y: q.y });
    }
    Ok(q)
}

fn snap(domain: &PolygonDomain, p: Point, tol: f64) -> Result<Point> {
    if !p.is_finite() {
        return Err(Error::OutOfDomain { x: p.x, y: p.y });
    }
    let v = domain.max_violation(p);
    if v <= 0.0 {
        Ok(p)
    } else if v <= tol {
        Ok(domain.project(p))
    } else {
        Err(Error::OutOfDomain { x: p.x, y: p.y })
    }
}

/// Any of the evaluatable map families.
///
/// `Tent` acts on the plane as `(x, y) ↦ (λ_μ(x), y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PiecewiseMap {
    Tent(TentParam),
    TentProduct(TentParam),
    Lambda(LambdaParam),
    Psi(Params),
    Generic(GenericEbm),
}

impl PiecewiseMap {
    pub fn name(&self) -> &'static str {
        match self {
            PiecewiseMap::Tent(_) => "tent",
            PiecewiseMap::TentProduct(_) => "gamma",
            PiecewiseMap::Lambda(_) => "lambda",
            PiecewiseMap::Psi(_) => "psi",
            PiecewiseMap::Generic(_) => "ebm",
        }
    }

    /// The set the map acts on. For `Tent` this is `[0,2] × [0,1]`, of which
    /// only the segment `y = 0` is used for seeding.
    pub fn domain(&self) -> PolygonDomain {
        match self {
            PiecewiseMap::Tent(_) => PolygonDomain::rectangle(0.0, 2.0, 0.0, 1.0).unwrap(),
            PiecewiseMap::TentProduct(_) => PolygonDomain::rectangle(0.0, 2.0, 0.0, 2.0).unwrap(),
            PiecewiseMap::Lambda(_) | PiecewiseMap::Psi(_) => PolygonDomain::standard_triangle(),
            PiecewiseMap::Generic(e) => e.domain.clone(),
        }
    }

    /// Deterministic seeds in the domain.
    pub fn sample_seeds(&self, n: usize, rng_seed: u64) -> Vec<Point> {
        let mut pts = self.domain().sample(n, rng_seed);
        if let PiecewiseMap::Tent(_) = self {
            for p in &mut pts {
                p.y = 0.0;
            }
        }
        pts
    }

    /// One step with snap-in tolerance `tol`; returns the image and the branch used.
    #[inline]
    pub fn step(&self, p: Point, tol: f64) -> Result<(Point, BranchId)> {
        match self {
            PiecewiseMap::Psi(prm) => Ok(psi_raw(*prm, triangle_snap(p, tol)?)),
            PiecewiseMap::Lambda(t) => Ok(lambda_raw(t.t, triangle_snap(p, tol)?)),
            PiecewiseMap::TentProduct(mu) => {
                let x = snap_unit(p.x, tol, p)?;
                let y = snap_unit(p.y, tol, p)?;
                Ok((
                    Point::new(tent(mu.mu, x), tent(mu.mu, y)),
                    BranchId::Product(side(x), side(y)),
                ))
            }
            PiecewiseMap::Tent(mu) => {
                let x = snap_unit(p.x, tol, p)?;
                let br = match side(x) {
                    TentSide::Left => BranchId::Left,
                    TentSide::Right => BranchId::Right,
                };
                Ok((Point::new(tent(mu.mu, x), p.y), br))
            }
            PiecewiseMap::Generic(e) => Ok(e.raw(snap(&e.domain, p, tol)?)),
        }
    }

    pub fn eval(&self, p: Point) -> Result<Point> {
        match self {
            PiecewiseMap::Generic(e) => ebm_eval(e, p),
            _ => self.step(p, EVAL_TOL).map(|r| r.0),
        }
    }

    pub fn branch(&self, p: Point) -> Result<BranchId> {
        self.step(p, EVAL_TOL).map(|r| r.1)
    }

    pub fn differential(&self, branch: BranchId) -> Result<Mat2> {
        let bad = || Error::InvalidSpec(format!("{branch:?} is not a branch of {}", self.name()));
        match (self, branch) {
            (PiecewiseMap::Psi(prm), _) => psi_differential(*prm, branch),
            (PiecewiseMap::Lambda(t), BranchId::T0) => Ok(lambda_matrix(t.t)),
            (PiecewiseMap::Lambda(t), BranchId::T1) => Ok(Mat2::new(-t.t, t.t, -t.t, -t.t)),
            (PiecewiseMap::Tent(mu), BranchId::Left) => Ok(Mat2::diag(mu.mu, 1.0)),
            (PiecewiseMap::Tent(mu), BranchId::Right) => Ok(Mat2::diag(-mu.mu, 1.0)),
            (PiecewiseMap::TentProduct(mu), BranchId::Product(sx, sy)) => {
                let s = |sd| if sd == TentSide::Left { mu.mu } else { -mu.mu };
                Ok(Mat2::diag(s(sx), s(sy)))
            }
            (PiecewiseMap::Generic(e), BranchId::Folds(mask)) => Ok(e.differential(mask)),
            _ => Err(bad()),
        }
    }

    /// Signed distances to the critical lines of the branch at `p`; the
    /// smallest absolute value tells how close `p` is to a branch switch.
    pub fn critical_distance(&self, p: Point) -> f64 {
        match self {
            PiecewiseMap::Psi(prm) => {
                let dc = (p.x - 1.0).abs();
                let dl = if p.x <= 1.0 {
                    (p.x + p.y - prm.b).abs() / SQRT_2
                } else {
                    (p.x - p.y - (2.0 - prm.b)).abs() / SQRT_2
                };
                dc.min(dl)
            }
            PiecewiseMap::Lambda(_) => (p.x - 1.0).abs(),
            PiecewiseMap::Tent(_) => (p.x - 1.0).abs(),
            PiecewiseMap::TentProduct(_) => (p.x - 1.0).abs().min((p.y - 1.0).abs()),
            PiecewiseMap::Generic(e) => e
                .fold_lines
                .iter()
                .map(|l| l.signed_distance(p).abs())
                .fold(f64::INFINITY, f64::min),
        }
    }
}

fn snap_unit(v: f64, tol: f64, p: Point) -> Result<f64> {
    if (0.0..=2.0).contains(&v) {
        Ok(v)
    } else if v.is_finite() && v >= -tol && v <= 2.0 + tol {
        Ok(v.clamp(0.0, 2.0))
    } else {
        Err(Error::OutOfDomain { x: p.x, y: p.y })
    }
}
