//! Fixed points, invariant and restrictive domains, affine charts and
//! residual checks of the affine conjugacies of the baker family.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, PolygonDomain};
use crate::maps::{psi_eval, psi_iter, Mat2, Params};
use crate::regions::{in_region, RegionId};
use crate::renorm::{apply, gamma_coeff, RenormOp};

const SINGULAR_TOL: f64 = 1e-14;

/// Affine map `p ↦ m·p + c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Affine2 {
    pub m: Mat2,
    pub c: Point,
}

impl Affine2 {
    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        self.m.apply(p) + self.c
    }

    pub fn inverse(&self) -> Option<Affine2> {
        let mi = self.m.inverse()?;
        Some(Affine2 {
            m: mi,
            c: -mi.apply(self.c),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ChartKind {
    OmegaP1,
    TauP2,
    PhiCentered,
    PhiTildeDelta,
    PhiHatPi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChangeOfCoords {
    pub kind: ChartKind,
    pub forward: Affine2,
    pub inverse: Affine2,
}

impl ChangeOfCoords {
    pub fn new(kind: ChartKind, prm: Params) -> Result<Self> {
        let (a, b) = (prm.a, prm.b);
        let nonzero = |v: f64, what: &'static str| {
            if v.abs() < SINGULAR_TOL || !v.is_finite() {
                Err(Error::SingularChange(what))
            } else {
                Ok(v)
            }
        };
        let forward = match kind {
            ChartKind::OmegaP1 => {
                let x2 = 2.0 * a / (1.0 + a);
                let d = (2.0 * a + b - 2.0) / a;
                let s1 = nonzero(x2 - (2.0 - b), "x2 - (2 - b)")?;
                let s2 = nonzero(d - x2, "d - x2")?;
                Affine2 {
                    m: Mat2::new(-1.0 / s1, 1.0 / s1, 1.0 / s2, 1.0 / s2),
                    c: Point::new(x2 / s1, -x2 / s2),
                }
            }
            ChartKind::TauP2 => {
                let x2 = a * b / (1.0 + a);
                let d = (a * b - 1.0) / a;
                let s1 = nonzero(1.0 - x2, "1 - x2")?;
                let s2 = nonzero(x2 - d, "y2 - d")?;
                Affine2 {
                    m: Mat2::diag(1.0 / s1, -1.0 / s2),
                    c: Point::new(-x2 / s1, x2 / s2),
                }
            }
            ChartKind::PhiCentered | ChartKind::PhiTildeDelta | ChartKind::PhiHatPi => {
                let p = fixed_point(prm);
                let s = nonzero(p.x - 1.0, "x_P - 1")?;
                let (hx, hy) = match kind {
                    ChartKind::PhiCentered => (1.0, 1.0),
                    ChartKind::PhiTildeDelta => (-1.0, 1.0),
                    _ => (-1.0, -1.0),
                };
                Affine2 {
                    m: Mat2::diag(hx / s, hy / s),
                    c: Point::new(-hx * p.x / s, -hy * p.y / s),
                }
            }
        };
        let inverse = forward
            .inverse()
            .ok_or(Error::SingularChange("non-invertible linear part"))?;
        Ok(Self {
            kind,
            forward,
            inverse,
        })
    }

    #[inline]
    pub fn forward(&self, p: Point) -> Point {
        self.forward.apply(p)
    }

    #[inline]
    pub fn backward(&self, p: Point) -> Point {
        self.inverse.apply(p)
    }
}

pub fn change_coords(c: &ChangeOfCoords, p: Point, direction: Direction) -> Point {
    match direction {
        Direction::Forward => c.forward(p),
        Direction::Inverse => c.backward(p),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPointData {
    pub p: Point,
    /// Auxiliary constants of the square conjugacy active at these parameters
    /// (`x₂ = 2a/(1+a)`, `d = (2a+b−2)/a` in `P1`; `x₂ = ab/(1+a)`,
    /// `d = (ab−1)/a` otherwise).
    pub x2: f64,
    pub d: f64,
}

fn fixed_point(prm: Params) -> Point {
    let (a, b) = (prm.a, prm.b);
    let den = 1.0 + a * a;
    Point::new(
        (a * b + 2.0 * a * a - a * a * b) / den,
        (a * b - 2.0 * a + a * a * b) / den,
    )
}

pub fn psi_fixed_point(prm: Params) -> FixedPointData {
    let (a, b) = (prm.a, prm.b);
    let (x2, d) = if in_region(RegionId::P1, a, b) {
        (2.0 * a / (1.0 + a), (2.0 * a + b - 2.0) / a)
    } else {
        (a * b / (1.0 + a), (a * b - 1.0) / a)
    };
    FixedPointData {
        p: fixed_point(prm),
        x2,
        d,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DomainName {
    R1,
    RectP1,
    RectP2,
    Delta,
    Pi,
    DeltaTilde,
    Delta0,
    Pi0,
}

impl DomainName {
    pub const ALL: [DomainName; 8] = [
        DomainName::R1,
        DomainName::RectP1,
        DomainName::RectP2,
        DomainName::Delta,
        DomainName::Pi,
        DomainName::DeltaTilde,
        DomainName::Delta0,
        DomainName::Pi0,
    ];

    fn required_region(self) -> RegionId {
        match self {
            DomainName::R1 | DomainName::Delta | DomainName::Pi => RegionId::P,
            DomainName::RectP1 => RegionId::P1,
            DomainName::RectP2 => RegionId::P2,
            DomainName::Delta0 => RegionId::PDelta,
            DomainName::DeltaTilde | DomainName::Pi0 => RegionId::P3,
        }
    }

    fn is_centered(self) -> bool {
        matches!(
            self,
            DomainName::Delta
                | DomainName::Pi
                | DomainName::DeltaTilde
                | DomainName::Delta0
                | DomainName::Pi0
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Frame {
    Original,
    Centered,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedDomain {
    pub name: DomainName,
    pub params: Params,
    /// Polygon in the coordinates of `𝒯`.
    pub polygon: PolygonDomain,
    pub frame: Frame,
    /// Polygon in the centered coordinates `φ`, when the domain is built there.
    pub centered: Option<PolygonDomain>,
}

fn require(region: RegionId, prm: Params) -> Result<()> {
    if in_region(region, prm.a, prm.b) {
        Ok(())
    } else {
        Err(Error::RegionMismatch(region.to_string()))
    }
}

/// Construction points in centered coordinates.
fn centered_points(prm: Params) -> Result<Vec<(&'static str, Point)>> {
    let a = prm.a;
    let g = gamma_coeff(prm.a, prm.b)?;
    let a2 = a * a;
    let a4 = a2 * a2;
    Ok(vec![
        ("P", Point::ORIGIN),
        ("P'", Point::new(-2.0, 0.0)),
        ("Q", Point::new(-1.0, 1.0)),
        ("M", Point::new(-1.0, 0.0)),
        ("H1", Point::new(-1.0, -1.0)),
        ("H", Point::new(-1.0 / a, 1.0 / a)),
        ("K", Point::new(-1.0, 1.0 / a)),
        ("Htilde", Point::new(-g / (2.0 * a2), g / (2.0 * a2))),
        ("Ktilde", Point::new(-1.0, g / a2 - 1.0)),
        ("Htilde2", Point::new(g / 2.0, -g / 2.0)),
        ("Ktilde2", Point::new(a2, a2 - g)),
        ("Htilde4", Point::new(-a2 * g / 2.0, a2 * g / 2.0)),
        ("Ktilde4", Point::new(-a4, a2 * g - a4)),
        ("M4", Point::new(-a4, 0.0)),
        ("Htilde1", Point::new(-g / (2.0 * a), -g / (2.0 * a))),
        ("J", Point::new(-1.0, 1.0 - g / a)),
        ("J1", Point::new(g - a, -a)),
    ])
}

fn centered_lookup(pts: &[(&'static str, Point)], name: &str) -> Point {
    pts.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| *p)
        .unwrap()
}

/// Inverse of the `𝒯₁⁺` branch.
fn psi_t1plus_inverse(prm: Params, q: Point) -> Point {
    Point::new(q.y / prm.a + 2.0 - prm.b, prm.b - q.x / prm.a)
}

/// Labelled construction points in the coordinates of `𝒯`. Centered-frame
/// points carry the suffix `~c`.
pub fn construction_points(prm: Params) -> Result<Vec<(String, Point)>> {
    let (a, b) = (prm.a, prm.b);
    let a2 = a * a;
    let a3 = a2 * a;
    let mut out: Vec<(String, Point)> = Vec::new();
    let mut push = |n: &str, p: Point| out.push((n.to_string(), p));
    let c = Point::new(2.0 - a - b + a * b, a * (b - 1.0));
    let d = Point::new(1.0, a * (b - 1.0));
    let e = Point::new(1.0, a * b - 1.0);
    let f = Point::new(0.5 * (2.0 - b + a * b), 0.5 * (-2.0 + b + a * b));
    let k = Point::new(
        0.5 * (2.0 - 2.0 * a + 2.0 * a2 - b + 2.0 * a * b - a3 * b),
        0.5 * (-2.0 - 2.0 * a + b + 2.0 * a2 + 2.0 * a * b - a3 * b),
    );
    let n = Point::new(1.0, a * (-2.0 + a2 + b + a * b - a2 * b));
    push("P", fixed_point(prm));
    push("C", c);
    push("D", d);
    push("E", e);
    push("F", f);
    push("C1", Point::new(a * (a + b - a * b), a2 * (b - 1.0)));
    push("D1", Point::new(a * (a + b - a * b), a * (b - 1.0)));
    push("E1", Point::new(a * (1.0 + b - a * b), a * (b - 1.0)));
    push(
        "F1",
        Point::new(0.5 * a * (2.0 + b - a * b), 0.5 * a * (-2.0 + b + a * b)),
    );
    push(
        "G1",
        Point::new(a * (-1.0 + 2.0 * a + b - a2 * b), a * (b - 1.0)),
    );
    push(
        "F2",
        Point::new(
            0.5 * a * (2.0 * a + 2.0 * b - a * b - a2 * b),
            0.5 * a * (-4.0 + 2.0 * a + 2.0 * b + a * b - a2 * b),
        ),
    );
    push(
        "F3",
        Point::new(
            0.5 * a * (4.0 * a - 2.0 * a2 + 2.0 * b - 2.0 * a * b - a2 * b + a3 * b),
            0.5 * a * (-4.0 + 2.0 * a2 + 2.0 * b + 2.0 * a * b - a2 * b - a3 * b),
        ),
    );
    push("K", k);
    push(
        "K1",
        Point::new(
            0.5 * a * (2.0 + 2.0 * a - 2.0 * a2 + b - 2.0 * a * b + a3 * b),
            0.5 * a * (-2.0 - 2.0 * a + b + 2.0 * a2 + 2.0 * a * b - a3 * b),
        ),
    );
    push(
        "D2",
        Point::new(a * (a + b - a * b), a * (-2.0 + a2 + b + a * b - a2 * b)),
    );
    push(
        "D3",
        Point::new(
            a * (2.0 * a - a3 + b - a * b - a2 * b + a3 * b),
            a * (-2.0 + a2 + b + a * b - a2 * b),
        ),
    );
    push("N", n);
    push(
        "N1",
        Point::new(
            a * (2.0 * a + b - a * b - a2 * b - a3 + a3 * b),
            a * (b - 1.0),
        ),
    );
    push("D-1", Point::new(1.0, b - 1.0 / a));
    push("N-1", Point::new(a2 + a * b - a2 * b, b - 1.0 / a));
    push("F-1", psi_t1plus_inverse(prm, f));
    push("K-1", psi_t1plus_inverse(prm, k));
    if let Ok(phi) = ChangeOfCoords::new(ChartKind::PhiCentered, prm) {
        if let Ok(pts) = centered_points(prm) {
            for (name, q) in pts {
                out.push((format!("{name}~c"), phi.backward(q)));
            }
        }
    }
    Ok(out)
}

fn lookup(pts: &[(String, Point)], name: &str) -> Point {
    pts.iter()
        .find(|(n, _)| n == name)
        .map(|(_, p)| *p)
        .unwrap()
}

pub fn named_domain(name: DomainName, prm: Params) -> Result<NamedDomain> {
    require(name.required_region(), prm)?;
    if name.is_centered() {
        let phi = ChangeOfCoords::new(ChartKind::PhiCentered, prm)?;
        let pts = centered_points(prm)?;
        let labels: &[&str] = match name {
            DomainName::Delta => &["P", "P'", "Q"],
            DomainName::Pi => &["P", "P'", "H1"],
            DomainName::DeltaTilde => &["P", "Htilde4", "Ktilde4", "M4"],
            DomainName::Delta0 => &["P", "Htilde", "Ktilde", "M"],
            _ => &["P", "Htilde1", "J", "M"],
        };
        let verts: Vec<Point> = labels.iter().map(|l| centered_lookup(&pts, l)).collect();
        let centered = PolygonDomain::new(verts.clone())?;
        let polygon = PolygonDomain::new(verts.into_iter().map(|v| phi.backward(v)).collect())?;
        return Ok(NamedDomain {
            name,
            params: prm,
            polygon,
            frame: Frame::Centered,
            centered: Some(centered),
        });
    }
    let pts = construction_points(prm)?;
    let labels: &[&str] = match name {
        DomainName::R1 => &["C1", "D1", "E1", "F1"],
        DomainName::RectP1 => &["F1", "F2", "F3", "K1"],
        _ => &["D1", "D2", "D3", "N1"],
    };
    let polygon = PolygonDomain::new(labels.iter().map(|l| lookup(&pts, l)).collect())?;
    Ok(NamedDomain {
        name,
        params: prm,
        polygon,
        frame: Frame::Original,
        centered: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ResidualKind {
    P1Square,
    P2Square,
    DeltaQuad,
    PiQuad,
}

impl ResidualKind {
    pub const ALL: [ResidualKind; 4] = [
        ResidualKind::P1Square,
        ResidualKind::P2Square,
        ResidualKind::DeltaQuad,
        ResidualKind::PiQuad,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub sup: f64,
    pub mean: f64,
}

#[inline]
fn tent(mu: f64, x: f64) -> f64 {
    if x <= 1.0 {
        mu * x
    } else {
        mu * (2.0 - x)
    }
}

/// Conjugacy defect over `n_samples` deterministic points of the relevant
/// domain: `|χ(Ψ²p) − Γ_{a²}(χ p)|` for the square kinds and
/// `|χ(Ψ⁴p) − Ψ_{H(a,b)}(χ p)|` for the quad kinds.
pub fn conjugacy_residual(
    kind: ResidualKind,
    prm: Params,
    n_samples: usize,
    rng_seed: u64,
) -> Result<Residual> {
    if n_samples == 0 {
        return Err(Error::InvalidSpec("n_samples must be positive".into()));
    }
    let (domain, chart, power) = match kind {
        ResidualKind::P1Square => (DomainName::RectP1, ChartKind::OmegaP1, 2),
        ResidualKind::P2Square => (DomainName::RectP2, ChartKind::TauP2, 2),
        ResidualKind::DeltaQuad => (DomainName::DeltaTilde, ChartKind::PhiTildeDelta, 4),
        ResidualKind::PiQuad => (DomainName::Pi, ChartKind::PhiHatPi, 4),
    };
    if matches!(kind, ResidualKind::PiQuad) {
        require(RegionId::P3, prm)?;
    }
    let dom = named_domain(domain, prm)?;
    let chi = ChangeOfCoords::new(chart, prm)?;
    let target: Box<dyn Fn(Point) -> Point + Sync> = match kind {
        ResidualKind::P1Square | ResidualKind::P2Square => {
            let mu = prm.a * prm.a;
            Box::new(move |q: Point| Point::new(tent(mu, q.x), tent(mu, q.y)))
        }
        ResidualKind::DeltaQuad | ResidualKind::PiQuad => {
            let op = if kind == ResidualKind::DeltaQuad {
                RenormOp::Delta
            } else {
                RenormOp::Pi
            };
            let (a1, b1) = apply(op, prm.a, prm.b)?;
            let renormalized = Params { a: a1, b: b1 };
            Box::new(move |q: Point| psi_iter(renormalized, q, 1))
        }
    };
    let pts = dom.polygon.sample(n_samples, rng_seed);
    let defects: Vec<f64> = pts
        .par_iter()
        .map(|&p| {
            let lhs = chi.forward(psi_iter(prm, p, power));
            let rhs = target(chi.forward(p));
            lhs.dist(rhs)
        })
        .collect();
    Ok(summarize(&defects))
}

fn summarize(v: &[f64]) -> Residual {
    let sup = v.iter().copied().fold(0.0, f64::max);
    let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
    Residual { sup, mean }
}

/// Largest distance of `Ψ^power(p)` outside the domain over sampled points
/// and the polygon's vertices, measured in the domain's own frame.
pub fn invariance_check(
    prm: Params,
    domain: &NamedDomain,
    power: usize,
    n_samples: usize,
    rng_seed: u64,
) -> Result<f64> {
    if power == 0 {
        return Err(Error::InvalidSpec("power must be at least 1".into()));
    }
    let phi = ChangeOfCoords::new(ChartKind::PhiCentered, prm).ok();
    let mut pts = domain.polygon.sample(n_samples, rng_seed);
    pts.extend_from_slice(domain.polygon.vertices());
    let violation = |q: Point| -> f64 {
        match (&domain.centered, &phi) {
            (Some(c), Some(phi)) => c.distance_outside(phi.forward(q)),
            _ => domain.polygon.distance_outside(q),
        }
    };
    let worst = pts
        .par_iter()
        .map(|&p| {
            let q = psi_iter(prm, p, power);
            violation(q)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Fraction of interior seeds whose orbit enters `target` within `max_iters`.
pub fn capture_check(
    prm: Params,
    target: &NamedDomain,
    n_seeds: usize,
    max_iters: usize,
    rng_seed: u64,
) -> Result<f64> {
    if n_seeds == 0 {
        return Err(Error::InvalidSpec("n_seeds must be positive".into()));
    }
    let tri = PolygonDomain::standard_triangle();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds = Vec::with_capacity(n_seeds);
    while seeds.len() < n_seeds {
        for p in tri.sample_with(&mut rng, n_seeds - seeds.len()) {
            if tri.distance_to_boundary(p) > 1e-9 {
                seeds.push(p);
            }
        }
    }
    let captured = seeds
        .par_iter()
        .filter(|&&p0| first_entry(prm, &target.polygon, p0, max_iters).is_some())
        .count();
    Ok(captured as f64 / n_seeds as f64)
}

/// Iteration at which the orbit of `p0` first lies in `target`.
pub fn first_entry(
    prm: Params,
    target: &PolygonDomain,
    p0: Point,
    max_iters: usize,
) -> Option<usize> {
    let mut p = p0;
    for i in 0..=max_iters {
        if target.contains(p, 1e-12) {
            return Some(i);
        }
        p = psi_iter(prm, p, 1);
    }
    None
}

/// Defect of the homothecy law `Ψ⁴(p) = P + a⁴(p − P)` on `Δ₀` or `Π₀`.
pub fn homothecy_residual(
    prm: Params,
    name: DomainName,
    n_samples: usize,
    rng_seed: u64,
) -> Result<Residual> {
    if !matches!(name, DomainName::Delta0 | DomainName::Pi0) {
        return Err(Error::InvalidSpec(format!("{name:?} is not a pre-domain")));
    }
    let dom = named_domain(name, prm)?;
    let p_fix = fixed_point(prm);
    let a4 = prm.a.powi(4);
    let mut pts = dom.polygon.sample(n_samples, rng_seed);
    pts.extend_from_slice(dom.polygon.vertices());
    let defects: Vec<f64> = pts
        .par_iter()
        .map(|&p| {
            let q = psi_iter(prm, p, 4);
            q.dist(p_fix + (p - p_fix) * a4)
        })
        .collect();
    Ok(summarize(&defects))
}

/// `|Ψ(P) − P|`.
pub fn fixed_point_defect(prm: Params) -> Result<f64> {
    let p = fixed_point(prm);
    Ok(psi_eval(prm, p)?.dist(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prm(a: f64, b: f64) -> Params {
        Params::new(a, b).unwrap()
    }

    #[test]
    fn fixed_point_examples() {
        let fp = psi_fixed_point(prm(2.0, 1.0));
        assert!(fp.p.dist(Point::new(1.2, 0.4)) < 1e-15);
        let fp = psi_fixed_point(prm(1.25, 1.6));
        let want = Point::new(
            (2.0 + 2.0 * 1.5625 - 1.5625 * 1.6) / 2.5625,
            (2.0 - 2.5 + 1.5625 * 1.6) / 2.5625,
        );
        assert!(fp.p.dist(want) < 1e-15);
        // On ab = 2 the ordinate reduces to 2/(1 + a²).
        assert!((fp.p.y - 2.0 / 2.5625).abs() < 1e-15);
        assert!(fixed_point_defect(prm(1.3, 1.1)).unwrap() < 1e-15);
    }

    #[test]
    fn aux_constants() {
        let fp = psi_fixed_point(prm(1.3, 1.05));
        assert!((fp.x2 - 2.6 / 2.3).abs() < 1e-15);
        assert!((fp.d - (2.6 + 1.05 - 2.0) / 1.3).abs() < 1e-15);
    }

    #[test]
    fn construction_points_are_images() {
        let p = prm(1.3, 1.05);
        let pts = construction_points(p).unwrap();
        let g = |n: &str| lookup(&pts, n);
        for (from, to) in [
            ("C", "C1"),
            ("D", "D1"),
            ("E", "E1"),
            ("F", "F1"),
            ("F1", "F2"),
            ("F2", "F3"),
            ("K", "K1"),
            ("F-1", "F"),
            ("K-1", "K"),
        ] {
            let q = psi_eval(p, g(from)).unwrap();
            assert!(q.dist(g(to)) < 1e-12, "{from} -> {to}");
        }
        let p = prm(1.2, 1.6);
        let pts = construction_points(p).unwrap();
        let g = |n: &str| lookup(&pts, n);
        for (from, to) in [
            ("D1", "D2"),
            ("D2", "D3"),
            ("N", "N1"),
            ("D-1", "D"),
            ("N-1", "N"),
        ] {
            let q = psi_eval(p, g(from)).unwrap();
            assert!(q.dist(g(to)) < 1e-12, "{from} -> {to}");
        }
    }

    #[test]
    fn centered_triangles() {
        let d = named_domain(DomainName::Delta, prm(1.3, 1.1)).unwrap();
        let c = d.centered.unwrap();
        let v = c.vertices();
        assert!(v.contains(&Point::new(0.0, 0.0)));
        assert!(v.contains(&Point::new(-2.0, 0.0)));
        assert!(v.contains(&Point::new(-1.0, 1.0)));
    }

    #[test]
    fn rect_vertices() {
        let p = prm(1.3, 1.05);
        let r = named_domain(DomainName::RectP1, p).unwrap();
        let (a, b) = (1.3, 1.05);
        let f1 = Point::new(a * (2.0 + b - a * b) / 2.0, a * (-2.0 + b + a * b) / 2.0);
        assert!(r.polygon.vertices().iter().any(|v| v.dist(f1) < 1e-15));
        let p = prm(1.2, 1.6);
        let r = named_domain(DomainName::RectP2, p).unwrap();
        let d1 = Point::new(1.2 * (1.2 + 1.6 - 1.92), 1.2 * 0.6);
        assert!(r.polygon.vertices().iter().any(|v| v.dist(d1) < 1e-15));
    }

    #[test]
    fn region_mismatch() {
        assert!(matches!(
            named_domain(DomainName::RectP1, prm(1.2, 1.6)),
            Err(Error::RegionMismatch(_))
        ));
        assert!(matches!(
            conjugacy_residual(ResidualKind::PiQuad, prm(1.3, 1.05), 10, 0),
            Err(Error::RegionMismatch(_))
        ));
    }

    #[test]
    fn chart_round_trip_and_corners() {
        let p = prm(1.3, 1.05);
        let pts = construction_points(p).unwrap();
        let w = ChangeOfCoords::new(ChartKind::OmegaP1, p).unwrap();
        let a2 = 1.69;
        let s = a2 * (2.0 - a2);
        for (n, want) in [
            ("F1", Point::new(a2, a2)),
            ("F2", Point::new(a2, s)),
            ("F3", Point::new(s, s)),
            ("K1", Point::new(s, a2)),
        ] {
            assert!(w.forward(lookup(&pts, n)).dist(want) < 1e-12, "{n}");
        }
        for kind in [
            ChartKind::OmegaP1,
            ChartKind::TauP2,
            ChartKind::PhiCentered,
            ChartKind::PhiTildeDelta,
            ChartKind::PhiHatPi,
        ] {
            let c = ChangeOfCoords::new(kind, p).unwrap();
            let q = Point::new(0.7, 0.2);
            let r = change_coords(
                &c,
                change_coords(&c, q, Direction::Forward),
                Direction::Inverse,
            );
            assert!(r.dist(q) < 1e-12);
        }
    }

    #[test]
    fn phi_normalizes_distance_to_critical_line() {
        let p = prm(1.3, 1.1);
        let phi = ChangeOfCoords::new(ChartKind::PhiCentered, p).unwrap();
        let fp = fixed_point(p);
        assert!(phi.forward(fp).dist(Point::ORIGIN) < 1e-14);
        assert!((phi.forward(Point::new(1.0, 0.3)).x + 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let r = conjugacy_residual(ResidualKind::P1Square, prm(1.3, 1.05), 10_000, 1).unwrap();
        assert!(r.sup < 1e-10, "{r:?}");
        let r = conjugacy_residual(ResidualKind::PiQuad, prm(1.05, 1.38), 10_000, 1).unwrap();
        assert!(r.sup < 1e-10, "{r:?}");
    }

    #[test]
    fn invariance_examples() {
        let p = prm(1.3, 1.05);
        let r = named_domain(DomainName::RectP1, p).unwrap();
        assert!(invariance_check(p, &r, 1, 2000, 3).unwrap() < 1e-10);
        let p = prm(1.05, 1.38);
        let pi = named_domain(DomainName::Pi, p).unwrap();
        assert!(invariance_check(p, &pi, 4, 2000, 3).unwrap() < 1e-10);
        let (_, hi) = crate::regions::region_bounds(RegionId::PDelta, 1.05).unwrap();
        let p = prm(1.05, hi + 0.01);
        let d = named_domain(DomainName::Delta, p).unwrap();
        assert!(invariance_check(p, &d, 4, 2000, 3).unwrap() > 1e-3);
    }

    #[test]
    fn capture_examples() {
        let p = prm(1.3, 1.05);
        let r = named_domain(DomainName::RectP1, p).unwrap();
        assert_eq!(capture_check(p, &r, 200, 10_000, 5).unwrap(), 1.0);
        let inside = r.polygon.centroid();
        assert_eq!(first_entry(p, &r.polygon, inside, 10), Some(0));
    }

    #[test]
    fn homothecy_example() {
        let p = prm(1.05, 1.38);
        for name in [DomainName::Delta0, DomainName::Pi0] {
            let r = homothecy_residual(p, name, 1000, 2).unwrap();
            assert!(r.sup < 1e-10, "{name:?} {r:?}");
        }
    }
}
