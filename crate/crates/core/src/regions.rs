//! Parameter regions of the baker family as closed-form fibers over `a`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionId {
    P,
    P1,
    P2,
    PDelta,
    P3,
    P1n(u32),
    P2n(u32),
    HDeltaImageP3,
    HPiImageP3,
}

impl RegionId {
    pub const FIXED: [RegionId; 7] = [
        RegionId::P,
        RegionId::P1,
        RegionId::P2,
        RegionId::PDelta,
        RegionId::P3,
        RegionId::HDeltaImageP3,
        RegionId::HPiImageP3,
    ];
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionId::P => write!(f, "P"),
            RegionId::P1 => write!(f, "P1"),
            RegionId::P2 => write!(f, "P2"),
            RegionId::PDelta => write!(f, "PDelta"),
            RegionId::P3 => write!(f, "P3"),
            RegionId::P1n(n) => write!(f, "P1n({n})"),
            RegionId::P2n(n) => write!(f, "P2n({n})"),
            RegionId::HDeltaImageP3 => write!(f, "HDeltaImageP3"),
            RegionId::HPiImageP3 => write!(f, "HPiImageP3"),
        }
    }
}

impl FromStr for RegionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let indexed = |prefix: &str| -> Option<u32> {
            s.strip_prefix(prefix)?
                .strip_prefix('(')?
                .strip_suffix(')')?
                .parse()
                .ok()
        };
        let r = match s {
            "P" => RegionId::P,
            "P1" => RegionId::P1,
            "P2" => RegionId::P2,
            "PDelta" => RegionId::PDelta,
            "P3" => RegionId::P3,
            "HDeltaImageP3" => RegionId::HDeltaImageP3,
            "HPiImageP3" => RegionId::HPiImageP3,
            _ => {
                if let Some(n) = indexed("P1n") {
                    RegionId::P1n(n)
                } else if let Some(n) = indexed("P2n") {
                    RegionId::P2n(n)
                } else {
                    return Err(Error::UnsupportedRegion(s.to_string()));
                }
            }
        };
        Ok(r)
    }
}

/// The `n` with `a ∈ (2^{1/2^{n+1}}, 2^{1/2^n}]`, for `1 < a ≤ √2`.
pub fn window_index(a: f64) -> Option<u32> {
    if !(a > 1.0 && a <= SQRT_2) {
        return None;
    }
    let mut n = (-(a.log2()).log2()).floor().clamp(1.0, 62.0) as u32;
    // Guard the floor against rounding at window edges.
    for _ in 0..4 {
        if in_window(a, n) {
            return Some(n);
        }
        if a > window_edge(n) {
            n = n.checked_sub(1).filter(|&m| m >= 1)?;
        } else {
            n += 1;
        }
    }
    None
}

fn window_edge(n: u32) -> f64 {
    2f64.powf(0.5f64.powi(n as i32))
}

fn in_window(a: f64, n: u32) -> bool {
    a > window_edge(n + 1) && a <= window_edge(n)
}

fn p3_lower(a: f64) -> f64 {
    (2.0 + a * a + a * a * a) / (1.0 + a + a * a * a)
}

/// Unclamped fiber over any `a > 0`.
fn raw_bounds(r: RegionId, a: f64) -> (f64, f64) {
    let a2 = a * a;
    let a3 = a2 * a;
    match r {
        RegionId::P => (1.0, 2.0 / a),
        RegionId::P1 => (1.0, (2.0 + 2.0 * a) / (2.0 * a + a2)),
        RegionId::P2 => ((2.0 + a) / (1.0 + a), 2.0 / a),
        RegionId::PDelta => (p3_lower(a), 2.0 * (1.0 + a + a2) / (a * (2.0 + a + a2))),
        RegionId::P3 => (p3_lower(a), 2.0 * (1.0 + a + a3) / (a * (2.0 + a2 + a3))),
        RegionId::HDeltaImageP3 => (1.0, 2.0 * a.powf(-1.25)),
        RegionId::HPiImageP3 => (a.powf(0.25), 2.0 / a),
        RegionId::P1n(n) => {
            if n >= 1 && in_window(a, n) {
                raw_bounds(RegionId::P1, a)
            } else {
                (1.0, 0.0)
            }
        }
        RegionId::P2n(n) => {
            if n >= 1 && in_window(a, n) {
                raw_bounds(RegionId::P2, a)
            } else {
                (1.0, 0.0)
            }
        }
    }
}

/// Fiber of `r` over `a`, clamped to `b ≥ 1`, `ab ≤ 2`; empty when lower > upper.
pub fn region_bounds(r: RegionId, a: f64) -> Result<(f64, f64)> {
    if !(a > 1.0 && a <= 2.0) {
        return Err(Error::OutOfRange {
            what: "a",
            value: a,
        });
    }
    Ok(clamped(r, a))
}

fn clamped(r: RegionId, a: f64) -> (f64, f64) {
    let (lo, hi) = raw_bounds(r, a);
    (lo.max(1.0), hi.min(2.0 / a))
}

pub fn in_region(r: RegionId, a: f64, b: f64) -> bool {
    match region_bounds(r, a) {
        Ok((lo, hi)) => b.is_finite() && lo <= b && b <= hi,
        Err(_) => false,
    }
}

/// Membership in the closure of `P3`, which also admits `a = 1`.
pub fn in_closed_p3(a: f64, b: f64) -> bool {
    if !(1.0..=2.0).contains(&a) || !b.is_finite() {
        return false;
    }
    let (lo, hi) = clamped(RegionId::P3, a);
    lo <= b && b <= hi
}

/// Membership in the closure of `P`.
pub fn in_closed_p(a: f64, b: f64) -> bool {
    (1.0..=2.0).contains(&a) && (1.0..=2.0).contains(&b) && a * b <= 2.0
}

/// The curve `t ↦ (16t⁸, 1/(2t³))` for `t ∈ [1/√2, 2^{−2/5}]`.
pub fn gamma0(t: f64) -> Result<(f64, f64)> {
    let lo = FRAC_1_SQRT_2;
    let hi = 2f64.powf(-0.4);
    if !(t >= lo - 1e-15 && t <= hi + 1e-15) {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
        });
    }
    let t2 = t * t;
    let t4 = t2 * t2;
    Ok((16.0 * t4 * t4, 1.0 / (2.0 * t2 * t)))
}

/// `γ₀` as a graph over `a`: `b = √2·a^{−3/8}`.
pub fn gamma0_graph(a: f64) -> f64 {
    SQRT_2 * a.powf(-0.375)
}

/// Number of coexisting attractors predicted for `P1n(n)` and `P2n(n)`.
pub fn attractor_count_prediction(r: RegionId) -> Result<u64> {
    match r {
        RegionId::P1n(n) | RegionId::P2n(n) if (1..=63).contains(&n) => Ok(1u64 << (n - 1)),
        other => Err(Error::UnsupportedRegion(other.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionReport {
    pub a: f64,
    pub b: f64,
    pub memberships: BTreeMap<String, bool>,
    pub bounds: BTreeMap<String, (f64, f64)>,
    /// Window index `n` of `a`, shared by `P1n` and `P2n`.
    pub window: Option<u32>,
    pub p1n: Option<u32>,
    pub p2n: Option<u32>,
    /// Regions for which `b` sits exactly on a fiber bound.
    pub on_boundary: Vec<String>,
}

pub fn region_report(a: f64, b: f64) -> RegionReport {
    let window = window_index(a);
    let mut ids: Vec<RegionId> = RegionId::FIXED.to_vec();
    if let Some(n) = window {
        ids.push(RegionId::P1n(n));
        ids.push(RegionId::P2n(n));
    }
    let mut memberships = BTreeMap::new();
    let mut bounds = BTreeMap::new();
    let mut on_boundary = Vec::new();
    for r in ids {
        let member = in_region(r, a, b);
        memberships.insert(r.to_string(), member);
        if let Ok((lo, hi)) = region_bounds(r, a) {
            if lo <= hi && (b == lo || b == hi) {
                on_boundary.push(r.to_string());
            }
            bounds.insert(r.to_string(), (lo, hi));
        }
    }
    let p1n = window.filter(|&n| in_region(RegionId::P1n(n), a, b));
    let p2n = window.filter(|&n| in_region(RegionId::P2n(n), a, b));
    RegionReport {
        a,
        b,
        memberships,
        bounds,
        window,
        p1n,
        p2n,
        on_boundary,
    }
}
