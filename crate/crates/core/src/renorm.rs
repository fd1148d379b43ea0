//! Renormalization operators `H_Δ(a,b) = (a⁴, γ/a²)` and `H_Π(a,b) = (a⁴, γ/a)`,
//! their spectral data at `P* = (1, √2)`, fiber inversion, renormalization
//! depth, word trees and the cascade search along `γ₀`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::Mat2;
use crate::regions::{gamma0, in_closed_p, in_closed_p3, window_index, RegionId};

pub const MAX_TREE_DEPTH: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RenormOp {
    Delta,
    Pi,
}

impl RenormOp {
    /// Power of `a` dividing `γ`.
    fn k(self) -> i32 {
        match self {
            RenormOp::Delta => 2,
            RenormOp::Pi => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            RenormOp::Delta => 'Δ',
            RenormOp::Pi => 'Π',
        }
    }
}

impl fmt::Display for RenormOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RenormOp::Delta => "delta",
            RenormOp::Pi => "pi",
        })
    }
}

impl FromStr for RenormOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "delta" | "d" | "Δ" => Ok(RenormOp::Delta),
            "pi" | "p" | "π" => Ok(RenormOp::Pi),
            _ => Err(Error::InvalidSpec(format!("unknown operator {s}"))),
        }
    }
}

/// The fixed point `P* = (1, √2)`.
pub const FIXED_POINT: (f64, f64) = (1.0, SQRT_2);

/// `γ_{a,b} = (ab + b − 2)/(1 + a − ab)`.
pub fn gamma_coeff(a: f64, b: f64) -> Result<f64> {
    let m = 1.0 + a - a * b;
    if m.abs() < 1e-14 || !m.is_finite() {
        return Err(Error::SingularDenominator);
    }
    Ok((a * b + b - 2.0) / m)
}

/// The neighborhood `D` of the closure of `P` on which both operators are used.
pub fn in_neighborhood(a: f64, b: f64) -> bool {
    a > 0.999
        && a <= 2.001
        && (0.999..2.0).contains(&b)
        && a * b < 2.0 + 1e-9
        && (1.0 + a - a * b).abs() > 1e-9
}

fn check_neighborhood(a: f64, b: f64) -> Result<()> {
    if in_neighborhood(a, b) {
        Ok(())
    } else {
        Err(Error::OutsideNeighborhood { a, b })
    }
}

pub fn apply(op: RenormOp, a: f64, b: f64) -> Result<(f64, f64)> {
    check_neighborhood(a, b)?;
    let g = gamma_coeff(a, b)?;
    let a2 = a * a;
    let b1 = match op {
        RenormOp::Delta => g / a2,
        RenormOp::Pi => g / a,
    };
    Ok((a2 * a2, b1))
}

/// Analytic Jacobian of `op` at `(a, b)`.
pub fn jacobian(op: RenormOp, a: f64, b: f64) -> Result<Mat2> {
    check_neighborhood(a, b)?;
    let m = 1.0 + a - a * b;
    if m.abs() < 1e-14 {
        return Err(Error::SingularDenominator);
    }
    let n = a * b + b - 2.0;
    let k = op.k();
    let ak = a.powi(k);
    let dbb = (1.0 + a * a) / (ak * m * m);
    let dba =
        (b * ak * m - n * (k as f64 * a.powi(k - 1) * m + ak * (1.0 - b))) / (ak * ak * m * m);
    Ok(Mat2::new(4.0 * a * a * a, 0.0, dba, dbb))
}

/// Central-difference Jacobian with step `h`.
pub fn numeric_jacobian(op: RenormOp, a: f64, b: f64, h: f64) -> Result<Mat2> {
    let (pa, pb) = (apply(op, a + h, b)?, apply(op, a, b + h)?);
    let (ma, mb) = (apply(op, a - h, b)?, apply(op, a, b - h)?);
    let s = 0.5 / h;
    Ok(Mat2::new(
        (pa.0 - ma.0) * s,
        (pb.0 - mb.0) * s,
        (pa.1 - ma.1) * s,
        (pb.1 - mb.1) * s,
    ))
}

/// `det DH = 4a^{1+k'}(1+a²)/(1+a−ab)²` with `k' = 0` for `Δ`, `1` for `Π`.
pub fn jacobian_det(op: RenormOp, a: f64, b: f64) -> Result<f64> {
    check_neighborhood(a, b)?;
    let m = 1.0 + a - a * b;
    if m.abs() < 1e-14 {
        return Err(Error::SingularDenominator);
    }
    let p = match op {
        RenormOp::Delta => a,
        RenormOp::Pi => a * a,
    };
    Ok(4.0 * p * (1.0 + a * a) / (m * m))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralData {
    pub fixed_point: (f64, f64),
    pub jacobian: Mat2,
    /// `λ₁` along `v₁` and `λ₂` along `v₂ = (0, 1)`.
    pub eigenvalues: (f64, f64),
    pub eigenvectors: ((f64, f64), (f64, f64)),
}

pub fn spectral(op: RenormOp) -> SpectralData {
    let (a, b) = FIXED_POINT;
    let j = jacobian(op, a, b).expect("P* lies in the neighborhood");
    // Lower-triangular: the diagonal carries the spectrum.
    let l1 = j.m11;
    let l2 = j.m22;
    let v1 = (1.0, -j.m21 / (j.m22 - l1));
    SpectralData {
        fixed_point: (a, b),
        jacobian: j,
        eigenvalues: (l1, l2),
        eigenvectors: (v1, (0.0, 1.0)),
    }
}

/// Closed-form inverse of the fiber map `b ↦ apply(op, a, b).1`.
pub fn fiber_inverse_closed(op: RenormOp, a: f64, b_target: f64) -> f64 {
    let g = b_target * a.powi(op.k());
    (2.0 + g * (1.0 + a)) / (1.0 + a + g * a)
}

/// Finds `(a, b)` with `apply(op, a, b) = (a_target, b_target)` by bisection
/// on the increasing fiber map.
pub fn fiber_inverse(op: RenormOp, a_target: f64, b_target: f64) -> Result<(f64, f64)> {
    if !(a_target > 0.0 && a_target.is_finite() && b_target.is_finite()) {
        return Err(Error::Unreachable {
            a: a_target,
            b: b_target,
        });
    }
    let a = a_target.powf(0.25);
    let f = |b: f64| apply(op, a, b).map(|r| r.1);
    let mut lo = 1.0f64;
    let mut hi = (2.0 / a).min((1.0 + a - 1e-8) / a);
    let unreachable = Error::Unreachable {
        a: a_target,
        b: b_target,
    };
    let (mut flo, mut fhi) = match (f(lo), f(hi)) {
        (Ok(x), Ok(y)) => (x, y),
        _ => return Err(unreachable),
    };
    let tol = 1e-12 * b_target.abs().max(1.0);
    if b_target < flo - tol || b_target > fhi + tol {
        return Err(unreachable);
    }
    for _ in 0..60 {
        if hi - lo <= 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm < b_target {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let b = if fhi > flo {
        (lo + (b_target - flo) / (fhi - flo) * (hi - lo)).clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    };
    Ok((a, b))
}

/// Largest `n ≤ max_n` such that the first `n` points of the `op`-orbit of
/// `(a, b)` lie in the closure of `P3`.
pub fn renorm_depth(a: f64, b: f64, op: RenormOp, max_n: usize) -> usize {
    let mut z = (a, b);
    let mut n = 0;
    while n < max_n && in_closed_p3(z.0, z.1) {
        n += 1;
        match apply(op, z.0, z.1) {
            Ok(next) => z = next,
            Err(_) => break,
        }
    }
    n
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenormNode {
    pub word: String,
    pub depth: usize,
    pub params: Option<(f64, f64)>,
    pub valid: bool,
}

/// Every word over `{Δ, Π}` of length at most `depth`, in breadth-first order.
pub fn renorm_tree(a: f64, b: f64, depth: usize) -> Result<Vec<RenormNode>> {
    if depth > MAX_TREE_DEPTH {
        return Err(Error::DepthTooLarge(depth));
    }
    let mut nodes = vec![RenormNode {
        word: String::new(),
        depth: 0,
        params: Some((a, b)),
        valid: in_closed_p(a, b),
    }];
    let mut start = 0;
    for d in 1..=depth {
        let end = nodes.len();
        for i in start..end {
            for op in [RenormOp::Delta, RenormOp::Pi] {
                let parent = &nodes[i];
                let params = parent.params.and_then(|(pa, pb)| apply(op, pa, pb).ok());
                let valid = parent.valid
                    && parent.params.is_some_and(|(pa, pb)| in_closed_p3(pa, pb))
                    && params.is_some();
                let mut word = parent.word.clone();
                word.push(op.symbol());
                nodes.push(RenormNode {
                    word,
                    depth: d,
                    params,
                    valid,
                });
            }
        }
        start = end;
    }
    Ok(nodes)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeResult {
    pub n: u32,
    pub op: RenormOp,
    pub t_interval: (f64, f64),
    /// Applications of the operator until the orbit leaves `P3`.
    pub k: usize,
    pub terminal_region: RegionId,
    pub predicted_count: u64,
    pub grid_points: usize,
}

/// Outcome at one `t`: `(k, m)` if the first iterate outside `P3` lies in
/// the window-`m` region with `2^{m−1} ≥ 2^n`.
pub fn cascade_probe(t: f64, n: u32, op: RenormOp) -> Option<(usize, u32)> {
    let (mut a, mut b) = gamma0(t).ok()?;
    // P* is fixed; rounding alone would eventually push it out.
    if (a - FIXED_POINT.0).abs() < 1e-12 && (b - FIXED_POINT.1).abs() < 1e-12 {
        return None;
    }
    let mut k = 0;
    while in_closed_p3(a, b) {
        if k >= 64 {
            return None;
        }
        (a, b) = apply(op, a, b).ok()?;
        k += 1;
    }
    let m = window_index(a)?;
    if m < n + 1 {
        return None;
    }
    let region = match op {
        RenormOp::Delta => RegionId::P1n(m),
        RenormOp::Pi => RegionId::P2n(m),
    };
    crate::regions::in_region(region, a, b).then_some((k, m))
}

pub fn cascade_search(n: u32, t_grid: usize, op: RenormOp) -> Result<CascadeResult> {
    if n == 0 || n > 62 {
        return Err(Error::InvalidSpec(format!("n = {n} must be in 1..=62")));
    }
    if t_grid < 1000 {
        return Err(Error::InvalidSpec(format!(
            "t grid of {t_grid} points is below 1000"
        )));
    }
    let lo = FRAC_1_SQRT_2;
    let hi = 2f64.powf(-0.4);
    let h = (hi - lo) / t_grid as f64;
    let t_at = |i: usize| if i == t_grid { hi } else { lo + h * i as f64 };
    let hits: Vec<Option<(usize, u32)>> = (1..=t_grid)
        .into_par_iter()
        .map(|i| cascade_probe(t_at(i), n, op))
        .collect();

    // Widest run of consecutive grid points sharing (k, m).
    let mut best: Option<(usize, usize, (usize, u32))> = None;
    let mut i = 0;
    while i < hits.len() {
        let Some(key) = hits[i] else {
            i += 1;
            continue;
        };
        let mut j = i;
        while j + 1 < hits.len() && hits[j + 1] == Some(key) {
            j += 1;
        }
        if best.is_none_or(|(s, e, _)| j - i > e - s) {
            best = Some((i, j, key));
        }
        i = j + 1;
    }
    let (s, e, (k, m)) =
        best.ok_or_else(|| Error::NotFound(format!("no cascade interval for n = {n}")))?;
    let (mut t_lo, mut t_hi) = (t_at(s + 1), t_at(e + 1));
    if s == e {
        t_lo = (t_lo - 0.5 * h).max(lo + f64::EPSILON);
        t_hi = (t_hi + 0.5 * h).min(hi);
    }
    let terminal_region = match op {
        RenormOp::Delta => RegionId::P1n(m),
        RenormOp::Pi => RegionId::P2n(m),
    };
    Ok(CascadeResult {
        n,
        op,
        t_interval: (t_lo, t_hi),
        k,
        terminal_region,
        predicted_count: 1u64 << (m - 1),
        grid_points: e - s + 1,
    })
}
