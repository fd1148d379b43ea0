//! Orbit simulation, Lyapunov exponents, grid-occupancy attractor census,
//! mixing probes and the `Λ_t⁸` versus `Ψ` residual study.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conjugacy::{named_domain, DomainName};
use crate::error::{Error, Result};
use crate::geometry::{Point, PolygonDomain};
use crate::maps::{psi_iter, LambdaParam, Params, PiecewiseMap};
use crate::regions::gamma0;

/// Snap-in tolerance along orbits.
pub const ORBIT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSpec {
    pub map: PiecewiseMap,
    pub x0: Point,
    pub burn_in: usize,
    pub length: usize,
}

impl OrbitSpec {
    pub fn new(map: PiecewiseMap, x0: Point, burn_in: usize, length: usize) -> Self {
        Self {
            map,
            x0,
            burn_in,
            length,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::InvalidSpec("orbit length must be at least 1".into()));
        }
        if !self.map.domain().contains(self.x0, ORBIT_TOL) {
            return Err(Error::OutOfDomain {
                x: self.x0.x,
                y: self.x0.y,
            });
        }
        Ok(())
    }
}

/// Iterator over `f^{burn_in+1}(x0), …, f^{burn_in+length}(x0)`.
pub struct Orbit<'a> {
    map: &'a PiecewiseMap,
    current: Point,
    remaining: usize,
    failed: bool,
}

impl Iterator for Orbit<'_> {
    type Item = Result<Point>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 || self.failed {
            return None;
        }
        self.remaining -= 1;
        match self.map.step(self.current, ORBIT_TOL) {
            Ok((q, _)) => {
                self.current = q;
                Some(Ok(q))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

pub fn run_orbit(spec: &OrbitSpec) -> Result<Orbit<'_>> {
    spec.validate()?;
    let mut p = spec.x0;
    for _ in 0..spec.burn_in {
        p = spec.map.step(p, ORBIT_TOL)?.0;
    }
    Ok(Orbit {
        map: &spec.map,
        current: p,
        remaining: spec.length,
        failed: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Moves a point lying exactly on a critical line by `1e−13`, along the first
/// of a few oblique directions that leaves every critical line and the domain
/// intact.
fn nudge(map: &PiecewiseMap, p: Point) -> Result<Point> {
    let domain = map.domain();
    for (dx, dy) in [(-0.8, 0.6), (0.8, 0.6), (-0.6, -0.8), (0.6, -0.8)] {
        let q = p + Point::new(dx, dy) * 1e-13;
        if map.critical_distance(q) > 0.0 && domain.contains(q, 0.0) {
            log::debug!("orbit hit a critical line at ({}, {}); nudged", p.x, p.y);
            return Ok(q);
        }
    }
    Err(Error::DegenerateOrbit)
}

/// Both exponents by QR accumulation of the branch differentials.
pub fn lyapunov(spec: &OrbitSpec) -> Result<LyapunovEstimate> {
    if spec.length < 1000 {
        return Err(Error::InvalidSpec(
            "Lyapunov estimates need at least 1000 iterates".into(),
        ));
    }
    spec.validate()?;
    let map = &spec.map;
    let mut p = spec.x0;
    for _ in 0..spec.burn_in {
        p = map.step(p, ORBIT_TOL)?.0;
    }
    let (mut q1, mut q2) = (Point::new(1.0, 0.0), Point::new(0.0, 1.0));
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for _ in 0..spec.length {
        if map.critical_distance(p) == 0.0 {
            p = nudge(map, p)?;
        }
        let (next, br) = map.step(p, ORBIT_TOL)?;
        let m = map.differential(br)?;
        let c1 = m.apply(q1);
        let c2 = m.apply(q2);
        let r11 = c1.norm();
        let u1 = c1 * (1.0 / r11);
        let r12 = u1.dot(c2);
        let v = c2 - u1 * r12;
        let r22 = v.norm();
        s1 += r11.ln();
        s2 += r22.ln();
        q1 = u1;
        q2 = v * (1.0 / r22);
        p = next;
    }
    let n = spec.length as f64;
    let (l1, l2) = (s1 / n, s2 / n);
    Ok(if l1 >= l2 {
        LyapunovEstimate {
            lambda1: l1,
            lambda2: l2,
        }
    } else {
        LyapunovEstimate {
            lambda1: l2,
            lambda2: l1,
        }
    })
}

/// Axis-aligned box `(xmin, xmax, ymin, ymax)`.
pub type Bounds = (f64, f64, f64, f64);

/// Square occupancy bitset over a box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyGrid {
    pub bounds: Bounds,
    pub resolution: usize,
    #[serde(skip)]
    bits: Vec<u64>,
    pub occupied: usize,
}

impl OccupancyGrid {
    pub fn new(bounds: Bounds, resolution: usize) -> Result<Self> {
        if resolution < 16 {
            return Err(Error::InvalidSpec(format!(
                "resolution {resolution} is below 16"
            )));
        }
        let (x0, x1, y0, y1) = bounds;
        if !(x1 > x0 && y1 > y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSpec("grid bounds are empty".into()));
        }
        Ok(Self {
            bounds,
            resolution,
            bits: vec![0; (resolution * resolution).div_ceil(64)],
            occupied: 0,
        })
    }

    /// Every cell occupied.
    pub fn full(bounds: Bounds, resolution: usize) -> Result<Self> {
        let mut g = Self::new(bounds, resolution)?;
        for c in 0..resolution * resolution {
            g.set_cell(c);
        }
        Ok(g)
    }

    /// Cell index of `p`, clamping points on or just past the box edge.
    #[inline]
    pub fn cell_of(&self, p: Point) -> Option<usize> {
        let (x0, x1, y0, y1) = self.bounds;
        let r = self.resolution as f64;
        let fx = (p.x - x0) / (x1 - x0) * r;
        let fy = (p.y - y0) / (y1 - y0) * r;
        if !(fx > -1e-6 * r && fx < r * (1.0 + 1e-6) && fy > -1e-6 * r && fy < r * (1.0 + 1e-6)) {
            return None;
        }
        let i = (fx as usize).min(self.resolution - 1);
        let j = (fy as usize).min(self.resolution - 1);
        Some(j * self.resolution + i)
    }

    pub fn cell_center(&self, c: usize) -> Point {
        let (x0, x1, y0, y1) = self.bounds;
        let r = self.resolution as f64;
        let (i, j) = (c % self.resolution, c / self.resolution);
        Point::new(
            x0 + (i as f64 + 0.5) / r * (x1 - x0),
            y0 + (j as f64 + 0.5) / r * (y1 - y0),
        )
    }

    #[inline]
    pub fn is_set(&self, c: usize) -> bool {
        self.bits[c >> 6] & (1 << (c & 63)) != 0
    }

    #[inline]
    pub fn set_cell(&mut self, c: usize) {
        let w = &mut self.bits[c >> 6];
        let m = 1u64 << (c & 63);
        if *w & m == 0 {
            *w |= m;
            self.occupied += 1;
        }
    }

    pub fn mark(&mut self, p: Point) {
        if let Some(c) = self.cell_of(p) {
            self.set_cell(c);
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &bits)| {
            let mut b = bits;
            std::iter::from_fn(move || {
                if b == 0 {
                    return None;
                }
                let t = b.trailing_zeros() as usize;
                b &= b - 1;
                Some(w * 64 + t)
            })
        })
    }

    pub fn union_with(&mut self, other: &OccupancyGrid) {
        for c in other.cells() {
            self.set_cell(c);
        }
    }

    fn neighbors(&self, c: usize) -> impl Iterator<Item = usize> {
        let r = self.resolution as isize;
        let (i, j) = ((c as isize) % r, (c as isize) / r);
        (-1..=1).flat_map(move |dj| {
            (-1..=1).filter_map(move |di| {
                let (ni, nj) = (i + di, j + dj);
                (ni >= 0 && nj >= 0 && ni < r && nj < r).then_some((nj * r + ni) as usize)
            })
        })
    }

    /// 8-connected component label per occupied cell, and the label count.
    pub fn components(&self) -> (Vec<(usize, usize)>, usize) {
        let mut label = vec![usize::MAX; self.resolution * self.resolution];
        let mut out = Vec::with_capacity(self.occupied);
        let mut count = 0;
        let mut queue = VecDeque::new();
        for c in self.cells() {
            if label[c] != usize::MAX {
                continue;
            }
            label[c] = count;
            queue.push_back(c);
            while let Some(u) = queue.pop_front() {
                out.push((u, count));
                for v in self.neighbors(u) {
                    if self.is_set(v) && label[v] == usize::MAX {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        out.sort_unstable();
        (out, count)
    }

    /// Number of 8-connected components.
    pub fn pieces(&self) -> usize {
        self.components().1
    }

    /// True iff some occupied cell is within one cell of `p`'s cell.
    pub fn near(&self, p: Point) -> bool {
        match self.cell_of(p) {
            Some(c) => self.neighbors(c).any(|n| self.is_set(n)),
            None => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CensusConfig {
    pub n_seeds: usize,
    pub orbit_len: usize,
    pub burn_in: usize,
    pub resolution: usize,
    pub rng_seed: u64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        Self {
            n_seeds: 64,
            orbit_len: 1_000_000,
            burn_in: 10_000,
            resolution: 512,
            rng_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Attractor {
    pub occupancy: OccupancyGrid,
    pub pieces: usize,
    pub seed_count: usize,
    /// Indices of the seeds in this basin sample.
    pub seeds: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttractorCensus {
    pub map: String,
    pub bounds: Bounds,
    pub resolution: usize,
    pub total_seeds: usize,
    pub seed_points: Vec<Point>,
    pub attractors: Vec<Attractor>,
    pub distinct_count: usize,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Clusters seeds by overlap of their post-burn-in occupancy (after a one
/// cell dilation) and counts 8-connected pieces per cluster.
///
/// The grid box is the bounding box of all recorded orbit points, padded by
/// one cell, so small attractors are resolved at the full grid resolution.
pub fn attractor_census(map: &PiecewiseMap, cfg: &CensusConfig) -> Result<AttractorCensus> {
    if cfg.n_seeds < 8 {
        return Err(Error::InvalidSpec("census needs at least 8 seeds".into()));
    }
    if cfg.orbit_len < 100_000 {
        return Err(Error::InvalidSpec(
            "census needs orbits of at least 100000 iterates".into(),
        ));
    }
    if cfg.resolution < 16 {
        return Err(Error::InvalidSpec("resolution must be at least 16".into()));
    }
    let seeds = map.sample_seeds(cfg.n_seeds, cfg.rng_seed);
    let boxes: Vec<Bounds> = seeds
        .par_iter()
        .map(|&x0| -> Result<Bounds> {
            let spec = OrbitSpec::new(map.clone(), x0, cfg.burn_in, cfg.orbit_len);
            let mut b = (
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
            );
            for p in run_orbit(&spec)? {
                let p = p?;
                b = (b.0.min(p.x), b.1.max(p.x), b.2.min(p.y), b.3.max(p.y));
            }
            Ok(b)
        })
        .collect::<Result<_>>()?;
    let mut bounds = boxes.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |a, b| (a.0.min(b.0), a.1.max(b.1), a.2.min(b.2), a.3.max(b.3)),
    );
    // Flat extents (tent maps carry a constant ordinate) get a unit height.
    for (lo, hi) in [
        (&mut bounds.0, &mut bounds.1),
        (&mut bounds.2, &mut bounds.3),
    ] {
        if *hi - *lo < 1e-9 {
            *lo -= 0.5;
            *hi += 0.5;
        }
        let pad = (*hi - *lo) / (cfg.resolution as f64 - 2.0);
        *lo -= pad;
        *hi += pad;
    }

    let grids: Vec<OccupancyGrid> = seeds
        .par_iter()
        .map(|&x0| -> Result<OccupancyGrid> {
            let spec = OrbitSpec::new(map.clone(), x0, cfg.burn_in, cfg.orbit_len);
            let mut g = OccupancyGrid::new(bounds, cfg.resolution)?;
            for p in run_orbit(&spec)? {
                g.mark(p?);
            }
            Ok(g)
        })
        .collect::<Result<_>>()?;

    let n = seeds.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut owner = vec![u32::MAX; cfg.resolution * cfg.resolution];
    for (i, g) in grids.iter().enumerate() {
        for c in g.cells() {
            for nb in g.neighbors(c) {
                let o = owner[nb];
                if o != u32::MAX {
                    let (ri, ro) = (find(&mut parent, i), find(&mut parent, o as usize));
                    if ri != ro {
                        parent[ri.max(ro)] = ri.min(ro);
                    }
                }
            }
        }
        for c in g.cells() {
            owner[c] = i as u32;
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => members[k].push(i),
            None => {
                roots.push(r);
                members.push(vec![i]);
            }
        }
    }
    let attractors: Vec<Attractor> = members
        .into_iter()
        .map(|seeds_in| {
            let mut occ = OccupancyGrid::new(bounds, cfg.resolution).expect("bounds checked");
            for &s in &seeds_in {
                occ.union_with(&grids[s]);
            }
            Attractor {
                pieces: occ.pieces(),
                seed_count: seeds_in.len(),
                seeds: seeds_in,
                occupancy: occ,
            }
        })
        .collect();
    Ok(AttractorCensus {
        map: map.name().to_string(),
        bounds,
        resolution: cfg.resolution,
        total_seeds: n,
        seed_points: seeds,
        distinct_count: attractors.len(),
        attractors,
    })
}

/// For each piece, the pieces hit by the images of its cell centers (each
/// image matched within one cell).
pub fn piece_transitions(map: &PiecewiseMap, grid: &OccupancyGrid) -> Result<Vec<Vec<usize>>> {
    let (labels, count) = grid.components();
    let label_of = |c: usize| {
        labels
            .binary_search_by_key(&c, |&(cell, _)| cell)
            .ok()
            .map(|i| labels[i].1)
    };
    let mut out = vec![Vec::new(); count];
    for &(c, l) in &labels {
        let q = map.step(grid.cell_center(c), ORBIT_TOL)?.0;
        if let Some(qc) = grid.cell_of(q) {
            for nb in grid.neighbors(qc) {
                if let Some(t) = label_of(nb) {
                    if !out[l].contains(&t) {
                        out[l].push(t);
                    }
                }
            }
        }
    }
    for v in &mut out {
        v.sort_unstable();
    }
    Ok(out)
}

/// Fraction of occupied cells of `attractor_grid` visited, up to and
/// including step `steps`, by the orbits of 1000 points of a disc.
pub fn mixing_probe(
    map: &PiecewiseMap,
    attractor_grid: &OccupancyGrid,
    disc_center: Point,
    disc_radius: f64,
    steps: usize,
    rng_seed: u64,
) -> Result<f64> {
    if attractor_grid.occupied == 0 {
        return Err(Error::EmptyAttractor);
    }
    if disc_radius.is_nan() || disc_radius <= 0.0 {
        return Err(Error::InvalidSpec("disc radius must be positive".into()));
    }
    let domain = map.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut pts = Vec::with_capacity(1000);
    let mut attempts = 0usize;
    while pts.len() < 1000 {
        attempts += 1;
        if attempts > 1_000_000 {
            return Err(Error::InvalidSpec("disc misses the map domain".into()));
        }
        let (dx, dy): (f64, f64) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if dx * dx + dy * dy > 1.0 {
            continue;
        }
        let p = disc_center + Point::new(dx, dy) * disc_radius;
        if domain.contains(p, 0.0) {
            pts.push(p);
        }
    }
    let mut hit = OccupancyGrid::new(attractor_grid.bounds, attractor_grid.resolution)?;
    for p0 in pts {
        let mut p = p0;
        for s in 0..=steps {
            if let Some(c) = attractor_grid.cell_of(p) {
                if attractor_grid.is_set(c) {
                    hit.set_cell(c);
                }
            }
            if s < steps {
                p = map.step(p, ORBIT_TOL)?.0;
            }
        }
    }
    Ok(hit.occupied as f64 / attractor_grid.occupied as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaPsiRecord {
    pub domain: String,
    pub sup: f64,
    pub mean: f64,
    pub domain_used: PolygonDomain,
}

/// `|Λ_t⁸(p) − Ψ_{16t⁸, 1/(2t³)}(p)|` statistics on `𝒯` and on every
/// invariant domain defined at those parameters.
pub fn lambda_psi_residual(
    t: f64,
    n_samples: usize,
    rng_seed: u64,
) -> Result<Vec<LambdaPsiRecord>> {
    if n_samples == 0 {
        return Err(Error::InvalidSpec("n_samples must be positive".into()));
    }
    let (a, b) = gamma0(t)?;
    let lam = PiecewiseMap::Lambda(LambdaParam::new(t)?);
    // Rounding can put γ₀'s end point a hair past ab = 2.
    let prm = Params {
        a: a.clamp(1.0, 2.0),
        b: b.min(2.0 / a.max(1.0)).max(1.0),
    };
    let mut candidates = vec![("T".to_string(), PolygonDomain::standard_triangle())];
    if let Ok(prm_strict) = Params::new(prm.a, prm.b) {
        for name in [
            DomainName::RectP1,
            DomainName::RectP2,
            DomainName::Delta,
            DomainName::Pi,
        ] {
            if let Ok(d) = named_domain(name, prm_strict) {
                candidates.push((format!("{name:?}"), d.polygon));
            }
        }
    }
    let mut out = Vec::new();
    for (name, poly) in candidates {
        let pts = poly.sample(n_samples, rng_seed);
        let defects: Vec<f64> = pts
            .par_iter()
            .map(|&p| -> Result<f64> {
                let mut q = p;
                for _ in 0..8 {
                    q = lam.step(q, ORBIT_TOL)?.0;
                }
                Ok(q.dist(psi_iter(prm, p, 1)))
            })
            .collect::<Result<_>>()?;
        let sup = defects.iter().copied().fold(0.0, f64::max);
        let mean = defects.iter().sum::<f64>() / defects.len() as f64;
        out.push(LambdaPsiRecord {
            domain: name,
            sup,
            mean,
            domain_used: poly,
        });
    }
    Ok(out)
}
