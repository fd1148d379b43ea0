use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::path::Path;

use anyhow::{anyhow, Result};
use ebm_core::conjugacy::{
    conjugacy_residual, invariance_check, named_domain, DomainName, ResidualKind,
};
use ebm_core::dynamics::{attractor_census, lyapunov, AttractorCensus, CensusConfig, OrbitSpec};
use ebm_core::maps::{psi_branch_formula, LambdaParam, Params, PiecewiseMap, TentParam};
use ebm_core::regions::{
    attractor_count_prediction, in_region, region_bounds, region_report, window_index, RegionId,
};
use ebm_core::renorm::{
    cascade_search, numeric_jacobian, renorm_depth, renorm_tree, RenormNode, RenormOp,
};
use ebm_core::{BranchId, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::*;
use crate::output::{fmt_f64, write_csv, write_json};

/// Bad or missing flag values; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// A verification check failed; exit code 4.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn json_only(cli: &Cli) -> Result<()> {
    if cli.format == Some(Format::Csv) {
        return Err(usage("this command only emits JSON"));
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Region(a) => {
            json_only(cli)?;
            region(a, out)
        }
        Command::Attractors(a) => {
            json_only(cli)?;
            attractors(a, cli.seed, out)
        }
        Command::Renorm(a) => {
            json_only(cli)?;
            renorm(a, out)
        }
        Command::Cascade(a) => {
            json_only(cli)?;
            let r = cascade_search(a.n, a.tsteps, a.op.into())?;
            write_json("cascade", r, out)
        }
        Command::Verify(a) => {
            json_only(cli)?;
            verify(a, cli.seed, out)
        }
        Command::Sweep(a) => sweep(a, cli.seed, cli.format.unwrap_or(Format::Csv), out),
    }
}

fn region(a: &RegionArgs, out: Option<&Path>) -> Result<()> {
    if !(a.a.is_finite() && a.b.is_finite()) {
        return Err(usage("a and b must be finite"));
    }
    write_json("region", region_report(a.a, a.b), out)
}

#[derive(Serialize)]
struct AttractorsOut {
    map: &'static str,
    parameters: BTreeMap<&'static str, f64>,
    config: CensusConfig,
    predicted_count: Option<u64>,
    census: AttractorCensus,
}

fn need(v: Option<f64>, flag: &str, map: &str) -> Result<f64> {
    v.ok_or_else(|| usage(format!("--{flag} is required for --map {map}")))
}

/// Count from the window of `μ` for the tent product.
fn gamma_prediction(mu: f64) -> Option<u64> {
    if mu > SQRT_2 && mu <= 2.0 {
        Some(1)
    } else {
        window_index(mu).map(|n| 1u64 << n)
    }
}

fn attractors(a: &AttractorArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let mut parameters = BTreeMap::new();
    let (map, predicted) = match a.map {
        MapKind::Psi => {
            let (pa, pb) = (need(a.a, "a", "psi")?, need(a.b, "b", "psi")?);
            parameters.insert("a", pa);
            parameters.insert("b", pb);
            let rep = region_report(pa, pb);
            let predicted = match (rep.p1n, rep.p2n) {
                (Some(n), _) => attractor_count_prediction(RegionId::P1n(n)).ok(),
                (_, Some(n)) => attractor_count_prediction(RegionId::P2n(n)).ok(),
                _ => None,
            };
            (PiecewiseMap::Psi(Params::new(pa, pb)?), predicted)
        }
        MapKind::Gamma => {
            let mu = need(a.mu, "mu", "gamma")?;
            parameters.insert("mu", mu);
            (
                PiecewiseMap::TentProduct(TentParam::new(mu)?),
                gamma_prediction(mu),
            )
        }
        MapKind::Tent => {
            let mu = need(a.mu, "mu", "tent")?;
            parameters.insert("mu", mu);
            (PiecewiseMap::Tent(TentParam::new(mu)?), None)
        }
        MapKind::Lambda => {
            let t = need(a.t, "t", "lambda")?;
            parameters.insert("t", t);
            (PiecewiseMap::Lambda(LambdaParam::new(t)?), None)
        }
    };
    let config = CensusConfig {
        n_seeds: a.census.seeds,
        orbit_len: a.census.len,
        burn_in: a.census.burn,
        resolution: a.census.grid,
        rng_seed: seed,
    };
    log::info!("census of {} with {:?}", map.name(), config);
    let census = attractor_census(&map, &config)?;
    if let Some(path) = &a.cells {
        let mut rows = Vec::new();
        for (i, att) in census.attractors.iter().enumerate() {
            for c in att.occupancy.cells() {
                let p = att.occupancy.cell_center(c);
                rows.push(vec![
                    i.to_string(),
                    c.to_string(),
                    fmt_f64(p.x),
                    fmt_f64(p.y),
                ]);
            }
        }
        write_csv(&["attractor", "cell", "x", "y"], &rows, Some(path))?;
    }
    write_json(
        "attractors",
        AttractorsOut {
            map: map.name(),
            parameters,
            config,
            predicted_count: predicted,
            census,
        },
        out,
    )
}

#[derive(Serialize)]
struct RenormOut {
    a: f64,
    b: f64,
    depth: usize,
    op: Option<RenormOp>,
    /// Operator applications that stay in the closure of `P3`.
    chain_depth: Option<usize>,
    nodes: Vec<RenormNode>,
}

fn renorm(a: &RenormArgs, out: Option<&Path>) -> Result<()> {
    let mut nodes = renorm_tree(a.a, a.b, a.depth)?;
    let op: Option<RenormOp> = a.op.map(Into::into);
    let mut chain_depth = None;
    if let Some(op) = op {
        let s = op.symbol();
        nodes.retain(|n| n.word.chars().all(|c| c == s));
        chain_depth = Some(renorm_depth(a.a, a.b, op, 64));
    }
    write_json(
        "renorm",
        RenormOut {
            a: a.a,
            b: a.b,
            depth: a.depth,
            op,
            chain_depth,
            nodes,
        },
        out,
    )
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    /// Passes iff `value < threshold`.
    threshold: f64,
    pass: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value < threshold,
        }
    }
}

#[derive(Serialize)]
struct VerifyOut {
    suite: String,
    samples: usize,
    pass: bool,
    checks: Vec<Check>,
}

/// Uniform `(a, b)` in the fiber of `r` over `a ∈ a_range`.
fn sample_params(rng: &mut ChaCha8Rng, r: RegionId, a_range: (f64, f64)) -> Params {
    loop {
        let a = rng.gen_range(a_range.0..a_range.1);
        let Ok((lo, hi)) = region_bounds(r, a) else {
            continue;
        };
        if lo >= hi {
            continue;
        }
        if let Ok(p) = Params::new(a, rng.gen_range(lo..=hi)) {
            return p;
        }
    }
}

const FULL_A: (f64, f64) = (1.0 + 1e-9, 2.0);

fn p3_a() -> (f64, f64) {
    (1.0 + 1e-9, 2f64.powf(0.2))
}

fn verify(a: &VerifyArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    match a.suite {
        Suite::Spectral => {
            let want = (3.0 + 2.0 * SQRT_2, 4.0);
            for op in [RenormOp::Delta, RenormOp::Pi] {
                let j = numeric_jacobian(op, 1.0, SQRT_2, 1e-6)?;
                let (l1, l2) = j
                    .real_eigenvalues()
                    .ok_or_else(|| anyhow!("complex spectrum for {op}"))?;
                checks.push(Check::below(
                    format!("{op} lambda 4"),
                    (l2 - want.1).abs(),
                    1e-6,
                ));
                checks.push(Check::below(
                    format!("{op} lambda 3+2sqrt2"),
                    (l1 - want.0).abs(),
                    1e-6,
                ));
            }
        }
        Suite::Conjugacy => {
            let cases = [
                (ResidualKind::P1Square, RegionId::P1, FULL_A),
                (ResidualKind::P2Square, RegionId::P2, FULL_A),
                (ResidualKind::DeltaQuad, RegionId::P3, p3_a()),
                (ResidualKind::PiQuad, RegionId::P3, p3_a()),
            ];
            for (kind, region, range) in cases {
                let mut sup = 0.0f64;
                for i in 0..10 {
                    let prm = sample_params(&mut rng, region, range);
                    sup = sup.max(conjugacy_residual(kind, prm, a.samples, seed + i)?.sup);
                }
                checks.push(Check::below(format!("{kind:?} sup"), sup, 1e-9));
            }
        }
        Suite::Invariance => {
            let cases = [
                (DomainName::RectP1, RegionId::P1, 1, FULL_A),
                (DomainName::Delta, RegionId::PDelta, 4, FULL_A),
                (DomainName::Pi, RegionId::P3, 4, p3_a()),
            ];
            for (name, region, power, range) in cases {
                let mut worst = 0.0f64;
                for i in 0..10 {
                    let prm = sample_params(&mut rng, region, range);
                    let d = named_domain(name, prm)?;
                    worst = worst.max(invariance_check(prm, &d, power, a.samples, seed + i)?);
                }
                checks.push(Check::below(
                    format!("{name:?} power {power}"),
                    worst,
                    1e-10,
                ));
            }
        }
        Suite::Continuity => {
            let mut worst = 0.0f64;
            let mut prm = sample_params(&mut rng, RegionId::P, FULL_A);
            for i in 0..a.samples {
                if i % 100 == 0 {
                    prm = sample_params(&mut rng, RegionId::P, FULL_A);
                }
                let (p, l, r) = critical_point(prm.b, i % 4, rng.gen_range(0.0..=1.0));
                worst =
                    worst.max(psi_branch_formula(prm, l, p).dist(psi_branch_formula(prm, r, p)));
            }
            checks.push(Check::below("max branch disagreement", worst, 1e-12));
        }
        Suite::Lyapunov => {
            let len = a.samples.max(1000);
            let x0 = Point::new(0.7, 0.2);
            let psi = PiecewiseMap::Psi(Params::new(1.2, 1.1)?);
            let e = lyapunov(&OrbitSpec::new(psi, x0, 100, len))?;
            let w = 1.2f64.ln();
            checks.push(Check::below(
                "psi(1.2,1.1) lambda1",
                (e.lambda1 - w).abs(),
                1e-9,
            ));
            checks.push(Check::below(
                "psi(1.2,1.1) lambda2",
                (e.lambda2 - w).abs(),
                1e-9,
            ));
            let lam = PiecewiseMap::Lambda(LambdaParam::new(0.8)?);
            let e = lyapunov(&OrbitSpec::new(lam, x0, 100, len))?;
            let w = (0.8 * SQRT_2).ln();
            checks.push(Check::below(
                "lambda(0.8) lambda1",
                (e.lambda1 - w).abs(),
                1e-9,
            ));
            checks.push(Check::below(
                "lambda(0.8) lambda2",
                (e.lambda2 - w).abs(),
                1e-9,
            ));
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.clone())
        .collect();
    write_json(
        "verify",
        VerifyOut {
            suite: format!("{:?}", a.suite).to_lowercase(),
            samples: a.samples,
            pass,
            checks,
        },
        out,
    )?;
    if pass {
        Ok(())
    } else {
        Err(anyhow!(CheckFailed(failed.join(", "))))
    }
}

/// A point on a critical line and the two branches meeting there.
fn critical_point(b: f64, which: usize, s: f64) -> (Point, BranchId, BranchId) {
    match which {
        0 => (
            Point::new(1.0, s * (b - 1.0)),
            BranchId::T0Minus,
            BranchId::T1Minus,
        ),
        1 => (
            Point::new(1.0, (b - 1.0) + s * (2.0 - b)),
            BranchId::T0Plus,
            BranchId::T1Plus,
        ),
        2 => {
            let x = b / 2.0 + s * (1.0 - b / 2.0);
            (Point::new(x, b - x), BranchId::T0Minus, BranchId::T0Plus)
        }
        _ => {
            let x = 1.0 + s * (1.0 - b / 2.0);
            (
                Point::new(x, x - 2.0 + b),
                BranchId::T1Minus,
                BranchId::T1Plus,
            )
        }
    }
}

fn sweep(a: &SweepArgs, seed: u64, format: Format, out: Option<&Path>) -> Result<()> {
    let (points, curve): (Vec<(f64, f64, f64)>, bool) = match (&a.t_range, &a.a_range, &a.b_range) {
        (Some(t), _, _) => {
            let (lo, hi) = (FRAC_1_SQRT_2, 2f64.powf(-0.4));
            if t.lo < lo - 1e-15 || t.hi > hi + 1e-15 {
                return Err(usage(format!("t range must lie in [{lo}, {hi}]")));
            }
            let pts = t
                .points()
                .into_iter()
                .map(|t| {
                    let (pa, pb) = ebm_core::regions::gamma0(t)?;
                    Ok((t, pa, pb))
                })
                .collect::<Result<_>>()?;
            (pts, true)
        }
        (None, Some(ar), Some(br)) => {
            if ar.lo <= 1.0 || ar.hi > 2.0 || br.lo < 1.0 || br.hi > 2.0 {
                return Err(usage("ranges must lie within (1,2] x [1,2]"));
            }
            let bs = br.points();
            let pts = ar
                .points()
                .into_iter()
                .flat_map(|pa| bs.iter().map(move |&pb| (f64::NAN, pa, pb)))
                .collect();
            (pts, false)
        }
        _ => return Err(usage("give --t-range, or both --a-range and --b-range")),
    };
    let metric_cols: &[&str] = match a.job {
        SweepJob::Census => &["distinct_count", "pieces_total"],
        SweepJob::Lyapunov => &["lambda1", "lambda2"],
        SweepJob::Region => &["window", "P", "P1", "P2", "PDelta", "P3", "P1n", "P2n"],
        SweepJob::RenormDepth => &["depth"],
    };
    let census_cfg = CensusConfig {
        n_seeds: a.census.seeds,
        orbit_len: a.census.len,
        burn_in: a.census.burn,
        resolution: a.census.grid,
        rng_seed: seed,
    };
    log::info!("sweep of {} points", points.len());
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(t, pa, pb))| {
            let mut row = vec![i.to_string()];
            if curve {
                row.push(fmt_f64(t));
            }
            row.push(fmt_f64(pa));
            row.push(fmt_f64(pb));
            match sweep_point(a, &census_cfg, pa, pb) {
                Ok(m) => {
                    row.push("ok".into());
                    row.extend(m);
                }
                Err(e) => {
                    row.push(e.to_string());
                    row.extend(metric_cols.iter().map(|_| String::new()));
                }
            }
            row
        })
        .collect();
    let mut header = vec!["index"];
    if curve {
        header.push("t");
    }
    header.extend(["a", "b", "status"]);
    header.extend_from_slice(metric_cols);
    match format {
        Format::Csv => write_csv(&header, &rows, out),
        Format::Json => {
            #[derive(Serialize)]
            struct Table<'a> {
                columns: Vec<&'a str>,
                rows: Vec<BTreeMap<&'a str, &'a str>>,
            }
            let table = Table {
                columns: header.clone(),
                rows: rows
                    .iter()
                    .map(|r| {
                        header
                            .iter()
                            .copied()
                            .zip(r.iter().map(String::as_str))
                            .collect()
                    })
                    .collect(),
            };
            write_json("sweep", table, out)
        }
    }
}

fn bit(v: bool) -> String {
    (v as u8).to_string()
}

fn opt(v: Option<u32>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

fn sweep_point(
    a: &SweepArgs,
    cfg: &CensusConfig,
    pa: f64,
    pb: f64,
) -> ebm_core::Result<Vec<String>> {
    Ok(match a.job {
        SweepJob::Census => {
            let c = attractor_census(&PiecewiseMap::Psi(Params::new(pa, pb)?), cfg)?;
            let pieces: usize = c.attractors.iter().map(|x| x.pieces).sum();
            vec![c.distinct_count.to_string(), pieces.to_string()]
        }
        SweepJob::Lyapunov => {
            let map = PiecewiseMap::Psi(Params::new(pa, pb)?);
            let e = lyapunov(&OrbitSpec::new(map, Point::new(0.7, 0.2), 1000, a.lyap_len))?;
            vec![fmt_f64(e.lambda1), fmt_f64(e.lambda2)]
        }
        SweepJob::Region => {
            let rep = region_report(pa, pb);
            let mut v = vec![opt(rep.window)];
            for r in [
                RegionId::P,
                RegionId::P1,
                RegionId::P2,
                RegionId::PDelta,
                RegionId::P3,
            ] {
                v.push(bit(in_region(r, pa, pb)));
            }
            v.push(opt(rep.p1n));
            v.push(opt(rep.p2n));
            v
        }
        SweepJob::RenormDepth => {
            vec![renorm_depth(pa, pb, a.op.into(), a.max_depth).to_string()]
        }
    })
}
