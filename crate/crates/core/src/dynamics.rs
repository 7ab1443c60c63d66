//! Bifurcation sampling, Lyapunov exponents and phase-space coverage.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{ChaoticMap, MapKey, TentMap};

pub const DEFAULT_SETTLE: usize = 1000;
pub const DEFAULT_KEEP: usize = 200;

/// Which member of the tent family a parameter sweep instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    /// Classical tent map, `mu` in `(0, 2]`.
    Classic,
    /// Robust tent map, non-integer `mu` in `(2, 100)`.
    Robust,
}

/// A map selected by [`MapKind`] at a concrete parameter.
#[derive(Debug, Clone, Copy)]
pub enum SweepMap {
    Classic(TentMap),
    Robust(MapKey),
}

impl SweepMap {
    pub fn new(kind: MapKind, mu: f64, x0: f64) -> Result<Self> {
        match kind {
            MapKind::Classic => TentMap::new(mu, x0).map(SweepMap::Classic),
            MapKind::Robust => MapKey::new(mu, x0).map(SweepMap::Robust),
        }
    }
}

impl ChaoticMap for SweepMap {
    fn seed(&self) -> f64 {
        match self {
            SweepMap::Classic(m) => m.seed(),
            SweepMap::Robust(m) => m.seed(),
        }
    }

    #[inline]
    fn step(&self, x: f64) -> f64 {
        match self {
            SweepMap::Classic(m) => m.step(x),
            SweepMap::Robust(m) => m.step(x),
        }
    }

    fn log_slope(&self, x: f64) -> f64 {
        match self {
            SweepMap::Classic(m) => m.log_slope(x),
            SweepMap::Robust(m) => m.log_slope(x),
        }
    }

    fn mu(&self) -> f64 {
        match self {
            SweepMap::Classic(m) => m.mu(),
            SweepMap::Robust(m) => m.mu(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub mu: f64,
    pub x: f64,
}

/// Attractor samples over a parameter grid, with the grid values that could
/// not be instantiated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bifurcation {
    pub kind: MapKind,
    pub x0: f64,
    pub settle: usize,
    pub keep: usize,
    pub skipped: Vec<f64>,
    pub points: Vec<BifurcationPoint>,
}

impl Bifurcation {
    /// `(mu, min x, max x)` for every sampled parameter, in grid order.
    pub fn spans(&self) -> Vec<(f64, f64, f64)> {
        self.points
            .chunks(self.keep)
            .map(|chunk| {
                let (lo, hi) = chunk
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p.x), hi.max(p.x))
                    });
                (chunk[0].mu, lo, hi)
            })
            .collect()
    }
}

/// For each `mu` in the grid: iterate `settle` times from `x0`, then record
/// `keep` successive states. Grid values the chosen map rejects (integer
/// `mu` for the robust map) are skipped and listed in the result.
pub fn bifurcation_sample(
    kind: MapKind,
    mu_grid: &[f64],
    x0: f64,
    settle: usize,
    keep: usize,
) -> Result<Bifurcation> {
    if keep == 0 {
        return Err(Error::CountTooSmall {
            what: "keep",
            min: 1,
            got: 0,
        });
    }
    // Seed errors belong to the caller, not to individual grid points.
    let probe_mu = match kind {
        MapKind::Classic => 1.0,
        MapKind::Robust => 2.5,
    };
    SweepMap::new(kind, probe_mu, x0)?;

    let mut skipped = Vec::new();
    let mut valid = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        match SweepMap::new(kind, mu, x0) {
            Ok(map) => valid.push(map),
            Err(_) => skipped.push(mu),
        }
    }
    if valid.is_empty() {
        return Err(Error::EmptyGrid);
    }

    let points = valid
        .par_iter()
        .map(|map| {
            crate::map::orbit(map, keep, settle)
                .into_iter()
                .map(|x| BifurcationPoint { mu: map.mu(), x })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat();

    Ok(Bifurcation {
        kind,
        x0,
        settle,
        keep,
        skipped,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub mu: f64,
    /// Nats per iteration.
    pub lambda: f64,
    pub n_samples: usize,
}

/// Time average of `ln |f'(x_k)|` over `n` iterates following `burn_in`.
pub fn lyapunov<M: ChaoticMap + ?Sized>(
    map: &M,
    n: usize,
    burn_in: usize,
) -> Result<LyapunovEstimate> {
    if n == 0 {
        return Err(Error::CountTooSmall {
            what: "sample count",
            min: 1,
            got: 0,
        });
    }
    let mut x = map.seed();
    for _ in 0..burn_in {
        x = map.step(x);
    }
    let mut total = 0.0;
    for _ in 0..n {
        total += map.log_slope(x);
        x = map.step(x);
    }
    Ok(LyapunovEstimate {
        mu: map.mu(),
        lambda: total / n as f64,
        n_samples: n,
    })
}

/// Lyapunov exponents across a grid; rejected grid values are left out.
pub fn lyapunov_curve(
    kind: MapKind,
    mu_grid: &[f64],
    x0: f64,
    n: usize,
    burn_in: usize,
) -> Result<Vec<LyapunovEstimate>> {
    let maps: Vec<SweepMap> = mu_grid
        .iter()
        .filter_map(|&mu| SweepMap::new(kind, mu, x0).ok())
        .collect();
    if maps.is_empty() {
        return Err(Error::EmptyGrid);
    }
    maps.par_iter().map(|m| lyapunov(m, n, burn_in)).collect()
}

/// Fraction of `bins` equal cells of `[0,1]` visited by the first `n` states.
pub fn phase_coverage<M: ChaoticMap + ?Sized>(map: &M, n: usize, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::CountTooSmall {
            what: "bins",
            min: 2,
            got: bins,
        });
    }
    let mut seen = vec![false; bins];
    let mut x = map.seed();
    for _ in 0..n {
        let cell = ((x * bins as f64) as usize).min(bins - 1);
        seen[cell] = true;
        x = map.step(x);
    }
    Ok(seen.iter().filter(|&&s| s).count() as f64 / bins as f64)
}

/// `count` evenly spaced values strictly inside `(lo, hi)`, offset by half a
/// step from each end.
pub fn midpoint_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / count as f64;
    (0..count).map(|i| lo + (i as f64 + 0.5) * step).collect()
}
