//! Classical and robust chaotic tent maps.
//!
//! The robust map splits the unit interval into an internal region
//! `[n1, n2]` around one half and an external region covering the rest.
//! Both regions fold the tent with `mod 1`; the internal region
//! additionally rescales by `(mu/2) mod 1` so that its image covers the
//! whole interval again. All arithmetic is IEEE-754 binary64, and
//! `a mod 1` is `a - floor(a)`.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Lower bound (exclusive) of the robust map's control parameter.
pub const MU_MIN: f64 = 2.0;
/// Upper bound (exclusive) of the robust map's control parameter.
pub const MU_MAX: f64 = 100.0;

/// A one-dimensional map on `[0,1]` with a known branch slope.
pub trait ChaoticMap: Send + Sync {
    /// Initial condition the orbit starts from.
    fn seed(&self) -> f64;

    /// One application of the map. `x` is assumed to lie in `[0,1]`.
    fn step(&self, x: f64) -> f64;

    /// `ln |f'(x)|` for the branch `step` takes at `x`.
    fn log_slope(&self, x: f64) -> f64;

    /// Control parameter, used to label sweep output.
    fn mu(&self) -> f64;
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}

fn check_state(x: f64) -> Result<()> {
    check_finite("x", x)?;
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::StateOutOfRange(x))
    }
}

#[inline]
fn frac(a: f64) -> f64 {
    a - a.floor()
}

/// Validated secret parameters of the robust tent map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapKey {
    mu: f64,
    x0: f64,
    n1: f64,
    n2: f64,
    #[serde(skip)]
    scale: f64,
}

impl MapKey {
    /// Validates `(mu, x0)` and derives the region bounds.
    pub fn new(mu: f64, x0: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_finite("x0", x0)?;
        if mu <= MU_MIN {
            return Err(Error::MuTooSmall(mu));
        }
        if mu >= MU_MAX {
            return Err(Error::MuTooLarge(mu));
        }
        if mu.fract() == 0.0 {
            return Err(Error::MuInteger(mu));
        }
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(Error::SeedOutOfRange(x0));
        }
        let scale = frac(mu / 2.0);
        Ok(Self {
            mu,
            x0,
            n1: 0.5 - scale / mu,
            n2: 0.5 + scale / mu,
            scale,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Lower bound of the internal region.
    pub fn n1(&self) -> f64 {
        self.n1
    }

    /// Upper bound of the internal region.
    pub fn n2(&self) -> f64 {
        self.n2
    }

    /// `(mu/2) mod 1`, the divisor of the internal branches.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(mu, self.x0)
    }

    pub fn with_x0(&self, x0: f64) -> Result<Self> {
        Self::new(self.mu, x0)
    }

    /// True when `x` falls in `[n1, n2]` (both ends inclusive).
    #[inline]
    pub fn is_internal(&self, x: f64) -> bool {
        x >= self.n1 && x <= self.n2
    }

    /// Short hex digest identifying the key without revealing it.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.mu.to_bits().to_be_bytes());
        hasher.update(self.x0.to_bits().to_be_bytes());
        hex::encode(&hasher.finalize()[..8])
    }

    #[inline]
    fn apply(&self, x: f64) -> f64 {
        let folded = if x < 0.5 {
            self.mu * x
        } else {
            self.mu * (1.0 - x)
        };
        let residue = frac(folded);
        if !self.is_internal(x) {
            return residue;
        }
        let scaled = residue / self.scale;
        if scaled <= 1.0 {
            scaled
        } else if residue - self.scale < 1.0 - residue {
            // Rounding pushed the residue just past the region's image.
            1.0
        } else {
            // `folded` landed a hair below an integer at a region edge.
            0.0
        }
    }
}

impl ChaoticMap for MapKey {
    fn seed(&self) -> f64 {
        self.x0
    }

    #[inline]
    fn step(&self, x: f64) -> f64 {
        self.apply(x)
    }

    fn log_slope(&self, x: f64) -> f64 {
        if self.is_internal(x) {
            (self.mu / self.scale).ln()
        } else {
            self.mu.ln()
        }
    }

    fn mu(&self) -> f64 {
        self.mu
    }
}

/// Validates `(mu, x0)` into a [`MapKey`].
pub fn make_key(mu: f64, x0: f64) -> Result<MapKey> {
    MapKey::new(mu, x0)
}

/// The classical tent map with `mu` in `(0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TentMap {
    mu: f64,
    x0: f64,
}

impl TentMap {
    pub fn new(mu: f64, x0: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_state(x0)?;
        if !(mu > 0.0 && mu <= 2.0) {
            return Err(Error::TentMuOutOfRange(mu));
        }
        Ok(Self { mu, x0 })
    }
}

impl ChaoticMap for TentMap {
    fn seed(&self) -> f64 {
        self.x0
    }

    #[inline]
    fn step(&self, x: f64) -> f64 {
        if x < 0.5 {
            self.mu * x
        } else {
            self.mu * (1.0 - x)
        }
    }

    fn log_slope(&self, _x: f64) -> f64 {
        self.mu.ln()
    }

    fn mu(&self) -> f64 {
        self.mu
    }
}

/// Classical map for `mu <= 2`, robust map above, mirroring the dispatch of
/// the reference generator loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum TentFamily {
    Classic(TentMap),
    Robust(MapKey),
}

impl TentFamily {
    pub fn from_parameters(mu: f64, x0: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        if mu <= MU_MIN {
            if !(x0 > 0.0 && x0 < 1.0) {
                return Err(Error::SeedOutOfRange(x0));
            }
            TentMap::new(mu, x0).map(TentFamily::Classic)
        } else {
            MapKey::new(mu, x0).map(TentFamily::Robust)
        }
    }
}

impl ChaoticMap for TentFamily {
    fn seed(&self) -> f64 {
        match self {
            TentFamily::Classic(m) => m.seed(),
            TentFamily::Robust(m) => m.seed(),
        }
    }

    #[inline]
    fn step(&self, x: f64) -> f64 {
        match self {
            TentFamily::Classic(m) => m.step(x),
            TentFamily::Robust(m) => m.step(x),
        }
    }

    fn log_slope(&self, x: f64) -> f64 {
        match self {
            TentFamily::Classic(m) => m.log_slope(x),
            TentFamily::Robust(m) => m.log_slope(x),
        }
    }

    fn mu(&self) -> f64 {
        match self {
            TentFamily::Classic(m) => m.mu(),
            TentFamily::Robust(m) => m.mu(),
        }
    }
}

/// One step of the classical tent map: `mu*x` below one half, `mu*(1-x)` from
/// one half upward.
pub fn ctm_step(x: f64, mu: f64) -> Result<f64> {
    check_state(x)?;
    check_finite("mu", mu)?;
    if !(0.0..=2.0).contains(&mu) {
        return Err(Error::TentMuOutOfRange(mu));
    }
    Ok(if x < 0.5 { mu * x } else { mu * (1.0 - x) })
}

/// One step of the robust tent map.
pub fn rctm_step(x: f64, key: &MapKey) -> Result<f64> {
    check_state(x)?;
    Ok(key.apply(x))
}

/// `ln |slope|` of the robust branch taken at `x`.
pub fn log_derivative(x: f64, key: &MapKey) -> f64 {
    key.log_slope(x)
}

/// Runs `map` from its seed, drops `burn_in` iterates and keeps the next `n`.
pub fn orbit<M: ChaoticMap + ?Sized>(map: &M, n: usize, burn_in: usize) -> Vec<f64> {
    let mut x = map.seed();
    for _ in 0..burn_in {
        x = map.step(x);
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(x);
        x = map.step(x);
    }
    values
}

/// Ordered robust-map states together with the key that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    values: Vec<f64>,
    key: MapKey,
    burn_in: usize,
}

impl Trajectory {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn key(&self) -> &MapKey {
        &self.key
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl AsRef<[f64]> for Trajectory {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Iterates the robust map. With `burn_in == 0` the first value is `x0`.
pub fn iterate(key: &MapKey, n: usize, burn_in: usize) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::CountTooSmall {
            what: "trajectory length",
            min: 1,
            got: 0,
        });
    }
    Ok(Trajectory {
        values: orbit(key, n, burn_in),
        key: *key,
        burn_in,
    })
}
