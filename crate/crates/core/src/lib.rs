//! Pseudo-random bit generation from the robust chaotic tent map.
//!
//! The crate is organised bottom-up:
//!
//! - [`map`]: the classical and robust tent maps, keys and trajectories.
//! - [`prbg`]: threshold bit extraction, byte packing and quantization.
//! - [`dynamics`]: bifurcation samples, Lyapunov exponents, phase coverage.
//! - [`nist`] and [`ent`]: statistical test batteries.
//! - [`security`]: correlation, sensitivity, differential and key-space analysis.
//!
//! ```
//! use rctm::{generate_bits, make_key, pack_bytes};
//!
//! let key = make_key(61.81, 0.23).unwrap();
//! let bits = generate_bits(&key, 1024, 0).unwrap();
//! assert_eq!(pack_bytes(&bits).bytes.len(), 128);
//! ```

pub mod dynamics;
pub mod ent;
pub mod error;
pub mod map;
pub mod nist;
pub mod prbg;
pub mod security;

pub use error::{Error, Result};
pub use map::{
    ctm_step, iterate, log_derivative, make_key, orbit, rctm_step, ChaoticMap, MapKey, TentFamily,
    TentMap, Trajectory,
};
pub use prbg::{generate_bits, pack_bytes, quantize_bytes, unpack_bytes, BitStream, PackedBytes};
