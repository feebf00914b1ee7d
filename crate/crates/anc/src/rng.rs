//! Seeded random number generation.
//!
//! Every stochastic component of the crate draws from ChaCha8 generators
//! created here, so the seed-to-sequence mapping is fixed in one place and
//! stable across builds. Population-based optimizers give each candidate its
//! own ChaCha stream derived from the master seed, which keeps runs
//! reproducible regardless of candidate evaluation order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Master generator for a seed (stream 0).
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `index` of the same seed (streams 1..).
///
/// Stream 0 is the master stream; substreams start at 1 so a master
/// generator and substream 0 never alias.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index + 1);
    rng
}

/// Standard normal draw via the Box-Muller transform.
///
/// Consumes exactly two uniform draws per call, so sequences stay
/// reproducible without generator-internal caching.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // gen::<f64>() is in [0, 1); flip to (0, 1] so ln() stays finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
