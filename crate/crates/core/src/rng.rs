//! Deterministic random streams.
//!
//! Every stochastic quantity in the simulator is drawn from a [`Stream`]
//! keyed by `(master_seed, realization_index, purpose)`. Work items can then
//! run in any order, on any number of threads, and still reproduce the exact
//! sample path of a sequential run. Adding a new draw purpose never perturbs
//! the streams of existing ones.

use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math::{cos, log, sin, sqrt};

/// What a child stream is consumed for within one large-scale realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamPurpose {
    UserPlacement,
    ApPlacement,
    ShadowingCellular,
    ShadowingCellFree,
    SmallScale,
}

impl StreamPurpose {
    fn id(self) -> u64 {
        match self {
            StreamPurpose::UserPlacement => 0,
            StreamPurpose::ApPlacement => 1,
            StreamPurpose::ShadowingCellular => 2,
            StreamPurpose::ShadowingCellFree => 3,
            StreamPurpose::SmallScale => 4,
        }
    }
}

/// Number of stream slots reserved per realization index.
const PURPOSE_SLOTS: u64 = 8;

/// A seeded, splittable random stream.
#[derive(Clone, Debug)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    /// Child stream for one `(realization, purpose)` work item.
    pub fn for_realization(master_seed: u64, realization: u64, purpose: StreamPurpose) -> Self {
        let mut rng = ChaCha8Rng::from_seed(expand_seed(master_seed));
        rng.set_stream(realization.wrapping_mul(PURPOSE_SLOTS) + purpose.id());
        Stream { rng }
    }

    /// Standalone stream, mainly for tests and diagnostics.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(expand_seed(seed));
        rng.set_stream(u64::MAX);
        Stream { rng }
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Pair of independent standard normal draws (Box-Muller).
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        // 1 - uniform() lies in (0, 1], so the log argument never vanishes.
        let u = 1.0 - self.uniform();
        let v = self.uniform();
        let r = sqrt(-2.0 * log(u));
        let theta = 2.0 * PI * v;
        (r * cos(theta), r * sin(theta))
    }

    /// Single standard normal draw.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.normal_pair().0
    }
}

/// SplitMix64 expansion of a 64-bit seed into a 256-bit ChaCha key.
fn expand_seed(seed: u64) -> [u8; 32] {
    let mut z = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^= x >> 31;
        chunk.copy_from_slice(&x.to_le_bytes());
    }
    key
}
