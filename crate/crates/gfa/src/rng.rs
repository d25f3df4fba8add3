//! Counter-based random number streams.
//!
//! Every random decision in the crate draws from a [`SubRng`] obtained by
//! [`substream`]`(seed, stream, attempt)`. Substreams are derived by hashing
//! the three labels through the splitmix64 finalizer, so any (particle,
//! attempt) or (sample) index can be opened independently, in any order, on
//! any thread, and always yields the same values. This is what makes growth
//! and Monte Carlo measurement reproducible and worker-count independent.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer: a 64-bit bijective mixer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A splitmix64 stream.
#[derive(Debug, Clone)]
pub struct SubRng {
    state: u64,
}

/// Open the substream labeled `(seed, stream, attempt)`.
///
/// Growth uses `stream` = particle index and `attempt` = stall-resample
/// counter; measurement uses `stream` = sample index with `attempt` = 0.
pub fn substream(seed: u64, stream: u64, attempt: u64) -> SubRng {
    let key = mix64(mix64(mix64(seed.wrapping_add(GOLDEN)) ^ stream) ^ attempt);
    SubRng { state: key }
}

impl SubRng {
    /// Raw splitmix64 stream from an explicit state (reference construction).
    pub fn from_state(state: u64) -> Self {
        SubRng { state }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform angle in `[0, 2π)`.
    #[inline]
    pub fn angle(&mut self) -> f64 {
        std::f64::consts::TAU * self.next_f64()
    }

    /// Standard normal pair (Box-Muller).
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        // 1 - u lies in (0, 1], keeping the log finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = std::f64::consts::TAU * u2;
        (r * phi.cos(), r * phi.sin())
    }

    /// Uniform direction on the unit sphere in R^3 (normalized normals).
    pub fn unit3(&mut self) -> [f64; 3] {
        loop {
            let (z1, z2) = self.normal_pair();
            let (z3, _) = self.normal_pair();
            let n2 = z1 * z1 + z2 * z2 + z3 * z3;
            if n2 > 1e-24 {
                let inv = 1.0 / n2.sqrt();
                return [z1 * inv, z2 * inv, z3 * inv];
            }
        }
    }
}
