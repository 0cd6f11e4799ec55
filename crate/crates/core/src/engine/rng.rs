//! Counter-based uniform draws keyed by `(seed, step, agent)`.
//!
//! A draw is a pure function of its key, so the order in which agents are
//! evaluated (or whether they are evaluated in parallel) cannot change the
//! values any agent sees.
//!
//! Algorithm, fixed for cross-version stability:
//!
//! ```text
//! h = mix(seed ^ 0x5245_464c_4558_4752)   // "REFLEXGR"
//! h = mix(h ^ step)
//! h = mix(h ^ agent)
//! u = (h >> 11) · 2^-53                    // uniform in [0, 1)
//! ```
//!
//! where `mix` is the SplitMix64 output function (golden-ratio increment,
//! then the two xor-shift-multiply rounds).

const DOMAIN: u64 = 0x5245_464c_4558_4752;

#[inline]
fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawStream {
    keyed_seed: u64,
}

impl DrawStream {
    pub fn new(seed: u64) -> Self {
        Self {
            keyed_seed: mix(seed ^ DOMAIN),
        }
    }

    #[inline]
    pub fn bits(&self, step: u64, agent: u64) -> u64 {
        mix(mix(self.keyed_seed ^ step) ^ agent)
    }

    /// Uniform value in `[0, 1)`.
    #[inline]
    pub fn draw(&self, step: u64, agent: u64) -> f64 {
        (self.bits(step, agent) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
