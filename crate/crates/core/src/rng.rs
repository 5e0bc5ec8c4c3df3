//! Counter-based random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha8 stream selected by
//! `(seed, trial_index)`, so a trial's randomness does not depend on which
//! worker evaluates it or in what order.
//!
//! Gaussian variates use the Box-Muller transform on pairs of uniforms in
//! `(0, 1]`. For circular complex Gaussians with unit total variance the
//! radius is `sqrt(-ln u1)` and the phase `2*pi*u2`, so `|h|^2 = -ln u1`
//! is exactly unit-mean exponential.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Domain separator so auxiliary draws (e.g. random power vectors) never
/// reuse the channel streams.
const AUX_DOMAIN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Random stream of a single trial.
pub struct TrialRng {
    inner: ChaCha8Rng,
}

impl TrialRng {
    pub fn new(seed: u64, trial_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(trial_index);
        Self { inner }
    }

    /// Stream for non-channel randomness attached to a trial.
    pub fn auxiliary(seed: u64, trial_index: u64) -> Self {
        Self::new(seed ^ AUX_DOMAIN, trial_index)
    }

    /// Uniform in `(0, 1]` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Circular complex Gaussian with `E|z|^2 = 1`.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        Complex64::new(r * c, r * s)
    }
}
