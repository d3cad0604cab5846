//! Rayleigh fading for the source-to-RIS and RIS-to-destination hops, RIS
//! phase alignment, and the chip-level AWGN channel.
//!
//! Both hops are flat over the symbol interval: one realization is drawn per
//! symbol and shared by all chips. With the reflection phases set to cancel
//! the cascaded channel phases, the effective gain collapses to the real
//! non-negative scalar `A = sum_n alpha_n * beta_n`, which is what the
//! transceivers consume; a debug accessor reconstructs the phase vector.

use crate::params::ConfigError;
use crate::scalar::Scalar;
use num_complex::Complex;
use rand::Rng;

/// One flat-fading draw of the cascaded RIS channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<S> {
    /// Source-to-RIS gains `h_n ~ CN(0, sigma^2)`.
    pub source_gains: Vec<Complex<S>>,
    /// RIS-to-destination gains `g_n ~ CN(0, sigma^2)`.
    pub dest_gains: Vec<Complex<S>>,
    /// `alpha_n = |h_n|`.
    pub alpha: Vec<S>,
    /// `beta_n = |g_n|`.
    pub beta: Vec<S>,
    /// Source-hop phases, with `h_n = alpha_n * exp(-j*theta_n)`.
    pub theta: Vec<S>,
    /// Destination-hop phases, with `g_n = beta_n * exp(-j*varphi_n)`.
    pub varphi: Vec<S>,
    /// Phase-aligned effective gain `A = sum_n alpha_n * beta_n`.
    pub effective_gain: S,
}

/// Draw a complex circularly-symmetric Gaussian with total variance `variance`.
#[inline]
pub fn complex_gaussian<S: Scalar, R: Rng + ?Sized>(variance: S, rng: &mut R) -> Complex<S> {
    let scale = (variance / S::of(2.0)).sqrt();
    Complex::new(
        S::standard_normal(rng) * scale,
        S::standard_normal(rng) * scale,
    )
}

/// Sample a fresh realization of `n` cascaded RIS elements with per-hop
/// variance `sigma2`.
pub fn sample_realization<S: Scalar, R: Rng + ?Sized>(
    n: u32,
    sigma2: S,
    rng: &mut R,
) -> ChannelRealization<S> {
    debug_assert!(n >= 1 && sigma2 > S::zero());
    let n = n as usize;
    let mut source_gains = Vec::with_capacity(n);
    let mut dest_gains = Vec::with_capacity(n);
    for _ in 0..n {
        source_gains.push(complex_gaussian(sigma2, rng));
        dest_gains.push(complex_gaussian(sigma2, rng));
    }
    ChannelRealization::from_gains(source_gains, dest_gains)
}

impl<S: Scalar> ChannelRealization<S> {
    /// Build a realization from explicit hop gains (the deterministic test
    /// hook); magnitudes, phases and the aligned gain are derived here.
    pub fn from_gains(source_gains: Vec<Complex<S>>, dest_gains: Vec<Complex<S>>) -> Self {
        assert_eq!(source_gains.len(), dest_gains.len());
        let n = source_gains.len();
        let mut alpha = Vec::with_capacity(n);
        let mut beta = Vec::with_capacity(n);
        let mut theta = Vec::with_capacity(n);
        let mut varphi = Vec::with_capacity(n);
        let mut gain = S::zero();
        for i in 0..n {
            let a = source_gains[i].norm();
            let b = dest_gains[i].norm();
            alpha.push(a);
            beta.push(b);
            theta.push(-source_gains[i].arg());
            varphi.push(-dest_gains[i].arg());
            gain += a * b;
        }
        Self {
            source_gains,
            dest_gains,
            alpha,
            beta,
            theta,
            varphi,
            effective_gain: gain,
        }
    }

    pub fn elements(&self) -> usize {
        self.source_gains.len()
    }

    /// Reflection phases that align the cascade: `phi_n = theta_n + varphi_n`.
    pub fn aligned_phases(&self) -> Vec<S> {
        self.theta
            .iter()
            .zip(&self.varphi)
            .map(|(&t, &v)| t + v)
            .collect()
    }

    /// Cascade response under an arbitrary reflection phase vector:
    /// `sum_n h_n * exp(j*phi_n) * g_n`.
    pub fn cascade_with_phases(&self, phases: &[S]) -> Complex<S> {
        assert_eq!(phases.len(), self.elements());
        let mut acc = Complex::new(S::zero(), S::zero());
        for ((h, g), &phi) in self.source_gains.iter().zip(&self.dest_gains).zip(phases) {
            acc += h * Complex::from_polar(S::one(), phi) * g;
        }
        acc
    }
}

/// Per-chip complex noise model: samples are i.i.d. `CN(0, N0)`, i.e. the
/// real and imaginary parts each carry variance `N0/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<S> {
    pub n0: S,
}

impl<S: Scalar> NoiseModel<S> {
    pub fn new(n0: S) -> Result<Self, ConfigError> {
        if !(n0 > S::zero()) {
            return Err(ConfigError::new("n0", "noise variance must be positive"));
        }
        Ok(Self { n0 })
    }
}

/// Maximum post-alignment instantaneous SNR over a symbol interval:
/// `K * E_c * A^2 / N0`.
pub fn max_snr<S: Scalar>(effective_gain: S, chip_count: u32, chip_energy: S, n0: S) -> S {
    S::of(f64::from(chip_count)) * chip_energy * effective_gain * effective_gain / n0
}

/// Apply the aligned flat-fading channel and per-chip AWGN:
/// `rx[k] = A * tx[k] + n[k]`. With `noise_enabled` false the AWGN term is
/// omitted (test hook).
pub fn apply_channel<S: Scalar, R: Rng + ?Sized>(
    tx_chips: &[Complex<S>],
    realization: &ChannelRealization<S>,
    noise: &NoiseModel<S>,
    noise_enabled: bool,
    rng: &mut R,
) -> Vec<Complex<S>> {
    let mut rx = Vec::with_capacity(tx_chips.len());
    apply_channel_into(tx_chips, realization.effective_gain, noise, noise_enabled, rng, &mut rx);
    rx
}

/// Allocation-free variant used by the Monte Carlo hot path.
pub(crate) fn apply_channel_into<S: Scalar, R: Rng + ?Sized>(
    tx_chips: &[Complex<S>],
    effective_gain: S,
    noise: &NoiseModel<S>,
    noise_enabled: bool,
    rng: &mut R,
    rx: &mut Vec<Complex<S>>,
) {
    rx.clear();
    if noise_enabled {
        for &c in tx_chips {
            rx.push(c.scale(effective_gain) + complex_gaussian(noise.n0, rng));
        }
    } else {
        for &c in tx_chips {
            rx.push(c.scale(effective_gain));
        }
    }
}
