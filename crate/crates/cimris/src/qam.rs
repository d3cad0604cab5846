//! Gray-mapped QAM constellations normalized to unit average energy.
//!
//! Square orders (4, 16, 64, ...) use `sqrt(M)` levels per axis. Odd
//! powers of two (8, 32, ...) fall back to a rectangular grid with
//! `2^ceil(u1/2)` in-phase and `2^floor(u1/2)` quadrature levels; these are
//! accepted for simulation while the analytical symbol-error bound stays
//! restricted to square constellations.
//!
//! Labels are MSB-first `[in-phase bits | quadrature bits]`; each axis is
//! Gray coded so neighbouring levels differ in exactly one bit.

use crate::params::ConfigError;
use crate::scalar::Scalar;
use num_complex::Complex;

/// Binary-reflected Gray code of `n`.
#[inline]
pub fn gray_code(n: u32) -> u32 {
    n ^ (n >> 1)
}

/// Inverse of [`gray_code`].
#[inline]
pub fn gray_decode(g: u32) -> u32 {
    let mut n = g;
    let mut mask = n >> 1;
    while mask != 0 {
        n ^= mask;
        mask >>= 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation<S> {
    points: Vec<Complex<S>>,
    bits: u32,
    i_bits: u32,
    q_bits: u32,
    i_levels: u32,
    q_levels: u32,
    /// Half the distance between adjacent levels on either axis.
    spacing: S,
}

impl<S: Scalar> QamConstellation<S> {
    pub fn new(order: u32) -> Result<Self, ConfigError> {
        if order < 4 || !order.is_power_of_two() {
            return Err(ConfigError::new(
                "modulation_order",
                format!("{order} is not a power of two of at least 4"),
            ));
        }
        let bits = order.trailing_zeros();
        let i_bits = bits.div_ceil(2);
        let q_bits = bits / 2;
        let i_levels = 1u32 << i_bits;
        let q_levels = 1u32 << q_bits;
        // Unit average energy over the uniform constellation:
        // spacing^2 * ((Mi^2 - 1) + (Mq^2 - 1)) / 3 = 1.
        let denom = (i_levels * i_levels - 1) + (q_levels * q_levels - 1);
        let spacing = (S::of(3.0) / S::of(f64::from(denom))).sqrt();
        let mut points = vec![Complex::new(S::zero(), S::zero()); order as usize];
        for label in 0..order {
            let vi = label >> q_bits;
            let vq = label & (q_levels - 1);
            let pi = gray_decode(vi);
            let pq = gray_decode(vq);
            let re = Self::level(pi, i_levels, spacing);
            let im = Self::level(pq, q_levels, spacing);
            points[label as usize] = Complex::new(re, im);
        }
        Ok(Self {
            points,
            bits,
            i_bits,
            q_bits,
            i_levels,
            q_levels,
            spacing,
        })
    }

    #[inline]
    fn level(position: u32, levels: u32, spacing: S) -> S {
        let offset = 2.0 * f64::from(position) - f64::from(levels - 1);
        spacing * S::of(offset)
    }

    pub fn order(&self) -> u32 {
        self.points.len() as u32
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    pub fn is_square(&self) -> bool {
        self.i_levels == self.q_levels
    }

    pub fn inphase_levels(&self) -> u32 {
        self.i_levels
    }

    pub fn quadrature_levels(&self) -> u32 {
        self.q_levels
    }

    pub fn points(&self) -> &[Complex<S>] {
        &self.points
    }

    /// Constellation point for a bit label.
    #[inline]
    pub fn map(&self, label: u32) -> Complex<S> {
        self.points[label as usize]
    }

    /// RMS of the in-phase amplitude over the uniform constellation.
    pub fn inphase_rms(&self) -> S {
        let mi = f64::from(self.i_levels);
        self.spacing * S::of(((mi * mi - 1.0) / 3.0).sqrt())
    }

    /// Average energy; 1 up to rounding.
    pub fn average_energy(&self) -> S {
        let sum: S = self.points.iter().map(|p| p.norm_sqr()).sum();
        sum / S::of(f64::from(self.order()))
    }

    /// Maximum-likelihood decision for `received ~ amplitude * x` via
    /// per-axis slicing; valid because the grid is a product set with
    /// uniform level spacing and the channel gain is real non-negative.
    /// A zero amplitude degenerates to label 0 (the tie-break convention).
    #[inline]
    pub fn nearest(&self, received: Complex<S>, amplitude: S) -> u32 {
        if !(amplitude > S::zero()) {
            return 0;
        }
        let pi = self.slice_axis(received.re / amplitude, self.i_levels);
        let pq = self.slice_axis(received.im / amplitude, self.q_levels);
        (gray_code(pi) << self.q_bits) | gray_code(pq)
    }

    #[inline]
    fn slice_axis(&self, value: S, levels: u32) -> u32 {
        let half = S::of(f64::from(levels - 1));
        let pos = (value / self.spacing + half) / S::of(2.0);
        let clamped = pos.max(S::zero()).min(half);
        let rounded = clamped.round().as_f64() as u32;
        rounded.min(levels - 1)
    }

    /// Exhaustive argmin over all constellation points of
    /// `|received - amplitude * x|^2`; ties break to the lowest label.
    pub fn nearest_exhaustive(&self, received: Complex<S>, amplitude: S) -> u32 {
        let mut best = 0u32;
        let mut best_metric = S::infinity();
        for (label, point) in self.points.iter().enumerate() {
            let metric = (received - point.scale(amplitude)).norm_sqr();
            if metric < best_metric {
                best_metric = metric;
                best = label as u32;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gray_round_trip() {
        for n in 0..64 {
            assert_eq!(gray_decode(gray_code(n)), n);
        }
        // adjacent codes differ in exactly one bit
        for n in 0..63u32 {
            assert_eq!((gray_code(n) ^ gray_code(n + 1)).count_ones(), 1);
        }
    }

    #[test]
    fn unit_energy_for_all_orders() {
        for order in [4u32, 8, 16, 32, 64, 256, 1024, 2048] {
            let c = QamConstellation::<f64>::new(order).unwrap();
            assert_abs_diff_eq!(c.average_energy(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rectangular_shapes() {
        let c8 = QamConstellation::<f64>::new(8).unwrap();
        assert_eq!((c8.inphase_levels(), c8.quadrature_levels()), (4, 2));
        assert!(!c8.is_square());
        let c16 = QamConstellation::<f64>::new(16).unwrap();
        assert_eq!((c16.inphase_levels(), c16.quadrature_levels()), (4, 4));
        assert!(c16.is_square());
        assert!(QamConstellation::<f64>::new(2).is_err());
        assert!(QamConstellation::<f64>::new(12).is_err());
    }

    #[test]
    fn qpsk_geometry() {
        let c = QamConstellation::<f64>::new(4).unwrap();
        let s = (0.5f64).sqrt();
        assert_abs_diff_eq!(c.map(0).re, -s, epsilon = 1e-15);
        assert_abs_diff_eq!(c.map(0).im, -s, epsilon = 1e-15);
        assert_abs_diff_eq!(c.inphase_rms(), s, epsilon = 1e-15);
    }

    #[test]
    fn slicing_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for order in [4u32, 8, 16, 32, 64] {
            let c = QamConstellation::<f64>::new(order).unwrap();
            for _ in 0..500 {
                let y = Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let amp = rng.gen_range(0.1..3.0);
                assert_eq!(
                    c.nearest(y, amp),
                    c.nearest_exhaustive(y, amp),
                    "order {order}, y {y}, amp {amp}"
                );
            }
        }
    }

    #[test]
    fn noiseless_decisions_recover_labels() {
        for order in [4u32, 8, 16, 64] {
            let c = QamConstellation::<f64>::new(order).unwrap();
            for label in 0..order {
                let y = c.map(label).scale(3.7);
                assert_eq!(c.nearest(y, 3.7), label);
                assert_eq!(c.nearest_exhaustive(y, 3.7), label);
            }
        }
    }

    #[test]
    fn zero_amplitude_degenerates_to_first_label() {
        let c = QamConstellation::<f64>::new(16).unwrap();
        assert_eq!(c.nearest(Complex::new(0.3, -0.4), 0.0), 0);
    }
}
