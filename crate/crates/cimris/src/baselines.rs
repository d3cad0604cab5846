//! Benchmark transceivers: traditional RIS, TSM-RIS, and TQSM-RIS.
//!
//! All three convey a Gray-mapped QAM symbol through the phase-aligned RIS
//! cascade. TSM-RIS additionally selects the transmit antenna with
//! `log2(N_T)` bits; TQSM-RIS selects independent antennas for the in-phase
//! and quadrature components with two groups.
//!
//! The multi-antenna model is transmitter-informed: each antenna has its own
//! Rayleigh source-to-RIS vector, the RIS aligns its phases to the cascade of
//! the antenna that actually transmits (for TQSM-RIS, the in-phase antenna),
//! and the receiver knows every aligned response, so its joint ML search uses
//! the gain each hypothesis would have produced under the same policy.

use crate::channel::complex_gaussian;
use crate::params::{benchmark_bits, ConfigError, Scheme};
use crate::qam::QamConstellation;
use crate::scalar::Scalar;
use num_complex::Complex;
use rand::Rng;

/// Bit word split for a benchmark codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineCodeword {
    pub scheme: Scheme,
    /// QAM label (Gray bits).
    pub label: u32,
    /// Antenna index for the in-phase component (TSM: the only one).
    pub antenna_i: usize,
    /// Antenna index for the quadrature component (TQSM only; mirrors
    /// `antenna_i` otherwise).
    pub antenna_q: usize,
    pub source_bits: u64,
}

/// Per-symbol channel draw for the multi-antenna schemes.
///
/// `aligned_gains[t]` is the real non-negative cascade gain when the RIS is
/// aligned to antenna `t`'s channel; `cross_gain(t, t')` is the complex
/// response seen on antenna `t'` under that same alignment.
#[derive(Debug, Clone)]
pub struct MimoChannelRealization<S> {
    /// Source-to-RIS gains, row-major `[antenna][element]`.
    pub source_gains: Vec<Complex<S>>,
    /// RIS-to-destination gains, one per element.
    pub dest_gains: Vec<Complex<S>>,
    /// `A_t = sum_n |h_{t,n}| * |g_n|` for each antenna.
    pub aligned_gains: Vec<S>,
    tx_antennas: usize,
    elements: usize,
}

impl<S: Scalar> MimoChannelRealization<S> {
    pub fn sample<R: Rng + ?Sized>(tx_antennas: u32, elements: u32, sigma2: S, rng: &mut R) -> Self {
        let nt = tx_antennas as usize;
        let n = elements as usize;
        let mut source_gains = Vec::with_capacity(nt * n);
        for _ in 0..nt * n {
            source_gains.push(complex_gaussian(sigma2, rng));
        }
        let mut dest_gains = Vec::with_capacity(n);
        for _ in 0..n {
            dest_gains.push(complex_gaussian(sigma2, rng));
        }
        Self::from_gains(source_gains, dest_gains, nt)
    }

    /// Deterministic construction from explicit gains (test hook).
    pub fn from_gains(
        source_gains: Vec<Complex<S>>,
        dest_gains: Vec<Complex<S>>,
        tx_antennas: usize,
    ) -> Self {
        let elements = dest_gains.len();
        assert_eq!(source_gains.len(), tx_antennas * elements);
        let mut aligned_gains = Vec::with_capacity(tx_antennas);
        for t in 0..tx_antennas {
            let mut a = S::zero();
            for n in 0..elements {
                a += source_gains[t * elements + n].norm() * dest_gains[n].norm();
            }
            aligned_gains.push(a);
        }
        Self {
            source_gains,
            dest_gains,
            aligned_gains,
            tx_antennas,
            elements,
        }
    }

    pub fn tx_antennas(&self) -> usize {
        self.tx_antennas
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    #[inline]
    fn source_row(&self, antenna: usize) -> &[Complex<S>] {
        &self.source_gains[antenna * self.elements..(antenna + 1) * self.elements]
    }

    /// Complex response on antenna `active` when the RIS is aligned to
    /// antenna `aligned`; the diagonal reproduces `aligned_gains`.
    pub fn cross_gain(&self, aligned: usize, active: usize) -> Complex<S> {
        let ha = self.source_row(aligned);
        let hb = self.source_row(active);
        let mut acc = Complex::new(S::zero(), S::zero());
        for n in 0..self.elements {
            let norm = ha[n].norm() * self.dest_gains[n].norm();
            if norm > S::zero() {
                // unit phasor cancelling the aligned antenna's cascade phase
                let phasor = (ha[n] * self.dest_gains[n]).conj().unscale(norm);
                acc += hb[n] * self.dest_gains[n] * phasor;
            }
        }
        acc
    }

    /// Full cross-gain matrix, row `t` = alignment to antenna `t`.
    pub fn cross_matrix(&self) -> Vec<Complex<S>> {
        let nt = self.tx_antennas;
        let mut b = Vec::with_capacity(nt * nt);
        for aligned in 0..nt {
            for active in 0..nt {
                b.push(self.cross_gain(aligned, active));
            }
        }
        b
    }
}

fn split_bits(word: u64, widths: &[u32]) -> Vec<u64> {
    let mut fields = Vec::with_capacity(widths.len());
    let mut shift: u32 = widths.iter().sum();
    for &w in widths {
        shift -= w;
        fields.push((word >> shift) & ((1u64 << w) - 1));
    }
    fields
}

/// Traditional RIS transceiver: the whole word rides on one QAM symbol
/// through the aligned gain; ML detection over the constellation.
pub struct RisModem<S> {
    constellation: QamConstellation<S>,
    bits: u32,
}

impl<S: Scalar> RisModem<S> {
    pub fn new(modulation_order: u32) -> Result<Self, ConfigError> {
        let constellation = QamConstellation::new(modulation_order)?;
        let bits = constellation.bits_per_symbol();
        Ok(Self { constellation, bits })
    }

    pub fn bits_per_interval(&self) -> u32 {
        self.bits
    }

    pub fn constellation(&self) -> &QamConstellation<S> {
        &self.constellation
    }

    pub fn transmit(&self, word: u64) -> Result<Complex<S>, ConfigError> {
        if self.bits < 64 && (word >> self.bits) != 0 {
            return Err(ConfigError::new("bits", "word wider than the bit budget"));
        }
        Ok(self.constellation.map(word as u32))
    }

    pub fn detect(&self, received: Complex<S>, effective_gain: S) -> u64 {
        u64::from(self.constellation.nearest(received, effective_gain))
    }
}

/// TSM-RIS transceiver: antenna-index bits plus a QAM symbol, joint ML over
/// `(antenna, symbol)` using the per-antenna aligned gains.
pub struct TsmModem<S> {
    constellation: QamConstellation<S>,
    antenna_bits: u32,
    bits: u32,
}

impl<S: Scalar> TsmModem<S> {
    pub fn new(modulation_order: u32, tx_antennas: u32) -> Result<Self, ConfigError> {
        let bits = benchmark_bits(Scheme::TsmRis, modulation_order, tx_antennas)?;
        let constellation = QamConstellation::new(modulation_order)?;
        Ok(Self {
            antenna_bits: tx_antennas.trailing_zeros(),
            constellation,
            bits,
        })
    }

    pub fn bits_per_interval(&self) -> u32 {
        self.bits
    }

    pub fn encode(&self, word: u64) -> Result<BaselineCodeword, ConfigError> {
        if self.bits < 64 && (word >> self.bits) != 0 {
            return Err(ConfigError::new("bits", "word wider than the bit budget"));
        }
        let fields = split_bits(word, &[self.constellation.bits_per_symbol(), self.antenna_bits]);
        Ok(BaselineCodeword {
            scheme: Scheme::TsmRis,
            label: fields[0] as u32,
            antenna_i: fields[1] as usize,
            antenna_q: fields[1] as usize,
            source_bits: word,
        })
    }

    /// Noiseless received value for a codeword under a realization.
    pub fn transmit(&self, cw: &BaselineCodeword, mimo: &MimoChannelRealization<S>) -> Complex<S> {
        self.constellation
            .map(cw.label)
            .scale(mimo.aligned_gains[cw.antenna_i])
    }

    /// Joint ML over `(antenna, symbol)`; the per-antenna inner minimum is a
    /// slicing decision, so the search is linear in `N_T`.
    pub fn detect(&self, received: Complex<S>, mimo: &MimoChannelRealization<S>) -> (usize, u64) {
        let mut best_antenna = 0usize;
        let mut best_label = 0u32;
        let mut best_metric = S::infinity();
        for (t, &gain) in mimo.aligned_gains.iter().enumerate() {
            let label = self.constellation.nearest(received, gain);
            let metric = (received - self.constellation.map(label).scale(gain)).norm_sqr();
            if metric < best_metric {
                best_metric = metric;
                best_antenna = t;
                best_label = label;
            }
        }
        (best_antenna, self.demap(best_label, best_antenna))
    }

    pub fn demap(&self, label: u32, antenna: usize) -> u64 {
        (u64::from(label) << self.antenna_bits) | antenna as u64
    }
}

/// TQSM-RIS transceiver: independent antennas for the in-phase and
/// quadrature components; the RIS aligns to the in-phase antenna and the
/// receiver searches `(antenna_i, antenna_q, symbol)` jointly.
pub struct TqsmModem<S> {
    constellation: QamConstellation<S>,
    antenna_bits: u32,
    bits: u32,
}

impl<S: Scalar> TqsmModem<S> {
    pub fn new(modulation_order: u32, tx_antennas: u32) -> Result<Self, ConfigError> {
        let bits = benchmark_bits(Scheme::TqsmRis, modulation_order, tx_antennas)?;
        let constellation = QamConstellation::new(modulation_order)?;
        Ok(Self {
            antenna_bits: tx_antennas.trailing_zeros(),
            constellation,
            bits,
        })
    }

    pub fn bits_per_interval(&self) -> u32 {
        self.bits
    }

    pub fn encode(&self, word: u64) -> Result<BaselineCodeword, ConfigError> {
        if self.bits < 64 && (word >> self.bits) != 0 {
            return Err(ConfigError::new("bits", "word wider than the bit budget"));
        }
        let fields = split_bits(
            word,
            &[
                self.constellation.bits_per_symbol(),
                self.antenna_bits,
                self.antenna_bits,
            ],
        );
        Ok(BaselineCodeword {
            scheme: Scheme::TqsmRis,
            label: fields[0] as u32,
            antenna_i: fields[1] as usize,
            antenna_q: fields[2] as usize,
            source_bits: word,
        })
    }

    /// Hypothesis response for `(antenna_i, antenna_q, label)` given the
    /// cross-gain matrix (row-major `aligned * n_t + active`).
    #[inline]
    pub fn hypothesis(
        &self,
        label: u32,
        antenna_i: usize,
        antenna_q: usize,
        mimo: &MimoChannelRealization<S>,
        cross: &[Complex<S>],
    ) -> Complex<S> {
        let x = self.constellation.map(label);
        let nt = mimo.tx_antennas();
        let a = mimo.aligned_gains[antenna_i];
        let b = cross[antenna_i * nt + antenna_q];
        // A * x_re + j * (B * x_im)
        let jbx = Complex::new(S::zero(), S::one()) * b.scale(x.im);
        Complex::new(a * x.re, S::zero()) + jbx
    }

    pub fn transmit(
        &self,
        cw: &BaselineCodeword,
        mimo: &MimoChannelRealization<S>,
        cross: &[Complex<S>],
    ) -> Complex<S> {
        self.hypothesis(cw.label, cw.antenna_i, cw.antenna_q, mimo, cross)
    }

    /// Exhaustive joint ML over `(antenna_i, antenna_q, symbol)`.
    pub fn detect(
        &self,
        received: Complex<S>,
        mimo: &MimoChannelRealization<S>,
        cross: &[Complex<S>],
    ) -> (usize, usize, u64) {
        let nt = mimo.tx_antennas();
        let m = self.constellation.order();
        let mut best = (0usize, 0usize, 0u32);
        let mut best_metric = S::infinity();
        for ti in 0..nt {
            for tq in 0..nt {
                for label in 0..m {
                    let hyp = self.hypothesis(label, ti, tq, mimo, cross);
                    let metric = (received - hyp).norm_sqr();
                    if metric < best_metric {
                        best_metric = metric;
                        best = (ti, tq, label);
                    }
                }
            }
        }
        (best.0, best.1, self.demap(best.2, best.0, best.1))
    }

    pub fn demap(&self, label: u32, antenna_i: usize, antenna_q: usize) -> u64 {
        (u64::from(label) << (2 * self.antenna_bits))
            | ((antenna_i as u64) << self.antenna_bits)
            | antenna_q as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cross_matrix_diagonal_is_aligned_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mimo = MimoChannelRealization::<f64>::sample(4, 8, 1.0, &mut rng);
        let cross = mimo.cross_matrix();
        for t in 0..4 {
            let b = cross[t * 4 + t];
            assert!(b.im.abs() < 1e-12 * mimo.aligned_gains[t]);
            assert_abs_diff_eq!(b.re, mimo.aligned_gains[t], epsilon = 1e-10);
            assert!(mimo.aligned_gains[t] >= 0.0);
        }
    }

    #[test]
    fn ris_round_trip_noiseless() {
        let modem = RisModem::<f64>::new(1024).unwrap();
        assert_eq!(modem.bits_per_interval(), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let word = rng.gen::<u64>() & 0x3ff;
            let x = modem.transmit(word).unwrap();
            let gain = rng.gen_range(0.05..20.0);
            assert_eq!(modem.detect(x.scale(gain), gain), word);
        }
        assert!(modem.transmit(1 << 10).is_err());
    }

    #[test]
    fn tsm_round_trip_noiseless_all_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let modem = TsmModem::<f64>::new(8, 4).unwrap();
        assert_eq!(modem.bits_per_interval(), 5);
        for word in 0..(1u64 << 5) {
            let cw = modem.encode(word).unwrap();
            let mimo = MimoChannelRealization::<f64>::sample(4, 16, 1.0, &mut rng);
            let y = modem.transmit(&cw, &mimo);
            let (antenna, bits) = modem.detect(y, &mimo);
            assert_eq!(bits, word);
            assert_eq!(antenna, cw.antenna_i);
        }
    }

    #[test]
    fn tqsm_round_trip_noiseless_all_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let modem = TqsmModem::<f64>::new(8, 4).unwrap();
        assert_eq!(modem.bits_per_interval(), 7);
        for word in 0..(1u64 << 7) {
            let cw = modem.encode(word).unwrap();
            let mimo = MimoChannelRealization::<f64>::sample(4, 16, 1.0, &mut rng);
            let cross = mimo.cross_matrix();
            let y = modem.transmit(&cw, &mimo, &cross);
            let (ti, tq, bits) = modem.detect(y, &mimo, &cross);
            assert_eq!(bits, word, "word {word:#b}");
            assert_eq!((ti, tq), (cw.antenna_i, cw.antenna_q));
        }
    }

    #[test]
    fn tsm_joint_ml_matches_brute_force() {
        // Independent oracle: enumerate every (antenna, symbol) metric.
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let modem = TsmModem::<f64>::new(4, 2).unwrap();
        for _ in 0..300 {
            let mimo = MimoChannelRealization::<f64>::sample(2, 4, 1.0, &mut rng);
            let y = complex_gaussian(8.0, &mut rng);
            let (antenna, bits) = modem.detect(y, &mimo);
            let mut best = (0usize, 0u32);
            let mut best_metric = f64::INFINITY;
            for t in 0..2usize {
                for label in 0..4u32 {
                    let hyp = modem
                        .constellation
                        .map(label)
                        .scale(mimo.aligned_gains[t]);
                    let metric = (y - hyp).norm_sqr();
                    if metric < best_metric {
                        best_metric = metric;
                        best = (t, label);
                    }
                }
            }
            assert_eq!(antenna, best.0);
            assert_eq!(bits, modem.demap(best.1, best.0));
        }
    }

    #[test]
    fn tqsm_with_equal_antennas_collapses_to_tsm() {
        // Constrained-equivalence oracle: with antenna_q forced equal to
        // antenna_i, the TQSM hypothesis equals the TSM one for every
        // (antenna, symbol), and the constrained detector agrees with TSM.
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let tqsm = TqsmModem::<f64>::new(4, 4).unwrap();
        let tsm = TsmModem::<f64>::new(4, 4).unwrap();
        for _ in 0..100 {
            let mimo = MimoChannelRealization::<f64>::sample(4, 8, 1.0, &mut rng);
            let cross = mimo.cross_matrix();
            for t in 0..4usize {
                for label in 0..4u32 {
                    let hyp_tqsm = tqsm.hypothesis(label, t, t, &mimo, &cross);
                    let hyp_tsm = tsm.constellation.map(label).scale(mimo.aligned_gains[t]);
                    assert!((hyp_tqsm - hyp_tsm).norm() < 1e-10);
                }
            }
            let y = complex_gaussian(4.0, &mut rng);
            // constrained TQSM search
            let mut best = (0usize, 0u32);
            let mut best_metric = f64::INFINITY;
            for t in 0..4usize {
                for label in 0..4u32 {
                    let metric = (y - tqsm.hypothesis(label, t, t, &mimo, &cross)).norm_sqr();
                    if metric < best_metric {
                        best_metric = metric;
                        best = (t, label);
                    }
                }
            }
            let (tsm_antenna, tsm_bits) = tsm.detect(y, &mimo);
            assert_eq!(best.0, tsm_antenna);
            assert_eq!(tsm.demap(best.1, best.0), tsm_bits);
        }
    }

    #[test]
    fn word_width_checks() {
        let tsm = TsmModem::<f64>::new(8, 4).unwrap();
        assert!(tsm.encode(1 << 5).is_err());
        let tqsm = TqsmModem::<f64>::new(8, 4).unwrap();
        assert!(tqsm.encode(1 << 7).is_err());
    }
}
