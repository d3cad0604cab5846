//! Walsh-Hadamard spreading codes and correlation despreading.
//!
//! Chips are stored as `±1` integers so orthogonality checks stay exact; the
//! `1/sqrt(K)` transmit normalization that makes the average symbol energy
//! unity lives in the transceiver, not here.

use crate::scalar::Scalar;
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("chip count {0} is not a power of two")]
    ChipCountNotPowerOfTwo(u32),
    #[error("requested {requested} codes from a set of {available}")]
    TooManyCodes { requested: u32, available: u32 },
    #[error("chip vector length {got} does not match code length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("code index {index} out of range (have {count} codes)")]
    IndexOutOfRange { index: usize, count: usize },
}

/// A set of mutually orthogonal ±1 spreading codes (rows of a Sylvester
/// Hadamard matrix).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadingCodeSet {
    chips: Vec<i8>,
    code_count: usize,
    chip_count: usize,
}

/// Build the full K x K Sylvester Hadamard matrix (K a power of two).
pub fn sylvester_hadamard(chip_count: u32) -> Result<SpreadingCodeSet, CodeError> {
    if chip_count == 0 || !chip_count.is_power_of_two() {
        return Err(CodeError::ChipCountNotPowerOfTwo(chip_count));
    }
    let k = chip_count as usize;
    let mut chips = vec![0i8; k * k];
    chips[0] = 1;
    let mut size = 1;
    // Sylvester doubling: H_{2n} = [[H, H], [H, -H]].
    while size < k {
        for r in 0..size {
            for c in 0..size {
                let v = chips[r * k + c];
                chips[r * k + c + size] = v;
                chips[(r + size) * k + c] = v;
                chips[(r + size) * k + c + size] = -v;
            }
        }
        size *= 2;
    }
    Ok(SpreadingCodeSet {
        chips,
        code_count: k,
        chip_count: k,
    })
}

impl SpreadingCodeSet {
    /// Keep the first `code_count` rows of the construction, deterministically.
    pub fn select_codes(&self, code_count: u32) -> Result<SpreadingCodeSet, CodeError> {
        let l = code_count as usize;
        if l > self.code_count {
            return Err(CodeError::TooManyCodes {
                requested: code_count,
                available: self.code_count as u32,
            });
        }
        Ok(SpreadingCodeSet {
            chips: self.chips[..l * self.chip_count].to_vec(),
            code_count: l,
            chip_count: self.chip_count,
        })
    }

    /// Convenience constructor: first `code_count` rows of the `chip_count`
    /// Sylvester matrix.
    pub fn new(chip_count: u32, code_count: u32) -> Result<SpreadingCodeSet, CodeError> {
        sylvester_hadamard(chip_count)?.select_codes(code_count)
    }

    pub fn code_count(&self) -> usize {
        self.code_count
    }

    pub fn chip_count(&self) -> usize {
        self.chip_count
    }

    /// Average per-chip energy; exactly 1 for ±1 chips.
    pub fn chip_energy<S: Scalar>(&self) -> S {
        S::one()
    }

    pub fn row(&self, index: usize) -> Result<&[i8], CodeError> {
        if index >= self.code_count {
            return Err(CodeError::IndexOutOfRange {
                index,
                count: self.code_count,
            });
        }
        Ok(&self.chips[index * self.chip_count..(index + 1) * self.chip_count])
    }

    /// Exact integer correlation between two rows (K on the diagonal, 0 off).
    pub fn row_dot(&self, i: usize, j: usize) -> Result<i64, CodeError> {
        let a = self.row(i)?;
        let b = self.row(j)?;
        Ok(a.iter()
            .zip(b)
            .map(|(&x, &y)| i64::from(x) * i64::from(y))
            .sum())
    }

    /// Correlate complex chips against code `index`: `sum_k w[index][k] * chips[k]`.
    ///
    /// Applied to the real and imaginary parts separately by linearity, so the
    /// real part of the result is the in-phase branch statistic and the
    /// imaginary part the quadrature one.
    pub fn despread<S: Scalar>(
        &self,
        chips: &[Complex<S>],
        index: usize,
    ) -> Result<Complex<S>, CodeError> {
        if chips.len() != self.chip_count {
            return Err(CodeError::LengthMismatch {
                expected: self.chip_count,
                got: chips.len(),
            });
        }
        let code = self.row(index)?;
        let mut acc = Complex::new(S::zero(), S::zero());
        for (&w, &c) in code.iter().zip(chips) {
            if w > 0 {
                acc += c;
            } else {
                acc -= c;
            }
        }
        Ok(acc)
    }

    /// CSV rendering of the code matrix (rows = codes, entries ±1).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for r in 0..self.code_count {
            let row = self.row(r).expect("row in range");
            let line: Vec<String> = row.iter().map(|&v| i32::from(v).to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use proptest::prelude::*;

    #[test]
    fn base_cases() {
        let h1 = sylvester_hadamard(1).unwrap();
        assert_eq!(h1.row(0).unwrap(), &[1]);
        let h2 = sylvester_hadamard(2).unwrap();
        assert_eq!(h2.row(0).unwrap(), &[1, 1]);
        assert_eq!(h2.row(1).unwrap(), &[1, -1]);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(
            sylvester_hadamard(12),
            Err(CodeError::ChipCountNotPowerOfTwo(12))
        ));
        assert!(sylvester_hadamard(0).is_err());
    }

    #[test]
    fn four_by_four_gram_is_scaled_identity() {
        // Direct multiplication oracle: H * H^T = K * I.
        let h = sylvester_hadamard(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 4 } else { 0 };
                assert_eq!(h.row_dot(i, j).unwrap(), expect, "({i},{j})");
            }
        }
    }

    #[test]
    fn selection_is_deterministic_prefix() {
        let full = sylvester_hadamard(4).unwrap();
        let two = full.select_codes(2).unwrap();
        assert_eq!(two.row(0).unwrap(), full.row(0).unwrap());
        assert_eq!(two.row(1).unwrap(), full.row(1).unwrap());
        assert!(matches!(
            full.select_codes(5),
            Err(CodeError::TooManyCodes { .. })
        ));
    }

    #[test]
    fn selected_subset_keeps_orthogonality() {
        let set = SpreadingCodeSet::new(32, 16).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expect = if i == j { 32 } else { 0 };
                assert_eq!(set.row_dot(i, j).unwrap(), expect);
            }
        }
    }

    #[test]
    fn despread_matches_correlation_identities() {
        let set = SpreadingCodeSet::new(8, 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let chips: Vec<Complex<f64>> = set
                    .row(j)
                    .unwrap()
                    .iter()
                    .map(|&w| Complex::new(f64::from(w), 0.0))
                    .collect();
                let z = set.despread(&chips, i).unwrap();
                let expect = if i == j { 8.0 } else { 0.0 };
                assert_eq!(z, Complex::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn despread_expands_algebraically() {
        // chips = a*w_i + noise => K*a + sum(w_i*noise), exactly.
        let set = SpreadingCodeSet::new(4, 4).unwrap();
        let a = Complex::new(0.75f64, -1.25);
        let noise = [
            Complex::new(0.5f64, 0.25),
            Complex::new(-1.0, 0.125),
            Complex::new(0.0625, -0.5),
            Complex::new(2.0, 1.0),
        ];
        let i = 2;
        let chips: Vec<Complex<f64>> = set
            .row(i)
            .unwrap()
            .iter()
            .zip(&noise)
            .map(|(&w, &n)| a * f64::from(w) + n)
            .collect();
        let mut expected = a * 4.0;
        for (&w, &n) in set.row(i).unwrap().iter().zip(&noise) {
            expected += n * f64::from(w);
        }
        let got = set.despread(&chips, i).unwrap();
        // Dyadic-rational inputs keep the arithmetic exact.
        assert_eq!(got, expected);
    }

    #[test]
    fn despread_length_mismatch() {
        let set = SpreadingCodeSet::new(8, 4).unwrap();
        let chips = vec![Complex::new(1.0f64, 0.0); 7];
        assert!(matches!(
            set.despread(&chips, 0),
            Err(CodeError::LengthMismatch { expected: 8, got: 7 })
        ));
        assert!(set.despread(&vec![Complex::new(0.0f64, 0.0); 8], 4).is_err());
    }

    #[test]
    fn csv_dump_shape() {
        let set = SpreadingCodeSet::new(4, 2).unwrap();
        assert_eq!(set.to_csv_string(), "1,1,1,1\n1,-1,1,-1\n");
    }

    proptest! {
        // Spreading a complex scalar through any index and despreading with
        // the same index recovers K times the scalar.
        #[test]
        fn spread_despread_recovers_scalar(
            k_log in 1u32..=7,
            idx_seed in 0u32..1000,
            re in -4.0f64..4.0,
            im in -4.0f64..4.0,
        ) {
            let k = 1u32 << k_log;
            let set = SpreadingCodeSet::new(k, k).unwrap();
            let idx = (idx_seed % k) as usize;
            let a = Complex::new(re, im);
            let chips: Vec<Complex<f64>> = set
                .row(idx)
                .unwrap()
                .iter()
                .map(|&w| a * f64::from(w))
                .collect();
            let z = set.despread(&chips, idx).unwrap();
            let scale = f64::from(k);
            prop_assert!((z - a * scale).norm() < 1e-12 * scale);
        }
    }
}
