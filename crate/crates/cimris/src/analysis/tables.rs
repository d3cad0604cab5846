//! Reference comparison tables: energy savings, receiver complexity, and
//! data rates, regenerated from the formula calculators.

use super::{complexity_real_mults, energy_saving_percent, AnalysisError};
use crate::params::{benchmark_bits, BitBudget, Scheme};
use crate::scalar::Scalar;

/// Energy saved by CIM-RIS relative to each benchmark at equal symbol rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySavingRow<S> {
    pub modulation_order: u32,
    pub tx_antennas: u32,
    /// RF chain count; reported only, it does not enter the formula.
    pub rf_chains: u32,
    pub code_count: u32,
    pub vs_ris: S,
    pub vs_tsm: S,
    pub vs_tqsm: S,
}

impl<S: Scalar> EnergySavingRow<S> {
    pub fn compute(
        modulation_order: u32,
        tx_antennas: u32,
        rf_chains: u32,
        code_count: u32,
    ) -> Result<Self, AnalysisError> {
        let total = BitBudget::for_simulation(modulation_order, code_count)?.total_bits;
        let saving = |scheme| -> Result<S, AnalysisError> {
            energy_saving_percent(total, benchmark_bits(scheme, modulation_order, tx_antennas)?)
        };
        Ok(Self {
            modulation_order,
            tx_antennas,
            rf_chains,
            code_count,
            vs_ris: saving(Scheme::Ris)?,
            vs_tsm: saving(Scheme::TsmRis)?,
            vs_tqsm: saving(Scheme::TqsmRis)?,
        })
    }
}

/// The published comparison rows: (M, N_T, n_rf, L).
pub const ENERGY_REFERENCE_PARAMS: [(u32, u32, u32, u32); 3] =
    [(4, 2, 2, 4), (8, 8, 4, 16), (32, 16, 6, 32)];

pub fn energy_reference_rows<S: Scalar>() -> Result<Vec<EnergySavingRow<S>>, AnalysisError> {
    ENERGY_REFERENCE_PARAMS
        .iter()
        .map(|&(m, nt, nrf, l)| EnergySavingRow::compute(m, nt, nrf, l))
        .collect()
}

/// Receiver complexity of every scheme for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityRow<S> {
    pub modulation_order: u32,
    pub tx_antennas: u32,
    pub code_count: u32,
    pub chip_count: u32,
    pub ris_elements: u32,
    pub cim_ris: S,
    pub ris: S,
    pub tsm_ris: S,
    pub tqsm_ris: S,
}

impl<S: Scalar> ComplexityRow<S> {
    pub fn compute(
        modulation_order: u32,
        tx_antennas: u32,
        code_count: u32,
        chip_count: u32,
        ris_elements: u32,
    ) -> Self {
        let eval = |scheme| {
            complexity_real_mults(
                scheme,
                modulation_order,
                ris_elements,
                tx_antennas,
                chip_count,
                code_count,
            )
        };
        Self {
            modulation_order,
            tx_antennas,
            code_count,
            chip_count,
            ris_elements,
            cim_ris: eval(Scheme::CimRis),
            ris: eval(Scheme::Ris),
            tsm_ris: eval(Scheme::TsmRis),
            tqsm_ris: eval(Scheme::TqsmRis),
        }
    }
}

/// The two published comparison parameter sets: (M, N_T, L, K, N).
pub const COMPLEXITY_REFERENCE_PARAMS: [(u32, u32, u32, u32, u32); 2] =
    [(8, 4, 8, 16, 64), (16, 8, 16, 32, 256)];

pub fn complexity_reference_rows<S: Scalar>() -> Vec<ComplexityRow<S>> {
    COMPLEXITY_REFERENCE_PARAMS
        .iter()
        .map(|&(m, nt, l, k, n)| ComplexityRow::compute(m, nt, l, k, n))
        .collect()
}

/// Bits per symbol interval carried by each scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataRateRow {
    pub tx_antennas: u32,
    pub modulation_order: u32,
    pub code_count: u32,
    pub cim_ris: u32,
    pub tsm_ris: u32,
    pub tqsm_ris: u32,
    pub ris: u32,
}

impl DataRateRow {
    pub fn compute(tx_antennas: u32, modulation_order: u32, code_count: u32) -> Result<Self, AnalysisError> {
        Ok(Self {
            tx_antennas,
            modulation_order,
            code_count,
            cim_ris: BitBudget::for_simulation(modulation_order, code_count)?.total_bits,
            tsm_ris: benchmark_bits(Scheme::TsmRis, modulation_order, tx_antennas)?,
            tqsm_ris: benchmark_bits(Scheme::TqsmRis, modulation_order, tx_antennas)?,
            ris: benchmark_bits(Scheme::Ris, modulation_order, tx_antennas)?,
        })
    }
}

/// The published comparison rows: (N_T, M, L).
pub const DATA_RATE_REFERENCE_PARAMS: [(u32, u32, u32); 3] = [(2, 4, 8), (4, 8, 8), (8, 8, 16)];

pub fn data_rate_reference_rows() -> Result<Vec<DataRateRow>, AnalysisError> {
    DATA_RATE_REFERENCE_PARAMS
        .iter()
        .map(|&(nt, m, l)| DataRateRow::compute(nt, m, l))
        .collect()
}
