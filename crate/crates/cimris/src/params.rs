//! System configuration, validation, and the bit-budget arithmetic every
//! other module consumes.
//!
//! A symbol interval carries `u = u1 + 2*u2` bits for the CIM-RIS scheme:
//! `u1 = log2(M)` bits select the QAM symbol and two groups of
//! `u2 = log2(L)` bits select the in-phase and quadrature spreading codes.
//! The benchmark schemes carry `log2(M)` bits plus zero, one or two groups
//! of `log2(N_T)` antenna-index bits.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Configuration error naming the offending field.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid `{field}`: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

/// Transmission scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    CimRis,
    Ris,
    TsmRis,
    TqsmRis,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::CimRis, Scheme::Ris, Scheme::TsmRis, Scheme::TqsmRis];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::CimRis => "cim-ris",
            Scheme::Ris => "ris",
            Scheme::TsmRis => "tsm-ris",
            Scheme::TqsmRis => "tqsm-ris",
        }
    }

    /// Stable tag mixed into per-trial random substreams.
    pub(crate) fn stream_tag(&self) -> u64 {
        match self {
            Scheme::CimRis => 0x43494d5f52495331,
            Scheme::Ris => 0x5249535f5f5f5f31,
            Scheme::TsmRis => 0x54534d5f52495331,
            Scheme::TqsmRis => 0x5451534d5f524931,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cim-ris" | "cimris" | "cim_ris" => Ok(Scheme::CimRis),
            "ris" => Ok(Scheme::Ris),
            "tsm-ris" | "tsmris" | "tsm_ris" => Ok(Scheme::TsmRis),
            "tqsm-ris" | "tqsmris" | "tqsm_ris" => Ok(Scheme::TqsmRis),
            other => Err(ConfigError::new(
                "scheme",
                format!("unknown scheme `{other}` (expected cim-ris, ris, tsm-ris or tqsm-ris)"),
            )),
        }
    }
}

/// Bits carried per symbol interval by the CIM-RIS scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BitBudget {
    /// Bits mapped to the QAM symbol (`u1`).
    pub symbol_bits: u32,
    /// Bits mapped to one spreading-code index; there is one group for the
    /// in-phase branch and one for the quadrature branch (`u2`).
    pub index_bits: u32,
    /// Total bits per symbol interval (`u1 + 2*u2`).
    pub total_bits: u32,
}

fn log2_exact(field: &'static str, value: u32) -> Result<u32, ConfigError> {
    if value == 0 || !value.is_power_of_two() {
        return Err(ConfigError::new(field, format!("{value} is not a power of two")));
    }
    Ok(value.trailing_zeros())
}

/// Derive the CIM-RIS bit budget for a square-QAM constellation.
///
/// `modulation_order` must be a power of 4 (square QAM), `code_count` a power
/// of 2; this is the strict contract the analytical error expressions rely
/// on. Simulation-only configurations with rectangular QAM go through
/// [`BitBudget::for_simulation`].
pub fn derive_bit_budget(modulation_order: u32, code_count: u32) -> Result<BitBudget, ConfigError> {
    let u1 = log2_exact("modulation_order", modulation_order)?;
    if modulation_order < 4 || u1 % 2 != 0 {
        return Err(ConfigError::new(
            "modulation_order",
            format!("{modulation_order} is not square QAM (expected a power of 4, at least 4)"),
        ));
    }
    BitBudget::for_simulation(modulation_order, code_count)
}

impl BitBudget {
    /// Bit budget without the square-QAM restriction (any power-of-two
    /// modulation order of at least 4). Rectangular constellations are
    /// simulation-only; the analytical path rejects them separately.
    pub fn for_simulation(modulation_order: u32, code_count: u32) -> Result<Self, ConfigError> {
        let u1 = log2_exact("modulation_order", modulation_order)?;
        if modulation_order < 4 {
            return Err(ConfigError::new(
                "modulation_order",
                format!("{modulation_order} is below the minimum order 4"),
            ));
        }
        let u2 = log2_exact("code_count", code_count)?;
        if code_count < 2 {
            return Err(ConfigError::new(
                "code_count",
                format!("{code_count} spreading codes cannot carry index bits (need at least 2)"),
            ));
        }
        Ok(Self {
            symbol_bits: u1,
            index_bits: u2,
            total_bits: u1 + 2 * u2,
        })
    }
}

/// Bits per symbol interval for a benchmark scheme.
///
/// Traditional RIS carries `log2(M)`, TSM-RIS adds one antenna-index group of
/// `log2(N_T)`, TQSM-RIS adds two.
pub fn benchmark_bits(scheme: Scheme, modulation_order: u32, tx_antennas: u32) -> Result<u32, ConfigError> {
    let u1 = log2_exact("modulation_order", modulation_order)?;
    match scheme {
        Scheme::CimRis => Err(ConfigError::new(
            "scheme",
            "cim-ris carries code-index bits; use derive_bit_budget",
        )),
        Scheme::Ris => Ok(u1),
        Scheme::TsmRis => Ok(u1 + log2_exact("tx_antennas", tx_antennas)?),
        Scheme::TqsmRis => Ok(u1 + 2 * log2_exact("tx_antennas", tx_antennas)?),
    }
}

/// Immutable-after-validation system configuration shared by every module.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig<S> {
    pub scheme: Scheme,
    /// QAM constellation order `M`.
    pub modulation_order: u32,
    /// Number of spreading codes `L`.
    pub code_count: u32,
    /// Chips per symbol interval `K`.
    pub chip_count: u32,
    /// Number of RIS reflecting elements `N`.
    pub ris_elements: u32,
    /// Transmit antennas `N_T` (benchmark schemes only).
    pub tx_antennas: u32,
    /// SNR grid in dB (`10*log10(Eb/N0)`), strictly increasing.
    pub snr_grid_db: Vec<S>,
    pub trials_per_point: u64,
    pub master_seed: u64,
    /// Per-link fading variance `sigma^2` (both hops).
    pub link_variance: S,
    /// Override for the in-phase amplitude the analytical code-index error
    /// is evaluated at; defaults to the constellation's RMS in-phase level.
    pub analytical_inphase_rms: Option<S>,
}

impl<S: Scalar> Default for SystemConfig<S> {
    fn default() -> Self {
        Self {
            scheme: Scheme::CimRis,
            modulation_order: 4,
            code_count: 16,
            chip_count: 32,
            ris_elements: 64,
            tx_antennas: 2,
            snr_grid_db: parse_snr_grid("-40:2:0").expect("default grid"),
            trials_per_point: 100_000,
            master_seed: 42,
            link_variance: S::one(),
            analytical_inphase_rms: None,
        }
    }
}

impl<S: Scalar> SystemConfig<S> {
    /// Validate every invariant; returns the configuration unchanged so it
    /// can be treated as read-only shared state afterwards.
    pub fn validated(self) -> Result<Self, ConfigError> {
        let budget = self.bit_budget()?;
        if budget.total_bits == 0 || budget.total_bits > 62 {
            return Err(ConfigError::new(
                "modulation_order",
                format!("bit budget {} outside the supported 1..=62 range", budget.total_bits),
            ));
        }
        let k_log = log2_exact("chip_count", self.chip_count)?;
        let _ = k_log;
        if self.code_count > self.chip_count {
            return Err(ConfigError::new(
                "code_count",
                format!(
                    "{} codes exceed the {}-chip Hadamard order (need L <= K)",
                    self.code_count, self.chip_count
                ),
            ));
        }
        if self.ris_elements == 0 {
            return Err(ConfigError::new("ris_elements", "need at least one reflecting element"));
        }
        log2_exact("tx_antennas", self.tx_antennas)?;
        if self.trials_per_point == 0 {
            return Err(ConfigError::new("trials_per_point", "need at least one trial"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(ConfigError::new("snr_grid_db", "empty SNR grid"));
        }
        if self
            .snr_grid_db
            .windows(2)
            .any(|w| !(w[1] > w[0]) || !w[0].is_finite())
            || !self.snr_grid_db.last().unwrap().is_finite()
        {
            return Err(ConfigError::new(
                "snr_grid_db",
                "SNR grid must be finite and strictly increasing",
            ));
        }
        if !(self.link_variance > S::zero()) {
            return Err(ConfigError::new("link_variance", "sigma^2 must be positive"));
        }
        Ok(self)
    }

    /// Bit budget for the configured scheme.
    pub fn bit_budget(&self) -> Result<BitBudget, ConfigError> {
        BitBudget::for_simulation(self.modulation_order, self.code_count)
    }

    /// Bits per symbol interval for the configured scheme.
    pub fn bits_per_interval(&self) -> Result<u32, ConfigError> {
        match self.scheme {
            Scheme::CimRis => Ok(self.bit_budget()?.total_bits),
            other => benchmark_bits(other, self.modulation_order, self.tx_antennas),
        }
    }

    /// True when the constellation is square (`log2(M)` even), which the
    /// analytical symbol-error bound requires.
    pub fn is_square_qam(&self) -> bool {
        self.modulation_order.is_power_of_two() && self.modulation_order.trailing_zeros() % 2 == 0
    }
}

/// Parse an SNR grid given either as `start:step:stop` (inclusive, dB) or as
/// a comma-separated list of dB values.
pub fn parse_snr_grid<S: Scalar>(spec: &str) -> Result<Vec<S>, ConfigError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(ConfigError::new("snr_grid_db", "empty SNR grid specification"));
    }
    let parse =
        |tok: &str| -> Result<f64, ConfigError> {
            tok.trim().parse::<f64>().map_err(|_| {
                ConfigError::new("snr_grid_db", format!("`{tok}` is not a number"))
            })
        };
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(ConfigError::new(
                "snr_grid_db",
                format!("`{spec}` is not of the form start:step:stop"),
            ));
        }
        let (start, step, stop) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0) {
            return Err(ConfigError::new("snr_grid_db", "step must be positive"));
        }
        if stop < start {
            return Err(ConfigError::new("snr_grid_db", "stop must not be below start"));
        }
        let count = ((stop - start) / step + 0.5).floor() as usize + 1;
        (0..count).map(|i| start + step * i as f64).collect()
    } else {
        spec.split(',').map(parse).collect::<Result<_, _>>()?
    };
    Ok(values.into_iter().map(S::of).collect())
}

/// Flat key-value configuration file contents; every key mirrors a CLI flag
/// of the same name and overrides the default, while explicit CLI flags win
/// over the file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub scheme: Option<String>,
    pub m: Option<u32>,
    pub l: Option<u32>,
    pub k: Option<u32>,
    pub n: Option<u32>,
    pub n_t: Option<u32>,
    pub snr: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub sigma2: Option<f64>,
    pub xre_rms: Option<f64>,
}

impl ConfigOverlay {
    /// Parse the flat `key = value` configuration format (a TOML subset).
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("config", e.to_string()))
    }

    /// Apply the overlay on top of an existing configuration.
    pub fn apply<S: Scalar>(&self, config: &mut SystemConfig<S>) -> Result<(), ConfigError> {
        if let Some(scheme) = &self.scheme {
            config.scheme = scheme.parse()?;
        }
        if let Some(m) = self.m {
            config.modulation_order = m;
        }
        if let Some(l) = self.l {
            config.code_count = l;
        }
        if let Some(k) = self.k {
            config.chip_count = k;
        }
        if let Some(n) = self.n {
            config.ris_elements = n;
        }
        if let Some(n_t) = self.n_t {
            config.tx_antennas = n_t;
        }
        if let Some(snr) = &self.snr {
            config.snr_grid_db = parse_snr_grid(snr)?;
        }
        if let Some(trials) = self.trials {
            config.trials_per_point = trials;
        }
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(sigma2) = self.sigma2 {
            config.link_variance = S::of(sigma2);
        }
        if let Some(xre) = self.xre_rms {
            config.analytical_inphase_rms = Some(S::of(xre));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_budget_reference_points() {
        let b = derive_bit_budget(4, 16).unwrap();
        assert_eq!((b.symbol_bits, b.index_bits, b.total_bits), (2, 4, 10));
        let b = derive_bit_budget(4, 2).unwrap();
        assert_eq!((b.symbol_bits, b.index_bits, b.total_bits), (2, 1, 4));
    }

    #[test]
    fn bit_budget_rejects_rectangular_qam() {
        let err = derive_bit_budget(8, 4).unwrap_err();
        assert_eq!(err.field, "modulation_order");
        // but the simulation-only path accepts it
        let b = BitBudget::for_simulation(8, 16).unwrap();
        assert_eq!((b.symbol_bits, b.index_bits, b.total_bits), (3, 4, 11));
    }

    #[test]
    fn bit_budget_rejects_non_powers() {
        assert!(derive_bit_budget(12, 4).is_err());
        assert!(derive_bit_budget(4, 3).is_err());
        assert!(BitBudget::for_simulation(2, 4).is_err());
    }

    #[test]
    fn benchmark_bits_reference_rows() {
        assert_eq!(benchmark_bits(Scheme::TsmRis, 8, 4).unwrap(), 5);
        assert_eq!(benchmark_bits(Scheme::TqsmRis, 8, 4).unwrap(), 7);
        assert_eq!(benchmark_bits(Scheme::Ris, 4, 2).unwrap(), 2);
        assert!(benchmark_bits(Scheme::CimRis, 4, 2).is_err());
    }

    #[test]
    fn data_rate_rows_combine_budgets() {
        // (N_T, M, L) -> (cim, tsm, tqsm, ris)
        for (n_t, m, l, expect) in [
            (2u32, 4u32, 8u32, (8u32, 3u32, 4u32, 2u32)),
            (4, 8, 8, (9, 5, 7, 3)),
            (8, 8, 16, (11, 6, 9, 3)),
        ] {
            let cim = BitBudget::for_simulation(m, l).unwrap().total_bits;
            let tsm = benchmark_bits(Scheme::TsmRis, m, n_t).unwrap();
            let tqsm = benchmark_bits(Scheme::TqsmRis, m, n_t).unwrap();
            let ris = benchmark_bits(Scheme::Ris, m, n_t).unwrap();
            assert_eq!((cim, tsm, tqsm, ris), expect);
        }
    }

    #[test]
    fn snr_grid_forms() {
        let grid: Vec<f64> = parse_snr_grid("-40:2:0").unwrap();
        assert_eq!(grid.len(), 21);
        assert_eq!(grid[0], -40.0);
        assert_eq!(*grid.last().unwrap(), 0.0);
        let grid: Vec<f64> = parse_snr_grid("-3, -1, 2.5").unwrap();
        assert_eq!(grid, vec![-3.0, -1.0, 2.5]);
        assert!(parse_snr_grid::<f64>("0:-1:10").is_err());
        assert!(parse_snr_grid::<f64>("a:b").is_err());
    }

    #[test]
    fn config_validation_names_fields() {
        let mut cfg = SystemConfig::<f64>::default();
        cfg.code_count = 64;
        cfg.chip_count = 32;
        let err = cfg.validated().unwrap_err();
        assert_eq!(err.field, "code_count");

        let mut cfg = SystemConfig::<f64>::default();
        cfg.chip_count = 24;
        assert_eq!(cfg.validated().unwrap_err().field, "chip_count");

        let mut cfg = SystemConfig::<f64>::default();
        cfg.snr_grid_db = vec![0.0, 0.0];
        assert_eq!(cfg.validated().unwrap_err().field, "snr_grid_db");

        assert!(SystemConfig::<f64>::default().validated().is_ok());
    }

    #[test]
    fn overlay_round_trip() {
        let overlay = ConfigOverlay::from_toml_str(
            "m = 16\nl = 4\nsnr = \"-10:5:0\"\nscheme = \"ris\"\nseed = 7\n",
        )
        .unwrap();
        let mut cfg = SystemConfig::<f64>::default();
        overlay.apply(&mut cfg).unwrap();
        assert_eq!(cfg.modulation_order, 16);
        assert_eq!(cfg.code_count, 4);
        assert_eq!(cfg.scheme, Scheme::Ris);
        assert_eq!(cfg.snr_grid_db, vec![-10.0, -5.0, 0.0]);
        assert_eq!(cfg.master_seed, 7);
        assert!(ConfigOverlay::from_toml_str("bogus_key = 1").is_err());
    }
}
