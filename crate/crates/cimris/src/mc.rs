//! Monte Carlo BER estimation over SNR grids.
//!
//! Every trial draws from a random substream derived only from
//! `(master_seed, scheme, point index, trial index)` through a 64-bit mixing
//! chain, so results are byte-identical regardless of worker count or
//! scheduling order. Trials are processed in fixed-size batches; the
//! optional early stop is checked at batch boundaries, which keeps the
//! recorded trial count deterministic too.

use crate::baselines::{MimoChannelRealization, RisModem, TqsmModem, TsmModem};
use crate::channel::{apply_channel_into, complex_gaussian, sample_realization, NoiseModel};
use crate::params::{ConfigError, Scheme, SystemConfig};
use crate::scalar::Scalar;
use crate::txrx::CimRisModem;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

/// Trials per parallel batch; a constant so that worker count never affects
/// where early stopping lands.
const BATCH: u64 = 8192;

/// splitmix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Substream for one trial of one sweep point.
fn trial_rng(master_seed: u64, scheme: Scheme, point: u64, trial: u64) -> ChaCha8Rng {
    let mut h = mix64(master_seed ^ scheme.stream_tag());
    h = mix64(h ^ point.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    h = mix64(h ^ trial);
    ChaCha8Rng::seed_from_u64(h)
}

/// Outcome of one symbol interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialOutcome {
    pub bit_errors: u32,
    pub index_errors: u32,
    /// Zero-gain channel draws (diagnostic; measure-zero in theory).
    pub degenerate: u32,
}

/// One scheme's transmit/receive chain driven by the engine.
pub trait Link<S: Scalar>: Sync {
    fn scheme(&self) -> Scheme;
    fn bits_per_interval(&self) -> u32;
    /// Average symbol energy (unity for every scheme here).
    fn symbol_energy(&self) -> S {
        S::one()
    }
    /// Run one symbol interval: fresh bits, fresh channel, fresh noise.
    fn run_trial(&self, rng: &mut ChaCha8Rng, n0: S, noise_enabled: bool) -> TrialOutcome;
}

/// Noise variance for an SNR point: `SNR(dB) = 10 log10(Eb/N0)` with
/// `Eb = Es/u`, so `N0 = (Es/u) / 10^(snr/10)`.
pub fn noise_variance_for_snr<S: Scalar>(snr_db: S, total_bits: u32, symbol_energy: S) -> S {
    let eb = symbol_energy / S::of(f64::from(total_bits));
    eb / S::of(10.0).powf(snr_db / S::of(10.0))
}

/// BER estimate at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerPoint<S> {
    pub snr_db: S,
    pub trials: u64,
    pub bit_errors: u64,
    pub symbol_intervals: u64,
    pub index_errors: u64,
    pub degenerate_channels: u64,
    pub ber: S,
}

/// Ordered sweep over an SNR grid.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult<S> {
    pub scheme: Scheme,
    pub points: Vec<BerPoint<S>>,
    pub seed: u64,
    pub wall_time_ms: u128,
}

/// Execution options independent of the link configuration.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub trials_per_point: u64,
    /// Stop a point once this many bit errors accumulate (checked at batch
    /// boundaries); `None` runs every trial.
    pub early_stop_errors: Option<u64>,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Test hook: with noise disabled the channel is applied exactly.
    pub noise_enabled: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            trials_per_point: 100_000,
            early_stop_errors: Some(200),
            workers: None,
            noise_enabled: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    bit_errors: u64,
    index_errors: u64,
    degenerate: u64,
}

impl Accum {
    fn add(self, o: TrialOutcome) -> Self {
        Self {
            bit_errors: self.bit_errors + u64::from(o.bit_errors),
            index_errors: self.index_errors + u64::from(o.index_errors),
            degenerate: self.degenerate + u64::from(o.degenerate),
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            bit_errors: self.bit_errors + o.bit_errors,
            index_errors: self.index_errors + o.index_errors,
            degenerate: self.degenerate + o.degenerate,
        }
    }
}

/// Estimate the BER of `link` at one SNR point.
pub fn run_point<S: Scalar, L: Link<S>>(
    link: &L,
    snr_db: S,
    point_index: u64,
    master_seed: u64,
    options: &RunOptions,
) -> BerPoint<S> {
    let n0 = noise_variance_for_snr(snr_db, link.bits_per_interval(), link.symbol_energy());
    let scheme = link.scheme();
    let mut acc = Accum::default();
    let mut done = 0u64;
    while done < options.trials_per_point {
        let batch = BATCH.min(options.trials_per_point - done);
        let batch_acc = (done..done + batch)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(master_seed, scheme, point_index, trial);
                link.run_trial(&mut rng, n0, options.noise_enabled)
            })
            .fold(Accum::default, Accum::add)
            .reduce(Accum::default, Accum::merge);
        acc = acc.merge(batch_acc);
        done += batch;
        if let Some(target) = options.early_stop_errors {
            if acc.bit_errors >= target {
                break;
            }
        }
    }
    let denom = S::of(done as f64) * S::of(f64::from(link.bits_per_interval()));
    BerPoint {
        snr_db,
        trials: done,
        bit_errors: acc.bit_errors,
        symbol_intervals: done,
        index_errors: acc.index_errors,
        degenerate_channels: acc.degenerate,
        ber: S::of(acc.bit_errors as f64) / denom,
    }
}

/// Sweep the full SNR grid; deterministic for a given `(link, grid, seed)`
/// regardless of worker count.
pub fn sweep<S: Scalar, L: Link<S>>(
    link: &L,
    snr_grid_db: &[S],
    master_seed: u64,
    options: &RunOptions,
) -> Result<SweepResult<S>, ConfigError> {
    if snr_grid_db.is_empty() {
        return Err(ConfigError::new("snr_grid_db", "empty SNR grid"));
    }
    if snr_grid_db.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ConfigError::new(
            "snr_grid_db",
            "SNR grid must be strictly increasing",
        ));
    }
    let start = Instant::now();
    let run = || -> Vec<BerPoint<S>> {
        snr_grid_db
            .iter()
            .enumerate()
            .map(|(j, &snr)| run_point(link, snr, j as u64, master_seed, options))
            .collect()
    };
    let points = match options.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| ConfigError::new("workers", e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(SweepResult {
        scheme: link.scheme(),
        points,
        seed: master_seed,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

/// Versioned CSV schema shared by all simulation artifacts.
pub const SWEEP_CSV_VERSION: &str = "# cimris-sweep-csv v1";
pub const SWEEP_CSV_COLUMNS: &str =
    "scheme,snr_db,trials,bit_errors,ber,index_errors,m,l,k,n,n_t,u";

/// Per-sweep configuration echo appended to every CSV row.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RowContext {
    pub m: u32,
    pub l: u32,
    pub k: u32,
    pub n: u32,
    pub n_t: u32,
    pub u: u32,
}

pub fn csv_header() -> String {
    format!("{SWEEP_CSV_VERSION}\n{SWEEP_CSV_COLUMNS}\n")
}

pub fn csv_rows<S: Scalar>(result: &SweepResult<S>, ctx: &RowContext) -> String {
    let mut out = String::new();
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{},{},{:e},{},{},{},{},{},{},{}\n",
            result.scheme,
            p.snr_db,
            p.trials,
            p.bit_errors,
            p.ber,
            p.index_errors,
            ctx.m,
            ctx.l,
            ctx.k,
            ctx.n,
            ctx.n_t,
            ctx.u
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Links
// ---------------------------------------------------------------------------

/// CIM-RIS chain: spread QAM components over selected codes, aligned RIS
/// cascade, chip AWGN, two-stage detection.
pub struct CimRisLink<S> {
    modem: CimRisModem<S>,
    ris_elements: u32,
    link_variance: S,
    word_mask: u64,
}

impl<S: Scalar> CimRisLink<S> {
    pub fn new(config: &SystemConfig<S>) -> Result<Self, ConfigError> {
        let modem = CimRisModem::new(config.modulation_order, config.code_count, config.chip_count)
            .map_err(|e| ConfigError::new("modem", e.to_string()))?;
        let u = modem.budget().total_bits;
        Ok(Self {
            modem,
            ris_elements: config.ris_elements,
            link_variance: config.link_variance,
            word_mask: (1u64 << u) - 1,
        })
    }

    pub fn modem(&self) -> &CimRisModem<S> {
        &self.modem
    }
}

impl<S: Scalar> Link<S> for CimRisLink<S> {
    fn scheme(&self) -> Scheme {
        Scheme::CimRis
    }

    fn bits_per_interval(&self) -> u32 {
        self.modem.budget().total_bits
    }

    fn run_trial(&self, rng: &mut ChaCha8Rng, n0: S, noise_enabled: bool) -> TrialOutcome {
        let word = rng.gen::<u64>() & self.word_mask;
        let cw = self.modem.encode(word).expect("masked word fits");
        let mut tx = Vec::with_capacity(self.modem.chip_count());
        self.modem.spread_transmit_into(&cw, &mut tx);
        let realization = sample_realization(self.ris_elements, self.link_variance, rng);
        let noise = NoiseModel { n0 };
        let mut rx = Vec::with_capacity(tx.len());
        apply_channel_into(&tx, realization.effective_gain, &noise, noise_enabled, rng, &mut rx);
        let det = self.modem.decode(&rx, realization.effective_gain).expect("chip count matches");
        TrialOutcome {
            bit_errors: (det.bits ^ word).count_ones(),
            index_errors: u32::from(det.index_i != cw.index_i) + u32::from(det.index_q != cw.index_q),
            degenerate: u32::from(!(realization.effective_gain > S::zero())),
        }
    }
}

/// Traditional RIS chain: one QAM symbol through the aligned cascade.
pub struct RisLink<S> {
    modem: RisModem<S>,
    ris_elements: u32,
    link_variance: S,
    word_mask: u64,
}

impl<S: Scalar> RisLink<S> {
    pub fn new(config: &SystemConfig<S>) -> Result<Self, ConfigError> {
        let modem = RisModem::new(config.modulation_order)?;
        let u = modem.bits_per_interval();
        Ok(Self {
            modem,
            ris_elements: config.ris_elements,
            link_variance: config.link_variance,
            word_mask: (1u64 << u) - 1,
        })
    }
}

impl<S: Scalar> Link<S> for RisLink<S> {
    fn scheme(&self) -> Scheme {
        Scheme::Ris
    }

    fn bits_per_interval(&self) -> u32 {
        self.modem.bits_per_interval()
    }

    fn run_trial(&self, rng: &mut ChaCha8Rng, n0: S, noise_enabled: bool) -> TrialOutcome {
        let word = rng.gen::<u64>() & self.word_mask;
        let x = self.modem.transmit(word).expect("masked word fits");
        let realization = sample_realization(self.ris_elements, self.link_variance, rng);
        let gain = realization.effective_gain;
        let mut y = x.scale(gain);
        if noise_enabled {
            y += complex_gaussian(n0, rng);
        }
        let bits = self.modem.detect(y, gain);
        TrialOutcome {
            bit_errors: (bits ^ word).count_ones(),
            index_errors: 0,
            degenerate: u32::from(!(gain > S::zero())),
        }
    }
}

/// TSM-RIS chain: antenna-index bits plus QAM through the per-antenna
/// aligned gains.
pub struct TsmLink<S> {
    modem: TsmModem<S>,
    ris_elements: u32,
    tx_antennas: u32,
    link_variance: S,
    word_mask: u64,
}

impl<S: Scalar> TsmLink<S> {
    pub fn new(config: &SystemConfig<S>) -> Result<Self, ConfigError> {
        let modem = TsmModem::new(config.modulation_order, config.tx_antennas)?;
        let u = modem.bits_per_interval();
        Ok(Self {
            modem,
            ris_elements: config.ris_elements,
            tx_antennas: config.tx_antennas,
            link_variance: config.link_variance,
            word_mask: (1u64 << u) - 1,
        })
    }
}

impl<S: Scalar> Link<S> for TsmLink<S> {
    fn scheme(&self) -> Scheme {
        Scheme::TsmRis
    }

    fn bits_per_interval(&self) -> u32 {
        self.modem.bits_per_interval()
    }

    fn run_trial(&self, rng: &mut ChaCha8Rng, n0: S, noise_enabled: bool) -> TrialOutcome {
        let word = rng.gen::<u64>() & self.word_mask;
        let cw = self.modem.encode(word).expect("masked word fits");
        let mimo =
            MimoChannelRealization::sample(self.tx_antennas, self.ris_elements, self.link_variance, rng);
        let mut y = self.modem.transmit(&cw, &mimo);
        if noise_enabled {
            y += complex_gaussian(n0, rng);
        }
        let (antenna, bits) = self.modem.detect(y, &mimo);
        TrialOutcome {
            bit_errors: (bits ^ word).count_ones(),
            index_errors: u32::from(antenna != cw.antenna_i),
            degenerate: 0,
        }
    }
}

/// TQSM-RIS chain: independent in-phase/quadrature antennas; the receiver
/// searches the full cross-gain hypothesis set.
pub struct TqsmLink<S> {
    modem: TqsmModem<S>,
    ris_elements: u32,
    tx_antennas: u32,
    link_variance: S,
    word_mask: u64,
}

impl<S: Scalar> TqsmLink<S> {
    pub fn new(config: &SystemConfig<S>) -> Result<Self, ConfigError> {
        let modem = TqsmModem::new(config.modulation_order, config.tx_antennas)?;
        let u = modem.bits_per_interval();
        Ok(Self {
            modem,
            ris_elements: config.ris_elements,
            tx_antennas: config.tx_antennas,
            link_variance: config.link_variance,
            word_mask: (1u64 << u) - 1,
        })
    }
}

impl<S: Scalar> Link<S> for TqsmLink<S> {
    fn scheme(&self) -> Scheme {
        Scheme::TqsmRis
    }

    fn bits_per_interval(&self) -> u32 {
        self.modem.bits_per_interval()
    }

    fn run_trial(&self, rng: &mut ChaCha8Rng, n0: S, noise_enabled: bool) -> TrialOutcome {
        let word = rng.gen::<u64>() & self.word_mask;
        let cw = self.modem.encode(word).expect("masked word fits");
        let mimo =
            MimoChannelRealization::sample(self.tx_antennas, self.ris_elements, self.link_variance, rng);
        let cross = mimo.cross_matrix();
        let mut y = self.modem.transmit(&cw, &mimo, &cross);
        if noise_enabled {
            y += complex_gaussian(n0, rng);
        }
        let (ti, tq, bits) = self.modem.detect(y, &mimo, &cross);
        TrialOutcome {
            bit_errors: (bits ^ word).count_ones(),
            index_errors: u32::from(ti != cw.antenna_i) + u32::from(tq != cw.antenna_q),
            degenerate: 0,
        }
    }
}

/// Build the link for `config.scheme` and sweep its SNR grid.
pub fn sweep_config<S: Scalar>(
    config: &SystemConfig<S>,
    options: &RunOptions,
) -> Result<SweepResult<S>, ConfigError> {
    match config.scheme {
        Scheme::CimRis => sweep(
            &CimRisLink::new(config)?,
            &config.snr_grid_db,
            config.master_seed,
            options,
        ),
        Scheme::Ris => sweep(
            &RisLink::new(config)?,
            &config.snr_grid_db,
            config.master_seed,
            options,
        ),
        Scheme::TsmRis => sweep(
            &TsmLink::new(config)?,
            &config.snr_grid_db,
            config.master_seed,
            options,
        ),
        Scheme::TqsmRis => sweep(
            &TqsmLink::new(config)?,
            &config.snr_grid_db,
            config.master_seed,
            options,
        ),
    }
}

/// Context row for a configuration (the `u` column is scheme-dependent).
pub fn row_context<S: Scalar>(config: &SystemConfig<S>) -> Result<RowContext, ConfigError> {
    Ok(RowContext {
        m: config.modulation_order,
        l: config.code_count,
        k: config.chip_count,
        n: config.ris_elements,
        n_t: config.tx_antennas,
        u: config.bits_per_interval()?,
    })
}
