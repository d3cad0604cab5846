//! Link-level simulator and analytical toolkit for code-index modulation
//! over reconfigurable-intelligent-surface channels (CIM-RIS), with the
//! traditional RIS, TSM-RIS and TQSM-RIS benchmark schemes.
//!
//! The crate is organized around the signal chain:
//!
//! - [`params`]: configuration, validation, bit budgets
//! - [`codes`]: Walsh-Hadamard spreading and despreading
//! - [`qam`]: Gray-mapped constellations
//! - [`channel`]: Rayleigh fading, RIS phase alignment, chip AWGN
//! - [`txrx`]: the CIM-RIS transceiver
//! - [`baselines`]: the three benchmark transceivers
//! - [`analysis`]: closed-form/quadrature error expressions and the
//!   energy/complexity/throughput/data-rate calculators
//! - [`mc`]: deterministic parallel Monte Carlo BER estimation
//!
//! All numeric kernels are generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the `*64` aliases below pin the `f64` instantiation the CLI uses.

pub mod analysis;
pub mod baselines;
pub mod channel;
pub mod codes;
pub mod mc;
pub mod params;
pub mod qam;
pub mod scalar;
pub mod txrx;

pub use params::{derive_bit_budget, benchmark_bits, BitBudget, ConfigError, Scheme};
pub use scalar::Scalar;

/// Complex baseband sample at `f64`.
pub type C64 = num_complex::Complex<f64>;
/// Complex baseband sample at `f32`.
pub type C32 = num_complex::Complex<f32>;

pub type SystemConfig64 = params::SystemConfig<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type QamConstellation64 = qam::QamConstellation<f64>;
pub type CimRisModem64 = txrx::CimRisModem<f64>;
pub type AberBreakdown64 = analysis::AberBreakdown<f64>;
pub type AberInputs64 = analysis::AberInputs<f64>;
pub type QuadConfig64 = analysis::QuadConfig<f64>;
pub type BerPoint64 = mc::BerPoint<f64>;
pub type SweepResult64 = mc::SweepResult<f64>;
