//! Closed-form and quadrature-based evaluation of the scheme's error,
//! energy, complexity, throughput and data-rate expressions.
//!
//! The average bit error rate decomposes into a code-index part and a
//! modulated-symbol part. The code-index error probability comes from order
//! statistics of one non-central chi-square branch against the central
//! branches, averaged over a generalized-Rayleigh noncentrality; the
//! QAM part comes from a chi-square approximation of the post-alignment SNR
//! through its moment-generating function and a low-SNR upper bound.

pub mod quad;
pub mod special;
pub mod tables;

use crate::params::{BitBudget, ConfigError, Scheme};
use crate::qam::QamConstellation;
use crate::scalar::Scalar;
pub use quad::{integrate, QuadConfig, QuadError, QuadOutcome};
pub use special::bessel_i_neg_half;
use std::cell::Cell;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("quadrature failed: {0}")]
    Quad(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("modulation order {0} is not square QAM; the analytical symbol-error path requires a power of 4")]
    NonSquareQam(u32),
    #[error("invalid argument `{name}`: {message}")]
    Domain { name: &'static str, message: String },
    #[error("probability clamp exceeded tolerance: raw value {raw}")]
    ClampExceeded { raw: f64 },
}

impl<S: Scalar> From<QuadError<S>> for AnalysisError {
    fn from(e: QuadError<S>) -> Self {
        AnalysisError::Quad(e.to_string())
    }
}

fn require_positive<S: Scalar>(name: &'static str, value: S) -> Result<(), AnalysisError> {
    if !(value > S::zero()) {
        return Err(AnalysisError::Domain {
            name,
            message: format!("must be positive, got {value}"),
        });
    }
    Ok(())
}

/// Clamp a quadrature result into `[0, 1]`, erroring out when the excursion
/// exceeds the tolerance it was computed at.
fn clamp_probability<S: Scalar>(raw: S, tolerance: S) -> Result<S, AnalysisError> {
    let guard = tolerance * S::of(100.0) + S::of(1e-9);
    if raw < -guard || raw > S::one() + guard {
        return Err(AnalysisError::ClampExceeded { raw: raw.as_f64() });
    }
    Ok(raw.max(S::zero()).min(S::one()))
}

/// Variance parameters of the despreader branch statistics.
///
/// `sigma_xi2` parameterizes the central (mismatched-code) branches through
/// the survival function `exp(-xi / (2 sigma_xi2))`; `sigma_lambda2` is the
/// variance of the Gaussian underlying the matched branch with
/// noncentrality `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareParams<S> {
    pub sigma_xi2: S,
    pub sigma_lambda2: S,
    pub kappa: S,
}

impl<S: Scalar> ChiSquareParams<S> {
    pub fn new(chip_energy: S, n0: S, kappa: S) -> Self {
        let en = chip_energy * n0;
        let sigma_xi2 = S::of(2.0) * en * en;
        Self {
            sigma_xi2,
            sigma_lambda2: sigma_xi2 + S::of(4.0) * chip_energy * n0 * kappa * kappa,
            kappa,
        }
    }
}

/// One-degree-of-freedom non-central chi-square density of `X^2` with
/// `X ~ N(kappa, sigma2)`, written through the order -1/2 Bessel function.
pub fn noncentral_chisq_pdf<S: Scalar>(lambda: S, kappa: S, sigma2: S) -> Result<S, AnalysisError> {
    require_positive("lambda", lambda)?;
    require_positive("kappa", kappa)?;
    require_positive("sigma2", sigma2)?;
    let bessel = bessel_i_neg_half(kappa * lambda.sqrt() / sigma2).map_err(|e| {
        AnalysisError::Domain {
            name: "bessel",
            message: e.to_string(),
        }
    })?;
    let ratio = (lambda / (kappa * kappa)).powf(S::of(-0.25));
    let expo = (-(kappa * kappa + lambda) / (S::of(2.0) * sigma2)).exp();
    Ok(ratio * expo * bessel / (S::of(2.0) * sigma2))
}

/// Conditional code-index error probability for one branch:
///
/// `integral_0^inf exp(-lambda (L-1) / (2 sigma_xi2)) f_lambda(lambda) dlambda`
///
/// with `f_lambda` the non-central chi-square density above. The survival
/// factor of the `L-1` central competitors sits inside the integrand as a
/// function of `lambda`. Evaluated after the substitution `lambda = v^2`,
/// which removes the inverse-square-root edge at zero; the overflow-prone
/// Bessel/exponential product is folded into one stable exponent.
pub fn pci_given_kappa<S: Scalar>(
    kappa: S,
    chip_energy: S,
    n0: S,
    code_count: u32,
    config: &QuadConfig<S>,
) -> Result<S, AnalysisError> {
    require_positive("kappa", kappa)?;
    require_positive("chip_energy", chip_energy)?;
    require_positive("n0", n0)?;
    if code_count < 2 {
        return Err(AnalysisError::Domain {
            name: "code_count",
            message: "need at least two codes".into(),
        });
    }
    let params = ChiSquareParams::new(chip_energy, n0, kappa);
    let sigma_l2 = params.sigma_lambda2;
    let sigma_l = sigma_l2.sqrt();
    let competitors = S::of(f64::from(code_count - 1));
    let half = S::of(0.5);
    let two = S::of(2.0);

    // integrand in v-space (lambda = v^2):
    //   sqrt(2/(pi s2)) * exp(-(v-k)^2/(2 s2)) * (1+exp(-2kv/s2))/2
    //     * exp(-v^2 (L-1) / (2 sigma_xi2))
    let front = (two / (S::PI() * sigma_l2)).sqrt();
    let integrand = move |v: S| {
        let d = v - kappa;
        let gauss = (-d * d / (two * sigma_l2)).exp();
        let fold = (S::one() + (-two * kappa * v / sigma_l2).exp()) * half;
        let survive = (-v * v * competitors / (two * params.sigma_xi2)).exp();
        front * gauss * fold * survive
    };

    // Peak of the combined Gaussian exponent and its width set the
    // truncation; twelve widths keep the discarded mass far below 1e-18 of
    // the peak.
    let inv_width2 = S::one() / sigma_l2 + competitors / params.sigma_xi2;
    let v_peak = (kappa / sigma_l2) / inv_width2;
    let width = inv_width2.sqrt().recip();
    let upper = (v_peak + S::of(12.0) * width).max(kappa + S::of(12.0) * sigma_l);
    let out = integrate(integrand, S::zero(), upper, config)?;
    clamp_probability(out.value, out.abs_error.max(config.abs_tol))
}

/// Average code-index error probability: the conditional probability above
/// integrated over the generalized Rayleigh density of the noncentrality,
///
/// `f(kappa) = sqrt(2) / (sigma_chi * Gamma(1/2)) * exp(-kappa^2 / (2 sigma_chi2))`,
///
/// truncated at `10 sigma_chi` (Gaussian tail below 1e-22).
pub fn pci_average<S: Scalar>(
    chip_energy: S,
    n0: S,
    code_count: u32,
    sigma_chi2: S,
    config: &QuadConfig<S>,
) -> Result<S, AnalysisError> {
    require_positive("sigma_chi2", sigma_chi2)?;
    require_positive("chip_energy", chip_energy)?;
    require_positive("n0", n0)?;
    let sigma_chi = sigma_chi2.sqrt();
    let front = (S::of(2.0) / S::PI()).sqrt() / sigma_chi;
    let inner_failure: Cell<Option<AnalysisError>> = Cell::new(None);
    let integrand = |kappa: S| -> S {
        match pci_given_kappa(kappa, chip_energy, n0, code_count, config) {
            Ok(p) => front * (-kappa * kappa / (S::of(2.0) * sigma_chi2)).exp() * p,
            Err(e) => {
                inner_failure.set(Some(e));
                S::nan()
            }
        }
    };
    let upper = S::of(10.0) * sigma_chi;
    let out = integrate(integrand, S::zero(), upper, config);
    if let Some(e) = inner_failure.take() {
        return Err(e);
    }
    let out = out?;
    clamp_probability(out.value, out.abs_error.max(config.abs_tol))
}

/// Chi-square approximation parameters of the post-alignment SNR, from the
/// Gaussian limit of the cascade sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrMgfParams<S> {
    /// Reciprocal-variance parameter `8 / (N (16 - pi^2))`.
    pub var_param: S,
    /// Noncentrality parameter `N pi^2 / (2 (16 - pi^2))`.
    pub noncentrality: S,
}

impl<S: Scalar> SnrMgfParams<S> {
    pub fn new(ris_elements: u32) -> Self {
        let n = S::of(f64::from(ris_elements));
        let pi2 = S::PI() * S::PI();
        let denom = S::of(16.0) - pi2;
        Self {
            var_param: S::of(8.0) / (n * denom),
            noncentrality: n * pi2 / (S::of(2.0) * denom),
        }
    }

    /// Exponent rate of the low-SNR approximation: `N^2 pi^2 / 16`.
    pub fn low_snr_rate(&self) -> S {
        self.noncentrality / self.var_param
    }
}

/// Moment-generating function of the instantaneous SNR at mean SNR
/// `mean_snr = Es/N0`.
pub fn mgf_snr<S: Scalar>(s: S, ris_elements: u32, mean_snr: S) -> S {
    let p = SnrMgfParams::<S>::new(ris_elements);
    let sg = s * mean_snr;
    (p.var_param / (p.var_param + sg)).sqrt()
        * (-(sg * p.noncentrality) / (p.noncentrality + sg)).exp()
}

/// Low-SNR approximation of [`mgf_snr`]: `exp(-N^2 pi^2 s mean_snr / 16)`.
pub fn mgf_snr_low<S: Scalar>(s: S, ris_elements: u32, mean_snr: S) -> S {
    let p = SnrMgfParams::<S>::new(ris_elements);
    (-p.low_snr_rate() * s * mean_snr).exp()
}

/// Decision geometry of a square QAM constellation for the symbol-error
/// bound; `p`/`q` weight the in-phase/quadrature error events and `t`/`z`
/// are the matching decision-distance scales (equal for square grids).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamErrorGeometry<S> {
    pub inphase_weight: S,
    pub quadrature_weight: S,
    pub inphase_scale: S,
    pub quadrature_scale: S,
}

impl<S: Scalar> QamErrorGeometry<S> {
    pub fn new(modulation_order: u32) -> Result<Self, AnalysisError> {
        if !modulation_order.is_power_of_two()
            || modulation_order < 4
            || modulation_order.trailing_zeros() % 2 != 0
        {
            return Err(AnalysisError::NonSquareQam(modulation_order));
        }
        let side = S::of(f64::from(modulation_order).sqrt());
        let weight = S::one() - side.recip();
        // aspect ratio 1: t = z = sqrt(6 / ((Mi^2-1) + (Mq^2-1)))
        let m = S::of(f64::from(modulation_order));
        let scale = (S::of(3.0) / (m - S::one())).sqrt();
        Ok(Self {
            inphase_weight: weight,
            quadrature_weight: weight,
            inphase_scale: scale,
            quadrature_scale: scale,
        })
    }
}

/// Per-bit error probability of the modulated symbol at mean SNR `mean_snr`,
/// from the QAM symbol-error expression under the low-SNR MGF bound, scaled
/// by the `1/u1` Gray-mapping factor and clamped to `[0, 0.5]`.
pub fn pm_qam<S: Scalar>(
    modulation_order: u32,
    ris_elements: u32,
    mean_snr: S,
) -> Result<S, AnalysisError> {
    if mean_snr < S::zero() {
        return Err(AnalysisError::Domain {
            name: "mean_snr",
            message: format!("must be non-negative, got {mean_snr}"),
        });
    }
    let geo = QamErrorGeometry::<S>::new(modulation_order)?;
    let symbol_bits = S::of(f64::from(modulation_order.trailing_zeros()));
    let n = S::of(f64::from(ris_elements));
    let rate = S::PI() * S::PI() * n * n * mean_snr / S::of(32.0);
    let (p, q) = (geo.inphase_weight, geo.quadrature_weight);
    let (t, z) = (geo.inphase_scale, geo.quadrature_scale);
    let ratio = z / t;
    let angle = ratio.atan() + ratio.recip().atan();
    let value = p * (-rate * t * t).exp() + q * (-rate * z * z).exp()
        - S::of(2.0) * p * q / S::PI() * angle * (-rate * (t * t + z * z)).exp();
    Ok((value / symbol_bits).max(S::zero()).min(S::of(0.5)))
}

/// Average BER decomposition of the CIM-RIS scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AberBreakdown<S> {
    /// Code-index detection error probability (per branch).
    pub p_ci: S,
    /// Per-bit error probability of the index-mapped bits.
    pub p_sc: S,
    /// Per-bit error probability of the symbol bits given correct indices.
    pub p_m: S,
    /// Per-bit error probability of the modulated bits overall.
    pub p_mod: S,
    /// Total average BER.
    pub p_total: S,
}

impl<S: Scalar> AberBreakdown<S> {
    /// Compose the decomposition identities from the two independent error
    /// probabilities:
    /// `p_sc = p_ci / (2 u2)`, `p_mod = p_m (1 - p_ci) + p_ci / 2`,
    /// `p_total = (2 u2 / u) p_sc + (u1 / u) p_mod`.
    pub fn compose(p_ci: S, p_m: S, budget: BitBudget) -> Self {
        let u1 = S::of(f64::from(budget.symbol_bits));
        let u2x2 = S::of(f64::from(2 * budget.index_bits));
        let u = S::of(f64::from(budget.total_bits));
        let p_sc = p_ci / u2x2;
        let p_mod = p_m * (S::one() - p_ci) + S::of(0.5) * p_ci;
        let p_total = (u2x2 / u) * p_sc + (u1 / u) * p_mod;
        Self {
            p_ci,
            p_sc,
            p_m,
            p_mod,
            p_total,
        }
    }
}

/// Inputs for the analytical BER chain, decoupled from the full system
/// configuration so grids can be evaluated cheaply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AberInputs<S> {
    pub modulation_order: u32,
    pub code_count: u32,
    pub ris_elements: u32,
    pub chip_energy: S,
    pub link_variance: S,
    /// In-phase amplitude the index-error noncentrality is evaluated at;
    /// `None` selects the constellation RMS.
    pub inphase_rms: Option<S>,
}

/// Full analytical BER breakdown at mean symbol SNR `mean_snr = Es/N0`
/// (so `N0 = Es / mean_snr` with `Es = 1`).
pub fn aber_cim_ris<S: Scalar>(
    inputs: &AberInputs<S>,
    mean_snr: S,
    config: &QuadConfig<S>,
) -> Result<AberBreakdown<S>, AnalysisError> {
    require_positive("mean_snr", mean_snr)?;
    let budget = BitBudget::for_simulation(inputs.modulation_order, inputs.code_count)?;
    let n0 = S::one() / mean_snr;
    let xre = match inputs.inphase_rms {
        Some(x) => x,
        None => QamConstellation::<S>::new(inputs.modulation_order)?.inphase_rms(),
    };
    let sigma_chi2 = (xre * inputs.chip_energy) * (xre * inputs.chip_energy) * inputs.link_variance;
    let p_ci = pci_average(inputs.chip_energy, n0, inputs.code_count, sigma_chi2, config)?;
    let p_m = pm_qam(inputs.modulation_order, inputs.ris_elements, mean_snr)?;
    Ok(AberBreakdown::compose(p_ci, p_m, budget))
}

/// Energy saved per `u` bits relative to a benchmark carrying `u_b` bits,
/// as a percentage: `100 (1 - u_b / u)`.
pub fn energy_saving_percent<S: Scalar>(total_bits: u32, benchmark_bits: u32) -> Result<S, AnalysisError> {
    if benchmark_bits == 0 || benchmark_bits > total_bits {
        return Err(AnalysisError::Domain {
            name: "benchmark_bits",
            message: format!("need 1 <= u_b <= u, got u_b={benchmark_bits}, u={total_bits}"),
        });
    }
    Ok(S::of(100.0) * (S::one() - S::of(f64::from(benchmark_bits)) / S::of(f64::from(total_bits))))
}

/// Receiver computational complexity in real multiplications.
///
/// The benchmark formulas are normalized to the CIM-RIS bit budget through
/// `u2 = log2(L)` of the system they are compared against; the TSM/TQSM
/// ratios are generally non-integral.
pub fn complexity_real_mults<S: Scalar>(
    scheme: Scheme,
    modulation_order: u32,
    ris_elements: u32,
    tx_antennas: u32,
    chip_count: u32,
    code_count: u32,
) -> S {
    let m = f64::from(modulation_order);
    let n = f64::from(ris_elements);
    let nt = f64::from(tx_antennas);
    let k = f64::from(chip_count);
    let l = f64::from(code_count);
    let u2x2 = 2.0 * l.log2();
    let value = match scheme {
        Scheme::CimRis => 8.0 * k * l + n + 4.0 * m,
        Scheme::Ris => (n + 4.0 * m) * (1.0 + u2x2 / m.log2()),
        Scheme::TsmRis => 8.0 * (n + 4.0 * m) * nt * (1.0 + u2x2 / (m * nt).log2()),
        Scheme::TqsmRis => 8.0 * (n + 4.0 * m) * nt * (1.0 + u2x2 / (m * nt * nt).log2()),
    };
    S::of(value)
}

/// Throughput in correct bits per symbol interval of duration `tau_s`:
/// `(1 - ber) * u / tau_s`.
pub fn throughput<S: Scalar>(ber: S, total_bits: u32, tau_s: S) -> Result<S, AnalysisError> {
    if ber < S::zero() || ber > S::one() {
        return Err(AnalysisError::Domain {
            name: "ber",
            message: format!("must lie in [0, 1], got {ber}"),
        });
    }
    require_positive("tau_s", tau_s)?;
    Ok((S::one() - ber) * S::of(f64::from(total_bits)) / tau_s)
}

/// Header for the analytical-curve CSV artifact.
pub const ANALYSIS_CSV_HEADER: &str = "scheme,snr_db,p_ci,p_sc,p_m,p_mod,p_total";

impl<S: Scalar> AberBreakdown<S> {
    pub fn csv_row(&self, scheme: Scheme, snr_db: S) -> String {
        format!(
            "{},{},{:e},{:e},{:e},{:e},{:e}",
            scheme, snr_db, self.p_ci, self.p_sc, self.p_m, self.p_mod, self.p_total
        )
    }
}
