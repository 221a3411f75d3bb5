//! Per-bit-channel failure probabilities `p_e(i)` under successive decoding,
//! equivalent reliabilities of merged (repetition) channels, and the
//! analytic word-error-rate prediction `WER = 1 − Π(1 − p_e(i))`.
//!
//! Three methods are provided: density evolution under the Gaussian
//! approximation for the BI-AWGN channel, the exact erasure-probability
//! recursion for the BEC, and a genie-aided Monte Carlo estimator that
//! serves as the independent oracle for both.

use crate::channel::{ChannelParams, RngStream, LLR_CLAMP};
use crate::error::{Error, Result};
use crate::parallel;
use crate::xform::PolarParams;
use rand::Rng;

/// The channel a code is designed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignChannel {
    BiAwgn { es_n0_db: f64 },
    Bec { epsilon: f64 },
}

/// How a reliability profile was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReliabilityMethod {
    GaussianApprox,
    ExactBecRecursion,
    GenieMonteCarlo { trials: u64, seed: u64 },
}

/// Per-bit-channel failure probabilities plus the design channel they were
/// computed for. `llr_mean` holds the Gaussian-approximation LLR means and
/// is present iff the method is [`ReliabilityMethod::GaussianApprox`].
#[derive(Debug, Clone)]
pub struct ReliabilityProfile {
    params: PolarParams,
    channel: DesignChannel,
    method: ReliabilityMethod,
    pe: Vec<f64>,
    llr_mean: Option<Vec<f64>>,
}

impl ReliabilityProfile {
    pub fn params(&self) -> &PolarParams {
        &self.params
    }

    pub fn channel(&self) -> DesignChannel {
        self.channel
    }

    pub fn method(&self) -> ReliabilityMethod {
        self.method
    }

    pub fn pe(&self) -> &[f64] {
        &self.pe
    }

    pub fn llr_mean(&self) -> Option<&[f64]> {
        self.llr_mean.as_deref()
    }

    /// Assemble a profile from raw parts, checking basic shape invariants.
    /// Used by the spec-file loader and by tests that construct synthetic
    /// profiles.
    pub fn from_parts(
        params: PolarParams,
        channel: DesignChannel,
        method: ReliabilityMethod,
        pe: Vec<f64>,
        llr_mean: Option<Vec<f64>>,
    ) -> Result<Self> {
        if pe.len() != params.block_len() {
            return Err(Error::invalid("pe length does not match block length"));
        }
        if pe.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::invalid("pe value out of [0, 1]"));
        }
        if let Some(m) = &llr_mean {
            if m.len() != params.block_len() {
                return Err(Error::invalid("llr_mean length does not match block length"));
            }
        }
        Ok(ReliabilityProfile {
            params,
            channel,
            method,
            pe,
            llr_mean,
        })
    }
}

/// An equivalent bit channel summarizing a repetition block.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentBlockChannel {
    pub block: Vec<usize>,
    pub pe_equiv: f64,
}

/// Gaussian tail function `Q(x) = P(Z > x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of [`q_func`] on (0, 1).
pub fn q_inv(p: f64) -> f64 {
    std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

// phi(x) ≈ E[tanh(L/2)] complement for a Gaussian LLR with mean x and
// variance 2x; standard two-piece approximation.
fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).exp().min(1.0)
    } else {
        (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
    }
}

// Above this mean the exact phi underflows; the check-node update is then
// the asymptotic shift m − 4·ln 2.
const PHI_DIRECT_MAX: f64 = 2500.0;

fn phi_inv(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, PHI_DIRECT_MAX);
    // phi is decreasing; bisect to 1e-9 absolute tolerance.
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// Check-node (degraded) combination of two equal means.
fn ga_check(m: f64) -> f64 {
    if m > PHI_DIRECT_MAX {
        return m - 4.0 * std::f64::consts::LN_2;
    }
    let p = phi(m);
    let y = 1.0 - (1.0 - p) * (1.0 - p);
    phi_inv(y)
}

/// Density evolution under the Gaussian approximation for the BI-AWGN
/// channel. The root LLR mean is `4·10^(es_n0_db/10)`; per polarization
/// stage the check direction degrades via the phi-function and the variable
/// direction doubles the mean; `p_e(i) = Q(√(m_i/2))`.
pub fn awgn_reliability_ga(params: &PolarParams, es_n0_db: f64) -> ReliabilityProfile {
    let root = 4.0 * 10f64.powf(es_n0_db / 10.0);
    let mut means = vec![root];
    for _ in 0..params.stages() {
        let mut next = vec![0.0; means.len() * 2];
        for (p, &m) in means.iter().enumerate() {
            next[2 * p] = ga_check(m);
            next[2 * p + 1] = 2.0 * m;
        }
        means = next;
    }
    let pe = means.iter().map(|&m| q_func((m / 2.0).sqrt())).collect();
    ReliabilityProfile {
        params: *params,
        channel: DesignChannel::BiAwgn { es_n0_db },
        method: ReliabilityMethod::GaussianApprox,
        pe,
        llr_mean: Some(means),
    }
}

/// Exact erasure-probability recursion for the BEC: `z⁻ = 2z − z²`,
/// `z⁺ = z²`. An erased decision is resolved by a fair coin, so the stored
/// failure probability is `z/2`.
pub fn bec_reliability(params: &PolarParams, epsilon: f64) -> Result<ReliabilityProfile> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid(format!(
            "erasure probability {epsilon} not in [0, 1]"
        )));
    }
    let mut z = vec![epsilon];
    for _ in 0..params.stages() {
        let mut next = vec![0.0; z.len() * 2];
        for (p, &zp) in z.iter().enumerate() {
            next[2 * p] = 2.0 * zp - zp * zp;
            next[2 * p + 1] = zp * zp;
        }
        z = next;
    }
    let pe = z.iter().map(|&zi| zi / 2.0).collect();
    Ok(ReliabilityProfile {
        params: *params,
        channel: DesignChannel::Bec { epsilon },
        method: ReliabilityMethod::ExactBecRecursion,
        pe,
        llr_mean: None,
    })
}

/// Channel LLRs for one transmission of the all-zero codeword.
pub(crate) fn sample_all_zero_llrs(
    channel: DesignChannel,
    len: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<f64> {
    match channel {
        DesignChannel::BiAwgn { es_n0_db } => {
            let params = ChannelParams::from_es_n0_db(es_n0_db);
            let sigma = params.sigma2().sqrt();
            (0..len)
                .map(|_| {
                    let z: f64 =
                        rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
                    let y = 1.0 + sigma * z;
                    (2.0 * y / params.sigma2()).clamp(-LLR_CLAMP, LLR_CLAMP)
                })
                .collect()
        }
        DesignChannel::Bec { epsilon } => (0..len)
            .map(|_| {
                if rng.gen_bool(epsilon) {
                    0.0
                } else {
                    LLR_CLAMP
                }
            })
            .collect(),
    }
}

/// Genie-aided Monte Carlo estimate of `p_e(i)`: transmit the all-zero
/// codeword, run the SC recursion feeding correct values for all prior
/// decisions, and count per-index first-decision errors. A zero decision
/// LLR is resolved by a fair coin.
pub fn genie_mc_reliability(
    params: &PolarParams,
    channel: DesignChannel,
    trials: u64,
    seed: u64,
) -> Result<ReliabilityProfile> {
    if trials == 0 {
        return Err(Error::invalid("trials must be ≥ 1"));
    }
    if let DesignChannel::Bec { epsilon } = channel {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::invalid("erasure probability out of [0, 1]"));
        }
    }
    let len = params.block_len();
    let counts = parallel::map_reduce_trials(
        0..trials,
        1024,
        |range| {
            let mut counts = vec![0u64; len];
            for t in range {
                let mut rng = RngStream::new(seed, t).rng();
                let llrs = sample_all_zero_llrs(channel, len, &mut rng);
                let decisions = crate::decode::genie_decision_llrs(&llrs);
                for (c, &lam) in counts.iter_mut().zip(&decisions) {
                    let err = if lam < 0.0 {
                        true
                    } else if lam == 0.0 {
                        rng.gen_bool(0.5)
                    } else {
                        false
                    };
                    if err {
                        *c += 1;
                    }
                }
            }
            counts
        },
        || vec![0u64; len],
        parallel::add_counts,
    );
    let pe = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    Ok(ReliabilityProfile {
        params: *params,
        channel,
        method: ReliabilityMethod::GenieMonteCarlo { trials, seed },
        pe,
        llr_mean: None,
    })
}

/// Equivalent reliability of a repetition block under the LLR-mean addition
/// model: `pe_equiv = Q(√(m_B/2))` with `m_B = Σ llr_mean[i]` over the block.
pub fn equivalent_block_reliability(
    profile: &ReliabilityProfile,
    block: &[usize],
) -> Result<EquivalentBlockChannel> {
    let means = profile.llr_mean().ok_or_else(|| {
        Error::UnsupportedMethod(
            "equivalent block reliability requires a Gaussian-approximation profile".into(),
        )
    })?;
    if block.is_empty() {
        return Err(Error::invalid("block must be non-empty"));
    }
    if !block.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("block indices must be strictly increasing"));
    }
    if *block.last().unwrap() >= profile.params().block_len() {
        return Err(Error::invalid("block index out of range"));
    }
    let m_b: f64 = block.iter().map(|&i| means[i]).sum();
    Ok(EquivalentBlockChannel {
        block: block.to_vec(),
        pe_equiv: q_func((m_b / 2.0).sqrt()),
    })
}

/// Analytic word error rate `1 − Π(1 − p)` over the supplied failure
/// probabilities.
pub fn predicted_wer(pe_values: &[f64]) -> Result<f64> {
    let mut prod = 1.0f64;
    for &p in pe_values {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("probability {p} out of [0, 1]")));
        }
        prod *= 1.0 - p;
    }
    Ok(1.0 - prod)
}
