//! BPSK modulation, AWGN channel simulation, LLR computation, SNR unit
//! conversions and seeded random-number streams.
//!
//! Symbol energy is fixed to 1; all SNR handling flows through `Es/N0` in
//! decibels. Channel LLRs are clamped to ±[`LLR_CLAMP`] so the exact
//! atanh-based combining in the decoders stays finite.

use crate::error::{Error, Result};
use crate::xform::BitVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Channel LLR magnitude bound.
pub const LLR_CLAMP: f64 = 1e3;

/// BI-AWGN channel parameters with unit symbol energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    es_n0_db: f64,
    sigma2: f64,
}

impl ChannelParams {
    pub fn from_es_n0_db(es_n0_db: f64) -> Self {
        let sigma2 = 1.0 / (2.0 * 10f64.powf(es_n0_db / 10.0));
        ChannelParams { es_n0_db, sigma2 }
    }

    pub fn es_n0_db(&self) -> f64 {
        self.es_n0_db
    }

    /// Noise variance per dimension.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// A deterministic random stream: the generated sequence is a pure function
/// of `(master_seed, stream_id, draw index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Map bits to antipodal symbols: 0 → +1, 1 → −1.
pub fn bpsk_modulate(bits: &BitVector) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect()
}

/// Add white Gaussian noise of variance `sigma2` per symbol.
pub fn awgn_apply(symbols: &[f64], params: &ChannelParams, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sigma = params.sigma2.sqrt();
    symbols
        .iter()
        .map(|&s| {
            let z: f64 = StandardNormal.sample(rng);
            s + sigma * z
        })
        .collect()
}

/// Channel LLRs for the BI-AWGN channel: `llr = 2y/σ²`, clamped.
pub fn llr_bi_awgn(received: &[f64], params: &ChannelParams) -> crate::decode::LlrVector {
    let values: Vec<f64> = received
        .iter()
        .map(|&y| (2.0 * y / params.sigma2).clamp(-LLR_CLAMP, LLR_CLAMP))
        .collect();
    crate::decode::LlrVector::new(values).expect("clamped LLRs are finite")
}

/// `Es/N0 = Eb/N0 + 10·log10(R)` for BPSK (one coded bit per symbol).
pub fn ebn0_to_esn0(eb_n0_db: f64, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    Ok(eb_n0_db + 10.0 * rate.log10())
}

/// Inverse of [`ebn0_to_esn0`].
pub fn esn0_to_ebn0(es_n0_db: f64, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    Ok(es_n0_db - 10.0 * rate.log10())
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::invalid(format!("rate {rate} not in (0, 1]")));
    }
    Ok(())
}

/// Draw a uniformly random bit vector from the stream.
pub fn random_bits(len: usize, rng: &mut ChaCha8Rng) -> BitVector {
    (0..len).map(|_| rng.gen_range(0..=1u8)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_maps_bits() {
        let bits = BitVector::from_bits(vec![0, 0, 0]).unwrap();
        assert_eq!(bpsk_modulate(&bits), vec![1.0, 1.0, 1.0]);
        let bits = BitVector::from_bits(vec![1, 0]).unwrap();
        assert_eq!(bpsk_modulate(&bits), vec![-1.0, 1.0]);
    }

    #[test]
    fn bpsk_unit_energy() {
        let bits = BitVector::from_bits(vec![0, 1, 1, 0, 1]).unwrap();
        let s = bpsk_modulate(&bits);
        let mean_sq = s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
        assert_eq!(mean_sq, 1.0);
    }

    #[test]
    fn awgn_vanishing_noise() {
        let params = ChannelParams::from_es_n0_db(100.0);
        let mut rng = RngStream::new(1, 0).rng();
        let symbols = vec![1.0; 10_000];
        let out = awgn_apply(&symbols, &params, &mut rng);
        let max_dev = out
            .iter()
            .zip(&symbols)
            .map(|(o, s)| (o - s).abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev < 1e-3, "max deviation {max_dev}");
    }

    #[test]
    fn awgn_fixed_seed_reproducible() {
        let params = ChannelParams::from_es_n0_db(0.0);
        let symbols = vec![1.0; 64];
        let a = awgn_apply(&symbols, &params, &mut RngStream::new(42, 3).rng());
        let b = awgn_apply(&symbols, &params, &mut RngStream::new(42, 3).rng());
        assert_eq!(a, b);
    }

    #[test]
    fn awgn_sample_variance_at_0db() {
        let params = ChannelParams::from_es_n0_db(0.0);
        let mut rng = RngStream::new(5, 0).rng();
        let n = 1_000_000usize;
        let symbols = vec![1.0; n];
        let out = awgn_apply(&symbols, &params, &mut rng);
        let var = out
            .iter()
            .zip(&symbols)
            .map(|(o, s)| (o - s) * (o - s))
            .sum::<f64>()
            / n as f64;
        assert!((var - 0.5).abs() / 0.5 < 0.01, "variance {var}");
    }

    #[test]
    fn llr_values() {
        let params = ChannelParams::from_es_n0_db(0.0);
        let llr = llr_bi_awgn(&[0.0, 1.0, -2.0], &params);
        assert_eq!(llr[0], 0.0);
        assert!((llr[1] - 4.0).abs() < 1e-12);
        assert!(llr[2] < 0.0);
        // clamp
        let llr = llr_bi_awgn(&[1e6], &params);
        assert_eq!(llr[0], LLR_CLAMP);
    }

    #[test]
    fn snr_conversions() {
        assert_eq!(ebn0_to_esn0(3.0, 1.0).unwrap(), 3.0);
        let es = ebn0_to_esn0(2.51, 0.5).unwrap();
        assert!((es - (-0.5003)).abs() < 1e-3, "{es}");
        let back = esn0_to_ebn0(es, 0.5).unwrap();
        assert!((back - 2.51).abs() < 1e-12);
        assert!(ebn0_to_esn0(1.0, 0.0).is_err());
        assert!(ebn0_to_esn0(1.0, 1.5).is_err());
    }

    #[test]
    fn uncoded_bpsk_ber_matches_q_function() {
        // BER = Q(sqrt(2·Es/N0)) for uncoded BPSK.
        let es_n0_db = 0.0;
        let params = ChannelParams::from_es_n0_db(es_n0_db);
        let mut rng = RngStream::new(9, 0).rng();
        let n = 1_000_000usize;
        let symbols = vec![1.0; n];
        let out = awgn_apply(&symbols, &params, &mut rng);
        let errors = out.iter().filter(|&&y| y < 0.0).count();
        let p = crate::reliability::q_func((2.0 * 10f64.powf(es_n0_db / 10.0)).sqrt());
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let measured = errors as f64 / n as f64;
        assert!(
            (measured - p).abs() < 3.0 * se,
            "measured {measured}, expected {p} ± {se}"
        );
    }
}
