//! BPSK over AWGN with the all-zero codeword, and the prior generator that
//! turns channel observations into sorted, truncated (optionally quantized)
//! symbol messages.
//!
//! Symbol bits use the natural binary expansion: bit `i` of a symbol value
//! is coded bit `i` of that symbol, and coded bit 0 maps to +1.

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::code::ParityCheckMatrix;
use crate::decoder::DecoderConfig;
use crate::gf::{Field, Symbol};
use crate::message::{Entry, Llrv};
use crate::Error;

/// Bit LLR magnitude used in floating mode when sigma is exactly zero.
pub const FLOAT_LLR_CLAMP: f64 = 1e6;

/// Operating point. SNR is Eb/N0 per information bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub snr_db: f64,
    pub rate: f64,
    pub sigma: f64,
    /// Quantizer step; defaults to `0.5 * sigma` when `None`.
    pub quant_step: Option<f64>,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, rate: f64) -> Result<ChannelConfig, Error> {
        Ok(ChannelConfig {
            snr_db,
            rate,
            sigma: sigma_from_snr(snr_db, rate)?,
            quant_step: None,
        })
    }

    pub fn with_quant_step(mut self, step: Option<f64>) -> ChannelConfig {
        self.quant_step = step;
        self
    }

    /// Effective quantizer step. Falls back to 1.0 in the noiseless limit
    /// where `0.5 * sigma` vanishes.
    pub fn step(&self) -> f64 {
        match self.quant_step {
            Some(s) => s,
            None if self.sigma > 0.0 => 0.5 * self.sigma,
            None => 1.0,
        }
    }
}

/// Noise standard deviation per coded bit for unit-energy BPSK:
/// `sqrt(1 / (2 R 10^(snr/10)))`.
pub fn sigma_from_snr(snr_db: f64, rate: f64) -> Result<f64, Error> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::RateOutOfRange(rate));
    }
    let ebn0 = libm::pow(10.0, snr_db / 10.0);
    Ok(libm::sqrt(1.0 / (2.0 * rate * ebn0)))
}

/// Standard normal deviates from a uniform stream via Box-Muller.
///
/// Each pair of draws `u1 = 1 - U`, `u2 = U'` with `U, U'` uniform on
/// `[0, 1)` yields `r cos(2 pi u2)` and then `r sin(2 pi u2)`, where
/// `r = sqrt(-2 ln u1)`.
pub struct Gaussian<'a, R: RngCore> {
    rng: &'a mut R,
    spare: Option<f64>,
}

impl<'a, R: RngCore> Gaussian<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        Gaussian { rng, spare: None }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

/// Channel output for the all-zero codeword: `1 + sigma * g_i`.
pub fn transmit_all_zero<R: RngCore>(n_bits: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    let mut g = Gaussian::new(rng);
    (0..n_bits).map(|_| 1.0 + sigma * g.sample()).collect()
}

/// `log P(y | 0) / P(y | 1) = 2y / sigma^2`.
///
/// With `sigma = 0` the result saturates at [`FLOAT_LLR_CLAMP`] with the sign
/// of `y` (0 for an erased observation).
pub fn bit_llr(y: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        if y == 0.0 {
            0.0
        } else {
            libm::copysign(FLOAT_LLR_CLAMP, y)
        }
    } else {
        2.0 * y / (sigma * sigma)
    }
}

/// `M(beta)`: sum of the bit LLRs at the set bit positions of `beta`.
pub fn symbol_metrics(bit_llrs: &[f64], field: &Field) -> Result<Vec<f64>, Error> {
    let p = field.bits() as usize;
    if bit_llrs.len() != p {
        return Err(Error::LengthMismatch {
            expected: p,
            got: bit_llrs.len(),
        });
    }
    let mut out = Vec::with_capacity(field.order());
    out.push(0.0);
    // Build by doubling: metrics for values with top bit i are the metrics
    // of the lower half plus lambda_i.
    for (i, &l) in bit_llrs.iter().enumerate() {
        for v in 0..(1usize << i) {
            out.push(out[v] + l);
        }
    }
    Ok(out)
}

/// Subtracts the minimum metric, sorts by the pinned rule and keeps `n_m`.
pub fn normalize_sort_truncate(metrics: &[f64], n_m: usize) -> Result<Llrv, Error> {
    if n_m == 0 || n_m > metrics.len() {
        return Err(Error::TruncationLength {
            n_m,
            q: metrics.len(),
        });
    }
    let entries = metrics
        .iter()
        .enumerate()
        .map(|(s, &m)| Entry::new(m, s as Symbol))
        .collect();
    Llrv::from_candidates(entries, n_m)
}

/// Uniform quantizer: `clamp(round(penalty / step), 0, 2^Q - 1)`.
pub fn quantize_penalty(penalty: f64, bits: u32, step: f64) -> f64 {
    let top = ((1u64 << bits) - 1) as f64;
    libm::round(penalty / step).clamp(0.0, top)
}

/// Quantizes every penalty to an integer level and re-sorts.
pub fn quantize(v: &Llrv, bits: u32, step: f64) -> Llrv {
    let mut entries: Vec<Entry> = v
        .entries()
        .iter()
        .map(|e| Entry::new(quantize_penalty(e.penalty, bits, step), e.symbol))
        .collect();
    entries.sort_unstable_by(Entry::key_cmp);
    Llrv::normalized(entries)
}

/// Prior message for one symbol from its `p` channel observations.
pub fn symbol_prior(
    observations: &[f64],
    channel: &ChannelConfig,
    cfg: &DecoderConfig,
    field: &Field,
) -> Result<Llrv, Error> {
    let clamp = match cfg.levels() {
        Some(top) => top * channel.step(),
        None => FLOAT_LLR_CLAMP,
    };
    let llrs: Vec<f64> = observations
        .iter()
        .map(|&y| {
            let l = bit_llr(y, channel.sigma);
            if channel.sigma == 0.0 {
                l.clamp(-clamp, clamp)
            } else {
                l
            }
        })
        .collect();
    let metrics = symbol_metrics(&llrs, field)?;
    let v = normalize_sort_truncate(&metrics, cfg.n_m)?;
    Ok(match cfg.quant_bits {
        0 => v,
        bits => quantize(&v, bits, channel.step()),
    })
}

/// One prior per variable node for a fresh all-zero transmission.
pub fn generate_priors<R: RngCore>(
    h: &ParityCheckMatrix,
    channel: &ChannelConfig,
    cfg: &DecoderConfig,
    field: &Field,
    rng: &mut R,
) -> Result<Vec<Llrv>, Error> {
    h.check_field(field)?;
    let p = field.bits() as usize;
    let y = transmit_all_zero(h.n() * p, channel.sigma, rng);
    y.chunks_exact(p)
        .map(|obs| symbol_prior(obs, channel, cfg, field))
        .collect()
}
