//! Analytical cycle-latency model of the emulation pipeline.
//!
//! The three per-block latencies are exact closed forms. How they compose
//! into a row latency is a modelled approximation kept in [`row_cycles`] so
//! other schedules can be swapped in.

use crate::Error;

/// Pipeline parameters that are not code or decoder parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CycleConfig {
    /// Prior-generator pipeline fill, in cycles. Has no published value;
    /// the default of 10 is arbitrary.
    pub t_overhead: u64,
    pub clock_mhz: f64,
    pub n_decoders: u32,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            t_overhead: 10,
            clock_mhz: 120.0,
            n_decoders: 1,
        }
    }
}

/// Code and decoder parameters the model depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleParams {
    pub n: u64,
    pub m: u64,
    pub q: u64,
    pub d_c: u64,
    pub n_m: u64,
    pub ls_cn: u64,
    pub ls_vn: u64,
    pub max_iter: u64,
    /// Quantization bits, 0 when floating.
    pub quant_bits: u64,
    pub info_bits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MemoryBits {
    /// `m * d_c * (Q + q)`, the expression as published.
    pub published_formula: u64,
    /// `m * d_c * n_m * (Q + log2 q)`: one entry per stored message slot.
    pub entry_model: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CycleReport {
    pub prior_cycles: u64,
    pub row_cycles: u64,
    pub iter_cycles: u64,
    pub frame_cycles: u64,
    pub throughput_mbps: f64,
    /// `None` in floating mode, where word widths are undefined.
    pub memory_bits: Option<MemoryBits>,
}

/// Prior memory initialization: `t_overhead + ceil(n / 2) * (q + n_m)`,
/// two generator channels each sorting q metrics then writing n_m entries.
pub fn prior_gen_cycles(n: u64, q: u64, n_m: u64, t_overhead: u64) -> u64 {
    t_overhead + n.div_ceil(2) * (q + n_m)
}

/// One elementary check-node step: `2 + L_S-CN + n_m`.
pub fn ecn_step_cycles(ls_cn: u64, n_m: u64) -> u64 {
    2 + ls_cn + n_m
}

/// One variable-node operation: `2 + L_S-VN + n_m`.
pub fn vn_op_cycles(ls_vn: u64, n_m: u64) -> u64 {
    2 + ls_vn + n_m
}

/// Forward and backward ECNs run side by side, so `ceil(d_c / 2)` serialized
/// steps cover the trellis while the merge pair overlaps the second half;
/// the VN pipeline drains once after the last merge.
pub fn row_cycles(d_c: u64, ls_cn: u64, ls_vn: u64, n_m: u64) -> u64 {
    d_c.div_ceil(2) * ecn_step_cycles(ls_cn, n_m) + vn_op_cycles(ls_vn, n_m)
}

pub fn iter_cycles(m: u64, row: u64) -> u64 {
    m * row
}

/// Both buffer-size models; Q must be at least 2.
pub fn memory_bits(m: u64, d_c: u64, quant_bits: u64, q: u64, n_m: u64) -> Result<MemoryBits, Error> {
    if quant_bits < 2 {
        return Err(Error::QuantizationDisabled);
    }
    let log2q = u64::from(q.trailing_zeros());
    Ok(MemoryBits {
        published_formula: m * d_c * (quant_bits + q),
        entry_model: m * d_c * n_m * (quant_bits + log2q),
    })
}

/// `n_decoders * info_bits * clock_mhz / frame_cycles`, in Mb/s.
pub fn throughput_mbps(info_bits: u64, frame_cycles: u64, cfg: &CycleConfig) -> f64 {
    if frame_cycles == 0 {
        return 0.0;
    }
    f64::from(cfg.n_decoders) * info_bits as f64 * cfg.clock_mhz / frame_cycles as f64
}

pub fn frame_report(p: &CycleParams, cfg: &CycleConfig) -> CycleReport {
    let prior_cycles = prior_gen_cycles(p.n, p.q, p.n_m, cfg.t_overhead);
    let row = row_cycles(p.d_c, p.ls_cn, p.ls_vn, p.n_m);
    let iter = iter_cycles(p.m, row);
    let frame_cycles = prior_cycles + p.max_iter * iter;
    CycleReport {
        prior_cycles,
        row_cycles: row,
        iter_cycles: iter,
        frame_cycles,
        throughput_mbps: throughput_mbps(p.info_bits, frame_cycles, cfg),
        memory_bits: memory_bits(p.m, p.d_c, p.quant_bits, p.q, p.n_m).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(prior_gen_cycles(192, 32, 8, 10), 3850);
        assert_eq!(prior_gen_cycles(2, 4, 4, 0), 8);
        assert_eq!(prior_gen_cycles(0, 4, 4, 0), 0);
        assert_eq!(prior_gen_cycles(3, 4, 4, 0), 16);
        assert_eq!(ecn_step_cycles(4, 8), 14);
        assert_eq!(ecn_step_cycles(1, 1), 4);
        assert_eq!(vn_op_cycles(6, 8), 16);
        assert_eq!(vn_op_cycles(1, 1), 4);
        for n_m in 1..20 {
            assert_eq!(ecn_step_cycles(n_m, n_m), 2 + 2 * n_m);
            assert_eq!(vn_op_cycles(n_m, n_m), 2 + 2 * n_m);
        }
    }

    #[test]
    fn experiment_one_frame() {
        assert_eq!(row_cycles(4, 4, 6, 8), 44);
        let p = CycleParams {
            n: 192,
            m: 96,
            q: 32,
            d_c: 4,
            n_m: 8,
            ls_cn: 4,
            ls_vn: 6,
            max_iter: 10,
            quant_bits: 6,
            info_bits: 480,
        };
        let r = frame_report(&p, &CycleConfig::default());
        assert_eq!(r.prior_cycles, 3850);
        assert_eq!(r.frame_cycles, 46090);
        assert!((r.throughput_mbps - 480.0 * 120.0 / 46090.0).abs() < 1e-12);
        assert!((r.throughput_mbps - 1.2497).abs() < 1e-3);
        let two = CycleConfig {
            n_decoders: 2,
            ..CycleConfig::default()
        };
        assert!((frame_report(&p, &two).throughput_mbps - 2.0 * r.throughput_mbps).abs() < 1e-12);
    }

    #[test]
    fn memory_examples() {
        let m = memory_bits(96, 4, 6, 32, 8).unwrap();
        assert_eq!((m.published_formula, m.entry_model), (14592, 33792));
        let m = memory_bits(1, 2, 6, 4, 2).unwrap();
        assert_eq!((m.published_formula, m.entry_model), (20, 32));
        assert_eq!(memory_bits(96, 4, 0, 32, 8), Err(Error::QuantizationDisabled));
    }
}
