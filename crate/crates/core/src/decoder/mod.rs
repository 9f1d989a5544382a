//! EMS and Min-Max decoding with truncated messages.
//!
//! One iteration walks the rows of H in order. Each row reads its current
//! variable-to-check messages, runs the check node and stores the inverse
//! permuted check-to-variable messages. Once every row is done, the variable
//! nodes refresh all variable-to-check messages (permuted on write) and the
//! posteriors, and a hard decision is taken per symbol.

mod check;
mod ecn;
mod variable;

use alloc::vec;
use alloc::vec::Vec;

pub use check::cn_process;
pub use ecn::{ecn_combine, inverse_permute, permute};
pub use variable::{posterior_and_decide, vn_update, Posterior};

use crate::code::ParityCheckMatrix;
use crate::gf::{Field, Symbol};
use crate::message::Llrv;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Algorithm {
    /// Extended min-sum: candidate score is the sum of penalties.
    Ems,
    /// Min-Max: candidate score is the larger penalty.
    #[cfg_attr(feature = "serde", serde(rename = "mm"))]
    MinMax,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Ems => "ems",
            Algorithm::MinMax => "mm",
        }
    }
}

impl core::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ems" => Ok(Algorithm::Ems),
            "mm" | "minmax" | "min-max" => Ok(Algorithm::MinMax),
            _ => Err(Error::InvalidConfig("algorithm must be ems or mm")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecoderConfig {
    pub algorithm: Algorithm,
    /// Message truncation length.
    pub n_m: usize,
    /// Quantization bits; 0 selects floating point.
    pub quant_bits: u32,
    /// Variable-node sorter length.
    pub ls_vn: usize,
    /// Check-node sorter length.
    pub ls_cn: usize,
    /// Iteration limit.
    pub max_iter: usize,
    /// Added to a message's worst stored penalty to score symbols it lacks.
    /// In quantized mode the unit is one level.
    pub compensation_offset: f64,
    /// Stop as soon as the decisions satisfy every check.
    pub early_stop: bool,
}

impl DecoderConfig {
    /// Full-length sorters, 10 iterations, floating point, offset 1.
    pub fn new(algorithm: Algorithm, n_m: usize) -> DecoderConfig {
        DecoderConfig {
            algorithm,
            n_m,
            quant_bits: 0,
            ls_vn: n_m,
            ls_cn: n_m,
            max_iter: 10,
            compensation_offset: 1.0,
            early_stop: false,
        }
    }

    pub fn with_sorters(mut self, ls_vn: usize, ls_cn: usize) -> Self {
        self.ls_vn = ls_vn;
        self.ls_cn = ls_cn;
        self
    }

    pub fn with_quant_bits(mut self, bits: u32) -> Self {
        self.quant_bits = bits;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_compensation_offset(mut self, offset: f64) -> Self {
        self.compensation_offset = offset;
        self
    }

    pub fn with_early_stop(mut self, early_stop: bool) -> Self {
        self.early_stop = early_stop;
        self
    }

    pub fn validate(&self, q: usize) -> Result<(), Error> {
        if self.n_m == 0 || self.n_m > q {
            return Err(Error::TruncationLength { n_m: self.n_m, q });
        }
        if self.ls_cn == 0 || self.ls_cn > self.n_m {
            return Err(Error::InvalidConfig("ls_cn must be in 1..=n_m"));
        }
        if self.ls_vn == 0 || self.ls_vn > self.n_m {
            return Err(Error::InvalidConfig("ls_vn must be in 1..=n_m"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1"));
        }
        if self.quant_bits == 1 || self.quant_bits > 24 {
            return Err(Error::InvalidConfig("quant_bits must be 0 or in 2..=24"));
        }
        if self.compensation_offset.is_nan() || self.compensation_offset < 0.0 {
            return Err(Error::InvalidConfig("compensation_offset must be >= 0"));
        }
        Ok(())
    }

    /// Largest quantized level `2^Q - 1`, or `None` in floating mode.
    #[inline]
    pub fn levels(&self) -> Option<f64> {
        match self.quant_bits {
            0 => None,
            b => Some(((1u64 << b) - 1) as f64),
        }
    }

    #[inline]
    pub(crate) fn saturate(&self, x: f64) -> f64 {
        match self.levels() {
            Some(top) if x > top => top,
            _ => x,
        }
    }

    /// ECN candidate score.
    #[inline]
    pub(crate) fn score(&self, a: f64, b: f64) -> f64 {
        match self.algorithm {
            Algorithm::Ems => self.saturate(a + b),
            Algorithm::MinMax => {
                if b > a {
                    b
                } else {
                    a
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub decisions: Vec<Symbol>,
    pub iterations: usize,
    /// The final decisions satisfy every parity check.
    pub converged: bool,
}

/// Message memories after a decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    /// Variable-to-check messages in the permuted domain, one per edge in
    /// row-major edge order.
    pub vc_messages: Vec<Llrv>,
    /// Check-to-variable messages after inverse permutation.
    pub cv_messages: Vec<Llrv>,
    pub posterior: Vec<Posterior>,
    pub decisions: Vec<Symbol>,
}

/// Decoder bound to one code and configuration. Holds no per-frame state,
/// so one instance can serve many frames, including from several threads.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    h: &'a ParityCheckMatrix,
    field: &'a Field,
    cfg: DecoderConfig,
    row_start: Vec<usize>,
    edge_col: Vec<usize>,
    edge_coeff: Vec<Symbol>,
    col_edges: Vec<Vec<usize>>,
}

impl<'a> Decoder<'a> {
    pub fn new(
        h: &'a ParityCheckMatrix,
        field: &'a Field,
        cfg: DecoderConfig,
    ) -> Result<Decoder<'a>, Error> {
        h.check_field(field)?;
        cfg.validate(field.order())?;
        let mut row_start = Vec::with_capacity(h.m() + 1);
        let mut edge_col = Vec::with_capacity(h.num_edges());
        let mut edge_coeff = Vec::with_capacity(h.num_edges());
        let mut col_edges = vec![Vec::new(); h.n()];
        row_start.push(0);
        for row in h.rows() {
            for e in row {
                col_edges[e.col].push(edge_col.len());
                edge_col.push(e.col);
                edge_coeff.push(e.coeff);
            }
            row_start.push(edge_col.len());
        }
        Ok(Decoder {
            h,
            field,
            cfg,
            row_start,
            edge_col,
            edge_coeff,
            col_edges,
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn decode(&self, priors: &[Llrv]) -> Result<DecodeOutcome, Error> {
        self.decode_with_state(priors).map(|(o, _)| o)
    }

    /// Decodes and also returns the final message memories.
    pub fn decode_with_state(&self, priors: &[Llrv]) -> Result<(DecodeOutcome, DecoderState), Error> {
        let n = self.h.n();
        if priors.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: priors.len(),
            });
        }
        let q = self.field.order();
        let cfg = &self.cfg;
        let field = self.field;

        // First iteration: the priors bypass the variable nodes.
        let mut vc = self
            .edge_col
            .iter()
            .zip(&self.edge_coeff)
            .map(|(&c, &h)| permute(&priors[c], h, field))
            .collect::<Result<Vec<_>, _>>()?;
        let mut cv = vec![Llrv::identity(); vc.len()];
        let mut posterior = Vec::with_capacity(n);
        let mut decisions = vec![0; n];
        let mut iterations = 0;

        for _ in 0..cfg.max_iter {
            for w in self.row_start.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let out = cn_process(&vc[lo..hi], cfg);
                for (k, msg) in out.iter().enumerate() {
                    cv[lo + k] = inverse_permute(msg, self.edge_coeff[lo + k], field)?;
                }
            }
            posterior.clear();
            let mut incoming: Vec<&Llrv> = Vec::new();
            for (j, edges) in self.col_edges.iter().enumerate() {
                for &e in edges {
                    incoming.clear();
                    incoming.extend(edges.iter().filter(|&&o| o != e).map(|&o| &cv[o]));
                    let msg = vn_update(q, &priors[j], &incoming, cfg);
                    vc[e] = permute(&msg, self.edge_coeff[e], field)?;
                }
                incoming.clear();
                incoming.extend(edges.iter().map(|&o| &cv[o]));
                let post = posterior_and_decide(q, &priors[j], &incoming, cfg);
                decisions[j] = post.decision;
                posterior.push(post);
            }
            iterations += 1;
            if cfg.early_stop && self.h.is_codeword(&decisions, field)? {
                break;
            }
        }
        let converged = self.h.is_codeword(&decisions, field)?;
        let outcome = DecodeOutcome {
            decisions: decisions.clone(),
            iterations,
            converged,
        };
        let state = DecoderState {
            vc_messages: vc,
            cv_messages: cv,
            posterior,
            decisions,
        };
        Ok((outcome, state))
    }
}

/// One-shot decode of `priors` (one per column of `h`).
pub fn decode(
    h: &ParityCheckMatrix,
    priors: &[Llrv],
    cfg: &DecoderConfig,
    field: &Field,
) -> Result<DecodeOutcome, Error> {
    Decoder::new(h, field, *cfg)?.decode(priors)
}
