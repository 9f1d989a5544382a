//! Variable node update with compensation for truncated messages, and the
//! end-of-iteration posterior and hard decision.

use alloc::vec;
use alloc::vec::Vec;

use crate::gf::Symbol;
use crate::message::{BoundedSorter, Entry, Llrv, SymbolSet};

use super::DecoderConfig;

/// Sum of penalties over the union of stored symbols. A message that lacks
/// a symbol contributes its worst stored penalty plus the compensation
/// offset.
struct Accumulator {
    union: Vec<Symbol>,
    /// `scores[s]`, meaningful only for symbols in `union`.
    scores: Vec<f64>,
}

fn accumulate(q: usize, prior: &Llrv, incoming: &[&Llrv], cfg: &DecoderConfig) -> Accumulator {
    let mut present = SymbolSet::default();
    let mut union = Vec::with_capacity(prior.len() * (1 + incoming.len()));
    for msg in core::iter::once(prior).chain(incoming.iter().copied()) {
        for s in msg.symbols() {
            if !present.contains(s) {
                present.insert(s);
                union.push(s);
            }
        }
    }
    // Dense lookup per message, NaN for absent symbols.
    let mut lookup = vec![f64::NAN; q];
    let mut scores = vec![0.0; q];
    for (k, msg) in core::iter::once(prior).chain(incoming.iter().copied()).enumerate() {
        for e in msg.entries() {
            lookup[e.symbol as usize] = e.penalty;
        }
        let comp = cfg.saturate(msg.worst_penalty() + cfg.compensation_offset);
        for &s in &union {
            let p = lookup[s as usize];
            let p = if p.is_nan() { comp } else { p };
            let acc = &mut scores[s as usize];
            *acc = if k == 0 { p } else { cfg.saturate(*acc + p) };
        }
        for e in msg.entries() {
            lookup[e.symbol as usize] = f64::NAN;
        }
    }
    Accumulator { union, scores }
}

/// Variable-to-check message toward one neighbour from the prior and the
/// check-to-variable messages of every other neighbour.
///
/// Selection runs through a sorter of `ls_vn` slots; each sweep over the
/// candidate union fixes the next `ls_vn` outputs, so the result is the
/// exact `n_m` best whatever the sorter length. With no incoming messages
/// the prior passes through unchanged.
pub fn vn_update(q: usize, prior: &Llrv, incoming: &[&Llrv], cfg: &DecoderConfig) -> Llrv {
    if incoming.is_empty() {
        return prior.clone();
    }
    let acc = accumulate(q, prior, incoming, cfg);
    let want = cfg.n_m.min(acc.union.len());
    let live = cfg.ls_vn.clamp(1, cfg.n_m.max(1));
    let mut out = Vec::with_capacity(want);
    let mut done = SymbolSet::default();
    let mut sorter = BoundedSorter::new(live);
    while out.len() < want {
        sorter.reset(live.min(want - out.len()));
        for &s in &acc.union {
            if !done.contains(s) {
                sorter.offer(Entry::new(acc.scores[s as usize], s));
            }
        }
        let start = out.len();
        sorter.drain_into(&mut out);
        for e in &out[start..] {
            done.insert(e.symbol);
        }
    }
    Llrv::normalized(out)
}

/// Posterior scores (`f64::INFINITY` for symbols no message stores) and the
/// hard decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub decision: Symbol,
    pub scores: Vec<f64>,
}

/// Scores the prior against all `d_v` incoming messages and decides on the
/// smallest score, smallest symbol first on ties.
pub fn posterior_and_decide(
    q: usize,
    prior: &Llrv,
    incoming: &[&Llrv],
    cfg: &DecoderConfig,
) -> Posterior {
    let acc = accumulate(q, prior, incoming, cfg);
    let mut scores = vec![f64::INFINITY; q];
    let mut best = Entry::new(f64::INFINITY, Symbol::MAX);
    for &s in &acc.union {
        let e = Entry::new(acc.scores[s as usize], s);
        scores[s as usize] = e.penalty;
        if e.key_cmp(&best).is_lt() {
            best = e;
        }
    }
    Posterior {
        decision: best.symbol,
        scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::Algorithm;

    fn llrv(pairs: &[(f64, u8)]) -> Llrv {
        Llrv::new(pairs.iter().map(|&(p, s)| Entry::new(p, s)).collect()).unwrap()
    }

    #[test]
    fn bypass_without_incoming() {
        let prior = llrv(&[(0.0, 2), (1.0, 1)]);
        let cfg = DecoderConfig::new(Algorithm::Ems, 2);
        assert_eq!(vn_update(4, &prior, &[], &cfg), prior);
    }

    #[test]
    fn hand_sum() {
        let prior = llrv(&[(0.0, 0), (1.0, 1)]);
        let inc = llrv(&[(0.0, 1), (2.0, 0)]);
        let cfg = DecoderConfig::new(Algorithm::Ems, 2).with_compensation_offset(0.0);
        assert_eq!(vn_update(4, &prior, &[&inc], &cfg), llrv(&[(0.0, 1), (1.0, 0)]));
    }

    #[test]
    fn agreement() {
        let prior = llrv(&[(0.0, 0)]);
        let inc = llrv(&[(0.0, 0)]);
        let cfg = DecoderConfig::new(Algorithm::Ems, 1);
        assert_eq!(vn_update(4, &prior, &[&inc, &inc], &cfg).best().symbol, 0);
    }

    #[test]
    fn compensation_applies_to_missing_symbols() {
        let prior = llrv(&[(0.0, 0), (1.0, 1)]);
        let inc = llrv(&[(0.0, 2), (3.0, 0)]);
        let cfg = DecoderConfig::new(Algorithm::Ems, 3).with_compensation_offset(1.0);
        // 0: 0+3 = 3, 1: 1+(3+1) = 5, 2: (1+1)+0 = 2
        let out = vn_update(4, &prior, &[&inc], &cfg);
        assert_eq!(out, llrv(&[(0.0, 2), (1.0, 0), (3.0, 1)]));
    }

    #[test]
    fn decision_follows_incoming() {
        let prior = llrv(&[(0.0, 3), (1.0, 0)]);
        let inc = llrv(&[(0.0, 0), (5.0, 3)]);
        let cfg = DecoderConfig::new(Algorithm::Ems, 2);
        let post = posterior_and_decide(4, &prior, &[&inc, &inc], &cfg);
        assert_eq!(post.decision, 0);
        assert_eq!(post.scores[0], 1.0);
        assert_eq!(post.scores[3], 10.0);
        assert_eq!(post.scores[1], f64::INFINITY);
    }

    #[test]
    fn decision_tie_prefers_smaller_symbol() {
        let prior = llrv(&[(0.0, 2), (0.0, 5)]);
        let inc = llrv(&[(0.0, 5)]);
        let inc2 = llrv(&[(0.0, 2)]);
        let cfg = DecoderConfig::new(Algorithm::Ems, 2).with_compensation_offset(0.0);
        // 2: 0 + 0 + 0, 5: 0 + 0 + 0 with zero offsets
        let post = posterior_and_decide(8, &prior, &[&inc, &inc2], &cfg);
        assert_eq!(post.scores[2], post.scores[5]);
        assert_eq!(post.decision, 2);
    }

    #[test]
    fn noiseless_decides_zero() {
        let prior = llrv(&[(0.0, 0), (8.0, 1)]);
        let inc = llrv(&[(0.0, 1), (0.5, 0)]);
        let cfg = DecoderConfig::new(Algorithm::MinMax, 2);
        assert_eq!(posterior_and_decide(4, &prior, &[&inc], &cfg).decision, 0);
    }
}
