//! Edge permutation and the elementary check node (ECN).

use alloc::vec::Vec;

use crate::gf::{Field, Symbol};
use crate::message::{BoundedSorter, Entry, Llrv, SymbolSet};
use crate::Error;

use super::DecoderConfig;

fn map_symbols(msg: &Llrv, f: impl Fn(Symbol) -> Symbol) -> Llrv {
    let mut entries: Vec<Entry> = msg
        .entries()
        .iter()
        .map(|e| Entry::new(e.penalty, f(e.symbol)))
        .collect();
    // Penalty order is untouched; only runs of equal penalties can need
    // reordering to restore the ascending-symbol tie rule.
    entries.sort_by(Entry::key_cmp);
    Llrv::from_sorted_unchecked(entries)
}

/// Variable-to-check permutation: every symbol `beta` becomes `h * beta`.
pub fn permute(msg: &Llrv, h: Symbol, field: &Field) -> Result<Llrv, Error> {
    if h == 0 {
        return Err(Error::ZeroCoefficient { row: 0, col: 0 });
    }
    if h == 1 {
        return Ok(msg.clone());
    }
    Ok(map_symbols(msg, |s| field.mul(h, s)))
}

/// Check-to-variable inverse permutation: every symbol `beta` becomes
/// `beta / h`.
pub fn inverse_permute(msg: &Llrv, h: Symbol, field: &Field) -> Result<Llrv, Error> {
    let h_inv = field.inv(h)?;
    if h_inv == 1 {
        return Ok(msg.clone());
    }
    Ok(map_symbols(msg, |s| field.mul(h_inv, s)))
}

/// Combines two messages over `gamma = alpha + beta`, keeping the `n_m`
/// best distinct sums.
///
/// Candidate scores are `pa + pb` (EMS, saturating when quantized) or
/// `max(pa, pb)` (Min-Max). Only pairs of stored entries are candidates.
///
/// The search walks the candidate matrix of `a` rows by `b` columns, which
/// is nondecreasing along both axes because the inputs are sorted, through
/// a sorter holding at most `ls_cn` candidates. A row is abandoned as soon
/// as its next score can no longer enter a full sorter, and the walk stops
/// when a row's first cell cannot. Each sweep fixes up to `ls_cn` outputs,
/// so `ceil(n_m / ls_cn)` sweeps produce the same result as sorting every
/// candidate.
pub fn ecn_combine(a: &Llrv, b: &Llrv, cfg: &DecoderConfig) -> Llrv {
    combine(a, b, cfg, false)
}

/// Like [`ecn_combine`], but also keeps every further symbol whose score
/// ties the last kept one. Used for partial folds inside a check node, where
/// cutting a tie group at an arbitrary symbol would make later stages depend
/// on the association order.
pub(crate) fn ecn_combine_keep_ties(a: &Llrv, b: &Llrv, cfg: &DecoderConfig) -> Llrv {
    combine(a, b, cfg, true)
}

fn combine(a: &Llrv, b: &Llrv, cfg: &DecoderConfig, keep_ties: bool) -> Llrv {
    let want = cfg.n_m;
    let live = cfg.ls_cn.clamp(1, want.max(1));
    let (ea, eb) = (a.entries(), b.entries());
    let mut out = Vec::with_capacity(want);
    let mut done = SymbolSet::default();
    let mut sorter = BoundedSorter::new(live);
    while out.len() < want {
        sorter.reset(live.min(want - out.len()));
        for x in ea {
            if !sorter.admits(cfg.score(x.penalty, eb[0].penalty)) {
                break;
            }
            for y in eb {
                let s = cfg.score(x.penalty, y.penalty);
                if !sorter.admits(s) {
                    break;
                }
                let g = Field::add(x.symbol, y.symbol);
                if !done.contains(g) {
                    sorter.offer(Entry::new(s, g));
                }
            }
        }
        if sorter.is_empty() {
            break;
        }
        let start = out.len();
        sorter.drain_into(&mut out);
        for e in &out[start..] {
            done.insert(e.symbol);
        }
    }
    if keep_ties && out.len() == want {
        if let Some(tau) = out.last().map(|e| e.penalty) {
            let mut tied = SymbolSet::default();
            let mut extra: Vec<Symbol> = Vec::new();
            for x in ea {
                if cfg.score(x.penalty, eb[0].penalty) > tau {
                    break;
                }
                for y in eb {
                    let s = cfg.score(x.penalty, y.penalty);
                    if s > tau {
                        break;
                    }
                    let g = Field::add(x.symbol, y.symbol);
                    // every symbol not yet output scores at least tau
                    if s == tau && !done.contains(g) && !tied.contains(g) {
                        tied.insert(g);
                        extra.push(g);
                    }
                }
            }
            extra.sort_unstable();
            out.extend(extra.into_iter().map(|g| Entry::new(tau, g)));
        }
    }
    Llrv::normalized(out)
}
