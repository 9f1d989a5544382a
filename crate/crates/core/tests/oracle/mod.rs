//! Reference implementations used only by tests. None of these share code
//! paths with the crate's decoder: they work on dense arrays or enumerate
//! every candidate.

#![allow(dead_code)]

use nbldpc_core::{Algorithm, DecoderConfig, Entry, Field, Llrv, ParityCheckMatrix};
use rand::Rng;

/// Carry-less multiply then reduce modulo `poly`, bit by bit.
pub fn poly_mul(a: u32, b: u32, poly: u32, p: u32) -> u32 {
    let mut prod = 0u32;
    for i in 0..p {
        if b >> i & 1 == 1 {
            prod ^= a << i;
        }
    }
    for bit in (p..2 * p).rev() {
        if prod >> bit & 1 == 1 {
            prod ^= poly << (bit - p);
        }
    }
    prod
}

/// Multiplicative order of `x` modulo `poly`, or `None` if its powers never
/// return to 1 within `2^p` steps.
pub fn order_of_x(poly: u32, p: u32) -> Option<usize> {
    let mut v = 1u32;
    for k in 1..=(1usize << p) {
        v = poly_mul(v, 2, poly, p);
        if v == 1 {
            return Some(k);
        }
    }
    None
}

fn saturate(cfg: &DecoderConfig, x: f64) -> f64 {
    match cfg.quant_bits {
        0 => x,
        b => x.min(((1u64 << b) - 1) as f64),
    }
}

fn combine_score(cfg: &DecoderConfig, a: f64, b: f64) -> f64 {
    match cfg.algorithm {
        Algorithm::Ems => saturate(cfg, a + b),
        Algorithm::MinMax => a.max(b),
    }
}

/// Sorts by (penalty, symbol), keeps `n_m`, subtracts the best.
fn finish(mut cands: Vec<(f64, u8)>, n_m: usize) -> Vec<(f64, u8)> {
    cands.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
    cands.truncate(n_m);
    let best = cands[0].0;
    cands.iter().map(|&(p, s)| (p - best, s)).collect()
}

/// Every pair of stored entries, minimum score per sum symbol.
pub fn exhaustive_ecn(a: &Llrv, b: &Llrv, cfg: &DecoderConfig) -> Vec<(f64, u8)> {
    let mut best = [f64::INFINITY; 256];
    for x in a.entries() {
        for y in b.entries() {
            let g = (x.symbol ^ y.symbol) as usize;
            let s = combine_score(cfg, x.penalty, y.penalty);
            if s < best[g] {
                best[g] = s;
            }
        }
    }
    let cands = (0..256)
        .filter(|&g| best[g].is_finite())
        .map(|g| (best[g], g as u8))
        .collect();
    finish(cands, cfg.n_m)
}

/// Output `j` of a check node by enumerating every tuple of stored entries
/// of all other inputs.
pub fn brute_force_cn(inputs: &[Llrv], j: usize, cfg: &DecoderConfig) -> Vec<(f64, u8)> {
    let others: Vec<&Llrv> = inputs
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, m)| m)
        .collect();
    let mut best = [f64::INFINITY; 256];
    let mut idx = vec![0usize; others.len()];
    loop {
        let mut g = 0u8;
        let mut s = 0.0;
        for (k, m) in others.iter().enumerate() {
            let e = m.entries()[idx[k]];
            g ^= e.symbol;
            s = if k == 0 { e.penalty } else { combine_score(cfg, s, e.penalty) };
        }
        if s < best[g as usize] {
            best[g as usize] = s;
        }
        // odometer
        let mut k = 0;
        loop {
            if k == others.len() {
                let cands = (0..256)
                    .filter(|&g| best[g].is_finite())
                    .map(|g| (best[g], g as u8))
                    .collect();
                return finish(cands, cfg.n_m);
            }
            idx[k] += 1;
            if idx[k] < others[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn pairs(v: &Llrv) -> Vec<(f64, u8)> {
    v.entries().iter().map(|e| (e.penalty, e.symbol)).collect()
}

/// Random valid message of length `len` over GF(q). Penalties are multiples
/// of 2^-20 so sums are exact in f64; with `grid` set they are small
/// integers, which produces many ties.
pub fn random_llrv<R: Rng>(rng: &mut R, q: usize, len: usize, grid: Option<u32>) -> Llrv {
    let mut syms: Vec<u8> = (0..q as u32).map(|s| s as u8).collect();
    for i in (1..syms.len()).rev() {
        let j = rng.random_range(0..=i);
        syms.swap(i, j);
    }
    let mut entries: Vec<Entry> = syms[..len]
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let p = if k == 0 {
                0.0
            } else {
                match grid {
                    Some(top) => rng.random_range(0..=top) as f64,
                    None => rng.random_range(0..(1u32 << 24)) as f64 / (1u32 << 20) as f64,
                }
            };
            Entry::new(p, s)
        })
        .collect();
    entries.sort_by(|x, y| x.key_cmp(y));
    let best = entries[0].penalty;
    for e in &mut entries {
        e.penalty -= best;
    }
    Llrv::new(entries).expect("valid random message")
}

/// Dense full-message decoder with the same schedule as the crate decoder:
/// all check nodes from the previous iteration's variable-to-check
/// messages, then all variable nodes and decisions. Messages are full
/// length `q` arrays of penalties.
pub struct DenseDecoder<'a> {
    pub h: &'a ParityCheckMatrix,
    pub field: &'a Field,
    pub algorithm: Algorithm,
    pub max_iter: usize,
}

fn normalize(v: &mut [f64]) {
    let m = v.iter().cloned().fold(f64::INFINITY, f64::min);
    for x in v.iter_mut() {
        *x -= m;
    }
}

impl DenseDecoder<'_> {
    pub fn decode(&self, priors: &[Vec<f64>]) -> Vec<u8> {
        let q = self.field.order();
        let f = self.field;
        // edges in row-major order: (row, col, coeff)
        let edges: Vec<(usize, usize, u8)> = self
            .h
            .rows()
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |e| (i, e.col, e.coeff)))
            .collect();
        let perm = |msg: &[f64], h: u8| {
            let mut out = vec![0.0; q];
            for b in 0..q {
                out[f.mul(h, b as u8) as usize] = msg[b];
            }
            out
        };
        let unperm = |msg: &[f64], h: u8| {
            let mut out = vec![0.0; q];
            for b in 0..q {
                out[b] = msg[f.mul(h, b as u8) as usize];
            }
            out
        };
        let mut vc: Vec<Vec<f64>> = edges.iter().map(|&(_, c, h)| perm(&priors[c], h)).collect();
        let mut cv: Vec<Vec<f64>> = vec![vec![0.0; q]; edges.len()];
        let mut decisions = vec![0u8; self.h.n()];
        for _ in 0..self.max_iter {
            let mut start = 0;
            for row in self.h.rows() {
                let d = row.len();
                for j in 0..d {
                    let others: Vec<usize> = (0..d).filter(|&k| k != j).collect();
                    let mut out = vec![f64::INFINITY; q];
                    let total = q.pow(others.len() as u32);
                    for t in 0..total {
                        let mut rem = t;
                        let mut g = 0usize;
                        let mut s = 0.0;
                        for (k, &o) in others.iter().enumerate() {
                            let sym = rem % q;
                            rem /= q;
                            g ^= sym;
                            let p = vc[start + o][sym];
                            s = if k == 0 {
                                p
                            } else if self.algorithm == Algorithm::Ems {
                                s + p
                            } else {
                                f64::max(s, p)
                            };
                        }
                        if s < out[g] {
                            out[g] = s;
                        }
                    }
                    normalize(&mut out);
                    cv[start + j] = unperm(&out, row[j].coeff);
                }
                start += d;
            }
            for col in 0..self.h.n() {
                let mine: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].1 == col).collect();
                for &e in &mine {
                    let mut u = priors[col].clone();
                    for &o in &mine {
                        if o != e {
                            for b in 0..q {
                                u[b] += cv[o][b];
                            }
                        }
                    }
                    normalize(&mut u);
                    vc[e] = perm(&u, edges[e].2);
                }
                let mut post = priors[col].clone();
                for &o in &mine {
                    for b in 0..q {
                        post[b] += cv[o][b];
                    }
                }
                let mut best = 0;
                for b in 1..q {
                    if post[b] < post[best] {
                        best = b;
                    }
                }
                decisions[col] = best as u8;
            }
        }
        decisions
    }
}

/// Dense penalty array of a full-length message.
pub fn dense(v: &Llrv, q: usize) -> Vec<f64> {
    let mut out = vec![f64::NAN; q];
    for e in v.entries() {
        out[e.symbol as usize] = e.penalty;
    }
    assert!(out.iter().all(|x| !x.is_nan()), "message is not full length");
    out
}
