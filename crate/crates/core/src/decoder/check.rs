//! Check node: forward, backward and merge steps over a d_c-stage trellis.

use alloc::vec;
use alloc::vec::Vec;

use crate::message::Llrv;

use super::ecn::{ecn_combine, ecn_combine_keep_ties};
use super::DecoderConfig;

/// Extrinsic outputs of one check node.
///
/// `incoming` holds the permuted variable-to-check messages in row order.
/// Output `j` combines every input except `j`: `F_{j-1}` with `B_{j+1}`,
/// where `F_k` folds inputs `0..=k` and `B_k` folds inputs `k..`. A row of
/// degree 1 forces its symbol to zero.
///
/// Partial folds that feed later stages keep the whole tie group at their
/// truncation boundary, so every output equals truncating the combination
/// of all other inputs directly.
pub fn cn_process(incoming: &[Llrv], cfg: &DecoderConfig) -> Vec<Llrv> {
    let d = incoming.len();
    match d {
        0 => return Vec::new(),
        1 => return vec![Llrv::identity()],
        2 => return vec![incoming[1].clone(), incoming[0].clone()],
        _ => {}
    }
    // forward[k] = in_0 + ... + in_k for k <= d - 2
    let mut forward = Vec::with_capacity(d - 1);
    forward.push(incoming[0].clone());
    for k in 1..d - 1 {
        let next = if k < d - 2 {
            ecn_combine_keep_ties(&forward[k - 1], &incoming[k], cfg)
        } else {
            ecn_combine(&forward[k - 1], &incoming[k], cfg)
        };
        forward.push(next);
    }
    // backward[k - 1] = in_k + ... + in_{d-1} for k >= 1
    let mut backward = vec![Llrv::identity(); d - 1];
    backward[d - 2] = incoming[d - 1].clone();
    for k in (1..d - 1).rev() {
        backward[k - 1] = if k > 1 {
            ecn_combine_keep_ties(&incoming[k], &backward[k], cfg)
        } else {
            ecn_combine(&incoming[k], &backward[k], cfg)
        };
    }
    let mut out = Vec::with_capacity(d);
    out.push(backward[0].clone());
    for j in 1..d - 1 {
        out.push(ecn_combine(&forward[j - 1], &backward[j], cfg));
    }
    out.push(forward[d - 2].clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::Algorithm;
    use crate::message::Entry;

    #[test]
    fn two_inputs_swap() {
        let a = Llrv::new(vec![Entry::new(0.0, 1), Entry::new(1.0, 2)]).unwrap();
        let b = Llrv::new(vec![Entry::new(0.0, 3), Entry::new(4.0, 0)]).unwrap();
        let cfg = DecoderConfig::new(Algorithm::Ems, 2);
        let out = cn_process(&[a.clone(), b.clone()], &cfg);
        assert_eq!(out, vec![b, a]);
    }

    #[test]
    fn certain_zeros() {
        let cfg = DecoderConfig::new(Algorithm::MinMax, 1);
        let out = cn_process(&[Llrv::identity(), Llrv::identity(), Llrv::identity()], &cfg);
        assert_eq!(out, vec![Llrv::identity(); 3]);
    }
}
