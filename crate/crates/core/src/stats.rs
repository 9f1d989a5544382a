//! Error-rate statistics: Wilson intervals, the uncoded BPSK reference and
//! coding gain by log-linear interpolation.

use crate::Error;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Uncoded BPSK bit error rate `0.5 erfc(sqrt(Eb/N0))` at `ebn0_db`.
pub fn uncoded_bpsk_ber(ebn0_db: f64) -> f64 {
    let ebn0 = libm::pow(10.0, ebn0_db / 10.0);
    0.5 * libm::erfc(libm::sqrt(ebn0))
}

/// Eb/N0 in dB at which uncoded BPSK reaches `target_ber`, by bisection.
pub fn uncoded_snr_for_ber(target_ber: f64) -> Result<f64, Error> {
    if !(target_ber > 0.0 && target_ber < 0.5) {
        return Err(Error::NotBracketed(target_ber));
    }
    let (mut lo, mut hi) = (-20.0_f64, 30.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if uncoded_bpsk_ber(mid) > target_ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// SNR at which a measured curve crosses `target_ber`, interpolating
/// `log10(BER)` linearly in dB between the first bracketing pair of
/// positive points. `points` are `(snr_db, ber)` in any order.
pub fn snr_at_ber(points: &[(f64, f64)], target_ber: f64) -> Result<f64, Error> {
    let mut pts: alloc::vec::Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pts.windows(2) {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if b0 >= target_ber && target_ber >= b1 {
            let (l0, l1, lt) = (libm::log10(b0), libm::log10(b1), libm::log10(target_ber));
            if l0 == l1 {
                return Ok(s0);
            }
            return Ok(s0 + (lt - l0) * (s1 - s0) / (l1 - l0));
        }
    }
    Err(Error::NotBracketed(target_ber))
}

/// Uncoded BPSK SNR minus coded SNR at `target_ber`, in dB.
pub fn coding_gain(points: &[(f64, f64)], target_ber: f64) -> Result<f64, Error> {
    let coded = snr_at_ber(points, target_ber)?;
    Ok(uncoded_snr_for_ber(target_ber)? - coded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncoded_reference() {
        let snr = uncoded_snr_for_ber(1e-5).unwrap();
        assert!((snr - 9.588).abs() < 0.005, "{snr}");
        assert!((uncoded_bpsk_ber(snr) - 1e-5).abs() < 1e-12);
    }

    #[test]
    fn gain_from_crossing() {
        // straight line in log domain through (4.0, 1e-4) and (5.0, 1e-6)
        let pts = [(4.0, 1e-4), (5.0, 1e-6)];
        let s = snr_at_ber(&pts, 1e-5).unwrap();
        assert!((s - 4.5).abs() < 1e-12);
        let g = coding_gain(&[(4.2, 1e-4), (5.0, 1e-6)], 1e-5).unwrap();
        assert!((g - (9.588 - 4.6)).abs() < 0.01, "{g}");
    }

    #[test]
    fn flat_curve_not_bracketed() {
        let pts = [(1.0, 1e-2), (2.0, 1e-2), (3.0, 1e-2)];
        assert_eq!(snr_at_ber(&pts, 1e-5), Err(Error::NotBracketed(1e-5)));
    }

    #[test]
    fn wilson_basics() {
        let (lo, hi) = wilson_interval(0, 1_000_000, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 4e-6);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }
}
