//! Error-bound selection: the closed-form optimum from gap statistics, a
//! calibration routine for its data-dependent constant, and a measured
//! sweep fallback for when the i.i.d.-gap assumption does not hold.
//!
//! The space model behind the closed form is `L(eps) ~ C * N * sigma^2 /
//! eps^2` segments plus `N * ceil(log2(2*eps+1))` residual bits; minimizing
//! the total yields `eps_opt = sqrt(2 ln2 * sigma^2 * C * (K + 2F))` with K
//! key bits and F parameter-float bits. C is fitted per dataset.

use crate::codec::{compress, space_report};
use crate::error::{Error, Result};
use crate::fitter::fit;
use crate::types::SortedKeyList;

/// Default power-of-two sweep set, 2^0 through 2^12.
pub fn default_sweep() -> Vec<u32> {
    (0..=12).map(|p| 1u32 << p).collect()
}

/// Gap statistics feeding the closed-form error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningStats {
    pub n: usize,
    /// Population variance of consecutive key gaps.
    pub gap_variance: f64,
    /// Data-dependent calibration constant; `None` until calibrated.
    pub c_const: Option<f64>,
    /// Bits per key (32 or 64).
    pub key_bits: u32,
    /// Bits per stored model parameter (32 for the 12-byte segment layout).
    pub float_bits: u32,
}

/// Computes gap statistics; the calibration constant is left unset.
pub fn gap_stats(keys: &SortedKeyList) -> Result<TuningStats> {
    let ks = keys.keys();
    if ks.len() < 2 {
        return Err(Error::TooShort {
            need: 2,
            got: ks.len(),
        });
    }
    let m = (ks.len() - 1) as f64;
    let mean = (ks[ks.len() - 1] - ks[0]) as f64 / m;
    let ss: f64 = ks
        .windows(2)
        .map(|w| {
            let g = (w[1] - w[0]) as f64 - mean;
            g * g
        })
        .sum();
    Ok(TuningStats {
        n: ks.len(),
        gap_variance: ss / m,
        c_const: None,
        key_bits: keys.width().bits(),
        float_bits: 32,
    })
}

/// Closed-form error bound: max(1, round(sqrt(2 ln2 * sigma^2 * C * (K+2F)))).
pub fn epsilon_opt(stats: &TuningStats) -> Result<u32> {
    let c = stats.c_const.ok_or(Error::MissingCalibration)?;
    let kf = (stats.key_bits + 2 * stats.float_bits) as f64;
    let eps = (2.0 * std::f64::consts::LN_2 * stats.gap_variance * c * kf).sqrt();
    Ok((eps.round() as u32).max(1))
}

/// Modeled total bits at a given error bound: N * (1.721 + ceil(log2 eps)).
/// A model, not an exact count; it excludes the per-list segment overhead
/// that dominates at small N.
pub fn space_model(stats: &TuningStats, epsilon: u32) -> f64 {
    let eps = epsilon.max(1);
    let log_term = 32 - (eps - 1).leading_zeros(); // ceil(log2 eps), 0 at 1
    stats.n as f64 * (1.721 + log_term as f64)
}

/// Fits the calibration constant from measured segment counts across a
/// sweep: least squares on `ln L(eps) = ln C + ln(N sigma^2 / eps^2)`.
/// The log domain keeps any single sweep point from dominating; points
/// where the model saturates (almost one segment per key, or almost no
/// segments) are excluded. Errors when the segment count never varies
/// (e.g. linear data).
pub fn calibrate_c(sample: &SortedKeyList, epsilons: &[u32]) -> Result<f64> {
    let stats = gap_stats(sample)?;
    if stats.gap_variance == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let mut pairs = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let eps = eps.max(1);
        // Bounds the f32 parameters cannot honor at this key magnitude are
        // not candidates.
        let l = match fit(sample, eps) {
            Ok(r) => r.segments.len(),
            Err(Error::EpsilonInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        };
        pairs.push((eps, l));
    }
    let l_min = pairs.iter().map(|&(_, l)| l).min().unwrap_or(0);
    let l_max = pairs.iter().map(|&(_, l)| l).max().unwrap_or(0);
    if l_min >= l_max {
        return Err(Error::DegenerateSample);
    }
    let n = stats.n;
    let usable: Vec<&(u32, usize)> = pairs
        .iter()
        .filter(|&&(_, l)| l >= 8 && n / l >= 8)
        .collect();
    let usable = if usable.len() >= 2 {
        usable
    } else {
        pairs.iter().collect()
    };
    let mean_ln: f64 = usable
        .iter()
        .map(|&&(eps, l)| {
            let g = n as f64 * stats.gap_variance / (eps as f64 * eps as f64);
            (l as f64 / g).ln()
        })
        .sum::<f64>()
        / usable.len() as f64;
    Ok(mean_ln.exp())
}

/// Measures the actual total compressed bits at each candidate bound.
/// Candidates the format cannot honor at this key magnitude are dropped.
pub fn sweep(keys: &SortedKeyList, epsilons: &[u32]) -> Result<Vec<(u32, u64)>> {
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        match compress(keys, eps) {
            Ok(c) => out.push((eps, space_report(&c).total_bits)),
            Err(Error::EpsilonInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Calibrates on the data itself and returns the closed-form bound along
/// with the stats used. Convenience path behind `compress --tune`.
pub fn auto_epsilon(keys: &SortedKeyList) -> Result<(u32, TuningStats)> {
    let mut stats = gap_stats(keys)?;
    stats.c_const = Some(calibrate_c(keys, &default_sweep())?);
    let eps = epsilon_opt(&stats)?;
    Ok((eps, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn list(keys: Vec<u64>) -> SortedKeyList {
        SortedKeyList::from_keys(keys).unwrap()
    }

    #[test]
    fn variance_of_constant_gaps_is_zero() {
        let k = list((1..=100).map(|i| i * 7).collect());
        assert_eq!(gap_stats(&k).unwrap().gap_variance, 0.0);
    }

    #[test]
    fn variance_hand_computed() {
        // gaps {1, 2}: mean 1.5, population variance 0.25
        let s = gap_stats(&list(vec![0, 1, 3])).unwrap();
        assert!((s.gap_variance - 0.25).abs() < 1e-12);
        assert_eq!(s.n, 3);
    }

    #[test]
    fn variance_matches_discrete_uniform_closed_form() {
        // Uniform gaps over the 98 values 1..=98: variance (98^2 - 1)/12.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut key = 0u64;
        let keys: Vec<u64> = (0..1_000_000)
            .map(|_| {
                key += rng.gen_range(1..=98);
                key
            })
            .collect();
        let s = gap_stats(&list(keys)).unwrap();
        let expect = (98.0f64 * 98.0 - 1.0) / 12.0; // 800.25
        assert!(
            (s.gap_variance - expect).abs() / expect < 0.02,
            "variance {} vs {}",
            s.gap_variance,
            expect
        );
    }

    #[test]
    fn too_short_for_stats() {
        assert!(matches!(
            gap_stats(&list(vec![9])),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn epsilon_opt_direct_substitution() {
        let stats = TuningStats {
            n: 1000,
            gap_variance: 1.0,
            c_const: Some(1.0),
            key_bits: 32,
            float_bits: 32,
        };
        // sqrt(2 ln2 * 96) = 11.53... rounds to 12
        assert_eq!(epsilon_opt(&stats).unwrap(), 12);
    }

    #[test]
    fn epsilon_opt_clamps_to_one() {
        let stats = TuningStats {
            n: 10,
            gap_variance: 0.0,
            c_const: Some(1.0),
            key_bits: 32,
            float_bits: 32,
        };
        assert_eq!(epsilon_opt(&stats).unwrap(), 1);
    }

    #[test]
    fn epsilon_opt_requires_calibration() {
        let stats = TuningStats {
            n: 10,
            gap_variance: 4.0,
            c_const: None,
            key_bits: 32,
            float_bits: 32,
        };
        assert!(matches!(epsilon_opt(&stats), Err(Error::MissingCalibration)));
    }

    #[test]
    fn space_model_reference_values() {
        let stats = TuningStats {
            n: 1_000_000,
            gap_variance: 1.0,
            c_const: None,
            key_bits: 32,
            float_bits: 32,
        };
        assert!((space_model(&stats, 16) - 5_721_000.0).abs() < 1e-6);
        let small = TuningStats { n: 21, ..stats };
        assert!((space_model(&small, 4) - 21.0 * 3.721).abs() < 1e-9);
    }

    #[test]
    fn space_model_monotone() {
        let stats = TuningStats {
            n: 1000,
            gap_variance: 1.0,
            c_const: None,
            key_bits: 32,
            float_bits: 32,
        };
        let mut prev = 0.0;
        for eps in 1..=512u32 {
            let b = space_model(&stats, eps);
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn calibrate_rejects_linear_sample() {
        let k = list((1..=2000).map(|i| i * 3).collect());
        assert!(matches!(
            calibrate_c(&k, &default_sweep()),
            Err(Error::DegenerateSample)
        ));
    }

    #[test]
    fn calibrate_split_half_stability() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut key = 0u64;
        let keys: Vec<u64> = (0..60_000)
            .map(|_| {
                key += rng.gen_range(1..=100);
                key
            })
            .collect();
        let (a, b) = keys.split_at(30_000);
        let ca = calibrate_c(&list(a.to_vec()), &default_sweep()).unwrap();
        let cb = calibrate_c(&list(b.to_vec()), &default_sweep()).unwrap();
        assert!(ca > 0.0 && cb > 0.0);
        assert!(
            (ca - cb).abs() / ca.max(cb) < 0.2,
            "halves disagree: {ca} vs {cb}"
        );
    }
}
