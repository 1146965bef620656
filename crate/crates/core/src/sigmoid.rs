//! The steepness-`alpha` logistic transform applied to signed distances.

/// Default steepness.
pub const DEFAULT_ALPHA: f64 = 32.0;

/// `1 / (1 + exp(-alpha * s))`, evaluated without overflow for large `|s|`.
#[inline]
pub fn sigmoid(s: f64, alpha: f64) -> f64 {
    let a = alpha * s;
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// Raw signed distance at which `sigmoid(s, alpha) == p`.
#[inline]
pub fn inverse_sigmoid(p: f64, alpha: f64) -> f64 {
    (p / (1.0 - p)).ln() / alpha
}

/// `ln(1 + exp(a))` without overflow.
#[inline]
pub(crate) fn softplus(a: f64) -> f64 {
    if a > 0.0 {
        a + (-a).exp().ln_1p()
    } else {
        a.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint_and_tails() {
        assert_eq!(sigmoid(0.0, DEFAULT_ALPHA), 0.5);
        assert!(sigmoid(1e3, DEFAULT_ALPHA) == 1.0);
        assert!(sigmoid(-1e3, DEFAULT_ALPHA) == 0.0);
        // sigma(32 * 0.05) = sigma(1.6)
        assert!((sigmoid(0.05, DEFAULT_ALPHA) - 0.832_018_385_133_6).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        for p in [0.02, 0.3, 0.5, 0.98] {
            let s = inverse_sigmoid(p, DEFAULT_ALPHA);
            assert!((sigmoid(s, DEFAULT_ALPHA) - p).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_monotone(s in -2.0f64..2.0, ds in 1e-6f64..0.5) {
            let a = DEFAULT_ALPHA;
            prop_assert!((sigmoid(s, a) + sigmoid(-s, a) - 1.0).abs() < 1e-15);
            let (lo, hi) = (sigmoid(s, a), sigmoid(s + ds, a));
            prop_assert!(hi >= lo);
            if (s.abs() < 0.5) && (s + ds).abs() < 0.5 {
                prop_assert!(hi > lo);
            }
        }

        #[test]
        fn softplus_matches_naive(a in -30.0f64..30.0) {
            prop_assert!((softplus(a) - (1.0 + a.exp()).ln()).abs() < 1e-12);
        }
    }
}
