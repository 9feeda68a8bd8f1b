//! Log-space helpers for stable power sums.

/// log(sum(exp(x))) over a cloneable iterator, without overflow; two passes
/// beat buffering at desk scale. Empty input yields -inf.
pub(crate) fn log_sum_exp_iter<I: Iterator<Item = f64> + Clone>(xs: I) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Relative closeness with an absolute floor, used by internal dual-route
/// checks: |a-b| <= rel*max(|a|,|b|) + abs_floor.
pub(crate) fn close(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs_floor
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum_in_safe_range() {
        let xs = [0.1f64, -0.3, 2.0];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp_iter(xs.iter().cloned()) - direct).abs() < 1e-14);
    }

    #[test]
    fn survives_large_magnitudes() {
        let v = log_sum_exp_iter([800.0f64, 801.0].into_iter());
        assert!((v - (801.0 + (1.0 + (-1.0f64).exp()).ln())).abs() < 1e-12);
        assert!(log_sum_exp_iter([-800.0f64, -801.0].into_iter()).is_finite());
    }
}
