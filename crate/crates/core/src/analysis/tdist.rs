//! Student's t distribution: upper tail and its inverse.

use super::special::incomplete_beta;
use super::AnalysisError;

/// Bisection stops once the bracket is narrower than this.
const T_TOLERANCE: f64 = 1e-10;

/// `P(T > t)` for Student's t with `df` degrees of freedom.
pub fn upper_tail(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    let tail = 0.5 * incomplete_beta(x, 0.5 * df, 0.5);
    if t >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Critical value `t0` with `P(T > t0) = p` (one-tailed).
pub fn t_critical(df: u64, one_tailed_p: f64) -> Result<f64, AnalysisError> {
    if df == 0 {
        return Err(AnalysisError::InvalidDegreesOfFreedom(df));
    }
    if !(one_tailed_p > 0.0 && one_tailed_p < 0.5) {
        return Err(AnalysisError::InvalidProbability(one_tailed_p));
    }
    let df = df as f64;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while upper_tail(hi, df) > one_tailed_p {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(AnalysisError::InvalidProbability(one_tailed_p));
        }
    }
    while hi - lo > T_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if upper_tail(mid, df) > one_tailed_p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
