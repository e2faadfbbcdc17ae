//! Tail probabilities used by the tests.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma::gamma_ur;

/// Upper tail of the chi-square distribution, `P(X > x)`.
pub fn chisq_sf(x: f64, df: u32) -> f64 {
    assert!(df > 0, "chi-square needs df >= 1");
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_ur(f64::from(df) / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Two-sided p-value of a Student t statistic.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chisq_edges() {
        assert_eq!(chisq_sf(0.0, 1), 1.0);
        assert_eq!(chisq_sf(0.0, 4), 1.0);
        assert_eq!(chisq_sf(f64::INFINITY, 2), 0.0);
        // df = 2 is exponential with mean 2
        for x in [0.1, 1.0, 7.5, 30.0] {
            assert!((chisq_sf(x, 2) - (-x / 2.0f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn t_symmetric() {
        assert!((t_two_sided(0.0, 10.0) - 1.0).abs() < 1e-12);
        assert_eq!(t_two_sided(2.0, 5.0), t_two_sided(-2.0, 5.0));
        // t(1) is Cauchy: P(|T| > 1) = 1/2
        assert!((t_two_sided(1.0, 1.0) - 0.5).abs() < 1e-12);
    }
}
