//! Likelihood-ratio tests between nested fits.

use serde::Serialize;

use super::{chisq_sf, FitResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrtResult {
    pub chi_square: f64,
    pub df: u32,
    pub p_value: f64,
    /// Sign of the first dropped coefficient in the full model; 0 when no
    /// fixed effect was dropped.
    pub direction_of_effect: i8,
}

/// Tolerated negative likelihood gain before refusing, in log-likelihood units.
const NEGATIVE_SLACK: f64 = 1e-3;

pub fn lrt(full: &FitResult, reduced: &FitResult) -> Result<LrtResult> {
    for (label, fit) in [("full", full), ("reduced", reduced)] {
        if !fit.converged {
            return Err(Error::Unconverged(format!(
                "{label} model `{}` did not converge{}",
                fit.formula,
                if fit.separation { " (separation)" } else { "" }
            )));
        }
    }
    if full.n_used != reduced.n_used {
        return Err(Error::NotNested(format!(
            "fits use {} and {} observations",
            full.n_used, reduced.n_used
        )));
    }
    for name in &reduced.coefficients.names {
        if full.coefficients.get(name).is_none() {
            return Err(Error::NotNested(format!("`{name}` is missing from the full model")));
        }
    }
    for name in &reduced.variance_components.names {
        if full.variance_components.get(name).is_none() {
            return Err(Error::NotNested(format!(
                "variance component `{name}` is missing from the full model"
            )));
        }
    }
    let df = full.n_params() - reduced.n_params();
    let gain = full.log_likelihood - reduced.log_likelihood;
    if gain < -NEGATIVE_SLACK {
        tracing::warn!(gain, "full model fits worse than the reduced model");
    }
    let chi_square = if df == 0 { 0.0 } else { (2.0 * gain).max(0.0) };
    let p_value = if df == 0 { 1.0 } else { chisq_sf(chi_square, df as u32) };
    let direction_of_effect = full
        .coefficients
        .iter()
        .find(|(name, _)| reduced.coefficients.get(name).is_none())
        .map(|(_, beta)| if beta > 0.0 { 1 } else if beta < 0.0 { -1 } else { 0 })
        .unwrap_or(0);
    Ok(LrtResult {
        chi_square,
        df: df as u32,
        p_value,
        direction_of_effect,
    })
}
