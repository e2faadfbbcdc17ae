use serde::Serialize;

use super::t_two_sided;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PearsonResult {
    pub r: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Sample correlation with a two-sided t-test on `n − 2` degrees of freedom.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<PearsonResult> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "vectors differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::UndefinedCorrelation(format!("need at least 3 pairs, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("a vector has zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = n - 2;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df as f64 / (1.0 - r * r)).sqrt();
        t_two_sided(t, df as f64)
    };
    Ok(PearsonResult { r, df, p_value })
}
