//! Fixed-effects logistic regression by iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector};

use super::{logistic, softplus, FitResult, NamedVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticOptions {
    /// Stop once every coefficient moves by less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        LogisticOptions {
            tolerance: 1e-8,
            max_iterations: 100,
        }
    }
}

/// Linear predictors beyond this magnitude mean fitted probabilities are 0 or
/// 1 to machine precision, i.e. the data are (quasi-)separated.
const SEPARATION_ETA: f64 = 30.0;

pub fn log_likelihood(eta: &DVector<f64>, y: &[f64]) -> f64 {
    eta.iter().zip(y).map(|(&e, &yi)| yi * e - softplus(e)).sum()
}

/// Numerical rank of `x` from its singular values.
pub(crate) fn numerical_rank(x: &DMatrix<f64>) -> usize {
    if x.ncols() == 0 {
        return 0;
    }
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.max();
    let tol = max * f64::EPSILON * x.nrows().max(x.ncols()) as f64;
    sv.iter().filter(|&&s| s > tol).count()
}

pub(crate) fn check_rank(x: &DMatrix<f64>) -> Result<()> {
    let p = x.ncols();
    if x.nrows() < p {
        return Err(Error::Rank {
            rank: x.nrows(),
            columns: p,
        });
    }
    let rank = numerical_rank(x);
    if rank < p {
        return Err(Error::Rank { rank, columns: p });
    }
    Ok(())
}

/// `Xᵀ W X` and `Xᵀ (y − μ)` at `eta`.
pub(crate) fn score_and_information(
    x: &DMatrix<f64>,
    y: &[f64],
    eta: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let p = x.ncols();
    let mut score = DVector::zeros(p);
    let mut info = DMatrix::zeros(p, p);
    for i in 0..x.nrows() {
        let mu = logistic(eta[i]);
        let w = mu * (1.0 - mu);
        let r = y[i] - mu;
        for a in 0..p {
            let xa = x[(i, a)];
            score[a] += xa * r;
            for b in 0..=a {
                info[(a, b)] += w * xa * x[(i, b)];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    (score, info)
}

pub fn fit_logistic(
    x: &DMatrix<f64>,
    y: &[f64],
    names: &[String],
    options: &LogisticOptions,
) -> Result<FitResult> {
    fit_logistic_traced(x, y, names, options).map(|(fit, _)| fit)
}

/// Like [`fit_logistic`] but also returns the log-likelihood after every
/// accepted iteration.
pub fn fit_logistic_traced(
    x: &DMatrix<f64>,
    y: &[f64],
    names: &[String],
    options: &LogisticOptions,
) -> Result<(FitResult, Vec<f64>)> {
    let (n, p) = x.shape();
    if y.len() != n || names.len() != p {
        return Err(Error::Validation("design, response and names disagree in size".into()));
    }
    if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Validation("response must lie in [0, 1]".into()));
    }
    check_rank(x)?;

    let mut beta = DVector::zeros(p);
    let mut eta = x * &beta;
    let mut ll = log_likelihood(&eta, y);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let (score, info) = score_and_information(x, y, &eta);
        let Some(chol) = info.cholesky() else {
            stalled = true;
            break;
        };
        let delta = chol.solve(&score);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &beta + &delta * step;
            let trial_eta = x * &trial;
            let trial_ll = log_likelihood(&trial_eta, y);
            if trial_ll >= ll - 1e-12 * ll.abs().max(1.0) {
                accepted = Some((trial, trial_eta, trial_ll));
                break;
            }
            step *= 0.5;
        }
        let Some((new_beta, new_eta, new_ll)) = accepted else {
            stalled = true;
            break;
        };
        let change = (&new_beta - &beta).amax();
        beta = new_beta;
        eta = new_eta;
        ll = new_ll;
        trace.push(ll);
        if change < options.tolerance {
            converged = true;
            break;
        }
    }

    let separation = eta.iter().any(|e| e.abs() > SEPARATION_ETA);
    if stalled && !separation {
        tracing::warn!("logistic fit stalled before convergence");
    }
    let converged = converged && !separation;

    let (_, info) = score_and_information(x, y, &eta);
    let se: Vec<f64> = match info.clone().try_inverse() {
        Some(inv) if !separation => (0..p).map(|i| inv[(i, i)].max(0.0).sqrt()).collect(),
        _ => vec![f64::NAN; p],
    };
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let z: Vec<f64> = coefficients.iter().zip(&se).map(|(b, s)| b / s).collect();
    let names = names.to_vec();
    Ok((
        FitResult {
            formula: String::new(),
            coefficients: NamedVector::new(names.clone(), coefficients),
            standard_errors: NamedVector::new(names.clone(), se),
            z_values: NamedVector::new(names, z),
            log_likelihood: ll,
            variance_components: NamedVector::default(),
            converged,
            separation,
            n_used: n,
            iterations,
        },
        trace,
    ))
}
