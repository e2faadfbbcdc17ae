//! Binomial mixed model with uncorrelated by-group random effects, fitted by
//! maximising the Laplace approximation of the marginal likelihood.
//!
//! Random effects are parameterised as `b = Λu` with `Λ = diag(θ)` and
//! `u ~ N(0, I)`, so the approximated log-likelihood is
//!
//! ```text
//! ℓ(y | β, û) − ½‖û‖² − ½ Σ_groups log det(I + Λ Zⱼᵀ W Zⱼ Λ)
//! ```
//!
//! evaluated at the conditional mode `û`. The search first profiles over `θ`
//! with a joint penalised IRLS for `(β, u)`, then refines `(θ, β)` together
//! on the exact Laplace objective, then polishes `β` with Newton steps.

use argmin::core::{CostFunction, Error as ArgminError, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector};

use super::dense::{cholesky, cholesky_logdet, cholesky_solve};
use super::formula::ModelSpec;
use super::frame::{ModelFrame, RandomDesign};
use super::logistic::{check_rank, fit_logistic, LogisticOptions};
use super::{logistic, softplus, FitResult, NamedVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GlmmOptions {
    /// Step tolerance for the inner Newton iterations.
    pub tolerance: f64,
    pub max_inner: usize,
    /// Nelder-Mead iterations for the variance-parameter search.
    pub max_outer: usize,
    /// Nelder-Mead iterations for the joint refinement of `(θ, β)`; 0 skips it.
    pub max_refine: usize,
    /// Holds the relative standard deviations `θ` fixed instead of estimating them.
    pub fixed_theta: Option<Vec<f64>>,
}

impl Default for GlmmOptions {
    fn default() -> Self {
        GlmmOptions {
            tolerance: 1e-8,
            max_inner: 100,
            max_outer: 200,
            max_refine: 2000,
            fixed_theta: None,
        }
    }
}

/// Fits `spec` on `frame`: plain logistic regression without a random part,
/// the mixed model otherwise.
pub fn fit_model(spec: &ModelSpec, frame: &ModelFrame, options: &GlmmOptions) -> Result<FitResult> {
    if spec.random.is_some() {
        return fit_glmm(spec, frame, options);
    }
    let (x, names) = frame.fixed_design(spec)?;
    let y = frame.response(spec)?;
    let mut fit = fit_logistic(
        &x,
        &y,
        &names,
        &LogisticOptions {
            tolerance: options.tolerance,
            max_iterations: options.max_inner,
        },
    )?;
    fit.formula = spec.to_string();
    Ok(fit)
}

pub fn fit_glmm(spec: &ModelSpec, frame: &ModelFrame, options: &GlmmOptions) -> Result<FitResult> {
    let re = frame
        .random_design(spec)?
        .ok_or_else(|| Error::Formula(format!("`{spec}` has no random-effects part")))?;
    let (x, names) = frame.fixed_design(spec)?;
    let y = frame.response(spec)?;
    let mut fit = fit_glmm_matrices(&x, &names, &y, &re, options)?;
    fit.formula = spec.to_string();
    Ok(fit)
}

struct Problem<'a> {
    n: usize,
    p: usize,
    q: usize,
    /// Row-major copy of the fixed-effects design.
    x: Vec<f64>,
    y: &'a [f64],
    z: &'a [f64],
    members: Vec<Vec<usize>>,
    tolerance: f64,
    max_inner: usize,
}

/// Per-iteration linear algebra of the joint `(β, u)` system.
struct Blocks {
    a: DMatrix<f64>,
    gb: DVector<f64>,
    /// Cholesky factors of `Dⱼ = I + ΛZⱼᵀWZⱼΛ`, `q×q` each.
    dchol: Vec<f64>,
    /// `Bⱼ = XⱼᵀWZⱼΛ`, `p×q` each.
    b: Vec<f64>,
    gu: Vec<f64>,
}

struct Joint {
    beta: Vec<f64>,
    u: Vec<f64>,
    value: f64,
    converged: bool,
    iterations: usize,
}

impl<'a> Problem<'a> {
    fn new(x: &DMatrix<f64>, y: &'a [f64], re: &'a RandomDesign, options: &GlmmOptions) -> Self {
        let (n, p) = x.shape();
        let mut xr = vec![0.0; n * p];
        for i in 0..n {
            for a in 0..p {
                xr[i * p + a] = x[(i, a)];
            }
        }
        let mut members = vec![Vec::new(); re.n_groups];
        for (i, &g) in re.codes.iter().enumerate() {
            members[g].push(i);
        }
        Problem {
            n,
            p,
            q: re.q,
            x: xr,
            y,
            z: &re.z,
            members,
            tolerance: options.tolerance,
            max_inner: options.max_inner,
        }
    }

    fn n_groups(&self) -> usize {
        self.members.len()
    }

    fn xb(&self, i: usize, beta: &[f64]) -> f64 {
        let row = &self.x[i * self.p..(i + 1) * self.p];
        row.iter().zip(beta).map(|(x, b)| x * b).sum()
    }

    fn zb(&self, i: usize, theta: &[f64], uj: &[f64]) -> f64 {
        let q = self.q;
        (0..q).map(|k| self.z[i * q + k] * theta[k] * uj[k]).sum()
    }

    fn eta(&self, theta: &[f64], beta: &[f64], u: &[f64]) -> Vec<f64> {
        let mut eta = vec![0.0; self.n];
        for (j, members) in self.members.iter().enumerate() {
            let uj = &u[j * self.q..(j + 1) * self.q];
            for &i in members {
                eta[i] = self.xb(i, beta) + self.zb(i, theta, uj);
            }
        }
        eta
    }

    fn penalized(&self, eta: &[f64], u: &[f64]) -> f64 {
        let ll: f64 = eta.iter().zip(self.y).map(|(&e, &y)| y * e - softplus(e)).sum();
        ll - 0.5 * u.iter().map(|v| v * v).sum::<f64>()
    }

    fn blocks(&self, theta: &[f64], eta: &[f64], u: &[f64]) -> Option<Blocks> {
        let (p, q, g) = (self.p, self.q, self.n_groups());
        let mut a = DMatrix::zeros(p, p);
        let mut gb = DVector::zeros(p);
        let mut dchol = vec![0.0; g * q * q];
        let mut b = vec![0.0; g * p * q];
        let mut gu = vec![0.0; g * q];
        let mut lz = vec![0.0; q];
        for (j, members) in self.members.iter().enumerate() {
            let d = &mut dchol[j * q * q..(j + 1) * q * q];
            let bj = &mut b[j * p * q..(j + 1) * p * q];
            let gj = &mut gu[j * q..(j + 1) * q];
            for k in 0..q {
                d[k * q + k] = 1.0;
                gj[k] = -u[j * q + k];
            }
            for &i in members {
                let mu = logistic(eta[i]);
                let w = mu * (1.0 - mu);
                let r = self.y[i] - mu;
                let xi = &self.x[i * p..(i + 1) * p];
                for k in 0..q {
                    lz[k] = theta[k] * self.z[i * q + k];
                }
                for ai in 0..p {
                    gb[ai] += xi[ai] * r;
                    for bi in 0..=ai {
                        a[(ai, bi)] += w * xi[ai] * xi[bi];
                    }
                    for k in 0..q {
                        bj[ai * q + k] += w * xi[ai] * lz[k];
                    }
                }
                for k in 0..q {
                    gj[k] += r * lz[k];
                    for l in 0..=k {
                        d[k * q + l] += w * lz[k] * lz[l];
                    }
                }
            }
            for k in 0..q {
                for l in 0..k {
                    d[l * q + k] = d[k * q + l];
                }
            }
            if !cholesky(d, q) {
                return None;
            }
        }
        for ai in 0..p {
            for bi in 0..ai {
                a[(bi, ai)] = a[(ai, bi)];
            }
        }
        Some(Blocks { a, gb, dchol, b, gu })
    }

    fn logdet_sum(&self, blocks: &Blocks) -> f64 {
        let q = self.q;
        (0..self.n_groups())
            .map(|j| cholesky_logdet(&blocks.dchol[j * q * q..(j + 1) * q * q], q))
            .sum()
    }

    /// Schur complement `S = A − Σ Bⱼ Dⱼ⁻¹ Bⱼᵀ` and the reduced right-hand side.
    fn schur(&self, blocks: &Blocks) -> (DMatrix<f64>, DVector<f64>) {
        let (p, q) = (self.p, self.q);
        let mut s = blocks.a.clone();
        let mut r = blocks.gb.clone();
        let mut cols = vec![0.0; p * q];
        let mut dg = vec![0.0; q];
        for j in 0..self.n_groups() {
            let l = &blocks.dchol[j * q * q..(j + 1) * q * q];
            let bj = &blocks.b[j * p * q..(j + 1) * p * q];
            for a in 0..p {
                let c = &mut cols[a * q..(a + 1) * q];
                c.copy_from_slice(&bj[a * q..(a + 1) * q]);
                cholesky_solve(l, q, c);
            }
            dg.copy_from_slice(&blocks.gu[j * q..(j + 1) * q]);
            cholesky_solve(l, q, &mut dg);
            for a in 0..p {
                let ba = &bj[a * q..(a + 1) * q];
                for b in 0..p {
                    let cb = &cols[b * q..(b + 1) * q];
                    s[(a, b)] -= ba.iter().zip(cb).map(|(x, y)| x * y).sum::<f64>();
                }
                r[a] -= ba.iter().zip(&dg).map(|(x, y)| x * y).sum::<f64>();
            }
        }
        (s, r)
    }

    /// Joint penalised IRLS over `(β, u)` at fixed `θ`.
    fn joint(&self, theta: &[f64], beta0: &[f64], u0: &[f64]) -> Joint {
        let (p, q) = (self.p, self.q);
        let mut beta = beta0.to_vec();
        let mut u = u0.to_vec();
        let mut eta = self.eta(theta, &beta, &u);
        let mut obj = self.penalized(&eta, &u);
        let mut converged = false;
        let mut iterations = 0;
        let mut last_step = f64::INFINITY;
        let mut blocks;
        loop {
            blocks = match self.blocks(theta, &eta, &u) {
                Some(b) => b,
                None => break,
            };
            if last_step < self.tolerance {
                converged = true;
                break;
            }
            if iterations >= self.max_inner {
                break;
            }
            iterations += 1;
            let (s, r) = self.schur(&blocks);
            let dbeta = if p > 0 {
                match s.cholesky() {
                    Some(c) => c.solve(&r),
                    None => break,
                }
            } else {
                DVector::zeros(0)
            };
            let mut du = vec![0.0; u.len()];
            for j in 0..self.n_groups() {
                let l = &blocks.dchol[j * q * q..(j + 1) * q * q];
                let bj = &blocks.b[j * p * q..(j + 1) * p * q];
                let dj = &mut du[j * q..(j + 1) * q];
                for k in 0..q {
                    dj[k] = blocks.gu[j * q + k]
                        - (0..p).map(|a| bj[a * q + k] * dbeta[a]).sum::<f64>();
                }
                cholesky_solve(l, q, dj);
            }
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let tb: Vec<f64> = beta.iter().zip(dbeta.iter()).map(|(b, d)| b + step * d).collect();
                let tu: Vec<f64> = u.iter().zip(&du).map(|(b, d)| b + step * d).collect();
                let te = self.eta(theta, &tb, &tu);
                let tobj = self.penalized(&te, &tu);
                if tobj >= obj - 1e-12 * obj.abs().max(1.0) {
                    beta = tb;
                    u = tu;
                    eta = te;
                    obj = tobj;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            last_step = dbeta
                .iter()
                .chain(du.iter())
                .fold(0.0f64, |m, d| m.max((step * d).abs()));
        }
        let value = match self.blocks(theta, &eta, &u) {
            Some(b) => obj - 0.5 * self.logdet_sum(&b),
            None => f64::NEG_INFINITY,
        };
        Joint {
            beta,
            u,
            value,
            converged,
            iterations,
        }
    }

    /// Laplace objective at `(θ, β)`; `u` holds the starting point and
    /// receives the conditional modes.
    fn laplace(&self, theta: &[f64], beta: &[f64], u: &mut [f64]) -> (f64, bool) {
        let q = self.q;
        let mut total = 0.0;
        let mut all_converged = true;
        let mut eta = vec![0.0; 0];
        let mut grad = vec![0.0; q];
        let mut h = vec![0.0; q * q];
        let mut lz = vec![0.0; q];
        for (j, members) in self.members.iter().enumerate() {
            let xb: Vec<f64> = members.iter().map(|&i| self.xb(i, beta)).collect();
            let group_obj = |uj: &[f64], eta: &mut Vec<f64>| -> f64 {
                eta.clear();
                let mut obj = 0.0;
                for (m, &i) in members.iter().enumerate() {
                    let e = xb[m] + self.zb(i, theta, uj);
                    eta.push(e);
                    obj += self.y[i] * e - softplus(e);
                }
                obj - 0.5 * uj.iter().map(|v| v * v).sum::<f64>()
            };
            let mut uj: Vec<f64> = u[j * q..(j + 1) * q].to_vec();
            let mut obj = group_obj(&uj, &mut eta);
            let mut last_step = f64::INFINITY;
            let mut iterations = 0;
            let mut converged = false;
            let logdet;
            loop {
                for k in 0..q {
                    grad[k] = -uj[k];
                    for l in 0..q {
                        h[k * q + l] = if k == l { 1.0 } else { 0.0 };
                    }
                }
                for (m, &i) in members.iter().enumerate() {
                    let mu = logistic(eta[m]);
                    let w = mu * (1.0 - mu);
                    let r = self.y[i] - mu;
                    for k in 0..q {
                        lz[k] = theta[k] * self.z[i * q + k];
                    }
                    for k in 0..q {
                        grad[k] += r * lz[k];
                        for l in 0..q {
                            h[k * q + l] += w * lz[k] * lz[l];
                        }
                    }
                }
                if !cholesky(&mut h, q) {
                    logdet = f64::INFINITY;
                    break;
                }
                if last_step < self.tolerance {
                    converged = true;
                    logdet = cholesky_logdet(&h, q);
                    break;
                }
                if iterations >= self.max_inner {
                    logdet = cholesky_logdet(&h, q);
                    break;
                }
                iterations += 1;
                let mut delta = grad.clone();
                cholesky_solve(&h, q, &mut delta);
                let mut step = 1.0;
                let mut accepted = false;
                for _ in 0..40 {
                    let trial: Vec<f64> = uj.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
                    let mut trial_eta = Vec::with_capacity(members.len());
                    let tobj = group_obj(&trial, &mut trial_eta);
                    if tobj >= obj - 1e-12 * obj.abs().max(1.0) {
                        uj = trial;
                        eta = trial_eta;
                        obj = tobj;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !accepted {
                    // Already at the mode to rounding precision.
                    last_step = 0.0;
                    continue;
                }
                last_step = delta.iter().fold(0.0f64, |m, d| m.max((step * d).abs()));
            }
            all_converged &= converged;
            u[j * q..(j + 1) * q].copy_from_slice(&uj);
            total += obj - 0.5 * logdet;
        }
        (total, all_converged)
    }
}

fn finite_or_huge(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        1e300
    }
}

struct ThetaCost<'a, 'b> {
    problem: &'b Problem<'a>,
    beta0: &'b [f64],
}

impl CostFunction for ThetaCost<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, theta: &Self::Param) -> std::result::Result<f64, ArgminError> {
        let u0 = vec![0.0; self.problem.n_groups() * self.problem.q];
        Ok(finite_or_huge(-self.problem.joint(theta, self.beta0, &u0).value))
    }
}

struct JointCost<'a, 'b> {
    problem: &'b Problem<'a>,
    u_start: &'b [f64],
}

impl CostFunction for JointCost<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, params: &Self::Param) -> std::result::Result<f64, ArgminError> {
        let q = self.problem.q;
        let mut u = self.u_start.to_vec();
        let (value, _) = self.problem.laplace(&params[..q], &params[q..], &mut u);
        Ok(finite_or_huge(-value))
    }
}

struct Search {
    best: Vec<f64>,
    cost: f64,
    converged: bool,
    iterations: usize,
}

fn nelder_mead<C>(cost: C, simplex: Vec<Vec<f64>>, max_iters: usize) -> Result<Search>
where
    C: CostFunction<Param = Vec<f64>, Output = f64>,
{
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-9)
        .map_err(|e| Error::Validation(e.to_string()))?;
    let result = Executor::new(cost, solver)
        .configure(|s| s.max_iters(max_iters as u64))
        .timer(false)
        .run()
        .map_err(|e| Error::Unconverged(format!("variance search failed: {e}")))?;
    let state = result.state();
    let converged = matches!(
        state.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::SolverConverged)
    );
    Ok(Search {
        best: state
            .get_best_param()
            .cloned()
            .ok_or_else(|| Error::Unconverged("variance search produced no estimate".into()))?,
        cost: state.get_best_cost(),
        converged,
        iterations: state.get_iter() as usize,
    })
}

fn simplex_around(start: &[f64], steps: &[f64]) -> Vec<Vec<f64>> {
    let mut simplex = vec![start.to_vec()];
    for (k, &h) in steps.iter().enumerate() {
        let mut v = start.to_vec();
        v[k] += h;
        simplex.push(v);
    }
    simplex
}

/// Mixed-model fit on explicit matrices. `names` labels the columns of `x`.
pub fn fit_glmm_matrices(
    x: &DMatrix<f64>,
    names: &[String],
    y: &[f64],
    re: &RandomDesign,
    options: &GlmmOptions,
) -> Result<FitResult> {
    let (n, p) = x.shape();
    if y.len() != n || names.len() != p || re.codes.len() != n || re.z.len() != n * re.q {
        return Err(Error::Validation("design, response and grouping disagree in size".into()));
    }
    if re.n_groups < 2 {
        return Err(Error::Validation(format!(
            "grouping factor needs at least 2 levels, found {}",
            re.n_groups
        )));
    }
    if p > 0 {
        check_rank(x)?;
    }
    let q = re.q;
    if let Some(fixed) = &options.fixed_theta {
        if fixed.len() != q {
            return Err(Error::Validation(format!(
                "expected {q} fixed variance parameters, got {}",
                fixed.len()
            )));
        }
    }
    let problem = Problem::new(x, y, re, options);
    let beta_glm: Vec<f64> = if p > 0 {
        let glm = fit_logistic(
            x,
            y,
            names,
            &LogisticOptions {
                tolerance: options.tolerance,
                max_iterations: options.max_inner,
            },
        )?;
        glm.coefficients
            .values
            .iter()
            .map(|b| b.clamp(-20.0, 20.0))
            .collect()
    } else {
        Vec::new()
    };
    let u0 = vec![0.0; re.n_groups * q];

    let mut converged = true;
    let mut iterations = 0;
    let theta_hat = match &options.fixed_theta {
        Some(fixed) => fixed.clone(),
        None => {
            let start = vec![0.5; q];
            let search = nelder_mead(
                ThetaCost {
                    problem: &problem,
                    beta0: &beta_glm,
                },
                simplex_around(&start, &vec![0.5; q]),
                options.max_outer,
            )?;
            converged &= search.converged;
            iterations += search.iterations;
            search.best
        }
    };
    let stage1 = problem.joint(&theta_hat, &beta_glm, &u0);
    converged &= stage1.converged;
    iterations += stage1.iterations;

    let mut theta = theta_hat;
    let mut beta = stage1.beta.clone();
    let mut u = stage1.u.clone();
    let degenerate = theta.iter().all(|&t| t == 0.0);

    if !degenerate {
        if options.fixed_theta.is_none() && options.max_refine > 0 {
            let se0 = schur_standard_errors(&problem, &theta, &beta, &u);
            let mut start = theta.clone();
            start.extend_from_slice(&beta);
            let mut steps: Vec<f64> = theta.iter().map(|t| 0.1 * t.abs().max(0.1)).collect();
            steps.extend(se0.iter().map(|s| if s.is_finite() && *s > 0.0 { 0.5 * s } else { 0.05 }));
            let stage1_cost = {
                let mut uu = u.clone();
                -problem.laplace(&theta, &beta, &mut uu).0
            };
            let search = nelder_mead(
                JointCost {
                    problem: &problem,
                    u_start: &stage1.u,
                },
                simplex_around(&start, &steps),
                options.max_refine,
            )?;
            converged &= search.converged;
            iterations += search.iterations;
            if search.cost < stage1_cost {
                theta = search.best[..q].to_vec();
                beta = search.best[q..].to_vec();
            }
        }
        polish_beta(&problem, &theta, &mut beta, &mut u);
    }

    let (log_likelihood, inner_ok) = problem.laplace(&theta, &beta, &mut u);
    converged &= inner_ok && log_likelihood.is_finite();
    let se = schur_standard_errors(&problem, &theta, &beta, &u);
    let z: Vec<f64> = beta.iter().zip(&se).map(|(b, s)| b / s).collect();
    let names = names.to_vec();
    Ok(FitResult {
        formula: String::new(),
        coefficients: NamedVector::new(names.clone(), beta.clone()),
        standard_errors: NamedVector::new(names.clone(), se),
        z_values: NamedVector::new(names, z),
        log_likelihood,
        variance_components: NamedVector::new(
            re.names.clone(),
            theta.iter().map(|t| t * t).collect(),
        ),
        converged,
        separation: false,
        n_used: n,
        iterations,
    })
}

fn schur_matrix(problem: &Problem<'_>, theta: &[f64], beta: &[f64], u: &[f64]) -> Option<DMatrix<f64>> {
    let eta = problem.eta(theta, beta, u);
    let blocks = problem.blocks(theta, &eta, u)?;
    Some(problem.schur(&blocks).0)
}

fn schur_standard_errors(problem: &Problem<'_>, theta: &[f64], beta: &[f64], u: &[f64]) -> Vec<f64> {
    let p = problem.p;
    match schur_matrix(problem, theta, beta, u).and_then(|s| s.try_inverse()) {
        Some(inv) => (0..p).map(|i| inv[(i, i)].max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; p],
    }
}

/// Newton steps on `β` at fixed `θ` using a central-difference gradient of
/// the Laplace objective and the Schur complement as curvature.
fn polish_beta(problem: &Problem<'_>, theta: &[f64], beta: &mut Vec<f64>, u: &mut Vec<f64>) {
    let p = problem.p;
    if p == 0 {
        return;
    }
    let (mut current, _) = problem.laplace(theta, beta, u);
    for _ in 0..5 {
        let h = 1e-5;
        let mut grad = DVector::zeros(p);
        for k in 0..p {
            let mut up = beta.clone();
            up[k] += h;
            let mut dn = beta.clone();
            dn[k] -= h;
            let mut uu = u.clone();
            let fu = problem.laplace(theta, &up, &mut uu).0;
            let mut ud = u.clone();
            let fd = problem.laplace(theta, &dn, &mut ud).0;
            grad[k] = (fu - fd) / (2.0 * h);
        }
        let Some(s) = schur_matrix(problem, theta, beta, u) else {
            return;
        };
        let Some(chol) = s.cholesky() else {
            return;
        };
        let step = chol.solve(&grad);
        if step.amax() < 1e-10 {
            return;
        }
        let trial: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, d)| b + d).collect();
        let mut trial_u = u.clone();
        let (value, _) = problem.laplace(theta, &trial, &mut trial_u);
        if value > current {
            *beta = trial;
            *u = trial_u;
            current = value;
        } else {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simulate(groups: usize, per: usize, sd: f64, seed: u64) -> (DMatrix<f64>, Vec<f64>, RandomDesign) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = groups * per;
        let mut x = DMatrix::zeros(n, 2);
        let mut y = Vec::with_capacity(n);
        let mut codes = Vec::with_capacity(n);
        for g in 0..groups {
            let b: f64 = sd * standard_normal(&mut rng);
            for k in 0..per {
                let i = g * per + k;
                let xi = if k % 2 == 0 { 0.5 } else { -0.5 };
                x[(i, 0)] = 1.0;
                x[(i, 1)] = xi;
                let eta = 0.3 + 1.0 * xi + b;
                let prob = 1.0 / (1.0 + (-eta).exp());
                y.push(f64::from(u8::from(rng.random::<f64>() < prob)));
                codes.push(g);
            }
        }
        let re = RandomDesign {
            names: vec!["g:(Intercept)".into()],
            q: 1,
            z: vec![1.0; n],
            codes,
            n_groups: groups,
        };
        (x, y, re)
    }

    fn standard_normal(rng: &mut impl Rng) -> f64 {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn names() -> Vec<String> {
        vec!["(Intercept)".into(), "x".into()]
    }

    #[test]
    fn zero_variance_reproduces_logistic() {
        let (x, y, re) = simulate(10, 40, 0.7, 5);
        let glm = fit_logistic(&x, &y, &names(), &LogisticOptions::default()).unwrap();
        let opts = GlmmOptions {
            fixed_theta: Some(vec![0.0]),
            ..GlmmOptions::default()
        };
        let mixed = fit_glmm_matrices(&x, &names(), &y, &re, &opts).unwrap();
        for (a, b) in glm.coefficients.values.iter().zip(&mixed.coefficients.values) {
            assert!((a - b).abs() < 1e-6);
        }
        for (a, b) in glm.standard_errors.values.iter().zip(&mixed.standard_errors.values) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!((glm.log_likelihood - mixed.log_likelihood).abs() < 1e-8);
    }

    #[test]
    fn joint_and_groupwise_laplace_agree() {
        // The joint and per-group evaluations must agree at the joint optimum.
        let (x, y, re) = simulate(6, 30, 0.8, 9);
        let opts = GlmmOptions::default();
        let problem = Problem::new(&x, &y, &re, &opts);
        let theta = [0.6];
        let joint = problem.joint(&theta, &[0.0, 0.0], &vec![0.0; 6]);
        let mut u = vec![0.0; 6];
        let (value, ok) = problem.laplace(&theta, &joint.beta, &mut u);
        assert!(ok && joint.converged);
        assert!((value - joint.value).abs() < 1e-8, "{value} vs {}", joint.value);
    }

    #[test]
    fn recovers_group_spread() {
        let (x, y, re) = simulate(30, 60, 1.0, 21);
        let fit = fit_glmm_matrices(&x, &names(), &y, &re, &GlmmOptions::default()).unwrap();
        assert!(fit.converged);
        let var = fit.variance_components.values[0];
        assert!(var > 0.3 && var < 2.5, "variance {var}");
        let glm = fit_logistic(&x, &y, &names(), &LogisticOptions::default()).unwrap();
        assert!(fit.log_likelihood > glm.log_likelihood);
    }

    #[test]
    fn single_group_rejected() {
        let (x, y, mut re) = simulate(2, 10, 0.5, 1);
        re.codes.iter_mut().for_each(|c| *c = 0);
        re.n_groups = 1;
        assert!(matches!(
            fit_glmm_matrices(&x, &names(), &y, &re, &GlmmOptions::default()),
            Err(Error::Validation(_))
        ));
    }
}
