//! Damped least squares (Levenberg-Marquardt) and the logistic regression of
//! stability on graph structure built on it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ensemble::SystemRecord;
use crate::error::{Error, Result};

pub trait LeastSquaresProblem {
    fn residuals(&self, params: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, params: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmOptions {
    pub initial_damping: f64,
    /// Damping is multiplied by this on rejection and divided on acceptance.
    pub damping_factor: f64,
    pub relative_tolerance: f64,
    pub step_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_factor: 10.0,
            relative_tolerance: 1e-10,
            step_tolerance: 1e-12,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub params: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual norm after each accepted step, starting with the initial one.
    pub accepted_norms: Vec<f64>,
}

/// Minimises `||r(p)||^2` with Marquardt-scaled damping: each trial step
/// solves `(JᵀJ + μ diag(JᵀJ)) δ = -Jᵀr`.
pub fn levenberg_marquardt<P: LeastSquaresProblem>(
    problem: &P,
    initial: DVector<f64>,
    opts: &LmOptions,
) -> LmReport {
    let mut params = initial;
    let mut residuals = problem.residuals(&params);
    let mut norm = residuals.norm();
    let mut damping = opts.initial_damping;
    let mut accepted_norms = vec![norm];
    let mut converged = norm == 0.0;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jac = problem.jacobian(&params);
        let jtj = jac.transpose() * &jac;
        let gradient = jac.transpose() * &residuals;
        let mut lhs = jtj.clone();
        for d in 0..lhs.nrows() {
            lhs[(d, d)] += damping * jtj[(d, d)].max(1e-12);
        }
        let Some(step) = lhs.cholesky().map(|c| c.solve(&(-&gradient))) else {
            damping *= opts.damping_factor;
            continue;
        };
        let step_norm = step.norm();
        let trial = &params + &step;
        let trial_residuals = problem.residuals(&trial);
        let trial_norm = trial_residuals.norm();

        if trial_norm.is_finite() && trial_norm < norm {
            let relative_change = (norm - trial_norm) / norm;
            params = trial;
            residuals = trial_residuals;
            norm = trial_norm;
            accepted_norms.push(norm);
            damping /= opts.damping_factor;
            if relative_change < opts.relative_tolerance || norm == 0.0 {
                converged = true;
            }
        } else {
            damping *= opts.damping_factor;
        }
        if step_norm < opts.step_tolerance * (1.0 + params.norm()) {
            converged = true;
        }
    }

    LmReport {
        params,
        residual_norm: norm,
        iterations,
        converged,
        accepted_norms,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub intercept: f64,
    pub coef_preferential: f64,
    pub coef_path_length: f64,
    pub coef_clustering: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct LogisticProblem<'a> {
    /// Rows are `[1, x1, x2, x3]`.
    design: &'a DMatrix<f64>,
    target: &'a DVector<f64>,
}

impl LeastSquaresProblem for LogisticProblem<'_> {
    fn residuals(&self, params: &DVector<f64>) -> DVector<f64> {
        (self.design * params).map(sigmoid) - self.target
    }

    fn jacobian(&self, params: &DVector<f64>) -> DMatrix<f64> {
        let fitted = (self.design * params).map(sigmoid);
        let mut jac = self.design.clone();
        for (mut row, s) in jac.row_iter_mut().zip(fitted.iter()) {
            row *= s * (1.0 - s);
        }
        jac
    }
}

const PREDICTOR_NAMES: [&str; 3] = ["degree_stddev", "mean_path_length", "mean_local_clustering"];

fn check_rank(design: &DMatrix<f64>) -> Result<()> {
    for (c, name) in PREDICTOR_NAMES.iter().enumerate() {
        let col = design.column(c + 1);
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            return Err(Error::RankDeficient(format!(
                "{name} is constant ({first})"
            )));
        }
    }
    let sv = design.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min.is_nan() || min <= 1e-10 * max {
        return Err(Error::RankDeficient(format!(
            "predictors are collinear (singular values {min:e} / {max:e})"
        )));
    }
    Ok(())
}

/// Fits `y ≈ σ(β₀ + β₁ x₁ + β₂ x₂ + β₃ x₃)` by damped least squares.
///
/// Without `initial`, the start is the ordinary least-squares fit of
/// `logit(y)` (with `y` clamped into the open unit interval).
pub fn fit_logistic(
    predictors: &[[f64; 3]],
    targets: &[f64],
    initial: Option<[f64; 4]>,
    opts: &LmOptions,
) -> Result<LogisticFit> {
    if predictors.len() != targets.len() {
        return Err(Error::InvalidParameter(
            "predictor/target length mismatch".into(),
        ));
    }
    if predictors.len() < 50 {
        return Err(Error::InvalidParameter(format!(
            "logistic fit needs at least 50 observations, got {}",
            predictors.len()
        )));
    }
    if predictors
        .iter()
        .flatten()
        .chain(targets)
        .any(|v| !v.is_finite())
    {
        return Err(Error::InvalidParameter(
            "non-finite predictor or target".into(),
        ));
    }
    let rows = predictors.len();
    let design = DMatrix::from_fn(
        rows,
        4,
        |r, c| if c == 0 { 1.0 } else { predictors[r][c - 1] },
    );
    let target = DVector::from_column_slice(targets);
    check_rank(&design)?;

    let start = match initial {
        Some(p) => DVector::from_column_slice(&p),
        None => {
            let logit = target.map(|y| {
                let y = y.clamp(1e-12, 1.0 - 1e-12);
                (y / (1.0 - y)).ln()
            });
            design
                .clone()
                .svd(true, true)
                .solve(&logit, 1e-14)
                .unwrap_or_else(|_| DVector::zeros(4))
        }
    };
    let problem = LogisticProblem {
        design: &design,
        target: &target,
    };
    let report = levenberg_marquardt(&problem, start, opts);
    let p = &report.params;
    Ok(LogisticFit {
        intercept: p[0],
        coef_preferential: p[1],
        coef_path_length: p[2],
        coef_clustering: p[3],
        residual_norm: report.residual_norm,
        iterations: report.iterations,
        converged: report.converged,
    })
}

/// Logistic regression of stability on (degree stddev, mean path length,
/// mean local clustering).
pub fn logistic_fit(records: &[&SystemRecord]) -> Result<LogisticFit> {
    let predictors: Vec<[f64; 3]> = records
        .iter()
        .map(|r| [r.degree_stddev, r.mean_path_length, r.mean_local_clustering])
        .collect();
    let targets: Vec<f64> = records.iter().map(|r| r.stability).collect();
    fit_logistic(&predictors, &targets, None, &LmOptions::default())
}
