//! Convergence sweeps and log-log rate fits.

use log::info;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::problems::{setup_problem, Problem};
use super::reference::{reference_solution, Reference};
use crate::collocation::solve_problem;
use crate::error::{Error, Result};
use std::path::Path;

/// Errors at or below this level are treated as rounding noise in rate fits.
pub const ERROR_FLOOR: f64 = 1e-12;

/// One solve of a sweep. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub problem: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// `M / N`, rounded down.
    #[serde(rename = "J")]
    pub j: usize,
    pub s: f64,
    pub error: f64,
    pub tail_bound: f64,
    pub assemble_ms: f64,
    pub solve_ms: f64,
}

/// Solves at `(N, M)` and measures the error against the reference.
pub fn solve_record(
    config: &ExperimentConfig,
    problem: &Problem,
    reference: &Reference,
    n: usize,
    m: usize,
) -> Result<ConvergenceRecord> {
    let sol = solve_problem(&problem.discrete(n, config.degree, m, config.quad)?)?;
    let err = reference.error_of(&sol.u, config.error_order_s)?;
    info!("{} N={n} M={m}: error {:.3e}", config.problem, err.value);
    Ok(ConvergenceRecord {
        problem: config.problem.name().to_string(),
        n,
        m,
        j: m / n,
        s: config.error_order_s,
        error: err.value,
        tail_bound: err.tail_bound,
        assemble_ms: sol.assemble_ms,
        solve_ms: sol.solve_ms,
    })
}

/// Sweep over `N_list` with `M` from the oversampling rule.
pub fn run_convergence(config: &ExperimentConfig, cache: Option<&Path>) -> Result<Vec<ConvergenceRecord>> {
    let reference = reference_solution(config, cache)?;
    run_convergence_with(config, &reference)
}

/// [`run_convergence`] against an already computed reference.
pub fn run_convergence_with(config: &ExperimentConfig, reference: &Reference) -> Result<Vec<ConvergenceRecord>> {
    config.validate()?;
    let problem = setup_problem(config)?;
    let records = config
        .n_list
        .iter()
        .map(|&n| solve_record(config, &problem, reference, n, config.oversampling.points(n)))
        .collect::<Result<Vec<_>>>()?;
    check_reference(reference, &records)?;
    Ok(records)
}

/// Sweep over `M = J N_fixed` for `J` in `J_list`.
pub fn run_j_sweep(config: &ExperimentConfig, cache: Option<&Path>) -> Result<Vec<ConvergenceRecord>> {
    let reference = reference_solution(config, cache)?;
    run_j_sweep_with(config, &reference)
}

/// [`run_j_sweep`] against an already computed reference.
pub fn run_j_sweep_with(config: &ExperimentConfig, reference: &Reference) -> Result<Vec<ConvergenceRecord>> {
    config.validate()?;
    let problem = setup_problem(config)?;
    let n = config.n_fixed;
    let records = config
        .j_list
        .iter()
        .map(|&j| solve_record(config, &problem, reference, n, j * n))
        .collect::<Result<Vec<_>>>()?;
    check_reference(reference, &records)?;
    Ok(records)
}

fn check_reference(reference: &Reference, records: &[ConvergenceRecord]) -> Result<()> {
    let smallest = records.iter().map(|r| r.error).filter(|&e| e > ERROR_FLOOR).fold(f64::INFINITY, f64::min);
    if smallest.is_finite() {
        reference.check_against(smallest)?;
    }
    Ok(())
}

/// Least-squares line through `(log x, log error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for an exact fit).
    pub slope_stderr: f64,
    /// Indices of the points used.
    pub used: Vec<usize>,
    /// Indices excluded by the floor or the window.
    pub excluded: Vec<usize>,
}

/// Which record column is the abscissa of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateAxis {
    N,
    M,
    J,
}

impl RateAxis {
    pub fn of(self, r: &ConvergenceRecord) -> f64 {
        match self {
            RateAxis::N => r.n as f64,
            RateAxis::M => r.m as f64,
            RateAxis::J => r.m as f64 / r.n as f64,
        }
    }
}

/// Restricts a fit to an abscissa range and to errors above a floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub min_x: f64,
    pub max_x: f64,
    pub floor: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { min_x: 0.0, max_x: f64::INFINITY, floor: ERROR_FLOOR }
    }
}

/// Fits `log e = slope · log x + intercept` over the points inside the window.
pub fn fit_rate(xs: &[f64], errors: &[f64], window: &FitWindow) -> Result<RateFit> {
    if xs.len() != errors.len() {
        return Err(Error::LengthMismatch { left: xs.len(), right: errors.len() });
    }
    let (used, excluded): (Vec<usize>, Vec<usize>) = (0..xs.len()).partition(|&i| {
        xs[i] > 0.0 && xs[i] >= window.min_x && xs[i] <= window.max_x && errors[i] > window.floor && errors[i].is_finite()
    });
    if used.len() < 3 {
        return Err(Error::TooFewPoints(used.len()));
    }
    let k = used.len() as f64;
    let lx: Vec<f64> = used.iter().map(|&i| xs[i].ln()).collect();
    let ly: Vec<f64> = used.iter().map(|&i| errors[i].ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("rate fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = (rss / (k - 2.0) / sxx).sqrt();
    Ok(RateFit { slope, intercept, slope_stderr, used, excluded })
}

/// [`fit_rate`] on a record column.
pub fn fit_records(records: &[ConvergenceRecord], axis: RateAxis, window: &FitWindow) -> Result<RateFit> {
    let xs: Vec<f64> = records.iter().map(|r| axis.of(r)).collect();
    let es: Vec<f64> = records.iter().map(|r| r.error).collect();
    fit_rate(&xs, &es, window)
}

/// Errors above the floor never grow by more than `tol` (relative) from one record to the next.
pub fn is_monotone(records: &[ConvergenceRecord], floor: f64, tol: f64) -> bool {
    let live: Vec<f64> = records.iter().map(|r| r.error).filter(|&e| e > floor).collect();
    live.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol))
}
