//! Reference densities: the exact circle density or a cached fine solve.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use super::config::{ExperimentConfig, ReferenceSpec};
use super::problems::{setup_problem, Problem};
use crate::collocation::solve_problem;
use crate::error::{Error, Result};
use crate::fourier::{default_norm_bound, project_pn, spline_error_norm, spline_series_error_norm, FourierVector, NormEstimate};
use crate::splines::{SplineFunction, SplineRecord};

/// A reference density with an estimate of its own error in the sweep norm.
#[derive(Debug, Clone)]
pub struct Reference {
    pub spline: SplineFunction<f64>,
    /// Exact series, when known; errors are then measured against it directly.
    pub exact: Option<FourierVector<f64>>,
    pub error_estimate: f64,
    /// `true` when every solve was served from the cache.
    pub from_cache: bool,
}

impl Reference {
    /// `‖u - u_ref‖_s`.
    pub fn error_of(&self, u: &SplineFunction<f64>, s: f64) -> Result<NormEstimate<f64>> {
        let bound = default_norm_bound(&[u.space.n(), self.spline.space.n()]);
        match &self.exact {
            Some(g) => spline_series_error_norm(u, g, s, bound.max(g.bound())),
            None => spline_error_norm(u, &self.spline, s, bound),
        }
    }

    /// Fails when the estimate is not below 1% of the smallest measured error.
    pub fn check_against(&self, smallest: f64) -> Result<()> {
        if self.error_estimate > 0.01 * smallest {
            return Err(Error::InsufficientReference { estimate: self.error_estimate, smallest });
        }
        Ok(())
    }
}

/// Builds (or loads) the reference for a configuration.
///
/// A fine reference is solved at `(N_ref, J_ref N_ref)` and `(N_ref/2, J_ref N_ref/2)`
/// with degree `ref_degree`; the error estimate is their distance divided by
/// `2^{d+1-2α} - 1`. Solves are cached in `cache` when given.
pub fn reference_solution(config: &ExperimentConfig, cache: Option<&Path>) -> Result<Reference> {
    let problem = setup_problem(config)?;
    match config.reference {
        ReferenceSpec::ExactCircle { n_ref } => {
            let exact = problem
                .exact
                .clone()
                .ok_or_else(|| Error::InvalidArgument("exact reference needs a problem with a closed-form density".into()))?;
            // The data is band-limited, so padding with zeros is exact.
            let padded = exact.with_bound(exact.bound().max(n_ref / 2));
            let spline = project_pn(&padded, n_ref, config.ref_degree)?.to_spline();
            Ok(Reference { spline, exact: Some(exact), error_estimate: 0.0, from_cache: false })
        }
        ReferenceSpec::FineCollocation { n_ref, j_ref } => {
            let (fine, hit_fine) = cached_solve(config, &problem, n_ref, j_ref * n_ref, cache)?;
            let (coarse, hit_coarse) = cached_solve(config, &problem, n_ref / 2, j_ref * (n_ref / 2), cache)?;
            let rate = config.ref_degree as f64 + 1.0 - 2.0 * config.alpha();
            let diff = spline_error_norm(&fine, &coarse, config.error_order_s, default_norm_bound(&[n_ref]))?;
            let error_estimate = diff.value / (2f64.powf(rate) - 1.0);
            info!("reference {} N_ref={n_ref}: estimated error {error_estimate:.3e}", config.problem);
            Ok(Reference { spline: fine, exact: problem.exact.clone(), error_estimate, from_cache: hit_fine && hit_coarse })
        }
    }
}

/// Cache file for one fine solve. The name encodes everything the solution depends on.
pub fn cache_path(dir: &Path, config: &ExperimentConfig, n: usize, m: usize) -> PathBuf {
    let q = &config.quad;
    let radius = if config.problem == super::config::ProblemKind::CircleDirichlet {
        format!("_r{}", config.radius)
    } else {
        String::new()
    };
    dir.join(format!(
        "{}{radius}_d{}_N{n}_M{m}_g{}_p{}_t{:e}_k{}.json",
        config.problem, config.ref_degree, q.gauss_order, q.min_panels, q.tol, q.k_op
    ))
}

fn cached_solve(
    config: &ExperimentConfig,
    problem: &Problem,
    n: usize,
    m: usize,
    cache: Option<&Path>,
) -> Result<(SplineFunction<f64>, bool)> {
    let path = cache.map(|dir| cache_path(dir, config, n, m));
    if let Some(p) = &path {
        if p.exists() {
            let record: SplineRecord = serde_json::from_str(&fs::read_to_string(p)?)?;
            if record.n == n && record.d == config.ref_degree {
                return Ok((record.into_spline()?, true));
            }
        }
    }
    let sol = solve_problem(&problem.discrete(n, config.ref_degree, m, config.quad)?)?;
    if let Some(p) = &path {
        write_atomic(p, &serde_json::to_string(&SplineRecord::from_spline(&sol.u))?)?;
    }
    Ok((sol.u, false))
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("cache"),
        std::process::id()
    ));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
