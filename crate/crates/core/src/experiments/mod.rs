//! Model problems, reference solutions, convergence sweeps, rate fits and
//! their CSV/SVG output. Works in `f64`.

pub mod config;
pub mod harness;
pub mod output;
pub mod problems;
pub mod reference;

pub use config::{ExperimentConfig, Oversampling, ProblemKind, ReferenceSpec};
pub use harness::{
    fit_rate, fit_records, is_monotone, run_convergence, run_convergence_with, run_j_sweep, run_j_sweep_with,
    solve_record, ConvergenceRecord, FitWindow, RateAxis, RateFit, ERROR_FLOOR,
};
pub use output::{emit_outputs, read_csv, render_svg, write_csv, Series};
pub use problems::{setup_problem, Problem};
pub use reference::{reference_solution, Reference};
