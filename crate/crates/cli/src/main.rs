//! `osc`: convergence studies for oversampled spline collocation.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use osc_core::analysis::run_verification_suite;
use osc_core::experiments::{
    emit_outputs, fit_records, read_csv, reference_solution, run_convergence_with, run_j_sweep_with, setup_problem,
    solve_record, ExperimentConfig, FitWindow, ProblemKind, RateAxis,
};

#[derive(Parser, Debug)]
#[command(name = "osc", version, about = "Least-squares oversampled spline collocation for boundary integral equations")]
struct Cli {
    /// Experiment configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Problem to use when no config file is given.
    #[arg(long, global = true)]
    problem: Option<String>,
    /// Output directory for CSV and SVG files (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory for cached reference solutions.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Worker threads for assembly (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One solve at (N, M); prints the error against the reference.
    Solve {
        #[arg(short = 'n', long)]
        n: usize,
        /// Collocation points; defaults to the configured oversampling rule.
        #[arg(short = 'm', long)]
        m: Option<usize>,
    },
    /// Sweep over the configured N list.
    Convergence,
    /// Sweep over the configured J list at fixed N.
    Jsweep,
    /// Run the Fourier-side verification suite.
    Verify,
    /// Fit log-log rates from an existing CSV.
    Rates {
        csv: PathBuf,
        #[arg(long, value_enum, default_value_t = Axis::N)]
        axis: Axis,
        /// Smallest abscissa included in the fit.
        #[arg(long)]
        min_x: Option<f64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Axis {
    N,
    M,
    J,
}

impl From<Axis> for RateAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::N => RateAxis::N,
            Axis::M => RateAxis::M,
            Axis::J => RateAxis::J,
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, &cli.problem) {
        (Some(path), _) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(p)) => ExperimentConfig::for_problem(p.parse::<ProblemKind>()?),
        (None, None) => ExperimentConfig::for_problem(ProblemKind::FlowEllipse),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().context("configuring thread pool")?;
    }
    match &cli.command {
        Command::Verify => {
            let report = run_verification_suite()?;
            println!("{report}");
            return Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(2) });
        }
        Command::Rates { csv, axis, min_x } => {
            let records = read_csv(csv).with_context(|| format!("reading {}", csv.display()))?;
            let window = FitWindow { min_x: min_x.unwrap_or(0.0), ..FitWindow::default() };
            let fit = fit_records(&records, (*axis).into(), &window)?;
            println!("slope {:.4} +- {:.4}  intercept {:.4}", fit.slope, fit.slope_stderr, fit.intercept);
            println!("used {} points, excluded {:?}", fit.used.len(), fit.excluded);
            return Ok(ExitCode::SUCCESS);
        }
        _ => {}
    }
    let cfg = load_config(cli)?;
    let reference = reference_solution(&cfg, cli.cache.as_deref())?;
    info!("reference error estimate {:.3e} (cached: {})", reference.error_estimate, reference.from_cache);
    match &cli.command {
        Command::Solve { n, m } => {
            let m = m.unwrap_or_else(|| cfg.oversampling.points(*n));
            if m < *n {
                bail!("need M >= N, got M = {m}, N = {n}");
            }
            let problem = setup_problem(&cfg)?;
            let r = solve_record(&cfg, &problem, &reference, *n, m)?;
            println!(
                "{} N={} M={} error(H^{})={:.6e} tail_bound={:.2e} assemble_ms={:.1} solve_ms={:.1}",
                r.problem, r.n, r.m, r.s, r.error, r.tail_bound, r.assemble_ms, r.solve_ms
            );
        }
        Command::Convergence => {
            let records = run_convergence_with(&cfg, &reference)?;
            report(&records, RateAxis::N);
            let stem = format!("{}_convergence_{}", cfg.problem, cfg.oversampling);
            for p in emit_outputs(&records, &cfg, &sanitize(&stem), RateAxis::N)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Jsweep => {
            let records = run_j_sweep_with(&cfg, &reference)?;
            report(&records, RateAxis::J);
            let stem = format!("{}_jsweep_N{}", cfg.problem, cfg.n_fixed);
            for p in emit_outputs(&records, &cfg, &stem, RateAxis::J)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Verify | Command::Rates { .. } => unreachable!(),
    }
    Ok(ExitCode::SUCCESS)
}

fn report(records: &[osc_core::experiments::ConvergenceRecord], axis: RateAxis) {
    for r in records {
        println!("N={:5} M={:6} J={:4} error={:.6e}", r.n, r.m, r.j, r.error);
    }
    match fit_records(records, axis, &FitWindow::default()) {
        Ok(fit) => println!("fitted slope {:.3} +- {:.3}", fit.slope, fit.slope_stderr),
        Err(e) => println!("no rate fit: {e}"),
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' }).collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
