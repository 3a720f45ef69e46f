//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Exterior Neumann flow past `ellipse(1, 0.5)`, `-ℐ/2 + 𝒟*`.
    FlowEllipse,
    /// Interior Dirichlet heat problem in `kite(0.5)`, `𝒮`.
    HeatKite,
    /// `𝒮` on `circle(r)` with band-limited data and a closed-form density.
    CircleDirichlet,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::FlowEllipse => "flow_ellipse",
            ProblemKind::HeatKite => "heat_kite",
            ProblemKind::CircleDirichlet => "circle_dirichlet",
        }
    }

    /// Half the operator order.
    pub fn alpha(self) -> f64 {
        match self {
            ProblemKind::FlowEllipse => 0.0,
            ProblemKind::HeatKite | ProblemKind::CircleDirichlet => -0.5,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flow_ellipse" => Ok(ProblemKind::FlowEllipse),
            "heat_kite" => Ok(ProblemKind::HeatKite),
            "circle_dirichlet" => Ok(ProblemKind::CircleDirichlet),
            other => Err(Error::InvalidArgument(format!("unknown problem `{other}`"))),
        }
    }
}

/// Rule producing `M` from `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oversampling {
    /// `M = J N`.
    FixedJ(usize),
    /// `M = ceil(N^p)`.
    Power(f64),
}

impl Oversampling {
    pub fn points(self, n: usize) -> usize {
        match self {
            Oversampling::FixedJ(j) => j * n,
            Oversampling::Power(p) if p.fract() == 0.0 && p >= 0.0 => n.pow(p as u32),
            Oversampling::Power(p) => (n as f64).powf(p).ceil() as usize,
        }
    }
}

impl fmt::Display for Oversampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Oversampling::FixedJ(j) => write!(f, "fixed_J({j})"),
            Oversampling::Power(p) => write!(f, "power({p})"),
        }
    }
}

impl FromStr for Oversampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = call_syntax(s)?;
        let arg = single(&args, s)?;
        match name {
            "fixed_J" | "fixed_j" => {
                let j: usize = parse_num(arg)?;
                if j == 0 {
                    return Err(Error::InvalidArgument("oversampling factor J must be positive".into()));
                }
                Ok(Oversampling::FixedJ(j))
            }
            "power" => {
                let p: f64 = parse_num(arg)?;
                if !(p >= 1.0) {
                    return Err(Error::InvalidArgument(format!("oversampling power must be >= 1, got {p}")));
                }
                Ok(Oversampling::Power(p))
            }
            other => Err(Error::InvalidArgument(format!("unknown oversampling rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSpec {
    /// Closed-form circle density, projected to a spline with `n_ref` knots.
    ExactCircle { n_ref: usize },
    /// One fine oversampled solve at `(n_ref, j_ref · n_ref)`.
    FineCollocation { n_ref: usize, j_ref: usize },
}

impl fmt::Display for ReferenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceSpec::ExactCircle { n_ref } => write!(f, "exact_circle({n_ref})"),
            ReferenceSpec::FineCollocation { n_ref, j_ref } => write!(f, "fine_collocation({n_ref}, {j_ref})"),
        }
    }
}

impl FromStr for ReferenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = call_syntax(s)?;
        match name {
            "exact_circle" => {
                let n_ref = match args.as_slice() {
                    [] => 1024,
                    [n] => parse_num(n)?,
                    _ => return Err(Error::InvalidArgument(format!("exact_circle takes at most one argument: `{s}`"))),
                };
                Ok(ReferenceSpec::ExactCircle { n_ref })
            }
            "fine_collocation" => match args.as_slice() {
                [n, j] => Ok(ReferenceSpec::FineCollocation { n_ref: parse_num(n)?, j_ref: parse_num(j)? }),
                _ => Err(Error::InvalidArgument(format!("fine_collocation takes (N_ref, J_ref): `{s}`"))),
            },
            other => Err(Error::InvalidArgument(format!("unknown reference `{other}`"))),
        }
    }
}

/// Parameters of one convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub degree: usize,
    pub n_list: Vec<usize>,
    pub oversampling: Oversampling,
    /// Sobolev order of the error norm.
    pub error_order_s: f64,
    pub reference: ReferenceSpec,
    /// Spline degree of the fine reference solve.
    pub ref_degree: usize,
    pub quad: QuadratureConfig<f64>,
    pub output_dir: PathBuf,
    /// `N` of the J-sweep.
    pub n_fixed: usize,
    pub j_list: Vec<usize>,
    /// Radius of the circle problem.
    pub radius: f64,
}

impl ExperimentConfig {
    /// Defaults for a problem: linear splines, `M = N`, error order `4α - (d+1)`.
    pub fn for_problem(problem: ProblemKind) -> Self {
        let degree = 1;
        let (n_list, reference) = match problem {
            ProblemKind::CircleDirichlet => (vec![8, 16, 32, 64], ReferenceSpec::ExactCircle { n_ref: 1024 }),
            _ => (vec![16, 32, 64, 128, 256], ReferenceSpec::FineCollocation { n_ref: 256, j_ref: 4 }),
        };
        Self {
            problem,
            degree,
            n_list,
            oversampling: Oversampling::FixedJ(1),
            error_order_s: default_error_order(problem, degree),
            reference,
            ref_degree: 3,
            quad: QuadratureConfig::default(),
            output_dir: PathBuf::from("out"),
            n_fixed: 64,
            j_list: vec![1, 2, 4, 8, 16],
            radius: 2.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.problem.alpha()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    ///
    /// `problem` is applied first so that the remaining keys override that
    /// problem's defaults. `s` defaults to `4α - (d+1)` for the final `d`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config { line: i + 1, msg: format!("expected key = value, got `{line}`") })?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let problem = match pairs.iter().rev().find(|(_, k, _)| k == "problem") {
            Some((line, _, v)) => v.parse().map_err(|e: Error| Error::Config { line: *line, msg: e.to_string() })?,
            None => ProblemKind::FlowEllipse,
        };
        let mut cfg = Self::for_problem(problem);
        let mut explicit_s = false;
        for (line, key, value) in &pairs {
            let wrap = |e: Error| Error::Config { line: *line, msg: format!("{key}: {e}") };
            match key.as_str() {
                "problem" => {}
                "d" => cfg.degree = parse_num(value).map_err(wrap)?,
                "N_list" => cfg.n_list = parse_list(value).map_err(wrap)?,
                "oversampling" => cfg.oversampling = value.parse().map_err(wrap)?,
                "s" | "error_order_s" => {
                    cfg.error_order_s = parse_num(value).map_err(wrap)?;
                    explicit_s = true;
                }
                "reference" => cfg.reference = value.parse().map_err(wrap)?,
                "ref_degree" => cfg.ref_degree = parse_num(value).map_err(wrap)?,
                "gauss_order" => cfg.quad.gauss_order = parse_num(value).map_err(wrap)?,
                "quad_tol" => cfg.quad.tol = parse_num(value).map_err(wrap)?,
                "k_op" => cfg.quad.k_op = parse_num(value).map_err(wrap)?,
                "min_panels" => cfg.quad.min_panels = parse_num(value).map_err(wrap)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "N_fixed" => cfg.n_fixed = parse_num(value).map_err(wrap)?,
                "J_list" => cfg.j_list = parse_list(value).map_err(wrap)?,
                "radius" => cfg.radius = parse_num(value).map_err(wrap)?,
                other => return Err(Error::Config { line: *line, msg: format!("unknown key `{other}`") }),
            }
        }
        if !explicit_s {
            cfg.error_order_s = default_error_order(cfg.problem, cfg.degree);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n < 2) {
            return bad(format!("N_list needs entries >= 2, got {:?}", self.n_list));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("N_list must be strictly ascending, got {:?}", self.n_list));
        }
        if self.j_list.is_empty() || self.j_list.contains(&0) || self.j_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("J_list must be positive and strictly ascending, got {:?}", self.j_list));
        }
        if self.n_fixed < 2 {
            return bad(format!("N_fixed must be >= 2, got {}", self.n_fixed));
        }
        if !(self.degree as f64 > 2.0 * self.alpha()) || !(self.ref_degree as f64 > 2.0 * self.alpha()) {
            return Err(Error::ConsistencyViolation { degree: self.degree.min(self.ref_degree), alpha: self.alpha() });
        }
        if !(self.radius > 0.0) || (self.problem == ProblemKind::CircleDirichlet && self.radius == 1.0) {
            return bad(format!("circle radius must be positive and not 1, got {}", self.radius));
        }
        match self.reference {
            ReferenceSpec::ExactCircle { n_ref } => {
                if self.problem != ProblemKind::CircleDirichlet {
                    return bad("exact_circle reference needs the circle_dirichlet problem".into());
                }
                if n_ref < 2 {
                    return bad(format!("N_ref must be >= 2, got {n_ref}"));
                }
            }
            ReferenceSpec::FineCollocation { n_ref, j_ref } => {
                if n_ref < 4 || j_ref == 0 {
                    return bad(format!("fine_collocation needs N_ref >= 4 and J_ref >= 1, got ({n_ref}, {j_ref})"));
                }
            }
        }
        self.quad.validate()
    }

    /// Renders the configuration in the format accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!(
            "problem = {}\nd = {}\nN_list = {}\noversampling = {}\ns = {}\nreference = {}\nref_degree = {}\n\
             gauss_order = {}\nquad_tol = {:e}\nk_op = {}\nmin_panels = {}\noutput_dir = {}\nN_fixed = {}\nJ_list = {}\nradius = {}\n",
            self.problem,
            self.degree,
            list(&self.n_list),
            self.oversampling,
            self.error_order_s,
            self.reference,
            self.ref_degree,
            self.quad.gauss_order,
            self.quad.tol,
            self.quad.k_op,
            self.quad.min_panels,
            self.output_dir.display(),
            self.n_fixed,
            list(&self.j_list),
            self.radius,
        )
    }
}

/// `4α - (d+1)`: the norm in which the error bounds are stated.
pub fn default_error_order(problem: ProblemKind, degree: usize) -> f64 {
    4.0 * problem.alpha() - (degree as f64 + 1.0)
}

fn call_syntax(s: &str) -> Result<(&str, Vec<&str>)> {
    let s = s.trim();
    match s.split_once('(') {
        None => Ok((s, Vec::new())),
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::InvalidArgument(format!("unbalanced parentheses in `{s}`")))?;
            let args = inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
            Ok((name.trim(), args))
        }
    }
}

fn single<'a>(args: &[&'a str], whole: &str) -> Result<&'a str> {
    match args {
        [a] => Ok(a),
        _ => Err(Error::InvalidArgument(format!("expected exactly one argument in `{whole}`"))),
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.trim().parse().map_err(|e| Error::InvalidArgument(format!("cannot parse `{s}`: {e}")))
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',').map(parse_num).collect()
}
