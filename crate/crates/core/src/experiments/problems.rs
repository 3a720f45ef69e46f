//! The three model problems: curve, operator, data and (for the circle) the exact density.

use std::sync::Arc;

use num_complex::Complex;

use super::config::{ExperimentConfig, ProblemKind};
use crate::collocation::{DiscreteProblem, RhsFn};
use crate::curves::{ParametricCurve, Vec2};
use crate::error::{Error, Result};
use crate::fourier::FourierVector;
use crate::operators::BoundaryOperator;
use crate::quadrature::QuadratureConfig;
use crate::scalar::cis;
use crate::splines::SplineSpace;

/// Free-stream speed of the flow problem.
pub const FLOW_SPEED: f64 = -1.0;

/// Heat data `f(x) = cos(5x₁/√2 + 5x₂/√2)`.
pub fn heat_data(x: Vec2<f64>) -> f64 {
    let k = 5.0 / std::f64::consts::SQRT_2;
    (k * x.x + k * x.y).cos()
}

/// Band-limited circle data `f(t) = 1/4 + cos 2πt + (1/2) sin 4πt`.
pub fn circle_data() -> FourierVector<f64> {
    let mut f = FourierVector::zeros(2);
    f.set(0, Complex::new(0.25, 0.0));
    f.set(1, Complex::new(0.5, 0.0));
    f.set(-1, Complex::new(0.5, 0.0));
    f.set(2, Complex::new(0.0, -0.25));
    f.set(-2, Complex::new(0.0, 0.25));
    f
}

/// Density of `𝒮u = f` on `circle(r)`: `û_k = -4π|k| f̂_k`, `û_0 = 2π f̂_0 / log r`.
pub fn circle_exact_density(radius: f64, f: &FourierVector<f64>) -> Result<FourierVector<f64>> {
    let log_r = radius.ln();
    if f.get(0).norm() > 0.0 && log_r == 0.0 {
        return Err(Error::InvalidArgument("single layer is singular on the unit circle".into()));
    }
    let tau = std::f64::consts::TAU;
    Ok(f.multiply(|k| {
        if k == 0 {
            Complex::new(tau / log_r, 0.0)
        } else {
            Complex::new(-2.0 * tau * k.abs() as f64, 0.0)
        }
    }))
}

/// Curve, operator and data of one model problem.
#[derive(Clone)]
pub struct Problem {
    pub kind: ProblemKind,
    pub curve: ParametricCurve<f64>,
    pub op: BoundaryOperator<f64>,
    pub alpha: f64,
    pub rhs: RhsFn<f64>,
    /// Exact density when known in closed form.
    pub exact: Option<FourierVector<f64>>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem").field("kind", &self.kind).field("curve", &self.curve).finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(kind: ProblemKind, radius: f64) -> Result<Self> {
        match kind {
            ProblemKind::FlowEllipse => {
                let curve = ParametricCurve::ellipse(1.0, 0.5);
                let c = curve.clone();
                // g = -n·(U, 0).
                let rhs: RhsFn<f64> = Arc::new(move |t| {
                    let n = c.outward_normal(t).expect("ellipse is regular");
                    Complex::new(-n.x * FLOW_SPEED, 0.0)
                });
                Ok(Self {
                    kind,
                    op: BoundaryOperator::AdjDoubleLayerShifted { curve: curve.clone() },
                    curve,
                    alpha: kind.alpha(),
                    rhs,
                    exact: None,
                })
            }
            ProblemKind::HeatKite => {
                let curve = ParametricCurve::kite(0.5);
                let c = curve.clone();
                let rhs: RhsFn<f64> = Arc::new(move |t| Complex::new(heat_data(c.point(t)), 0.0));
                Ok(Self {
                    kind,
                    op: BoundaryOperator::SingleLayer { curve: curve.clone() },
                    curve,
                    alpha: kind.alpha(),
                    rhs,
                    exact: None,
                })
            }
            ProblemKind::CircleDirichlet => {
                if !(radius > 0.0) {
                    return Err(Error::InvalidCurve(format!("circle radius must be positive, got {radius}")));
                }
                let curve = ParametricCurve::circle(radius);
                let f = circle_data();
                let exact = circle_exact_density(radius, &f)?;
                let rhs: RhsFn<f64> = Arc::new(move |t| f.eval(t));
                Ok(Self {
                    kind,
                    op: BoundaryOperator::SingleLayer { curve: curve.clone() },
                    curve,
                    alpha: kind.alpha(),
                    rhs,
                    exact: Some(exact),
                })
            }
        }
    }

    /// Collocation system on `S_N` of degree `d` with `M` points.
    pub fn discrete(&self, n: usize, degree: usize, m: usize, quad: QuadratureConfig<f64>) -> Result<DiscreteProblem<f64>> {
        let space = SplineSpace::new(n, degree)?;
        let p = DiscreteProblem { op: self.op.clone(), space, m, rhs: self.rhs.clone(), quad };
        p.validate()?;
        Ok(p)
    }
}

/// The problem described by a configuration.
pub fn setup_problem(config: &ExperimentConfig) -> Result<Problem> {
    Problem::new(config.problem, config.radius)
}

/// `Σ_k f̂_k e^{2πikt}` as a right-hand side.
pub fn series_rhs(f: FourierVector<f64>) -> RhsFn<f64> {
    Arc::new(move |t| f.iter().map(|(k, v)| v * cis(std::f64::consts::TAU * (k as f64 * t).rem_euclid(1.0))).sum())
}
