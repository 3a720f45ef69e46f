//! Least-squares oversampled spline collocation for periodic boundary integral
//! equations on closed planar curves.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`. The analysis and experiment
//! layers work in `f64` only.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod collocation;
pub mod curves;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod operators;
pub mod quadrature;
pub mod scalar;
pub mod splines;

pub use analysis::{AnalysisBasisSpec, PsiExpansion, VerificationReport};
pub use collocation::{assemble, solve_least_squares, solve_problem, DenseMatrix, DiscreteProblem, Solution};
pub use curves::{CurveKind, CustomCurve, ParametricCurve, Vec2};
pub use error::{Error, Result};
pub use fourier::{FourierVector, NormEstimate};
pub use operators::{AssemblyContext, BoundaryOperator, PerturbationMatrix};
pub use quadrature::{GaussRule, QuadratureConfig};
pub use scalar::{Field, Real};
pub use splines::{SplineFunction, SplineSpace};

pub use num_complex::Complex;

pub type Complex64 = Complex<f64>;

pub type Curve64 = ParametricCurve<f64>;
pub type Curve32 = ParametricCurve<f32>;
pub type SplineFunction64 = SplineFunction<f64>;
pub type SplineFunction32 = SplineFunction<f32>;
pub type FourierVector64 = FourierVector<f64>;
pub type FourierVector32 = FourierVector<f32>;
pub type BoundaryOperator64 = BoundaryOperator<f64>;
pub type BoundaryOperator32 = BoundaryOperator<f32>;
pub type PerturbationMatrix64 = PerturbationMatrix<f64>;
pub type QuadratureConfig64 = QuadratureConfig<f64>;
pub type QuadratureConfig32 = QuadratureConfig<f32>;
pub type DiscreteProblem64 = DiscreteProblem<f64>;
pub type Solution64 = Solution<f64>;
