//! Smooth 1-periodic parametrizations of closed Jordan curves.
//!
//! Every curve maps the periodic unit interval `[0, 1)` onto the boundary.
//! Besides the point and its first two derivatives, curves provide an
//! accurate chord `z(s + h) - z(s)` that does not lose relative precision as
//! `h -> 0`; boundary kernels divide by powers of the chord length and need it.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{wrap_unit, Real};

/// A vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn norm_sqr(self) -> T {
        self.x * self.x + self.y * self.y
    }

    /// Rotation by -90 degrees.
    pub fn rot_cw(self) -> Self {
        Self::new(self.y, -self.x)
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

type CurveFn<T> = Arc<dyn Fn(T) -> Vec2<T> + Send + Sync>;

/// User-supplied curve given by evaluators for `z`, `z'` and `z''`.
#[derive(Clone)]
pub struct CustomCurve<T> {
    pub z: CurveFn<T>,
    pub dz: CurveFn<T>,
    pub ddz: CurveFn<T>,
}

impl<T> fmt::Debug for CustomCurve<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomCurve { .. }")
    }
}

/// The built-in curve families.
#[derive(Debug, Clone)]
pub enum CurveKind<T> {
    Circle { radius: T },
    Ellipse { a: T, b: T },
    /// `c * (cos 2πt + 0.65 cos 4πt - 0.65, 1.5 sin 2πt)`.
    Kite { scale: T },
    Custom(CustomCurve<T>),
}

/// A closed curve together with its orientation.
#[derive(Debug, Clone)]
pub struct ParametricCurve<T> {
    pub kind: CurveKind<T>,
    pub counterclockwise: bool,
}

const KITE_FOLD: f64 = 0.65;
const KITE_STRETCH: f64 = 1.5;

impl<T: Real> ParametricCurve<T> {
    pub fn circle(radius: T) -> Self {
        Self::from_kind(CurveKind::Circle { radius })
    }

    pub fn ellipse(a: T, b: T) -> Self {
        Self::from_kind(CurveKind::Ellipse { a, b })
    }

    pub fn kite(scale: T) -> Self {
        Self::from_kind(CurveKind::Kite { scale })
    }

    pub fn custom(curve: CustomCurve<T>) -> Self {
        Self::from_kind(CurveKind::Custom(curve))
    }

    pub fn from_kind(kind: CurveKind<T>) -> Self {
        Self {
            kind,
            counterclockwise: true,
        }
    }

    /// Same point set traversed the other way.
    pub fn reversed(mut self) -> Self {
        self.counterclockwise = !self.counterclockwise;
        self
    }

    fn param(&self, t: T) -> T {
        let t = wrap_unit(t);
        if self.counterclockwise {
            t
        } else {
            wrap_unit(-t)
        }
    }

    fn sign(&self) -> T {
        if self.counterclockwise {
            T::one()
        } else {
            -T::one()
        }
    }

    /// `z(t)`, with `t` reduced mod 1.
    pub fn point(&self, t: T) -> Vec2<T> {
        base_point(&self.kind, self.param(t))
    }

    /// `z'(t)` (`order = 1`) or `z''(t)` (`order = 2`).
    pub fn derivative(&self, t: T, order: usize) -> Result<Vec2<T>> {
        let u = self.param(t);
        match order {
            1 => Ok(base_d1(&self.kind, u) * self.sign()),
            2 => Ok(base_d2(&self.kind, u)),
            other => Err(Error::UnsupportedDerivativeOrder(other)),
        }
    }

    pub(crate) fn d1(&self, t: T) -> Vec2<T> {
        base_d1(&self.kind, self.param(t)) * self.sign()
    }

    pub(crate) fn d2(&self, t: T) -> Vec2<T> {
        base_d2(&self.kind, self.param(t))
    }

    /// Unit normal pointing out of the enclosed domain.
    pub fn outward_normal(&self, t: T) -> Result<Vec2<T>> {
        let tangent = self.d1(t);
        let len = tangent.norm();
        if !(len > T::zero()) || !len.is_finite() {
            return Err(Error::DegenerateTangent {
                t: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        // A clockwise traversal has the interior on its right.
        let n = if self.counterclockwise {
            tangent.rot_cw()
        } else {
            -tangent.rot_cw()
        };
        Ok(n * len.recip())
    }

    /// `z(s + h) - z(s)` without cancellation for small `h`.
    pub fn chord(&self, s: T, h: T) -> Vec2<T> {
        if self.counterclockwise {
            base_chord(&self.kind, s, h)
        } else {
            base_chord(&self.kind, -s, -h)
        }
    }

    /// Logarithmic capacity (transfinite diameter) where a closed form is known.
    ///
    /// The single-layer operator is not invertible when this equals one;
    /// callers should warn rather than refuse.
    pub fn logarithmic_capacity(&self) -> Option<T> {
        match &self.kind {
            CurveKind::Circle { radius } => Some(radius.abs()),
            CurveKind::Ellipse { a, b } => Some((a.abs() + b.abs()) * T::lit(0.5)),
            CurveKind::Kite { .. } | CurveKind::Custom(_) => None,
        }
    }

    /// Checks the curve invariants on `samples` equispaced parameters:
    /// nonvanishing tangent, periodicity, and injectivity.
    pub fn validate(&self, samples: usize) -> Result<()> {
        let samples = samples.max(8);
        let h = T::of(samples).recip();
        let tol = T::lit(1e3) * T::epsilon();
        let scale = (0..samples)
            .map(|i| self.point(T::of(i) * h).norm())
            .fold(T::zero(), T::max)
            .max(T::one());
        for i in 0..samples {
            let t = T::of(i) * h;
            if !(self.d1(t).norm() > T::zero()) {
                return Err(Error::DegenerateTangent {
                    t: t.to_f64().unwrap_or(f64::NAN),
                });
            }
            if let CurveKind::Custom(c) = &self.kind {
                let drift = ((c.z)(t + T::one()) - (c.z)(t)).norm();
                if drift > tol * scale {
                    return Err(Error::InvalidCurve(format!(
                        "not 1-periodic at t = {t}: |z(t+1) - z(t)| = {drift}"
                    )));
                }
            }
        }
        let mut min_ratio = T::infinity();
        for i in 0..samples {
            for j in (i + 1)..samples {
                let (s, t) = (T::of(i) * h, T::of(j) * h);
                let gap = self.point(t) - self.point(s);
                let circ = (T::two_pi() * (t - s) * T::lit(0.5)).sin().abs() * T::lit(2.0);
                min_ratio = min_ratio.min(gap.norm() / circ);
            }
        }
        if !(min_ratio > tol * scale) {
            return Err(Error::InvalidCurve(format!(
                "not injective: sampled chord ratio {min_ratio}"
            )));
        }
        Ok(())
    }
}

fn trig<T: Real>(u: T) -> (T, T) {
    let th = T::two_pi() * u;
    (th.cos(), th.sin())
}

fn base_point<T: Real>(kind: &CurveKind<T>, u: T) -> Vec2<T> {
    match kind {
        CurveKind::Circle { radius } => {
            let (c, s) = trig(u);
            Vec2::new(*radius * c, *radius * s)
        }
        CurveKind::Ellipse { a, b } => {
            let (c, s) = trig(u);
            Vec2::new(*a * c, *b * s)
        }
        CurveKind::Kite { scale } => {
            let (c, s) = trig(u);
            let (c2, _) = trig(u + u);
            let fold = T::lit(KITE_FOLD);
            Vec2::new(
                *scale * (c + fold * c2 - fold),
                *scale * T::lit(KITE_STRETCH) * s,
            )
        }
        CurveKind::Custom(cc) => (cc.z)(u),
    }
}

fn base_d1<T: Real>(kind: &CurveKind<T>, u: T) -> Vec2<T> {
    let w = T::two_pi();
    match kind {
        CurveKind::Circle { radius } => {
            let (c, s) = trig(u);
            Vec2::new(-*radius * w * s, *radius * w * c)
        }
        CurveKind::Ellipse { a, b } => {
            let (c, s) = trig(u);
            Vec2::new(-*a * w * s, *b * w * c)
        }
        CurveKind::Kite { scale } => {
            let (c, s) = trig(u);
            let (_, s2) = trig(u + u);
            let fold = T::lit(KITE_FOLD);
            Vec2::new(
                -*scale * w * (s + T::lit(2.0) * fold * s2),
                *scale * T::lit(KITE_STRETCH) * w * c,
            )
        }
        CurveKind::Custom(cc) => (cc.dz)(u),
    }
}

fn base_d2<T: Real>(kind: &CurveKind<T>, u: T) -> Vec2<T> {
    let w2 = T::two_pi() * T::two_pi();
    match kind {
        CurveKind::Circle { radius } => {
            let (c, s) = trig(u);
            Vec2::new(-*radius * w2 * c, -*radius * w2 * s)
        }
        CurveKind::Ellipse { a, b } => {
            let (c, s) = trig(u);
            Vec2::new(-*a * w2 * c, -*b * w2 * s)
        }
        CurveKind::Kite { scale } => {
            let (c, s) = trig(u);
            let (c2, _) = trig(u + u);
            let fold = T::lit(KITE_FOLD);
            Vec2::new(
                -*scale * w2 * (c + T::lit(4.0) * fold * c2),
                -*scale * T::lit(KITE_STRETCH) * w2 * s,
            )
        }
        CurveKind::Custom(cc) => (cc.ddz)(u),
    }
}

fn base_chord<T: Real>(kind: &CurveKind<T>, s: T, h: T) -> Vec2<T> {
    let pi = T::PI();
    // Sum-to-product: every coordinate difference carries a factor sin(πh).
    let sh = (pi * h).sin();
    let sigma = s + s + h;
    let two = T::lit(2.0);
    match kind {
        CurveKind::Circle { radius } => Vec2::new(
            -two * *radius * (pi * sigma).sin() * sh,
            two * *radius * (pi * sigma).cos() * sh,
        ),
        CurveKind::Ellipse { a, b } => Vec2::new(
            -two * *a * (pi * sigma).sin() * sh,
            two * *b * (pi * sigma).cos() * sh,
        ),
        CurveKind::Kite { scale } => {
            let fold = T::lit(KITE_FOLD);
            let x = (pi * sigma).sin() + two * fold * (two * pi * sigma).sin() * (pi * h).cos();
            Vec2::new(
                -two * *scale * x * sh,
                two * *scale * T::lit(KITE_STRETCH) * (pi * sigma).cos() * sh,
            )
        }
        CurveKind::Custom(cc) => (cc.z)(s + h) - (cc.z)(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec2<f64>, b: Vec2<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn builtins() -> Vec<ParametricCurve<f64>> {
        vec![
            ParametricCurve::circle(1.0),
            ParametricCurve::circle(2.0),
            ParametricCurve::ellipse(1.0, 0.5),
            ParametricCurve::kite(0.5),
            ParametricCurve::ellipse(1.0, 0.5).reversed(),
        ]
    }

    #[test]
    fn points_on_simple_curves() {
        let c = ParametricCurve::circle(1.0);
        assert!(close(c.point(0.0), Vec2::new(1.0, 0.0), 1e-15));
        assert!(close(c.point(0.25), Vec2::new(0.0, 1.0), 1e-15));
        assert!(close(c.point(1.25), Vec2::new(0.0, 1.0), 1e-14));
        let e = ParametricCurve::ellipse(1.0, 0.5);
        assert!(close(e.point(0.5), Vec2::new(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn circle_derivatives() {
        let c = ParametricCurve::circle(1.0);
        let pi = std::f64::consts::PI;
        assert!(close(c.derivative(0.0, 1).unwrap(), Vec2::new(0.0, 2.0 * pi), 1e-14));
        assert!(close(
            c.derivative(0.0, 2).unwrap(),
            Vec2::new(-4.0 * pi * pi, 0.0),
            1e-13
        ));
        assert!(matches!(
            c.derivative(0.0, 3),
            Err(Error::UnsupportedDerivativeOrder(3))
        ));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for curve in builtins() {
            for k in 0..17 {
                let t = k as f64 / 17.0 + 0.013;
                let h = 1e-5;
                let fd1 = (curve.point(t + h) - curve.point(t - h)) * (0.5 / h);
                let d1 = curve.derivative(t, 1).unwrap();
                assert!(close(fd1, d1, 1e-8 * d1.norm().max(1.0)), "{curve:?} t={t}");
                let fd2 = (curve.d1(t + h) - curve.d1(t - h)) * (0.5 / h);
                let d2 = curve.derivative(t, 2).unwrap();
                assert!(close(fd2, d2, 1e-7 * d2.norm().max(1.0)), "{curve:?} t={t}");
            }
        }
    }

    #[test]
    fn normals() {
        let c2 = ParametricCurve::circle(2.0);
        assert!(close(c2.outward_normal(0.0).unwrap(), Vec2::new(1.0, 0.0), 1e-15));
        let c1 = ParametricCurve::circle(1.0);
        for k in 0..10 {
            let t = 0.1 * k as f64 + 0.03;
            assert!(close(c1.outward_normal(t).unwrap(), c1.point(t), 1e-14));
        }
        // Reversal keeps the normal pointing out.
        let rev = ParametricCurve::circle(1.0).reversed();
        assert!(close(rev.outward_normal(0.3).unwrap(), rev.point(0.3), 1e-14));
    }

    #[test]
    fn chord_matches_difference_and_stays_accurate() {
        for curve in builtins() {
            for k in 0..11 {
                let s = k as f64 / 11.0;
                let h = 0.37;
                let direct = curve.point(s + h) - curve.point(s);
                assert!(close(curve.chord(s, h), direct, 1e-14), "{curve:?}");
                // Tiny offsets: chord / h -> z'(s).
                let tiny = 1e-9;
                let approx = curve.chord(s, tiny) * (1.0 / tiny);
                assert!(close(approx, curve.d1(s), 1e-6 * curve.d1(s).norm()));
            }
        }
    }

    #[test]
    fn capacities() {
        assert_eq!(ParametricCurve::circle(1.0).logarithmic_capacity(), Some(1.0));
        assert_eq!(
            ParametricCurve::ellipse(1.0, 0.5).logarithmic_capacity(),
            Some(0.75)
        );
        assert_eq!(ParametricCurve::kite(0.5).logarithmic_capacity(), None);
    }

    #[test]
    fn ellipse_capacity_from_exterior_map() {
        // w -> cap*w + ((a-b)/2)/w maps the unit circle onto the ellipse;
        // the leading Laurent coefficient is the capacity.
        let (a, b) = (1.0, 0.5);
        let e = ParametricCurve::ellipse(a, b);
        let cap = e.logarithmic_capacity().unwrap();
        for k in 0..32 {
            let th = std::f64::consts::TAU * k as f64 / 32.0;
            let w = num_complex::Complex::new(th.cos(), th.sin());
            let img = w * cap + w.inv() * ((a - b) / 2.0);
            let p = e.point(k as f64 / 32.0);
            assert!((img.re - p.x).abs() < 1e-14 && (img.im - p.y).abs() < 1e-14);
        }
    }

    #[test]
    fn validation_accepts_builtins_and_rejects_bad_custom() {
        for curve in builtins() {
            curve.validate(64).unwrap();
        }
        let figure_eight = CustomCurve::<f64> {
            z: Arc::new(|t| {
                let th = std::f64::consts::TAU * t;
                Vec2::new(th.sin(), (2.0 * th).sin())
            }),
            dz: Arc::new(|t| {
                let th = std::f64::consts::TAU * t;
                Vec2::new(th.cos(), 2.0 * (2.0 * th).cos()) * std::f64::consts::TAU
            }),
            ddz: Arc::new(|_| Vec2::new(0.0, 0.0)),
        };
        assert!(ParametricCurve::custom(figure_eight).validate(64).is_err());
    }

    #[test]
    fn f32_curves_work() {
        let e = ParametricCurve::<f32>::ellipse(1.0, 0.5);
        let n = e.outward_normal(0.2).unwrap();
        assert!((n.norm() - 1.0).abs() < 1e-6);
    }
}
