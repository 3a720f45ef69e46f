//! Gauss-Legendre panels, the periodic trapezoid rule and integration of
//! polynomials against the periodic logarithmic kernel.

use crate::error::{Error, Result};
use crate::scalar::{Field, Real};
use crate::splines::horner;

/// Accuracy and truncation parameters for operator evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    /// Gauss nodes per panel.
    pub gauss_order: usize,
    /// Target absolute error per matrix entry.
    pub tol: T,
    /// Fourier truncation for multiplier paths.
    pub k_op: usize,
    /// Panels are at most `1/min_panels` wide, so coarse grids still get
    /// resolved kernels.
    pub min_panels: usize,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            gauss_order: 12,
            tol: T::lit(1e-12),
            k_op: 1 << 14,
            min_panels: 32,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.gauss_order < 2 || self.gauss_order > MAX_GAUSS_ORDER {
            return Err(Error::InvalidArgument(format!(
                "gauss_order must lie in 2..={MAX_GAUSS_ORDER}, got {}",
                self.gauss_order
            )));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidArgument("quadrature tol must be positive".into()));
        }
        if self.min_panels == 0 {
            return Err(Error::InvalidArgument("min_panels must be positive".into()));
        }
        Ok(())
    }

    /// Panels per grid cell of width `1/n`.
    pub fn panels_per_cell(&self, n: usize) -> usize {
        self.min_panels.div_ceil(n).max(1)
    }
}

pub const MAX_GAUSS_ORDER: usize = 64;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// The `n`-point Gauss-Legendre rule, `1 ≤ n ≤ 64`.
///
/// Nodes are found by Newton iteration on `P_n` in double precision.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<GaussRule<T>> {
    if n == 0 || n > MAX_GAUSS_ORDER {
        return Err(Error::InvalidArgument(format!("Gauss-Legendre order must lie in 1..=64, got {n}")));
    }
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(GaussRule {
        nodes: nodes.into_iter().map(T::lit).collect(),
        weights: weights.into_iter().map(T::lit).collect(),
    })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

impl<T: Real> GaussRule<T> {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Composite rule on `[a, b]` split into `panels` equal panels, as
    /// `(node, weight)` pairs.
    pub fn composite(&self, a: T, b: T, panels: usize) -> Vec<(T, T)> {
        let w = (b - a) / T::of(panels);
        let half = w * T::lit(0.5);
        let mut out = Vec::with_capacity(panels * self.order());
        for p in 0..panels {
            let mid = a + w * T::of(p) + half;
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * *x, half * *wt));
            }
        }
        out
    }

    pub fn integrate(&self, a: T, b: T, panels: usize, f: impl Fn(T) -> T) -> T {
        self.composite(a, b, panels).into_iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// `(1/Q) Σ f(q/Q)`.
pub fn trapezoid_periodic<T: Real, F: Field<T>>(samples: &[F]) -> F {
    let q = samples.len();
    let sum = samples.iter().fold(F::zero(), |acc, &v| acc + v);
    sum.scale(T::of(q.max(1)).recip())
}

/// Fourier multiplier of `(1/2π)∫ log|2 sin π(t-s)| · dt`.
pub fn circle_log_multiplier<T: Real>(m: i64) -> T {
    if m == 0 {
        T::zero()
    } else {
        -(T::lit(4.0) * T::PI() * T::of(m.unsigned_abs() as usize)).recip()
    }
}

/// `∫_lo^hi log|η| η^r dη` for `r = 0..=r_max`.
pub fn log_moments<T: Real>(lo: T, hi: T, r_max: usize) -> Vec<T> {
    (0..=r_max).map(|r| log_antiderivative(hi, r) - log_antiderivative(lo, r)).collect()
}

fn log_antiderivative<T: Real>(eta: T, r: usize) -> T {
    if eta == T::zero() {
        return T::zero();
    }
    let r1 = T::of(r + 1);
    eta.powi(r as i32 + 1) * (eta.abs().ln() / r1 - (r1 * r1).recip())
}

/// Coefficients of `p(η + c)` in powers of `η`.
pub(crate) fn taylor_shift<T: Real>(p: &[T], c: T) -> Vec<T> {
    let mut q = p.to_vec();
    // Repeated synthetic division.
    let n = q.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            let carry = q[k + 1] * c;
            q[k] += carry;
        }
    }
    q
}

/// `sin(x)/x` with the removable point filled in.
#[inline]
pub(crate) fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}

/// Integers `k` whose singularity `s + k` lies within one element length of `[a, b]`.
pub(crate) fn singular_set<T: Real>(a: T, b: T, s: T) -> Vec<i64> {
    let len = b - a;
    let lo = (a - s - len).ceil().to_i64().unwrap_or(0);
    let hi = (b - s + len).floor().to_i64().unwrap_or(-1);
    (lo..=hi).collect()
}

/// `log|2 sin πx| - Σ_{k∈S} log|x - k|`, smooth away from integers outside `S`.
pub(crate) fn log_sine_remainder<T: Real>(x: T, set: &[i64]) -> T {
    let k0 = x.round();
    let delta = x - k0;
    let k0i = k0.to_i64().unwrap_or(0);
    let mut acc = if set.contains(&k0i) {
        (T::two_pi() * sinc(T::PI() * delta)).abs().ln()
    } else {
        (T::lit(2.0) * (T::PI() * delta).sin()).abs().ln()
    };
    for &k in set {
        if k != k0i {
            acc -= (delta + T::of_i(k0i - k)).abs().ln();
        }
    }
    acc
}

/// `∫_a^b log|2 sin π(t-s)| p((t-a)/(b-a)) dt` for one rule, no error check.
pub(crate) fn log_element_with_rule<T: Real>(p: &[T], a: T, b: T, s: T, rule: &GaussRule<T>, panels: usize) -> T {
    let len = b - a;
    let set = singular_set(a, b, s);
    let smooth = rule.integrate(a, b, panels, |t| {
        let tau = (t - a) / len;
        log_sine_remainder(t - s, &set) * horner(p, tau)
    });
    if set.is_empty() {
        return smooth;
    }
    let int_p: T = p.iter().enumerate().map(|(k, c)| *c / T::of(k + 1)).sum();
    let singular: T = set
        .iter()
        .map(|&k| {
            let tc = (s + T::of_i(k) - a) / len;
            let q = taylor_shift(p, tc);
            let mom = log_moments(-tc, T::one() - tc, q.len().saturating_sub(1));
            let inner: T = q.iter().zip(&mom).map(|(c, m)| *c * *m).sum();
            len * (len.ln() * int_p + inner)
        })
        .sum();
    smooth + singular
}

/// `∫_a^b log|2 sin π(t-s)| p(τ) dt` with `τ = (t-a)/(b-a)` and `p` given by
/// ascending coefficients in `τ`.
///
/// The singular images of `s` near the element are integrated exactly through
/// closed-form log moments; the smooth remainder uses composite Gauss. The
/// error is estimated against a rule of twice the order.
pub fn integrate_log_element<T: Real>(p: &[T], a: T, b: T, s: T, q: &QuadratureConfig<T>) -> Result<T> {
    q.validate()?;
    if !(b > a) {
        return Err(Error::InvalidArgument("element needs a < b".into()));
    }
    let panels = (((b - a) * T::of(q.min_panels)).ceil().to_usize().unwrap_or(1)).max(1);
    let lo = gauss_legendre(q.gauss_order)?;
    let hi = gauss_legendre((2 * q.gauss_order).min(MAX_GAUSS_ORDER))?;
    let v = log_element_with_rule(p, a, b, s, &lo, panels);
    let check = log_element_with_rule(p, a, b, s, &hi, panels);
    let est = (v - check).abs();
    if est > q.tol {
        return Err(Error::QuadratureTolerance {
            estimate: est.to_f64().unwrap_or(f64::NAN),
            tol: q.tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn small_rules() {
        let r1 = gauss_legendre::<f64>(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - 2.0).abs() < 1e-15);
        let r2 = gauss_legendre::<f64>(2).unwrap();
        assert!((r2.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r2.nodes[0] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r2.weights[0] - 1.0).abs() < 1e-15);
        assert!(gauss_legendre::<f64>(0).is_err());
        assert!(gauss_legendre::<f64>(65).is_err());
    }

    #[test]
    fn polynomial_exactness() {
        let r = gauss_legendre::<f64>(10).unwrap();
        let v: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(18)).sum();
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        for n in [3usize, 17, 40, 64] {
            let r = gauss_legendre::<f64>(n).unwrap();
            let total: f64 = r.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let k = 2 * n - 2;
            let v: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((v - 2.0 / (k as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn trapezoid_examples() {
        let q = 16;
        for m in 1..q {
            let s: Vec<Complex<f64>> = (0..q).map(|i| crate::scalar::cis(TAU * (m * i) as f64 / q as f64)).collect();
            assert!(trapezoid_periodic::<f64, _>(&s).norm() < 1e-14);
        }
        assert_eq!(trapezoid_periodic::<f64, f64>(&[2.5; 7]), 2.5);
    }

    #[test]
    fn trapezoid_self_convergence() {
        let curve = crate::curves::ParametricCurve::ellipse(1.0, 0.5);
        let speed = |q: usize| -> f64 {
            let s: Vec<f64> = (0..q).map(|i| curve.d1(i as f64 / q as f64).norm()).collect();
            trapezoid_periodic::<f64, f64>(&s)
        };
        let oracle = speed(4096);
        assert!((speed(64) - oracle).abs() < 1e-12);
    }

    #[test]
    fn circle_multiplier_values() {
        assert_eq!(circle_log_multiplier::<f64>(0), 0.0);
        assert!((circle_log_multiplier::<f64>(1) + 1.0 / (4.0 * PI)).abs() < 1e-17);
        assert!((circle_log_multiplier::<f64>(-2) + 1.0 / (8.0 * PI)).abs() < 1e-17);
        // (1/2π)∫ log|2 sin πτ| e^{2πiτ} dτ = -1/(4π); the integral equals -1/2.
        let q = QuadratureConfig::<f64>::default();
        let re = integrate_log_element(&[1.0], 0.0, 1.0, 0.0, &q).unwrap();
        assert!(re.abs() < 1e-13);
        let cos_integral: f64 = (0..64)
            .map(|c| {
                let (a, b) = (c as f64 / 64.0, (c + 1) as f64 / 64.0);
                // cos(2πt) on the element as a Taylor polynomial in τ of degree 20.
                let poly: Vec<f64> = (0..=20)
                    .map(|k| {
                        let h = (b - a) * TAU;
                        let phase = TAU * a + k as f64 * PI / 2.0;
                        phase.cos() * h.powi(k) / (1..=k).map(|i| i as f64).product::<f64>()
                    })
                    .collect();
                integrate_log_element(&poly, a, b, 0.0, &q).unwrap()
            })
            .sum();
        assert!((cos_integral + 0.5).abs() < 1e-12, "{cos_integral}");
    }

    #[test]
    fn whole_period_vanishes_by_brute_force() {
        let q = QuadratureConfig::<f64>::default();
        for s in [0.0, 0.3, 0.77] {
            assert!(integrate_log_element(&[1.0], 0.0, 1.0, s, &q).unwrap().abs() < 1e-13);
        }
        // 10^6-point midpoint oracle, accurate to O(log(n)/n).
        let n = 1_000_000;
        let mid: f64 = (0..n).map(|i| ((i as f64 + 0.5) / n as f64 * PI).sin().mul_add(2.0, 0.0).ln()).sum::<f64>() / n as f64;
        assert!(mid.abs() < 1e-5);
    }

    /// Adaptive Gauss-Kronrod-free oracle: graded composite Gauss towards the singular endpoint.
    fn graded_oracle(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let rule = gauss_legendre::<f64>(30).unwrap();
        let mut acc = 0.0;
        let mut hi = b;
        while hi - a > 1e-15 {
            let lo = a + (hi - a) * 0.15;
            acc += rule.integrate(lo, hi, 1, &f);
            hi = lo;
        }
        acc
    }

    #[test]
    fn half_period_against_graded_oracle() {
        let q = QuadratureConfig::<f64>::default();
        let v = integrate_log_element(&[1.0], 0.0, 0.5, 0.0, &q).unwrap();
        let oracle = graded_oracle(|t| (2.0 * (PI * t).sin()).ln(), 0.0, 0.5);
        assert!((v - oracle).abs() < 1e-11, "{v} vs {oracle}");
        // Closed form: ∫_0^{1/2} log(2 sin πt) dt = 0.
        assert!(v.abs() < 1e-13);
    }

    #[test]
    fn interior_and_nearby_singularity() {
        let q = QuadratureConfig::<f64>::default();
        let p = [0.3, -1.0, 2.0];
        let (a, b) = (0.1, 0.2);
        for s in [0.13, 0.2, 0.25, 0.05, 1.17, -0.88] {
            let v = integrate_log_element(&p, a, b, s, &q).unwrap();
            let f = |t: f64| (2.0 * (PI * (t - s)).sin()).abs().ln() * horner(&p, (t - a) / (b - a));
            let sw = s - (s - 0.15f64).round();
            let oracle = if sw > a && sw < b {
                graded_oracle(f, sw, b) + graded_oracle(|t| f(a + sw - t), a, sw)
            } else if (sw - b).abs() < 1e-14 {
                graded_oracle(|t| f(a + b - t), a, b)
            } else {
                gauss_legendre::<f64>(40).unwrap().integrate(a, b, 64, &f)
            };
            assert!((v - oracle).abs() < 1e-11, "s={s}: {v} vs {oracle}");
        }
    }

    #[test]
    fn log_moment_formula() {
        let m = log_moments(-0.3, 0.7, 3);
        for (r, mr) in m.iter().enumerate() {
            let f = |x: f64| x.abs().ln() * x.powi(r as i32);
            let oracle = graded_oracle(f, 0.0, 0.7) + graded_oracle(|x| f(-x), 0.0, 0.3);
            assert!((mr - oracle).abs() < 1e-13, "r={r}: {mr} vs {oracle}");
        }
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let p = [1.0f64, -2.0, 0.5, 3.0];
        let q = taylor_shift(&p, 0.7);
        for x in [-1.0, 0.0, 0.4, 2.0] {
            assert!((horner(&q, x) - horner(&p, x + 0.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_tolerance_reported() {
        let q = QuadratureConfig::<f64> { gauss_order: 2, tol: 1e-15, k_op: 16, min_panels: 1 };
        let r = integrate_log_element(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0], 0.0, 0.9, 0.95, &q);
        assert!(matches!(r, Err(Error::QuadratureTolerance { .. })));
    }

    proptest! {
        #[test]
        fn linear_in_polynomial(
            p1 in proptest::collection::vec(-1.0f64..1.0, 4),
            p2 in proptest::collection::vec(-1.0f64..1.0, 4),
            lam in -3.0f64..3.0,
            s in -1.0f64..2.0,
        ) {
            let q = QuadratureConfig::<f64>::default();
            let (a, b) = (0.25, 0.375);
            let comb: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| x + lam * y).collect();
            let v1 = integrate_log_element(&p1, a, b, s, &q).unwrap();
            let v2 = integrate_log_element(&p2, a, b, s, &q).unwrap();
            let vc = integrate_log_element(&comb, a, b, s, &q).unwrap();
            prop_assert!((vc - (v1 + lam * v2)).abs() < 1e-12);
        }
    }
}
