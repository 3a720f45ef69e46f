//! The trial space of 1-periodic smoothest splines on an equispaced grid.
//!
//! Basis function `χ_j` is the cardinal B-spline of degree `d` with knots at
//! the grid, supported on `[j/N, (j+d+1)/N]` (mod 1). It is nonnegative, has
//! integral `1/N`, and the basis is a partition of unity. For `d = 1` these
//! are unit-peak hats with peak at `(j+1)/N`.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierVector;
use crate::scalar::{cis, Real};

/// `S_N`: degree-`d` periodic splines on the grid `{0, 1/N, ..., 1 - 1/N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplineSpace {
    n: usize,
    degree: usize,
}

impl SplineSpace {
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "spline grid needs N >= 2, got {n}"
            )));
        }
        Ok(Self { n, degree })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Value of `χ_j(t)`.
    pub fn eval_basis<T: Real>(&self, j: usize, t: T) -> T {
        let pieces = BsplinePieces::<T>::new(self.degree);
        let n = T::of(self.n);
        let mut x = (n * t - T::of(j)).rem_euclid(n);
        // Supports longer than the period (N < d + 1) overlap themselves.
        let mut acc = T::zero();
        loop {
            let p = x.floor();
            let idx = p.to_usize().unwrap_or(usize::MAX);
            if idx > self.degree {
                return acc;
            }
            acc += pieces.eval(idx, x - p);
            x += n;
        }
    }

    /// Fourier coefficient of `χ_j` at frequency `k`.
    pub fn basis_fourier_coeff<T: Real>(&self, j: usize, k: i64) -> Complex<T> {
        let phase = -T::two_pi() * T::of_i(k.rem_euclid(self.n as i64) * j as i64) / T::of(self.n);
        cis(phase) * self.shape_coeff(k)
    }

    /// `c_d(k)`, the Fourier coefficient of `χ_0`.
    pub fn shape_coeff<T: Real>(&self, k: i64) -> Complex<T> {
        let n = T::of(self.n);
        if k == 0 {
            return Complex::new(n.recip(), T::zero());
        }
        if k.rem_euclid(self.n as i64) == 0 {
            return Complex::new(T::zero(), T::zero());
        }
        let d1 = self.degree as i32 + 1;
        let arg = T::PI() * T::of_i(k) / n;
        let sinc = arg.sin() / arg;
        // exp(-iπk(d+1)/N) with the exponent reduced mod 2N.
        let red = (k * d1 as i64).rem_euclid(2 * self.n as i64);
        cis(-T::PI() * T::of_i(red) / n) * (sinc.powi(d1) / n)
    }
}

/// Polynomial pieces of the cardinal B-spline of degree `d`.
///
/// Piece `p` is the restriction to `[p, p+1]`, written in the local variable
/// `ξ ∈ [0, 1]` with ascending-power coefficients.
#[derive(Debug, Clone)]
pub struct BsplinePieces<T> {
    coeffs: Vec<Vec<T>>,
}

impl<T: Real> BsplinePieces<T> {
    pub fn new(degree: usize) -> Self {
        let d = degree;
        let mut fact = 1.0f64;
        for k in 2..=d {
            fact *= k as f64;
        }
        let coeffs = (0..=d)
            .map(|p| {
                // B(x) = (1/d!) Σ_{i≤p} (-1)^i C(d+1,i) (x - i)^d on [p, p+1], x = ξ + p.
                let mut c = vec![0.0f64; d + 1];
                for i in 0..=p {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let outer = sign * binom(d + 1, i);
                    let shift = (p - i) as f64;
                    for (q, cq) in c.iter_mut().enumerate() {
                        *cq += outer * binom(d, q) * shift.powi((d - q) as i32);
                    }
                }
                c.into_iter().map(|v| T::lit(v / fact)).collect()
            })
            .collect();
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn piece(&self, p: usize) -> &[T] {
        &self.coeffs[p]
    }

    pub fn eval(&self, p: usize, xi: T) -> T {
        horner(&self.coeffs[p], xi)
    }
}

pub(crate) fn horner<T: Real>(c: &[T], x: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, &a| acc * x + a)
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// An element of `S_N` given by its basis coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFunction<T> {
    pub space: SplineSpace,
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> SplineFunction<T> {
    pub fn new(space: SplineSpace, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != space.n() {
            return Err(Error::LengthMismatch {
                left: coeffs.len(),
                right: space.n(),
            });
        }
        Ok(Self { space, coeffs })
    }

    pub fn zero(space: SplineSpace) -> Self {
        Self {
            space,
            coeffs: vec![Complex::new(T::zero(), T::zero()); space.n()],
        }
    }

    /// `Σ_j x_j χ_j(t)`.
    pub fn eval(&self, t: T) -> Complex<T> {
        let n = self.space.n();
        let d = self.space.degree();
        let pieces = BsplinePieces::<T>::new(d);
        let nt = T::of(n);
        let x = (nt * t).rem_euclid(nt);
        let cell = x.floor();
        let xi = x - cell;
        let cell = cell.to_usize().unwrap_or(0).min(n - 1);
        let mut acc = Complex::new(T::zero(), T::zero());
        for p in 0..=d {
            let j = (cell + n * (d + 1) - p) % n;
            acc += self.coeffs[j] * pieces.eval(p, xi);
        }
        acc
    }

    /// `X_m = Σ_j x_j e^{-2πimj/N}` for `m = 0..N`.
    pub fn coefficient_dft(&self) -> Vec<Complex<T>> {
        let mut buf = self.coeffs.clone();
        FftPlanner::new()
            .plan_fft_forward(buf.len())
            .process(&mut buf);
        buf
    }

    /// Exact Fourier coefficients for `|k| ≤ bound`: `ĝ_k = c_d(k) X_{k mod N}`.
    pub fn fourier(&self, bound: usize) -> FourierVector<T> {
        let dft = self.coefficient_dft();
        let n = self.space.n() as i64;
        FourierVector::from_fn(bound, |k| {
            self.space.shape_coeff::<T>(k) * dft[k.rem_euclid(n) as usize]
        })
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == T::zero())
    }
}

/// Serialized layout `{N, d, coeffs: [[re, im], ...]}` used by the reference cache.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SplineRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl SplineRecord {
    pub fn from_spline<T: Real>(f: &SplineFunction<T>) -> Self {
        Self {
            n: f.space.n(),
            d: f.space.degree(),
            coeffs: f
                .coeffs
                .iter()
                .map(|c| [c.re.to_f64().unwrap(), c.im.to_f64().unwrap()])
                .collect(),
        }
    }

    pub fn into_spline<T: Real>(self) -> Result<SplineFunction<T>> {
        let space = SplineSpace::new(self.n, self.d)?;
        SplineFunction::new(
            space,
            self.coeffs
                .into_iter()
                .map(|[re, im]| Complex::new(T::lit(re), T::lit(im)))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;
    use proptest::prelude::*;

    #[test]
    fn indicator_and_hat() {
        let s0 = SplineSpace::new(4, 0).unwrap();
        assert_eq!(s0.eval_basis(1, 0.25f64), 1.0);
        assert_eq!(s0.eval_basis(1, 0.3f64), 1.0);
        assert_eq!(s0.eval_basis(1, 0.5f64), 0.0);
        assert_eq!(s0.eval_basis(1, 0.1f64), 0.0);
        let s1 = SplineSpace::new(4, 1).unwrap();
        assert_eq!(s1.eval_basis(0, 0.25f64), 1.0);
        assert!((s1.eval_basis(0, 0.125f64) - 0.5).abs() < 1e-15);
        assert_eq!(s1.eval_basis(0, 0.75f64), 0.0);
        // Wrap-around support.
        assert!((s1.eval_basis(3, 0.0f64) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn piece_polynomials_known_values() {
        let cubic = BsplinePieces::<f64>::new(3);
        assert!((cubic.eval(0, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((cubic.eval(1, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((cubic.eval(2, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!(cubic.eval(3, 1.0).abs() < 1e-15);
    }

    #[test]
    fn smoothness_at_knots() {
        // One-sided derivatives up to order d-1 agree at every knot.
        for d in 1..=5usize {
            let pc = BsplinePieces::<f64>::new(d);
            let deriv = |c: &[f64], order: usize, x: f64| -> f64 {
                let mut c = c.to_vec();
                for _ in 0..order {
                    c = c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect();
                    if c.is_empty() {
                        return 0.0;
                    }
                }
                horner(&c, x)
            };
            for order in 0..d {
                for p in 0..=d {
                    let left = if p == 0 { 0.0 } else { deriv(pc.piece(p - 1), order, 1.0) };
                    let right = deriv(pc.piece(p), order, 0.0);
                    assert!((left - right).abs() < 1e-10, "d={d} order={order} p={p}");
                }
                let last = deriv(pc.piece(d), order, 1.0);
                assert!(last.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fourier_coefficient_examples() {
        let s = SplineSpace::new(2, 0).unwrap();
        let c: Complex<f64> = s.basis_fourier_coeff(0, 1);
        let expected = Complex::new(0.0, -1.0 / std::f64::consts::PI);
        assert!((c - expected).norm() < 1e-15);
        for d in 0..4 {
            let s = SplineSpace::new(8, d).unwrap();
            for j in 0..8 {
                let c0: Complex<f64> = s.basis_fourier_coeff(j, 0);
                assert!((c0 - Complex::new(0.125, 0.0)).norm() < 1e-16);
            }
        }
    }

    /// High-order piecewise Gauss quadrature of ∫ χ_j(t) e^{-2πikt} dt.
    fn quadrature_coeff(space: SplineSpace, j: usize, k: i64) -> Complex<f64> {
        let rule = gauss_legendre::<f64>(20).unwrap();
        let n = space.n();
        let mut acc = Complex::new(0.0, 0.0);
        for cell in 0..n {
            let (a, b) = (cell as f64 / n as f64, (cell + 1) as f64 / n as f64);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let t = 0.5 * (a + b) + 0.5 * (b - a) * x;
                let v = space.eval_basis(j, t);
                acc += cis(-std::f64::consts::TAU * k as f64 * t) * (v * w * 0.5 * (b - a));
            }
        }
        acc
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let s = SplineSpace::new(8, 1).unwrap();
        let exact: Complex<f64> = s.basis_fourier_coeff(3, 5);
        assert!((exact - quadrature_coeff(s, 3, 5)).norm() < 1e-12);
        for d in [0usize, 2, 3] {
            let s = SplineSpace::new(6, d).unwrap();
            for (j, k) in [(0, 1), (2, -3), (5, 7), (1, 12), (4, -13)] {
                let exact: Complex<f64> = s.basis_fourier_coeff(j, k);
                assert!((exact - quadrature_coeff(s, j, k)).norm() < 1e-12, "d={d} j={j} k={k}");
            }
        }
    }

    #[test]
    fn fourier_decay_bound() {
        for d in 0..4usize {
            let n = 16;
            let s = SplineSpace::new(n, d).unwrap();
            for k in (n as i64 + 1)..(20 * n as i64) {
                let c: Complex<f64> = s.basis_fourier_coeff(3, k);
                let bound = (n as f64).powi(d as i32) / (std::f64::consts::PI * k as f64).powi(d as i32 + 1);
                assert!(c.norm() <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn function_evaluation() {
        let space = SplineSpace::new(8, 2).unwrap();
        let ones = SplineFunction::new(space, vec![Complex::new(1.0, 0.0); 8]).unwrap();
        for k in 0..20 {
            assert!((ones.eval(k as f64 / 19.3) - Complex::new(1.0, 0.0)).norm() < 1e-14);
        }
        let mut e0 = SplineFunction::<f64>::zero(space);
        e0.coeffs[0] = Complex::new(1.0, 0.0);
        for k in 0..20 {
            let t = k as f64 / 19.3;
            assert!((e0.eval(t).re - space.eval_basis(0, t)).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_spline_interpolates_grid_values() {
        let space = SplineSpace::new(10, 1).unwrap();
        let coeffs: Vec<Complex<f64>> = (0..10).map(|j| Complex::new((j * j) as f64 * 0.1 - 2.0, j as f64)).collect();
        let f = SplineFunction::new(space, coeffs.clone()).unwrap();
        for j in 0..10 {
            // Hat j peaks at (j+1)/N.
            let v = f.eval((j + 1) as f64 / 10.0);
            assert!((v - coeffs[j]).norm() < 1e-13);
            let mid = f.eval((j as f64 + 1.5) / 10.0);
            let nxt = coeffs[(j + 1) % 10];
            assert!((mid - (coeffs[j] + nxt) * 0.5).norm() < 1e-13);
        }
    }

    #[test]
    fn function_fourier_matches_basis_sum_and_constants() {
        let space = SplineSpace::new(12, 3).unwrap();
        let coeffs: Vec<Complex<f64>> = (0..12).map(|j| Complex::new((j as f64 * 0.7).sin(), (j as f64).cos())).collect();
        let f = SplineFunction::new(space, coeffs.clone()).unwrap();
        let fv = f.fourier(40);
        for k in -40i64..=40 {
            let direct: Complex<f64> = (0..12).map(|j| coeffs[j] * space.basis_fourier_coeff::<f64>(j, k)).sum();
            assert!((fv.get(k) - direct).norm() < 1e-13);
        }
        let ones = SplineFunction::new(space, vec![Complex::new(1.0, 0.0); 12]).unwrap().fourier(30);
        assert!((ones.get(0) - Complex::new(1.0, 0.0)).norm() < 1e-14);
        for k in 1..30i64 {
            // Constant function: every coefficient vanishes, including the k = N aliases.
            assert!(ones.get(k).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn dense_fft_oracle_for_cubic_spline() {
        let n = 16;
        let space = SplineSpace::new(n, 3).unwrap();
        let coeffs: Vec<Complex<f64>> = (0..n).map(|j| Complex::new((j as f64 * 1.3).cos(), (j as f64 * 0.4).sin())).collect();
        let f = SplineFunction::new(space, coeffs).unwrap();
        let q = 4096;
        let mut samples: Vec<Complex<f64>> = (0..q).map(|i| f.eval(i as f64 / q as f64)).collect();
        FftPlanner::new().plan_fft_forward(q).process(&mut samples);
        let exact = f.fourier(4 * q);
        for k in -64i64..=64 {
            // De-alias: the sampled DFT sums ĝ_{k + lq}.
            let alias: Complex<f64> = (-3i64..=3).map(|l| exact.get(k + l * q as i64)).sum();
            let approx = samples[k.rem_euclid(q as i64) as usize] / q as f64;
            assert!((approx - alias).norm() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn record_roundtrip() {
        let space = SplineSpace::new(5, 1).unwrap();
        let f = SplineFunction::new(space, (0..5).map(|j| Complex::new(j as f64, -0.5)).collect()).unwrap();
        let json = serde_json::to_string(&SplineRecord::from_spline(&f)).unwrap();
        assert!(json.contains("\"N\":5"));
        let back: SplineFunction<f64> = serde_json::from_str::<SplineRecord>(&json).unwrap().into_spline().unwrap();
        assert_eq!(back, f);
    }

    proptest! {
        #[test]
        fn partition_of_unity(d in 0usize..=5, n in 2usize..=64, x in 0.0f64..1.0) {
            let s = SplineSpace::new(n, d).unwrap();
            let total: f64 = (0..n).map(|j| s.eval_basis(j, x)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for j in 0..n {
                prop_assert!(s.eval_basis(j, x) >= -1e-15);
            }
        }
    }
}
