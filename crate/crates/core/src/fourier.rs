//! Truncated Fourier coefficient vectors, periodic Sobolev norms and the
//! discrete bilinear form on the collocation grid.

use std::ops::{Add, Sub};

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::analysis::PsiExpansion;
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};
use crate::splines::SplineFunction;

/// `[m]`: one at the origin, `|m|` elsewhere.
#[inline]
pub fn bracket(m: i64) -> f64 {
    if m == 0 {
        1.0
    } else {
        m.unsigned_abs() as f64
    }
}

#[inline]
pub(crate) fn bracket_pow<T: Real>(m: i64, p: T) -> T {
    if m == 0 {
        T::one()
    } else {
        T::of(m.unsigned_abs() as usize).powf(p)
    }
}

/// Coefficients `ĝ_m` for `|m| ≤ K`. Entries outside the window read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierVector<T> {
    bound: usize,
    entries: Vec<Complex<T>>,
    real: bool,
}

impl<T: Real> FourierVector<T> {
    pub fn zeros(bound: usize) -> Self {
        Self {
            bound,
            entries: vec![Complex::new(T::zero(), T::zero()); 2 * bound + 1],
            real: false,
        }
    }

    pub fn from_fn(bound: usize, mut f: impl FnMut(i64) -> Complex<T>) -> Self {
        let b = bound as i64;
        Self {
            bound,
            entries: (-b..=b).map(&mut f).collect(),
            real: false,
        }
    }

    /// A single mode `e^{2πimt}`.
    pub fn mode(m: i64, bound: usize) -> Self {
        let mut g = Self::zeros(bound.max(m.unsigned_abs() as usize));
        g.set(m, Complex::new(T::one(), T::zero()));
        g
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Marks the vector as the coefficients of a real function and enforces
    /// `ĝ_{-m} = conj(ĝ_m)` by averaging the two halves.
    pub fn into_real(mut self) -> Self {
        let b = self.bound as i64;
        for m in 0..=b {
            let avg = (self.get(m) + self.get(-m).conj()) * T::lit(0.5);
            self.entries[(b + m) as usize] = avg;
            self.entries[(b - m) as usize] = avg.conj();
        }
        self.real = true;
        self
    }

    pub fn get(&self, m: i64) -> Complex<T> {
        if m.unsigned_abs() as usize > self.bound {
            Complex::new(T::zero(), T::zero())
        } else {
            self.entries[(m + self.bound as i64) as usize]
        }
    }

    /// Sets `ĝ_m` (and `ĝ_{-m}` when the real flag is on).
    ///
    /// # Panics
    /// If `|m|` exceeds the bound.
    pub fn set(&mut self, m: i64, v: Complex<T>) {
        assert!(m.unsigned_abs() as usize <= self.bound, "mode {m} outside bound {}", self.bound);
        let b = self.bound as i64;
        self.entries[(m + b) as usize] = v;
        if self.real {
            self.entries[(b - m) as usize] = if m == 0 { Complex::new(v.re, T::zero()) } else { v.conj() };
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let b = self.bound as i64;
        self.entries.iter().enumerate().map(move |(i, &v)| (i as i64 - b, v))
    }

    /// `sqrt(Σ_{|m|≤K} [m]^{2s} |ĝ_m|²)`, truncated at `bound()`.
    pub fn sobolev_norm(&self, s: T) -> T {
        let two_s = s + s;
        self.iter()
            .map(|(m, v)| bracket_pow::<T>(m, two_s) * v.norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    /// Entrywise multiplier `ĝ_m ↦ σ(m) ĝ_m`.
    pub fn multiply(&self, sigma: impl Fn(i64) -> Complex<T>) -> Self {
        Self {
            bound: self.bound,
            entries: self.iter().map(|(m, v)| sigma(m) * v).collect(),
            real: false,
        }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.multiply(|_| c)
    }

    /// Copy with a different bound (zero padded or truncated).
    pub fn with_bound(&self, bound: usize) -> Self {
        let mut out = Self::from_fn(bound, |m| self.get(m));
        out.real = self.real;
        out
    }

    /// Value of the truncated series at `t`.
    pub fn eval(&self, t: T) -> Complex<T> {
        let base = cis(T::two_pi() * t);
        let b = self.bound as i64;
        // Horner in e^{2πit}, then shift by e^{-2πiKt}.
        let acc = self.entries.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &v| acc * base + v);
        acc * cis(-T::two_pi() * T::of_i(b) * wrap_t(t))
    }

    /// Samples of the truncated series on the grid `{i/M}` by folding the
    /// coefficients into `M` bins and one inverse DFT.
    pub fn sample(&self, m_points: usize) -> Vec<Complex<T>> {
        let mut bins = vec![Complex::new(T::zero(), T::zero()); m_points];
        for (m, v) in self.iter() {
            bins[m.rem_euclid(m_points as i64) as usize] += v;
        }
        FftPlanner::new().plan_fft_inverse(m_points).process(&mut bins);
        bins
    }
}

fn wrap_t<T: Real>(t: T) -> T {
    t - t.floor()
}

impl<T: Real> Add for &FourierVector<T> {
    type Output = FourierVector<T>;
    fn add(self, rhs: Self) -> FourierVector<T> {
        let b = self.bound.max(rhs.bound);
        let mut out = FourierVector::from_fn(b, |m| self.get(m) + rhs.get(m));
        out.real = self.real && rhs.real;
        out
    }
}

impl<T: Real> Sub for &FourierVector<T> {
    type Output = FourierVector<T>;
    fn sub(self, rhs: Self) -> FourierVector<T> {
        let b = self.bound.max(rhs.bound);
        let mut out = FourierVector::from_fn(b, |m| self.get(m) - rhs.get(m));
        out.real = self.real && rhs.real;
        out
    }
}

/// `⟨f, g⟩_M = (1/M) Σ conj(f_i) g_i`.
pub fn discrete_inner<T: Real>(f: &[Complex<T>], g: &[Complex<T>]) -> Result<Complex<T>> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch { left: f.len(), right: g.len() });
    }
    if f.is_empty() {
        return Err(Error::InvalidArgument("discrete inner product needs M >= 1".into()));
    }
    let sum: Complex<T> = f.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
    Ok(sum / T::of(f.len()))
}

/// Aliased coefficients `Σ_l ĝ_{m+lM}` for `m` in the window `(-M/2, M/2]`.
pub fn sample_fourier<T: Real>(samples: &[Complex<T>]) -> Result<FourierVector<T>> {
    let m_points = samples.len();
    if m_points < 2 {
        return Err(Error::InvalidArgument(format!("sample_fourier needs M >= 2, got {m_points}")));
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m_points).process(&mut buf);
    let scale = T::of(m_points).recip();
    let half = (m_points / 2) as i64;
    let lo = -((m_points as i64 - 1) / 2);
    let mut out = FourierVector::zeros(half as usize);
    for m in lo..=half {
        out.set(m, buf[m.rem_euclid(m_points as i64) as usize] * scale);
    }
    Ok(out)
}

/// `P_N g`: keeps `ĝ_μ` for `μ ∈ Λ_N`, attached to the `ψ_μ` basis of `S_N`.
pub fn project_pn<T: Real>(g: &FourierVector<T>, n: usize, degree: usize) -> Result<PsiExpansion<T>> {
    if g.bound() < n / 2 {
        return Err(Error::TruncationTooSmall { needed: n / 2, got: g.bound() });
    }
    PsiExpansion::from_lambda_fn(n, degree, |mu| g.get(mu))
}

/// A truncated norm together with the truncation used and a bound on the
/// neglected part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate<T> {
    pub value: T,
    pub bound: usize,
    pub tail_bound: T,
}

/// Default truncation for spline norms: `16 · max N`.
pub fn default_norm_bound(ns: &[usize]) -> usize {
    16 * ns.iter().copied().max().unwrap_or(1)
}

/// Bound on `(Σ_{|m|>K} [m]^{2s} |ĝ_m|²)^{1/2}` for a spline.
///
/// With `Y_r = (1/N)|X_r| |sin(πr/N)|^{d+1} (N/π)^{d+1}` one has
/// `|ĝ_m| = Y_{m mod N} |m|^{-(d+1)}`, so each block of `N` consecutive
/// frequencies contributes at most `Σ_r Y_r² (lN)^{-q}` with `q = 2(d+1) - 2s`.
pub fn spline_tail_bound<T: Real>(u: &SplineFunction<T>, s: T, bound: usize) -> T {
    let n = u.space.n();
    let d1 = u.space.degree() as i32 + 1;
    let nt = T::of(n);
    let dft = u.coefficient_dft();
    let ysum: T = dft
        .iter()
        .enumerate()
        .map(|(r, x)| {
            let y = x.norm() * (T::PI() * T::of(r) / nt).sin().abs().powi(d1) * (nt / T::PI()).powi(d1) / nt;
            y * y
        })
        .sum();
    let q = T::of(2 * d1 as usize) - s - s;
    if q <= T::one() {
        return T::infinity();
    }
    let l = T::of(((bound + 1) / n).max(1));
    let series = l.powf(-q) + l.powf(T::one() - q) / (q - T::one());
    (ysum * T::lit(2.0) * nt.powf(-q) * series).sqrt()
}

/// `‖u - v‖_s` from the closed-form Fourier coefficients of both splines.
///
/// Fails with [`Error::NormTail`] when the tail bound is not below 1% of the
/// computed norm, unless the norm itself is zero.
pub fn spline_error_norm<T: Real>(
    u: &SplineFunction<T>,
    v: &SplineFunction<T>,
    s: T,
    bound: usize,
) -> Result<NormEstimate<T>> {
    let du = u.fourier(bound);
    let dv = v.fourier(bound);
    let value = (&du - &dv).sobolev_norm(s);
    let tail_bound = spline_tail_bound(u, s, bound) + spline_tail_bound(v, s, bound);
    check_tail(value, tail_bound)?;
    Ok(NormEstimate { value, bound, tail_bound })
}

/// `‖u - g‖_s` for a spline and a truncated series whose neglected part is
/// known to vanish (or is accounted for by the caller).
pub fn spline_series_error_norm<T: Real>(
    u: &SplineFunction<T>,
    g: &FourierVector<T>,
    s: T,
    bound: usize,
) -> Result<NormEstimate<T>> {
    let du = u.fourier(bound);
    let value = (&du - &g.with_bound(bound)).sobolev_norm(s);
    let tail_bound = spline_tail_bound(u, s, bound);
    check_tail(value, tail_bound)?;
    Ok(NormEstimate { value, bound, tail_bound })
}

fn check_tail<T: Real>(value: T, tail: T) -> Result<()> {
    if value > T::zero() && tail >= T::lit(0.01) * value {
        return Err(Error::NormTail {
            tail: tail.to_f64().unwrap_or(f64::NAN),
            norm: value.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splines::SplineSpace;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn grid_mode(n: i64, m_points: usize) -> Vec<Complex<f64>> {
        (0..m_points).map(|i| cis(TAU * (n * i as i64).rem_euclid(m_points as i64) as f64 / m_points as f64)).collect()
    }

    #[test]
    fn bracket_values() {
        assert_eq!(bracket(0), 1.0);
        assert_eq!(bracket(-3), 3.0);
        assert_eq!(bracket(5), 5.0);
    }

    #[test]
    fn sobolev_norm_examples() {
        let mut g = FourierVector::<f64>::zeros(4);
        g.set(0, c(1.0, 0.0));
        assert_eq!(g.sobolev_norm(-3.0), 1.0);
        assert_eq!(g.sobolev_norm(2.5), 1.0);
        let mut g = FourierVector::<f64>::zeros(4);
        g.set(1, c(1.0, 0.0));
        g.set(-1, c(1.0, 0.0));
        assert!((g.sobolev_norm(1.0) - 2f64.sqrt()).abs() < 1e-15);
        let g = FourierVector::<f64>::mode(2, 4);
        assert!((g.sobolev_norm(-1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn real_flag_mirrors() {
        let mut g = FourierVector::<f64>::zeros(3).into_real();
        g.set(2, c(0.25, -0.1));
        assert_eq!(g.get(-2), c(0.25, 0.1));
        let h = FourierVector::from_fn(2, |m| c(m as f64, 1.0)).into_real();
        for m in 0..=2 {
            assert_eq!(h.get(-m), h.get(m).conj());
        }
    }

    #[test]
    fn discrete_inner_examples() {
        let ones = vec![c(1.0, 0.0); 7];
        assert!((discrete_inner(&ones, &ones).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let f = [c(1.0, 0.0), c(-1.0, 0.0)];
        let g = [c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(discrete_inner(&f, &g).unwrap(), c(0.0, 0.0));
        assert!(matches!(discrete_inner(&f, &ones), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn aliasing_orthogonality() {
        for m_points in [1usize, 2, 5, 8] {
            let range = 3 * m_points as i64;
            for n in -range..=range {
                let fnv = grid_mode(n, m_points);
                for p in -range..=range {
                    let v = discrete_inner(&fnv, &grid_mode(p, m_points)).unwrap();
                    let expect = if (p - n).rem_euclid(m_points as i64) == 0 { 1.0 } else { 0.0 };
                    assert!((v - c(expect, 0.0)).norm() < 1e-14, "M={m_points} n={n} p={p}");
                }
            }
        }
    }

    #[test]
    fn band_limited_inner_is_exact() {
        let m_points = 10;
        let f = FourierVector::from_fn(5, |m| if m == -5 { c(0.0, 0.0) } else { c((m as f64 * 0.3).cos(), m as f64 * 0.1) });
        let g = FourierVector::from_fn(5, |m| if m == -5 { c(0.0, 0.0) } else { c(1.0 / (1.0 + m.abs() as f64), -0.2) });
        let exact: Complex<f64> = f.iter().map(|(m, v)| v.conj() * g.get(m)).sum();
        let disc = discrete_inner(&f.sample(m_points), &g.sample(m_points)).unwrap();
        assert!((disc - exact).norm() < 1e-13);
    }

    #[test]
    fn sample_fourier_aliases() {
        let m_points = 8;
        let s = sample_fourier(&grid_mode(m_points as i64 + 1, m_points)).unwrap();
        assert!((s.get(1) - c(1.0, 0.0)).norm() < 1e-14);
        for m in -3..=4 {
            if m != 1 {
                assert!(s.get(m).norm() < 1e-14);
            }
        }
        let k = sample_fourier(&[c(1.0, 0.0); 6]).unwrap();
        assert!((k.get(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(k.iter().filter(|(m, _)| *m != 0).all(|(_, v)| v.norm() < 1e-15));
        // Upper edge of the window is M/2.
        let e = sample_fourier(&grid_mode(4, 8)).unwrap();
        assert!((e.get(4) - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(e.get(-4), c(0.0, 0.0));
    }

    #[test]
    fn sample_fourier_of_spline_matches_closed_form() {
        let space = SplineSpace::new(16, 1).unwrap();
        let f = SplineFunction::new(space, (0..16).map(|j| c((j as f64).sin(), 0.5 - j as f64 * 0.03)).collect()).unwrap();
        let m_points = 24;
        let samples: Vec<_> = (0..m_points).map(|i| f.eval(i as f64 / m_points as f64)).collect();
        let aliased = sample_fourier(&samples).unwrap();
        let lmax = 4000i64;
        let exact = f.fourier((lmax as usize + 1) * m_points);
        for m in -11..=12i64 {
            let sum: Complex<f64> = (-lmax..=lmax).map(|l| exact.get(m + l * m_points as i64)).sum();
            // |ĝ_k| ≤ C k^{-2}: the neglected aliases are below 2·C/(lmax·M).
            assert!((sum - aliased.get(m)).norm() < 1e-5, "m={m}");
        }
        // Cubic splines decay like k^{-4}, so a short alias sum is already exact to rounding.
        let cubic = SplineFunction::new(SplineSpace::new(16, 3).unwrap(), f.coeffs.clone()).unwrap();
        let samples: Vec<_> = (0..m_points).map(|i| cubic.eval(i as f64 / m_points as f64)).collect();
        let aliased = sample_fourier(&samples).unwrap();
        let lmax = 400i64;
        let exact = cubic.fourier((lmax as usize + 1) * m_points);
        for m in -11..=12i64 {
            let sum: Complex<f64> = (-lmax..=lmax).map(|l| exact.get(m + l * m_points as i64)).sum();
            assert!((sum - aliased.get(m)).norm() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn sample_and_eval_agree() {
        let g = FourierVector::from_fn(6, |m| c(1.0 / (1.0 + (m * m) as f64), (m as f64 * 0.2).sin()));
        let samples = g.sample(9);
        for (i, v) in samples.iter().enumerate() {
            assert!((g.eval(i as f64 / 9.0) - v).norm() < 1e-13);
        }
    }

    #[test]
    fn projection_examples() {
        let g = FourierVector::from_fn(4, |m| c(m as f64, 1.0));
        let p = project_pn(&g, 8, 1).unwrap();
        let back = p.to_fourier(4);
        for mu in -3..=4 {
            assert!((back.get(mu) - g.get(mu)).norm() < 1e-14);
        }
        let single = FourierVector::<f64>::mode(8, 8);
        let p = project_pn(&single, 8, 1).unwrap();
        assert!(p.coeffs().iter().all(|v| v.norm() == 0.0));
        assert!(matches!(project_pn(&FourierVector::<f64>::zeros(2), 8, 1), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn projection_error_rate() {
        // ‖f - P_N f‖_p ≤ C N^{p-q} ‖f‖_q for f with ĝ_m = [m]^{-q-0.6}.
        let (p, q, d) = (-1.0, 1.0, 1usize);
        let kmax = 1 << 15;
        let f = FourierVector::from_fn(kmax, |m| c(bracket(m).powf(-q - 0.6), 0.0));
        let ns = [8usize, 16, 32, 64, 128];
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let pf = project_pn(&f, n, d).unwrap().to_fourier(kmax);
                (&f - &pf).sobolev_norm(p)
            })
            .collect();
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope - (p - q)).abs() < 0.2, "slope {slope}");
    }

    fn sine_interpolant(n: usize) -> SplineFunction<f64> {
        let space = SplineSpace::new(n, 1).unwrap();
        // Hat j peaks at (j+1)/N.
        SplineFunction::new(space, (0..n).map(|j| c((TAU * (j + 1) as f64 / n as f64).sin(), 0.0)).collect()).unwrap()
    }

    #[test]
    fn spline_error_norm_examples() {
        let u = sine_interpolant(16);
        let zero = spline_error_norm(&u, &u, -2.0, 256).unwrap();
        assert_eq!(zero.value, 0.0);
        let space = SplineSpace::new(16, 1).unwrap();
        let base = SplineFunction::<f64>::zero(space);
        let hat = |eps: f64| {
            let mut h = base.clone();
            h.coeffs[3] = c(eps, 0.0);
            h
        };
        let a = spline_error_norm(&hat(1e-3), &base, -2.0, 256).unwrap().value;
        let b = spline_error_norm(&hat(2e-3), &base, -2.0, 256).unwrap().value;
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spline_error_norm_dense_fft_oracle() {
        let (u, v) = (sine_interpolant(16), sine_interpolant(32));
        let est = spline_error_norm(&u, &v, -2.0, 512).unwrap();
        let q = 1usize << 16;
        let mut samples: Vec<Complex<f64>> = (0..q).map(|i| {
            let t = i as f64 / q as f64;
            u.eval(t) - v.eval(t)
        }).collect();
        FftPlanner::new().plan_fft_forward(q).process(&mut samples);
        let half = (q / 2) as i64;
        let dense: f64 = (-half + 1..=half)
            .map(|m| bracket(m).powi(-4) * (samples[m.rem_euclid(q as i64) as usize] / q as f64).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!((est.value - dense).abs() < 1e-8, "{} vs {dense}", est.value);
        assert!(est.tail_bound < 0.01 * est.value);
    }

    #[test]
    fn tail_bound_is_an_upper_bound() {
        let u = sine_interpolant(8);
        let k = 64;
        let big = u.fourier(1 << 14);
        let actual: f64 = big.iter().filter(|(m, _)| m.unsigned_abs() as usize > k).map(|(m, v)| bracket(m).powi(-2) * v.norm_sqr()).sum::<f64>().sqrt();
        let bound = spline_tail_bound(&u, -1.0, k);
        assert!(actual <= bound, "{actual} > {bound}");
        assert!(bound < 10.0 * actual + 1e-300);
    }

    #[test]
    fn norm_tail_error_reported() {
        let space = SplineSpace::new(16, 0).unwrap();
        let mut u = SplineFunction::<f64>::zero(space);
        u.coeffs[0] = c(1.0, 0.0);
        let v = SplineFunction::zero(space);
        assert!(matches!(spline_error_norm(&u, &v, 0.0, 16), Err(Error::NormTail { .. })));
    }

    #[test]
    fn f32_norms() {
        let g = FourierVector::<f32>::mode(2, 4);
        assert!((g.sobolev_norm(-1.0) - 0.5).abs() < 1e-7);
        let _ = PI;
    }

    proptest! {
        #[test]
        fn inner_sesquilinear(
            re in proptest::collection::vec(-1.0f64..1.0, 12),
            im in proptest::collection::vec(-1.0f64..1.0, 12),
            a in -2.0f64..2.0, b in -2.0f64..2.0,
        ) {
            let f: Vec<_> = re[..6].iter().zip(&im[..6]).map(|(x, y)| c(*x, *y)).collect();
            let g: Vec<_> = re[6..].iter().zip(&im[6..]).map(|(x, y)| c(*x, *y)).collect();
            let lam = c(a, b);
            let fl: Vec<_> = f.iter().map(|v| v * lam).collect();
            let gl: Vec<_> = g.iter().map(|v| v * lam).collect();
            let base = discrete_inner(&f, &g).unwrap();
            prop_assert!((discrete_inner(&fl, &g).unwrap() - base * lam.conj()).norm() < 1e-12);
            prop_assert!((discrete_inner(&f, &gl).unwrap() - base * lam).norm() < 1e-12);
            let ff = discrete_inner(&f, &f).unwrap();
            prop_assert!(ff.re >= 0.0 && ff.im.abs() < 1e-15);
        }

        #[test]
        fn norm_monotone_in_s(vals in proptest::collection::vec(0.0f64..1.0, 8), s in -3.0f64..3.0, ds in 0.0f64..2.0) {
            let g = FourierVector::from_fn(4, |m| if m == 0 { c(0.0, 0.0) } else { c(vals[(m + 4) as usize % 8], 0.0) });
            prop_assert!(g.sobolev_norm(s) <= g.sobolev_norm(s + ds) * (1.0 + 1e-12));
        }
    }
}
