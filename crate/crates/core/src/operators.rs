//! Boundary integral operators and the matrix-entry evaluator.
//!
//! All operators act on densities in parameter space: `(Vu)(s)` for
//! `u: [0, 1) -> C`. The single-layer operator is
//! `(Su)(s) = (1/2π) ∫ log|z(t) - z(s)| u(t) dt`, split as the circle log
//! convolution plus a smooth remainder. The adjoint double-layer kernel is
//! `(1/2π) n(s)·(z(t) - z(s)) / (|z'(s)| |z(t) - z(s)|²)`.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::curves::{ParametricCurve, Vec2};
use crate::error::{Error, Result};
use crate::fourier::{bracket_pow, FourierVector};
use crate::quadrature::{
    gauss_legendre, log_moments, log_sine_remainder, singular_set, taylor_shift, GaussRule, QuadratureConfig,
    MAX_GAUSS_ORDER,
};
use crate::scalar::{cis, Real};
use crate::splines::{BsplinePieces, SplineSpace};

/// Below this parameter distance kernels switch to their diagonal limit.
pub const DIAGONAL_THRESHOLD: f64 = 1e-8;

/// Fourier elements `k_{mn}` of a compact perturbation, `|m|, |n| ≤ B`.
///
/// `𝒦` maps `e^{2πim·}` to `Σ_n k_{mn} e^{2πin·}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationMatrix<T> {
    bound: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> PerturbationMatrix<T> {
    pub fn zeros(bound: usize) -> Self {
        let w = 2 * bound + 1;
        Self {
            bound,
            entries: vec![Complex::new(T::zero(), T::zero()); w * w],
        }
    }

    pub fn from_fn(bound: usize, f: impl Fn(i64, i64) -> Complex<T>) -> Self {
        let b = bound as i64;
        let mut out = Self::zeros(bound);
        for m in -b..=b {
            for n in -b..=b {
                out.set(m, n, f(m, n));
            }
        }
        out
    }

    /// `k_{mn} = amp · e^{-rate(|m| + |n|)}`.
    pub fn smooth_synthetic(bound: usize, amp: T, rate: T) -> Self {
        Self::from_fn(bound, |m, n| {
            Complex::new(amp * (-rate * T::of_i(m.abs() + n.abs())).exp(), T::zero())
        })
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    fn index(&self, m: i64, n: i64) -> Option<usize> {
        let b = self.bound as i64;
        if m.abs() > b || n.abs() > b {
            return None;
        }
        Some(((m + b) * (2 * b + 1) + (n + b)) as usize)
    }

    pub fn get(&self, m: i64, n: i64) -> Complex<T> {
        self.index(m, n).map_or(Complex::new(T::zero(), T::zero()), |i| self.entries[i])
    }

    /// # Panics
    /// If `(m, n)` is outside the bound.
    pub fn set(&mut self, m: i64, n: i64, v: Complex<T>) {
        let i = self.index(m, n).expect("index within perturbation bound");
        self.entries[i] = v;
    }

    /// Nonzero entries as `(m, n, k_{mn})`.
    pub fn nonzeros(&self) -> impl Iterator<Item = (i64, i64, Complex<T>)> + '_ {
        let b = self.bound as i64;
        let w = 2 * b + 1;
        self.entries.iter().enumerate().filter(|(_, v)| **v != Complex::new(T::zero(), T::zero())).map(move |(i, v)| {
            let i = i as i64;
            (i / w - b, i % w - b, *v)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.nonzeros().next().is_none()
    }

    /// Matrix of `𝒦*`: `k*_{mn} = conj(k_{nm})`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.bound);
        for (m, n, v) in self.nonzeros() {
            out.set(n, m, v.conj());
        }
        out
    }

    /// `(𝒦g)_n = Σ_m k_{mn} ĝ_m`.
    pub fn apply(&self, g: &FourierVector<T>) -> FourierVector<T> {
        let mut out = FourierVector::zeros(self.bound);
        for (m, n, v) in self.nonzeros() {
            let cur = out.get(n);
            out.set(n, cur + v * g.get(m));
        }
        out
    }

    /// `(𝒦*g)_n = Σ_m conj(k_{nm}) ĝ_m`.
    pub fn apply_adjoint(&self, g: &FourierVector<T>) -> FourierVector<T> {
        let mut out = FourierVector::zeros(self.bound);
        for (m, n, v) in self.nonzeros() {
            let cur = out.get(m);
            out.set(m, cur + v.conj() * g.get(n));
        }
        out
    }

    /// `max |k_{mn}| (1+|m|)^p (1+|n|)^q`, the smallest admissible `C_{p,q}`.
    pub fn decay_constant(&self, p: T, q: T) -> T {
        self.nonzeros()
            .map(|(m, n, v)| v.norm() * T::of_i(1 + m.abs()).powf(p) * T::of_i(1 + n.abs()).powf(q))
            .fold(T::zero(), T::max)
    }

    pub fn satisfies_decay(&self, p: T, q: T, c: T) -> bool {
        self.decay_constant(p, q) <= c
    }

    /// Plain-text layout: the bound `B`, then `(2B+1)²` lines `re im`, row-major in `(m, n)`.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.bound);
        for v in &self.entries {
            let _ = writeln!(s, "{:e} {:e}", v.re, v.im);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let bound: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty perturbation matrix file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad bound: {e}")))?;
        let count = (2 * bound + 1) * (2 * bound + 1);
        let mut entries = Vec::with_capacity(count);
        let mut num = |what: &str| -> Result<T> {
            let tok = tokens.next().ok_or_else(|| Error::Parse(format!("expected {count} entries, file ended at {what}")))?;
            let v: f64 = tok.parse().map_err(|e| Error::Parse(format!("bad number {tok:?}: {e}")))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite entry {tok:?}")));
            }
            Ok(T::lit(v))
        };
        for i in 0..count {
            let re = num(&format!("entry {i}"))?;
            let im = num(&format!("entry {i}"))?;
            entries.push(Complex::new(re, im));
        }
        if tokens.next().is_some() {
            return Err(Error::Parse("trailing data after perturbation matrix".into()));
        }
        Ok(Self { bound, entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// The operator `V` of the equation `Vu = f`.
#[derive(Debug, Clone)]
pub enum BoundaryOperator<T> {
    /// Fourier multiplier `ĝ_m ↦ C [m]^{2α} ĝ_m`.
    V0 { alpha: T, c: Complex<T> },
    /// `𝒮` on the given curve.
    SingleLayer { curve: ParametricCurve<T> },
    /// `-ℐ/2 + 𝒟*` on the given curve.
    AdjDoubleLayerShifted { curve: ParametricCurve<T> },
    /// `V₀ + 𝒦` with `𝒦` given by its Fourier elements.
    Synthetic {
        alpha: T,
        c: Complex<T>,
        kmat: Arc<PerturbationMatrix<T>>,
    },
}

impl<T: Real> BoundaryOperator<T> {
    /// `2α`: the operator maps `H^{p+α}` to `H^{p-α}`.
    pub fn order_2alpha(&self) -> T {
        match self {
            Self::V0 { alpha, .. } | Self::Synthetic { alpha, .. } => *alpha + *alpha,
            Self::SingleLayer { .. } => -T::one(),
            Self::AdjDoubleLayerShifted { .. } => T::zero(),
        }
    }

    pub fn alpha(&self) -> T {
        self.order_2alpha() * T::lit(0.5)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::V0 { c, .. } | Self::Synthetic { c, .. } if c.norm() == T::zero() => {
                Err(Error::InvalidArgument("multiplier constant C must be nonzero".into()))
            }
            _ => Ok(()),
        }
    }

    /// `d > 2α`.
    pub fn check_consistency(&self, degree: usize) -> Result<()> {
        if T::of(degree) > self.order_2alpha() {
            Ok(())
        } else {
            Err(Error::ConsistencyViolation {
                degree,
                alpha: self.alpha().to_f64().unwrap_or(f64::NAN),
            })
        }
    }
}

/// `ĝ_m ↦ C [m]^{2α} ĝ_m`.
pub fn apply_v0<T: Real>(alpha: T, c: Complex<T>, g: &FourierVector<T>) -> FourierVector<T> {
    let two_alpha = alpha + alpha;
    g.multiply(|m| c * bracket_pow(m, two_alpha))
}

/// `(1/2π) log(|z(t) - z(s)| / |2 sin π(t-s)|)`, the smooth part of the
/// single-layer kernel.
pub fn kernel_smooth_single_layer<T: Real>(curve: &ParametricCurve<T>, s: T, t: T) -> T {
    let h = centered(t - s);
    let inv = T::two_pi().recip();
    if h.abs() < T::lit(DIAGONAL_THRESHOLD) {
        return inv * (curve.d1(s).norm() / T::two_pi()).ln();
    }
    let chord = curve.chord(s, h).norm();
    inv * (chord / (T::lit(2.0) * (T::PI() * h).sin()).abs()).ln()
}

/// `(1/2π) n(s)·(z(t) - z(s)) / (|z'(s)| |z(t) - z(s)|²)`.
pub fn kernel_adj_double_layer<T: Real>(curve: &ParametricCurve<T>, s: T, t: T) -> Result<T> {
    let normal = curve.outward_normal(s)?;
    let speed = curve.d1(s).norm();
    Ok(adj_double_kernel(curve, s, centered(t - s), normal, speed))
}

fn adj_double_kernel<T: Real>(curve: &ParametricCurve<T>, s: T, h: T, normal: Vec2<T>, speed: T) -> T {
    let inv = T::two_pi().recip();
    if h.abs() < T::lit(DIAGONAL_THRESHOLD) {
        let dd = curve.d2(s);
        return inv * normal.dot(dd) / (T::lit(2.0) * speed.powi(3));
    }
    let chord = curve.chord(s, h);
    inv * normal.dot(chord) / (speed * chord.norm_sqr())
}

/// Representative of `x` mod 1 in `[-1/2, 1/2)`.
#[inline]
pub(crate) fn centered<T: Real>(x: T) -> T {
    x - (x + T::lit(0.5)).floor()
}

/// Quadrature nodes of one grid cell.
#[derive(Debug, Clone)]
struct CellNodes<T> {
    a: T,
    b: T,
    t: Vec<T>,
    w: Vec<T>,
    /// `piece[p][k] = P_p(ξ_k)`.
    piece: Vec<Vec<T>>,
    z: Vec<Vec2<T>>,
}

/// Per-row data of the evaluation point.
struct RowPoint<T> {
    s: T,
    z: Vec2<T>,
    normal: Vec2<T>,
    speed: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KernelKind {
    AdjDouble,
    SingleLayer,
    LogSine,
}

/// Evaluates `(Vχ_j)(s)` for all `j` at a given `s`, reusing cell quadrature
/// data across rows.
pub struct AssemblyContext<'a, T: Real> {
    op: &'a BoundaryOperator<T>,
    space: SplineSpace,
    q: QuadratureConfig<T>,
    pieces: BsplinePieces<T>,
    cells: Vec<CellNodes<T>>,
    panels: usize,
    rule: GaussRule<T>,
    /// Precomputed `C [m]^{2α} c_d(m)` for the series path, indexed by `m + K`.
    series: Option<Vec<Complex<T>>>,
    /// `k_{mn} c_d(m)` for the perturbation part.
    perturb: Vec<(i64, i64, Complex<T>)>,
}

impl<'a, T: Real> AssemblyContext<'a, T> {
    pub fn new(op: &'a BoundaryOperator<T>, space: SplineSpace, q: QuadratureConfig<T>) -> Result<Self> {
        q.validate()?;
        op.validate()?;
        op.check_consistency(space.degree())?;
        let n = space.n();
        let d = space.degree();
        let pieces = BsplinePieces::<T>::new(d);
        let rule = gauss_legendre::<T>(q.gauss_order)?;
        let panels = q.panels_per_cell(n);
        let curve = match op {
            BoundaryOperator::SingleLayer { curve } | BoundaryOperator::AdjDoubleLayerShifted { curve } => Some(curve),
            _ => None,
        };
        let nt = T::of(n);
        let cells = (0..n)
            .map(|c| {
                let a = T::of(c) / nt;
                let b = T::of(c + 1) / nt;
                let nodes = rule.composite(a, b, panels);
                let t: Vec<T> = nodes.iter().map(|p| p.0).collect();
                let w: Vec<T> = nodes.iter().map(|p| p.1).collect();
                let piece = (0..=d)
                    .map(|p| t.iter().map(|&tk| pieces.eval(p, tk * nt - T::of(c))).collect())
                    .collect();
                let z = match curve {
                    Some(cv) => t.iter().map(|&tk| cv.point(tk)).collect(),
                    None => Vec::new(),
                };
                CellNodes { a, b, t, w, piece, z }
            })
            .collect();

        let (series, perturb) = match op {
            BoundaryOperator::V0 { alpha, c } => (series_weights(*alpha, *c, space, &q)?, Vec::new()),
            BoundaryOperator::Synthetic { alpha, c, kmat } => {
                let pert = kmat
                    .nonzeros()
                    .map(|(m, nn, v)| (m, nn, v * space.shape_coeff::<T>(m)))
                    .filter(|(_, _, v)| *v != Complex::new(T::zero(), T::zero()))
                    .collect();
                (series_weights(*alpha, *c, space, &q)?, pert)
            }
            _ => (None, Vec::new()),
        };
        Ok(Self { op, space, q, pieces, cells, panels, rule, series, perturb })
    }

    pub fn space(&self) -> SplineSpace {
        self.space
    }

    pub fn config(&self) -> &QuadratureConfig<T> {
        &self.q
    }

    /// `χ_j(s)` for the `d+1` basis functions nonzero at `s`, as `(j, value)`.
    fn basis_at(&self, s: T) -> impl Iterator<Item = (usize, T)> + '_ {
        let n = self.space.n();
        let nt = T::of(n);
        let x = (nt * s).rem_euclid(nt);
        let cell = x.floor();
        let xi = x - cell;
        let cell = cell.to_usize().unwrap_or(0).min(n - 1);
        (0..=self.space.degree()).map(move |p| ((cell + n * (p + 1) - p) % n, self.pieces.eval(p, xi)))
    }

    fn row_point(&self, s: T) -> Result<RowPoint<T>> {
        match self.op {
            BoundaryOperator::SingleLayer { curve } | BoundaryOperator::AdjDoubleLayerShifted { curve } => {
                Ok(RowPoint {
                    s,
                    z: curve.point(s),
                    normal: curve.outward_normal(s)?,
                    speed: curve.d1(s).norm(),
                })
            }
            _ => Ok(RowPoint { s, z: Vec2::default(), normal: Vec2::default(), speed: T::one() }),
        }
    }

    /// Moments `∫_cell k(s,t) P_p(ξ) dt`, `p = 0..=d`.
    fn cell_moments(&self, kind: KernelKind, pt: &RowPoint<T>, c: usize, out: &mut [T]) {
        let cell = &self.cells[c];
        let s = pt.s;
        let width = cell.b - cell.a;
        let mid = (cell.a + cell.b) * T::lit(0.5);
        let near = centered(s - mid).abs() <= width * T::lit(1.5);
        let inv = T::two_pi().recip();
        out.iter_mut().for_each(|v| *v = T::zero());
        let curve = match self.op {
            BoundaryOperator::SingleLayer { curve } | BoundaryOperator::AdjDoubleLayerShifted { curve } => Some(curve),
            _ => None,
        };
        if !near {
            for k in 0..cell.t.len() {
                let val = match kind {
                    KernelKind::AdjDouble => {
                        let diff = cell.z[k] - pt.z;
                        inv * pt.normal.dot(diff) / (pt.speed * diff.norm_sqr())
                    }
                    KernelKind::SingleLayer => inv * (cell.z[k] - pt.z).norm().ln(),
                    KernelKind::LogSine => inv * (T::lit(2.0) * (T::PI() * (cell.t[k] - s)).sin()).abs().ln(),
                };
                let wv = cell.w[k] * val;
                for (p, o) in out.iter_mut().enumerate() {
                    *o += wv * cell.piece[p][k];
                }
            }
            return;
        }
        match kind {
            KernelKind::AdjDouble => {
                let cv = curve.expect("curve operator");
                for k in 0..cell.t.len() {
                    let h = centered(cell.t[k] - s);
                    let wv = cell.w[k] * adj_double_kernel(cv, s, h, pt.normal, pt.speed);
                    for (p, o) in out.iter_mut().enumerate() {
                        *o += wv * cell.piece[p][k];
                    }
                }
            }
            KernelKind::SingleLayer | KernelKind::LogSine => {
                // Shift s to the periodic image closest to the cell.
                let s_img = mid + centered(s - mid);
                let set = singular_set(cell.a, cell.b, s_img);
                for k in 0..cell.t.len() {
                    let mut val = inv * log_sine_remainder(cell.t[k] - s_img, &set);
                    if kind == KernelKind::SingleLayer {
                        val += kernel_smooth_single_layer(curve.expect("curve operator"), s, cell.t[k]);
                    }
                    let wv = cell.w[k] * val;
                    for (p, o) in out.iter_mut().enumerate() {
                        *o += wv * cell.piece[p][k];
                    }
                }
                let log_w = width.ln();
                for (p, o) in out.iter_mut().enumerate() {
                    let poly = self.pieces.piece(p);
                    let int_p: T = poly.iter().enumerate().map(|(k, c)| *c / T::of(k + 1)).sum();
                    let mut sing = T::zero();
                    for &kk in &set {
                        let tc = (s_img + T::of_i(kk) - cell.a) / width;
                        let shifted = taylor_shift(poly, tc);
                        let mom = log_moments(-tc, T::one() - tc, shifted.len() - 1);
                        let inner: T = shifted.iter().zip(&mom).map(|(a, b)| *a * *b).sum();
                        sing += width * (log_w * int_p + inner);
                    }
                    *o += inv * sing;
                }
            }
        }
    }

    /// `Σ_p mom[(j+p) mod N][p]` for every `j`, from per-cell moments.
    fn integral_row(&self, kind: KernelKind, pt: &RowPoint<T>) -> Vec<T> {
        let n = self.space.n();
        let d1 = self.space.degree() + 1;
        let mut moments = vec![T::zero(); n * d1];
        for c in 0..n {
            self.cell_moments(kind, pt, c, &mut moments[c * d1..(c + 1) * d1]);
        }
        (0..n).map(|j| (0..d1).map(|p| moments[((j + p) % n) * d1 + p]).sum()).collect()
    }

    fn integral_entry(&self, kind: KernelKind, pt: &RowPoint<T>, j: usize) -> T {
        let n = self.space.n();
        let d1 = self.space.degree() + 1;
        let mut buf = vec![T::zero(); d1];
        (0..d1)
            .map(|p| {
                self.cell_moments(kind, pt, (j + p) % n, &mut buf);
                buf[p]
            })
            .sum()
    }

    /// Row `[(Vχ_0)(s), ..., (Vχ_{N-1})(s)]`.
    pub fn row(&self, s: T) -> Result<Vec<Complex<T>>> {
        let n = self.space.n();
        let zero = Complex::new(T::zero(), T::zero());
        let pt = self.row_point(s)?;
        let mut out = vec![zero; n];
        match self.op {
            BoundaryOperator::AdjDoubleLayerShifted { .. } => {
                let integ = self.integral_row(KernelKind::AdjDouble, &pt);
                for (o, v) in out.iter_mut().zip(integ) {
                    *o = Complex::new(v, T::zero());
                }
                for (j, v) in self.basis_at(s) {
                    out[j] -= Complex::new(v * T::lit(0.5), T::zero());
                }
            }
            BoundaryOperator::SingleLayer { .. } => {
                let integ = self.integral_row(KernelKind::SingleLayer, &pt);
                for (o, v) in out.iter_mut().zip(integ) {
                    *o = Complex::new(v, T::zero());
                }
            }
            BoundaryOperator::V0 { alpha, c } | BoundaryOperator::Synthetic { alpha, c, .. } => {
                self.v0_row(*alpha, *c, &pt, &mut out);
                if !self.perturb.is_empty() {
                    let pert = self.perturbation_row(s);
                    for (o, p) in out.iter_mut().zip(pert) {
                        *o += p;
                    }
                }
            }
        }
        Ok(out)
    }

    fn v0_row(&self, alpha: T, c: Complex<T>, pt: &RowPoint<T>, out: &mut [Complex<T>]) {
        let n = self.space.n();
        if alpha == T::zero() {
            for (j, v) in self.basis_at(pt.s) {
                out[j] = c * v;
            }
        } else if alpha == T::lit(-0.5) {
            let integ = self.integral_row(KernelKind::LogSine, pt);
            let mean = T::of(n).recip();
            let four_pi = T::lit(4.0) * T::PI();
            for (o, v) in out.iter_mut().zip(integ) {
                *o = c * (mean - four_pi * v);
            }
        } else {
            let w = self.series.as_ref().expect("series weights for generic alpha");
            let k = (w.len() / 2) as i64;
            let mut bins = vec![Complex::new(T::zero(), T::zero()); n];
            for m in -k..=k {
                bins[m.rem_euclid(n as i64) as usize] += w[(m + k) as usize] * cis(T::two_pi() * T::of_i(m) * pt.s);
            }
            FftPlanner::new().plan_fft_forward(n).process(&mut bins);
            out.copy_from_slice(&bins);
        }
    }

    fn perturbation_row(&self, s: T) -> Vec<Complex<T>> {
        let n = self.space.n();
        let mut bins = vec![Complex::new(T::zero(), T::zero()); n];
        let b = self.perturb.iter().map(|e| e.1.abs()).max().unwrap_or(0);
        let phase: Vec<Complex<T>> = (-b..=b).map(|nn| cis(T::two_pi() * T::of_i(nn) * s)).collect();
        for &(m, nn, v) in &self.perturb {
            bins[m.rem_euclid(n as i64) as usize] += v * phase[(nn + b) as usize];
        }
        FftPlanner::new().plan_fft_forward(n).process(&mut bins);
        bins
    }

    /// Single entry `(Vχ_j)(s)`.
    pub fn entry(&self, j: usize, s: T) -> Result<Complex<T>> {
        let n = self.space.n();
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j as i64, what: "spline basis" });
        }
        let pt = self.row_point(s)?;
        let local = |s: T| self.basis_at(s).find(|(jj, _)| *jj == j).map_or(T::zero(), |(_, v)| v);
        let val = match self.op {
            BoundaryOperator::AdjDoubleLayerShifted { .. } => {
                Complex::new(self.integral_entry(KernelKind::AdjDouble, &pt, j) - local(s) * T::lit(0.5), T::zero())
            }
            BoundaryOperator::SingleLayer { .. } => {
                Complex::new(self.integral_entry(KernelKind::SingleLayer, &pt, j), T::zero())
            }
            BoundaryOperator::V0 { alpha, c } | BoundaryOperator::Synthetic { alpha, c, .. } => {
                let base = if *alpha == T::zero() {
                    *c * local(s)
                } else if *alpha == T::lit(-0.5) {
                    let v = self.integral_entry(KernelKind::LogSine, &pt, j);
                    *c * (T::of(n).recip() - T::lit(4.0) * T::PI() * v)
                } else {
                    let w = self.series.as_ref().expect("series weights");
                    let k = (w.len() / 2) as i64;
                    (-k..=k)
                        .map(|m| {
                            let red = (m * j as i64).rem_euclid(n as i64);
                            w[(m + k) as usize]
                                * cis(T::two_pi() * (T::of_i(m) * s - T::of_i(red) / T::of(n)))
                        })
                        .sum()
                };
                let pert: Complex<T> = self
                    .perturb
                    .iter()
                    .map(|&(m, nn, v)| {
                        let red = (m * j as i64).rem_euclid(n as i64);
                        v * cis(T::two_pi() * (T::of_i(nn) * s - T::of_i(red) / T::of(n)))
                    })
                    .sum();
                if self.perturb.is_empty() {
                    base
                } else {
                    base + pert
                }
            }
        };
        Ok(val)
    }

    /// Gauss panels per spline cell.
    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn rule_order(&self) -> usize {
        self.rule.order()
    }
}

/// Weights `C [m]^{2α} c_d(m)` for `|m| ≤ K_op`, or `None` on the exact paths
/// (`α ∈ {0, -1/2}`). Fails when the analytic tail exceeds `tol`.
fn series_weights<T: Real>(
    alpha: T,
    c: Complex<T>,
    space: SplineSpace,
    q: &QuadratureConfig<T>,
) -> Result<Option<Vec<Complex<T>>>> {
    if alpha == T::zero() || alpha == T::lit(-0.5) {
        return Ok(None);
    }
    let tail = v0_series_tail(alpha, c.norm(), space, q.k_op);
    if !(tail <= q.tol) {
        return Err(Error::QuadratureTolerance {
            estimate: tail.to_f64().unwrap_or(f64::INFINITY),
            tol: q.tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let k = q.k_op as i64;
    let two_alpha = alpha + alpha;
    Ok(Some((-k..=k).map(|m| c * bracket_pow(m, two_alpha) * space.shape_coeff::<T>(m)).collect()))
}

/// `2|C| N^d / π^{d+1} · K^{2α-d} / (d - 2α)`.
pub fn v0_series_tail<T: Real>(alpha: T, c_abs: T, space: SplineSpace, k: usize) -> T {
    let d = T::of(space.degree());
    let gap = d - alpha - alpha;
    T::lit(2.0) * c_abs * T::of(space.n()).powf(d) / T::PI().powf(d + T::one()) * T::of(k.max(1)).powf(-gap) / gap
}

/// `(Vχ_j)(s)` with an order-doubling error estimate checked against `q.tol`.
pub fn apply_to_spline_at<T: Real>(
    op: &BoundaryOperator<T>,
    space: SplineSpace,
    j: usize,
    s: T,
    q: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    let ctx = AssemblyContext::new(op, space, *q)?;
    let v = ctx.entry(j, s)?;
    if matches!(op, BoundaryOperator::SingleLayer { .. } | BoundaryOperator::AdjDoubleLayerShifted { .. })
        || ctx.series.is_none()
    {
        let fine = QuadratureConfig { gauss_order: (2 * q.gauss_order).min(MAX_GAUSS_ORDER), ..*q };
        let check = AssemblyContext::new(op, space, fine)?.entry(j, s)?;
        let est = (check - v).norm();
        if est > q.tol {
            return Err(Error::QuadratureTolerance {
                estimate: est.to_f64().unwrap_or(f64::NAN),
                tol: q.tol.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(v)
}

/// `k_{mn} = ∫∫ e^{-2πins} k(s,t) e^{2πimt} dt ds` of the operator's compact
/// part, by a tensor trapezoid rule doubled until two levels agree to `q.tol`.
pub fn operator_fourier_element<T: Real>(
    op: &BoundaryOperator<T>,
    m: i64,
    n: i64,
    q: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    let kernel: Box<dyn Fn(T, T) -> T + '_> = match op {
        BoundaryOperator::V0 { .. } => return Ok(Complex::new(T::zero(), T::zero())),
        BoundaryOperator::Synthetic { kmat, .. } => return Ok(kmat.get(m, n)),
        BoundaryOperator::SingleLayer { curve } => Box::new(move |s, t| kernel_smooth_single_layer(curve, s, t)),
        BoundaryOperator::AdjDoubleLayerShifted { curve } => {
            curve.outward_normal(T::zero())?;
            Box::new(move |s, t| {
                let normal = curve.outward_normal(s).unwrap_or_default();
                adj_double_kernel(curve, s, centered(t - s), normal, curve.d1(s).norm())
            })
        }
    };
    let tensor = |qn: usize| -> Complex<T> {
        let h = T::of(qn).recip();
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in 0..qn {
            let s = T::of(a) * h;
            let inner: Complex<T> = (0..qn)
                .map(|b| {
                    let t = T::of(b) * h;
                    cis(T::two_pi() * T::of_i((m * b as i64).rem_euclid(qn as i64)) * h) * kernel(s, t)
                })
                .sum();
            acc += inner * cis(-T::two_pi() * T::of_i((n * a as i64).rem_euclid(qn as i64)) * h);
        }
        acc * h * h
    };
    let mut qn = (4 * (m.unsigned_abs().max(n.unsigned_abs()) as usize + 1)).next_power_of_two().max(32);
    let mut prev = tensor(qn);
    while qn < 2048 {
        qn *= 2;
        let cur = tensor(qn);
        let est = (cur - prev).norm();
        if est <= q.tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureTolerance {
        estimate: f64::NAN,
        tol: q.tol.to_f64().unwrap_or(f64::NAN),
    })
}

/// All compact-part elements with `|m|, |n| ≤ bound` from one kernel grid
/// and a two-dimensional FFT, refined like [`operator_fourier_element`].
pub fn operator_fourier_block<T: Real>(
    op: &BoundaryOperator<T>,
    bound: usize,
    q: &QuadratureConfig<T>,
) -> Result<PerturbationMatrix<T>> {
    let kernel: Box<dyn Fn(T, T) -> T + '_> = match op {
        BoundaryOperator::V0 { .. } => return Ok(PerturbationMatrix::zeros(bound)),
        BoundaryOperator::Synthetic { kmat, .. } => {
            return Ok(PerturbationMatrix::from_fn(bound, |m, n| kmat.get(m, n)));
        }
        BoundaryOperator::SingleLayer { curve } => Box::new(move |s, t| kernel_smooth_single_layer(curve, s, t)),
        BoundaryOperator::AdjDoubleLayerShifted { curve } => {
            curve.outward_normal(T::zero())?;
            Box::new(move |s, t| {
                let normal = curve.outward_normal(s).unwrap_or_default();
                adj_double_kernel(curve, s, centered(t - s), normal, curve.d1(s).norm())
            })
        }
    };
    let block = |qn: usize| -> PerturbationMatrix<T> {
        let h = T::of(qn).recip();
        let mut planner = FftPlanner::new();
        let inv = planner.plan_fft_inverse(qn);
        let fwd = planner.plan_fft_forward(qn);
        // rows[a][m]: Σ_b k(a/Q, b/Q) e^{2πimb/Q}
        let mut rows: Vec<Vec<Complex<T>>> = (0..qn)
            .map(|a| {
                let s = T::of(a) * h;
                let mut r: Vec<Complex<T>> = (0..qn).map(|b| Complex::new(kernel(s, T::of(b) * h), T::zero())).collect();
                inv.process(&mut r);
                r
            })
            .collect();
        let b = bound as i64;
        let mut out = PerturbationMatrix::zeros(bound);
        let mut col = vec![Complex::new(T::zero(), T::zero()); qn];
        for m in -b..=b {
            let mi = m.rem_euclid(qn as i64) as usize;
            for (a, r) in rows.iter_mut().enumerate() {
                col[a] = r[mi];
            }
            fwd.process(&mut col);
            for n in -b..=b {
                out.set(m, n, col[n.rem_euclid(qn as i64) as usize] * h * h);
            }
        }
        out
    };
    let mut qn = (4 * (bound + 1)).next_power_of_two().max(32);
    let mut prev = block(qn);
    while qn < 4096 {
        qn *= 2;
        let cur = block(qn);
        let est = prev
            .nonzeros()
            .map(|(m, n, v)| (v - cur.get(m, n)).norm())
            .chain(cur.nonzeros().map(|(m, n, v)| (v - prev.get(m, n)).norm()))
            .fold(T::zero(), T::max);
        if est <= q.tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureTolerance {
        estimate: f64::NAN,
        tol: q.tol.to_f64().unwrap_or(f64::NAN),
    })
}
