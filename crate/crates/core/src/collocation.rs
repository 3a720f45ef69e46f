//! Oversampled collocation: assembly of the `M × N` system and its
//! least-squares solution by Householder QR with column pivoting.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operators::{AssemblyContext, BoundaryOperator};
use crate::quadrature::QuadratureConfig;
use crate::scalar::{Field, Real};
use crate::splines::{SplineFunction, SplineSpace};

/// Dense column-major matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: fmt::Debug> fmt::Debug for DenseMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix({}x{})", self.rows, self.cols)
    }
}

impl<F: Copy> DenseMatrix<F> {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch { left: data.len(), right: rows * cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[F] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_col_major(&self) -> &[F] {
        &self.data
    }

    pub fn map<G: Copy>(&self, f: impl Fn(F) -> G) -> DenseMatrix<G> {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| f(*v)).collect() }
    }
}

impl<T: Real> DenseMatrix<Complex<T>> {
    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for (j, xj) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.col(j)) {
                *o += a * xj;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.im == T::zero())
    }
}

fn norm2<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
}

/// Minimizer of `‖Ax - b‖₂` over `x`, by Householder QR with column pivoting.
///
/// Fails with [`Error::RankDeficient`] when a pivot falls below
/// `max(M, N) · 10ε · |R_00|`. Real inputs take a real-arithmetic path.
pub fn solve_least_squares<T: Real>(a: &DenseMatrix<Complex<T>>, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    if b.len() != a.rows() {
        return Err(Error::LengthMismatch { left: b.len(), right: a.rows() });
    }
    if a.rows() < a.cols() {
        return Err(Error::InvalidArgument(format!(
            "least squares needs at least as many rows as columns, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.is_real() && b.iter().all(|v| v.im == T::zero()) {
        let ar = a.map(|v| v.re);
        let br: Vec<T> = b.iter().map(|v| v.re).collect();
        let x = qr_solve::<T, T>(ar, br)?;
        return Ok(x.into_iter().map(|v| Complex::new(v, T::zero())).collect());
    }
    qr_solve::<T, Complex<T>>(a.clone(), b.to_vec())
}

fn qr_solve<T: Real, F: Field<T>>(mut a: DenseMatrix<F>, mut b: Vec<F>) -> Result<Vec<F>> {
    let (m, n) = (a.rows, a.cols);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut diag = vec![F::zero(); n];
    let rank_tol = T::lit(10.0) * T::epsilon() * T::of(m.max(n));
    let mut r00 = T::zero();
    for k in 0..n {
        // Pivot: remaining column of largest norm.
        let mut best = k;
        let mut best_norm = -T::one();
        for j in k..n {
            let c = &a.data[j * m + k..(j + 1) * m];
            let nrm = c.iter().map(|v| v.modulus() * v.modulus()).sum::<T>();
            if nrm > best_norm {
                best_norm = nrm;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                a.data.swap(k * m + i, best * m + i);
            }
            perm.swap(k, best);
        }
        let norm = best_norm.max(T::zero()).sqrt();
        if k == 0 {
            r00 = norm;
        }
        if !(norm > rank_tol * r00) || norm == T::zero() {
            return Err(Error::RankDeficient { rank: k, cols: n });
        }
        let x0 = a.data[k * m + k];
        let alpha = -(x0.phase()).scale(norm);
        // v = x - alpha e_1, stored in place of column k.
        a.data[k * m + k] = x0 - alpha;
        let vnorm2: T = a.data[k * m + k..(k + 1) * m].iter().map(|v| v.modulus() * v.modulus()).sum();
        diag[k] = alpha;
        if vnorm2 == T::zero() {
            continue;
        }
        let two_over = T::lit(2.0) / vnorm2;
        let (head, tail) = a.data.split_at_mut((k + 1) * m);
        let v = &head[k * m + k..(k + 1) * m];
        for col in tail.chunks_mut(m) {
            let seg = &mut col[k..];
            let dot = v.iter().zip(seg.iter()).fold(F::zero(), |acc, (vi, ci)| acc + vi.conj() * *ci);
            let f = dot.scale(two_over);
            for (ci, vi) in seg.iter_mut().zip(v) {
                *ci -= *vi * f;
            }
        }
        let seg = &mut b[k..];
        let dot = v.iter().zip(seg.iter()).fold(F::zero(), |acc, (vi, ci)| acc + vi.conj() * *ci);
        let f = dot.scale(two_over);
        for (ci, vi) in seg.iter_mut().zip(v) {
            *ci -= *vi * f;
        }
    }
    // Back substitution with R (diagonal in `diag`, strict upper part in `a`).
    let mut y = vec![F::zero(); n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for (j, yj) in y.iter().enumerate().skip(k + 1) {
            acc -= a.data[j * m + k] * *yj;
        }
        y[k] = acc / diag[k];
    }
    let mut x = vec![F::zero(); n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k];
    }
    Ok(x)
}

/// `max_j |⟨A e_j, Ax - b⟩_M|`, the defect in the discrete orthogonality
/// conditions; equals `‖Aᴴ(Ax - b)‖_∞ / M`.
pub fn orthogonality_residual<T: Real>(a: &DenseMatrix<Complex<T>>, b: &[Complex<T>], x: &[Complex<T>]) -> Result<T> {
    if b.len() != a.rows() {
        return Err(Error::LengthMismatch { left: b.len(), right: a.rows() });
    }
    if x.len() != a.cols() {
        return Err(Error::LengthMismatch { left: x.len(), right: a.cols() });
    }
    let r: Vec<Complex<T>> = a.matvec(x).into_iter().zip(b).map(|(ax, bi)| ax - bi).collect();
    let m = T::of(a.rows());
    Ok((0..a.cols())
        .map(|j| a.col(j).iter().zip(&r).map(|(aij, ri)| aij.conj() * ri).sum::<Complex<T>>().norm() / m)
        .fold(T::zero(), T::max))
}

/// Admissible orthogonality defect for a backward-stable solve:
/// `10³ ε ‖A‖_F (‖A‖_F ‖x‖ + ‖b‖) / M`.
pub fn orthogonality_tolerance<T: Real>(a: &DenseMatrix<Complex<T>>, b: &[Complex<T>], x: &[Complex<T>]) -> T {
    let fa = a.frobenius_norm();
    T::lit(1e3) * T::epsilon() * fa * (fa * norm2(x) + norm2(b)) / T::of(a.rows().max(1))
}

/// Matrix and right-hand side of an assembled system.
pub type System<T> = (DenseMatrix<Complex<T>>, Vec<Complex<T>>);

pub type RhsFn<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;

/// `V u = f` discretized on `S_N` with `M` collocation points `i/M`.
#[derive(Clone)]
pub struct DiscreteProblem<T: Real> {
    pub op: BoundaryOperator<T>,
    pub space: SplineSpace,
    pub m: usize,
    pub rhs: RhsFn<T>,
    pub quad: QuadratureConfig<T>,
}

impl<T: Real> fmt::Debug for DiscreteProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteProblem")
            .field("op", &self.op)
            .field("space", &self.space)
            .field("m", &self.m)
            .field("quad", &self.quad)
            .finish_non_exhaustive()
    }
}

impl<T: Real> DiscreteProblem<T> {
    pub fn new(
        op: BoundaryOperator<T>,
        space: SplineSpace,
        m: usize,
        rhs: impl Fn(T) -> Complex<T> + Send + Sync + 'static,
        quad: QuadratureConfig<T>,
    ) -> Result<Self> {
        let p = Self { op, space, m, rhs: Arc::new(rhs), quad };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < self.space.n() {
            return Err(Error::InvalidArgument(format!(
                "need M >= N collocation points, got M = {} < N = {}",
                self.m,
                self.space.n()
            )));
        }
        self.op.validate()?;
        self.op.check_consistency(self.space.degree())
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        let mt = T::of(self.m);
        (0..self.m).map(move |i| T::of(i) / mt)
    }
}

/// `A_{ij} = (Vχ_j)(i/M)`, `b_i = f(i/M)`. Rows are assembled in parallel.
pub fn assemble<T: Real>(problem: &DiscreteProblem<T>) -> Result<System<T>> {
    problem.validate()?;
    let ctx = AssemblyContext::new(&problem.op, problem.space, problem.quad)?;
    let (m, n) = (problem.m, problem.space.n());
    let mt = T::of(m);
    let rows: Vec<Vec<Complex<T>>> = (0..m).into_par_iter().map(|i| ctx.row(T::of(i) / mt)).collect::<Result<_>>()?;
    let a = DenseMatrix::from_fn(m, n, |i, j| rows[i][j]);
    for j in 0..n {
        if a.col(j).iter().all(|v| v.norm() == T::zero()) {
            return Err(Error::RankDeficient { rank: n - 1, cols: n });
        }
    }
    let b = problem.points().map(|s| (problem.rhs)(s)).collect();
    Ok((a, b))
}

/// Least-squares collocation solution.
#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub u: SplineFunction<T>,
    pub residual_norm: T,
    pub ortho_residual: T,
    pub ortho_tol: T,
    pub assemble_ms: f64,
    pub solve_ms: f64,
}

/// Assembles, solves and checks the discrete orthogonality conditions.
pub fn solve_problem<T: Real>(problem: &DiscreteProblem<T>) -> Result<Solution<T>> {
    let t0 = Instant::now();
    let (a, b) = assemble(problem)?;
    let assemble_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let x = solve_least_squares(&a, &b)?;
    let solve_ms = t1.elapsed().as_secs_f64() * 1e3;
    solution_from_system(problem.space, &a, &b, x, assemble_ms, solve_ms)
}

pub(crate) fn solution_from_system<T: Real>(
    space: SplineSpace,
    a: &DenseMatrix<Complex<T>>,
    b: &[Complex<T>],
    x: Vec<Complex<T>>,
    assemble_ms: f64,
    solve_ms: f64,
) -> Result<Solution<T>> {
    let ortho = orthogonality_residual(a, b, &x)?;
    let tol = orthogonality_tolerance(a, b, &x);
    if !(ortho <= tol) {
        return Err(Error::OrthogonalityDefect {
            defect: ortho.to_f64().unwrap_or(f64::NAN),
            tol: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let r: Vec<Complex<T>> = a.matvec(&x).into_iter().zip(b).map(|(ax, bi)| ax - bi).collect();
    Ok(Solution {
        u: SplineFunction::new(space, x)?,
        residual_norm: norm2(&r),
        ortho_residual: ortho,
        ortho_tol: tol,
        assemble_ms,
        solve_ms,
    })
}

/// Writes `rows: u64`, `cols: u64` (little endian), then the column-major
/// entries as `(re, im)` pairs of little-endian `f64`.
pub fn write_matrix_dump<T: Real>(path: &Path, a: &DenseMatrix<Complex<T>>) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 16 * a.as_col_major().len());
    buf.extend_from_slice(&(a.rows() as u64).to_le_bytes());
    buf.extend_from_slice(&(a.cols() as u64).to_le_bytes());
    for v in a.as_col_major() {
        buf.extend_from_slice(&v.re.to_f64().unwrap_or(f64::NAN).to_le_bytes());
        buf.extend_from_slice(&v.im.to_f64().unwrap_or(f64::NAN).to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_matrix_dump(path: &Path) -> Result<DenseMatrix<Complex<f64>>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 16 {
        return Err(Error::Parse("matrix dump shorter than its header".into()));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let (rows, cols) = (word(0) as usize, word(8) as usize);
    let count = rows.checked_mul(cols).ok_or_else(|| Error::Parse("matrix dump dimensions overflow".into()))?;
    if bytes.len() != 16 + 16 * count {
        return Err(Error::Parse(format!("matrix dump of {rows}x{cols} has {} payload bytes", bytes.len() - 16)));
    }
    let data = (0..count)
        .map(|k| {
            let o = 16 + 16 * k;
            Complex::new(f64::from_bits(word(o)), f64::from_bits(word(o + 8)))
        })
        .collect();
    DenseMatrix::from_col_major(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::ParametricCurve;
    use crate::scalar::cis;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    /// Deterministic pseudo-random values without a RNG dependency.
    fn lcg(seed: u64, len: usize) -> Vec<f64> {
        let mut s = seed;
        (0..len)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64, complex: bool) -> DenseMatrix<Complex<f64>> {
        let re = lcg(seed, rows * cols);
        let im = lcg(seed + 1, rows * cols);
        DenseMatrix::from_fn(rows, cols, |i, j| Complex::new(re[j * rows + i], if complex { im[j * rows + i] } else { 0.0 }))
    }

    #[test]
    fn square_system_is_solved_exactly() {
        for complex in [false, true] {
            let a = random_matrix(12, 12, 7, complex);
            let x_true: Vec<_> = (0..12).map(|k| Complex::new(k as f64 - 5.0, if complex { 0.5 } else { 0.0 })).collect();
            let b = a.matvec(&x_true);
            let x = solve_least_squares(&a, &b).unwrap();
            for (u, v) in x.iter().zip(&x_true) {
                assert!((u - v).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn consistent_rhs_has_zero_residual() {
        let a = random_matrix(30, 8, 3, true);
        let b = a.matvec(&(0..8).map(|k| Complex::new(1.0, -(k as f64))).collect::<Vec<_>>());
        let x = solve_least_squares(&a, &b).unwrap();
        let r: f64 = a.matvec(&x).iter().zip(&b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
        assert!(r < 1e-12);
    }

    #[test]
    fn random_overdetermined_normal_equations() {
        for complex in [false, true] {
            let a = random_matrix(40, 10, 11, complex);
            let b: Vec<_> = lcg(99, 40).into_iter().map(c).collect();
            let x = solve_least_squares(&a, &b).unwrap();
            let defect = orthogonality_residual(&a, &b, &x).unwrap() * 40.0;
            assert!(defect <= 1e-10 * a.frobenius_norm() * norm2(&b));
            assert!(orthogonality_residual(&a, &b, &x).unwrap() <= orthogonality_tolerance(&a, &b, &x));
        }
    }

    #[test]
    fn perturbation_grows_defect_linearly() {
        let a = random_matrix(20, 5, 5, false);
        let b: Vec<_> = lcg(17, 20).into_iter().map(c).collect();
        let x = solve_least_squares(&a, &b).unwrap();
        let defect = |eps: f64| {
            let mut y = x.clone();
            y[2] += eps;
            orthogonality_residual(&a, &b, &y).unwrap()
        };
        let (d1, d2) = (defect(1e-3), defect(2e-3));
        assert!((d2 / d1 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rank_deficiency_detected() {
        let base = random_matrix(10, 3, 2, false);
        let a = DenseMatrix::from_fn(10, 4, |i, j| if j == 3 { base.get(i, 0) * 2.0 + base.get(i, 1) } else { base.get(i, j) });
        let b = vec![c(1.0); 10];
        match solve_least_squares(&a, &b) {
            Err(Error::RankDeficient { rank, cols }) => {
                assert_eq!((rank, cols), (3, 4));
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    fn identity_problem(n: usize, m: usize, cc: f64) -> DiscreteProblem<f64> {
        let op = BoundaryOperator::V0 { alpha: 0.0, c: c(cc) };
        DiscreteProblem::new(op, SplineSpace::new(n, 1).unwrap(), m, |t| cis(2.0 * PI * t), QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn identity_assembly_is_evaluation_matrix() {
        let (a, _) = assemble(&identity_problem(8, 8, 1.0)).unwrap();
        // Row i evaluates at i/N, where hat i-1 peaks.
        for i in 0..8 {
            for j in 0..8 {
                let expect = if (j + 1) % 8 == i { 1.0 } else { 0.0 };
                assert!((a.get(i, j) - c(expect)).norm() < 1e-15);
            }
        }
        let (h, _) = assemble(&identity_problem(8, 8, -0.5)).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(h.get(i, j), a.get(i, j) * -0.5);
            }
        }
    }

    #[test]
    fn square_collocation_interpolates() {
        let p = identity_problem(16, 16, 1.0);
        let sol = solve_problem(&p).unwrap();
        for i in 0..16 {
            let s = i as f64 / 16.0;
            assert!((sol.u.eval(s) - cis(2.0 * PI * s)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_layer_circle_assembly_oracle() {
        let r = 2.0;
        let op = BoundaryOperator::SingleLayer { curve: ParametricCurve::circle(r) };
        let space = SplineSpace::new(8, 1).unwrap();
        let p = DiscreteProblem::new(op, space, 16, |_| c(0.0), QuadratureConfig::default()).unwrap();
        let (a, _) = assemble(&p).unwrap();
        let k = 100_000i64;
        for i in 0..16 {
            let s = i as f64 / 16.0;
            for j in 0..8 {
                let oracle: Complex<f64> = (-k..=k)
                    .map(|m| {
                        let sigma = if m == 0 { r.ln() / (2.0 * PI) } else { -1.0 / (4.0 * PI * m.abs() as f64) };
                        space.basis_fourier_coeff::<f64>(j, m) * sigma * cis(2.0 * PI * m as f64 * s)
                    })
                    .sum();
                assert!((a.get(i, j) - oracle).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn spline_rhs_is_recovered() {
        let op = BoundaryOperator::SingleLayer { curve: ParametricCurve::ellipse(1.0, 0.5) };
        let space = SplineSpace::new(16, 1).unwrap();
        let w: Vec<Complex<f64>> = (0..16).map(|j| Complex::new((j as f64 * 0.4).cos(), 0.1 * j as f64)).collect();
        let p = DiscreteProblem::new(op.clone(), space, 48, |_| c(0.0), QuadratureConfig::default()).unwrap();
        let (a, _) = assemble(&p).unwrap();
        let b = a.matvec(&w);
        let x = solve_least_squares(&a, &b).unwrap();
        for (u, v) in x.iter().zip(&w) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn matrix_dump_roundtrip() {
        let a = random_matrix(5, 3, 1, true);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.bin");
        write_matrix_dump(&path, &a).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 16 + 16 * 15);
        assert_eq!(u64::from_le_bytes(bytes[0..8].try_into().unwrap()), 5);
        assert_eq!(read_matrix_dump(&path).unwrap(), a);
    }

    #[test]
    fn too_few_points_rejected() {
        let op = BoundaryOperator::V0 { alpha: 0.0, c: c(1.0) };
        assert!(DiscreteProblem::new(op, SplineSpace::new(8, 1).unwrap(), 4, |_| c(0.0), QuadratureConfig::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn qr_solution_satisfies_normal_equations(seed in 0u64..10_000, rows in 6usize..30, cols in 1usize..6) {
            let a = random_matrix(rows, cols, seed, seed % 2 == 0);
            let b: Vec<_> = lcg(seed ^ 0xabc, rows).into_iter().map(c).collect();
            let x = solve_least_squares(&a, &b).unwrap();
            prop_assert!(orthogonality_residual(&a, &b, &x).unwrap() <= orthogonality_tolerance(&a, &b, &x));
        }
    }
}
