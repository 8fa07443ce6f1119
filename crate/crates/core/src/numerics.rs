//! Dense complex matrices and a Hermitian eigenvalue solver.
//!
//! Storage is row-major with the column index fastest. The eigensolver reduces
//! a Hermitian matrix to real symmetric tridiagonal form with complex
//! Householder reflections and then runs implicit QL with Wilkinson shifts.
//! Only eigenvalues are produced.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{cabs, cone, creal, czero, is_finite, Scalar, C};

/// Absolute entrywise Hermiticity tolerance (double precision).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Unitarity tolerance for [`conjugate_by`].
pub const UNITARY_TOL: f64 = 1e-10;

const MAX_QL_ITERATIONS: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<S: Scalar> {
    dim: usize,
    data: Vec<C<S>>,
}

impl<S: Scalar> ComplexMatrix<S> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![czero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<S>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from square row data; rejects ragged or non-finite input.
    pub fn from_rows(rows: Vec<Vec<C<S>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch { left: 0, right: 1 });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            for (j, z) in row.into_iter().enumerate() {
                if !is_finite(z) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                data.push(z);
            }
        }
        Ok(Self { dim, data })
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[S]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = creal(v);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C<S>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C<S>] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C<S>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> C<S> {
        (0..self.dim).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == czero() {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: S) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)])
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<S> {
        self.check_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| cabs(a - b))
            .fold(S::zero(), S::max))
    }

    /// `max |m[i][j] - conj(m[j][i])|`.
    pub fn hermitian_deviation(&self) -> S {
        let n = self.dim;
        let mut dev = S::zero();
        for i in 0..n {
            for j in i..n {
                dev = dev.max(cabs(self[(i, j)] - self[(j, i)].conj()));
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: S) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn frobenius_norm(&self) -> S {
        self.data.iter().map(|z| z.norm_sqr()).sum::<S>().sqrt()
    }

    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|&z| !is_finite(z))
            .map(|k| (k / self.dim, k % self.dim))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }
}

impl<S: Scalar> Index<(usize, usize)> for ComplexMatrix<S> {
    type Output = C<S>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<S> {
        &self.data[i * self.dim + j]
    }
}

impl<S: Scalar> IndexMut<(usize, usize)> for ComplexMatrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<S> {
        &mut self.data[i * self.dim + j]
    }
}

/// Eigenvalues of a Hermitian matrix, sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSpectrum<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> RealSpectrum<S> {
    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> S {
        self.values[0]
    }

    pub fn max(&self) -> S {
        self.values[self.values.len() - 1]
    }

    pub fn sum(&self) -> S {
        self.values.iter().copied().sum()
    }

    pub fn abs_sum(&self) -> S {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn into_vec(self) -> Vec<S> {
        self.values
    }
}

/// All eigenvalues of a Hermitian matrix, sorted ascending.
///
/// Fails with [`Error::NotHermitian`] when any `|m[i][j] - conj(m[j][i])|`
/// exceeds [`HERMITIAN_TOL`], and with [`Error::ConvergenceFailure`] if the QL
/// iteration stalls (which only happens on corrupted input).
pub fn hermitian_eigenvalues<S: Scalar>(m: &ComplexMatrix<S>) -> Result<RealSpectrum<S>> {
    if let Some((row, col)) = m.first_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    let deviation = m.hermitian_deviation();
    if deviation > S::tol(HERMITIAN_TOL) {
        return Err(Error::NotHermitian {
            deviation: deviation.to_f64_lossy(),
        });
    }
    let (mut diag, mut off) = tridiagonalize(m);
    tridiagonal_ql(&mut diag, &mut off)?;
    diag.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(RealSpectrum { values: diag })
}

/// Householder reduction to a real symmetric tridiagonal matrix with the
/// same spectrum. Returns `(diagonal, off)` where `off[i]` couples `i` and
/// `i + 1` and `off[n - 1] = 0`.
fn tridiagonalize<S: Scalar>(m: &ComplexMatrix<S>) -> (Vec<S>, Vec<S>) {
    let n = m.dim();
    let mut a: Vec<C<S>> = m.as_slice().to_vec();
    let mut off = vec![S::zero(); n];
    let two = S::lit(2.0);

    let mut v = vec![czero::<S>(); n];
    let mut w = vec![czero::<S>(); n];

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let base = k + 1;
        let v = &mut v[..len];
        let w = &mut w[..len];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = a[(base + i) * n + k];
        }
        let alpha = v.iter().map(|z| z.norm_sqr()).sum::<S>().sqrt();
        if alpha == S::zero() {
            off[k] = S::zero();
            continue;
        }
        let x0_abs = cabs(v[0]);
        let phase = if x0_abs > S::zero() {
            v[0] / x0_abs
        } else {
            cone()
        };
        v[0] += phase * alpha;
        // |v|^2 = 2 alpha (alpha + |x0|)
        let beta = two / (two * alpha * (alpha + x0_abs));

        // w = beta * A_sub v
        for (i, wi) in w.iter_mut().enumerate() {
            let row = &a[(base + i) * n + base..(base + i) * n + n];
            let dot = row.iter().zip(v.iter()).fold(czero(), |acc, (&r, &x)| acc + r * x);
            *wi = dot * beta;
        }
        // K = (beta / 2) v^dagger w, real for Hermitian A.
        let vw = v
            .iter()
            .zip(w.iter())
            .fold(czero(), |acc, (&x, &y)| acc + x.conj() * y);
        let kappa = beta / two * vw.re;
        for (wi, &vi) in w.iter_mut().zip(v.iter()) {
            *wi -= vi * kappa;
        }
        // A_sub -= v q^dagger + q v^dagger
        for i in 0..len {
            let (vi, qi) = (v[i], w[i]);
            let row = &mut a[(base + i) * n + base..(base + i) * n + n];
            for (j, r) in row.iter_mut().enumerate() {
                *r = *r - vi * w[j].conj() - qi * v[j].conj();
            }
        }
        off[k] = alpha;
    }
    if n >= 2 {
        off[n - 2] = cabs(a[(n - 1) * n + (n - 2)]);
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    (diag, off)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix;
/// eigenvalues overwrite `d`.
fn tridiagonal_ql<S: Scalar>(d: &mut [S], e: &mut [S]) -> Result<()> {
    let n = d.len();
    if n < 2 {
        return Ok(());
    }
    let eps = S::epsilon();
    let two = S::lit(2.0);
    // Absolute floor so blocks with vanishing diagonal (low-rank input) deflate.
    let scale = d
        .iter()
        .zip(e.iter())
        .map(|(&a, &b)| a.abs() + b.abs())
        .fold(S::zero(), S::max);
    let floor = eps * scale;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::ConvergenceFailure {
                    dim: n,
                    iterations,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(S::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (S::one(), S::one(), S::zero());
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == S::zero() {
                    d[i + 1] -= p;
                    e[m] = S::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = S::zero();
        }
    }
    Ok(())
}

/// Returns `u m u^dagger`. `u` must be unitary within [`UNITARY_TOL`].
pub fn conjugate_by<S: Scalar>(
    u: &ComplexMatrix<S>,
    m: &ComplexMatrix<S>,
) -> Result<ComplexMatrix<S>> {
    u.check_dim(m)?;
    let u_dag = u.adjoint();
    let deviation = u
        .matmul(&u_dag)?
        .max_abs_diff(&ComplexMatrix::identity(u.dim()))?;
    if deviation > S::tol(UNITARY_TOL) {
        return Err(Error::NotUnitary {
            deviation: deviation.to_f64_lossy(),
        });
    }
    u.matmul(m)?.matmul(&u_dag)
}
