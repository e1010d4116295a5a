//! Dense complex matrices and the handful of spectral routines the bounds need.
//!
//! Every operator in the crate (observables, states, residuals of the
//! auxiliary-operator recursion) is carried as a [`ComplexMatrix`]. Dimensions
//! stay small, so everything is dense and row-major.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Default per-entry tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default relative tolerance for positive-semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![Complex::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, 0.0);
        }
        m
    }

    /// Builds a matrix from rows, rejecting ragged, empty or non-finite input.
    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidInput("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    row: i,
                    cols: row.len(),
                });
            }
            data.extend(row);
        }
        let m = ComplexMatrix { dim, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Builds a matrix from separate real and imaginary row-major parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch {
                expected: re.len(),
                actual: im.len(),
            });
        }
        let rows = re
            .iter()
            .zip(im)
            .enumerate()
            .map(|(i, (r, m))| {
                if r.len() != m.len() {
                    return Err(Error::NotSquare {
                        rows: re.len(),
                        row: i,
                        cols: m.len(),
                    });
                }
                Ok(r.iter().zip(m).map(|(&a, &b)| Complex::new(a, b)).collect())
            })
            .collect::<Result<Vec<Vec<Complex>>>>()?;
        Self::from_rows(rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    pub fn check_finite(&self) -> Result<()> {
        for (idx, z) in self.data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / self.dim,
                    col: idx % self.dim,
                });
            }
        }
        Ok(())
    }

    pub fn ensure_same_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.data[i * d + k] * other.data[k * d + i];
            }
        }
        acc
    }

    /// Hilbert–Schmidt inner product Tr(self† · other).
    pub fn hs_inner(&self, other: &ComplexMatrix) -> Complex {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Largest entrywise deviation |a_ij − conj(a_ji)| and where it occurs.
    pub fn hermitian_defect(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for i in 0..self.dim {
            for j in i..self.dim {
                let defect = (self[(i, j)] - self[(j, i)].conj()).norm();
                if defect > worst.0 {
                    worst = (defect, i, j);
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect().0 <= tol
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.dim, self.dim)?;
        for row in self.rows() {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// The operator impls below assume matching dimensions; the checked free
// functions at the bottom of the module are the public entry points.

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sub");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| -z).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in mul");
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == Complex::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        out
    }
}

impl Mul<Complex> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Complex) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale(Complex::new(rhs, 0.0))
    }
}

/// Pauli matrices.
pub mod pauli {
    use super::{Complex, ComplexMatrix};

    pub fn sigma_x() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = Complex::new(1.0, 0.0);
        m[(1, 0)] = Complex::new(1.0, 0.0);
        m
    }

    pub fn sigma_y() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = Complex::new(0.0, -1.0);
        m[(1, 0)] = Complex::new(0.0, 1.0);
        m
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[1.0, -1.0])
    }
}

pub fn multiply(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.ensure_same_dim(b)?;
    Ok(a * b)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

pub fn trace(a: &ComplexMatrix) -> Complex {
    a.trace()
}

/// [A, B] = AB − BA
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.ensure_same_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

/// {A, B} = AB + BA
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.ensure_same_dim(b)?;
    Ok(&(a * b) + &(b * a))
}

/// F†O − O†F, anti-Hermitian for any F, O.
pub fn generalized_commutator(f: &ComplexMatrix, o: &ComplexMatrix) -> Result<ComplexMatrix> {
    f.ensure_same_dim(o)?;
    let fo = &f.adjoint() * o;
    Ok(&fo - &fo.adjoint())
}

/// F†O + O†F, Hermitian for any F, O.
pub fn generalized_anticommutator(f: &ComplexMatrix, o: &ComplexMatrix) -> Result<ComplexMatrix> {
    f.ensure_same_dim(o)?;
    let fo = &f.adjoint() * o;
    Ok(&fo + &fo.adjoint())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Runs cyclic Jacobi on the 2d×2d real-symmetric embedding
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is that of `a` with every
/// eigenvalue doubled; the pairs are averaged back.
pub fn hermitian_eigenvalues(a: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    let (defect, row, col) = a.hermitian_defect();
    if defect > tol {
        return Err(Error::NotHermitian {
            what: "matrix",
            row,
            col,
            defect,
        });
    }
    let d = a.dim();
    let n = 2 * d;
    let mut s = vec![0.0f64; n * n];
    for i in 0..d {
        for j in 0..d {
            // symmetrize so the embedding is exactly symmetric
            let z = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            s[i * n + j] = z.re;
            s[(i + d) * n + (j + d)] = z.re;
            s[i * n + (j + d)] = -z.im;
            s[(i + d) * n + j] = z.im;
        }
    }

    let total: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_REL_TOL * (1.0 + total);
    let off_norm = |s: &[f64]| -> f64 {
        let mut acc = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    acc += s[p * n + q] * s[p * n + q];
                }
            }
        }
        acc.sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&s) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = s[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[q * n + q] - s[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let skp = s[k * n + p];
                    let skq = s[k * n + q];
                    s[k * n + p] = c * skp - sn * skq;
                    s[k * n + q] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let spk = s[p * n + k];
                    let sqk = s[q * n + k];
                    s[p * n + k] = c * spk - sn * sqk;
                    s[q * n + k] = sn * spk + c * sqk;
                }
            }
        }
    }
    if !converged && off_norm(&s) > threshold {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut diag: Vec<f64> = (0..n).map(|i| s[i * n + i]).collect();
    diag.sort_by(f64::total_cmp);
    Ok(diag.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// True iff the smallest eigenvalue is ≥ −tol·max(1, spectral radius).
pub fn psd_check(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    let eig = hermitian_eigenvalues(a, tol.max(HERMITIAN_TOL))?;
    let scale = eig.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(eig.first().is_none_or(|&min| min >= -tol * scale))
}
