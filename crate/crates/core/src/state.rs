//! Validated states and observables, their moments, and random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{pauli, psd_check, Complex, ComplexMatrix, HERMITIAN_TOL, PSD_TOL};

const TRACE_TOL: f64 = 1e-10;
const BLOCH_SLACK: f64 = 1e-12;

/// A Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable(ComplexMatrix);

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.check_finite()?;
        let (defect, row, col) = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                what: "observable",
                row,
                col,
                defect,
            });
        }
        Ok(Observable(matrix))
    }

    pub fn sigma_x() -> Self {
        Observable(pauli::sigma_x())
    }

    pub fn sigma_y() -> Self {
        Observable(pauli::sigma_y())
    }

    pub fn sigma_z() -> Self {
        Observable(pauli::sigma_z())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

impl AsRef<ComplexMatrix> for Observable {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.check_finite()?;
        let (defect, row, col) = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                what: "state",
                row,
                col,
                defect,
            });
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace: tr });
        }
        if !psd_check(&matrix, PSD_TOL)? {
            let eig = crate::linalg::hermitian_eigenvalues(&matrix, HERMITIAN_TOL)?;
            return Err(Error::NotPositive {
                min_eigenvalue: eig[0],
            });
        }
        Ok(DensityMatrix(matrix))
    }

    /// I/d.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!(
                "maximally mixed state needs d ≥ 2, got {dim}"
            )));
        }
        Ok(Self::uniform(dim))
    }

    // I/d without the d ≥ 2 restriction, for internal reference expectations.
    pub(crate) fn uniform(dim: usize) -> Self {
        DensityMatrix(ComplexMatrix::identity(dim).scale(Complex::new(1.0 / dim as f64, 0.0)))
    }

    /// (I + r·σ)/2 for a Bloch vector with |r| ≤ 1.
    pub fn from_bloch(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        let norm2 = rx * rx + ry * ry + rz * rz;
        if !norm2.is_finite() || norm2 > 1.0 + BLOCH_SLACK {
            return Err(Error::InvalidInput(format!(
                "Bloch vector norm² {norm2} exceeds 1"
            )));
        }
        let m = ComplexMatrix::from_rows(vec![
            vec![Complex::new(0.5 * (1.0 + rz), 0.0), Complex::new(0.5 * rx, -0.5 * ry)],
            vec![Complex::new(0.5 * rx, 0.5 * ry), Complex::new(0.5 * (1.0 - rz), 0.0)],
        ])?;
        Self::new(m)
    }

    /// The pure qubit state swept in the figure experiments, with Bloch
    /// vector (cos(θ/2), sin(θ/2)cos φ, sin(θ/2)sin φ).
    pub fn fig_state(theta: f64, phi: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 2.0 * std::f64::consts::PI) {
            return Err(Error::InvalidInput(format!("theta {theta} outside (0, 2π)")));
        }
        let (s, c) = (0.5 * theta).sin_cos();
        Self::from_bloch(c, s * phi.cos(), s * phi.sin())
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) vector.
    pub fn pure(psi: &[Complex]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if psi.is_empty() || norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidInput("state vector has zero norm".into()));
        }
        let m = ComplexMatrix::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj() / norm2);
        Ok(DensityMatrix(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        purity(self) >= 1.0 - tol
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Deterministic random source addressed by (master seed, stream index).
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        RngStream {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian, E|z|² = 1.
    pub fn complex_gaussian(&mut self) -> Complex {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex::new(s * self.gaussian(), s * self.gaussian())
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// d×d matrix of independent standard complex Gaussians.
    pub fn ginibre(&mut self, dim: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, |_, _| self.complex_gaussian())
    }
}

fn check_dims(rho: &DensityMatrix, x: &ComplexMatrix) -> Result<()> {
    rho.matrix().ensure_same_dim(x)
}

pub fn maximally_mixed(dim: usize) -> Result<DensityMatrix> {
    DensityMatrix::maximally_mixed(dim)
}

pub fn from_bloch(rx: f64, ry: f64, rz: f64) -> Result<DensityMatrix> {
    DensityMatrix::from_bloch(rx, ry, rz)
}

pub fn fig_state(theta: f64, phi: f64) -> Result<DensityMatrix> {
    DensityMatrix::fig_state(theta, phi)
}

/// Tr(ρ²), clamped to [1/d, 1].
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let p = m.hs_inner(m).re;
    p.clamp(1.0 / m.dim() as f64, 1.0)
}

/// Tr(ρX).
pub fn expectation(rho: &DensityMatrix, x: &ComplexMatrix) -> Result<Complex> {
    check_dims(rho, x)?;
    Ok(rho.matrix().trace_product(x))
}

/// A − ⟨A⟩·I
pub fn centered(rho: &DensityMatrix, a: &Observable) -> Result<ComplexMatrix> {
    let mean = expectation(rho, a.matrix())?.re;
    let mut out = a.matrix().clone();
    for i in 0..out.dim() {
        out[(i, i)] -= mean;
    }
    Ok(out)
}

/// ⟨A²⟩ − ⟨A⟩², evaluated as ⟨Ǎ²⟩ and clamped at 0.
pub fn variance(rho: &DensityMatrix, a: &Observable) -> Result<f64> {
    let ac = centered(rho, a)?;
    let v = rho.matrix().trace_product(&(&ac * &ac)).re;
    Ok(v.max(0.0))
}

/// ⟨{A, B}⟩/2 − ⟨A⟩⟨B⟩
pub fn covariance(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    let ac = centered(rho, a)?;
    let bc = centered(rho, b)?;
    Ok(rho.matrix().trace_product(&(&ac * &bc)).re)
}

/// Haar-random pure state.
pub fn random_pure(dim: usize, rng: &mut RngStream) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("random state needs d ≥ 2, got {dim}")));
    }
    let psi: Vec<Complex> = (0..dim).map(|_| rng.complex_gaussian()).collect();
    DensityMatrix::pure(&psi)
}

/// Ginibre mixed state GG†/Tr(GG†).
pub fn random_mixed(dim: usize, rng: &mut RngStream) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("random state needs d ≥ 2, got {dim}")));
    }
    let g = rng.ginibre(dim);
    let gg = &g * &g.adjoint();
    let tr = gg.trace().re;
    let mut m = gg.scale(Complex::new(1.0 / tr, 0.0));
    // exact Hermitian symmetry
    for i in 0..dim {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..dim {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    Ok(DensityMatrix(m))
}

/// Gaussian Hermitian ensemble sample (G + G†)/2.
pub fn random_hermitian(dim: usize, rng: &mut RngStream) -> Observable {
    let g = rng.ginibre(dim);
    let mut h = (&g + &g.adjoint()).scale(Complex::new(0.5, 0.0));
    for i in 0..dim {
        h[(i, i)].im = 0.0;
    }
    Observable(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;
    use std::f64::consts::PI;

    #[test]
    fn maximally_mixed_cases() {
        let m = maximally_mixed(2).unwrap();
        assert_eq!(m.matrix(), &ComplexMatrix::diagonal(&[0.5, 0.5]));
        let m3 = maximally_mixed(3).unwrap();
        assert!(m3.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[1.0 / 3.0; 3])) < 1e-16);
        for d in 2..=6 {
            let p = purity(&maximally_mixed(d).unwrap());
            assert!((p - 1.0 / d as f64).abs() < 1e-15);
        }
        assert!(maximally_mixed(1).is_err());
    }

    #[test]
    fn bloch_cases() {
        let half = from_bloch(0.0, 0.0, 0.0).unwrap();
        assert_eq!(half.matrix(), &ComplexMatrix::diagonal(&[0.5, 0.5]));
        let up = from_bloch(0.0, 0.0, 1.0).unwrap();
        assert_eq!(up.matrix(), &ComplexMatrix::diagonal(&[1.0, 0.0]));
        let plus = from_bloch(1.0, 0.0, 0.0).unwrap();
        let e = hermitian_eigenvalues(plus.matrix(), 1e-10).unwrap();
        assert!(e[0].abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
        assert!(from_bloch(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn validation_errors() {
        let bad_trace = ComplexMatrix::diagonal(&[0.5, 0.4]);
        assert!(matches!(
            DensityMatrix::new(bad_trace),
            Err(Error::TraceNotOne { .. })
        ));
        let negative = ComplexMatrix::diagonal(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::new(negative),
            Err(Error::NotPositive { .. })
        ));
        let mut skew = ComplexMatrix::identity(2);
        skew[(0, 1)] = Complex::new(0.0, 1.0);
        assert!(matches!(
            Observable::new(skew),
            Err(Error::NotHermitian { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn purity_and_expectations() {
        let rho = DensityMatrix::new(ComplexMatrix::diagonal(&[0.75, 0.25])).unwrap();
        assert!((purity(&rho) - 0.625).abs() < 1e-15);
        let up = from_bloch(0.0, 0.0, 1.0).unwrap();
        assert!((purity(&up) - 1.0).abs() < 1e-12);
        assert!((expectation(&up, &pauli::sigma_z()).unwrap().re - 1.0).abs() < 1e-15);
        let mx = maximally_mixed(2).unwrap();
        assert!(expectation(&mx, &pauli::sigma_x()).unwrap().norm() < 1e-15);
        assert!(expectation(&mx, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn centered_cases() {
        let mx = maximally_mixed(2).unwrap();
        let c = centered(&mx, &Observable::sigma_x()).unwrap();
        assert_eq!(c, pauli::sigma_x());
        let up = from_bloch(0.0, 0.0, 1.0).unwrap();
        let c = centered(&up, &Observable::sigma_z()).unwrap();
        assert!(c.max_abs_diff(&ComplexMatrix::diagonal(&[0.0, -2.0])) < 1e-15);
    }

    #[test]
    fn variance_and_covariance_basics() {
        let up = from_bloch(0.0, 0.0, 1.0).unwrap();
        assert_eq!(variance(&up, &Observable::sigma_z()).unwrap(), 0.0);
        assert!((variance(&up, &Observable::sigma_x()).unwrap() - 1.0).abs() < 1e-15);
        let mx = maximally_mixed(2).unwrap();
        let cov = covariance(&mx, &Observable::sigma_x(), &Observable::sigma_z()).unwrap();
        assert!(cov.abs() < 1e-15);
    }

    #[test]
    fn random_state_properties() {
        let mut rng = RngStream::new(7, 0);
        for _ in 0..50 {
            let psi = random_pure(3, &mut rng).unwrap();
            assert!((purity(&psi) - 1.0).abs() < 1e-12);
            let e = hermitian_eigenvalues(psi.matrix(), 1e-10).unwrap();
            assert!((e[2] - 1.0).abs() < 1e-10 && e[0].abs() < 1e-10 && e[1].abs() < 1e-10);
        }
        for _ in 0..1000 {
            let rho = random_mixed(3, &mut rng).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            assert!(psd_check(rho.matrix(), PSD_TOL).unwrap());
            let p = purity(&rho);
            assert!(p > 1.0 / 3.0 && p < 1.0);
            DensityMatrix::new(rho.matrix().clone()).unwrap();
        }
    }

    #[test]
    fn rng_replay_is_deterministic() {
        let a = random_pure(4, &mut RngStream::new(42, 17)).unwrap();
        let b = random_pure(4, &mut RngStream::new(42, 17)).unwrap();
        let c = random_pure(4, &mut RngStream::new(42, 18)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn fig_state_domain() {
        assert!(fig_state(0.0, 0.3).is_err());
        assert!(fig_state(2.0 * PI, 0.3).is_err());
        let s = fig_state(1.0, 0.3).unwrap();
        assert!((purity(&s) - 1.0).abs() < 1e-12);
    }
}
