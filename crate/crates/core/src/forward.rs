//! Lower uncertainty bounds: Robertson, Schrödinger, Maccone–Pati and the
//! auxiliary-operator recursion that generalizes them.

use crate::error::{Error, Result};
use crate::linalg::{
    commutator, generalized_anticommutator, generalized_commutator, Complex, ComplexMatrix,
};
use crate::reverse::SignBranch;
use crate::state::{centered, expectation, purity, DensityMatrix, Observable};

/// Auxiliaries with |⟨O†O⟩| at or below this are skipped.
pub const SKIP_TOL: f64 = 1e-14;

const PURE_TOL: f64 = 1e-8;
const ORTHOGONAL_TOL: f64 = 1e-8;

/// One step of the auxiliary-operator recursion.
#[derive(Clone, Debug)]
pub struct LedgerEntry {
    /// 1-based position in the auxiliary sequence.
    pub k: usize,
    /// Residual F_k entering this step.
    pub residual: ComplexMatrix,
    pub auxiliary: ComplexMatrix,
    /// Nonnegative term L_k.
    pub term: f64,
    /// ⟨O_k†F_k⟩ in the reference state.
    pub overlap: Complex,
    /// |⟨O_k†O_k⟩| in the reference state.
    pub aux_norm: f64,
    pub skipped: bool,
}

/// Record of the recursion ⟨F₁†F₁⟩ ≥ Σ L_k + ⟨F_{m+1}†F_{m+1}⟩ ≥ Σ L_k.
#[derive(Clone, Debug)]
pub struct BoundLedger {
    pub entries: Vec<LedgerEntry>,
    /// Σ L_k
    pub total: f64,
    /// ⟨F₁†F₁⟩
    pub lhs: f64,
    /// F_{m+1}
    pub residual: ComplexMatrix,
}

impl BoundLedger {
    /// Runs the recursion from `f1` through `auxiliaries`, with every
    /// expectation taken in `reference`.
    pub fn build(
        reference: &DensityMatrix,
        f1: ComplexMatrix,
        auxiliaries: &[ComplexMatrix],
    ) -> Result<Self> {
        let rho = reference.matrix();
        rho.ensure_same_dim(&f1)?;
        for o in auxiliaries {
            rho.ensure_same_dim(o)?;
        }
        let lhs = rho.trace_product(&(&f1.adjoint() * &f1)).re;

        let mut entries = Vec::with_capacity(auxiliaries.len());
        let mut total = 0.0;
        let mut f = f1;
        for (idx, o) in auxiliaries.iter().enumerate() {
            let aux_norm = rho.trace_product(&(&o.adjoint() * o)).re.abs();
            let overlap = rho.trace_product(&(&o.adjoint() * &f));
            if aux_norm <= SKIP_TOL {
                entries.push(LedgerEntry {
                    k: idx + 1,
                    residual: f.clone(),
                    auxiliary: o.clone(),
                    term: 0.0,
                    overlap,
                    aux_norm,
                    skipped: true,
                });
                continue;
            }
            let gc = rho.trace_product(&generalized_commutator(&f, o)?);
            let ga = rho.trace_product(&generalized_anticommutator(&f, o)?);
            let term = (gc.norm_sqr() + ga.norm_sqr()) / (4.0 * aux_norm);
            let next = &f - &o.scale(overlap / aux_norm);
            entries.push(LedgerEntry {
                k: idx + 1,
                residual: std::mem::replace(&mut f, next),
                auxiliary: o.clone(),
                term,
                overlap,
                aux_norm,
                skipped: false,
            });
            total += term;
        }
        Ok(BoundLedger {
            entries,
            total,
            lhs,
            residual: f,
        })
    }

    /// Partial sums Σ_{k≤j} L_k for j = 1..m.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.entries
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e.term;
                Some(*acc)
            })
            .collect()
    }

    /// Σ L_k over entries after the first.
    pub fn total_after_first(&self) -> f64 {
        self.entries.iter().skip(1).map(|e| e.term).sum()
    }
}

/// Lower bound on a sum of two variances, resolved per sign branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchedLowerBound {
    /// Indexed by [`SignBranch::index`].
    pub per_branch: [f64; 2],
    /// Max over branches.
    pub value: f64,
    pub branch_chosen: SignBranch,
}

impl BranchedLowerBound {
    fn from_branches(per_branch: [f64; 2]) -> Self {
        let branch_chosen = if per_branch[1] > per_branch[0] {
            SignBranch::Minus
        } else {
            SignBranch::Plus
        };
        BranchedLowerBound {
            per_branch,
            value: per_branch[branch_chosen.index()],
            branch_chosen,
        }
    }

    pub fn branch(&self, s: SignBranch) -> f64 {
        self.per_branch[s.index()]
    }
}

fn check_pair(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<()> {
    rho.matrix().ensure_same_dim(a.matrix())?;
    rho.matrix().ensure_same_dim(b.matrix())
}

/// The real number i⟨[A, B]⟩.
pub fn commutator_term(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    check_pair(rho, a, b)?;
    let c = expectation(rho, &commutator(a.matrix(), b.matrix())?)?;
    Ok((Complex::i() * c).re)
}

/// |⟨[A, B]⟩ / 2i|²
pub fn robertson_bound(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    check_pair(rho, a, b)?;
    let c = expectation(rho, &commutator(a.matrix(), b.matrix())?)?;
    Ok(c.norm_sqr() / 4.0)
}

/// |⟨[A, B]⟩ / 2i|² + |⟨{Ǎ, B̌}⟩ / 2|²
pub fn schrodinger_bound(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    let rob = robertson_bound(rho, a, b)?;
    let ac = centered(rho, a)?;
    let bc = centered(rho, b)?;
    let anti = expectation(rho, &crate::linalg::anticommutator(&ac, &bc)?)?;
    Ok(rob + anti.norm_sqr() / 4.0)
}

/// The pure qubit state orthogonal to `psi`, i.e. the projector onto its
/// zero-eigenvalue eigenvector, I − ψ.
pub fn orthogonal_qubit_state(psi: &DensityMatrix, tol: f64) -> Result<DensityMatrix> {
    if psi.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "orthogonal state is only unique for qubits, got d = {}",
            psi.dim()
        )));
    }
    if purity(psi) < 1.0 - tol {
        return Err(Error::InvalidInput("orthogonal state needs a pure input".into()));
    }
    DensityMatrix::new(&ComplexMatrix::identity(2) - psi.matrix())
}

/// Sum-form bound: per branch s, |⟨ψ|A + s·iB|ψ⊥⟩|² + s·i⟨[A, B]⟩, max over s.
pub fn maccone_pati_bound(
    psi: &DensityMatrix,
    psi_perp: &DensityMatrix,
    a: &Observable,
    b: &Observable,
) -> Result<BranchedLowerBound> {
    check_pair(psi, a, b)?;
    psi.matrix().ensure_same_dim(psi_perp.matrix())?;
    if !psi.is_pure(PURE_TOL) || !psi_perp.is_pure(PURE_TOL) {
        return Err(Error::InvalidInput("Maccone–Pati bound needs pure states".into()));
    }
    let overlap = psi.matrix().trace_product(psi_perp.matrix()).re;
    if overlap > ORTHOGONAL_TOL {
        return Err(Error::InvalidInput(format!(
            "states are not orthogonal (overlap {overlap:e})"
        )));
    }
    let corr = commutator_term(psi, a, b)?;
    let mut per_branch = [0.0; 2];
    for s in SignBranch::ALL {
        let x = a.matrix() + &b.matrix().scale(Complex::new(0.0, s.sign()));
        // |⟨ψ|X|ψ⊥⟩|² = Tr(ψ X ψ⊥ X†), independent of the vectors' phases
        let amp = (&(psi.matrix() * &x) * psi_perp.matrix()).trace_product(&x.adjoint());
        per_branch[s.index()] = amp.re + s.sign() * corr;
    }
    Ok(BranchedLowerBound::from_branches(per_branch))
}

/// Recursion seeded with F₁ = Σ x_n·Ǎ_n, expectations in `rho`.
pub fn unified_ledger(
    rho: &DensityMatrix,
    coefficients: &[Complex],
    observables: &[Observable],
    auxiliaries: &[ComplexMatrix],
) -> Result<BoundLedger> {
    if observables.is_empty() {
        return Err(Error::InvalidInput("no observables given".into()));
    }
    if coefficients.len() != observables.len() {
        return Err(Error::InvalidInput(format!(
            "{} coefficients for {} observables",
            coefficients.len(),
            observables.len()
        )));
    }
    let d = rho.dim();
    let mut f1 = ComplexMatrix::zeros(d);
    for (x, a) in coefficients.iter().zip(observables) {
        f1 = &f1 + &centered(rho, a)?.scale(*x);
    }
    BoundLedger::build(rho, f1, auxiliaries)
}

/// Ledger with F₁ = Ǎ + s·iB̌, max over s of (Σ L_k − s·i⟨[A, B]⟩).
pub fn sum_variance_lower_bound(
    rho: &DensityMatrix,
    a: &Observable,
    b: &Observable,
    auxiliaries: &[ComplexMatrix],
) -> Result<f64> {
    Ok(sum_variance_lower_bound_branches(rho, a, b, auxiliaries)?.value)
}

pub fn sum_variance_lower_bound_branches(
    rho: &DensityMatrix,
    a: &Observable,
    b: &Observable,
    auxiliaries: &[ComplexMatrix],
) -> Result<BranchedLowerBound> {
    let corr = commutator_term(rho, a, b)?;
    let obs = [a.clone(), b.clone()];
    let mut per_branch = [0.0; 2];
    for s in SignBranch::ALL {
        let x = [Complex::new(1.0, 0.0), Complex::new(0.0, s.sign())];
        let ledger = unified_ledger(rho, &x, &obs, auxiliaries)?;
        per_branch[s.index()] = ledger.total - s.sign() * corr;
    }
    Ok(BranchedLowerBound::from_branches(per_branch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::state::{from_bloch, maximally_mixed, variance};

    fn ket0() -> DensityMatrix {
        from_bloch(0.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn robertson_cases() {
        let (x, y, z) = (Observable::sigma_x(), Observable::sigma_y(), Observable::sigma_z());
        let r = robertson_bound(&ket0(), &x, &y).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        assert!(robertson_bound(&ket0(), &z, &x).unwrap().abs() < 1e-15);
        let mx = maximally_mixed(2).unwrap();
        assert!(robertson_bound(&mx, &x, &z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn schrodinger_cases() {
        let (x, y, z) = (Observable::sigma_x(), Observable::sigma_y(), Observable::sigma_z());
        assert!((schrodinger_bound(&ket0(), &x, &y).unwrap() - 1.0).abs() < 1e-15);
        let mx = maximally_mixed(2).unwrap();
        assert!(schrodinger_bound(&mx, &x, &z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn orthogonal_state_cases() {
        let perp = orthogonal_qubit_state(&ket0(), 1e-10).unwrap();
        assert!(perp.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[0.0, 1.0])) < 1e-15);
        let plus = from_bloch(1.0, 0.0, 0.0).unwrap();
        let minus = orthogonal_qubit_state(&plus, 1e-10).unwrap();
        let expected = from_bloch(-1.0, 0.0, 0.0).unwrap();
        assert!(minus.matrix().max_abs_diff(expected.matrix()) < 1e-15);
        assert!(orthogonal_qubit_state(&maximally_mixed(2).unwrap(), 1e-10).is_err());
        assert!(orthogonal_qubit_state(&DensityMatrix::pure(&[Complex::new(1.0, 0.0); 3]).unwrap(), 1e-10).is_err());
    }

    #[test]
    fn maccone_pati_equality_cases() {
        let (x, y, z) = (Observable::sigma_x(), Observable::sigma_y(), Observable::sigma_z());
        let perp = orthogonal_qubit_state(&ket0(), 1e-10).unwrap();
        let mp = maccone_pati_bound(&ket0(), &perp, &x, &y).unwrap();
        assert!((mp.branch(SignBranch::Plus) - 2.0).abs() < 1e-14);
        assert!((mp.value - 2.0).abs() < 1e-14);
        let mp = maccone_pati_bound(&ket0(), &perp, &z, &z).unwrap();
        assert!(mp.per_branch.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn maccone_pati_rejects_bad_inputs() {
        let x = Observable::sigma_x();
        let mx = maximally_mixed(2).unwrap();
        assert!(maccone_pati_bound(&mx, &ket0(), &x, &x).is_err());
        assert!(maccone_pati_bound(&ket0(), &ket0(), &x, &x).is_err());
    }

    #[test]
    fn ledger_example_with_state_auxiliary() {
        // F₁ = σx + iσy annihilates |0⟩, so lhs = 2 + i·2i = 0 and L₁ = 0.
        let rho = ket0();
        let x = [Complex::new(1.0, 0.0), Complex::new(0.0, 1.0)];
        let obs = [Observable::sigma_x(), Observable::sigma_y()];
        let ledger = unified_ledger(&rho, &x, &obs, &[rho.matrix().clone()]).unwrap();
        assert!(ledger.lhs.abs() < 1e-14);
        assert!(ledger.entries[0].term.abs() < 1e-14);
        assert!(ledger.total <= ledger.lhs + 1e-12);

        let x = [Complex::new(1.0, 0.0), Complex::new(0.0, -1.0)];
        let ledger = unified_ledger(&rho, &x, &obs, &[rho.matrix().clone()]).unwrap();
        assert!((ledger.lhs - 4.0).abs() < 1e-14);
        assert!(ledger.total <= ledger.lhs + 1e-12);
    }

    #[test]
    fn ledger_empty_and_skip() {
        let rho = maximally_mixed(2).unwrap();
        let obs = [Observable::sigma_x()];
        let one = [Complex::new(1.0, 0.0)];
        let empty = unified_ledger(&rho, &one, &obs, &[]).unwrap();
        assert_eq!(empty.total, 0.0);
        assert!(empty.entries.is_empty());
        assert!((empty.lhs - 1.0).abs() < 1e-15);

        let ledger =
            unified_ledger(&rho, &one, &obs, &[ComplexMatrix::zeros(2), pauli::sigma_x()]).unwrap();
        let first = &ledger.entries[0];
        assert!(first.skipped);
        assert_eq!(first.term, 0.0);
        assert_eq!(ledger.entries[1].residual, first.residual);
        assert!((ledger.total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ledger_errors() {
        let rho = maximally_mixed(2).unwrap();
        assert!(unified_ledger(&rho, &[], &[], &[]).is_err());
        let obs = [Observable::sigma_x()];
        assert!(unified_ledger(&rho, &[], &obs, &[]).is_err());
        let one = [Complex::new(1.0, 0.0)];
        assert!(unified_ledger(&rho, &one, &obs, &[ComplexMatrix::identity(3)]).is_err());
    }

    #[test]
    fn sum_lower_bound_empty_reduces_to_commutator() {
        let rho = ket0();
        let (x, y) = (Observable::sigma_x(), Observable::sigma_y());
        let v = sum_variance_lower_bound(&rho, &x, &y, &[]).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        let sum = variance(&rho, &x).unwrap() + variance(&rho, &y).unwrap();
        assert!((v - sum).abs() < 1e-14);
    }
}
