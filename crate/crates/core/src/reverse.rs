//! Reverse (upper) uncertainty bounds on sums of variances and the purity
//! estimate they imply.
//!
//! Everything here is built on the state-weighted bilinear form
//! F(𝒜, ℬ) = Tr(ρ·𝒜†·ℬ) and on the positive operator
//! M_s = (Ǎ + s·iB̌)(Ǎ − s·iB̌), whose ρ-expectation is
//! ΔA² + ΔB² − s·i⟨[A, B]⟩. Comparing that expectation with the same form
//! taken in the maximally mixed state yields the chain
//!
//! ```text
//! ΔA² + ΔB² ≤ √Tr(ρ²)·√Tr(M_s²) + s·i⟨[A,B]⟩      (Cauchy–Schwarz)
//!           ≤ √Tr(ρ²)·Tr(M_s)   + s·i⟨[A,B]⟩      (M_s ⪰ 0)
//!           ≤ Tr(M_s)           + s·i⟨[A,B]⟩      (Tr(ρ²) ≤ 1)
//! ```
//!
//! Both sign branches are always evaluated and the smaller one reported.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};
use crate::forward::{commutator_term, BoundLedger};
use crate::linalg::{generalized_anticommutator, Complex, ComplexMatrix};
use crate::state::{centered, covariance, purity, variance, DensityMatrix, Observable};

/// Default threshold below which the Mondal bound is reported as divergent.
pub const MONDAL_EPS: f64 = 1e-12;
/// Default grid resolution per free phase.
pub const DEFAULT_PHASE_GRID: usize = 64;
/// Default convergence tolerance of the phase coordinate descent.
pub const DEFAULT_PHASE_TOL: f64 = 1e-8;

const RADICAND_TOL: f64 = 1e-10;
const DEGENERATE_TOL: f64 = 1e-12;
const FULL_GRID_LIMIT: usize = 1 << 20;
const GOLDEN_X_TOL: f64 = 1e-10;
const MAX_DESCENT_ROUNDS: usize = 500;

/// The ± choice in (Ǎ ± iB̌)(Ǎ ∓ iB̌).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignBranch {
    Plus,
    Minus,
}

impl SignBranch {
    pub const ALL: [SignBranch; 2] = [SignBranch::Plus, SignBranch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            SignBranch::Plus => 1.0,
            SignBranch::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            SignBranch::Plus => 0,
            SignBranch::Minus => 1,
        }
    }
}

impl fmt::Display for SignBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignBranch::Plus => "plus",
            SignBranch::Minus => "minus",
        })
    }
}

/// Upper bound on ΔA² + ΔB², resolved per sign branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReverseBoundResult {
    /// Indexed by [`SignBranch::index`].
    pub per_branch: [f64; 2],
    /// Min over branches; NaN when `diverged`.
    pub value: f64,
    /// Only ever set by [`mondal_upper_bound`].
    pub diverged: bool,
    pub branch_chosen: SignBranch,
    /// 1 − cov/(ΔAΔB) for the Mondal bound; `None` elsewhere or when ΔAΔB vanishes.
    pub denominator: Option<f64>,
}

impl ReverseBoundResult {
    fn from_branches(per_branch: [f64; 2]) -> Self {
        let branch_chosen = if per_branch[1] < per_branch[0] {
            SignBranch::Minus
        } else {
            SignBranch::Plus
        };
        ReverseBoundResult {
            per_branch,
            value: per_branch[branch_chosen.index()],
            diverged: false,
            branch_chosen,
            denominator: None,
        }
    }

    pub fn branch(&self, s: SignBranch) -> f64 {
        self.per_branch[s.index()]
    }
}

/// Gauge-fixed phases for the multi-observable bound, θ₁ = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    /// Shifts `thetas` so the first entry is 0 and wraps into [0, 2π).
    pub fn new(thetas: &[f64]) -> Result<Self> {
        let first = *thetas
            .first()
            .ok_or_else(|| Error::InvalidInput("empty phase vector".into()))?;
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("phases must be finite".into()));
        }
        Ok(PhaseVector(thetas.iter().map(|t| wrap(t - first)).collect()))
    }

    pub fn zeros(n: usize) -> Self {
        PhaseVector(vec![0.0; n])
    }

    pub fn thetas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn wrap(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn check_pair(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<()> {
    rho.matrix().ensure_same_dim(a.matrix())?;
    rho.matrix().ensure_same_dim(b.matrix())
}

fn clamp_radicand(value: f64, scale: f64) -> Result<f64> {
    if value < -RADICAND_TOL * scale.max(1.0) {
        return Err(Error::NegativeRadicand { value });
    }
    Ok(value.max(0.0))
}

/// F(𝒜, ℬ) = Tr(ρ·𝒜†·ℬ)
pub fn bilinear_form(rho: &DensityMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex> {
    rho.matrix().ensure_same_dim(a)?;
    a.ensure_same_dim(b)?;
    Ok(rho.matrix().trace_product(&(&a.adjoint() * b)))
}

/// M_s = (Ǎ + s·iB̌)(Ǎ − s·iB̌), centered in ρ.
pub fn m_operator(
    rho: &DensityMatrix,
    a: &Observable,
    b: &Observable,
    branch: SignBranch,
) -> Result<ComplexMatrix> {
    check_pair(rho, a, b)?;
    let ac = centered(rho, a)?;
    let bc = centered(rho, b)?;
    let x = &ac + &bc.scale(Complex::new(0.0, branch.sign()));
    Ok(&x * &x.adjoint())
}

// Per-branch quantities shared by the reverse bounds.
struct Pieces {
    purity: f64,
    corr: f64,
    m: [ComplexMatrix; 2],
    tr_m: [f64; 2],
    tr_m2: [f64; 2],
}

impl Pieces {
    fn new(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<Self> {
        let m = [
            m_operator(rho, a, b, SignBranch::Plus)?,
            m_operator(rho, a, b, SignBranch::Minus)?,
        ];
        let tr_m = [m[0].trace().re, m[1].trace().re];
        let tr_m2 = [m[0].hs_inner(&m[0]).re, m[1].hs_inner(&m[1]).re];
        Ok(Pieces {
            purity: purity(rho),
            corr: commutator_term(rho, a, b)?,
            m,
            tr_m,
            tr_m2,
        })
    }

    fn collect(&self, mut f: impl FnMut(SignBranch) -> Result<f64>) -> Result<ReverseBoundResult> {
        Ok(ReverseBoundResult::from_branches([
            f(SignBranch::Plus)?,
            f(SignBranch::Minus)?,
        ]))
    }
}

/// Mondal's bound 2Δ(A−B)²/(1 − cov/(ΔAΔB)) − 2ΔAΔB, with its divergence
/// reported as data.
pub fn mondal_upper_bound(
    rho: &DensityMatrix,
    a: &Observable,
    b: &Observable,
    eps: f64,
) -> Result<ReverseBoundResult> {
    check_pair(rho, a, b)?;
    let da = variance(rho, a)?.sqrt();
    let db = variance(rho, b)?.sqrt();
    let cov = covariance(rho, a, b)?;
    let diff = Observable::new(a.matrix() - b.matrix())?;
    let var_diff = variance(rho, &diff)?;
    let prod = da * db;

    let denominator = (prod > eps).then(|| 1.0 - cov / prod);
    let diverged = denominator.is_none_or(|q| q.abs() <= eps);
    let value = match denominator {
        Some(q) if !diverged => 2.0 * var_diff / q - 2.0 * prod,
        _ => f64::NAN,
    };
    Ok(ReverseBoundResult {
        per_branch: [value; 2],
        value,
        diverged,
        branch_chosen: SignBranch::Plus,
        denominator,
    })
}

/// √Tr(ρ²)·√Tr(M_s†M_s) + s·i⟨[A, B]⟩
pub fn reverse_bound_cs(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<ReverseBoundResult> {
    let p = Pieces::new(rho, a, b)?;
    p.collect(|s| Ok(p.purity.sqrt() * p.tr_m2[s.index()].sqrt() + s.sign() * p.corr))
}

/// √Tr(ρ²)·Tr(M_s) + s·i⟨[A, B]⟩
pub fn reverse_bound_trace(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<ReverseBoundResult> {
    let p = Pieces::new(rho, a, b)?;
    p.collect(|s| Ok(p.purity.sqrt() * p.tr_m[s.index()] + s.sign() * p.corr))
}

/// Tr(M_s) + s·i⟨[A, B]⟩, which no longer depends on the purity.
pub fn reverse_bound_stateless(
    rho: &DensityMatrix,
    a: &Observable,
    b: &Observable,
) -> Result<ReverseBoundResult> {
    let p = Pieces::new(rho, a, b)?;
    p.collect(|s| Ok(p.tr_m[s.index()] + s.sign() * p.corr))
}

/// Cauchy–Schwarz bound tightened by auxiliary operators.
///
/// The recursion starts from F₁ = M_s with O₁ = ρ implied and runs through
/// `auxiliaries` (O₂, O₃, …) in the maximally mixed state; every term after
/// the first is subtracted from the budget Tr(M_s†M_s).
pub fn tightened_reverse_bound(
    rho: &DensityMatrix,
    a: &Observable,
    b: &Observable,
    auxiliaries: &[ComplexMatrix],
) -> Result<ReverseBoundResult> {
    let p = Pieces::new(rho, a, b)?;
    let d = rho.dim();
    let mixed = DensityMatrix::uniform(d);
    let mut ops = Vec::with_capacity(auxiliaries.len() + 1);
    ops.push(rho.matrix().clone());
    ops.extend_from_slice(auxiliaries);
    p.collect(|s| {
        let i = s.index();
        let reduction = if auxiliaries.is_empty() {
            0.0
        } else {
            d as f64 * BoundLedger::build(&mixed, p.m[i].clone(), &ops)?.total_after_first()
        };
        let radicand = clamp_radicand(p.tr_m2[i] - reduction, p.tr_m2[i])?;
        Ok(p.purity.sqrt() * radicand.sqrt() + s.sign() * p.corr)
    })
}

/// The Cauchy–Schwarz bound re-derived through a single-step ledger
/// (F₁ = M_s, O₁ = ρ, maximally mixed reference).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerRoute {
    /// Bound value per branch, rebuilt from ⟨F₁†F₁⟩ and ⟨O₁†O₁⟩.
    pub bound: ReverseBoundResult,
    /// ΔA² + ΔB² per branch, recovered from the bracket numerator
    /// |⟨[F₁,O₁]_G⟩|² + |⟨{F₁,O₁}_G⟩|² = 4(ΔA² + ΔB² − s·i⟨[A,B]⟩)²/d².
    pub recovered_sum: [f64; 2],
}

pub fn ledger_route_cs_bound(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<LedgerRoute> {
    check_pair(rho, a, b)?;
    let d = rho.dim() as f64;
    let corr = commutator_term(rho, a, b)?;
    let mixed = DensityMatrix::uniform(rho.dim());
    let mut per_branch = [0.0; 2];
    let mut recovered_sum = [0.0; 2];
    for s in SignBranch::ALL {
        let m = m_operator(rho, a, b, s)?;
        let ledger = BoundLedger::build(&mixed, m, std::slice::from_ref(rho.matrix()))?;
        let step = &ledger.entries[0];
        let numerator = 4.0 * step.term * step.aux_norm;
        recovered_sum[s.index()] = 0.5 * d * numerator.sqrt() + s.sign() * corr;
        per_branch[s.index()] = 0.5 * d * (4.0 * ledger.lhs * step.aux_norm).sqrt() + s.sign() * corr;
    }
    Ok(LedgerRoute {
        bound: ReverseBoundResult::from_branches(per_branch),
        recovered_sum,
    })
}

fn check_multi(rho: &DensityMatrix, observables: &[Observable], phases: &[f64]) -> Result<()> {
    if observables.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least two observables, got {}",
            observables.len()
        )));
    }
    if phases.len() != observables.len() {
        return Err(Error::InvalidInput(format!(
            "{} phases for {} observables",
            phases.len(),
            observables.len()
        )));
    }
    for a in observables {
        rho.matrix().ensure_same_dim(a.matrix())?;
    }
    Ok(())
}

fn phased(centered_obs: &[ComplexMatrix], phases: &[f64]) -> Vec<ComplexMatrix> {
    centered_obs
        .iter()
        .zip(phases)
        .map(|(a, &t)| a.scale(Complex::from_polar(1.0, t)))
        .collect()
}

/// Σ_{k<l} ⟨{e^{iθ_k}Ǎ_k, e^{iθ_l}Ǎ_l}_G⟩, real up to roundoff.
pub fn phase_cross_term(rho: &DensityMatrix, observables: &[Observable], phases: &[f64]) -> Result<Complex> {
    check_multi(rho, observables, phases)?;
    let centered_obs = observables
        .iter()
        .map(|a| centered(rho, a))
        .collect::<Result<Vec<_>>>()?;
    cross_term(rho, &phased(&centered_obs, phases))
}

fn cross_term(rho: &DensityMatrix, x: &[ComplexMatrix]) -> Result<Complex> {
    let mut acc = Complex::new(0.0, 0.0);
    for k in 0..x.len() {
        for l in (k + 1)..x.len() {
            acc += rho.matrix().trace_product(&generalized_anticommutator(&x[k], &x[l])?);
        }
    }
    Ok(acc)
}

// Evaluator with the centered observables cached, used by the optimizer.
struct MultiBound<'a> {
    rho: &'a DensityMatrix,
    centered: Vec<ComplexMatrix>,
    ops: Vec<ComplexMatrix>,
    mixed: DensityMatrix,
}

impl<'a> MultiBound<'a> {
    fn new(rho: &'a DensityMatrix, observables: &[Observable], auxiliaries: &[ComplexMatrix]) -> Result<Self> {
        for o in auxiliaries {
            rho.matrix().ensure_same_dim(o)?;
        }
        let centered = observables
            .iter()
            .map(|a| centered(rho, a))
            .collect::<Result<Vec<_>>>()?;
        let mut ops = Vec::with_capacity(auxiliaries.len() + 1);
        ops.push(rho.matrix().clone());
        ops.extend_from_slice(auxiliaries);
        Ok(MultiBound {
            rho,
            centered,
            ops,
            mixed: DensityMatrix::uniform(rho.dim()),
        })
    }

    fn eval(&self, phases: &[f64]) -> Result<f64> {
        let d = self.rho.dim() as f64;
        let x = phased(&self.centered, phases);
        let mut g = ComplexMatrix::zeros(self.rho.dim());
        for xl in &x {
            g = &g + xl;
        }
        let f1 = &g.adjoint() * &g;
        let cross = cross_term(self.rho, &x)?.re;
        let ledger = BoundLedger::build(&self.mixed, f1, &self.ops)?;
        // ⟨F₁†F₁⟩ in the mixed state is Tr(F₁F₁)/d since F₁ is Hermitian
        let budget = ledger.lhs;
        let radicand = clamp_radicand(
            d * purity(self.rho) * (budget - ledger.total_after_first()),
            d * budget,
        )?;
        Ok(-cross + radicand.sqrt())
    }
}

/// Upper bound on Σ_j ΔA_j² for N observables at the given phases.
pub fn multi_reverse_bound(
    rho: &DensityMatrix,
    observables: &[Observable],
    phases: &[f64],
    auxiliaries: &[ComplexMatrix],
) -> Result<f64> {
    check_multi(rho, observables, phases)?;
    MultiBound::new(rho, observables, auxiliaries)?.eval(phases)
}

/// Minimizes [`multi_reverse_bound`] over the phases with θ₁ = 0: a coarse
/// grid search followed by golden-section coordinate descent.
pub fn optimize_phases(
    rho: &DensityMatrix,
    observables: &[Observable],
    auxiliaries: &[ComplexMatrix],
    grid: usize,
    tol: f64,
) -> Result<(PhaseVector, f64)> {
    let n = observables.len();
    check_multi(rho, observables, &vec![0.0; n])?;
    if grid < 8 {
        return Err(Error::InvalidInput(format!("phase grid must be ≥ 8, got {grid}")));
    }
    let bound = MultiBound::new(rho, observables, auxiliaries)?;
    let free = n - 1;
    let step = TAU / grid as f64;
    let grid_point = |j: usize| step * j as f64;

    let mut phases = vec![0.0; n];
    let mut best = bound.eval(&phases)?;

    let full = (grid as u128).checked_pow(free as u32).filter(|&c| c <= FULL_GRID_LIMIT as u128);
    if let Some(count) = full {
        let mut trial = vec![0.0; n];
        for flat in 0..count as usize {
            let mut rem = flat;
            for slot in trial.iter_mut().skip(1) {
                *slot = grid_point(rem % grid);
                rem /= grid;
            }
            let v = bound.eval(&trial)?;
            if v < best {
                best = v;
                phases.copy_from_slice(&trial);
            }
        }
    } else {
        loop {
            let before = best;
            for c in 1..n {
                let mut trial = phases.clone();
                for j in 0..grid {
                    trial[c] = grid_point(j);
                    let v = bound.eval(&trial)?;
                    if v < best {
                        best = v;
                        phases[c] = trial[c];
                    }
                }
            }
            if best >= before {
                break;
            }
        }
    }

    for _ in 0..MAX_DESCENT_ROUNDS {
        let before = best;
        for c in 1..n {
            let center = phases[c];
            let mut trial = phases.clone();
            let mut f = |t: f64| -> Result<f64> {
                trial[c] = t;
                bound.eval(&trial)
            };
            let (t, v) = golden_section(&mut f, center - step, center + step)?;
            if v < best {
                best = v;
                phases[c] = t;
            }
        }
        if before - best < tol {
            break;
        }
    }
    Ok((PhaseVector::new(&phases)?, best))
}

fn golden_section(f: &mut impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > GOLDEN_X_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Lower bound on Tr(ρ²): max over branches of (Tr(ρM_s)/Tr(M_s))², in [0, 1].
pub fn purity_lower_bound(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    check_pair(rho, a, b)?;
    let sum = variance(rho, a)? + variance(rho, b)?;
    let corr = commutator_term(rho, a, b)?;
    let mut best: Option<f64> = None;
    for s in SignBranch::ALL {
        let tr_m = m_operator(rho, a, b, s)?.trace().re;
        let numerator = sum - s.sign() * corr;
        if tr_m <= DEGENERATE_TOL || numerator <= DEGENERATE_TOL * (1.0 + tr_m) {
            continue;
        }
        let estimate = (numerator / tr_m).powi(2);
        best = Some(best.map_or(estimate, |b: f64| b.max(estimate)));
    }
    best.map(|v| v.clamp(0.0, 1.0)).ok_or(Error::DegenerateEstimate)
}
