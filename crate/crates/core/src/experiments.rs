//! Figure sweeps, the randomized inequality harness and single-instance
//! reports that back the `qur` command line.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{
    orthogonal_qubit_state, maccone_pati_bound, robertson_bound, schrodinger_bound,
    sum_variance_lower_bound, unified_ledger,
};
use crate::io::{read_matrix, read_observable, read_state};
use crate::linalg::{pauli, psd_check, Complex, ComplexMatrix, PSD_TOL};
use crate::reverse::{
    bilinear_form, ledger_route_cs_bound, m_operator, mondal_upper_bound, multi_reverse_bound,
    optimize_phases, purity_lower_bound, reverse_bound_cs, reverse_bound_stateless,
    reverse_bound_trace, tightened_reverse_bound, ReverseBoundResult, SignBranch,
    DEFAULT_PHASE_GRID, DEFAULT_PHASE_TOL, MONDAL_EPS,
};
use crate::state::{
    covariance, fig_state, purity, random_hermitian, random_mixed, variance, DensityMatrix,
    Observable, RngStream,
};

/// φ used by both figure sweeps.
pub const FIG_PHI: f64 = FRAC_PI_2 - 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Real,
    /// Rendered as 0/1.
    Flag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<(&'static str, ColumnKind)>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|(n, _)| *n == name)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.theta).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta");
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format_real(row.theta));
            for ((_, kind), v) in self.columns.iter().zip(&row.values) {
                out.push(',');
                match kind {
                    ColumnKind::Real => out.push_str(&format_real(*v)),
                    ColumnKind::Flag => out.push_str(if *v != 0.0 { "1" } else { "0" }),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// 17 significant digits, enough to round-trip an f64.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// θ_j = 2πj/(points+1), j = 1..points: the open interval (0, 2π).
pub fn theta_grid(points: usize) -> Vec<f64> {
    (1..=points)
        .map(|j| TAU * j as f64 / (points + 1) as f64)
        .collect()
}

fn check_points(points: usize) -> Result<()> {
    if points < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 points, got {points}")));
    }
    Ok(())
}

fn sum_of_variances(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    Ok(variance(rho, a)? + variance(rho, b)?)
}

/// Mondal bound vs the state-independent bound along the figure state.
pub fn run_fig1(points: usize, phi: f64) -> Result<SweepTable> {
    check_points(points)?;
    let (a, b) = (Observable::sigma_x(), Observable::sigma_z());
    let rows = theta_grid(points)
        .into_iter()
        .map(|theta| {
            let rho = fig_state(theta, phi)?;
            let old = mondal_upper_bound(&rho, &a, &b, MONDAL_EPS)?;
            let new = reverse_bound_stateless(&rho, &a, &b)?;
            Ok(SweepRow {
                theta,
                values: vec![
                    old.value,
                    if old.diverged { 1.0 } else { 0.0 },
                    new.value,
                    sum_of_variances(&rho, &a, &b)?,
                ],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        columns: vec![
            ("u_old", ColumnKind::Real),
            ("u_old_diverged", ColumnKind::Flag),
            ("u_new", ColumnKind::Real),
            ("sum_var", ColumnKind::Real),
        ],
        rows,
    })
}

/// Auxiliaries appended one at a time for the second figure.
pub fn fig2_auxiliaries() -> [ComplexMatrix; 3] {
    [pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z()]
}

/// Tightened bound with 0..=3 extra auxiliaries along the figure state.
pub fn run_fig2(points: usize) -> Result<SweepTable> {
    check_points(points)?;
    let (a, b) = (Observable::sigma_x(), Observable::sigma_z());
    let aux = fig2_auxiliaries();
    let rows = theta_grid(points)
        .into_iter()
        .map(|theta| {
            let rho = fig_state(theta, FIG_PHI)?;
            let mut values = (0..=aux.len())
                .map(|m| Ok(tightened_reverse_bound(&rho, &a, &b, &aux[..m])?.value))
                .collect::<Result<Vec<_>>>()?;
            values.push(sum_of_variances(&rho, &a, &b)?);
            Ok(SweepRow { theta, values })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        columns: vec![
            ("u_0", ColumnKind::Real),
            ("u_1", ColumnKind::Real),
            ("u_2", ColumnKind::Real),
            ("u_3", ColumnKind::Real),
            ("sum_var", ColumnKind::Real),
        ],
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 10_000,
            dims: vec![2, 3, 4],
            seed: 42,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub dim: usize,
    pub inequality: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericalFailure {
    pub trial: usize,
    pub dim: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckTally {
    pub inequality: &'static str,
    pub checked: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
    pub tallies: Vec<CheckTally>,
    /// Sorted by trial id.
    pub failures: Vec<Failure>,
    pub numerical: Vec<NumericalFailure>,
    pub elapsed: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.numerical.is_empty()
    }

    /// 0 when clean, 3 on numerical failures, 2 on violated inequalities.
    pub fn exit_code(&self) -> i32 {
        if !self.numerical.is_empty() {
            3
        } else if !self.failures.is_empty() {
            2
        } else {
            0
        }
    }

    /// Plain-text report; the elapsed-time line comes last so it can be
    /// dropped when comparing runs.
    pub fn render(&self, with_elapsed: bool) -> String {
        let mut out = String::new();
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(
            out,
            "verify: trials={} dims={} seed={} tol={:e}",
            self.trials,
            dims.join(","),
            self.seed,
            self.tol
        );
        for t in &self.tallies {
            let status = if t.failed == 0 { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status} {:<34} checked={} failed={}", t.inequality, t.checked, t.failed);
        }
        for f in &self.failures {
            let _ = writeln!(
                out,
                "violation trial={} d={} {} lhs={} rhs={} gap={}",
                f.trial,
                f.dim,
                f.inequality,
                format_real(f.lhs),
                format_real(f.rhs),
                format_real(f.gap)
            );
        }
        for n in &self.numerical {
            let _ = writeln!(out, "numerical-failure trial={} d={} {}", n.trial, n.dim, n.message);
        }
        let _ = writeln!(
            out,
            "total: {} violations, {} numerical failures",
            self.failures.len(),
            self.numerical.len()
        );
        if with_elapsed {
            let _ = writeln!(out, "elapsed: {:.3}s", self.elapsed);
        }
        out
    }
}

/// Names of every check the harness runs, in report order.
pub const VERIFY_CHECKS: &[&str] = &[
    "bilinear_positivity",
    "bilinear_cauchy_schwarz",
    "covariance_cauchy_schwarz",
    "robertson_le_schrodinger",
    "schrodinger_le_variance_product",
    "lower_sum_bound_le_variance_sum",
    "ledger_total_le_lhs",
    "m_operator_psd",
    "m_operator_trace_inequality",
    "variance_sum_le_cauchy_schwarz",
    "cauchy_schwarz_le_trace_bound",
    "trace_bound_le_state_independent",
    "ledger_route_matches_cauchy_schwarz",
    "tightened_nonincreasing",
    "tightened_ge_variance_sum",
    "multi_two_observable_reduction",
    "mondal_valid_where_defined",
    "purity_bound_le_purity",
];

struct Checker {
    trial: usize,
    dim: usize,
    tol: f64,
    counts: Vec<(usize, usize)>,
    failures: Vec<Failure>,
    numerical: Option<String>,
}

impl Checker {
    fn slot(name: &'static str) -> usize {
        VERIFY_CHECKS
            .iter()
            .position(|n| *n == name)
            .expect("check is registered")
    }

    fn record(&mut self, name: &'static str, ok: bool, lhs: f64, rhs: f64) {
        let slot = Self::slot(name);
        self.counts[slot].0 += 1;
        if !ok {
            self.counts[slot].1 += 1;
            self.failures.push(Failure {
                trial: self.trial,
                dim: self.dim,
                inequality: name,
                lhs,
                rhs,
                gap: lhs - rhs,
            });
        }
    }

    fn scale(lhs: f64, rhs: f64) -> f64 {
        1f64.max(lhs.abs()).max(rhs.abs())
    }

    /// lhs ≤ rhs up to tol·max(1, |lhs|, |rhs|).
    fn le(&mut self, name: &'static str, lhs: f64, rhs: f64) {
        let ok = lhs <= rhs + self.tol * Self::scale(lhs, rhs);
        self.record(name, ok, lhs, rhs);
    }

    fn eq(&mut self, name: &'static str, lhs: f64, rhs: f64) {
        let ok = (lhs - rhs).abs() <= self.tol * Self::scale(lhs, rhs);
        self.record(name, ok, lhs, rhs);
    }
}

const VERIFY_AUXILIARIES: usize = 3;

fn verify_trial(checker: &mut Checker, rng: &mut RngStream) -> Result<()> {
    let d = checker.dim;
    let rho = random_mixed(d, rng)?;
    let a = random_hermitian(d, rng);
    let b = random_hermitian(d, rng);
    let op_a = rng.ginibre(d);
    let op_b = rng.ginibre(d);
    let aux: Vec<ComplexMatrix> = (0..VERIFY_AUXILIARIES).map(|_| rng.ginibre(d)).collect();

    let faa = bilinear_form(&rho, &op_a, &op_a)?;
    let fbb = bilinear_form(&rho, &op_b, &op_b)?;
    let fab = bilinear_form(&rho, &op_a, &op_b)?;
    checker.le("bilinear_positivity", 0.0, faa.re);
    checker.le("bilinear_cauchy_schwarz", fab.norm_sqr(), faa.re * fbb.re);

    let va = variance(&rho, &a)?;
    let vb = variance(&rho, &b)?;
    let sum = va + vb;
    let cov = covariance(&rho, &a, &b)?;
    checker.le("covariance_cauchy_schwarz", cov.abs(), va.sqrt() * vb.sqrt());

    let rob = robertson_bound(&rho, &a, &b)?;
    let sch = schrodinger_bound(&rho, &a, &b)?;
    checker.le("robertson_le_schrodinger", rob, sch);
    checker.le("schrodinger_le_variance_product", sch, va * vb);

    checker.le("lower_sum_bound_le_variance_sum", sum_variance_lower_bound(&rho, &a, &b, &aux)?, sum);
    for s in SignBranch::ALL {
        let x = [Complex::new(1.0, 0.0), Complex::new(0.0, s.sign())];
        let ledger = unified_ledger(&rho, &x, &[a.clone(), b.clone()], &aux)?;
        checker.le("ledger_total_le_lhs", ledger.total, ledger.lhs);

        let m = m_operator(&rho, &a, &b, s)?;
        checker.record("m_operator_psd", psd_check(&m, PSD_TOL)?, 0.0, 0.0);
        checker.le("m_operator_trace_inequality", m.hs_inner(&m).re.sqrt(), m.trace().re);
    }

    let cs = reverse_bound_cs(&rho, &a, &b)?;
    let tr = reverse_bound_trace(&rho, &a, &b)?;
    let st = reverse_bound_stateless(&rho, &a, &b)?;
    let route = ledger_route_cs_bound(&rho, &a, &b)?;
    for i in 0..2 {
        checker.le("variance_sum_le_cauchy_schwarz", sum, cs.per_branch[i]);
        checker.le("cauchy_schwarz_le_trace_bound", cs.per_branch[i], tr.per_branch[i]);
        checker.le("trace_bound_le_state_independent", tr.per_branch[i], st.per_branch[i]);
        checker.eq("ledger_route_matches_cauchy_schwarz", route.bound.per_branch[i], cs.per_branch[i]);
    }
    checker.le("variance_sum_le_cauchy_schwarz", sum, cs.value);
    checker.le("cauchy_schwarz_le_trace_bound", cs.value, tr.value);
    checker.le("trace_bound_le_state_independent", tr.value, st.value);

    let mut previous: Option<ReverseBoundResult> = None;
    for m in 0..=aux.len() {
        let t = tightened_reverse_bound(&rho, &a, &b, &aux[..m])?;
        if let Some(p) = previous {
            for i in 0..2 {
                checker.le("tightened_nonincreasing", t.per_branch[i], p.per_branch[i]);
            }
        }
        checker.le("tightened_ge_variance_sum", sum, t.value);
        previous = Some(t);
    }

    let multi = multi_reverse_bound(&rho, &[a.clone(), b.clone()], &[0.0, FRAC_PI_2], &[])?;
    checker.eq("multi_two_observable_reduction", multi, cs.branch(SignBranch::Minus));

    let old = mondal_upper_bound(&rho, &a, &b, MONDAL_EPS)?;
    if let Some(q) = old.denominator {
        if q.abs() >= 0.1 && va.sqrt() * vb.sqrt() >= 0.1 && !old.diverged {
            checker.le("mondal_valid_where_defined", sum, old.value);
        }
    }

    let estimate = purity_lower_bound(&rho, &a, &b)?;
    checker.le("purity_bound_le_purity", estimate, purity(&rho));
    Ok(())
}

/// Draws `trials` random instances and checks every inequality on each.
pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.trials == 0 {
        return Err(Error::InvalidInput("trials must be ≥ 1".into()));
    }
    if config.dims.is_empty() || config.dims.iter().any(|d| !(2..=8).contains(d)) {
        return Err(Error::InvalidInput(format!(
            "dims must be a non-empty subset of 2..=8, got {:?}",
            config.dims
        )));
    }
    let started = Instant::now();
    let outcomes: Vec<Checker> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let dim = config.dims[trial % config.dims.len()];
            let mut checker = Checker {
                trial,
                dim,
                tol: config.tol,
                counts: vec![(0, 0); VERIFY_CHECKS.len()],
                failures: Vec::new(),
                numerical: None,
            };
            let mut rng = RngStream::new(config.seed, trial as u64);
            if let Err(e) = verify_trial(&mut checker, &mut rng) {
                checker.numerical = Some(e.to_string());
            }
            checker
        })
        .collect();

    let mut tallies: Vec<CheckTally> = VERIFY_CHECKS
        .iter()
        .map(|&inequality| CheckTally {
            inequality,
            checked: 0,
            failed: 0,
        })
        .collect();
    let mut failures = Vec::new();
    let mut numerical = Vec::new();
    for c in outcomes {
        for (t, (checked, failed)) in tallies.iter_mut().zip(&c.counts) {
            t.checked += checked;
            t.failed += failed;
        }
        failures.extend(c.failures);
        if let Some(message) = c.numerical {
            numerical.push(NumericalFailure {
                trial: c.trial,
                dim: c.dim,
                message,
            });
        }
    }
    Ok(VerifyReport {
        trials: config.trials,
        dims: config.dims.clone(),
        seed: config.seed,
        tol: config.tol,
        tallies,
        failures,
        numerical,
        elapsed: started.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchReport {
    pub plus: f64,
    pub minus: f64,
    pub value: f64,
}

impl From<&ReverseBoundResult> for BranchReport {
    fn from(r: &ReverseBoundResult) -> Self {
        BranchReport {
            plus: r.branch(SignBranch::Plus),
            minus: r.branch(SignBranch::Minus),
            value: r.value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerReport {
    pub branch: String,
    pub lhs: f64,
    pub total: f64,
    pub terms: Vec<f64>,
    pub skipped: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MondalReport {
    pub value: Option<f64>,
    pub diverged: bool,
    pub denominator: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiReport {
    pub phases: Vec<f64>,
    pub value: f64,
    pub variance_sum: f64,
}

/// Everything the library can say about one (state, observables, auxiliaries)
/// instance. Pairwise quantities use the first two observables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub dim: usize,
    pub purity: f64,
    pub variances: Vec<f64>,
    pub covariance: f64,
    pub variance_product: f64,
    pub variance_sum: f64,
    pub robertson: f64,
    pub schrodinger: f64,
    pub maccone_pati: Option<BranchReport>,
    pub ledger: Vec<LedgerReport>,
    pub sum_variance_lower_bound: f64,
    pub mondal: MondalReport,
    pub cauchy_schwarz: BranchReport,
    pub trace_bound: BranchReport,
    pub state_independent: BranchReport,
    pub tightened: BranchReport,
    pub multi: MultiReport,
    pub purity_lower_bound: Option<f64>,
}

pub fn bound_report(
    rho: &DensityMatrix,
    observables: &[Observable],
    auxiliaries: &[ComplexMatrix],
) -> Result<BoundReport> {
    if observables.len() < 2 {
        return Err(Error::InvalidInput("need at least two observables".into()));
    }
    let (a, b) = (&observables[0], &observables[1]);
    let variances = observables
        .iter()
        .map(|o| variance(rho, o))
        .collect::<Result<Vec<_>>>()?;
    let (va, vb) = (variances[0], variances[1]);

    let maccone_pati = if rho.dim() == 2 && rho.is_pure(1e-10) {
        let perp = orthogonal_qubit_state(rho, 1e-10)?;
        let mp = maccone_pati_bound(rho, &perp, a, b)?;
        Some(BranchReport {
            plus: mp.branch(SignBranch::Plus),
            minus: mp.branch(SignBranch::Minus),
            value: mp.value,
        })
    } else {
        None
    };

    let ledger = SignBranch::ALL
        .iter()
        .map(|&s| {
            let x = [Complex::new(1.0, 0.0), Complex::new(0.0, s.sign())];
            let l = unified_ledger(rho, &x, &[a.clone(), b.clone()], auxiliaries)?;
            Ok(LedgerReport {
                branch: s.to_string(),
                lhs: l.lhs,
                total: l.total,
                terms: l.entries.iter().map(|e| e.term).collect(),
                skipped: l.entries.iter().map(|e| e.skipped).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let old = mondal_upper_bound(rho, a, b, MONDAL_EPS)?;
    let (phases, multi_value) =
        optimize_phases(rho, observables, auxiliaries, DEFAULT_PHASE_GRID, DEFAULT_PHASE_TOL)?;

    Ok(BoundReport {
        dim: rho.dim(),
        purity: purity(rho),
        covariance: covariance(rho, a, b)?,
        variance_product: va * vb,
        variance_sum: va + vb,
        robertson: robertson_bound(rho, a, b)?,
        schrodinger: schrodinger_bound(rho, a, b)?,
        maccone_pati,
        ledger,
        sum_variance_lower_bound: sum_variance_lower_bound(rho, a, b, auxiliaries)?,
        mondal: MondalReport {
            value: (!old.diverged).then_some(old.value),
            diverged: old.diverged,
            denominator: old.denominator,
        },
        cauchy_schwarz: (&reverse_bound_cs(rho, a, b)?).into(),
        trace_bound: (&reverse_bound_trace(rho, a, b)?).into(),
        state_independent: (&reverse_bound_stateless(rho, a, b)?).into(),
        tightened: (&tightened_reverse_bound(rho, a, b, auxiliaries)?).into(),
        multi: MultiReport {
            phases: phases.thetas().to_vec(),
            value: multi_value,
            variance_sum: variances.iter().sum(),
        },
        purity_lower_bound: purity_lower_bound(rho, a, b).ok(),
        variances,
    })
}

/// Reads and validates the files, then builds a [`BoundReport`].
pub fn run_bound_report(
    state_path: &Path,
    obs_paths: &[impl AsRef<Path>],
    aux_paths: &[impl AsRef<Path>],
) -> Result<BoundReport> {
    let rho = read_state(state_path)?;
    let observables = obs_paths
        .iter()
        .map(|p| read_observable(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let auxiliaries = aux_paths
        .iter()
        .map(|p| read_matrix(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    bound_report(&rho, &observables, &auxiliaries)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PurityEstimate {
    pub estimate: f64,
    pub purity: f64,
    pub gap: f64,
}

pub fn purity_estimate(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<PurityEstimate> {
    let estimate = purity_lower_bound(rho, a, b)?;
    let p = purity(rho);
    Ok(PurityEstimate {
        estimate,
        purity: p,
        gap: p - estimate,
    })
}

pub fn run_purity(state_path: &Path, obs_paths: &[impl AsRef<Path>]) -> Result<PurityEstimate> {
    if obs_paths.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "purity needs exactly two observables, got {}",
            obs_paths.len()
        )));
    }
    let rho = read_state(state_path)?;
    let a = read_observable(obs_paths[0].as_ref())?;
    let b = read_observable(obs_paths[1].as_ref())?;
    purity_estimate(&rho, &a, &b)
}
