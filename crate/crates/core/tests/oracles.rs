//! Checks against values computed independently of the library: closed-form
//! eigenvalues, analytic expressions for the qubit sweep states, and reference
//! numbers produced with a separate dense-linear-algebra implementation.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use qur_core::experiments::{fig2_auxiliaries, run_fig1, run_fig2, FIG_PHI};
use qur_core::linalg::{hermitian_eigenvalues, psd_check, PSD_TOL};
use qur_core::reverse::{
    m_operator, mondal_upper_bound, multi_reverse_bound, reverse_bound_cs, reverse_bound_stateless,
    tightened_reverse_bound, MONDAL_EPS,
};
use qur_core::state::{
    covariance, expectation, fig_state, maximally_mixed, random_hermitian, random_mixed, variance,
};
use qur_core::{Complex, ComplexMatrix, Observable, RngStream, SignBranch};

fn det3(m: &ComplexMatrix) -> Complex {
    let a = |i, j| m[(i, j)];
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

// Roots of λ² − tλ + δ.
fn roots2(m: &ComplexMatrix) -> Vec<f64> {
    let t = m.trace().re;
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let disc = (t * t - 4.0 * det).max(0.0).sqrt();
    vec![(t - disc) / 2.0, (t + disc) / 2.0]
}

// Real roots of the characteristic cubic, trigonometric form.
fn roots3(m: &ComplexMatrix) -> Vec<f64> {
    let c2 = m.trace().re;
    let m2 = m * m;
    let c1 = 0.5 * (c2 * c2 - m2.trace().re);
    let c0 = det3(m).re;
    // λ³ − c2 λ² + c1 λ − c0 = 0; shift λ = x + c2/3.
    let p = c1 - c2 * c2 / 3.0;
    let q = -2.0 * c2.powi(3) / 27.0 + c2 * c1 / 3.0 - c0;
    let shift = c2 / 3.0;
    if p.abs() < 1e-300 {
        return vec![shift; 3];
    }
    let r = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let mut roots: Vec<f64> = (0..3).map(|k| shift + r * (phi - TAU * k as f64 / 3.0).cos()).collect();
    roots.sort_by(f64::total_cmp);
    roots
}

#[test]
fn eigenvalues_match_characteristic_polynomial() {
    let mut rng = RngStream::new(5, 1);
    for d in [2usize, 3] {
        for _ in 0..200 {
            let h = random_hermitian(d, &mut rng).into_matrix();
            let want = if d == 2 { roots2(&h) } else { roots3(&h) };
            let got = hermitian_eigenvalues(&h, 1e-10).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-8, "d={d}: {got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn m_operator_is_psd_on_random_instances() {
    let mut rng = RngStream::new(6, 0);
    for k in 0..1000 {
        let d = 2 + k % 3;
        let rho = random_mixed(d, &mut rng).unwrap();
        let a = random_hermitian(d, &mut rng);
        let b = random_hermitian(d, &mut rng);
        for s in SignBranch::ALL {
            let m = m_operator(&rho, &a, &b, s).unwrap();
            assert!(psd_check(&m, PSD_TOL).unwrap());
            // Gram form: v†Mv = |X†v|² for any v, here a random probe.
            let v: Vec<Complex> = (0..d).map(|_| rng.complex_gaussian()).collect();
            let mut quad = Complex::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    quad += v[i].conj() * m[(i, j)] * v[j];
                }
            }
            assert!(quad.re >= -1e-10 && quad.im.abs() < 1e-9);
        }
    }
}

#[test]
fn sweep_state_expectations() {
    let mut rng = RngStream::new(7, 0);
    for _ in 0..100 {
        let theta = TAU * (0.001 + 0.998 * rng.uniform());
        let phi = TAU * rng.uniform();
        let rho = fig_state(theta, phi).unwrap();
        let (s, c) = (0.5 * theta).sin_cos();
        let ex = expectation(&rho, Observable::sigma_x().matrix()).unwrap();
        let ey = expectation(&rho, Observable::sigma_y().matrix()).unwrap();
        let ez = expectation(&rho, Observable::sigma_z().matrix()).unwrap();
        assert!((ex.re - c).abs() < 1e-12);
        assert!((ey.re - s * phi.cos()).abs() < 1e-12);
        assert!((ez.re - s * phi.sin()).abs() < 1e-12);
        assert!(ex.im.abs() + ey.im.abs() + ez.im.abs() < 1e-14);
    }
}

fn u_new_closed_form(theta: f64, phi: f64) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    2.0 * (2.0 + c * c + s * (-phi.cos().abs() + s * phi.sin().powi(2)))
}

#[test]
fn state_independent_bound_closed_form() {
    let (a, b) = (Observable::sigma_x(), Observable::sigma_z());
    let mut rng = RngStream::new(8, 0);
    for _ in 0..100 {
        let theta = TAU * (0.001 + 0.998 * rng.uniform());
        let phi = TAU * rng.uniform();
        let rho = fig_state(theta, phi).unwrap();
        let got = reverse_bound_stateless(&rho, &a, &b).unwrap().value;
        assert!((got - u_new_closed_form(theta, phi)).abs() < 1e-10);
    }
}

#[test]
fn fig1_matches_reference_values() {
    let (a, b) = (Observable::sigma_x(), Observable::sigma_z());
    let rho = fig_state(7.0 * PI / 4.0, FIG_PHI).unwrap();
    let old = mondal_upper_bound(&rho, &a, &b, MONDAL_EPS).unwrap();
    assert!(!old.diverged);
    assert!((old.value - 101.21215817310924).abs() < 1e-9, "{}", old.value);
    let new = reverse_bound_stateless(&rho, &a, &b).unwrap().value;
    assert!((new - 5.920671628816692).abs() < 1e-12);

    let table = run_fig1(1000, FIG_PHI).unwrap();
    let thetas = table.thetas();
    let u_new = table.column("u_new").unwrap();
    for (t, u) in thetas.iter().zip(&u_new) {
        assert!((u - u_new_closed_form(*t, FIG_PHI)).abs() < 1e-10);
    }
}

#[test]
fn mondal_bound_diverges_where_correlation_saturates() {
    // At φ = π/2 the sweep state has cov = ΔAΔB for θ ∈ (π, 2π).
    let (a, b) = (Observable::sigma_x(), Observable::sigma_z());
    let rho = fig_state(1.5 * PI + 0.2, FRAC_PI_2).unwrap();
    let r = mondal_upper_bound(&rho, &a, &b, 1e-9).unwrap();
    assert!(r.diverged);
    assert!(r.value.is_nan());
    assert!(r.denominator.unwrap().abs() < 1e-9);
    // Near the anchor, shrinking the cutoff keeps a finite, large value.
    let rho = fig_state(7.0 * PI / 4.0, FRAC_PI_2 - 1e-3).unwrap();
    let r = mondal_upper_bound(&rho, &a, &b, MONDAL_EPS).unwrap();
    assert!(!r.diverged && r.value > 1e4);
}

#[test]
fn fig2_matches_reference_values_at_pi() {
    let (a, b) = (Observable::sigma_x(), Observable::sigma_z());
    let rho = fig_state(PI, FIG_PHI).unwrap();
    let aux = fig2_auxiliaries();
    let want = [
        [6.013517919198067, 5.6141842526107535],
        [6.013517919198067, 5.6141842526107535],
        [5.246845493386698, 4.926405750606313],
        [3.9439731453414595, 3.38386898696471],
    ];
    for (k, w) in want.iter().enumerate() {
        let r = tightened_reverse_bound(&rho, &a, &b, &aux[..k]).unwrap();
        for (g, w) in r.per_branch.iter().zip(w) {
            assert!((g - w).abs() < 1e-10, "u_{k}: {:?} vs {w:?}", r.per_branch);
        }
    }
    let cs = reverse_bound_cs(&rho, &a, &b).unwrap();
    assert!((cs.value - want[0][1]).abs() < 1e-10);

    let table = run_fig2(3).unwrap();
    assert!((table.thetas()[1] - PI).abs() < 1e-15);
    let sum = table.column("sum_var").unwrap()[1];
    assert!((sum - 1.0099667110793793).abs() < 1e-12);
    let u3 = table.column("u_3").unwrap()[1];
    assert!((u3 - want[3][1]).abs() < 1e-10);
}

#[test]
fn covariance_and_variance_closed_forms() {
    let (a, b) = (Observable::sigma_x(), Observable::sigma_z());
    for j in 1..50 {
        let theta = TAU * j as f64 / 50.0;
        let rho = fig_state(theta, FIG_PHI).unwrap();
        let s = (0.5 * theta).sin();
        assert!((variance(&rho, &a).unwrap() - s * s).abs() < 1e-12);
        assert!((variance(&rho, &b).unwrap() - (1.0 - (s * FIG_PHI.sin()).powi(2))).abs() < 1e-12);
        assert!((covariance(&rho, &a, &b).unwrap() + 0.5 * theta.sin() * FIG_PHI.sin()).abs() < 1e-12);
    }
}

#[test]
fn three_paulis_on_maximally_mixed_qubit() {
    let rho = maximally_mixed(2).unwrap();
    let obs = [Observable::sigma_x(), Observable::sigma_y(), Observable::sigma_z()];
    let v = multi_reverse_bound(&rho, &obs, &[0.0; 3], &[]).unwrap();
    assert!((v - 3.0).abs() < 1e-12, "{v}");
}
