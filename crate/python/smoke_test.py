"""Smoke test for the pyqur extension module.

Build and install first:  pip install maturin && maturin develop -m crates/python/Cargo.toml
"""

import math

import pyqur


def close(a, b, tol=1e-12):
    assert abs(a - b) <= tol, (a, b)


def main():
    up = pyqur.DensityMatrix([[1, 0], [0, 0]])
    x, y, z = pyqur.Observable.sigma_x(), pyqur.Observable.sigma_y(), pyqur.Observable.sigma_z()

    close(pyqur.variance(up, x) * pyqur.variance(up, y), 1.0)
    close(pyqur.robertson_bound(up, x, y), 1.0)
    close(pyqur.maccone_pati_bound(up, x, y)[0], 2.0)
    for bound in (pyqur.reverse_bound_cs, pyqur.reverse_bound_trace, pyqur.reverse_bound_stateless):
        close(bound(up, x, y).value, 2.0)
    close(pyqur.purity_lower_bound(up, x, y), 1.0)

    mixed = pyqur.DensityMatrix.maximally_mixed(2)
    close(pyqur.purity_lower_bound(mixed, x, z), 0.25)
    close(mixed.purity(), 0.5)
    close(pyqur.multi_reverse_bound(mixed, [x, y, z], [0.0, 0.0, 0.0]), 3.0)

    phases, value = pyqur.optimize_phases(up, [x, y])
    close(value, 2.0, 1e-6)
    assert phases[0] == 0.0

    rho = pyqur.DensityMatrix.fig_state(7 * math.pi / 4, math.pi / 2 - 0.1)
    old = pyqur.mondal_upper_bound(rho, x, z)
    new = pyqur.reverse_bound_stateless(rho, x, z).value
    assert not old.diverged and old.value / new > 10

    aux = [o.to_list() for o in (x, y, z)]
    values = [pyqur.tightened_reverse_bound(rho, x, z, aux[:k]).value for k in range(4)]
    assert all(a >= b - 1e-9 for a, b in zip(values, values[1:])), values

    columns, rows = pyqur.run_fig1(50)
    assert columns == ["theta", "u_old", "u_old_diverged", "u_new", "sum_var"] and len(rows) == 50
    columns, rows = pyqur.run_fig2(50)
    assert columns[0] == "theta" and len(rows) == 50

    passed, report = pyqur.run_verify(trials=200, dims=[2, 3])
    assert passed, report

    try:
        pyqur.DensityMatrix([[0.5, 0], [0, 0.4]])
    except ValueError as err:
        assert "trace" in str(err)
    else:
        raise AssertionError("unnormalized state accepted")
    try:
        pyqur.Observable([[0, 1], [0.5, 0]])
    except ValueError as err:
        assert "Hermitian" in str(err)
    else:
        raise AssertionError("non-Hermitian observable accepted")

    print("pyqur smoke test passed")


if __name__ == "__main__":
    main()
