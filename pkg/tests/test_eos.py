import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from liquidball.eos import EosAssumptionError, build_affine, thermo_roundtrip, validate_assumptions


def test_stiff_closed_forms():
    eos = build_affine(c2=1.0, eps0=1.0, A=1.0)
    assert eos.sigma0 == pytest.approx(1.0)
    assert eos.rho0 == pytest.approx(1.0)
    assert np.all(eos.e_prime(np.linspace(0.5, 10, 50)) == 0.0)
    # sigma = 4 -> rho = 2, eps = 2.5, p = 1.5, sqrt(sigma) = (eps+p)/rho
    p, rho, eps = eos.thermo(4.0)
    assert rho == pytest.approx(2.0, rel=1e-12)
    assert eps == pytest.approx(2.5, rel=1e-12)
    assert p == pytest.approx(1.5, rel=1e-12)
    assert (eps + p) / rho == pytest.approx(2.0, rel=1e-12)


def test_e_prime_direct_value():
    eos = build_affine(c2=0.5, eps0=1.0, A=1.0)
    assert eos.e_prime(1.0) == pytest.approx(0.5, rel=1e-12)


def test_pressure_zero_at_sigma0_and_monotone():
    for c2 in (1.0, 0.5, 0.25):
        eos = build_affine(c2=c2, eps0=0.7, A=1.3)
        assert eos.pressure(eos.sigma0) == pytest.approx(0.0, abs=1e-12)
        sig = np.linspace(eos.sigma0 / 2, 10 * eos.sigma0, 300)
        p = eos.pressure(sig)
        assert np.all(np.diff(p) > 0)


def test_thermo_against_ode_oracle():
    # integrate d eps/d rho = (eps + p(eps))/rho from the boundary state
    for c2 in (1.0, 0.4):
        eos = build_affine(c2=c2, eps0=1.0, A=1.0)

        def rhs(rho, eps):
            return (eps + c2 * (eps - 1.0)) / rho

        rho_grid = np.linspace(eos.rho0, 3.0 * eos.rho0, 40)
        sol = solve_ivp(rhs, (rho_grid[0], rho_grid[-1]), [eos.eps0],
                        t_eval=rho_grid, rtol=1e-11, atol=1e-13)
        eps_oracle = sol.y[0]
        eps_closed = eos.energy_density(eos.sigma_from_density(rho_grid))
        assert np.max(np.abs(eps_closed - eps_oracle)) < 1e-8


def test_enthalpy_definition_identity():
    # sqrt(sigma) * rho = eps + p across the sweep
    for c2 in (1.0, 0.6, 0.25):
        eos = build_affine(c2=c2, eps0=0.9, A=1.1)
        sig = np.linspace(eos.sigma0 / 2, 10 * eos.sigma0, 100)
        p, rho, eps = eos.thermo(sig)
        assert np.max(np.abs(np.sqrt(sig) * rho - (eps + p))) < 1e-10 * np.max(eps + p)


def test_e_prime_identity_two_ways():
    # numerical derivative of e vs (eta^-2 - 1)/(2 sigma), 100-point sweep
    for c2 in (1.0, 0.5, 0.3):
        eos = build_affine(c2=c2, eps0=1.0, A=1.0)
        sig = np.linspace(eos.sigma0 / 2, 10 * eos.sigma0, 100)
        h = 1e-6
        numeric = (eos.e(sig + h) - eos.e(sig - h)) / (2 * h)
        identity = (1.0 / c2 - 1.0) / (2.0 * sig)
        assert np.max(np.abs(numeric - identity)) < 1e-8
        assert np.max(np.abs(eos.e_prime(sig) - identity)) < 1e-14


@settings(max_examples=100, deadline=None)
@given(c2=st.floats(0.05, 1.0), eps0=st.floats(0.1, 5.0), A=st.floats(0.1, 5.0),
       frac=st.floats(0.5, 10.0))
def test_roundtrip_bijectivity(c2, eps0, A, frac):
    eos = build_affine(c2=c2, eps0=eps0, A=A)
    sigma = frac * eos.sigma0
    (_, _, _), back = thermo_roundtrip(eos, sigma)
    for key, val in back.items():
        assert val == pytest.approx(sigma, rel=1e-10), key


def test_sigma_floor_enforced():
    eos = build_affine(c2=1.0, eps0=1.0, A=1.0)
    with pytest.raises(EosAssumptionError):
        eos.thermo(0.4 * eos.sigma0)


def test_boundary_pressure_exact_zero():
    eos = build_affine(c2=0.8, eps0=2.0, A=0.5)
    p, _, _ = eos.thermo(eos.sigma0)
    assert p == pytest.approx(0.0, abs=1e-14)


def test_validate_assumptions_affine():
    rep = validate_assumptions(build_affine(c2=0.25, eps0=1.0, A=1.0), n_orders=3)
    assert rep.L1 == pytest.approx(0.25)
    assert rep.L2 == pytest.approx(0.25)
    assert rep.passed


def test_validate_assumptions_stiff_trivial():
    # stiff with A = 1: e is identically zero, all derivative bounds are 0
    rep = validate_assumptions(build_affine(c2=1.0, eps0=1.0, A=1.0))
    assert rep.e_deriv_sup == 0.0
    assert rep.passed


def test_invalid_parameters_rejected():
    with pytest.raises(EosAssumptionError):
        build_affine(c2=1.5, eps0=1.0, A=1.0)
    with pytest.raises(EosAssumptionError):
        build_affine(c2=0.0, eps0=1.0, A=1.0)
    with pytest.raises(EosAssumptionError):
        build_affine(c2=1.0, eps0=-1.0, A=1.0)
    with pytest.raises(EosAssumptionError):
        build_affine(c2=1.0, eps0=1.0, A=0.0)
