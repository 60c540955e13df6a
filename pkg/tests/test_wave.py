import numpy as np
import pytest

from liquidball.charts import SpacetimeChart
from liquidball.eos import build_affine
from liquidball.wave import (
    WaveProblem,
    WaveSetupError,
    fundamental_mode,
    manufactured_parabola,
    wave_solve,
)

FLAT = SpacetimeChart("minkowski")
STIFF = build_affine(1.0, 1.0, 1.0)


def test_zero_data_stays_zero():
    prob = WaveProblem(FLAT, STIFF)
    hist = wave_solve(prob, n=64, t_end=1.0)
    assert np.max(np.abs(hist.psi)) == 0.0
    assert np.max(hist.energy) == 0.0


def test_fundamental_mode_conservation_and_frequency():
    profile, omega = fundamental_mode()
    prob = WaveProblem(FLAT, STIFF, psi0=profile)
    period = 2 * np.pi / omega
    hist = wave_solve(prob, n=256, t_end=10 * period)
    assert hist.energy_drift < 1e-6
    assert hist.frequency_estimate == pytest.approx(np.pi, rel=0.01)


def test_manufactured_solution_error():
    psi, source, psi0, psi1 = manufactured_parabola(eta=1.0)
    errs = []
    for n in (32, 64):
        prob = WaveProblem(FLAT, STIFF, psi0=psi0, psi1=psi1, source=source,
                           boundary_value=0.0)
        hist = wave_solve(prob, n=n, t_end=1.0)
        exact = psi(hist.times[-1], hist.r)
        errs.append(np.max(np.abs(hist.psi[-1] - exact)))
    assert errs[1] < 1.5e-3
    assert np.log2(errs[0] / errs[1]) > 1.5


def test_second_mode_frequency():
    profile, omega = fundamental_mode(mode=2)
    prob = WaveProblem(FLAT, STIFF, psi0=profile)
    hist = wave_solve(prob, n=128, t_end=4.0)
    assert hist.frequency_estimate == pytest.approx(2 * np.pi, rel=0.01)


def test_soft_eos_slows_the_mode():
    soft = build_affine(0.25, 1.0, 1.0)  # eta = 0.5
    profile, _ = fundamental_mode()
    prob = WaveProblem(FLAT, soft, psi0=profile)
    hist = wave_solve(prob, n=128, t_end=10.0)
    assert hist.frequency_estimate == pytest.approx(0.5 * np.pi, rel=0.01)
    assert hist.energy_drift < 1e-6


def test_nonzero_boundary_value():
    profile, _ = fundamental_mode()
    c0 = 2.5
    prob = WaveProblem(FLAT, STIFF, boundary_value=c0,
                       psi0=lambda r: c0 + profile(r))
    hist = wave_solve(prob, n=64, t_end=1.0)
    assert np.all(np.abs(hist.psi[:, -1] - c0) < 1e-12)


def test_trap_chart_runs_and_shifts_frequency():
    trap = SpacetimeChart("trap", k=0.2)
    profile, _ = fundamental_mode()
    prob = WaveProblem(trap, STIFF, psi0=profile)
    hist = wave_solve(prob, n=128, t_end=8.0)
    assert np.all(np.isfinite(hist.energy))
    # the variable lapse shifts the eigenfrequency by O(k)
    assert abs(hist.frequency_estimate - np.pi) > 5e-3
    assert abs(hist.frequency_estimate - np.pi) < 0.3


def test_incompatible_boundary_rejected():
    with pytest.raises(WaveSetupError):
        WaveProblem(FLAT, STIFF, psi0=lambda r: np.ones_like(r), boundary_value=0.0)
