import numpy as np
import pytest
from scipy.integrate import solve_ivp

from liquidball.charts import SpacetimeChart
from liquidball.eos import build_affine
from liquidball.radial import (
    NumericalAbort,
    acoustic_mode_frequency,
    acoustic_period,
    add_acoustic_perturbation,
    cfl_time_step,
    evolve,
    hydrostatic_equilibrium,
    measure_frequency,
    residuals,
    step,
    uniform_ball,
    volume_mesh,
    volume_ode,
    volume_tracking,
)

FLAT = SpacetimeChart("minkowski")
TRAP = SpacetimeChart("trap", k=0.1)
STIFF = build_affine(1.0, 1.0, 1.0)


def test_uniform_ball_flat_limit():
    st = hydrostatic_equilibrium(FLAT, STIFF, 64)
    assert np.allclose(st.sigma, STIFF.sigma0)
    assert np.all(st.v_r == 0.0)
    assert np.allclose(st.v_t, np.sqrt(STIFF.sigma0))
    assert np.max(np.abs(st.constraint_residual())) < 1e-14


def test_hydrostatic_profile_against_closed_form():
    errs = []
    for n in (100, 200):
        st = hydrostatic_equilibrium(TRAP, STIFF, n)
        xc = st.cell_centers()
        exact = STIFF.sigma0 * (1.0 + TRAP.k) / (1.0 + TRAP.k * xc**2)
        errs.append(np.max(np.abs(st.sigma - exact)))
    assert np.log2(errs[0] / errs[1]) > 1.8
    assert errs[1] < 1e-6


def test_hydrostatic_pressure_profile_against_shooting_oracle():
    # integrate dp/dr = -(eps + p) phi' / (1 + 2 phi) inward from p(R) = 0
    k = 0.1
    chart = SpacetimeChart("trap", k=k)
    st = hydrostatic_equilibrium(chart, STIFF, 200)
    xc = st.cell_centers()
    p_cells = STIFF.pressure(st.sigma)

    def rhs(r, p):
        eps = p / STIFF.c2 + STIFF.eps0
        return -(eps + p) * k * r / (1.0 + k * r * r)

    sol = solve_ivp(rhs, (1.0, xc[0]), [0.0], t_eval=xc[::-1],
                    rtol=1e-10, atol=1e-12)
    p_oracle = sol.y[0][::-1]
    assert np.max(np.abs(p_cells - p_oracle)) < 1e-5
    assert p_cells[0] > 0
    assert np.all(np.diff(p_cells) < 1e-12)


def test_static_state_is_fixed_point():
    st = hydrostatic_equilibrium(TRAP, STIFF, 100)
    dt = cfl_time_step(st)
    rec = evolve(st, dt, 100, store_every=100)
    out = rec.states[-1]
    assert np.max(np.abs(out.sigma - st.sigma)) < 1e-10
    assert np.max(np.abs(out.v_r)) < 1e-10
    assert np.max(np.abs(out.nodes - st.nodes)) < 1e-10
    assert np.max(np.abs(out.jac - 1.0)) < 1e-10


def test_oscillation_frequency_matches_linear_oracle():
    n = 128
    st = add_acoustic_perturbation(uniform_ball(FLAT, STIFF, n), 1e-3, mode=1)
    dt = 0.5 * cfl_time_step(st)
    steps = int(np.ceil(3 * acoustic_period(st) / dt))
    rec = evolve(st, dt, steps, store_every=1)
    center = np.array([s.sigma[0] for s in rec.states])
    omega = measure_frequency(np.array(rec.times), center)
    assert omega == pytest.approx(acoustic_mode_frequency(st), rel=0.05)


def test_measure_frequency_pure_tone():
    t = np.arange(0, 10, 0.01)
    assert measure_frequency(t, 0.3 + np.cos(2.3 * t + 0.4)) == pytest.approx(2.3, rel=1e-6)


def test_time_reversal():
    st = add_acoustic_perturbation(uniform_ball(FLAT, STIFF, 64), 1e-3)
    dt = 0.5 * cfl_time_step(st)
    fwd, _ = step(st, dt)
    back, _ = step(fwd, -dt)
    assert np.max(np.abs(back.sigma - st.sigma)) < 1e-10
    assert np.max(np.abs(back.v_r - st.v_r)) < 1e-10
    assert np.max(np.abs(back.nodes - st.nodes)) < 1e-10


def test_constraint_drift_fifth_order():
    # probe at a state with nonzero velocity; freshly seeded states have
    # v_r = 0 and sit on the velocity-reversal symmetry axis, where the
    # odd dt^5 drift term cancels and the measurement jumps to dt^6
    st = add_acoustic_perturbation(uniform_ball(FLAT, STIFF, 16), 0.3)
    dt = 0.4 * cfl_time_step(st)
    rec = evolve(st, dt, int(0.25 * acoustic_period(st) / dt))
    mid = rec.states[-1]
    dt0 = 0.4 * cfl_time_step(mid)
    drifts = []
    for d in (dt0, dt0 / 2):
        _, rep = step(mid, d)
        drifts.append(rep.constraint_drift)
    order = np.log2(drifts[0] / drifts[1])
    assert 4.5 < order < 5.5
    # post-enforcement residual is at machine precision
    _, rep = step(mid, dt0)
    assert rep.constraint_max < 1e-13


def test_constraint_preserved_along_run():
    st = add_acoustic_perturbation(uniform_ball(FLAT, STIFF, 64), 1e-3)
    dt = 0.5 * cfl_time_step(st)
    rec = evolve(st, dt, 200, store_every=200)
    assert max(rec.constraint_max) < 1e-12
    assert max(rec.constraint_drift) < 1e-8


def test_boundary_conditions_hold_each_step():
    st = add_acoustic_perturbation(uniform_ball(FLAT, STIFF, 64), 1e-3)
    dt = 0.5 * cfl_time_step(st)
    rec = evolve(st, dt, 50, store_every=1)
    for s in rec.states:
        assert s.sigma_nodes()[-1] == pytest.approx(STIFF.sigma0, abs=1e-12)
        assert s.v_r[0] == 0.0
        # the boundary node moves with the particle flow
        assert s.nodes[-1] != 1.0 or s.t == 0.0 or np.max(np.abs(s.v_r)) == 0


def test_volume_tracking_static():
    st = hydrostatic_equilibrium(TRAP, STIFF, 64)
    dt = cfl_time_step(st)
    rec = evolve(st, dt, 20, store_every=1)
    track = volume_tracking(rec.states)
    assert np.max(np.abs(track.vol_ode - track.vol_ode[0])) < 1e-12
    assert np.max(np.abs(track.vol_mesh - track.vol_mesh[0])) < 1e-12
    assert volume_ode(st) == pytest.approx(4 * np.pi / 3, rel=1e-12)
    assert volume_mesh(st) == pytest.approx(4 * np.pi / 3, rel=1e-12)


def test_volume_tracking_oscillating_gap_small():
    st = add_acoustic_perturbation(uniform_ball(FLAT, STIFF, 96), 1e-3)
    dt = 0.5 * cfl_time_step(st)
    rec = evolve(st, dt, 150, store_every=10)
    track = volume_tracking(rec.states)
    # gap is O(h^2 + dt^4); at n = 96 that is a few times 1e-5
    assert np.max(track.relative_gap) < 2e-4


def test_residuals_static_flat_all_zero():
    st = uniform_ball(FLAT, STIFF, 64)
    rep = residuals(st)
    assert rep.constraint_max < 1e-12
    assert rep.boundary_pressure < 1e-12
    assert rep.boundary_flux < 1e-12
    assert rep.sdiv_identity < 1e-10
    assert rep.wave_equation_l2 < 1e-10
    assert rep.momentum_order1_l2 < 1e-10
    assert rep.mass_order1_l2 < 1e-10


def test_residuals_oscillating_finite_and_small():
    st = add_acoustic_perturbation(uniform_ball(FLAT, STIFF, 96), 1e-3)
    dt = 0.5 * cfl_time_step(st)
    rec = evolve(st, dt, 20, store_every=20)
    rep = residuals(rec.states[-1])
    assert rep.constraint_max < 1e-12
    assert rep.boundary_flux < 1e-12
    assert np.isfinite(rep.wave_equation_l2)
    assert rep.wave_equation_l2 < 1e-4


def test_wave_residual_converges_in_h():
    vals = []
    for n in (64, 128):
        st = add_acoustic_perturbation(uniform_ball(FLAT, STIFF, n), 1e-3)
        vals.append(residuals(st).wave_equation_l2)
    assert np.log2(vals[0] / vals[1]) > 1.9


def test_stiff_mass_monitor_reduces_to_divergence():
    # for e' = 0 the mass combination is just div(grad-bar V)
    st = add_acoustic_perturbation(uniform_ball(FLAT, STIFF, 64), 1e-3)
    rep = residuals(st)
    assert rep.mass_order1_l2 < 1e-8  # v = 0 at seed time


def test_cfl_violation_rejected():
    st = uniform_ball(FLAT, STIFF, 64)
    with pytest.raises(NumericalAbort):
        step(st, 10.0 * cfl_time_step(st))


def test_sigma_positivity_guard():
    st = uniform_ball(FLAT, STIFF, 64)
    st.sigma[:] = -1.0
    with pytest.raises(NumericalAbort):
        step(st, 1e-4)
