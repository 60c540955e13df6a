import numpy as np
import pytest

from liquidball.boundary import (
    BallDomain,
    GeometryError,
    dtgam_residual,
    gamma_gradient_bound,
    projection_identity_check,
    projection_identity_convergence,
    second_fundamental_form,
    smoothstep_quintic,
    taylor_sign_margin,
)
from liquidball.charts import SpacetimeChart
from liquidball.eos import build_affine
from liquidball.grids import sphere_grid

FLAT = SpacetimeChart("minkowski")


def test_smoothstep_endpoints_and_monotonicity():
    t = np.linspace(-0.5, 1.5, 201)
    s = smoothstep_quintic(t)
    assert s[0] == 0.0 and s[-1] == 1.0
    assert np.all(np.diff(s) >= 0)
    # C^2: first and second derivatives vanish at the endpoints
    h = 1e-5
    for t0 in (0.0, 1.0):
        d1 = (smoothstep_quintic(t0 + h) - smoothstep_quintic(t0 - h)) / (2 * h)
        d2 = (smoothstep_quintic(t0 + h) - 2 * smoothstep_quintic(t0)
              + smoothstep_quintic(t0 - h)) / h**2
        assert abs(d1) < 1e-8
        assert abs(d2) < 1e-3


def test_chi_plateaus():
    dom = BallDomain(1.0)
    pts = np.zeros((3, 4))
    pts[:, 1] = [0.1, 0.8, 0.99]  # d = 0.9, 0.2, 0.01
    chi = dom.chi(pts)
    assert chi[0] == 0.0
    assert chi[1] == 1.0  # d = 0.2 <= iota0/4
    assert chi[2] == 1.0


def test_normal_unit_and_projection_idempotent():
    dom = BallDomain(1.0)
    sph = sphere_grid(12)
    n = dom.normal_ext(sph.points, fd_step=1e-4)
    assert np.max(np.abs(np.linalg.norm(n, axis=1) - 1.0)) < 1e-10
    pts = np.zeros((5, 4))
    pts[:, 1] = [0.2, 0.5, 0.85, 0.95, 0.999]
    proj = dom.proj_ext(pts)
    assert np.max(np.abs(np.einsum("mij,mjk->mik", proj, proj) - proj)) < 1e-10
    # identity deep inside; kills the normal at the boundary
    assert np.allclose(proj[0], np.eye(3), atol=1e-12)
    nb = dom.normal_ext(pts[-1:])
    assert np.max(np.abs(np.einsum("ij,j->i", proj[-1], nb[0]))) < 1e-10


def test_theta_unit_sphere():
    dom = BallDomain(1.0)
    rep = second_fundamental_form(dom, FLAT, fd_step=1e-4)
    # theta = gamma on the unit sphere: trace 2, |theta| = sqrt(2)
    assert rep.trace_mean == pytest.approx(2.0, abs=1e-5)
    assert np.max(np.abs(rep.theta_abs - np.sqrt(2.0))) < 1e-5
    # symmetric
    th = rep.theta.components
    assert np.max(np.abs(th - np.swapaxes(th, 1, 2))) < 1e-8
    assert rep.iota0 == 1.0
    assert rep.K == pytest.approx(np.sqrt(2.0) + 1.0, abs=1e-5)


@pytest.mark.parametrize("R", [0.5, 2.0])
def test_theta_scaling(R):
    rep = second_fundamental_form(BallDomain(R), FLAT, fd_step=1e-4)
    assert np.max(np.abs(rep.theta_abs - np.sqrt(2.0) / R)) < 1e-4 / R
    assert rep.trace_mean == pytest.approx(2.0 / R, abs=1e-4)


def test_theta_level_set_convergence_to_sphere_value():
    dom = BallDomain(1.0)
    errs = []
    for h in (2e-2, 1e-2):
        rep = second_fundamental_form(dom, FLAT, fd_step=h)
        errs.append(abs(rep.trace_mean - 2.0))
    assert np.log2(errs[0] / errs[1]) > 1.7


def test_projection_identity_paraboloid():
    dom = BallDomain(1.0)

    def q(xyz):
        return np.sum(xyz * xyz, axis=-1) - 1.0

    rep = projection_identity_check(dom, FLAT, q, fd_step=1e-3)
    # both sides equal 2*gamma up to O(h^2)
    assert rep.lhs_sup == pytest.approx(2.0, abs=1e-4)
    assert rep.residual_sup < 1e-4


def test_projection_identity_convergence_order():
    dom = BallDomain(1.0)

    def q(xyz):
        return np.sum(xyz * xyz, axis=-1) - 1.0

    _, orders = projection_identity_convergence(dom, FLAT, q, steps=(4e-3, 2e-3, 1e-3))
    for o in orders:
        assert 1.8 < o < 2.2


def test_projection_identity_degenerate_double_zero():
    dom = BallDomain(1.0)

    def q(xyz):
        return (np.sum(xyz * xyz, axis=-1) - 1.0) ** 2

    rep = projection_identity_check(dom, FLAT, q, fd_step=1e-3)
    # normal derivative vanishes too: both sides go to zero
    assert rep.rhs_sup < 1e-5
    assert rep.lhs_sup < 1e-5


def test_projection_identity_requires_vanishing_q():
    dom = BallDomain(1.0)
    with pytest.raises(ValueError):
        projection_identity_check(dom, FLAT, lambda xyz: np.sum(xyz, axis=-1), 1e-3)


def test_taylor_margin_static_flat_ball_degenerate():
    eos = build_affine(1.0, 1.0, 1.0)
    r = np.linspace(0, 1, 50)
    sigma = np.full_like(r, eos.sigma0)
    tm = taylor_sign_margin(r, sigma, eos)
    assert tm.delta == pytest.approx(0.0, abs=1e-12)
    assert tm.degenerate


def test_taylor_margin_trap_profile():
    # hydrostatic profile sigma * (1 + 2 phi) = const in the trap chart
    eos = build_affine(1.0, 1.0, 1.0)
    k, R = 0.1, 1.0
    r = np.linspace(0, R, 400)
    alpha2 = 1.0 + k * r * r
    sigma = eos.sigma0 * (1.0 + k * R * R) / alpha2
    tm = taylor_sign_margin(r, sigma, eos)
    # dsigma/dr(R) = -sigma0 * 2 k R / (1 + 2 phi(R))
    expect_dp = eos.rho0 / (2 * np.sqrt(eos.sigma0)) * sigma[-1] * 2 * k * R / alpha2[-1]
    assert tm.delta == pytest.approx(expect_dp, rel=1e-4)
    assert not tm.degenerate
    assert tm.delta_prime > 0
    # doubling k roughly doubles the margin
    sigma2 = eos.sigma0 * (1.0 + 2 * k * R * R) / (1.0 + 2 * k * r * r)
    tm2 = taylor_sign_margin(r, sigma2, eos)
    assert tm2.delta / tm.delta == pytest.approx(2.0, rel=0.1)


def test_gamma_gradient_bound_constant():
    sup, bound, c = gamma_gradient_bound(BallDomain(1.0), FLAT)
    assert np.isfinite(sup) and sup > 0
    assert c <= 4.0


def test_dtgam_residual_first_order():
    # kinematic check on a manufactured radial motion x(t) = 1 + 0.1 sin t
    res_by_dt = []
    for dt in (1e-3, 5e-4):
        t = np.arange(0.0, 0.5, dt)
        x = 1.0 + 0.1 * np.sin(t)
        w = 0.1 * np.cos(t)
        res = dtgam_residual(t, x, w)
        res_by_dt.append(np.max(np.abs(res)))
    order = np.log2(res_by_dt[0] / res_by_dt[1])
    assert 0.8 < order < 1.3


def test_center_normal_rejected():
    dom = BallDomain(1.0)
    with pytest.raises(GeometryError):
        dom.normal_ext(np.zeros((1, 4)))
