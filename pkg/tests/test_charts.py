import numpy as np
import pytest

from liquidball.charts import (
    ChartDomainError,
    SpacetimeChart,
    covariant_derivative_fn,
    curvature_report,
    event,
    tensor_norm,
)


def fd_christoffels(chart, p, h=1e-5):
    """Oracle: Gamma from central differences of the metric components."""
    g = chart.metric(p)
    ginv = chart.metric_inverse(p)
    dg = np.zeros((4, 4, 4))  # [mu, a, b] = d_mu g_ab
    for mu in range(4):
        dp = np.zeros(4)
        dp[mu] = h
        dg[mu] = (chart.metric(p + dp) - chart.metric(p - dp)) / (2 * h)
    gam = np.zeros((4, 4, 4))
    for b in range(4):
        for a in range(4):
            for n in range(4):
                s = 0.0
                for l in range(4):
                    s += 0.5 * ginv[b, l] * (dg[a, l, n] + dg[n, l, a] - dg[l, a, n])
                gam[b, a, n] = s
    return gam


SAMPLE_EVENTS = [
    event(0.0, 0.3, -0.2, 0.5),
    event(1.5, 0.0, 0.0, 0.0),
    event(-0.7, 0.9, 0.1, -0.4),
]


@pytest.mark.parametrize("chart", [SpacetimeChart("minkowski"), SpacetimeChart("trap", k=0.25)])
@pytest.mark.parametrize("p", SAMPLE_EVENTS)
def test_metric_signature(chart, p):
    g = chart.metric(p)
    eig = np.linalg.eigvalsh(g)
    assert np.sum(eig < 0) == 1 and np.sum(eig > 0) == 3


def test_minkowski_is_flat():
    chart = SpacetimeChart("minkowski")
    pts = np.array(SAMPLE_EVENTS)
    assert np.all(chart.christoffels(pts) == 0.0)
    assert np.all(chart.riemann(pts) == 0.0)


@pytest.mark.parametrize("p", SAMPLE_EVENTS)
def test_trap_christoffels_match_fd_oracle(p):
    chart = SpacetimeChart("trap", k=0.3)
    exact = chart.christoffels(p)
    # measured convergence order of the oracle against the analytic value
    errs = []
    for h in (1e-2, 5e-3):
        errs.append(np.max(np.abs(fd_christoffels(chart, p, h) - exact)))
    if errs[0] > 1e-12:
        order = np.log2(errs[0] / errs[1])
        assert order > 1.9
    assert errs[-1] < 1e-6


def test_trap_radial_christoffel_values():
    k = 0.1
    chart = SpacetimeChart("trap", k=k)
    p = event(0.0, 0.6, 0.0, 0.0)
    gam = chart.christoffels(p)
    # Gamma^i_00 = d_i phi for the metric -(1+2 phi) dt^2 + dx^2
    assert gam[1, 0, 0] == pytest.approx(k * 0.6, rel=1e-12)
    # Gamma^0_0i = d_i phi / (1 + 2 phi)
    a2 = 1 + k * 0.36
    assert gam[0, 0, 1] == pytest.approx(k * 0.6 / a2, rel=1e-12)
    # symmetry in the lower pair
    assert np.allclose(gam, np.swapaxes(gam, 1, 2))


def test_christoffel_derivs_match_fd():
    chart = SpacetimeChart("trap", k=0.2)
    p = event(0.0, 0.4, -0.3, 0.2)
    h = 1e-5
    for mu in range(4):
        dp = np.zeros(4)
        dp[mu] = h
        fd = (chart.christoffels(p + dp) - chart.christoffels(p - dp)) / (2 * h)
        assert np.allclose(chart.christoffel_derivs(p)[mu], fd, atol=1e-8)


def test_trap_first_bianchi():
    chart = SpacetimeChart("trap", k=0.4)
    pts = np.array(SAMPLE_EVENTS)
    rm = chart.riemann_lower(pts)
    cyc = rm + np.einsum("...namb->...mnab", rm) + np.einsum("...amnb->...mnab", rm)
    # cyclic sum over the first three slots vanishes
    assert np.max(np.abs(cyc)) < 1e-8
    # and the tensor is antisymmetric in the commutator pair
    assert np.max(np.abs(rm + np.einsum("...nmab->...mnab", rm))) < 1e-12


def test_trap_k0_reduces_to_minkowski():
    trap0 = SpacetimeChart("trap", k=0.0)
    mink = SpacetimeChart("minkowski")
    pts = np.array(SAMPLE_EVENTS)
    assert np.allclose(trap0.metric(pts), mink.metric(pts))
    assert np.all(trap0.riemann(pts) == 0.0)


@pytest.mark.parametrize("chart", [SpacetimeChart("minkowski"), SpacetimeChart("trap", k=0.15)])
@pytest.mark.parametrize("p", SAMPLE_EVENTS)
def test_frame_invariants(chart, p):
    fr = chart.frame(p)
    g = chart.metric(p)
    assert fr.tau_upper @ fr.tau_lower == pytest.approx(-1.0, abs=1e-12)
    assert fr.tau_upper[0] > 0
    # gbar annihilates tau
    assert np.max(np.abs(fr.gbar_lower @ fr.tau_upper)) < 1e-12
    # projector is idempotent
    assert np.allclose(fr.spatial_proj @ fr.spatial_proj, fr.spatial_proj, atol=1e-12)
    # riem_lower and riem_upper are inverse to each other
    assert np.allclose(fr.riem_lower @ fr.riem_upper, np.eye(4), atol=1e-12)
    # consistency with the metric: tau_lower = g tau_upper
    assert np.allclose(g @ fr.tau_upper, fr.tau_lower, atol=1e-12)


def test_minkowski_frame_components():
    fr = SpacetimeChart("minkowski").frame(event(0, 0.1, 0.2, 0.3))
    assert np.allclose(fr.tau_upper, [1, 0, 0, 0])
    assert np.allclose(fr.tau_lower, [-1, 0, 0, 0])


def test_trap_lapse_frame():
    k = 0.2
    chart = SpacetimeChart("trap", k=k)
    r = 0.8
    p = event(0.0, r, 0.0, 0.0)
    a = np.sqrt(1 + k * r * r)
    fr = chart.frame(p)
    assert fr.tau_upper[0] == pytest.approx(1.0 / a, rel=1e-12)
    assert fr.tau_lower[0] == pytest.approx(-a, rel=1e-12)


def test_minkowski_curvature_report_zero():
    chart = SpacetimeChart("minkowski")
    pts = np.array(SAMPLE_EVENTS)
    assert curvature_report(chart, pts) == 0.0


def test_trap_curvature_report_positive_and_k0_degenerate():
    pts = np.array([event(0.0, 0.5, 0.0, 0.0)])
    assert curvature_report(SpacetimeChart("trap", k=0.3), pts, n_orders=1) > 0.0
    assert curvature_report(SpacetimeChart("trap", k=0.0), pts, n_orders=1) == 0.0


def test_covariant_derivative_of_metric_vanishes():
    chart = SpacetimeChart("trap", k=0.3)
    dfn, slots = covariant_derivative_fn(chart, chart.metric, "ll", step=1e-4)
    pts = np.array([event(0.0, 0.4, 0.2, -0.1)])
    assert slots == "lll"
    assert np.max(np.abs(dfn(pts))) < 1e-7


def test_tensor_norm_vector():
    chart = SpacetimeChart("minkowski")
    fr = chart.frame(event(0, 0, 0, 0))
    v = np.array([2.0, 1.0, 0.0, 0.0])
    # riem metric is Euclidean in Minkowski: |v| = sqrt(5)
    assert tensor_norm(v, "u", fr) == pytest.approx(np.sqrt(5.0))


def test_invalid_chart_rejected():
    with pytest.raises(ChartDomainError):
        SpacetimeChart("schwarzschild")
    with pytest.raises(ChartDomainError):
        SpacetimeChart("trap", k=-1.0)
