import numpy as np
import pytest

from liquidball.charts import SpacetimeChart
from liquidball.fields import (
    InvalidVelocityError,
    MixedNorm,
    StencilError,
    boundary_sobolev_norm,
    check_four_velocity,
    curl4,
    divergence,
    four_vector_field,
    l2_norm,
    laplace_beltrami,
    material_derivative,
    mixed_norm,
    norm_pointwise,
    scalar_field,
    scurl,
    sobolev_norm,
    spatial_derivative,
    spatial_divergence,
    spatial_vector_field,
    tangential_derivative,
    tau_derivative,
)
from liquidball.grids import ball_lattice, radial_grid, sphere_grid

FLAT = SpacetimeChart("minkowski")
TRAP = SpacetimeChart("trap", k=0.2)


@pytest.fixture(scope="module")
def lat():
    return ball_lattice(0.1)


@pytest.fixture(scope="module")
def lat_fine():
    return ball_lattice(0.05)


def xyz(ss):
    return ss.points[:, 1], ss.points[:, 2], ss.points[:, 3]


def test_radial_field_divergence_exact(lat):
    # X = x^i d_i has spatial divergence 3, exact for the linear field
    comps = np.zeros((lat.n_samples, 4))
    comps[:, 1:4] = lat.points[:, 1:4]
    X = four_vector_field(lat, comps)
    div = spatial_divergence(X, FLAT)
    ok = div.ok_mask()
    assert np.max(np.abs(div.components[ok] - 3.0)) < 1e-11


def test_gradient_of_paraboloid_exact(lat):
    x, y, z = xyz(lat)
    q = scalar_field(lat, 1.0 - (x * x + y * y + z * z))
    dq = spatial_derivative(q, FLAT)
    ok = dq.ok_mask()
    assert np.max(np.abs(dq.components[ok] + 2.0 * lat.points[ok, 1:4])) < 1e-11
    # normal derivative magnitude approaches 2 at the boundary sphere
    vals = norm_pointwise(dq, FLAT)
    r = lat.r
    near = ok & (r > 0.9)
    assert np.max(np.abs(vals[near] - 2.0 * r[near])) < 1e-10


def test_trap_gradient_of_constant_zero(lat):
    q = scalar_field(lat, np.full(lat.n_samples, 3.7))
    dq = spatial_derivative(q, TRAP)
    assert np.max(np.abs(dq.components)) < 1e-13


def test_curl4_of_gradient_vanishes(lat):
    x, y, z = xyz(lat)
    phi = scalar_field(lat, x * x * y + y * z + z * z * x * 0.5)
    dphi = spatial_derivative(phi, FLAT)
    comps = np.zeros((lat.n_samples, 4))
    comps[:, 1:4] = dphi.components  # grad^mu phi, static field
    X = four_vector_field(lat, comps)
    X.stencil_ok = dphi.stencil_ok
    w = curl4(X, FLAT)
    assert np.max(np.abs(w.components[w.ok_mask()])) < 1e-8


def test_curl4_gradient_exact_on_centered_stencils():
    # centered difference operators along distinct axes commute, so the
    # discrete curl of a discrete gradient is exact in the interior for
    # any sampled scalar, not merely second order
    for h in (0.1, 0.05):
        ss = ball_lattice(h)
        x, y, z = xyz(ss)
        phi = scalar_field(ss, np.sin(x + 0.5 * y) * np.cos(z))
        dphi = spatial_derivative(phi, FLAT)
        comps = np.zeros((ss.n_samples, 4))
        comps[:, 1:4] = dphi.components
        X = four_vector_field(ss, comps)
        w = curl4(X, FLAT)
        deep = ss.r < 0.7
        assert np.max(np.abs(w.components[deep])) < 1e-12


def test_scurl_rotation_field(lat):
    x, y, z = xyz(lat)
    comps = np.stack([-y, x, np.zeros_like(x)], axis=1)
    X = spatial_vector_field(lat, comps)
    w = scurl(X, FLAT)
    ok = w.ok_mask()
    assert np.max(np.abs(w.components[ok, 0, 1] - 2.0)) < 1e-11
    assert np.max(np.abs(w.components[ok, 1, 0] + 2.0)) < 1e-11
    assert np.max(np.abs(w.components[ok, 0, 2])) < 1e-11
    assert np.max(np.abs(w.components[ok, 2, 2])) < 1e-14
    # tensor norm without a 1/2 factor: |w|^2 = 2 * (2^2) = 8
    vals = norm_pointwise(w, FLAT)
    assert np.max(np.abs(vals[ok] - np.sqrt(8.0))) < 1e-10


def test_static_vector_divergence_identities(lat):
    comps = np.zeros((lat.n_samples, 4))
    comps[:, 0] = 2.0
    V = four_vector_field(lat, comps)
    assert np.max(np.abs(spatial_divergence(V, FLAT).components)) < 1e-13
    assert np.max(np.abs(divergence(V, FLAT).components)) < 1e-13


def test_laplacian_paraboloid(lat):
    x, y, z = xyz(lat)
    q = scalar_field(lat, 1.0 - (x * x + y * y + z * z))
    lap = laplace_beltrami(q, FLAT)
    ok = lap.ok_mask()
    assert np.max(np.abs(lap.components[ok] + 6.0)) < 1e-10
    lin = scalar_field(lat, x)
    assert np.max(np.abs(laplace_beltrami(lin, FLAT).components[ok])) < 1e-10


def test_laplacian_radial_grid():
    ss = radial_grid(64)
    q = scalar_field(ss, 1.0 - ss.r ** 2)
    lap = laplace_beltrami(q, FLAT)
    assert np.max(np.abs(lap.components + 6.0)) < 1e-9


def test_laplacian_trap_matches_flat_oracle(lat):
    # flat spatial slices: the slice Laplacian has no connection terms;
    # the dense oracle is the direct second-difference sum
    x, y, z = xyz(lat)
    q = scalar_field(lat, 1.0 - (x * x + y * y + z * z))
    lap_t = laplace_beltrami(q, TRAP)
    lap_f = laplace_beltrami(q, FLAT)
    assert np.max(np.abs(lap_t.components - lap_f.components)) < 1e-6


def test_flat_second_derivatives_commute(lat):
    x, y, z = xyz(lat)
    comps = np.stack([x * y, y * z, x * z], axis=1)
    X = spatial_vector_field(lat, comps)
    D2 = spatial_derivative(spatial_derivative(X, FLAT), FLAT)
    anti = D2.components - np.swapaxes(D2.components, 1, 2)
    assert np.max(np.abs(anti[D2.ok_mask()])) < 1e-10


def test_trap_second_derivative_commutator_matches_curvature(lat):
    # the slices of the trap chart are intrinsically flat, so the
    # curvature contraction predicted for the commutator vanishes
    x, y, z = xyz(lat)
    comps = np.stack([x * y, y * z, x * z], axis=1)
    X = spatial_vector_field(lat, comps)
    D2 = spatial_derivative(spatial_derivative(X, TRAP), TRAP)
    anti = D2.components - np.swapaxes(D2.components, 1, 2)
    assert np.max(np.abs(anti[D2.ok_mask()])) < 1e-8


def test_material_derivative_static(lat):
    comps = np.zeros((lat.n_samples, 4))
    comps[:, 0] = 1.0
    u = four_vector_field(lat, comps)
    x, _, _ = xyz(lat)
    F = scalar_field(lat, x)
    dF = material_derivative(F, u, FLAT)
    assert np.max(np.abs(dF.components - lat.points[:, 1] * 0 - comps[:, 1])) < 1e-12
    dtau, lam = tau_derivative(F, u, FLAT)
    assert np.max(np.abs(dtau.components)) < 1e-12
    assert np.max(lam) < 1e-12


def test_tau_derivative_boosted(lat):
    a = 0.3
    comps = np.zeros((lat.n_samples, 4))
    comps[:, 0] = np.cosh(a)
    comps[:, 1] = np.sinh(a)
    u = four_vector_field(lat, comps)
    x, _, _ = xyz(lat)
    F = scalar_field(lat, x)
    dtau, lam = tau_derivative(F, u, FLAT)
    ok = dtau.ok_mask()
    # analytic foliation-time derivative of the static coordinate function is 0
    assert np.max(np.abs(dtau.components[ok])) < 1e-8
    assert np.max(np.abs(lam - np.tanh(a))) < 1e-12


def test_four_velocity_validation(lat):
    comps = np.zeros((lat.n_samples, 4))
    comps[:, 0] = 0.5  # not unit timelike
    with pytest.raises(InvalidVelocityError):
        check_four_velocity(four_vector_field(lat, comps), FLAT)


def test_l2_norm_constant(lat_fine):
    q = scalar_field(lat_fine, np.full(lat_fine.n_samples, 2.5))
    assert l2_norm(q, FLAT) == pytest.approx(2.5 * np.sqrt(4 * np.pi / 3), rel=1e-3)


def test_l2_norms_paraboloid_closed_forms(lat_fine):
    # || 1 - r^2 ||_L2 = sqrt(32 pi / 105), || grad ||_L2 = sqrt(16 pi / 5)
    x, y, z = xyz(lat_fine)
    q = scalar_field(lat_fine, 1.0 - (x * x + y * y + z * z))
    assert l2_norm(q, FLAT) == pytest.approx(np.sqrt(32 * np.pi / 105), rel=5e-3)
    dq = spatial_derivative(q, FLAT)
    assert l2_norm(dq, FLAT) == pytest.approx(np.sqrt(16 * np.pi / 5), rel=5e-3)


def test_norm_homogeneity(lat):
    x, y, z = xyz(lat)
    q = scalar_field(lat, np.sin(x) + y * z)
    n1 = sobolev_norm(q, FLAT, 1)
    q3 = scalar_field(lat, 3.0 * q.components)
    assert sobolev_norm(q3, FLAT, 1) == pytest.approx(3.0 * n1, rel=1e-12)


def test_mixed_norm_collapses_to_sobolev(lat):
    comps = np.zeros((lat.n_samples, 4))
    comps[:, 0] = 1.0
    u = four_vector_field(lat, comps)
    x, y, _ = xyz(lat)
    q = scalar_field(lat, x * y)
    mn = mixed_norm(q, u, FLAT, 2, 0)
    assert isinstance(mn, MixedNorm)
    assert mn.value == pytest.approx(sobolev_norm(q, FLAT, 2), rel=1e-12)


def test_derivative_order_cap(lat):
    x, _, _ = xyz(lat)
    q = scalar_field(lat, x)
    with pytest.raises(StencilError):
        sobolev_norm(q, FLAT, 4)


def test_tangential_derivative_on_sphere():
    sph = sphere_grid(32)
    x = sph.points[:, 1]
    f = scalar_field(sph, x)  # restriction of a linear function
    df = tangential_derivative(f, FLAT)
    # tangential gradient of x|_sphere is e_x - (x) rhat
    rhat = sph.points[:, 1:4]
    expect = np.zeros((sph.n_samples, 3))
    expect[:, 0] = 1.0
    expect -= x[:, None] * rhat
    assert np.max(np.abs(df.components - expect)) < 5e-3
    assert boundary_sobolev_norm(f, FLAT, 1) == pytest.approx(
        np.sqrt(4 * np.pi / 3 + 8 * np.pi / 3), rel=5e-3)
