"""Boundary geometry of the liquid ball: extended unit normal, cutoff
projection, induced metric, second fundamental form, injectivity
radius, and the sign condition on the boundary pressure gradient.

The domain is a ball of radius R in the (flat) spatial slices of the
built-in charts.  The normal is computed from the level set r - R by
finite differences with a caller-chosen step, so convergence of the
curvature quantities in that step can be measured; the injectivity
radius of a sphere is R itself and is set analytically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .charts import SpacetimeChart
from .fields import Field, tangential_derivative, l2_norm, norm_pointwise
from .grids import SampleSet, sphere_grid

TAYLOR_FLOOR = 1e-8


class GeometryError(ValueError):
    """Degenerate boundary geometry (vanishing level-set gradient)."""


def smoothstep_quintic(t: np.ndarray) -> np.ndarray:
    """C^2 monotone ramp: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


@dataclass
class BallDomain:
    """Ball of radius R with the boundary collar machinery.

    ``chi`` ramps from 0 (interior, d > iota0/2) to 1 (collar,
    d <= iota0/4) in the distance d to the boundary; the extended
    projection is the identity where chi = 0 and kills the normal where
    chi = 1.
    """

    radius: float
    iota0: float = field(init=False)

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError("ball radius must be positive")
        self.iota0 = self.radius  # normal injectivity radius of a sphere

    def distance(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.asarray(points)[..., 1:4], axis=-1)
        return self.radius - r

    def chi(self, points: np.ndarray) -> np.ndarray:
        d = self.distance(points)
        # 1 for d <= iota0/4, 0 for d >= iota0/2
        return smoothstep_quintic((0.5 * self.iota0 - d) / (0.25 * self.iota0))

    def level_set(self, xyz: np.ndarray) -> np.ndarray:
        return np.linalg.norm(xyz, axis=-1) - self.radius

    def normal_ext(self, points: np.ndarray, fd_step: float | None = None) -> np.ndarray:
        """Extended unit normal (lower = upper on flat slices), from the
        level set r - R; analytic when fd_step is None."""
        xyz = np.asarray(points)[..., 1:4]
        if fd_step is None:
            r = np.linalg.norm(xyz, axis=-1, keepdims=True)
            if np.any(r < 1e-10):
                raise GeometryError("normal undefined at the center")
            return xyz / r
        grad = np.zeros_like(xyz)
        for i in range(3):
            dp = np.zeros(3)
            dp[i] = fd_step
            grad[..., i] = (self.level_set(xyz + dp) - self.level_set(xyz - dp)) \
                / (2.0 * fd_step)
        mag = np.linalg.norm(grad, axis=-1, keepdims=True)
        if np.any(mag < 1e-10):
            raise GeometryError("level-set gradient degenerates")
        return grad / mag

    def proj_ext(self, points: np.ndarray, fd_step: float | None = None) -> np.ndarray:
        """Extended projection delta - chi(d) n n, shape (..., 3, 3)."""
        n = self.normal_ext(points, fd_step)
        chi = self.chi(points)
        return np.eye(3) - chi[..., None, None] * n[..., :, None] * n[..., None, :]

    def gamma_upper(self, points: np.ndarray, fd_step: float | None = None) -> np.ndarray:
        """Extended boundary metric gbar^{ik} Pi^j_k; on the flat slices
        this equals the extended projection."""
        return self.proj_ext(points, fd_step)


@dataclass
class BoundaryReport:
    theta: Field
    theta_abs: np.ndarray      # |theta| per boundary sample
    theta_max: float
    theta_l2: float
    theta_h1: float
    iota0: float
    K: float                   # max |theta| + 1/iota0
    trace_mean: float


def second_fundamental_form(dom: BallDomain, chart: SpacetimeChart,
                            boundary: SampleSet | None = None,
                            fd_step: float = 1e-3,
                            ntheta: int = 24) -> BoundaryReport:
    """theta = projected ambient derivative of the extended unit normal,
    on boundary sphere samples, with curvature norms and the boundary
    bound K = max|theta| + 1/iota0."""
    if boundary is None:
        boundary = sphere_grid(ntheta, radius=dom.radius)
    pts = boundary.points[:, 1:4]
    dN = np.zeros((len(pts), 3, 3))  # d_j N_i
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = fd_step
        npl = dom.normal_ext(np.concatenate([np.zeros((len(pts), 1)), pts + dp], axis=1),
                             fd_step=fd_step)
        nmi = dom.normal_ext(np.concatenate([np.zeros((len(pts), 1)), pts - dp], axis=1),
                             fd_step=fd_step)
        dN[:, j, :] = (npl - nmi) / (2.0 * fd_step)
    nvec = dom.normal_ext(boundary.points, fd_step=fd_step)
    proj = np.eye(3) - nvec[:, :, None] * nvec[:, None, :]
    theta = np.einsum("mik,mjl,mkl->mij", proj, proj, dN)
    F = Field(boundary, ("sl", "sl"), theta)
    tabs = norm_pointwise(F, chart)
    tl2 = l2_norm(F, chart)
    th1 = float(np.sqrt(tl2 ** 2 + l2_norm(tangential_derivative(F, chart), chart) ** 2))
    tmax = float(np.max(tabs))
    gboundary = chart.frame(boundary.points).gbar_upper[:, 1:4, 1:4]
    trace = np.einsum("mij,mij->m", gboundary, theta)
    return BoundaryReport(
        theta=F, theta_abs=tabs, theta_max=tmax, theta_l2=tl2, theta_h1=th1,
        iota0=dom.iota0, K=tmax + 1.0 / dom.iota0,
        trace_mean=float(np.mean(trace)))


def _fd_gradient(fn, xyz: np.ndarray, step: float) -> np.ndarray:
    g = np.zeros_like(xyz)
    for i in range(3):
        dp = np.zeros(3)
        dp[i] = step
        g[:, i] = (fn(xyz + dp) - fn(xyz - dp)) / (2.0 * step)
    return g


def _fd_hessian(fn, xyz: np.ndarray, step: float) -> np.ndarray:
    m = len(xyz)
    H = np.zeros((m, 3, 3))
    f0 = fn(xyz)
    for i in range(3):
        di = np.zeros(3)
        di[i] = step
        H[:, i, i] = (fn(xyz + di) - 2.0 * f0 + fn(xyz - di)) / step ** 2
        for j in range(i + 1, 3):
            dj = np.zeros(3)
            dj[j] = step
            mixed = (fn(xyz + di + dj) - fn(xyz + di - dj)
                     - fn(xyz - di + dj) + fn(xyz - di - dj)) / (4.0 * step ** 2)
            H[:, i, j] = mixed
            H[:, j, i] = mixed
    return H


@dataclass
class ProjectionIdentityReport:
    residual_sup: float
    lhs_sup: float
    rhs_sup: float
    order: float | None = None


def projection_identity_check(dom: BallDomain, chart: SpacetimeChart, q_fn,
                              fd_step: float = 1e-3, ntheta: int = 16,
                              boundary_tol: float = 1e-10) -> ProjectionIdentityReport:
    """Residual of (projected Hessian of q) = theta * (normal derivative
    of q) on the boundary sphere, for q vanishing there.

    All derivatives (of q and of the level-set normal) use central
    differences of spacing ``fd_step``, which is the refinement
    parameter for the convergence study.
    """
    boundary = sphere_grid(ntheta, radius=dom.radius)
    xyz = boundary.points[:, 1:4]
    q0 = np.abs(q_fn(xyz))
    if np.max(q0) > boundary_tol:
        raise ValueError(f"q does not vanish on the boundary: max |q| = {np.max(q0):g}")
    rep = second_fundamental_form(dom, chart, boundary, fd_step=fd_step)
    grad = _fd_gradient(q_fn, xyz, fd_step)
    hess = _fd_hessian(q_fn, xyz, fd_step)
    nvec = dom.normal_ext(boundary.points, fd_step=fd_step)
    proj = np.eye(3) - nvec[:, :, None] * nvec[:, None, :]
    lhs = np.einsum("mik,mjl,mkl->mij", proj, proj, hess)
    dnq = np.einsum("mi,mi->m", nvec, grad)
    rhs = rep.theta.components * dnq[:, None, None]
    res = np.max(np.abs(lhs - rhs))
    return ProjectionIdentityReport(
        residual_sup=float(res),
        lhs_sup=float(np.max(np.abs(lhs))),
        rhs_sup=float(np.max(np.abs(rhs))))


def projection_identity_convergence(dom: BallDomain, chart: SpacetimeChart, q_fn,
                                    steps=(4e-3, 2e-3, 1e-3), ntheta: int = 16):
    """Run the identity check over a sequence of difference steps and
    fit the convergence order of the sup residual."""
    res = [projection_identity_check(dom, chart, q_fn, fd_step=h, ntheta=ntheta)
           .residual_sup for h in steps]
    orders = [np.log(res[i] / res[i + 1]) / np.log(steps[i] / steps[i + 1])
              for i in range(len(steps) - 1)]
    return res, orders


@dataclass
class TaylorMargin:
    delta: float          # min over boundary of -dp/dN
    delta_prime: float    # min over boundary of -dsigma/dN
    degenerate: bool


def taylor_sign_margin(radii: np.ndarray, sigma: np.ndarray, eos) -> TaylorMargin:
    """Sign-condition margins from a radial profile: one-sided
    derivative of p and sigma at the outermost node.  A nonpositive
    pressure margin is flagged, not raised."""
    r = np.asarray(radii, dtype=float)
    s = np.asarray(sigma, dtype=float)
    if len(r) < 3:
        raise ValueError("need at least 3 radial nodes")
    h1 = r[-1] - r[-2]
    h2 = r[-2] - r[-3]
    # second-order one-sided derivative on a possibly nonuniform grid
    c0 = (2 * h1 + h2) / (h1 * (h1 + h2))
    c1 = -(h1 + h2) / (h1 * h2)
    c2 = h1 / (h2 * (h1 + h2))
    dsig = c0 * s[-1] + c1 * s[-2] + c2 * s[-3]
    # dp/dr = (dp/dsigma) dsigma/dr with dp/dsigma = rho/(2 sqrt(sigma))
    rho_b = eos.density(s[-1])
    dp = rho_b / (2.0 * np.sqrt(s[-1])) * dsig
    delta = -float(dp)
    delta_prime = -float(dsig)
    return TaylorMargin(delta=delta, delta_prime=delta_prime,
                        degenerate=delta <= TAYLOR_FLOOR)


def gamma_gradient_bound(dom: BallDomain, chart: SpacetimeChart,
                         n_radii: int = 80, fd_step: float = 1e-4):
    """Empirical constant in max|grad gamma| <= C (max|theta| + 1/iota0),
    measured along a radial ray (the extended gamma is radially
    symmetric)."""
    r = np.linspace(0.05 * dom.radius, dom.radius * 0.999, n_radii)
    pts = np.zeros((n_radii, 4))
    pts[:, 1] = r

    def gam_at(x_shift):
        p = pts.copy()
        p[:, 1:4] = p[:, 1:4] + x_shift
        return dom.gamma_upper(p)

    sup = 0.0
    for i in range(3):
        dp = np.zeros(3)
        dp[i] = fd_step
        dgam = (gam_at(dp) - gam_at(-dp)) / (2.0 * fd_step)
        sup = max(sup, float(np.max(np.sqrt(np.sum(dgam * dgam, axis=(1, 2))))))
    rep = second_fundamental_form(dom, chart, fd_step=1e-4, ntheta=12)
    bound = rep.theta_max + 1.0 / dom.iota0
    return sup, bound, sup / bound


def dtgam_residual(times: np.ndarray, boundary_radius: np.ndarray,
                   boundary_w: np.ndarray) -> np.ndarray:
    """Forward-difference check that the inverse induced metric in
    particle labels evolves by minus its own contraction with the metric
    velocity.

    For a radially moving sphere the label-space inverse metric is
    c(t) = (y/x(t))^2 times a fixed tensor, and the identity reduces to
    dc/dt = -2 (dx/dt / x) c.  Returns the per-interval residual, which
    is first order in dt.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(boundary_radius, dtype=float)
    w = np.asarray(boundary_w, dtype=float)
    c = (x[0] / x) ** 2
    dc_fd = np.diff(c) / np.diff(t)
    rhs = -2.0 * (w / x) * c
    return dc_fd - rhs[:-1]
