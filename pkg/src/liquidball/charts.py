"""Analytic background spacetimes with a fixed time foliation.

Two charts are built in:

* ``minkowski`` -- flat spacetime, metric diag(-1, 1, 1, 1).
* ``trap``      -- static weak-field "harmonic trap",
  g = -(1 + 2*phi) dt^2 + dx^2 with phi = 0.5 * k * |x|^2.

Both are stationary (t-independent) and have flat spatial slices, which
keeps the spatial differential operators simple while still exercising
nonzero 4-D Christoffel symbols, Riemann curvature and a position
dependent lapse.

Events are plain ``numpy`` arrays ``[t, x, y, z]``; every geometric
function is vectorized over leading axes, so ``points`` may be shaped
``(m, 4)`` for a whole sample set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MINKOWSKI_METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])


class ChartDomainError(ValueError):
    """Raised when a chart is evaluated where its metric degenerates."""


def event(t: float, x: float, y: float, z: float) -> np.ndarray:
    return np.array([t, x, y, z], dtype=float)


@dataclass(frozen=True)
class FoliationFrame:
    """Unit normal of the t = const slices and the induced projectors.

    ``riem_lower``/``riem_upper`` hold the Riemannian metric used for
    tensor norms: gbar + tau (x) tau, which is positive definite and is
    its own inverse pair.
    """

    tau_lower: np.ndarray
    tau_upper: np.ndarray
    gbar_lower: np.ndarray
    gbar_upper: np.ndarray
    spatial_proj: np.ndarray  # Pi^mu_nu = delta + tau^mu tau_nu
    riem_lower: np.ndarray
    riem_upper: np.ndarray


@dataclass(frozen=True)
class SpacetimeChart:
    """Analytic chart: metric, Christoffels, Riemann tensor, foliation.

    ``kind`` is "minkowski" or "trap"; ``k`` is the trap strength
    (1/time^2 units) and must be >= 0.  ``curvature_orders`` is the
    number of covariant-derivative orders included in the curvature
    bound report.
    """

    kind: str = "minkowski"
    k: float = 0.0
    curvature_orders: int = 2
    stationary: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.kind not in ("minkowski", "trap"):
            raise ChartDomainError(f"unknown chart kind {self.kind!r}")
        if self.k < 0.0:
            raise ChartDomainError(f"trap strength must be >= 0, got {self.k}")

    # -- potential ----------------------------------------------------

    def _phi(self, points: np.ndarray) -> np.ndarray:
        xyz = np.asarray(points, dtype=float)[..., 1:4]
        if self.kind == "minkowski":
            return np.zeros(xyz.shape[:-1])
        return 0.5 * self.k * np.sum(xyz * xyz, axis=-1)

    def lapse(self, points: np.ndarray) -> np.ndarray:
        """alpha = sqrt(1 + 2 phi); the metric is -alpha^2 dt^2 + dx^2."""
        return np.sqrt(1.0 + 2.0 * self._phi(points))

    # -- metric -------------------------------------------------------

    def metric(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        a2 = 1.0 + 2.0 * self._phi(points)
        if np.any(a2 <= 0.0):
            raise ChartDomainError("metric degenerates: 1 + 2*phi <= 0")
        g = np.zeros(points.shape[:-1] + (4, 4))
        g[..., 0, 0] = -a2
        for i in range(1, 4):
            g[..., i, i] = 1.0
        return g

    def metric_inverse(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        a2 = 1.0 + 2.0 * self._phi(points)
        ginv = np.zeros(points.shape[:-1] + (4, 4))
        ginv[..., 0, 0] = -1.0 / a2
        for i in range(1, 4):
            ginv[..., i, i] = 1.0
        return ginv

    # -- connection and curvature --------------------------------------

    def christoffels(self, points: np.ndarray) -> np.ndarray:
        """Gamma^beta_{alpha nu}, indexed [..., beta, alpha, nu].

        Symmetric in the two lower slots.  For the trap the nonzero
        components are Gamma^0_{0i} = Gamma^0_{i0} = d_i phi / alpha^2
        and Gamma^i_{00} = d_i phi.
        """
        points = np.asarray(points, dtype=float)
        gam = np.zeros(points.shape[:-1] + (4, 4, 4))
        if self.kind == "minkowski" or self.k == 0.0:
            return gam
        xyz = points[..., 1:4]
        dphi = self.k * xyz  # d_i phi = k x_i
        a2 = 1.0 + 2.0 * self._phi(points)
        for i in range(3):
            gam[..., 0, 0, i + 1] = dphi[..., i] / a2
            gam[..., 0, i + 1, 0] = dphi[..., i] / a2
            gam[..., i + 1, 0, 0] = dphi[..., i]
        return gam

    def christoffel_derivs(self, points: np.ndarray) -> np.ndarray:
        """Partial derivatives d_mu Gamma^beta_{alpha nu}, [..., mu, beta, alpha, nu]."""
        points = np.asarray(points, dtype=float)
        dg = np.zeros(points.shape[:-1] + (4, 4, 4, 4))
        if self.kind == "minkowski" or self.k == 0.0:
            return dg
        xyz = points[..., 1:4]
        dphi = self.k * xyz
        a2 = 1.0 + 2.0 * self._phi(points)
        # d_j (dphi_i / a2) = k delta_ij / a2 - 2 dphi_i dphi_j / a2^2
        for i in range(3):
            for j in range(3):
                d = (self.k if i == j else 0.0) / a2 \
                    - 2.0 * dphi[..., i] * dphi[..., j] / (a2 * a2)
                dg[..., j + 1, 0, 0, i + 1] = d
                dg[..., j + 1, 0, i + 1, 0] = d
                dg[..., j + 1, i + 1, 0, 0] = self.k if i == j else 0.0
        return dg

    def riemann(self, points: np.ndarray) -> np.ndarray:
        """Curvature tensor Rm_{mu nu alpha}^beta, indexed [..., mu, nu, alpha, beta].

        Sign/slot convention fixed by the defining commutator on covectors,
        Rm_{mu nu alpha}^beta X_beta = (grad_mu grad_nu - grad_nu grad_mu) X_alpha.
        """
        dg = self.christoffel_derivs(points)
        gam = self.christoffels(points)
        # Rm_{m n a}^b = -d_m G^b_{n a} + d_n G^b_{m a}
        #               + G^s_{m a} G^b_{n s} - G^s_{n a} G^b_{m s}
        term1 = -np.einsum("...mbna->...mnab", dg)
        term1 += np.einsum("...nbma->...mnab", dg)
        term2 = np.einsum("...sma,...bns->...mnab", gam, gam)
        term2 -= np.einsum("...sna,...bms->...mnab", gam, gam)
        return term1 + term2

    def riemann_lower(self, points: np.ndarray) -> np.ndarray:
        """Fully covariant Rm_{mu nu alpha beta}."""
        rm = self.riemann(points)
        g = self.metric(points)
        return np.einsum("...mnab,...bc->...mnac", rm, g)

    def ricci(self, points: np.ndarray) -> np.ndarray:
        """Ricci tensor Ric_{nu alpha} = Rm_{mu nu alpha}^mu."""
        rm = self.riemann(points)
        return np.einsum("...mnam->...na", rm)

    # -- foliation ------------------------------------------------------

    def frame(self, points: np.ndarray) -> FoliationFrame:
        """Unit future-directed normal to t = const and induced projectors.

        tau is grad(t) normalized to tau . tau = -1 with the overall sign
        fixed by tau^0 > 0.
        """
        points = np.asarray(points, dtype=float)
        g = self.metric(points)
        ginv = self.metric_inverse(points)
        dt = np.zeros(points.shape[:-1] + (4,))
        dt[..., 0] = 1.0
        norm2 = -np.einsum("...ab,...a,...b->...", ginv, dt, dt)
        if np.any(norm2 <= 0.0):
            raise ChartDomainError("time function gradient is not timelike")
        tau_lo = dt / np.sqrt(norm2)[..., None]
        tau_up = np.einsum("...ab,...b->...a", ginv, tau_lo)
        # future-directed: tau^0 > 0
        sign = np.where(tau_up[..., 0] > 0.0, 1.0, -1.0)[..., None]
        tau_lo = tau_lo * sign
        tau_up = tau_up * sign
        gbar_lo = g + tau_lo[..., :, None] * tau_lo[..., None, :]
        gbar_up = ginv + tau_up[..., :, None] * tau_up[..., None, :]
        proj = np.zeros_like(g)
        idx = np.arange(4)
        proj[..., idx, idx] = 1.0
        proj += tau_up[..., :, None] * tau_lo[..., None, :]
        riem_lo = gbar_lo + tau_lo[..., :, None] * tau_lo[..., None, :]
        riem_up = gbar_up + tau_up[..., :, None] * tau_up[..., None, :]
        return FoliationFrame(tau_lo, tau_up, gbar_lo, gbar_up, proj,
                              riem_lo, riem_up)


def tensor_norm(components: np.ndarray, slots: str,
                frame: FoliationFrame) -> np.ndarray:
    """Pointwise norm |T| of a spacetime tensor in the Riemannian metric.

    ``slots`` has one character per tensor slot: 'l' for a lower
    (covariant) index contracted with riem_upper, 'u' for an upper index
    contracted with riem_lower.  Leading axes of ``components`` are
    sample axes.
    """
    nslots = len(slots)
    if nslots == 0:
        return np.abs(components)
    lo = "abcdef"[:nslots]
    hi = "uvwxyz"[:nslots]
    metrics = [frame.riem_upper if ch == "l" else frame.riem_lower
               for ch in slots]
    subs = ",".join([f"...{lo}"]
                    + [f"...{lo[i]}{hi[i]}" for i in range(nslots)]
                    + [f"...{hi}"])
    sq = np.einsum(f"{subs}->...", components, *metrics, components)
    return np.sqrt(np.maximum(sq, 0.0))


def _fd_partial(fn, points: np.ndarray, step: float) -> np.ndarray:
    """Central-difference partials d_mu fn(points); new axis inserted
    before the tensor axes of fn's output."""
    points = np.asarray(points, dtype=float)
    out = []
    for mu in range(4):
        dp = np.zeros_like(points)
        dp[..., mu] = step
        out.append((fn(points + dp) - fn(points - dp)) / (2.0 * step))
    return np.stack(out, axis=points.ndim - 1)


def covariant_derivative_fn(chart: SpacetimeChart, fn, slots: str,
                            step: float = 1e-3):
    """Covariant derivative of a tensor-valued function of events.

    ``fn(points)`` returns components with slot characters ``slots``
    ('l' lower / 'u' upper).  The result is a new function whose output
    has one extra leading lower slot, computed with central differences
    of spacing ``step`` plus analytic Christoffel corrections.
    """

    def dfn(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        base = fn(points)
        nslots = len(slots)
        dpart = _fd_partial(fn, points, step)
        gam = chart.christoffels(points)
        letters = "abcdef"[:nslots]
        for pos, ch in enumerate(slots):
            in_sub = letters[:pos] + "g" + letters[pos + 1:]
            if ch == "u":
                # +Gamma^a_{m g} T^{..g..}
                gam_sub = letters[pos] + "mg"
                sign = 1.0
            else:
                # -Gamma^g_{m a} T_{..g..}
                gam_sub = "gm" + letters[pos]
                sign = -1.0
            dpart = dpart + sign * np.einsum(
                f"...{gam_sub},...{in_sub}->...m{letters}", gam, base)
        return dpart

    return dfn, "l" + slots


def curvature_report(chart: SpacetimeChart, points: np.ndarray,
                     n_orders: int | None = None, step: float = 1e-3) -> float:
    """Curvature/foliation bound: max over samples of
    sum_{s<=N} (|grad^s Rm| + |grad^s tau|).

    Derivatives are nested central differences of the analytic tensors.
    """
    n = chart.curvature_orders if n_orders is None else n_orders
    points = np.atleast_2d(np.asarray(points, dtype=float))

    def rm_fn(p):
        return chart.riemann_lower(p)

    def tau_fn(p):
        return chart.frame(p).tau_lower

    total = np.zeros(points.shape[0])
    for base_fn, base_slots in ((rm_fn, "llll"), (tau_fn, "l")):
        f, s = base_fn, base_slots
        for _ in range(n):
            f, s = covariant_derivative_fn(chart, f, s, step=step)
            frame = chart.frame(points)
            total += tensor_norm(f(points), s, frame)
    return float(np.max(total)) if total.size else 0.0
