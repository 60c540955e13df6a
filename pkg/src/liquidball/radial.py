"""Lagrangian evolution of the spherically symmetric free-boundary
liquid ball in enthalpy variables.

Layout: node positions x_a (a = 0..n, node 0 pinned at the center, node
n on the free surface) carry the radial and time components of
V = sqrt(sigma) u; the squared enthalpy sigma lives at the n cell
midpoints, and the surface value sigma0 is a pinned face datum.  The
staggering pairs a two-point pressure gradient at nodes with an exact
shell-volume divergence at cells; the linearized pair is skew-adjoint,
so the semi-discrete acoustics are neutrally stable all the way to the
axis (a collocated central layout is unstable there at a rate
proportional to 1/h).

Nodes move with the particle flow w = Vr/Vt.  The time component Vt is
evolved by the time leg of the momentum equation and re-enforced from
the normalization sigma = -V.V after every integrator stage; the
pre-enforcement defect of a full step measures the integrator's local
error.

The metric is -alpha(r)^2 dt^2 + dx^2 with alpha^2 = 1 + k r^2.  The
static balance d_r sigma = -2 phi' sigma / alpha^2 (continuum solution:
sigma * alpha^2 = const) is solved in its discretized form, making the
returned hydrostatic state an exact fixed point of the spatial scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .boundary import TaylorMargin, taylor_sign_margin
from .charts import SpacetimeChart
from .eos import BarotropicEos

DEFAULT_CFL = 0.5


class NumericalAbort(RuntimeError):
    """Evolution left its validity domain (CFL, node order, velocity)."""


# -- nonuniform finite differences ---------------------------------------


def deriv_nonuniform(x: np.ndarray, f: np.ndarray,
                     left_closure: str = "even") -> np.ndarray:
    """Second-order first derivative on a strictly increasing grid.

    The left closure picks the behavior at x[0]: "even"/"odd" use the
    mirror parity across r = 0 (for node-based arrays whose first entry
    sits at the center), "one_sided" uses the interior-biased stencil
    (for cell-based arrays that do not reach the axis).
    """
    out = np.empty_like(f)
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    cm = -hp / (hm * (hm + hp))
    cp = hm / (hp * (hm + hp))
    c0 = -(cm + cp)
    out[1:-1] = cm * f[:-2] + c0 * f[1:-1] + cp * f[2:]
    if left_closure == "odd":
        out[0] = f[1] / x[1]
    elif left_closure == "even":
        out[0] = 0.0 if x[0] == 0.0 else 2.0 * x[0] * (f[1] - f[0]) \
            / (x[1] ** 2 - x[0] ** 2)
    else:
        h1 = x[1] - x[0]
        h2 = x[2] - x[1]
        out[0] = (-(2 * h1 + h2) / (h1 * (h1 + h2)) * f[0]
                  + (h1 + h2) / (h1 * h2) * f[1]
                  - h1 / (h2 * (h1 + h2)) * f[2])
    h1 = x[-1] - x[-2]
    h2 = x[-2] - x[-3]
    out[-1] = ((2 * h1 + h2) / (h1 * (h1 + h2)) * f[-1]
               - (h1 + h2) / (h1 * h2) * f[-2]
               + h1 / (h2 * (h1 + h2)) * f[-3])
    return out


def second_deriv_nonuniform(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Three-point second derivative; second order on smoothly graded
    grids, with extrapolation closures at both ends."""
    out = np.empty_like(f)
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    out[1:-1] = 2.0 * (hm * f[2:] - (hm + hp) * f[1:-1] + hp * f[:-2]) \
        / (hm * hp * (hm + hp))
    out[0] = out[1] + (out[1] - out[2]) / (x[1] - x[2]) * (x[0] - x[1])
    out[-1] = out[-2] + (out[-2] - out[-3]) / (x[-2] - x[-3]) * (x[-1] - x[-2])
    return out


def _lagrange_deriv_at(x3: float, x1: float, x2: float,
                       f1, f2, f3, at: float):
    """Derivative at ``at`` of the quadratic through (x1,f1),(x2,f2),(x3,f3)."""
    d1 = (2 * at - x2 - x3) / ((x1 - x2) * (x1 - x3))
    d2 = (2 * at - x1 - x3) / ((x2 - x1) * (x2 - x3))
    d3 = (2 * at - x1 - x2) / ((x3 - x1) * (x3 - x2))
    return d1 * f1 + d2 * f2 + d3 * f3


# -- state ----------------------------------------------------------------


@dataclass
class RadialState:
    chart: SpacetimeChart
    eos: BarotropicEos
    t: float
    nodes: np.ndarray        # x_a, strictly increasing, x_0 = 0
    sigma: np.ndarray        # squared enthalpy at the n cell midpoints
    v_r: np.ndarray          # at nodes; v_r[0] = 0
    v_t: np.ndarray          # at nodes; re-enforced from sigma = -V.V
    jac: np.ndarray          # cell volume-element factor, 1 at t = 0
    labels: np.ndarray       # initial node positions y_a
    cell_label_volume: np.ndarray  # exact initial shell volumes

    @property
    def n_cells(self) -> int:
        return len(self.sigma)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def boundary_radius(self) -> float:
        return float(self.nodes[-1])

    @property
    def sigma_surface(self) -> float:
        """Boundary enthalpy, pinned to the zero-pressure value."""
        return self.eos.sigma0

    def cell_centers(self) -> np.ndarray:
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    def cell_volumes(self) -> np.ndarray:
        return 4.0 * np.pi / 3.0 * np.diff(self.nodes ** 3)

    def lapse_at(self, r: np.ndarray) -> np.ndarray:
        return np.sqrt(1.0 + self.chart.k * r * r)

    def sigma_nodes(self) -> np.ndarray:
        """Enthalpy interpolated to the nodes: linear between cell
        midpoints, even-parity extrapolation at the center, the pinned
        face value on the boundary."""
        xc = self.cell_centers()
        sn = np.empty(self.n_nodes)
        sn[1:-1] = self.sigma[:-1] + (self.sigma[1:] - self.sigma[:-1]) \
            * (self.nodes[1:-1] - xc[:-1]) / (xc[1:] - xc[:-1])
        sn[0] = (self.sigma[0] * xc[1] ** 2 - self.sigma[1] * xc[0] ** 2) \
            / (xc[1] ** 2 - xc[0] ** 2)
        sn[-1] = self.sigma_surface
        return sn

    def copy(self) -> "RadialState":
        return replace(self, nodes=self.nodes.copy(), sigma=self.sigma.copy(),
                       v_r=self.v_r.copy(), v_t=self.v_t.copy(),
                       jac=self.jac.copy())

    def constraint_residual(self) -> np.ndarray:
        """sigma + V.V at the nodes (zero when Vt is enforced)."""
        a2 = 1.0 + self.chart.k * self.nodes ** 2
        return self.sigma_nodes() - (a2 * self.v_t ** 2 - self.v_r ** 2)

    def project_v_t(self):
        a2 = 1.0 + self.chart.k * self.nodes ** 2
        arg = (self.sigma_nodes() + self.v_r ** 2) / a2
        if np.any(arg <= 0.0):
            raise NumericalAbort("enthalpy lost positivity")
        self.v_t = np.sqrt(arg)

    def velocity(self) -> np.ndarray:
        return self.v_r / self.v_t

    def minus_v_tau(self) -> np.ndarray:
        return self.lapse_at(self.nodes) * self.v_t

    def lambda_max(self) -> float:
        """max |ubar| / |u^tau| over the nodes."""
        sn = self.sigma_nodes()
        return float(np.max(np.abs(self.v_r) / (self.minus_v_tau())))

    def taylor_margin(self) -> TaylorMargin:
        radii = np.concatenate([self.cell_centers(), [self.boundary_radius]])
        prof = np.concatenate([self.sigma, [self.sigma_surface]])
        return taylor_sign_margin(radii, prof, self.eos)


def _pack(st: RadialState) -> np.ndarray:
    return np.concatenate([st.nodes, st.sigma, st.v_r, st.v_t, st.jac])


def _unpack(st: RadialState, y: np.ndarray) -> RadialState:
    n = st.n_nodes
    c = st.n_cells
    out = st.copy()
    out.nodes = y[:n].copy()
    out.sigma = y[n:n + c].copy()
    out.v_r = y[n + c:2 * n + c].copy()
    out.v_t = y[2 * n + c:3 * n + c].copy()
    out.jac = y[3 * n + c:].copy()
    return out


@dataclass
class RadialRhs:
    """Node-following time derivatives plus the spatial derivatives used
    to assemble them (cell quantities suffixed _c)."""

    Dt_x: np.ndarray
    Dt_sigma: np.ndarray   # cells
    Dt_vr: np.ndarray      # nodes
    Dt_vt: np.ndarray      # nodes
    Dt_jac: np.ndarray     # cells
    dsig_nodes: np.ndarray
    dsig_c: np.ndarray
    dv_c: np.ndarray
    v_c: np.ndarray
    v0_c: np.ndarray
    w_c: np.ndarray
    w: np.ndarray          # nodes
    div_c: np.ndarray

    def packed(self) -> np.ndarray:
        return np.concatenate([self.Dt_x, self.Dt_sigma, self.Dt_vr,
                               self.Dt_vt, self.Dt_jac])


def _sigma_gradient_nodes(st: RadialState, xc: np.ndarray) -> np.ndarray:
    """d_r sigma at the nodes: two-point cell difference in the
    interior, even-parity zero at the center, and a one-sided quadratic
    through the last two cells and the pinned face value at the surface."""
    x = st.nodes
    sig = st.sigma
    ds = np.empty(st.n_nodes)
    ds[1:-1] = (sig[1:] - sig[:-1]) / (xc[1:] - xc[:-1])
    ds[0] = 0.0
    ds[-1] = _lagrange_deriv_at(x[-1], xc[-2], xc[-1],
                                sig[-2], sig[-1], st.sigma_surface, x[-1])
    return ds


def radial_rhs(st: RadialState, enforce_boundary: bool = True) -> RadialRhs:
    """Evaluate the semi-discrete evolution operator.

    ``enforce_boundary`` has no effect on the staggered interior but is
    kept so diagnostic callers can request the raw operator.
    """
    x, sig, vr, vt = st.nodes, st.sigma, st.v_r, st.v_t
    if np.any(sig <= 0.0):
        raise NumericalAbort("enthalpy lost positivity")
    if np.any(vt <= 0.0):
        raise NumericalAbort("time component of V lost positivity")
    k = st.chart.k
    xc = st.cell_centers()
    a2n = 1.0 + k * x * x
    a2c = 1.0 + k * xc * xc
    dphi_n = k * x
    dphi_c = k * xc
    w = vr / vt

    # momentum at nodes
    dsig_nodes = _sigma_gradient_nodes(st, xc)
    Dt_vr = -(0.5 * dsig_nodes + dphi_n * vt * vt) / vt
    Dt_vr[0] = 0.0

    # mass equation at cells, with Vt eliminated by the normalization
    v_c = 0.5 * (vr[1:] + vr[:-1])
    v0_c = np.sqrt((sig + v_c * v_c) / a2c)
    w_c = v_c / v0_c
    div_c = (x[1:] ** 2 * vr[1:] - x[:-1] ** 2 * vr[:-1]) \
        / ((x[1:] ** 3 - x[:-1] ** 3) / 3.0)
    dsig_c = deriv_nonuniform(xc, sig, left_closure="even")
    dsig_c[-1] = _lagrange_deriv_at(x[-1], xc[-2], xc[-1],
                                    sig[-2], sig[-1], st.sigma_surface, xc[-1])
    dv_c = (vr[1:] - vr[:-1]) / np.diff(x)
    Dt_vr_c = 0.5 * (Dt_vr[1:] + Dt_vr[:-1])
    et_v_c = Dt_vr_c - w_c * dv_c
    eprime = st.eos.e_prime(sig)
    coef = eprime * v0_c + 1.0 / (2.0 * a2c * v0_c)
    Dt_sigma = ((w_c * dsig_c - 2.0 * v_c * et_v_c) / (2.0 * a2c * v0_c)
                - div_c - (dphi_c / a2c) * v_c) / coef

    # time leg of the momentum equation at the nodes, discretized as the
    # exact flow-transport of the normalization sigma = -V.V: the rate
    # of the interpolated nodal enthalpy is differentiated in closed
    # form (moving weights included), so the normalization is a strict
    # first integral of the semi-discrete system and the pre-enforcement
    # defect of a step measures only the integrator's local error
    w = vr / vt
    xc_dot = 0.5 * (w[1:] + w[:-1])
    Dt_sn = np.empty(st.n_nodes)
    th = (x[1:-1] - xc[:-1]) / (xc[1:] - xc[:-1])
    th_dot = ((w[1:-1] - xc_dot[:-1]) * (xc[1:] - xc[:-1])
              - (x[1:-1] - xc[:-1]) * (xc_dot[1:] - xc_dot[:-1])) \
        / (xc[1:] - xc[:-1]) ** 2
    Dt_sn[1:-1] = Dt_sigma[:-1] + (Dt_sigma[1:] - Dt_sigma[:-1]) * th \
        + (sig[1:] - sig[:-1]) * th_dot
    den = xc[1] ** 2 - xc[0] ** 2
    num = sig[0] * xc[1] ** 2 - sig[1] * xc[0] ** 2
    dt_num = (Dt_sigma[0] * xc[1] ** 2 + sig[0] * 2 * xc[1] * xc_dot[1]
              - Dt_sigma[1] * xc[0] ** 2 - sig[1] * 2 * xc[0] * xc_dot[0])
    dt_den = 2 * xc[1] * xc_dot[1] - 2 * xc[0] * xc_dot[0]
    Dt_sn[0] = (dt_num * den - num * dt_den) / (den * den)
    Dt_sn[-1] = 0.0
    Dt_vt = (Dt_sn + 2.0 * vr * Dt_vr
             - 2.0 * k * x * w * vt * vt) / (2.0 * a2n * vt)

    Dt_x = w.copy()
    Dt_x[0] = 0.0

    # volume-element factor at cells
    dv0_c = (dsig_c + 2.0 * v_c * dv_c) / (2.0 * a2c * v0_c) \
        - v0_c * dphi_c / a2c
    Dt_jac = st.jac * (div_c - v_c * dv0_c / v0_c) / v0_c
    return RadialRhs(Dt_x, Dt_sigma, Dt_vr, Dt_vt, Dt_jac,
                     dsig_nodes, dsig_c, dv_c, v_c, v0_c, w_c, w, div_c)


def _rhs_packed(st: RadialState, y: np.ndarray) -> np.ndarray:
    return radial_rhs(_unpack(st, y)).packed()


def max_signal_speed(st: RadialState) -> float:
    alpha = st.lapse_at(st.nodes)
    return float(np.max(np.abs(st.velocity())) + np.max(alpha) * st.eos.eta)


def cfl_time_step(st: RadialState, cfl: float = DEFAULT_CFL) -> float:
    """Admissible step cfl * h / (coordinate sound speed), with h the
    label-space grid spacing; mesh breathing is covered separately by a
    hard bound inside the stepper."""
    h = float(st.labels[1] - st.labels[0])
    return cfl * h / float(np.max(st.lapse_at(st.nodes)) * st.eos.eta)


@dataclass
class StepReport:
    constraint_drift: float   # pre-enforcement max |sigma + V.V| of the step
    constraint_max: float     # post-enforcement residual


def step(st: RadialState, dt: float, cfl_limit: float = DEFAULT_CFL) -> tuple[RadialState, StepReport]:
    """One RK4 step with per-stage re-enforcement of sigma = -V.V."""
    bound = cfl_time_step(st, cfl_limit)
    if abs(dt) > bound * (1.0 + 1e-9):
        raise NumericalAbort(f"time step {dt:g} violates the CFL bound {bound:g}")
    hard = 0.95 * float(np.min(np.diff(st.nodes))) / max_signal_speed(st)
    if abs(dt) > hard:
        raise NumericalAbort(
            f"mesh deformation broke the stability bound: dt {dt:g} > {hard:g}")
    y0 = _pack(st)

    def stage(yv):
        s = _unpack(st, yv)
        s.project_v_t()
        return radial_rhs(s).packed()

    k1 = stage(y0)
    k2 = stage(y0 + 0.5 * dt * k1)
    k3 = stage(y0 + 0.5 * dt * k2)
    k4 = stage(y0 + dt * k3)
    y1 = y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = _unpack(st, y1)
    out.t = st.t + dt
    if np.any(np.diff(out.nodes) <= 0.0):
        raise NumericalAbort("radial nodes crossed")
    drift = float(np.max(np.abs(out.constraint_residual())))
    out.project_v_t()
    post = float(np.max(np.abs(out.constraint_residual())))
    mutau = out.minus_v_tau() / np.sqrt(out.sigma_nodes())
    if np.any(mutau < 1.0 - 1e-9):
        raise NumericalAbort("four-velocity lost the unit timelike bound")
    return out, StepReport(constraint_drift=drift, constraint_max=post)


# -- construction ---------------------------------------------------------


def _base_state(chart: SpacetimeChart, eos: BarotropicEos, n: int,
                radius: float, sigma_cells: np.ndarray) -> RadialState:
    x = np.linspace(0.0, radius, n + 1)
    st = RadialState(chart, eos, 0.0, x, sigma_cells,
                     np.zeros(n + 1), np.zeros(n + 1), np.ones(n),
                     x.copy(), 4.0 * np.pi / 3.0 * np.diff(x ** 3))
    st.project_v_t()
    return st


def uniform_ball(chart: SpacetimeChart, eos: BarotropicEos, n: int,
                 radius: float = 1.0) -> RadialState:
    """Force-free ball: sigma = sigma0 everywhere (exact equilibrium in
    the flat chart, where the pressure vanishes identically)."""
    if n < 8:
        raise NumericalAbort(f"need at least 8 cells, got {n}")
    return _base_state(chart, eos, n, radius, np.full(n, eos.sigma0))


def hydrostatic_equilibrium(chart: SpacetimeChart, eos: BarotropicEos,
                            n: int, radius: float = 1.0) -> RadialState:
    """Static profile solving the *discrete* momentum balance at every
    node (zero right-hand side to solver precision), so the state is an
    exact fixed point of the spatial scheme.

    The continuum solution is sigma * (1 + 2 phi) = const; the discrete
    cell values converge to it at second order.
    """
    if chart.k == 0.0:
        return uniform_ball(chart, eos, n, radius)
    if n < 8:
        raise NumericalAbort(f"need at least 8 cells, got {n}")
    x = np.linspace(0.0, radius, n + 1)
    xc = 0.5 * (x[1:] + x[:-1])
    a2 = 1.0 + chart.k * x * x
    g = 2.0 * chart.k * x / a2   # 2 phi' / alpha^2 at nodes
    sigma0 = eos.sigma0
    A = np.zeros((n, n))
    b = np.zeros(n)
    # interior nodes a = 1..n-1:
    #   (s_a - s_{a-1})/(xc_a - xc_{a-1}) + g_a * sigma_node(a) = 0
    # with sigma_node the same linear interpolation the stepper uses
    for a in range(1, n):
        dxc = xc[a] - xc[a - 1]
        lam = (x[a] - xc[a - 1]) / dxc
        A[a - 1, a] += 1.0 / dxc + g[a] * lam
        A[a - 1, a - 1] += -1.0 / dxc + g[a] * (1.0 - lam)
    # boundary node: quadratic gradient through the last two cells and
    # the pinned face value, with sigma_node = sigma0 there
    at = x[-1]
    d1 = (2 * at - xc[-1] - at) / ((xc[-2] - xc[-1]) * (xc[-2] - at))
    d2 = (2 * at - xc[-2] - at) / ((xc[-1] - xc[-2]) * (xc[-1] - at))
    d3 = (2 * at - xc[-2] - xc[-1]) / ((at - xc[-2]) * (at - xc[-1]))
    A[n - 1, n - 2] += d1
    A[n - 1, n - 1] += d2
    b[n - 1] = -(d3 + g[-1]) * sigma0
    cells = np.linalg.solve(A, b)
    if np.any(cells < eos.sigma_floor):
        raise NumericalAbort("hydrostatic profile fell below the enthalpy floor")
    return _base_state(chart, eos, n, radius, cells)


def add_acoustic_perturbation(st: RadialState, amplitude: float,
                              mode: int = 1) -> RadialState:
    """Seed a radial oscillation: sigma gains amplitude * sigma0 *
    sinc(m pi r / R) at the cells; the surface value is untouched."""
    out = st.copy()
    R = out.boundary_radius
    kr = mode * np.pi * out.cell_centers() / R
    out.sigma = out.sigma + amplitude * st.eos.sigma0 * np.sin(kr) / kr
    out.project_v_t()
    return out


def acoustic_mode_frequency(st: RadialState, mode: int = 1) -> float:
    """Linearized radial eigenfrequency about the uniform ball:
    separation of variables gives omega = m pi eta / R (Dirichlet radial
    modes sin(m pi r/R)/r)."""
    return mode * np.pi * st.eos.eta / st.boundary_radius


def acoustic_period(st: RadialState, mode: int = 1) -> float:
    return 2.0 * np.pi / acoustic_mode_frequency(st, mode)


# -- volume tracking ------------------------------------------------------


def volume_ode(st: RadialState) -> float:
    """Ball volume from the transported volume-element factor."""
    return float(np.sum(st.cell_label_volume * st.jac))


def volume_mesh(st: RadialState) -> float:
    """Ball volume from the current boundary node."""
    return 4.0 * np.pi / 3.0 * st.boundary_radius ** 3


@dataclass
class VolumeTrack:
    t: np.ndarray
    vol_ode: np.ndarray
    vol_mesh: np.ndarray

    @property
    def relative_gap(self) -> np.ndarray:
        return np.abs(self.vol_ode - self.vol_mesh) / self.vol_mesh


def volume_tracking(history) -> VolumeTrack:
    if len(history) < 2:
        raise ValueError("volume tracking needs at least 2 stored steps")
    t = np.array([s.t for s in history])
    vo = np.array([volume_ode(s) for s in history])
    vm = np.array([volume_mesh(s) for s in history])
    return VolumeTrack(t, vo, vm)


# -- derivative bundle ----------------------------------------------------


@dataclass
class StateBundle:
    """Cell-centered profile fields with first and second time
    derivatives, for the energy functionals and residual monitors.

    Eulerian t-partials are reconstructed from the node-following
    derivatives; second node-following derivatives come from a
    directional difference of the evolution operator.
    """

    state: RadialState
    rhs: RadialRhs
    r: np.ndarray          # cell centers
    sigma: np.ndarray
    vr: np.ndarray         # particle-flux component at cells
    v0: np.ndarray
    ds: np.ndarray         # d_r sigma at cells
    d2s: np.ndarray
    dvr: np.ndarray        # d_r vr at cells
    dv0: np.ndarray
    w: np.ndarray          # cells
    dw: np.ndarray
    Dt_s: np.ndarray
    Dt_vr: np.ndarray
    Dt_v0: np.ndarray
    et_s: np.ndarray       # Eulerian d_t sigma at cells
    et_vr: np.ndarray
    et_v0: np.ndarray
    d_et_s: np.ndarray     # d_r d_t sigma
    d_et_vr: np.ndarray
    d_et_v0: np.ndarray
    Dt2_s: np.ndarray
    Dt2_vr: np.ndarray
    Dt2_x: np.ndarray

    @property
    def u0(self) -> np.ndarray:
        return self.v0 / np.sqrt(self.sigma)

    @property
    def ur(self) -> np.ndarray:
        return self.vr / np.sqrt(self.sigma)

    def material_sigma(self) -> np.ndarray:
        """grad_u sigma = u^0 D_t sigma."""
        return self.u0 * self.Dt_s

    def material_sigma2(self) -> np.ndarray:
        """grad_u^2 sigma via node-following derivatives."""
        Dt_u0 = (self.Dt_v0 - self.v0 * self.Dt_s / (2.0 * self.sigma)) \
            / np.sqrt(self.sigma)
        return self.u0 * (Dt_u0 * self.Dt_s + self.u0 * self.Dt2_s)

    def dt2_sigma_eulerian(self) -> np.ndarray:
        """d_t^2 sigma at fixed position."""
        Dt_ds = deriv_nonuniform(self.r, self.Dt_s, "one_sided") - self.dw * self.ds
        Dt_et = self.Dt2_s - self.Dt2_x * self.ds - self.w * Dt_ds
        return Dt_et - self.w * self.d_et_s


def _to_cells(node_vals: np.ndarray) -> np.ndarray:
    return 0.5 * (node_vals[1:] + node_vals[:-1])


def state_bundle(st: RadialState, eps_scale: float = 1e-6) -> StateBundle:
    rhs = radial_rhs(st)
    xc = st.cell_centers()
    k = st.chart.k
    a2c = 1.0 + k * xc * xc
    sig = st.sigma
    vr_c = rhs.v_c
    v0_c = rhs.v0_c
    w_c = rhs.w_c
    ds = rhs.dsig_c
    d2s = second_deriv_nonuniform(xc, sig)
    dvr = rhs.dv_c
    dphi_c = k * xc
    dv0 = (ds + 2.0 * vr_c * dvr) / (2.0 * a2c * v0_c) - v0_c * dphi_c / a2c
    dw = (dvr - w_c * dv0) / v0_c

    Dt_s = rhs.Dt_sigma
    Dt_vr_c = _to_cells(rhs.Dt_vr)
    # D_t v0 from the normalization (cells carry no independent Vt);
    # the cell midpoint rides at O(h^2) with the averaged node flow
    Dt_a2 = 2.0 * k * xc * w_c  # D_t alpha^2 along the cell path
    Dt_v0 = ((Dt_s + 2.0 * vr_c * Dt_vr_c) / (2.0 * a2c)
             - 0.5 * v0_c * v0_c * Dt_a2 / a2c) / v0_c

    et_s = Dt_s - w_c * ds
    et_vr = Dt_vr_c - w_c * dvr
    et_v0 = Dt_v0 - w_c * dv0
    d_et_s = deriv_nonuniform(xc, et_s, "one_sided")
    d_et_vr = deriv_nonuniform(xc, et_vr, "one_sided")
    d_et_v0 = deriv_nonuniform(xc, et_v0, "one_sided")

    y = _pack(st)
    f = rhs.packed()
    eps = eps_scale * (1.0 + float(np.max(np.abs(y)))) / (1.0 + float(np.max(np.abs(f))))
    f2 = (_rhs_packed(st, y + eps * f) - _rhs_packed(st, y - eps * f)) / (2.0 * eps)
    n = st.n_nodes
    c = st.n_cells
    Dt2_x_nodes = f2[:n]
    Dt2_s = f2[n:n + c]
    Dt2_vr = _to_cells(f2[n + c:2 * n + c])
    return StateBundle(
        state=st, rhs=rhs, r=xc, sigma=sig, vr=vr_c, v0=v0_c,
        ds=ds, d2s=d2s, dvr=dvr, dv0=dv0, w=w_c, dw=dw,
        Dt_s=Dt_s, Dt_vr=Dt_vr_c, Dt_v0=Dt_v0,
        et_s=et_s, et_vr=et_vr, et_v0=et_v0,
        d_et_s=d_et_s, d_et_vr=d_et_vr, d_et_v0=d_et_v0,
        Dt2_s=Dt2_s, Dt2_vr=Dt2_vr, Dt2_x=_to_cells(Dt2_x_nodes))


# -- residual monitors ----------------------------------------------------


@dataclass
class ResidualReport:
    constraint_max: float
    boundary_pressure: float
    boundary_flux: float        # |N_mu V^mu| at the boundary node
    sdiv_identity: float        # sup gap of the slice-divergence split
    wave_equation_l2: float     # L2 residual of the enthalpy wave equation
    momentum_order1_l2: float   # first-order momentum combination
    mass_order1_l2: float       # first-order mass combination


def _wave_equation_residual(b: StateBundle) -> np.ndarray:
    st = b.state
    r, sig = b.r, b.sigma
    k = st.chart.k
    a2 = 1.0 + k * r * r
    dphi = k * r
    sqs = np.sqrt(sig)
    u0, ur = b.u0, b.ur
    eta = st.eos.eta

    mat1 = b.material_sigma()
    mat2 = b.material_sigma2()

    # X^mu = Pi^{mu nu} d_nu sigma with Pi = g^-1 + u u
    X0 = -b.et_s / a2 + u0 * mat1
    Xr = b.ds + ur * mat1

    dt2s = b.dt2_sigma_eulerian()
    et_u0 = (b.et_v0 - b.v0 * b.et_s / (2.0 * sig)) / sqs
    et_ur = (b.et_vr - b.vr * b.et_s / (2.0 * sig)) / sqs
    et_mat1 = et_u0 * b.et_s + u0 * dt2s + et_ur * b.ds + ur * b.d_et_s
    dt_X0 = -dt2s / a2 + et_u0 * mat1 + u0 * et_mat1

    d_mat1 = deriv_nonuniform(r, mat1, "one_sided")
    dur = (b.dvr - ur * b.ds / (2.0 * sqs)) / sqs
    dXr = b.d2s + dur * mat1 + ur * d_mat1

    divX = dt_X0 + dXr + 2.0 * Xr / r + (dphi / a2) * Xr

    # quadratic source: twice the trace of (grad_mu V^nu)(grad_nu V^mu)
    A00 = b.et_v0 + (dphi / a2) * b.vr
    A0r = b.dv0 + (dphi / a2) * b.v0
    Ar0 = b.et_vr + dphi * b.v0
    Arr = b.dvr
    F = 2.0 * (A00 * A00 + 2.0 * A0r * Ar0 + Arr * Arr + 2.0 * (b.vr / r) ** 2)

    eprime = st.eos.e_prime(sig)
    e2 = st.eos.e_deriv(sig, 2)
    G = -(eprime + e2) * mat1 * mat1

    return mat2 / eta ** 2 - divX - F - G


def residuals(st: RadialState) -> ResidualReport:
    b = state_bundle(st)
    r = b.r
    k = st.chart.k
    a2 = 1.0 + k * r * r
    alpha = np.sqrt(a2)
    dphi = k * r
    sig = b.sigma
    sqs = np.sqrt(sig)

    cons = float(np.max(np.abs(st.constraint_residual())))
    p_b = abs(float(st.eos.pressure(st.sigma_surface)))
    wb = st.v_r[-1] / st.v_t[-1]
    flux = abs(-wb * st.v_t[-1] + st.v_r[-1]) \
        / np.sqrt(st.v_t[-1] ** 2 + st.v_r[-1] ** 2)

    # slice divergence vs spacetime divergence + foliation correction
    div_bar = b.dvr + 2.0 * b.vr / r
    div_full = b.et_v0 + div_bar + (dphi / a2) * b.vr
    grad_u_V0 = b.et_s / (2.0 * a2 * sqs)   # = -grad^0 sigma/(2 sqrt sig)
    grad_r_V0 = b.dv0 + (dphi / a2) * b.v0
    minus_utau = alpha * b.v0 / sqs
    grad_tau_V0 = (grad_u_V0 - b.ur * grad_r_V0) / minus_utau
    sdiv_gap = float(np.max(np.abs(div_bar - (div_full - alpha * grad_tau_V0))))

    # monitor quadrature: the face-adjacent cell mixes stencil families
    # in the reconstructed time derivatives and is one order less
    # accurate, so the residual integrals run over the interior cells
    wq = st.cell_volumes()
    wq[-1] = 0.0
    wave_res = _wave_equation_residual(b)
    wave_l2 = float(np.sqrt(np.sum(wq * wave_res ** 2)))

    # first-order momentum combination:
    #   grad_V (grad-bar V) + 0.5 grad (grad-bar sigma), raised time row
    T_a = b.dvr
    T_b = b.vr / r
    Dt_ds = deriv_nonuniform(r, b.Dt_s, "one_sided") - b.dw * b.ds
    Dt_Ta = deriv_nonuniform(r, b.Dt_vr, "one_sided") - b.dw * b.dvr
    Dt_Tb = b.Dt_vr / r - b.vr * b.w / (r * r)
    mom_a = b.v0 * Dt_Ta + 0.5 * b.d2s
    mom_b = b.v0 * Dt_Tb + 0.5 * b.ds / r
    mom_t = b.v0 * (dphi / a2) * T_a - b.d_et_s / (2.0 * a2)
    mom_sq = mom_a ** 2 + 2.0 * mom_b ** 2 + a2 * mom_t ** 2
    mom_l2 = float(np.sqrt(np.sum(wq * mom_sq)))

    # first-order mass combination: div(grad-bar V) + e' grad_V grad-bar sigma
    dTa = deriv_nonuniform(r, T_a, "one_sided")
    divT = dTa + 2.0 * (T_a - T_b) / r + (dphi / a2) * T_a
    eprime = st.eos.e_prime(sig)
    mass_comb = divT + eprime * b.v0 * Dt_ds
    mass_l2 = float(np.sqrt(np.sum(wq * mass_comb ** 2)))

    return ResidualReport(
        constraint_max=cons,
        boundary_pressure=p_b,
        boundary_flux=float(flux),
        sdiv_identity=sdiv_gap,
        wave_equation_l2=wave_l2,
        momentum_order1_l2=mom_l2,
        mass_order1_l2=mass_l2,
    )


# -- driver ---------------------------------------------------------------


@dataclass
class EvolutionRecord:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    constraint_drift: list = field(default_factory=list)
    constraint_max: list = field(default_factory=list)


def evolve(st: RadialState, dt: float, n_steps: int,
           store_every: int = 1) -> EvolutionRecord:
    rec = EvolutionRecord()
    rec.times.append(st.t)
    rec.states.append(st.copy())
    cur = st
    for i in range(n_steps):
        cur, rep = step(cur, dt)
        rec.constraint_drift.append(rep.constraint_drift)
        rec.constraint_max.append(rep.constraint_max)
        if (i + 1) % store_every == 0 or i == n_steps - 1:
            rec.times.append(cur.t)
            rec.states.append(cur.copy())
    return rec


def measure_frequency(times: np.ndarray, series: np.ndarray) -> float:
    """Frequency of a near-sinusoidal uniformly sampled series from the
    three-point recurrence x(t-dt) + x(t+dt) = 2 cos(omega dt) x(t),
    applied to first differences (which carry no constant offset)."""
    t = np.asarray(times, dtype=float)
    x = np.diff(np.asarray(series, dtype=float))
    dt = t[1] - t[0]
    amp = np.max(np.abs(x))
    good = np.abs(x[1:-1]) > 0.3 * amp
    ratios = (x[:-2] + x[2:])[good] / (2.0 * x[1:-1][good])
    ratios = np.clip(ratios, -1.0, 1.0)
    return float(np.median(np.arccos(ratios)) / dt)
