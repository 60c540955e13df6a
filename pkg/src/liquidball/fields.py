"""Discrete tensor fields on sample sets and the differential operators
of the foliated-spacetime calculus.

A ``Field`` stores per-sample components plus a slot signature: each
slot is "tu"/"tl" (spacetime index, up/low, dimension 4) or "su"/"sl"
(spatial index 1..3, dimension 3).  Spatially projected operators keep
spacetime slots four-dimensional with vanishing time components.

Sampled fields are static snapshots (t-partials vanish); time
derivatives of evolving states are handled by the evolution module,
which knows the equations of motion.  Interior stencils are
second-order centered, boundary-adjacent ones second-order one-sided;
samples where the lattice clips too close to the sphere for any
same-axis neighbor are flagged in ``stencil_ok`` and their derivative
is zeroed rather than extrapolated.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .charts import SpacetimeChart
from .grids import SampleSet

SLOT_DIM = {"t": 4, "s": 3}
MAX_DERIVATIVE_ORDER = 3


class StencilError(ValueError):
    """Grid too small or wrong kind for the requested derivative."""


class InvalidVelocityError(ValueError):
    """Four-velocity fails the unit timelike / future-directed checks."""


@dataclass
class Field:
    samples: SampleSet
    slots: tuple[str, ...]
    components: np.ndarray
    stencil_ok: np.ndarray | None = None

    def __post_init__(self):
        expect = (self.samples.n_samples,) + tuple(
            SLOT_DIM[s[0]] for s in self.slots)
        if self.components.shape != expect:
            raise ValueError(
                f"component shape {self.components.shape} != {expect} for slots {self.slots}")

    @property
    def rank(self) -> int:
        return len(self.slots)

    def ok_mask(self) -> np.ndarray:
        if self.stencil_ok is None:
            return np.ones(self.samples.n_samples, dtype=bool)
        return self.stencil_ok


def scalar_field(samples: SampleSet, values) -> Field:
    return Field(samples, (), np.asarray(values, dtype=float))


def four_vector_field(samples: SampleSet, comps) -> Field:
    return Field(samples, ("tu",), np.asarray(comps, dtype=float))


def spatial_vector_field(samples: SampleSet, comps) -> Field:
    return Field(samples, ("su",), np.asarray(comps, dtype=float))


# -- finite differences on the sample sets ------------------------------


def _lattice_partial(ss: SampleSet, vals: np.ndarray, axis: int):
    h = ss.h
    v0 = vals
    ip, im = ss.neighbor(axis, 1), ss.neighbor(axis, -1)
    ip2, im2 = ss.neighbor(axis, 2), ss.neighbor(axis, -2)
    out = np.zeros_like(v0)
    ok = np.zeros(len(v0), dtype=bool)
    cen = (ip >= 0) & (im >= 0)
    out[cen] = (v0[ip[cen]] - v0[im[cen]]) / (2 * h)
    fwd = ~cen & (ip >= 0) & (ip2 >= 0)
    out[fwd] = (-3 * v0[fwd] + 4 * v0[ip[fwd]] - v0[ip2[fwd]]) / (2 * h)
    bwd = ~cen & ~fwd & (im >= 0) & (im2 >= 0)
    out[bwd] = (3 * v0[bwd] - 4 * v0[im[bwd]] + v0[im2[bwd]]) / (2 * h)
    ok = cen | fwd | bwd
    lo_f = ~ok & (ip >= 0)
    out[lo_f] = (v0[ip[lo_f]] - v0[lo_f]) / h
    lo_b = ~ok & ~lo_f & (im >= 0)
    out[lo_b] = (v0[lo_b] - v0[im[lo_b]]) / h
    return out, ok


def _lattice_second(ss: SampleSet, vals: np.ndarray, axis: int):
    h2 = ss.h * ss.h
    v0 = vals
    nb = [ss.neighbor(axis, o) for o in range(-3, 4)]
    im3, im2, im, _, ip, ip2, ip3 = nb
    out = np.zeros_like(v0)
    cen = (ip >= 0) & (im >= 0)
    out[cen] = (v0[ip[cen]] - 2 * v0[cen] + v0[im[cen]]) / h2
    fwd = ~cen & (ip >= 0) & (ip2 >= 0) & (ip3 >= 0)
    out[fwd] = (2 * v0[fwd] - 5 * v0[ip[fwd]] + 4 * v0[ip2[fwd]] - v0[ip3[fwd]]) / h2
    bwd = ~cen & ~fwd & (im >= 0) & (im2 >= 0) & (im3 >= 0)
    out[bwd] = (2 * v0[bwd] - 5 * v0[im[bwd]] + 4 * v0[im2[bwd]] - v0[im3[bwd]]) / h2
    ok = cen | fwd | bwd
    return out, ok


def _radial_partial(vals: np.ndarray, h: float):
    out = np.zeros_like(vals)
    out[1:-1] = (vals[2:] - vals[:-2]) / (2 * h)
    out[0] = (-3 * vals[0] + 4 * vals[1] - vals[2]) / (2 * h)
    out[-1] = (3 * vals[-1] - 4 * vals[-2] + vals[-3]) / (2 * h)
    return out


def _radial_second(vals: np.ndarray, h: float):
    out = np.zeros_like(vals)
    out[1:-1] = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / (h * h)
    out[0] = (2 * vals[0] - 5 * vals[1] + 4 * vals[2] - vals[3]) / (h * h)
    out[-1] = (2 * vals[-1] - 5 * vals[-2] + 4 * vals[-3] - vals[-4]) / (h * h)
    return out


def _partials(F: Field):
    """Spatial partial derivatives d_k of every component: returns
    (m, 3, *dims) array and the per-sample full-order mask."""
    ss = F.samples
    comps = F.components
    if ss.kind != "ball":
        raise StencilError(f"spatial partials not defined on {ss.kind} grid for tensors")
    flat = comps.reshape(len(comps), -1)
    outs = []
    ok = np.ones(len(comps), dtype=bool)
    for axis in range(3):
        d, okc = _lattice_partial(ss, flat, axis)
        outs.append(d)
        ok &= okc
    stacked = np.stack(outs, axis=1)
    return stacked.reshape((len(comps), 3) + comps.shape[1:]), ok


_LET = "abcdef"


def _christoffel_corrections(chart: SpacetimeChart, F: Field,
                             dcomp: np.ndarray) -> np.ndarray:
    """Add connection terms for each slot to the raw partials ``dcomp``
    (shape (m, 3, *dims); derivative directions are spatial)."""
    gam = chart.christoffels(F.samples.points)  # (m,4,4,4), [b,a,n]
    gam_sp = gam[:, :, 1:4, :]                  # derivative slot spatial
    nslots = len(F.slots)
    letters = _LET[:nslots]
    out = dcomp
    for pos, slot in enumerate(F.slots):
        in_sub = letters[:pos] + "g" + letters[pos + 1:]
        if slot[0] == "t":
            gblock = gam_sp  # (m, b, k, n)
        else:
            gblock = gam_sp[:, 1:4, :, 1:4]
        if slot[1] == "u":
            gam_sub = letters[pos] + "kg"
            sign = 1.0
        else:
            gam_sub = "gk" + letters[pos]
            sign = -1.0
        out = out + sign * np.einsum(
            f"m{gam_sub},m{in_sub}->mk{letters}", gblock, F.components)
    return out


def _project_time_slots(frame_proj: np.ndarray, slots, comps: np.ndarray) -> np.ndarray:
    """Apply the slice projector to every spacetime slot."""
    nslots = len(slots)
    letters = _LET[:nslots]
    for pos, slot in enumerate(slots):
        if slot[0] != "t":
            continue
        in_sub = letters[:pos] + "g" + letters[pos + 1:]
        if slot[1] == "u":
            comps = np.einsum(f"m{letters[pos]}g,m{in_sub}->m{letters}",
                              frame_proj, comps)
        else:
            comps = np.einsum(f"mg{letters[pos]},m{in_sub}->m{letters}",
                              frame_proj, comps)
    return comps


def spatial_derivative(F: Field, chart: SpacetimeChart) -> Field:
    """Slice-projected covariant derivative: one new leading spatial
    lower slot; existing spacetime slots are projected tangentially."""
    if F.rank + 1 > MAX_DERIVATIVE_ORDER + 1:
        raise StencilError("derivative order cap exceeded")
    ss = F.samples
    if ss.kind == "radial":
        if F.slots != ():
            raise StencilError("radial grids support scalar derivatives only")
        dr = _radial_partial(F.components, ss.h)
        return Field(ss, ("sl",), dr[:, None] * _rhat(ss), F.stencil_ok)
    dcomp, ok = _partials(F)
    dcomp = _christoffel_corrections(chart, F, dcomp)
    frame = chart.frame(ss.points)
    flatd = dcomp.reshape((ss.n_samples * 3,) + F.components.shape[1:])
    proj = np.repeat(frame.spatial_proj, 3, axis=0)
    flatd = _project_time_slots(proj, F.slots, flatd)
    dcomp = flatd.reshape((ss.n_samples, 3) + F.components.shape[1:])
    if F.stencil_ok is not None:
        ok = ok & F.stencil_ok
    return Field(ss, ("sl",) + F.slots, dcomp, ok)


def _rhat(ss: SampleSet) -> np.ndarray:
    xyz = ss.points[:, 1:4]
    r = np.linalg.norm(xyz, axis=1)
    rhat = np.zeros_like(xyz)
    nz = r > 0
    rhat[nz] = xyz[nz] / r[nz, None]
    return rhat


def divergence(X: Field, chart: SpacetimeChart) -> Field:
    """Spacetime divergence of a four-vector sampled at one instant.

    Time partials vanish for static snapshots; connection terms carry
    the full 4-D trace Gamma^mu_{mu lambda} X^lambda.
    """
    if X.slots != ("tu",):
        raise StencilError("divergence expects a single upper spacetime slot")
    dcomp, ok = _partials(X)  # (m, 3, 4)
    div = np.einsum("mkk->m", dcomp[:, :, 1:4])
    gam = chart.christoffels(X.samples.points)
    div = div + np.einsum("mggl,ml->m", gam, X.components)
    if X.stencil_ok is not None:
        ok = ok & X.stencil_ok
    return Field(X.samples, (), div, ok)


def spatial_divergence(X: Field, chart: SpacetimeChart) -> Field:
    """Intrinsic slice divergence, extended to four-vectors via their
    spatial part."""
    D = spatial_derivative(X, chart)
    if X.slots == ("tu",):
        div = np.einsum("mkk->m", D.components[:, :, 1:4])
    elif X.slots == ("su",):
        div = np.einsum("mkk->m", D.components)
    else:
        raise StencilError("spatial divergence expects a vector field")
    return Field(X.samples, (), div, D.stencil_ok)


def curl4(X: Field, chart: SpacetimeChart) -> Field:
    """Exterior derivative of the one-form g.X: a spacetime 2-form."""
    if X.slots != ("tu",):
        raise StencilError("curl4 expects a four-vector")
    g = chart.metric(X.samples.points)
    zeta = np.einsum("mab,mb->ma", g, X.components)
    Z = Field(X.samples, ("tl",), zeta, X.stencil_ok)
    dz, ok = _partials(Z)  # (m, 3, 4) spatial partials of zeta
    omega = np.zeros((X.samples.n_samples, 4, 4))
    omega[:, 1:4, :] = dz
    omega = omega - np.swapaxes(omega, 1, 2)
    if X.stencil_ok is not None:
        ok = ok & X.stencil_ok
    return Field(X.samples, ("tl", "tl"), omega, ok)


def scurl(X: Field, chart: SpacetimeChart) -> Field:
    """Slice curl: exterior derivative of the spatial one-form gbar.Xbar,
    stored on spatial slots (the time extension is identically zero)."""
    ss = X.samples
    frame = chart.frame(ss.points)
    gsp = frame.gbar_lower[:, 1:4, 1:4]
    if X.slots == ("tu",):
        Z = Field(ss, ("sl",), np.einsum("mij,mj->mi", gsp, X.components[:, 1:4]),
                  X.stencil_ok)
    elif X.slots == ("su",):
        Z = Field(ss, ("sl",), np.einsum("mij,mj->mi", gsp, X.components),
                  X.stencil_ok)
    elif X.slots and X.slots[-1] == "sl":
        Z = X
    else:
        raise StencilError("scurl expects a vector or a lower-spatial last slot")
    D = spatial_derivative(Z, chart)
    # antisymmetrize the new derivative slot against the last slot
    comps = D.components - np.swapaxes(D.components, 1, D.components.ndim - 1)
    return Field(ss, D.slots, comps, D.stencil_ok)


def laplace_beltrami(q: Field, chart: SpacetimeChart) -> Field:
    """Slice Laplacian of a scalar."""
    if q.slots != ():
        raise StencilError("laplace_beltrami expects a scalar field")
    ss = q.samples
    if ss.kind == "radial":
        r = ss.r
        d1 = _radial_partial(q.components, ss.h)
        d2 = _radial_second(q.components, ss.h)
        lap = np.empty_like(d2)
        lap[1:] = d2[1:] + 2.0 * d1[1:] / r[1:]
        lap[0] = 3.0 * d2[0]
        return Field(ss, (), lap, q.stencil_ok)
    if ss.kind != "ball":
        raise StencilError("laplace_beltrami needs a ball or radial grid")
    lap = np.zeros(ss.n_samples)
    ok = np.ones(ss.n_samples, dtype=bool)
    for axis in range(3):
        d2, okc = _lattice_second(ss, q.components, axis)
        lap += d2
        ok &= okc
    # connection term -gbar^{ij} Gamma^k_{ij} d_k q (vanishes for the
    # built-in charts; kept for generality)
    gam = chart.christoffels(ss.points)
    gsp = gam[:, 1:4, 1:4, 1:4]
    if np.any(gsp):
        d1 = np.stack([_lattice_partial(ss, q.components, a)[0] for a in range(3)], axis=1)
        lap -= np.einsum("mkii,mk->m", gsp, d1)
    if q.stencil_ok is not None:
        ok &= q.stencil_ok
    return Field(ss, (), lap, ok)


# -- material and foliation-time derivatives ----------------------------


def check_four_velocity(u: Field, chart: SpacetimeChart):
    """Unit timelike, future-directed; returns (-u^tau, |ubar|, lambda)."""
    frame = chart.frame(u.samples.points)
    utau = np.einsum("ma,ma->m", frame.tau_lower, u.components)
    ubar = np.einsum("mab,mb->ma", frame.spatial_proj, u.components)
    ubar_mag = np.sqrt(np.maximum(
        np.einsum("mab,ma,mb->m", frame.gbar_lower, ubar, ubar), 0.0))
    if np.any(-utau < 1.0 - 1e-9):
        raise InvalidVelocityError("four-velocity is not unit future-directed: "
                                   f"min(-u^tau) = {float(np.min(-utau)):.12g}")
    lam = ubar_mag / (-utau)
    return -utau, ubar_mag, lam


def _directional_derivative(F: Field, direction: np.ndarray,
                            chart: SpacetimeChart) -> np.ndarray:
    """w^mu grad_mu F for a static snapshot: spatial partials plus full
    connection terms (the time direction contributes only through
    Gamma)."""
    dcomp, _ = _partials(F)  # (m,3,*dims) spatial partials
    wsp = direction[:, 1:4].reshape((-1, 3) + (1,) * (dcomp.ndim - 2))
    out = np.sum(wsp * dcomp, axis=1)
    gam = chart.christoffels(F.samples.points)
    gam_w = np.einsum("mban,mn->mba", gam, direction)  # w^n Gamma^b_{a n}... see below
    nslots = len(F.slots)
    letters = _LET[:nslots]
    for pos, slot in enumerate(F.slots):
        in_sub = letters[:pos] + "g" + letters[pos + 1:]
        if slot[0] == "t":
            block = gam_w
        else:
            block = gam_w[:, 1:4, 1:4]
        if slot[1] == "u":
            out = out + np.einsum(f"m{letters[pos]}g,m{in_sub}->m{letters}",
                                  block, F.components)
        else:
            out = out - np.einsum(f"mg{letters[pos]},m{in_sub}->m{letters}",
                                  block, F.components)
    return out


def material_derivative(F: Field, u: Field, chart: SpacetimeChart) -> Field:
    """grad_u F along a four-velocity field, for static snapshots."""
    check_four_velocity(u, chart)
    out = _directional_derivative(F, u.components, chart)
    return Field(F.samples, F.slots, out, F.stencil_ok)


def tau_derivative(F: Field, u: Field, chart: SpacetimeChart):
    """Foliation-time derivative via the material-derivative split
    grad_tau = (grad_u - ubar^mu grad_mu) / (-u^tau); never differences
    in t.  Returns (field, lambda) with lambda = |ubar|/|u^tau|."""
    minus_utau, _, lam = check_four_velocity(u, chart)
    frame = chart.frame(u.samples.points)
    ubar = np.einsum("mab,mb->ma", frame.spatial_proj, u.components)
    du = _directional_derivative(F, u.components, chart)
    dubar = _directional_derivative(F, ubar, chart)
    shape = (-1,) + (1,) * (du.ndim - 1)
    out = (du - dubar) / minus_utau.reshape(shape)
    return Field(F.samples, F.slots, out, F.stencil_ok), lam


# -- norms ---------------------------------------------------------------


def norm_pointwise(F: Field, chart: SpacetimeChart) -> np.ndarray:
    """|T| per sample: spacetime slots contract with the Riemannian
    metric gbar + tau x tau, spatial slots with the slice metric."""
    if F.rank == 0:
        return np.abs(F.components)
    frame = chart.frame(F.samples.points)
    metrics = []
    for slot in F.slots:
        if slot == "tl":
            metrics.append(frame.riem_upper)
        elif slot == "tu":
            metrics.append(frame.riem_lower)
        elif slot == "sl":
            metrics.append(frame.gbar_upper[:, 1:4, 1:4])
        else:
            metrics.append(frame.gbar_lower[:, 1:4, 1:4])
    lo = _LET[:F.rank]
    hi = "uvwxyz"[:F.rank]
    subs = ",".join([f"m{lo}"] + [f"m{lo[i]}{hi[i]}" for i in range(F.rank)]
                    + [f"m{hi}"])
    sq = np.einsum(f"{subs}->m", F.components, *metrics, F.components)
    return np.sqrt(np.maximum(sq, 0.0))


def l2_norm(F: Field, chart: SpacetimeChart) -> float:
    vals = norm_pointwise(F, chart)
    return float(np.sqrt(np.sum(F.samples.weights * vals * vals)))


def lp_norm(F: Field, chart: SpacetimeChart, p: float) -> float:
    vals = norm_pointwise(F, chart)
    if np.isinf(p):
        return float(np.max(vals))
    return float(np.sum(F.samples.weights * vals ** p) ** (1.0 / p))


def sobolev_norm(F: Field, chart: SpacetimeChart, r: int) -> float:
    """H^r norm: sqrt of the sum over l <= r of the squared L2 norms of
    the l-th spatial derivatives."""
    if r > MAX_DERIVATIVE_ORDER:
        raise StencilError(f"derivative order capped at {MAX_DERIVATIVE_ORDER}")
    total = 0.0
    cur = F
    for level in range(r + 1):
        total += l2_norm(cur, chart) ** 2
        if level < r:
            cur = spatial_derivative(cur, chart)
    return float(np.sqrt(total))


@dataclass(frozen=True)
class MixedNorm:
    k: int
    l: int
    value: float


def mixed_norm(F: Field, u: Field, chart: SpacetimeChart, k: int, l: int) -> MixedNorm:
    """Mixed interior norm over s <= k spatial and m <= l material
    derivatives, in root-sum-square form so that l = 0 coincides with
    the H^k norm (static snapshot version)."""
    if k > MAX_DERIVATIVE_ORDER:
        raise StencilError(f"derivative order capped at {MAX_DERIVATIVE_ORDER}")
    total = 0.0
    base = F
    for m in range(l + 1):
        cur = base
        for s in range(k + 1):
            total += l2_norm(cur, chart) ** 2
            if s < k:
                cur = spatial_derivative(cur, chart)
        if m < l:
            base = material_derivative(base, u, chart)
    return MixedNorm(k, l, float(np.sqrt(total)))


# -- tangential calculus on the boundary sphere --------------------------


def tangential_projector(ss: SampleSet) -> np.ndarray:
    rhat = _rhat(ss)
    return np.eye(3)[None] - rhat[:, :, None] * rhat[:, None, :]


def _sphere_angular_partial(ss: SampleSet, vals: np.ndarray, which: str) -> np.ndarray:
    nth, nph = ss.ntheta, ss.nphi
    grid = vals.reshape((nth, nph) + vals.shape[1:])
    if which == "phi":
        dphi = 2 * np.pi / nph
        out = (np.roll(grid, -1, axis=1) - np.roll(grid, 1, axis=1)) / (2 * dphi)
    else:
        dth = np.pi / nth
        out = np.empty_like(grid)
        out[1:-1] = (grid[2:] - grid[:-2]) / (2 * dth)
        out[0] = (-3 * grid[0] + 4 * grid[1] - grid[2]) / (2 * dth)
        out[-1] = (3 * grid[-1] - 4 * grid[-2] + grid[-3]) / (2 * dth)
    return out.reshape(vals.shape)


def tangential_derivative(F: Field, chart: SpacetimeChart) -> Field:
    """Boundary-intrinsic covariant derivative of a spatial tensor given
    on a sphere grid: tangential ambient derivative with every slot
    projected to the tangent space."""
    ss = F.samples
    if ss.kind != "sphere":
        raise StencilError("tangential derivative needs a sphere grid")
    if any(s[0] != "s" for s in F.slots):
        raise StencilError("tangential derivative expects spatial slots")
    R = ss.radius
    m = ss.n_samples
    dth = _sphere_angular_partial(ss, F.components, "theta")
    dph = _sphere_angular_partial(ss, F.components, "phi")
    st = ss.extra["sin_theta"].reshape((-1,) + (1,) * (F.components.ndim - 1))
    dir_shape = (m, 3) + (1,) * (F.components.ndim - 1)
    val_shape = (m, 1) + F.components.shape[1:]
    grad = (ss.extra["e_theta"].reshape(dir_shape) * (dth / R).reshape(val_shape)
            + ss.extra["e_phi"].reshape(dir_shape)
            * (dph / (R * st)).reshape(val_shape))
    proj = tangential_projector(ss)
    slots = ("sl",) + F.slots
    comps = grad
    letters = _LET[:len(slots)]
    for pos, slot in enumerate(slots):
        in_sub = letters[:pos] + "g" + letters[pos + 1:]
        if slot[1] == "u":
            comps = np.einsum(f"m{letters[pos]}g,m{in_sub}->m{letters}", proj, comps)
        else:
            comps = np.einsum(f"mg{letters[pos]},m{in_sub}->m{letters}", proj, comps)
    return Field(ss, slots, comps, F.stencil_ok)


def boundary_sobolev_norm(F: Field, chart: SpacetimeChart, r: int) -> float:
    """H^r norm on the boundary sphere using tangential derivatives."""
    total = 0.0
    cur = F
    for level in range(r + 1):
        total += l2_norm(cur, chart) ** 2
        if level < r:
            cur = tangential_derivative(cur, chart)
    return float(np.sqrt(total))


def field_to_csv_rows(F: Field):
    """One row per sample: coordinates then flattened components."""
    pts = F.samples.points
    flat = F.components.reshape(len(pts), -1)
    for i in range(len(pts)):
        yield list(pts[i]) + list(flat[i])
