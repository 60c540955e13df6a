"""Numerical verification of the elliptic, projection, interpolation,
Sobolev and Poincare estimates, plus the commutator/remainder budgets.

Inequalities are verified, not proved: each suite evaluates both sides
on seeded families of analytic test fields and reports the empirical
constant (the largest ratio).  A suite passes when every nondegenerate
instance stays below a frozen budget (ten times the maximum ratio
observed on the reference family), and degenerate instances (vanishing
right-hand side) must have vanishing left-hand side.

Test fields carry exact derivatives through a small expression tree, so
the reported ratios contain quadrature error only; identity checks
(Hodge split, symmetric/antisymmetric decomposition) additionally run
through the lattice finite-difference operators, where their residuals
converge at second order and vanish to roundoff on low-degree
polynomials.

The built-in charts have flat spatial slices: curvature-driven terms
(the antisymmetric derivative parts, Ricci contributions, the ambient
curvature bound) evaluate to zero and are carried through the budgets
as exact zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from .boundary import BallDomain
from .charts import SpacetimeChart
from .fields import Field, tangential_derivative
from .grids import SampleSet, ball_lattice, sphere_grid

DEFAULT_SEED = 0xE57
DEFAULT_COUNT = 20


class SuiteConfigError(ValueError):
    """Unknown suite or inadmissible exponents."""


# -- exact-derivative scalar expressions ---------------------------------


class Poly:
    """Multivariate polynomial sum c * x^i y^j z^k."""

    def __init__(self, terms: dict):
        self.terms = {k: v for k, v in terms.items() if v != 0.0}

    def value(self, xyz: np.ndarray) -> np.ndarray:
        xyz = np.asarray(xyz, dtype=float)
        out = np.zeros(xyz.shape[:-1])
        for (i, j, k), c in self.terms.items():
            out += c * xyz[..., 0] ** i * xyz[..., 1] ** j * xyz[..., 2] ** k
        return out

    def partial(self, axis: int) -> "Poly":
        out = {}
        for mono, c in self.terms.items():
            p = mono[axis]
            if p == 0:
                continue
            new = list(mono)
            new[axis] = p - 1
            key = tuple(new)
            out[key] = out.get(key, 0.0) + c * p
        return Poly(out)

    def __mul__(self, other: "Poly") -> "Poly":
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                key = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
                out[key] = out.get(key, 0.0) + c1 * c2
        return Poly(out)


class Trig:
    """Sum of plane waves a_j cos(k_j . x + phi_j)."""

    def __init__(self, amps, kvecs, phases):
        self.amps = np.asarray(amps, dtype=float)
        self.kvecs = np.asarray(kvecs, dtype=float)
        self.phases = np.asarray(phases, dtype=float)

    def value(self, xyz: np.ndarray) -> np.ndarray:
        xyz = np.asarray(xyz, dtype=float)
        arg = xyz @ self.kvecs.T + self.phases
        return np.cos(arg) @ self.amps

    def partial(self, axis: int) -> "Trig":
        # d/dx cos(k.x + p) = k_ax cos(k.x + p + pi/2)
        return Trig(self.amps * self.kvecs[:, axis], self.kvecs,
                    self.phases + 0.5 * np.pi)


class Prod:
    """Product of two scalar expressions, with the Leibniz rule."""

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def value(self, xyz):
        return self.a.value(xyz) * self.b.value(xyz)

    def partial(self, axis):
        return Sum(Prod(self.a.partial(axis), self.b),
                   Prod(self.a, self.b.partial(axis)))


class Sum:
    def __init__(self, a, b):
        self.a = a
        self.b = b

    def value(self, xyz):
        return self.a.value(xyz) + self.b.value(xyz)

    def partial(self, axis):
        return Sum(self.a.partial(axis), self.b.partial(axis))


BALL_CUTOFF = Poly({(0, 0, 0): 1.0, (2, 0, 0): -1.0, (0, 2, 0): -1.0,
                    (0, 0, 2): -1.0})


def gradient(tensor):
    """New leading slot of exact partials; tensors are nested lists of
    scalar expressions."""
    return [_grad_nested(tensor, ax) for ax in range(3)]


def _grad_nested(tensor, axis):
    if isinstance(tensor, list):
        return [_grad_nested(t, axis) for t in tensor]
    return tensor.partial(axis)


def evaluate(tensor, xyz: np.ndarray) -> np.ndarray:
    """Numeric components: nested list -> array (m, 3, 3, ...)."""
    if isinstance(tensor, list):
        return np.stack([evaluate(t, xyz) for t in tensor], axis=1)
    return tensor.value(xyz)


# -- seeded families -------------------------------------------------------


def random_poly(rng, degree: int = 3, scale: float = 1.0) -> Poly:
    terms = {}
    for mono in iproduct(range(degree + 1), repeat=3):
        if sum(mono) <= degree:
            terms[mono] = scale * rng.normal() / (1.0 + sum(mono))
    return Poly(terms)


def random_trig(rng, n_waves: int = 3, kmax: float = 2.0) -> Trig:
    return Trig(rng.normal(size=n_waves) / n_waves,
                rng.uniform(-kmax, kmax, size=(n_waves, 3)),
                rng.uniform(0, 2 * np.pi, size=n_waves))


def random_one_form(rng, kind: str = "mixed"):
    """Rank-1 field as a list of three scalar expressions."""
    if kind == "poly":
        return [random_poly(rng) for _ in range(3)]
    if kind == "trig":
        return [random_trig(rng) for _ in range(3)]
    if kind == "rotational":
        w = rng.normal(size=3)
        return [Poly({(0, 0, 1): w[1], (0, 1, 0): -w[2]}),
                Poly({(1, 0, 0): w[2], (0, 0, 1): -w[0]}),
                Poly({(0, 1, 0): w[0], (1, 0, 0): -w[1]})]
    # mixed: alternate
    return [random_poly(rng, 2), random_trig(rng, 2), random_poly(rng, 3)]


def boundary_vanishing_scalar(rng, kind: str = "poly"):
    """q = (1 - |x|^2) * smooth, vanishing identically on the sphere."""
    if kind == "poly":
        return BALL_CUTOFF * random_poly(rng, 2)
    if kind == "bump":
        m = int(rng.integers(1, 4))
        out = BALL_CUTOFF
        for _ in range(m - 1):
            out = out * BALL_CUTOFF
        return out
    return Prod(BALL_CUTOFF, random_trig(rng, 2))


# -- geometry/quadrature context ------------------------------------------


@dataclass
class VerifyContext:
    dom: BallDomain
    lattice: SampleSet
    sphere: SampleSet
    chart: SpacetimeChart = field(default_factory=lambda: SpacetimeChart("minkowski"))

    @classmethod
    def build(cls, lattice_h: float = 0.05, ntheta: int = 24,
              radius: float = 1.0) -> "VerifyContext":
        return cls(BallDomain(radius), ball_lattice(lattice_h, radius),
                   sphere_grid(ntheta, radius=radius))

    @property
    def xyz(self):
        return self.lattice.points[:, 1:4]

    @property
    def bxyz(self):
        return self.sphere.points[:, 1:4]

    def boundary_bound(self) -> float:
        R = self.dom.radius
        return math.sqrt(2.0) / R + 1.0 / R

    def curvature_bound(self) -> float:
        return 0.0  # flat spatial slices

    def gamma_lattice(self) -> np.ndarray:
        return self.dom.gamma_upper(self.lattice.points)

    def normals_boundary(self) -> np.ndarray:
        return self.bxyz / np.linalg.norm(self.bxyz, axis=1, keepdims=True)

    def proj_boundary(self) -> np.ndarray:
        n = self.normals_boundary()
        return np.eye(3)[None] - n[:, :, None] * n[:, None, :]

    def theta_boundary(self) -> np.ndarray:
        return self.proj_boundary() / self.dom.radius


def _norm_sq(vals: np.ndarray) -> np.ndarray:
    axes = tuple(range(1, vals.ndim))
    return np.sum(vals * vals, axis=axes)


def _l2(vals: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sqrt(np.sum(weights * _norm_sq(vals))))


def _lp(vals: np.ndarray, weights: np.ndarray, p: float) -> float:
    mag = np.sqrt(_norm_sq(vals))
    if np.isinf(p):
        return float(np.max(mag))
    return float(np.sum(weights * mag ** p) ** (1.0 / p))


def _contract(vals: np.ndarray, mats: list) -> np.ndarray:
    """Full pairwise contraction of two copies of ``vals`` with one
    matrix per slot (None means the Euclidean metric)."""
    nslots = vals.ndim - 1
    lo = "abcdef"[:nslots]
    hi = "uvwxyz"[:nslots]
    operands, subs = [vals], [f"m{lo}"]
    for i, mat in enumerate(mats):
        if mat is None:
            continue
        operands.append(mat)
        subs.append(f"m{lo[i]}{hi[i]}")
    second = "".join(hi[i] if mats[i] is not None else lo[i]
                     for i in range(nslots))
    operands.append(vals)
    subs.append(f"m{second}")
    return np.einsum(",".join(subs) + "->m", *operands)


def _project_all(vals: np.ndarray, proj: np.ndarray) -> np.ndarray:
    nslots = vals.ndim - 1
    out = vals
    letters = "abcdef"[:nslots]
    for i in range(nslots):
        in_sub = letters[:i] + "g" + letters[i + 1:]
        out = np.einsum(f"m{letters[i]}g,m{in_sub}->m{letters}", proj, out)
    return out


# -- report types ----------------------------------------------------------


@dataclass
class InequalityInstance:
    index: int
    lhs: float
    rhs: float
    degenerate: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if not self.degenerate else float("nan")


@dataclass
class InequalityReport:
    suite: str
    instances: list
    empirical_constant: float
    budget: float
    passed: bool
    degenerate_ok: bool
    convergence_order: float | None = None

    @property
    def all_ok(self) -> bool:
        return self.passed and self.degenerate_ok


def _make_report(name: str, pairs, budget: float,
                 order: float | None = None,
                 degeneracy_tol: float = 1e-10) -> InequalityReport:
    instances = []
    for idx, (lhs, rhs) in enumerate(pairs):
        scale = max(abs(lhs), abs(rhs), 1.0)
        degen = abs(rhs) < degeneracy_tol * scale or rhs == 0.0
        instances.append(InequalityInstance(idx, lhs, rhs, degen))
    ratios = [i.ratio for i in instances if not i.degenerate]
    emp = max(ratios) if ratios else 0.0
    passed = all(i.lhs <= budget * i.rhs for i in instances if not i.degenerate)
    degen_ok = all(i.lhs <= degeneracy_tol * max(1.0, abs(i.rhs))
                   for i in instances if i.degenerate)
    return InequalityReport(name, instances, emp, budget, passed, degen_ok, order)


# Budgets frozen from the reference family (seed 0xE57, 20 instances,
# lattice h = 0.05, 24 boundary latitudes): ten times the maximum
# observed ratio, rounded up to two figures.
GOLDEN_BUDGETS = {
    "ellpw": 25.0,
    "ellfund2": 6.1,
    "ellbdy1": 12.0,
    "ellbdy2": 6.7,
    "ellint1": 3.0,
    "ellint2": 5.3,
    "ellbdyfn1": 35.0,
    "ellbdyfn2": 4.0,
    "projest": 5.9,
    "projtheta": 10.0,
    "elllotbdy1": 4.2,
    "elllotbdy2": 7.5,
    "bdyinterp": 7.4,
    "intinterp": 6.9,
    "bdyinterpu": 1.6,
    "intinterpu": 2.4,
    "bdysob1": 0.81,
    "bdysob2": 1.2,
    "intsob1": 1.6,
    "intsob2": 1.0,
    "poin": 2.0,
    "poin2": 2.1,
    "symdecomp": 5.0,
    "material_split": 6.1,
    "remainders": 0.1,
}


# -- symmetrization --------------------------------------------------------


def sym_decompose(vals: np.ndarray, r: int):
    """Symmetric/antisymmetric parts of a (0, r+1) tensor over its first
    r slots (sample axis first)."""
    if r <= 1:
        return vals, np.zeros_like(vals)
    if r != 2:
        raise SuiteConfigError("symmetrization implemented for r <= 2")
    sym = 0.5 * (vals + np.swapaxes(vals, 1, 2))
    anti = 0.5 * (vals - np.swapaxes(vals, 1, 2))
    return sym, anti


def verify_symdecomp(ctx: VerifyContext, seed: int = DEFAULT_SEED,
                     count: int = DEFAULT_COUNT) -> InequalityReport:
    """beta = grad-bar^2 alpha splits with beta = S + A, |S| + |A| <= 2|beta|,
    and A vanishes on the flat slices."""
    rng = np.random.default_rng(seed)
    pairs = []
    worst_anti = 0.0
    for _ in range(count):
        alpha = random_one_form(rng)
        beta3 = gradient(gradient(alpha))
        vals = evaluate(beta3, ctx.xyz)
        sym, anti = sym_decompose(vals, 2)
        lhs = _lp(sym, ctx.lattice.weights, np.inf) \
            + _lp(anti, ctx.lattice.weights, np.inf)
        rhs = 2.0 * _lp(vals, ctx.lattice.weights, np.inf)
        pairs.append((lhs, rhs))
        worst_anti = max(worst_anti, _lp(anti, ctx.lattice.weights, np.inf))
    rep = _make_report("symdecomp", pairs, GOLDEN_BUDGETS["symdecomp"])
    rep.passed = rep.passed and worst_anti < 1e-10
    return rep


# -- elliptic suites -------------------------------------------------------


def _beta_family(rng, order: int):
    """beta = grad-bar^order alpha for a random rank-1 alpha."""
    alpha = random_one_form(rng)
    beta = alpha
    for _ in range(order):
        beta = gradient(beta)
    return beta


def _divergence_last(vals_grad: np.ndarray) -> np.ndarray:
    """Trace of the derivative slot against the last slot."""
    return np.einsum("mk...k->m...", vals_grad)


def _curl_last(vals_grad: np.ndarray) -> np.ndarray:
    return vals_grad - np.swapaxes(vals_grad, 1, vals_grad.ndim - 1)


def verify_elliptic(ctx: VerifyContext, suite: str,
                    seed: int = DEFAULT_SEED,
                    count: int = DEFAULT_COUNT) -> InequalityReport:
    """Pointwise and integral first-derivative estimates in terms of
    divergence, curl, tangential blocks and boundary traces."""
    if suite not in ("ellpw", "ellfund2", "ellbdy1", "ellbdy2",
                     "ellint1", "ellint2"):
        raise SuiteConfigError(f"unknown elliptic suite {suite!r}")
    rng = np.random.default_rng(seed)
    w = ctx.lattice.weights
    bw = ctx.sphere.weights
    gam = ctx.gamma_lattice()
    K = ctx.boundary_bound()
    Rcurv = ctx.curvature_bound()
    pairs = []
    order = None
    for inst in range(count):
        r = int(rng.integers(0, 2))
        beta = _beta_family(rng, r)
        vals = evaluate(beta, ctx.xyz)
        bvals = evaluate(beta, ctx.bxyz)
        dbeta = gradient(beta)
        dvals = evaluate(dbeta, ctx.xyz)
        div = _divergence_last(dvals)
        curl = _curl_last(dvals)
        if suite == "ellpw":
            lhs_pt = _norm_sq(dvals)
            mats = [gam] + [gam] * r + [None]
            tang = _contract(dvals, mats)
            rhs_pt = tang + _norm_sq(div) + _norm_sq(curl)
            idx = np.argmax(lhs_pt / np.maximum(rhs_pt, 1e-300))
            pairs.append((float(lhs_pt[idx]), float(rhs_pt[idx])))
            continue
        if suite == "ellfund2":
            lhs = float(np.sum(w * _norm_sq(dvals)))
            nvec = ctx.xyz / np.maximum(
                np.linalg.norm(ctx.xyz, axis=1, keepdims=True), 1e-12)
            nn = nvec[:, :, None] * nvec[:, None, :]
            mats = [None] + [gam] * r + [nn]
            normal_block = _contract(dvals, mats)
            rhs = float(np.sum(w * (normal_block + _norm_sq(div) + _norm_sq(curl)
                                    + K * _norm_sq(vals))))
            pairs.append((lhs, rhs))
            continue
        l2b = _l2(bvals, bw)
        l2i = _l2(vals, w)
        l2d = _l2(dvals, w)
        l2div = _l2(div, w)
        l2curl = _l2(curl, w)
        if suite == "ellbdy1":
            pairs.append((l2b ** 2, (l2d + K * l2i) * l2i))
        elif suite == "ellbdy2":
            proj = ctx.proj_boundary()
            pb = _l2(_project_all(bvals, proj), bw)
            pairs.append((l2b ** 2,
                          pb ** 2 + (l2div + l2curl + K * l2i) * l2i))
        elif suite == "ellint1":
            dbv = evaluate(dbeta, ctx.bxyz)
            pairs.append((l2d ** 2,
                          _l2(dbv, bw) * l2b + (l2div + l2curl) ** 2))
        else:  # ellint2
            proj = ctx.proj_boundary()
            dbv = evaluate(dbeta, ctx.bxyz)
            pdb = _l2(_project_all(dbv, proj), bw)
            nvec_b = ctx.normals_boundary()
            nb = np.einsum("m...i,mi->m...", bvals, nvec_b)
            pnb = _l2(_project_all(nb, proj) if nb.ndim > 1 else nb, bw)
            pairs.append((l2d ** 2,
                          pdb * pnb + l2div ** 2 + l2curl ** 2
                          + (K + Rcurv) * l2i ** 2))
    if suite == "ellint1":
        order = hodge_identity_order(ctx.chart)
    return _make_report(suite, pairs, GOLDEN_BUDGETS[suite], order)


def hodge_identity_residual(chart: SpacetimeChart, h: float,
                            field_kind: str = "trig",
                            seed: int = DEFAULT_SEED) -> float:
    """Sup residual of lap beta_k = grad_k div beta + grad^i curl beta_{ik}
    (+ Ricci term, zero here) through the lattice finite differences."""
    from .fields import (laplace_beltrami, scalar_field, spatial_derivative,
                         spatial_divergence, spatial_vector_field, scurl)
    ss = ball_lattice(h)
    rng = np.random.default_rng(seed)
    beta = random_one_form(rng, field_kind)
    comps = np.stack([b.value(ss.points[:, 1:4]) for b in beta], axis=1)
    X = spatial_vector_field(ss, comps)
    lap = np.stack([laplace_beltrami(
        scalar_field(ss, comps[:, i]), chart).components for i in range(3)], axis=1)
    div = spatial_divergence(X, chart)
    grad_div = spatial_derivative(div, chart)
    curl = scurl(X, chart)
    div_curl = spatial_derivative(curl, chart)
    term2 = np.einsum("miik->mk", div_curl.components)
    ok = grad_div.ok_mask() & div_curl.ok_mask() & (ss.r < 0.9)
    res = lap - (grad_div.components + term2)
    return float(np.max(np.abs(res[ok])))


def hodge_identity_order(chart: SpacetimeChart) -> float:
    r1 = hodge_identity_residual(chart, 0.1)
    r2 = hodge_identity_residual(chart, 0.05)
    return float(np.log2(r1 / r2))


# -- projection suites ------------------------------------------------------


def _q_derivatives(q, max_order: int):
    """q, grad q, grad^2 q, ... as nested expression lists."""
    out = [q]
    cur = q
    for _ in range(max_order):
        cur = gradient(cur) if isinstance(cur, list) else \
            [cur.partial(ax) for ax in range(3)]
        out.append(cur)
    return out


def verify_projection(ctx: VerifyContext, suite: str,
                      seed: int = DEFAULT_SEED, count: int = DEFAULT_COUNT,
                      r: int | None = None,
                      delta: float = 1.0) -> InequalityReport:
    """Boundary estimates for functions vanishing on the sphere, driven
    by the projected top derivatives and the curvature of the boundary."""
    known = ("ellbdyfn1", "ellbdyfn2", "projest", "projtheta",
             "elllotbdy1", "elllotbdy2")
    if suite not in known:
        raise SuiteConfigError(f"unknown projection suite {suite!r}")
    rng = np.random.default_rng(seed)
    w = ctx.lattice.weights
    bw = ctx.sphere.weights
    proj = ctx.proj_boundary()
    nvec = ctx.normals_boundary()
    K = ctx.boundary_bound()
    theta_vals = ctx.theta_boundary()
    theta_l2 = _l2(theta_vals, bw)
    pairs = []
    order = None
    for inst in range(count):
        q = boundary_vanishing_scalar(rng, "poly" if inst % 2 else "trig")
        rr = r if r is not None else (2 if suite in ("ellbdyfn1", "ellbdyfn2",
                                                     "projest", "projtheta")
                                      else (3 if suite == "elllotbdy1" else 4))
        need = rr + (0 if suite != "elllotbdy2" else 0)
        derivs = _q_derivatives(q, max(need, 2))
        lap = Sum(Sum(derivs[2][0][0], derivs[2][1][1]), derivs[2][2][2])
        lap_derivs = _q_derivatives(lap, max(need - 2, 0))

        def bnorm(t):
            return _l2(evaluate(t, ctx.bxyz), bw)

        def inorm(t):
            return _l2(evaluate(t, ctx.xyz), w)

        def hnorm(ds, upto):
            return math.sqrt(sum(inorm(d) ** 2 for d in ds[:upto + 1]))

        grad_n = np.einsum("mi,mi->m", evaluate(derivs[1], ctx.bxyz), nvec)
        top_b = evaluate(derivs[rr], ctx.bxyz)
        ptop = _l2(_project_all(top_b, proj), bw)

        if suite == "ellbdyfn1":
            lhs = _l2(top_b, bw) ** 2 + inorm(derivs[rr]) ** 2
            rhs = ptop ** 2 + (hnorm(lap_derivs, rr - 1) ** 2
                               + inorm(derivs[1]) ** 2 + inorm(derivs[0]) ** 2)
            pairs.append((lhs, rhs))
        elif suite == "ellbdyfn2":
            lhs = inorm(derivs[rr]) ** 2 + bnorm(derivs[rr - 1]) ** 2
            rhs = delta * ptop ** 2 + (1.0 + 1.0 / delta) * (
                hnorm(lap_derivs, rr - 2) ** 2 + inorm(derivs[1]) ** 2
                + inorm(derivs[0]) ** 2)
            pairs.append((lhs, rhs))
        elif suite == "projest":
            theta_term = _l2(theta_vals * grad_n[:, None, None], bw)
            lower = sum(bnorm(derivs[rr - k]) for k in range(1, rr))
            pairs.append((ptop, theta_term + lower))
        elif suite == "projtheta":
            margin = np.min(np.abs(grad_n))
            if margin <= 1e-8 * max(1.0, float(np.max(np.abs(grad_n)))):
                pairs.append((0.0, 0.0))  # degenerate, flagged by rhs = 0
                continue
            recovered_sq = np.sum(bw * _norm_sq(_project_all(top_b, proj))
                                  / grad_n ** 2)
            pairs.append((math.sqrt(float(recovered_sq)), theta_l2))
        elif suite == "elllotbdy1":
            theta_term = 0.0 if rr - 3 > 0 else _l2(
                theta_vals * grad_n[:, None, None], bw) if rr == 3 else 0.0
            lhs = bnorm(derivs[rr - 1])
            rhs = theta_term + inorm(lap_derivs[rr - 2]) \
                + float(np.max(np.abs(grad_n))) + hnorm(lap_derivs, max(rr - 3, 0))
            pairs.append((lhs, rhs))
        else:  # elllotbdy2, rr = 4
            lhs = bnorm(derivs[3]) + _lp(evaluate(derivs[1], ctx.bxyz), bw, np.inf)
            rhs = inorm(lap_derivs[2]) + hnorm(lap_derivs, 1)
            pairs.append((lhs, rhs))
    if suite == "projtheta":
        order = projection_identity_order(ctx)
    return _make_report(suite, pairs, GOLDEN_BUDGETS[suite], order)


def projection_identity_order(ctx: VerifyContext) -> float:
    from .boundary import projection_identity_convergence

    def q_fn(xyz):
        return np.sum(xyz * xyz, axis=-1) - ctx.dom.radius ** 2

    _, orders = projection_identity_convergence(ctx.dom, ctx.chart, q_fn,
                                                steps=(4e-3, 2e-3))
    return float(orders[0])


def ellbdyfn2_delta_sweep(ctx: VerifyContext, deltas=(0.25, 0.5, 1.0, 2.0, 4.0),
                          seed: int = DEFAULT_SEED):
    """Ratio of the delta-weighted budget terms: the non-projected part
    grows monotonically with 1/delta."""
    out = []
    for d in deltas:
        rep = verify_projection(ctx, "ellbdyfn2", seed=seed, count=5, delta=d)
        out.append((d, rep.empirical_constant))
    return out


# -- interpolation / Sobolev / Poincare suites ------------------------------


def _sphere_field(ctx: VerifyContext, tensor) -> Field:
    vals = evaluate(tensor, ctx.bxyz)
    slots = ("sl",) * (vals.ndim - 1)
    return Field(ctx.sphere, slots, vals)


def _tangential_norms(ctx: VerifyContext, tensor, orders: int):
    """L^p-ready value arrays of the tangential derivatives 0..orders."""
    out = []
    F = _sphere_field(ctx, tensor)
    for _ in range(orders + 1):
        out.append(F.components)
        F = tangential_derivative(F, ctx.chart)
    return out


def verify_interp_sobolev(ctx: VerifyContext, suite: str,
                          seed: int = DEFAULT_SEED,
                          count: int = DEFAULT_COUNT) -> InequalityReport:
    """Interpolation, Sobolev-embedding and Poincare checks with the
    stated exponent patterns."""
    rng = np.random.default_rng(seed)
    w = ctx.lattice.weights
    bw = ctx.sphere.weights
    K = ctx.boundary_bound()
    pairs = []
    for inst in range(count):
        kind = "poly" if inst % 2 else "trig"
        if suite == "bdyinterp":
            # k=1, m=2, p=2, q=inf -> s=4, a=1/2
            alpha = random_one_form(rng, kind)
            d0, d1, d2 = _tangential_norms(ctx, alpha, 2)
            lhs = _lp(d1, bw, 4.0)
            rhs = _lp(d0, bw, np.inf) ** 0.5 * _l2(d2, bw) ** 0.5
            pairs.append((lhs, rhs))
        elif suite == "intinterp":
            alpha = random_one_form(rng, kind)
            vals = [evaluate(alpha, ctx.xyz)]
            cur = alpha
            for _ in range(2):
                cur = gradient(cur)
                vals.append(evaluate(cur, ctx.xyz))
            lhs = sum(_lp(v, w, 4.0) for v in vals[:2])
            rhs = _lp(vals[0], w, np.inf) ** 0.5 \
                * sum(_l2(v, w) * K ** (2 - i) for i, v in enumerate(vals)) ** 0.5
            pairs.append((lhs, rhs))
        elif suite == "bdyinterpu":
            # l = m = 1, k = 2 product estimate on the boundary
            alpha = random_one_form(rng, kind)
            beta = random_one_form(rng, "trig" if kind == "poly" else "poly")
            a0, a1, a2 = _tangential_norms(ctx, alpha, 2)
            b0, b1, b2 = _tangential_norms(ctx, beta, 2)
            prod_mag = np.sqrt(_norm_sq(a1)) * np.sqrt(_norm_sq(b1))
            lhs = float(np.sqrt(np.sum(bw * prod_mag ** 2)))
            h2a = math.sqrt(_l2(a0, bw) ** 2 + _l2(a1, bw) ** 2 + _l2(a2, bw) ** 2)
            h2b = math.sqrt(_l2(b0, bw) ** 2 + _l2(b1, bw) ** 2 + _l2(b2, bw) ** 2)
            rhs = _lp(a0, bw, np.inf) * h2b + _lp(b0, bw, np.inf) * h2a
            pairs.append((lhs, rhs))
        elif suite == "intinterpu":
            alpha = random_one_form(rng, kind)
            beta = random_one_form(rng, "trig" if kind == "poly" else "poly")
            da = evaluate(gradient(alpha), ctx.xyz)
            db = evaluate(gradient(beta), ctx.xyz)
            a0 = evaluate(alpha, ctx.xyz)
            b0 = evaluate(beta, ctx.xyz)
            d2a = evaluate(gradient(gradient(alpha)), ctx.xyz)
            d2b = evaluate(gradient(gradient(beta)), ctx.xyz)
            prod_mag = np.sqrt(_norm_sq(da)) * np.sqrt(_norm_sq(db))
            lhs = float(np.sqrt(np.sum(w * prod_mag ** 2)))
            h2a = math.sqrt(_l2(a0, w) ** 2 + _l2(da, w) ** 2 + _l2(d2a, w) ** 2)
            h2b = math.sqrt(_l2(b0, w) ** 2 + _l2(db, w) ** 2 + _l2(d2b, w) ** 2)
            rhs = _lp(a0, w, np.inf) * h2b + _lp(b0, w, np.inf) * h2a
            pairs.append((lhs, rhs))
        elif suite == "bdysob1":
            alpha = random_one_form(rng, kind)
            d0, d1 = _tangential_norms(ctx, alpha, 1)
            lhs = _l2(d0, bw)
            rhs = K * (_lp(d0, bw, 1.0) + _lp(d1, bw, 1.0))
            pairs.append((lhs, rhs))
        elif suite == "bdysob2":
            alpha = random_one_form(rng, kind)
            d0, d1 = _tangential_norms(ctx, alpha, 1)
            lhs = _lp(d0, bw, np.inf)
            rhs = K * (_l2(d0, bw) + _l2(d1, bw))
            pairs.append((lhs, rhs))
        elif suite == "intsob1":
            alpha = random_one_form(rng, kind)
            a0 = evaluate(alpha, ctx.xyz)
            da = evaluate(gradient(alpha), ctx.xyz)
            lhs = _lp(a0, w, 6.0)
            rhs = K * (_l2(a0, w) + _l2(da, w))
            pairs.append((lhs, rhs))
        elif suite == "intsob2":
            alpha = random_one_form(rng, kind)
            a0 = evaluate(alpha, ctx.xyz)
            da = evaluate(gradient(alpha), ctx.xyz)
            d2a = evaluate(gradient(gradient(alpha)), ctx.xyz)
            lhs = _lp(a0, w, np.inf)
            rhs = K * (_l2(a0, w) + _l2(da, w) + _l2(d2a, w))
            pairs.append((lhs, rhs))
        elif suite == "poin":
            q = boundary_vanishing_scalar(rng, kind)
            dq = [q.partial(ax) for ax in range(3)]
            vol = float(np.sum(w))
            lhs = _l2(q.value(ctx.xyz), w)
            rhs = vol ** (1.0 / 3.0) * _l2(evaluate(dq, ctx.xyz), w)
            pairs.append((lhs, rhs))
        elif suite == "poin2":
            q = boundary_vanishing_scalar(rng, kind)
            derivs = _q_derivatives(q, 2)
            lap = Sum(Sum(derivs[2][0][0], derivs[2][1][1]), derivs[2][2][2])
            vol = float(np.sum(w))
            lhs = _l2(evaluate(derivs[1], ctx.xyz), w)
            rhs = vol ** (1.0 / 6.0) * _l2(lap.value(ctx.xyz), w)
            pairs.append((lhs, rhs))
        else:
            raise SuiteConfigError(f"unknown interpolation suite {suite!r}")
    return _make_report(suite, pairs, GOLDEN_BUDGETS[suite])


def poincare_reference_ratios(ctx: VerifyContext):
    """The paraboloid 1 - r^2: computed Poincare ratios against the
    closed-form integrals sqrt(32 pi/105), sqrt(16 pi/5), 6 sqrt(Vol)."""
    q = BALL_CUTOFF
    w = ctx.lattice.weights
    vol = float(np.sum(w))
    dq = [q.partial(ax) for ax in range(3)]
    d2 = gradient(dq)
    lap = Sum(Sum(d2[0][0], d2[1][1]), d2[2][2])
    l2q = _l2(q.value(ctx.xyz), w)
    l2dq = _l2(evaluate(dq, ctx.xyz), w)
    l2lap = _l2(lap.value(ctx.xyz), w)
    ratio1 = l2q / (vol ** (1.0 / 3.0) * l2dq)
    ratio2 = l2dq / (vol ** (1.0 / 6.0) * l2lap)
    vol_exact = 4.0 * np.pi / 3.0
    oracle1 = math.sqrt(32 * math.pi / 105) \
        / (vol_exact ** (1.0 / 3.0) * math.sqrt(16 * math.pi / 5))
    oracle2 = math.sqrt(16 * math.pi / 5) \
        / (vol_exact ** (1.0 / 6.0) * 6.0 * math.sqrt(vol_exact))
    return (ratio1, oracle1), (ratio2, oracle2)


# -- material-split and remainder budgets -----------------------------------


def verify_material_split(ctx: VerifyContext, lam: float = 0.1,
                          seed: int = DEFAULT_SEED,
                          count: int = DEFAULT_COUNT) -> InequalityReport:
    """Full-derivative control through material and slice derivatives
    for a boosted uniform four-velocity of smallness lambda.

    The test fields oscillate in time (components s(x) cos(w t + phi)
    with exact derivatives evaluated on the t = 0 slice), so the
    foliation-time content of the full gradient really is recovered from
    the material derivative plus lambda times spatial gradients; the
    measured ratio against the plain mixed-norm budget grows with the
    velocity and decreases as lambda -> 0.
    """
    if lam >= 1.0:
        raise SuiteConfigError("velocity smallness requires lambda < 1")
    rng = np.random.default_rng(seed)
    bst = math.atanh(lam)
    u0, u1 = math.cosh(bst), math.sinh(bst)
    u_norm = math.sqrt(u0 * u0 + u1 * u1)
    pairs = []
    for inst in range(count):
        # each component: list of (spatial expression, omega, phase)
        comps = []
        for j in range(3):
            if inst % 2 == 0:
                # comoving wave cos(k x - k c t) with c the boost speed:
                # its material derivative cancels identically, the
                # adversarial direction for the split
                kk = float(rng.uniform(0.5, 2.5))
                om = kk * (u1 / u0)
                terms = [(Trig([1.0], [[kk, 0.0, 0.0]], [0.0]), om, 0.0),
                         (Trig([1.0], [[kk, 0.0, 0.0]], [-0.5 * np.pi]),
                          om, -0.5 * np.pi)]
            else:
                terms = [(random_poly(rng, 2), float(rng.uniform(0.5, 3.0)),
                          float(rng.uniform(0, 2 * np.pi)))]
            comps.append(terms)

        def stacks(s_order: int, t_order: int) -> np.ndarray:
            """Values of d_s^{s_order} d_t^{t_order} X at t = 0, with the
            spatial slots leading and the component slot last."""
            outs = []
            for terms in comps:
                acc = None
                for spatial, om, ph in terms:
                    expr = spatial
                    for _ in range(s_order):
                        expr = gradient(expr)
                    coef = om ** t_order * math.cos(ph + 0.5 * np.pi * t_order)
                    v = coef * evaluate(expr, ctx.xyz)
                    acc = v if acc is None else acc + v
                outs.append(acc)
            return np.stack(outs, axis=-1)

        X = stacks(0, 0)
        dX_t = stacks(0, 1)
        dX_s = stacks(1, 0)
        d2X_tt = stacks(0, 2)
        d2X_ts = stacks(1, 1)
        d2X_ss = stacks(2, 0)
        # full second gradient in the Riemannian norm (flat chart)
        lhs_pt = np.sqrt(_norm_sq(d2X_tt) + 2.0 * _norm_sq(d2X_ts)
                         + _norm_sq(d2X_ss))
        # material derivatives along the boosted u
        m1 = u0 * dX_t + u1 * dX_s[:, 0]
        m1_s = u0 * d2X_ts + u1 * d2X_ss[:, 0]
        m1_t = u0 * d2X_tt + u1 * d2X_ts[:, 0]
        m2 = u0 * m1_t + u1 * m1_s[:, 0]
        x1 = np.sqrt(_norm_sq(X)) + np.sqrt(_norm_sq(dX_s)) + np.sqrt(_norm_sq(m1))
        x2 = x1 + np.sqrt(_norm_sq(d2X_ss)) + np.sqrt(_norm_sq(m1_s)) \
            + np.sqrt(_norm_sq(m2))
        rhs_pt = x2 + u_norm * x1 + x1
        idx = int(np.argmax(lhs_pt / np.maximum(rhs_pt, 1e-300)))
        pairs.append((float(lhs_pt[idx]), float(rhs_pt[idx])))
    return _make_report("material_split", pairs, GOLDEN_BUDGETS["material_split"])


def material_split_lambda_sweep(ctx: VerifyContext,
                                lams=(0.05, 0.1, 0.2, 0.4),
                                seed: int = DEFAULT_SEED):
    return [(lam, verify_material_split(ctx, lam, seed, count=5).empirical_constant)
            for lam in lams]


def verify_remainders(state, seed: int = DEFAULT_SEED) -> InequalityReport:
    """Norms of the wave-equation remainder fields on an evolved state
    against their derivative budgets, for orders k + l <= 1.

    The affine sound speed is constant, so the commutators with eta^-2
    vanish identically and are reported as exact zeros.
    """
    from .radial import deriv_nonuniform, state_bundle

    if state.lambda_max() >= 1.0:
        raise SuiteConfigError("invalid state: velocity smallness violated")
    b = state_bundle(state)
    st = state
    rr = b.r
    k = st.chart.k
    a2 = 1.0 + k * rr * rr
    dphi = k * rr
    wq = st.cell_volumes()
    wq[-1] = 0.0  # the face-adjacent cell mixes stencil families
    eprime = st.eos.e_prime(b.sigma)
    e2 = st.eos.e_deriv(b.sigma, 2)

    def l2(vals):
        return float(np.sqrt(np.sum(wq * vals ** 2)))

    def material_of(profile_fn):
        """grad_u of a composite cell profile along the discrete flow."""
        from .radial import _pack, _rhs_packed, _unpack, radial_rhs
        y = _pack(st)
        f = radial_rhs(st).packed()
        eps = 1e-6 * (1.0 + float(np.max(np.abs(y)))) \
            / (1.0 + float(np.max(np.abs(f))))
        plus = profile_fn(_unpack(st, y + eps * f))
        minus = profile_fn(_unpack(st, y - eps * f))
        return b.u0 * (plus - minus) / (2.0 * eps)

    # quadratic source F and its first derivatives
    def f_profile(s):
        bb = state_bundle(s)
        aa2 = 1.0 + k * bb.r ** 2
        A00 = bb.et_v0 + (k * bb.r / aa2) * bb.vr
        A0r = bb.dv0 + (k * bb.r / aa2) * bb.v0
        Ar0 = bb.et_vr + k * bb.r * bb.v0
        Arr = bb.dvr
        return 2.0 * (A00 ** 2 + 2.0 * A0r * Ar0 + Arr ** 2
                      + 2.0 * (bb.vr / bb.r) ** 2)

    F0 = f_profile(st)
    F10 = deriv_nonuniform(rr, F0, "one_sided")
    F01 = material_of(f_profile)

    mat1 = b.material_sigma()

    def g_profile(s):
        bb = state_bundle(s)
        m1 = bb.material_sigma()
        ep = s.eos.e_prime(bb.sigma)
        ee2 = s.eos.e_deriv(bb.sigma, 2)
        return -(ep + ee2) * m1 * m1

    G0 = g_profile(st)
    G10 = deriv_nonuniform(rr, G0, "one_sided")
    G01 = material_of(g_profile)

    def lap_profile(s):
        bb = state_bundle(s)
        from .radial import second_deriv_nonuniform
        return second_deriv_nonuniform(bb.r, bb.sigma) + 2.0 * bb.ds / bb.r

    # commutator of the slice Laplacian with the material derivative
    lap_mat1 = deriv_nonuniform(rr, deriv_nonuniform(rr, mat1, "one_sided"),
                                "one_sided") \
        + 2.0 * deriv_nonuniform(rr, mat1, "one_sided") / rr
    g1_01 = lap_mat1 - material_of(lap_profile)

    # foliation-time derivatives through the material split, never by
    # differencing in t; g2 at order (1, 0) compares the slice gradient
    # of grad_tau^2 sigma with grad_tau^2 of the gradient's radial part
    minus_utau = np.sqrt(a2) * b.v0 / np.sqrt(b.sigma)

    def tau1_profile(s):
        bb = state_bundle(s)
        mu = np.sqrt(1.0 + k * bb.r ** 2) * bb.v0 / np.sqrt(bb.sigma)
        return (bb.material_sigma() - bb.ur * bb.ds) / mu

    def tau_ds_profile(s):
        bb = state_bundle(s)
        mu = np.sqrt(1.0 + k * bb.r ** 2) * bb.v0 / np.sqrt(bb.sigma)
        Dt_ds = deriv_nonuniform(bb.r, bb.Dt_s, "one_sided") - bb.dw * bb.ds
        return (bb.u0 * Dt_ds - bb.ur * bb.d2s) / mu

    tau1 = tau1_profile(st)
    tau2 = (material_of(tau1_profile)
            - b.ur * deriv_nonuniform(rr, tau1, "one_sided")) / minus_utau
    tau_ds = tau_ds_profile(st)
    tau2_ds = (material_of(tau_ds_profile)
               - b.ur * deriv_nonuniform(rr, tau_ds, "one_sided")) / minus_utau
    g2_10 = deriv_nonuniform(rr, tau2, "one_sided") - tau2_ds

    # budgets: top-derivative and mixed-norm blocks of V and sigma
    dV_top = np.sqrt(b.dvr ** 2 + 2.0 * (b.vr / rr) ** 2
                     + a2 * b.dv0 ** 2 + b.et_vr ** 2 + b.et_v0 ** 2)
    budget_v = l2(dV_top) + (1.0 + l2(np.sqrt(b.vr ** 2 + a2 * b.v0 ** 2))) \
        * (1.0 + l2(b.sigma))
    budget_s = l2(np.abs(mat1)) + (1.0 + l2(b.sigma)) * (1.0 + l2(np.abs(b.ds)))

    pairs = [
        (l2(np.abs(F0)), budget_v),
        (l2(np.abs(F10)), budget_v + l2(np.abs(F0))),
        (l2(np.abs(F01)), budget_v + l2(np.abs(F0))),
        (l2(np.abs(G0)), budget_s),
        (l2(np.abs(G10)), budget_s + l2(np.abs(G0))),
        (l2(np.abs(G01)), budget_s + l2(np.abs(G0))),
        (l2(np.abs(g1_01)), budget_v + budget_s),
        (l2(np.abs(g2_10)), budget_v + budget_s),
        (0.0, budget_s),   # eta-commutators e_{k,l}: exact zeros
        (0.0, budget_s),
    ]
    return _make_report("remainders", pairs, GOLDEN_BUDGETS["remainders"])


# -- registry ---------------------------------------------------------------

ELLIPTIC_SUITES = ("ellpw", "ellfund2", "ellbdy1", "ellbdy2", "ellint1", "ellint2")
PROJECTION_SUITES = ("ellbdyfn1", "ellbdyfn2", "projest", "projtheta",
                     "elllotbdy1", "elllotbdy2")
INTERP_SUITES = ("bdyinterp", "intinterp", "bdyinterpu", "intinterpu",
                 "bdysob1", "bdysob2", "intsob1", "intsob2", "poin", "poin2")
ALL_SUITES = ("symdecomp",) + ELLIPTIC_SUITES + PROJECTION_SUITES \
    + INTERP_SUITES + ("material_split",)


def verify_suite(name: str, ctx: VerifyContext | None = None,
                 seed: int = DEFAULT_SEED,
                 count: int = DEFAULT_COUNT) -> InequalityReport:
    if ctx is None:
        ctx = VerifyContext.build()
    if name == "symdecomp":
        return verify_symdecomp(ctx, seed, count)
    if name in ELLIPTIC_SUITES:
        return verify_elliptic(ctx, name, seed, count)
    if name in PROJECTION_SUITES:
        return verify_projection(ctx, name, seed, count)
    if name in INTERP_SUITES:
        return verify_interp_sobolev(ctx, name, seed, count)
    if name == "material_split":
        return verify_material_split(ctx, seed=seed, count=count)
    raise SuiteConfigError(f"unknown suite {name!r}")


def verify_all(ctx: VerifyContext | None = None, seed: int = DEFAULT_SEED,
               count: int = DEFAULT_COUNT):
    if ctx is None:
        ctx = VerifyContext.build()
    return {name: verify_suite(name, ctx, seed, count) for name in ALL_SUITES}
