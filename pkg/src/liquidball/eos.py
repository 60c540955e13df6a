"""Barotropic liquid thermodynamics in enthalpy form.

The built-in family is affine, p = c2 * (eps - eps0) for eps > eps0,
which integrates the first-law relation d(eps)/d(rho) = (eps + p)/rho
in closed form:

    eps + p = A * rho^(1 + c2),      sqrt(sigma) = (eps + p)/rho,

with integration constant A > 0.  The squared enthalpy sigma is the
fundamental variable; p, rho, eps, e = log(rho/sqrt(sigma)) and the
sound speed are all functions of it.  c2 = 1 is the stiff (two-phase)
model where the sound speed equals the speed of light and e is
constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class EosAssumptionError(ValueError):
    """An equation-of-state admissibility bound is violated."""


@dataclass(frozen=True)
class BarotropicEos:
    """Affine barotropic equation of state, all maps in terms of sigma.

    sigma0 is the boundary value where the pressure vanishes; the
    configured floor (default sigma0/2) is the smallest enthalpy the
    thermodynamic maps accept.
    """

    c2: float
    eps0: float
    A: float
    sigma_floor_frac: float = 0.5
    sigma0: float = field(init=False)
    rho0: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.c2 <= 1.0:
            raise EosAssumptionError(
                f"sound-speed bound violated: need 0 < c2 <= 1, got {self.c2}")
        if self.eps0 <= 0.0:
            raise EosAssumptionError(
                f"liquid boundary condition needs eps0 > 0, got {self.eps0}")
        if self.A <= 0.0:
            raise EosAssumptionError(
                f"integration constant must be positive, got {self.A}")
        c2 = self.c2
        sigma0 = self.A ** (2.0 / (1.0 + c2)) * self.eps0 ** (2.0 * c2 / (1.0 + c2))
        object.__setattr__(self, "sigma0", sigma0)
        object.__setattr__(self, "rho0", self.density(sigma0))

    # -- basic maps ----------------------------------------------------

    @property
    def eta(self) -> float:
        """Sound speed sqrt(dp/deps); constant for the affine family."""
        return math.sqrt(self.c2)

    @property
    def stiff(self) -> bool:
        return self.c2 == 1.0

    @property
    def sigma_floor(self) -> float:
        return self.sigma_floor_frac * self.sigma0

    def _check(self, sigma):
        if np.any(np.asarray(sigma) < self.sigma_floor - 1e-14):
            raise EosAssumptionError(
                f"enthalpy below configured floor {self.sigma_floor:g}")

    def density(self, sigma):
        return (np.sqrt(sigma) / self.A) ** (1.0 / self.c2)

    def energy_density(self, sigma):
        return (self.c2 * self.eps0
                + np.sqrt(sigma) * self.density(sigma)) / (1.0 + self.c2)

    def pressure(self, sigma):
        return self.c2 * (np.sqrt(sigma) * self.density(sigma)
                          - self.eps0) / (1.0 + self.c2)

    def e(self, sigma):
        """e(sigma) = log(rho/sqrt(sigma)); constant for the stiff model."""
        sigma = np.asarray(sigma, dtype=float)
        return ((1.0 - self.c2) / (2.0 * self.c2)) * np.log(sigma) \
            - np.log(self.A) / self.c2

    def e_deriv(self, sigma, order: int = 1):
        """d^k e / d sigma^k for k >= 1, in closed form."""
        if order < 1:
            return self.e(sigma)
        sigma = np.asarray(sigma, dtype=float)
        coeff = (1.0 - self.c2) / (2.0 * self.c2)
        return coeff * (-1.0) ** (order - 1) * math.factorial(order - 1) \
            * sigma ** (-order)

    def e_prime(self, sigma):
        return self.e_deriv(sigma, 1)

    # -- conversions ----------------------------------------------------

    def thermo(self, sigma):
        """sigma -> (p, rho, eps), validating the enthalpy floor."""
        self._check(sigma)
        return self.pressure(sigma), self.density(sigma), self.energy_density(sigma)

    def sigma_from_density(self, rho):
        return (self.A * np.asarray(rho, dtype=float) ** self.c2) ** 2

    def sigma_from_energy(self, eps):
        ep = (1.0 + self.c2) * np.asarray(eps, dtype=float) - self.c2 * self.eps0
        return self.sigma_from_density((ep / self.A) ** (1.0 / (1.0 + self.c2)))

    def sigma_from_pressure(self, p):
        eps = np.asarray(p, dtype=float) / self.c2 + self.eps0
        return self.sigma_from_energy(eps)


def build_affine(c2: float, eps0: float, A: float,
                 sigma_floor_frac: float = 0.5) -> BarotropicEos:
    """Construct the affine family p = c2*(eps - eps0); c2 = 1 is stiff."""
    return BarotropicEos(c2=c2, eps0=eps0, A=A, sigma_floor_frac=sigma_floor_frac)


def thermo_roundtrip(eos: BarotropicEos, sigma):
    """sigma -> (p, rho, eps) plus the three inverse maps, for checking
    that each single variable determines the state."""
    p, rho, eps = eos.thermo(sigma)
    back = {
        "from_p": eos.sigma_from_pressure(p),
        "from_rho": eos.sigma_from_density(rho),
        "from_eps": eos.sigma_from_energy(eps),
    }
    return (p, rho, eps), back


@dataclass
class EosReport:
    """Numerical admissibility report over a sigma sweep."""

    L1: float                  # sup_k<=N |d^k p/d eps^k|
    L2: float                  # inf eta^2
    eta_sq_max: float
    sigma_min_seen: float
    sigma_floor: float
    e_deriv_sup: float         # plain sup_k<=N |d^k e/d sigma^k|
    e_coercivity_ratio: float  # sup |d^k e| / |e|, inf when e ~ 0 somewhere
    n_orders: int
    sound_speed_ok: bool
    lower_bound_ok: bool
    derivative_bounds_ok: bool

    @property
    def passed(self) -> bool:
        return self.sound_speed_ok and self.lower_bound_ok and self.derivative_bounds_ok


def validate_assumptions(eos: BarotropicEos, sigma_range=None,
                         n_orders: int = 2) -> EosReport:
    """Evaluate the admissibility bounds over a sigma sweep.

    For the affine family d^2 p/d eps^2 = 0, so L1 is just the sound
    speed squared; the e-derivative bounds are reported both as a plain
    sup and as a ratio against |e| (the ratio degenerates when e has a
    zero in the sweep, which is reported as inf rather than a failure).
    """
    if sigma_range is None:
        sigma_range = (eos.sigma_floor, 10.0 * eos.sigma0)
    sig = np.linspace(sigma_range[0], sigma_range[1], 201)
    L1 = eos.c2  # |dp/deps| = c2, all higher derivatives vanish
    eta2 = eos.c2
    e_sup = max(float(np.max(np.abs(eos.e_deriv(sig, k))))
                for k in range(1, n_orders + 1))
    e_abs = np.abs(eos.e(sig))
    if np.min(e_abs) < 1e-14:
        ratio = math.inf if e_sup > 0.0 else 0.0
    else:
        ratio = max(float(np.max(np.abs(eos.e_deriv(sig, k)) / e_abs))
                    for k in range(1, n_orders + 1))
    return EosReport(
        L1=L1,
        L2=eta2,
        eta_sq_max=eta2,
        sigma_min_seen=float(np.min(sig)),
        sigma_floor=eos.sigma_floor,
        e_deriv_sup=e_sup,
        e_coercivity_ratio=ratio,
        n_orders=n_orders,
        sound_speed_ok=0.0 < eta2 <= 1.0,
        lower_bound_ok=float(np.min(sig)) >= eos.sigma_floor - 1e-14,
        derivative_bounds_ok=math.isfinite(e_sup),
    )
