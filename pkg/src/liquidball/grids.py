"""Quadrature sample sets for the ball domain and its boundary.

Three kinds are provided:

* ``radial_grid``  -- nodes on [0, R] with 4*pi*r^2 trapezoid weights,
  for spherically symmetric integrands.
* ``ball_lattice`` -- cell-centered Cartesian lattice clipped to the
  ball; boundary cells are weighted by the inside fraction of the cell
  (estimated on a fixed midpoint sub-lattice), giving second-order
  quadrature for smooth integrands.
* ``sphere_grid``  -- latitude/longitude samples on the boundary
  sphere, pole-free (latitudes at cell centers), with area weights.

Points are stored as events ``[t=0, x, y, z]`` so chart geometry can be
evaluated on them directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_NEIGHBOR_OFFSET = 3


class GridConfigError(ValueError):
    """Invalid sample-set parameters."""


@dataclass
class SampleSet:
    kind: str                     # "radial" | "ball" | "sphere"
    points: np.ndarray            # (m, 4) events
    weights: np.ndarray           # (m,) volume or area weights
    boundary_mask: np.ndarray     # (m,) True on boundary samples
    h: float                      # grid spacing (radial/lattice) or R*dtheta
    radius: float
    # lattice bookkeeping: neighbor row index per (axis, offset), -1 if absent
    neighbors: np.ndarray | None = None   # (m, 3, 2*MAX_NEIGHBOR_OFFSET+1)
    # sphere bookkeeping
    ntheta: int = 0
    nphi: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.points.shape[0]

    @property
    def r(self) -> np.ndarray:
        return np.linalg.norm(self.points[:, 1:4], axis=1)

    def neighbor(self, axis: int, offset: int) -> np.ndarray:
        if self.neighbors is None:
            raise GridConfigError(f"{self.kind} grid has no lattice neighbors")
        return self.neighbors[:, axis, offset + MAX_NEIGHBOR_OFFSET]


def radial_grid(n: int, radius: float = 1.0) -> SampleSet:
    """n+1 nodes r_a = a*R/n on the positive x-axis, trapezoid weights
    for integrals of radial functions over the ball."""
    if n < 8:
        raise GridConfigError(f"radial grid needs n >= 8, got {n}")
    if radius <= 0:
        raise GridConfigError("radius must be positive")
    h = radius / n
    r = np.linspace(0.0, radius, n + 1)
    pts = np.zeros((n + 1, 4))
    pts[:, 1] = r
    w = 4.0 * np.pi * r * r * h
    w[0] *= 0.5
    w[-1] *= 0.5
    bmask = np.zeros(n + 1, dtype=bool)
    bmask[-1] = True
    return SampleSet("radial", pts, w, bmask, h, radius)


def _cell_fractions(centers: np.ndarray, h: float, radius: float,
                    nsub: int = 4) -> np.ndarray:
    """Inside-ball volume fraction per cell, exact for interior/exterior
    cells and midpoint-subsampled for cells cut by the sphere."""
    r = np.linalg.norm(centers, axis=1)
    half_diag = 0.5 * h * np.sqrt(3.0)
    frac = np.ones(len(centers))
    frac[r - half_diag > radius] = 0.0
    cut = np.abs(r - radius) <= half_diag
    if np.any(cut):
        offs = (np.arange(nsub) + 0.5) / nsub - 0.5
        ox, oy, oz = np.meshgrid(offs, offs, offs, indexing="ij")
        sub = np.stack([ox.ravel(), oy.ravel(), oz.ravel()], axis=1) * h
        pts = centers[cut][:, None, :] + sub[None, :, :]
        inside = np.linalg.norm(pts, axis=2) <= radius
        frac[cut] = inside.mean(axis=1)
    return frac


def ball_lattice(h: float, radius: float = 1.0) -> SampleSet:
    """Cell-centered lattice clipped to the ball |x| <= radius."""
    if h <= 0 or h > radius / 4:
        raise GridConfigError(f"lattice spacing must be in (0, R/4], got {h}")
    nhalf = int(np.ceil(radius / h)) + 1
    idx = np.arange(-nhalf, nhalf)
    ii, jj, kk = np.meshgrid(idx, idx, idx, indexing="ij")
    ijk = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)
    centers = (ijk + 0.5) * h
    frac = _cell_fractions(centers, h, radius)
    keep = frac > 0.0
    ijk = ijk[keep]
    centers = centers[keep]
    frac = frac[keep]
    m = len(ijk)
    pts = np.zeros((m, 4))
    pts[:, 1:4] = centers
    weights = frac * h ** 3
    bmask = frac < 1.0
    row_of = {tuple(t): i for i, t in enumerate(map(tuple, ijk))}
    offsets = np.arange(-MAX_NEIGHBOR_OFFSET, MAX_NEIGHBOR_OFFSET + 1)
    neighbors = np.full((m, 3, len(offsets)), -1, dtype=np.int64)
    for axis in range(3):
        for oi, off in enumerate(offsets):
            shifted = ijk.copy()
            shifted[:, axis] += off
            neighbors[:, axis, oi] = [row_of.get(tuple(t), -1)
                                      for t in map(tuple, shifted)]
    return SampleSet("ball", pts, weights, bmask, h, radius,
                     neighbors=neighbors)


def sphere_grid(ntheta: int, nphi: int | None = None,
                radius: float = 1.0) -> SampleSet:
    """Latitude/longitude samples on the sphere r = radius.

    Latitudes sit at cell centers so the poles are never sampled; the
    area weights sum to 4*pi*R^2 up to O(dtheta^2).
    """
    if ntheta < 4:
        raise GridConfigError("sphere grid needs ntheta >= 4")
    if nphi is None:
        nphi = 2 * ntheta
    dtheta = np.pi / ntheta
    dphi = 2.0 * np.pi / nphi
    theta = (np.arange(ntheta) + 0.5) * dtheta
    phi = np.arange(nphi) * dphi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    st, ct = np.sin(tt).ravel(), np.cos(tt).ravel()
    sp, cp = np.sin(pp).ravel(), np.cos(pp).ravel()
    m = ntheta * nphi
    pts = np.zeros((m, 4))
    pts[:, 1] = radius * st * cp
    pts[:, 2] = radius * st * sp
    pts[:, 3] = radius * ct
    w = radius * radius * st * dtheta * dphi
    bmask = np.ones(m, dtype=bool)
    ss = SampleSet("sphere", pts, w, bmask, radius * dtheta, radius,
                   ntheta=ntheta, nphi=nphi)
    # tangential unit frame at each sample
    e_theta = np.stack([ct * cp, ct * sp, -st], axis=1)
    e_phi = np.stack([-sp, cp, np.zeros(m)], axis=1)
    ss.extra["e_theta"] = e_theta
    ss.extra["e_phi"] = e_phi
    ss.extra["sin_theta"] = st
    return ss
