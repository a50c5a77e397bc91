"""Deterministic quasi-uniform direction sets on the half-sphere ``{a : |a| = 1, a_1 > 0}``."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

from .errors import InvalidM
from .model import DirectionSet

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def discretize(d: int, m: int) -> DirectionSet:
    """Return ``m`` directions spread over the open half-sphere in ``R^d``.

    * ``d == 1``: the single direction ``(1,)`` whatever ``m`` is.
    * ``d == 2``: midpoint angular grid ``phi_l = -pi/2 + pi (l - 1/2) / m``.
    * ``d == 3``: Fibonacci spiral restricted to the cap ``a_1 > 0``, with
      equal-area height bands ``a_1 = 1 - (l - 1/2) / m``.
    * ``d >= 4``: a Kronecker (generalised golden ratio) lattice pushed
      through the Gaussian quantile function and normalised; the sign of
      each point is flipped so the first coordinate is positive.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if m < 1:
        raise InvalidM(f"need at least one direction, got m={m}")
    if d == 1:
        return DirectionSet(np.ones((1, 1)))
    if d == 2:
        phi = -math.pi / 2 + math.pi * (np.arange(1, m + 1) - 0.5) / m
        return DirectionSet(np.column_stack([np.cos(phi), np.sin(phi)]))
    if d == 3:
        return DirectionSet(_fibonacci_cap(m))
    return DirectionSet(_kronecker_halfsphere(d, m))


def _fibonacci_cap(m: int) -> np.ndarray:
    l = np.arange(m)
    h = 1.0 - (l + 0.5) / m
    r = np.sqrt((1.0 - h) * (1.0 + h))
    phi = GOLDEN_ANGLE * l
    a = np.column_stack([h, r * np.cos(phi), r * np.sin(phi)])
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def _kronecker_halfsphere(d: int, m: int) -> np.ndarray:
    # Roberts' R_d increments: powers of the root of x^(d+1) = x + 1
    g = 2.0
    for _ in range(60):
        g = (1.0 + g) ** (1.0 / (d + 1))
    alpha = (1.0 / g) ** np.arange(1, d + 1)
    pts = (0.5 + np.outer(np.arange(1, m + 1), alpha)) % 1.0
    z = ndtri(pts)
    z[z[:, 0] < 0] *= -1.0
    # a_1 == 0 would only occur for a point exactly at 1/2; nudge it inward
    z[:, 0] = np.maximum(z[:, 0], 1e-9)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def to_csv(dirs: DirectionSet) -> str:
    header = ",".join(f"a{i + 1}" for i in range(dirs.d))
    rows = [",".join(repr(float(x)) for x in row) for row in dirs.directions]
    return "\n".join([header, *rows]) + "\n"
