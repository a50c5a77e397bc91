"""Core value types shared across the package.

Nothing here computes statistics; the classes only hold data and check
invariants on construction. Arrays stored on the frozen dataclasses are
marked read-only so instances can be shared between threads.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyError, InvalidN, NonFiniteError, TooSmallError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


class Family(str, enum.Enum):
    S = "S"  # orthants, integrated square
    T = "T"  # orthants, supremum
    U = "U"  # half-spaces, integrated square
    V = "V"  # half-spaces, supremum

    @property
    def uses_halfspaces(self) -> bool:
        return self in (Family.U, Family.V)

    @property
    def squared(self) -> bool:
        return self in (Family.S, Family.U)


class Combiner(str, enum.Enum):
    MAX = "max"
    MEAN = "mean"


class Method(str, enum.Enum):
    HAT = "hat"
    CHECK = "check"
    SIM = "sim"


@dataclass(frozen=True)
class StatFamily:
    family: Family
    combiner: Combiner

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "combiner", Combiner(self.combiner))

    @property
    def name(self) -> str:
        return f"{self.family.value}_{self.combiner.value}"

    @classmethod
    def parse(cls, text: str) -> "StatFamily":
        """Parse ``"S_max"``, ``"v_mean"``, ``"T+"`` or ``"U∨"``."""
        t = text.strip()
        fam = t[0].upper()
        rest = t[1:].lstrip("_:").lower()
        comb = {"max": "max", "∨": "max", "mean": "mean", "+": "mean"}.get(rest)
        if fam not in "STUV" or comb is None:
            raise ValueError(f"cannot parse statistic {text!r}")
        return cls(Family(fam), Combiner(comb))

    @classmethod
    def all(cls) -> list["StatFamily"]:
        return [cls(f, c) for f in Family for c in Combiner]

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class Sample:
    """An ``n x d`` matrix of finite observations in time order."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(np.asarray(self.data, dtype=float)))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.n


def validate_sample(raw) -> Sample:
    """Check a raw rectangular matrix and wrap it as a :class:`Sample`.

    A 1-D input is read as a single column. Errors report 1-based positions.
    """
    a = np.asarray(raw, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    n, d = a.shape
    if d == 0:
        raise EmptyError()
    if n < 2:
        raise TooSmallError(n)
    bad = ~np.isfinite(a)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise NonFiniteError(int(r) + 1, int(c) + 1)
    return Sample(a)


@dataclass(frozen=True, eq=False)
class StatProfile:
    """Per-candidate statistic values; ``values[k-1]`` belongs to split ``k``."""

    values: np.ndarray
    n: int

    def __post_init__(self):
        v = _frozen(np.asarray(self.values, dtype=float))
        if v.shape != (self.n - 1,):
            raise ValueError(f"profile must have length n-1 = {self.n - 1}, got {v.shape}")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.n - 1


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """``m`` unit vectors with strictly positive first coordinate."""

    directions: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if a.shape[0] < 1:
            raise ValueError("direction set is empty")
        norms = np.linalg.norm(a, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("directions must have unit norm")
        if np.any(a[:, 0] <= 0):
            raise ValueError("directions must have a positive first coordinate")
        object.__setattr__(self, "directions", _frozen(a))

    @property
    def m(self) -> int:
        return self.directions.shape[0]

    @property
    def d(self) -> int:
        return self.directions.shape[1]


@dataclass(frozen=True, eq=False)
class MultiplierMatrix:
    """``N x n`` multipliers drawn from a mean-0, variance-1 law."""

    xi: np.ndarray
    law: str = "normal"

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.ndim != 2 or xi.shape[0] < 1:
            raise InvalidN(f"multiplier matrix must be N x n with N >= 1, got {xi.shape}")
        object.__setattr__(self, "xi", _frozen(xi))

    @property
    def N(self) -> int:
        return self.xi.shape[0]

    @property
    def n(self) -> int:
        return self.xi.shape[1]


@dataclass(frozen=True, eq=False)
class TestReport:
    stat: StatFamily
    observed: float
    profile: StatProfile
    p_value: float
    replicates: np.ndarray
    k_hat: int
    method: Method
    seed: int
    m: int = 0
    d: int = field(default=1)

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "replicates", _frozen(np.asarray(self.replicates, dtype=float)))

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def N(self) -> int:
        return len(self.replicates)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TestReport):
            return NotImplemented
        return (
            self.stat == other.stat
            and self.observed == other.observed
            and self.p_value == other.p_value
            and self.k_hat == other.k_hat
            and self.method == other.method
            and self.seed == other.seed
            and self.m == other.m
            and self.d == other.d
            and self.profile.n == other.profile.n
            and np.array_equal(self.profile.values, other.profile.values)
            and np.array_equal(self.replicates, other.replicates)
        )
