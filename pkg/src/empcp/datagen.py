"""Seeded generation of the simulation scenarios.

Observations are built with Sklar's representation: a copula sample in
``(0, 1)^d`` pushed through the inverse marginal c.d.f.s. Archimedean
copulas are sampled with the Marshall-Olkin frailty construction.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import OutOfRange, SpecParseError
from .model import Sample, validate_sample

_U_LO = np.finfo(float).tiny
_U_HI = 1.0 - 2.0 ** -53


@dataclass(frozen=True)
class MarginSpec:
    kind: str  # "normal" or "exponential"
    mean: float = 0.0
    sd: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in ("normal", "exponential"):
            raise ValueError(f"unknown margin {self.kind!r}")
        if self.kind == "normal" and not self.sd > 0:
            raise OutOfRange(f"normal sd must be > 0, got {self.sd}")
        if self.kind == "exponential" and not self.rate > 0:
            raise OutOfRange(f"exponential rate must be > 0, got {self.rate}")

    @classmethod
    def normal(cls, mean: float = 0.0, sd: float = 1.0) -> "MarginSpec":
        return cls("normal", mean=float(mean), sd=float(sd))

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "MarginSpec":
        return cls("exponential", rate=float(rate))

    def ppf(self, u: np.ndarray) -> np.ndarray:
        if self.kind == "normal":
            return self.mean + self.sd * ndtri(u)
        return -np.log1p(-u) / self.rate

    def cdf(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "normal":
            return ndtr((np.asarray(x) - self.mean) / self.sd)
        return -np.expm1(-self.rate * np.maximum(np.asarray(x), 0.0))

    def __str__(self) -> str:
        if self.kind == "normal":
            return f"normal({self.mean:g},{self.sd:g})"
        return f"exponential({self.rate:g})"


def tau_to_theta(family: str, tau: float) -> float:
    """Copula parameter with the given Kendall's tau.

    Clayton: ``2 tau / (1 - tau)`` for ``tau`` in (0, 1).
    Gumbel-Hougaard: ``1 / (1 - tau)`` for ``tau`` in [0, 1).
    """
    if family == "clayton":
        if not 0.0 < tau < 1.0:
            raise OutOfRange(f"Clayton needs tau in (0, 1), got {tau}")
        return 2.0 * tau / (1.0 - tau)
    if family == "gumbel":
        if not 0.0 <= tau < 1.0:
            raise OutOfRange(f"Gumbel-Hougaard needs tau in [0, 1), got {tau}")
        return 1.0 / (1.0 - tau)
    if family == "independence":
        if tau != 0:
            raise OutOfRange("the independence copula has tau = 0")
        return 0.0
    raise ValueError(f"unknown copula family {family!r}")


@dataclass(frozen=True)
class CopulaSpec:
    family: str = "independence"  # "independence", "clayton" or "gumbel"
    tau: float = 0.0

    def __post_init__(self):
        fam = {"gh": "gumbel", "gumbel-hougaard": "gumbel", "cl": "clayton",
               "indep": "independence"}.get(self.family.lower(), self.family.lower())
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "tau", float(self.tau))
        # a Clayton/Gumbel copula with tau = 0 is the independence copula
        if fam in ("clayton", "gumbel") and self.tau == 0.0:
            object.__setattr__(self, "family", "independence")
        self.theta  # validates tau

    @property
    def theta(self) -> float:
        return tau_to_theta(self.family, self.tau)

    def __str__(self) -> str:
        if self.family == "independence":
            return "independence"
        return f"{self.family}({self.tau:g})"


def positive_stable(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Draws with Laplace transform ``exp(-s**alpha)``, ``0 < alpha <= 1``.

    Chambers-Mallows-Stuck construction for the totally skewed case, in
    Kanter's form: with ``U ~ Uniform(0, pi)`` and ``W ~ Exp(1)``,
    ``(A(U) / W) ** ((1 - alpha) / alpha)`` where
    ``A(u) = (sin(alpha u)^alpha sin((1 - alpha) u)^(1 - alpha) / sin u)^(1 / (1 - alpha))``.
    """
    if alpha == 1.0:
        return np.ones(size)
    if not 0.0 < alpha < 1.0:
        raise OutOfRange(f"stable index must be in (0, 1], got {alpha}")
    u = rng.uniform(0.0, math.pi, size)
    w = rng.standard_exponential(size)
    a = (np.sin(alpha * u) ** alpha * np.sin((1.0 - alpha) * u) ** (1.0 - alpha)
         / np.sin(u)) ** (1.0 / (1.0 - alpha))
    return (a / w) ** ((1.0 - alpha) / alpha)


def sample_copula(spec: CopulaSpec, d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count x d`` draws from the copula, strictly inside ``(0, 1)``."""
    if count == 0:
        return np.empty((0, d))
    if spec.family == "independence" or d == 1:
        u = rng.random((count, d))
    else:
        theta = spec.theta
        e = rng.standard_exponential((count, d))
        if spec.family == "clayton":
            v = rng.gamma(1.0 / theta, 1.0, size=count)
            u = (1.0 + e / v[:, None]) ** (-1.0 / theta)
        else:
            v = positive_stable(1.0 / theta, count, rng)
            u = np.exp(-((e / v[:, None]) ** (1.0 / theta)))
    return np.clip(u, _U_LO, _U_HI)


@dataclass(frozen=True)
class Block:
    """Law of one segment: a copula plus one margin per coordinate."""

    copula: CopulaSpec = field(default_factory=CopulaSpec)
    margins: tuple[MarginSpec, ...] = (MarginSpec.normal(),)

    @property
    def d(self) -> int:
        return len(self.margins)

    def draw(self, count: int, rng: np.random.Generator) -> np.ndarray:
        u = sample_copula(self.copula, self.d, count, rng)
        return np.column_stack([mg.ppf(u[:, j]) for j, mg in enumerate(self.margins)]) \
            if count else np.empty((0, self.d))


@dataclass(frozen=True)
class ScenarioSpec:
    """Single change point at ``k* = floor(n t)``: rows ``1..k*`` follow
    ``pre`` and the rest follow ``post``.

    ``t = 0`` draws everything from ``post`` and ``t = 1`` from ``pre``.
    """

    n: int
    t: float = 0.0
    pre: Block = field(default_factory=Block)
    post: Block = field(default_factory=Block)
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise OutOfRange(f"n must be >= 2, got {self.n}")
        if not 0.0 <= self.t <= 1.0:
            raise OutOfRange(f"t must lie in [0, 1], got {self.t}")
        if self.pre.d != self.post.d:
            raise ValueError("pre and post laws must have the same dimension")

    @property
    def d(self) -> int:
        return self.pre.d

    @property
    def k_star(self) -> int:
        # the epsilon absorbs representation error, e.g. 100 * 0.29
        return int(math.floor(self.n * self.t + 1e-9))


def generate(spec: ScenarioSpec) -> Sample:
    rng = np.random.default_rng(spec.seed)
    k = spec.k_star
    head = spec.pre.draw(k, rng)
    tail = spec.post.draw(spec.n - k, rng)
    return validate_sample(np.vstack([head, tail]))


# --- scenario files ---------------------------------------------------------

_CALL = re.compile(r"^\s*([A-Za-z_-]+)\s*(?:\(([^()]*)\))?\s*$")


def _parse_call(key: str, text: str, line: int | None):
    m = _CALL.match(text)
    if not m:
        raise SpecParseError(key, f"cannot parse {text!r}", line)
    name = m.group(1).lower()
    args = {}
    pos = []
    if m.group(2) and m.group(2).strip():
        for part in m.group(2).split(","):
            part = part.strip()
            try:
                if "=" in part:
                    k, v = part.split("=", 1)
                    args[k.strip().lower()] = float(v)
                else:
                    pos.append(float(part))
            except ValueError:
                raise SpecParseError(key, f"non-numeric argument {part!r}", line) from None
    return name, pos, args


def parse_margin(key: str, text: str, line: int | None = None) -> MarginSpec:
    name, pos, kw = _parse_call(key, text, line)
    try:
        if name in ("normal", "n", "gaussian"):
            mean = kw.get("mean", pos[0] if len(pos) > 0 else 0.0)
            sd = kw.get("sd", pos[1] if len(pos) > 1 else 1.0)
            return MarginSpec.normal(mean, sd)
        if name in ("exponential", "exp", "e"):
            return MarginSpec.exponential(kw.get("rate", pos[0] if pos else 1.0))
    except (OutOfRange, ValueError) as exc:
        raise SpecParseError(key, str(exc), line) from None
    raise SpecParseError(key, f"unknown margin {name!r}", line)


def parse_copula(key: str, text: str, line: int | None = None) -> CopulaSpec:
    name, pos, kw = _parse_call(key, text, line)
    tau = kw.get("tau", pos[0] if pos else 0.0)
    try:
        return CopulaSpec(name, tau)
    except (OutOfRange, ValueError) as exc:
        raise SpecParseError(key, str(exc), line) from None


def _split_list(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur).strip())
    return [p for p in parts if p]


SCENARIO_KEYS = ("n", "t", "d", "seed", "copula", "margins",
                 "pre.copula", "pre.margins", "post.copula", "post.margins")


def read_key_values(text: str) -> dict[str, tuple[str, int]]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys are case-sensitive."""
    out: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecParseError(line.split()[0], "expected 'key = value'", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise SpecParseError("<empty>", "missing key", lineno)
        if key in out:
            raise SpecParseError(key, "duplicate key", lineno)
        out[key] = (value, lineno)
    return out


def scenario_from_items(items: Mapping[str, tuple[str, int]]) -> ScenarioSpec:
    """Build a :class:`ScenarioSpec` from parsed ``key = value`` items.

    Recognised keys: ``n`` (required), ``t``, ``seed``, ``d``, and
    ``copula``/``margins`` with optional ``pre.``/``post.`` prefixes. Margins
    are comma-separated, one per coordinate; a single margin is repeated
    ``d`` times.
    """
    for key, (_, line) in items.items():
        if key not in SCENARIO_KEYS:
            raise SpecParseError(key, "unknown key", line)
    if "n" not in items:
        raise SpecParseError("n", "required key missing")

    def num(key, conv, default):
        if key not in items:
            return default
        value, line = items[key]
        try:
            return conv(value)
        except ValueError:
            raise SpecParseError(key, f"invalid value {value!r}", line) from None

    n = num("n", int, None)
    t = num("t", float, 0.0)
    seed = num("seed", int, 0)
    d = num("d", int, None)
    if seed < 0:
        raise SpecParseError("seed", "must be a non-negative integer", items["seed"][1])
    if n < 2:
        raise SpecParseError("n", f"must be >= 2, got {n}", items["n"][1])
    if not 0.0 <= t <= 1.0:
        raise SpecParseError("t", f"must lie in [0, 1], got {t}", items["t"][1])

    def margins(prefix):
        key = f"{prefix}.margins" if f"{prefix}.margins" in items else "margins"
        if key not in items:
            return None, key
        value, line = items[key]
        return tuple(parse_margin(key, p, line) for p in _split_list(value)), key

    def copula(prefix):
        key = f"{prefix}.copula" if f"{prefix}.copula" in items else "copula"
        if key not in items:
            return CopulaSpec()
        value, line = items[key]
        return parse_copula(key, value, line)

    blocks = {}
    for prefix in ("pre", "post"):
        mg, key = margins(prefix)
        if mg is None:
            mg = (MarginSpec.normal(),)
        if d is not None and len(mg) == 1 and d > 1:
            mg = mg * d
        if d is not None and len(mg) != d:
            raise SpecParseError(key, f"{len(mg)} margins given for d={d}")
        blocks[prefix] = Block(copula(prefix), mg)
    if blocks["pre"].d != blocks["post"].d:
        raise SpecParseError("margins", "pre and post margins differ in dimension")
    return ScenarioSpec(n=n, t=t, pre=blocks["pre"], post=blocks["post"], seed=seed)


def with_seed(spec: ScenarioSpec, seed: int) -> ScenarioSpec:
    return replace(spec, seed=int(seed))
