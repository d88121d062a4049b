"""Database geometry: item/block/target counts and the derived angles.

A database of ``N`` items is split into ``K`` blocks of ``b = N / K`` items.
``t`` of the blocks are target blocks and each of them holds ``tau`` target
items.  Three angles summarise the geometry::

    sin^2(theta1) = t*tau / N      (global search angle)
    sin^2(theta2) = tau / b        (in-block search angle)
    sin^2(gamma)  = t / K          (fraction of target blocks)
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import Degenerate, NonDivisible, QPartialError

DEFAULT_ATOL = 1e-12


@dataclass(frozen=True)
class Angles:
    theta1: float
    theta2: float
    gamma: float


@dataclass(frozen=True)
class SearchGeometry:
    """Immutable database shape.  Build through :func:`validate_geometry`."""

    N: int
    K: int
    b: int
    t: int
    tau: int
    angles: Angles = field(compare=False, repr=False)

    @property
    def z(self) -> int:
        """Total number of target items."""
        return self.t * self.tau

    @property
    def Ktilde(self) -> float:
        return self.K / self.t

    @property
    def theta1(self) -> float:
        return self.angles.theta1

    @property
    def theta2(self) -> float:
        return self.angles.theta2

    @property
    def gamma(self) -> float:
        return self.angles.gamma

    def as_dict(self) -> dict:
        return {"N": self.N, "K": self.K, "b": self.b, "t": self.t, "tau": self.tau}


def _check_int(name, value):
    if isinstance(value, bool) or not isinstance(value, int):
        try:
            as_int = int(value)
        except (TypeError, ValueError):
            raise QPartialError(f"{name} must be a positive integer, got {value!r}") from None
        if as_int != value:
            raise QPartialError(f"{name} must be a positive integer, got {value!r}")
        value = as_int
    if value < 1:
        raise QPartialError(f"{name} must be a positive integer, got {value}")
    return value


def validate_geometry(N, K, t, tau) -> SearchGeometry:
    """Check the standing assumptions and precompute the angles.

    Raises NonDivisible if ``K`` does not divide ``N`` and Degenerate if there
    is no non-target block (t >= K), no non-target item inside a target block
    (tau >= b), or t*tau >= N.
    """
    N, K, t, tau = (_check_int(n, v) for n, v in (("N", N), ("K", K), ("t", t), ("tau", tau)))
    if N % K:
        raise NonDivisible(f"K={K} does not divide N={N}")
    b = N // K
    if t >= K:
        raise Degenerate(f"t={t} must be smaller than K={K}")
    if tau >= b:
        raise Degenerate(f"tau={tau} must be smaller than the block size b={b}")
    if t * tau >= N:
        raise Degenerate(f"t*tau={t * tau} must be smaller than N={N}")
    angles = Angles(
        theta1=math.asin(math.sqrt(t * tau / N)),
        theta2=math.asin(math.sqrt(tau / b)),
        gamma=math.asin(math.sqrt(t / K)),
    )
    return SearchGeometry(N=N, K=K, b=b, t=t, tau=tau, angles=angles)


def read_config_file(path) -> dict:
    """Parse a plain ``key = value`` file.  ``#`` starts a comment.

    Values are returned as stripped strings; callers convert them.
    """
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise QPartialError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def geometry_from_mapping(values) -> SearchGeometry:
    """Build a geometry from a mapping with keys N (or b), K, t, tau."""
    try:
        K = int(values["K"])
        t = int(values["t"])
        tau = int(values["tau"])
        if "N" in values and values["N"] not in (None, ""):
            N = int(values["N"])
        else:
            N = int(values["b"]) * K
    except KeyError as exc:
        raise QPartialError(f"missing geometry key {exc.args[0]!r}") from None
    return validate_geometry(N, K, t, tau)


def max_full_n() -> int:
    """Cap on N for the dense simulator (env QPARTIAL_MAX_FULL_N, default 2**20)."""
    raw = os.environ.get("QPARTIAL_MAX_FULL_N")
    return int(raw) if raw else 2**20


@dataclass(frozen=True)
class QuerySchedule:
    """Integer iteration counts plus how the last step is carried out.

    ``theta``/``phi`` are set only for the phase-modified last operator.  The
    rounding fields keep ``real - integer`` when the counts come from rounding
    the large-block optimum.
    """

    j1: int
    j2: int
    ordering: str = "A"
    theta: float | None = None
    phi: float | None = None
    j1_rounding: float = 0.0
    j2_rounding: float = 0.0

    @property
    def total_queries(self) -> int:
        """j1 + j2 plus one oracle call in the last step."""
        return self.j1 + self.j2 + 1
