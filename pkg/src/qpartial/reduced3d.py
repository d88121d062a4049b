"""Exact simulation inside the three-dimensional invariant subspace.

Starting from the uniform state, every amplitude within each of three item
classes stays equal, so the algorithm lives in the span of

* ``|M>``   normalized sum of all target items,
* ``|NTT>`` normalized sum of the non-target items of target blocks,
* ``|u>``   normalized sum of all items in non-target blocks.

All operators are 3x3 matrices, so the cost does not depend on N.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .config import SearchGeometry
from .errors import FractionalParity, QPartialError
from .statevector import Ordering

PARITY_TOL = 1e-12


@dataclass(frozen=True)
class ReducedState:
    aM: complex
    aNTT: complex
    aU: complex
    geometry: SearchGeometry

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.aM, self.aNTT, self.aU], dtype=complex)

    @classmethod
    def from_vector(cls, vector, geometry) -> "ReducedState":
        aM, aNTT, aU = (complex(v) for v in vector)
        return cls(aM, aNTT, aU, geometry)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


def initial_reduced(geometry: SearchGeometry) -> ReducedState:
    """The uniform state: (sin g sin th2, sin g cos th2, cos g)."""
    sg, cg = math.sin(geometry.gamma), math.cos(geometry.gamma)
    s2, c2 = math.sin(geometry.theta2), math.cos(geometry.theta2)
    return ReducedState(sg * s2, sg * c2, cg, geometry)


def t_matrix(geometry: SearchGeometry) -> np.ndarray:
    """Symmetric involution taking (M, NTT, u) to (M, X, w).

    X is the normalized non-target part of |s1> and w the direction orthogonal
    to both, on which G1 acts as -1.
    """
    sg, cg = math.sin(geometry.gamma), math.cos(geometry.gamma)
    c1, c2 = math.cos(geometry.theta1), math.cos(geometry.theta2)
    return np.array([
        [1.0, 0.0, 0.0],
        [0.0, c2 * sg / c1, cg / c1],
        [0.0, cg / c1, -c2 * sg / c1],
    ])


def _is_integer(j) -> bool:
    return float(j).is_integer()


def m_matrix(geometry: SearchGeometry, j1) -> np.ndarray:
    """Rotation by 2*j1*theta1 in the (M, X) plane and (-1)**j1 on w.

    For non-integer ``j1`` the parity entry is set to 1; callers must make sure
    the state has no weight on w (see :func:`evolve_global`).
    """
    ang = 2 * j1 * geometry.theta1
    c, s = math.cos(ang), math.sin(ang)
    parity = (-1.0) ** int(j1) if _is_integer(j1) else 1.0
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, parity]])


def global_matrix(geometry: SearchGeometry, j1) -> np.ndarray:
    """``G1**j1 = T M_j1 T``."""
    T = t_matrix(geometry)
    return T @ m_matrix(geometry, j1) @ T


def local_matrix(geometry: SearchGeometry, j2) -> np.ndarray:
    """``G2**j2``: rotation by 2*j2*theta2 in the (M, NTT) plane, identity on u."""
    ang = 2 * j2 * geometry.theta2
    c, s = math.cos(ang), math.sin(ang)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def final_matrix(geometry: SearchGeometry, theta: float, phi: float) -> np.ndarray:
    """The two-phase final global operator written out entry by entry.

    p = 1 - e^{2i theta}, f = sin g sin th2 cos g, g = sin g cos g cos th2.
    """
    sg, cg = math.sin(geometry.gamma), math.cos(geometry.gamma)
    s2, c2 = math.sin(geometry.theta2), math.cos(geometry.theta2)
    p = 1 - cmath.exp(2j * theta)
    e = cmath.exp(1j * (phi - theta))
    f = sg * s2 * cg
    gg = sg * cg * c2
    return np.array([
        [-e * (1 - p * sg**2 * s2**2), p * sg**2 * s2 * c2, p * f],
        [e * p * sg**2 * s2 * c2, p * sg**2 * c2**2 - 1, p * gg],
        [e * p * f, p * gg, p * cg**2 - 1],
    ], dtype=complex)


def _reflection_matrix(geometry: SearchGeometry) -> np.ndarray:
    s = initial_reduced(geometry).vector.real
    return 2 * np.outer(s, s) - np.eye(3)


_ORACLE = np.diag([-1.0, 1.0, 1.0])


def step3_matrix(geometry: SearchGeometry, ordering=Ordering.REFLECTION_THEN_ORACLE) -> np.ndarray:
    ordering = Ordering.parse(ordering)
    refl = _reflection_matrix(geometry)
    if ordering is Ordering.REFLECTION_THEN_ORACLE:
        return _ORACLE @ refl
    return refl @ _ORACLE


def _apply(matrix, state: ReducedState) -> ReducedState:
    return ReducedState.from_vector(matrix @ state.vector, state.geometry)


def evolve_global(state: ReducedState, j1) -> ReducedState:
    """Apply ``j1`` global iterations.

    Real ``j1`` is accepted for root finding, but only when the state has no
    component along w, where the parity entry (-1)**j1 would be ambiguous.
    """
    if j1 < 0:
        raise QPartialError("j1 must be non-negative")
    g = state.geometry
    if not _is_integer(j1):
        w = (t_matrix(g) @ state.vector)[2]
        if abs(w) > PARITY_TOL:
            raise FractionalParity(f"state has weight {abs(w):.3g} on the parity direction")
    return _apply(global_matrix(g, j1), state)


def evolve_local(state: ReducedState, j2) -> ReducedState:
    if j2 < 0:
        raise QPartialError("j2 must be non-negative")
    return _apply(local_matrix(state.geometry, j2), state)


def apply_final(state: ReducedState, theta: float, phi: float) -> ReducedState:
    return _apply(final_matrix(state.geometry, theta, phi), state)


def apply_step3(state: ReducedState, ordering=Ordering.REFLECTION_THEN_ORACLE) -> ReducedState:
    return _apply(step3_matrix(state.geometry, ordering), state)


def run_partial_search(geometry, j1, j2, ordering=Ordering.REFLECTION_THEN_ORACLE,
                       *, phases=None) -> ReducedState:
    state = evolve_local(evolve_global(initial_reduced(geometry), j1), j2)
    if phases is not None:
        return apply_final(state, *phases)
    return apply_step3(state, ordering)


def non_target_residual(state: ReducedState) -> float:
    """Per-item amplitude magnitude in non-target blocks."""
    g = state.geometry
    return abs(state.aU) / math.sqrt(g.b * (g.K - g.t))


def target_mass(state: ReducedState) -> float:
    return abs(state.aM) ** 2 + abs(state.aNTT) ** 2


def block_marginals(state: ReducedState, target_blocks=None) -> np.ndarray:
    """Block probabilities; target blocks default to the first ``t`` labels."""
    g = state.geometry
    if target_blocks is None:
        target_blocks = range(g.t)
    probs = np.full(g.K, abs(state.aU) ** 2 / (g.K - g.t))
    probs[list(target_blocks)] = target_mass(state) / g.t
    return probs


def canonical_angle(state: ReducedState) -> float:
    """omega with the target blocks proportional to sin(w)|mu> + cos(w)|ntt>."""
    return math.atan2(abs(state.aM), abs(state.aNTT))


def cancellation_residual(geometry: SearchGeometry, j1, j2, flip_target_sign=False) -> float:
    """LHS - RHS of the condition under which the last reflection empties
    every non-target block.

    Real ``j1``/``j2`` are allowed.  ``flip_target_sign`` selects the variant for
    the oracle-then-reflection ordering (sign of the target amplitude flipped).
    """
    g = geometry
    A = (2 * j1 + 1) * g.theta1
    B = 2 * j2 * g.theta2
    sA, cA, sB, cB = math.sin(A), math.cos(A), math.sin(B), math.cos(B)
    rest = math.sqrt(g.N - g.z)
    sign = -1.0 if flip_target_sign else 1.0
    lhs = g.b * (-g.K / 2 + g.t) / rest * cA
    rhs = (sign * math.sqrt(g.t * g.tau) * cB * sA
           + sign * g.t * math.sqrt(g.tau * (g.b - g.tau)) / rest * sB * cA
           - math.sqrt(g.t * (g.b - g.tau)) * sB * sA
           + g.t * (g.b - g.tau) / rest * cB * cA)
    return lhs - rhs
