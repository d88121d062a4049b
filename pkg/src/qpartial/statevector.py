"""Dense simulator over all N amplitudes.

This is the ground truth every faster path is checked against.  Operators act
as the abstract unitaries of the partial-search algorithm (no gate
decomposition) and return new states; nothing is mutated in place.

Query accounting: every application of the oracle (a target phase flip, on
its own or inside a global/local iteration or the final operator) adds one to
``FullState.queries``.  The local step flips targets in all blocks at once
and counts one query per iteration.
"""
from __future__ import annotations

import cmath
import enum
import json
import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .config import SearchGeometry, max_full_n
from .errors import QPartialError, TooLarge


class Ordering(str, enum.Enum):
    """Operator order of the last step.

    REFLECTION_THEN_ORACLE is ``-I_t I_s1`` (reflect about the mean, then flip
    targets; leaves target blocks in canonical form).  ORACLE_THEN_REFLECTION
    is ``-I_s1 I_t``, i.e. one more plain global iteration.
    """

    REFLECTION_THEN_ORACLE = "A"
    ORACLE_THEN_REFLECTION = "B"

    @classmethod
    def parse(cls, value) -> "Ordering":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper()
        aliases = {
            "A": cls.REFLECTION_THEN_ORACLE,
            "REFLECTION_THEN_ORACLE": cls.REFLECTION_THEN_ORACLE,
            "B": cls.ORACLE_THEN_REFLECTION,
            "ORACLE_THEN_REFLECTION": cls.ORACLE_THEN_REFLECTION,
        }
        try:
            return aliases[text]
        except KeyError:
            raise QPartialError(f"unknown Step-3 ordering {value!r}") from None


@dataclass(frozen=True)
class TargetPlacement:
    """Which items are targets, as (block index, item-in-block index) pairs."""

    geometry: SearchGeometry
    targets: frozenset

    def __post_init__(self):
        g = self.geometry
        if len(self.targets) != g.t * g.tau:
            raise QPartialError(f"expected {g.t * g.tau} targets, got {len(self.targets)}")
        per_block = {}
        for blk, item in self.targets:
            if not (0 <= blk < g.K and 0 <= item < g.b):
                raise QPartialError(f"target {(blk, item)} outside the geometry")
            per_block[blk] = per_block.get(blk, 0) + 1
        if len(per_block) != g.t or any(n != g.tau for n in per_block.values()):
            raise QPartialError(f"targets must occupy exactly {g.t} blocks with {g.tau} items each")

    @cached_property
    def mask(self) -> np.ndarray:
        """Boolean vector of length N, True on target items."""
        g = self.geometry
        m = np.zeros(g.N, dtype=bool)
        for blk, item in self.targets:
            m[blk * g.b + item] = True
        m.setflags(write=False)
        return m

    @cached_property
    def target_blocks(self) -> tuple:
        return tuple(sorted({blk for blk, _ in self.targets}))

    @cached_property
    def block_is_target(self) -> np.ndarray:
        flags = np.zeros(self.geometry.K, dtype=bool)
        flags[list(self.target_blocks)] = True
        flags.setflags(write=False)
        return flags


def canonical_placement(geometry: SearchGeometry) -> TargetPlacement:
    """Targets are the first ``tau`` items of the first ``t`` blocks."""
    targets = frozenset((blk, item) for blk in range(geometry.t) for item in range(geometry.tau))
    return TargetPlacement(geometry, targets)


def random_placement(geometry: SearchGeometry, seed: int) -> TargetPlacement:
    rng = np.random.default_rng(seed)
    blocks = rng.choice(geometry.K, size=geometry.t, replace=False)
    targets = set()
    for blk in blocks:
        for item in rng.choice(geometry.b, size=geometry.tau, replace=False):
            targets.add((int(blk), int(item)))
    return TargetPlacement(geometry, frozenset(targets))


@dataclass(frozen=True)
class FullState:
    amplitudes: np.ndarray
    placement: TargetPlacement
    queries: int = 0

    @property
    def geometry(self) -> SearchGeometry:
        return self.placement.geometry

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_json(self) -> str:
        """Debug dump: list of [re, im] pairs.  Not a stable format."""
        return json.dumps([[float(a.real), float(a.imag)] for a in self.amplitudes])


def _new(state: FullState, amplitudes, extra_queries=0) -> FullState:
    amplitudes.setflags(write=False)
    return replace(state, amplitudes=amplitudes, queries=state.queries + extra_queries)


def uniform_state(geometry, placement=None, *, force=False) -> FullState:
    """The equal superposition of all N items."""
    cap = max_full_n()
    if geometry.N > cap and not force:
        raise TooLarge(f"N={geometry.N} exceeds the dense-simulator cap {cap}")
    if placement is None:
        placement = canonical_placement(geometry)
    elif placement.geometry != geometry:
        raise QPartialError("placement belongs to a different geometry")
    amps = np.full(geometry.N, 1.0 / math.sqrt(geometry.N), dtype=complex)
    amps.setflags(write=False)
    return FullState(amps, placement, 0)


def apply_target_flip(state: FullState, phase: complex = -1.0) -> FullState:
    """Multiply target amplitudes by ``phase`` (-1 is the plain oracle I_t)."""
    amps = state.amplitudes.copy()
    amps[state.placement.mask] *= phase
    return _new(state, amps, 1)


def apply_global_reflection(state: FullState, p: complex = 2.0) -> FullState:
    """``-(I - p|s1><s1|)``; with p = 2 this is a_x -> 2*mean - a_x."""
    amps = state.amplitudes
    return _new(state, p * amps.mean() - amps)


def apply_global_iteration(state: FullState) -> FullState:
    """One Grover iteration ``G1 = -I_s1 I_t`` on the whole database."""
    return apply_global_reflection(apply_target_flip(state))


def apply_global_iterations(state: FullState, j1: int) -> FullState:
    for _ in range(j1):
        state = apply_global_iteration(state)
    return state


def apply_local_iterations(state: FullState, j2: int) -> FullState:
    """``j2`` in-block Grover iterations, run in every block simultaneously."""
    if j2 < 0:
        raise QPartialError("j2 must be non-negative")
    g = state.geometry
    amps = state.amplitudes.reshape(g.K, g.b).copy()
    mask = state.placement.mask.reshape(g.K, g.b)
    for _ in range(j2):
        amps[mask] *= -1
        amps = 2 * amps.mean(axis=1, keepdims=True) - amps
    return _new(state, amps.reshape(g.N), j2)


def apply_step3(state: FullState, ordering=Ordering.REFLECTION_THEN_ORACLE) -> FullState:
    """Final reflection plus the extra oracle call, in the requested order."""
    ordering = Ordering.parse(ordering)
    if ordering is Ordering.REFLECTION_THEN_ORACLE:
        return apply_target_flip(apply_global_reflection(state))
    return apply_global_reflection(apply_target_flip(state))


def apply_final(state: FullState, theta: float, phi: float) -> FullState:
    """Phase-generalized last operator.

    ``-[I - (1 - e^{2i theta})|s1><s1|] [I - (1 - e^{i(phi - theta)}) P_t]``
    where ``P_t`` projects on the target items.  theta = pi/2, phi = 3pi/2
    reproduces ``-I_s1 I_t``.
    """
    p = 1 - cmath.exp(2j * theta)
    oracle_phase = cmath.exp(1j * (phi - theta))
    return apply_global_reflection(apply_target_flip(state, oracle_phase), p)


def run_partial_search(geometry, j1, j2, ordering=Ordering.REFLECTION_THEN_ORACLE,
                       placement=None, *, phases=None, force=False) -> FullState:
    """Steps 1-3 from the uniform state.

    With ``phases=(theta, phi)`` the last step is :func:`apply_final`
    instead of the plain reflection/oracle pair.
    """
    state = uniform_state(geometry, placement, force=force)
    state = apply_global_iterations(state, j1)
    state = apply_local_iterations(state, j2)
    if phases is not None:
        return apply_final(state, *phases)
    return apply_step3(state, ordering)


def block_marginals(state: FullState) -> np.ndarray:
    """Probability of measuring each block label."""
    g = state.geometry
    return (np.abs(state.amplitudes.reshape(g.K, g.b)) ** 2).sum(axis=1)


def sample_block(state: FullState, seed: int) -> int:
    """Draw one block label from :func:`block_marginals` with a seeded generator."""
    probs = block_marginals(state)
    rng = np.random.default_rng(seed)
    return int(rng.choice(len(probs), p=probs / probs.sum()))


def target_mass(state: FullState) -> float:
    return float(block_marginals(state)[state.placement.block_is_target].sum())


def non_target_residual(state: FullState) -> float:
    """Largest amplitude magnitude on any item of a non-target block."""
    g = state.geometry
    blocks = state.amplitudes.reshape(g.K, g.b)[~state.placement.block_is_target]
    return float(np.abs(blocks).max())


def class_masks(placement: TargetPlacement):
    """Masks of (target items, non-targets in target blocks, non-target-block items)."""
    g = placement.geometry
    in_target_block = np.repeat(placement.block_is_target, g.b)
    targets = placement.mask
    return targets, in_target_block & ~targets, ~in_target_block


def class_amplitudes(state: FullState):
    """Per-item amplitude of each class and the largest deviation inside a class.

    Returns ``((a_target, a_ntt_item, a_u_item), spread)``.
    """
    values, spread = [], 0.0
    for mask in class_masks(state.placement):
        cls = state.amplitudes[mask]
        values.append(complex(cls[0]))
        spread = max(spread, float(np.abs(cls - cls[0]).max()))
    return tuple(values), spread


def project_reduced(state: FullState) -> np.ndarray:
    """Coefficients on the normalized class vectors (|M>, |NTT>, |u>)."""
    out = []
    for mask in class_masks(state.placement):
        out.append(state.amplitudes[mask].sum() / math.sqrt(mask.sum()))
    return np.array(out, dtype=complex)


def embed_reduced(vector, placement: TargetPlacement) -> FullState:
    """Spread 3-basis coefficients uniformly over the items of each class."""
    amps = np.zeros(placement.geometry.N, dtype=complex)
    for coeff, mask in zip(vector, class_masks(placement)):
        amps[mask] = coeff / math.sqrt(mask.sum())
    amps.setflags(write=False)
    return FullState(amps, placement, 0)


def global_eigenvector(placement: TargetPlacement, sign: int = 1) -> FullState:
    """Eigenvector of G1 with eigenvalue exp(+-2i theta1)."""
    g = placement.geometry
    mask = placement.mask
    amps = np.where(mask, 1 / math.sqrt(2 * g.z), sign * 1j / math.sqrt(2 * (g.N - g.z)))
    amps = amps.astype(complex)
    amps.setflags(write=False)
    return FullState(amps, placement, 0)


def local_eigenvector(placement: TargetPlacement, block: int, sign: int = 1) -> FullState:
    """Eigenvector of the in-block iteration supported on one target block."""
    g = placement.geometry
    if not placement.block_is_target[block]:
        raise QPartialError(f"block {block} is not a target block")
    amps = np.zeros(g.N, dtype=complex)
    sl = slice(block * g.b, (block + 1) * g.b)
    mask = placement.mask[sl]
    amps[sl] = np.where(mask, 1 / math.sqrt(2 * g.tau), sign * 1j / math.sqrt(2 * (g.b - g.tau)))
    amps.setflags(write=False)
    return FullState(amps, placement, 0)
