"""Sure-success partial search at finite block size.

The last global iteration is replaced by

    G_final = -[I - (1 - e^{2i theta})|s1><s1|] [I - (1 - e^{i(phi - theta)})|M><M|]

and the two phases are chosen so that the amplitude on ``|u>`` (all items of
non-target blocks) vanishes exactly.  With ``(a, b, c)`` the real state after
``j1`` global and ``j2`` local iterations, that amplitude is

    e^{i(phi - theta)} p x + p y + 2 z,   p = 1 - e^{2i theta}

with ``x = a f``, ``y = b g + c cos^2(gamma)``, ``z = -c/2``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

from . import reduced3d, statevector
from .asymptotic import full_search_queries
from .config import SearchGeometry
from .errors import DegenerateZ, Exhausted, Infeasible, SingularX

FEASIBILITY_TOL = 1e-9
ALGEBRAIC_TOL = 1e-11
ZERO_TOL = 1e-14
FULL_VERIFY_MAX_N = 2**12


@dataclass(frozen=True)
class PhaseIntermediates:
    """All named quantities of the phase condition for one schedule."""

    j1: int
    j2: int
    m: float
    k: float
    l: float
    a: float
    b: float
    c: float
    f: float
    g: float
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class PhaseSolution:
    theta: float
    phi: float
    j1: int
    j2: int
    residual: float
    feasible: bool
    total_queries: int
    target_mass: float = float("nan")

    def as_record(self, geometry: SearchGeometry) -> dict:
        """JSON-ready record: N, K, t, tau, j1, j2, theta, phi, total_queries, residual."""
        out = {k: geometry.as_dict()[k] for k in ("N", "K", "t", "tau")}
        data = asdict(self)
        for key in ("j1", "j2", "theta", "phi", "total_queries", "residual"):
            out[key] = data[key]
        return out


def phase_condition_coefficients(geometry: SearchGeometry, j1: int, j2: int) -> PhaseIntermediates:
    """Closed-form (a, b, c) after the first two steps and the derived x, y, z."""
    th1, th2, gm = geometry.theta1, geometry.theta2, geometry.gamma
    s1, c1 = math.sin(th1), math.cos(th1)
    s2, c2 = math.sin(th2), math.cos(th2)
    sg, cg = math.sin(gm), math.cos(gm)
    cgl, sgl = math.cos(2 * j1 * th1), math.sin(2 * j1 * th1)
    cl, sl = math.cos(2 * j2 * th2), math.sin(2 * j2 * th2)

    m = c2**2 * sg**2 + cg**2
    k = sgl * m + cgl * c1 * s1
    l = cgl * m - sgl * c1 * s1
    norm = 1 / c1**2
    a = norm * (cl * c1 * k + sl * c2 * sg * l)
    b = norm * (-sl * c1 * k + cl * c2 * sg * l)
    c = norm * cg * l

    f = sg * s2 * cg
    g = sg * cg * c2
    x = a * f
    y = b * g + c * cg**2
    z = -c / 2
    return PhaseIntermediates(j1, j2, m, k, l, a, b, c, f, g, x, y, z)


def phase_condition(coeffs: PhaseIntermediates, theta: float, phi: float) -> complex:
    """Left-hand side of ``e^{i(phi-theta)} p x + p y + 2 z = 0``."""
    p = 1 - cmath.exp(2j * theta)
    return cmath.exp(1j * (phi - theta)) * p * coeffs.x + p * coeffs.y + 2 * coeffs.z


def _candidates(coeffs: PhaseIntermediates):
    x, y, z = coeffs.x, coeffs.y, coeffs.z
    denom = x * x - y * y - 2 * y * z
    sin2 = z * z / denom
    if sin2 > 1:
        # x^2 >= (y+z)^2 held only within rounding
        sin2 = 1.0
    root = math.sqrt(sin2)
    for sin_theta in (root, -root):
        theta = math.asin(sin_theta)
        cos_phi = -y / x * math.cos(theta)
        sin_phi = -y / x * sin_theta - z / (x * sin_theta)
        if abs(cos_phi) > 1 + 1e-9 or abs(sin_phi) > 1 + 1e-9:
            continue
        yield theta, math.atan2(sin_phi, cos_phi)


def verify_sure_success(geometry: SearchGeometry, solution: PhaseSolution, *,
                        engine: str = "auto", placement=None):
    """Run the phase-modified pipeline and return ``(residual, target_mass)``.

    The residual is the largest amplitude magnitude on any non-target-block
    item.  The dense simulator is used for N <= 4096 unless ``engine`` says
    otherwise.
    """
    phases = (solution.theta, solution.phi)
    if engine == "auto":
        engine = "full" if geometry.N <= FULL_VERIFY_MAX_N else "reduced"
    if engine == "full":
        state = statevector.run_partial_search(geometry, solution.j1, solution.j2,
                                               placement=placement, phases=phases)
        return statevector.non_target_residual(state), statevector.target_mass(state)
    state = reduced3d.run_partial_search(geometry, solution.j1, solution.j2, phases=phases)
    return reduced3d.non_target_residual(state), reduced3d.target_mass(state)


def solve_phases(coeffs: PhaseIntermediates, geometry: SearchGeometry | None = None) -> PhaseSolution:
    """Phases (theta, phi) that cancel the non-target amplitude.

    Both signs of sin(theta) are tried.  With a geometry the pair with the
    smaller verified residual wins; otherwise the smaller algebraic residual.

    Raises DegenerateZ (z == 0, carrying the p = 0 solution), SingularX
    (x == 0, z != 0) or Infeasible (x^2 < (y + z)^2).
    """
    x, y, z = coeffs.x, coeffs.y, coeffs.z
    total = coeffs.j1 + coeffs.j2 + 1
    if abs(z) <= ZERO_TOL:
        trivial = PhaseSolution(0.0, 0.0, coeffs.j1, coeffs.j2, abs(z), True, total)
        raise DegenerateZ("non-target amplitude already zero; use p = 0", trivial)
    if abs(x) <= ZERO_TOL:
        raise SingularX(f"x = {x:.3g} with z = {z:.3g}")
    if x * x < (y + z) ** 2:
        raise Infeasible(f"x^2 = {x * x:.6g} < (y+z)^2 = {(y + z) ** 2:.6g}")

    best = None
    for theta, phi in _candidates(coeffs):
        if geometry is not None:
            probe = PhaseSolution(theta, phi, coeffs.j1, coeffs.j2, 0.0, True, total)
            residual, mass = verify_sure_success(geometry, probe)
        else:
            residual, mass = abs(phase_condition(coeffs, theta, phi)), float("nan")
        if best is None or residual < best.residual:
            best = PhaseSolution(theta, phi, coeffs.j1, coeffs.j2, residual, True, total, mass)
    if best is None:
        raise Infeasible("phase equations have no solution with |cos phi|, |sin phi| <= 1")
    return best


def iter_splits(max_total: int):
    """(j1, j2) pairs by increasing j1 + j2, larger j1 first within a total."""
    for total in range(max_total + 1):
        for j1 in range(total, -1, -1):
            yield j1, total - j1


def scan_schedules(geometry: SearchGeometry, max_total: int | None = None):
    """Yield ``(j1, j2, outcome)`` for every schedule in search order.

    ``outcome`` is a PhaseSolution or the raised toolkit error.
    """
    if max_total is None:
        max_total = math.ceil(2 * full_search_queries(geometry))
    for j1, j2 in iter_splits(max_total):
        coeffs = phase_condition_coefficients(geometry, j1, j2)
        try:
            outcome = solve_phases(coeffs, geometry)
        except DegenerateZ as exc:
            residual, mass = verify_sure_success(geometry, exc.solution)
            outcome = PhaseSolution(**{**asdict(exc.solution), "residual": residual,
                                       "target_mass": mass})
        except (Infeasible, SingularX) as exc:
            outcome = exc
        yield j1, j2, outcome


def minimal_schedule(geometry: SearchGeometry, trace: list | None = None) -> PhaseSolution:
    """Cheapest verified sure-success schedule.

    Totals ``j1 + j2`` are tried upward from 0 and, within one total, ``j1``
    from large to small.  The final operator counts as one more query.
    ``trace``, if given, collects ``(j1, j2, outcome)`` for every attempt.
    """
    bound = math.ceil(2 * full_search_queries(geometry))
    for j1, j2, outcome in scan_schedules(geometry, bound):
        if trace is not None:
            trace.append((j1, j2, outcome))
        if isinstance(outcome, PhaseSolution) and outcome.residual <= FEASIBILITY_TOL:
            return outcome
    raise Exhausted(f"no sure-success schedule with j1 + j2 <= {bound}")
