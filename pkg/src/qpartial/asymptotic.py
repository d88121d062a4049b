"""Large-block query optimization.

With ``b -> oo`` the schedule is parameterized as

    j1 = (pi/4) sqrt(N / (t tau)) - eta sqrt(b),   j2 = alpha sqrt(b)

and after rescaling ``Kt = K/t``, ``at = alpha sqrt(tau)``, ``et = eta sqrt(tau)``
the requirement that the last reflection empties the non-target blocks
becomes a single constraint between ``et`` and ``at`` that depends on ``Kt``
only.  The query count is ``(pi/4) sqrt(N/(t tau)) + (at - et) sqrt(b/tau)``,
so the best schedule minimizes ``at - et`` along the constraint.

Two independent routes to the optimum are provided: the closed form and a
bracketing + golden-section minimizer running in extended precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import mpmath

from .config import QuerySchedule, SearchGeometry
from .errors import NoMinimum, OutOfDomain

KTILDE_MIN = 4.0 / 3.0
INV_PHI = (math.sqrt(5) - 1) / 2

CSV_COLUMNS = ("Ktilde", "eta_tilde", "alpha_tilde", "omega", "j1", "j2", "total", "full", "saved")


@dataclass(frozen=True)
class Optimum:
    """Optimal large-block schedule for one ratio ``Ktilde = K/t``.

    Query counts are real-valued and expressed in units of ``scale``, which is
    ``sqrt(b/tau)`` for a concrete geometry and 1 for a bare ratio.
    ``total_real`` is ``j1 + j2``; the last step adds one more oracle call
    (``total_with_final``).
    """

    Ktilde: float
    eta_tilde: float
    alpha_tilde: float
    omega: float
    j1_real: float
    j2_real: float
    total_real: float
    full_search_real: float
    scale: float = 1.0

    @property
    def saved(self) -> float:
        return self.full_search_real - self.total_real

    @property
    def total_with_final(self) -> float:
        return self.total_real + 1.0

    def csv_row(self) -> list:
        return [self.Ktilde, self.eta_tilde, self.alpha_tilde, self.omega,
                self.j1_real, self.j2_real, self.total_real, self.full_search_real, self.saved]

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["saved"] = self.saved
        out["total_with_final"] = self.total_with_final
        return out


def full_search_queries(geometry: SearchGeometry) -> float:
    """Grover iterations to find one of ``t*tau`` targets: (pi/4) sqrt(N/z)."""
    return math.pi / 4 * math.sqrt(geometry.N / geometry.z)


def _check_alpha(alpha_tilde):
    if not 0 < alpha_tilde < math.pi / 2:
        raise OutOfDomain(f"alpha_tilde={alpha_tilde} outside (0, pi/2)")


def constraint_eta_of_alpha(Ktilde: float, alpha_tilde: float) -> float:
    """eta_tilde for which the last reflection annihilates non-target blocks.

    Solves ``tan(2 et / sqrt(Kt)) = 2 sqrt(Kt) sin(2 at) / (Kt - 4 sin^2 at)``
    on the branch where the angle lies in (0, pi), which keeps eta_tilde
    positive and continuous through ``Kt = 4 sin^2 at``.
    """
    _check_alpha(alpha_tilde)
    if Ktilde <= 1:
        raise OutOfDomain(f"Ktilde={Ktilde} must exceed 1")
    rk = math.sqrt(Ktilde)
    angle = math.atan2(2 * rk * math.sin(2 * alpha_tilde), Ktilde - 4 * math.sin(alpha_tilde) ** 2)
    return rk / 2 * angle


def constraint_residual(Ktilde: float, eta_tilde: float, alpha_tilde: float) -> float:
    """Residual of the constraint in cross-multiplied form (no poles)."""
    rk = math.sqrt(Ktilde)
    x = 2 * eta_tilde / rk
    return (math.sin(x) * (Ktilde - 4 * math.sin(alpha_tilde) ** 2)
            - math.cos(x) * 2 * rk * math.sin(2 * alpha_tilde))


def _closed_form_params(Ktilde: float):
    if not Ktilde >= KTILDE_MIN - 1e-12:
        raise OutOfDomain(f"Ktilde={Ktilde} below 4/3; the optimum does not exist")
    rk = math.sqrt(Ktilde)
    # at Kt = 4/3 the numerator is +0 and atan2 returns pi
    eta = rk / 2 * math.atan2(math.sqrt(max(3 * Ktilde - 4, 0.0)), Ktilde - 2)
    cos2a = (Ktilde - 2) / (2 * (Ktilde - 1))
    alpha = 0.5 * math.acos(min(1.0, max(-1.0, cos2a)))
    return eta, alpha


def _assemble(Ktilde, eta, alpha, scale) -> Optimum:
    full = math.pi / 4 * math.sqrt(Ktilde)
    j1 = (full - eta) * scale
    j2 = alpha * scale
    return Optimum(
        Ktilde=Ktilde,
        eta_tilde=eta,
        alpha_tilde=alpha,
        omega=alpha,
        j1_real=j1,
        j2_real=j2,
        total_real=j1 + j2,
        full_search_real=full * scale,
        scale=scale,
    )


def optimum_closed_form(Ktilde: float, scale: float = 1.0) -> Optimum:
    """Closed-form optimum:

        tan(2 et / sqrt(Kt)) = sqrt(3 Kt - 4) / (Kt - 2)
        cos(2 at)            = (Kt - 2) / (2 (Kt - 1))

    ``scale`` multiplies the query counts (use sqrt(b/tau)).
    """
    eta, alpha = _closed_form_params(Ktilde)
    return _assemble(Ktilde, eta, alpha, scale)


def optimum_for_geometry(geometry: SearchGeometry) -> Optimum:
    return optimum_closed_form(geometry.K / geometry.t, math.sqrt(geometry.b / geometry.tau))


def golden_section(f, lo, hi, tol):
    """Shrink [lo, hi] around the minimum of a unimodal ``f``; returns the midpoint."""
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    return (lo + hi) / 2


def _objective_mp(Ktilde):
    K = mpmath.mpf(Ktilde)
    rk = mpmath.sqrt(K)

    def f_eta(alpha):
        a = mpmath.mpf(alpha)
        return rk / 2 * mpmath.atan2(2 * rk * mpmath.sin(2 * a), K - 4 * mpmath.sin(a) ** 2)

    return (lambda a: mpmath.mpf(a) - f_eta(a)), f_eta


def _feasible_upper(f_eta, budget, lo, hi):
    """Largest alpha in (lo, hi] with eta(alpha) <= budget, by bisection."""
    for _ in range(200):
        mid = (lo + hi) / 2
        if f_eta(mid) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def optimum_numeric(Ktilde: float, tol: float = 1e-12, grid: int = 400, scale: float = 1.0) -> Optimum:
    """Minimize ``at - eta(at)`` along the constraint without the closed form.

    The search runs over alpha in (0, pi/2) restricted to schedules with
    ``j1 >= 0``, i.e. ``eta <= (pi/4) sqrt(Kt)``.  A coarse grid brackets the
    minimum, the feasible edge is located by bisection, and golden-section
    search refines inside the bracket.  The objective is evaluated with 40
    significant digits: in doubles its flatness near the minimum limits a
    comparison-only search to about 1e-8.
    """
    if Ktilde <= KTILDE_MIN:
        raise OutOfDomain(f"Ktilde={Ktilde} must exceed 4/3")
    with mpmath.workdps(40):
        f, f_eta = _objective_mp(Ktilde)
        budget = mpmath.pi / 4 * mpmath.sqrt(mpmath.mpf(Ktilde))
        step = mpmath.pi / 2 / grid
        xs = [step * i for i in range(1, grid)]
        edge = None
        for i, x in enumerate(xs):
            if f_eta(x) > budget:
                if i == 0:
                    raise NoMinimum(f"no schedule with j1 >= 0 for Ktilde={Ktilde}")
                edge = _feasible_upper(f_eta, budget, xs[i - 1], x)
                xs = xs[:i] + [edge]
                break
        values = [f(x) for x in xs]
        i = min(range(len(values)), key=values.__getitem__)
        if i == 0 or (i == len(values) - 1 and edge is None):
            raise NoMinimum(f"no interior minimum bracketed for Ktilde={Ktilde}")
        hi = xs[min(i + 1, len(xs) - 1)]
        alpha = float(golden_section(f, xs[i - 1], hi, tol))
    eta = constraint_eta_of_alpha(Ktilde, alpha)
    return _assemble(Ktilde, eta, alpha, scale)


def _round_half_up(x: float) -> int:
    return max(0, math.floor(x + 0.5))


def integer_schedule(geometry: SearchGeometry, ordering: str = "A") -> QuerySchedule:
    """Round the real-valued optimum to the nearest integers (ties upward)."""
    opt = optimum_for_geometry(geometry)
    j1 = _round_half_up(opt.j1_real)
    j2 = _round_half_up(opt.j2_real)
    return QuerySchedule(j1=j1, j2=j2, ordering=ordering,
                         j1_rounding=opt.j1_real - j1, j2_rounding=opt.j2_real - j2)
