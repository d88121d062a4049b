"""Exit criteria of the toolkit, one test (or parameter set) per criterion.

Each test records PASS/FAIL in the terminal summary printed by conftest.
"""
import io
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from qpartial import asymptotic as asy
from qpartial import cli
from qpartial import reduced3d as rd
from qpartial import statevector as sv
from qpartial import surephase as sp
from qpartial.config import validate_geometry
from qpartial.errors import Infeasible

from conftest import record_criterion, valid_geometries

SWEEPS = Path(__file__).resolve().parent.parent / "sweeps"
SURE_GEOMETRIES = [(64, 4, 1, 1), (64, 4, 2, 4), (256, 16, 1, 1), (256, 16, 2, 2), (1024, 16, 2, 4)]


def check(number, ok, detail):
    record_criterion(number, bool(ok), detail)
    assert ok, detail


def test_c1_closed_form_k4():
    start = time.perf_counter()
    for _ in range(100):
        opt = asy.optimum_closed_form(4)
    elapsed = (time.perf_counter() - start) / 100
    alpha_ref = math.acos(1 / 3) / 2
    eta_ref = math.atan(math.sqrt(2))
    residual = abs(asy.constraint_residual(4, opt.eta_tilde, opt.alpha_tilde))
    ok = (abs(opt.alpha_tilde - alpha_ref) <= 1e-15 and abs(opt.eta_tilde - eta_ref) <= 1e-15
          and abs(opt.alpha_tilde - 0.615480) < 5e-7 and abs(opt.eta_tilde - 0.955317) < 5e-7
          and residual <= 1e-10 and elapsed < 1e-3)
    check(1, ok, f"alpha={opt.alpha_tilde:.6f} eta={opt.eta_tilde:.6f} "
                 f"residual={residual:.1e} time={elapsed * 1e6:.1f}us")


C2_VALUES = [1.5, 2, 2.5, 3, 4, 8, 16, 100, 1e4]


@pytest.mark.parametrize("Kt", C2_VALUES)
def test_c2_numeric_vs_closed_form(Kt):
    closed = asy.optimum_closed_form(Kt)
    numeric = asy.optimum_numeric(Kt)
    da = abs(numeric.alpha_tilde - closed.alpha_tilde)
    de = abs(numeric.eta_tilde - closed.eta_tilde)
    check(2, da <= 1e-8 and de <= 1e-8, f"Kt={Kt:g}: d_alpha={da:.1e} d_eta={de:.1e}")


def test_c2_runtime():
    start = time.perf_counter()
    for Kt in C2_VALUES:
        asy.optimum_numeric(Kt)
    elapsed = time.perf_counter() - start
    check(2, elapsed < 1.0, f"runtime={elapsed:.2f}s")


def test_c3_rescaling():
    rng = random.Random(2024)
    mismatches = 0
    for _ in range(50):
        # the optimum exists only for K/t >= 4/3
        t = rng.randint(1, 12)
        K = rng.randint(math.ceil(4 * t / 3), 40)
        tau = rng.randint(1, 6)
        b = rng.randint(tau + 1, 64)
        base = asy.optimum_for_geometry(validate_geometry(K * b, K, t, tau))
        for c in (2, 3, 5):
            big = asy.optimum_for_geometry(validate_geometry(c * K * b, c * K, c * t, tau))
            if (big.eta_tilde, big.alpha_tilde) != (base.eta_tilde, base.alpha_tilde):
                mismatches += 1
    check(3, mismatches == 0, f"50 geometries x 3 factors, mismatches={mismatches}")


GRID = valid_geometries([16, 64, 256, 1024], [4, 8, 16], [1, 2], [1, 2, 4])


def _class_values(state):
    values, spread = sv.class_amplitudes(state)
    return np.array(values), spread


def _reduced_class_values(red):
    g = red.geometry
    sizes = np.array([g.z, g.t * (g.b - g.tau), g.b * (g.K - g.t)])
    return red.vector / np.sqrt(sizes)


def test_c4_oracle_equivalence():
    start = time.perf_counter()
    worst = 0.0
    for g in GRID:
        full = sv.uniform_state(g)
        for j1 in range(13):
            red1 = rd.evolve_global(rd.initial_reduced(g), j1)
            loc = full
            for j2 in range(13):
                red2 = rd.evolve_local(red1, j2)
                states = [(loc, red2)]
                for ordering in "AB":
                    states.append((sv.apply_step3(loc, ordering), rd.apply_step3(red2, ordering)))
                for f, r in states:
                    values, spread = _class_values(f)
                    worst = max(worst, spread, np.abs(values - _reduced_class_values(r)).max())
                loc = sv.apply_local_iterations(loc, 1)
            full = sv.apply_global_iteration(full)
    elapsed = time.perf_counter() - start
    check(4, worst <= 1e-12 and elapsed < 60,
          f"{len(GRID)} geometries, max deviation={worst:.1e}, runtime={elapsed:.1f}s")


def test_c5_post_step1_amplitudes():
    worst = 0.0
    for g in GRID:
        s = sv.uniform_state(g)
        mask = s.placement.mask
        for j1 in range(13):
            ang = (2 * j1 + 1) * g.theta1
            worst = max(worst,
                        np.abs(s.amplitudes[mask] - math.sin(ang) / math.sqrt(g.z)).max(),
                        np.abs(s.amplitudes[~mask] - math.cos(ang) / math.sqrt(g.N - g.z)).max())
            s = sv.apply_global_iteration(s)
    check(5, worst <= 1e-12, f"max deviation={worst:.1e}")


_TRACES = {}


@pytest.mark.parametrize("geo", SURE_GEOMETRIES)
def test_c6_sure_success(geo):
    g = validate_geometry(*geo)
    trace = []
    sol = sp.minimal_schedule(g, trace)
    _TRACES[geo] = trace
    state = sv.run_partial_search(g, sol.j1, sol.j2, phases=(sol.theta, sol.phi))
    residual = sv.non_target_residual(state)
    mass = sv.target_mass(state)
    check(6, residual <= 1e-10 and abs(mass - 1) <= 1e-12,
          f"{geo}: j1={sol.j1} j2={sol.j2} residual={residual:.1e} |mass-1|={abs(mass - 1):.1e}")


def test_c6_runtime():
    start = time.perf_counter()
    for geo in SURE_GEOMETRIES:
        sp.minimal_schedule(validate_geometry(*geo))
    elapsed = time.perf_counter() - start
    check(6, elapsed < 120, f"runtime={elapsed:.2f}s")


@pytest.mark.parametrize("Kt", [3, 4, 8, 16])
def test_c7_query_advantage(Kt):
    opt = asy.optimum_closed_form(Kt)
    saved = opt.eta_tilde - opt.alpha_tilde
    ok = opt.total_real < opt.full_search_real and 0 < saved < 1
    if Kt == 4:
        ok = ok and abs(saved - 0.3398) < 5e-5
    check(7, ok, f"Kt={Kt}: saved coefficient={saved:.4f}")


def test_c8_infeasible_reported():
    traces = _TRACES or {geo: [] for geo in SURE_GEOMETRIES}
    if not _TRACES:
        for geo, trace in traces.items():
            sp.minimal_schedule(validate_geometry(*geo), trace)
    infeasible = 0
    clean = True
    for geo, trace in traces.items():
        g = validate_geometry(*geo)
        for j1, j2, outcome in trace:
            c = sp.phase_condition_coefficients(g, j1, j2)
            if c.x ** 2 < (c.y + c.z) ** 2:
                infeasible += 1
                clean &= isinstance(outcome, Infeasible) and not hasattr(outcome, "theta")
    check(8, infeasible > 0 and clean, f"infeasible pairs seen={infeasible}, all reported as Infeasible={clean}")


def _sweep_suite():
    out = io.StringIO()
    for spec in sorted(SWEEPS.glob("*.cfg")):
        buf = io.StringIO()
        code = cli.main(["sweep", str(spec)], buf)
        assert code == 0, spec
        out.write(buf.getvalue())
    return out.getvalue().encode()


def test_c9_determinism():
    first, second = _sweep_suite(), _sweep_suite()
    check(9, first == second and len(first) > 0, f"{len(first)} bytes, identical={first == second}")
