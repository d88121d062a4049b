"""Command-line front end: ``qpartial optimize | simulate | surephase | sweep``.

Tables go to stdout as CSV (``--json`` for JSON records, ``--gnuplot`` for a
whitespace-separated layout); errors go to stderr with a nonzero exit code.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from . import __version__, asymptotic, reduced3d, statevector, surephase
from .config import SearchGeometry, geometry_from_mapping, read_config_file, validate_geometry
from .errors import QPartialError

RUN_COLUMNS = ("mode", "N", "K", "b", "t", "tau", "j1", "j2", "theta", "phi",
               "total_queries", "full_queries", "residual", "target_mass")
AUTO_REDUCED_ABOVE = 2**16
MODES = ("asymptotic", "exact", "sure-success")


@dataclass
class RunRecord:
    mode: str
    N: int
    K: int
    b: int | None
    t: int
    tau: int
    j1: int | None = None
    j2: int | None = None
    theta: float | None = None
    phi: float | None = None
    total_queries: int | None = None
    full_queries: float | None = None
    residual: float | None = None
    target_mass: float | None = None
    marginals: list = field(default_factory=list)
    ordering: str | None = None
    engine: str | None = None
    seed: int | None = None
    sampled_block: int | None = None
    wall_time: float = 0.0
    version: str = __version__
    error: str | None = None

    def csv_row(self) -> list:
        return [_fmt(getattr(self, c)) for c in RUN_COLUMNS]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.15g}"
    return str(value)


def _pick_engine(geometry: SearchGeometry, engine: str) -> str:
    if engine == "auto":
        return "reduced" if geometry.N > AUTO_REDUCED_ABOVE else "full"
    if engine not in ("full", "reduced"):
        raise QPartialError(f"unknown engine {engine!r}")
    return engine


def _base_record(mode, g: SearchGeometry) -> RunRecord:
    return RunRecord(mode=mode, N=g.N, K=g.K, b=g.b, t=g.t, tau=g.tau,
                     full_queries=asymptotic.full_search_queries(g))


def run_plain(geometry, j1, j2, ordering="A", engine="auto", seed=None, mode="exact") -> RunRecord:
    """Steps 1-3 with the unmodified last step."""
    start = time.perf_counter()
    engine = _pick_engine(geometry, engine)
    ordering = statevector.Ordering.parse(ordering)
    rec = _base_record(mode, geometry)
    if engine == "full":
        state = statevector.run_partial_search(geometry, j1, j2, ordering)
        marg = statevector.block_marginals(state)
        rec.residual = statevector.non_target_residual(state)
        rec.target_mass = statevector.target_mass(state)
        if seed is not None:
            rec.sampled_block = statevector.sample_block(state, seed)
    else:
        state = reduced3d.run_partial_search(geometry, j1, j2, ordering)
        marg = reduced3d.block_marginals(state)
        rec.residual = reduced3d.non_target_residual(state)
        rec.target_mass = reduced3d.target_mass(state)
        if seed is not None:
            import numpy as np
            rng = np.random.default_rng(seed)
            rec.sampled_block = int(rng.choice(len(marg), p=marg / marg.sum()))
    rec.j1, rec.j2 = int(j1), int(j2)
    rec.total_queries = rec.j1 + rec.j2 + 1
    rec.marginals = [float(v) for v in marg]
    rec.ordering, rec.engine, rec.seed = ordering.value, engine, seed
    rec.wall_time = time.perf_counter() - start
    return rec


def run_asymptotic(geometry, ordering="A", engine="auto") -> RunRecord:
    """Rounded large-block schedule, simulated with the plain last step."""
    sched = asymptotic.integer_schedule(geometry, ordering)
    return run_plain(geometry, sched.j1, sched.j2, ordering, engine, mode="asymptotic")


def run_surephase(geometry, engine="auto") -> tuple:
    start = time.perf_counter()
    sol = surephase.minimal_schedule(geometry)
    engine = _pick_engine(geometry, engine)
    rec = _base_record("sure-success", geometry)
    phases = (sol.theta, sol.phi)
    if engine == "full":
        state = statevector.run_partial_search(geometry, sol.j1, sol.j2, phases=phases)
        marg = statevector.block_marginals(state)
        rec.residual = statevector.non_target_residual(state)
        rec.target_mass = statevector.target_mass(state)
    else:
        state = reduced3d.run_partial_search(geometry, sol.j1, sol.j2, phases=phases)
        marg = reduced3d.block_marginals(state)
        rec.residual = reduced3d.non_target_residual(state)
        rec.target_mass = reduced3d.target_mass(state)
    rec.j1, rec.j2, rec.theta, rec.phi = sol.j1, sol.j2, sol.theta, sol.phi
    rec.total_queries = sol.total_queries
    rec.marginals = [float(v) for v in marg]
    rec.engine = engine
    rec.wall_time = time.perf_counter() - start
    return rec, sol


# -- sweep spec --------------------------------------------------------------

def _parse_values(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(part)
    return out


def expand_sweep(spec: dict) -> list:
    """Cartesian product of the listed values, sorted lexicographically.

    Keys: mode, N or b, K, t, tau, and for exact mode j1, j2 (optional),
    ordering, engine.
    """
    mode = spec.get("mode", "asymptotic").strip()
    if mode not in MODES:
        raise QPartialError(f"sweep mode must be one of {MODES}, got {mode!r}")
    size_key = "N" if "N" in spec else "b"
    if size_key not in spec:
        raise QPartialError("sweep spec needs N or b")
    axes = {k: [int(v) for v in _parse_values(spec[k])] for k in (size_key, "K", "t", "tau")}
    for k in ("j1", "j2"):
        axes[k] = [int(v) for v in _parse_values(spec[k])] if k in spec else [None]
    jobs = []
    for size, K, t, tau, j1, j2 in itertools.product(
            axes[size_key], axes["K"], axes["t"], axes["tau"], axes["j1"], axes["j2"]):
        N = size if size_key == "N" else size * K
        jobs.append({"mode": mode, "N": N, "K": K, "t": t, "tau": tau, "j1": j1, "j2": j2,
                     "ordering": spec.get("ordering", "A").strip(),
                     "engine": spec.get("engine", "auto").strip()})
    jobs.sort(key=lambda j: (j["N"], j["K"], j["t"], j["tau"],
                             -1 if j["j1"] is None else j["j1"],
                             -1 if j["j2"] is None else j["j2"]))
    return jobs


def run_job(job: dict) -> RunRecord:
    """One sweep row; failures come back as flagged records."""
    try:
        g = validate_geometry(job["N"], job["K"], job["t"], job["tau"])
        if job["mode"] == "asymptotic":
            return run_asymptotic(g, job["ordering"], job["engine"])
        if job["mode"] == "sure-success":
            return run_surephase(g, job["engine"])[0]
        j1, j2 = job["j1"], job["j2"]
        if j1 is None or j2 is None:
            sched = asymptotic.integer_schedule(g)
            j1 = sched.j1 if j1 is None else j1
            j2 = sched.j2 if j2 is None else j2
        return run_plain(g, j1, j2, job["ordering"], job["engine"])
    except QPartialError as exc:
        b = job["N"] // job["K"] if job["N"] % job["K"] == 0 else None
        return RunRecord(mode=job["mode"], N=job["N"], K=job["K"], b=b, t=job["t"], tau=job["tau"],
                         j1=job["j1"], j2=job["j2"], error=f"{type(exc).__name__}: {exc}")


def run_sweep(spec: dict, jobs: int = 1) -> list:
    work = expand_sweep(spec)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_job, work))
    return [run_job(j) for j in work]


# -- output --------------------------------------------------------------------

def write_records(records, out, fmt="csv"):
    if fmt == "json":
        json.dump([asdict(r) for r in records], out, indent=2)
        out.write("\n")
        return
    if fmt == "gnuplot":
        out.write("# " + " ".join(RUN_COLUMNS) + "\n")
        for r in records:
            out.write(" ".join(v if v else "nan" for v in r.csv_row()) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RUN_COLUMNS)
    for r in records:
        row = r.csv_row()
        if r.error is not None:
            row[RUN_COLUMNS.index("residual")] = "error"
        writer.writerow(row)


def write_optima(optima, out, fmt="csv"):
    if fmt == "json":
        json.dump([o.as_dict() for o in optima], out, indent=2)
        out.write("\n")
        return
    if fmt == "gnuplot":
        out.write("# " + " ".join(asymptotic.CSV_COLUMNS) + "\n")
        for o in optima:
            out.write(" ".join(_fmt(float(v)) for v in o.csv_row()) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(asymptotic.CSV_COLUMNS)
    for o in optima:
        writer.writerow([_fmt(float(v)) for v in o.csv_row()])


# -- argument handling ---------------------------------------------------------

def _add_geometry_args(p):
    p.add_argument("--N", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--tau", type=int)
    p.add_argument("--config", help="key=value file with N, K, t, tau")


def _geometry_from_args(args) -> SearchGeometry:
    values = read_config_file(args.config) if args.config else {}
    for key in ("N", "K", "t", "tau"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    missing = [k for k in ("N", "K", "t", "tau") if k not in values]
    if missing:
        raise QPartialError(f"missing geometry: {', '.join(missing)}")
    return geometry_from_mapping(values)


def _add_output_args(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--json", action="store_true", help="emit JSON records")
    group.add_argument("--gnuplot", action="store_true", help="emit a whitespace-separated table")


def _fmt_choice(args) -> str:
    return "json" if args.json else "gnuplot" if args.gnuplot else "csv"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpartial", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="large-block optimum for a geometry or a K/t ratio")
    _add_geometry_args(p)
    p.add_argument("--Ktilde", type=float, help="bare ratio K/t (counts in units of sqrt(b/tau))")
    p.add_argument("--sweep", help="comma-separated K/t values")
    p.add_argument("--numeric", action="store_true", help="use the golden-section minimizer")
    p.add_argument("--plot", help="write a figure of the sweep to this path")
    _add_output_args(p)

    p = sub.add_parser("simulate", help="run the three steps with the plain last step")
    _add_geometry_args(p)
    p.add_argument("--j1", type=int, help="global iterations (default: rounded optimum)")
    p.add_argument("--j2", type=int, help="local iterations (default: rounded optimum)")
    p.add_argument("--ordering", default="A", help="A: reflect then oracle, B: oracle then reflect")
    p.add_argument("--engine", default="auto", choices=("full", "reduced", "auto"))
    p.add_argument("--seed", type=int, help="also sample one block label with this seed")
    _add_output_args(p)

    p = sub.add_parser("surephase", help="cheapest sure-success schedule and phases")
    _add_geometry_args(p)
    p.add_argument("--engine", default="auto", choices=("full", "reduced", "auto"))
    _add_output_args(p)

    p = sub.add_parser("sweep", help="run every configuration of a key=value sweep file")
    p.add_argument("spec", help="sweep file")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--plot", help="write a figure of the results to this path")
    _add_output_args(p)
    return parser


def _cmd_optimize(args, out) -> int:
    solve = asymptotic.optimum_numeric if args.numeric else asymptotic.optimum_closed_form
    if args.sweep:
        optima = [solve(float(v)) for v in _parse_values(args.sweep)]
    elif args.Ktilde is not None:
        optima = [solve(args.Ktilde)]
    else:
        g = _geometry_from_args(args)
        optima = [solve(g.K / g.t, scale=math.sqrt(g.b / g.tau))]
    write_optima(optima, out, _fmt_choice(args))
    if args.plot:
        from .plotting import plot_optimum_sweep
        plot_optimum_sweep(optima, args.plot)
    return 0


def _cmd_simulate(args, out) -> int:
    g = _geometry_from_args(args)
    j1, j2 = args.j1, args.j2
    if j1 is None or j2 is None:
        sched = asymptotic.integer_schedule(g)
        j1 = sched.j1 if j1 is None else j1
        j2 = sched.j2 if j2 is None else j2
    rec = run_plain(g, j1, j2, args.ordering, args.engine, args.seed)
    write_records([rec], out, _fmt_choice(args))
    return 0


def _cmd_surephase(args, out) -> int:
    g = _geometry_from_args(args)
    rec, sol = run_surephase(g, args.engine)
    if args.json:
        json.dump({**sol.as_record(g), "target_mass": rec.target_mass,
                   "marginals": rec.marginals, "version": rec.version}, out, indent=2)
        out.write("\n")
    else:
        write_records([rec], out, _fmt_choice(args))
    return 0


def _cmd_sweep(args, out) -> int:
    spec = read_config_file(args.spec)
    records = run_sweep(spec, args.jobs)
    write_records(records, out, _fmt_choice(args))
    failed = [r for r in records if r.error is not None]
    for r in failed:
        print(f"row N={r.N} K={r.K} t={r.t} tau={r.tau}: {r.error}", file=sys.stderr)
    if args.plot:
        from .plotting import plot_run_records
        plot_run_records(records, args.plot)
    return 1 if failed else 0


COMMANDS = {"optimize": _cmd_optimize, "simulate": _cmd_simulate,
            "surephase": _cmd_surephase, "sweep": _cmd_sweep}


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout if out is None else out
    buffer = io.StringIO()
    try:
        code = COMMANDS[args.command](args, buffer)
    except (QPartialError, OSError) as exc:
        print(f"qpartial: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    out.write(buffer.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
