"""Command-line front end.

    bosonet simulate        --network net.json --state state.json --t1 10 --dt 0.1 --out run.csv
    bosonet sweep           --network net.json --state state.json --param lambda=0.01,0.1 --out sweep.csv
    bosonet compare-oracle  --network net.json --state state.json --times 1,5,20 --cutoff 25
    bosonet topology generate --kind circular --n 4 --omega 1 --lambda 0.1
    bosonet validate        --network net.json [--state state.json]

Exit codes: 0 success, 1 unreadable or malformed input, 2 validation error,
3 numerical failure, 4 oracle comparison outside tolerance.  ``BOSONET_LOG``
sets the log level (default WARNING).
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import io
import itertools
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .dissipation import WhiteNoise
from .dynamics import (CoherentSuperposition, FockSuperposition, decoherence_coefficients, evolve_coherent,
                       evolve_fock, linear_entropies, recurrence_probability, state_from_dict, state_to_dict,
                       transfer_probability)
from .dynamics.entropy import KERNELS
from .errors import BosonetError, NetworkParseError, NumericalError, ValidationError
from .fockspace import overlap_trace, partial_trace, trace_distance
from .network import Network
from .oracle import integrate
from .topology import (RESERVOIR_MODES, TOPOLOGIES, generate_topology, load_json, network_from_dict,
                       network_to_dict, serialize_network)

log = logging.getLogger("bosonet")

OBSERVABLES = ("recurrence", "transfer", "entropy", "coherence", "population")
EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_ORACLE_MISMATCH = 1, 2, 3, 4
CSV_FORMAT = "%.16e"


# ---------------------------------------------------------------- inputs

def _read(path: str) -> tuple[str, str]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise NetworkParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return data.decode("utf-8"), hashlib.sha256(data).hexdigest()
    except UnicodeDecodeError:
        raise NetworkParseError(f"{path} is not UTF-8 text") from None


def _load_inputs(args):
    net_text, net_hash = _read(args.network)
    net_doc = load_json(net_text)
    spec = network_from_dict(net_doc)
    inputs = {"network": {"path": args.network, "sha256": net_hash}}
    state = None
    if getattr(args, "state", None):
        state_text, state_hash = _read(args.state)
        state = state_from_dict(load_json(state_text), spec.n)
        inputs["state"] = {"path": args.state, "sha256": state_hash}
    return net_doc, spec, state, inputs


def time_grid(t0: float, t1: float | None, dt: float | None, times: str | None = None) -> np.ndarray:
    """Explicit ``times`` list, or t0..t1 in steps of dt (t1 included when the step divides the span)."""
    if times is not None:
        try:
            grid = np.array([float(x) for x in times.split(",") if x.strip()])
        except ValueError:
            raise ValidationError(f"cannot parse time list {times!r}", "times") from None
    else:
        if t1 is None or dt is None:
            raise ValidationError("give --times or both --t1 and --dt", "time grid")
        if not (np.isfinite(t0) and np.isfinite(t1) and np.isfinite(dt)) or dt <= 0:
            raise ValidationError("t0, t1 must be finite and dt > 0", "time grid")
        span = t1 - t0
        steps = int(np.floor(span / dt + 1e-9)) if span >= 0 else -1
        if steps >= 0 and abs(steps * dt - span) <= 1e-9 * max(1.0, abs(span)):
            grid = np.linspace(t0, t1, steps + 1)
        else:
            grid = t0 + dt * np.arange(steps + 1)
    if grid.size == 0:
        raise ValidationError("time grid is empty", "time grid")
    if not np.all(np.isfinite(grid)) or np.any(np.diff(grid) <= 0):
        raise ValidationError("times must be finite and strictly increasing", "time grid")
    return grid


def _observables(text: str | None, state) -> tuple[str, ...]:
    coherent = isinstance(state, CoherentSuperposition)
    if text is None:
        chosen = [o for o in OBSERVABLES if o != "coherence" or (coherent and state.n_branches > 1)]
        return tuple(o for o in chosen if o != "transfer" or state.n_modes > 1)
    chosen = tuple(dict.fromkeys(x.strip() for x in text.split(",") if x.strip()))
    bad = [o for o in chosen if o not in OBSERVABLES]
    if bad or not chosen:
        raise ValidationError(f"unknown observables {bad}; choose from {OBSERVABLES}", "observables")
    if "coherence" in chosen and not (coherent and state.n_branches > 1):
        raise ValidationError("coherence needs a coherent superposition with >= 2 branches", "observables")
    if "transfer" in chosen and state.n_modes < 2:
        raise ValidationError("transfer needs at least two oscillators", "observables")
    return tuple(o for o in OBSERVABLES if o in chosen)


# ---------------------------------------------------------------- table

def columns_for(observables, n_modes: int, n_branches: int, source: int) -> list[str]:
    cols = ["t"]
    if "recurrence" in observables:
        cols.append("P_R")
    if "transfer" in observables:
        cols += [f"P_T_{m}" for m in range(1, n_modes + 1) if m != source]
    if "entropy" in observables:
        cols.append("S_full")
        cols += [f"S_single_{m}" for m in range(1, n_modes + 1)]
        cols += [f"S_rest_{m}" for m in range(1, n_modes + 1)]
        cols += [f"E_{m}" for m in range(1, n_modes + 1)]
    if "coherence" in observables:
        cols += [f"w_abs_{r}_{s}" for r in range(1, n_branches + 1) for s in range(r + 1, n_branches + 1)]
    if "population" in observables:
        cols += [f"pop_{m}" for m in range(1, n_modes + 1)]
    return cols


def _coherent_row(net, state, t, observables, src, kernel):
    ev = evolve_coherent(state, net.propagator(t))
    row = [t]
    if "recurrence" in observables:
        row.append(recurrence_probability(ev, src))
    if "transfer" in observables:
        row += [transfer_probability(ev, src, m) for m in range(net.n) if m != src]
    if "entropy" in observables:
        rep = linear_entropies(state, net.dm, t, kernel=kernel)
        if not rep.consistent:
            log.warning("t=%g: %s kernel differs from the direct purity by %.3e", t, kernel, rep.max_deviation)
        row += [rep.full, *rep.single, *rep.rest, *rep.excess]
    if "coherence" in observables:
        table = decoherence_coefficients(ev)
        row += [table.magnitude[r, s] for r, s in table.pairs()]
    if "population" in observables:
        row += list(ev.mean_photon_numbers())
    return row


def _fock_row(net, state, t, observables, src, cutoff, initial):
    rho = evolve_fock(state, net.propagator(t), cutoff)
    n = net.n
    row = [t]
    if "recurrence" in observables:
        row.append(overlap_trace(rho.partial_trace([src]), initial.partial_trace([src])))
    if "transfer" in observables:
        then = initial.partial_trace([src])
        row += [overlap_trace(rho.partial_trace([m]), then) for m in range(n) if m != src]
    if "entropy" in observables:
        full = 1 - rho.purity
        single = [1 - rho.partial_trace([m]).purity for m in range(n)]
        rest = [1 - rho.partial_trace([k for k in range(n) if k != m]).purity if n > 1 else 0.0
                for m in range(n)]
        row += [full, *single, *rest, *[a + b - full for a, b in zip(single, rest)]]
    if "population" in observables:
        row += list(rho.mean_photon_numbers())
    return row


def compute_table(spec, state, times, observables, *, source=1, kernel="adjoint", symmetrize=True,
                  cutoff=None):
    """Rows of observables on ``times``; returns (columns, rows, network)."""
    net = Network.from_spec(spec, symmetrize=symmetrize)
    if not 1 <= source <= net.n:
        raise ValidationError(f"source must be in 1..{net.n}", "source")
    src = source - 1
    n_branches = state.n_branches if isinstance(state, CoherentSuperposition) else 1
    cols = columns_for(observables, net.n, n_branches, source)
    rows = []
    if isinstance(state, CoherentSuperposition):
        for t in times:
            rows.append(_coherent_row(net, state, float(t), observables, src, kernel))
    else:
        cut = cutoff if cutoff is not None else state.max_photons + 1
        initial = state.density_matrix(cut)
        for t in times:
            rows.append(_fock_row(net, state, float(t), observables, src, cut, initial))
    for row in rows:
        if not np.all(np.isfinite(np.real(row))):
            raise NumericalError(f"non-finite observable at t={row[0]}")
    return cols, [[float(np.real(x)) for x in row] for row in rows], net


def format_csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(CSV_FORMAT % x for x in row) + "\n")
    return buf.getvalue()


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _manifest(command, inputs, parameters, conventions, started, extra=None) -> dict:
    doc = {"tool": "bosonet", "version": __version__, "command": command, "inputs": inputs,
           "parameters": parameters, "conventions": conventions}
    doc.update(extra or {})
    doc["duration_s"] = time.perf_counter() - started
    return doc


def _write_manifest(out: str | None, doc: dict):
    if out is None or out == "-":
        return
    Path(str(out) + ".manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _conventions(args) -> dict:
    conv = {"gamma": args.gamma_convention}
    if hasattr(args, "entropy_kernel"):
        conv["entropy_kernel"] = args.entropy_kernel
    if hasattr(args, "sign_convention"):
        conv["propagator_sign"] = args.sign_convention
    return conv


# ---------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    started = time.perf_counter()
    _, spec, state, inputs = _load_inputs(args)
    times = time_grid(args.t0, args.t1, args.dt, args.times)
    obs = _observables(args.observables, state)
    cols, rows, net = compute_table(spec, state, times, obs, source=args.source, kernel=args.entropy_kernel,
                                    symmetrize=args.gamma_convention == "symmetrize", cutoff=args.cutoff)
    _write(args.out, format_csv(cols, rows))
    params = {"times": times.tolist(), "observables": list(obs), "source": args.source, "cutoff": args.cutoff}
    _write_manifest(args.out, _manifest("simulate", inputs, params, _conventions(args), started,
                                        {"gamma": net.gamma.tolist(), "gamma_psd": net.psd.is_psd}))
    return 0


def _set_param(doc: dict, name: str, value: float) -> None:
    if name == "lambda":
        for c in doc.get("couplings", []):
            c["lambda"] = value
    elif name == "omega":
        for o in doc["oscillators"]:
            o["omega"] = value
    elif name.startswith("omega."):
        idx = int(name.split(".", 1)[1])
        hits = [o for o in doc["oscillators"] if o.get("index") == idx]
        if not hits:
            raise ValidationError(f"no oscillator {idx}", f"param {name}")
        hits[0]["omega"] = value
    elif name.startswith("damping_models."):
        parts = name.split(".")
        models = doc.get("damping_models", {})
        if len(parts) != 3 or parts[1] not in models:
            raise ValidationError("expected damping_models.<id>.<field> with a known id", f"param {name}")
        if parts[2] not in models[parts[1]] or parts[2] == "kind":
            raise ValidationError(f"model {parts[1]!r} has no numeric field {parts[2]!r}", f"param {name}")
        models[parts[1]][parts[2]] = value
    elif name == "overlap":
        n = doc["n"]
        doc["overlap"] = [[1.0 if i == j else value for j in range(n)] for i in range(n)]
    else:
        raise ValidationError("supported: lambda, omega, omega.<m>, damping_models.<id>.<field>, overlap",
                              f"param {name}")


def _parse_params(items) -> list[tuple[str, list[float]]]:
    out = []
    for item in items or []:
        name, sep, values = item.partition("=")
        if not sep or not name.strip():
            raise ValidationError(f"expected name=v1,v2,... got {item!r}", "param")
        try:
            vals = [float(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise ValidationError(f"non-numeric value in {item!r}", "param") from None
        if not vals or not all(np.isfinite(vals)):
            raise ValidationError(f"need at least one finite value in {item!r}", "param")
        out.append((name.strip(), vals))
    if not out:
        raise ValidationError("give at least one --param", "param")
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise ValidationError("parameter given twice", "param")
    return out


def _sweep_slice(job):
    """One parameter tuple; top level so it pickles for the process pool."""
    net_doc, state_doc, times, obs, opts = job
    spec = network_from_dict(net_doc)
    state = state_from_dict(state_doc, spec.n)
    cols, rows, net = compute_table(spec, state, np.asarray(times), obs, **opts)
    return cols, rows, net.gamma.tolist()


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    net_doc, spec, state, inputs = _load_inputs(args)
    times = time_grid(args.t0, args.t1, args.dt, args.times)
    obs = _observables(args.observables, state)
    params = _parse_params(args.param)
    names = [n for n, _ in params]
    points = list(itertools.product(*[v for _, v in params]))
    if len(points) > args.max_points:
        raise ValidationError(f"{len(points)} parameter points exceed the cap of {args.max_points}", "max-points")
    opts = {"source": args.source, "kernel": args.entropy_kernel,
            "symmetrize": args.gamma_convention == "symmetrize", "cutoff": args.cutoff}
    state_doc = state_to_dict(state)
    jobs = []
    for point in points:
        doc = copy.deepcopy(net_doc)
        for name, value in zip(names, point):
            _set_param(doc, name, value)
        network_from_dict(doc)  # fail fast on an invalid slice
        jobs.append((doc, state_doc, times.tolist(), obs, opts))
    workers = max(1, int(args.workers))
    if workers == 1 or len(jobs) == 1:
        results = [_sweep_slice(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_slice, jobs))
    columns = names + results[0][0]
    rows = [list(point) + row for point, (_, slice_rows, _) in zip(points, results) for row in slice_rows]
    _write(args.out, format_csv(columns, rows))
    slices = [{"params": dict(zip(names, point)), "gamma": gamma} for point, (_, _, gamma) in zip(points, results)]
    manifest_params = {"times": times.tolist(), "observables": list(obs), "source": args.source,
                       "cutoff": args.cutoff, "sweep": {n: v for n, v in params}, "workers": workers}
    _write_manifest(args.out, _manifest("sweep", inputs, manifest_params, _conventions(args), started,
                                        {"slices": slices}))
    return 0


def cmd_compare_oracle(args) -> int:
    started = time.perf_counter()
    _, spec, state, inputs = _load_inputs(args)
    times = time_grid(args.t0, args.t1, args.dt, args.times)
    if times[0] < 0:
        raise ValidationError("oracle times must be >= 0", "times")
    net = Network.from_spec(spec, symmetrize=args.gamma_convention == "symmetrize")
    cutoff = args.cutoff
    if isinstance(state, CoherentSuperposition):
        def closed(t, convention="amplitude"):
            return evolve_coherent(state, net.propagator(t, convention)).density_matrix(cutoff)
    else:
        def closed(t, convention="amplitude"):
            return evolve_fock(state, net.propagator(t, convention), cutoff)
    rho0 = closed(0.0)
    gen = net.generator(cutoff, max_dimension=args.max_dimension)
    run = integrate(gen, rho0, float(times[-1]), dt=args.oracle_dt, sample_times=times)
    distances = [trace_distance(closed(float(t), args.sign_convention), run.at(float(t))) for t in times]
    worst = float(max(distances))
    passed = bool(worst <= args.tolerance)
    report = {
        "times": times.tolist(),
        "trace_distance": distances,
        "max_deviation": worst,
        "tolerance": args.tolerance,
        "pass": passed,
        "cutoff": cutoff,
        "truncated_weight": 1.0 - rho0.trace,
        "oracle": {"dt": run.dt, "frame": run.frame, "max_trace_drift": run.max_trace_drift,
                   "max_hermiticity_defect": run.max_hermiticity_defect, "min_eigenvalue": run.min_eigenvalue},
    }
    _write(args.out, json.dumps(report, indent=2) + "\n")
    _write_manifest(args.out, _manifest("compare-oracle", inputs, {"times": times.tolist(), "cutoff": cutoff,
                                                                   "oracle_dt": args.oracle_dt},
                                        _conventions(args), started))
    if not passed:
        log.error("max trace distance %.3e exceeds tolerance %.1e", worst, args.tolerance)
        return EXIT_ORACLE_MISMATCH
    return 0


def cmd_topology_generate(args) -> int:
    damping = WhiteNoise(args.gamma) if args.gamma is not None else None
    omega = [float(x) for x in args.omega.split(",")] if "," in args.omega else float(args.omega)
    spec = generate_topology(args.kind, args.n, omega, args.lam, damping=damping,
                             reservoir_mode=args.reservoir_mode)
    _write(args.out, serialize_network(spec))
    return 0


def cmd_validate(args) -> int:
    _, spec, state, _ = _load_inputs(args)
    net = Network.from_spec(spec, symmetrize=args.gamma_convention == "symmetrize")
    summary = {
        "n": net.n,
        "normal_mode_frequencies": net.modes.frequencies.tolist(),
        "gamma": net.gamma.tolist(),
        "gamma_asymmetry": net.damping.asymmetry,
        "gamma_psd": net.psd.is_psd,
        "gamma_min_eigenvalue": net.psd.min_eigenvalue,
        "hd_condition": net.dm.condition,
        "hd_defective": net.dm.defective,
        "network": network_to_dict(spec),
    }
    if state is not None:
        summary["state"] = state_to_dict(state)
    _write(args.out, json.dumps(summary, indent=2) + "\n")
    return 0


# ---------------------------------------------------------------- parser

def _add_grid(p):
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float)
    p.add_argument("--dt", type=float, help="grid spacing")
    p.add_argument("--times", help="explicit comma-separated times (overrides --t0/--t1/--dt)")


def _add_common(p, state_required=True):
    p.add_argument("--network", required=True)
    p.add_argument("--state", required=state_required)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--gamma-convention", choices=("symmetrize", "raw"), default="symmetrize",
                   help="use (Gamma + Gamma^T)/2 or the raw damping matrix")


def _add_observables(p):
    p.add_argument("--observables", help=f"comma-separated subset of {','.join(OBSERVABLES)}")
    p.add_argument("--source", type=int, default=1, help="1-based source oscillator for P_R and P_T")
    p.add_argument("--entropy-kernel", choices=KERNELS, default="adjoint")
    p.add_argument("--cutoff", type=int, help="Fock levels per mode for Fock states (default max photons + 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosonet", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"bosonet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="closed-form observables on a time grid")
    _add_common(p)
    _add_grid(p)
    _add_observables(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="simulate over a parameter grid (long-format CSV)")
    _add_common(p)
    _add_grid(p)
    _add_observables(p)
    p.add_argument("--param", action="append", help="name=v1,v2,...; repeat for a product grid")
    p.add_argument("--max-points", type=int, default=256)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare-oracle", help="closed form against brute-force master-equation integration")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--cutoff", type=int, default=25, help="Fock levels per mode")
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.add_argument("--oracle-dt", type=float, help="RK4 step (default: recommended step)")
    p.add_argument("--max-dimension", type=int, default=4096)
    p.add_argument("--sign-convention", choices=("amplitude", "characteristic"), default="amplitude",
                   help="propagator sign for the closed form; 'characteristic' is a negative control")
    p.set_defaults(func=cmd_compare_oracle)

    p = sub.add_parser("topology", help="network file utilities")
    tsub = p.add_subparsers(dest="topology_command", required=True)
    g = tsub.add_parser("generate", help="write a standard topology as network JSON")
    g.add_argument("--kind", choices=TOPOLOGIES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--omega", default="1.0", help="frequency, or comma-separated per oscillator")
    g.add_argument("--lambda", dest="lam", type=float, default=0.1)
    g.add_argument("--gamma", type=float, help="white-noise rate for every oscillator")
    g.add_argument("--reservoir-mode", choices=RESERVOIR_MODES, default="distinct")
    g.add_argument("--out")
    g.set_defaults(func=cmd_topology_generate)

    p = sub.add_parser("validate", help="check a network (and state) and print derived matrices")
    _add_common(p, state_required=False)
    p.set_defaults(func=cmd_validate)
    return parser


def _configure_logging():
    level = os.environ.get("BOSONET_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NetworkParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BosonetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
