"""Command-line interface: ``foamsim <command> ...``.

Every command writes JSON (or CSV for ``scan``) to ``--out`` or stdout, exits 0
on success and prints a single ``foamsim: error: ...`` line with exit status 2
on failure. Output files are written atomically, so a failed run never leaves
a partial file behind.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import montecarlo, optimizer, qsim, spinfoam
from .intertwiner import IntertwinerBloch

__all__ = ["main", "build_parser", "read_boundary", "read_normals"]


class CLIError(Exception):
    pass


# --- input parsing --------------------------------------------------------------

def read_boundary(path) -> list[IntertwinerBloch]:
    """(θ, φ) rows from JSON (list of pairs, or {"boundary": [...]}) or text.

    Text files hold one ``theta phi`` pair per line, separated by whitespace or a
    comma; ``#`` starts a comment.
    """
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith(("[", "{")):
        data = json.loads(text)
        if isinstance(data, dict):
            data = data.get("boundary")
        rows = data
    else:
        rows = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append(line.replace(",", " ").split())
    if not isinstance(rows, list) or not rows:
        raise CLIError(f"{path}: no boundary rows found")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, (list, tuple)) or len(row) != 2:
            raise CLIError(f"{path}: row {i + 1} must hold exactly two numbers (theta, phi)")
        try:
            theta, phi = float(row[0]), float(row[1])
        except (TypeError, ValueError):
            raise CLIError(f"{path}: row {i + 1} is not numeric") from None
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise CLIError(f"{path}: row {i + 1} is not finite")
        out.append(IntertwinerBloch(theta, phi))
    return out


def read_normals(spec: str) -> np.ndarray:
    """Normals array (5, 4, 3) from a JSON file, or the keyword ``regular``."""
    if spec == "regular":
        return montecarlo.regular_boundary_normals()
    data = json.loads(Path(spec).read_text())
    if isinstance(data, dict):
        data = data.get("normals")
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise CLIError(f"{spec}: normals must be numeric") from None
    return montecarlo.validate_normals(arr)


def _read_couplings(spec: str | None, default: str) -> list[qsim.CouplingMatrix]:
    spec = spec or default
    if spec in ("single_vertex", "two_vertex"):
        return qsim.bundled_couplings(spec)
    name, _, dataset = spec.partition(":")
    return qsim.load_couplings(name, dataset or None)


# --- output --------------------------------------------------------------------

def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# --- commands ------------------------------------------------------------------

def cmd_vertex(args) -> None:
    amps = spinfoam.vertex_state().amplitudes
    _emit(_json([[float(a.real), float(a.imag)] for a in amps]), args.out)


def cmd_amplitude(args) -> None:
    boundary = read_boundary(args.boundary)
    if args.two_vertex:
        if len(boundary) != 8:
            raise CLIError(f"--two-vertex needs 8 boundary rows, got {len(boundary)}")
        amp = spinfoam.amplitude_double(boundary)
    else:
        if len(boundary) != 5:
            hint = " (use --two-vertex for 8 rows)" if len(boundary) == 8 else ""
            raise CLIError(f"single-vertex boundary needs 5 rows, got {len(boundary)}{hint}")
        amp = spinfoam.amplitude_single(boundary)
    _emit(_json({
        "amplitude_re": amp.overlap.real,
        "amplitude_im": amp.overlap.imag,
        "probability": amp.probability,
        "prefactored_re": amp.prefactored.real,
        "prefactored_im": amp.prefactored.imag,
    }), args.out)


def _parse_grid(text: str) -> tuple[int, int | None]:
    parts = text.lower().split("x")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise CLIError(f"bad grid {text!r}; use N or NxM") from None
    if len(nums) not in (1, 2) or min(nums) < 2:
        raise CLIError(f"bad grid {text!r}; sizes must be at least 2")
    return nums[0], nums[1] if len(nums) == 2 else None


def cmd_scan(args) -> None:
    n_theta, n_phi = _parse_grid(args.grid)
    if args.mode == "single":
        table = spinfoam.scan_single(n_theta, n_phi or n_theta)
    else:
        phis = (math.pi / 2, 3 * math.pi / 2) if n_phi is None else np.linspace(0, 2 * math.pi, n_phi)
        table = spinfoam.scan_double(n_theta, phis)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(spinfoam.SCAN_COLUMNS)
    for row in table:
        writer.writerow([repr(float(x)) for x in row])
    _emit(buf.getvalue(), args.out)


def cmd_optimize(args) -> None:
    if args.layers < 1:
        raise CLIError("--layers must be at least 1")
    if args.restarts < 1:
        raise CLIError("--restarts must be at least 1")
    couplings = _read_couplings(args.couplings, "single_vertex")
    cfg = optimizer.OptimizerConfig(restarts=args.restarts, max_iterations=args.max_iterations,
                                    seed=args.seed, workers=args.threads)
    if len(couplings) == 1:
        result = optimizer.optimize_single(couplings[0], args.layers, cfg)
    elif len(couplings) == 2:
        result = optimizer.optimize_parallel(couplings[0], couplings[1], args.layers, cfg)
    else:
        raise CLIError(f"expected one or two coupling groups, got {len(couplings)}")
    sched = result.schedule
    sched.metadata["couplings"] = args.couplings or "single_vertex"
    sched.metadata["restart_fidelities"] = [float(f) for f in result.restart_fidelities]
    payload = sched.to_json()
    if args.out is None:
        _emit(_json(payload), None)
    else:
        _emit(_json(payload), args.out)
        sys.stdout.write(_json({"fidelity": result.fidelity, "out": args.out}))


def cmd_simulate(args) -> None:
    schedule = qsim.PulseSchedule.load(args.schedule)
    boundary = read_boundary(args.boundary)
    n = schedule.n_qubits
    if n not in (5, 10):
        raise CLIError(f"schedule must act on 5 or 10 qubits, got {n}")
    default = schedule.metadata.get("couplings") or ("single_vertex" if n == 5 else "two_vertex")
    couplings = _read_couplings(args.couplings, default)
    labels = {c.label for c in couplings}
    missing = set(schedule.groups) - labels if schedule.depth else set()
    if missing:
        raise CLIError(f"couplings lack groups {sorted(missing)} used by the schedule")
    state = qsim.run_schedule(schedule, couplings)
    expected = 5 if n == 5 else 8
    if len(boundary) != expected and not (n == 10 and len(boundary) == 10):
        raise CLIError(f"a {n}-qubit schedule needs {expected} boundary rows, got {len(boundary)}")
    prob = qsim.measurement_probability(state, [(t.theta, t.phi) for t in boundary])
    w = spinfoam.vertex_state().amplitudes
    target = w if n == 5 else np.kron(w, w)
    _emit(_json({
        "n_qubits": n,
        "all_zero_probability": prob,
        "fidelity_to_vertex_state": qsim.fidelity_pure(state, target),
    }), args.out)


def cmd_mc(args) -> None:
    if args.samples < 1000:
        raise CLIError("--samples must be at least 1000")
    normals = read_normals(args.normals)
    est = montecarlo.mc_amplitude_single(normals, args.samples, args.seed, workers=args.threads)
    exact = montecarlo.contraction_amplitude(normals)
    _emit(_json({
        "estimate_re": est.estimate.real,
        "estimate_im": est.estimate.imag,
        "std_error": est.std_error,
        "empirical_Z": montecarlo.empirical_z(est, normals),
        "exact_re": exact.real,
        "exact_im": exact.imag,
        "samples": est.samples,
        "seed": est.seed,
    }), args.out)


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="foamsim", description="Spin-1/2 vertex amplitudes and circuit emulation.")
    p.add_argument("--threads", type=int, default=1, help="worker threads for sampling and restarts")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.set_defaults(func=func)
        return sp

    add("vertex", cmd_vertex, "vertex-state amplitudes as [re, im] pairs")

    sp = add("amplitude", cmd_amplitude, "amplitude and probability for a boundary")
    sp.add_argument("--boundary", required=True, help="file with 5 (or 8) theta/phi rows")
    sp.add_argument("--two-vertex", action="store_true", help="glued two-vertex amplitude (8 rows)")

    sp = add("scan", cmd_scan, "amplitude landscape as CSV")
    sp.add_argument("--mode", choices=("single", "double"), default="single")
    sp.add_argument("--grid", default="101", help="N or NxM (theta x phi)")

    sp = add("optimize", cmd_optimize, "synthesize a pulse schedule preparing the vertex state")
    sp.add_argument("--layers", type=int, default=4)
    sp.add_argument("--couplings", help="coupling JSON (path[:dataset]) or a bundled dataset name")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--restarts", type=int, default=10)
    sp.add_argument("--max-iterations", type=int, default=2000)

    sp = add("simulate", cmd_simulate, "run a schedule and read out a boundary")
    sp.add_argument("--schedule", required=True)
    sp.add_argument("--boundary", required=True)
    sp.add_argument("--couplings", help="override the couplings named in the schedule")

    sp = add("mc", cmd_mc, "Monte Carlo estimate of the vertex integral")
    sp.add_argument("--samples", type=int, default=10**6)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--normals", default="regular", help="JSON file of (5, 4, 3) normals, or 'regular'")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        args.func(args)
    except (CLIError, ValueError, KeyError, IndexError, OSError, json.JSONDecodeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"foamsim: error: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
