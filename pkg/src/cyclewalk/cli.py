"""Command line front end.

Subcommands: evolve, limiting, sweep, mixing, verify, residue.  Every
command validates its configuration, runs the experiment, and writes
one deterministic table (CSV or JSON) to --out or stdout.  Exit codes:
0 success, 1 experiment-level failure (a theorem deviation above
threshold or a failed sweep cell), 2 usage error.

Flags override an optional JSON --config file; the effective
scientific configuration is echoed into the output metadata.  The
output bytes are a pure function of that configuration: paths, jobs
and diagnostics never leak into the table.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analysis, spectral
from .output import Table, write_table
from .walk import (CoinConfig, InitialState, WalkState, MODEL_MEMORY,
                   MODEL_RECYCLED, STATE_NAMES, evolve, named_coin4,
                   position_distribution)

#: phi values exercised by `verify` when no grid is given; 0, 1 and 2
#: probe the distinguished integer parameters, the rest are generic.
VERIFY_PHI_DEFAULT = (0.0, 0.7, 1.0, 2.0, 3.3)
THEOREM_TOL = 1e-10


class UsageError(Exception):
    pass


def _diag(msg: str):
    print("cyclewalk: %s" % msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# Value parsing

def parse_d_range(text: str) -> list:
    """Inclusive integer range 'A..B'."""
    parts = text.split("..")
    if len(parts) != 2:
        raise UsageError("bad --d-range %r (expected A..B)" % text)
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError("bad --d-range %r (expected integers)" % text) from None
    if lo > hi:
        raise UsageError("empty --d-range %r" % text)
    if lo < 2:
        raise UsageError("cycle sizes must be >= 2, got %d" % lo)
    return list(range(lo, hi + 1))


def parse_phi_grid(text: str) -> list:
    """Inclusive arithmetic grid 'start:step:end', rounded to 10 places.

    The rounding pins grid points like 0.1 * k to their decimal values
    so integer phi cells are exactly integers.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("bad --phi-grid %r (expected start:step:end)" % text)
    try:
        start, step, end = (float(p) for p in parts)
    except ValueError:
        raise UsageError("bad --phi-grid %r (expected numbers)" % text) from None
    if step <= 0:
        raise UsageError("--phi-grid step must be positive")
    if end < start:
        raise UsageError("empty --phi-grid %r" % text)
    n = int(round((end - start) / step))
    if start + n * step > end + 1e-9:
        n -= 1
    values = [round(start + i * step, 10) for i in range(n + 1)]
    if any(not 0.0 <= v < 8.0 for v in values):
        raise UsageError("phi grid must stay inside [0, 8)")
    return values


def parse_state(text: str) -> InitialState:
    """A named state psi_a..psi_d or custom:<four complex literals>.

    Custom vectors use comma-separated literals like 0.5+0.5i and are
    normalized on input; a deviation of more than 1e-6 from unit norm
    draws a diagnostic.
    """
    if text in STATE_NAMES:
        return InitialState.named(text)
    if not text.startswith("custom:"):
        raise UsageError("unknown state %r (expected %s or custom:...)"
                         % (text, "|".join(STATE_NAMES)))
    body = text[len("custom:"):]
    parts = body.split(",")
    if len(parts) != 4:
        raise UsageError("custom state needs exactly 4 components, got %d"
                         % len(parts))
    try:
        comps = [complex(p.strip().lower().replace("i", "j")) for p in parts]
    except ValueError:
        raise UsageError("bad complex literal in custom state %r" % body) \
            from None
    vec = np.array(comps, dtype=np.complex128)
    norm = float(np.sqrt(np.sum(np.abs(vec) ** 2)))
    if norm == 0.0:
        raise UsageError("custom state must be nonzero")
    if abs(norm - 1.0) > 1e-6:
        _diag("warning: custom state norm deviates from 1 by %.3g; "
              "normalizing" % abs(norm - 1.0))
    return InitialState(position=0, coin4=vec / norm, name=None)


def _state_config(init: InitialState):
    if init.name is not None:
        return init.name
    return [[float(c.real), float(c.imag)] for c in init.coin4]


def _default_jobs() -> int:
    raw = os.environ.get("CYCLEWALK_JOBS", "").strip()
    if not raw:
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        raise UsageError("CYCLEWALK_JOBS=%r is not an integer" % raw) from None
    if jobs < 1:
        raise UsageError("CYCLEWALK_JOBS must be >= 1")
    return jobs


# ---------------------------------------------------------------------------
# Argument plumbing

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="output format (default csv)")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="output file (default stdout)")
    p.add_argument("--config", default=None, metavar="PATH",
                   help="JSON file with defaults; flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclewalk",
        description="Simulate and analyze the recycled-coin and memory "
                    "quantum walks on the d-cycle.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="position distribution after t steps")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--state", default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--model", choices=(MODEL_RECYCLED, MODEL_MEMORY),
                   default=None)
    _add_common(p)

    p = sub.add_parser("limiting", help="time-averaged limiting distribution")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--state", default=None)
    p.add_argument("--model", choices=(MODEL_RECYCLED, MODEL_MEMORY),
                   default=None)
    _add_common(p)

    p = sub.add_parser("sweep", help="classify limiting distributions "
                                     "against uniform over a grid")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--d-range", default=None, metavar="A..B")
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--phi-grid", default=None, metavar="START:STEP:END")
    p.add_argument("--state", action="append", default=None,
                   help="repeatable; default: all four named states")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--jobs", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("mixing", help="SD(T) of the running average "
                                      "against uniform")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--state", default=None)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--model", choices=(MODEL_RECYCLED, MODEL_MEMORY),
                   default=None)
    _add_common(p)

    p = sub.add_parser("verify", help="run both equivalence checks over "
                                      "a grid; nonzero exit on deviation")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--d-range", default=None, metavar="A..B")
    p.add_argument("--phi-grid", default=None, metavar="START:STEP:END")
    p.add_argument("--state", action="append", default=None)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None,
                   help="deviation threshold (default 1e-10)")
    p.add_argument("--jobs", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("residue", help="TV(pbar(0; psi), pbar(2; Q psi)) "
                                       "per cycle size")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--d-range", default=None, metavar="A..B")
    p.add_argument("--state", default=None)
    _add_common(p)

    return parser


_CONFIG_KEYS = {"d", "d_range", "phi", "phi_grid", "state", "t", "t_max",
                "epsilon", "format", "out", "jobs", "model"}

#: commands whose --state is repeatable; their namespace holds a list.
_LIST_STATE_COMMANDS = {"sweep", "verify"}


def _apply_config_file(ns: argparse.Namespace):
    if ns.config is None:
        return
    try:
        with open(ns.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError("cannot read config file: %s" % exc) from None
    except json.JSONDecodeError as exc:
        raise UsageError("bad JSON in config file: %s" % exc) from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in _CONFIG_KEYS:
            raise UsageError("unknown config key %r" % key)
        if not hasattr(ns, dest):
            raise UsageError("config key %r does not apply to %r"
                             % (key, ns.command))
        if getattr(ns, dest) is None:
            if dest == "state" and ns.command in _LIST_STATE_COMMANDS \
                    and not isinstance(value, list):
                value = [value]
            setattr(ns, dest, value)


def _need(ns, attr, flag):
    value = getattr(ns, attr)
    if value is None:
        raise UsageError("missing required flag %s" % flag)
    return value


def _fallback(value, default):
    return default if value is None else value


def _single_state(ns) -> InitialState:
    return parse_state(_fallback(ns.state, "psi_a"))


def _state_list(ns) -> list:
    names = ns.state if ns.state else list(STATE_NAMES)
    return [parse_state(str(n)) for n in names]


def _d_values(ns) -> list:
    if ns.d_range is not None and ns.d is not None:
        raise UsageError("give either --d or --d-range, not both")
    if ns.d_range is not None:
        return parse_d_range(str(ns.d_range))
    if ns.d is not None:
        if ns.d < 2:
            raise UsageError("cycle size must be >= 2, got %d" % ns.d)
        return [int(ns.d)]
    raise UsageError("missing required flag --d or --d-range")


def _phi_values(ns, default=None) -> list:
    if ns.phi_grid is not None and getattr(ns, "phi", None) is not None:
        raise UsageError("give either --phi or --phi-grid, not both")
    if ns.phi_grid is not None:
        return parse_phi_grid(str(ns.phi_grid))
    if getattr(ns, "phi", None) is not None:
        return [float(ns.phi)]
    if default is not None:
        return list(default)
    raise UsageError("missing required flag --phi or --phi-grid")


def _check_d(d: int) -> int:
    if d is None:
        raise UsageError("missing required flag --d")
    if d < 2:
        raise UsageError("cycle size must be >= 2, got %d" % d)
    return int(d)


def _jobs(ns) -> int:
    jobs = ns.jobs if getattr(ns, "jobs", None) is not None else _default_jobs()
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return int(jobs)


# ---------------------------------------------------------------------------
# Commands

def cmd_evolve(ns) -> int:
    d = _check_d(ns.d)
    model = _fallback(ns.model, MODEL_RECYCLED)
    t = _need(ns, "t", "--t")
    if t < 0:
        raise UsageError("--t must be >= 0")
    init = _single_state(ns)
    config = {"command": "evolve", "model": model, "d": d,
              "state": _state_config(init), "t": t}
    if model == MODEL_RECYCLED:
        cfg = CoinConfig(_need(ns, "phi", "--phi"))
        config["phi"] = cfg.phi
    else:
        cfg = None
    state = evolve(WalkState.localized(d, init, model), t, cfg)
    dist = position_distribution(state)
    rows = [(n, float(p)) for n, p in enumerate(dist.probs)]
    write_table(Table(schema="evolve.v1", config=config,
                      columns=("n", "probability"), rows=rows),
                _fallback(ns.format, "csv"), ns.out)
    return 0


def cmd_limiting(ns) -> int:
    d = _check_d(ns.d)
    model = _fallback(ns.model, MODEL_RECYCLED)
    init = _single_state(ns)
    config = {"command": "limiting", "model": model, "d": d,
              "state": _state_config(init)}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", spectral.DegenerateClusterWarning)
        if model == MODEL_RECYCLED:
            cfg = CoinConfig(_need(ns, "phi", "--phi"))
            config["phi"] = cfg.phi
            dist = spectral.limiting_distribution(cfg, d, init.coin4)
        else:
            dist = spectral.limiting_distribution_memory(d, init.coin4)
    warned = False
    for w in caught:
        if issubclass(w.category, spectral.DegenerateClusterWarning):
            warned = True
            _diag("warning: %s" % w.message)
    tv = analysis.tv_from_uniform(dist)
    rows = [(n, float(p), warned) for n, p in enumerate(dist.probs)]
    write_table(Table(schema="limiting.v1", config=config,
                      columns=("n", "pbar", "warned"), rows=rows,
                      meta={"tv_from_uniform": tv}),
                _fallback(ns.format, "csv"), ns.out)
    return 0


def cmd_sweep(ns) -> int:
    d_values = _d_values(ns)
    phi_values = _phi_values(ns)
    states = _state_list(ns)
    epsilon = _fallback(ns.epsilon, 1e-6)
    grid = analysis.SweepGrid(d_values=tuple(d_values),
                              phi_values=tuple(phi_values),
                              states=tuple(states), epsilon=epsilon)
    records = analysis.sweep(grid, jobs=_jobs(ns), keep_probs=False)
    config = {"command": "sweep", "d_values": list(grid.d_values),
              "phi_values": list(grid.phi_values),
              "states": [_state_config(s) for s in states],
              "epsilon": epsilon}
    rows = []
    failures = 0
    for r in records:
        if r.error is not None:
            failures += 1
            _diag("cell d=%d phi=%g state=%s failed: %s"
                  % (r.d, r.phi, r.state, r.error))
        rows.append((r.d, r.phi, r.state, r.tv_from_uniform,
                     r.classified_uniform, r.boundary, r.warned,
                     r.d_mod_4, r.divisible_by_12, r.error))
    write_table(Table(schema="sweep.v1", config=config,
                      columns=("d", "phi", "state", "tv_from_uniform",
                               "uniform", "boundary", "warned", "d_mod_4",
                               "divisible_by_12", "error"),
                      rows=rows, meta={"cells": len(rows)}),
                _fallback(ns.format, "csv"), ns.out)
    if failures:
        _diag("%d of %d sweep cells failed" % (failures, len(rows)))
        return 1
    return 0


def cmd_mixing(ns) -> int:
    d = _check_d(ns.d)
    model = _fallback(ns.model, MODEL_RECYCLED)
    t_max = _need(ns, "t_max", "--t-max")
    if t_max < 1:
        raise UsageError("--t-max must be >= 1")
    init = _single_state(ns)
    config = {"command": "mixing", "model": model, "d": d,
              "state": _state_config(init), "t_max": t_max}
    if model == MODEL_RECYCLED:
        phi = CoinConfig(_need(ns, "phi", "--phi")).phi
        config["phi"] = phi
    else:
        phi = None
    curve = analysis.mixing_curve(d, phi, init, t_max, model=model)
    rows = list(zip(curve.horizons, curve.sd))
    write_table(Table(schema="mixing.v1", config=config,
                      columns=("T", "sd"), rows=rows),
                _fallback(ns.format, "csv"), ns.out)
    return 0


def _verify_cell(task):
    check, d, phi, label, coin4, t_max, position = task
    psi = np.asarray(coin4, dtype=np.complex128)
    if check == "theorem1":
        dev = analysis.theorem1_max_deviation(d, t_max, phi, psi, position)
    else:
        dev = analysis.theorem2_max_deviation(d, t_max, psi, position)
    return dev


def cmd_verify(ns) -> int:
    d_values = _d_values(ns) if (ns.d is not None or ns.d_range is not None) \
        else list(range(3, 13))
    phi_values = parse_phi_grid(str(ns.phi_grid)) if ns.phi_grid is not None \
        else list(VERIFY_PHI_DEFAULT)
    states = _state_list(ns)
    t_max = _fallback(ns.t_max, 40)
    if t_max < 0:
        raise UsageError("--t-max must be >= 0")
    threshold = _fallback(ns.epsilon, THEOREM_TOL)
    if threshold <= 0:
        raise UsageError("--epsilon must be positive")
    items = [(s.name or "custom", tuple(complex(c) for c in s.coin4))
             for s in states]
    tasks = [("theorem1", d, phi, label, coin4, t_max, 0)
             for d in d_values for phi in phi_values
             for label, coin4 in items]
    tasks += [("theorem2", d, None, label, coin4, t_max, 0)
              for d in d_values for label, coin4 in items]
    jobs = _jobs(ns)
    if jobs == 1:
        devs = [_verify_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            devs = list(pool.map(_verify_cell, tasks, chunksize=4))
    config = {"command": "verify", "d_values": d_values,
              "phi_values": phi_values,
              "states": [_state_config(s) for s in states],
              "t_max": t_max, "threshold": threshold}
    rows = []
    failures = 0
    for (check, d, phi, label, _, _, _), dev in zip(tasks, devs):
        ok = dev < threshold
        failures += 0 if ok else 1
        rows.append((check, d, phi, label, dev, ok))
    write_table(Table(schema="verify.v1", config=config,
                      columns=("check", "d", "phi", "state",
                               "max_deviation", "pass"),
                      rows=rows, meta={"failures": failures}),
                _fallback(ns.format, "csv"), ns.out)
    if failures:
        _diag("%d of %d verification cells exceeded %g"
              % (failures, len(rows), threshold))
        return 1
    return 0


def cmd_residue(ns) -> int:
    d_values = _d_values(ns)
    init = _single_state(ns)
    config = {"command": "residue", "d_values": d_values,
              "state": _state_config(init)}
    curve = analysis.residue_distance_curve(d_values, init.coin4)
    rows = [(d, r, tv) for d, r, tv in curve]
    write_table(Table(schema="residue.v1", config=config,
                      columns=("d", "d_mod_4", "tv"), rows=rows),
                _fallback(ns.format, "csv"), ns.out)
    return 0


_COMMANDS = {
    "evolve": cmd_evolve,
    "limiting": cmd_limiting,
    "sweep": cmd_sweep,
    "mixing": cmd_mixing,
    "verify": cmd_verify,
    "residue": cmd_residue,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        _apply_config_file(ns)
        return _COMMANDS[ns.command](ns)
    except UsageError as exc:
        _diag("error: %s" % exc)
        return 2
    except (ValueError, OSError) as exc:
        _diag("error: %s" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
