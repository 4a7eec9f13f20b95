"""Command-line interface.

Subcommands::

    riemann   sample one (valve) Riemann solution and describe its wave fan
    classify  regime report of a pair for the electronic valve
    sweep     regime map over a (mu, nu) grid with one datum fixed
    simulate  Godunov run from a JSON configuration

Exit codes: 0 success, 2 usage or configuration error, 3 domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .classification import classify
from .godunov_sim import Boundary, Grid1D, SimConfig, SimulationError, piecewise_grid, run
from .riemann_classic import sample, traces
from .state_space import DomainError, GasParams, State
from .valve_coupling import solve_coupled, valve_from_config, valve_to_config

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3

SNAPSHOT_HEADER = ["t", "x", "rho", "q", "v", "p", "mu", "nu"]


class UsageError(Exception):
    """Malformed arguments or configuration (exit code 2)."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_state(text: str) -> State:
    try:
        rho, q = (float(s) for s in text.split(","))
    except ValueError:
        raise UsageError(f"expected RHO,Q but got {text!r}") from None
    return State(rho, q)


def _parse_range(text: str, with_count: bool) -> tuple[float, ...]:
    parts = text.split(":")
    try:
        if with_count:
            lo, hi, n = parts
            return float(lo), float(hi), int(n)
        lo, hi = parts
        return float(lo), float(hi)
    except ValueError:
        shape = "LO:HI:N" if with_count else "LO:HI"
        raise UsageError(f"expected {shape} but got {text!r}") from None


def _parse_valve(text: str | None):
    if text is None:
        return None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--valve is not valid JSON: {exc}") from None
    try:
        return valve_from_config(spec)
    except DomainError:
        raise
    except ValueError as exc:
        raise UsageError(f"--valve: {exc}") from None


def _state_row(t: float, x: float, u: State, g: GasParams) -> list[str]:
    return [fmt(v) for v in (t, x, u.rho, u.q, u.v, g.pressure(u.rho), u.mu, u.nu(g))]


def _write_csv(rows: list[list[str]], header: list[str], path: str | Path | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_riemann(args: argparse.Namespace) -> int:
    g = GasParams(args.a)
    u_l, u_r = _parse_state(args.left), _parse_state(args.right)
    model = _parse_valve(args.valve)
    lo, hi = _parse_range(args.xrange, with_count=False)
    if not args.t > 0.0:
        raise UsageError(f"--t must be positive, got {args.t!r}")
    if args.samples < 1 or not hi >= lo:
        raise UsageError("--samples must be >= 1 and --xrange must satisfy LO <= HI")

    fan = solve_coupled(u_l, u_r, model, g)
    xs = np.linspace(lo, hi, args.samples)
    rows = [_state_row(args.t, x, sample(fan, x / args.t, g), g) for x in xs]
    _write_csv(rows, SNAPSHOT_HEADER, args.out)

    u_minus, u_plus = traces(fan, g)
    d = fan.decision
    doc = {
        "a": g.a,
        "t": args.t,
        "left": list(u_l.as_tuple()),
        "right": list(u_r.as_tuple()),
        "valve": valve_to_config(model),
        "mode": None if d is None else d.mode.value,
        "q_m": None if d is None or not d.active else d.q_m,
        "gap": None if d is None or math.isnan(d.gap) else d.gap,
        "waves": [w.to_dict() for w in fan.waves],
        "traces": {"minus": list(u_minus.as_tuple()), "plus": list(u_plus.as_tuple())},
    }
    fan_path = args.fan
    if fan_path is None and args.out is not None:
        fan_path = str(Path(args.out).with_suffix(".json"))
    if fan_path is not None:
        Path(fan_path).write_text(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stderr.write(json.dumps(doc) + "\n")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    g = GasParams(args.a)
    if not args.M > 0.0:
        raise UsageError(f"--M must be positive, got {args.M!r}")
    report = classify(_parse_state(args.left), _parse_state(args.right), args.M, g)
    print(json.dumps(report.to_dict()))
    return EXIT_OK


def regime_label(report) -> str:
    if report.open_active == "Active":
        return f"Active/{report.influence}"
    return f"Open/{report.o_sub}"


def cmd_sweep(args: argparse.Namespace) -> int:
    g = GasParams(args.a)
    if not args.M > 0.0:
        raise UsageError(f"--M must be positive, got {args.M!r}")
    side, _, value = args.slice.partition("=")
    if side not in ("left", "right") or not value:
        raise UsageError(f"--slice must be left=RHO,Q or right=RHO,Q, got {args.slice!r}")
    fixed = _parse_state(value)
    mu_lo, mu_hi, n_mu = _parse_range(args.mu, with_count=True)
    nu_lo, nu_hi, n_nu = _parse_range(args.nu, with_count=True)
    if n_mu < 1 or n_nu < 1:
        raise UsageError("grid resolution must be at least 1 in both directions")
    rows = []
    for mu in np.linspace(mu_lo, mu_hi, n_mu):
        for nu in np.linspace(nu_lo, nu_hi, n_nu):
            other = State.from_mu_nu(float(mu), float(nu), g)
            pair = (fixed, other) if side == "left" else (other, fixed)
            rep = classify(*pair, args.M, g)
            rows.append([fmt(mu), fmt(nu), regime_label(rep), str(rep.coherent).lower(), str(rep.consistent).lower()])
    _write_csv(rows, ["mu", "nu", "regime", "coherent", "consistent"], args.out)
    return EXIT_OK


_SIM_KEYS = {"a", "cfl", "t_end", "boundary", "valve", "cells", "n_cells", "output_every", "out"}
_SIM_REQUIRED = {"t_end", "cells", "n_cells", "out"}


def _load_sim_config(path: str) -> tuple[Grid1D, SimConfig, Path]:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    unknown = sorted(set(raw) - _SIM_KEYS)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    missing = sorted(_SIM_REQUIRED - set(raw))
    if missing:
        raise UsageError(f"missing config key(s): {', '.join(missing)}")

    def number(key: str, default: float | None = None) -> float | None:
        val = raw.get(key, default)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise UsageError(f"config key {key!r} must be a number, got {val!r}")
        return float(val)

    n_cells = raw["n_cells"]
    if isinstance(n_cells, bool) or not isinstance(n_cells, int) or n_cells < 1:
        raise UsageError(f"config key 'n_cells' must be a positive integer, got {n_cells!r}")
    try:
        boundary = Boundary(raw.get("boundary", "outflow"))
    except ValueError:
        raise UsageError(f"config key 'boundary' must be 'outflow' or 'reflective', got {raw.get('boundary')!r}") from None
    try:
        valve = valve_from_config(raw.get("valve"))
    except DomainError:
        raise
    except ValueError as exc:
        raise UsageError(f"config key 'valve': {exc}") from None

    cells = raw["cells"]
    if not isinstance(cells, list) or not cells:
        raise UsageError("config key 'cells' must be a non-empty list")
    pieces = []
    for i, c in enumerate(cells):
        if not isinstance(c, dict) or set(c) != {"x_lo", "x_hi", "rho", "q"}:
            raise UsageError(f"config key 'cells[{i}]' must have exactly x_lo, x_hi, rho, q")
        if not all(isinstance(c[k], (int, float)) and not isinstance(c[k], bool) for k in c):
            raise UsageError(f"config key 'cells[{i}]' values must be numbers")
        pieces.append((float(c["x_lo"]), float(c["x_hi"]), float(c["rho"]), float(c["q"])))
    x_min = min(p[0] for p in pieces)
    x_max = max(p[1] for p in pieces)

    g = GasParams(number("a", 1.0))
    try:
        cfg = SimConfig(
            t_end=number("t_end"),
            g=g,
            cfl=number("cfl", 0.5),
            boundary=boundary,
            valve=valve,
            output_every=number("output_every"),
        )
    except DomainError as exc:
        raise UsageError(f"invalid config: {exc}") from None
    try:
        grid = piecewise_grid(x_min, x_max, n_cells, pieces)
    except DomainError as exc:
        raise UsageError(f"config key 'cells': {exc}") from None
    if valve is not None and grid.valve_interface is None:
        raise UsageError("config key 'valve' given but the domain does not contain x = 0 in its interior")
    if not isinstance(raw["out"], str):
        raise UsageError("config key 'out' must be a directory path")
    return grid, cfg, Path(raw["out"])


def cmd_simulate(args: argparse.Namespace) -> int:
    grid, cfg, out = _load_sim_config(args.config)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[list[str]] = []
    g = cfg.g

    def sink(snap: Grid1D) -> None:
        a2 = g.a * g.a
        for x, (rho, q) in zip(snap.centers(), snap.cells):
            v = q / rho
            rows.append([fmt(s) for s in (snap.time, x, rho, q, v, a2 * rho, math.log(rho), v / g.a)])

    result = run(grid, cfg, sink)
    _write_csv(rows, SNAPSHOT_HEADER, out / "snapshots.csv")
    events = [[fmt(e.t), e.mode, fmt(e.q_m), fmt(e.gap)] for e in result.events]
    _write_csv(events, ["t", "mode", "q_m", "gap"], out / "valve_events.csv")
    print(json.dumps(result.mass_report()))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gasvalve", description="Isothermal pipe flow with pressure valves.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("riemann", help="sample a Riemann solution at time t")
    r.add_argument("--left", required=True, metavar="RHO,Q")
    r.add_argument("--right", required=True, metavar="RHO,Q")
    r.add_argument("--a", type=float, default=1.0)
    r.add_argument("--valve", metavar="JSON", help='e.g. {"type": "electronic", "M": 1.5}')
    r.add_argument("--t", type=float, default=1.0)
    r.add_argument("--xrange", default="-5:5", metavar="LO:HI")
    r.add_argument("--samples", type=int, default=201)
    r.add_argument("--out", help="CSV path (stdout if omitted)")
    r.add_argument("--fan", help="fan JSON path (defaults to OUT with a .json suffix)")
    r.set_defaults(func=cmd_riemann)

    c = sub.add_parser("classify", help="regime report for the electronic valve")
    c.add_argument("--left", required=True, metavar="RHO,Q")
    c.add_argument("--right", required=True, metavar="RHO,Q")
    c.add_argument("--a", type=float, default=1.0)
    c.add_argument("--M", type=float, required=True)
    c.set_defaults(func=cmd_classify)

    s = sub.add_parser("sweep", help="regime map over a (mu, nu) grid")
    s.add_argument("--slice", required=True, metavar="left=RHO,Q|right=RHO,Q")
    s.add_argument("--mu", required=True, metavar="LO:HI:N")
    s.add_argument("--nu", required=True, metavar="LO:HI:N")
    s.add_argument("--M", type=float, required=True)
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--out", help="CSV path (stdout if omitted)")
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("simulate", help="Godunov simulation from a JSON config")
    m.add_argument("--config", required=True)
    m.set_defaults(func=cmd_simulate)
    return p


_VALUE_FLAGS = ("--mu", "--nu", "--xrange", "--left", "--right", "--slice")


def _attach_values(argv: Sequence[str]) -> list[str]:
    """Glue ``--mu -2:2:5`` into ``--mu=-2:2:5`` so argparse accepts leading minus signs."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_attach_values(sys.argv[1:] if argv is None else argv))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gasvalve {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, SimulationError) as exc:
        print(f"gasvalve {args.command}: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN

