"""Command-line front end.

Exit codes: 0 success, 1 bad configuration or arguments, 2 volumes or
shifts outside the feasible region (a routing flow went negative),
3 verification failure or numerical breakdown.
"""
from __future__ import annotations

import argparse
import re
import sys
from typing import Sequence

import numpy as np

from . import documents as docs
from .errors import (
    ChainlifeError,
    ConfigError,
    NegativeFlow,
)
from .oracle import formulate, solve as lp_solve
from .perturbed import (
    PerturbedNetwork,
    numeric_d_interval,
    solve_equal_energy,
    stability_bounds_d,
)
from .regular import (
    RegularNetwork,
    check_q_constraints,
    flow_closed_form,
    node_energy_closed_form,
    q_i_max,
    q_n_min,
    raw_flows,
    stability_region_Q_check,
)

VERIFY_TOL = 1e-7
FLOW_TOL = 1e-9

_PARAM_RE = re.compile(r"^([Qd])(\d+)$")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 1)."""

    def error(self, message: str):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="chainlife", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler, help_text: str):
        cmd = sub.add_parser(name, help=help_text)
        cmd.set_defaults(handler=handler)
        cmd.add_argument("--input", help="network or suite config (JSON file)")
        cmd.add_argument("--output", help="write result here instead of stdout")
        cmd.add_argument("--format", choices=("json", "csv"), default="json")
        return cmd

    add("solve-regular", _cmd_solve_regular, "equal-energy flows on an evenly spaced chain")
    add("solve-perturbed", _cmd_solve_perturbed, "equal-energy flows with node position shifts")

    q_cmd = add("stability-q", _cmd_stability_q, "admissible volume range per node")
    q_cmd.add_argument("--nodes", default="all", help="comma list of node indices, or 'all'")

    d_cmd = add("stability-d", _cmd_stability_d, "admissible single-node shift intervals")
    d_cmd.add_argument("--nodes", default="all", help="comma list of node indices, or 'all'")

    v_cmd = add("verify", _cmd_verify, "check closed-form flows against the reference optimizer")
    v_cmd.add_argument("--seed", type=int, default=0, help="seed for randomized volume draws")

    s_cmd = add("sweep", _cmd_sweep, "scan one volume or shift over a grid")
    s_cmd.add_argument("--param", required=True, help="parameter name, e.g. Q2 or d1")
    s_cmd.add_argument("--grid", required=True, help="LO:HI:STEP, inclusive of HI")
    return parser


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _require_input(args) -> str:
    if not args.input:
        raise ConfigError(f"{args.command} requires --input")
    return args.input


def _require_regular(net) -> RegularNetwork:
    if isinstance(net, RegularNetwork):
        return net
    raise ConfigError("this command expects an unshifted chain; got nonzero shifts")


def _parse_nodes(spec: str, n: int) -> list[int]:
    if spec == "all":
        return list(range(1, n + 1))
    try:
        nodes = [int(piece) for piece in spec.split(",") if piece.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --nodes value {spec!r}") from exc
    if not nodes:
        raise ConfigError("--nodes selected nothing")
    for i in nodes:
        if not 1 <= i <= n:
            raise ConfigError(f"node {i} outside 1..{n}")
    return nodes


def _parse_grid(spec: str) -> list[float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError("--grid must be LO:HI:STEP")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad --grid value {spec!r}") from exc
    if step <= 0 or hi < lo:
        raise ConfigError("--grid needs STEP > 0 and HI >= LO")
    values = []
    k = 0
    eps = step * 1e-9
    while True:
        value = lo + k * step
        if value > hi + eps:
            break
        values.append(min(value, hi))
        k += 1
    return values


def _out_of_region_message(net, exc: NegativeFlow) -> str:
    """Name the violated flow and the volume boundary that was crossed."""
    j, target = exc.component
    lines = [str(exc)]
    if isinstance(net, RegularNetwork) and target == j - 1 and j >= 2:
        if j == net.n:
            bound = q_n_min(net)
            lines.append(
                f"volume Q_{j} = {net.volumes[j - 1]:.6g} is below the minimum "
                f"{bound:.9g} for this chain (Q_{j}^min)"
            )
        else:
            try:
                bound = q_i_max(net, j - 1)
                lines.append(
                    f"volume Q_{j - 1} = {net.volumes[j - 2]:.6g} exceeds the maximum "
                    f"{bound:.9g} for this chain (Q_{j - 1}^max)"
                )
            except ChainlifeError:
                pass
    elif isinstance(net, PerturbedNetwork):
        lines.append(
            "the configured shifts leave the stability region; see stability-d "
            "for admissible single-node intervals"
        )
    return "; ".join(lines)


def _cmd_solve_regular(args) -> int:
    net = _require_regular(docs.load_network(_require_input(args)))
    try:
        sol = flow_closed_form(net)
    except NegativeFlow as exc:
        print(f"error: {_out_of_region_message(net, exc)}", file=sys.stderr)
        return 2
    if args.format == "csv":
        _write(args, docs.solution_csv(sol))
    else:
        _write(args, docs.json_dumps(docs.solution_document(sol)))
    return 0


def _cmd_solve_perturbed(args) -> int:
    net = docs.as_perturbed(docs.load_network(_require_input(args)))
    try:
        sol = solve_equal_energy(net)
    except NegativeFlow as exc:
        print(f"error: {_out_of_region_message(net, exc)}", file=sys.stderr)
        return 2
    if args.format == "csv":
        _write(args, docs.solution_csv(sol))
    else:
        _write(args, docs.json_dumps(docs.solution_document(sol)))
    return 0


def _cmd_stability_q(args) -> int:
    net = _require_regular(docs.load_network(_require_input(args)))
    nodes = _parse_nodes(args.nodes, net.n)
    rows: list[tuple[int, float | None, float | None]] = []
    for i in nodes:
        if i == net.n:
            rows.append((i, q_n_min(net), None))
        else:
            rows.append((i, 0.0, q_i_max(net, i)))
    ok = check_q_constraints(net)
    unit_region = stability_region_Q_check(net) if net.n >= 3 else None
    if args.format == "csv":
        _write(args, docs.stability_q_csv(rows))
    else:
        _write(args, docs.json_dumps(docs.stability_q_document(rows, ok, unit_region)))
    return 0


def _cmd_stability_d(args) -> int:
    net = _require_regular(docs.load_network(_require_input(args)))
    if any(q != 1.0 for q in net.volumes):
        raise ConfigError("stability-d is defined for unit volumes")
    nodes = _parse_nodes(args.nodes, net.n)
    rows = []
    for i in nodes:
        envelope = stability_bounds_d(net.n, i)
        numeric = numeric_d_interval(
            PerturbedNetwork(net.n, (0.0,) * net.n, net.volumes, net.series), i
        )
        rows.append((i, envelope, numeric))
    if args.format == "csv":
        _write(args, docs.stability_d_csv(rows))
    else:
        _write(args, docs.json_dumps(docs.stability_d_document(rows, net.series)))
    return 0


# ---------------------------------------------------------------------------
# verify

def _load_suite(path: str | None) -> dict:
    if path is None:
        return {
            "n_values": [2, 3, 4, 5, 6, 7, 8],
            "exponents": [1.0, 1.5, 2.0, 3.0],
            "volumes": "unit",
            "random_q": 0,
        }
    import json as _json

    try:
        with open(path, encoding="utf-8") as handle:
            doc = _json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except _json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("suite config must be an object")
    doc.setdefault("n_values", [2, 3, 4, 5, 6, 7, 8])
    doc.setdefault("exponents", [1.0, 1.5, 2.0, 3.0])
    doc.setdefault("volumes", "unit")
    doc.setdefault("random_q", 0)
    return doc


def _random_unit_region_volumes(rng: np.random.Generator, n: int) -> tuple[float, ...]:
    # Q_i >= 1 with total under 1.5 n keeps the draw in the always-feasible box
    while True:
        q = 1.0 + rng.uniform(0.0, 0.5, size=n)
        if q.sum() < 1.5 * n - 1e-9:
            return tuple(float(v) for v in q)


def _verify_instance(n: int, series, volumes: tuple[float, ...]) -> dict:
    from .cost import series_to_terms

    net = RegularNetwork(n, volumes, series)
    lp = lp_solve(formulate(net))
    row = {
        "n": n,
        "series": series_to_terms(series),
        "volumes": [float(v) for v in volumes],
        "lp": lp.value,
    }
    try:
        sol = flow_closed_form(net)
    except NegativeFlow:
        row.update(closed_form=None, gap=None, status="outside_region")
        return row
    gap = abs(sol.common_energy - lp.value)
    row.update(
        closed_form=sol.common_energy,
        gap=gap,
        status="optimal" if gap <= VERIFY_TOL else "suboptimal",
    )
    return row


def _cmd_verify(args) -> int:
    suite = _load_suite(args.input)
    rng = np.random.default_rng(args.seed)
    from .cost import single_exponent_series

    rows = []
    for n in suite["n_values"]:
        if not isinstance(n, int) or n < 1:
            raise ConfigError("suite n_values must be positive integers")
        for a in suite["exponents"]:
            series = single_exponent_series(float(a))
            cases: list[tuple[float, ...]] = []
            volumes = suite["volumes"]
            if volumes == "unit":
                cases.append((1.0,) * n)
            elif isinstance(volumes, list):
                for vec in volumes:
                    if not isinstance(vec, list) or len(vec) != n:
                        raise ConfigError(
                            f"suite volume vectors must have length n={n}"
                        )
                    cases.append(tuple(float(v) for v in vec))
            else:
                raise ConfigError("suite volumes must be 'unit' or a list of vectors")
            for _ in range(int(suite["random_q"])):
                cases.append(_random_unit_region_volumes(rng, n))
            for q in cases:
                rows.append(_verify_instance(n, series, q))
    if args.format == "csv":
        _write(args, docs.verify_csv(rows))
    else:
        _write(args, docs.json_dumps(docs.verify_document(rows, VERIFY_TOL)))
    return 0 if all(row["status"] == "optimal" for row in rows) else 3


# ---------------------------------------------------------------------------
# sweep

def _sweep_point(net, kind: str, index: int, value: float):
    if kind == "Q":
        volumes = list(net.volumes)
        volumes[index - 1] = value
        if isinstance(net, RegularNetwork):
            probe = RegularNetwork(net.n, tuple(volumes), net.series)
            flows = raw_flows(probe)
            min_flow = min(flows.values())
            energy = node_energy_closed_form(probe) if min_flow >= -FLOW_TOL else None
            return energy, min_flow
        probe = PerturbedNetwork(net.n, net.shifts, tuple(volumes), net.series)
    else:
        shifts = list(docs.as_perturbed(net).shifts)
        shifts[index - 1] = value
        probe = PerturbedNetwork(net.n, tuple(shifts), net.volumes, net.series)
    sol = solve_equal_energy(probe, check_flows=False)
    min_flow = sol.flow.min_entry()
    energy = sol.common_energy if min_flow >= -FLOW_TOL else None
    return energy, min_flow


def _cmd_sweep(args) -> int:
    net = docs.load_network(_require_input(args))
    match = _PARAM_RE.match(args.param)
    if match is None:
        raise ConfigError(f"--param must look like Q2 or d1, got {args.param!r}")
    kind, index_text = match.groups()
    index = int(index_text)
    if not 1 <= index <= net.n:
        raise ConfigError(f"parameter index {index} outside 1..{net.n}")
    grid = _parse_grid(args.grid)
    if kind == "Q" and any(v <= 0 for v in grid):
        raise ConfigError("volume grid values must be positive")
    if kind == "d" and any(abs(v) >= 1 for v in grid):
        raise ConfigError("shift grid values must stay inside (-1, 1)")
    rows = []
    for value in grid:
        energy, min_flow = _sweep_point(net, kind, index, value)
        rows.append((value, energy, min_flow))
    if args.format == "csv":
        _write(args, docs.sweep_csv(rows))
    else:
        _write(args, docs.json_dumps(docs.sweep_document(rows)))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NegativeFlow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ChainlifeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
