"""Configuration parsing and result-document serialization.

JSON output formats reals with 17 significant digits (exact float round
trip); CSV output uses 12.  Both writers are deterministic: same inputs,
same bytes.
"""
from __future__ import annotations

import json
import math
from typing import Any, Sequence

from .cost import CostSeries, build_cost_series, series_to_terms
from .errors import ChainlifeError, ConfigError
from .perturbed import PerturbedNetwork, StabilityInterval
from .regular import EqualEnergySolution, RegularNetwork

JSON_DIGITS = 17
CSV_DIGITS = 12


def _real(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(value)


def parse_cost(doc: Any) -> CostSeries:
    if not isinstance(doc, dict):
        raise ConfigError("cost must be an object with a terms list")
    terms = doc.get("terms")
    if not isinstance(terms, list) or not terms:
        raise ConfigError("cost.terms must be a nonempty list")
    pairs = []
    for k, term in enumerate(terms):
        if not isinstance(term, dict) or "lambda" not in term or "exponent" not in term:
            raise ConfigError(f"cost.terms[{k}] needs lambda and exponent")
        pairs.append(
            (_real(term["lambda"], f"cost.terms[{k}].lambda"),
             _real(term["exponent"], f"cost.terms[{k}].exponent"))
        )
    auto = doc.get("auto_normalize", False)
    if not isinstance(auto, bool):
        raise ConfigError("cost.auto_normalize must be a boolean")
    try:
        return build_cost_series(pairs, auto_normalize=auto)
    except ChainlifeError as exc:
        raise ConfigError(f"invalid cost series: {exc}") from exc


def parse_network(doc: Any) -> RegularNetwork | PerturbedNetwork:
    """Network from a config document; shifts of all zeros mean a regular chain."""
    if not isinstance(doc, dict):
        raise ConfigError("network config must be an object")
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("n must be a positive integer")
    volumes = doc.get("volumes")
    if not isinstance(volumes, list) or len(volumes) != n:
        raise ConfigError(f"volumes must be a list of {n} numbers")
    q = tuple(_real(v, f"volumes[{k}]") for k, v in enumerate(volumes))
    series = parse_cost(doc.get("cost"))
    shifts = doc.get("shifts")
    if shifts is not None and (not isinstance(shifts, list) or len(shifts) != n):
        raise ConfigError(f"shifts must be a list of {n} numbers")
    try:
        if shifts is None or all(s == 0 for s in shifts):
            return RegularNetwork(n, q, series)
        d = tuple(_real(s, f"shifts[{k}]") for k, s in enumerate(shifts))
        return PerturbedNetwork(n, d, q, series)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_network(path: str) -> RegularNetwork | PerturbedNetwork:
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_network(doc)


def as_perturbed(net: RegularNetwork | PerturbedNetwork) -> PerturbedNetwork:
    if isinstance(net, PerturbedNetwork):
        return net
    return PerturbedNetwork(net.n, (0.0,) * net.n, net.volumes, net.series)


# ---------------------------------------------------------------------------
# serialization

def format_real(value: float, digits: int = JSON_DIGITS) -> str:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError("documents only carry finite reals")
    return format(value, f".{digits}g")


def json_dumps(doc: Any) -> str:
    """Deterministic JSON text with fixed-precision reals and a trailing newline."""
    pieces: list[str] = []

    def emit(value: Any, indent: int) -> None:
        pad = "  " * indent
        if isinstance(value, dict):
            if not value:
                pieces.append("{}")
                return
            pieces.append("{\n")
            for k, (key, item) in enumerate(value.items()):
                pieces.append(f"{pad}  {json.dumps(str(key))}: ")
                emit(item, indent + 1)
                pieces.append(",\n" if k < len(value) - 1 else "\n")
            pieces.append(pad + "}")
        elif isinstance(value, (list, tuple)):
            seq = list(value)
            if not seq:
                pieces.append("[]")
                return
            pieces.append("[\n")
            for k, item in enumerate(seq):
                pieces.append(pad + "  ")
                emit(item, indent + 1)
                pieces.append(",\n" if k < len(seq) - 1 else "\n")
            pieces.append(pad + "]")
        elif isinstance(value, bool):
            pieces.append("true" if value else "false")
        elif isinstance(value, int):
            pieces.append(str(value))
        elif isinstance(value, float):
            pieces.append(format_real(value))
        elif isinstance(value, str):
            pieces.append(json.dumps(value))
        elif value is None:
            pieces.append("null")
        else:
            raise TypeError(f"cannot serialize {type(value).__name__}")

    emit(doc, 0)
    return "".join(pieces) + "\n"


def csv_text(header: str, rows: Sequence[Sequence[Any]]) -> str:
    """Comma-separated text; reals carry 12 significant digits."""
    lines = [header]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, bool):
                cells.append("true" if cell else "false")
            elif isinstance(cell, float):
                cells.append(format_real(cell, CSV_DIGITS))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def solution_document(sol: EqualEnergySolution) -> dict:
    return {
        "flows": [
            {"from": i, "to": j, "amount": value} for (i, j), value in sol.flow.items()
        ],
        "node_energies": [float(e) for e in sol.node_energies],
        "common_energy": float(sol.common_energy),
    }


def solution_csv(sol: EqualEnergySolution) -> str:
    rows = [(i, j, value) for (i, j), value in sol.flow.items()]
    return csv_text("from,to,amount", rows)


def lp_solution_document(lp_value: float, flow_items, iterations: int) -> dict:
    return {
        "flows": [{"from": i, "to": j, "amount": v} for (i, j), v in flow_items],
        "objective": float(lp_value),
        "iterations": int(iterations),
    }


def stability_d_document(
    rows: Sequence[tuple[int, tuple[float, float], StabilityInterval]],
    series: CostSeries,
) -> list[dict]:
    return [
        {
            "node": node,
            "envelope": [envelope[0], envelope[1]],
            "numeric": [numeric.lo, numeric.hi],
            "series": series_to_terms(series),
        }
        for node, envelope, numeric in rows
    ]


def stability_d_csv(
    rows: Sequence[tuple[int, tuple[float, float], StabilityInterval]]
) -> str:
    flat = [
        (node, envelope[0], envelope[1], numeric.lo, numeric.hi)
        for node, envelope, numeric in rows
    ]
    return csv_text("node,env_lo,env_hi,num_lo,num_hi", flat)


def stability_q_document(
    rows: Sequence[tuple[int, float | None, float | None]],
    constraints_ok: bool,
    unit_region: bool | None,
) -> dict:
    return {
        "nodes": [
            {"node": node, "q_min": lo, "q_max": hi} for node, lo, hi in rows
        ],
        "q_constraints_ok": constraints_ok,
        "unit_region": unit_region,
    }


def stability_q_csv(rows: Sequence[tuple[int, float | None, float | None]]) -> str:
    flat = [
        (node, "-inf" if lo is None else lo, "inf" if hi is None else hi)
        for node, lo, hi in rows
    ]
    return csv_text("node,q_min,q_max", flat)


def sweep_document(rows: Sequence[tuple[float, float | None, float]]) -> list[dict]:
    return [
        {
            "param": value,
            "common_energy": energy,
            "outside": energy is None,
            "min_flow": min_flow,
        }
        for value, energy, min_flow in rows
    ]


def sweep_csv(rows: Sequence[tuple[float, float | None, float]]) -> str:
    flat = [
        (value, "outside" if energy is None else energy, min_flow)
        for value, energy, min_flow in rows
    ]
    return csv_text("param,common_energy,min_flow", flat)


def verify_document(rows: Sequence[dict], tol: float) -> dict:
    gaps = [row["gap"] for row in rows if row["gap"] is not None]
    return {
        "tolerance": tol,
        "instances": list(rows),
        "max_gap": max(gaps) if gaps else 0.0,
        "all_optimal": all(row["status"] == "optimal" for row in rows),
    }


def verify_csv(rows: Sequence[dict]) -> str:
    flat = []
    for row in rows:
        series = ";".join(
            f"{term['lambda']:.12g}*s^{term['exponent']:.12g}" for term in row["series"]
        )
        flat.append(
            (
                row["n"],
                series,
                "" if row["closed_form"] is None else format_real(row["closed_form"], CSV_DIGITS),
                format_real(row["lp"], CSV_DIGITS),
                "" if row["gap"] is None else format_real(row["gap"], CSV_DIGITS),
                row["status"],
            )
        )
    return csv_text("n,series,closed_form,lp,gap,status", flat)
