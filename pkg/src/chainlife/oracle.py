"""Minimax-energy linear program used as independent ground truth.

The closed-form solvers claim to minimize the worst per-node energy.  This
module states that claim as a plain linear program over all directed flows
(epigraph variable t bounding every node's energy) and solves it with a
self-contained dense simplex.  Nothing here reuses the closed forms, so
agreement between the two routes is meaningful evidence.

The simplex is deliberately boring: bounded tableau, Bland's rule for both
the entering and the leaving choice, fixed pivot tolerance.  That trades
speed for determinism and for immunity to cycling, which is the right trade
at the instance sizes this package targets.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .cost import transmission_cost
from .errors import NumericalStall
from .validate import FlowMatrix, check_conservation

PIVOT_TOL = 1e-11
DEFAULT_VERIFY_TOL = 1e-7
FLOW_FEAS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LpInstance:
    """One minimax routing problem: volumes, admissible arcs, and arc costs."""

    n: int
    volumes: tuple[float, ...]
    pairs: tuple[tuple[int, int], ...]
    costs: np.ndarray


@dataclass(frozen=True)
class LpSolution:
    value: float
    flow: FlowMatrix
    iterations: int


class VerdictStatus(Enum):
    OPTIMAL = "optimal"
    SUBOPTIMAL = "suboptimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Verdict:
    status: VerdictStatus
    max_energy: float
    optimum: float | None
    gap: float | None


def chain_support_pairs(n: int) -> tuple[tuple[int, int], ...]:
    """Restricted arc set: direct to collector plus the left-neighbour hop."""
    pairs = [(i, 0) for i in range(1, n + 1)]
    pairs += [(i, i - 1) for i in range(2, n + 1)]
    return tuple(sorted(pairs))


def formulate(
    net,
    pairs: Sequence[tuple[int, int]] | None = None,
    order: Sequence[int] | None = None,
) -> LpInstance:
    """Build the LP for a regular or perturbed network.

    ``pairs`` restricts the admissible arcs (direct-to-collector arcs are
    always required so the problem stays feasible); ``order`` permutes the
    variable layout, which must not change the optimum and is exercised by
    the test suite.
    """
    n = net.n
    x = net.positions().x
    costs = np.zeros((n + 1, n + 1))
    for i in range(1, n + 1):
        for j in range(0, n + 1):
            if i != j:
                costs[i, j] = transmission_cost(net.series, x[i], x[j])
    if pairs is None:
        chosen = [(i, j) for i in range(1, n + 1) for j in range(0, n + 1) if j != i]
    else:
        chosen = [(int(i), int(j)) for i, j in pairs]
        for i, j in chosen:
            if not (1 <= i <= n) or not (0 <= j <= n) or i == j:
                raise ValueError(f"arc ({i},{j}) outside the network")
        if len(set(chosen)) != len(chosen):
            raise ValueError("duplicate arcs in the restriction")
        missing = [i for i in range(1, n + 1) if (i, 0) not in chosen]
        if missing:
            raise ValueError(f"direct arcs to the collector missing for nodes {missing}")
    if order is not None:
        if sorted(order) != list(range(len(chosen))):
            raise ValueError("order must be a permutation of the arc indices")
        chosen = [chosen[k] for k in order]
    return LpInstance(n, tuple(float(q) for q in net.volumes), tuple(chosen), costs)


def _tableau(inst: LpInstance) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    # equality form: conservation rows, then energy rows with slack variables
    # turning  (node energy) <= t  into  (node energy) - t + s_i = 0
    n = inst.n
    arcs = len(inst.pairs)
    nvar = arcs + 1 + n
    t_col = arcs
    a = np.zeros((2 * n, nvar))
    b = np.zeros(2 * n)
    for k, (i, j) in enumerate(inst.pairs):
        a[i - 1, k] += 1.0
        if j >= 1:
            a[j - 1, k] -= 1.0
        a[n + i - 1, k] = inst.costs[i, j]
    for i in range(1, n + 1):
        a[n + i - 1, t_col] = -1.0
        a[n + i - 1, arcs + 1 + i - 1] = 1.0
        b[i - 1] = inst.volumes[i - 1]
    c = np.zeros(nvar)
    c[t_col] = 1.0
    return a, b, c, t_col


def solve(inst: LpInstance, tol: float = PIVOT_TOL) -> LpSolution:
    """Minimize the worst node energy; returns the optimum, flow, and pivot count.

    Starts from the direct-routing vertex (every node sends straight to the
    collector), which is always feasible.  Raises NumericalStall if the pivot
    budget is exhausted or feasibility degrades beyond repair.
    """
    n = inst.n
    a, b, c, t_col = _tableau(inst)
    rows, nvar = a.shape
    arcs = t_col
    direct_col = {pair: k for k, pair in enumerate(inst.pairs) if pair[1] == 0}
    direct_energy = [inst.volumes[i - 1] * inst.costs[i, 0] for i in range(1, n + 1)]
    tight = int(np.argmax(direct_energy))
    basis = [direct_col[(i, 0)] for i in range(1, n + 1)]
    basis.append(t_col)
    basis += [arcs + 1 + k for k in range(n) if k != tight]
    try:
        binv_a = np.linalg.solve(a[:, basis], a)
        binv_b = np.linalg.solve(a[:, basis], b)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalStall("starting basis is singular") from exc
    if np.min(binv_b) < -FLOW_FEAS_TOL:
        raise NumericalStall("starting vertex infeasible")
    tableau = np.hstack([binv_a, binv_b[:, None]])
    reduced = c - c[basis] @ binv_a

    iterations = 0
    budget = 1000 + 50 * nvar
    while True:
        entering = -1
        for j in range(nvar):
            if reduced[j] < -tol:
                entering = j
                break
        if entering < 0:
            break
        column = tableau[:, entering]
        best_ratio = None
        for r in range(rows):
            if column[r] > tol:
                ratio = tableau[r, -1] / column[r]
                if best_ratio is None or ratio < best_ratio - 1e-12 * max(1.0, abs(best_ratio)):
                    best_ratio = ratio
        if best_ratio is None:
            raise NumericalStall("objective unbounded below, which the model forbids")
        leaving = -1
        for r in range(rows):
            if column[r] > tol:
                ratio = tableau[r, -1] / column[r]
                if ratio <= best_ratio + 1e-12 * max(1.0, abs(best_ratio)):
                    if leaving < 0 or basis[r] < basis[leaving]:
                        leaving = r
        pivot = tableau[leaving, entering]
        tableau[leaving] /= pivot
        for r in range(rows):
            if r != leaving and tableau[r, entering] != 0.0:
                tableau[r] -= tableau[r, entering] * tableau[leaving]
        reduced = reduced - reduced[entering] * tableau[leaving, :-1]
        basis[leaving] = entering
        iterations += 1
        if iterations > budget:
            raise NumericalStall(f"no optimum after {iterations} pivots")

    values = np.zeros(nvar)
    for r, col in enumerate(basis):
        values[col] = tableau[r, -1]
    if np.min(values) < -FLOW_FEAS_TOL:
        raise NumericalStall("final vertex lost feasibility")
    amounts = {
        pair: float(values[k]) for k, pair in enumerate(inst.pairs) if values[k] > 0.0
    }
    return LpSolution(float(values[t_col]), FlowMatrix(n, amounts), iterations)


def verify_candidate(
    inst: LpInstance,
    candidate: FlowMatrix | Mapping[tuple[int, int], float],
    tol: float = DEFAULT_VERIFY_TOL,
) -> Verdict:
    """Judge a candidate flow against the LP optimum.

    Infeasible when conservation or nonnegativity fails beyond tol; otherwise
    optimal when its worst node energy is within tol of the LP value, and
    suboptimal with the gap reported otherwise.
    """
    if not isinstance(candidate, FlowMatrix):
        candidate = FlowMatrix(inst.n, dict(candidate))
    residual = check_conservation(candidate, inst.volumes)
    energy = np.zeros(inst.n)
    lowest = 0.0
    for (i, j), value in candidate.items():
        energy[i - 1] += value * inst.costs[i, j]
        lowest = min(lowest, value)
    max_energy = float(np.max(energy)) if inst.n else 0.0
    scale = max(1.0, max(inst.volumes))
    if float(np.max(np.abs(residual))) > tol * scale or lowest < -tol:
        return Verdict(VerdictStatus.INFEASIBLE, max_energy, None, None)
    optimum = solve(inst).value
    gap = max_energy - optimum
    status = VerdictStatus.OPTIMAL if gap <= tol else VerdictStatus.SUBOPTIMAL
    return Verdict(status, max_energy, optimum, gap)
