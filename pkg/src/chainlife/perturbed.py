"""Equal-energy routing and node-shift stability for perturbed chains.

Node i sits at x_i = i - d_i with d_i in (-1, 1); a positive shift moves the
node toward the collector.  The equal-energy flow solves a dense linear
system built from conservation rows and pairwise energy-equality rows.  The
stability question is how far a single node may move before that flow stops
being feasible, and hence stops solving the minimax energy problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cost import CostSeries, Positions, transmission_cost
from .errors import IndexOutOfRange, NegativeFlow, NoSignChange, SingularMatrix
from .regular import EqualEnergySolution
from .validate import FLOW_ZERO_TOL, FlowMatrix

EQUAL_ENERGY_RESIDUAL_TOL = 1e-9
BISECTION_TOL = 1e-10
BRACKET_MARGIN = 1e-6


@dataclass(frozen=True)
class PerturbedNetwork:
    """Chain of n nodes at x_i = i - shifts[i-1], with volumes and a cost series."""

    n: int
    shifts: tuple[float, ...]
    volumes: tuple[float, ...]
    series: CostSeries

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one node")
        if len(self.shifts) != self.n or len(self.volumes) != self.n:
            raise ValueError("shift and volume vectors must match the node count")
        for k, d in enumerate(self.shifts, start=1):
            if not -1.0 < d < 1.0:
                raise ValueError(f"shift d_{k} = {d} outside (-1, 1)")
        for k, q in enumerate(self.volumes, start=1):
            if not q > 0.0:
                raise ValueError(f"volume Q_{k} = {q} must be positive")

    def positions(self) -> Positions:
        return Positions.from_shifts(self.shifts)


@dataclass(frozen=True, eq=False)
class SystemMatrix:
    """Dense routing system M q = rhs with its variable ordering.

    ordering[k] is the (sender, receiver) pair of unknown k; the layout is
    q_{N,0}, ..., q_{1,0} followed by q_{2,1}, ..., q_{N,N-1}.
    """

    m: np.ndarray
    rhs: np.ndarray
    ordering: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class StabilityInterval:
    """Open interval of single-node shifts keeping the solved flow feasible."""

    lo: float
    hi: float


def _pair_costs(net: PerturbedNetwork) -> tuple[list[float], list[float]]:
    # direct[i] = cost node i -> collector, left[i] = cost node i -> node i-1
    x = net.positions().x
    direct = [0.0] * (net.n + 1)
    left = [0.0] * (net.n + 1)
    for i in range(1, net.n + 1):
        direct[i] = transmission_cost(net.series, x[i], 0.0)
        left[i] = transmission_cost(net.series, x[i], x[i - 1])
    return direct, left


def assemble_system(net: PerturbedNetwork) -> SystemMatrix:
    """Conservation rows plus energy-equality rows for the 2N-1 unknown flows."""
    n = net.n
    direct, left = _pair_costs(net)
    size = 2 * n - 1
    ordering = tuple((m, 0) for m in range(n, 0, -1)) + tuple(
        (m, m - 1) for m in range(2, n + 1)
    )
    col_direct = {m: n - m for m in range(1, n + 1)}
    col_left = {m: n + m - 2 for m in range(2, n + 1)}
    matrix = np.zeros((size, size))
    rhs = np.zeros(size)
    for m in range(1, n + 1):
        row = n - m
        matrix[row, col_direct[m]] = 1.0
        if m >= 2:
            matrix[row, col_left[m]] += 1.0
        if m + 1 <= n:
            matrix[row, col_left[m + 1]] -= 1.0
        rhs[row] = net.volumes[m - 1]
    for i in range(1, n):
        row = n + i - 1
        matrix[row, col_direct[i]] += direct[i]
        if i >= 2:
            matrix[row, col_left[i]] += left[i]
        matrix[row, col_direct[i + 1]] -= direct[i + 1]
        matrix[row, col_left[i + 1]] -= left[i + 1]
    return SystemMatrix(matrix, rhs, ordering)


def _lu_factor(matrix: np.ndarray) -> tuple[np.ndarray, list[int], float]:
    # partial pivoting; the permutation sign rides along for the determinant
    a = matrix.astype(float, copy=True)
    size = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(a))))
    perm = list(range(size))
    sign = 1.0
    for col in range(size):
        pivot_row = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[pivot_row, col]) <= 1e-13 * scale:
            cond = float(np.linalg.cond(matrix, 1))
            raise SingularMatrix(
                f"pivot {a[pivot_row, col]:.3e} in column {col} below threshold"
                f" (1-norm condition estimate {cond:.3e})"
            )
        if pivot_row != col:
            a[[col, pivot_row]] = a[[pivot_row, col]]
            perm[col], perm[pivot_row] = perm[pivot_row], perm[col]
            sign = -sign
        factors = a[col + 1 :, col] / a[col, col]
        a[col + 1 :, col] = factors
        a[col + 1 :, col + 1 :] -= np.outer(factors, a[col, col + 1 :])
    return a, perm, sign


def _lu_solve(lu: np.ndarray, perm: Sequence[int], rhs: np.ndarray) -> np.ndarray:
    size = lu.shape[0]
    y = rhs[list(perm)].astype(float)
    for row in range(size):
        y[row] -= lu[row, :row] @ y[:row]
    for row in range(size - 1, -1, -1):
        y[row] = (y[row] - lu[row, row + 1 :] @ y[row + 1 :]) / lu[row, row]
    return y


def system_determinant(net: PerturbedNetwork) -> float:
    """Determinant of the routing system matrix, from the pivoted factorization."""
    system = assemble_system(net)
    lu, _, sign = _lu_factor(system.m)
    return sign * float(np.prod(np.diag(lu)))


def _solve_raw(net: PerturbedNetwork) -> tuple[dict[tuple[int, int], float], list[float], float]:
    n = net.n
    direct, left = _pair_costs(net)
    if n == 1:
        value = float(net.volumes[0])
        energy = value * direct[1]
        return {(1, 0): value}, [energy], energy
    system = assemble_system(net)
    lu, perm, _ = _lu_factor(system.m)
    vector = _lu_solve(lu, perm, system.rhs)
    q = {pair: float(vector[k]) for k, pair in enumerate(system.ordering)}
    energies = []
    for i in range(1, n + 1):
        e = q[(i, 0)] * direct[i]
        if i >= 2:
            e += q[(i, i - 1)] * left[i]
        energies.append(e)
    peak = max(energies)
    if peak - min(energies) > EQUAL_ENERGY_RESIDUAL_TOL * max(1.0, abs(peak)):
        cond = float(np.linalg.cond(system.m, 1))
        raise SingularMatrix(
            f"energy spread {peak - min(energies):.3e} after solve"
            f" (1-norm condition estimate {cond:.3e})"
        )
    return q, energies, float(np.mean(energies))


def solve_equal_energy(net: PerturbedNetwork, check_flows: bool = True) -> EqualEnergySolution:
    """Solve the routing system and package the equal-energy flow.

    Outside the stability region the system still has a unique solution but
    some component is negative and the flow no longer solves the minimax
    problem.  With ``check_flows`` set (the default) that situation raises
    NegativeFlow; disabling the check returns the signed solution for
    boundary exploration.
    """
    q, energies, common = _solve_raw(net)
    if check_flows:
        worst = min(q, key=lambda key: q[key])
        if q[worst] < -FLOW_ZERO_TOL:
            raise NegativeFlow(worst, q[worst])
    return EqualEnergySolution(FlowMatrix(net.n, q), tuple(energies), common)


def node_energy_sn(net: PerturbedNetwork) -> float:
    """Common energy as a cost-product sum divided by the system determinant.

    The whole bracket, including the farthest node's term, is divided by
    det M; the regression suite pins this grouping against solve_equal_energy.
    """
    direct, left = _pair_costs(net)
    n = net.n
    if n == 1:
        return float(net.volumes[0]) * direct[1]
    det = system_determinant(net)
    total = 0.0
    for k in range(1, n):
        term = float(net.volumes[k - 1])
        for i in range(1, k + 1):
            term *= direct[i]
        for i in range(k + 1, n + 1):
            term *= direct[i] - left[i]
        total += term
    last = float(net.volumes[n - 1])
    for i in range(1, n + 1):
        last *= direct[i]
    return (total + last) / det


def stability_bounds_d(n: int, i: int) -> tuple[float, float]:
    """Envelope (dL, dR) of allowed single-node shifts for unit volumes.

    Derived for single-term cost with exponent 1; for any other valid series
    the true stability interval is contained in this envelope.  End nodes can
    always use the full (-1, 1) range on their outward side.
    """
    if not 1 <= i <= n:
        raise IndexOutOfRange(f"node {i} outside [1, {n}]")
    if i == 1 or i == n:
        lo = -1.0
    elif i < (n * n + n + 2) / (2 * n):
        lo = -0.25 * (math.sqrt(n * (8 * i + n * (n + 1 - i) ** 2)) - n * (n + 1 - i))
    else:
        lo = -1.0
    if i == n:
        hi = 1.0
    elif i == n - 1:
        # the receiving-flow quadratic degenerates to a line here; its root
        # is inside (0, 1) only for very short chains
        root = n * (n - 1) / (2.0 * (n + 1))
        hi = root if root < 1.0 else 1.0
    elif i == 1:
        hi = (math.sqrt(n * (n**3 + 2 * n * n + 5 * n - 8)) - n - n * n) / (2 * n - 4)
    elif i < (n * n - n - 2 + math.sqrt(4 - 12 * n + 37 * n * n + 6 * n**3 + n**4)) / (4 * n):
        hi = (
            math.sqrt(n * (8 * i * (1 + i) * (n - 1 - i) + n * (3 - i * i + n + i * n) ** 2))
            - n * n * (1 + i)
            + n * (i * i - 3)
        ) / (4 * (n - 1 - i))
    else:
        hi = 1.0
    return lo, hi


def flow_quadratics_a1(n: int, i: int, d: float) -> tuple[float, float]:
    """The two flow components whose roots in d bound the shift of node i.

    Valid for exponent-1 cost and unit volumes.  Returns (q_{i,0}, q_{i+1,0})
    as explicit rational functions of the shift; the stability interval of
    node i < N is exactly where both stay positive.
    """
    if not 1 <= i <= n - 1:
        raise IndexOutOfRange(f"node {i} outside [1, {n - 1}]")
    if not -1.0 < d < 1.0:
        raise ValueError(f"shift {d} outside (-1, 1)")
    if i == 1:
        # the shifted node's own direct flow; x_0 = 0 is fixed, so this
        # branch has no root inside (-1, 1)
        qi0 = (n * (n + 1) - 2.0 * d) / (2.0 * n * (1.0 - d))
    else:
        qi0 = (i * n + (n + 1 - i) * n * d - 2.0 * d * d) / (2.0 * n * (i - d))
    qip10 = (
        i * (i + 1) * n - (n * (i + 1) - i * i + 3) * n * d - 2.0 * (n - 1 - i) * d * d
    ) / (2.0 * (i + 1) * n * (i - d))
    return qi0, qip10


def numeric_d_interval(
    net: PerturbedNetwork, i: int, tol: float = BISECTION_TOL
) -> StabilityInterval:
    """Shift interval of node i inside which every solved flow stays positive.

    All other shifts must be zero; the interval is located by bisection on
    the smallest flow component of the solved system, to ``tol`` in d.  When
    no component changes sign before the bracket end the boundary is the
    geometric limit -1 or 1.
    """
    if not 1 <= i <= net.n:
        raise IndexOutOfRange(f"node {i} outside [1, {net.n}]")
    for k, d in enumerate(net.shifts, start=1):
        if k != i and d != 0.0:
            raise ValueError(f"template shift d_{k} = {d} must be zero")

    def min_flow(d: float) -> float:
        shifts = [0.0] * net.n
        shifts[i - 1] = d
        probe = PerturbedNetwork(net.n, tuple(shifts), net.volumes, net.series)
        try:
            q, _, _ = _solve_raw(probe)
        except SingularMatrix:
            return -math.inf
        return min(q.values())

    if not min_flow(0.0) > 0.0:
        raise NegativeFlow((i, 0), min_flow(0.0), "solved flow not positive at d = 0")

    def boundary(end: float) -> float:
        if min_flow(end) > 0.0:
            raise NoSignChange(f"flow stays positive through d = {end:.6g}")
        good, bad = 0.0, end
        while abs(bad - good) > tol:
            mid = 0.5 * (good + bad)
            if min_flow(mid) > 0.0:
                good = mid
            else:
                bad = mid
        return 0.5 * (good + bad)

    try:
        lo = boundary(-1.0 + BRACKET_MARGIN)
    except NoSignChange:
        lo = -1.0
    try:
        hi = boundary(1.0 - BRACKET_MARGIN)
    except NoSignChange:
        hi = 1.0
    return StabilityInterval(lo, hi)


def closed_form_a1(positions: Positions, volumes: Sequence[float]) -> EqualEnergySolution:
    """Exact equal-energy flow for exponent-1 cost at arbitrary positions.

    For cost equal to distance the system solution collapses to weighted
    coordinate sums; the common energy is the position-weighted mean volume.
    Raises NegativeFlow outside the feasibility region.
    """
    n = positions.n
    if len(volumes) != n:
        raise ValueError("volume vector length must match the node count")
    x = positions.x
    weighted = [x[j] * float(volumes[j - 1]) for j in range(1, n + 1)]
    total = math.fsum(weighted)
    q: dict[tuple[int, int], float] = {(1, 0): total / (n * x[1])}
    prefix = 0.0
    for i in range(2, n + 1):
        prefix += weighted[i - 2]
        q[(i, 0)] = (
            n * (x[i] - x[i - 1]) * prefix + (i * x[i - 1] - (i - 1) * x[i]) * total
        ) / (n * x[i] * x[i - 1])
        suffix = total - prefix
        q[(i, i - 1)] = ((i - 1) * suffix - (n - i + 1) * prefix) / (n * x[i - 1])
    worst = min(q, key=lambda key: q[key])
    if q[worst] < -FLOW_ZERO_TOL:
        raise NegativeFlow(worst, q[worst])
    flow = FlowMatrix(n, q)
    energies = []
    for i in range(1, n + 1):
        e = flow.amount(i, 0) * x[i]
        if i >= 2:
            e += flow.amount(i, i - 1) * (x[i] - x[i - 1])
        energies.append(e)
    return EqualEnergySolution(flow, tuple(energies), float(np.mean(energies)))


def energy_bounds_perturbed(net: PerturbedNetwork) -> tuple[float, float]:
    """Interval [lower, upper) that must contain the common energy.

    The lower end charges every volume the chain of hop costs it crosses,
    averaged over the nodes; the upper end is the worst single-hop relay load.
    """
    _, left = _pair_costs(net)
    n = net.n
    hop_prefix = 0.0
    lower = 0.0
    for i in range(1, n + 1):
        hop_prefix += left[i]
        lower += float(net.volumes[i - 1]) * hop_prefix
    lower /= n
    suffix = 0.0
    upper = 0.0
    for i in range(n, 0, -1):
        suffix += float(net.volumes[i - 1])
        upper = max(upper, left[i] * suffix)
    return lower, upper
