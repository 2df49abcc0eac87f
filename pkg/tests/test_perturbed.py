"""Shifted-chain solver: system assembly, stability intervals, linear-cost forms."""
from __future__ import annotations

import math

import numpy as np
import pytest

from chainlife import (
    IndexOutOfRange,
    NegativeFlow,
    PerturbedNetwork,
    Positions,
    RegularNetwork,
    assemble_system,
    closed_form_a1,
    energy_bounds_perturbed,
    flow_closed_form,
    flow_quadratics_a1,
    node_energy_sn,
    numeric_d_interval,
    single_exponent_series,
    solve_equal_energy,
    stability_bounds_d,
    system_determinant,
)
from chainlife.perturbed import _lu_factor, _lu_solve

from helpers import random_series, unit_region_volumes


def unit_perturbed(n: int, a: float, shifts=None) -> PerturbedNetwork:
    if shifts is None:
        shifts = (0.0,) * n
    return PerturbedNetwork(n, tuple(shifts), (1.0,) * n, single_exponent_series(a))


def test_network_validation():
    series = single_exponent_series(1.0)
    with pytest.raises(ValueError):
        PerturbedNetwork(2, (0.0, 1.0), (1.0, 1.0), series)
    with pytest.raises(ValueError):
        PerturbedNetwork(2, (0.0, 0.0), (1.0, -1.0), series)
    with pytest.raises(ValueError):
        PerturbedNetwork(2, (0.0,), (1.0, 1.0), series)


def test_system_layout_two_nodes_linear_cost():
    system = assemble_system(unit_perturbed(2, 1.0))
    assert system.ordering == ((2, 0), (1, 0), (2, 1))
    np.testing.assert_allclose(system.rhs, [1.0, 1.0, 0.0])
    # conservation for node 2, conservation for node 1, energy equality
    np.testing.assert_allclose(
        system.m,
        [
            [1.0, 0.0, 1.0],
            [0.0, 1.0, -1.0],
            [-2.0, 1.0, -1.0],
        ],
    )


def test_determinant_is_product_of_direct_costs():
    assert system_determinant(unit_perturbed(2, 1.0)) == pytest.approx(2.0, rel=1e-12)
    assert system_determinant(unit_perturbed(2, 2.0)) == pytest.approx(4.0, rel=1e-12)
    assert system_determinant(unit_perturbed(3, 2.0)) == pytest.approx(36.0, rel=1e-12)
    rng = np.random.default_rng(4242)
    for _ in range(25):
        n = int(rng.integers(2, 8))
        net = PerturbedNetwork(n, (0.0,) * n, (1.0,) * n, random_series(rng))
        x = net.positions().x
        from chainlife.cost import transmission_cost

        expected = math.prod(
            transmission_cost(net.series, x[i], 0.0) for i in range(2, n + 1)
        )
        assert system_determinant(net) == pytest.approx(expected, rel=1e-10)


def test_determinant_matches_numpy():
    rng = np.random.default_rng(777)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        shifts = tuple(float(d) for d in rng.uniform(-0.3, 0.3, size=n))
        net = PerturbedNetwork(n, shifts, unit_region_volumes(rng, n), random_series(rng))
        system = assemble_system(net)
        assert system_determinant(net) == pytest.approx(
            float(np.linalg.det(system.m)), rel=1e-9
        )


def test_lu_solver_matches_numpy():
    rng = np.random.default_rng(11011)
    for _ in range(30):
        size = int(rng.integers(1, 9))
        matrix = rng.normal(size=(size, size)) + np.eye(size) * 0.5
        rhs = rng.normal(size=size)
        lu, perm, _ = _lu_factor(matrix)
        np.testing.assert_allclose(
            _lu_solve(lu, perm, rhs), np.linalg.solve(matrix, rhs), atol=1e-9
        )


def test_zero_shift_solution_matches_regular_closed_form():
    for n in (1, 2, 4, 6):
        for a in (1.0, 1.5, 2.0, 3.0):
            regular = flow_closed_form(
                RegularNetwork(n, (1.0,) * n, single_exponent_series(a))
            )
            shifted = solve_equal_energy(unit_perturbed(n, a))
            for pair, value in regular.flow.items():
                assert shifted.flow.amount(*pair) == pytest.approx(value, abs=1e-10)
            assert shifted.common_energy == pytest.approx(
                regular.common_energy, rel=1e-11
            )


def test_solution_is_equal_energy_off_grid():
    rng = np.random.default_rng(616161)
    found = 0
    while found < 40:
        n = int(rng.integers(2, 7))
        shifts = tuple(float(d) for d in rng.uniform(-0.05, 0.05, size=n))
        net = PerturbedNetwork(n, shifts, unit_region_volumes(rng, n), random_series(rng))
        try:
            sol = solve_equal_energy(net)
        except NegativeFlow:
            continue
        found += 1
        assert max(sol.node_energies) - min(sol.node_energies) < 1e-9
        sent = [0.0] * (n + 1)
        for (i, j), value in sol.flow.items():
            sent[i] += value
            sent[j] -= value
        for i in range(1, n + 1):
            assert sent[i] == pytest.approx(net.volumes[i - 1], abs=1e-9)


def test_out_of_region_shift_raises():
    with pytest.raises(NegativeFlow):
        solve_equal_energy(unit_perturbed(3, 1.0, (0.5, 0.0, 0.0)))
    # the signed solution is still available for exploration
    sol = solve_equal_energy(unit_perturbed(3, 1.0, (0.5, 0.0, 0.0)), check_flows=False)
    assert sol.flow.min_entry() < 0.0


def test_common_energy_ratio_form():
    assert node_energy_sn(unit_perturbed(3, 2.0)) == pytest.approx(23 / 9, rel=1e-12)
    single = PerturbedNetwork(1, (0.3,), (2.0,), single_exponent_series(2.0))
    assert node_energy_sn(single) == pytest.approx(2.0 * 0.7**2, rel=1e-12)
    rng = np.random.default_rng(95959)
    for _ in range(60):
        n = int(rng.integers(2, 11))
        shifts = [0.0] * n
        shifts[int(rng.integers(0, n))] = float(rng.uniform(-0.2, 0.2))
        net = PerturbedNetwork(
            n, tuple(shifts), unit_region_volumes(rng, n), random_series(rng)
        )
        sol = solve_equal_energy(net, check_flows=False)
        assert node_energy_sn(net) == pytest.approx(sol.common_energy, rel=1e-8)


def test_shift_envelope_fixed_points():
    # two-node chain: middle node may approach the collector by at most 1/3
    lo, hi = stability_bounds_d(2, 1)
    assert lo == -1.0
    assert hi == pytest.approx(1 / 3, abs=1e-12)
    assert stability_bounds_d(3, 1) == pytest.approx(
        (-1.0, (math.sqrt(156) - 12) / 2), abs=1e-12
    )
    assert stability_bounds_d(3, 2) == pytest.approx(
        ((3 - math.sqrt(21)) / 2, 0.75), abs=1e-12
    )
    assert stability_bounds_d(4, 2) == pytest.approx(
        (-(math.sqrt(208) - 12) / 4, (math.sqrt(2128) - 44) / 4), abs=1e-12
    )
    for n in range(2, 11):
        assert stability_bounds_d(n, n) == (-1.0, 1.0)
    with pytest.raises(IndexOutOfRange):
        stability_bounds_d(3, 4)


def test_envelope_endpoints_are_flow_roots():
    # wherever an endpoint is interior, one of the two flow components
    # vanishes there under linear cost
    for n in range(2, 12):
        for i in range(1, n):
            lo, hi = stability_bounds_d(n, i)
            if lo > -1.0:
                qi0, _ = flow_quadratics_a1(n, i, lo)
                assert abs(qi0) < 1e-10, (n, i, "lo")
            if hi < 1.0:
                _, qip10 = flow_quadratics_a1(n, i, hi)
                assert abs(qip10) < 1e-10, (n, i, "hi")


def test_quadratics_match_solved_flows():
    rng = np.random.default_rng(272727)
    for _ in range(80):
        n = int(rng.integers(2, 13))
        i = int(rng.integers(1, n))
        lo, hi = stability_bounds_d(n, i)
        d = float(rng.uniform(max(lo, -0.95) * 0.9, min(hi, 0.95) * 0.9))
        shifts = [0.0] * n
        shifts[i - 1] = d
        sol = solve_equal_energy(
            PerturbedNetwork(n, tuple(shifts), (1.0,) * n, single_exponent_series(1.0)),
            check_flows=False,
        )
        qi0, qip10 = flow_quadratics_a1(n, i, d)
        assert qi0 == pytest.approx(sol.flow.amount(i, 0), abs=1e-9)
        assert qip10 == pytest.approx(sol.flow.amount(i + 1, 0), abs=1e-9)


def test_quadratics_domain_guards():
    with pytest.raises(IndexOutOfRange):
        flow_quadratics_a1(3, 3, 0.0)
    with pytest.raises(ValueError):
        flow_quadratics_a1(3, 1, 1.0)


def test_numeric_interval_three_nodes_linear():
    interval = numeric_d_interval(unit_perturbed(3, 1.0), 1)
    assert interval.lo == -1.0
    assert interval.hi == pytest.approx((math.sqrt(156) - 12) / 2, abs=1e-6)


def test_numeric_interval_far_node():
    # linear cost keeps the far node feasible over the whole geometric range
    for n in (3, 4):
        interval = numeric_d_interval(unit_perturbed(n, 1.0), n)
        assert interval.lo == pytest.approx(-1.0)
        assert interval.hi == pytest.approx(1.0)
    # quadratic cost loses the direct flow before the node reaches its neighbor
    interval = numeric_d_interval(unit_perturbed(4, 2.0), 4)
    assert -1.0 < interval.lo < -0.88
    assert interval.hi == pytest.approx(1.0)
    at_edge = solve_equal_energy(
        unit_perturbed(4, 2.0, (0.0, 0.0, 0.0, interval.lo)), check_flows=False
    )
    assert min(v for _, v in at_edge.flow.items()) == pytest.approx(0.0, abs=1e-8)


def test_numeric_interval_guards():
    with pytest.raises(ValueError):
        numeric_d_interval(unit_perturbed(3, 1.0, (0.0, 0.1, 0.0)), 1)
    bad = PerturbedNetwork(
        2, (0.0, 0.0), (1.0, 0.1), single_exponent_series(2.0)
    )
    with pytest.raises(NegativeFlow):
        numeric_d_interval(bad, 1)


def test_linear_cost_closed_form_examples():
    sol = closed_form_a1(Positions((0.0, 1.0, 2.0)), (1.0, 1.0))
    assert sol.flow.amount(1, 0) == pytest.approx(1.5, abs=1e-14)
    assert sol.flow.amount(2, 0) == pytest.approx(0.5, abs=1e-14)
    assert sol.flow.amount(2, 1) == pytest.approx(0.5, abs=1e-14)
    assert sol.common_energy == pytest.approx(1.5, abs=1e-14)


def test_linear_cost_closed_form_matches_system_solver():
    rng = np.random.default_rng(135791)
    found = 0
    while found < 60:
        n = int(rng.integers(1, 9))
        shifts = tuple(float(d) for d in rng.uniform(-0.1, 0.1, size=n))
        volumes = unit_region_volumes(rng, n)
        net = PerturbedNetwork(n, shifts, volumes, single_exponent_series(1.0))
        try:
            direct = closed_form_a1(net.positions(), volumes)
        except NegativeFlow:
            continue
        found += 1
        system = solve_equal_energy(net)
        for pair, value in system.flow.items():
            assert direct.flow.amount(*pair) == pytest.approx(value, abs=1e-10)
        # total energy identity: N * common = sum of x_i Q_i
        x = net.positions().x
        assert n * direct.common_energy == pytest.approx(
            math.fsum(x[i] * volumes[i - 1] for i in range(1, n + 1)), rel=1e-11
        )


def test_linear_cost_closed_form_satisfies_constraints():
    rng = np.random.default_rng(246802)
    found = 0
    while found < 40:
        n = int(rng.integers(2, 8))
        shifts = tuple(float(d) for d in rng.uniform(-0.1, 0.1, size=n))
        volumes = unit_region_volumes(rng, n)
        positions = Positions.from_shifts(shifts)
        try:
            sol = closed_form_a1(positions, volumes)
        except NegativeFlow:
            continue
        found += 1
        x = positions.x
        sent = [0.0] * (n + 1)
        for (i, j), value in sol.flow.items():
            sent[i] += value
            sent[j] -= value
            assert value >= 0.0
        for i in range(1, n + 1):
            assert sent[i] == pytest.approx(volumes[i - 1], abs=1e-10)
        energies = [
            sol.flow.amount(i, 0) * x[i]
            + (sol.flow.amount(i, i - 1) * (x[i] - x[i - 1]) if i >= 2 else 0.0)
            for i in range(1, n + 1)
        ]
        assert max(energies) - min(energies) < 1e-10


def test_energy_bounds_perturbed_example_and_containment():
    series = single_exponent_series(1.0)
    net = PerturbedNetwork(2, (0.5, 0.0), (1.0, 1.0), series)
    lower, upper = energy_bounds_perturbed(net)
    assert (lower, upper) == pytest.approx((1.25, 1.5), abs=1e-14)
    # the algebraic common energy sits at the lower end here
    assert node_energy_sn(net) == pytest.approx(1.25, rel=1e-12)
    rng = np.random.default_rng(864213)
    found = 0
    while found < 50:
        n = int(rng.integers(2, 8))
        shifts = tuple(float(d) for d in rng.uniform(-0.1, 0.1, size=n))
        net = PerturbedNetwork(n, shifts, unit_region_volumes(rng, n), random_series(rng))
        try:
            sol = solve_equal_energy(net)
        except NegativeFlow:
            continue
        found += 1
        lower, upper = energy_bounds_perturbed(net)
        assert lower - 1e-10 <= sol.common_energy < upper
