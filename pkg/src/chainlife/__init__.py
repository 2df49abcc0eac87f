"""Maximum-lifetime routing for linear sensor chains with one collector.

The library computes the equal-energy flow split that maximizes network
lifetime, checks when that split stays feasible as data volumes or node
positions move, and ships an independent linear-programming oracle to
verify the closed forms.
"""
from .cost import (
    CostSeries,
    Positions,
    build_cost_series,
    check_superadditivity,
    single_exponent_series,
    transmission_cost,
    unit_hop_costs,
)
from .errors import (
    ChainlifeError,
    ConfigError,
    DegenerateCoefficient,
    ExponentBelowOne,
    IndexOutOfRange,
    NegativeCoefficient,
    NegativeFlow,
    NoSignChange,
    NotNormalized,
    NumericalStall,
    SingularMatrix,
    ZeroEnergyNoFlow,
)
from .perturbed import (
    PerturbedNetwork,
    StabilityInterval,
    assemble_system,
    closed_form_a1,
    energy_bounds_perturbed,
    flow_quadratics_a1,
    node_energy_sn,
    numeric_d_interval,
    solve_equal_energy,
    stability_bounds_d,
    system_determinant,
)
from .regular import (
    EqualEnergySolution,
    RegularNetwork,
    check_q_constraints,
    energy_bounds_regular,
    flow_closed_form,
    harmonic_flow_a2,
    node_energy_closed_form,
    node_energy_recurrence,
    q_i_max,
    q_n_min,
    raw_flows,
    stability_region_Q_check,
)
from .validate import (
    FlowMatrix,
    LifetimeReport,
    check_conservation,
    check_no_loop,
    conservation_ok,
    is_equal_energy,
    lifetime,
    node_energies,
    validation_report,
)

__version__ = "0.1.0"

__all__ = [
    "CostSeries",
    "Positions",
    "build_cost_series",
    "check_superadditivity",
    "single_exponent_series",
    "transmission_cost",
    "unit_hop_costs",
    "ChainlifeError",
    "ConfigError",
    "DegenerateCoefficient",
    "ExponentBelowOne",
    "IndexOutOfRange",
    "NegativeCoefficient",
    "NegativeFlow",
    "NoSignChange",
    "NotNormalized",
    "NumericalStall",
    "SingularMatrix",
    "ZeroEnergyNoFlow",
    "PerturbedNetwork",
    "StabilityInterval",
    "assemble_system",
    "closed_form_a1",
    "energy_bounds_perturbed",
    "flow_quadratics_a1",
    "node_energy_sn",
    "numeric_d_interval",
    "solve_equal_energy",
    "stability_bounds_d",
    "system_determinant",
    "EqualEnergySolution",
    "RegularNetwork",
    "check_q_constraints",
    "energy_bounds_regular",
    "flow_closed_form",
    "harmonic_flow_a2",
    "node_energy_closed_form",
    "node_energy_recurrence",
    "q_i_max",
    "q_n_min",
    "raw_flows",
    "stability_region_Q_check",
    "FlowMatrix",
    "LifetimeReport",
    "check_conservation",
    "check_no_loop",
    "conservation_ok",
    "is_equal_energy",
    "lifetime",
    "node_energies",
    "validation_report",
    "__version__",
]
