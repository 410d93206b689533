"""One-dimensional viscoelastic balance-law model with power-law rheology
and finite relaxation time: constitutive functions, closed-form relaxation
solutions, adaptive homogeneous integration, and the scenario runner."""

from ._retflow import (
    LinearElastic,
    Material,
    PowerGas,
    PowerLawFluid,
    Trajectory,
    a_coeff,
    case1_solution,
    char_speeds,
    dissipation_rate,
    dpressure_dF,
    elastic_energy,
    extinction_time,
    maxwell_comparator,
    pressure,
    production,
    rate_from_stress,
    run_scenario,
    simulate_homogeneous,
    steady_sigma,
    stress_from_rate,
    stress_from_z,
    superexp_ratios,
    tau,
    viscous_energy,
    z_from_stress,
)

__version__ = "0.1.0"

__all__ = [
    "LinearElastic",
    "Material",
    "PowerGas",
    "PowerLawFluid",
    "Trajectory",
    "a_coeff",
    "case1_solution",
    "char_speeds",
    "dissipation_rate",
    "dpressure_dF",
    "elastic_energy",
    "extinction_time",
    "maxwell_comparator",
    "pressure",
    "production",
    "rate_from_stress",
    "run_scenario",
    "simulate_homogeneous",
    "steady_sigma",
    "stress_from_rate",
    "stress_from_z",
    "superexp_ratios",
    "tau",
    "viscous_energy",
    "z_from_stress",
]
