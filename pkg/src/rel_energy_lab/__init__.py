# __init__.py of rel_energy_lab
from .gas_core import (
    GasParams, PrimitiveState, StateBox, pressure, sound_speed, energy_density, energy_flux,
    relative_potential, rel_energy_density_A, rel_energy_flux_B, lemma_constant_grid, lemma_constant_analytic,
)
from .cutoff import RadialBump, TransportedCutoff, bump_eval, cutoff_eval, transport_residual, sign_condition
from .fv_solver import (
    Grid1D, ConservedState, Field, SolverConfig, Trajectory, physical_flux, llf_interface_flux, step, simulate,
    bump_field, write_trajectory, read_trajectory,
)
from .exact_solutions import (
    StrongSolution1D, IncompressibleSolution2D, constant_strong, reference_strong, incompressible_eval,
    residual_check,
)
from .diagnostics import (
    GronwallReport, RelEnergySeries, localized_relative_energy, gronwall_evaluate, incompressible_gronwall,
    support_radius, propagation_speed, admissibility_report,
)

# Expose the public operations
__all__ = [
    'GasParams', 'PrimitiveState', 'StateBox', 'pressure', 'sound_speed', 'energy_density', 'energy_flux',
    'relative_potential', 'rel_energy_density_A', 'rel_energy_flux_B', 'lemma_constant_grid',
    'lemma_constant_analytic',
    'RadialBump', 'TransportedCutoff', 'bump_eval', 'cutoff_eval', 'transport_residual', 'sign_condition',
    'Grid1D', 'ConservedState', 'Field', 'SolverConfig', 'Trajectory', 'physical_flux', 'llf_interface_flux',
    'step', 'simulate', 'bump_field', 'write_trajectory', 'read_trajectory',
    'StrongSolution1D', 'IncompressibleSolution2D', 'constant_strong', 'reference_strong', 'incompressible_eval',
    'residual_check',
    'GronwallReport', 'RelEnergySeries', 'localized_relative_energy', 'gronwall_evaluate', 'incompressible_gronwall',
    'support_radius', 'propagation_speed', 'admissibility_report',
]
