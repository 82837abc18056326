"""Simulation and stochastic design optimization for a linear oscillator
fitted with a vibro-impact absorber and an energy-harvesting coil."""

from .dynamics import (
    DimensionalParams,
    ImpactEvent,
    Nondimensional,
    SimState,
    SystemParams,
    Trajectory,
    coil_coefficient_from_relative,
    com_arrays,
    from_com_coordinates,
    impact_map,
    nondimensionalize,
    rhs,
    simulate,
    step_to_event,
    to_com_coordinates,
)
from .energy import (
    EfficiencyReport,
    EnergyLedger,
    bin_impacts_by_cycle,
    build_ledger,
    cycle_starts,
    efficiency,
    harvested_energy,
    impacts_per_cycle,
    relative_energy,
)
from .errors import (
    ConfigError,
    DomainError,
    OptimizationError,
    SimulationError,
    VinesError,
)
from .optimize import (
    Bounds,
    FitnessEvaluator,
    GaConfig,
    OptimizationResult,
    evaluate_fitness,
    ga_optimize,
    is_nondominated_set,
    nsga2_optimize,
    pin_design,
    select_robust,
)
from .spectral import (
    amplitude_spectrum,
    cwt_morlet,
    default_scales,
    scale_frequencies,
)
from .stochastic import (
    DesignPoint,
    McEstimate,
    UncertaintyModel,
    aleatory_draws,
    base_draws,
    ci95_interval,
    compare_designs,
    mc_estimate,
    sample_inputs,
)

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "ConfigError",
    "DesignPoint",
    "DimensionalParams",
    "DomainError",
    "EfficiencyReport",
    "EnergyLedger",
    "FitnessEvaluator",
    "GaConfig",
    "ImpactEvent",
    "McEstimate",
    "Nondimensional",
    "OptimizationError",
    "OptimizationResult",
    "SimState",
    "SimulationError",
    "SystemParams",
    "Trajectory",
    "UncertaintyModel",
    "VinesError",
    "aleatory_draws",
    "amplitude_spectrum",
    "base_draws",
    "bin_impacts_by_cycle",
    "build_ledger",
    "ci95_interval",
    "coil_coefficient_from_relative",
    "com_arrays",
    "compare_designs",
    "cwt_morlet",
    "cycle_starts",
    "default_scales",
    "efficiency",
    "evaluate_fitness",
    "from_com_coordinates",
    "ga_optimize",
    "harvested_energy",
    "impact_map",
    "impacts_per_cycle",
    "is_nondominated_set",
    "mc_estimate",
    "nondimensionalize",
    "nsga2_optimize",
    "pin_design",
    "relative_energy",
    "rhs",
    "sample_inputs",
    "select_robust",
    "simulate",
    "step_to_event",
    "to_com_coordinates",
    "__version__",
]
