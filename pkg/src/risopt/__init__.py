"""Circuit-level sum-rate optimization for surface-assisted MIMO networks."""

from .channel import (
    ChannelBundle,
    RisConfiguration,
    channel_exact,
    channel_farfield_bundle,
    compose_channels,
    end_to_end_channel,
    mcu_impedance_view,
    ris_inverse,
)
from .errors import (
    ConvergenceError,
    GeometryError,
    NumericalError,
    ScenarioError,
    SingularMatrixError,
)
from .geometry import DipoleGeometry, RadiatorGroup, linear_array_group, planar_grid_group
from .impedance import ImpedanceSet, assemble_impedance_set, dipole_mutual_impedance
from .optimizer import (
    OptimizerResult,
    PrecoderSet,
    TraceRecord,
    array_factor_db,
    bcd_optimize,
    rate_bits,
    ris_excitation,
    weighted_sum_rate,
    wmmse_precoder_step,
)
from .harness import bundle_for_scenario, run_all, run_convergence
from .scenario import (
    Scenario,
    load_scenario,
    ris_element_positions,
    scenario_hash,
    scenario_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelBundle",
    "ConvergenceError",
    "DipoleGeometry",
    "GeometryError",
    "ImpedanceSet",
    "NumericalError",
    "OptimizerResult",
    "PrecoderSet",
    "RadiatorGroup",
    "RisConfiguration",
    "Scenario",
    "ScenarioError",
    "SingularMatrixError",
    "TraceRecord",
    "__version__",
    "array_factor_db",
    "assemble_impedance_set",
    "bcd_optimize",
    "bundle_for_scenario",
    "channel_exact",
    "channel_farfield_bundle",
    "compose_channels",
    "dipole_mutual_impedance",
    "end_to_end_channel",
    "linear_array_group",
    "load_scenario",
    "mcu_impedance_view",
    "planar_grid_group",
    "rate_bits",
    "ris_element_positions",
    "ris_excitation",
    "ris_inverse",
    "run_all",
    "run_convergence",
    "scenario_hash",
    "scenario_to_dict",
    "weighted_sum_rate",
    "wmmse_precoder_step",
]
