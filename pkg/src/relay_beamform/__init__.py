"""Max-min SINR amplify-and-forward relay beamforming for underlay cognitive radio."""

__version__ = "0.1.0"

from .optimizer import (BeamSolution, BeamStatus, SolverSettings, grid_oracle,  # noqa: E402
                        maximize_min_sinr, upper_bound_gamma)
from .scenario import (ChannelSet, ScenarioConfig, ScenarioError, load_scenario,  # noqa: E402
                       sample_channels, save_scenario)
from .signal_model import (ReceiverForms, build_forms, build_normalized,  # noqa: E402
                           empirical_powers, forms_for, pu_interference, sinr)

__all__ = [
    "BeamSolution", "BeamStatus", "ChannelSet", "ReceiverForms", "ScenarioConfig",
    "ScenarioError", "SolverSettings", "build_forms", "build_normalized", "empirical_powers",
    "forms_for", "grid_oracle", "load_scenario", "maximize_min_sinr", "pu_interference",
    "sample_channels", "save_scenario", "sinr", "upper_bound_gamma",
]
