"""
Experiment registry: subcommand name -> runner and help text.
"""

from dataclasses import dataclass
from typing import Dict, List

from ..core.errors import PreconditionError
from .runner import (
    Runner,
    run_conditions,
    run_esp_lln,
    run_gamma,
    run_mp_esd,
    run_qform_var,
)


@dataclass(frozen=True)
class ExperimentInfo:
    name: str
    runner: Runner
    description: str


class ExperimentRegistry:
    """Subcommands in registration order."""

    def __init__(self):
        self._experiments: Dict[str, ExperimentInfo] = {}

    def register_experiment(
        self, name: str, runner: Runner, description: str = ""
    ) -> None:
        self._experiments[name] = ExperimentInfo(name, runner, description)

    def get_experiment(self, name: str) -> ExperimentInfo:
        if name not in self._experiments:
            raise PreconditionError(f"Experiment '{name}' not found")
        return self._experiments[name]

    def list_experiments(self) -> List[str]:
        return list(self._experiments)


def default_registry() -> ExperimentRegistry:
    """Registry with the five built-in experiments."""
    registry = ExperimentRegistry()
    registry.register_experiment(
        "mp-esd",
        run_mp_esd,
        "Tensor sample covariance spectrum against the Marchenko-Pastur law",
    )
    registry.register_experiment(
        "qform-var",
        run_qform_var,
        "Quadratic-form variance by Monte Carlo against the variance bounds",
    )
    registry.register_experiment(
        "esp-lln",
        run_esp_lln,
        "U-statistic law of large numbers and the saddle-point log-U gap",
    )
    registry.register_experiment(
        "gamma",
        run_gamma,
        "Quadruple configuration counts: brute force, closed form and bound",
    )
    registry.register_experiment(
        "conditions",
        run_conditions,
        "Truncated-moment condition terms along a dimension grid",
    )
    return registry
