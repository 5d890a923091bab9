"""
Configuration for the general-class agents.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .sampling import sample_count


@dataclass
class GeneralAgentConfig:
    """Knobs of ``learn_general`` / ``learn_stochastic``.

    Attributes:
        dataset_cap_factor: Abort once ``|Y|`` exceeds this multiple of ``|S x A|``
        depth_guard: Abort when the recursion nests deeper than the horizon
        strict_labels: Reject repeated pairs whose labels disagree (deterministic runs)
        trace: Record labels, fitted values and oracle answers in the stats
    """

    dataset_cap_factor: int = 18
    strict_labels: bool = True
    depth_guard: bool = True
    trace: bool = True

    def __post_init__(self):
        if self.dataset_cap_factor < 1:
            raise ValueError(f"dataset_cap_factor must be positive, got {self.dataset_cap_factor}")

    @classmethod
    def from_config_yaml(cls, config_path: Optional[Path] = None) -> "GeneralAgentConfig":
        """Read the ``general_agent`` section of config.yaml (defaults if absent)."""
        import yaml

        if config_path is None:
            config_path = Path(__file__).parent.parent / "config.yaml"

        if not config_path.exists():
            return cls()

        with open(config_path) as f:
            raw = yaml.safe_load(f) or {}

        section = raw.get("general_agent", {}) or {}
        return cls(
            dataset_cap_factor=int(section.get("dataset_cap_factor", 18)),
            depth_guard=bool(section.get("depth_guard", True)),
            strict_labels=bool(section.get("strict_labels", True)),
            trace=bool(section.get("trace", True)),
        )


@dataclass(frozen=True)
class StochasticConfig:
    """Reward-estimation parameters of ``learn_stochastic``.

    Attributes:
        delta_r: Reward-estimation tolerance
        p: Failure probability
        dim_e_value: Eluder dimension used in the sample-count formula
        horizon: Horizon H of the environment
    """

    delta_r: float
    p: float
    dim_e_value: int
    horizon: int

    def __post_init__(self):
        # sample_count validates all four parameters
        sample_count(self.horizon, self.delta_r, self.p, self.dim_e_value)

    @property
    def n_samples(self) -> int:
        """``ceil(H^2 / (2 delta_r^2) * ln(18 dim_E H / p))``."""
        return sample_count(self.horizon, self.delta_r, self.p, self.dim_e_value)

    def to_dict(self) -> dict:
        return {
            "delta_r": self.delta_r,
            "p": self.p,
            "dim_e_value": self.dim_e_value,
            "horizon": self.horizon,
            "n_samples": self.n_samples,
        }
