"""
Configuration for the linear exploration agent.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

LOG_BASES = {"e": None, "2": 2.0, "10": 10.0}
FACTORIZATIONS = ("rank_one", "dense")


@dataclass
class LinearAgentConfig:
    """Knobs of ``learn_linear``.

    Attributes:
        memoize: Cache Explore(s) return values (changes counters, not values)
        log_base: Base of the logarithm in the data-addition bound ('e', '2' or '10')
        factorization: 'rank_one' updates the Cholesky factor in place,
            'dense' refactorizes after every addition
        refactor_every: Full refactorization period for 'rank_one'
        depth_guard: Abort when the recursion nests deeper than the horizon
        trace: Record labels, gate values and Explore returns in the stats
    """

    memoize: bool = False
    log_base: str = "e"
    factorization: str = "rank_one"
    refactor_every: int = 64
    depth_guard: bool = True
    trace: bool = True

    def __post_init__(self):
        if self.log_base not in LOG_BASES:
            raise ValueError(f"log_base must be one of {sorted(LOG_BASES)}, got {self.log_base!r}")
        if self.factorization not in FACTORIZATIONS:
            raise ValueError(f"factorization must be one of {FACTORIZATIONS}, got {self.factorization!r}")
        if self.refactor_every < 1:
            raise ValueError(f"refactor_every must be positive, got {self.refactor_every}")

    @classmethod
    def from_config_yaml(cls, config_path: Optional[Path] = None) -> "LinearAgentConfig":
        """Read the ``linear_agent`` section of config.yaml (defaults if absent).

        Args:
            config_path: Path to config.yaml. Default: {project_root}/config.yaml
        """
        import yaml

        if config_path is None:
            config_path = Path(__file__).parent.parent / "config.yaml"

        if not config_path.exists():
            return cls()

        with open(config_path) as f:
            raw = yaml.safe_load(f) or {}

        section = raw.get("linear_agent", {}) or {}
        return cls(
            memoize=bool(section.get("memoize", False)),
            log_base=str(section.get("log_base", "e")),
            factorization=str(section.get("factorization", "rank_one")),
            refactor_every=int(section.get("refactor_every", 64)),
            depth_guard=bool(section.get("depth_guard", True)),
            trace=bool(section.get("trace", True)),
        )
