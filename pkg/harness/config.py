"""
Experiment-Konfiguration und Konsolen-Logging.

Die Konfiguration wird aus einer YAML- oder JSON-Datei gelesen (JSON ist
gueltiges YAML), danach werden CLI-Overrides angewendet und zuletzt die
Umgebungsvariable ``AGNOSTICQ_SEED`` fuer den Master-Seed.

Verwendung:
    from harness.config import ExperimentConfig

    cfg = ExperimentConfig.from_file("config.yaml", overrides={"run.trials": 10})
    errors = cfg.collect_errors()
"""

from __future__ import annotations

import os
import sys
import time
from pathlib import Path
from typing import Any, Literal, Mapping, Optional, Union

import yaml
from pydantic import BaseModel, Field

PROJECT_ROOT = Path(__file__).parent.parent
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "config.yaml"

SEED_ENV_VAR = "AGNOSTICQ_SEED"
DEBUG_ENV_VAR = "AGNOSTICQ_DEBUG"

MODES = ("linear", "general", "stochastic", "eluder", "verify")

IntRange = Union[int, tuple[int, int]]
RealRange = Union[float, tuple[float, float]]


def seed_from_environ(seed: Optional[int], environ: Optional[Mapping[str, str]] = None) -> Optional[int]:
    """``AGNOSTICQ_SEED`` hat Vorrang vor ``seed``, falls gesetzt."""
    environ = os.environ if environ is None else environ
    if environ.get(SEED_ENV_VAR):
        return int(environ[SEED_ENV_VAR])
    return seed


# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

_verbose = os.environ.get(DEBUG_ENV_VAR, "") not in ("", "0")


def set_verbose(enabled: bool) -> None:
    """Schaltet Debug-Ausgaben ein oder aus."""
    global _verbose
    _verbose = enabled


def log(message: str, level: str = "info") -> None:
    """Gibt eine Meldung mit Zeitstempel auf stderr aus."""
    if level == "debug" and not _verbose:
        return
    timestamp = time.strftime("%H:%M:%S")
    prefix = {
        "debug": "[.]",
        "info": "[i]",
        "success": "[+]",
        "warning": "[!]",
        "error": "[x]",
    }.get(level, "[i]")
    print(f"{prefix} {timestamp} {message}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Modelle
# ---------------------------------------------------------------------------


class InstanceParams(BaseModel):
    """Parameter der generierten Instanzen (Bereiche werden pro Trial gezogen)."""

    horizon: IntRange = (2, 4)
    level_width: IntRange = 3
    actions: IntRange = 2
    target_gap: RealRange = (0.1, 0.5)
    max_path_sum: float = 1.0
    d: IntRange = 4
    delta_target: float = 0.0
    class_size: int = 5
    class_spread: float = 0.5
    noise_family: str = "twopoint"
    noise_width: float = 0.1
    # Nur Modus eluder
    eluder_points: IntRange = (4, 10)
    eluder_levels: int = 4
    eluder_eps: tuple[float, float] = (0.1, 0.3)


class AgentParams(BaseModel):
    """Parameter der Agenten und Schranken."""

    rho: Optional[float] = None
    delta: Optional[float] = None
    delta_fraction: Optional[float] = None
    delta_r: Optional[float] = None
    p: float = 0.1
    dim_e_value: Optional[int] = None
    c: float = 18.0
    log_base: Literal["e", "2", "10"] = "e"
    memoize: bool = False
    linear_eluder_constant: float = 1.0
    success_threshold: float = 0.85


class RunParams(BaseModel):
    """Ablauf eines Sweeps."""

    trials: int = 20
    master_seed: int = 0
    parallelism: int = 1
    trial_budget_s: Optional[float] = None
    record_wall_time: bool = False


class OutputParams(BaseModel):
    csv: Optional[Path] = None
    json_report: Optional[Path] = Field(default=None, alias="json")

    model_config = {"populate_by_name": True}


class ExperimentConfig(BaseModel):
    """Vollstaendige Konfiguration eines Experiments.

    Attributes:
        mode: linear | general | stochastic | eluder | verify
        instance: Instanz-Parameter
        agent: Agenten-Parameter
        run: Trials, Seeds, Parallelitaet, Zeitbudget
        output: Optionale Ausgabepfade fuer CSV und JSON
    """

    mode: Literal["linear", "general", "stochastic", "eluder", "verify"] = "linear"
    instance: InstanceParams = Field(default_factory=InstanceParams)
    agent: AgentParams = Field(default_factory=AgentParams)
    run: RunParams = Field(default_factory=RunParams)
    output: OutputParams = Field(default_factory=OutputParams)

    @classmethod
    def from_file(
        cls,
        path: Optional[Union[str, Path]] = None,
        overrides: Optional[dict[str, Any]] = None,
        environ: Optional[dict[str, str]] = None,
    ) -> "ExperimentConfig":
        """Liest die Konfiguration und wendet Overrides und ``AGNOSTICQ_SEED`` an.

        Args:
            path: YAML- oder JSON-Datei. Default: {project_root}/config.yaml
            overrides: Punkt-Pfade wie ``{"run.trials": 10}``
            environ: Umgebung (Default: ``os.environ``)

        Raises:
            FileNotFoundError: wenn ``path`` angegeben ist und nicht existiert
        """
        if path is None:
            path = DEFAULT_CONFIG_PATH
            raw = _read_yaml(path) if path.exists() else {}
        else:
            path = Path(path)
            if not path.exists():
                raise FileNotFoundError(f"Konfigurationsdatei nicht gefunden: {path}")
            raw = _read_yaml(path)

        section = raw.get("experiment", raw)
        data = _apply_overrides(dict(section or {}), overrides or {})
        seed = seed_from_environ(None, environ)
        if seed is not None:
            data.setdefault("run", {})
            data["run"] = {**data["run"], "master_seed": seed}
        return cls.model_validate(data)

    def collect_errors(self) -> list[str]:
        """Prueft die Konfiguration und sammelt alle Fehler."""
        errors: list[str] = []
        agent, instance, run = self.agent, self.instance, self.run

        if run.trials < 1:
            errors.append(f"run.trials muss >= 1 sein: {run.trials}")
        if run.parallelism < 1:
            errors.append(f"run.parallelism muss >= 1 sein: {run.parallelism}")
        if run.trial_budget_s is not None and run.trial_budget_s <= 0:
            errors.append(f"run.trial_budget_s muss > 0 sein: {run.trial_budget_s}")

        if agent.rho is not None and not (0.0 < agent.rho <= 1.0):
            errors.append(f"agent.rho muss in (0, 1] liegen: {agent.rho}")
        if agent.rho is not None and agent.delta is not None and agent.delta >= agent.rho / 2:
            errors.append(
                f"agent.delta={agent.delta} >= rho/2={agent.rho / 2}: verletzt jede Voraussetzung"
            )
        if agent.delta is not None and agent.delta < 0:
            errors.append(f"agent.delta muss >= 0 sein: {agent.delta}")
        if agent.delta_fraction is not None and not (0.0 <= agent.delta_fraction < 1.0):
            errors.append(f"agent.delta_fraction muss in [0, 1) liegen: {agent.delta_fraction}")
        if not (0.0 < agent.p < 1.0):
            errors.append(f"agent.p muss in (0, 1) liegen: {agent.p}")
        if agent.delta_r is not None and agent.delta_r <= 0:
            errors.append(f"agent.delta_r muss > 0 sein: {agent.delta_r}")
        if agent.c <= 1.0:
            errors.append(f"agent.c muss > 1 sein: {agent.c}")
        if agent.dim_e_value is not None and agent.dim_e_value < 1:
            errors.append(f"agent.dim_e_value muss >= 1 sein: {agent.dim_e_value}")

        gap_lo, gap_hi = as_range(instance.target_gap)
        if not (0.0 < gap_lo <= gap_hi <= 1.0):
            errors.append(f"instance.target_gap muss in (0, 1] liegen: {instance.target_gap}")
        for name in ("horizon", "level_width", "actions", "d", "eluder_points"):
            lo, hi = as_range(getattr(instance, name))
            if lo < 1 or hi < lo:
                errors.append(f"instance.{name} ungueltig: {getattr(instance, name)}")
        if self.mode in ("linear", "verify") and as_range(instance.d)[0] < 2:
            errors.append(f"instance.d muss >= 2 sein: {instance.d}")
        if as_range(instance.eluder_points)[1] > 12:
            errors.append("instance.eluder_points darf hoechstens 12 sein (Brute Force)")
        if instance.class_size < 1:
            errors.append(f"instance.class_size muss >= 1 sein: {instance.class_size}")
        eps_a, eps_b = instance.eluder_eps
        if not (0.0 < eps_a < eps_b):
            errors.append(f"instance.eluder_eps braucht 0 < a < b: {instance.eluder_eps}")
        if instance.delta_target < 0:
            errors.append(f"instance.delta_target muss >= 0 sein: {instance.delta_target}")
        return errors

    def echo(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)


def as_range(value: Union[int, float, tuple, list]) -> tuple:
    """Einzelwert oder Bereich -> ``(lo, hi)``."""
    if isinstance(value, (tuple, list)):
        return tuple(value)
    return (value, value)


def _read_yaml(path: Path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def _apply_overrides(data: dict, overrides: dict[str, Any]) -> dict:
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = data
        parts = dotted.split(".")
        for part in parts[:-1]:
            node[part] = dict(node.get(part) or {})
            node = node[part]
        node[parts[-1]] = value
    return data
