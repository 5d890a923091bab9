"""
Pruefung der Zaehler gegen die geschlossenen Schranken.

Jede Pruefung betrachtet nur Zeilen, deren Voraussetzung erfuellt ist
(``premise_satisfied`` bzw. ``dataset_premise``); Zeilen ohne erfuellte
Voraussetzung werden nie gegen eine Schlussfolgerung geprueft.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import pandas as pd

from .sweep import STATUS_OK, Report, normalize_frame

# Relative Toleranz fuer Gleitkomma-Vergleiche gegen Schranken
BOUND_TOL = 1e-9
RETURN_TOL = 1e-9

REQUIRED_COLUMNS = {
    "linear": ("matched_pi_star", "premise_satisfied", "data_additions", "bound_data_additions", "max_return_error"),
    "general": ("matched_pi_star", "premise_satisfied", "dataset_premise", "y_size", "bound_y_size", "bound_y_size_c"),
    "stochastic": ("matched_pi_star", "premise_satisfied", "estimate_calls", "bound_estimates"),
    "eluder": ("eluder_brute_a", "eluder_brute_b", "eluder_greedy_a", "eluder_greedy_b"),
}


class MissingCountersError(ValueError):
    """Eine Report-Zeile hat nicht alle Zaehler, die eine Pruefung braucht."""


@dataclass
class CheckLine:
    """Ergebnis einer Pruefung.

    Attributes:
        name: Name der Ungleichung
        mode: Modus der gepruefte Zeilen
        checked: Anzahl gepruefter Zeilen
        bound: Schranke (bei zeilenweisen Schranken die kleinste)
        observed: Beobachtetes Maximum (bzw. Rate)
        passed: True wenn alle gepruefte Zeilen bestehen
        offending_seeds: Seeds der verletzenden Zeilen
    """

    name: str
    mode: str
    checked: int
    bound: Optional[float]
    observed: Optional[float]
    passed: bool
    offending_seeds: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def describe(self) -> str:
        status = "ok" if self.passed else "VERLETZT"
        text = (
            f"{self.mode:<10} {self.name:<28} n={self.checked:<4} "
            f"bound={_fmt(self.bound)} observed={_fmt(self.observed)} {status}"
        )
        if self.offending_seeds:
            text += f" seeds={self.offending_seeds}"
        return text


@dataclass
class VerificationResult:
    lines: list[CheckLine]

    @property
    def passed(self) -> bool:
        return all(line.passed for line in self.lines)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [line.to_dict() for line in self.lines]}


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6g}"


def _seeds(frame: pd.DataFrame) -> list[int]:
    return sorted(int(s) for s in frame["seed"])


def _require(frame: pd.DataFrame, mode: str) -> None:
    missing = [c for c in REQUIRED_COLUMNS[mode] if c not in frame.columns]
    if missing:
        raise MissingCountersError(f"Report ohne Spalten fuer {mode}: {missing}")
    ok = frame[frame["status"] == STATUS_OK]
    for column in REQUIRED_COLUMNS[mode]:
        if column in ("dataset_premise",):
            continue
        absent = ok[ok[column].isna()]
        if len(absent):
            raise MissingCountersError(
                f"Zaehler '{column}' fehlt in {mode}-Zeilen mit Seeds {_seeds(absent)}"
            )


def _bound_check(name: str, mode: str, rows: pd.DataFrame, counter: str, bound: str) -> CheckLine:
    if rows.empty:
        return CheckLine(name, mode, 0, None, None, True)
    observed = rows[counter].astype(float)
    limit = rows[bound].astype(float)
    offending = rows[observed > limit * (1.0 + BOUND_TOL) + BOUND_TOL]
    return CheckLine(
        name,
        mode,
        len(rows),
        float(limit.min()),
        float(observed.max()),
        offending.empty,
        _seeds(offending),
    )


def _all_check(name: str, mode: str, rows: pd.DataFrame, mask: pd.Series) -> CheckLine:
    offending = rows[~mask]
    rate = float(mask.mean()) if len(rows) else None
    return CheckLine(name, mode, len(rows), 1.0 if len(rows) else None, rate, offending.empty, _seeds(offending))


def _completed_check(mode: str, rows: pd.DataFrame) -> CheckLine:
    # Abbrueche zaehlen, ausser die Voraussetzung war nachweislich verletzt
    gated = rows[rows["premise_satisfied"].fillna(True)] if "premise_satisfied" in rows else rows
    return _all_check("trials completed", mode, gated, (gated["status"] == STATUS_OK).astype(bool))


def _linear_checks(rows: pd.DataFrame) -> list[CheckLine]:
    premised = rows[(rows["status"] == STATUS_OK) & rows["premise_satisfied"].fillna(False)]
    return [
        _completed_check("linear", rows),
        _bound_check("data additions <= 2d log(16/rho^2)", "linear", premised, "data_additions", "bound_data_additions"),
        _all_check("policy matches pi*", "linear", premised, premised["matched_pi_star"].fillna(False).astype(bool)),
        _all_check(
            "explore returns equal V*",
            "linear",
            premised,
            premised["max_return_error"].astype(float) <= RETURN_TOL,
        ),
    ]


def _general_checks(rows: pd.DataFrame) -> list[CheckLine]:
    ok = rows[rows["status"] == STATUS_OK]
    premised = ok[ok["premise_satisfied"].fillna(False)]
    dataset = ok[ok["dataset_premise"].fillna(False)]
    return [
        _completed_check("general", rows),
        _all_check("policy matches pi*", "general", premised, premised["matched_pi_star"].fillna(False).astype(bool)),
        _bound_check("|Y| <= 18 dim_E", "general", premised, "y_size", "bound_y_size"),
        _bound_check("|Y| <= c dim_E", "general", dataset, "y_size", "bound_y_size_c"),
    ]


def _stochastic_checks(rows: pd.DataFrame, success_threshold: float) -> list[CheckLine]:
    ok = rows[rows["status"] == STATUS_OK]
    premised = ok[ok["premise_satisfied"].fillna(False)]
    matched = premised["matched_pi_star"].fillna(False).astype(bool)
    rate = float(matched.mean()) if len(premised) else None
    success = CheckLine(
        "success rate >= threshold",
        "stochastic",
        len(premised),
        success_threshold,
        rate,
        rate is None or rate >= success_threshold,
        _seeds(premised[~matched]) if rate is not None and rate < success_threshold else [],
    )
    # Die Schranke der Schaetzungen folgt aus dem Erfolgsereignis
    return [
        _completed_check("stochastic", rows),
        success,
        _bound_check("estimates <= 18 dim_E H", "stochastic", premised[matched], "estimate_calls", "bound_estimates"),
    ]


def _eluder_checks(rows: pd.DataFrame) -> list[CheckLine]:
    ok = rows[rows["status"] == STATUS_OK]
    brute_a, brute_b = ok["eluder_brute_a"], ok["eluder_brute_b"]
    return [
        _completed_check("eluder", rows),
        _all_check("dim(eps_a) >= dim(eps_b)", "eluder", ok, (brute_a >= brute_b).astype(bool)),
        _all_check(
            "greedy <= brute force",
            "eluder",
            ok,
            ((ok["eluder_greedy_a"] <= brute_a) & (ok["eluder_greedy_b"] <= brute_b)).astype(bool),
        ),
    ]


def verify_bounds(
    report: Union[Report, pd.DataFrame],
    success_threshold: float = 0.85,
) -> VerificationResult:
    """Prueft alle Zeilen eines Reports gegen ihre Schranken.

    Args:
        report: Report oder DataFrame (z.B. aus ``read_report_csv``)
        success_threshold: Mindest-Erfolgsrate fuer stochastische Zeilen

    Raises:
        MissingCountersError: wenn Zaehler fehlen
    """
    frame = report.frame() if isinstance(report, Report) else normalize_frame(report)
    if "mode" not in frame.columns or "seed" not in frame.columns:
        raise MissingCountersError("Report ohne Spalten 'mode' und 'seed'")

    lines: list[CheckLine] = []
    for mode in sorted(frame["mode"].unique()):
        rows = frame[frame["mode"] == mode]
        if mode not in REQUIRED_COLUMNS:
            raise MissingCountersError(f"Unbekannter Modus im Report: {mode}")
        _require(rows, mode)
        if mode == "linear":
            lines.extend(_linear_checks(rows))
        elif mode == "general":
            lines.extend(_general_checks(rows))
        elif mode == "stochastic":
            lines.extend(_stochastic_checks(rows, success_threshold))
        else:
            lines.extend(_eluder_checks(rows))
    return VerificationResult(lines)
