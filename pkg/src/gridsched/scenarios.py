"""Renewable availability scenarios.

A scenario is a probability plus one MW availability profile per RES
unit.  Profiles can be block-averaged so the availability is constant
within multi-hour blocks (default three hours), which is how day-ahead
wind inputs are coarsened to keep the reconfiguration problem tractable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

PROBABILITY_TOL = 1e-9


@dataclass(frozen=True)
class Scenario:
    id: str | int
    probability: float
    availability: dict[str | int, tuple[float, ...]]  # res_id -> MW per period

    def horizon(self) -> int:
        return max((len(p) for p in self.availability.values()), default=0)


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[Scenario, ...]

    @property
    def horizon(self) -> int:
        return self.scenarios[0].horizon() if self.scenarios else 0

    def probabilities(self) -> tuple[float, ...]:
        return tuple(s.probability for s in self.scenarios)

    def availability(self, scenario_idx: int, res_id: str | int, t: int) -> float:
        """Availability P^max of ``res_id`` in period ``t`` (1-based)."""
        prof = self.scenarios[scenario_idx].availability.get(res_id)
        return prof[t - 1] if prof is not None else 0.0

    def check(self) -> None:
        """Raise ValueError on any broken scenario-set invariant."""
        if not self.scenarios:
            raise ValueError("scenario set is empty")
        total = sum(s.probability for s in self.scenarios)
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        horizons = {s.horizon() for s in self.scenarios}
        if len(horizons) > 1:
            raise ValueError(f"scenarios disagree on horizon length: {sorted(horizons)}")
        for s in self.scenarios:
            if s.probability < 0:
                raise ValueError(f"scenario {s.id}: negative probability")
            for w, prof in s.availability.items():
                if any(v < 0 for v in prof):
                    raise ValueError(f"scenario {s.id}, unit {w}: negative availability")


def block_average(profile: Sequence[float], block_len: int) -> tuple[float, ...]:
    """Replace each block of ``block_len`` periods with its arithmetic mean.

    A final partial block is averaged over its own length, so the output
    horizon always equals the input horizon.
    """
    if block_len <= 0:
        raise ValueError(f"block_len must be >= 1, got {block_len}")
    values = [float(v) for v in profile]
    out: list[float] = []
    for start in range(0, len(values), block_len):
        block = values[start:start + block_len]
        mean = sum(block) / len(block)
        out.extend([mean] * len(block))
    return tuple(out)


def build_scenario_set(
    profiles: Sequence[dict[str | int, Sequence[float]]],
    probabilities: Sequence[float],
    block_len: int = 1,
    ids: Sequence[str | int] | None = None,
) -> ScenarioSet:
    """Normalize probabilities, block-average each profile, assemble the set."""
    if len(profiles) != len(probabilities):
        raise ValueError(
            f"{len(profiles)} profiles but {len(probabilities)} probabilities")
    if any(p < 0 for p in probabilities):
        raise ValueError("probabilities must be >= 0")
    total = float(sum(probabilities))
    if total <= 0:
        raise ValueError("probability weights sum to zero")
    if ids is None:
        ids = [f"s{i}" for i in range(len(profiles))]
    scenarios = tuple(
        Scenario(
            id=ids[i],
            probability=probabilities[i] / total,
            availability={w: block_average(prof, block_len)
                          for w, prof in profiles[i].items()},
        )
        for i in range(len(profiles))
    )
    out = ScenarioSet(scenarios=scenarios)
    out.check()
    return out


def synth_wind_profiles(
    seed: int,
    n_scenarios: int,
    horizon: int,
    res_ids: Sequence[str | int],
    mean_mw: float | dict[str | int, float] = 100.0,
    amplitude_mw: float = 50.0,
    step_frac: float = 0.35,
) -> list[dict[str | int, tuple[float, ...]]]:
    """Synthesize per-site wind profiles as bounded random walks.

    Each site starts at its mean and takes Gaussian steps of standard
    deviation ``step_frac * amplitude_mw``, clipped to stay inside
    ``[max(0, mean - amplitude), mean + amplitude]``.  Fully deterministic
    for a given seed; amplitude 0 yields flat profiles at the mean.
    """
    if n_scenarios < 1:
        raise ValueError("n_scenarios must be >= 1")
    rng = np.random.default_rng(seed)
    means = (mean_mw if isinstance(mean_mw, dict)
             else {w: float(mean_mw) for w in res_ids})
    profiles: list[dict[str | int, tuple[float, ...]]] = []
    for _ in range(n_scenarios):
        site_profiles: dict[str | int, tuple[float, ...]] = {}
        for w in res_ids:
            mean = means[w]
            lo = max(0.0, mean - amplitude_mw)
            hi = mean + amplitude_mw
            level = mean
            walk = []
            for _t in range(horizon):
                level = float(np.clip(
                    level + rng.normal(0.0, step_frac * amplitude_mw), lo, hi))
                walk.append(level)
            site_profiles[w] = tuple(walk)
        profiles.append(site_profiles)
    return profiles


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------

def scenario_set_to_list(scen: ScenarioSet) -> list[dict[str, Any]]:
    return [
        {
            "id": s.id,
            "probability": s.probability,
            "availability": {str(w): list(prof) for w, prof in s.availability.items()},
        }
        for s in scen.scenarios
    ]


def scenario_set_from_list(
    doc: list[dict[str, Any]],
    block_len: int = 1,
    res_id_type: type | None = None,
) -> ScenarioSet:
    """Parse a scenario array; optionally block-average on load.

    JSON object keys are always strings; pass ``res_id_type=int`` when the
    case file uses integer RES ids.
    """
    if not isinstance(doc, list) or not doc:
        raise ValueError("scenario file must be a nonempty JSON array")
    profiles = []
    probabilities = []
    ids = []
    for i, s in enumerate(doc):
        if "probability" not in s or "availability" not in s:
            raise ValueError(f"scenario[{i}]: needs 'probability' and 'availability'")
        ids.append(s.get("id", f"s{i}"))
        probabilities.append(float(s["probability"]))
        avail = s["availability"]
        if not isinstance(avail, dict):
            raise ValueError(f"scenario[{i}].availability must map res_id -> values")
        profiles.append({
            (res_id_type(w) if res_id_type is not None else w): [float(v) for v in prof]
            for w, prof in avail.items()
        })
    return build_scenario_set(profiles, probabilities, block_len=block_len, ids=ids)


def load_scenario_set(path: str | Path, block_len: int = 1,
                      res_id_type: type | None = None) -> ScenarioSet:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    return scenario_set_from_list(doc, block_len=block_len, res_id_type=res_id_type)


def save_scenario_set(scen: ScenarioSet, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(scenario_set_to_list(scen), indent=2, sort_keys=True) + "\n")


def uniform_probabilities(n: int) -> list[float]:
    return [1.0 / n] * n


def total_availability(scen: ScenarioSet, t: int) -> dict[Any, float]:
    """Per-scenario total system availability at period ``t`` (1-based)."""
    return {s.id: sum(prof[t - 1] for prof in s.availability.values())
            for s in scen.scenarios}
