"""Static grid model: buses, generators, lines, renewable units, demand.

All quantities at this layer are in physical units (MW, $, hours).
Susceptances are per-unit on ``mva_base``; the formulation layer converts
them to MW/rad when it builds flow equations.

Objects are plain frozen dataclasses and are never mutated after
construction.  Constructors do not validate; :func:`validate_system`
reports every broken invariant instead of raising, so that a loader can
show all problems at once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable

from .scenarios import ScenarioSet

Id = str | int


@dataclass(frozen=True)
class InitialStatus:
    """Generator state just before period 1.

    ``hours`` is how long the unit has been in that state.  The default is
    an off unit that has been down long enough to restart freely.
    ``dispatch`` is the pre-horizon output used by the ramp equations at
    t=1; when None it defaults to p_min for an on unit and 0 otherwise.
    """

    on: bool = False
    hours: int = 10_000
    dispatch: float | None = None


@dataclass(frozen=True)
class Bus:
    id: Id
    generator_ids: tuple[Id, ...] = ()
    res_ids: tuple[Id, ...] = ()
    inbound_line_ids: tuple[Id, ...] = ()   # lines with this bus as receiving end
    outbound_line_ids: tuple[Id, ...] = ()  # lines with this bus as sending end


@dataclass(frozen=True)
class Generator:
    id: Id
    bus_id: Id
    p_min: float
    p_max: float
    cost_linear: float      # $/MWh
    cost_no_load: float     # $/h while committed
    cost_startup: float     # $ per start
    ramp_hourly: float      # MW/h between committed periods
    ramp_startup: float     # MW allowed in the first committed period
    ramp_shutdown: float    # MW allowed into the shutdown period
    ramp_10min: float       # MW of 10-minute corrective range
    min_up: int = 1
    min_down: int = 1
    emission_rate: float = 0.0  # lbs CO2 per MWh
    initial_status: InitialStatus = field(default_factory=InitialStatus)

    def initial_dispatch(self) -> float:
        """Pre-horizon output used by the t=1 ramp equations."""
        if self.initial_status.dispatch is not None:
            return self.initial_status.dispatch
        return self.p_min if self.initial_status.on else 0.0


@dataclass(frozen=True)
class TransmissionLine:
    id: Id
    from_bus: Id            # sending end
    to_bus: Id              # receiving end
    susceptance: float      # per-unit on mva_base
    limit_long_term: float  # MW, base case
    limit_emergency: float  # MW, post-contingency
    switchable: bool = True


@dataclass(frozen=True)
class DemandProfile:
    """Per-bus MW demand over the horizon; every bus has a full row."""

    rows: dict[Id, tuple[float, ...]]
    horizon_length: int

    def at(self, bus_id: Id, t: int) -> float:
        """Demand at 1-based period ``t``; buses without a row draw 0 MW."""
        row = self.rows.get(bus_id)
        return row[t - 1] if row is not None else 0.0

    def system_load(self, t: int) -> float:
        return sum(row[t - 1] for row in self.rows.values())


@dataclass(frozen=True)
class ResUnit:
    id: Id
    bus_id: Id
    curtail_penalty: float = 100.0  # $/MWh of post-contingency curtailment


@dataclass(frozen=True)
class PowerSystem:
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    lines: tuple[TransmissionLine, ...]
    res_units: tuple[ResUnit, ...]
    demand: DemandProfile
    mva_base: float = 100.0

    def bus(self, bus_id: Id) -> Bus:
        return _index(self.buses)[bus_id]

    def generator(self, gen_id: Id) -> Generator:
        return _index(self.generators)[gen_id]

    def line(self, line_id: Id) -> TransmissionLine:
        return _index(self.lines)[line_id]

    def res_unit(self, res_id: Id) -> ResUnit:
        return _index(self.res_units)[res_id]

    @property
    def horizon(self) -> int:
        return self.demand.horizon_length


def _index(items: Iterable[Any]) -> dict[Id, Any]:
    return {item.id: item for item in items}


def build_system(
    bus_ids: Iterable[Id],
    generators: Iterable[Generator],
    lines: Iterable[TransmissionLine],
    res_units: Iterable[ResUnit],
    demand: DemandProfile,
    mva_base: float = 100.0,
) -> PowerSystem:
    """Assemble a PowerSystem, deriving the per-bus adjacency sets."""
    generators = tuple(generators)
    lines = tuple(lines)
    res_units = tuple(res_units)
    buses = []
    for b in bus_ids:
        buses.append(
            Bus(
                id=b,
                generator_ids=tuple(g.id for g in generators if g.bus_id == b),
                res_ids=tuple(w.id for w in res_units if w.bus_id == b),
                inbound_line_ids=tuple(k.id for k in lines if k.to_bus == b),
                outbound_line_ids=tuple(k.id for k in lines if k.from_bus == b),
            )
        )
    return PowerSystem(
        buses=tuple(buses),
        generators=generators,
        lines=lines,
        res_units=res_units,
        demand=demand,
        mva_base=mva_base,
    )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    path: str      # e.g. "lines[L4].limit_emergency"
    message: str

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_system(sys: PowerSystem) -> ValidationReport:
    """Check every model invariant and report all violations found."""
    out: list[Violation] = []

    def bad(path: str, message: str) -> None:
        out.append(Violation(path, message))

    bus_ids = [b.id for b in sys.buses]
    if len(set(bus_ids)) != len(bus_ids):
        bad("buses", "duplicate bus ids")
    known_buses = set(bus_ids)

    for coll, name in ((sys.generators, "generators"), (sys.lines, "lines"),
                       (sys.res_units, "res_units")):
        ids = [item.id for item in coll]
        if len(set(ids)) != len(ids):
            bad(name, f"duplicate ids in {name}")

    for g in sys.generators:
        p = f"generators[{g.id}]"
        if g.bus_id not in known_buses:
            bad(f"{p}.bus_id", f"references unknown bus {g.bus_id!r}")
        if not 0 <= g.p_min <= g.p_max:
            bad(f"{p}.p_min", f"requires 0 <= p_min <= p_max, got [{g.p_min}, {g.p_max}]")
        for attr in ("ramp_hourly", "ramp_startup", "ramp_shutdown", "ramp_10min"):
            if getattr(g, attr) < 0:
                bad(f"{p}.{attr}", "ramp limit must be >= 0")
        if g.min_up < 1:
            bad(f"{p}.min_up", "must be >= 1")
        if g.min_down < 1:
            bad(f"{p}.min_down", "must be >= 1")
        if g.emission_rate < 0:
            bad(f"{p}.emission_rate", "must be >= 0")

    for k in sys.lines:
        p = f"lines[{k.id}]"
        if k.from_bus not in known_buses:
            bad(f"{p}.from_bus", f"references unknown bus {k.from_bus!r}")
        if k.to_bus not in known_buses:
            bad(f"{p}.to_bus", f"references unknown bus {k.to_bus!r}")
        if k.from_bus == k.to_bus:
            bad(f"{p}.to_bus", "line endpoints must differ")
        if k.susceptance == 0:
            bad(f"{p}.susceptance", "must be nonzero")
        if not 0 < k.limit_long_term:
            bad(f"{p}.limit_long_term", "must be > 0")
        if k.limit_emergency < k.limit_long_term:
            bad(f"{p}.limit_emergency",
                f"emergency limit {k.limit_emergency} below long-term {k.limit_long_term}")

    for w in sys.res_units:
        p = f"res_units[{w.id}]"
        if w.bus_id not in known_buses:
            bad(f"{p}.bus_id", f"references unknown bus {w.bus_id!r}")
        if w.curtail_penalty < 0:
            bad(f"{p}.curtail_penalty", "must be >= 0")

    # adjacency consistency against line/generator/RES placement
    gen_by_bus = {b: tuple(g.id for g in sys.generators if g.bus_id == b) for b in known_buses}
    res_by_bus = {b: tuple(w.id for w in sys.res_units if w.bus_id == b) for b in known_buses}
    in_by_bus = {b: tuple(k.id for k in sys.lines if k.to_bus == b) for b in known_buses}
    out_by_bus = {b: tuple(k.id for k in sys.lines if k.from_bus == b) for b in known_buses}
    for b in sys.buses:
        p = f"buses[{b.id}]"
        if set(b.generator_ids) != set(gen_by_bus.get(b.id, ())):
            bad(f"{p}.generator_ids", "inconsistent with generator bus_id fields")
        if set(b.res_ids) != set(res_by_bus.get(b.id, ())):
            bad(f"{p}.res_ids", "inconsistent with RES bus_id fields")
        if set(b.inbound_line_ids) != set(in_by_bus.get(b.id, ())):
            bad(f"{p}.inbound_line_ids", "inconsistent with line to_bus fields")
        if set(b.outbound_line_ids) != set(out_by_bus.get(b.id, ())):
            bad(f"{p}.outbound_line_ids", "inconsistent with line from_bus fields")

    # demand rows
    T = sys.demand.horizon_length
    if T < 1:
        bad("demand.horizon_length", "must be >= 1")
    for b, row in sys.demand.rows.items():
        p = f"demand[{b}]"
        if b not in known_buses:
            bad(p, f"references unknown bus {b!r}")
        if len(row) != T:
            bad(p, f"row length {len(row)} != horizon {T}")
        if any(d < 0 for d in row):
            bad(p, "demand must be >= 0")
    for b in known_buses:
        if b not in sys.demand.rows:
            bad(f"demand[{b}]", "missing demand row for bus")

    # connectivity of the in-service network
    if sys.buses and sys.lines is not None:
        comp = _components(known_buses, [(k.from_bus, k.to_bus) for k in sys.lines
                                         if k.from_bus in known_buses and k.to_bus in known_buses])
        if len(comp) > 1:
            bad("lines", f"network is disconnected ({len(comp)} components)")

    return ValidationReport(tuple(out))


def _components(nodes: set[Id], edges: list[tuple[Id, Id]]) -> list[set[Id]]:
    adj: dict[Id, list[Id]] = {n: [] for n in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen: set[Id] = set()
    comps = []
    for n in nodes:
        if n in seen:
            continue
        stack, comp = [n], set()
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(y for y in adj[x] if y not in comp)
        seen |= comp
        comps.append(comp)
    return comps


# ---------------------------------------------------------------------------
# Penetration helpers
# ---------------------------------------------------------------------------

def scale_penetration(scen: ScenarioSet, factor: float) -> ScenarioSet:
    """Scale every availability profile by ``factor``; probabilities unchanged."""
    if factor < 0:
        raise ValueError(f"scale factor must be >= 0, got {factor}")
    return ScenarioSet(
        scenarios=tuple(
            replace(s, availability={w: tuple(factor * v for v in prof)
                                     for w, prof in s.availability.items()})
            for s in scen.scenarios
        )
    )


def align_scenarios(sys: PowerSystem, scen: ScenarioSet) -> ScenarioSet:
    """Re-key scenario availability maps onto the system's RES unit ids.

    JSON object keys are strings; a case file with integer RES ids needs
    its scenario keys coerced back.  Keys matching no unit are kept as-is
    so validation can flag them.
    """
    by_str = {str(w.id): w.id for w in sys.res_units}
    return ScenarioSet(
        scenarios=tuple(
            replace(s, availability={by_str.get(str(w), w): prof
                                     for w, prof in s.availability.items()})
            for s in scen.scenarios
        )
    )


def peak_penetration(sys: PowerSystem, scen: ScenarioSet) -> float:
    """Expected RES availability at the peak-load period over the peak load."""
    T = sys.demand.horizon_length
    if T < 1:
        raise ValueError("demand horizon is empty")
    peak_t = max(range(1, T + 1), key=sys.demand.system_load)
    peak_load = sys.demand.system_load(peak_t)
    if peak_load <= 0:
        raise ValueError("peak system load is zero")
    expected = sum(
        s.probability * sum(prof[peak_t - 1] for prof in s.availability.values())
        for s in scen.scenarios
    )
    return expected / peak_load


# ---------------------------------------------------------------------------
# JSON document I/O
# ---------------------------------------------------------------------------

class CaseFormatError(ValueError):
    """Raised when a case document is structurally invalid."""


def system_to_dict(sys: PowerSystem) -> dict[str, Any]:
    return {
        "mva_base": sys.mva_base,
        "buses": [
            {
                "id": b.id,
                "generator_ids": list(b.generator_ids),
                "res_ids": list(b.res_ids),
                "inbound_line_ids": list(b.inbound_line_ids),
                "outbound_line_ids": list(b.outbound_line_ids),
            }
            for b in sys.buses
        ],
        "generators": [
            {
                "id": g.id,
                "bus_id": g.bus_id,
                "p_min": g.p_min,
                "p_max": g.p_max,
                "cost_linear": g.cost_linear,
                "cost_no_load": g.cost_no_load,
                "cost_startup": g.cost_startup,
                "ramp_hourly": g.ramp_hourly,
                "ramp_startup": g.ramp_startup,
                "ramp_shutdown": g.ramp_shutdown,
                "ramp_10min": g.ramp_10min,
                "min_up": g.min_up,
                "min_down": g.min_down,
                "emission_rate": g.emission_rate,
                "initial_status": {
                    "on": g.initial_status.on,
                    "hours": g.initial_status.hours,
                    "dispatch": g.initial_status.dispatch,
                },
            }
            for g in sys.generators
        ],
        "lines": [
            {
                "id": k.id,
                "from_bus": k.from_bus,
                "to_bus": k.to_bus,
                "susceptance": k.susceptance,
                "limit_long_term": k.limit_long_term,
                "limit_emergency": k.limit_emergency,
                "switchable": k.switchable,
            }
            for k in sys.lines
        ],
        "res_units": [
            {"id": w.id, "bus_id": w.bus_id, "curtail_penalty": w.curtail_penalty}
            for w in sys.res_units
        ],
        "demand": [
            {"bus_id": b, "mw": list(row)} for b, row in sys.demand.rows.items()
        ],
    }


def _require(doc: dict, key: str, where: str) -> Any:
    if key not in doc:
        raise CaseFormatError(f"{where}: missing required field {key!r}")
    return doc[key]


def system_from_dict(doc: dict[str, Any]) -> PowerSystem:
    if not isinstance(doc, dict):
        raise CaseFormatError("case document must be a JSON object")
    for key in ("buses", "generators", "lines", "res_units", "demand"):
        if not isinstance(_require(doc, key, "case"), list):
            raise CaseFormatError(f"case.{key} must be an array")

    generators = []
    for i, g in enumerate(doc["generators"]):
        where = f"generators[{i}]"
        init = g.get("initial_status") or {}
        generators.append(
            Generator(
                id=_require(g, "id", where),
                bus_id=_require(g, "bus_id", where),
                p_min=float(_require(g, "p_min", where)),
                p_max=float(_require(g, "p_max", where)),
                cost_linear=float(_require(g, "cost_linear", where)),
                cost_no_load=float(_require(g, "cost_no_load", where)),
                cost_startup=float(_require(g, "cost_startup", where)),
                ramp_hourly=float(_require(g, "ramp_hourly", where)),
                ramp_startup=float(_require(g, "ramp_startup", where)),
                ramp_shutdown=float(_require(g, "ramp_shutdown", where)),
                ramp_10min=float(_require(g, "ramp_10min", where)),
                min_up=int(g.get("min_up", 1)),
                min_down=int(g.get("min_down", 1)),
                emission_rate=float(g.get("emission_rate", 0.0)),
                initial_status=InitialStatus(
                    on=bool(init.get("on", False)),
                    hours=int(init.get("hours", 10_000)),
                    dispatch=(None if init.get("dispatch") is None
                              else float(init["dispatch"])),
                ),
            )
        )

    lines = []
    for i, k in enumerate(doc["lines"]):
        where = f"lines[{i}]"
        lines.append(
            TransmissionLine(
                id=_require(k, "id", where),
                from_bus=_require(k, "from_bus", where),
                to_bus=_require(k, "to_bus", where),
                susceptance=float(_require(k, "susceptance", where)),
                limit_long_term=float(_require(k, "limit_long_term", where)),
                limit_emergency=float(_require(k, "limit_emergency", where)),
                switchable=bool(k.get("switchable", True)),
            )
        )

    res_units = [
        ResUnit(
            id=_require(w, "id", f"res_units[{i}]"),
            bus_id=_require(w, "bus_id", f"res_units[{i}]"),
            curtail_penalty=float(w.get("curtail_penalty", 100.0)),
        )
        for i, w in enumerate(doc["res_units"])
    ]

    rows: dict[Id, tuple[float, ...]] = {}
    horizon = 0
    for i, row in enumerate(doc["demand"]):
        where = f"demand[{i}]"
        mw = _require(row, "mw", where)
        if not isinstance(mw, list) or not mw:
            raise CaseFormatError(f"{where}.mw must be a nonempty array")
        rows[_require(row, "bus_id", where)] = tuple(float(v) for v in mw)
        horizon = max(horizon, len(mw))
    demand = DemandProfile(rows=rows, horizon_length=horizon)

    bus_docs = doc["buses"]
    explicit_adjacency = any(
        key in b for b in bus_docs
        for key in ("generator_ids", "res_ids", "inbound_line_ids", "outbound_line_ids")
    )
    if explicit_adjacency:
        buses = tuple(
            Bus(
                id=_require(b, "id", f"buses[{i}]"),
                generator_ids=tuple(b.get("generator_ids", ())),
                res_ids=tuple(b.get("res_ids", ())),
                inbound_line_ids=tuple(b.get("inbound_line_ids", ())),
                outbound_line_ids=tuple(b.get("outbound_line_ids", ())),
            )
            for i, b in enumerate(bus_docs)
        )
        return PowerSystem(
            buses=buses,
            generators=tuple(generators),
            lines=tuple(lines),
            res_units=tuple(res_units),
            demand=demand,
            mva_base=float(doc.get("mva_base", 100.0)),
        )
    return build_system(
        bus_ids=[_require(b, "id", f"buses[{i}]") for i, b in enumerate(bus_docs)],
        generators=generators,
        lines=lines,
        res_units=res_units,
        demand=demand,
        mva_base=float(doc.get("mva_base", 100.0)),
    )


def load_system(path: str | Path) -> PowerSystem:
    """Load a case JSON document; raises CaseFormatError with diagnostics."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseFormatError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    return system_from_dict(doc)


def save_system(sys: PowerSystem, path: str | Path) -> None:
    Path(path).write_text(json.dumps(system_to_dict(sys), indent=2, sort_keys=True) + "\n")
