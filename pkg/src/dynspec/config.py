"""Protocol configuration documents (JSON) and narratives."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .engine import NarrativeStep
from .kernel import Atom
from .specspace import (
    DEFAULT_INCONSISTENT,
    DEFAULT_PINNED,
    DEFAULT_UTILITIES,
    DoF,
    LevelCatalog,
    SpecSpace,
    Tables,
    build_tables,
    reference_run_problems,
)

ROLES = ("chair", "fcs", "subject")
_SYMBOL = re.compile(r"^[a-z][A-Za-z0-9_]*$")


class ConfigError(ValueError):
    pass


@dataclass
class ProtocolConfig:
    agents: dict = field(default_factory=dict)  # agent -> level-0 role
    manipulation_types: tuple = ("app_A", "app_B")
    levels: int = 3
    catalog: dict = field(default_factory=dict)  # level -> LevelCatalog
    pinned: dict = field(default_factory=lambda: dict(DEFAULT_PINNED))
    points: dict = field(default_factory=dict)  # level -> list of ids (None = all)
    initial_points: dict = field(default_factory=lambda: {0: "sp9", 1: "sp27"})
    top_standing: str = "three_quarters"
    threshold_d: dict = field(default_factory=lambda: {0: 4, 1: 2})
    threshold_eu: dict = field(default_factory=lambda: {0: 5, 1: 5})
    utilities: dict = field(default_factory=lambda: dict(DEFAULT_UTILITIES))
    scenario: str | None = None
    inconsistent: tuple = DEFAULT_INCONSISTENT
    rmt_type: str | None = None
    c_alloc_max: int = 10
    int_max: int = 10
    concurrency_bound: int | None = 1
    vote_exempt: bool = True
    sanction_decay: int | None = None
    governance: bool = False
    check_reference_run: bool = False
    name: str = ""

    def __post_init__(self):
        from .specspace import DEFAULT_CATALOG
        if not self.catalog:
            self.catalog = dict(DEFAULT_CATALOG)
        self.catalog = {int(k): v for k, v in self.catalog.items()}
        self.points = {int(k): v for k, v in self.points.items()}
        self.initial_points = {int(k): v for k, v in self.initial_points.items()}
        self.threshold_d = {int(k): int(v) for k, v in self.threshold_d.items()}
        self.threshold_eu = {int(k): int(v) for k, v in self.threshold_eu.items()}
        self.manipulation_types = tuple(self.manipulation_types)
        if self.rmt_type is None and self.manipulation_types:
            self.rmt_type = self.manipulation_types[0]
        self.space = SpecSpace(self.catalog, self.pinned)
        self.tables: Tables = build_tables(self.space, self.utilities, self.threshold_d,
                                           self.threshold_eu, self.inconsistent, self.scenario)
        self.validate()

    # -- accessors
    def with_role(self, role: str) -> list:
        return [a for a, r in self.agents.items() if r == role]

    @property
    def chair(self) -> str:
        return self.with_role("chair")[0]

    @property
    def fcs(self) -> str:
        return self.with_role("fcs")[0]

    @property
    def subjects(self) -> list:
        return self.with_role("subject")

    @property
    def dof_levels(self) -> list:
        return list(range(self.levels - 1))

    def level_points(self, level: int) -> list:
        ids = [p.id for p in self.space.enumerate_points(level)]
        chosen = self.points.get(level)
        if chosen is None:
            return ids
        return [pid for pid in ids if pid in set(chosen)]

    @property
    def eu_max(self) -> int:
        values = [v for table in self.tables.utilities.values() for v in table.values()]
        values += list(self.threshold_eu.values())
        return max([self.int_max] + values)

    @property
    def d_threshold_max(self) -> int:
        return max([self.int_max] + list(self.threshold_d.values()))

    def validate(self) -> None:
        problems = []
        for name in list(self.agents) + list(self.manipulation_types):
            if not _SYMBOL.match(name):
                problems.append(f"{name!r} is not a valid lower-case symbol")
        for a, r in self.agents.items():
            if r not in ROLES:
                problems.append(f"agent {a} has unknown role {r}")
        if len(self.with_role("chair")) != 1:
            problems.append("exactly one chair is required")
        if len(self.with_role("fcs")) != 1:
            problems.append("exactly one fcs is required")
        if len(self.subjects) < 2:
            problems.append("at least two subjects are required")
        if len(self.manipulation_types) < 1:
            problems.append("at least one manipulation type is required")
        if self.rmt_type not in self.manipulation_types:
            problems.append(f"rmt type {self.rmt_type} is not a manipulation type")
        if self.levels != len(self.catalog) + 1:
            problems.append(f"{self.levels} levels need DoF catalogs for levels 0..{self.levels - 2}")
        for level in self.dof_levels:
            if level not in self.catalog:
                problems.append(f"level {level} has no DoF catalog")
                continue
            pts = self.level_points(level)
            if len(pts) < 2:
                problems.append(f"level {level} needs at least 2 specification points")
            init = self.initial_points.get(level)
            if init not in pts:
                problems.append(f"initial point {init} of level {level} is not among its points")
            elif not self.tables.properties[init]:
                problems.append(f"initial point {init} of level {level} fails the properties")
            if level not in self.threshold_d or level not in self.threshold_eu:
                problems.append(f"level {level} needs both thresholds")
        if 1 in self.catalog:
            standing = self.space.dof(1, "standing").values if any(
                d.name == "standing" for d in self.catalog[1].dofs) else ()
            if not standing:
                problems.append("level 1 needs a 'standing' DoF")
            elif self.top_standing not in standing:
                problems.append(f"unknown top-level standing rule {self.top_standing}")
        if 0 in self.catalog:
            names = [d.name for d in self.catalog[0].dofs]
            for need in ("bc", "per_assign", "per_mpt"):
                if need not in names:
                    problems.append(f"level 0 needs a {need!r} DoF")
        if self.sanction_decay is not None and self.sanction_decay < 1:
            problems.append("sanction_decay must be a positive number of steps")
        if self.concurrency_bound is not None and self.concurrency_bound < 0:
            problems.append("concurrency_bound must be non-negative")
        if self.check_reference_run and not problems:
            problems += reference_run_problems(self.space, self.tables, self.initial_points)
        if problems:
            raise ConfigError("; ".join(problems))


def _catalog_from_json(doc: Mapping) -> dict:
    out = {}
    for level, spec in doc.items():
        dofs = tuple(DoF(d["name"], tuple(str(v) for v in d["values"])) for d in spec["dofs"])
        weights = tuple(int(w) for w in spec.get("weights", [1] * len(dofs)))
        out[int(level)] = LevelCatalog(dofs, weights)
    return out


def config_from_dict(doc: Mapping) -> ProtocolConfig:
    doc = dict(doc)
    kwargs = {}
    simple_keys = ("manipulation_types", "levels", "top_standing", "threshold_d", "threshold_eu",
                   "utilities", "scenario", "rmt_type", "c_alloc_max", "int_max",
                   "concurrency_bound", "vote_exempt", "sanction_decay", "governance",
                   "check_reference_run", "name", "initial_points")
    for key in simple_keys:
        if key in doc:
            kwargs[key] = doc.pop(key)
    if "agents" in doc:
        kwargs["agents"] = dict(doc.pop("agents"))
    if "catalog" in doc:
        kwargs["catalog"] = _catalog_from_json(doc.pop("catalog"))
    if "pinned" in doc:
        kwargs["pinned"] = {pid: (int(v["level"]), tuple(str(x) for x in v["values"]))
                            for pid, v in doc.pop("pinned").items()}
    if "points" in doc:
        kwargs["points"] = {int(k): v for k, v in doc.pop("points").items()}
    if "inconsistent" in doc:
        kwargs["inconsistent"] = tuple((int(x["level"]), tuple(str(v) for v in x["pattern"]))
                                       for x in doc.pop("inconsistent"))
    if doc:
        raise ConfigError(f"unknown configuration keys: {sorted(doc)}")
    try:
        return ProtocolConfig(**kwargs)
    except (TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def load_json(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_config(path) -> ProtocolConfig:
    return config_from_dict(load_json(path))


def bundled(name: str) -> Path:
    return Path(str(resources.files("dynspec") / "data" / name))


def default_config() -> ProtocolConfig:
    return load_config(bundled("default.json"))


def minimal_config() -> ProtocolConfig:
    return load_config(bundled("minimal.json"))


def ground_action(action: str, args) -> str:
    args = [str(a) for a in args]
    return f"{action}({','.join(args)})" if args else action


def narrative_from_list(doc) -> list:
    if not isinstance(doc, list):
        raise ConfigError("a narrative is a JSON array of steps")
    steps = []
    for i, item in enumerate(doc):
        try:
            time = int(item["time"])
            events = tuple(ground_action(e["action"], e.get("args", [])) for e in item["events"])
            observe = tuple(Atom(ground_action(o["fluent"], o.get("args", [])), str(o["value"]))
                            for o in item.get("observe", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"narrative step {i}: malformed ({exc})") from None
        if time < 0:
            raise ConfigError(f"narrative step {i}: negative time")
        if not events:
            raise ConfigError(f"narrative step {i}: no events")
        steps.append(NarrativeStep(time, events, observe))
    return steps


def load_narrative(path) -> list:
    return narrative_from_list(load_json(path))
