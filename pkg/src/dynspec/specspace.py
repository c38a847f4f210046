"""Specification space: DoF catalogs, points, ranking, the weighted Manhattan metric and the
utility/threshold/properties tables, emitted as ground static facts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .schematic import Ref, SchematicLaw, SCmp, SHolds


class CatalogError(ValueError):
    pass


class LevelError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class DoF:
    name: str
    values: tuple

    def __post_init__(self):
        if len(self.values) < 2:
            raise CatalogError(f"DoF {self.name} needs at least 2 values")
        if len(set(self.values)) != len(self.values):
            raise CatalogError(f"DoF {self.name} has duplicate values")


@dataclass(frozen=True)
class LevelCatalog:
    dofs: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.weights) != len(self.dofs):
            raise CatalogError("one weight per DoF is required")
        if any(w < 0 for w in self.weights) or not any(w > 0 for w in self.weights):
            raise CatalogError("weights must be non-negative with at least one positive")


@dataclass(frozen=True)
class SpecificationPoint:
    id: str
    level: int
    values: tuple


DEFAULT_CATALOG = {
    0: LevelCatalog(
        (DoF("bc", ("random", "fcfs", "rmt", "ns")),
         DoF("per_assign", ("3", "6", "9")),
         DoF("per_mpt", ("any_type", "expressed_type"))),
        (2, 1, 1)),
    1: LevelCatalog((DoF("standing", ("simple", "two_thirds", "three_quarters")),), (1,)),
}

DEFAULT_PINNED = {
    "sp1": (0, ("fcfs", "9", "any_type")),
    "sp2": (0, ("rmt", "9", "expressed_type")),
    "sp3": (0, ("random", "3", "any_type")),
    "sp26": (1, ("simple",)),
}


@dataclass
class SpecSpace:
    catalog: Mapping[int, LevelCatalog] = field(default_factory=lambda: dict(DEFAULT_CATALOG))
    pinned: Mapping[str, tuple] = field(default_factory=lambda: dict(DEFAULT_PINNED))

    def __post_init__(self):
        self.catalog = {int(k): v for k, v in self.catalog.items()}
        self._points: dict[int, list] = {}
        self._by_id: dict[str, SpecificationPoint] = {}
        taken = set(self.pinned)
        pinned_at = {}
        for pid, (level, values) in self.pinned.items():
            if level not in self.catalog:
                raise LevelError(f"pinned point {pid} refers to level {level} without DoF")
            pinned_at[(level, tuple(values))] = pid
        counter = 1
        for level in sorted(self.catalog):
            cat = self.catalog[level]
            pts = []
            for combo in itertools.product(*(d.values for d in cat.dofs)):
                pid = pinned_at.pop((level, combo), None)
                if pid is None:
                    while f"sp{counter}" in taken:
                        counter += 1
                    pid = f"sp{counter}"
                    taken.add(pid)
                pts.append(SpecificationPoint(pid, level, combo))
                self._by_id[pid] = pts[-1]
            self._points[level] = pts
        if pinned_at:
            bad = ", ".join(f"{v}" for v in pinned_at.values())
            raise CatalogError(f"pinned points with values outside the catalog: {bad}")

    @property
    def levels(self) -> list:
        return sorted(self.catalog)

    def enumerate_points(self, level: int) -> list:
        if level not in self._points:
            raise LevelError(f"level {level} has no DoF")
        return list(self._points[level])

    def point(self, pid: str) -> SpecificationPoint:
        try:
            return self._by_id[pid]
        except KeyError:
            raise CatalogError(f"unknown specification point {pid}") from None

    def find(self, level: int, values: Sequence[str]) -> SpecificationPoint:
        values = tuple(str(v) for v in values)
        for p in self.enumerate_points(level):
            if p.values == values:
                return p
        raise CatalogError(f"no point {values} at level {level}")

    def dof(self, level: int, name: str) -> DoF:
        for d in self.catalog[level].dofs:
            if d.name == name:
                return d
        raise CatalogError(f"level {level} has no DoF {name}")

    def rank(self, level: int, dof: str, value: str) -> int:
        d = self.dof(level, dof)
        try:
            return d.values.index(str(value))
        except ValueError:
            raise CatalogError(f"{value!r} is not a value of DoF {dof}") from None

    def ranks(self, p: SpecificationPoint) -> tuple:
        cat = self.catalog[p.level]
        return tuple(d.values.index(v) for d, v in zip(cat.dofs, p.values))

    def distance(self, p, q) -> int:
        p = self.point(p) if isinstance(p, str) else p
        q = self.point(q) if isinstance(q, str) else q
        if p.level != q.level:
            raise LevelError(f"cannot compare points of levels {p.level} and {q.level}")
        weights = self.catalog[p.level].weights
        return sum(w * abs(a - b) for w, a, b in zip(weights, self.ranks(p), self.ranks(q)))

    def max_distance(self, level: int) -> int:
        cat = self.catalog[level]
        return sum(w * (len(d.values) - 1) for w, d in zip(cat.weights, cat.dofs))

    def matches(self, p: SpecificationPoint, pattern: Sequence[str]) -> bool:
        return len(pattern) == len(p.values) and all(
            x == "*" or str(x) == v for x, v in zip(pattern, p.values))


@dataclass
class Tables:
    """Expected utility per scenario, thresholds, and the design-time properties flags."""

    utilities: Mapping[str, Mapping[str, int]]  # scenario -> point id -> eu
    threshold_d: Mapping[int, int]
    threshold_eu: Mapping[int, int]
    properties: Mapping[str, bool]  # point id -> flag
    scenario: str = ""

    def eu(self, pid: str, scenario: str | None = None) -> int:
        return self.utilities[scenario or self.scenario][pid]


def build_tables(space: SpecSpace, utilities: Mapping[str, Mapping], threshold_d: Mapping,
                 threshold_eu: Mapping, inconsistent: Sequence = (), scenario: str | None = None,
                 default_eu: int = 5) -> Tables:
    """Expand compact utility specs ({"default": n, "overrides": {...}}) into full tables."""
    all_ids = [p.id for lv in space.levels for p in space.enumerate_points(lv)]
    full = {}
    for name, spec in utilities.items():
        base = spec.get("default", default_eu)
        table = {pid: base for pid in all_ids}
        for pid, v in spec.get("overrides", {}).items():
            space.point(pid)
            table[pid] = int(v)
        full[name] = table
    props = {pid: True for pid in all_ids}
    for level, pattern in inconsistent:
        for p in space.enumerate_points(int(level)):
            if space.matches(p, pattern):
                props[p.id] = False
    if scenario is None:
        scenario = next(iter(full))
    return Tables(full, {int(k): int(v) for k, v in threshold_d.items()},
                  {int(k): int(v) for k, v in threshold_eu.items()}, props, scenario)


DEFAULT_UTILITIES = {"normal": {"default": 5, "overrides": {"sp26": 6, "sp27": 4, "sp9": 6, "sp3": 3}}}
DEFAULT_INCONSISTENT = ((0, ("rmt", "*", "any_type")),)


def _fact(name: str, args, value) -> SchematicLaw:
    ref = Ref(name, tuple(Ref(str(a)) for a in args))
    return SchematicLaw("caused", SCmp("=", ref, Ref(str(value))))


def _bool_fact(name: str, args, flag: bool) -> SchematicLaw:
    ref = Ref(name, tuple(Ref(str(a)) for a in args))
    return SchematicLaw("caused", SHolds(ref) if flag else SCmp("=", ref, Ref("f")))


def emit_facts(space: SpecSpace, tables: Tables, points: Mapping[int, Sequence[str]] | None = None,
               eu_max: int | None = None, scenario_fluent: str | None = None) -> list:
    """Ground static facts for dof, distance, properties and eu.

    `points` restricts each level to a subset of point ids. With `scenario_fluent`, eu facts are
    conditioned on the named environment fluent instead of holding unconditionally.
    """
    out = []
    for level in space.levels:
        ids = _ids(space, level, points)
        dmax = space.max_distance(level)
        for pid in ids:
            p = space.point(pid)
            for d, v in zip(space.catalog[level].dofs, p.values):
                out.append(_fact("dof", (d.name, pid), v))
        for a in ids:
            for b in ids:
                n = space.distance(a, b)
                if not 0 <= n <= dmax:
                    raise DomainError(f"distance {n} outside 0..{dmax}")
                out.append(_fact("distance", (a, b, level), n))
        for pid in ids:
            out.append(_bool_fact("properties", (pid, level), tables.properties[pid]))
        scenarios = [tables.scenario] if scenario_fluent is None else list(tables.utilities)
        for sc in scenarios:
            for pid in ids:
                v = tables.utilities[sc][pid]
                if eu_max is not None and not 0 <= v <= eu_max:
                    raise DomainError(f"eu({pid}) = {v} outside 0..{eu_max}")
                law = _fact("eu", (pid, level), v)
                if scenario_fluent is not None:
                    cond = SCmp("=", Ref(scenario_fluent), Ref(sc))
                    law = SchematicLaw("caused", law.head, cond)
                out.append(law)
    return out


def _ids(space: SpecSpace, level: int, points) -> list:
    all_ids = [p.id for p in space.enumerate_points(level)]
    if not points or points.get(level) is None:
        return all_ids
    chosen = list(points[level])
    for pid in chosen:
        if space.point(pid).level != level:
            raise LevelError(f"{pid} is not a point of level {level}")
    return [pid for pid in all_ids if pid in set(chosen)]


def reference_run_problems(space: SpecSpace, tables: Tables, actual: Mapping[int, str]) -> list:
    """Consistency conditions the bundled reference run needs from thresholds and utilities."""
    problems = []
    try:
        sp26, sp3 = space.point("sp26"), space.point("sp3")
    except CatalogError as exc:
        return [str(exc)]
    a0, a1 = actual.get(0), actual.get(1)
    if a0 is None or a1 is None:
        return ["initial points for levels 0 and 1 are required"]
    if space.distance(sp26, a1) > tables.threshold_d[1]:
        problems.append("the level-1 proposal of sp26 exceeds threshold_d(1)")
    if tables.eu("sp26") < tables.threshold_eu[1]:
        problems.append("eu(sp26) is below threshold_eu(1)")
    if space.distance(sp3, a0) > tables.threshold_d[0]:
        problems.append("the level-0 proposal of sp3 exceeds threshold_d(0)")
    if tables.eu("sp3") >= tables.threshold_eu[0]:
        problems.append("eu(sp3) must be below threshold_eu(0)")
    if tables.eu("sp3") >= tables.eu(a0):
        problems.append("eu(sp3) must be below the utility of the initial level-0 point")
    if not tables.properties["sp26"] or not tables.properties["sp3"]:
        problems.append("sp26 and sp3 must satisfy the properties")
    return problems

