"""Property files: universally quantified state and transition queries over a protocol.

A property is checked once per binding of its schematic variables; it holds when every
binding holds. Property files are JSON arrays of objects such as

    {"name": "p1", "kind": "states", "phi": "...", "psi": "...",
     "bindings": [{"S": "agent", "PL": [1]}], "distinct": [["S", "C"]]}

Transition properties use "pre", "label" and "post" instead of "phi" and "psi".
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import ConfigError, ProtocolConfig, load_json
from .engine import QueryReport
from .protocol import Protocol

KINDS = {"states": ("phi", "psi"), "transitions": ("pre", "label", "post")}


@dataclass(frozen=True)
class PropertySpec:
    name: str
    kind: str
    formulas: dict
    bindings: tuple = ({},)
    distinct: tuple = ()
    description: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"property {self.name}: kind must be one of {sorted(KINDS)}")
        missing = [k for k in KINDS[self.kind] if k not in self.formulas]
        if missing:
            raise ConfigError(f"property {self.name}: missing {missing}")


@dataclass
class PropertyResult:
    spec: PropertySpec
    reports: list = field(default_factory=list)  # (binding, QueryReport)

    @property
    def holds(self) -> bool:
        return all(r.holds for _, r in self.reports)

    @property
    def counterexamples(self) -> list:
        return [(b, c) for b, r in self.reports for c in r.counterexamples]

    @property
    def witnesses(self) -> int:
        return sum(len(r.witnesses) for _, r in self.reports)

    def to_dict(self) -> dict:
        failing = [{"binding": b, **r.to_dict()} for b, r in self.reports if not r.holds]
        return {
            "name": self.spec.name,
            "description": self.spec.description,
            "verdict": "holds" if self.holds else "fails",
            "bindings": len(self.reports),
            "witnesses": self.witnesses,
            "nodes": sum(r.statistics.get("nodes", 0) for _, r in self.reports),
            "failing": failing,
        }


def properties_from_list(doc) -> list:
    if not isinstance(doc, list):
        raise ConfigError("a property file is a JSON array")
    out = []
    for i, item in enumerate(doc):
        try:
            kind = item["kind"]
            formulas = {k: item[k] for k in KINDS.get(kind, ()) if k in item}
            out.append(PropertySpec(item.get("name", f"property{i + 1}"), kind, formulas,
                                    tuple(item.get("bindings", [{}])),
                                    tuple(tuple(p) for p in item.get("distinct", [])),
                                    item.get("description", "")))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"property {i}: malformed ({exc})") from None
    return out


def load_properties(path) -> list:
    return properties_from_list(load_json(path))


def expand_bindings(spec: PropertySpec, sorts: dict) -> list:
    envs = []
    for binding in spec.bindings:
        names = sorted(binding)
        ranges = []
        for n in names:
            r = binding[n]
            if isinstance(r, str):
                if r not in sorts:
                    raise ConfigError(f"property {spec.name}: unknown sort {r}")
                ranges.append([str(x) for x in sorts[r]])
            else:
                ranges.append([str(x) for x in r])
        for values in itertools.product(*ranges):
            env = dict(zip(names, values))
            if any(a in env and b in env and env[a] == env[b] for a, b in spec.distinct):
                continue
            envs.append(env)
    return envs


def check_property(protocol: Protocol, spec: PropertySpec, max_witnesses: int = 1,
                   max_counterexamples: int = 5) -> PropertyResult:
    result = PropertyResult(spec)
    engine = protocol.engine
    for env in expand_bindings(spec, protocol.schematic.sorts):
        f = {k: protocol.formula(v, env) for k, v in spec.formulas.items()}
        if spec.kind == "states":
            report = engine.check_all_states(f["phi"], f["psi"], max_witnesses,
                                             max_counterexamples, spec.name)
        else:
            report = engine.check_all_transitions(f["pre"], f["label"], f["post"], max_witnesses,
                                                  max_counterexamples, spec.name)
        result.reports.append((env, report))
    return result


def _worker(args) -> PropertyResult:
    cfg, spec, budget = args
    return check_property(Protocol(cfg, budget), spec)


def check_properties(cfg: ProtocolConfig, specs: list, budget: int = 2 ** 22,
                     workers: int = 1) -> list:
    """Check every property; results come back in file order whatever the worker count."""
    if workers <= 1 or len(specs) <= 1:
        protocol = Protocol(cfg, budget)
        return [check_property(protocol, s) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_worker, [(cfg, s, budget) for s in specs]))


__all__ = ["PropertySpec", "PropertyResult", "QueryReport", "load_properties",
           "properties_from_list", "expand_bindings", "check_property", "check_properties"]
