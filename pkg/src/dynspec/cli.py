"""Command-line front end: replay, check, points, distance, dump-description."""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, bundled, load_config, load_narrative
from .engine import DEFAULT_BUDGET, POLICIES, AmbiguityError, BudgetExceeded, ReplayFailure
from .grounder import GroundingError
from .kernel import SignatureError
from .language import format_ground
from .properties import check_properties, load_properties
from .protocol import BuildError, Protocol, power_fluent, split_ground
from .schematic import ParseError
from .specspace import CatalogError, LevelError

EXIT_OK, EXIT_PROPERTY, EXIT_REPLAY, EXIT_INPUT, EXIT_AMBIGUOUS, EXIT_BUDGET = range(6)
INPUT_ERRORS = (ConfigError, ParseError, GroundingError, SignatureError, BuildError, CatalogError,
                LevelError, OSError)
SUMMARY_FAMILIES = ("actual_sp", "protocol", "holder", "sanctioned", "best_candidate")


def _family(name: str) -> str:
    return name.split("(", 1)[0]


def _tracer(spec: str | None):
    if not spec:
        return lambda name: True
    wanted = {x.strip() for x in spec.split(",") if x.strip()}
    return lambda name: name in wanted or _family(name) in wanted


def _summary(state) -> dict:
    out = {}
    for name, value in state.items():
        fam = _family(name)
        if fam in ("holder", "sanctioned"):
            if value == "t":
                out.setdefault(fam, []).append(split_ground(name)[1][0])
        elif fam in SUMMARY_FAMILIES:
            out[name] = value
    out.setdefault("holder", [])
    out.setdefault("sanctioned", [])
    return out


def run_report(result, config_name: str = "", trace=None) -> dict:
    """Per-step deltas plus sanction and specification-point logs for a replayed path."""
    keep = trace or (lambda name: True)
    states = result.path.states
    steps, sanctions, points = [], [], []
    for rec, before, after in zip(result.steps, states, states[1:]):
        changes = {k: [before[k], v] for k, v in after.items() if before[k] != v}
        for name, (old, new) in sorted(changes.items()):
            fam, args = _family(name), split_ground(name)[1]
            if fam == "sanctioned" and new == "t":
                sanctions.append({"time": rec.time, "agent": args[0]})
            if fam == "actual_sp":
                points.append({"time": rec.time, "level": int(args[0]), "from": old, "to": new})
        steps.append({
            "index": rec.index,
            "time": rec.time,
            "events": list(rec.events),
            "branches": rec.branches,
            "unpowered": list(rec.unpowered),
            "changes": {k: v for k, v in sorted(changes.items()) if keep(k)},
        })
    return {
        "config": config_name,
        "steps": steps,
        "sanctions": sanctions,
        "point_changes": points,
        "initial": _summary(states[0]),
        "final": _summary(states[-1]),
    }


def render_report(report: dict) -> str:
    lines = [f"replay of {len(report['steps'])} steps ({report['config'] or 'config'})"]
    for step in report["steps"]:
        head = f"[{step['time']:>4}] {' '.join(step['events'])}"
        if step["branches"] > 1:
            head += f"  (resolved among {step['branches']} successors)"
        lines.append(head)
        for e in step["unpowered"]:
            lines.append(f"       unpowered event: {e}")
        for name, (old, new) in step["changes"].items():
            lines.append(f"       {name}: {old} -> {new}")
    lines.append("sanctions: " + (", ".join(f"{s['agent']}@{s['time']}" for s in report["sanctions"])
                                  or "none"))
    for p in report["point_changes"]:
        lines.append(f"point change at {p['time']}: level {p['level']} {p['from']} -> {p['to']}")
    lines.append("final: " + ", ".join(f"{k}={v}" for k, v in report["final"].items()))
    return "\n".join(lines)


def _config(args):
    return load_config(args.config or bundled(args.default_config))


def cmd_replay(args) -> int:
    cfg = _config(args)
    narrative = load_narrative(args.narrative or bundled("table3.json"))
    protocol = Protocol(cfg, args.budget)
    policy = args.policy or ("seeded-random" if args.seed is not None else "fail")
    try:
        result = protocol.engine.replay(protocol.initial_state, narrative, policy, args.seed,
                                        power_of=power_fluent)
    except AmbiguityError as exc:
        print(f"ambiguous step {exc.index} (time {exc.time}): {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except ReplayFailure as exc:
        print(f"replay failed at step {exc.index} (time {exc.time}): {exc.reason}", file=sys.stderr)
        print(json.dumps(exc.details, indent=2, default=str), file=sys.stderr)
        return EXIT_REPLAY
    report = run_report(result, cfg.name, _tracer(args.trace_fluents))
    print(json.dumps(report, indent=2) if args.json else render_report(report))
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = _config(args)
    specs = load_properties(args.properties or bundled("properties.json"))
    results = check_properties(cfg, specs, args.budget, args.workers)
    docs = [r.to_dict() for r in results]
    if args.json:
        print(json.dumps(docs, indent=2, default=str))
    else:
        for doc in docs:
            print(f"{doc['verdict'].upper():5} {doc['name']}: {doc['bindings']} bindings, "
                  f"{doc['witnesses']} witnesses, {doc['nodes']} search nodes")
            for fail in doc["failing"]:
                print(f"      binding {fail['binding']}: "
                      f"{len(fail['counterexamples'])} counterexample(s)")
    return EXIT_OK if all(r.holds for r in results) else EXIT_PROPERTY


def cmd_points(args) -> int:
    cfg = _config(args)
    space, tables = cfg.space, cfg.tables
    rows = []
    for p in space.enumerate_points(args.level):
        rows.append({"id": p.id, "values": list(p.values), "eu": tables.eu(p.id),
                     "properties": tables.properties[p.id]})
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        names = [d.name for d in cfg.catalog[args.level].dofs]
        print(f"{'id':6} {'(' + ', '.join(names) + ')':40} {'eu':>3}  properties")
        for r in rows:
            print(f"{r['id']:6} {'(' + ', '.join(r['values']) + ')':40} {r['eu']:>3}  "
                  f"{'yes' if r['properties'] else 'no'}")
    return EXIT_OK


def cmd_distance(args) -> int:
    cfg = _config(args)
    print(cfg.space.distance(args.a, args.b))
    return EXIT_OK


def cmd_dump(args) -> int:
    protocol = Protocol(_config(args))
    print(format_ground(protocol.description) if args.ground else protocol.text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynspec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, default_config, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="protocol configuration (JSON); defaults to the bundled one")
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search node budget")
        p.set_defaults(func=func, default_config=default_config)
        return p

    p = add("replay", cmd_replay, "default.json", "replay a narrative of events")
    p.add_argument("--narrative", help="narrative (JSON); defaults to the bundled reference run")
    p.add_argument("--seed", type=int, help="seed for resolving nondeterministic steps")
    p.add_argument("--policy", choices=POLICIES, help="ambiguity policy (default: fail, or "
                   "seeded-random when --seed is given)")
    p.add_argument("--trace-fluents", help="comma-separated fluent names or families to report")
    p.add_argument("--json", action="store_true", help="machine-readable report")

    p = add("check", cmd_check, "minimal.json", "check universal properties")
    p.add_argument("--properties", help="property file (JSON); defaults to the bundled five")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--json", action="store_true")

    p = add("points", cmd_points, "default.json", "list the specification points of a level")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--json", action="store_true")

    p = add("distance", cmd_distance, "default.json", "distance between two specification points")
    p.add_argument("a")
    p.add_argument("b")

    p = add("dump-description", cmd_dump, "default.json", "print the generated description")
    p.add_argument("--ground", action="store_true", help="print the ground description instead")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
