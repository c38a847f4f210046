"""The dynamic resource-sharing protocol as a generated action description.

`description_text(cfg)` writes the protocol in the textual action-description format; the
rest of the pipeline (parser, grounder, engine) treats it like any other input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from . import kernel as K
from .config import ProtocolConfig
from .engine import Engine
from .grounder import Grounder
from .language import parse_description
from .schematic import SchematicDescription
from .specspace import emit_facts


class BuildError(ValueError):
    pass


# action name -> (power fluent, positions of the action arguments it takes)
POWER_OF = {
    "request_floor": ("powRequest", (0, 1)),
    "assign_floor": ("powAssign", (0, 1)),
    "request_manipulate": ("powRequestMpt", (0, 1, 2)),
    "propose": ("powPropose", (0, 1, 2)),
    "second": ("powSecond", (0, 1, 2)),
    "object": ("powObject", (0, 1, 2)),
    "vote": ("powVote", (0, 2)),
    "declare": ("powDeclare", (0, 1, 2, 3)),
    "end_argumentation": ("powEndArgumentation", (0, 1)),
    "enact_direct": ("powEnact", (0, 1, 2)),
}

# standing rule -> (numerator, denominator, strict)
STANDING_RULES = {
    "simple": (1, 2, True),
    "two_thirds": (2, 3, False),
    "three_quarters": (3, 4, False),
}

_GROUND = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\((.*)\))?$")


def split_ground(name: str) -> tuple:
    m = _GROUND.match(name)
    if m is None:
        raise ValueError(f"not a ground constant name: {name!r}")
    args = tuple(m.group(2).split(",")) if m.group(2) else ()
    return m.group(1), args


def power_fluent(action: str) -> str | None:
    """Name of the power fluent governing a ground action, if the protocol defines one."""
    name, args = split_ground(action)
    if name not in POWER_OF:
        return None
    fluent, positions = POWER_OF[name]
    return f"{fluent}({','.join(args[i] for i in positions)})"


def _set(values) -> str:
    return "{" + ", ".join(values) + "}"


def _majority_guard(rule: str) -> str:
    num, den, strict = STANDING_RULES[rule]
    if strict:
        return f"{den} * F > {num} * (F + A)"
    return f"{den} * F >= {num} * (F + A) & F + A > 0"


def description_text(cfg: ProtocolConfig) -> str:
    agents = list(cfg.agents)
    n = len(agents)
    dof_levels = cfg.dof_levels
    meta_levels = list(range(1, cfg.levels))
    scenarios = list(cfg.tables.utilities)
    environment = cfg.governance and len(scenarios) > 1
    # sort names would be read as parameter sorts, and none is a best_candidate value
    reserved = {"none", "agent", "mtype", "mreq", "pos", "calloc", "euv", "thd", "vval",
                "outcome", "scenario", "bool"}
    reserved |= {f"pt{lv}" for lv in dof_levels} | {f"dist{lv}" for lv in dof_levels}
    clash = sorted((set(agents) | set(cfg.manipulation_types)) & reserved)
    if clash:
        raise BuildError(f"reserved names cannot be agents or types: {clash}")
    for level in dof_levels:
        if level >= 1 and "standing" not in [d.name for d in cfg.catalog[level].dofs]:
            raise BuildError(f"level {level} needs a standing DoF")
        if level >= 1:
            for v in cfg.space.dof(level, "standing").values:
                if v not in STANDING_RULES:
                    raise BuildError(f"unknown standing rule {v}")

    out = []
    w = out.append

    w("% generated dynamic resource-sharing protocol")
    w(f"sort agent = {_set(agents)};")
    w(f"sort mtype = {_set(cfg.manipulation_types)};")
    w(f"sort mreq = {_set(['null', *cfg.manipulation_types])};")
    w(f"sort pos = 0..{n};")
    w(f"sort calloc = 0..{cfg.c_alloc_max};")
    w(f"sort euv = 0..{cfg.eu_max};")
    w(f"sort thd = 0..{cfg.d_threshold_max};")
    w("sort vval = {for, against};")
    w("sort outcome = {carried, not_carried};")
    for level in dof_levels:
        w(f"sort pt{level} = {_set(cfg.level_points(level))};")
        w(f"sort dist{level} = 0..{cfg.space.max_distance(level)};")
    w("var Ag, Ag1, S, S1, C, FCS, VC : agent;")
    w("var M : mtype;")
    w("var N : pos;")
    w("var F, A : pos;")
    w("var CA : calloc;")
    w("var E : euv;")
    w("var T : thd;")
    w("var V : vval;")
    w("var O : outcome;")
    for level in dof_levels:
        w(f"var NSP{level}, ASP{level}, SP{level}, X{level} : pt{level};")
    if environment:
        w(f"sort scenario = {_set(scenarios)};")
        w("var SC : scenario;")

    # -- signature
    w("fluent simple role_of(agent, 0) : {subject, chair, fcs};")
    for m in meta_levels:
        w(f"fluent sdetermined role_of(agent, {m}) : {{none, voter, chair}};")
    w("fluent simple holder(agent) : bool;")
    w("fluent simple sanctioned(agent) : bool;")
    w("fluent simple requested(agent) : mreq;")
    w("fluent simple req_pos(agent) : pos;")
    w("fluent simple c_alloc(agent) : calloc;")
    w(f"fluent sdetermined best_candidate : {_set(['none', *agents])};")
    w("fluent sdetermined powRequest(agent, agent) : bool;")
    w("fluent sdetermined powAssign(agent, agent) : bool;")
    w("fluent sdetermined perAssign(agent, agent) : bool;")
    w("fluent sdetermined oblAssign(agent, agent) : bool;")
    w("fluent sdetermined powRequestMpt(agent, agent, mtype) : bool;")
    w("fluent sdetermined perRequestMpt(agent, agent, mtype) : bool;")
    for level in dof_levels:
        p = f"pt{level}"
        for d in cfg.catalog[level].dofs:
            w(f"fluent simple dof({d.name}, {p}) : {_set(d.values)};")
        w(f"fluent simple actual_sp({level}) : {p};")
        w(f"fluent simple proposal(agent, {p}, {level}) : bool;")
        w(f"fluent simple properties({p}, {level}) : bool;")
        w(f"fluent simple threshold_d({level}) : thd;")
        w(f"fluent simple threshold_eu({level}) : euv;")
        w(f"fluent simple eu({p}, {level}) : euv;")
        w(f"fluent simple seconded({p}, {level}) : bool;")
        w(f"fluent simple objected({p}, {level}) : bool;")
        w(f"fluent sdetermined distance({p}, {p}, {level}) : dist{level};")
        w(f"fluent sdetermined within_d({p}, {level}) : bool;")
        w(f"fluent sdetermined actual_eu({level}) : euv;")
        for fl in ("powPropose", "perPropose", "oblPropose", "powSecond", "powObject"):
            w(f"fluent sdetermined {fl}(agent, {p}, {level}) : bool;")
        w(f"fluent sdetermined powEnact(agent, {p}, {level}) : bool;")
    for m in meta_levels:
        p = f"pt{m - 1}"
        w(f"fluent simple protocol({m}) : {{idle, executing}};")
        w(f"fluent simple voted(agent, {m}) : {{none, for, against}};")
        w(f"fluent sdetermined votes_for({m}) : pos;")
        w(f"fluent sdetermined votes_against({m}) : pos;")
        w(f"fluent sdetermined majority({m}) : bool;")
        w(f"fluent sdetermined powVote(agent, {m}) : bool;")
        w(f"fluent sdetermined powDeclare(agent, {p}, outcome, {m}) : bool;")
        w(f"fluent sdetermined powEndArgumentation(agent, {m}) : bool;")
    if environment:
        w("fluent simple environment : scenario;")
    if cfg.sanction_decay is not None:
        w(f"fluent simple sanction_age(agent) : 0..{cfg.sanction_decay};")

    w("action request_floor(agent, agent, mtype);")
    w("action assign_floor(agent, agent);")
    w("action request_manipulate(agent, agent, mtype);")
    for level in dof_levels:
        p = f"pt{level}"
        for act in ("propose", "second", "object"):
            w(f"action {act}(agent, {p}, {level});")
        w(f"action enact_direct(agent, {p}, {level});")
    for m in meta_levels:
        w(f"action vote(agent, vval, {m});")
        w(f"action declare(agent, pt{m - 1}, outcome, {m});")
        w(f"action end_argumentation(agent, {m});")
    if cfg.governance:
        for level in dof_levels:
            w(f"action set_threshold({level}, d, thd);")
            w(f"action set_threshold({level}, eu, euv);")
        if environment:
            w("action set_environment(scenario);")

    # (a) inertia
    simple = ["role_of", "holder", "requested", "req_pos", "c_alloc", "dof", "actual_sp",
              "proposal", "properties", "threshold_d", "threshold_eu", "eu", "seconded",
              "objected", "protocol", "voted"]
    if environment:
        simple.append("environment")
    if cfg.sanction_decay is None:
        simple.append("sanctioned")
    for name in simple:
        w(f"inertial {name};")

    # (b) requesting the floor
    w("caused powRequest(S, C) iff role_of(S, 0) = subject & role_of(C, 0) = chair"
      " & requested(S) = null;")
    w("request_floor(S, C, M) causes requested(S) = M if powRequest(S, C);")
    w("request_floor(S, C, M) causes req_pos(S) = N if powRequest(S, C)"
      " & (forall S1 in agent: req_pos(S1) < N) & (exists S1 in agent: req_pos(S1) = N - 1)"
      " where N > 0;")

    # (c) best candidate, one law family per DoF value
    def mode(value: str) -> str:
        return mode_dof("bc", value)

    rmt = cfg.rmt_type
    bc_values = cfg.space.dof(0, "bc").values
    if "fcfs" in bc_values:
        w(f"caused best_candidate = S if {mode('fcfs')} & req_pos(S) = 1;")
    if "rmt" in bc_values:
        w(f"caused best_candidate = S if {mode('rmt')} & req_pos(S) != 0 & requested(S) = {rmt}"
          f" & (forall S1 in agent: ~(req_pos(S1) != 0 & requested(S1) = {rmt}"
          " & req_pos(S1) < req_pos(S)));")
        w(f"caused best_candidate = S if {mode('rmt')} & req_pos(S) = 1"
          f" & (forall S1 in agent: ~(req_pos(S1) != 0 & requested(S1) = {rmt}));")
    if "ns" in bc_values:
        w(f"caused best_candidate = S if {mode('ns')} & req_pos(S) != 0 & ~sanctioned(S)"
          " & (forall S1 in agent: ~(req_pos(S1) != 0 & ~sanctioned(S1)"
          " & req_pos(S1) < req_pos(S)));")
        w(f"caused best_candidate = S if {mode('ns')} & req_pos(S) = 1"
          " & (forall S1 in agent: ~(req_pos(S1) != 0 & ~sanctioned(S1)));")
    if "random" in bc_values:
        w(f"caused best_candidate = S if best_candidate = S & {mode('random')} & req_pos(S) != 0;")
    unknown = set(bc_values) - {"fcfs", "rmt", "ns", "random"}
    if unknown:
        raise BuildError(f"no best-candidate rules for {sorted(unknown)}")
    w("caused best_candidate = none if forall S in agent: req_pos(S) = 0;")

    # (d) assigning the floor
    free = "(forall S1 in agent: ~holder(S1))"
    allowed = f"role_of(C, 0) = chair & {free} & best_candidate = S" \
              " & (exists X0 in pt0: actual_sp(0) = X0 & c_alloc(S) < dof(per_assign, X0))"
    w(f"caused powAssign(C, S) iff role_of(C, 0) = chair & {free} & best_candidate = S;")
    w(f"caused perAssign(C, S) iff {allowed};")
    w(f"caused oblAssign(C, S) iff {allowed};")
    w("assign_floor(C, S) causes holder(S) if powAssign(C, S);")
    w(f"assign_floor(C, S) causes c_alloc(S) = CA + 1 if powAssign(C, S) & c_alloc(S) = CA"
      f" where CA < {cfg.c_alloc_max};")
    w(f"assign_floor(C, S) causes c_alloc(S) = CA if powAssign(C, S) & c_alloc(S) = CA"
      f" where CA = {cfg.c_alloc_max};")
    w("assign_floor(C, S) causes c_alloc(S1) = 0 if powAssign(C, S) where S1 != S;")
    w("assign_floor(C, S) causes req_pos(S) = 0 if powAssign(C, S);")
    w("assign_floor(C, S) causes req_pos(S1) = N - 1 if powAssign(C, S) & req_pos(S1) = N"
      " & req_pos(S) < N where S1 != S & N > 0;")
    w("assign_floor(C, S) causes sanctioned(C) if role_of(C, 0) = chair & ~perAssign(C, S);")

    # (e) resource manipulation
    w("caused powRequestMpt(S, FCS, M) iff role_of(FCS, 0) = fcs & holder(S);")
    w(f"caused perRequestMpt(S, FCS, M) if {mode_dof('per_mpt', 'any_type')}"
      " & role_of(FCS, 0) = fcs & holder(S);")
    w(f"caused perRequestMpt(S, FCS, M) if {mode_dof('per_mpt', 'expressed_type')}"
      " & role_of(FCS, 0) = fcs & holder(S) & requested(S) = M;")
    w("default ~perRequestMpt(S, FCS, M);")

    # (f) specification-space facts
    points = {level: cfg.level_points(level) for level in dof_levels}
    for law in emit_facts(cfg.space, cfg.tables, points, cfg.eu_max,
                          "environment" if environment else None):
        w(str(law))

    # (g) transition protocol, per level whose point may change
    for L in dof_levels:
        nsp, asp, sp, x = f"NSP{L}", f"ASP{L}", f"SP{L}", f"X{L}"
        up = L + 1
        w(f"caused powPropose(Ag, {nsp}, {L}) if role_of(Ag, 0) = subject"
          f" & actual_sp({L}) != {nsp} & protocol({up}) = idle & properties({nsp}, {L});")
        w(f"default ~powPropose(Ag, {nsp}, {L});")
        w(f"propose(Ag, {nsp}, {L}) causes proposal(Ag, {nsp}, {L}) if powPropose(Ag, {nsp}, {L});")
        w(f"propose(Ag, {nsp}, {L}) causes sanctioned(Ag) if ~perPropose(Ag, {nsp}, {L});")
        w(f"caused powSecond(Ag, {nsp}, {L}) if role_of(Ag, 0) = subject"
          f" & proposal(Ag1, {nsp}, {L}) where Ag != Ag1;")
        w(f"default ~powSecond(Ag, {nsp}, {L});")
        w(f"second(Ag, {nsp}, {L}) causes seconded({nsp}, {L}) if powSecond(Ag, {nsp}, {L});")
        w(f"caused powObject(Ag, {nsp}, {L}) if role_of(Ag, 0) = subject"
          f" & proposal(Ag1, {nsp}, {L});")
        w(f"default ~powObject(Ag, {nsp}, {L});")
        w(f"object(Ag, {nsp}, {L}) causes objected({nsp}, {L}) if powObject(Ag, {nsp}, {L});")
        # metric and utility gates
        w(f"caused within_d({nsp}, {L}) if actual_sp({L}) = {asp}"
          f" & distance({nsp}, {asp}, {L}) <= threshold_d({L});")
        w(f"default ~within_d({nsp}, {L});")
        w(f"caused actual_eu({L}) = E if actual_sp({L}) = {asp} & eu({asp}, {L}) = E;")
        w(f"caused perPropose(Ag, {nsp}, {L}) if powPropose(Ag, {nsp}, {L}) & within_d({nsp}, {L})"
          f" & eu({nsp}, {L}) >= threshold_eu({L});")
        w(f"caused perPropose(Ag, {nsp}, {L}) if powPropose(Ag, {nsp}, {L}) & within_d({nsp}, {L})"
          f" & eu({nsp}, {L}) > actual_eu({L});")
        w(f"default ~perPropose(Ag, {nsp}, {L});")
        w(f"caused oblPropose(Ag, {nsp}, {L}) if perPropose(Ag, {nsp}, {L})"
          f" & actual_eu({L}) < threshold_eu({L});")
        w(f"default ~oblPropose(Ag, {nsp}, {L});")
        # direct enactment: seconded and never objected
        w(f"caused powEnact(C, {nsp}, {L}) if role_of(C, 0) = chair & seconded({nsp}, {L})"
          f" & ~objected({nsp}, {L}) & protocol({up}) = idle & actual_sp({L}) != {nsp};")
        w(f"default ~powEnact(C, {nsp}, {L});")
        w(f"enact_direct(C, {nsp}, {L}) causes actual_sp({L}) = {nsp} if powEnact(C, {nsp}, {L});")
        # the proposal lifecycle closes when the point changes or the meta protocol ends
        for fl in (f"proposal(Ag, {sp}, {L})", f"seconded({sp}, {L})", f"objected({sp}, {L})"):
            w(f"caused {fl} = f if actual_sp({L}) = {x} after actual_sp({L}) != {x};")
            w(f"caused {fl} = f if protocol({up}) = idle after protocol({up}) = executing;")

    # (h)-(j) meta levels
    for m in meta_levels:
        low = m - 1
        nsp = f"NSP{low}"
        w(f"caused role_of(Ag, {m}) = voter if role_of(Ag, 0) = subject"
          f" & protocol({m}) = executing & ~sanctioned(Ag);")
        w(f"caused role_of(Ag, {m}) = chair if role_of(Ag, 0) = chair & protocol({m}) = executing;")
        w(f"default role_of(Ag, {m}) = none;")
        w(f"caused powEndArgumentation(C, {m}) if role_of(C, 0) = chair & protocol({m}) = idle"
          f" & (exists {nsp} in pt{low}: seconded({nsp}, {low}) & objected({nsp}, {low}));")
        w(f"default ~powEndArgumentation(C, {m});")
        w(f"end_argumentation(C, {m}) causes protocol({m}) = executing"
          f" if powEndArgumentation(C, {m});")
        w(f"caused powVote(Ag, {m}) iff role_of(Ag, {m}) = voter & voted(Ag, {m}) = none;")
        w(f"vote(Ag, V, {m}) causes voted(Ag, {m}) = V if powVote(Ag, {m});")
        w(f"caused votes_for({m}) = N if #count{{Ag in agent: voted(Ag, {m}) = for}} = N;")
        w(f"caused votes_against({m}) = N if #count{{Ag in agent: voted(Ag, {m}) = against}} = N;")
        w(f"caused voted(Ag, {m}) = none if protocol({m}) = idle after protocol({m}) = executing;")
        tally = f"votes_for({m}) = F & votes_against({m}) = A"
        if m in cfg.catalog:
            for rule in cfg.space.dof(m, "standing").values:
                w(f"caused majority({m}) if actual_sp({m}) = ASP{m} & dof(standing, ASP{m}) = {rule}"
                  f" & {tally} where {_majority_guard(rule)};")
        else:
            w(f"caused majority({m}) if {tally} where {_majority_guard(cfg.top_standing)};")
        w(f"default ~majority({m});")
        ready = (f"role_of(VC, {m}) = chair & protocol({m}) = executing & actual_sp({low}) != {nsp}"
                 f" & seconded({nsp}, {low})"
                 f" & objected({nsp}, {low})"
                 f" & (forall Ag in agent: role_of(Ag, {m}) = voter -> voted(Ag, {m}) != none)")
        w(f"caused powDeclare(VC, {nsp}, carried, {m}) if {ready} & majority({m});")
        w(f"caused powDeclare(VC, {nsp}, not_carried, {m}) if {ready} & ~majority({m});")
        w(f"default ~powDeclare(VC, {nsp}, O, {m});")
        w(f"declare(VC, {nsp}, carried, {m}) causes actual_sp({low}) = {nsp}"
          f" if powDeclare(VC, {nsp}, carried, {m});")
        w(f"declare(VC, {nsp}, O, {m}) causes protocol({m}) = idle if powDeclare(VC, {nsp}, O, {m});")

    # (k) exogenous governance
    if cfg.governance:
        for level in dof_levels:
            w(f"set_threshold({level}, d, T) causes threshold_d({level}) = T;")
            w(f"set_threshold({level}, eu, E) causes threshold_eu({level}) = E;")
        if environment:
            w("set_environment(SC) causes environment = SC;")

    # optional sanction expiry after k further steps
    if cfg.sanction_decay is not None:
        k = cfg.sanction_decay
        w("caused sanctioned(Ag) = f if sanctioned(Ag) = f after sanctioned(Ag) = f;")
        w(f"caused sanctioned(Ag) if sanctioned(Ag) after sanctioned(Ag) & sanction_age(Ag) < {k};")
        w(f"caused sanctioned(Ag) = f if sanctioned(Ag) = f after sanctioned(Ag)"
          f" & sanction_age(Ag) = {k};")
        w(f"caused sanction_age(Ag) = N + 1 if sanctioned(Ag) after sanctioned(Ag)"
          f" & sanction_age(Ag) = N where N < {k};")
        w(f"caused sanction_age(Ag) = 0 if sanctioned(Ag) after sanctioned(Ag)"
          f" & sanction_age(Ag) = {k};")
        w("caused sanction_age(Ag) = 0 if sanctioned(Ag) after ~sanctioned(Ag);")
        w("caused sanction_age(Ag) = 0 if ~sanctioned(Ag) after true;")
    return "\n".join(out) + "\n"


def mode_dof(dof: str, value: str) -> str:
    return f"(exists X0 in pt0: actual_sp(0) = X0 & dof({dof}, X0) = {value})"


def build_description(cfg: ProtocolConfig) -> SchematicDescription:
    return parse_description(description_text(cfg))


def initial_simple_values(cfg: ProtocolConfig) -> dict:
    values = {}
    for a, role in cfg.agents.items():
        values[f"role_of({a},0)"] = role
        values[f"holder({a})"] = "f"
        values[f"sanctioned({a})"] = "f"
        values[f"requested({a})"] = "null"
        values[f"req_pos({a})"] = "0"
        values[f"c_alloc({a})"] = "0"
        if cfg.sanction_decay is not None:
            values[f"sanction_age({a})"] = "0"
    scenario = cfg.tables.scenario
    for level in cfg.dof_levels:
        pts = cfg.level_points(level)
        for pid in pts:
            p = cfg.space.point(pid)
            for d, v in zip(cfg.catalog[level].dofs, p.values):
                values[f"dof({d.name},{pid})"] = v
            values[f"properties({pid},{level})"] = "t" if cfg.tables.properties[pid] else "f"
            values[f"eu({pid},{level})"] = str(cfg.tables.eu(pid, scenario))
            values[f"seconded({pid},{level})"] = "f"
            values[f"objected({pid},{level})"] = "f"
            for a in cfg.agents:
                values[f"proposal({a},{pid},{level})"] = "f"
        values[f"actual_sp({level})"] = cfg.initial_points[level]
        values[f"threshold_d({level})"] = str(cfg.threshold_d[level])
        values[f"threshold_eu({level})"] = str(cfg.threshold_eu[level])
    for m in range(1, cfg.levels):
        values[f"protocol({m})"] = "idle"
        for a in cfg.agents:
            values[f"voted({a},{m})"] = "none"
    if cfg.governance and len(cfg.tables.utilities) > 1:
        values["environment"] = scenario
    return values


@dataclass
class Protocol:
    """A configured protocol: schematic text, ground description, engine and initial state."""

    cfg: ProtocolConfig
    budget: int = 2 ** 22

    @cached_property
    def text(self) -> str:
        return description_text(self.cfg)

    @cached_property
    def schematic(self) -> SchematicDescription:
        return parse_description(self.text)

    @cached_property
    def grounder(self) -> Grounder:
        return Grounder(self.schematic)

    @cached_property
    def description(self) -> K.ActionDescription:
        return self.grounder.ground()

    @cached_property
    def engine(self) -> Engine:
        exempt = ("vote(",) if self.cfg.vote_exempt else ()
        return Engine(self.description, self.budget, self.cfg.concurrency_bound, exempt)

    @cached_property
    def initial_state(self) -> K.State:
        return initial_state(self.cfg, self.engine)

    def formula(self, text: str, env: dict | None = None) -> K.Formula:
        return self.grounder.ground_formula(text, env)


def initial_state(cfg: ProtocolConfig, engine: Engine | None = None) -> K.State:
    if engine is None:
        engine = Protocol(cfg).engine
    simple = initial_simple_values(cfg)
    s = engine.complete_state(simple)
    if s is None:
        raise BuildError("the configured initial values do not form a state")
    return s
