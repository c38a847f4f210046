"""Bounded exhaustive query evaluation over the transition system of a ground description.

The search works on finite-domain variables (one per constant and time layer) held as bit
masks. Causal laws propagate in both directions: a law whose condition becomes true forces its
head, a law whose head becomes impossible must have a false condition, and a value of a
constant that needs a cause loses that value when every law heading it is dead. Every result
the search produces is a genuine fixpoint of the kernel definitions; the brute-force oracles
at the bottom of this module exist to check that on small descriptions.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from . import kernel as K

DEFAULT_BUDGET = 2 ** 22
DEFAULT_WITNESS_BUDGET = 5000
DEFAULT_EXEMPT = ("vote(",)


class BudgetExceeded(RuntimeError):
    def __init__(self, nodes: int, interpretations: int):
        self.nodes = nodes
        self.interpretations = interpretations
        super().__init__(
            f"search budget exceeded after {nodes} nodes "
            f"(raw space: {interpretations} interpretations)")

    def __reduce__(self):
        return (BudgetExceeded, (self.nodes, self.interpretations))


class PreconditionError(ValueError):
    pass


# --- compiled formulas ------------------------------------------------------------------
# ('a', var, bit) | ('!', f) | ('&', fs) | ('|', fs) | ('T',) | ('F',)

_T = ("T",)
_F = ("F",)


def _compile(f: K.Formula, lookup: Callable[[str], int], bits: Callable[[str, str], int],
             fixed: Mapping[str, str]):
    if isinstance(f, K.Atom):
        if f.constant in fixed:
            return _T if fixed[f.constant] == f.value else _F
        return ("a", lookup(f.constant), bits(f.constant, f.value))
    if isinstance(f, K.Top):
        return _T
    if isinstance(f, K.Bottom):
        return _F
    if isinstance(f, K.Not):
        inner = _compile(f.arg, lookup, bits, fixed)
        if inner is _T:
            return _F
        if inner is _F:
            return _T
        if inner[0] == "!":
            return inner[1]
        return ("!", inner)
    if isinstance(f, K.Implies):
        return _compile(K.Or((K.Not(f.left), f.right)), lookup, bits, fixed)
    if isinstance(f, K.And):
        parts = []
        for a in f.args:
            c = _compile(a, lookup, bits, fixed)
            if c is _F:
                return _F
            if c is not _T:
                parts.append(c)
        if not parts:
            return _T
        return parts[0] if len(parts) == 1 else ("&", tuple(parts))
    if isinstance(f, K.Or):
        parts = []
        for a in f.args:
            c = _compile(a, lookup, bits, fixed)
            if c is _T:
                return _T
            if c is not _F:
                parts.append(c)
        if not parts:
            return _F
        return parts[0] if len(parts) == 1 else ("|", tuple(parts))
    raise TypeError(f"not a formula: {f!r}")


def _conj_c(a, b):
    if a is _F or b is _F:
        return _F
    if a is _T:
        return b
    if b is _T:
        return a
    return ("&", (a, b))


def _vars_of(c, out: set) -> set:
    tag = c[0]
    if tag == "a":
        out.add(c[1])
    elif tag == "!":
        _vars_of(c[1], out)
    elif tag in ("&", "|"):
        for g in c[1]:
            _vars_of(g, out)
    return out


def _ev(c, dom) -> int:
    """Three-valued evaluation: 1 true, 0 false, 2 undecided."""
    tag = c[0]
    if tag == "a":
        d = dom[c[1]]
        if not d & c[2]:
            return 0
        return 1 if d == c[2] else 2
    if tag == "&":
        r = 1
        for g in c[1]:
            x = _ev(g, dom)
            if x == 0:
                return 0
            if x == 2:
                r = 2
        return r
    if tag == "|":
        r = 0
        for g in c[1]:
            x = _ev(g, dom)
            if x == 1:
                return 1
            if x == 2:
                r = 2
        return r
    if tag == "!":
        x = _ev(c[1], dom)
        return 2 if x == 2 else 1 - x
    return 1 if tag == "T" else 0


# --- the search problem -------------------------------------------------------------------


@dataclass
class _Law:
    cond: tuple
    head_var: int  # -1 for a false head
    head_bit: int
    origin: object = None
    vars: tuple | None = None  # condition variables, filled in on first use

    def cond_vars(self) -> tuple:
        if self.vars is None:
            self.vars = tuple(_vars_of(self.cond, set()))
        return self.vars


class _Conflict(Exception):
    pass


class _Problem:
    """Variables, laws, support requirements and an optional cardinality constraint."""

    def __init__(self, names: list, domains: list, laws: list, needs_support: list,
                 counted: Sequence[int] = (), bound: int | None = None):
        self.names = names
        self.domains = domains
        self.full = [(1 << len(d)) - 1 for d in domains]
        self.laws = laws
        self.needs_support = needs_support
        self.offset = []
        total = 0
        for d in domains:
            self.offset.append(total)
            total += len(d)
        n = len(domains)
        self.watch = [[] for _ in range(n)]
        self.heads = {}  # (var, bit) -> law ids
        for i, law in enumerate(laws):
            vs = law.cond_vars()
            for v in vs:
                self.watch[v].append(i)
            if law.head_var >= 0:
                if law.head_var not in vs:
                    self.watch[law.head_var].append(i)
                self.heads.setdefault((law.head_var, law.head_bit), []).append(i)
        self.counted = list(counted)
        self.counted_set = set(self.counted)
        self.bound = bound
        self.nodes = 0
        self.conflict_var = None
        self._support0 = None

    def extended(self, extra: list, counted: Sequence[int] | None = None,
                 bound: int | None = None) -> "_Problem":
        """The same variables with `extra` laws appended, sharing the work already done here."""
        new = object.__new__(_Problem)
        new.names, new.domains, new.full = self.names, self.domains, self.full
        new.needs_support, new.offset = self.needs_support, self.offset
        new.laws = self.laws + list(extra)
        new.watch = [w[:] for w in self.watch]
        new.heads = dict(self.heads)
        support = list(self.support0())
        for i in range(len(self.laws), len(new.laws)):
            law = new.laws[i]
            vs = law.cond_vars()
            for v in vs:
                new.watch[v].append(i)
            if law.head_var >= 0:
                if law.head_var not in vs:
                    new.watch[law.head_var].append(i)
                key = (law.head_var, law.head_bit)
                ids = new.heads.get(key)
                # lists inherited from self are copied before the first append
                new.heads[key] = ids + [i] if ids is not None else [i]
                support[new.support_index(law.head_var, law.head_bit)] += 1
        new._support0 = support
        new.counted = self.counted if counted is None else list(counted)
        new.counted_set = set(new.counted)
        new.bound = self.bound if counted is None else bound
        new.nodes = 0
        new.conflict_var = None
        return new

    def support0(self) -> list:
        """Per (variable, value) count of laws heading it, before any propagation."""
        if self._support0 is None:
            support = [0] * (self.offset[-1] + len(self.domains[-1]) if self.domains else 0)
            for law in self.laws:
                if law.head_var >= 0:
                    support[self.support_index(law.head_var, law.head_bit)] += 1
            self._support0 = support
        return self._support0

    def support_index(self, v: int, bit: int) -> int:
        return self.offset[v] + bit.bit_length() - 1

    # state = [dom, status, support]
    def initial(self):
        dom = list(self.full)
        status = bytearray([2]) * len(self.laws)
        support = list(self.support0())
        st = [dom, status, support]
        queue = []
        for v, need in enumerate(self.needs_support):
            if need:
                mask = 0
                for k in range(len(self.domains[v])):
                    if support[self.offset[v] + k]:
                        mask |= 1 << k
                self._restrict(st, v, mask, queue)
        for i in range(len(self.laws)):
            self._check_law(st, i, queue)
        if self.bound is not None:
            self._check_card(st, queue)
        return st, queue

    def raw_size(self) -> int:
        return math.prod(len(d) for d in self.domains)

    def _restrict(self, st, v, mask, queue):
        dom = st[0]
        new = dom[v] & mask
        if new == 0:
            self.conflict_var = v
            raise _Conflict(v)
        if new != dom[v]:
            dom[v] = new
            queue.append(v)

    def _require(self, st, c, queue):
        tag = c[0]
        if tag == "a":
            self._restrict(st, c[1], c[2], queue)
        elif tag == "!":
            self._refute(st, c[1], queue)
        elif tag == "&":
            for g in c[1]:
                self._require(st, g, queue)
        elif tag == "|":
            open_ = None
            for g in c[1]:
                x = _ev(g, st[0])
                if x == 1:
                    return
                if x == 2:
                    if open_ is not None:
                        return
                    open_ = g
            if open_ is None:
                raise _Conflict(None)
            self._require(st, open_, queue)
        elif tag == "F":
            raise _Conflict(None)

    def _refute(self, st, c, queue):
        tag = c[0]
        if tag == "a":
            self._restrict(st, c[1], self.full[c[1]] & ~c[2], queue)
        elif tag == "!":
            self._require(st, c[1], queue)
        elif tag == "|":
            for g in c[1]:
                self._refute(st, g, queue)
        elif tag == "&":
            open_ = None
            for g in c[1]:
                x = _ev(g, st[0])
                if x == 0:
                    return
                if x == 2:
                    if open_ is not None:
                        return
                    open_ = g
            if open_ is None:
                raise _Conflict(None)
            self._refute(st, open_, queue)
        elif tag == "T":
            raise _Conflict(None)

    def _check_law(self, st, i, queue):
        status = st[1]
        if status[i] != 2:
            return
        law = self.laws[i]
        x = _ev(law.cond, st[0])
        if x == 1:
            status[i] = 1
            if law.head_var < 0:
                raise _Conflict(None)
            self._restrict(st, law.head_var, law.head_bit, queue)
        elif x == 0:
            status[i] = 0
            if law.head_var >= 0:
                self._lose_support(st, law.head_var, law.head_bit, queue)
        elif law.head_var < 0 or not st[0][law.head_var] & law.head_bit:
            self._refute(st, law.cond, queue)

    def _lose_support(self, st, v, bit, queue):
        k = self.support_index(v, bit)
        st[2][k] -= 1
        if not self.needs_support[v]:
            return
        if st[2][k] == 0:
            self._restrict(st, v, self.full[v] & ~bit, queue)
        elif st[2][k] == 1 and st[0][v] == bit:
            self._unit_support(st, v, bit, queue)

    def _unit_support(self, st, v, bit, queue):
        k = self.support_index(v, bit)
        if st[2][k] != 1:
            return
        for i in self.heads.get((v, bit), ()):
            if st[1][i] != 0:
                self._require(st, self.laws[i].cond, queue)
                return

    def _check_card(self, st, queue):
        dom = st[0]
        true_count = sum(1 for v in self.counted if dom[v] == 2)
        if true_count > self.bound:
            raise _Conflict(None)
        if true_count == self.bound:
            for v in self.counted:
                if dom[v] == 3:
                    self._restrict(st, v, 1, queue)

    def propagate(self, st, queue) -> bool:
        try:
            while queue:
                v = queue.pop()
                for i in self.watch[v]:
                    self._check_law(st, i, queue)
                if self.needs_support[v]:
                    d = st[0][v]
                    if d & (d - 1) == 0:
                        self._unit_support(st, v, d, queue)
                if self.bound is not None and v in self.counted_set:
                    self._check_card(st, queue)
            return True
        except _Conflict:
            return False

    def search(self, constraint_laws: Iterable[_Law] = (), restrict: Mapping[int, int] | None = None,
               budget: int = DEFAULT_BUDGET, limit: int | None = None):
        """Yield full assignments (lists of value indices)."""
        self.nodes = 0
        self.conflict_var = None
        try:
            st, queue = self.initial()
            for v, mask in (restrict or {}).items():
                self._restrict(st, v, mask, queue)
        except _Conflict:
            return
        extra = [law for law in constraint_laws if law.cond is not _F]
        if extra:
            # constraints share the watch structure through a private copy
            prob = self.extended(extra)
            try:
                yield from prob.search(restrict=restrict, budget=budget, limit=limit)
            finally:
                self.nodes = prob.nodes
                self.conflict_var = prob.conflict_var
            return
        found = 0
        stack = [(st, queue)]
        while stack:
            st, queue = stack.pop()
            self.nodes += 1
            if self.nodes > budget:
                raise BudgetExceeded(self.nodes, self.raw_size())
            if not self.propagate(st, queue):
                continue
            dom = st[0]
            # simple fluents and actions first: statically determined values mostly follow
            best, best_key = -1, None
            needs = self.needs_support
            for v, d in enumerate(dom):
                if d & (d - 1):
                    key = (needs[v], bin(d).count("1"))
                    if best_key is None or key < best_key:
                        best, best_key = v, key
                        if key == (False, 2):
                            break
            if best < 0:
                yield [d.bit_length() - 1 for d in dom]
                found += 1
                if limit is not None and found >= limit:
                    return
                continue
            d = dom[best]
            children = []
            k = 0
            while d:
                if d & 1:
                    child = [list(st[0]), bytearray(st[1]), list(st[2])]
                    child[0][best] = 1 << k
                    children.append((child, [best]))
                d >>= 1
                k += 1
            stack.extend(reversed(children))

    def root_conflict(self, restrict: Mapping[int, int] | None = None):
        """Return the conflicting variable index of a failed root propagation, or None."""
        self.conflict_var = None
        try:
            st, queue = self.initial()
            for v, mask in (restrict or {}).items():
                self._restrict(st, v, mask, queue)
        except _Conflict:
            return self.conflict_var
        self.propagate(st, queue)
        return self.conflict_var


# --- reports ------------------------------------------------------------------------------


class Results(list):
    """A list of results carrying search statistics."""

    def __init__(self, items=(), truncated: bool = False, nodes: int = 0, interpretations: int = 0):
        super().__init__(items)
        self.truncated = truncated
        self.nodes = nodes
        self.interpretations = interpretations


@dataclass
class QueryReport:
    verdict: str  # "holds" | "fails"
    witnesses: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)
    statistics: dict = field(default_factory=dict)
    name: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    def to_dict(self) -> dict:
        def render(x):
            if isinstance(x, K.Transition):
                return {"source": dict(x.source), "label": x.label.true_atoms(), "target": dict(x.target)}
            return dict(x)
        return {
            "name": self.name,
            "verdict": self.verdict,
            "witnesses": [render(w) for w in self.witnesses],
            "counterexamples": [render(c) for c in self.counterexamples],
            "statistics": dict(self.statistics),
        }


# --- engine -------------------------------------------------------------------------------


class Engine:
    """Query evaluation over one ground description.

    `concurrency_bound` caps the number of true Boolean action atoms per transition;
    actions whose names start with one of `exempt` do not count towards it.
    """

    def __init__(self, d: K.ActionDescription, budget: int = DEFAULT_BUDGET,
                 concurrency_bound: int | None = 1, exempt: Sequence[str] = DEFAULT_EXEMPT):
        self.d = d
        self.budget = budget
        self.witness_budget = DEFAULT_WITNESS_BUDGET
        self.bound = concurrency_bound
        self.exempt = tuple(exempt)
        self.fluents = [c for c in d.constants if c.is_fluent]
        self.actions = [c for c in d.constants if not c.is_fluent]
        self.f_index = {c.name: i for i, c in enumerate(self.fluents)}
        self.a_index = {c.name: i for i, c in enumerate(self.actions)}
        self._bitmap = {c.name: {u: 1 << k for k, u in enumerate(c.domain)} for c in d.constants}
        self._static_cache: dict = {}
        self._dyn_g_cache: dict = {}
        self._triggers = None
        self._replay_base = None

    # -- helpers
    def _bits(self, name: str, value: str) -> int:
        try:
            return self._bitmap[name][value]
        except KeyError:
            raise K.SignatureError(f"{value!r} is not a value of {name}") from None

    def _counted(self, name: str, decl) -> bool:
        return decl.domain == K.BOOL and not name.startswith(self.exempt)

    def _statics(self, base: int, fixed=None):
        key = base
        if fixed is None and key in self._static_cache:
            return self._static_cache[key]
        fixed = fixed or {}

        def lookup(n):
            return base + self.f_index[n]
        out = []
        for law in self.d.statics:
            cond = _compile(law.condition, lookup, self._bits, fixed)
            if isinstance(law.head, K.Bottom):
                out.append(_Law(cond, -1, 0, law))
            else:
                out.append(_Law(cond, base + self.f_index[law.head.constant],
                                self._bits(law.head.constant, law.head.value), law))
        if not fixed:
            self._static_cache[key] = out
        return out

    def _triggered(self, label: Mapping[str, str]) -> list:
        """Indices of dynamic laws whose precondition does not require an action false in `label`.

        A law whose precondition has a top-level conjunct `a=t` for an action `a` can only fire
        when `a` is performed, so replay skips it otherwise.
        """
        if self._triggers is None:
            free, by_action = [], {}
            for k, law in enumerate(self.d.dynamics):
                pre = law.precondition
                parts = pre.args if isinstance(pre, K.And) else (pre,)
                need = next((a.constant for a in parts if isinstance(a, K.Atom)
                             and a.constant in self.a_index and a.value == "t"), None)
                if need is None:
                    free.append(k)
                else:
                    by_action.setdefault(need, []).append(k)
            self._triggers = (free, by_action)
        free, by_action = self._triggers
        out = list(free)
        for name in label.true_atoms() if isinstance(label, K.Interpretation) else (
                n for n, v in label.items() if v == "t"):
            out += by_action.get(name, ())
        out.sort()
        return out

    def _dynamic_g(self, base1: int):
        if base1 in self._dyn_g_cache:
            return self._dyn_g_cache[base1]

        def lookup(n):
            return base1 + self.f_index[n]
        out = []
        for law in self.d.dynamics:
            g = _compile(law.condition, lookup, self._bits, {})
            out.append((g, tuple(_vars_of(g, set()))))
        self._dyn_g_cache[base1] = out
        return out

    def _fluent_names(self, suffix=""):
        return [c.name + suffix for c in self.fluents]

    def _check_state(self, s: Mapping[str, str]) -> K.State:
        s = s if isinstance(s, K.Interpretation) else K.Interpretation(s)
        if not K.is_state(self.d, s):
            raise PreconditionError("the given interpretation is not a state of the description")
        return s

    def _constraint_law(self, formula: K.Formula, lookup, fixed=None) -> _Law:
        cond = _compile(formula, lookup, self._bits, fixed or {})
        neg = _T if cond is _F else (_F if cond is _T else ("!", cond))
        return _Law(neg, -1, 0, "constraint")

    # -- problems
    def _state_problem(self):
        laws = self._statics(0)
        needs = [c.kind == K.SDETERMINED for c in self.fluents]
        return _Problem(self._fluent_names(), [c.domain for c in self.fluents], laws, needs)

    def _transition_problem(self, s: Mapping[str, str] | None, label: Mapping[str, str] | None,
                            bound: int | None = None):
        """Variables: [fluents@0 if s is None] + [actions if label is None] + fluents@1."""
        names, domains, needs, counted = [], [], [], []
        laws = []
        base0 = 0
        if s is None:
            names += self._fluent_names("@0")
            domains += [c.domain for c in self.fluents]
            needs += [c.kind == K.SDETERMINED for c in self.fluents]
            laws += self._statics(0)
        base_a = len(names)
        if label is None:
            for c in self.actions:
                if self._counted(c.name, c):
                    counted.append(len(names))
                names.append(c.name)
                domains.append(c.domain)
                needs.append(False)
        base1 = len(names)
        names += self._fluent_names("@1")
        domains += [c.domain for c in self.fluents]
        needs += [True] * len(self.fluents)
        replay_mode = s is not None and label is not None
        if not replay_mode:
            laws += self._statics(base1)

        fixed = {}
        if s is not None:
            fixed.update(s)
        if label is not None:
            fixed.update(label)

        def lookup_h(n):
            if n in self.a_index:
                return base_a + self.a_index[n]
            return base0 + self.f_index[n]

        gs = self._dynamic_g(base1)
        if replay_mode:
            candidates = self._triggered(label)
        else:
            candidates = range(len(gs))
        dynamics = self.d.dynamics
        for k in candidates:
            law, (g, g_vars) = dynamics[k], gs[k]
            known = None
            if replay_mode:
                if not _sat_fast(law.precondition, fixed):
                    continue
                h = _T
                known = g_vars
            else:
                h = _compile(law.precondition, lookup_h, self._bits, fixed)
                if h is _F:
                    continue
            cond = _conj_c(g, h)
            if isinstance(law.head, K.Bottom):
                laws.append(_Law(cond, -1, 0, law, known))
            else:
                laws.append(_Law(cond, base1 + self.f_index[law.head.constant],
                                 self._bits(law.head.constant, law.head.value), law, known))
        if replay_mode:
            # the static part is identical for every step, so it is built once
            if self._replay_base is None:
                self._replay_base = _Problem(names, domains, self._statics(0), needs)
            prob = self._replay_base.extended(laws, counted=(), bound=None)
        else:
            prob = _Problem(names, domains, laws, needs, counted, bound if label is None else None)
        prob.base_a = base_a
        prob.base1 = base1
        return prob

    # -- decoding
    def _decode_fluents(self, sol, base) -> K.State:
        return K.Interpretation({c.name: c.domain[sol[base + i]] for i, c in enumerate(self.fluents)})

    def _decode_label(self, sol, base) -> K.TransitionLabel:
        return K.Interpretation({c.name: c.domain[sol[base + i]] for i, c in enumerate(self.actions)})

    # -- queries
    def enumerate_states(self, constraint: K.Formula = K.TOP, limit: int | None = None) -> Results:
        prob = self._state_problem()
        law = self._constraint_law(constraint, lambda n: self.f_index[n])
        out = []
        truncated = False
        gen = prob.search([law], budget=self.budget, limit=None if limit is None else limit + 1)
        for sol in gen:
            if limit is not None and len(out) >= limit:
                truncated = True
                break
            out.append(self._decode_fluents(sol, 0))
        gen.close()
        out.sort()
        return Results(out, truncated, prob.nodes, prob.raw_size())

    def complete_state(self, simple: Mapping[str, str]) -> K.State | None:
        """The unique state agreeing with the given simple-fluent values, if there is one."""
        atoms = [K.Atom(k, v) for k, v in simple.items()]
        found = self.enumerate_states(K.conj(*atoms), limit=2)
        if len(found) != 1:
            return None
        return found[0]

    def successors(self, s: Mapping[str, str], label_constraint: K.Formula = K.TOP,
                   ) -> Results:
        s = self._check_state(s)
        prob = self._transition_problem(s, None, self.bound)
        law = self._constraint_law(label_constraint, lambda n: prob.base_a + self.a_index[n])
        out = []
        for sol in prob.search([law], budget=self.budget):
            out.append(K.Transition(s, self._decode_label(sol, prob.base_a),
                                    self._decode_fluents(sol, prob.base1)))
        out.sort(key=lambda t: (t.label, t.target))
        return Results(out, False, prob.nodes, prob.raw_size())

    def _successors_for_label(self, s: K.State, label: K.TransitionLabel, observe: K.Formula = K.TOP):
        prob = self._transition_problem(s, label)
        law = self._constraint_law(observe, lambda n: prob.base1 + self.f_index[n])
        targets = [self._decode_fluents(sol, prob.base1)
                   for sol in prob.search([law], budget=self.budget)]
        targets.sort()
        return targets, prob

    def check_all_states(self, phi: K.Formula, psi: K.Formula, max_witnesses: int = 5,
                         max_counterexamples: int = 20, name: str = "") -> QueryReport:
        bad = self.enumerate_states(K.conj(phi, K.Not(psi)), limit=max_counterexamples)
        good = self._witnesses(lambda: self.enumerate_states(K.conj(phi, psi), limit=max_witnesses),
                               max_witnesses)
        stats = {
            "nodes": bad.nodes + good.nodes,
            "interpretations": bad.interpretations,
            "counterexamples_found": len(bad),
            "counterexamples_truncated": bad.truncated,
            "witnesses_found": len(good),
            "witness_search": "complete" if good.exhausted else "budget",
        }
        return QueryReport("fails" if bad else "holds", list(good), list(bad), stats, name)

    def _witnesses(self, run, limit: int) -> Results:
        """Witness search is informative only, so it runs under its own smaller budget."""
        if not limit:
            out = Results()
            out.exhausted = True
            return out
        saved, self.budget = self.budget, min(self.budget, self.witness_budget)
        try:
            out = run()
            out.exhausted = True
        except BudgetExceeded:
            out = Results()
            out.exhausted = False
        finally:
            self.budget = saved
        return out

    def _enumerate_transitions(self, pre: K.Formula, label: K.Formula, post: K.Formula,
                               limit: int | None) -> Results:
        prob = self._transition_problem(None, None, self.bound)
        laws = [
            self._constraint_law(pre, lambda n: self.f_index[n]),
            self._constraint_law(label, lambda n: prob.base_a + self.a_index[n]),
            self._constraint_law(post, lambda n: prob.base1 + self.f_index[n]),
        ]
        out = []
        truncated = False
        for sol in prob.search(laws, budget=self.budget, limit=None if limit is None else limit + 1):
            if limit is not None and len(out) >= limit:
                truncated = True
                break
            out.append(K.Transition(self._decode_fluents(sol, 0), self._decode_label(sol, prob.base_a),
                                    self._decode_fluents(sol, prob.base1)))
        out.sort(key=lambda t: (t.source, t.label, t.target))
        return Results(out, truncated, prob.nodes, prob.raw_size())

    def check_all_transitions(self, pre: K.Formula, label: K.Formula, post: K.Formula,
                              max_witnesses: int = 5, max_counterexamples: int = 20,
                              name: str = "") -> QueryReport:
        bad = self._enumerate_transitions(pre, label, K.Not(post), max_counterexamples)
        good = self._witnesses(lambda: self._enumerate_transitions(pre, label, post, max_witnesses),
                               max_witnesses)
        stats = {
            "nodes": bad.nodes + good.nodes,
            "interpretations": bad.interpretations,
            "counterexamples_found": len(bad),
            "counterexamples_truncated": bad.truncated,
            "witnesses_found": len(good),
            "witness_search": "complete" if good.exhausted else "budget",
        }
        return QueryReport("fails" if bad else "holds", list(good), list(bad), stats, name)

    # -- replay
    def label_for(self, events: Iterable[str]) -> K.TransitionLabel:
        return K.all_false_label(self.d, list(events))

    def replay(self, s0: Mapping[str, str], narrative: Sequence["NarrativeStep"],
               policy: str = "fail", seed: int | None = None,
               power_of: Callable[[str], str | None] | None = None) -> "ReplayResult":
        if policy not in POLICIES:
            raise ValueError(f"unknown ambiguity policy {policy!r}; expected one of {POLICIES}")
        s = self._check_state(s0)
        rng = random.Random(seed)
        states, labels, records = [s], [], []
        for k, step in enumerate(narrative):
            label = self.label_for(step.events)
            counted = [e for e in step.events
                       if self._counted(e, self.d.decl(e))]
            if self.bound is not None and len(counted) > self.bound:
                raise ReplayFailure(k, step.time, "events violate the concurrency bound",
                                    {"events": list(step.events), "bound": self.bound})
            observe = K.conj(*step.observe)
            targets, prob = self._successors_for_label(s, label, observe)
            unpowered = []
            if power_of is not None:
                for e in step.events:
                    p = power_of(e)
                    if p is not None and s.get(p) != "t":
                        unpowered.append(e)
            if not targets:
                raise ReplayFailure(k, step.time, "event not executable as modeled",
                                    self._diagnose(prob, s, label, observe))
            if len(targets) > 1:
                if policy == "fail":
                    raise AmbiguityError(k, step.time, targets)
                nxt = targets[0] if policy == "first-canonical" else rng.choice(targets)
            else:
                nxt = targets[0]
            records.append(StepRecord(k, step.time, tuple(step.events), len(targets), tuple(unpowered)))
            labels.append(label)
            states.append(nxt)
            s = nxt
        return ReplayResult(K.Path(tuple(states), tuple(labels)), records)

    def _diagnose(self, prob: _Problem, s, label, observe) -> dict:
        var = prob.root_conflict()
        info: dict = {"events": label.true_atoms()}
        if var is None:
            info["reason"] = "no fixpoint exists (search exhausted)"
            if observe != K.TOP:
                info["observation"] = str(observe)
            return info
        name = prob.names[var]
        info["constant"] = name
        touching = []
        for law in prob.laws:
            if law.head_var == var and isinstance(law.origin, (K.StaticLaw, K.DynamicLaw)):
                touching.append(str(law.origin))
            elif law.head_var < 0 and var in _vars_of(law.cond, set()) and law.origin != "constraint":
                touching.append(str(law.origin))
        info["laws"] = touching[:12]
        return info


POLICIES = ("fail", "first-canonical", "seeded-random")


def _sat_fast(f: K.Formula, i: Mapping[str, str]) -> bool:
    if isinstance(f, K.Atom):
        return i[f.constant] == f.value
    return K.satisfies(i, f)


@dataclass(frozen=True)
class NarrativeStep:
    time: int
    events: tuple
    observe: tuple = ()


@dataclass(frozen=True)
class StepRecord:
    index: int
    time: int
    events: tuple
    branches: int
    unpowered: tuple = ()


@dataclass
class ReplayResult:
    path: K.Path
    steps: list

    @property
    def final(self) -> K.State:
        return self.path.final


class ReplayFailure(RuntimeError):
    def __init__(self, index: int, time: int, reason: str, details: dict | None = None):
        self.index = index
        self.time = time
        self.reason = reason
        self.details = details or {}
        super().__init__(f"step {index} (time {time}): {reason}"
                         + (f" {self.details}" if self.details else ""))


class AmbiguityError(ReplayFailure):
    def __init__(self, index: int, time: int, branches: list):
        self.branches = branches
        diffs = _branch_differences(branches)
        super().__init__(index, time, f"{len(branches)} successor states", {"differences": diffs})


def _branch_differences(states: list) -> dict:
    if not states:
        return {}
    keys = [k for k in states[0] if len({s[k] for s in states}) > 1]
    return {k: sorted({s[k] for s in states}) for k in keys[:10]}


# --- module-level conveniences ------------------------------------------------------------


def enumerate_states(d, constraint=K.TOP, limit=None, budget=DEFAULT_BUDGET) -> Results:
    return Engine(d, budget).enumerate_states(constraint, limit)


def successors(d, s, label_constraint=K.TOP, concurrency_bound=1, budget=DEFAULT_BUDGET) -> Results:
    return Engine(d, budget, concurrency_bound).successors(s, label_constraint)


def check_all_states(d, phi, psi, budget=DEFAULT_BUDGET, **kw) -> QueryReport:
    return Engine(d, budget).check_all_states(phi, psi, **kw)


def check_all_transitions(d, pre, label, post, concurrency_bound=1, budget=DEFAULT_BUDGET,
                          **kw) -> QueryReport:
    return Engine(d, budget, concurrency_bound).check_all_transitions(pre, label, post, **kw)


def replay(d, s0, narrative, policy="fail", seed=None, concurrency_bound=1, power_of=None,
           budget=DEFAULT_BUDGET) -> ReplayResult:
    return Engine(d, budget, concurrency_bound).replay(s0, narrative, policy, seed, power_of)


# --- brute-force oracles -------------------------------------------------------------------


def _all_interpretations(decls) -> Iterable[K.Interpretation]:
    names = [c.name for c in decls]
    for values in itertools.product(*(c.domain for c in decls)):
        yield K.Interpretation(zip(names, values))


def brute_force_states(d: K.ActionDescription, constraint: K.Formula = K.TOP) -> list:
    fluents = [c for c in d.constants if c.is_fluent]
    return sorted(s for s in _all_interpretations(fluents)
                  if K.satisfies(s, constraint) and K.is_state(d, s))


def brute_force_successors(d: K.ActionDescription, s, label_constraint: K.Formula = K.TOP,
                           concurrency_bound: int | None = 1,
                           exempt: Sequence[str] = DEFAULT_EXEMPT) -> list:
    fluents = [c for c in d.constants if c.is_fluent]
    actions = [c for c in d.constants if not c.is_fluent]
    out = []
    for e in _all_interpretations(actions):
        if not K.satisfies(e, label_constraint):
            continue
        if concurrency_bound is not None:
            n = sum(1 for c in actions if c.domain == K.BOOL and e[c.name] == "t"
                    and not c.name.startswith(tuple(exempt)))
            if n > concurrency_bound:
                continue
        for s2 in _all_interpretations(fluents):
            if K.is_transition(d, s, e, s2):
                out.append(K.Transition(K.Interpretation(s), e, s2))
    out.sort(key=lambda t: (t.label, t.target))
    return out
