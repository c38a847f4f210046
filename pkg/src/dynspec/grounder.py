"""Grounding: schematic descriptions with typed variables become ground, definite descriptions.

Arithmetic and relational comparisons appear only at grounding time. A comparison between a
constant and a value becomes the finite disjunction of the domain values that satisfy it.
"""

from __future__ import annotations

import itertools
from typing import Iterable

from . import kernel as K
from .schematic import (
    S_FALSE,
    S_TRUE,
    Arith,
    Count,
    Num,
    ParseError,
    Ref,
    SAnd,
    SBool,
    SchematicDescription,
    SchematicLaw,
    SCmp,
    SHolds,
    SImplies,
    SNot,
    SOr,
    SQuant,
    Var,
    expand_macros,
)


class GroundingError(ValueError):
    pass


def ground_name(name: str, args: Iterable[str]) -> str:
    args = list(args)
    return f"{name}({','.join(args)})" if args else name


class _Const(str):
    """A ground constant name produced by term evaluation (as opposed to a value symbol)."""


def _as_int(v, where):
    try:
        return int(v)
    except (TypeError, ValueError):
        raise GroundingError(f"{where}: {v!r} is not an integer") from None


_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def free_vars(node, bound=frozenset()) -> set:
    out: set = set()
    _free(node, bound, out)
    return out


def _free(node, bound, out):
    if isinstance(node, Var):
        if node.name not in bound:
            out.add(node.name)
    elif isinstance(node, Ref):
        for a in node.args:
            _free(a, bound, out)
    elif isinstance(node, Arith):
        _free(node.left, bound, out)
        _free(node.right, bound, out)
    elif isinstance(node, (Count, SQuant)):
        _free(node.body, bound | {node.var}, out)
    elif isinstance(node, SCmp):
        _free(node.left, bound, out)
        _free(node.right, bound, out)
    elif isinstance(node, SHolds):
        _free(node.ref, bound, out)
    elif isinstance(node, SNot):
        _free(node.arg, bound, out)
    elif isinstance(node, (SAnd, SOr)):
        for a in node.args:
            _free(a, bound, out)
    elif isinstance(node, SImplies):
        _free(node.left, bound, out)
        _free(node.right, bound, out)


class Grounder:
    def __init__(self, sd: SchematicDescription):
        self.sd = sd
        self.constants: dict[str, K.ConstantDecl] = {}
        self.names = {s.name for s in sd.schemas}
        for schema in sd.schemas:
            pools = [(p[1],) if isinstance(p, tuple) else self._sort(p) for p in schema.params]
            for combo in itertools.product(*pools):
                name = ground_name(schema.name, combo)
                if name in self.constants:
                    raise GroundingError(f"constant {name} declared twice")
                try:
                    self.constants[name] = K.ConstantDecl(name, schema.kind, schema.domain)
                except K.SignatureError as exc:
                    raise GroundingError(str(exc)) from None

    def _sort(self, name: str) -> tuple:
        try:
            return self.sd.sorts[name]
        except KeyError:
            raise GroundingError(f"unknown sort {name}") from None

    # -- terms
    def term(self, t, env: dict):
        if isinstance(t, Num):
            return str(t.value)
        if isinstance(t, Var):
            try:
                return env[t.name]
            except KeyError:
                raise GroundingError(f"unbound variable {t.name}") from None
        if isinstance(t, Arith):
            a = _as_int(self.term(t.left, env), str(t))
            b = _as_int(self.term(t.right, env), str(t))
            return str({"+": a + b, "-": a - b, "*": a * b}[t.op])
        if isinstance(t, Ref):
            if t.name in self.names and (t.args or t.name in self.constants):
                name = ground_name(t.name, (self._value(a, env) for a in t.args))
                if name not in self.constants:
                    raise GroundingError(f"unknown constant {name}")
                return _Const(name)
            if t.args:
                raise GroundingError(f"{t.name} is not a declared constant")
            return t.name
        if isinstance(t, Count):
            return ("count", [self.formula(t.body, {**env, t.var: e}) for e in self._sort(t.sort)])
        raise GroundingError(f"bad term {t!r}")

    def _value(self, t, env) -> str:
        v = self.term(t, env)
        if isinstance(v, _Const) or isinstance(v, tuple):
            raise GroundingError(f"constant {v} used as an argument")
        return v

    # -- formulas
    def formula(self, f, env: dict) -> K.Formula:
        if isinstance(f, SBool):
            return K.TOP if f.value else K.BOTTOM
        if isinstance(f, SHolds):
            c = self.term(f.ref, env)
            if not isinstance(c, _Const):
                raise GroundingError(f"{f.ref} is not a constant")
            return self._atom(c, "t")
        if isinstance(f, SNot):
            if isinstance(f.arg, SHolds):
                c = self.term(f.arg.ref, env)
                if isinstance(c, _Const):
                    return self._atom(c, "f")
            inner = self.formula(f.arg, env)
            if isinstance(inner, K.Top):
                return K.BOTTOM
            if isinstance(inner, K.Bottom):
                return K.TOP
            return K.Not(inner)
        if isinstance(f, SAnd):
            return K.conj(*(self.formula(a, env) for a in f.args))
        if isinstance(f, SOr):
            return K.disj(*(self.formula(a, env) for a in f.args))
        if isinstance(f, SImplies):
            left = self.formula(f.left, env)
            right = self.formula(f.right, env)
            if isinstance(left, K.Bottom) or isinstance(right, K.Top):
                return K.TOP
            if isinstance(left, K.Top):
                return right
            return K.Implies(left, right)
        if isinstance(f, SQuant):
            parts = [self.formula(f.body, {**env, f.var: e}) for e in self._sort(f.sort)]
            return K.conj(*parts) if f.kind == "forall" else K.disj(*parts)
        if isinstance(f, SCmp):
            return self.compare(f.op, self.term(f.left, env), self.term(f.right, env))
        raise GroundingError(f"bad formula {f!r}")

    def _atom(self, c: str, value: str) -> K.Atom:
        decl = self.constants[c]
        if value not in decl.domain:
            raise GroundingError(f"{value!r} not in domain of {c}")
        return K.Atom(c, value)

    def compare(self, op: str, left, right) -> K.Formula:
        test = _CMP[op]
        lc, rc = isinstance(left, _Const), isinstance(right, _Const)
        if isinstance(left, tuple) or isinstance(right, tuple):
            if isinstance(right, tuple):
                left, right, op = right, left, _flip(op)
                test = _CMP[op]
            n = _as_int(right, "#count")
            parts = left[1]
            out = []
            for k in range(len(parts) + 1):
                if not test(k, n):
                    continue
                for chosen in itertools.combinations(range(len(parts)), k):
                    picked = set(chosen)
                    out.append(K.conj(*(p if i in picked else _neg(p) for i, p in enumerate(parts))))
            return K.disj(*out)
        if lc and rc:
            if op in ("=", "!="):
                common = [v for v in self.constants[left].domain if v in self.constants[right].domain]
                eq = K.disj(*(K.conj(K.Atom(left, v), K.Atom(right, v)) for v in common))
                return eq if op == "=" else _neg(eq)
            rdom = self.constants[right].domain
            ldom = self.constants[left].domain
            groups = []
            for rv in rdom:
                ok = [K.Atom(left, lv) for lv in ldom
                      if test(_as_int(lv, left), _as_int(rv, right))]
                if ok:
                    groups.append(K.conj(K.Atom(right, rv), K.disj(*ok)))
            return K.disj(*groups)
        if rc:
            left, right, op = right, left, _flip(op)
            test = _CMP[op]
            lc = True
        if lc:
            if op == "=":
                return self._atom(left, right)
            if op == "!=":
                return K.Not(self._atom(left, right))
            n = _as_int(right, str(left))
            return K.disj(*(K.Atom(left, v) for v in self.constants[left].domain
                            if test(_as_int(v, left), n)))
        if op in ("=", "!="):
            return K.TOP if test(left, right) else K.BOTTOM
        return K.TOP if test(_as_int(left, op), _as_int(right, op)) else K.BOTTOM

    def head(self, h, env) -> K.Head:
        if h == S_FALSE:
            return K.BOTTOM
        f = self.formula(h, env)
        if not isinstance(f, K.Atom):
            raise GroundingError(f"head {h} did not ground to an atom")
        return f

    def guard(self, g, env) -> bool:
        f = self.formula(g, env)
        if isinstance(f, K.Top):
            return True
        if isinstance(f, K.Bottom):
            return False
        raise GroundingError(f"guard {g} refers to constants")

    # -- laws
    def bindings(self, law: SchematicLaw, extra_vars: dict | None = None):
        """Yield variable bindings whose guards hold, pruning guard conjuncts early."""
        var_sorts = dict(self.sd.variables)
        var_sorts.update(extra_vars or {})
        var_sorts.update(dict(law.local_vars))
        names = set()
        for part in (law.head, law.condition, law.precondition, law.guard):
            if part is not None:
                names |= free_vars(part)
        order = sorted(names)
        for n in order:
            if n not in var_sorts:
                raise GroundingError(f"line {law.line}: variable {n} has no declared sort")
        conjuncts = list(law.guard.args) if isinstance(law.guard, SAnd) else [law.guard]
        schedule: dict[int, list] = {}
        for g in conjuncts:
            if g == S_TRUE:
                continue
            fv = free_vars(g)
            depth = max((order.index(v) for v in fv), default=-1)
            schedule.setdefault(depth, []).append(g)
        pools = [self._sort(var_sorts[n]) for n in order]

        def rec(depth, env):
            for g in schedule.get(depth - 1, ()):
                if not self.guard(g, env):
                    return
            if depth == len(order):
                yield dict(env)
                return
            for value in pools[depth]:
                env[order[depth]] = value
                yield from rec(depth + 1, env)
            env.pop(order[depth], None)

        yield from rec(0, {})

    def ground_law(self, law: SchematicLaw) -> list:
        out = []
        for basic in expand_macros(law, self.sd):
            for env in self.bindings(basic):
                try:
                    head = self.head(basic.head, env)
                    cond = self.formula(basic.condition, env)
                    if basic.form == "caused":
                        item = K.StaticLaw(head, cond)
                        if isinstance(cond, K.Bottom):
                            continue  # never fires
                    else:
                        pre = self.formula(basic.precondition, env)
                        if isinstance(cond, K.Bottom) or isinstance(pre, K.Bottom):
                            continue
                        item = K.DynamicLaw(head, cond, pre)
                except GroundingError as exc:
                    raise GroundingError(f"line {law.line}: {exc} (binding {env})") from None
                out.append(item)
        return out

    def ground(self) -> K.ActionDescription:
        statics, dynamics = {}, {}
        for law in self.sd.laws:
            for g in self.ground_law(law):
                (statics if isinstance(g, K.StaticLaw) else dynamics).setdefault(g, None)
        try:
            return K.ActionDescription(tuple(self.constants.values()), tuple(statics), tuple(dynamics))
        except (K.SignatureError, K.DefinitenessError) as exc:
            raise GroundingError(str(exc)) from None

    def ground_formula(self, text_or_formula, env: dict | None = None) -> K.Formula:
        f = text_or_formula
        if isinstance(f, str):
            from .language import parse_formula
            f = parse_formula(f, self.sd)
        return self.formula(f, dict(env or {}))


def _flip(op: str) -> str:
    return {"<": ">", ">": "<", "<=": ">=", ">=": "<="}.get(op, op)


def _neg(f: K.Formula) -> K.Formula:
    if isinstance(f, K.Top):
        return K.BOTTOM
    if isinstance(f, K.Bottom):
        return K.TOP
    if isinstance(f, K.Not):
        return f.arg
    return K.Not(f)


def ground(sd: SchematicDescription) -> K.ActionDescription:
    return Grounder(sd).ground()


def check_definite(description) -> list:
    """Diagnostics for non-definite laws; an empty list means the description is definite."""
    if isinstance(description, K.ActionDescription):
        laws = list(description.statics) + list(description.dynamics)
    else:
        laws = list(description)
    if not laws:
        return ["an action description must be a non-empty set of causal laws"]
    problems = []
    for law in laws:
        if not isinstance(law.head, (K.Atom, K.Bottom)):
            problems.append(f"head of {law} is not an atom or false")
    return problems

