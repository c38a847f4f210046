"""Schematic (variable-carrying) laws, formulas and descriptions, plus macro expansion."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# --- terms --------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Num:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Ref:
    """An identifier with optional arguments: a constant reference or a value symbol."""

    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Arith:
    op: str
    left: object
    right: object

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Count:
    var: str
    sort: str
    body: object

    def __str__(self):
        return f"#count{{{self.var} in {self.sort}: {self.body}}}"


# --- schematic formulas ---------------------------------------------------------------


@dataclass(frozen=True)
class SBool:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class SCmp:
    op: str
    left: object
    right: object

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class SHolds:
    """Bare Boolean constant reference, sugar for ref = t."""

    ref: Ref

    def __str__(self):
        return str(self.ref)


@dataclass(frozen=True)
class SNot:
    arg: object

    def __str__(self):
        return f"~{_p(self.arg)}"


@dataclass(frozen=True)
class SAnd:
    args: tuple

    def __str__(self):
        return " & ".join(_p(a) for a in self.args)


@dataclass(frozen=True)
class SOr:
    args: tuple

    def __str__(self):
        return " | ".join(_p(a) for a in self.args)


@dataclass(frozen=True)
class SImplies:
    left: object
    right: object

    def __str__(self):
        return f"{_p(self.left)} -> {_p(self.right)}"


@dataclass(frozen=True)
class SQuant:
    kind: str  # forall | exists
    var: str
    sort: str
    body: object

    def __str__(self):
        return f"({self.kind} {self.var} in {self.sort}: {self.body})"


def _p(f) -> str:
    if isinstance(f, (SBool, SHolds, SNot, SQuant, SCmp)):
        return str(f)
    return f"({f})"


S_TRUE = SBool(True)
S_FALSE = SBool(False)


def s_and(*parts):
    flat = [p for p in parts if p != S_TRUE]
    if not flat:
        return S_TRUE
    if len(flat) == 1:
        return flat[0]
    return SAnd(tuple(flat))


def head_negation(head):
    """The head atom ~F for a Boolean head F (used by `iff`)."""
    if isinstance(head, SHolds):
        return SCmp("=", head.ref, Ref("f"))
    if isinstance(head, SNot) and isinstance(head.arg, SHolds):
        return SHolds(head.arg.ref)
    if isinstance(head, SCmp) and head.op == "=" and isinstance(head.right, Ref) and not head.right.args:
        if head.right.name == "t":
            return SCmp("=", head.left, Ref("f"))
        if head.right.name == "f":
            return SCmp("=", head.left, Ref("t"))
    raise ParseError(f"cannot negate non-Boolean head {head}")


# --- laws and descriptions ----------------------------------------------------------------

FORMS = ("caused", "caused_after", "causes", "default", "iff", "inertial")


@dataclass(frozen=True)
class SchematicLaw:
    form: str
    head: object = None
    condition: object = S_TRUE
    precondition: object = S_TRUE
    guard: object = S_TRUE
    line: Optional[int] = None
    local_vars: tuple = ()  # (name, sort) pairs introduced by expansion

    def __post_init__(self):
        if self.form not in FORMS:
            raise ParseError(f"unknown law form {self.form!r}", self.line)

    @property
    def is_basic(self) -> bool:
        return self.form in ("caused", "caused_after")

    def __str__(self):
        where = "" if self.guard == S_TRUE else f" where {self.guard}"
        if self.form == "caused":
            return f"caused {self.head} if {self.condition}{where};"
        if self.form == "caused_after":
            return f"caused {self.head} if {self.condition} after {self.precondition}{where};"
        if self.form == "causes":
            tail = "" if self.precondition == S_TRUE else f" if {self.precondition}"
            return f"{self.condition} causes {self.head}{tail}{where};"
        if self.form == "default":
            tail = "" if self.condition == S_TRUE else f" if {self.condition}"
            return f"default {self.head}{tail}{where};"
        if self.form == "iff":
            return f"caused {self.head} iff {self.condition}{where};"
        return f"inertial {self.head}{where};"


@dataclass(frozen=True)
class ConstantSchema:
    name: str
    params: tuple  # sort names, or ("=", symbol) for literal arguments
    kind: str
    domain: tuple

    def accepts(self, args, var_sorts) -> bool:
        if len(args) != len(self.params):
            return False
        for a, p in zip(args, self.params):
            if isinstance(p, tuple):
                if isinstance(a, Var):
                    continue
                lit = a.value if isinstance(a, Num) else getattr(a, "name", None)
                if str(lit) != p[1]:
                    return False
            elif isinstance(a, Var) and var_sorts.get(a.name) not in (None, p):
                return False
        return True


@dataclass
class SchematicDescription:
    sorts: dict = field(default_factory=dict)
    variables: dict = field(default_factory=dict)
    schemas: list = field(default_factory=list)
    laws: list = field(default_factory=list)

    def add_sort(self, name: str, elements) -> None:
        elements = tuple(str(e) for e in elements)
        if not elements:
            raise ParseError(f"sort {name} is empty")
        if len(set(elements)) != len(elements):
            raise ParseError(f"sort {name} has duplicate elements")
        self.sorts[name] = elements

    def schemas_named(self, name: str) -> list:
        return [s for s in self.schemas if s.name == name]

    def is_constant_name(self, name: str) -> bool:
        return any(s.name == name for s in self.schemas)


def expand_macros(law: SchematicLaw, sd: SchematicDescription | None = None,
                  local_vars: dict | None = None) -> list:
    """Rewrite one schematic law into basic `caused ... if ...[ after ...]` forms.

    `inertial` needs the constant's domain, looked up in `sd`.
    """
    kw = dict(guard=law.guard, line=law.line, local_vars=law.local_vars)
    if law.is_basic:
        return [law]
    if law.form == "default":
        if law.head == S_FALSE:
            raise ParseError("default false is meaningless", law.line)
        return [SchematicLaw("caused", law.head, s_and(law.head, law.condition), **kw)]
    if law.form == "iff":
        return [
            SchematicLaw("caused", law.head, law.condition, **kw),
            SchematicLaw("caused", head_negation(law.head), head_negation(law.head), **kw),
        ]
    if law.form == "causes":
        return [SchematicLaw("caused_after", law.head, S_TRUE, s_and(law.precondition, law.condition), **kw)]
    # inertial
    ref = law.head
    if sd is None:
        raise ParseError("inertial expansion needs the signature", law.line)
    var_sorts = dict(sd.variables)
    var_sorts.update(local_vars or {})
    var_sorts.update(dict(law.local_vars))
    out = []
    if ref.args:
        matches = [s for s in sd.schemas_named(ref.name) if s.accepts(ref.args, var_sorts)]
        domains = {m.domain for m in matches}
        if not matches:
            raise ParseError(f"inertial: unknown constant {ref}", law.line)
        if len(domains) != 1:
            raise ParseError(f"inertial {ref}: ambiguous domain", law.line)
        targets = [(ref, law.local_vars, domains.pop())]
    else:
        targets = []
        for k, schema in enumerate(s for s in sd.schemas_named(ref.name) if s.kind == "simple"):
            args, local = [], list(law.local_vars)
            for i, p in enumerate(schema.params):
                if isinstance(p, tuple):
                    args.append(Ref(p[1]))
                else:
                    v = f"_I{k}_{i}"
                    args.append(Var(v))
                    local.append((v, p))
            targets.append((Ref(ref.name, tuple(args)), tuple(local), schema.domain))
        if not targets:
            raise ParseError(f"inertial: no simple fluent named {ref.name}", law.line)
    for target, local, domain in targets:
        for u in domain:
            atom = SCmp("=", target, Ref(u))
            out.append(SchematicLaw("caused_after", atom, atom, atom, law.guard, law.line, local))
    return out

