"""Core data model and transition-system semantics for definite C+ action descriptions.

States, labels and transitions are plain interpretations; the functions here are the
reference semantics that every faster path in the engine is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

SIMPLE = "simple"
SDETERMINED = "sdetermined"
ACTION = "action"
KINDS = (SIMPLE, SDETERMINED, ACTION)

BOOL = ("f", "t")


class SignatureError(ValueError):
    """A formula or interpretation does not fit the signature."""


class DefinitenessError(ValueError):
    pass


@dataclass(frozen=True)
class ConstantDecl:
    name: str
    kind: str
    domain: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SignatureError(f"unknown constant kind {self.kind!r} for {self.name}")
        if len(self.domain) < 2:
            raise SignatureError(f"domain of {self.name} needs at least 2 elements")
        if len(set(self.domain)) != len(self.domain):
            raise SignatureError(f"domain of {self.name} has duplicates")

    @property
    def is_fluent(self) -> bool:
        return self.kind != ACTION


# --- formulas -------------------------------------------------------------------


class Formula:
    __slots__ = ()

    def constants(self) -> set:
        out: set = set()
        _collect(self, out)
        return out


@dataclass(frozen=True)
class Atom(Formula):
    constant: str
    value: str

    def __str__(self):
        return f"{self.constant}={self.value}"


@dataclass(frozen=True)
class Top(Formula):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Bottom(Formula):
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self):
        return f"~{_paren(self.arg)}"


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __str__(self):
        if not self.args:
            return "true"
        return " & ".join(_paren(a) for a in self.args)


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __str__(self):
        if not self.args:
            return "false"
        return " | ".join(_paren(a) for a in self.args)


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"{_paren(self.left)} -> {_paren(self.right)}"


TOP = Top()
BOTTOM = Bottom()


def _paren(f: Formula) -> str:
    if isinstance(f, (Atom, Top, Bottom, Not)):
        return str(f)
    return f"({f})"


def _collect(f: Formula, out: set) -> None:
    if isinstance(f, Atom):
        out.add(f.constant)
    elif isinstance(f, Not):
        _collect(f.arg, out)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            _collect(a, out)
    elif isinstance(f, Implies):
        _collect(f.left, out)
        _collect(f.right, out)


def conj(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, Top):
            continue
        if isinstance(p, Bottom):
            return BOTTOM
        if isinstance(p, And):
            flat.extend(p.args)
        else:
            flat.append(p)
    if not flat:
        return TOP
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, Bottom):
            continue
        if isinstance(p, Top):
            return TOP
        if isinstance(p, Or):
            flat.extend(p.args)
        else:
            flat.append(p)
    if not flat:
        return BOTTOM
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


Head = Union[Atom, Bottom]


# --- laws -------------------------------------------------------------------------


@dataclass(frozen=True)
class StaticLaw:
    head: Head
    condition: Formula = TOP

    def __str__(self):
        return f"caused {self.head} if {self.condition};"


@dataclass(frozen=True)
class DynamicLaw:
    head: Head
    condition: Formula = TOP
    precondition: Formula = TOP

    def __str__(self):
        return f"caused {self.head} if {self.condition} after {self.precondition};"


# --- interpretations ----------------------------------------------------------------


class Interpretation(Mapping):
    """Immutable total map from constant names to values, canonically ordered by name."""

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, values: Mapping[str, str] | Iterable[tuple[str, str]] = ()):
        items = dict(values)
        self._items = tuple(sorted(items.items()))
        self._map = dict(self._items)
        self._hash = None

    def __getitem__(self, key):
        return self._map[key]

    def __iter__(self) -> Iterator[str]:
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._items)
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Interpretation):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self._map == dict(other)
        return NotImplemented

    def __lt__(self, other):
        return self._items < other._items

    def __repr__(self):
        return "Interpretation({" + ", ".join(f"{k}: {v}" for k, v in self._items) + "})"

    def atoms(self) -> frozenset:
        return frozenset(Atom(k, v) for k, v in self._items)

    def true_atoms(self) -> list:
        """Names of Boolean constants mapped to t."""
        return [k for k, v in self._items if v == "t"]

    def updated(self, changes: Mapping[str, str]) -> "Interpretation":
        merged = dict(self._map)
        merged.update(changes)
        return Interpretation(merged)

    def union(self, other: Mapping[str, str]) -> "Interpretation":
        overlap = set(self._map) & set(other)
        if overlap:
            raise SignatureError(f"interpretations overlap on {sorted(overlap)[:3]}")
        return self.updated(other)


State = Interpretation
TransitionLabel = Interpretation


@dataclass(frozen=True)
class Transition:
    source: State
    label: TransitionLabel
    target: State


@dataclass(frozen=True)
class Path:
    states: tuple
    labels: tuple = ()

    def __post_init__(self):
        if len(self.states) != len(self.labels) + 1:
            raise ValueError("a path alternates states and labels, starting and ending with a state")

    @property
    def length(self) -> int:
        return len(self.labels)

    def transitions(self) -> list:
        return [Transition(self.states[i], self.labels[i], self.states[i + 1]) for i in range(self.length)]

    @property
    def final(self) -> State:
        return self.states[-1]


# --- action descriptions --------------------------------------------------------------


@dataclass(frozen=True)
class ActionDescription:
    constants: tuple
    statics: tuple = ()
    dynamics: tuple = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        index = {}
        for c in self.constants:
            if c.name in index:
                raise SignatureError(f"constant {c.name} declared twice")
            index[c.name] = c
        object.__setattr__(self, "_index", index)
        if not self.statics and not self.dynamics:
            raise DefinitenessError("an action description is a non-empty set of causal laws")
        for law in self.statics:
            self._check_static(law)
        for law in self.dynamics:
            self._check_dynamic(law)

    def _check_atom(self, atom: Atom) -> ConstantDecl:
        decl = self._index.get(atom.constant)
        if decl is None:
            raise SignatureError(f"unknown constant {atom.constant}")
        if atom.value not in decl.domain:
            raise SignatureError(f"{atom.value!r} not in domain of {atom.constant}")
        return decl

    def _check_formula(self, f: Formula, allow_actions: bool, where) -> None:
        # `where` is the enclosing law; it is only rendered for error messages
        for name in f.constants():
            decl = self._index.get(name)
            if decl is None:
                raise SignatureError(f"unknown constant {name} in {where}")
            if decl.kind == ACTION and not allow_actions:
                raise SignatureError(f"action constant {name} in fluent-only position of {where}")
        _check_values(self, f)

    def _check_head(self, law) -> ConstantDecl | None:
        head = law.head
        if isinstance(head, Bottom):
            return None
        if not isinstance(head, Atom):
            raise DefinitenessError(f"head of {law} is not an atom or false")
        return self._check_atom(head)

    def _check_static(self, law: StaticLaw) -> None:
        decl = self._check_head(law)
        if decl is not None and decl.kind == ACTION:
            raise SignatureError(f"static law {law} has an action head")
        self._check_formula(law.condition, False, law)

    def _check_dynamic(self, law: DynamicLaw) -> None:
        decl = self._check_head(law)
        if decl is not None and decl.kind != SIMPLE:
            raise SignatureError(f"dynamic law {law} must head a simple fluent")
        self._check_formula(law.condition, False, law)
        self._check_formula(law.precondition, True, law)

    def decl(self, name: str) -> ConstantDecl:
        try:
            return self._index[name]
        except KeyError:
            raise SignatureError(f"unknown constant {name}") from None

    def __contains__(self, name) -> bool:
        return name in self._index

    @property
    def fluents(self) -> list:
        return [c for c in self.constants if c.kind != ACTION]

    @property
    def simple_fluents(self) -> list:
        return [c for c in self.constants if c.kind == SIMPLE]

    @property
    def actions(self) -> list:
        return [c for c in self.constants if c.kind == ACTION]


def _check_values(d: ActionDescription, f: Formula) -> None:
    if isinstance(f, Atom):
        d._check_atom(f)
    elif isinstance(f, Not):
        _check_values(d, f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            _check_values(d, a)
    elif isinstance(f, Implies):
        _check_values(d, f.left)
        _check_values(d, f.right)


# --- semantics ----------------------------------------------------------------------


def satisfies(i: Mapping[str, str], phi: Formula) -> bool:
    if isinstance(phi, Atom):
        try:
            return i[phi.constant] == phi.value
        except KeyError:
            raise SignatureError(f"constant {phi.constant} not interpreted") from None
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bottom):
        return False
    if isinstance(phi, Not):
        return not satisfies(i, phi.arg)
    if isinstance(phi, And):
        return all(satisfies(i, a) for a in phi.args)
    if isinstance(phi, Or):
        return any(satisfies(i, a) for a in phi.args)
    if isinstance(phi, Implies):
        return (not satisfies(i, phi.left)) or satisfies(i, phi.right)
    raise TypeError(f"not a formula: {phi!r}")


def _check_total(d: ActionDescription, i: Mapping[str, str], fluent: bool) -> None:
    names = {c.name for c in d.constants if c.is_fluent == fluent}
    if set(i) != names:
        missing = sorted(names - set(i))[:3]
        extra = sorted(set(i) - names)[:3]
        raise SignatureError(f"interpretation mismatch: missing {missing}, extra {extra}")
    for k, v in i.items():
        if v not in d.decl(k).domain:
            raise SignatureError(f"{v!r} not in domain of {k}")


def t_static(d: ActionDescription, s: Mapping[str, str]) -> set:
    _check_total(d, s, True)
    return {law.head for law in d.statics if satisfies(s, law.condition)}


def simple_atoms(d: ActionDescription, s: Mapping[str, str]) -> set:
    return {Atom(c.name, s[c.name]) for c in d.simple_fluents}


def _atoms_of(s: Mapping[str, str]) -> set:
    return {Atom(k, v) for k, v in s.items()}


def is_state(d: ActionDescription, s: Mapping[str, str]) -> bool:
    try:
        heads = t_static(d, s)
    except SignatureError:
        return False
    if BOTTOM in heads:
        return False
    return _atoms_of(s) == heads | simple_atoms(d, s)


def effect_set(d: ActionDescription, s: Mapping[str, str], e: Mapping[str, str],
               s2: Mapping[str, str]) -> set:
    _check_total(d, e, False)
    _check_total(d, s2, True)
    both = dict(s)
    both.update(e)
    return {law.head for law in d.dynamics
            if satisfies(s2, law.condition) and satisfies(both, law.precondition)}


def is_transition(d: ActionDescription, s: Mapping[str, str], e: Mapping[str, str],
                  s2: Mapping[str, str]) -> bool:
    if not is_state(d, s):
        return False
    try:
        heads = t_static(d, s2) | effect_set(d, s, e, s2)
    except SignatureError:
        return False
    if BOTTOM in heads:
        return False
    return _atoms_of(s2) == heads


def is_path(d: ActionDescription, path: Path) -> bool:
    if path.length == 0:
        return is_state(d, path.states[0])
    return all(is_transition(d, t.source, t.label, t.target) for t in path.transitions())


def fixpoint_diff(d: ActionDescription, s: Mapping[str, str],
                  e: Mapping[str, str] | None = None, prev: Mapping[str, str] | None = None) -> dict:
    """Explain why s fails the state (or, given prev and e, the transition) fixpoint.

    Returns {"uncaused": [...], "caused_but_absent": [...], "bottom": bool}.
    """
    heads = t_static(d, s)
    if prev is None:
        heads |= simple_atoms(d, s)
    else:
        heads |= effect_set(d, prev, e, s)
    atoms = _atoms_of(s)
    return {
        "uncaused": sorted(str(a) for a in atoms - heads),
        "caused_but_absent": sorted(str(a) for a in heads - atoms if isinstance(a, Atom)),
        "bottom": BOTTOM in heads,
    }


def all_false_label(d: ActionDescription, true_actions: Sequence[str] = ()) -> Interpretation:
    """Label with the given Boolean actions true and every other action false."""
    names = {c.name for c in d.actions}
    unknown = set(true_actions) - names
    if unknown:
        raise SignatureError(f"unknown actions {sorted(unknown)}")
    chosen = set(true_actions)
    return Interpretation({n: ("t" if n in chosen else "f") for n in names})


# --- worked examples ----------------------------------------------------------------


@dataclass(frozen=True)
class FixpointExample:
    """A hand-checked verdict: `args` is (s,) for is_state and (s, e, s') for is_transition."""

    name: str
    description: ActionDescription
    args: tuple
    expected: bool

    def verdict(self) -> bool:
        if len(self.args) == 1:
            return is_state(self.description, self.args[0])
        return is_transition(self.description, *self.args)


def _inertial(name: str, domain=BOOL) -> list:
    return [DynamicLaw(Atom(name, u), Atom(name, u), Atom(name, u)) for u in domain]


def reference_examples() -> tuple:
    """Three is_state and three is_transition examples with their expected verdicts."""
    p = ConstantDecl("p", SIMPLE, BOOL)
    q = ConstantDecl("q", SDETERMINED, BOOL)
    a = ConstantDecl("a", ACTION, BOOL)
    s = Interpretation

    inertial_p = ActionDescription((p, a), (), tuple(_inertial("p")))
    q_iff_p = ActionDescription((p, q), (StaticLaw(Atom("q", "t"), Atom("p", "t")),
                                         StaticLaw(Atom("q", "f"), Atom("q", "f"))),
                                tuple(_inertial("p")))
    q_never_true = ActionDescription((p, q), (StaticLaw(Atom("q", "f"), Atom("p", "f")),),
                                     tuple(_inertial("p")))
    a_clears_p = ActionDescription(
        (p, a), (), tuple(_inertial("p")) + (DynamicLaw(Atom("p", "f"), TOP, Atom("a", "t")),))
    p_forbidden = ActionDescription((p, a), (StaticLaw(BOTTOM, Atom("p", "t")),),
                                    tuple(_inertial("p")))
    quiet = s({"a": "f"})
    return (
        FixpointExample("inertia admits p", inertial_p, (s({"p": "t"}),), True),
        FixpointExample("q iff p rejects p with not q", q_iff_p, (s({"p": "t", "q": "f"}),), False),
        FixpointExample("uncaused q is not a state", q_never_true, (s({"p": "f", "q": "t"}),), False),
        FixpointExample("inertia forbids p flipping", inertial_p,
                        (s({"p": "t"}), quiet, s({"p": "f"})), False),
        FixpointExample("a causes not p", a_clears_p,
                        (s({"p": "t"}), s({"a": "t"}), s({"p": "f"})), True),
        FixpointExample("source is not a state", p_forbidden,
                        (s({"p": "t"}), quiet, s({"p": "t"})), False),
    )
