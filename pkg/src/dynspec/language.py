"""Recursive-descent parser for the textual action-description format.

    sort agent = {c, sub1, sub2};
    sort count = 0..10;
    var S, S1 : agent;
    fluent simple holder(agent) : bool;
    fluent sdetermined powAssign(agent, agent) : bool;
    action assign_floor(agent, agent);
    caused powAssign(C, S) iff role_of(C) = chair & (forall S1 in agent: ~holder(S1));
    assign_floor(C, S) causes sanctioned(C) if ~perAssign(C, S);
    inertial holder;

Comments run from `%` or `//` to the end of the line.
"""

from __future__ import annotations

import re

from .kernel import BOOL, KINDS
from .schematic import (
    S_FALSE,
    S_TRUE,
    Arith,
    ConstantSchema,
    Count,
    Num,
    ParseError,
    Ref,
    SAnd,
    SchematicDescription,
    SchematicLaw,
    SCmp,
    SHolds,
    SImplies,
    SNot,
    SOr,
    SQuant,
    Var,
)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(%|//)[^\n]*)
  | (?P<range>\.\.)
  | (?P<op>->|<=|>=|!=|\#count|[=<>&|~(){},;:+\-*])
  | (?P<int>\d+(?![A-Za-z_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)

CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


def tokenize(text: str) -> list:
    tokens = []
    pos, line = 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
        elif kind not in ("ws", "comment"):
            tokens.append((kind, value, line))
        pos = m.end()
    tokens.append(("eof", "", line))
    return tokens


class Parser:
    def __init__(self, text: str, sd: SchematicDescription | None = None):
        self.tokens = tokenize(text)
        self.i = 0
        self.sd = sd if sd is not None else SchematicDescription()

    # -- token helpers
    @property
    def tok(self):
        return self.tokens[self.i]

    @property
    def line(self) -> int:
        return self.tok[2]

    def peek(self, value: str) -> bool:
        kind, v, _ = self.tok
        return v == value and kind in ("op", "ident", "range")

    def accept(self, value: str) -> bool:
        if self.peek(value):
            self.i += 1
            return True
        return False

    def expect(self, value: str) -> None:
        if not self.accept(value):
            raise ParseError(f"expected {value!r}, found {self.tok[1]!r}", self.line)

    def ident(self) -> str:
        kind, v, line = self.tok
        if kind != "ident":
            raise ParseError(f"expected identifier, found {v!r}", line)
        self.i += 1
        return v

    def symbol(self) -> str:
        kind, v, line = self.tok
        if kind not in ("ident", "int"):
            raise ParseError(f"expected symbol, found {v!r}", line)
        self.i += 1
        return v

    # -- statements
    def parse_program(self) -> SchematicDescription:
        while self.tok[0] != "eof":
            self.statement()
        return self.sd

    def statement(self) -> None:
        kind, v, line = self.tok
        if kind == "ident" and v in ("sort", "var", "fluent", "action"):
            getattr(self, f"decl_{v}")()
        else:
            self.sd.laws.append(self.law())
        self.expect(";")

    def decl_sort(self) -> None:
        self.expect("sort")
        name = self.ident()
        self.expect("=")
        self.sd.add_sort(name, self.domain_spec(allow_sort=False))

    def decl_var(self) -> None:
        self.expect("var")
        names = [self.ident()]
        while self.accept(","):
            names.append(self.ident())
        self.expect(":")
        sort = self.ident()
        if sort not in self.sd.sorts:
            raise ParseError(f"unknown sort {sort}", self.line)
        for n in names:
            if not n[0].isupper():
                raise ParseError(f"variable {n} must start with an upper-case letter", self.line)
            self.sd.variables[n] = sort

    def decl_fluent(self) -> None:
        self.expect("fluent")
        kind = self.ident()
        if kind not in KINDS or kind == "action":
            raise ParseError(f"fluent kind must be simple or sdetermined, not {kind}", self.line)
        name, params = self.signature_head()
        self.expect(":")
        self.sd.schemas.append(ConstantSchema(name, params, kind, self.domain_spec(allow_sort=True)))

    def decl_action(self) -> None:
        self.expect("action")
        name, params = self.signature_head()
        domain = BOOL
        if self.accept(":"):
            domain = self.domain_spec(allow_sort=True)
        self.sd.schemas.append(ConstantSchema(name, params, "action", domain))

    def signature_head(self):
        name = self.ident()
        params = []
        if self.accept("("):
            while True:
                arg = self.symbol()
                params.append(arg if arg in self.sd.sorts else ("=", arg))
                if not self.accept(","):
                    break
            self.expect(")")
        return name, tuple(params)

    def domain_spec(self, allow_sort: bool) -> tuple:
        line = self.line
        if self.accept("{"):
            values = [self.symbol()]
            while self.accept(","):
                values.append(self.symbol())
            self.expect("}")
            return tuple(values)
        kind, v, _ = self.tok
        if kind == "int":
            self.i += 1
            self.expect("..")
            hi = self.tok[1]
            if self.tok[0] != "int":
                raise ParseError("expected integer range bound", line)
            self.i += 1
            lo, hi = int(v), int(hi)
            if hi < lo:
                raise ParseError(f"empty range {lo}..{hi}", line)
            return tuple(str(k) for k in range(lo, hi + 1))
        if kind == "ident" and v == "bool":
            self.i += 1
            return BOOL
        if kind == "ident" and allow_sort and v in self.sd.sorts:
            self.i += 1
            return self.sd.sorts[v]
        raise ParseError(f"bad domain {v!r}", line)

    # -- laws
    def law(self) -> SchematicLaw:
        line = self.line
        if self.accept("caused"):
            head = self.head()
            if self.accept("iff"):
                cond = self.formula()
                return SchematicLaw("iff", head, cond, guard=self.where(), line=line)
            cond = self.formula() if self.accept("if") else S_TRUE
            if self.accept("after"):
                pre = self.formula()
                return SchematicLaw("caused_after", head, cond, pre, guard=self.where(), line=line)
            return SchematicLaw("caused", head, cond, guard=self.where(), line=line)
        if self.accept("default"):
            head = self.head()
            cond = self.formula() if self.accept("if") else S_TRUE
            return SchematicLaw("default", head, cond, guard=self.where(), line=line)
        if self.accept("inertial"):
            ref = self.term()
            if not isinstance(ref, Ref):
                raise ParseError("inertial expects a constant", line)
            return SchematicLaw("inertial", ref, guard=self.where(), line=line)
        alpha = self.formula()
        if not self.accept("causes"):
            raise ParseError(f"expected a causal law, found {self.tok[1]!r}", line)
        head = self.head()
        pre = self.formula() if self.accept("if") else S_TRUE
        return SchematicLaw("causes", head, alpha, pre, guard=self.where(), line=line)

    def where(self):
        return self.formula() if self.accept("where") else S_TRUE

    def head(self):
        line = self.line
        f = self.unary()
        if f == S_FALSE:
            return f
        if isinstance(f, SHolds):
            return f
        if isinstance(f, SNot) and isinstance(f.arg, SHolds):
            return SCmp("=", f.arg.ref, Ref("f"))
        if isinstance(f, SCmp) and f.op == "=" and isinstance(f.left, Ref):
            return f
        raise ParseError(f"law head must be an atom or false, not {f}", line)

    # -- formulas
    def formula(self):
        left = self.disjunction()
        if self.accept("->"):
            return SImplies(left, self.formula())
        return left

    def disjunction(self):
        parts = [self.conjunction()]
        while self.accept("|"):
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else SOr(tuple(parts))

    def conjunction(self):
        parts = [self.unary()]
        while self.accept("&") or self.accept(","):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else SAnd(tuple(parts))

    def unary(self):
        if self.accept("~"):
            return SNot(self.unary())
        return self.primary()

    def primary(self):
        line = self.line
        if self.accept("true"):
            return S_TRUE
        if self.accept("false"):
            return S_FALSE
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        for q in ("forall", "exists"):
            if self.accept(q):
                var = self.ident()
                self.expect("in")
                sort = self.ident()
                self.expect(":")
                return SQuant(q, var, sort, self.formula())
        left = self.term()
        kind, v, _ = self.tok
        if kind == "op" and v in CMP_OPS:
            self.i += 1
            return SCmp(v, left, self.term())
        if isinstance(left, Ref):
            return SHolds(left)
        raise ParseError(f"expected a formula near {v!r}", line)

    # -- terms
    def term(self):
        left = self.product()
        while True:
            if self.accept("+"):
                left = Arith("+", left, self.product())
            elif self.accept("-"):
                left = Arith("-", left, self.product())
            else:
                return left

    def product(self):
        left = self.atom_term()
        while self.accept("*"):
            left = Arith("*", left, self.atom_term())
        return left

    def atom_term(self):
        kind, v, line = self.tok
        if kind == "int":
            self.i += 1
            return Num(int(v))
        if self.accept("#count"):
            self.expect("{")
            var = self.ident()
            self.expect("in")
            sort = self.ident()
            self.expect(":")
            body = self.formula()
            self.expect("}")
            return Count(var, sort, body)
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        if kind != "ident":
            raise ParseError(f"expected a term, found {v!r}", line)
        self.i += 1
        if v[0].isupper():
            return Var(v)
        args = []
        if self.accept("("):
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
        return Ref(v, tuple(args))


def parse_description(text: str, sd: SchematicDescription | None = None) -> SchematicDescription:
    return Parser(text, sd).parse_program()


def parse_formula(text: str, sd: SchematicDescription | None = None):
    p = Parser(text, sd)
    f = p.formula()
    if p.tok[0] != "eof":
        raise ParseError(f"trailing input {p.tok[1]!r}", p.line)
    return f


def format_ground(d) -> str:
    """Serialize a ground description; parsing and grounding the text gives `d` back."""
    lines = []
    for c in d.constants:
        dom = "{" + ", ".join(c.domain) + "}"
        if c.kind == "action":
            lines.append(f"action {c.name};")
        else:
            lines.append(f"fluent {c.kind} {c.name} : {dom};")
    lines += [str(law) for law in d.statics]
    lines += [str(law) for law in d.dynamics]
    return "\n".join(lines) + "\n"
