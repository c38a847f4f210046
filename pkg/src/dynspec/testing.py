"""Random tiny action descriptions for checking the engine against brute force."""

from __future__ import annotations

import random

from . import kernel as K


def _formula(rng: random.Random, names: list, depth: int) -> K.Formula:
    if depth == 0 or rng.random() < 0.35:
        r = rng.random()
        if r < 0.05:
            return K.TOP
        return K.Atom(rng.choice(names), rng.choice(K.BOOL))
    op = rng.choice(("not", "and", "or", "implies"))
    if op == "not":
        return K.Not(_formula(rng, names, depth - 1))
    if op == "implies":
        return K.Implies(_formula(rng, names, depth - 1), _formula(rng, names, depth - 1))
    parts = tuple(_formula(rng, names, depth - 1) for _ in range(rng.randint(2, 3)))
    return K.And(parts) if op == "and" else K.Or(parts)


def random_description(rng: random.Random, max_fluents: int = 6, max_actions: int = 3,
                       max_laws: int = 12) -> K.ActionDescription:
    """Boolean fluents (simple or statically determined), Boolean actions, mixed laws."""
    n = rng.randint(1, max_fluents)
    m = rng.randint(1, max_actions)
    fluents = [K.ConstantDecl(f"f{i}", rng.choice((K.SIMPLE, K.SIMPLE, K.SDETERMINED)), K.BOOL)
               for i in range(n)]
    actions = [K.ConstantDecl(f"a{i}", K.ACTION, K.BOOL) for i in range(m)]
    fnames = [c.name for c in fluents]
    anames = [c.name for c in actions]
    simple = [c.name for c in fluents if c.kind == K.SIMPLE]
    statics, dynamics = [], []
    for _ in range(rng.randint(1, max_laws)):
        if simple and rng.random() < 0.5:
            head = K.BOTTOM if rng.random() < 0.1 else K.Atom(rng.choice(simple), rng.choice(K.BOOL))
            cond = _formula(rng, fnames, 1) if rng.random() < 0.4 else K.TOP
            pre = _formula(rng, fnames + anames, 2)
            dynamics.append(K.DynamicLaw(head, cond, pre))
        else:
            head = K.BOTTOM if rng.random() < 0.1 else K.Atom(rng.choice(fnames), rng.choice(K.BOOL))
            statics.append(K.StaticLaw(head, _formula(rng, fnames, 2)))
    # inertia on some simple fluents keeps the state space from collapsing
    for name in simple:
        if rng.random() < 0.6:
            dynamics += [K.DynamicLaw(K.Atom(name, u), K.Atom(name, u), K.Atom(name, u))
                         for u in K.BOOL]
    return K.ActionDescription(tuple(fluents + actions), tuple(statics), tuple(dynamics))
