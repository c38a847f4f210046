import pytest

from dynspec import kernel as K
from dynspec.kernel import Atom, DynamicLaw, Interpretation, StaticLaw

P = K.ConstantDecl("p", K.SIMPLE, K.BOOL)
Q = K.ConstantDecl("q", K.SDETERMINED, K.BOOL)
C = K.ConstantDecl("c", K.SIMPLE, ("1", "2"))
ALPHA = K.ConstantDecl("alpha", K.ACTION, K.BOOL)


def inertial(name, domain=K.BOOL):
    return tuple(DynamicLaw(Atom(name, u), Atom(name, u), Atom(name, u)) for u in domain)


def test_decl_rejects_singleton_and_duplicates():
    with pytest.raises(K.SignatureError):
        K.ConstantDecl("x", K.SIMPLE, ("a",))
    with pytest.raises(K.SignatureError):
        K.ConstantDecl("x", K.SIMPLE, ("a", "a"))
    with pytest.raises(K.SignatureError):
        K.ConstantDecl("x", "weird", K.BOOL)


def test_description_needs_laws_and_unique_names():
    with pytest.raises(K.DefinitenessError, match="non-empty set of causal laws"):
        K.ActionDescription((P,))
    with pytest.raises(K.SignatureError):
        K.ActionDescription((P, P), (), inertial("p"))


def test_dynamic_head_must_be_simple():
    with pytest.raises(K.SignatureError):
        K.ActionDescription((P, Q), (), (DynamicLaw(Atom("q", "t")),))


@pytest.mark.parametrize("i, phi, expected", [
    ({"p": "t"}, Atom("p", "t"), True),
    ({"p": "f"}, K.TOP, True),
    ({"c": "2"}, K.Or((Atom("c", "1"), Atom("c", "2"))), True),
    ({"c": "2"}, K.Implies(Atom("c", "2"), Atom("c", "1")), False),
    ({"p": "t"}, K.Not(K.BOTTOM), True),
])
def test_satisfies(i, phi, expected):
    assert K.satisfies(i, phi) is expected


def test_satisfies_unknown_constant():
    with pytest.raises(K.SignatureError):
        K.satisfies({"p": "t"}, Atom("zz", "t"))


def test_t_static_examples():
    d = K.ActionDescription((P, Q), (StaticLaw(Atom("q", "t"), Atom("p", "t")),), inertial("p"))
    assert K.t_static(d, {"p": "t", "q": "f"}) == {Atom("q", "t")}
    assert K.t_static(d, {"p": "f", "q": "f"}) == set()
    d2 = K.ActionDescription((P, Q), (StaticLaw(K.BOTTOM, K.And((Atom("p", "t"), Atom("q", "t")))),))
    assert K.t_static(d2, {"p": "t", "q": "t"}) == {K.BOTTOM}


def test_effect_set_examples():
    d = K.ActionDescription((P, ALPHA), (), (DynamicLaw(Atom("p", "t"), K.TOP, Atom("alpha", "t")),))
    assert K.effect_set(d, {"p": "f"}, {"alpha": "t"}, {"p": "f"}) == {Atom("p", "t")}
    dc = K.ActionDescription((C, ALPHA), (), inertial("c", ("1", "2")))
    assert K.effect_set(dc, {"c": "1"}, {"alpha": "f"}, {"c": "1"}) == {Atom("c", "1")}
    g = K.ConstantDecl("g", K.SIMPLE, K.BOOL)
    dg = K.ActionDescription((P, g, ALPHA), (), (
        DynamicLaw(Atom("p", "t"), K.TOP, K.And((Atom("alpha", "t"), Atom("g", "t")))),))
    assert K.effect_set(dg, {"p": "f", "g": "f"}, {"alpha": "t"}, {"p": "t", "g": "f"}) == set()


@pytest.mark.parametrize("example", K.reference_examples(), ids=lambda e: e.name)
def test_reference_examples(example):
    assert example.verdict() is example.expected


def test_inertia_admits_both_values():
    d = K.ActionDescription((P,), (), inertial("p"))
    assert K.is_state(d, {"p": "t"}) and K.is_state(d, {"p": "f"})


def test_is_path():
    d = K.ActionDescription((P, ALPHA), (), inertial("p") + (
        DynamicLaw(Atom("p", "f"), K.TOP, Atom("alpha", "t")),))
    s0, s1 = Interpretation({"p": "t"}), Interpretation({"p": "f"})
    go, stay = Interpretation({"alpha": "t"}), Interpretation({"alpha": "f"})
    assert K.is_path(d, K.Path((s0,), ()))
    assert K.is_path(d, K.Path((s0, s1, s1), (go, stay)))
    assert not K.is_path(d, K.Path((s0, s1, s0), (go, stay)))


def test_bottom_law_filters_exactly_its_states():
    base = K.ActionDescription((P, C), (), inertial("p") + inertial("c", ("1", "2")))
    cut = K.ActionDescription(base.constants, (StaticLaw(K.BOTTOM, Atom("p", "t")),), base.dynamics)
    every = [Interpretation({"p": p, "c": c}) for p in K.BOOL for c in ("1", "2")]
    assert [s for s in every if K.is_state(cut, s)] == [
        s for s in every if K.is_state(base, s) and s["p"] != "t"]


def test_fixpoint_diff_names_uncaused_atom():
    d = K.ActionDescription((P, Q), (StaticLaw(Atom("q", "f"), Atom("p", "f")),), inertial("p"))
    diff = K.fixpoint_diff(d, {"p": "f", "q": "t"})
    assert "q=t" in diff["uncaused"] and "q=f" in diff["caused_but_absent"]


def test_interpretations_compare_by_atoms():
    a = Interpretation({"p": "t", "c": "1"})
    b = Interpretation([("c", "1"), ("p", "t")])
    assert a == b and hash(a) == hash(b)
    assert a.updated({"p": "f"})["p"] == "f"


def test_all_false_label():
    d = K.ActionDescription((P, ALPHA), (), inertial("p"))
    assert K.all_false_label(d, ["alpha"]) == Interpretation({"alpha": "t"})
    with pytest.raises(K.SignatureError):
        K.all_false_label(d, ["beta"])
