import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynspec import kernel as K
from dynspec.engine import (
    AmbiguityError,
    BudgetExceeded,
    Engine,
    NarrativeStep,
    PreconditionError,
    ReplayFailure,
    brute_force_states,
    brute_force_successors,
)
from dynspec.kernel import Atom, DynamicLaw, StaticLaw
from dynspec.testing import random_description

H = K.ConstantDecl("h", K.SIMPLE, K.BOOL)
G = K.ConstantDecl("g", K.SIMPLE, K.BOOL)
FLIP = K.ConstantDecl("flip", K.ACTION, K.BOOL)
SET = K.ConstantDecl("set", K.ACTION, K.BOOL)


def inertial(name):
    return tuple(DynamicLaw(Atom(name, u), Atom(name, u), Atom(name, u)) for u in K.BOOL)


def coin():
    """`flip` frees h; `set` makes h true, but only while g holds."""
    dyn = inertial("g") + (
        DynamicLaw(Atom("h", "t"), Atom("h", "t"), Atom("flip", "t")),
        DynamicLaw(Atom("h", "f"), Atom("h", "f"), Atom("flip", "t")),
        DynamicLaw(Atom("h", "t"), K.TOP, Atom("set", "t")),
        DynamicLaw(Atom("h", "f"), Atom("h", "f"), K.And((Atom("flip", "f"), Atom("set", "f")))),
        DynamicLaw(Atom("h", "t"), Atom("h", "t"), K.And((Atom("flip", "f"), Atom("set", "f")))),
        DynamicLaw(K.BOTTOM, K.TOP, K.And((Atom("set", "t"), Atom("g", "f")))),
    )
    return K.ActionDescription((H, G, FLIP, SET), (), dyn)


S0 = K.Interpretation({"h": "f", "g": "t"})


@pytest.mark.parametrize("seed", range(50))
@pytest.mark.parametrize("bound", [1, None])
def test_random_descriptions_match_brute_force(seed, bound):
    d = random_description(random.Random(seed))
    eng = Engine(d, concurrency_bound=bound, exempt=())
    states = eng.enumerate_states()
    assert list(states) == brute_force_states(d)
    for s in states:
        assert list(eng.successors(s)) == brute_force_successors(d, s, concurrency_bound=bound,
                                                                 exempt=())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_enumerated_states_are_fixpoints(seed):
    d = random_description(random.Random(seed))
    for s in Engine(d).enumerate_states():
        assert K.is_state(d, s)


def test_successors_respect_bound_and_labels():
    d = coin()
    eng = Engine(d, concurrency_bound=1, exempt=())
    labels = {tuple(t.label.true_atoms()) for t in eng.successors(S0)}
    assert ("flip", "set") not in labels
    only_set = eng.successors(S0, Atom("set", "t"))
    assert [t.target["h"] for t in only_set] == ["t"]


def test_constraint_restricts_states():
    d = coin()
    assert len(Engine(d).enumerate_states(Atom("g", "t"))) == 2
    assert len(Engine(d).enumerate_states(limit=1)) == 1


def test_budget_exceeded_is_raised_and_picklable():
    import pickle
    d = coin()
    with pytest.raises(BudgetExceeded) as info:
        Engine(d, budget=1).enumerate_states()
    again = pickle.loads(pickle.dumps(info.value))
    assert again.nodes == info.value.nodes


def test_check_all_states_reports_counterexamples():
    d = coin()
    eng = Engine(d)
    ok = eng.check_all_states(Atom("g", "t"), K.TOP)
    assert ok.holds and ok.witnesses
    bad = eng.check_all_states(Atom("g", "t"), K.BOTTOM)
    assert not bad.holds and len(bad.counterexamples) == 2
    assert bad.to_dict()["verdict"] == "fails"


def test_check_all_transitions():
    eng = Engine(coin(), exempt=())
    assert eng.check_all_transitions(K.TOP, Atom("set", "t"), Atom("h", "t")).holds
    rep = eng.check_all_transitions(K.TOP, Atom("flip", "t"), Atom("h", "t"))
    assert not rep.holds
    assert all(c.target["h"] == "f" for c in rep.counterexamples)


def test_replay_ambiguity_policies():
    eng = Engine(coin(), exempt=())
    story = [NarrativeStep(0, ("flip",))]
    with pytest.raises(AmbiguityError) as info:
        eng.replay(S0, story)
    assert info.value.details["differences"] == {"h": ["f", "t"]}
    first = eng.replay(S0, story, "first-canonical")
    assert first.final["h"] == "f" and first.steps[0].branches == 2
    picks = {eng.replay(S0, story, "seeded-random", seed=k).final["h"] for k in range(20)}
    assert picks == {"f", "t"}
    same = [eng.replay(S0, story, "seeded-random", seed=7).final for _ in range(3)]
    assert same[0] == same[1] == same[2]


def test_replay_observation_resolves_choice():
    eng = Engine(coin(), exempt=())
    result = eng.replay(S0, [NarrativeStep(0, ("flip",), (Atom("h", "t"),))])
    assert result.final["h"] == "t"


def test_replay_failure_names_the_step():
    eng = Engine(coin(), exempt=())
    s = K.Interpretation({"h": "f", "g": "f"})
    with pytest.raises(ReplayFailure) as info:
        eng.replay(s, [NarrativeStep(3, ("set",))])
    assert info.value.time == 3 and "not executable" in info.value.reason


def test_replay_rejects_concurrency_violation_and_bad_state():
    eng = Engine(coin(), exempt=())
    with pytest.raises(ReplayFailure, match="concurrency"):
        eng.replay(S0, [NarrativeStep(0, ("flip", "set"))])
    with pytest.raises((PreconditionError, K.SignatureError)):
        eng.replay({"h": "f"}, [NarrativeStep(0, ("flip",))])


def test_replay_unknown_policy():
    with pytest.raises(ValueError):
        Engine(coin()).replay(S0, [], "whatever")


def test_static_bottom_filters_states():
    d = K.ActionDescription((H, G), (StaticLaw(K.BOTTOM, Atom("h", "t")),),
                            inertial("h") + inertial("g"))
    assert all(s["h"] == "f" for s in Engine(d).enumerate_states())
