import pytest

from dynspec.config import ConfigError, config_from_dict, default_config
from dynspec.protocol import (
    BuildError,
    STANDING_RULES,
    description_text,
    initial_simple_values,
    power_fluent,
    split_ground,
)

SUBJECTS = [f"sub{i}" for i in range(1, 7)]


def complete(protocol, **changes):
    values = initial_simple_values(protocol.cfg)
    values.update({k.replace(" ", ""): v for k, v in changes.items()})
    state = protocol.engine.complete_state(values)
    assert state is not None, "expected a unique completion"
    return state


def voting(protocol, m, nsp, tally, standing_point="sp27", sanctioned=()):
    low = m - 1
    changes = {f"protocol({m})": "executing", "actual_sp(1)": standing_point,
               f"seconded({nsp},{low})": "t", f"objected({nsp},{low})": "t"}
    for agent, vote in zip(SUBJECTS, tally):
        changes[f"voted({agent},{m})"] = vote
    for agent in sanctioned:
        changes[f"sanctioned({agent})"] = "t"
    return complete(protocol, **changes)


@pytest.mark.parametrize("name, expected", [
    ("vote(sub1,for,2)", ("vote", ("sub1", "for", "2"))),
    ("holder(sub3)", ("holder", ("sub3",))),
    ("environment", ("environment", ())),
])
def test_split_ground(name, expected):
    assert split_ground(name) == expected


@pytest.mark.parametrize("action, fluent", [
    ("vote(sub1,for,2)", "powVote(sub1,2)"),
    ("propose(sub3,sp26,1)", "powPropose(sub3,sp26,1)"),
    ("declare(c,sp3,carried,1)", "powDeclare(c,sp3,carried,1)"),
    ("set_threshold(0,d,3)", None),
])
def test_power_fluent(action, fluent):
    assert power_fluent(action) == fluent


def test_reserved_agent_names_are_rejected():
    with pytest.raises(BuildError):
        description_text(config_from_dict({"agents": {"c": "chair", "fcs": "fcs", "none": "subject",
                                                       "sub2": "subject"}}))


def test_config_validation():
    with pytest.raises(ConfigError, match="exactly one chair"):
        config_from_dict({"agents": {"fcs": "fcs", "s1": "subject", "s2": "subject"}})
    with pytest.raises(ConfigError, match="unknown configuration keys"):
        config_from_dict({"agents": {}, "colour": "blue"})
    with pytest.raises(ConfigError, match="fails the properties"):
        config_from_dict({"agents": {"c": "chair", "fcs": "fcs", "s1": "subject", "s2": "subject"},
                          "initial_points": {"0": "sp14", "1": "sp27"}})


def test_initial_state(full_scale):
    s = full_scale.initial_state
    assert s["actual_sp(0)"] == "sp9" and s["actual_sp(1)"] == "sp27"
    assert s["best_candidate"] == "none"
    assert s["powRequest(sub1,c)"] == "t" and s["powRequest(c,c)"] == "f"
    assert all(s[f"role_of({a},1)"] == "none" for a in SUBJECTS)


# (rule, for, against, carried)
VOTE_CASES = [
    ("three_quarters", 5, 1, True),
    ("simple", 3, 2, True),
    ("three_quarters", 3, 2, False),
]


@pytest.mark.parametrize("rule, n_for, n_against, carried", VOTE_CASES)
def test_declare_power_follows_standing_rule(full_scale, rule, n_for, n_against, carried):
    tally = ["for"] * n_for + ["against"] * n_against
    absent = SUBJECTS[len(tally):]  # sanctioned subjects are not voters
    if n_for + n_against == 6:
        # level 2 uses the fixed top-level rule
        assert full_scale.cfg.top_standing == rule
        s = voting(full_scale, 2, "sp26", tally)
        m, nsp = 2, "sp26"
    else:
        point = {"simple": "sp26", "three_quarters": "sp27"}[rule]
        s = voting(full_scale, 1, "sp3", tally, standing_point=point, sanctioned=absent)
        m, nsp = 1, "sp3"
    assert s[f"votes_for({m})"] == str(n_for)
    assert s[f"majority({m})"] == ("t" if carried else "f")
    assert s[f"powDeclare(c,{nsp},carried,{m})"] == ("t" if carried else "f")
    assert s[f"powDeclare(c,{nsp},not_carried,{m})"] == ("f" if carried else "t")


@pytest.mark.parametrize("rule, n_for, n_against", [
    ("simple", 1, 1), ("two_thirds", 2, 1), ("two_thirds", 1, 1), ("three_quarters", 0, 0)])
def test_standing_rule_arithmetic(rule, n_for, n_against):
    num, den, strict = STANDING_RULES[rule]
    total = n_for + n_against
    expected = den * n_for > num * total if strict else (den * n_for >= num * total and total > 0)
    assert expected == {("simple", 1, 1): False, ("two_thirds", 2, 1): True,
                        ("two_thirds", 1, 1): False, ("three_quarters", 0, 0): False}[
        (rule, n_for, n_against)]


def test_declare_needs_every_voter(full_scale):
    s = voting(full_scale, 2, "sp26", ["for"] * 5 + ["none"])
    assert s["powDeclare(c,sp26,carried,2)"] == "f"
    assert s["powDeclare(c,sp26,not_carried,2)"] == "f"


def test_sanctioned_subject_is_not_a_voter(full_scale):
    s = voting(full_scale, 1, "sp3", ["none"] * 6, sanctioned=["sub5"])
    assert s["role_of(sub5,1)"] == "none" and s["role_of(sub4,1)"] == "voter"
    assert s["powVote(sub5,1)"] == "f" and s["powVote(sub4,1)"] == "t"


@pytest.mark.parametrize("point, app_b_permitted", [("sp1", "t"), ("sp2", "f")])
def test_manipulation_permission_tracks_per_mpt(full_scale, point, app_b_permitted):
    s = complete(full_scale, **{"actual_sp(0)": point, "holder(sub1)": "t",
                                 "requested(sub1)": "app_A", "req_pos(sub1)": "0"})
    assert s["powRequestMpt(sub1,fcs,app_B)"] == "t"
    assert s["perRequestMpt(sub1,fcs,app_A)"] == "t"
    assert s["perRequestMpt(sub1,fcs,app_B)"] == app_b_permitted


def test_proposer_cannot_second_own_proposal(full_scale):
    s = complete(full_scale, **{"proposal(sub3,sp26,1)": "t"})
    assert s["powSecond(sub3,sp26,1)"] == "f"
    assert s["powSecond(sub1,sp26,1)"] == "t"
    assert s["powObject(sub1,sp26,1)"] == "t"
    assert s["powSecond(c,sp26,1)"] == "f"


def test_inconsistent_points_are_never_proposable(full_scale):
    s = full_scale.initial_state
    for pid in ("sp14", "sp16", "sp18"):
        assert s[f"properties({pid},0)"] == "f"
        assert all(s[f"powPropose({a},{pid},0)"] == "f" for a in SUBJECTS)
    assert s["powPropose(sub1,sp3,0)"] == "t"


def test_description_is_deterministic():
    assert description_text(default_config()) == description_text(default_config())
