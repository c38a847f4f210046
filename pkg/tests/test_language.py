import pytest

from dynspec import kernel as K
from dynspec.engine import Engine, brute_force_states
from dynspec.grounder import Grounder, GroundingError, check_definite, ground
from dynspec.language import format_ground, parse_description, parse_formula
from dynspec.schematic import ParseError

TEXT = """
sort agent = {a, b};
sort pos = 0..2;
var X, Y : agent;
var N : pos;
fluent simple holder(agent) : bool;
fluent simple count : pos;
fluent sdetermined pow(agent) : bool;
action grab(agent);
% pow holds when nobody holds the floor
caused pow(X) iff (forall Y in agent: ~holder(Y));
grab(X) causes holder(X);
grab(X) causes count = N + 1 if count = N where N < 2;
caused false if holder(X) & holder(Y) where X != Y;
inertial holder(X);
inertial count;  // trailing comment
"""


@pytest.fixture(scope="module")
def toy():
    sd = parse_description(TEXT)
    return sd, ground(sd)


def test_grounding_sizes(toy):
    _, d = toy
    assert len(d.constants) == 7
    assert {c.name for c in d.constants if c.kind == K.ACTION} == {"grab(a)", "grab(b)"}
    # guard N < 2 drops the count=3 instances
    heads = {str(law.head) for law in d.dynamics}
    assert "count=2" in heads and "count=3" not in heads


def test_iff_macro_gives_default_false(toy):
    _, d = toy
    texts = [str(law) for law in d.statics]
    assert "caused pow(a)=f if pow(a)=f;" in texts
    assert "caused pow(a)=t if holder(a)=f & holder(b)=f;" in texts


def test_states_match_brute_force(toy):
    _, d = toy
    got = Engine(d).enumerate_states()
    assert list(got) == brute_force_states(d)
    assert len(got) == 9  # three holder patterns times three counts


def test_check_definite(toy):
    _, d = toy
    assert check_definite(d) == []
    assert check_definite([]) != []


@pytest.mark.parametrize("text, expected", [
    ("#count{X in agent: holder(X)} >= 1", {"holder(a)": "t", "holder(b)": "f"}),
    ("exists X in agent: holder(X)", {"holder(a)": "f", "holder(b)": "t"}),
    ("exists N in pos: count = N & N + 1 = 2", {"count": "1"}),
])
def test_ground_formula_true(toy, text, expected):
    sd, _ = toy
    f = Grounder(sd).ground_formula(text)
    assert K.satisfies({"holder(a)": "f", "holder(b)": "f", "count": "0", **expected}, f)
    assert not K.satisfies({"holder(a)": "f", "holder(b)": "f", "count": "0"}, f)


@pytest.mark.parametrize("text", [
    "fluent weird x : bool;",
    "sort s = 3..1;",
    "var x : agent;",
    "holder(X) & ;",
    "grab(X) holder(X);",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_description("sort agent = {a, b};\n" + text)


def test_undeclared_variable_is_a_grounding_error():
    sd = parse_description("sort agent = {a, b};\nfluent simple h(agent) : bool;\ncaused h(Z);")
    with pytest.raises(GroundingError):
        ground(sd)


def test_round_trip_is_atom_identical(toy):
    _, d = toy
    again = ground(parse_description(format_ground(d)))
    assert again.constants == d.constants
    assert {str(x) for x in again.statics} == {str(x) for x in d.statics}
    assert {str(x) for x in again.dynamics} == {str(x) for x in d.dynamics}


def test_parse_formula_rejects_trailing_input():
    with pytest.raises(ParseError):
        parse_formula("a = b c")


def test_arithmetic_on_fluents_is_rejected(toy):
    sd, _ = toy
    with pytest.raises(GroundingError, match="not an integer"):
        Grounder(sd).ground_formula("count + 1 = 2")
