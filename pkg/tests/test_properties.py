import pytest

from dynspec.config import ConfigError, bundled, minimal_config
from dynspec.properties import (
    PropertySpec,
    check_properties,
    check_property,
    expand_bindings,
    load_properties,
    properties_from_list,
)
from dynspec.protocol import Protocol

BUNDLED = load_properties(bundled("properties.json"))
INVARIANTS = load_properties(bundled("invariants.json"))
SANCTION_LINE = "assign_floor(C, S) causes sanctioned(C) if role_of(C, 0) = chair & ~perAssign(C, S);"


@pytest.mark.parametrize("spec", BUNDLED, ids=lambda s: s.name)
def test_bundled_properties_hold(minimal, spec):
    result = check_property(minimal, spec)
    assert result.holds, result.to_dict()["failing"]
    assert not result.counterexamples
    # phi or pre is satisfiable for some binding, so the check is not vacuous
    assert result.witnesses > 0


@pytest.mark.parametrize("spec", INVARIANTS, ids=lambda s: s.name)
def test_invariants_hold(minimal, spec):
    assert check_property(minimal, spec).holds


def test_false_consequent_fails(minimal):
    spec = PropertySpec("bottom", "states", {"phi": "holder(S)", "psi": "false"},
                        ({"S": ["sub1"]},))
    result = check_property(minimal, spec)
    assert not result.holds
    assert all(state["holder(sub1)"] == "t" for _, state in result.counterexamples)


def test_unsatisfiable_antecedent_holds_vacuously(minimal):
    spec = PropertySpec("vacuous", "states", {"phi": "false", "psi": "false"})
    result = check_property(minimal, spec)
    assert result.holds and result.witnesses == 0


def test_removing_sanction_rule_breaks_assign_property():
    mutant = Protocol(minimal_config())
    assert SANCTION_LINE in mutant.text
    mutant.__dict__["text"] = mutant.text.replace(SANCTION_LINE, "")
    p2 = next(s for s in BUNDLED if s.name == "p2-assign-sanction")
    result = check_property(mutant, p2)
    assert not result.holds
    binding, t = result.counterexamples[0]
    assert t.source[f"perAssign({binding['C']},{binding['S']})"] == "f"
    assert t.target[f"sanctioned({binding['C']})"] == "f"


def test_expand_bindings_skips_equal_distinct_pairs():
    spec = PropertySpec("x", "states", {"phi": "true", "psi": "true"},
                        ({"A": ["a", "b"], "B": ["a", "b"]},), (("A", "B"),))
    assert expand_bindings(spec, {}) == [{"A": "a", "B": "b"}, {"A": "b", "B": "a"}]
    with pytest.raises(ConfigError):
        expand_bindings(PropertySpec("y", "states", {"phi": "true", "psi": "true"},
                                     ({"A": "nosort"},)), {})


@pytest.mark.parametrize("doc", [
    {"not": "a list"},
    [{"name": "q", "kind": "states", "phi": "true"}],
    [{"name": "q", "kind": "paths", "phi": "true", "psi": "true"}],
    [{"kind": "transitions"}],
])
def test_malformed_property_files(doc):
    with pytest.raises(ConfigError):
        properties_from_list(doc)


def test_worker_pool_keeps_file_order():
    specs = BUNDLED[:3]
    results = check_properties(minimal_config(), specs, workers=2)
    assert [r.spec.name for r in results] == [s.name for s in specs]
    assert all(r.holds for r in results)
