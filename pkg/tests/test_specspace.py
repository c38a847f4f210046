import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynspec.specspace import (
    DEFAULT_INCONSISTENT,
    DEFAULT_UTILITIES,
    CatalogError,
    DoF,
    LevelCatalog,
    LevelError,
    SpecSpace,
    build_tables,
)

SPACE = SpecSpace()
LEVEL0 = SPACE.enumerate_points(0)
LEVEL1 = SPACE.enumerate_points(1)


def test_level_sizes_and_pinned_ids():
    assert len(LEVEL0) == 24 and len(LEVEL1) == 3
    assert SPACE.point("sp1").values == ("fcfs", "9", "any_type")
    assert SPACE.point("sp3").values == ("random", "3", "any_type")
    assert SPACE.point("sp26").values == ("simple",)
    assert len({p.id for p in LEVEL0 + LEVEL1}) == 27


def test_rmt_any_type_points_are_inconsistent():
    tables = build_tables(SPACE, DEFAULT_UTILITIES, {0: 4, 1: 2}, {0: 5, 1: 5}, DEFAULT_INCONSISTENT)
    bad = sorted((p.id for p in LEVEL0 if not tables.properties[p.id]), key=lambda x: int(x[2:]))
    assert bad == ["sp14", "sp16", "sp18"]
    assert all(SPACE.point(pid).values[::2] == ("rmt", "any_type") for pid in bad)
    assert tables.eu("sp26") == 6 and tables.eu("sp5") == 5


@pytest.mark.parametrize("a, b, expected", [
    ("sp1", "sp1", 0),
    ("sp9", "sp3", 2),
    ("sp1", "sp3", 4),  # bc differs by one rank (weight 2), per_assign by two
    ("sp26", "sp27", 2),
    ("sp26", "sp25", 1),
])
def test_distance_examples(a, b, expected):
    assert SPACE.distance(a, b) == expected


def test_fcfs3_to_random3_is_two():
    p = SPACE.find(0, ("fcfs", "3", "any_type"))
    q = SPACE.find(0, ("random", "3", "any_type"))
    assert SPACE.distance(p, q) == 2


def test_errors():
    with pytest.raises(LevelError):
        SPACE.distance("sp1", "sp26")
    with pytest.raises(LevelError):
        SPACE.enumerate_points(7)
    with pytest.raises(CatalogError):
        SPACE.point("sp999")
    with pytest.raises(CatalogError):
        DoF("x", ("a",))
    with pytest.raises(CatalogError):
        LevelCatalog((DoF("x", ("a", "b")),), (0,))
    with pytest.raises(CatalogError):
        SpecSpace(pinned={"sp1": (0, ("nope", "9", "any_type"))})


points0 = st.sampled_from(LEVEL0)
points1 = st.sampled_from(LEVEL1)


@pytest.mark.parametrize("pts", [points0, points1], ids=["level0", "level1"])
def test_metric_axioms(pts):
    @settings(max_examples=1000, deadline=None)
    @given(pts, pts, pts)
    def check(p, q, r):
        d = SPACE.distance
        assert d(p, q) >= 0
        assert d(p, q) == d(q, p)
        assert (d(p, q) == 0) == (p == q)
        assert d(p, r) <= d(p, q) + d(q, r)
        assert d(p, p) == 0
        assert d(p, q) <= SPACE.max_distance(p.level)
    check()
