import pytest

from sackstree import FinitePoset, Schedule, ShadowFunction, SplittingSystem, TreeSystem, spl
from sackstree import fixtures as fx


def test_round_trips():
    P = FinitePoset(["a", "b", "c"], [("a", "c"), ("b", "c")])
    assert fx.poset_from_json(fx.poset_to_json(P)) == P
    S = Schedule.round_robin(P, rounds=2)
    assert fx.schedule_from_json(fx.schedule_to_json(S)) == S
    X = spl(TreeSystem.full_cube(P.full, 2), "c", 1)
    assert fx.condition_from_json(fx.condition_to_json(X)) == X
    sys_ = SplittingSystem.canonical(X, S, 2)
    assert fx.system_from_json(fx.system_to_json(sys_)) == sys_
    F = ShadowFunction.xor(P.full, 2, "a", "b")
    G = fx.function_from_json(fx.function_to_json(F))
    assert G.table == F.table and G.out_depth == F.out_depth


@pytest.mark.parametrize("obj", [
    {"elements": ["a", "a"]},
    {"elements": ["a", "b"], "lt": [["a", "b"], ["b", "a"]]},
    {"lt": []},
])
def test_bad_posets(obj):
    with pytest.raises(fx.FixtureError):
        fx.poset_from_json(obj)


def test_bad_conditions():
    P = FinitePoset.chain(2)
    with pytest.raises(fx.FixtureError):
        fx.condition_from_json({"support": ["p0", "p1"], "depth": 1, "points": ["p0:0"]}, P)
    with pytest.raises(fx.FixtureError):
        fx.condition_from_json({"support": ["p1"], "depth": 1, "points": []}, P)
    with pytest.raises(fx.FixtureError):
        fx.condition_from_json({"support": ["p0"], "depth": 1, "points": "p0:0"}, P)
    with pytest.raises(fx.FixtureError):
        fx.condition_from_json({"support": ["p0"], "depth": 1, "points": []})


def test_missing_file(tmp_path):
    with pytest.raises(fx.FixtureError):
        fx.load_json(tmp_path / "nope.json")
