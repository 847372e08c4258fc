import json

import numpy as np
import pytest

from bellchains import claims
from bellchains.chsh import PRESETS, TRIPLET_CAL, all_heterosexual_pairs, gluing_index
from bellchains.optimize import (
    Objective,
    ObjectiveKind,
    ProductFamily,
    SpaceKind,
    StrategySpace,
    ascent_unrestricted,
    check_partition,
    classical_bound,
    classical_minimum,
    max_biphoton_family,
    max_unrestricted,
    min_all_pairs,
    optimize,
    pattern_search,
    result_json,
)
from helpers import ab_pair

S2 = 1 / np.sqrt(2)
AB3, NB3 = all_heterosexual_pairs(claims.THREE)
PAIRS4 = all_heterosexual_pairs(claims.FOUR)


def test_objective_validation():
    with pytest.raises(ValueError):
        Objective(ObjectiveKind.SINGLE_PAIR_XI, (AB3, NB3))
    with pytest.raises(ValueError):
        Objective.sum_index([])
    with pytest.raises(ValueError):
        Objective(ObjectiveKind.DIFFERENTIATION, (AB3,))
    with pytest.raises(ValueError):
        Objective.min_max_index([AB3]).operator(3)


def test_from_xis_definitions():
    assert Objective.sum_index([AB3, NB3]).from_xis([S2, 0]) == pytest.approx(gluing_index(S2) + 0.5)
    assert Objective.differentiation(AB3, [NB3]).from_xis([S2, 0]) == pytest.approx(S2 / 2)
    assert Objective.min_max_index([AB3, NB3]).from_xis([-0.5, 0.2]) == pytest.approx(0.6)


@pytest.mark.parametrize("preset", list(PRESETS.values()), ids=lambda p: p.name)
def test_tsirelson_reproduction(preset):
    res = max_unrestricted(Objective.single_pair_xi(ab_pair()), 2, preset)
    assert res.value == pytest.approx(S2, abs=1e-10)
    assert res.residual < 1e-10


def test_single_pair_sum_is_affine_tsirelson():
    assert max_unrestricted(Objective.sum_index([ab_pair()]), 2).value == pytest.approx((1 + S2) / 2, abs=1e-12)


@pytest.mark.parametrize(
    "objective,n",
    [
        (Objective.single_pair_xi(AB3), 3),
        (Objective.sum_index([AB3, NB3]), 3),
        (Objective.differentiation(AB3, [NB3]), 3),
        (Objective.sum_index(PAIRS4), 4),
        (Objective.differentiation(PAIRS4[0], PAIRS4[1:]), 4),
    ],
    ids=["single", "sum3", "diff3", "sum4", "diff4"],
)
def test_eigen_and_ascent_agree(objective, n):
    eig = max_unrestricted(objective, n)
    asc = ascent_unrestricted(objective, n, seed=1)
    assert abs(eig.value - asc.value) <= 1e-6
    assert objective.evaluate(eig.argmax) == pytest.approx(eig.value, abs=1e-9)
    assert objective.evaluate(asc.argmax) == pytest.approx(asc.value, abs=1e-9)


def test_unrestricted_values():
    assert max_unrestricted(Objective.sum_index([AB3, NB3]), 3).value == pytest.approx(1.5, abs=1e-10)
    assert max_unrestricted(Objective.sum_index(PAIRS4), 4).value == pytest.approx(3.0, abs=1e-10)
    assert max_unrestricted(Objective.differentiation(AB3, [NB3]), 3).value == pytest.approx(0.5, abs=1e-10)


def test_check_partition():
    assert check_partition([(2, 0), (1,)], 3) == ((0, 2), (1,))
    for bad in ([(0, 1)], [(0, 1, 2)], [(0, 1), (1, 2)]):
        with pytest.raises(ValueError):
            check_partition(bad, 3)


def test_product_family_states_are_normalized_products():
    fam = ProductFamily([(0, 2), (1,)], 3)
    rng = np.random.default_rng(0)
    states = fam.states(fam.random_params(rng, 7))
    np.testing.assert_allclose(np.linalg.norm(states, axis=1), 1, atol=1e-12)
    for vec in states:
        t = vec.reshape(2, 2, 2).transpose(0, 2, 1).reshape(4, 2)  # (Alice Bob) x Natalia
        assert np.linalg.matrix_rank(t, tol=1e-10) == 1
    bell = ProductFamily([(0, 1)], 2, maximally_entangled=True).states(np.array([[0.3, 1.1, -0.4]]))[0]
    np.testing.assert_allclose(np.linalg.svd(bell.reshape(2, 2), compute_uv=False), [S2, S2], atol=1e-12)


def test_pattern_search_finds_quadratic_peak():
    def fun(x):
        return -np.sum((x - [0.3, -0.2]) ** 2, axis=1)

    x, fx = pattern_search(fun, np.array([[1.0, 1.0], [-1.0, 0.5]]), min_step=1e-6)
    np.testing.assert_allclose(x, [[0.3, -0.2]] * 2, atol=1e-5)


def test_biphoton_split_pair_limited_to_product_correlations():
    # Alice and Bob in different blocks share only a product state: xi peaks at 1/(2 sqrt 2), not 0
    res = max_biphoton_family(Objective.single_pair_xi(AB3), [(0, 1), (2,)], 3, restarts=8)
    assert res.value == pytest.approx(S2 / 2, abs=1e-8)
    w = max_biphoton_family(Objective.single_pair_xi(AB3), [(0, 1), (2,)], 3, restarts=8, maximally_entangled=True)
    assert w.value == pytest.approx(0.0, abs=1e-8)  # Alice's marginal is I/2 inside a Bell block


def test_biphoton_four_party_bell_blocks(four_party_biphoton):
    res = four_party_biphoton["bell"]
    assert res.value == pytest.approx(2 + S2, abs=1e-9)
    assert four_party_biphoton["objective"].evaluate(res.argmax) == pytest.approx(res.value, abs=1e-9)


def test_biphoton_four_party_general_blocks(four_party_biphoton):
    # arbitrary pure blocks exceed the Bell-block value: 2 + 9/(8 sqrt 2)
    res = four_party_biphoton["general"]
    assert res.value == pytest.approx(2 + 9 / (8 * np.sqrt(2)), abs=1e-8)
    assert four_party_biphoton["objective"].evaluate(res.argmax) == pytest.approx(res.value, abs=1e-9)


def test_biphoton_three_party_differentiation():
    res = max_biphoton_family(Objective.differentiation(AB3, [NB3]), [(0, 2), (1,)], 3, restarts=16)
    assert res.value == pytest.approx((1 + S2) / 4, abs=1e-8)


def test_classical_examples():
    duo = claims.DUO
    res = classical_bound(Objective.single_pair_xi(all_heterosexual_pairs(duo)[0]), duo)
    assert res.value == 0.5 and res.restarts_used == 16
    # ties resolve to the lexicographically smallest assignment
    assert res.argmax == {"Alice": (-1, -1), "Bob": (-1, -1)}
    res4 = classical_bound(Objective.sum_index(PAIRS4), claims.FOUR)
    assert res4.value == 3.0 and res4.restarts_used == 256
    assert classical_bound(Objective.sum_index([AB3, NB3]), claims.THREE).value == 1.5
    assert classical_bound(Objective.differentiation(AB3, [NB3]), claims.THREE).value == 0.5


def test_feasible_set_nesting_single_pair():
    obj = Objective.single_pair_xi(AB3)
    c = classical_bound(obj, claims.THREE).value
    b = max_biphoton_family(obj, [(0, 2), (1,)], 3, restarts=8).value
    u = max_unrestricted(obj, 3).value
    assert c <= b <= u + 1e-9


def test_biphoton_below_unrestricted_for_sums(four_party_biphoton):
    assert four_party_biphoton["general"].value <= max_unrestricted(four_party_biphoton["objective"], 4).value + 1e-9


def test_minimal_states_have_index_half():
    for sid in ("S6.4A", "S6.3A"):
        s = claims.lookup_state(sid)
        obj = Objective.min_max_index(s.pairs)
        assert obj.evaluate(s.state) == pytest.approx(0.5, abs=1e-12)


def test_min_all_pairs_spaces():
    cl = min_all_pairs(StrategySpace.classical(), PAIRS4, participants=claims.FOUR)
    assert cl.value == 0.25
    un = min_all_pairs(StrategySpace.unrestricted(), [AB3, NB3], participants=claims.THREE)
    assert un.value == pytest.approx(0.25, abs=1e-7)
    assert un.extra["dual_lower_bound"] <= un.value + 1e-9
    assert un.value - un.extra["dual_lower_bound"] <= 1e-6
    assert Objective.min_max_index([AB3, NB3]).evaluate(un.argmax) == pytest.approx(un.value, abs=1e-9)


def test_classical_minimum_single_pair():
    assert classical_minimum(Objective.single_pair_xi(AB3), claims.THREE).value == -0.5


def test_optimize_dispatch_and_json():
    obj = Objective.sum_index([AB3, NB3])
    for space, expected in [(StrategySpace.unrestricted(), 1.5), (StrategySpace.classical(), 1.5)]:
        res = optimize(obj, space, claims.THREE)
        assert res.value == pytest.approx(expected, abs=1e-10)
    space = StrategySpace.biphoton([(0, 2), (1,)], maximally_entangled=True)
    assert space.kind is SpaceKind.BIPHOTON_PRODUCT and space.label == "biphoton[02|1]-bell"
    res = optimize(obj, space, claims.THREE, restarts=8)
    assert res.value == pytest.approx(1 + S2 / 2, abs=1e-8)
    doc = json.loads(result_json(obj, space, TRIPLET_CAL, res))
    assert set(doc) >= {"objective", "space", "preset", "value", "argmax", "restarts", "residual"}
    assert "|" in doc["argmax"]
