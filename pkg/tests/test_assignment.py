import random
from fractions import Fraction as F

import pytest

from icenvy.assignment import (
    DualCertificate,
    ShapeError,
    balance,
    check_duals,
    compare_bid_change,
    max_weight_value,
    min_gap,
    perturb,
    round_payments,
    solve_instance,
    solve_min_dual_mwpm,
    tight_edge_sets,
    verify_structure,
    weight_grid,
)
from icenvy.core import AdTypesInstance, DiscountCurve, PositionInstance
from icenvy.position import run_regular

from helpers import brute_force_max, random_adtypes

GOLDEN = [[10, 9, 8], [7, 6, 4], [4, 0, 0]]


def test_golden_certificate():
    cert = solve_min_dual_mwpm(GOLDEN)
    # bidder 3 -> slot 1, bidder 2 -> slot 2, bidder 1 -> slot 3 (0-based below)
    assert cert.matching == (2, 1, 0)
    assert cert.slot_prices == (2, 1, 0)
    assert cert.bidder_utilities == (8, 5, 2)
    assert cert.value == 18
    assert check_duals(cert)


def test_golden_tight_edges():
    cert = solve_min_dual_mwpm(GOLDEN)
    assert cert.tight_edges == {(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)}
    sets = tight_edge_sets(cert)
    assert sets[1] == {(1, 1), (0, 1), (0, 2)}
    assert sets[2] <= sets[1] <= sets[0]


def test_golden_structure():
    cert = solve_min_dual_mwpm(GOLDEN)
    assert verify_structure(cert).ok
    assert cert.tight_slots(1) == [0, 1]


def test_matched_slot_need_not_be_lowest_tight():
    # Unique optimum, no ties: bidder 2 sits in slot 0 yet is also tight with slot 1.
    W = [[985946604, 841597326, 434794718], [891047768, 511742081, 325679554], [957413342, 626401695, 384452587]]
    cert = solve_min_dual_mwpm(W)
    assert cert.matching == (1, 2, 0)
    assert cert.slot_prices == (565368214, 234356567, 0)
    assert cert.tight_slots(2) == [0, 1]
    rep = verify_structure(cert)
    assert rep.free_path and rep.monotone_prices and rep.clearing
    assert not rep.lowest_tight


def test_inflated_prices_fail_free_path():
    cert = solve_min_dual_mwpm(GOLDEN)
    p = (F(3), F(1), F(0))
    q = tuple(F(GOLDEN[i][cert.matching[i]]) - p[cert.matching[i]] for i in range(3))
    tight = frozenset((i, j) for i in range(3) for j in range(3) if q[i] + p[j] == GOLDEN[i][j])
    fake = DualCertificate(cert.matching, p, q, tight, cert.weights)
    rep = verify_structure(fake)
    assert check_duals(fake) and rep.clearing
    assert not rep.free_path


def test_trivial_instances():
    cert = solve_min_dual_mwpm([[7]])
    assert cert.matching == (0,) and cert.slot_prices == (0,) and cert.bidder_utilities == (7,)
    assert verify_structure(cert).ok


def test_position_special_case_matches_vcg(alpha3):
    inst = AdTypesInstance.truthful([10, 8, 5], [alpha3] * 3)
    cert = solve_min_dual_mwpm(inst.weights())
    assert cert.matching == (0, 1, 2)
    assert cert.slot_prices == (F(11, 2), F(3, 2), 0)
    vcg = run_regular(PositionInstance.truthful([10, 8, 5], alpha3), "vcg")
    assert tuple(cert.slot_prices[s] for s in vcg.assignment) == vcg.payments


def test_non_square_rejected():
    with pytest.raises(ShapeError):
        solve_min_dual_mwpm([[1, 2]])
    with pytest.raises(ShapeError):
        perturb([[1, 2]])


def test_balance_pads_and_trims():
    wide = AdTypesInstance([1, 1], [1, 1], [(4, 3, 2, 1), (4, 3, 2, 1)])
    assert balance(wide).m == 2
    tall = AdTypesInstance([1, 1, 1], [1, 1, 1], [(2, 1)] * 3)
    assert [c.weights for c in balance(tall).curves] == [(2, 1, 0)] * 3
    assert balance(AdTypesInstance([1], [1], [(1,)])).m == 1


def test_delta_examples():
    assert min_gap(GOLDEN) == 1
    assert weight_grid(GOLDEN) == 1
    assert weight_grid([[0, 0], [0, 0]]) == 1
    assert weight_grid([[F(1, 2), F(3, 4)]]) == F(1, 4)


def test_grid_never_exceeds_min_gap():
    rng = random.Random(1)
    for _ in range(200):
        w = [[F(rng.randint(0, 50), rng.choice([1, 2, 4, 10])) for _ in range(3)] for _ in range(3)]
        assert weight_grid(w) <= min_gap(w)


def test_perturb_makes_ties_distinct():
    pw, delta = perturb([[1, 1], [1, 1]])
    assert delta == 1
    assert len({x for row in pw for x in row}) == 4
    assert solve_min_dual_mwpm(pw).matching == (0, 1)


def test_perturbed_rows_stay_decreasing():
    pw, _ = perturb([[3, 3, 3], [1, 1, 0], [0, 0, 0]])
    assert all(a > b for row in pw for a, b in zip(row, row[1:]))


def test_round_payments():
    assert round_payments([F("2.0000001"), F("0.9999999")], 1) == [2, 1]
    assert round_payments([F(3), F(1, 2), F(3, 2)], 1) == [3, 0, 1]
    with pytest.raises(ValueError):
        round_payments([1], 0)


def test_perturbed_golden_rounds_back():
    sol = solve_instance(AdTypesInstance([1, 1, 1], [1, 1, 1], [(10, 9, 8), (7, 6, 4), (4, 0, 0)]))
    assert sol.delta == 1
    assert round_payments(sol.cert.slot_prices, sol.delta) == [2, 1, 0]


def test_solver_matches_brute_force_and_structure():
    rng = random.Random(2)
    for _ in range(150):
        n = rng.randint(1, 5)
        inst = random_adtypes(rng, n)
        sol = solve_instance(inst)
        assert max_weight_value(sol.weights) == brute_force_max(sol.weights)
        assert sol.cert.value == brute_force_max(sol.perturbed)
        assert check_duals(sol.cert)
        rep = verify_structure(sol.cert)
        assert rep.free_path and rep.monotone_prices and rep.clearing
        # the perturbed optimum is optimal on the original weights too
        assert sum(sol.weights[i][j] for i, j in enumerate(sol.cert.matching)) == brute_force_max(sol.weights)


def test_rounded_prices_are_minimal_duals_of_original():
    rng = random.Random(3)
    for _ in range(100):
        inst = random_adtypes(rng, rng.randint(1, 5))
        sol = solve_instance(inst)
        exact = solve_min_dual_mwpm(sol.weights)
        assert round_payments(sol.cert.slot_prices, sol.delta) == list(exact.slot_prices)


def test_max_weight_value_rectangular():
    assert max_weight_value([[5, 1, 0]]) == 5
    assert max_weight_value([[1], [4], [2]]) == 4
    assert max_weight_value([]) == 0


def test_bid_raise_moves_up_and_price_rises():
    rng = random.Random(8)
    for _ in range(100):
        inst = random_adtypes(rng, rng.randint(2, 5))
        i = rng.randrange(inst.n)
        rep = compare_bid_change(inst, i, inst.bids[i] + F(rng.randint(1, 800), 100))
        assert rep.raised and rep.slot_ok and rep.price_ok


def test_bid_lower_moves_down():
    rng = random.Random(9)
    for _ in range(100):
        inst = random_adtypes(rng, rng.randint(2, 5))
        i = rng.randrange(inst.n)
        rep = compare_bid_change(inst, i, inst.bids[i] * F(rng.randint(0, 99), 100))
        assert not rep.raised and rep.slot_ok


def test_tight_set_can_shrink_on_raise():
    # Raising the last bidder past two others pushes the 5-bidder below a slot
    # it used to be tight with.
    alpha = DiscountCurve((1, F(1, 2), F(1, 5), F(1, 10)))
    inst = AdTypesInstance.truthful([10, 8, 5, 3], [alpha] * 4)
    rep = compare_bid_change(inst, 3, F(9))
    assert rep.slot_ok and rep.price_ok
    assert (2, 1) in rep.old_edges and (2, 1) not in rep.new_edges
    assert not rep.edges_ok
