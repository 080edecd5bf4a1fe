"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Three literal requirements are false on concrete instances. They are kept as
strict xfails carrying a deterministic counterexample, and their criterion
line prints FAIL with the measured counts.
"""

import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

from icenvy.assignment import (
    check_duals,
    compare_bid_change,
    max_weight_value,
    solve_instance,
    verify_structure,
)
from icenvy.core import AdTypesInstance, DiscountCurve, PositionInstance
from icenvy.harness.dataset import build_dataset
from icenvy.harness.experiments import gfp_sanity_experiment, swl_bound_experiment
from icenvy.harness.generator import GeneratorConfig
from icenvy.harness.regression import dataset_fit_eval, ols_fit_eval
from icenvy.harness.scenarios import ReserveMechanism
from icenvy.mechanisms import make_mechanism
from icenvy.metrics import ic_envy, ic_regret, truthful_profile
from icenvy.position import RegularMechanism
from icenvy.pricing import extended_gsp_outcome, vcg_outcome

from helpers import brute_force_max, random_adtypes, random_position

Q = F(1, 100)


@pytest.fixture
def emit(capsys):
    def _emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return _emit


def envy_regret(inst, mech):
    pairs = []
    for i in range(inst.n):
        base = mech(truthful_profile(inst, i))
        pairs.append((ic_envy(i, inst, base), ic_regret(i, inst, mech, base)[0]))
    return pairs


# --- 1, 2, 3: worked examples ---------------------------------------------------


def test_criterion_1_first_price_example(emit):
    t0 = time.perf_counter()
    inst = PositionInstance.truthful([10, 8], DiscountCurve((1,)))
    mech = make_mechanism("gfp", inst)
    envy, regret = envy_regret(inst, mech)[0]
    elapsed = time.perf_counter() - t0
    ok = envy == 0 and regret == 2 - Q and elapsed < 1
    emit(1, ok, f"ic_envy={envy} ic_regret={regret} in {elapsed:.3f}s")
    assert envy == 0
    assert regret == F("1.99")
    assert elapsed < 1


def test_criterion_2_reserve_example(emit):
    inst = PositionInstance.truthful([3, 3], DiscountCurve((1,)))
    mech = ReserveMechanism((1, 5))
    envy, regret = envy_regret(inst, mech)[1]
    ok = envy == 2 and regret == 0
    emit(2, ok, f"bidder 2 ic_envy={envy} ic_regret={regret}")
    assert envy == 2 and regret == 0


def test_criterion_3_golden_instance(emit, golden):
    sol = solve_instance(golden)
    prices = tuple(F(round(p / sol.delta)) * sol.delta for p in sol.cert.slot_prices)
    ext, _, _ = extended_gsp_outcome(golden)
    vcg = vcg_outcome(golden)
    ok = sol.cert.matching == (2, 1, 0) and prices == (2, 1, 0) and ext.payments == vcg.payments == (0, 1, 2)
    emit(3, ok, f"matching={sol.cert.matching} p={tuple(str(p) for p in prices)} ext={tuple(map(str, ext.payments))}")
    assert sol.cert.matching == (2, 1, 0)
    assert prices == (2, 1, 0)
    assert ext.payments == (0, 1, 2)
    assert vcg.payments == (0, 1, 2)


# --- 4: equality for VCG and GSP ------------------------------------------------


def test_criterion_4_equality_suite(emit):
    rng = random.Random(4)
    t0 = time.perf_counter()
    failures = vcg_nonzero = bidders = 0
    for _ in range(1000):
        n = rng.randint(1, 8)
        inst = random_position(rng, n, rng.randint(1, n))
        for kind in ("vcg", "gsp"):
            for envy, regret in envy_regret(inst, RegularMechanism(inst.curve, kind)):
                bidders += 1
                failures += envy != regret
                if kind == "vcg":
                    vcg_nonzero += envy != 0 or regret != 0
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and vcg_nonzero == 0 and elapsed < 30
    emit(4, ok, f"{bidders} bidder checks, {failures} inequalities, {vcg_nonzero} nonzero VCG, {elapsed:.1f}s")
    assert failures == 0
    assert vcg_nonzero == 0
    assert elapsed < 30


# --- 5: envy dominates regret ---------------------------------------------------


@pytest.fixture(scope="module")
def adtypes_sweep():
    rng = random.Random(5)
    t0 = time.perf_counter()
    bad_instances = bad_bidders = 0
    for _ in range(200):
        n = rng.randint(1, 6)
        inst = random_adtypes(rng, n)
        pairs = envy_regret(inst, make_mechanism("extended-gsp", inst))
        worse = sum(1 for e, r in pairs if e < r)
        bad_bidders += worse
        bad_instances += worse > 0
    return bad_instances, bad_bidders, time.perf_counter() - t0


@pytest.fixture(scope="module")
def position_sweep():
    rng = random.Random(55)
    t0 = time.perf_counter()
    bad = checked = 0
    for k in range(1000):
        n = rng.randint(1, 8)
        inst = random_position(rng, n, rng.randint(1, n), ties=k % 2 == 0)
        for kind in ("vcg", "gsp"):
            for envy, regret in envy_regret(inst, RegularMechanism(inst.curve, kind)):
                checked += 1
                bad += envy < regret
    return bad, checked, time.perf_counter() - t0


def test_criterion_5_inequality_suite(emit, position_sweep, adtypes_sweep):
    bad_pos, checked, t_pos = position_sweep
    bad_inst, bad_bidders, t_ad = adtypes_sweep
    elapsed = t_pos + t_ad
    ok = bad_pos == 0 and bad_bidders == 0 and elapsed < 120
    emit(5, ok, f"position: {bad_pos}/{checked} violations; extended GSP: {bad_bidders} violating bidders "
                f"in {bad_inst}/200 instances; {elapsed:.1f}s")
    assert bad_pos == 0
    assert elapsed < 120


def test_criterion_5_extended_gsp_two_bidder_counterexample():
    # Bidder 1 takes slot 0 and pays the rival's tight edge 6.5. Shading to
    # 4.34 keeps slot 0 but drops the threshold, so the price falls to 2.6.
    inst = AdTypesInstance.truthful([13, 10], [(F("0.7"), F("0.5")), (F("0.9"), F("0.3"))])
    mech = make_mechanism("extended-gsp", inst)
    assert mech(inst.bids).payments == (0, F("6.5"))
    assert mech([13, F("4.34")], [0, 1]).payments == (0, F("2.6"))
    assert envy_regret(inst, mech)[1] == (F("0.5"), F("3.9"))


@pytest.mark.xfail(strict=True, reason="extended GSP regret can exceed envy; see the two-bidder counterexample")
def test_criterion_5_extended_gsp_has_no_violations(adtypes_sweep):
    assert adtypes_sweep[1] == 0


# --- 6: solver oracle -----------------------------------------------------------


@pytest.fixture(scope="module")
def solver_sweep():
    rng = random.Random(6)
    t0 = time.perf_counter()
    counts = dict(weight=0, duals=0, free_slot=0, monotone=0, free_path=0, clearing=0, lowest_tight=0)
    for _ in range(500):
        inst = random_adtypes(rng, rng.randint(1, 6))
        sol = solve_instance(inst)
        cert = sol.cert
        rep = verify_structure(cert)
        matched = sum(sol.weights[i][j] for i, j in enumerate(cert.matching))
        counts["weight"] += not (matched == brute_force_max(sol.weights) == max_weight_value(sol.weights))
        counts["duals"] += not check_duals(cert)
        counts["free_slot"] += cert.slot_prices[-1] != 0
        counts["monotone"] += not rep.monotone_prices
        counts["free_path"] += not rep.free_path
        counts["clearing"] += not rep.clearing
        counts["lowest_tight"] += not rep.lowest_tight
    return counts, time.perf_counter() - t0


def test_criterion_6_solver_oracle(emit, solver_sweep):
    counts, elapsed = solver_sweep
    ok = not any(counts.values()) and elapsed < 60
    emit(6, ok, "violations over 500 instances: " + ", ".join(f"{k}={v}" for k, v in counts.items())
                + f"; {elapsed:.1f}s")
    assert all(v == 0 for k, v in counts.items() if k != "lowest_tight")
    assert elapsed < 60


@pytest.mark.xfail(strict=True, reason="a matched bidder can be tight with a lower slot; see test_assignment")
def test_criterion_6_lowest_tight_slot(solver_sweep):
    assert solver_sweep[0]["lowest_tight"] == 0


# --- 7: bid monotonicity ----------------------------------------------------------


@pytest.fixture(scope="module")
def bid_change_sweep():
    rng = random.Random(7)
    c = dict(raises=0, lowers=0, slot=0, price=0, edges_raise=0, edges_lower=0)
    for _ in range(200):
        inst = random_adtypes(rng, rng.randint(2, 6))
        for _ in range(5):
            i = rng.randrange(inst.n)
            if rng.random() < 0.5:
                rep = compare_bid_change(inst, i, inst.bids[i] + F(rng.randint(1, 1000), 100))
                c["raises"] += 1
                c["slot"] += not rep.slot_ok
                c["price"] += not rep.price_ok
                c["edges_raise"] += not rep.edges_ok
            else:
                rep = compare_bid_change(inst, i, inst.bids[i] * F(rng.randint(0, 99), 100))
                c["lowers"] += 1
                c["edges_lower"] += not rep.edges_ok
    return c


def test_criterion_7_bid_monotonicity(emit, bid_change_sweep):
    c = bid_change_sweep
    ok = c["slot"] == c["price"] == c["edges_raise"] == c["edges_lower"] == 0
    emit(7, ok, f"{c['raises']} raises / {c['lowers']} lowers: slot violations {c['slot']}, "
                f"price violations {c['price']}, tight-set shrinks on raise {c['edges_raise']}, "
                f"tight-set changes on lower {c['edges_lower']}")
    assert c["slot"] == 0
    assert c["price"] == 0


@pytest.mark.xfail(strict=True, reason="tight-edge sets can shrink on a raise and change on a lower")
def test_criterion_7_tight_sets(bid_change_sweep):
    assert bid_change_sweep["edges_raise"] == 0 and bid_change_sweep["edges_lower"] == 0


# --- 8: welfare-loss bound ------------------------------------------------------


def test_criterion_8_swl_bound(emit):
    res = swl_bound_experiment(GeneratorConfig(seed=8, position=True), 100, mechanism="gfp", shading=16)
    ok = res.applicable >= 50 and res.failures == 0 and res.semi_smooth_failures == 0
    emit(8, ok, f"{res.applicable}/100 applicable, {res.failures} bound failures, "
                f"{res.semi_smooth_failures} semi-smoothness failures")
    assert res.applicable >= 50
    assert res.failures == 0
    assert res.semi_smooth_failures == 0


# --- 9: first-price scatter -------------------------------------------------------


def test_criterion_9_gfp_scatter(emit, tmp_path):
    # more bidders than slots, so some lose and the scatter is not degenerate
    cfg = GeneratorConfig(seed=9, n_bidders=12, n_slots=10, curve_classes=("0.9",), position=True)
    res = gfp_sanity_experiment(cfg, 1000)
    res.write(tmp_path / "a.csv")
    small = [tmp_path / "s1.csv", tmp_path / "s2.csv"]
    for p in small:
        gfp_sanity_experiment(cfg, 50).write(p)
    text = (tmp_path / "a.csv").read_text()
    example = text.splitlines()[1]
    deterministic = small[0].read_bytes() == small[1].read_bytes()
    ok = deterministic and example == "example,0,0,0.000000,1.990000" and res.n_generated == 12000
    emit(9, ok, f"{res.n_generated} rows, frac envy>=regret {res.frac_envy_ge_regret:.3f}, "
                f"example row '{example}'")
    assert deterministic
    assert example == "example,0,0,0.000000,1.990000"
    assert res.n_generated == 12000


# --- 10: regression pipeline ------------------------------------------------------


def test_criterion_10_envy_features_beat_price_value(emit):
    t0 = time.perf_counter()
    ds = build_dataset(GeneratorConfig(seed=7), 20000, mechanism="greedy-gsp")
    envy = dataset_fit_eval(ds, "envy", split_seed=0)["r2_test"]
    pv = dataset_fit_eval(ds, "price_value", split_seed=0)["r2_test"]
    w = np.arange(1, ds.m + 1, dtype=float)
    sanity = ols_fit_eval(ds.envy, ds.envy @ w + 0.25, split_seed=0)["r2_test"]
    elapsed = time.perf_counter() - t0
    ok = envy > pv and sanity > 0.99 and elapsed < 300
    emit(10, ok, f"{len(ds)} rows, r2_test envy={envy:.4f} price+value={pv:.4f}, sanity={sanity:.6f}, "
                 f"{elapsed:.1f}s")
    assert envy > pv
    assert sanity > 0.99
    assert elapsed < 300
