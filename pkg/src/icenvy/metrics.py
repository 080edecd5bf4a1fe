"""IC-Envy, IC-Regret, welfare, and the executable theorem checks.

A mechanism here is any callable ``mech(bids, priority=None) -> Outcome`` with
a ``family`` attribute (``"position"`` or ``"adtypes"``). ``priority`` lists
bidders from first to last tie-break precedence; it defaults to index order.

Regret is searched over a finite candidate set on the money grid. A
counterfactual bid is ranked after every rival bidding the same amount:
matching a rival's bid exactly is treated as the limit from below, so the
supremum of a first-price style region shows up at ``c + q`` rather than at
the tie itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import Optional, Protocol, Sequence

from .assignment import balance, max_weight_value
from .core import AdTypesInstance, Instance, Outcome, PositionInstance, bidder_utility, money_str, to_float


class MechanismHandle(Protocol):
    family: str

    def __call__(self, bids: Sequence[Fraction], priority: Optional[Sequence[int]] = None) -> Outcome: ...


def deviator_last(i: int, n: int) -> list[int]:
    return [k for k in range(n) if k != i] + [i]


def replace_bid(bids: Sequence[Fraction], i: int, b: Fraction) -> tuple[Fraction, ...]:
    out = list(bids)
    out[i] = Fraction(b)
    return tuple(out)


# --- envy ----------------------------------------------------------------------


def raw_envy(i: int, j: int, instance: Instance, outcome: Outcome) -> Fraction:
    """``u_i(X_j, p_j) - u_i(X_i, p_i)`` without clamping, using i's curve and value."""
    curve = instance.curve_of(i)
    v = instance.values[i]
    theirs = curve.at(outcome.assignment[j]) * v - outcome.payments[j]
    mine = curve.at(outcome.assignment[i]) * v - outcome.payments[i]
    return theirs - mine


def pairwise_envy(i: int, j: int, instance: Instance, outcome: Outcome) -> Fraction:
    if i == j:
        return Fraction(0)
    return max(Fraction(0), raw_envy(i, j, instance, outcome))


def envy_argmax(i: int, instance: Instance, outcome: Outcome) -> tuple[Fraction, Optional[int]]:
    best, who = Fraction(0), None
    for j in range(outcome.n):
        if j == i:
            continue
        e = pairwise_envy(i, j, instance, outcome)
        if who is None or e > best:
            best, who = e, j
    return best, who


def ic_envy(i: int, instance: Instance, truthful_outcome: Outcome) -> Fraction:
    """Largest envy of ``i`` toward any other bidder in the run where ``i`` bid its value."""
    return envy_argmax(i, instance, truthful_outcome)[0]


# --- regret --------------------------------------------------------------------


def truthful_profile(instance: Instance, i: int) -> tuple[Fraction, ...]:
    return replace_bid(instance.bids, i, instance.values[i])


def deviation_utility(i: int, b: Fraction, instance: Instance, mech: MechanismHandle) -> Fraction:
    bids = replace_bid(instance.bids, i, b)
    out = mech(bids, priority=deviator_last(i, instance.n))
    return bidder_utility(instance, i, out)


def regret_against_bid(
    i: int, b: Fraction, instance: Instance, mech: MechanismHandle, baseline: Optional[Outcome] = None
) -> Fraction:
    if baseline is None:
        baseline = mech(truthful_profile(instance, i))
    gain = deviation_utility(i, Fraction(b), instance, mech) - bidder_utility(instance, i, baseline)
    return max(Fraction(0), gain)


def _grid_around(x: Fraction, q: Fraction) -> set:
    """``x - q, x, x + q`` for a grid point; otherwise the two grid points around ``x``."""
    steps = x / q
    if steps.denominator == 1:
        return {x - q, x, x + q}
    return {math.floor(steps) * q, math.ceil(steps) * q}


def envelope_breakpoints(i: int, bids: Sequence[Fraction], curves) -> list[Fraction]:
    """Bids where bidder ``i``'s slot in the max-weight matching can change.

    With ``i`` forced into slot ``j`` the best total is ``b * alpha_ij + C_j``;
    the allocation follows the upper envelope of these lines, so its kinks
    sit at pairwise intersections.
    """
    n = len(bids)
    inst = balance(AdTypesInstance(bids, bids, curves))
    w = inst.weights()
    size = len(w)
    rivals = [k for k in range(n) if k != i]
    const = []
    for j in range(size):
        sub = [[w[k][s] for s in range(size) if s != j] for k in rivals]
        const.append(max_weight_value(sub) if rivals else Fraction(0))
    alpha = inst.curves[i].weights
    out = []
    for j in range(size):
        for jj in range(j + 1, size):
            if alpha[j] != alpha[jj]:
                b = (const[jj] - const[j]) / (alpha[j] - alpha[jj])
                if b >= 0:
                    out.append(b)
    return out


def deviation_candidates(i: int, instance: Instance, mech: Optional[MechanismHandle] = None) -> list[Fraction]:
    """Finite bid set covering every allocation/price region of bidder ``i``.

    Position mechanisms: 0, each rival bid and its grid neighbours, and one
    step above the top rival. Ad Types mechanisms add every bid where one of
    i's discounted values equals a rival edge weight, plus (for matching
    based rules) the exact allocation breakpoints.
    """
    q = instance.quantum
    rivals = [b for k, b in enumerate(instance.bids) if k != i]
    points: set = {Fraction(0)}
    for c in set(rivals):
        points |= _grid_around(c, q)
    if rivals:
        points.add(max(rivals) + q)
    else:
        points.add(q)
    family = getattr(mech, "family", "adtypes" if isinstance(instance, AdTypesInstance) else "position")
    if family == "adtypes":
        own = [a for a in instance.curve_of(i).weights if a > 0]
        rival_w = {b * a for k, b in enumerate(instance.bids) if k != i for a in instance.curve_of(k).weights}
        for a in set(own):
            for w in rival_w:
                points |= _grid_around(w / a, q)
        if getattr(mech, "optimal_allocation", False):
            curves = tuple(instance.curve_of(k) for k in range(instance.n))
            for b in envelope_breakpoints(i, instance.bids, curves):
                points |= _grid_around(b, q)
    extra = getattr(mech, "extra_candidates", None)
    if extra is not None:
        for b in extra(i, instance.bids):
            points |= _grid_around(Fraction(b), q)
    return sorted(p for p in points if p >= 0)


def best_deviation(i: int, instance: Instance, mech: MechanismHandle) -> tuple[Fraction, Fraction]:
    """Highest utility over the candidate set and the bid attaining it (lowest on ties)."""
    best_u, best_b = None, Fraction(0)
    for b in deviation_candidates(i, instance, mech):
        u = deviation_utility(i, b, instance, mech)
        if best_u is None or u > best_u:
            best_u, best_b = u, b
    return best_u, best_b


def ic_regret(
    i: int, instance: Instance, mech: MechanismHandle, baseline: Optional[Outcome] = None
) -> tuple[Fraction, Fraction]:
    """``(regret, best_bid)`` for bidder ``i`` bidding its value against ``b_-i``.

    Exact when every region of constant payment is wider than two grid steps;
    otherwise a lower bound on the supremum.
    """
    if baseline is None:
        baseline = mech(truthful_profile(instance, i))
    best_u, best_b = best_deviation(i, instance, mech)
    gain = best_u - bidder_utility(instance, i, baseline)
    if gain <= 0:
        return Fraction(0), instance.values[i]
    return gain, best_b


# --- welfare -------------------------------------------------------------------


def welfare(instance: Instance, outcome: Outcome, use_bids: bool = False) -> Fraction:
    amounts = instance.bids if use_bids else instance.values
    return sum(
        (instance.curve_of(i).at(s) * amounts[i] for i, s in enumerate(outcome.assignment)),
        Fraction(0),
    )


def optimal_welfare(instance: Instance) -> Fraction:
    if isinstance(instance, PositionInstance):
        ranked = sorted(instance.values, reverse=True)
        return sum((instance.curve.at(r) * v for r, v in enumerate(ranked)), Fraction(0))
    w = [[v * a for a in c.weights] for v, c in zip(instance.values, instance.curves)]
    return max_weight_value(w)


def social_welfare(instance: Instance, outcome: Outcome) -> tuple[Fraction, Fraction, Fraction]:
    """``(sw, sw_opt, swl)`` measured with true values."""
    sw = welfare(instance, outcome)
    opt = optimal_welfare(instance)
    return sw, opt, opt - sw


# --- theorem checks ------------------------------------------------------------


@dataclass
class BidderDiagnostics:
    ic_envy: Fraction
    ic_regret: Fraction
    best_deviation_bid: Fraction
    envy_argmax_bidder: Optional[int]
    regret_at_bid: Fraction
    regret_monotone_ok: bool
    semi_smooth_ok: bool


@dataclass
class DiagnosticsReport:
    bidders: list[BidderDiagnostics]
    sw: Fraction
    sw_opt: Fraction
    swl: Fraction
    sw_declared: Fraction
    envy_dominates_regret: bool
    swl_bound_applicable: bool
    swl_bound_holds: bool
    mechanism: str = ""

    @property
    def swl_bound_status(self) -> str:
        if not self.swl_bound_applicable:
            return "not applicable"
        return "holds" if self.swl_bound_holds else "fails"

    @property
    def total_envy(self) -> Fraction:
        return sum((b.ic_envy for b in self.bidders), Fraction(0))

    def to_dict(self) -> dict:
        def enc(x):
            if isinstance(x, Fraction):
                return money_str(x)
            if isinstance(x, dict):
                return {k: enc(v) for k, v in x.items()}
            if isinstance(x, list):
                return [enc(v) for v in x]
            return x

        d = enc(asdict(self))
        d["swl_bound_status"] = self.swl_bound_status
        return d

    def csv_rows(self, auction_id=0, ndigits: int = 6) -> list[list]:
        """One row per bidder: auction_id, bidder, ic_envy, ic_regret, best_deviation, sw, sw_opt, swl."""
        g = [to_float(x, ndigits) for x in (self.sw, self.sw_opt, self.swl)]
        return [
            [auction_id, i, to_float(b.ic_envy, ndigits), to_float(b.ic_regret, ndigits),
             to_float(b.best_deviation_bid, ndigits), *g]
            for i, b in enumerate(self.bidders)
        ]


CSV_HEADER = ["auction_id", "bidder", "ic_envy", "ic_regret", "best_deviation", "sw", "sw_opt", "swl"]


def _semi_smooth(i, instance, mech, out_b, out_v) -> bool:
    """``u_i(v_i/2, b_-i) + value of slot X(v,i)'s holder under b >= alpha_i,X(v,i) * v_i / 2``."""
    v = instance.values[i]
    half = mech(replace_bid(instance.bids, i, v / 2))
    lhs = bidder_utility(instance, i, half)
    j = out_v.assignment[i]
    if j is not None:
        holder = out_b.holder(j)
        if holder is not None:
            lhs += instance.curve_of(holder).at(j) * instance.values[holder]
    return lhs >= instance.curve_of(i).at(j) * v / 2


def verify_theorems(instance: Instance, mech: MechanismHandle) -> DiagnosticsReport:
    """Per-bidder envy/regret at ``(v_i, b_-i)`` plus welfare-loss and semi-smoothness checks.

    The welfare-loss bound is applicable when ``SW_opt >= 8 * SW(b)`` with
    ``SW(b)`` the declared (bid-valued) welfare of the outcome, and every
    bidder does at least as well with its bid as with its value.
    """
    n = instance.n
    cache: dict = {}

    def run(bids):
        key = tuple(bids)
        if key not in cache:
            cache[key] = mech(key)
        return cache[key]

    out_b = run(instance.bids)
    out_v = run(instance.values)
    rows = []
    all_better = True
    for i in range(n):
        base = run(truthful_profile(instance, i))
        envy, who = envy_argmax(i, instance, base)
        best_u, best_b = best_deviation(i, instance, mech)
        u_truth = bidder_utility(instance, i, base)
        u_bid = bidder_utility(instance, i, out_b)
        reg_v = max(Fraction(0), best_u - u_truth)
        reg_b = max(Fraction(0), best_u - u_bid)
        better = u_bid >= u_truth
        all_better &= better
        rows.append(BidderDiagnostics(
            ic_envy=envy,
            ic_regret=reg_v,
            best_deviation_bid=best_b if reg_v > 0 else instance.values[i],
            envy_argmax_bidder=who,
            regret_at_bid=reg_b,
            regret_monotone_ok=(not better) or reg_b <= reg_v,
            semi_smooth_ok=_semi_smooth(i, instance, mech, out_b, out_v),
        ))
    sw, opt, swl = social_welfare(instance, out_b)
    declared = welfare(instance, out_b, use_bids=True)
    applicable = all_better and opt >= 8 * declared
    total = sum((r.ic_envy for r in rows), Fraction(0))
    return DiagnosticsReport(
        bidders=rows,
        sw=sw,
        sw_opt=opt,
        swl=swl,
        sw_declared=declared,
        envy_dominates_regret=all(r.ic_envy >= r.ic_regret for r in rows),
        swl_bound_applicable=applicable,
        swl_bound_holds=(not applicable) or 4 * total >= swl,
        mechanism=getattr(mech, "name", ""),
    )
