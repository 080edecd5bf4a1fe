"""Max-weight perfect matching with pointwise-minimal dual prices.

The solver scales rational weights to integers, finds an optimal assignment
with the Hungarian method, then lifts slot prices from zero to the least
feasible dual (a longest-path fixed point over the exchange graph). That least
point is the minimal price vector; ``verify_structure`` re-checks it through
the alternating-path criterion instead of trusting the construction.

Ties are removed by a deterministic perturbation: weight ``k`` in the scan
order gains ``eps * 2**k`` with ``eps = delta / 2**(m*m + 3)``, where
``delta`` is the grid every weight lies on. Any two edge subsets then differ
in total weight, and perturbed prices round back to exact ones.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from .core import AdTypesInstance, DiscountCurve, money_str
from .position import tie_order

log = logging.getLogger(__name__)

Matrix = list[list[Fraction]]
Edge = tuple[int, int]

SOFT_MAX_SLOTS = 12


class ShapeError(ValueError):
    pass


def balance(instance: AdTypesInstance) -> AdTypesInstance:
    """Pad with zero-quality slots (n > m) or drop the lowest slots (m > n)."""
    n, m = instance.n, instance.m
    if n == m:
        return instance
    if n > m:
        pad = (Fraction(0),) * (n - m)
        curves = tuple(DiscountCurve(c.weights + pad) for c in instance.curves)
    else:
        curves = tuple(DiscountCurve(c.weights[:n]) for c in instance.curves)
    return AdTypesInstance(instance.values, instance.bids, curves, instance.quantum)


def _lcm_denominator(weights: Sequence[Sequence[Fraction]]) -> int:
    return math.lcm(1, *(Fraction(w).denominator for row in weights for w in row))


def weight_grid(weights: Sequence[Sequence[Fraction]]) -> Fraction:
    """Largest ``g`` with every weight an integer multiple of ``g`` (1 if all are zero).

    Every pairwise difference is a multiple of ``g``, so ``g`` never exceeds
    the smallest positive gap, and sums/differences of weights (hence all
    dual prices) stay on the same grid.
    """
    den = _lcm_denominator(weights)
    g = 0
    for row in weights:
        for w in row:
            g = math.gcd(g, int(Fraction(w) * den))
    return Fraction(g, den) if g else Fraction(1)


def min_gap(weights: Sequence[Sequence[Fraction]]) -> Fraction:
    """Smallest positive difference between two weights (1 if none)."""
    vals = sorted({Fraction(w) for row in weights for w in row})
    gaps = [b - a for a, b in zip(vals, vals[1:])]
    return min(gaps) if gaps else Fraction(1)


def perturbation_exponents(n: int, priority: Optional[Sequence[int]] = None) -> list[list[int]]:
    """Exponent ``k`` (1..n*n) for each edge.

    Higher slots get larger exponents than every lower slot, so each
    bidder's perturbed row stays strictly decreasing; within a slot, bidders
    earlier in ``priority`` get the larger bump and win ties.
    """
    tb = tie_order(n, priority)
    return [[(n - 1 - j) * n + (n - tb[i]) for j in range(n)] for i in range(n)]


def perturb(
    weights: Sequence[Sequence[Fraction]],
    delta: Optional[Fraction] = None,
    priority: Optional[Sequence[int]] = None,
) -> tuple[Matrix, Fraction]:
    n = len(weights)
    if any(len(r) != n for r in weights):
        raise ShapeError("perturbation needs a square weight matrix")
    if delta is None:
        delta = weight_grid(weights)
    if n > SOFT_MAX_SLOTS:
        log.warning("perturbing a %dx%d graph: denominators grow as 2**%d", n, n, n * n)
    eps = Fraction(delta) / 2 ** (n * n + 3)
    ks = perturbation_exponents(n, priority)
    out = [[Fraction(weights[i][j]) + eps * 2 ** ks[i][j] for j in range(n)] for i in range(n)]
    return out, Fraction(delta)


def round_payments(prices: Sequence[Fraction], delta: Fraction) -> list[Fraction]:
    """Nearest multiple of ``delta``; exact halves go down."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return [math.ceil(Fraction(p) / delta - Fraction(1, 2)) * delta for p in prices]


# --- solver ------------------------------------------------------------------


def _hungarian_max(W: list[list[int]]) -> list[int]:
    """Max-weight perfect matching on a square integer matrix; returns slot per row."""
    n = len(W)
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv: list = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = W[i0 - 1]
            ui = u[i0]
            delta = None
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = -row[j - 1] - ui - v[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is None or minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    match = [0] * n
    for j in range(1, n + 1):
        match[p[j] - 1] = j - 1
    return match


def _minimal_prices(W: list[list[int]], match: list[int]) -> list[int]:
    """Least non-negative prices making ``match`` an optimal, envy-free assignment."""
    n = len(W)
    price = [0] * n
    for _ in range(n + 1):
        changed = False
        for k in range(n):
            mk = match[k]
            base = price[mk] - W[k][mk]
            row = W[k]
            for j in range(n):
                cand = base + row[j]
                if cand > price[j]:
                    price[j] = cand
                    changed = True
        if not changed:
            return price
    raise ArithmeticError("price lifting did not converge; matching is not optimal")


@dataclass(frozen=True)
class DualCertificate:
    """Optimal matching plus minimal duals; indices are 0-based (bidder, slot)."""

    matching: tuple[int, ...]
    slot_prices: tuple[Fraction, ...]
    bidder_utilities: tuple[Fraction, ...]
    tight_edges: frozenset
    weights: tuple[tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return len(self.matching)

    @property
    def value(self) -> Fraction:
        return sum((self.weights[i][j] for i, j in enumerate(self.matching)), Fraction(0))

    def holder(self, slot: int) -> int:
        return self.matching.index(slot)

    def tight_slots(self, i: int) -> list[int]:
        return sorted(j for (k, j) in self.tight_edges if k == i)

    def to_dict(self) -> dict:
        return {
            "matching": list(self.matching),
            "p": [money_str(x) for x in self.slot_prices],
            "q": [money_str(x) for x in self.bidder_utilities],
            "tight_edges": sorted([list(e) for e in self.tight_edges]),
        }


def solve_min_dual_mwpm(weights: Sequence[Sequence[Fraction]]) -> DualCertificate:
    n = len(weights)
    if n == 0 or any(len(r) != n for r in weights):
        raise ShapeError(f"expected a non-empty square matrix, got {n} rows")
    fw = tuple(tuple(Fraction(w) for w in row) for row in weights)
    den = _lcm_denominator(fw)
    W = [[int(w * den) for w in row] for row in fw]
    match = _hungarian_max(W)
    price = _minimal_prices(W, match)
    util = [W[k][match[k]] - price[match[k]] for k in range(n)]
    tight = frozenset(
        (k, j) for k in range(n) for j in range(n) if util[k] + price[j] == W[k][j]
    )
    return DualCertificate(
        matching=tuple(match),
        slot_prices=tuple(Fraction(x, den) for x in price),
        bidder_utilities=tuple(Fraction(x, den) for x in util),
        tight_edges=tight,
        weights=fw,
    )


def max_weight_value(weights: Sequence[Sequence[Fraction]]) -> Fraction:
    """Optimal matching value of a possibly rectangular non-negative matrix."""
    rows = len(weights)
    cols = len(weights[0]) if rows else 0
    if rows == 0 or cols == 0:
        return Fraction(0)
    size = max(rows, cols)
    zero = Fraction(0)
    sq = [[Fraction(weights[i][j]) if i < rows and j < cols else zero for j in range(size)] for i in range(size)]
    den = _lcm_denominator(sq)
    W = [[int(w * den) for w in row] for row in sq]
    match = _hungarian_max(W)
    return Fraction(sum(W[i][match[i]] for i in range(size)), den)


def check_duals(cert: DualCertificate) -> bool:
    """Feasibility, complementary slackness and strong duality, exactly."""
    n, w, p, q = cert.n, cert.weights, cert.slot_prices, cert.bidder_utilities
    feasible = all(q[i] + p[j] >= w[i][j] for i in range(n) for j in range(n))
    slack = all(q[i] + p[cert.matching[i]] == w[i][cert.matching[i]] for i in range(n))
    return feasible and slack and cert.value == sum(p) + sum(q)


def tight_edge_sets(cert: DualCertificate) -> list[frozenset]:
    """``E_j`` per slot: tight edges at slot >= j whose bidder is matched at slot >= j."""
    out = []
    for j in range(cert.n):
        out.append(frozenset(
            (i, s) for (i, s) in cert.tight_edges if s >= j and cert.matching[i] >= j
        ))
    return out


def _reaches_free_slot(cert: DualCertificate, start_slot: int, by_slot: dict) -> bool:
    p = cert.slot_prices
    seen = {start_slot}
    todo = deque([start_slot])
    while todo:
        j = todo.popleft()
        if p[j] == 0:
            return True
        for k in by_slot.get(j, ()):
            nxt = cert.matching[k]
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return False


class StructureReport(NamedTuple):
    lowest_tight: bool
    free_path: bool
    monotone_prices: bool
    clearing: bool

    @property
    def ok(self) -> bool:
        return all(self)


def verify_structure(cert: DualCertificate) -> StructureReport:
    n, w, p = cert.n, cert.weights, cert.slot_prices
    lowest = all(max(cert.tight_slots(i)) == cert.matching[i] for i in range(n))
    by_slot: dict = {}
    for (k, j) in cert.tight_edges:
        by_slot.setdefault(j, []).append(k)
    free = all(_reaches_free_slot(cert, cert.matching[i], by_slot) for i in range(n))
    monotone = p[-1] == 0 and all(a >= b for a, b in zip(p, p[1:]))
    clearing = all(
        w[i][cert.matching[i]] - p[cert.matching[i]] >= max(w[i][j] - p[j] for j in range(n))
        for i in range(n)
    )
    return StructureReport(lowest, free, monotone, clearing)


@dataclass(frozen=True)
class PerturbedSolution:
    """An instance balanced, perturbed and solved; ``m_real`` slots are genuine."""

    balanced: AdTypesInstance
    weights: Matrix
    perturbed: Matrix
    delta: Fraction
    cert: DualCertificate
    m_real: int

    def real_slot(self, j: int) -> Optional[int]:
        return j if j < self.m_real else None


def solve_instance(
    instance: AdTypesInstance,
    bids: Optional[Sequence[Fraction]] = None,
    priority: Optional[Sequence[int]] = None,
    delta: Optional[Fraction] = None,
) -> PerturbedSolution:
    inst = instance if bids is None else instance.with_bids(bids)
    bal = balance(inst)
    w = bal.weights()
    pw, d = perturb(w, delta, priority)
    cert = solve_min_dual_mwpm(pw)
    return PerturbedSolution(bal, w, pw, d, cert, min(instance.m, instance.n))


@dataclass(frozen=True)
class BidChangeReport:
    """Compare solutions before/after bidder ``i`` changes its bid.

    ``new_slot`` is where ``i`` lands; edge sets and prices are read at that
    slot in both solutions. Both runs share one rounding grid.
    """

    bidder: int
    raised: bool
    old_slot: int
    new_slot: int
    old_edges: frozenset
    new_edges: frozenset
    old_price: Fraction
    new_price: Fraction

    @property
    def slot_ok(self) -> bool:
        return self.new_slot <= self.old_slot if self.raised else self.new_slot >= self.old_slot

    @property
    def edges_ok(self) -> bool:
        return self.old_edges <= self.new_edges if self.raised else self.old_edges == self.new_edges

    @property
    def price_ok(self) -> bool:
        return self.new_price >= self.old_price if self.raised else self.new_price == self.old_price


def compare_bid_change(
    instance: AdTypesInstance, i: int, new_bid: Fraction, priority: Optional[Sequence[int]] = None
) -> BidChangeReport:
    bids = list(instance.bids)
    bids[i] = Fraction(new_bid)
    changed = instance.with_bids(bids)
    delta = weight_grid(balance(instance).weights() + balance(changed).weights())
    before = solve_instance(instance, priority=priority, delta=delta)
    after = solve_instance(changed, priority=priority, delta=delta)
    j_new = after.cert.matching[i]
    p_old = round_payments(before.cert.slot_prices, delta)
    p_new = round_payments(after.cert.slot_prices, delta)
    return BidChangeReport(
        bidder=i,
        raised=bids[i] >= instance.bids[i],
        old_slot=before.cert.matching[i],
        new_slot=j_new,
        old_edges=tight_edge_sets(before.cert)[j_new],
        new_edges=tight_edge_sets(after.cert)[j_new],
        old_price=p_old[j_new],
        new_price=p_new[j_new],
    )
