"""Pricing rules for the Ad Types environment.

``vcg`` and ``extended-gsp`` allocate by max-weight matching and price from
the minimal duals; ``greedy-gsp`` and ``greedy-externality`` fill slots top
down with the highest remaining discounted bid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import math

from .assignment import (
    DualCertificate,
    PerturbedSolution,
    _hungarian_max,
    _minimal_prices,
    perturbation_exponents,
    round_payments,
    solve_instance,
    tight_edge_sets,
)
from .core import AdTypesInstance, DiscountCurve, Outcome, Slot
from .position import tie_order

PRICING_TAGS = ("extended-gsp", "vcg", "greedy-gsp", "greedy-externality")


def threshold_t(i: int, j: int, edges: Iterable, weights: Sequence[Sequence[Fraction]]) -> Fraction:
    """Largest edge weight in ``edges`` strictly below ``weights[i][j]``; 0 if none."""
    own = weights[i][j]
    below = [weights[a][b] for (a, b) in edges if weights[a][b] < own]
    return max(below, default=Fraction(0))


@dataclass(frozen=True)
class ExtendedGspPrices:
    """Charged price per bidder plus the full non-anonymous grid ``grid[i][j]``."""

    charged: tuple[Fraction, ...]
    grid: tuple[tuple[Fraction, ...], ...]


def _gsp_grid(sol: PerturbedSolution) -> list[list[Fraction]]:
    cert, pw = sol.cert, sol.perturbed
    sets = tight_edge_sets(cert)
    n = cert.n
    grid = []
    for i in range(n):
        row = [max(cert.slot_prices[j], threshold_t(i, j, sets[j], pw)) for j in range(n)]
        grid.append(round_payments(row, sol.delta))
    return grid


def _matched_outcome(sol: PerturbedSolution, price_of) -> Outcome:
    cert = sol.cert
    slots: list[Slot] = []
    pays = []
    for i, j in enumerate(cert.matching):
        real = sol.real_slot(j)
        slots.append(real)
        pays.append(price_of(i, j) if real is not None else Fraction(0))
    return Outcome(tuple(slots), tuple(pays))


def extended_gsp_outcome(
    instance: AdTypesInstance,
    bids: Optional[Sequence[Fraction]] = None,
    priority: Optional[Sequence[int]] = None,
    delta: Optional[Fraction] = None,
) -> tuple[Outcome, ExtendedGspPrices, DualCertificate]:
    sol = solve_instance(instance, bids, priority, delta)
    grid = _gsp_grid(sol)
    out = _matched_outcome(sol, lambda i, j: grid[i][j])
    prices = ExtendedGspPrices(out.payments, tuple(tuple(r) for r in grid))
    return out, prices, sol.cert


def vcg_outcome(
    instance: AdTypesInstance,
    bids: Optional[Sequence[Fraction]] = None,
    priority: Optional[Sequence[int]] = None,
    delta: Optional[Fraction] = None,
) -> Outcome:
    sol = solve_instance(instance, bids, priority, delta)
    p = round_payments(sol.cert.slot_prices, sol.delta)
    return _matched_outcome(sol, lambda i, j: p[j])


def greedy_allocate(
    weights: Sequence[Sequence[Fraction]], priority: Optional[Sequence[int]] = None, skip: Optional[int] = None
) -> tuple[list[Slot], list[Fraction]]:
    """Top-down greedy fill; returns slots and the runner-up value at each win."""
    n = len(weights)
    m = len(weights[0]) if n else 0
    tb = tie_order(n, priority)
    free = [i for i in range(n) if i != skip]
    slots: list[Slot] = [None] * n
    runner_up = [weights[0][0] * 0 if m else 0] * n
    for j in range(min(m, len(free))):
        ranked = sorted(free, key=lambda i: (-weights[i][j], tb[i]))
        win = ranked[0]
        slots[win] = j
        if len(ranked) > 1:
            runner_up[win] = weights[ranked[1]][j]
        free.remove(win)
    return slots, runner_up


def _welfare(weights, slots, exclude: Optional[int] = None):
    return sum(weights[i][s] for i, s in enumerate(slots) if s is not None and i != exclude)


def greedy_payments(weights, rule: str = "gsp", priority: Optional[Sequence[int]] = None) -> tuple[list[Slot], list]:
    """Greedy slots and prices on any exact numeric matrix (ints or Fractions).

    Externality pricing re-runs greedy once per winner without that bidder:
    O(n * n * m) overall.
    """
    slots, runner_up = greedy_allocate(weights, priority)
    rule = rule.removeprefix("greedy-")
    zero = weights[0][0] * 0 if weights and weights[0] else 0
    if rule == "gsp":
        return slots, [runner_up[i] if s is not None else zero for i, s in enumerate(slots)]
    if rule != "externality":
        raise ValueError(f"unknown greedy pricing rule {rule!r}")
    pays = []
    for i, s in enumerate(slots):
        if s is None:
            pays.append(zero)
            continue
        without, _ = greedy_allocate(weights, priority, skip=i)
        pays.append(_welfare(weights, without) - _welfare(weights, slots, exclude=i))
    return slots, pays


def greedy_outcome(
    instance: AdTypesInstance,
    rule: str = "gsp",
    bids: Optional[Sequence[Fraction]] = None,
    priority: Optional[Sequence[int]] = None,
) -> Outcome:
    """Greedy allocation priced by ``gsp`` (runner-up value) or ``externality``."""
    slots, pays = greedy_payments(instance.weights(bids), rule, priority)
    return Outcome(tuple(slots), tuple(Fraction(p) for p in pays))


def check_price_monotonicity(prices: ExtendedGspPrices) -> bool:
    return all(all(a >= b for a, b in zip(row, row[1:])) for row in prices.grid)


def _round_half_down(x: int, unit: int) -> int:
    """Nearest multiple of ``unit`` (in multiples), exact halves going down."""
    return -((unit - 2 * x) // (2 * unit))


def _integer_matched_prices(
    W: list[list[int]], rule: str, priority: Optional[Sequence[int]]
) -> tuple[list[int], list[int], int, int]:
    """Integer twin of the perturbed solve for ``vcg`` / ``extended-gsp``.

    Returns (matching, payments in multiples of the grid, grid, n*n+3).
    Payments are those of the Fraction path, expressed as multiples of the
    weight grid ``g``.
    """
    n = len(W)
    g = 0
    for row in W:
        for w in row:
            g = math.gcd(g, w)
    shift = n * n + 3
    ks = perturbation_exponents(n, priority)
    grid = g or 1  # all-zero weights: every price is 0 whatever the grid
    P = [[(W[i][j] << shift) + (grid << ks[i][j]) for j in range(n)] for i in range(n)]
    match = _hungarian_max(P)
    price = _minimal_prices(P, match)
    unit = grid << shift
    if rule == "vcg":
        pays = [_round_half_down(price[match[i]], unit) for i in range(n)]
        return match, pays, grid, shift
    util = [P[k][match[k]] - price[match[k]] for k in range(n)]
    pays = []
    for i in range(n):
        j = match[i]
        own = P[i][j]
        t = 0
        for k in range(n):
            if match[k] < j:
                continue
            row = P[k]
            for s in range(j, n):
                w = row[s]
                if w < own and w > t and util[k] + price[s] == w:
                    t = w
        pays.append(_round_half_down(max(price[j], t), unit))
    return match, pays, grid, shift


@dataclass(frozen=True)
class AdTypesMechanism:
    """Re-runnable Ad Types mechanism: ``mech(bids) -> Outcome``."""

    curves: tuple[DiscountCurve, ...]
    rule: str = "extended-gsp"
    quantum: Fraction = Fraction(1, 100)

    family = "adtypes"

    def __post_init__(self):
        if self.rule not in PRICING_TAGS:
            raise ValueError(f"unknown pricing rule {self.rule!r}; expected one of {PRICING_TAGS}")

    @property
    def name(self) -> str:
        return self.rule

    @property
    def optimal_allocation(self) -> bool:
        return self.rule in ("vcg", "extended-gsp")

    def _instance(self, bids) -> AdTypesInstance:
        return AdTypesInstance(bids, bids, self.curves, self.quantum)

    def _scaled_curves(self, n: int) -> tuple[int, list[list[int]]]:
        cache = self.__dict__.setdefault("_scaled", {})
        if n not in cache:
            den = math.lcm(1, *(a.denominator for c in self.curves for a in c.weights))
            rows = []
            for c in self.curves:
                row = [int(a * den) for a in c.weights[:n]]
                rows.append(row + [0] * (n - len(row)))
            cache[n] = (den, rows)
        return cache[n]

    def __call__(self, bids: Sequence[Fraction], priority: Optional[Sequence[int]] = None) -> Outcome:
        if not self.optimal_allocation:
            return greedy_outcome(self._instance(bids), self.rule, priority=priority)
        bids = [Fraction(b) for b in bids]
        n = len(bids)
        if n != len(self.curves):
            raise ValueError(f"expected {len(self.curves)} bids, got {n}")
        a_den, A = self._scaled_curves(n)
        b_den = math.lcm(1, *(b.denominator for b in bids))
        B = [b.numerator * (b_den // b.denominator) for b in bids]
        W = [[B[i] * a for a in A[i]] for i in range(n)]
        match, pays, grid, _ = _integer_matched_prices(W, self.rule, priority)
        m_real = min(n, len(self.curves[0]))
        scale = Fraction(grid, a_den * b_den)
        slots = tuple(j if j < m_real else None for j in match)
        payments = tuple(pays[i] * scale if slots[i] is not None else Fraction(0) for i in range(n))
        return Outcome(slots, payments)
