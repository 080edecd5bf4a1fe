"""Regular mechanisms for position auctions.

Bidders are ranked by bid; the bidder at rank ``r`` takes slot ``r`` and pays
``sum_k a[r][k] * b_(k)`` where ``b_(k)`` is the k-th highest bid. VCG, GSP and
GFP are the three built-in coefficient matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence, Union

from .core import DiscountCurve, Outcome, PositionInstance, Slot, to_money

MECHANISM_TAGS = ("vcg", "gsp", "gfp", "custom")


@dataclass(frozen=True)
class PaymentMatrix:
    coefficients: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_money(a) for a in row) for row in self.coefficients)
        object.__setattr__(self, "coefficients", rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("payment matrix must be square")
        if any(a < 0 for r in rows for a in r):
            raise ValueError("payment coefficients must be non-negative")

    @property
    def n(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, idx):
        return self.coefficients[idx]


MechanismKind = Union[str, PaymentMatrix]


def tie_order(n: int, priority: Optional[Sequence[int]] = None) -> list[int]:
    """Tie-break rank of every bidder (0 wins ties). Default is lexicographic."""
    if priority is None:
        return list(range(n))
    order = [0] * n
    for r, i in enumerate(priority):
        order[i] = r
    return order


def rank_order(bids: Sequence[Fraction], priority: Optional[Sequence[int]] = None) -> list[int]:
    """Bidders sorted by non-increasing bid, ties by ``priority`` (index order by default)."""
    tb = tie_order(len(bids), priority)
    return sorted(range(len(bids)), key=lambda i: (-bids[i], tb[i]))


def rank_allocate(
    bids: Sequence[Fraction], m: Optional[int] = None, priority: Optional[Sequence[int]] = None
) -> tuple[Slot, ...]:
    """Slot per bidder; ranks at or beyond ``m`` are unassigned."""
    if not bids:
        raise ValueError("need at least one bidder")
    slots: list[Slot] = [None] * len(bids)
    for r, i in enumerate(rank_order(bids, priority)):
        if m is None or r < m:
            slots[i] = r
    return tuple(slots)


def build_payment_matrix(kind: MechanismKind, curve: DiscountCurve, n: int) -> PaymentMatrix:
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(kind, PaymentMatrix):
        if kind.n != n:
            raise ValueError(f"custom matrix is {kind.n}x{kind.n}, expected {n}x{n}")
        return kind
    alpha = curve.at
    zero = Fraction(0)
    rows = [[zero] * n for _ in range(n)]
    tag = kind.lower()
    for r in range(n):
        if tag == "vcg":
            for k in range(r + 1, n):
                rows[r][k] = alpha(k - 1) - alpha(k)
        elif tag == "gsp":
            if r + 1 < n:
                rows[r][r + 1] = alpha(r)
        elif tag == "gfp":
            rows[r][r] = alpha(r)
        else:
            raise ValueError(f"unknown mechanism kind {kind!r}")
    return PaymentMatrix(tuple(tuple(r) for r in rows))


@lru_cache(maxsize=256)
def _cached_matrix(kind: MechanismKind, curve: DiscountCurve, n: int) -> PaymentMatrix:
    return build_payment_matrix(kind, curve, n)


def regular_outcome(
    bids: Sequence[Fraction],
    curve: DiscountCurve,
    matrix: PaymentMatrix,
    priority: Optional[Sequence[int]] = None,
) -> Outcome:
    n, m = len(bids), len(curve)
    order = rank_order(bids, priority)
    ranked = [bids[i] for i in order]
    slots: list[Slot] = [None] * n
    pays = [Fraction(0)] * n
    for r, i in enumerate(order):
        if r >= m:
            continue
        slots[i] = r
        pays[i] = sum((a * b for a, b in zip(matrix[r], ranked) if a), Fraction(0))
    return Outcome(tuple(slots), tuple(pays))


def run_regular(instance: PositionInstance, kind: MechanismKind) -> Outcome:
    matrix = build_payment_matrix(kind, instance.curve, instance.n)
    return regular_outcome(instance.bids, instance.curve, matrix)


@dataclass(frozen=True)
class RegularMechanism:
    """Re-runnable regular position mechanism: ``mech(bids) -> Outcome``."""

    curve: DiscountCurve
    kind: MechanismKind = "gsp"

    family = "position"

    def __call__(self, bids: Sequence[Fraction], priority: Optional[Sequence[int]] = None) -> Outcome:
        matrix = _cached_matrix(self.kind, self.curve, len(bids))
        return regular_outcome(bids, self.curve, matrix, priority)

    @property
    def name(self) -> str:
        return self.kind if isinstance(self.kind, str) else "custom"


class RegularityReport(NamedTuple):
    zero_prefix_ok: bool
    price_gap_ok: bool


def check_regularity_conditions(kind: MechanismKind, instance: PositionInstance) -> RegularityReport:
    """Check the two payment conditions for IR and envy >= regret on this bid profile.

    ``price_gap_ok`` uses realized payments in rank order, with quality past the
    last slot taken as 0.
    """
    n = instance.n
    matrix = build_payment_matrix(kind, instance.curve, n)
    zero_prefix = all(matrix[r][k] == 0 for r in range(n) for k in range(r + 1))
    out = regular_outcome(instance.bids, instance.curve, matrix)
    order = rank_order(instance.bids)
    pays = [out.payments[i] for i in order]
    ranked = [instance.bids[i] for i in order]
    alpha = instance.curve.at
    gap = all(
        pays[r] - pays[r + 1] >= (alpha(r) - alpha(r + 1)) * ranked[r + 1] for r in range(n - 1)
    )
    return RegularityReport(zero_prefix, gap)
