"""Single-item auction with bidder-specific reserve prices."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from ..core import DiscountCurve, Outcome, PositionInstance, to_money
from ..metrics import DiagnosticsReport, verify_theorems
from ..position import tie_order


@dataclass(frozen=True)
class ReserveMechanism:
    """Highest bid among those meeting their own reserve wins and pays that reserve."""

    reserves: tuple[Fraction, ...]

    family = "position"
    name = "reserve"

    def __post_init__(self):
        object.__setattr__(self, "reserves", tuple(to_money(r) for r in self.reserves))

    def __call__(self, bids: Sequence[Fraction], priority: Optional[Sequence[int]] = None) -> Outcome:
        n = len(bids)
        if n != len(self.reserves):
            raise ValueError("one reserve per bidder")
        tb = tie_order(n, priority)
        eligible = [i for i in range(n) if bids[i] >= self.reserves[i]]
        slots: list = [None] * n
        pays = [Fraction(0)] * n
        if eligible:
            win = min(eligible, key=lambda i: (-bids[i], tb[i]))
            slots[win] = 0
            pays[win] = self.reserves[win]
        return Outcome(tuple(slots), tuple(pays))

    def extra_candidates(self, i: int, bids: Sequence[Fraction]) -> list[Fraction]:
        return [self.reserves[i]]


def reserve_auction_scenario(values, bids, reserves) -> tuple[Outcome, DiagnosticsReport]:
    inst = PositionInstance(values, bids, DiscountCurve((1,)))
    mech = ReserveMechanism(tuple(reserves))
    return mech(inst.bids), verify_theorems(inst, mech)
