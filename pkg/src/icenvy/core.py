"""Exact money arithmetic, instance types and the valuation/utility algebra.

All amounts are :class:`fractions.Fraction`. Slots are 0-based indices and
``None`` marks an unassigned bidder (value 0, price 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Sequence, Union

Money = Fraction
Slot = Optional[int]
UNASSIGNED: Slot = None

MoneyLike = Union[Fraction, int, str, Decimal, float]

DEFAULT_QUANTUM = Fraction(1, 100)


def to_money(x: MoneyLike) -> Money:
    """Parse ``x`` into an exact rational.

    Floats go through their shortest repr so ``0.1`` becomes ``1/10``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a money amount")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, (str, Decimal)):
        return Fraction(str(x).strip())
    raise TypeError(f"cannot interpret {x!r} as money")


def money_str(x: Money) -> str:
    """Serialize exactly: terminating decimals as decimal strings, otherwise ``p/q``."""
    x = Fraction(x)
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(x.numerator)
    scaled = x * 10**digits
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def to_float(x: Money, ndigits: int = 6) -> float:
    return round(float(x), ndigits)


@dataclass(frozen=True)
class DiscountCurve:
    """Non-increasing, non-negative slot quality factors."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        ws = tuple(to_money(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if any(w < 0 for w in ws):
            raise ValueError("discount curve entries must be non-negative")
        if any(a < b for a, b in zip(ws, ws[1:])):
            raise ValueError(f"discount curve must be non-increasing: {ws}")

    @classmethod
    def geometric(cls, ratio: MoneyLike, m: int) -> "DiscountCurve":
        r = to_money(ratio)
        return cls(tuple(r ** (j + 1) for j in range(m)))

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, j: int) -> Fraction:
        return self.weights[j]

    def at(self, slot: Slot) -> Fraction:
        """Quality of ``slot``; zero for unassigned or slots past the end (padding)."""
        if slot is None or slot >= len(self.weights):
            return Fraction(0)
        if slot < 0:
            raise IndexError(f"negative slot {slot}")
        return self.weights[slot]


def _curve(c) -> DiscountCurve:
    return c if isinstance(c, DiscountCurve) else DiscountCurve(tuple(c))


def _money_tuple(xs) -> tuple[Fraction, ...]:
    return tuple(to_money(x) for x in xs)


@dataclass(frozen=True)
class PositionInstance:
    """Scalar values and bids with one common curve."""

    values: tuple[Fraction, ...]
    bids: tuple[Fraction, ...]
    curve: DiscountCurve
    quantum: Fraction = DEFAULT_QUANTUM

    def __post_init__(self):
        object.__setattr__(self, "values", _money_tuple(self.values))
        object.__setattr__(self, "bids", _money_tuple(self.bids))
        object.__setattr__(self, "curve", _curve(self.curve))
        object.__setattr__(self, "quantum", to_money(self.quantum))
        if len(self.values) != len(self.bids) or not self.values:
            raise ValueError("values and bids must have equal length n >= 1")
        if any(x < 0 for x in self.values + self.bids):
            raise ValueError("values and bids must be non-negative")
        if self.quantum <= 0:
            raise ValueError("quantum must be positive")

    @classmethod
    def truthful(cls, values, curve, quantum: MoneyLike = DEFAULT_QUANTUM) -> "PositionInstance":
        vs = _money_tuple(values)
        return cls(vs, vs, curve, to_money(quantum))

    @property
    def n(self) -> int:
        return len(self.bids)

    @property
    def m(self) -> int:
        return len(self.curve)

    def curve_of(self, i: int) -> DiscountCurve:
        return self.curve

    def with_bids(self, bids) -> "PositionInstance":
        return PositionInstance(self.values, bids, self.curve, self.quantum)


@dataclass(frozen=True)
class AdTypesInstance:
    """Per-bidder discount curves; edge weight is bid times curve entry."""

    values: tuple[Fraction, ...]
    bids: tuple[Fraction, ...]
    curves: tuple[DiscountCurve, ...]
    quantum: Fraction = DEFAULT_QUANTUM

    def __post_init__(self):
        object.__setattr__(self, "values", _money_tuple(self.values))
        object.__setattr__(self, "bids", _money_tuple(self.bids))
        object.__setattr__(self, "curves", tuple(_curve(c) for c in self.curves))
        object.__setattr__(self, "quantum", to_money(self.quantum))
        n = len(self.bids)
        if len(self.values) != n or len(self.curves) != n or n == 0:
            raise ValueError("values, bids and curves must have equal length n >= 1")
        if len({len(c) for c in self.curves}) != 1:
            raise ValueError("all curves must cover the same number of slots")
        if any(x < 0 for x in self.values + self.bids):
            raise ValueError("values and bids must be non-negative")
        if self.quantum <= 0:
            raise ValueError("quantum must be positive")

    @classmethod
    def truthful(cls, values, curves, quantum: MoneyLike = DEFAULT_QUANTUM) -> "AdTypesInstance":
        vs = _money_tuple(values)
        return cls(vs, vs, curves, to_money(quantum))

    @classmethod
    def from_position(cls, inst: PositionInstance) -> "AdTypesInstance":
        return cls(inst.values, inst.bids, (inst.curve,) * inst.n, inst.quantum)

    @property
    def n(self) -> int:
        return len(self.bids)

    @property
    def m(self) -> int:
        return len(self.curves[0])

    def curve_of(self, i: int) -> DiscountCurve:
        return self.curves[i]

    def with_bids(self, bids) -> "AdTypesInstance":
        return AdTypesInstance(self.values, bids, self.curves, self.quantum)

    def weights(self, bids=None) -> list[list[Fraction]]:
        bids = self.bids if bids is None else bids
        return [[b * a for a in c.weights] for b, c in zip(bids, self.curves)]


Instance = Union[PositionInstance, AdTypesInstance]


@dataclass(frozen=True)
class Outcome:
    """Slot per bidder (``None`` = unassigned) and the payment each bidder makes."""

    assignment: tuple[Slot, ...]
    payments: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.assignment) != len(self.payments):
            raise ValueError("assignment and payments must have equal length")
        taken = [s for s in self.assignment if s is not None]
        if len(taken) != len(set(taken)):
            raise ValueError(f"assignment is not injective: {self.assignment}")

    @property
    def n(self) -> int:
        return len(self.assignment)

    def holder(self, slot: int) -> Optional[int]:
        for i, s in enumerate(self.assignment):
            if s == slot:
                return i
        return None

    def slot_prices(self, m: int) -> list[Fraction]:
        """Price paid for each slot by its holder; empty slots cost 0."""
        prices = [Fraction(0)] * m
        for s, p in zip(self.assignment, self.payments):
            if s is not None and s < m:
                prices[s] = p
        return prices

    def to_dict(self) -> dict:
        return {
            "assignment": list(self.assignment),
            "payments": [money_str(p) for p in self.payments],
        }


def discounted_value(v: MoneyLike, curve: DiscountCurve, slot: Slot) -> Money:
    """``v * alpha[slot]``; 0 when unassigned."""
    if slot is None:
        return Fraction(0)
    if slot < 0 or slot >= len(curve):
        raise IndexError(f"slot {slot} out of range for curve of length {len(curve)}")
    return to_money(v) * curve[slot]


def utility(v: MoneyLike, curve: DiscountCurve, slot: Slot, price: MoneyLike) -> Money:
    return discounted_value(v, curve, slot) - to_money(price)


def bidder_utility(instance: Instance, i: int, outcome: Outcome) -> Money:
    """Utility of bidder ``i`` (measured with its true value) in ``outcome``."""
    curve = instance.curve_of(i)
    return curve.at(outcome.assignment[i]) * instance.values[i] - outcome.payments[i]


# --- JSON ------------------------------------------------------------------


def instance_to_dict(inst: Instance) -> dict:
    curves = [inst.curve] if isinstance(inst, PositionInstance) else list(inst.curves)
    return {
        "values": [money_str(v) for v in inst.values],
        "bids": [money_str(b) for b in inst.bids],
        "curves": [[money_str(a) for a in c.weights] for c in curves],
        "quantum": money_str(inst.quantum),
    }


def instance_from_dict(d: dict) -> Instance:
    """A single curve yields a :class:`PositionInstance`, one curve per bidder an Ad Types one."""
    values = d.get("values", d.get("bids"))
    bids = d.get("bids", values)
    if values is None:
        raise ValueError("instance needs 'values' or 'bids'")
    curves = [DiscountCurve(tuple(c)) for c in d["curves"]]
    quantum = d.get("quantum", DEFAULT_QUANTUM)
    if len(curves) == 1:
        return PositionInstance(values, bids, curves[0], quantum)
    return AdTypesInstance(values, bids, curves, quantum)


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def dump_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2)
        fh.write("\n")
