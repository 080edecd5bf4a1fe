"""Per-bidder envy profiles labelled with regret, for greedy Ad Types auctions.

Each row describes bidder ``i`` in the run where it bids its value: for every
slot ``j`` the unclamped envy ``v_i * alpha_ij - price_j - u_i``, the
discounted value ``v_i * alpha_ij`` and the slot's realized price (0 when
empty), plus the IC-Regret label.

The fast path works in exact integers (bids times curve entries, scaled by
their common denominator) and evaluates all deviation bids of a bidder at
once with numpy. Greedy fills each slot by comparing discounted bids at that
slot only, so the deviator's allocation and price can change only where its
own discounted bid crosses a rival's at the same slot; those crossings plus
the rival bids form the candidate set. Results equal the generic Fraction
path exactly (see the tests); an auction whose integers could overflow int64
falls back to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from ..core import AdTypesInstance, PositionInstance
from ..mechanisms import make_mechanism
from ..metrics import ic_regret, truthful_profile
from ..pricing import greedy_allocate, greedy_payments
from .csvio import read_csv, render_csv
from .generator import GeneratorConfig, generate_instances

DATASET_MECHANISMS = ("greedy-gsp", "greedy-externality")
_INT_LIMIT = 2**62


@dataclass(frozen=True)
class DatasetRow:
    auction_id: int
    bidder_id: int
    envy: tuple
    value: tuple
    price: tuple
    label_regret: float


def dataset_columns(m: int) -> list[str]:
    cols = ["auction_id", "bidder_id"]
    for name in ("envy", "value", "price"):
        cols += [f"{name}_{j + 1}" for j in range(m)]
    return cols + ["label_regret"]


@dataclass
class Dataset:
    auction_id: np.ndarray
    bidder_id: np.ndarray
    envy: np.ndarray
    value: np.ndarray
    price: np.ndarray
    label: np.ndarray
    comment: str = ""

    @property
    def m(self) -> int:
        return self.envy.shape[1]

    def __len__(self) -> int:
        return len(self.label)

    def __iter__(self) -> Iterator[DatasetRow]:
        for k in range(len(self)):
            yield DatasetRow(
                int(self.auction_id[k]), int(self.bidder_id[k]),
                tuple(self.envy[k]), tuple(self.value[k]), tuple(self.price[k]), float(self.label[k]),
            )

    def features(self, kind: str) -> np.ndarray:
        kind = kind.replace("-", "_")
        if kind == "envy":
            return self.envy
        if kind == "price_value":
            return np.hstack([self.value, self.price])
        raise ValueError(f"unknown feature set {kind!r}; expected envy or price_value")

    def to_csv_text(self) -> str:
        table = np.hstack([self.envy, self.value, self.price, self.label[:, None]])
        rows = ([int(a), int(b), *vals] for a, b, vals in zip(self.auction_id, self.bidder_id, table.tolist()))
        return render_csv(dataset_columns(self.m), rows, self.comment or None)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        header, rows = read_csv(path)
        m = (len(header) - 3) // 3
        if header != dataset_columns(m):
            raise ValueError(f"{path}: not a dataset file (unexpected header)")
        arr = np.array(rows, dtype=float).reshape(len(rows), len(header))
        return cls(
            arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64),
            arr[:, 2 : 2 + m], arr[:, 2 + m : 2 + 2 * m], arr[:, 2 + 2 * m : 2 + 3 * m], arr[:, -1],
        )


# --- exact integer representation --------------------------------------------


@dataclass
class _Scaled:
    """Bids/values in units of 1/bid_den, curve entries in 1/curve_den."""

    bids: list[int]
    values: list[int]
    alpha: list[list[int]]
    quantum: int
    scale: int  # weight units per currency unit

    @property
    def weights(self) -> list[list[int]]:
        return [[b * a for a in row] for b, row in zip(self.bids, self.alpha)]


def _scale(inst: AdTypesInstance) -> _Scaled:
    curves = [c.weights for c in inst.curves]
    a_den = math.lcm(1, *(a.denominator for c in curves for a in c))
    q = inst.quantum
    b_den = math.lcm(q.denominator, *(x.denominator for x in inst.bids + inst.values))
    return _Scaled(
        bids=[int(b * b_den) for b in inst.bids],
        values=[int(v * b_den) for v in inst.values],
        alpha=[[int(a * a_den) for a in c] for c in curves],
        quantum=int(q * b_den),
        scale=a_den * b_den,
    )


def _around(num: int, den: int, q: int) -> list[int]:
    """Grid neighbourhood of ``num/den`` (grid step ``q``), matching the generic oracle."""
    if num % (den * q) == 0:
        x = num // den
        return [x - q, x, x + q]
    lo = (num // (den * q)) * q
    return [lo, lo + q]


def _candidates(s: _Scaled, i: int) -> np.ndarray:
    q = s.quantum
    rivals = [b for k, b in enumerate(s.bids) if k != i]
    pts = {0, (max(rivals) if rivals else 0) + q}
    for c in set(rivals):
        pts.update(_around(c, 1, q))
    W = s.weights
    own = s.alpha[i]
    for j, a in enumerate(own):
        if a <= 0:
            continue
        for k in range(len(s.bids)):
            if k != i:
                pts.update(_around(W[k][j], a, q))
    return np.array(sorted(p for p in pts if p >= 0), dtype=np.int64)


def _deviation_utilities(s: _Scaled, i: int, rule: str, bids: np.ndarray) -> np.ndarray:
    """Utility of bidder ``i`` for each bid in ``bids``, ranking ``i`` last on ties."""
    n, m = len(s.bids), len(s.alpha[0])
    W = np.array(s.weights, dtype=np.int64)
    K = len(bids)
    Wk = np.broadcast_to(W, (K, n, m)).copy()
    Wk[:, i, :] = bids[:, None] * np.array(s.alpha[i], dtype=np.int64)[None, :]
    rank = np.array([k if k < i else k - 1 for k in range(n)], dtype=np.int64)
    rank[i] = n - 1
    tiebreak = (n - 1 - rank)[None, :]
    free = np.ones((K, n), dtype=bool)
    rows = np.arange(K)
    slot = np.full(K, -1, dtype=np.int64)
    gsp_price = np.zeros(K, dtype=np.int64)
    others = np.zeros(K, dtype=np.int64)
    for j in range(min(m, n)):
        key = np.where(free, Wk[:, :, j] * n + tiebreak, -1)
        win = key.argmax(axis=1)
        key[rows, win] = -1
        second = key.argmax(axis=1)
        has_second = key[rows, second] >= 0
        runner = np.where(has_second, Wk[rows, second, j], 0)
        mine = win == i
        slot[mine] = j
        gsp_price[mine] = runner[mine]
        others += np.where(mine, 0, Wk[rows, win, j])
        free[rows, win] = False
    if rule == "gsp":
        price = gsp_price
    else:
        order = [k for k in range(n) if k != i] + [i]
        without, _ = greedy_allocate(s.weights, order, skip=i)
        base = sum(s.weights[k][t] for k, t in enumerate(without) if t is not None)
        price = base - others
    alpha_i = np.array(s.alpha[i] + [0], dtype=np.int64)
    value = s.values[i] * alpha_i[slot]  # slot -1 hits the trailing 0
    return np.where(slot >= 0, value - price, 0)


def _fast_auction_rows(inst: AdTypesInstance, rule: str) -> Optional[tuple[list, list, list, list, int]]:
    s = _scale(inst)
    n, m = inst.n, inst.m
    peak = max(max(s.bids + s.values) + s.quantum, 1) * max(max(r) for r in s.alpha)
    if peak * n * (n + 1) * m >= _INT_LIMIT:
        return None
    envy, value, price, label = [], [], [], []
    cache: dict = {}
    for i in range(n):
        bids = list(s.bids)
        bids[i] = s.values[i]
        key = tuple(bids)
        if key not in cache:
            W = [[b * a for a in row] for b, row in zip(bids, s.alpha)]
            cache[key] = greedy_payments(W, rule)
        slots, pays = cache[key]
        slot_price = [0] * m
        for k, t in enumerate(slots):
            if t is not None:
                slot_price[t] = pays[k]
        vals = [s.values[i] * a for a in s.alpha[i]]
        own = slots[i]
        u_own = vals[own] - pays[i] if own is not None else 0
        best = int(_deviation_utilities(s, i, rule, _candidates(s, i)).max())
        envy.append([vals[j] - slot_price[j] - u_own for j in range(m)])
        value.append(vals)
        price.append(slot_price)
        label.append(max(0, best - u_own))
    return envy, value, price, label, s.scale


def _exact_auction_rows(inst: AdTypesInstance, rule: str) -> tuple[list, list, list, list]:
    mech = make_mechanism(rule, inst)
    m = inst.m
    envy, value, price, label = [], [], [], []
    for i in range(inst.n):
        base = mech(truthful_profile(inst, i))
        prices = base.slot_prices(m)
        curve = inst.curve_of(i)
        v = inst.values[i]
        vals = [v * a for a in curve.weights]
        u_own = curve.at(base.assignment[i]) * v - base.payments[i]
        envy.append([vals[j] - prices[j] - u_own for j in range(m)])
        value.append(vals)
        price.append(prices)
        label.append(ic_regret(i, inst, mech, base)[0])
    return envy, value, price, label


def auction_rows(inst, rule: str, fast: bool = True) -> tuple[list, list, list, list]:
    """Exact (Fraction) envy/value/price/label lists for one auction."""
    if isinstance(inst, PositionInstance):
        inst = AdTypesInstance.from_position(inst)
    res = _fast_auction_rows(inst, rule.removeprefix("greedy-")) if fast else None
    if res is None:
        return _exact_auction_rows(inst, rule if rule.startswith("greedy-") else "greedy-" + rule)
    envy, value, price, label, scale = res
    exact = [[[Fraction(x, scale) for x in row] for row in col] for col in (envy, value, price)]
    return (*exact, [Fraction(x, scale) for x in label])


def build_dataset(cfg: GeneratorConfig, count: int, mechanism: str = "greedy-gsp", fast: bool = True) -> Dataset:
    if mechanism not in DATASET_MECHANISMS:
        raise ValueError(f"dataset mechanism must be one of {DATASET_MECHANISMS}")
    rule = mechanism.removeprefix("greedy-")
    ids, bidders, blocks, labels = [], [], [], []
    for k, inst in enumerate(generate_instances(cfg, count)):
        if isinstance(inst, PositionInstance):
            inst = AdTypesInstance.from_position(inst)
        res = _fast_auction_rows(inst, rule) if fast else None
        if res is not None:
            envy, value, price, label, scale = res
            blk = np.array([e + v + p for e, v, p in zip(envy, value, price)], dtype=np.float64) / scale
            lab = np.array(label, dtype=np.float64) / scale
        else:
            envy, value, price, label = _exact_auction_rows(inst, mechanism)
            blk = np.array([[float(x) for x in e + v + p] for e, v, p in zip(envy, value, price)])
            lab = np.array([float(x) for x in label])
        ids.extend([k] * inst.n)
        bidders.extend(range(inst.n))
        blocks.append(blk)
        labels.append(lab)
    m = cfg.n_slots
    table = np.vstack(blocks) if blocks else np.zeros((0, 3 * m))
    return Dataset(
        auction_id=np.array(ids, dtype=np.int64),
        bidder_id=np.array(bidders, dtype=np.int64),
        envy=table[:, :m],
        value=table[:, m : 2 * m],
        price=table[:, 2 * m :],
        label=np.concatenate(labels) if labels else np.zeros(0),
        comment=cfg.header() + f" mechanism={mechanism}",
    )
