"""First-price sanity sweep and the welfare-loss bound experiment."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..core import DiscountCurve, PositionInstance
from ..mechanisms import make_mechanism
from ..metrics import ic_envy, ic_regret, truthful_profile, verify_theorems
from .csvio import write_csv
from .generator import GeneratorConfig, generate_instances

GFP_COLUMNS = ["source", "auction_id", "bidder", "ic_envy", "ic_regret"]
SWL_COLUMNS = [
    "auction_id", "mechanism", "status", "total_envy", "swl", "sw_opt", "sw_declared", "semi_smooth",
]


def single_item_gfp_rows() -> list[tuple]:
    """The one-slot first-price fixture, values (10, 8): envy 0, regret 1.99 for the winner."""
    inst = PositionInstance.truthful([10, 8], DiscountCurve((1,)))
    return _gfp_rows(inst, "example", 0)


def _gfp_rows(inst: PositionInstance, source: str, auction_id: int) -> list[tuple]:
    mech = make_mechanism("gfp", inst)
    rows = []
    for i in range(inst.n):
        base = mech(truthful_profile(inst, i))
        rows.append((source, auction_id, i, ic_envy(i, inst, base), ic_regret(i, inst, mech, base)[0]))
    return rows


@dataclass
class GfpSanityResult:
    rows: list[tuple]
    n_generated: int
    frac_envy_ge_regret: Optional[float]
    max_regret_minus_envy: Optional[Fraction]

    def summary(self) -> dict:
        return {
            "rows": self.n_generated,
            "frac_envy_ge_regret": self.frac_envy_ge_regret,
            "max_regret_minus_envy": None if self.max_regret_minus_envy is None else float(self.max_regret_minus_envy),
        }

    def write(self, path) -> None:
        write_csv(path, GFP_COLUMNS, self.rows)


def gfp_sanity_experiment(cfg: GeneratorConfig, count: int, include_example: bool = True) -> GfpSanityResult:
    """GFP on a shared curve (the first curve class), one row per (auction, bidder).

    The summary covers generated rows only; the single-item fixture rows are
    tagged ``source=example``.
    """
    cfg = dataclasses.replace(cfg, position=True)
    rows = single_item_gfp_rows() if include_example else []
    gen = []
    for k, inst in enumerate(generate_instances(cfg, count)):
        gen.extend(_gfp_rows(inst, "generated", k))
    rows.extend(gen)
    if not gen:
        return GfpSanityResult(rows, 0, None, None)
    ok = sum(1 for r in gen if r[3] >= r[4])
    worst = max(r[4] - r[3] for r in gen)
    return GfpSanityResult(rows, len(gen), ok / len(gen), worst)


@dataclass
class SwlBoundResult:
    rows: list[tuple] = field(default_factory=list)

    @property
    def applicable(self) -> int:
        return sum(1 for r in self.rows if r[2] != "not applicable")

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if r[2] == "fails")

    @property
    def semi_smooth_failures(self) -> int:
        return sum(1 for r in self.rows if r[2] != "not applicable" and not r[7])

    def summary(self) -> dict:
        return {
            "auctions": len(self.rows),
            "applicable": self.applicable,
            "bound_failures": self.failures,
            "semi_smooth_failures_when_applicable": self.semi_smooth_failures,
        }

    def write(self, path) -> None:
        write_csv(path, SWL_COLUMNS, self.rows)


def swl_bound_experiment(
    cfg: GeneratorConfig, count: int, mechanism: Optional[str] = None, shading: Optional[int] = 16
) -> SwlBoundResult:
    """Check ``sum envy >= SWL / 4`` on shaded bids ``b = v / shading``.

    ``mechanism`` defaults to ``gfp`` for position configs and
    ``extended-gsp`` otherwise; ``shading=None`` keeps the config's value.
    """
    if shading is not None:
        cfg = dataclasses.replace(cfg, shading=shading)
    tag = mechanism or ("gfp" if cfg.position else "extended-gsp")
    out = SwlBoundResult()
    for k, inst in enumerate(generate_instances(cfg, count)):
        rep = verify_theorems(inst, make_mechanism(tag, inst))
        out.rows.append((
            k, tag, rep.swl_bound_status, rep.total_envy, rep.swl, rep.sw_opt, rep.sw_declared,
            all(b.semi_smooth_ok for b in rep.bidders),
        ))
    return out
