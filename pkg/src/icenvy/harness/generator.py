"""Seeded lognormal instance generator.

Each instance draws from its own PCG64 stream spawned from the master seed,
so instance ``k`` is the same whatever ``count`` is and however the batch is
split across workers.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from ..core import AdTypesInstance, DiscountCurve, Instance, PositionInstance, money_str, to_money

RNG_ALGORITHM = "PCG64"


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    n_bidders: int = 6
    n_slots: int = 5
    mu: float = 0.0
    sigma: float = 1.0
    curve_classes: tuple = ("0.9", "0.7", "0.5")
    quantum: str = "0.01"
    # bids = values / shading; 1 means truthful
    shading: int = 1
    # one shared curve (the first class) instead of a class per bidder
    position: bool = False

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.n_bidders < 1 or self.n_slots < 1:
            raise ValueError("need at least one bidder and one slot")
        ratios = tuple(str(r) for r in self.curve_classes)
        object.__setattr__(self, "curve_classes", ratios)
        if not ratios or any(not (0 < to_money(r) <= 1) for r in ratios):
            raise ValueError("curve ratios must lie in (0, 1]")
        if to_money(self.quantum) <= 0:
            raise ValueError("quantum must be positive")
        if self.shading < 1:
            raise ValueError("shading must be >= 1")

    @property
    def money_quantum(self) -> Fraction:
        return to_money(self.quantum)

    def curves(self) -> list[DiscountCurve]:
        return [DiscountCurve.geometric(r, self.n_slots) for r in self.curve_classes]

    def header(self) -> str:
        """One-line provenance comment for CSV outputs."""
        fields = {k: "/".join(v) if isinstance(v, list) else v for k, v in self.to_dict().items()}
        return "# " + " ".join([f"generator={RNG_ALGORITHM}"] + [f"{k}={v}" for k, v in fields.items()])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["curve_classes"] = list(self.curve_classes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "curve_classes" in d:
            d["curve_classes"] = tuple(str(r) for r in d["curve_classes"])
        if "quantum" in d:
            d["quantum"] = str(d["quantum"])
        return cls(**d)


def load_config(path) -> GeneratorConfig:
    with open(path) as fh:
        return GeneratorConfig.from_dict(json.load(fh))


def _quantize(x: float, q: Fraction) -> Fraction:
    steps = max(1, round(x / float(q)))
    return steps * q


def generate_instances(cfg: GeneratorConfig, count: int) -> list[Instance]:
    if count <= 0:
        return []
    q = cfg.money_quantum
    curves = cfg.curves()
    out: list[Instance] = []
    for child in np.random.SeedSequence(cfg.seed).spawn(count):
        rng = np.random.Generator(np.random.PCG64(child))
        draws = rng.lognormal(cfg.mu, cfg.sigma, cfg.n_bidders)
        classes = rng.integers(len(curves), size=cfg.n_bidders)
        values = tuple(_quantize(float(x), q) for x in draws)
        bids = tuple(v / cfg.shading for v in values)
        if cfg.position:
            out.append(PositionInstance(values, bids, curves[0], q))
        else:
            out.append(AdTypesInstance(values, bids, tuple(curves[c] for c in classes), q))
    return out


def instance_digest(inst: Instance) -> str:
    """Stable text form, handy for determinism checks."""
    curves = [inst.curve] if isinstance(inst, PositionInstance) else inst.curves
    return ";".join([
        ",".join(money_str(v) for v in inst.values),
        ",".join(money_str(b) for b in inst.bids),
        "|".join(",".join(money_str(a) for a in c.weights) for c in curves),
    ])
