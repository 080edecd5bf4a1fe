"""Build a re-runnable mechanism for an instance from its string tag."""

from __future__ import annotations

from .core import AdTypesInstance, Instance, PositionInstance
from .position import RegularMechanism
from .pricing import PRICING_TAGS, AdTypesMechanism

POSITION_TAGS = ("vcg", "gsp", "gfp")
ALL_TAGS = ("vcg", "gsp", "gfp", "extended-gsp", "greedy-gsp", "greedy-externality")


def make_mechanism(tag: str, instance: Instance):
    """Position tags need one shared curve; Ad Types tags accept either instance kind.

    ``vcg`` on an Ad Types instance runs the matching-based VCG.
    """
    tag = tag.lower()
    if isinstance(instance, PositionInstance):
        if tag in POSITION_TAGS:
            return RegularMechanism(instance.curve, tag)
        if tag in PRICING_TAGS:
            return AdTypesMechanism((instance.curve,) * instance.n, tag, instance.quantum)
    elif isinstance(instance, AdTypesInstance):
        if tag in PRICING_TAGS:
            return AdTypesMechanism(instance.curves, tag, instance.quantum)
        if tag in POSITION_TAGS:
            if len(set(instance.curves)) != 1:
                raise ValueError(f"{tag!r} needs every bidder to share one curve")
            return RegularMechanism(instance.curves[0], tag)
    raise ValueError(f"unknown mechanism {tag!r}; expected one of {ALL_TAGS}")
