"""Auction mechanisms with IC-Envy / IC-Regret diagnostics."""

from .core import (
    AdTypesInstance,
    DiscountCurve,
    Money,
    Outcome,
    PositionInstance,
    UNASSIGNED,
    discounted_value,
    load_instance,
    to_money,
    utility,
)
from .position import PaymentMatrix, RegularMechanism, build_payment_matrix, rank_allocate, run_regular
from .assignment import DualCertificate, solve_min_dual_mwpm, verify_structure
from .pricing import AdTypesMechanism, extended_gsp_outcome, greedy_outcome, vcg_outcome
from .metrics import DiagnosticsReport, ic_envy, ic_regret, verify_theorems
from .mechanisms import make_mechanism

__version__ = "0.1.0"
