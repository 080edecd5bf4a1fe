"""Command line entry point: ``icenvy {run,check,simulate,dataset,regress}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .core import load_instance
from .mechanisms import ALL_TAGS, make_mechanism
from .metrics import verify_theorems

log = logging.getLogger("icenvy")


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_run(args) -> int:
    inst = load_instance(args.instance)
    mech = make_mechanism(args.mechanism, inst)
    out = mech(inst.bids)
    _emit({"mechanism": args.mechanism, "outcome": out.to_dict()})
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(verify_theorems(inst, mech).to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def cmd_check(args) -> int:
    inst = load_instance(args.instance)
    report = verify_theorems(inst, make_mechanism(args.mechanism, inst))
    _emit(report.to_dict())
    return 0 if report.envy_dominates_regret else 1


def cmd_simulate(args) -> int:
    from .harness.experiments import gfp_sanity_experiment, swl_bound_experiment
    from .harness.generator import GeneratorConfig, load_config

    cfg = load_config(args.config) if args.config else GeneratorConfig()
    if args.experiment == "gfp-sanity":
        res = gfp_sanity_experiment(cfg, args.count)
    else:
        res = swl_bound_experiment(cfg, args.count, mechanism=args.mechanism, shading=args.shading)
    res.write(args.out)
    _emit(res.summary())
    return 0


def cmd_dataset(args) -> int:
    from .harness.dataset import build_dataset
    from .harness.generator import GeneratorConfig, load_config

    cfg = load_config(args.config) if args.config else GeneratorConfig()
    data = build_dataset(cfg, args.count, args.mechanism)
    data.to_csv(args.out)
    _emit({"rows": len(data), "out": args.out})
    return 0


def cmd_regress(args) -> int:
    from .harness.dataset import Dataset
    from .harness.regression import dataset_fit_eval

    data = Dataset.from_csv(args.data)
    _emit({"features": args.features, **dataset_fit_eval(data, args.features, args.seed)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="icenvy", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one mechanism on an instance file")
    run.add_argument("--instance", required=True)
    run.add_argument("--mechanism", required=True, choices=ALL_TAGS)
    run.add_argument("--report", help="also write the diagnostics report as JSON")
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="diagnostics report; exit 1 if some bidder's regret exceeds its envy")
    check.add_argument("--instance", required=True)
    check.add_argument("--mechanism", required=True, choices=ALL_TAGS)
    check.set_defaults(func=cmd_check)

    sim = sub.add_parser("simulate", help="run an experiment over generated instances")
    sim.add_argument("--config")
    sim.add_argument("--count", type=int, default=100)
    sim.add_argument("--experiment", required=True, choices=("gfp-sanity", "swl-bound"))
    sim.add_argument("--mechanism", choices=ALL_TAGS, help="swl-bound only")
    sim.add_argument("--shading", type=int, default=16, help="swl-bound only: bids = values / shading")
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    ds = sub.add_parser("dataset", help="export envy/value/price features with regret labels")
    ds.add_argument("--config")
    ds.add_argument("--count", type=int, default=1000)
    ds.add_argument("--mechanism", default="greedy-gsp", choices=("greedy-gsp", "greedy-externality"))
    ds.add_argument("--out", required=True)
    ds.set_defaults(func=cmd_dataset)

    reg = sub.add_parser("regress", help="OLS fit on a dataset CSV, held-out R^2")
    reg.add_argument("--data", required=True)
    reg.add_argument("--features", required=True, choices=("envy", "price-value"))
    reg.add_argument("--seed", type=int, default=0)
    reg.set_defaults(func=cmd_regress)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
