"""Command-line interface.

Subcommands: gen, diam, cost, fig2, capacity, manipulability, scatter,
budget-sweep, coe.  Exit codes: 0 success, 2 configuration error,
3 infeasible computation (enumeration or recursion caps), 4 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .audit import CostCapError, exact_cost, random_audit
from .dataspace import DataError, gen_synthetic, load_csv, measure_mu
from .diameter import (ReductionConfig, diam_dictionary_closed_form,
                       diam_empirical, diam_exhaustive_closed_form)
from .harness import (ConfigError, load_config, run_budget_sweep, run_capacity,
                      run_coe, run_fig2, run_manipulability, run_scatter)
from .hypotheses import (EnumerationCapError, dictionary, exhaustive, trained)
from .metrics import fit_star


def _dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--csv", help="dataset CSV path (default: synthetic)")
    p.add_argument("--sensitive-column", default="sensitive")
    p.add_argument("--label-column", default="label")
    p.add_argument("--n", type=int, default=1000, help="synthetic size")
    p.add_argument("--p-sensitive", type=float, default=0.3)
    p.add_argument("--data-seed", type=int, default=0)


def _load_dataset(args):
    if args.csv:
        return load_csv(args.csv, args.sensitive_column, args.label_column)
    return gen_synthetic(args.n, args.p_sensitive, seed=args.data_seed)


def _class_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hypothesis-class", default="exhaustive",
                   help="exhaustive | dict | linear | perceptron | tree | gbdt")
    p.add_argument("--memory", type=int, default=0, help="dictionary memory m")
    p.add_argument("--hyperparams", default="{}",
                   help="JSON hyperparameters for trained classes")


def _build_class(args):
    name = args.hypothesis_class
    if name == "exhaustive":
        return exhaustive()
    if name == "dict":
        return dictionary(args.memory)
    return trained(name, **json.loads(args.hyperparams))


def _config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--outdir")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--budget-fraction", type=float)
    p.add_argument("--capacity-draws", type=int)
    p.add_argument("--max-classes-per-family", type=int)
    p.add_argument("--families", nargs="+")


def _resolve_config(args):
    keys = ("outdir", "seed", "workers", "reps", "budget_fraction",
            "capacity_draws", "max_classes_per_family", "families")
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    return load_config(args.config, overrides)


def cmd_gen(args) -> int:
    dataset = gen_synthetic(args.n, args.p_sensitive, seed=args.data_seed)
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        feature_cols = [n for n in dataset.feature_names if n != "sensitive"]
        writer.writerow(feature_cols + ["sensitive", "label"])
        keep = [i for i, n in enumerate(dataset.feature_names) if n != "sensitive"]
        for p in dataset.points:
            writer.writerow([repr(p.features[i]) for i in keep]
                            + [p.sensitive, p.label])
    print(f"wrote {dataset.n} points to {args.out}")
    return 0


def cmd_diam(args) -> int:
    dataset = _load_dataset(args)
    cls = _build_class(args)
    audit = random_audit(dataset, args.audit_fraction, args.audit_fraction, args.seed)
    out = {"class_id": cls.class_id(), "audit_size": len(audit)}
    if cls.kind == "Exhaustive":
        out["diameter"] = diam_exhaustive_closed_form(audit.queries, dataset)
        out["kind"] = "closed_form"
    elif cls.kind == "Dictionary":
        h_star = fit_star(cls, dataset, dataset.labels)
        out["diameter"] = diam_dictionary_closed_form(h_star, cls.memory,
                                                      audit.queries, dataset)
        out["kind"] = "closed_form"
    else:
        h_star = fit_star(cls, dataset, dataset.labels)
        res = diam_empirical(cls, h_star, audit.queries, dataset,
                             ReductionConfig(trainer=cls))
        out["diameter"] = res.value
        out["kind"] = res.kind
        out["certified"] = res.certified
        out["mu_star"] = measure_mu(h_star, range(dataset.n), dataset)
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_cost(args) -> int:
    dataset = _load_dataset(args)
    cls = _build_class(args)
    value = exact_cost(cls, dataset, args.epsilon, cap=args.cap)
    print(json.dumps({"class_id": cls.class_id(), "epsilon": args.epsilon,
                      "cost": value}, sort_keys=True))
    return 0


_RUNNERS = {
    "fig2": run_fig2,
    "capacity": run_capacity,
    "manipulability": run_manipulability,
    "scatter": run_scatter,
    "budget-sweep": run_budget_sweep,
    "coe": run_coe,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpaudit",
        description="Simulation engine for manipulation-proof audits of "
                    "binary classifiers on finite input spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--p-sensitive", type=float, default=0.3)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("diam", help="version-space diameter after a random audit")
    _dataset_args(p)
    _class_args(p)
    p.add_argument("--audit-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_diam)

    p = sub.add_parser("cost", help="exact adaptive query cost")
    _dataset_args(p)
    _class_args(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--cap", type=int, default=2_000_000)
    p.set_defaults(fn=cmd_cost)

    for name, runner in _RUNNERS.items():
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _config_args(p)
        p.set_defaults(fn=lambda args, _r=runner: _run_experiment(args, _r))
    return parser


def _run_experiment(args, runner) -> int:
    cfg = _resolve_config(args)
    out = runner(cfg)
    print(json.dumps({k: v for k, v in out.items() if k != "rows"}, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, json.JSONDecodeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (EnumerationCapError, CostCapError) as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return 3
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
