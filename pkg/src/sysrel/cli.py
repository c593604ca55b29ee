"""Command line front end.

Subcommands::

    sysrel run CONFIG [-o report.json] [--format json|csv] [--seed N]
    sysrel reference CONFIG          plain fine subset simulation on the
                                     true limit states (no surrogates)
    sysrel repeat CONFIG --n K       K seeds, median/quartile summary
    sysrel validate CONFIG           config check only

Exit codes: 0 converged run (or valid config), 2 not-converged, 1 error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import learning
from .config import (
    ConfigError,
    history_to_csv,
    learn_config_from_config,
    load_config,
    problem_from_config,
    report_to_json,
    seeds_from_config,
    sus_config_from_config,
    validate_config,
)
from .subset import SusConfig, reliability_index, subset_simulation


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sysrel",
                                description="Active-learning system reliability analysis")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the active-learning analysis")
    run.add_argument("config")
    run.add_argument("-o", "--output", default=None, help="report path")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--seed", type=int, default=None,
                     help="derive all four seed streams from this value")

    ref = sub.add_parser("reference", help="fine subset simulation on the true system")
    ref.add_argument("config")
    ref.add_argument("--seed", type=int, default=None)

    rep = sub.add_parser("repeat", help="repeat the analysis over several seeds")
    rep.add_argument("config")
    rep.add_argument("--n", type=int, default=15)
    rep.add_argument("--seed", type=int, default=0, help="base seed")
    rep.add_argument("-o", "--output", default=None, help="summary path")

    val = sub.add_parser("validate", help="validate a config file")
    val.add_argument("config")
    return p


def _setup(args):
    cfg = load_config(args.config)
    validate_config(cfg)
    problem = problem_from_config(cfg)
    learn_cfg = learn_config_from_config(cfg)
    sus_cfg = sus_config_from_config(cfg, "sus", learning.DEFAULT_SUS)
    sus_final = sus_config_from_config(cfg, "sus_final", learning.DEFAULT_SUS_FINAL)
    seeds = seeds_from_config(cfg, getattr(args, "seed", None))
    return cfg, problem, learn_cfg, sus_cfg, sus_final, seeds


def _cmd_run(args) -> int:
    cfg, problem, learn_cfg, sus_cfg, sus_final, seeds = _setup(args)
    report = learning.run(problem, learn_cfg, sus_cfg, sus_final, seeds)
    if args.format == "csv":
        out = history_to_csv(report)
    else:
        out = report_to_json(report, cfg)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        print(out)
    err = ""
    if problem.reference and "beta" in problem.reference:
        rel = abs(report.beta - problem.reference["beta"]) / problem.reference["beta"]
        err = f"  eps_beta={rel:.3e}"
    print(f"pf={report.pf:.6e}  beta={report.beta:.4f}{err}  "
          f"N_eval={report.n_eval} (total {report.total_eval})  "
          f"converged={report.converged}", file=sys.stderr)
    return 0 if report.converged else 2


def _cmd_reference(args) -> int:
    cfg, problem, _, _, sus_final, seeds = _setup(args)
    model = problem.input_model
    true_lsf = problem.true_system_lsf()

    def lsf_u(u):
        return true_lsf(model.from_standard(np.atleast_2d(u)))

    cfg_sus = dataclasses.replace(sus_final, seed=seeds.sus)
    res = subset_simulation(lsf_u, model.dim, cfg_sus)
    doc = {
        "problem": problem.name,
        "pf": res.pf,
        "beta": reliability_index(res.pf),
        "cov": res.cov,
        "n_eval": res.n_eval,
        "converged": res.converged,
    }
    print(json.dumps(doc, indent=2))
    return 0 if res.converged else 2


def _cmd_repeat(args) -> int:
    cfg, problem, learn_cfg, sus_cfg, sus_final, _ = _setup(args)
    reports = []
    for i in range(args.n):
        seeds = learning.Seeds.derive(int(
            np.random.SeedSequence([args.seed, i]).generate_state(1)[0]))
        rep = learning.run(problem, learn_cfg, sus_cfg, sus_final, seeds)
        reports.append(rep)
        print(f"seed {i}: beta={rep.beta:.4f} pf={rep.pf:.4e} "
              f"N_eval={rep.n_eval} converged={rep.converged}", file=sys.stderr)

    def q(vals, p):
        return float(np.quantile(np.asarray(vals, dtype=float), p))

    betas = [r.beta for r in reports]
    evals = [r.total_eval for r in reports]
    summary = {
        "problem": problem.name,
        "repetitions": args.n,
        "beta": {"median": q(betas, 0.5), "q1": q(betas, 0.25), "q3": q(betas, 0.75)},
        "pf": {"median": q([r.pf for r in reports], 0.5)},
        "total_eval": {"median": q(evals, 0.5), "q1": q(evals, 0.25), "q3": q(evals, 0.75)},
        "n_eval_median": [
            q([r.n_eval[j] for r in reports], 0.5)
            for j in range(len(reports[0].n_eval))
        ],
        "converged": sum(r.converged for r in reports),
    }
    if problem.reference and "beta" in problem.reference:
        ref = problem.reference["beta"]
        summary["eps_beta_median"] = q(
            [abs(r.beta - ref) / ref for r in reports], 0.5)
    out = json.dumps(summary, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    print(out)
    return 0


def _cmd_validate(args) -> int:
    validate_config(load_config(args.config))
    print("config OK")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "reference": _cmd_reference,
        "repeat": _cmd_repeat,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
