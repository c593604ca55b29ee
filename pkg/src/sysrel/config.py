"""JSON configuration and report handling for the command line front end.

A config document describes the problem (builtin or explicit inputs +
components), surrogate choice, learning and subset-simulation parameters
and seeds. Reports are JSON documents echoing the config so that a run can
be reproduced bit-for-bit from its own report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .benchmarks import BUILTINS, ProblemSpec, expression_limit_state
from .composition import Ref, parse_composition, referenced_indices
from .inputs import InputModel, Marginal
from .learning import LearnConfig, Seeds
from .subset import SusConfig


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _get(d: dict, key: str, path: str, required: bool = True, default=None):
    if key not in d:
        if required:
            raise ConfigError(f"missing field {path}.{key}")
        return default
    return d[key]


def _marginal_from_config(entry: dict, path: str) -> Marginal:
    kind = _get(entry, "kind", path)
    try:
        if kind == "uniform":
            lo, hi = _get(entry, "bounds", path)
            return Marginal("uniform", float(lo), float(hi))
        mean = float(_get(entry, "mean", path))
        if "std" in entry:
            return Marginal(kind, mean, float(entry["std"]), param2_is_std=True)
        return Marginal(kind, mean, float(_get(entry, "cov", path)))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid marginal at {path}: {exc}") from exc


def _remap_expression(text: str, cmap: list[int], path: str):
    """Parse a synthetic limit state over global x-identifiers and remap
    references onto component subvector positions."""
    expr = parse_composition(text, prefix="x")
    pos = {g: i for i, g in enumerate(cmap)}
    missing = [i + 1 for i in referenced_indices(expr) if i not in pos]
    if missing:
        raise ConfigError(
            f"{path}.expression references x{missing[0]} which is not in its map")

    def remap(node):
        if isinstance(node, Ref):
            return Ref(node.name, pos[node.index])
        if hasattr(node, "args"):
            return type(node)(node.kind, tuple(remap(a) for a in node.args))
        if hasattr(node, "base"):
            return type(node)(remap(node.base), node.exponent)
        if hasattr(node, "left"):
            return type(node)(remap(node.left), remap(node.right))
        return node

    return remap(expr)


def problem_from_config(cfg: dict) -> ProblemSpec:
    if "problem" in cfg:
        spec = cfg["problem"]
        name = _get(spec, "builtin", "problem")
        if name not in BUILTINS:
            raise ConfigError(
                f"unknown builtin problem {name!r}; available: {sorted(BUILTINS)}")
        params = spec.get("params", {})
        return BUILTINS[name](**params)

    inputs = _get(cfg, "inputs", "$")
    if not isinstance(inputs, list) or not inputs:
        raise ConfigError("inputs must be a non-empty list")
    marginals = tuple(
        _marginal_from_config(e, f"inputs[{i}]") for i, e in enumerate(inputs)
    )
    components = _get(cfg, "components", "$")
    if not isinstance(components, list) or not components:
        raise ConfigError("components must be a non-empty list")
    maps, lsfs = [], []
    for i, comp in enumerate(components):
        path = f"components[{i}]"
        cmap = [int(v) for v in _get(comp, "map", path)]
        if any(v < 0 or v >= len(marginals) for v in cmap):
            raise ConfigError(f"{path}.map index outside [0, {len(marginals)})")
        if "expression" in comp:
            expr = _remap_expression(comp["expression"], cmap, path)
            lsfs.append(expression_limit_state(expr, len(cmap)))
        else:
            raise ConfigError(f"{path} needs an 'expression' "
                              "(builtin limit states come via the 'problem' field)")
        maps.append(tuple(cmap))
    composition = _get(cfg, "composition", "$")
    reference = cfg.get("reference")
    try:
        return ProblemSpec(
            name=cfg.get("name", "custom"),
            input_model=InputModel(marginals, tuple(maps)),
            limit_states=tuple(lsfs),
            composition=composition,
            reference=reference,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def learn_config_from_config(cfg: dict) -> LearnConfig:
    sur = cfg.get("surrogate", {})
    lrn = cfg.get("learning", {})
    try:
        return LearnConfig(
            surrogate=sur.get("kind", "pck"),
            pce_degree=int(sur.get("degree", 3)),
            kriging_trend=sur.get("trend", "linear"),
            kernel=sur.get("kernel", "matern52"),
            alpha=float(lrn.get("alpha", 0.01)),
            n_usys=int(lrn.get("n_usys", 256)),
            eps_bar=float(lrn.get("eps_bar", 5e-3)),
            streak_required=int(lrn.get("streak", 3)),
            n_max=lrn.get("n_max"),
            max_iterations=int(lrn.get("max_iterations", 50)),
            bounds_mode=lrn.get("bounds_mode", "auto"),
            n_sobol=int(lrn.get("n_sobol", 4096)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid surrogate/learning config: {exc}") from exc


def sus_config_from_config(cfg: dict, key: str, default: SusConfig) -> SusConfig:
    sub = cfg.get(key, {})
    try:
        return SusConfig(
            samples_per_level=int(sub.get("n_level", default.samples_per_level)),
            p0=float(sub.get("p0", default.p0)),
            max_levels=int(sub.get("max_levels", default.max_levels)),
            rho=float(sub.get("rho", default.rho)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid {key} config: {exc}") from exc


def seeds_from_config(cfg: dict, override: int | None = None) -> Seeds:
    if override is not None:
        return Seeds.derive(override)
    if "seeds" in cfg:
        s = cfg["seeds"]
        if "global" in s and len(s) == 1:
            return Seeds.derive(int(s["global"]))
        try:
            return Seeds(
                global_=int(_get(s, "global", "seeds")),
                sus=int(_get(s, "sus", "seeds")),
                usys=int(_get(s, "usys", "seeds")),
                sobol=int(_get(s, "sobol", "seeds")),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid seeds: {exc}") from exc
    return Seeds.derive(int(cfg.get("seed", 0)))


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def validate_config(cfg: dict):
    """Full validation pass; raises ConfigError naming the first bad field."""
    problem_from_config(cfg)
    learn_config_from_config(cfg)
    sus_config_from_config(cfg, "sus", SusConfig())
    sus_config_from_config(cfg, "sus_final", SusConfig(samples_per_level=100_000))
    seeds_from_config(cfg)


def report_to_json(report, cfg: dict) -> str:
    doc = report.to_dict()
    doc["config_echo"] = cfg
    return json.dumps(doc, indent=2)


def history_to_csv(report) -> str:
    lines = ["iteration,pf,beta,eps,pool_size,n_clusters,n_enriched"]
    for it in report.iterations:
        eps = "" if it.eps is None else repr(it.eps)
        lines.append(
            f"{it.iteration},{it.pf!r},{it.beta!r},{eps},"
            f"{it.pool_size},{it.n_clusters},{it.n_enriched}"
        )
    return "\n".join(lines) + "\n"
