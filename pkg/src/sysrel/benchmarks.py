"""Built-in benchmark problems.

Each problem bundles an input model, vectorized component limit states on
physical subvectors, the composition text and (when known) the reference
solution used for error reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .composition import Node, eval_composition, parse_composition, referenced_indices
from .inputs import InputModel, Marginal


@dataclass
class ProblemSpec:
    name: str
    input_model: InputModel
    limit_states: Sequence[Callable[[np.ndarray], np.ndarray]]
    composition: str
    reference: dict | None = None

    def __post_init__(self):
        expr = parse_composition(self.composition)
        refs = referenced_indices(expr)
        if refs != set(range(len(self.limit_states))):
            raise ValueError(
                "composition must reference exactly the declared components")
        if self.reference and "pf" in self.reference:
            if not 0.0 < self.reference["pf"] < 1.0:
                raise ValueError("reference pf must lie in (0, 1)")

    def true_system_lsf(self):
        """h(g_1(x_1), ..., g_m(x_m)) on full physical points, batched."""
        expr = parse_composition(self.composition)
        maps = [list(cm) for cm in self.input_model.component_maps]

        def lsf(x: np.ndarray) -> np.ndarray:
            x = np.atleast_2d(np.asarray(x, dtype=float))
            z = np.column_stack([
                np.asarray(fn(x[:, cmap]), dtype=float)
                for fn, cmap in zip(self.limit_states, maps)
            ])
            return eval_composition(expr, z)

        return lsf


def four_branch(P: float = 7.0) -> ProblemSpec:
    """Series system of four branches over two standard normal inputs."""
    if P <= 0:
        raise ValueError("P must be positive")
    std_norm = Marginal("gaussian", 0.0, 1.0, param2_is_std=True)

    def g1(x):
        x = np.atleast_2d(x)
        return 3.0 + 0.1 * (x[:, 0] - x[:, 1]) ** 2 - (x[:, 0] + x[:, 1]) / math.sqrt(2)

    def g2(x):
        x = np.atleast_2d(x)
        return 3.0 + 0.1 * (x[:, 0] - x[:, 1]) ** 2 + (x[:, 0] + x[:, 1]) / math.sqrt(2)

    def g3(x):
        x = np.atleast_2d(x)
        return (x[:, 0] - x[:, 1]) + P / math.sqrt(2)

    def g4(x):
        x = np.atleast_2d(x)
        return (x[:, 1] - x[:, 0]) + P / math.sqrt(2)

    reference = None
    if P == 7.0:
        reference = {"pf": 2.239e-3, "beta": 2.842}
    elif P == 6.0:
        reference = {"pf": 4.484e-3, "beta": 2.613}
    return ProblemSpec(
        name=f"four_branch(P={P:g})",
        input_model=InputModel(
            marginals=(std_norm, std_norm),
            component_maps=((0, 1),) * 4,
        ),
        limit_states=(g1, g2, g3, g4),
        composition="min(g1, g2, g3, g4)",
        reference=reference,
    )


# roof truss global variable order: q, l, A_s, A_c, E_s, E_c, f_s, f_c
_ROOF_MARGINALS = (
    Marginal("lognormal", 20_000.0, 0.07),   # q  (N/m)
    Marginal("lognormal", 12.0, 0.01),       # l  (m)
    Marginal("lognormal", 9.82e-4, 0.06),    # A_s (m^2)
    Marginal("lognormal", 0.04, 0.12),       # A_c (m^2)
    Marginal("lognormal", 2e11, 0.06),       # E_s (N/m^2)
    Marginal("lognormal", 3e11, 0.06),       # E_c (N/m^2)
    Marginal("lognormal", 3.35e8, 0.12),     # f_s (N/m^2)
    Marginal("lognormal", 1.34e7, 0.18),     # f_c (N/m^2)
)


def roof_truss() -> ProblemSpec:
    """Three-mode series system: tip displacement, bar AD, bar EC."""

    def g1(x):  # inputs (q, l, A_s, A_c, E_s, E_c)
        x = np.atleast_2d(x)
        q, l, a_s, a_c, e_s, e_c = (x[:, i] for i in range(6))
        return 0.03 - q * l * l / 2.0 * (3.81 / (a_c * e_c) + 1.13 / (a_s * e_s))

    def g2(x):  # inputs (q, l, A_c, f_c)
        x = np.atleast_2d(x)
        q, l, a_c, f_c = (x[:, i] for i in range(4))
        return f_c * a_c - 1.185 * q * l

    def g3(x):  # inputs (q, l, A_s, f_s)
        x = np.atleast_2d(x)
        q, l, a_s, f_s = (x[:, i] for i in range(4))
        return f_s * a_s - 0.75 * q * l

    return ProblemSpec(
        name="roof_truss",
        input_model=InputModel(
            marginals=_ROOF_MARGINALS,
            component_maps=(
                (0, 1, 2, 3, 4, 5),
                (0, 1, 3, 7),
                (0, 1, 2, 6),
            ),
        ),
        limit_states=(g1, g2, g3),
        composition="min(g1, g2, g3)",
        reference={"pf": 3.417e-3, "beta": 2.705},
    )


BUILTINS: dict[str, Callable[..., ProblemSpec]] = {
    "four_branch": four_branch,
    "roof_truss": roof_truss,
}

# A transmission-tower system benchmark would need a truss finite-element
# solver and copula-dependent inputs; it is deliberately not shipped as a
# builtin.


def expression_limit_state(expr: Node, n_vars: int):
    """Synthetic limit state from an expression over x1..xn subvector inputs."""

    def lsf(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != n_vars:
            raise ValueError("synthetic limit state dimension mismatch")
        return np.asarray(eval_composition(expr, x), dtype=float)

    return lsf
