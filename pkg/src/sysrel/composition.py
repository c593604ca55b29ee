"""Expression trees for the system composition function.

Grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' integer)?
    base   := number | ident | 'min(' expr (',' expr)+ ')'
            | 'max(' expr (',' expr)+ ')' | '(' expr ')'

Identifiers are ``<prefix><digits>`` with a 1-based index (``g1`` refers to
argument 0). The same grammar doubles for synthetic limit states written
over input variables (prefix ``x``); the integer power extension exists for
that use. No division: min/max compositions plus affine reweighting and
polynomials cover the intended systems without singularities.

Trees are immutable; evaluation is pure, supports numpy broadcasting and
performs no surrogate calls.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


class CompositionSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at offset {pos}")
        self.pos = pos


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Ref(Node):
    name: str
    index: int  # 0-based


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True)
class MinMax(Node):
    kind: str  # "min" | "max"
    args: tuple[Node, ...]


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*^(),]))"
)


class _Parser:
    def __init__(self, text: str, prefix: str):
        self.text = text
        self.prefix = prefix
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, message: str):
        self._skip_ws()
        raise CompositionSyntaxError(message, self.pos)

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self) -> Node:
        node = self.expr()
        if self.peek():
            self.error("unexpected trailing input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.peek()
            self.pos += 1
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek() == "*":
            self.pos += 1
            node = Mul(node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek() == "^":
            self.pos += 1
            self._skip_ws()
            m = re.match(r"\d+", self.text[self.pos:])
            if not m:
                self.error("expected integer exponent")
            self.pos += m.end()
            node = Pow(node, int(m.group()))
        return node

    def base(self) -> Node:
        self._skip_ws()
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            self.error("expected number, identifier or '('")
        if m.group("op") == "(":
            self.pos = m.end()
            node = self.expr()
            self.expect(")")
            return node
        if m.group("num"):
            self.pos = m.end()
            return Const(float(m.group("num")))
        if m.group("ident"):
            name = m.group("ident")
            self.pos = m.end()
            if name in ("min", "max"):
                self.expect("(")
                args = [self.expr()]
                while self.peek() == ",":
                    self.pos += 1
                    args.append(self.expr())
                self.expect(")")
                if len(args) < 2:
                    self.error(f"{name} needs at least two arguments")
                return MinMax(name, tuple(args))
            im = re.fullmatch(re.escape(self.prefix) + r"(\d+)", name)
            if not im:
                self.error(f"unknown identifier {name!r}")
            idx = int(im.group(1))
            if idx < 1:
                self.error("identifier indices are 1-based")
            return Ref(name, idx - 1)
        self.error("expected number, identifier or '('")


def parse_composition(text: str, prefix: str = "g") -> Node:
    if not text or not text.strip():
        raise CompositionSyntaxError("empty expression", 0)
    return _Parser(text, prefix).parse()


def referenced_indices(expr: Node) -> set[int]:
    if isinstance(expr, Ref):
        return {expr.index}
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, (Add, Sub, Mul)):
        return referenced_indices(expr.left) | referenced_indices(expr.right)
    if isinstance(expr, Pow):
        return referenced_indices(expr.base)
    out: set[int] = set()
    for a in expr.args:
        out |= referenced_indices(a)
    return out


def validate_indices(expr: Node, m: int):
    """Check every referenced index exists among m components."""
    bad = [i for i in referenced_indices(expr) if i >= m]
    if bad:
        raise ValueError(
            f"component index {min(bad) + 1} out of range (system has {m})"
        )


def eval_composition(expr: Node, z):
    """Evaluate the tree on z, where z[..., j] is the j-th component value."""
    z = np.asarray(z, dtype=float)
    if isinstance(expr, Const):
        return np.broadcast_to(np.float64(expr.value), z.shape[:-1]).copy() \
            if z.ndim > 1 else expr.value
    if isinstance(expr, Ref):
        return z[..., expr.index]
    if isinstance(expr, Add):
        return eval_composition(expr.left, z) + eval_composition(expr.right, z)
    if isinstance(expr, Sub):
        return eval_composition(expr.left, z) - eval_composition(expr.right, z)
    if isinstance(expr, Mul):
        return eval_composition(expr.left, z) * eval_composition(expr.right, z)
    if isinstance(expr, Pow):
        return eval_composition(expr.base, z) ** expr.exponent
    vals = [eval_composition(a, z) for a in expr.args]
    reduce = np.minimum.reduce if expr.kind == "min" else np.maximum.reduce
    return reduce(np.broadcast_arrays(*vals))


def pretty(expr: Node) -> str:
    """Canonical text form; re-parsing yields a structurally identical tree."""

    def p(node: Node, level: int) -> str:
        # level: 0 expr, 1 term, 2 factor/base
        if isinstance(node, Const):
            s = repr(node.value)
            return s[:-2] if s.endswith(".0") else s
        if isinstance(node, Ref):
            return node.name
        if isinstance(node, MinMax):
            return f"{node.kind}({', '.join(p(a, 0) for a in node.args)})"
        if isinstance(node, (Add, Sub)):
            op = "+" if isinstance(node, Add) else "-"
            left = p(node.left, 0)
            right = p(node.right, 1)  # right of +/- must not be an Add/Sub
            if isinstance(node.right, (Add, Sub)):
                right = f"({p(node.right, 0)})"
            s = f"{left} {op} {right}"
            return f"({s})" if level > 0 else s
        if isinstance(node, Mul):
            left = p(node.left, 1)
            right = p(node.right, 2)
            if isinstance(node.right, Mul):
                right = f"({p(node.right, 0)})"
            s = f"{left}*{right}"
            return f"({s})" if level > 1 else s
        if isinstance(node, Pow):
            base = p(node.base, 2)
            if not isinstance(node.base, (Const, Ref, MinMax)):
                base = f"({p(node.base, 0)})"
            return f"{base}^{node.exponent}"
        raise TypeError(f"unknown node {node!r}")

    return p(expr, 0)


def system_mean_lsf(models, expr: Node, maps):
    """Limit state x -> h(mean_1(x_1), ..., mean_m(x_m)) for subset simulation.

    ``models`` are fitted surrogates trained on the coordinates selected by
    ``maps``; posterior means are plugged into the composition.
    """
    maps = [np.asarray(cm, dtype=int) for cm in maps]
    validate_indices(expr, len(maps))

    def lsf(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        z = np.empty((x.shape[0], len(models)))
        for j, (model, cmap) in enumerate(zip(models, maps)):
            if x.shape[1] <= cmap.max():
                raise ValueError("input dimension does not cover component map")
            z[:, j] = model.predict(x[:, cmap])[0]
        return eval_composition(expr, z)

    return lsf
