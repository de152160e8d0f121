"""Expression trees over observational-distribution terms.

The identification compiler emits these trees; they can be evaluated pointwise
or materialized as tables against any pmf access (an exact table, a learned
table, or an empirical frequency estimator). Conditionals are not a node kind:
they arise only inside :class:`ChainProduct` as ratios of two marginals of the
child, which keeps the zero-conditioning error site unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .tables import PmfTable, ScopeMismatch, iter_assignments

TABLE_TOTAL_TOL = 1e-6


class ZeroConditioningEvent(ArithmeticError):
    """A conditioning event carries zero mass under the supplied distribution.

    Signals a positivity violation at the unique site where conditionals are
    formed; never silently treated as 0/0 = 0.
    """

    def __init__(self, variable: str, event: Mapping[str, int]):
        self.variable = variable
        self.event = dict(event)
        super().__init__(
            f"zero mass conditioning {variable!r} on "
            + (repr(self.event) if self.event else "the empty event")
        )


class DistAccess(Protocol):
    """Pointwise pmf access over an ordered scope."""

    names: tuple[str, ...]
    cards: tuple[int, ...]

    def pmf(self, assignment: Mapping[str, int]) -> float: ...

    def table(self) -> PmfTable: ...


class DistExpr:
    """Base class for distribution-valued expressions."""

    scope: frozenset[str]

    @cached_property
    def free(self) -> frozenset[str]:
        """Variables whose values parametrize the expression (conditioning
        references bound only at evaluation time)."""
        raise NotImplementedError


@dataclass(frozen=True)
class BaseDist(DistExpr):
    """The observational input distribution over its full ordered scope."""

    names: tuple[str, ...]

    @property
    def scope(self) -> frozenset[str]:
        return frozenset(self.names)

    @cached_property
    def free(self) -> frozenset[str]:
        return frozenset()


@dataclass(frozen=True)
class Marginal(DistExpr):
    """Sum the child over ``drop``."""

    child: DistExpr
    drop: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "drop", frozenset(self.drop))
        if not self.drop <= self.child.scope:
            raise ScopeMismatch(
                f"cannot drop {sorted(self.drop - self.child.scope)}: not in child scope"
            )

    @property
    def scope(self) -> frozenset[str]:
        return self.child.scope - self.drop

    @cached_property
    def free(self) -> frozenset[str]:
        return self.child.free


@dataclass(frozen=True)
class ChainProduct(DistExpr):
    """Product of child conditionals along ``over`` (a topological order).

    ``conds`` lists, per variable of ``over``, the conditioning set. Each
    conditional is the ratio of two marginals of the child; conditioning
    variables outside ``over`` are free references whose values come from the
    evaluation environment. The node denotes a normalized distribution over
    ``over`` for every fixing of its free references.
    """

    child: DistExpr
    over: tuple[str, ...]
    conds: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self) -> None:
        over = tuple(self.over)
        object.__setattr__(self, "over", over)
        object.__setattr__(
            self, "conds", tuple((v, tuple(zs)) for v, zs in self.conds)
        )
        if len(set(over)) != len(over):
            raise ScopeMismatch("duplicate variables in chain product")
        if tuple(v for v, _ in self.conds) != over:
            raise ScopeMismatch("conds must list exactly the chain variables in order")
        cscope = self.child.scope
        seen: set[str] = set()
        for v, zs in self.conds:
            if v not in cscope or not set(zs) <= cscope:
                raise ScopeMismatch(f"chain factor {v!r} references outside child scope")
            if set(zs) & set(over) and not set(zs) & set(over) <= seen:
                raise ScopeMismatch(f"factor {v!r} conditions on later chain variables")
            seen.add(v)

    @property
    def scope(self) -> frozenset[str]:
        return frozenset(self.over)

    @cached_property
    def free(self) -> frozenset[str]:
        refs: set[str] = set()
        for _, zs in self.conds:
            refs.update(zs)
        return frozenset(refs - set(self.over)) | self.child.free


@dataclass(frozen=True)
class Product(DistExpr):
    """Product of sub-distributions with pairwise disjoint scopes."""

    children: tuple[DistExpr, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ScopeMismatch("empty product")
        seen: set[str] = set()
        for c in self.children:
            if seen & c.scope:
                raise ScopeMismatch("product children must have disjoint scopes")
            seen |= c.scope

    @property
    def scope(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.children:
            out |= c.scope
        return frozenset(out)

    @cached_property
    def free(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.children:
            out |= c.free
        return frozenset(out - self.scope)


def marginal(child: DistExpr, drop: Iterable[str]) -> DistExpr:
    """Normalized constructor: collapses empty drops and merges nested sums."""
    drop = frozenset(drop)
    if not drop:
        return child
    if isinstance(child, Marginal):
        return Marginal(child.child, child.drop | drop)
    return Marginal(child, drop)


def depth(expr: DistExpr) -> int:
    if isinstance(expr, BaseDist):
        return 1
    if isinstance(expr, Marginal):
        return 1 + depth(expr.child)
    if isinstance(expr, ChainProduct):
        return 1 + depth(expr.child)
    return 1 + max(depth(c) for c in expr.children)


# -- evaluation ----------------------------------------------------------------


def _card_map(access: DistAccess) -> dict[str, int]:
    return dict(zip(access.names, access.cards))


def _marginal_value(
    expr: DistExpr,
    keep: frozenset[str],
    access: DistAccess,
    env: Mapping[str, int],
    cards: Mapping[str, int],
) -> float:
    summed = sorted(expr.scope - keep)
    if not summed:
        return _value(expr, access, env, cards)
    total = []
    env2 = dict(env)
    for combo in iter_assignments(summed, [cards[v] for v in summed]):
        env2.update(combo)
        total.append(_value(expr, access, env2, cards))
    return math.fsum(total)


def _value(
    expr: DistExpr,
    access: DistAccess,
    env: Mapping[str, int],
    cards: Mapping[str, int],
) -> float:
    if isinstance(expr, BaseDist):
        return access.pmf(env)
    if isinstance(expr, Marginal):
        return _marginal_value(expr.child, expr.scope, access, env, cards)
    if isinstance(expr, Product):
        out = 1.0
        for c in expr.children:
            out *= _value(c, access, env, cards)
        return out
    if isinstance(expr, ChainProduct):
        out = 1.0
        for v, zs in expr.conds:
            zset = frozenset(zs)
            den = _marginal_value(expr.child, zset, access, env, cards)
            if den == 0.0:
                raise ZeroConditioningEvent(v, {z: env[z] for z in zs})
            num = _marginal_value(expr.child, zset | {v}, access, env, cards)
            out *= num / den
        return out
    raise TypeError(f"unknown expression node {type(expr).__name__}")


def evaluate(expr: DistExpr, access: DistAccess, env: Mapping[str, int]) -> float:
    """Evaluate the expression at one point.

    ``env`` must assign every scope variable and every free reference of the
    expression; extra keys are ignored.
    """
    needed = expr.scope | expr.free
    missing = needed - set(env)
    if missing:
        raise ScopeMismatch(f"environment lacks values for {sorted(missing)}")
    return _value(expr, access, env, _card_map(access))


# -- dense materialization -------------------------------------------------


def _aligned(
    arr: np.ndarray,
    names: tuple[str, ...],
    target: tuple[str, ...],
) -> np.ndarray:
    """View ``arr`` broadcastable over the axes of ``target``."""
    idx = tuple(
        slice(None) if n in names else None
        for n in target
    )
    perm = tuple(names.index(n) for n in target if n in names)
    return np.transpose(arr, perm)[idx] if arr.ndim else arr[idx]


def _node_table(
    expr: DistExpr,
    access: DistAccess,
    fixed: Mapping[str, int],
    order_key,
) -> tuple[tuple[str, ...], np.ndarray]:
    """Dense array over the node's scope plus unfixed free references.

    Axis order follows the base distribution's variable order. Free references
    present in ``fixed`` are sliced out as early as possible.
    """
    if isinstance(expr, BaseDist):
        t = access.table()
        return t.names, t.probs
    if isinstance(expr, Marginal):
        names, arr = _node_table(expr.child, access, fixed, order_key)
        axes = tuple(i for i, n in enumerate(names) if n in expr.drop)
        kept = tuple(n for n in names if n not in expr.drop)
        return kept, arr.sum(axis=axes)
    if isinstance(expr, Product):
        parts = [_node_table(c, access, fixed, order_key) for c in expr.children]
        union = sorted({n for names, _ in parts for n in names}, key=order_key)
        union = tuple(union)
        out = None
        for names, arr in parts:
            a = _aligned(arr, names, union)
            out = a if out is None else out * a
        return union, out
    if isinstance(expr, ChainProduct):
        cnames, carr = _node_table(expr.child, access, fixed, order_key)
        # only free references may be fixed here; scope variables stay as axes
        fixed_free = {n: v for n, v in fixed.items() if n not in expr.scope}
        family = expr.child.free - set(fixed_free)  # context axes: never summed out
        out = np.ones((), dtype=np.float64)
        out_names: tuple[str, ...] = ()
        for v, zs in expr.conds:
            keep = set(zs) | {v} | family
            sum_axes = tuple(i for i, n in enumerate(cnames) if n not in keep)
            num_names = tuple(n for n in cnames if n in keep)
            num = carr.sum(axis=sum_axes)
            slc = tuple(
                fixed_free[n] if n in fixed_free else slice(None) for n in num_names
            )
            num = num[slc]
            num_names = tuple(n for n in num_names if n not in fixed_free)
            v_axis = num_names.index(v)
            den = num.sum(axis=v_axis, keepdims=True)
            if np.any(den == 0.0):
                flat = int(np.argmax((den == 0.0).reshape(-1)))
                pos = np.unravel_index(flat, den.shape)
                event = {n: int(p) for n, p in zip(num_names, pos) if n != v}
                event |= {n: fixed_free[n] for n in zs if n in fixed_free}
                raise ZeroConditioningEvent(v, event)
            factor = num / den
            target = tuple(sorted(set(out_names) | set(num_names), key=order_key))
            out = _aligned(out, out_names, target) * _aligned(factor, num_names, target)
            out_names = target
        result_names = tuple(
            sorted((expr.scope | expr.free) - set(fixed_free), key=order_key)
        )
        if set(out_names) != set(result_names):  # pragma: no cover - structural
            raise ScopeMismatch("chain factors do not cover the node scope")
        return result_names, _aligned(out, out_names, result_names)
    raise TypeError(f"unknown expression node {type(expr).__name__}")


def full_table(
    expr: DistExpr,
    access: DistAccess,
    fixed: Mapping[str, int] | None = None,
    check_total: bool = True,
    allow_free_axes: bool = False,
) -> PmfTable:
    """Materialize the expression over its scope.

    ``fixed`` must cover the free references of the expression (for instance
    the intervention values). With ``allow_free_axes`` the unfixed references
    stay as extra axes instead, one distribution slice per configuration. The
    result axes follow the base distribution's variable order; a total
    deviating from 1 by more than 1e-6 is an error unless ``check_total`` is
    disabled.
    """
    fixed = dict(fixed or {})
    missing = expr.free - set(fixed)
    if missing and not allow_free_axes:
        raise ScopeMismatch(f"fixed values required for {sorted(missing)}")
    fixed = {n: v for n, v in fixed.items() if n not in expr.scope}
    base_order = {n: i for i, n in enumerate(access.names)}
    names, arr = _node_table(expr, access, fixed, base_order.get)
    if missing:
        return PmfTable(names, arr, context=dict(fixed), normalized=False)
    if set(names) != expr.scope:  # pragma: no cover - structural
        raise ScopeMismatch(f"materialized axes {names} do not match scope")
    total = float(arr.sum())
    if check_total and abs(total - 1.0) > TABLE_TOTAL_TOL:
        raise ValueError(f"estimand table mass {total!r} deviates from 1")
    return PmfTable(
        names, arr, context=dict(fixed), normalized=abs(total - 1.0) <= 1e-9
    )


# -- rendering ----------------------------------------------------------------


def _is_base_chain(expr: DistExpr) -> bool:
    while isinstance(expr, Marginal):
        expr = expr.child
    return isinstance(expr, BaseDist)


def _base_order(expr: DistExpr) -> tuple[str, ...]:
    while not isinstance(expr, BaseDist):
        if isinstance(expr, Product):
            expr = expr.children[0]
        else:
            expr = expr.child
    return expr.names


def render(expr: DistExpr, style: str = "text") -> str:
    """Deterministic human-readable formula.

    Conditionals over (marginals of) the input distribution print as
    ``P[v|z,...]``; rebased chain products are inlined as explicit ratios.
    Summation-bound variables are primed when their names occur free or in
    scope at the top level.
    """
    if style not in ("text", "latex"):
        raise ValueError(f"unknown render style {style!r}")
    order = _base_order(expr)
    pos = {n: i for i, n in enumerate(order)}
    taken = expr.scope | expr.free
    symbols = {n: n.lower() for n in order}

    latex = style == "latex"

    def sym(n: str, env: Mapping[str, str]) -> str:
        return env.get(n, symbols[n])

    def bind(names: Sequence[str], env: dict[str, str]) -> list[str]:
        bound = []
        for n in sorted(names, key=pos.get):
            s = symbols[n] + ("'" if n in taken else "")
            while s in env.values():
                s += "'"
            env[n] = s
            bound.append(s)
        return bound

    def sum_prefix(bound: list[str]) -> str:
        inner = ",".join(bound)
        if latex:
            return rf"\sum_{{{inner}}} "
        return f"Σ_{inner} " if len(bound) == 1 else f"Σ_{{{inner}}} "

    def factor(child: DistExpr, v: str, zs: tuple[str, ...], env: dict[str, str]) -> str:
        zs_sorted = sorted(zs, key=pos.get)
        if _is_base_chain(child):
            mid = r" \mid " if latex else "|"
            body = sym(v, env)
            if zs_sorted:
                body += mid + ",".join(sym(z, env) for z in zs_sorted)
            return f"P[{body}]"
        num = walk(marginal(child, child.scope - (set(zs) | {v})), dict(env))
        if not zs:
            return f"({num})" if not latex else num
        den = walk(marginal(child, child.scope - set(zs)), dict(env))
        if latex:
            return rf"\dfrac{{{num}}}{{{den}}}"
        return f"({num})/({den})"

    def walk(node: DistExpr, env: dict[str, str] | None = None) -> str:
        env = dict(env or {})
        if isinstance(node, BaseDist):
            return "P[" + ",".join(sym(n, env) for n in node.names) + "]"
        if isinstance(node, Marginal):
            drop = node.drop
            child = node.child
            while isinstance(child, Marginal):
                drop |= child.drop
                child = child.child
            bound = bind(sorted(drop, key=pos.get), env)
            return sum_prefix(bound) + walk(child, env)
        if isinstance(node, ChainProduct):
            return "".join(factor(node.child, v, zs, env) for v, zs in node.conds)
        if isinstance(node, Product):
            sep = r" \cdot " if latex else "·"
            parts = []
            for c in node.children:
                s = walk(c, env)
                if isinstance(c, (Marginal, Product)):
                    s = f"({s})"
                parts.append(s)
            return sep.join(parts)
        raise TypeError(f"unknown expression node {type(node).__name__}")

    return walk(expr)


def to_json_dict(expr: DistExpr) -> dict:
    """Serialize the tree, mirroring the node variants."""
    if isinstance(expr, BaseDist):
        return {"kind": "base", "scope": list(expr.names)}
    if isinstance(expr, Marginal):
        return {"kind": "marginal", "drop": sorted(expr.drop),
                "child": to_json_dict(expr.child)}
    if isinstance(expr, ChainProduct):
        return {"kind": "chain", "over": list(expr.over),
                "conds": {v: list(zs) for v, zs in expr.conds},
                "child": to_json_dict(expr.child)}
    if isinstance(expr, Product):
        return {"kind": "product", "children": [to_json_dict(c) for c in expr.children]}
    raise TypeError(f"unknown expression node {type(expr).__name__}")


def from_json_dict(obj: Mapping) -> DistExpr:
    kind = obj["kind"]
    if kind == "base":
        return BaseDist(tuple(obj["scope"]))
    if kind == "marginal":
        return Marginal(from_json_dict(obj["child"]), frozenset(obj["drop"]))
    if kind == "chain":
        child = from_json_dict(obj["child"])
        over = tuple(obj["over"])
        conds = tuple((v, tuple(obj["conds"][v])) for v in over)
        return ChainProduct(child, over, conds)
    if kind == "product":
        return Product(tuple(from_json_dict(c) for c in obj["children"]))
    raise ValueError(f"unknown expression kind {kind!r}")
