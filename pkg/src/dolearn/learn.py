"""Learn an interventional distribution from finite observational samples.

The pipeline splits the problem along the c-component structure of the graph:

* components untouched by the intervention keep a Bayes-net form and their
  conditionals are learned with add-1 smoothing over effective-parent
  configurations;
* components that contain intervened variables are handled by re-running the
  identification recursion against the sample batch, materializing small
  probability tables at every rebasing step and at the leaves.

The assembled object is a product of per-variable conditional rows in a fixed
topological order, usable both as a pointwise evaluator and as the driver of
an ancestral sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .admg import Admg
from .identify import HedgeWitness, NotIdentifiable, chain_conds
from .tables import PmfTable, Samples, ScopeMismatch, strides_for

ROW_TOL = 1e-12
FAMILY_CONSTANCY_TOL = 1e-9


class PositivityViolation(RuntimeError):
    """A conditioning event required by the learner has zero mass or count."""

    def __init__(self, variable: str, event: Mapping[str, int], source: str):
        self.variable = variable
        self.event = dict(event)
        self.source = source
        super().__init__(
            f"conditioning event {self.event!r} for {variable!r} has zero "
            f"{'count' if source == 'samples' else 'mass'}"
        )


@dataclass(frozen=True)
class LearnConfig:
    """Accuracy targets and assumptions for the learner.

    ``alpha`` is an assumption about the ground truth, never estimated from
    data. ``m`` overrides the budget arithmetic when set.
    """

    epsilon: float = 0.1
    delta: float = 0.1
    alpha: float = 0.05
    m: int | None = None


@dataclass(frozen=True)
class RelativePartition:
    """C-component structure of a graph relative to an intervened set.

    Components intersecting the intervention come first (``ell`` of them);
    ``sub_components`` are the c-components of each such component after its
    intervened part is removed.
    """

    components: tuple[frozenset[int], ...]
    ell: int
    x_parts: tuple[frozenset[int], ...]
    c_low: frozenset[int]
    c_high: frozenset[int]
    sub_components: tuple[tuple[tuple[int, int], frozenset[int]], ...]


def relative_partition(g: Admg, x: Iterable[int]) -> RelativePartition:
    x = frozenset(x)
    comps = g.c_components()
    touched = [c for c in comps if c & x]
    untouched = [c for c in comps if not c & x]
    ordered = tuple(touched + untouched)
    ell = len(touched)
    x_parts = tuple(c & x for c in touched)
    c_low = frozenset().union(*touched) if touched else frozenset()
    c_high = frozenset().union(*untouched) if untouched else frozenset()
    subs = []
    for i, c in enumerate(touched):
        rest = c - x
        for j, cij in enumerate(g.c_components(within=rest)):
            subs.append(((i, j), cij))
    return RelativePartition(ordered, ell, x_parts, c_low, c_high, tuple(subs))


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """Rows of conditional probabilities for one target variable.

    ``probs`` has one row per configuration of ``cond`` (row-major) and one
    column per target symbol; every row sums to 1. ``counts`` holds the raw
    occurrence counts when the rows were estimated from samples.
    ``fixed_context`` records intervention coordinates baked into the rows.
    """

    target: str
    target_card: int
    cond: tuple[str, ...]
    cond_cards: tuple[int, ...]
    probs: np.ndarray
    counts: np.ndarray | None = None
    kind: str = "add1"
    fixed_context: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64).reshape(-1, self.target_card)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "cond", tuple(self.cond))
        object.__setattr__(self, "cond_cards", tuple(self.cond_cards))
        object.__setattr__(self, "fixed_context", dict(self.fixed_context))
        expected = int(np.prod(self.cond_cards)) if self.cond_cards else 1
        if probs.shape[0] != expected:
            raise ScopeMismatch(
                f"{self.target}: {probs.shape[0]} rows, expected {expected}"
            )
        if np.abs(probs.sum(axis=1) - 1.0).max(initial=0.0) > ROW_TOL:
            raise ValueError(f"{self.target}: conditional rows must sum to 1")

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        return strides_for(self.cond_cards)

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Per-row cumulative sums, precomputed for inverse-cdf sampling."""
        return np.cumsum(self.probs, axis=1)

    def row_index(self, env: Mapping[str, int]) -> int:
        try:
            return sum(env[n] * s for n, s in zip(self.cond, self._strides))
        except KeyError as missing:
            raise ScopeMismatch(f"no value for conditioning variable {missing}") from None

    def row(self, env: Mapping[str, int]) -> np.ndarray:
        return self.probs[self.row_index(env)]


@dataclass(frozen=True, eq=False)
class TableFamily:
    """A table of distributions: context axes index the family, variable axes
    carry the mass. Every context slice sums to 1. Axes are addressed by name;
    merged families order them by the host graph's topological order.
    ``rebase_depth`` counts the chain materializations that produced the table,
    the quantity the nominal pointwise approximation factor grows with."""

    names: tuple[str, ...]
    cards: tuple[int, ...]
    ctx: frozenset[str]
    arr: np.ndarray
    fixed: Mapping[str, int] = field(default_factory=dict)
    rebase_depth: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "cards", tuple(self.cards))
        object.__setattr__(self, "ctx", frozenset(self.ctx))
        object.__setattr__(self, "fixed", dict(self.fixed))
        arr = np.asarray(self.arr, dtype=np.float64)
        object.__setattr__(self, "arr", arr)
        if arr.shape != self.cards:
            raise ScopeMismatch("family array shape does not match cardinalities")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(n for n in self.names if n not in self.ctx)

    def var_axes(self) -> tuple[int, ...]:
        return tuple(i for i, n in enumerate(self.names) if n not in self.ctx)

    def marginal_vars(self, keep: Iterable[str]) -> "TableFamily":
        """Sum out distribution variables not in ``keep``; context axes stay."""
        keep = set(keep)
        axes = tuple(
            i for i, n in enumerate(self.names) if n not in self.ctx and n not in keep
        )
        kept = tuple(n for i, n in enumerate(self.names) if i not in axes)
        cards = tuple(c for i, c in enumerate(self.cards) if i not in axes)
        return TableFamily(kept, cards, self.ctx, self.arr.sum(axis=axes),
                           self.fixed, self.rebase_depth)

    def slice_ctx(self, fixed: Mapping[str, int]) -> "TableFamily":
        relevant = {n: v for n, v in fixed.items() if n in self.ctx}
        if not relevant:
            return self
        idx = tuple(relevant.get(n, slice(None)) for n in self.names)
        kept = tuple(n for n in self.names if n not in relevant)
        cards = tuple(c for n, c in zip(self.names, self.cards) if n not in relevant)
        merged = dict(self.fixed)
        merged.update(relevant)
        return TableFamily(kept, cards, self.ctx - set(relevant), self.arr[idx],
                           merged, self.rebase_depth)

    def pmf(self, env: Mapping[str, int]) -> float:
        idx = tuple(env[n] for n in self.names)
        return float(self.arr[idx])


def _align(arr: np.ndarray, names: tuple[str, ...], target: tuple[str, ...]) -> np.ndarray:
    idx = tuple(slice(None) if n in names else None for n in target)
    perm = tuple(names.index(n) for n in target if n in names)
    return np.transpose(arr, perm)[idx]


def _merge_families(fams: Sequence[TableFamily], order_key) -> TableFamily:
    """Pointwise product of families; combined variables absorb matching
    context axes of siblings."""
    all_names = sorted({n for f in fams for n in f.names}, key=order_key)
    all_names = tuple(all_names)
    card_of: dict[str, int] = {}
    for f in fams:
        for n, c in zip(f.names, f.cards):
            card_of[n] = c
    out = np.ones((), dtype=np.float64)
    out = _align(out, (), all_names)
    for f in fams:
        out = out * _align(f.arr, f.names, all_names)
    variables = {n for f in fams for n in f.variables}
    fixed: dict[str, int] = {}
    for f in fams:
        fixed.update(f.fixed)
    return TableFamily(
        all_names,
        tuple(card_of[n] for n in all_names),
        frozenset(all_names) - variables,
        out,
        fixed,
        max(f.rebase_depth for f in fams),
    )


# -- distribution handles ------------------------------------------------------


class _SampleHandle:
    """Empirical access to the observational batch (raw count ratios)."""

    is_samples = True

    def __init__(self, samples: Samples, cards: Mapping[str, int]):
        self.samples = samples
        self.cards = cards

    def restricted(self, keep: frozenset[str]) -> "_SampleHandle":
        return self  # scope is tracked by the recursion, counts are lazy

    def joint(self, keep: Sequence[str]) -> TableFamily:
        keep = tuple(keep)
        cards = tuple(self.cards[n] for n in keep)
        counts = self.samples.counts_over(keep, cards)
        return TableFamily(keep, cards, frozenset(), counts / self.samples.m)

    def _conditional(
        self, v: str, zs: tuple[str, ...], x: Mapping[str, int],
        over: frozenset[str],
    ) -> TableFamily:
        names = tuple(zs) + (v,)
        cards = tuple(self.cards[n] for n in names)
        counts = self.samples.counts_over(names, cards)
        sliced = {n: x[n] for n in zs if n in x and n not in over}
        if sliced:
            idx = tuple(sliced.get(n, slice(None)) for n in names)
            counts = counts[idx]
            names = tuple(n for n in names if n not in sliced)
            cards = tuple(c for n, c in zip(tuple(zs) + (v,), cards) if n not in sliced)
        den = counts.sum(axis=-1, keepdims=True)
        if np.any(den == 0.0):
            flat = int(np.argmax((den == 0.0).reshape(-1)))
            pos = np.unravel_index(flat, den.shape)
            event = {n: int(p) for n, p in zip(names[:-1], pos[:-1])}
            event.update(sliced)
            raise PositivityViolation(v, event, "samples")
        return TableFamily(
            names, cards, frozenset(names[:-1]), counts / den, sliced
        )

    def chain_family(
        self,
        conds: Sequence[tuple[str, tuple[str, ...]]],
        x: Mapping[str, int],
        order_key,
    ) -> TableFamily:
        over = frozenset(v for v, _ in conds)
        factors = [self._conditional(v, zs, x, over) for v, zs in conds]
        merged = _merge_families(factors, order_key)
        return TableFamily(
            merged.names,
            merged.cards,
            frozenset(merged.names) - over,
            merged.arr,
            merged.fixed,
            1,
        )


class _TableHandle:
    """Exact access to an already-materialized table family."""

    is_samples = False

    def __init__(self, family: TableFamily, rebase_depth: int = 0):
        self.family = family
        self.rebase_depth = rebase_depth

    def restricted(self, keep: frozenset[str]) -> "_TableHandle":
        return _TableHandle(self.family.marginal_vars(keep), self.rebase_depth)

    def joint(self, keep: Sequence[str]) -> TableFamily:
        fam = self.family.marginal_vars(keep)
        return fam

    def _conditional(
        self, v: str, zs: tuple[str, ...], x: Mapping[str, int],
        over: frozenset[str],
    ) -> TableFamily:
        fam = self.family
        in_scope = [z for z in zs if z in fam.variables]
        keep = set(in_scope) | {v}
        num = fam.marginal_vars(keep)
        sliced = {n: x[n] for n in in_scope if n in x and n not in over}
        arr = num.arr
        names = num.names
        if sliced:
            idx = tuple(sliced.get(n, slice(None)) for n in names)
            arr = arr[idx]
            names = tuple(n for n in names if n not in sliced)
        v_axis = names.index(v)
        den = arr.sum(axis=v_axis, keepdims=True)
        if np.any(den == 0.0):
            flat = int(np.argmax((den == 0.0).reshape(-1)))
            pos = np.unravel_index(flat, den.shape)
            event = {n: int(p) for n, p in zip(names, pos) if n != v}
            event.update(sliced)
            raise PositivityViolation(v, event, "table")
        cards = tuple(
            c for n, c in zip(num.names, num.cards) if n not in sliced
        )
        fixed = dict(fam.fixed)
        fixed.update(sliced)
        return TableFamily(
            names, cards, frozenset(n for n in names if n != v), arr / den,
            fixed, fam.rebase_depth,
        )

    def chain_family(
        self,
        conds: Sequence[tuple[str, tuple[str, ...]]],
        x: Mapping[str, int],
        order_key,
    ) -> TableFamily:
        over = frozenset(v for v, _ in conds)
        factors = [self._conditional(v, zs, x, over) for v, zs in conds]
        merged = _merge_families(factors, order_key)
        return TableFamily(
            merged.names,
            merged.cards,
            frozenset(merged.names) - over,
            merged.arr,
            merged.fixed,
            self.rebase_depth + 1,
        )


# -- the sample-based identification recursion ---------------------------------


def _hedge_witness(g: Admg, vs: frozenset[int], root: frozenset[int]) -> HedgeWitness:
    return HedgeWitness(
        graph=g.induced_subgraph(vs),
        root_set=frozenset(g.names_of(root)),
        internal=frozenset(g.names_of(vs - root)),
        trace=(),
    )


def _learn_component(
    g: Admg,
    order: tuple[int, ...],
    y: frozenset[int],
    xset: frozenset[int],
    handle,
    vs: frozenset[int],
    x_assign: Mapping[str, int],
    order_key,
    depth: int = 0,
) -> TableFamily:
    if depth > 3 * g.n + 3:  # pragma: no cover - termination guard
        raise RuntimeError("learning recursion exceeded its depth bound")
    if not xset:
        return handle.joint([g.names[i] for i in order if i in y])

    an = g.ancestors(y, within=vs)
    if vs - an:
        keep = frozenset(g.names[i] for i in an)
        return _learn_component(
            g, order, y, xset & an, handle.restricted(keep), an,
            x_assign, order_key, depth + 1,
        )

    # with targets equal to the non-intervened remainder, the third base case
    # of the recursion can never trigger
    assert not (vs - xset) - g.ancestors(y, within=vs, severed=xset)

    comps = g.c_components(within=vs - xset)
    if len(comps) > 1:
        fams = [
            _learn_component(
                g, order, s, vs - s, handle, vs, x_assign, order_key, depth + 1
            )
            for s in comps
        ]
        return _merge_families(fams, order_key)

    s = comps[0]
    cc = g.c_components(within=vs)
    if len(cc) == 1:
        raise NotIdentifiable(_hedge_witness(g, vs, s))
    if s in cc:
        return handle.chain_family(chain_conds(g, order, s, vs), x_assign, order_key)

    s_prime = next(c for c in cc if s < c)
    fam = handle.chain_family(chain_conds(g, order, s_prime, vs), x_assign, order_key)
    return _learn_component(
        g, order, y, xset & s_prime,
        _TableHandle(fam, fam.rebase_depth),
        s_prime, x_assign, order_key, depth + 1,
    )


# -- the two learners and assembly ---------------------------------------------


def learn_q(
    samples: Samples,
    g: Admg,
    part: RelativePartition,
    config: LearnConfig | None = None,
) -> dict[str, ConditionalTable]:
    """Add-1 smoothed conditionals for every variable outside the intervened
    components, conditioned on its effective parents. Configurations never
    seen in the batch get the uniform row."""
    order = g.topological_order()
    out: dict[str, ConditionalTable] = {}
    for i in sorted(part.c_high):
        name = g.names[i]
        card = g.cards[i]
        zs = sorted(g.effective_parents(order, i))
        znames = tuple(g.names[z] for z in zs)
        zcards = tuple(g.cards[z] for z in zs)
        counts = samples.counts_over(znames + (name,), zcards + (card,))
        flat = counts.reshape(-1, card)
        rows = (flat + 1.0) / (flat.sum(axis=1, keepdims=True) + card)
        out[name] = ConditionalTable(
            name, card, znames, zcards, rows, counts=flat, kind="add1"
        )
    return out


def _q_from_table(
    obs: PmfTable, g: Admg, part: RelativePartition
) -> dict[str, ConditionalTable]:
    """Infinite-sample conditionals: exact ratios of the supplied table."""
    order = g.topological_order()
    out: dict[str, ConditionalTable] = {}
    for i in sorted(part.c_high):
        name = g.names[i]
        card = g.cards[i]
        zs = sorted(g.effective_parents(order, i))
        znames = tuple(g.names[z] for z in zs)
        zcards = tuple(g.cards[z] for z in zs)
        joint = obs.marginal_to(set(znames) | {name}).aligned_to(znames + (name,))
        flat = joint.probs.reshape(-1, card)
        den = flat.sum(axis=1, keepdims=True)
        if np.any(den == 0.0):
            row = int(np.argmax((den == 0.0).reshape(-1)))
            event = dict(zip(znames, np.unravel_index(row, zcards))) if znames else {}
            raise PositivityViolation(name, {k: int(v) for k, v in event.items()}, "table")
        out[name] = ConditionalTable(
            name, card, znames, zcards, flat / den, kind="exact"
        )
    return out


def learn_r(
    samples_or_table: Samples | PmfTable,
    g: Admg,
    part: RelativePartition,
    x: Mapping[str, int],
    config: LearnConfig | None = None,
) -> dict[tuple[int, int], TableFamily]:
    """One materialized table family per intervened-component fragment.

    Each family evaluates the fragment's interventional distribution at every
    assignment of the fragment and of its non-intervened references;
    intervention coordinates are baked in at their queried values.
    """
    order = g.topological_order()
    order_key = {g.names[i]: k for k, i in enumerate(order)}.get
    if isinstance(samples_or_table, PmfTable):
        base = samples_or_table.aligned_to(
            tuple(n for n in g.names if n in samples_or_table.scope)
        )
        handle = _TableHandle(
            TableFamily(base.names, base.cards, frozenset(), base.probs)
        )
    else:
        cards = dict(zip(g.names, g.cards))
        handle = _SampleHandle(samples_or_table, cards)
    out: dict[tuple[int, int], TableFamily] = {}
    every = frozenset(range(g.n))
    for key, cij in part.sub_components:
        out[key] = _learn_component(
            g, order, cij, every - cij, handle, every, dict(x), order_key
        )
    return out


def _family_conditionals(
    fam: TableFamily,
    g: Admg,
    x: Mapping[str, int],
) -> dict[str, ConditionalTable]:
    """Chain-rule a fragment family into per-variable conditional rows.

    Context axes that follow a variable in the global order provably do not
    influence its conditional (the family factorizes along the order), so they
    are sliced away; the residual variation is checked against a tight bound.
    """
    order_pos = {n: i for i, n in enumerate(g.names)}
    gorder = g.topological_order()
    topo_pos = {g.names[i]: k for k, i in enumerate(gorder)}
    variables = sorted(fam.variables, key=topo_pos.get)
    out: dict[str, ConditionalTable] = {}
    for t, v in enumerate(variables):
        keep = set(variables[: t + 1])
        marg = fam.marginal_vars(keep)
        later_ctx = [n for n in marg.names if n in fam.ctx and topo_pos[n] > topo_pos[v]]
        arr = marg.arr
        names = marg.names
        if later_ctx:
            probe = arr
            for n in later_ctx:
                ax = names.index(n)
                spread = probe.max(axis=ax) - probe.min(axis=ax)
                if spread.max(initial=0.0) > FAMILY_CONSTANCY_TOL:
                    raise ValueError(
                        f"fragment table for {v!r} varies with later context {n!r}"
                    )
            idx = tuple(0 if n in later_ctx else slice(None) for n in names)
            arr = arr[idx]
            names = tuple(n for n in names if n not in later_ctx)
        v_axis = names.index(v)
        # order conditioning axes by topological position for the row layout
        cond = tuple(sorted((n for n in names if n != v), key=topo_pos.get))
        arr = _align(arr, names, cond + (v,))
        card = g.cards[g.index(v)]
        flat = arr.reshape(-1, card)
        den = flat.sum(axis=1, keepdims=True)
        rows = np.where(den > 0.0, flat / np.where(den == 0.0, 1.0, den),
                        1.0 / card)  # unreachable configurations get uniform rows
        out[v] = ConditionalTable(
            v, card, cond, tuple(g.cards[g.index(n)] for n in cond), rows,
            kind="fragment", fixed_context=dict(fam.fixed),
        )
    return out


@dataclass(frozen=True, eq=False)
class LearnedInterventional:
    """Per-variable conditional factors plus a sampling order: the learned
    interventional distribution, usable as evaluator and generator."""

    graph: Admg
    x: Mapping[str, int]
    order: tuple[str, ...]
    factors: Mapping[str, ConditionalTable]
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", dict(self.x))
        object.__setattr__(self, "factors", dict(self.factors))
        object.__setattr__(self, "metadata", dict(self.metadata))
        pos = {n: i for i, n in enumerate(self.order)}
        for n, f in self.factors.items():
            for c in f.cond:
                if c not in self.x and pos.get(c, len(pos)) >= pos[n]:
                    raise ScopeMismatch(
                        f"factor {n!r} conditions on {c!r} which is not yet determined"
                    )

    @property
    def target_names(self) -> tuple[str, ...]:
        return self.order

    def cards(self) -> tuple[int, ...]:
        return tuple(self.graph.cards[self.graph.index(n)] for n in self.order)

    def evaluate(self, y: Mapping[str, int]) -> float:
        return evaluate_point(self, y)

    def table(self) -> PmfTable:
        """Materialize the evaluator over all target assignments."""
        cards = self.cards()
        arr = np.empty(cards, dtype=np.float64)
        for combo in np.ndindex(*cards):
            env = dict(zip(self.order, (int(c) for c in combo)))
            arr[combo] = evaluate_point(self, env)
        return PmfTable(self.order, arr, context=dict(self.x), normalized=False)


def evaluate_point(li: LearnedInterventional, y: Mapping[str, int]) -> float:
    """Product of conditional-row lookups along the sampling order."""
    if set(y) != set(li.order):
        raise ScopeMismatch(
            f"assignment must cover exactly {sorted(li.order)}, got {sorted(y)}"
        )
    env = dict(li.x)
    env.update(y)
    out = 1.0
    for n in li.order:
        f = li.factors[n]
        out *= float(f.row(env)[env[n]])
    return out


def assemble(
    q_factors: Mapping[str, ConditionalTable],
    r_factors: Mapping[tuple[int, int], TableFamily],
    part: RelativePartition,
    g: Admg,
    x: Mapping[str, int],
    metadata: Mapping[str, object] | None = None,
) -> LearnedInterventional:
    """Combine the two factor maps into one evaluator/generator object."""
    factors: dict[str, ConditionalTable] = dict(q_factors)
    for fam in r_factors.values():
        factors.update(_family_conditionals(fam, g, x))
    order = tuple(
        g.names[i] for i in g.topological_order() if g.names[i] not in x
    )
    missing = set(order) - set(factors)
    if missing:
        raise ScopeMismatch(f"no factor learned for {sorted(missing)}")
    meta = dict(metadata or {})
    meta.setdefault("structure", structure_params(g, g.indices(x)))
    if r_factors:
        # chain materializations along each fragment's recursion path; the
        # nominal pointwise approximation factor grows with this depth
        meta.setdefault(
            "fragment_rebase_depths",
            {str(k): fam.rebase_depth for k, fam in r_factors.items()},
        )
    return LearnedInterventional(g, dict(x), order, factors, meta)


def structure_params(g: Admg, x: Iterable[int]) -> dict[str, int]:
    """The structural quantities the sample-complexity guidance depends on."""
    part = relative_partition(g, x)
    k = max((len(c) for c in part.components), default=1)
    d = max((len(g.parents(i)) for i in range(g.n)), default=0)
    return {
        "n": g.n,
        "k": k,
        "d": d,
        "ell": part.ell,
        "c_low_size": len(part.c_low),
        "sigma": max(g.cards, default=2),
    }


def recommended_sample_size(
    g: Admg,
    x: Iterable[int],
    epsilon: float,
    delta: float,
    alpha: float,
) -> tuple[int, dict[str, float]]:
    """Sample-size guidance from the accuracy targets.

    The budget splits the total variation target between the Bayes-net part
    (through its KL bound) and the fragment tables (pointwise, scaled by the
    recursion blow-up). Constants are indicative, not guarantees.
    """
    p = structure_params(g, x)
    n, k, d, ell, sigma = p["n"], p["k"], p["d"], p["ell"], p["sigma"]
    eps_q = epsilon / 2.0
    r_scale = 2.0 * (3.0 * k) ** (k + 1) * max(ell, 1) * sigma ** (k * ell)
    eps_r = epsilon / r_scale
    kl_target = 2.0 * eps_q**2
    m_q = (
        n * sigma ** (k * d + d) / (alpha ** p["c_low_size"] * kl_target)
        * math.log(n * sigma ** (k * d + d + 1) / delta)
    )
    m_r = (
        (k * d + d + 1) / (alpha**2 * eps_r**2)
        * math.log(sigma * max(k, 1) * max(ell, 1) / delta + 1.0)
    )
    m = int(math.ceil(max(m_q, m_r, 1.0)))
    return m, {"m_q": m_q, "m_r": m_r, "eps_q": eps_q, "eps_r": eps_r}


def learn_interventional(
    samples: Samples,
    g: Admg,
    x: Mapping[str, int],
    config: LearnConfig | None = None,
) -> LearnedInterventional:
    """Full pipeline against a sample batch: partition, learn both factor
    groups, assemble."""
    config = config or LearnConfig()
    xset = g.indices(x)
    part = relative_partition(g, xset)
    q = learn_q(samples, g, part, config)
    r = learn_r(samples, g, part, x, config)
    meta = {
        "m": samples.m,
        "epsilon": config.epsilon,
        "delta": config.delta,
        "alpha": config.alpha,
        "source": "samples",
        "rng_algorithm": samples.rng_algorithm,
    }
    return assemble(q, r, part, g, x, meta)


def fit_from_table(
    obs: PmfTable,
    g: Admg,
    x: Mapping[str, int],
) -> LearnedInterventional:
    """Infinite-sample limit: plug an exact observational table straight in.

    All factors become exact ratios of the table, so the assembled evaluator
    reproduces the identification formula with no statistical error.
    """
    xset = g.indices(x)
    part = relative_partition(g, xset)
    q = _q_from_table(obs, g, part)
    r = learn_r(obs, g, part, x)
    return assemble(q, r, part, g, x, {"source": "exact-table"})


# -- exact structural identities (verification helpers) -------------------------


def tian_q_value(
    obs: PmfTable, g: Admg, part: RelativePartition, env: Mapping[str, int]
) -> float:
    """Product of exact effective-parent conditionals over the non-intervened
    components, evaluated at a full assignment."""
    order = g.topological_order()
    out = 1.0
    for i in sorted(part.c_high):
        name = g.names[i]
        zs = sorted(g.effective_parents(order, i))
        znames = [g.names[z] for z in zs]
        num = obs.marginal_to(set(znames) | {name}).pmf(env)
        den = obs.marginal_to(set(znames)).pmf(env)
        if den == 0.0:
            raise PositivityViolation(name, {z: env[z] for z in znames}, "table")
        out *= num / den
    return out


def tian_q_table(
    obs: PmfTable,
    g: Admg,
    part: RelativePartition,
    fix: Mapping[str, int],
    factors: Mapping[str, ConditionalTable] | None = None,
) -> PmfTable:
    """The non-intervened-components distribution for one fixing of the rest.

    With ``factors`` given, learned rows replace the exact conditionals.
    """
    names = tuple(g.names[i] for i in sorted(part.c_high))
    cards = tuple(g.cards[i] for i in sorted(part.c_high))
    arr = np.empty(cards, dtype=np.float64)
    for combo in np.ndindex(*cards):
        env = dict(fix)
        env.update(zip(names, (int(c) for c in combo)))
        if factors is None:
            arr[combo] = tian_q_value(obs, g, part, env)
        else:
            out = 1.0
            for n in names:
                f = factors[n]
                out *= float(f.row(env)[env[n]])
            arr[combo] = out
    return PmfTable(names, arr, context=dict(fix), normalized=False)


def kl_decomposition_sides(
    obs: PmfTable,
    g: Admg,
    part: RelativePartition,
    q_factors: Mapping[str, ConditionalTable],
    fix: Mapping[str, int],
) -> tuple[float, float]:
    """Both sides of the Bayes-net KL decomposition for one fixing.

    Left: KL between the exact and learned component distributions computed
    directly. Right: the per-variable sum of conditioning-weighted row KLs.
    """
    order = g.topological_order()
    q = tian_q_table(obs, g, part, fix)
    q_hat = tian_q_table(obs, g, part, fix, q_factors)
    direct = float(
        np.sum(np.where(q.probs > 0.0, q.probs * np.log(
            np.where(q.probs > 0.0, q.probs, 1.0)
            / np.where(q_hat.probs > 0.0, q_hat.probs, 1.0)
        ), 0.0))
    )
    decomposed = 0.0
    high_names = set(q.names)
    for i in sorted(part.c_high):
        name = g.names[i]
        zs = sorted(g.effective_parents(order, i))
        znames = [g.names[z] for z in zs]
        free = [z for z in znames if z in high_names]
        fcards = [g.cards[g.index(z)] for z in free]
        joint = obs.marginal_to(set(znames) | {name})
        z_marg = obs.marginal_to(set(znames))
        q_marg = q.marginal_to(free)
        for combo in np.ndindex(*fcards):
            env = dict(fix)
            env.update(zip(free, (int(c) for c in combo)))
            weight = q_marg.pmf(env) if free else 1.0
            if weight == 0.0:
                continue
            den = z_marg.pmf(env)
            true_row = np.array([
                joint.pmf(env | {name: s}) / den
                for s in range(g.cards[i])
            ])
            hat_row = q_factors[name].row(env)
            mask = true_row > 0.0
            decomposed += weight * float(
                np.sum(true_row[mask] * np.log(true_row[mask] / hat_row[mask]))
            )
    return direct, decomposed
