"""Ground-truth causal Bayes nets with explicit hidden variables.

This is the verification backbone: it can sample observational data, compute
exact observational and interventional tables by brute-force enumeration, and
project the hidden structure down to an ADMG over the observables. Everything
here favors auditability over asymptotics; state spaces are capped at desk
scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .admg import Admg, CycleDetected, GraphError
from .tables import PmfTable, Samples, strides_for

STATE_CEILING = 2**24
CPT_ROW_TOL = 1e-12
RNG_ALGORITHM = "numpy-pcg64"


class StateSpaceTooLarge(ValueError):
    """The joint state space exceeds the brute-force enumeration ceiling."""


class NonStandardForm(ValueError):
    """A hidden variable has parents or does not have exactly two observable children."""


@dataclass(frozen=True, eq=False)
class CbnNode:
    """One mechanism: a variable, its parents, and a conditional table.

    ``cpt`` has one row per parent configuration (row-major in ``parents``
    order) and one column per symbol; every row sums to 1.
    """

    name: str
    cardinality: int
    parents: tuple[str, ...]
    cpt: np.ndarray
    hidden: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        cpt = np.asarray(self.cpt, dtype=np.float64)
        if cpt.ndim == 1:
            cpt = cpt.reshape(1, -1)
        object.__setattr__(self, "cpt", cpt)
        if self.cardinality < 1:
            raise GraphError(f"{self.name}: cardinality must be positive")
        if cpt.shape[1] != self.cardinality:
            raise GraphError(f"{self.name}: cpt has {cpt.shape[1]} columns, "
                             f"expected {self.cardinality}")
        if cpt.min() < -CPT_ROW_TOL:
            raise GraphError(f"{self.name}: negative cpt entry")
        bad = np.abs(cpt.sum(axis=1) - 1.0) > CPT_ROW_TOL
        if bad.any():
            raise GraphError(f"{self.name}: cpt row {int(np.argmax(bad))} does not sum to 1")


class CausalBayesNet:
    """A Bayes net over observables and hidden variables, read causally.

    The node list fixes the variable order used for tables and samples.
    Instances are immutable after construction.
    """

    def __init__(self, nodes: Sequence[CbnNode]):
        self.nodes: tuple[CbnNode, ...] = tuple(nodes)
        names = [nd.name for nd in self.nodes]
        if len(set(names)) != len(names):
            raise GraphError("node names must be unique")
        self._pos = {nd.name: i for i, nd in enumerate(self.nodes)}
        for nd in self.nodes:
            if len(set(nd.parents)) != len(nd.parents):
                raise GraphError(f"{nd.name}: duplicate parents")
            for p in nd.parents:
                if p not in self._pos:
                    raise GraphError(f"{nd.name}: unknown parent {p!r}")
            expected_rows = int(np.prod([self.node(p).cardinality for p in nd.parents]))
            if nd.cpt.shape[0] != expected_rows:
                raise GraphError(f"{nd.name}: cpt has {nd.cpt.shape[0]} rows, "
                                 f"expected {expected_rows}")
        self.topological_order()  # raises CycleDetected on cycles

    def node(self, name: str) -> CbnNode:
        return self.nodes[self._pos[name]]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(nd.name for nd in self.nodes)

    @property
    def observables(self) -> tuple[str, ...]:
        return tuple(nd.name for nd in self.nodes if not nd.hidden)

    @property
    def hiddens(self) -> tuple[str, ...]:
        return tuple(nd.name for nd in self.nodes if nd.hidden)

    def cardinality(self, name: str) -> int:
        return self.node(name).cardinality

    def observable_cards(self) -> tuple[int, ...]:
        return tuple(nd.cardinality for nd in self.nodes if not nd.hidden)

    def topological_order(self) -> tuple[str, ...]:
        indeg = {nd.name: len(nd.parents) for nd in self.nodes}
        children: dict[str, list[str]] = {nd.name: [] for nd in self.nodes}
        for nd in self.nodes:
            for p in nd.parents:
                children[p].append(nd.name)
        ready = sorted([n for n, d in indeg.items() if d == 0], key=self._pos.get)
        out: list[str] = []
        while ready:
            u = ready.pop(0)
            out.append(u)
            for c in children[u]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort(key=self._pos.get)
        if len(out) != len(self.nodes):
            raise CycleDetected("causal Bayes net graph contains a cycle")
        return tuple(out)

    def joint_states(self) -> int:
        return int(np.prod([nd.cardinality for nd in self.nodes], dtype=np.float64))


def _check_ceiling(net: CausalBayesNet) -> None:
    if net.joint_states() > STATE_CEILING:
        raise StateSpaceTooLarge(
            f"joint state space {net.joint_states()} exceeds ceiling {STATE_CEILING}"
        )


def _full_joint(net: CausalBayesNet, skip: frozenset[str] = frozenset()) -> np.ndarray:
    """Dense joint over all nodes in declaration order, omitting the mechanisms
    of ``skip`` (their axes remain but carry no factor)."""
    _check_ceiling(net)
    pos = {nd.name: i for i, nd in enumerate(net.nodes)}
    shape = tuple(nd.cardinality for nd in net.nodes)
    joint = np.ones(shape, dtype=np.float64)
    for nd in net.nodes:
        if nd.name in skip:
            continue
        axes = [pos[p] for p in nd.parents] + [pos[nd.name]]
        arr = nd.cpt.reshape(
            tuple(net.cardinality(p) for p in nd.parents) + (nd.cardinality,)
        )
        arr = np.transpose(arr, np.argsort(axes))
        full_shape = [1] * len(shape)
        for ax in sorted(axes):
            full_shape[ax] = shape[ax]
        joint = joint * arr.reshape(full_shape)
    return joint


def exact_observational(net: CausalBayesNet) -> PmfTable:
    """Exact joint over the observables, marginalizing out every hidden node."""
    joint = _full_joint(net)
    hidden_axes = tuple(i for i, nd in enumerate(net.nodes) if nd.hidden)
    if hidden_axes:
        joint = joint.sum(axis=hidden_axes)
    return PmfTable(net.observables, joint)


def exact_interventional(net: CausalBayesNet, x: Mapping[str, int]) -> PmfTable:
    """Exact truncated-factorization distribution over observables minus ``x``.

    Mechanisms of intervened variables are deleted and their values clamped;
    hidden variables are summed out. With ``x`` empty this coincides exactly
    with :func:`exact_observational`.
    """
    for name, val in x.items():
        nd = net.node(name)
        if nd.hidden:
            raise GraphError(f"cannot intervene on hidden variable {name!r}")
        if not (0 <= val < nd.cardinality):
            raise GraphError(f"value {val} out of range for {name!r}")
    joint = _full_joint(net, skip=frozenset(x))
    hidden_axes = tuple(i for i, nd in enumerate(net.nodes) if nd.hidden)
    if hidden_axes:
        joint = joint.sum(axis=hidden_axes)
    obs = net.observables
    idx = tuple(x[n] if n in x else slice(None) for n in obs)
    kept = tuple(n for n in obs if n not in x)
    return PmfTable(kept, joint[idx], context=dict(x))


def interventional_family(net: CausalBayesNet, x_vars: Iterable[str]) -> PmfTable:
    """Truncated-factorization table over all observables at once.

    The intervened variables keep their axes; slicing them at an assignment
    gives exactly the interventional distribution for that assignment. Marked
    unnormalized because the whole array sums to the number of slices.
    """
    x_vars = frozenset(x_vars)
    for name in x_vars:
        if net.node(name).hidden:
            raise GraphError(f"cannot intervene on hidden variable {name!r}")
    joint = _full_joint(net, skip=x_vars)
    hidden_axes = tuple(i for i, nd in enumerate(net.nodes) if nd.hidden)
    if hidden_axes:
        joint = joint.sum(axis=hidden_axes)
    return PmfTable(net.observables, joint, normalized=False)


def sample_observational(net: CausalBayesNet, seed: int, m: int) -> Samples:
    """Draw ``m`` i.i.d. joint observations and drop the hidden coordinates.

    Each node is sampled in topological order from its conditional row via one
    uniform draw. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    order = net.topological_order()
    cols: dict[str, np.ndarray] = {}
    for name in order:
        nd = net.node(name)
        if nd.parents:
            strides = strides_for([net.cardinality(p) for p in nd.parents])
            rows = np.zeros(m, dtype=np.int64)
            for p, s in zip(nd.parents, strides):
                rows += cols[p] * s
        else:
            rows = np.zeros(m, dtype=np.int64)
        cum = np.cumsum(nd.cpt, axis=1)[rows]
        u = rng.random(m)
        vals = (u[:, None] > cum).sum(axis=1)
        cols[name] = np.minimum(vals, nd.cardinality - 1).astype(np.int64)
    obs = net.observables
    values = np.stack([cols[n] for n in obs], axis=1) if obs else np.zeros((m, 0), int)
    return Samples(obs, values, rng_algorithm=RNG_ALGORITHM)


def latent_project(net: CausalBayesNet) -> Admg:
    """Collapse hidden variables to bidirected edges between their two children.

    Requires standard form: every hidden node is parentless and has exactly two
    observable children. Observable-to-observable edges pass through unchanged.
    """
    obs = net.observables
    pos = {n: i for i, n in enumerate(obs)}
    children: dict[str, list[str]] = {h: [] for h in net.hiddens}
    directed: set[tuple[int, int]] = set()
    for nd in net.nodes:
        for p in nd.parents:
            if net.node(p).hidden:
                if nd.hidden:
                    raise NonStandardForm(f"hidden {p!r} has hidden child {nd.name!r}")
                children[p].append(nd.name)
            elif not nd.hidden:
                directed.add((pos[p], pos[nd.name]))
    bidirected: set[tuple[int, int]] = set()
    for h in net.hiddens:
        if net.node(h).parents:
            raise NonStandardForm(f"hidden variable {h!r} has parents")
        kids = children[h]
        if len(kids) != 2:
            raise NonStandardForm(
                f"hidden variable {h!r} has {len(kids)} observable children, expected 2"
            )
        a, b = sorted(pos[k] for k in kids)
        if a == b:
            raise NonStandardForm(f"hidden variable {h!r} points twice at one child")
        bidirected.add((a, b))
    cards = tuple(net.cardinality(n) for n in obs)
    return Admg(obs, cards, frozenset(directed), frozenset(bidirected))


@dataclass(frozen=True)
class PositivityReport:
    """Outcome of a strong-positivity audit for one component."""

    component: tuple[str, ...]
    event_scope: tuple[str, ...]
    min_probability: float
    worst_event: dict[str, int]
    alpha: float

    @property
    def ok(self) -> bool:
        return self.min_probability >= self.alpha


def check_strong_positivity(
    net: CausalBayesNet,
    components: Iterable[Iterable[str]],
    alpha: float,
) -> tuple[bool, list[PositivityReport]]:
    """Verify that every configuration of each component-plus-parents set has
    probability at least ``alpha``; reports the minimizing event per component."""
    obs_table = exact_observational(net)
    obs = net.observables
    obs_parents: dict[str, set[str]] = {n: set() for n in obs}
    for nd in net.nodes:
        if nd.hidden:
            continue
        for p in nd.parents:
            if not net.node(p).hidden:
                obs_parents[nd.name].add(p)
    reports = []
    for comp in components:
        comp = tuple(comp)
        scope = set(comp)
        for v in comp:
            scope |= obs_parents[v]
        scope_t = tuple(n for n in obs if n in scope)
        marg = obs_table.marginal_to(scope_t)
        flat = marg.probs.reshape(-1)
        worst_flat = int(flat.argmin())
        worst_idx = np.unravel_index(worst_flat, marg.probs.shape)
        worst = {n: int(v) for n, v in zip(marg.names, worst_idx)}
        reports.append(PositivityReport(
            component=comp,
            event_scope=marg.names,
            min_probability=float(flat[worst_flat]),
            worst_event=worst,
            alpha=alpha,
        ))
    return all(r.ok for r in reports), reports


# -- random instances for property tests and experiments ----------------------


def _floored_rows(rng: np.random.Generator, n_rows: int, card: int, gamma: float) -> np.ndarray:
    """Dirichlet(1) rows floored entrywise at gamma and renormalized, so every
    conditional symbol probability is bounded away from zero."""
    rows = rng.dirichlet(np.ones(card), size=n_rows)
    rows = np.maximum(rows, gamma)
    return rows / rows.sum(axis=1, keepdims=True)


def random_net_for(
    g: Admg,
    seed: int,
    gamma: float = 0.1,
    hidden_cardinality: int = 2,
) -> CausalBayesNet:
    """Realize an ADMG as a standard-form causal Bayes net with random CPTs.

    One hidden variable per bidirected edge. Flooring at ``gamma`` makes
    strong positivity certifiable by construction.
    """
    rng = np.random.default_rng(seed)
    hidden_names = []
    base = set(g.names)
    for k, _ in enumerate(g.bidirected):
        name = f"U{k}"
        while name in base:
            name = "_" + name
        hidden_names.append(name)
        base.add(name)
    nodes: list[CbnNode] = []
    edge_list = sorted(g.bidirected)
    for h, _ in zip(hidden_names, edge_list):
        nodes.append(CbnNode(h, hidden_cardinality, (),
                             _floored_rows(rng, 1, hidden_cardinality, gamma), hidden=True))
    for i, name in enumerate(g.names):
        parents = [g.names[p] for p in sorted(g.parents(i))]
        parents += [hidden_names[k] for k, e in enumerate(edge_list) if i in e]
        n_rows = 1
        for p in parents:
            n_rows *= hidden_cardinality if p in hidden_names else g.cards[g.names.index(p)]
        nodes.append(CbnNode(name, g.cards[i], tuple(parents),
                             _floored_rows(rng, n_rows, g.cards[i], gamma)))
    return CausalBayesNet(nodes)


def random_admg(
    seed: int,
    n: int,
    max_in_degree: int = 2,
    n_bidirected: int = 2,
    max_component: int = 3,
    cardinality: int = 2,
) -> Admg:
    """A random sparse ADMG with bounded in-degree and c-component size."""
    rng = np.random.default_rng(seed)
    names = tuple(f"V{i}" for i in range(n))
    directed: set[tuple[int, int]] = set()
    for child in range(1, n):
        k = int(rng.integers(0, min(max_in_degree, child) + 1))
        for p in rng.choice(child, size=k, replace=False):
            directed.add((int(p), child))
    g = Admg(names, (cardinality,) * n, frozenset(directed), frozenset())
    bidirected: set[tuple[int, int]] = set()
    attempts = 0
    while len(bidirected) < n_bidirected and attempts < 50 * (n_bidirected + 1):
        attempts += 1
        a, b = rng.choice(n, size=2, replace=False)
        edge = (int(min(a, b)), int(max(a, b)))
        if edge in bidirected:
            continue
        candidate = Admg(names, (cardinality,) * n, frozenset(directed),
                         frozenset(bidirected | {edge}))
        if max(len(c) for c in candidate.c_components()) <= max_component:
            bidirected.add(edge)
            g = candidate
    return g
