"""Distances between distributions given tables, evaluators, and samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple

import numpy as np

from .learn import LearnedInterventional
from .scm import CausalBayesNet, exact_interventional, latent_project
from .tables import PmfTable, Samples, ScopeMismatch


class InfiniteKL(ArithmeticError):
    """The first distribution puts mass outside the second's support."""


class ZeroEvaluatorMass(ArithmeticError):
    """The reference evaluator returned zero at a sampled point."""


class GraphMismatch(ValueError):
    """The learned object and the ground-truth net disagree on the graph."""


def _check_aligned(a: PmfTable, b: PmfTable) -> None:
    if a.names != b.names:
        raise ScopeMismatch(f"tables over {a.names} and {b.names} are not aligned")


def exact_tv(a: PmfTable, b: PmfTable) -> float:
    """Total variation distance: half the entrywise L1 difference."""
    _check_aligned(a, b)
    return 0.5 * float(np.abs(a.probs - b.probs).sum())


def exact_kl(a: PmfTable, b: PmfTable) -> float:
    """KL divergence in nats, with the 0*log(0/q) = 0 convention."""
    _check_aligned(a, b)
    pa = a.probs
    pb = b.probs
    if np.any((pa > 0.0) & (pb == 0.0)):
        raise InfiniteKL("first table has mass outside the second's support")
    mask = pa > 0.0
    return float(np.sum(pa[mask] * np.log(pa[mask] / pb[mask])))


class TvEstimate(NamedTuple):
    value: float
    samples_used: int


def estimate_tv(
    sampler: Callable[[int, int], Samples],
    eval_p: Callable[[Mapping[str, int]], float],
    eval_q: Callable[[Mapping[str, int]], float],
    epsilon: float,
    delta: float,
    seed: int,
) -> TvEstimate:
    """Monte-Carlo estimate of the distance between two evaluators.

    ``sampler(seed, m)`` must draw from the first distribution. The mean of
    ``max(0, 1 - q(x)/p(x))`` over the draws estimates the distance; with
    pointwise-accurate evaluators the additive error is within ``4*epsilon``
    with probability at least ``1 - delta``.
    """
    m = int(math.ceil(2.0 * epsilon**-2 * math.log(2.0 / delta)))
    batch = sampler(seed, m)
    total = 0.0
    for a in batch.assignments():
        p = eval_p(a)
        if p == 0.0:
            raise ZeroEvaluatorMass(f"reference evaluator is zero at {a!r}")
        total += max(0.0, 1.0 - eval_q(a) / p)
    return TvEstimate(total / m, m)


@dataclass(frozen=True)
class FactorError:
    """Worst conditional-row error of one learned factor against the truth."""

    target: str
    worst_event: dict[str, int]
    abs_error: float


@dataclass(frozen=True)
class VerifyReport:
    tv: float
    kl: float | None
    x: dict[str, int]
    m: int | None
    factor_errors: tuple[FactorError, ...] = ()

    def worst_factor(self) -> FactorError | None:
        if not self.factor_errors:
            return None
        return max(self.factor_errors, key=lambda f: f.abs_error)


def compare_to_oracle(
    li: LearnedInterventional,
    net: CausalBayesNet,
    x: Mapping[str, int],
) -> VerifyReport:
    """Materialize the learned evaluator and compare it to the exact
    interventional table of the ground-truth net."""
    if latent_project(net) != li.graph:
        raise GraphMismatch("net does not project onto the learned object's graph")
    if dict(x) != dict(li.x):
        raise GraphMismatch(f"object was learned for {li.x}, queried with {dict(x)}")
    oracle = exact_interventional(net, x)
    learned = li.table().aligned_to(oracle.names)
    tv = exact_tv(learned, oracle)
    try:
        kl = exact_kl(oracle, learned)
    except InfiniteKL:
        kl = None
    factor_errors = []
    for name in li.order:
        f = li.factors[name]
        free = [c for c in f.cond if c not in li.x]
        joint = oracle.marginal_to(set(free) | {name})
        cond_marg = oracle.marginal_to(set(free))
        worst = 0.0
        worst_event: dict[str, int] = {}
        cards = [li.graph.cards[li.graph.index(c)] for c in free]
        for combo in np.ndindex(*cards):
            env = dict(li.x)
            env.update(zip(free, (int(c) for c in combo)))
            mass = cond_marg.pmf(env) if free else 1.0
            if mass <= 0.0:
                continue  # unreachable configuration: rows are immaterial
            row = f.row(env)
            for s in range(f.target_card):
                true_p = joint.pmf(env | {name: s}) / mass
                err = abs(float(row[s]) - true_p)
                if err > worst:
                    worst = err
                    worst_event = {k: v for k, v in env.items() if k in free}
                    worst_event[name] = s
        factor_errors.append(FactorError(name, worst_event, worst))
    m = li.metadata.get("m") if isinstance(li.metadata, dict) else None
    return VerifyReport(
        tv=tv, kl=kl, x=dict(x), m=m, factor_errors=tuple(factor_errors)
    )
