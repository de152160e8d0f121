"""Dense probability tables over small ordered variable sets, plus sample batches."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

TOTAL_TOL = 1e-9


class ScopeMismatch(ValueError):
    """An assignment or table does not line up with the expected variable scope."""


def strides_for(cards: Sequence[int]) -> tuple[int, ...]:
    """Row-major strides; the last variable varies fastest."""
    out = [1] * len(cards)
    for i in range(len(cards) - 2, -1, -1):
        out[i] = out[i + 1] * cards[i + 1]
    return tuple(out)


def iter_assignments(names: Sequence[str], cards: Sequence[int]) -> Iterator[dict[str, int]]:
    """Enumerate assignments in row-major order. Empty scope yields one empty dict."""
    for combo in np.ndindex(*cards):
        yield dict(zip(names, combo))


@dataclass(frozen=True, eq=False)
class PmfTable:
    """A probability mass table over an ordered set of discrete variables.

    ``probs`` has one axis per variable, in ``names`` order. ``context``
    optionally records fixed values the table is conditioned on.
    Unnormalized intermediates must set ``normalized=False``.
    """

    names: tuple[str, ...]
    probs: np.ndarray
    context: Mapping[str, int] | None = None
    normalized: bool = True

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "names", tuple(self.names))
        if probs.ndim != len(self.names):
            raise ScopeMismatch(
                f"table has {probs.ndim} axes but {len(self.names)} names"
            )
        if len(set(self.names)) != len(self.names):
            raise ScopeMismatch(f"duplicate variable names: {self.names}")
        if probs.size and float(probs.min()) < -1e-12:
            raise ValueError("negative probability mass")
        if self.normalized and abs(self.total - 1.0) > TOTAL_TOL:
            raise ValueError(f"table mass {self.total!r} deviates from 1")

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.probs.shape)

    @property
    def scope(self) -> frozenset[str]:
        return frozenset(self.names)

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ScopeMismatch(f"{name!r} not in table over {self.names}") from None

    def pmf(self, assignment: Mapping[str, int]) -> float:
        """Mass at an assignment. Extra keys are ignored, missing ones are an error."""
        try:
            idx = tuple(assignment[n] for n in self.names)
        except KeyError as missing:
            raise ScopeMismatch(f"assignment lacks value for {missing}") from None
        return float(self.probs[idx])

    def marginal_to(self, keep: Iterable[str]) -> "PmfTable":
        keep = set(keep)
        unknown = keep - self.scope
        if unknown:
            raise ScopeMismatch(f"cannot keep unknown variables {sorted(unknown)}")
        drop_axes = tuple(i for i, n in enumerate(self.names) if n not in keep)
        kept = tuple(n for n in self.names if n in keep)
        return PmfTable(
            kept, self.probs.sum(axis=drop_axes) if drop_axes else self.probs,
            context=self.context, normalized=self.normalized,
        )

    def marginal_dropping(self, drop: Iterable[str]) -> "PmfTable":
        return self.marginal_to(self.scope - set(drop))

    def sliced(self, fixed: Mapping[str, int]) -> "PmfTable":
        """Fix some coordinates. The result is an unnormalized slice."""
        relevant = {n: v for n, v in fixed.items() if n in self.scope}
        if not relevant:
            return self
        idx = tuple(relevant.get(n, slice(None)) for n in self.names)
        kept = tuple(n for n in self.names if n not in relevant)
        ctx = dict(self.context or {})
        ctx.update(relevant)
        return PmfTable(kept, self.probs[idx], context=ctx, normalized=False)

    def aligned_to(self, names: Sequence[str]) -> "PmfTable":
        names = tuple(names)
        if set(names) != self.scope or len(names) != len(self.names):
            raise ScopeMismatch(f"cannot align {self.names} to {names}")
        perm = tuple(self.names.index(n) for n in names)
        return PmfTable(
            names, np.transpose(self.probs, perm),
            context=self.context, normalized=self.normalized,
        )

    def renormalized(self) -> "PmfTable":
        total = self.total
        if total <= 0.0:
            raise ValueError("cannot renormalize a zero-mass table")
        return PmfTable(self.names, self.probs / total, context=self.context)

    def table(self) -> "PmfTable":
        """Distribution-access hook: a table is its own materialization."""
        return self

    def assignments(self) -> Iterator[dict[str, int]]:
        return iter_assignments(self.names, self.cards)


@dataclass(frozen=True, eq=False)
class Samples:
    """A batch of joint observations: one column per variable, one row per draw."""

    names: tuple[str, ...]
    values: np.ndarray
    rng_algorithm: str | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[1] != len(self.names):
            raise ScopeMismatch("sample array must be (m, n_vars)")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def m(self) -> int:
        return int(self.values.shape[0])

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise ScopeMismatch(f"{name!r} not among sampled variables") from None

    def project(self, names: Sequence[str]) -> "Samples":
        cols = [self.names.index(n) for n in names]
        return Samples(tuple(names), self.values[:, cols], self.rng_algorithm)

    def assignments(self) -> Iterator[dict[str, int]]:
        for row in self.values:
            yield {n: int(v) for n, v in zip(self.names, row)}

    def counts_over(self, names: Sequence[str], cards: Sequence[int]) -> np.ndarray:
        """Joint occurrence counts over a sub-scope, shaped like the sub-scope."""
        names = tuple(names)
        cards = tuple(cards)
        if not names:
            return np.array(float(self.m))
        strides = strides_for(cards)
        codes = np.zeros(self.m, dtype=np.int64)
        for n, s in zip(names, strides):
            codes += self.column(n).astype(np.int64) * s
        size = int(np.prod(cards))
        return np.bincount(codes, minlength=size).reshape(cards).astype(np.float64)


@dataclass(frozen=True, eq=False)
class EmpiricalAccess:
    """Pmf access backed by a sample batch: relative frequencies."""

    samples: Samples
    cards: tuple[int, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return self.samples.names

    def table(self) -> PmfTable:
        counts = self.samples.counts_over(self.names, self.cards)
        return PmfTable(self.names, counts / self.samples.m)

    def pmf(self, assignment: Mapping[str, int]) -> float:
        return self.table().pmf(assignment)
