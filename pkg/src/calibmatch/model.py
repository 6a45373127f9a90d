"""Finite-support distributions, tabular predictors and exact expectations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from calibmatch.combinatorial import DecisionRule, Problem, apply_rule
from calibmatch.errors import InputError

LABEL_MODELS = ("point_mass", "bernoulli")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Joint law of (context, label) with K context atoms.

    Context ``k`` has probability ``probs[k]`` and conditional label mean
    ``means[k]``. Labels are either the mean itself (point mass) or
    independent Bernoulli draws per coordinate.
    """

    probs: np.ndarray
    means: np.ndarray
    label_model: str = "point_mass"

    def __post_init__(self):
        p = _readonly(self.probs)
        mu = _readonly(self.means)
        if p.ndim != 1 or p.shape[0] < 1:
            raise InputError("probs must be a nonempty vector")
        if mu.ndim != 2 or mu.shape[0] != p.shape[0] or mu.shape[1] < 1:
            raise InputError(f"means must have shape (K, m) with K={p.shape[0]}")
        if np.isnan(p).any() or np.isnan(mu).any():
            raise InputError("NaN in distribution")
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
            raise InputError(f"probs must be nonnegative and sum to 1 (sum={p.sum()!r})")
        if (mu < 0).any() or (mu > 1).any():
            raise InputError("conditional means must lie in [0, 1]")
        if self.label_model not in LABEL_MODELS:
            raise InputError(f"unknown label model {self.label_model!r}")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "means", mu)

    @property
    def K(self) -> int:
        return self.probs.shape[0]

    @property
    def m(self) -> int:
        return self.means.shape[1]

    def to_dict(self) -> dict:
        return {
            "probs": self.probs.tolist(),
            "means": self.means.tolist(),
            "label_model": self.label_model,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteDistribution":
        return cls(np.asarray(d["probs"], float), np.asarray(d["means"], float),
                   d.get("label_model", "point_mass"))


@dataclass(frozen=True, eq=False)
class TabularPredictor:
    """One prediction vector in [0, 1]^m per context index."""

    table: np.ndarray

    def __post_init__(self):
        t = _readonly(self.table)
        if t.ndim != 2:
            raise InputError("predictor table must have shape (K, m)")
        if np.isnan(t).any():
            raise InputError("NaN in predictor table")
        if (t < 0).any() or (t > 1).any():
            raise InputError("predictions must lie in [0, 1]")
        object.__setattr__(self, "table", t)

    @property
    def K(self) -> int:
        return self.table.shape[0]

    @property
    def m(self) -> int:
        return self.table.shape[1]

    def __call__(self, k: int) -> np.ndarray:
        return self.table[k]

    def to_list(self) -> list:
        return self.table.tolist()


@dataclass(frozen=True)
class Sample:
    context: int
    label: np.ndarray


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """N samples stored column-wise: context indices and label rows."""

    contexts: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return self.contexts.shape[0]

    def __iter__(self) -> Iterator[Sample]:
        for k, y in zip(self.contexts, self.labels):
            yield Sample(int(k), y)

    def __getitem__(self, j: int) -> Sample:
        return Sample(int(self.contexts[j]), self.labels[j])

    def context_statistics(self, K: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-context sample counts and label sums, shapes (K,) and (K, m)."""
        counts = np.bincount(self.contexts, minlength=K).astype(np.float64)
        sums = np.column_stack([
            np.bincount(self.contexts, weights=self.labels[:, e], minlength=K)
            for e in range(self.labels.shape[1])
        ])
        return counts, sums


def _check_dims(dist: FiniteDistribution, predictor: TabularPredictor) -> None:
    if predictor.table.shape != dist.means.shape:
        raise InputError(
            f"predictor shape {predictor.table.shape} != distribution shape {dist.means.shape}"
        )


def bayes_predictor(dist: FiniteDistribution) -> TabularPredictor:
    return TabularPredictor(dist.means)


def selections(predictor: TabularPredictor, rule: DecisionRule, problem: Problem) -> np.ndarray:
    """(K, m) 0/1 matrix: row k marks apply_rule(rule, problem, predictor(k))."""
    out = np.zeros((predictor.K, problem.m))
    for k in range(predictor.K):
        out[k, list(apply_rule(rule, problem, predictor.table[k]))] = 1.0
    return out


def rule_value(dist: FiniteDistribution, predictor: TabularPredictor,
               rule: DecisionRule, problem: Problem) -> float:
    """Exact expected true weight of the set the rule picks from the predictions."""
    _check_dims(dist, predictor)
    per_context = (selections(predictor, rule, problem) * dist.means).sum(axis=1)
    return float(dist.probs @ per_context)


def mse_potential(dist: FiniteDistribution, predictor: TabularPredictor) -> float:
    _check_dims(dist, predictor)
    sq = ((predictor.table - dist.means) ** 2).sum(axis=1)
    return float(dist.probs @ sq)


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replicate/call ``index`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def sample(dist: FiniteDistribution, rng_seed, N: int) -> SampleBatch:
    """Draw N i.i.d. (context, label) pairs.

    ``rng_seed`` is an integer seed or an existing ``numpy.random.Generator``.
    """
    if N < 1:
        raise InputError(f"sample size must be >= 1, got {N}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    contexts = rng.choice(dist.K, size=N, p=dist.probs)
    mu = dist.means[contexts]
    if dist.label_model == "point_mass":
        labels = mu.copy()
    else:
        labels = (rng.random(mu.shape) < mu).astype(np.float64)
    return SampleBatch(contexts, labels)
