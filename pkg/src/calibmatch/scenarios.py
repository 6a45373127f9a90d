"""Instance generators: the unbiased-but-misleading two-arm example, random
matching instances with noisy predictors, uniform matroids and a three-action
rejection setup."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from calibmatch.combinatorial import (
    REJECTION_ACTIONS,
    DecisionRule,
    Matroid,
    Problem,
    apply_rule,
    default_matching_rules,
    star_graph_embed,
)
from calibmatch.errors import ConfigurationError, InputError
from calibmatch.model import FiniteDistribution, TabularPredictor


@dataclass(frozen=True, eq=False)
class Scenario:
    problem: Problem
    dist: FiniteDistribution
    gamma: TabularPredictor
    rules: tuple
    label: str = ""

    def __post_init__(self):
        m = self.problem.m
        if self.dist.m != m or self.gamma.m != m:
            raise ConfigurationError(
                f"dimension mismatch: problem m={m}, dist m={self.dist.m}, gamma m={self.gamma.m}"
            )
        if self.gamma.K != self.dist.K:
            raise ConfigurationError("gamma and distribution disagree on the number of contexts")
        for rule in self.rules:
            if rule.kind == "fixed" and not self.problem.is_feasible(rule.fixed):
                raise ConfigurationError(f"fixed rule {rule.id!r} is infeasible")
        object.__setattr__(self, "rules", tuple(self.rules))

    @property
    def c_star(self) -> DecisionRule:
        return DecisionRule.exact_opt("cstar")

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "problem": self.problem.to_dict(),
            "distribution": self.dist.to_dict(),
            "gamma": self.gamma.to_list(),
            "rules": [r.to_dict() for r in self.rules],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls(
            problem=Problem.from_dict(d["problem"]),
            dist=FiniteDistribution.from_dict(d["distribution"]),
            gamma=TabularPredictor(np.asarray(d["gamma"], dtype=float)),
            rules=tuple(DecisionRule.from_dict(r) for r in d["rules"]),
            label=d.get("label", ""),
        )


def make_counterexample(eps: float) -> Scenario:
    """Two deterministic arms worth eps^2 and eps, scaled into [0, 1].

    Context A (probability eps) predicts (eps^2, 1), context B predicts
    (eps^2, 0). The prediction for arm 1 is unbiased, yet argmax on it
    picks arm 1 only on A.
    """
    if not 0 < eps < 0.5:
        raise InputError(f"eps must lie in (0, 0.5), got {eps}")
    problem = star_graph_embed(2)
    arms = [eps * eps, eps]
    dist = FiniteDistribution(np.array([eps, 1 - eps]), np.array([arms, arms]))
    gamma = TabularPredictor(np.array([[eps * eps, 1.0], [eps * eps, 0.0]]))
    rules = (
        DecisionRule.argmax_action("argmax"),
        DecisionRule.fixed_set((0,), id="arm0"),
        DecisionRule.fixed_set((1,), id="arm1"),
    )
    return Scenario(problem, dist, gamma, rules, label=f"counterexample(eps={eps:g})")


def _noisy(rng: np.random.Generator, means: np.ndarray, noise: float) -> TabularPredictor:
    g = rng.standard_normal(means.shape)
    return TabularPredictor(np.clip(means + noise * g, 0.0, 1.0))


def make_random_matching_instance(seed: int, n: int, K: int, noise: float,
                                  label_model: str = "point_mass") -> Scenario:
    if n > 16 or n < 2:
        raise InputError(f"n must lie in [2, 16], got {n}")
    if K < 1 or noise < 0:
        raise InputError("need K >= 1 and noise >= 0")
    rng = np.random.default_rng(seed)
    problem = Problem.matching(n)
    means = rng.random((K, problem.m))
    dist = FiniteDistribution(np.full(K, 1.0 / K), means, label_model)
    return Scenario(problem, dist, _noisy(rng, means, noise), tuple(default_matching_rules()),
                    label=f"random-matching(seed={seed},n={n},K={K},noise={noise:g})")


def make_matroid_instance(seed: int, ground_size: int, rank: int, K: int, noise: float,
                          label_model: str = "point_mass") -> Scenario:
    """Uniform matroid with candidate rules built from average orderings.

    Candidates: greedy base on the predictions, threshold greedy at 0.5, and
    three fixed bases (top-r by average true mean, top-r by average
    prediction, the first r elements).
    """
    if not 0 <= rank <= ground_size:
        raise InputError(f"rank {rank} outside [0, {ground_size}]")
    if K < 1 or noise < 0:
        raise InputError("need K >= 1 and noise >= 0")
    rng = np.random.default_rng(seed)
    problem = Problem.matroid_base(Matroid.uniform(ground_size, rank))
    means = rng.random((K, ground_size))
    dist = FiniteDistribution(np.full(K, 1.0 / K), means, label_model)
    gamma = _noisy(rng, means, noise)
    greedy = DecisionRule.exact_opt("greedy_base")
    rules = (
        greedy,
        DecisionRule.threshold_greedy(0.5),
        DecisionRule.fixed_set(apply_rule(greedy, problem, dist.probs @ means), id="fixed_mean_order"),
        DecisionRule.fixed_set(apply_rule(greedy, problem, dist.probs @ gamma.table),
                               id="fixed_prediction_order"),
        DecisionRule.fixed_set(range(rank), id="fixed_first"),
    )
    return Scenario(problem, dist, gamma, rules,
                    label=f"uniform-matroid(seed={seed},ground={ground_size},r={rank},K={K},noise={noise:g})")


def make_rejection_instance(seed: int, K: int, noise: float, reject_value: float = 0.7,
                            label_model: str = "point_mass") -> Scenario:
    """Binary classification with a reject option as a 3-action choice.

    Context k has positive-class probability q_k; the actions' mean rewards
    are (q_k, 1 - q_k, reject_value).
    """
    if not 0 <= reject_value <= 1:
        raise InputError("reject_value must lie in [0, 1]")
    if K < 1 or noise < 0:
        raise InputError("need K >= 1 and noise >= 0")
    rng = np.random.default_rng(seed)
    problem = star_graph_embed(len(REJECTION_ACTIONS))
    q = rng.random(K)
    means = np.column_stack([q, 1 - q, np.full(K, reject_value)])
    dist = FiniteDistribution(np.full(K, 1.0 / K), means, label_model)
    rules = (
        DecisionRule.argmax_action("argmax"),
        DecisionRule.fixed_set((0,), id="always_yes"),
        DecisionRule.fixed_set((1,), id="always_no"),
        DecisionRule.fixed_set((2,), id="always_reject"),
    )
    return Scenario(problem, dist, _noisy(rng, means, noise), rules,
                    label=f"rejection(seed={seed},K={K},noise={noise:g})")


PRESETS = {
    "counterexample": lambda seed, eps=0.1: make_counterexample(eps),
    "random-matching": lambda seed, n=4, K=8, noise=0.3, label_model="point_mass":
        make_random_matching_instance(seed, n, K, noise, label_model),
    "uniform-matroid": lambda seed, ground_size=8, rank=3, K=8, noise=0.3, label_model="point_mass":
        make_matroid_instance(seed, ground_size, rank, K, noise, label_model),
    "rejection": lambda seed, K=8, noise=0.3, reject_value=0.7, label_model="point_mass":
        make_rejection_instance(seed, K, noise, reject_value, label_model),
}


def from_preset(name: str, seed: int = 0, **params) -> Scenario:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    try:
        return factory(seed, **params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for preset {name!r}: {exc}") from None
