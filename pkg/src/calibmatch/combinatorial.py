"""Feasible-set structures and deterministic solvers.

Weight vectors are indexed canonically: for matchings on the complete graph
K_n, coordinate ``e`` is the ``e``-th pair ``(u, v)``, ``u < v``, in
lexicographic order. Every solver breaks ties by index (lexicographically
smallest sorted index list), with ties decided by exact float equality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from calibmatch._backend import kernels
from calibmatch.errors import CapacityError, ConfigurationError, InputError

MAX_EXACT_NODES = 16

FeasibleSet = tuple  # sorted tuple of coordinate indices


@dataclass(frozen=True)
class Matroid:
    """Uniform or partition matroid over ``ground_size`` elements.

    A partition matroid splits the ground set into consecutive blocks and
    allows at most ``capacities[i]`` elements from block ``i``.
    """

    kind: str
    ground_size: int
    uniform_rank: int = 0
    block_sizes: tuple = ()
    capacities: tuple = ()

    @classmethod
    def uniform(cls, ground_size: int, rank: int) -> "Matroid":
        if not 0 <= rank <= ground_size:
            raise ConfigurationError(f"rank {rank} outside [0, {ground_size}]")
        return cls("uniform", ground_size, uniform_rank=rank)

    @classmethod
    def partition(cls, block_sizes, capacities) -> "Matroid":
        block_sizes = tuple(int(b) for b in block_sizes)
        capacities = tuple(int(c) for c in capacities)
        if len(block_sizes) != len(capacities):
            raise ConfigurationError("block_sizes and capacities differ in length")
        if any(b < 1 for b in block_sizes) or any(c < 0 for c in capacities):
            raise ConfigurationError("block sizes must be >= 1, capacities >= 0")
        return cls("partition", sum(block_sizes), block_sizes=block_sizes, capacities=capacities)

    @property
    def rank(self) -> int:
        if self.kind == "uniform":
            return self.uniform_rank
        return sum(min(b, c) for b, c in zip(self.block_sizes, self.capacities))

    def block_of(self, element: int) -> int:
        return int(np.searchsorted(np.cumsum(self.block_sizes), element, side="right"))

    def is_independent(self, indices) -> bool:
        indices = list(indices)
        if len(set(indices)) != len(indices):
            return False
        if any(not 0 <= i < self.ground_size for i in indices):
            return False
        if self.kind == "uniform":
            return len(indices) <= self.uniform_rank
        counts = [0] * len(self.block_sizes)
        for i in indices:
            counts[self.block_of(i)] += 1
        return all(c <= cap for c, cap in zip(counts, self.capacities))

    def to_dict(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform", "ground_size": self.ground_size, "rank": self.uniform_rank}
        return {
            "kind": "partition",
            "block_sizes": list(self.block_sizes),
            "capacities": list(self.capacities),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Matroid":
        if d["kind"] == "uniform":
            return cls.uniform(int(d["ground_size"]), int(d["rank"]))
        if d["kind"] == "partition":
            return cls.partition(d["block_sizes"], d["capacities"])
        raise ConfigurationError(f"unknown matroid kind {d['kind']!r}")


@dataclass(frozen=True)
class Problem:
    """A combinatorial task whose weight vector has ``m`` coordinates."""

    kind: str  # "matching" | "matroid" | "best_action"
    n: int = 0
    k: int = 0
    matroid: Matroid | None = None
    edges: tuple = field(default=(), compare=False, repr=False)

    @classmethod
    def matching(cls, n: int) -> "Problem":
        if n < 2:
            raise ConfigurationError("matching needs at least 2 nodes")
        return cls("matching", n=n, edges=tuple(itertools.combinations(range(n), 2)))

    @classmethod
    def matroid_base(cls, matroid: Matroid) -> "Problem":
        if matroid.ground_size < 1:
            raise ConfigurationError("matroid ground set must be nonempty")
        return cls("matroid", matroid=matroid)

    @classmethod
    def best_action(cls, k: int) -> "Problem":
        if k < 1:
            raise ConfigurationError("best action needs k >= 1")
        return cls("best_action", k=k)

    @property
    def m(self) -> int:
        if self.kind == "matching":
            return self.n * (self.n - 1) // 2
        if self.kind == "matroid":
            return self.matroid.ground_size
        return self.k

    @property
    def max_support(self) -> int:
        """Largest possible size of a feasible set."""
        if self.kind == "matching":
            return self.n // 2
        if self.kind == "matroid":
            return self.matroid.rank
        return 1

    @property
    def calibration_scale(self) -> int:
        """Normalizer for residual correlations: m, or the rank for matroids."""
        if self.kind == "matroid":
            return max(self.matroid.rank, 1)
        return self.m

    def is_feasible(self, indices) -> bool:
        indices = tuple(indices)
        if list(indices) != sorted(set(indices)) or any(not 0 <= i < self.m for i in indices):
            return False
        if self.kind == "matching":
            nodes = [x for e in indices for x in self.edges[e]]
            return len(nodes) == len(set(nodes))
        if self.kind == "matroid":
            return self.matroid.is_independent(indices)
        return len(indices) == 1

    def to_dict(self) -> dict:
        if self.kind == "matching":
            return {"kind": "matching", "n": self.n}
        if self.kind == "matroid":
            return {"kind": "matroid", "matroid": self.matroid.to_dict()}
        return {"kind": "best_action", "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "Problem":
        kind = d.get("kind")
        if kind == "matching":
            return cls.matching(int(d["n"]))
        if kind == "matroid":
            return cls.matroid_base(Matroid.from_dict(d["matroid"]))
        if kind == "best_action":
            return cls.best_action(int(d["k"]))
        raise ConfigurationError(f"unknown problem kind {kind!r}")


RULE_KINDS = ("exact_opt", "greedy", "threshold_greedy", "fixed", "argmax_action")


@dataclass(frozen=True)
class DecisionRule:
    """Deterministic map from a weight vector to a feasible set."""

    id: str
    kind: str
    tau: float = 0.0
    fixed: tuple = ()

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ConfigurationError(f"unknown rule kind {self.kind!r}")
        if self.kind == "threshold_greedy" and not 0.0 <= self.tau <= 1.0:
            raise ConfigurationError(f"threshold {self.tau} outside [0, 1]")

    @classmethod
    def exact_opt(cls, id: str = "exact_opt") -> "DecisionRule":
        return cls(id, "exact_opt")

    @classmethod
    def greedy(cls, id: str = "greedy") -> "DecisionRule":
        return cls(id, "greedy")

    @classmethod
    def threshold_greedy(cls, tau: float, id: str | None = None) -> "DecisionRule":
        return cls(id or f"threshold_greedy_{tau:g}", "threshold_greedy", tau=float(tau))

    @classmethod
    def fixed_set(cls, indices, id: str | None = None) -> "DecisionRule":
        indices = tuple(sorted(int(i) for i in indices))
        label = "_".join(map(str, indices)) or "empty"
        return cls(id or f"fixed_{label}", "fixed", fixed=indices)

    @classmethod
    def argmax_action(cls, id: str = "argmax") -> "DecisionRule":
        return cls(id, "argmax_action")

    def to_dict(self) -> dict:
        d = {"id": self.id, "kind": self.kind}
        if self.kind == "threshold_greedy":
            d["tau"] = self.tau
        if self.kind == "fixed":
            d["fixed"] = list(self.fixed)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionRule":
        kind = d["kind"]
        if kind == "fixed":
            return cls(d["id"], kind, fixed=tuple(sorted(int(i) for i in d.get("fixed", []))))
        return cls(d["id"], kind, tau=float(d.get("tau", 0.0)))


def default_matching_rules() -> list[DecisionRule]:
    return [
        DecisionRule.exact_opt(),
        DecisionRule.greedy(),
        DecisionRule.threshold_greedy(0.5),
        DecisionRule.fixed_set((), id="fixed_empty"),
    ]


def _as_weights(weights, m: int | None = None) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1:
        raise InputError("weights must be a 1-d vector")
    if m is not None and w.shape[0] != m:
        raise InputError(f"weight vector has {w.shape[0]} entries, expected {m}")
    if np.isnan(w).any():
        raise InputError("NaN in weight vector")
    if np.isinf(w).any():
        raise InputError("infinite entry in weight vector")
    return w


def _edge_count(n: int) -> int:
    return n * (n - 1) // 2


def exact_max_weight_matching(n: int, weights) -> FeasibleSet:
    """Exact maximum-weight matching on K_n via a DP over node subsets.

    Runs in O(2^n n) time and memory, so ``n`` is capped at 16.
    """
    if n > MAX_EXACT_NODES:
        raise CapacityError(f"exact matching supports at most {MAX_EXACT_NODES} nodes, got {n}")
    w = _as_weights(weights, _edge_count(n))
    if n < 2:
        return ()
    return tuple(kernels.max_weight_matching(n, w))


def greedy_matching(n: int, weights, threshold: float = -math.inf) -> FeasibleSet:
    w = _as_weights(weights, _edge_count(n))
    return tuple(kernels.greedy_matching(n, w, threshold))


def matroid_greedy_base(matroid: Matroid, weights, threshold: float = -math.inf) -> FeasibleSet:
    """Greedy max-weight base: scan by weight descending, keep if independent."""
    w = _as_weights(weights, matroid.ground_size)
    chosen: list[int] = []
    for e in sorted(range(len(w)), key=lambda i: (-w[i], i)):
        if w[e] < threshold:
            break
        if matroid.is_independent(chosen + [e]):
            chosen.append(e)
            if len(chosen) == matroid.rank:
                break
    return tuple(sorted(chosen))


def argmax_action(weights) -> FeasibleSet:
    w = _as_weights(weights)
    return (int(np.argmax(w)),)


def star_graph_embed(k: int) -> Problem:
    """Best-of-k actions as matching on a star with k leaves.

    Every matching of a star uses at most one edge, so picking the best
    action and the max-weight star matching coincide (up to the empty
    matching, which only wins when all values are <= 0).
    """
    return Problem.best_action(k)


REJECTION_ACTIONS = ("predict YES", "predict NO", "reject")


def apply_rule(rule: DecisionRule, problem: Problem, weights) -> FeasibleSet:
    w = _as_weights(weights, problem.m)
    kind = rule.kind
    if kind == "fixed":
        if not problem.is_feasible(rule.fixed):
            raise ConfigurationError(f"fixed set {rule.fixed} of rule {rule.id!r} is infeasible")
        return rule.fixed

    if problem.kind == "matching":
        if kind == "exact_opt":
            return exact_max_weight_matching(problem.n, w)
        if kind == "greedy":
            return greedy_matching(problem.n, w)
        if kind == "threshold_greedy":
            return greedy_matching(problem.n, w, rule.tau)
    elif problem.kind == "matroid":
        if kind in ("exact_opt", "greedy"):
            return matroid_greedy_base(problem.matroid, w)
        if kind == "threshold_greedy":
            return matroid_greedy_base(problem.matroid, w, rule.tau)
    else:
        if kind in ("exact_opt", "greedy", "argmax_action"):
            return argmax_action(w)
    raise ConfigurationError(f"rule kind {kind!r} does not apply to {problem.kind} problems")


def set_value(indices, weights) -> float:
    """Total weight of a feasible set, correctly rounded."""
    return math.fsum(float(weights[i]) for i in indices)


def indicator(indices, m: int) -> np.ndarray:
    out = np.zeros(m)
    out[list(indices)] = 1.0
    return out
