"""The auditing weight class: one frozen indicator per candidate rule plus
one live indicator for the optimal rule.

The two kinds depend on different arguments and must not be swapped:

* ``FrozenRule`` marks the set a candidate rule picks from the *original*
  predictor at context k. It never looks at the prediction being audited.
* ``LivePredictionRule`` marks the set the optimal rule picks from the
  prediction being audited. It never looks at the context.

Evaluating the candidate rules on the calibrated predictor instead would
still converge, but the end-to-end guarantee would no longer hold.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from calibmatch.combinatorial import DecisionRule, Problem, apply_rule, indicator
from calibmatch.errors import ConfigurationError, InputError
from calibmatch.model import TabularPredictor


class WeightFunction:
    id: str
    problem: Problem

    def __call__(self, prediction, k: int) -> np.ndarray:
        raise NotImplementedError

    def matrix(self, table: np.ndarray) -> np.ndarray:
        """Stack of evaluations at every context for prediction table ``table``."""
        return np.stack([self(table[k], k) for k in range(table.shape[0])])


class FrozenRule(WeightFunction):
    def __init__(self, rule: DecisionRule, gamma: TabularPredictor, problem: Problem):
        if gamma.m != problem.m:
            raise InputError(f"gamma has {gamma.m} coordinates, problem has {problem.m}")
        self.id = f"W1:{rule.id}"
        self.rule = rule
        self.problem = problem
        rows = [indicator(apply_rule(rule, problem, gamma.table[k]), problem.m)
                for k in range(gamma.K)]
        self._rows = np.stack(rows)
        self._rows.setflags(write=False)

    def __call__(self, prediction, k: int) -> np.ndarray:
        return self._rows[k]

    def matrix(self, table: np.ndarray) -> np.ndarray:
        return self._rows

    def __repr__(self):
        return f"FrozenRule({self.rule.id!r})"


class LivePredictionRule(WeightFunction):
    def __init__(self, rule: DecisionRule, problem: Problem, cache_size: int = 4096):
        self.id = "W2:cstar"
        self.rule = rule
        self.problem = problem
        self._cache: OrderedDict[bytes, np.ndarray] = OrderedDict()
        self._cache_size = cache_size

    def __call__(self, prediction, k: int = 0) -> np.ndarray:
        v = np.ascontiguousarray(prediction, dtype=np.float64)
        key = v.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        out = indicator(apply_rule(self.rule, self.problem, v), self.problem.m)
        out.setflags(write=False)
        self._cache[key] = out
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return out

    def __repr__(self):
        return f"LivePredictionRule({self.rule.id!r})"


def build_weight_class(C, c_star: DecisionRule, gamma: TabularPredictor,
                       problem: Problem) -> list[WeightFunction]:
    ids = [c.id for c in C]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ConfigurationError(f"duplicate rule ids in C: {dupes}")
    W: list[WeightFunction] = [FrozenRule(c, gamma, problem) for c in C]
    W.append(LivePredictionRule(c_star, problem))
    return W


def eval_weight(w: WeightFunction, prediction, context_index: int) -> np.ndarray:
    return w(prediction, context_index)
