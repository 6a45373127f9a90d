import numpy as np
import pytest

from calibmatch import _backend
from calibmatch.combinatorial import DecisionRule, Problem


@pytest.fixture(params=_backend.available(), ids=lambda m: m.NAME)
def kernel(request):
    return request.param


@pytest.fixture
def path_weights():
    # 4-node path a-b-c-d: ab=0.6, bc=1.0, cd=0.6, other pairs 0
    w = np.zeros(6)
    w[0], w[3], w[5] = 0.6, 1.0, 0.6
    return w


@pytest.fixture
def one_dim_instance():
    """K=1, m=1, mu=0.8, all-ones weight (constant rule picking action 0)."""
    from calibmatch.model import FiniteDistribution, TabularPredictor
    from calibmatch.weights import FrozenRule

    problem = Problem.best_action(1)
    dist = FiniteDistribution(np.array([1.0]), np.array([[0.8]]))
    gamma = TabularPredictor(np.array([[0.0]]))
    W = [FrozenRule(DecisionRule.fixed_set((0,), id="ones"), gamma, problem)]
    return problem, dist, gamma, W


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(RESULTS, key=lambda s: int(s.split(".")[0])):
        ok, detail = RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
