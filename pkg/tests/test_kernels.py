"""Compiled and pure-Python kernels must agree bit for bit."""

import numpy as np
import pytest

from calibmatch import _backend, _pykernels
from oracles import brute_force_matching


def test_selected_backend_is_listed():
    assert _backend.BACKEND in {m.NAME for m in _backend.available()}


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_kernel_matches_enumeration(kernel, n):
    rng = np.random.default_rng(100 + n)
    for _ in range(50):
        w = rng.random(n * (n - 1) // 2)
        if n <= 6:
            assert kernel.max_weight_matching(n, w) == list(brute_force_matching(n, w)[0])
        assert kernel.max_weight_matching(n, w) == _pykernels.max_weight_matching(n, w)


def test_kernels_agree_on_ties(kernel):
    rng = np.random.default_rng(3)
    for n in (4, 6, 9):
        for _ in range(30):
            w = rng.integers(0, 3, size=n * (n - 1) // 2) / 4.0
            assert kernel.max_weight_matching(n, w) == _pykernels.max_weight_matching(n, w)
            assert kernel.greedy_matching(n, w) == _pykernels.greedy_matching(n, w)
            assert kernel.greedy_matching(n, w, 0.5) == _pykernels.greedy_matching(n, w, 0.5)


def test_large_instance_agrees(kernel):
    w = np.random.default_rng(11).random(12 * 11 // 2)
    assert kernel.max_weight_matching(12, w) == _pykernels.max_weight_matching(12, w)


def test_read_only_input(kernel):
    w = np.linspace(0, 1, 6)
    w.setflags(write=False)
    assert kernel.max_weight_matching(4, w) == _pykernels.max_weight_matching(4, w)
