"""Shared fixtures: benchmark objectives and the (expensive) predefined sweeps.

Sweeps are session-scoped because several acceptance criteria read different
aspects of the same runs; each sweep executes exactly once per session.
"""

import time
from types import SimpleNamespace

import numpy as np
import pytest

from odeaccel import cli
from odeaccel.objectives import benchmark_objective


@pytest.fixture(scope="session")
def quad_obj():
    return benchmark_objective("quadratic", 7)


@pytest.fixture(scope="session")
def l4_obj():
    return benchmark_objective("l4", 11)


@pytest.fixture(scope="session")
def logistic_obj():
    return benchmark_objective("logistic", 0)


@pytest.fixture(scope="session")
def composite_obj():
    return benchmark_objective("composite", 5)


def _sweep(figure, tmp_factory, n_iters=None):
    out_dir = tmp_factory.mktemp(f"sweep_{figure}")
    start = time.perf_counter()
    traces = cli.run_sweep(figure, out_dir, n_iters=n_iters)
    seconds = time.perf_counter() - start
    return SimpleNamespace(
        dir=out_dir, traces={tr.label: tr for tr in traces}, seconds=seconds
    )


@pytest.fixture(scope="session")
def quad_sweep(tmp_path_factory):
    return _sweep("quad", tmp_path_factory)


@pytest.fixture(scope="session")
def decouple_sweep(tmp_path_factory):
    return _sweep("decouple", tmp_path_factory)


@pytest.fixture(scope="session")
def l4_sweep(tmp_path_factory):
    return _sweep("l4", tmp_path_factory)


@pytest.fixture(scope="session")
def logistic_sweep(tmp_path_factory):
    return _sweep("logistic", tmp_path_factory)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
