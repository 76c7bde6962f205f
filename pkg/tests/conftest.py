import time
from typing import NamedTuple

import numpy as np
import pytest

from dpsemantics import census, dgauss
from dpsemantics.dgauss import EmpiricalRoc

MC_SEED = 20210812
MC_SAMPLES = 1_000_000


class TimedRoc(NamedTuple):
    roc: EmpiricalRoc
    seconds: float


def _timed_roc(queries) -> TimedRoc:
    start = time.perf_counter()
    roc = dgauss.mc_roc(queries, MC_SAMPLES, MC_SEED)
    return TimedRoc(roc, time.perf_counter() - start)


@pytest.fixture(scope="session")
def production_table():
    return census.production_table()


@pytest.fixture(scope="session")
def mc_production_timed(production_table) -> TimedRoc:
    return _timed_roc(dgauss.affected_queries_from_table(production_table))


@pytest.fixture(scope="session")
def mc_scenario_a_timed(production_table) -> TimedRoc:
    scenario = census.builtin_scenario("A")
    return _timed_roc(dgauss.affected_queries_from_table(production_table, scenario))


@pytest.fixture(scope="session")
def mc_production(mc_production_timed) -> EmpiricalRoc:
    return mc_production_timed.roc


@pytest.fixture(scope="session")
def mc_scenario_a(mc_scenario_a_timed) -> EmpiricalRoc:
    return mc_scenario_a_timed.roc


@pytest.fixture()
def rng():
    return np.random.default_rng(987654321)
