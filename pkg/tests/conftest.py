import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from deadcore import extract_regions, solve
from _problems import disk_problem, oracle_problem_1d


@pytest.fixture(scope="session")
def sol_1d_p2q0_h256():
    return solve(oracle_problem_1d(2, 0, 2.0), tol=1e-8, resolution=513)


@pytest.fixture(scope="session")
def sol_1d_p2q0_h512():
    return solve(oracle_problem_1d(2, 0, 2.0), tol=1e-8, resolution=1025)


@pytest.fixture(scope="session")
def sol_1d_p2q05():
    return solve(oracle_problem_1d(2, 0.5, 12.0), tol=1e-9, resolution=2049)


@pytest.fixture(scope="session")
def sol_1d_p3q1():
    return solve(oracle_problem_1d(3, 1, 36.0), tol=1e-7, resolution=1025)


@pytest.fixture(scope="session")
def sol_2d_p2q0_161():
    return solve(disk_problem(2, 0, 2.0, 0.5), tol=1e-5, resolution=161)


@pytest.fixture(scope="session")
def sol_2d_p2q0_321():
    return solve(disk_problem(2, 0, 2.0, 0.5), tol=1e-5, resolution=321)


@pytest.fixture(scope="session")
def sol_2d_p3q1_193():
    return solve(disk_problem(3, 1, 45.0, 0.5), tol=1e-5, resolution=193)


@pytest.fixture(scope="session")
def sol_2d_p2q05_257():
    return solve(disk_problem(2, 0.5, 12.0, 0.4), tol=1e-6, resolution=257)


@pytest.fixture(scope="session")
def regions_of():
    cache = {}

    def get(sol):
        key = id(sol)
        if key not in cache:
            cache[key] = extract_regions(sol)
        return cache[key]

    return get
