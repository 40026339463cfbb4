"""One test per acceptance result, each at the tolerance stated in its line.

Every criterion runs once; its results are cached and echoed in the
terminal summary as ``[PASS|FAIL] criterion K: ...`` lines.
"""
import pytest

from conftest import ACCEPTANCE_LINES
from fglap.acceptance import CRITERIA

RESULT_KEYS = {
    1: ["1", "1-runtime"],
    2: ["2a", "2b", "2c"],
    3: ["3a", "3b", "3c", "3-runtime"],
    4: ["4"],
    5: ["5a", "5b", "5c"],
    6: ["6"],
    7: ["7a", "7b", "7c", "7d", "7-runtime"],
    8: ["8"],
    9: ["9a", "9b"],
    10: ["10"],
    11: ["11"],
    12: ["12"],
}

_cache = {}


def results_for(criterion):
    if criterion not in _cache:
        _cache[criterion] = {r.key: r for r in CRITERIA[criterion]()}
        for r in _cache[criterion].values():
            print(r.line())
            ACCEPTANCE_LINES.append(r.line())
    return _cache[criterion]


def test_every_criterion_has_result_keys():
    assert sorted(RESULT_KEYS) == sorted(CRITERIA)


@pytest.mark.slow
@pytest.mark.parametrize("criterion,key", [(c, k) for c, keys in RESULT_KEYS.items() for k in keys])
def test_acceptance(criterion, key):
    results = results_for(criterion)
    assert sorted(results) == sorted(RESULT_KEYS[criterion])
    r = results[key]
    assert r.passed, r.line()
