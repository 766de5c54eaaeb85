"""Acceptance suite: each criterion runs at its stated tolerance and prints one PASS/FAIL line.

Run directly with ``python3 tests/test_acceptance.py`` or through pytest
(``pytest -s tests/test_acceptance.py`` shows the lines).
"""
import os
import sys

import pytest

from stablewalk.acceptance import CRITERIA, DEFAULT_SEED, run_acceptance

WORKERS = int(os.environ.get("STABLEWALK_WORKERS", "2"))
IDS = list(range(1, len(CRITERIA) + 2))  # checks 1-11 plus determinism rerun (12)


@pytest.fixture(scope="module")
def results(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    return {r.cid: r for r in run_acceptance(seed=DEFAULT_SEED, out=out, workers=WORKERS)}


def test_every_criterion_reported(results):
    assert sorted(results) == IDS


@pytest.mark.parametrize("cid", IDS)
def test_criterion(results, cid):
    r = results[cid]
    print(r.line())
    assert r.passed, r.line()


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        res = run_acceptance(seed=DEFAULT_SEED, out=tmp, workers=WORKERS, echo=True)
    sys.exit(0 if all(r.passed for r in res) else 1)
