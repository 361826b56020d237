"""Acceptance criteria 1-10, one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed to the
terminal) or directly with ``python tests/test_acceptance.py``.
"""

import time

import pytest

from spinlattice import cli
from spinlattice.selftest import run_suite

CRITERIA = [
    (1, "projector suite", "projector", 60),
    (2, "spinor norm and similitude", "spinor_norm_similitude", None),
    (3, "filtration identities", "filtration", None),
    (4, "maximality oracle equivalence", "maximality_oracle", None),
    (5, "self-dual embedding", "embedding", None),
    (6, "local model fixture", "local_model", 120),
    (7, "refined model comparison", "mref_comparison", None),
    (8, "L-diamond and left multiplication", "ldiamond_visom", None),
    (9, "Lie extension", "lie_extension", None),
]


def _report(capsys, number, title, ok, info):
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {info}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return line


def check_criterion(number, title, suite, limit, capsys=None):
    t0 = time.perf_counter()
    res = run_suite(suite, seed=0)
    elapsed = time.perf_counter() - t0
    ok = res.passed and (limit is None or elapsed < limit)
    info = f"{res.checked} checks, {len(res.failures)} failures, {elapsed:.1f}s"
    if limit is not None:
        info += f" (limit {limit}s)"
    _report(capsys, number, title, ok, info)
    return ok, res


def check_cli_determinism(capsys=None):
    t0 = time.perf_counter()
    first = cli.cmd_selftest(seed=0)
    second = cli.cmd_selftest(seed=0)
    a, b = cli.render(first, "structured"), cli.render(second, "structured")
    ok = first["passed"] and a == b and cli.render(first, "text") == cli.render(second, "text")
    info = f"selftest passed={first['passed']}, byte-stable={a == b}, {time.perf_counter() - t0:.1f}s"
    _report(capsys, 10, "CLI determinism", ok, info)
    return ok, first


@pytest.mark.parametrize("number, title, suite, limit", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, suite, limit, capsys):
    ok, res = check_criterion(number, title, suite, limit, capsys)
    assert ok, res.failures


def test_criterion_10_cli_determinism(capsys):
    ok, rep = check_cli_determinism(capsys)
    assert ok, [s["failures"] for s in rep["suites"] if not s["passed"]]


if __name__ == "__main__":
    results = [check_criterion(*c)[0] for c in CRITERIA]
    results.append(check_cli_determinism()[0])
    raise SystemExit(0 if all(results) else 1)
