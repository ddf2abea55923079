"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import OrderedDict

import pytest

CRITERIA = OrderedDict(
    [
        (1, "closed-form quantum kernels match truncated Fock overlaps"),
        (2, "kernel spot values"),
        (3, "real-part Gram matrices are PSD"),
        (4, "swap-test estimator coverage and shot scaling"),
        (5, "vacuum-projection estimator agrees with |K|^2"),
        (6, "SMO solver matches brute-force dual maximum"),
        (7, "accuracy bands for the squeezing amplitude and Gaussian kernels"),
        (8, "accuracy floors for the phase and periodic kernels"),
        (9, "kernel shape orderings"),
        (10, "benchmark determinism"),
    ]
)

_outcomes: dict[int, list[tuple[str, str]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(n, []).append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, text in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n:2d}: NOT RUN  {text}")
            continue
        failed = [name for name, outcome in results if outcome != "passed"]
        status = "FAIL" if failed else "PASS"
        detail = f"  (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {n:2d}: {status}  {text}{detail}")
