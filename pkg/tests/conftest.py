import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# Acceptance tests are named test_criterion_<NN>[suffix]_<slug>; the hook
# below folds their outcomes into one PASS/FAIL line per criterion.
_CRITERION = re.compile(r"test_criterion_(\d+)")
_criterion_outcomes: dict[int, list] = {}
_criterion_titles: dict[int, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    num = int(match.group(1))
    _criterion_outcomes.setdefault(num, []).append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        match = _CRITERION.search(item.nodeid)
        if not match:
            continue
        num = int(match.group(1))
        doc = (item.function.__doc__ or "").strip().splitlines()
        if doc and num not in _criterion_titles:
            _criterion_titles[num] = doc[0]


def pytest_terminal_summary(terminalreporter):
    if not _criterion_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criterion_outcomes):
        outcomes = _criterion_outcomes[num]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        title = _criterion_titles.get(num, "")
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {title}")
