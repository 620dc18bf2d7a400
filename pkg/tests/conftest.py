"""Collects acceptance sub-checks and prints one line per criterion."""

from collections import OrderedDict

CRITERIA: "OrderedDict[int, dict]" = OrderedDict()


def record(number: int, title: str, check: str, passed: bool, detail: str = "") -> None:
    entry = CRITERIA.setdefault(number, {"title": title, "checks": []})
    entry["checks"].append((check, bool(passed), detail))
    print(f"criterion {number} [{check}]: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        entry = CRITERIA[n]
        ok = all(p for _, p, _ in entry["checks"])
        parts = "; ".join(f"{c} {'ok' if p else 'FAILED'}{': ' + d if d else ''}" for c, p, d in entry["checks"])
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:>2} {entry['title']} ({parts})")
