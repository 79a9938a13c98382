"""Pytest wiring: a closing summary block with one verdict line for every
end-to-end acceptance test, so the gate reads as pass/fail per requirement."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    reports = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if rep.when == "call" or not rep.passed:
                reports.append(rep)
    if not reports:
        return

    try:
        from oracles import ACCEPTANCE_NOTES
    except ImportError:
        ACCEPTANCE_NOTES = {}

    seen = set()
    reports.sort(key=lambda r: r.location[1])
    terminalreporter.write_sep("=", "acceptance summary")
    for rep in reports:
        name = rep.nodeid.split("::")[-1]
        if name in seen:
            continue
        seen.add(name)
        verdict = "PASS" if rep.passed else "FAIL"
        note = ACCEPTANCE_NOTES.get(name, "")
        suffix = f" ({note})" if note else ""
        terminalreporter.write_line(f"[{verdict}] {name}{suffix}")
