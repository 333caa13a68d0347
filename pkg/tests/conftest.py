def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One visible [PASS]/[FAIL] line per acceptance criterion."""
    verdicts = {}
    for reports in terminalreporter.stats.values():
        for rep in reports:
            nodeid = getattr(rep, "nodeid", "")
            if "test_criterion_" not in nodeid:
                continue
            failed = getattr(rep, "outcome", "") == "failed"
            verdicts[nodeid] = verdicts.get(nodeid, False) or failed
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(verdicts):
        marker = "FAIL" if verdicts[nodeid] else "PASS"
        terminalreporter.write_line(f"[{marker}] {nodeid.split('::')[-1]}")
