"""Shared registry for the acceptance criteria pass/fail lines."""

LINES = []


def record(name, ok, detail=""):
    line = "%-14s %s  %s" % (name, "PASS" if ok else "FAIL", detail)
    LINES.append(line)
    print(line)
    return ok
