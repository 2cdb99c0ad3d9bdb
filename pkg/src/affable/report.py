"""The report grammar shared by every subcommand.

    STAGE <name> PASS|FAIL [<detail>]
    MARGIN <n> <N>
    VALUE <key> <value>

Rationals are written p/q, never as decimals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

STAGE_RE = re.compile(r"^STAGE (?P<name>[A-Za-z0-9_.'-]+) (?P<status>PASS|FAIL)(?: (?P<detail>.*))?$")
MARGIN_RE = re.compile(r"^MARGIN (?P<n>-?\d+) (?P<depth>\d+)$")
VALUE_RE = re.compile(r"^VALUE (?P<key>[A-Za-z0-9_.'-]+) (?P<value>\S+)$")


class ReportSyntaxError(ValueError):
    pass


def _clean(detail: str) -> str:
    return " ".join(detail.split())


def stage_line(name: str, passed: bool, detail: str = "") -> str:
    status = "PASS" if passed else "FAIL"
    detail = _clean(detail)
    return f"STAGE {name} {status} {detail}" if detail else f"STAGE {name} {status}"


def margin_line(n: int, depth: int) -> str:
    return f"MARGIN {n} {depth}"


def format_value(value: object) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value).replace(" ", "")


def value_line(key: str, value: object) -> str:
    return f"VALUE {key} {format_value(value)}"


@dataclass
class Report:
    stages: list[tuple[str, bool, str]] = field(default_factory=list)
    margins: list[tuple[int, int]] = field(default_factory=list)
    values: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.stages)


def parse_report(text: str) -> Report:
    report = Report()
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if m := STAGE_RE.match(line):
            report.stages.append((m["name"], m["status"] == "PASS", m["detail"] or ""))
        elif m := MARGIN_RE.match(line):
            report.margins.append((int(m["n"]), int(m["depth"])))
        elif m := VALUE_RE.match(line):
            report.values[m["key"]] = m["value"]
        else:
            raise ReportSyntaxError(f"line {number}: not a report line: {line!r}")
    return report
