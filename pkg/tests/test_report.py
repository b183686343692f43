"""Report grammar: render/parse are inverse, errors carry byte offsets."""

from __future__ import annotations

import random
import string

import pytest

from issuediff.errors import ParseError
from issuediff.report import (
    SEPARATOR,
    Issue,
    make_issue,
    make_step,
    parse_report,
    procedure_of,
    render_issue,
    render_report,
)


def _simple_issue(bug_type="NULL_DEREFERENCE", file="src/a.c", line=12):
    steps = [
        make_step(1, file, 5, 1, "start of procedure use", ["int use(void) {"], 0),
        make_step(
            2,
            file,
            line,
            3,
            "Dereference of p",
            ["  int *p = NULL;", "  *p = 1;", "}"],
            1,
        ),
    ]
    return make_issue(bug_type, f"pointer `p` dereferenced at line {line}", steps)


def test_render_then_parse_round_trips_one_issue():
    issue = _simple_issue()
    text = render_issue(issue)
    parsed = parse_report(text)
    assert len(parsed) == 1
    got = parsed[0]
    assert got.bug_type == issue.bug_type
    assert got.file == issue.file
    assert (got.line, got.column) == (issue.line, issue.column)
    assert got.qualifier == issue.qualifier
    assert got.procedure == "use"
    assert len(got.trace) == 2
    assert got.trace[1].context == issue.trace[1].context
    assert got.trace[1].center == 1
    # Rendering what we parsed reproduces the exact bytes.
    assert render_issue(got) == text


def test_multi_issue_report_round_trips_with_separators():
    issues = [_simple_issue(line=12), _simple_issue("MEMORY_LEAK", "src/b.c", 30)]
    text = render_report(issues)
    assert f"\n{SEPARATOR}\n" in text
    parsed = parse_report(text)
    assert [i.bug_type for i in parsed] == ["NULL_DEREFERENCE", "MEMORY_LEAK"]
    assert render_report(parsed) == text


def test_involved_line_is_center_context_line():
    issue = _simple_issue()
    step = issue.trace[1]
    assert step.involved_line() == "  *p = 1;"


def test_function_entry_step_is_flagged():
    issue = _simple_issue()
    assert issue.trace[0].is_function_entry
    assert not issue.trace[1].is_function_entry
    assert procedure_of(issue.trace) == "use"


def test_header_must_match_last_step_location():
    issue = _simple_issue()
    text = render_issue(issue).replace(":12:3: error:", ":99:3: error:")
    with pytest.raises(ParseError):
        parse_report(text)


def test_parse_error_carries_byte_offset_of_bad_line():
    good = render_issue(_simple_issue())
    bad = good + "not a separator\n"
    with pytest.raises(ParseError) as excinfo:
        parse_report(bad)
    err = excinfo.value
    assert err.offset == len(good.encode("utf-8"))
    assert bad.encode("utf-8")[err.offset :].startswith(b"not a separator")


def test_parse_rejects_step_with_six_context_lines():
    issue = _simple_issue()
    text = render_issue(issue)
    # Inflate the second step's context past the cap.
    text = text.replace("  }\n", "  }\n  x;\n  y;\n  z;\n")
    with pytest.raises(ParseError) as excinfo:
        parse_report(text)
    assert "context lines" in str(excinfo.value)


def test_parse_rejects_nonincreasing_step_index():
    issue = _simple_issue()
    text = render_issue(issue).replace("2. src/a.c", "1. src/a.c")
    with pytest.raises(ParseError):
        parse_report(text)


def test_trailing_separator_is_an_error():
    text = render_issue(_simple_issue()) + SEPARATOR + "\n"
    with pytest.raises(ParseError):
        parse_report(text)


def test_source_name_appears_in_parse_errors():
    with pytest.raises(ParseError) as excinfo:
        parse_report("garbage\n", source="run7/report.txt")
    assert "run7/report.txt" in str(excinfo.value)


def _random_issue(rng: random.Random) -> Issue:
    files = ["pkg/one.c", "pkg/two.c", "inc/defs.h"]
    steps = []
    line = 1
    for k in range(1, rng.randint(2, 5) + 1):
        line += rng.randint(0, 40)
        n_ctx = rng.randint(1, 5)
        ctx = []
        for _ in range(n_ctx):
            body = "".join(
                rng.choice(string.ascii_letters + "  _;*+-()[]{}<>=%/")
                for _ in range(rng.randint(0, 30))
            )
            ctx.append(" " * rng.randint(0, 6) + body)
        desc = rng.choice(
            [
                "start of procedure f",
                "Assignment: x = y + 1",
                "Call: g(x)",
                "Parameter: n passed",
                "Offset added: index 3 of buf",
            ]
        )
        steps.append(
            make_step(
                k,
                rng.choice(files),
                line,
                rng.randint(1, 60),
                desc,
                ctx,
                rng.randrange(n_ctx),
            )
        )
    qualifier = "issue detail %d" % rng.randint(0, 999)
    return make_issue(rng.choice(["BUF", "LEAK_X", "NPE_2"]), qualifier, steps)


def test_random_reports_round_trip_exactly():
    rng = random.Random(1234)
    for _ in range(200):
        issues = [_random_issue(rng) for _ in range(rng.randint(1, 4))]
        text = render_report(issues)
        parsed = parse_report(text)
        assert render_report(parsed) == text
        assert len(parsed) == len(issues)
        for a, b in zip(issues, parsed):
            assert a.bug_type == b.bug_type
            assert [s.description for s in a.trace] == [
                s.description for s in b.trace
            ]
