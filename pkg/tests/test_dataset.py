"""Dataset records: extraction, remapping, serialization, splitting."""

from __future__ import annotations

import random

import pytest

from issuediff import dataset as ds
from issuediff.errors import FileUnreadable, NothingExtractable
from issuediff.gitrepo import CommitDiff, CommitMeta, FileChange, Hunk, VersionPair
from issuediff.labeler import LabelDecision, fingerprint
from issuediff.report import make_issue, make_step

BEFORE_C = """\
int helper(int a)
{
    return a + 1;
}

int use(int *p)
{
    int x = helper(1);
    *p = x;
    return x;
}
"""

AFTER_C = """\
int helper(int a)
{
    return a + 1;
}

int use(int *p)
{
    int x = helper(1);
    if (p)
        *p = x;
    return x;
}
"""


def _pair(h="a1" * 20, date=100):
    meta = CommitMeta(hash=h, parent_hash="b2" * 20, author_date=date, message="fix crash")
    return VersionPair.from_meta(meta)


def _issue(file="lib/a.c", lines=(7, 9)):
    steps = [
        make_step(1, file, lines[0], 1, "start of procedure use()", ("use(int *p)",), 0),
        make_step(2, file, lines[1], 5, "invalid access to `p`", ("*p = x;",), 0),
    ]
    return make_issue("NULL_DEREFERENCE", "pointer `p` could be null", steps)


def _decision(issue, pair, classification="fixed", label=1, reason="fixed"):
    return LabelDecision(
        fingerprint=fingerprint(issue),
        label=label,
        reason=reason,
        pair=pair,
        occurrences=((pair, classification),),
    )


def _diff(pair, hunks, file="lib/a.c"):
    fc = FileChange(before_path=file, after_path=file, hunks=list(hunks))
    return CommitDiff(commit=pair.meta, files=(fc,))


FIX_HUNK = Hunk(before_start=9, before_count=1, after_start=9, after_count=2)


def _trees(tmp_path):
    before = tmp_path / "before"
    after = tmp_path / "after"
    for root, text in ((before, BEFORE_C), (after, AFTER_C)):
        (root / "lib").mkdir(parents=True)
        (root / "lib" / "a.c").write_text(text)
    return before, after


# --- report compression and record serialization --------------------------


def test_zip_report_round_trip_and_determinism():
    text = "lib/a.c:9:5: error: NULL_DEREFERENCE\n  pointer `p` could be null\n"
    once, twice = ds.zip_report(text), ds.zip_report(text)
    assert once == twice
    assert ds.unzip_report(once) == text
    assert ds.unzip_report(ds.zip_report("")) == ""


def test_example_dict_round_trip(tmp_path):
    before, after = _trees(tmp_path)
    pair = _pair()
    issue = _issue()
    ex = ds.build_auto_labeler_example(
        _decision(issue, pair), issue, pair, _diff(pair, [FIX_HUNK]),
        before, after, project="sample", compiler_args="cc -c lib/a.c",
    )
    back = ds.example_from_dict(ds.example_to_dict(ex))
    assert back == ex
    d = ds.example_to_dict(ex)
    assert "warnings" not in d  # empty optional fields stay off the wire
    neg = ds.build_after_fix_example(ex, after, _diff(pair, [FIX_HUNK]))
    assert "zipped_bug_report" not in ds.example_to_dict(neg)


def test_write_dataset_sorts_by_id_and_is_order_invariant(tmp_path):
    before, after = _trees(tmp_path)
    pair = _pair()
    examples = []
    for qualifier in ("zeta issue", "alpha issue", "mid issue"):
        issue = make_issue(
            "NULL_DEREFERENCE", qualifier,
            [make_step(1, "lib/a.c", 9, 5, "invalid access", ("*p = x;",), 0)],
        )
        examples.append(
            ds.build_auto_labeler_example(
                _decision(issue, pair), issue, pair, _diff(pair, [FIX_HUNK]),
                before, after, project="sample",
            )
        )
    p1, p2 = tmp_path / "one.ndjson", tmp_path / "two.ndjson"
    ds.write_dataset(p1, examples)
    ds.write_dataset(p2, list(reversed(examples)))
    assert p1.read_bytes() == p2.read_bytes()
    ids = [e.id for e in ds.read_dataset(p1)]
    assert ids == sorted(ids)
    assert ds.read_dataset(p1) == sorted(examples, key=lambda e: e.id)


# --- line remapping -------------------------------------------------------


def test_remap_line_basic_shapes():
    replace = [Hunk(9, 1, 9, 2)]  # one line became two
    assert ds.remap_line(7, replace) == 7
    assert ds.remap_line(9, replace) is None
    assert ds.remap_line(10, replace) == 11

    insertion = [Hunk(4, 0, 5, 3)]  # three lines inserted after line 4
    assert ds.remap_line(4, insertion) == 4
    assert ds.remap_line(5, insertion) == 8

    deletion = [Hunk(2, 2, 1, 0)]  # lines 2-3 removed
    assert ds.remap_line(1, deletion) == 1
    assert ds.remap_line(2, deletion) is None
    assert ds.remap_line(3, deletion) is None
    assert ds.remap_line(4, deletion) == 2

    assert ds.remap_line(41, []) == 41


def test_remap_line_against_explicit_alignment():
    # before lines 1..10; remove 2-3, replace 6 with two lines, insert after 8
    hunks = [Hunk(2, 2, 1, 0), Hunk(6, 1, 4, 2), Hunk(8, 0, 7, 1)]
    expect = {1: 1, 2: None, 3: None, 4: 2, 5: 3, 6: None, 7: 6, 8: 7, 9: 9, 10: 10}
    for line, want in expect.items():
        assert ds.remap_line(line, hunks) == want, f"line {line}"
    # order of the hunk list must not matter
    rng = random.Random(3)
    for _ in range(10):
        shuffled = hunks[:]
        rng.shuffle(shuffled)
        assert [ds.remap_line(i, shuffled) for i in expect] == list(expect.values())


# --- function extraction --------------------------------------------------


def test_extract_function_finds_enclosing_span(tmp_path):
    before, _ = _trees(tmp_path)
    fe = ds.extract_function(before, "lib/a.c", 9)
    assert (fe.name, fe.start_line, fe.end_line) == ("use", 6, 11)
    assert fe.code.splitlines()[0] == "int use(int *p)"
    assert fe.code.splitlines()[-1] == "}"
    assert not fe.touched_by_commit


def test_extract_function_window_fallback(tmp_path):
    tree = tmp_path / "t"
    tree.mkdir()
    (tree / "top.c").write_text("".join(f"int g{i};\n" for i in range(80)))
    fe = ds.extract_function(tree, "top.c", 40)
    assert fe.name == ds.UNKNOWN_FUNCTION
    assert (fe.start_line, fe.end_line) == (15, 65)


def test_extract_function_missing_file(tmp_path):
    with pytest.raises(FileUnreadable):
        ds.extract_function(tmp_path, "nope.c", 1)


# --- building records -----------------------------------------------------


def test_auto_labeler_example_fields(tmp_path):
    before, after = _trees(tmp_path)
    pair = _pair()
    issue = _issue()
    decision = _decision(issue, pair)
    ex = ds.build_auto_labeler_example(
        decision, issue, pair, _diff(pair, [FIX_HUNK]),
        before, after, project="sample", compiler_args="cc -c lib/a.c",
    )
    assert ex.id == f"{decision.fingerprint}/{pair.before_hash[:8]}"
    assert (ex.label, ex.label_source) == (1, ds.AUTO_LABELER)
    assert ex.bug_type == "NULL_DEREFERENCE"
    assert ex.bug_info["file"] == "lib/a.c" and ex.bug_info["line"] == 9
    assert ex.bug_info["procedure"] == "use"
    assert ex.versions == {"before": pair.before_hash, "after": pair.after_hash}
    assert ex.commit["hash"] == pair.after_hash
    assert ex.commit["author_date"] == 100
    assert len(ex.commit["message_digest"]) == 40  # digest, not the raw message
    # both trace steps live in use(): one deduplicated extract, marked touched
    assert len(ex.functions) == 1
    fe = ex.functions[0]
    assert (fe.name, fe.touched_by_commit) == ("use", True)
    assert "*p = x;" in fe.code  # before-side body
    assert ds.unzip_report(ex.zipped_bug_report) == issue.raw_report
    assert ex.warnings == ()


def test_untouched_function_not_marked(tmp_path):
    before, after = _trees(tmp_path)
    pair = _pair()
    issue = _issue(lines=(7, 9))
    # the fixing diff touched some other file entirely
    diff = _diff(pair, [Hunk(1, 1, 1, 1)], file="lib/other.c")
    ex = ds.build_auto_labeler_example(
        _decision(issue, pair, label=0, reason="untouched_by_diff"),
        issue, pair, diff, before, after, project="sample",
    )
    assert ex.functions[0].touched_by_commit is False


def test_missing_trace_file_becomes_warning(tmp_path):
    before, after = _trees(tmp_path)
    pair = _pair()
    steps = [
        make_step(1, "lib/gone.c", 3, 1, "start of procedure ghost()", (), 0),
        make_step(2, "lib/a.c", 9, 5, "invalid access to `p`", ("*p = x;",), 0),
    ]
    issue = make_issue("NULL_DEREFERENCE", "pointer `p` could be null", steps)
    ex = ds.build_auto_labeler_example(
        _decision(issue, pair), issue, pair, _diff(pair, [FIX_HUNK]),
        before, after, project="sample",
    )
    assert len(ex.functions) == 1
    assert len(ex.warnings) == 1 and "lib/gone.c:3" in ex.warnings[0]


def test_introduced_issue_extracts_from_after_tree(tmp_path):
    before, after = _trees(tmp_path)
    pair = _pair()
    issue = _issue(lines=(7, 10))  # after-version coordinates
    decision = LabelDecision(
        fingerprint=fingerprint(issue), label=0, reason="never_fixed",
        pair=pair, occurrences=((pair, "introduced"),),
    )
    assert ds.extraction_side(decision) == "after"
    ex = ds.build_auto_labeler_example(
        decision, issue, pair, _diff(pair, [FIX_HUNK]),
        before, after, project="sample",
    )
    assert "if (p)" in ex.functions[0].code  # after-side body
    assert ex.functions[0].touched_by_commit is True  # added range 9-10 overlaps


def test_extraction_side_defaults_to_before():
    issue = _issue()
    pair = _pair()
    assert ds.extraction_side(_decision(issue, pair, classification="fixed")) == "before"
    assert ds.extraction_side(_decision(issue, pair, classification="pre_existing")) == "before"
    other = _pair(h="c3" * 20, date=50)
    moved = LabelDecision(
        fingerprint=fingerprint(issue), label=0, reason="never_fixed",
        pair=pair, occurrences=((other, "introduced"),),
    )
    assert ds.extraction_side(moved) == "before"


# --- after-fix negatives --------------------------------------------------


def _positive(tmp_path):
    before, after = _trees(tmp_path)
    pair = _pair()
    issue = _issue()
    ex = ds.build_auto_labeler_example(
        _decision(issue, pair), issue, pair, _diff(pair, [FIX_HUNK]),
        before, after, project="sample",
    )
    return ex, after, _diff(pair, [FIX_HUNK])


def test_after_fix_reextracts_fixed_body(tmp_path):
    positive, after, diff = _positive(tmp_path)
    neg = ds.build_after_fix_example(positive, after, diff)
    assert neg.id == positive.id + "/after_fix"
    assert (neg.label, neg.label_source) == (0, ds.AFTER_FIX)
    assert neg.zipped_bug_report is None
    assert neg.trace == positive.trace
    assert len(neg.functions) == 1
    fe = neg.functions[0]
    assert (fe.name, fe.start_line, fe.end_line) == ("use", 6, 12)
    assert "if (p)" in fe.code
    assert fe.touched_by_commit is True


def test_after_fix_same_name_fallback_when_line_removed(tmp_path):
    positive, after, _ = _positive(tmp_path)
    # a diff that removes both trace lines: remap fails, name lookup succeeds
    diff = _diff(_pair(), [Hunk(7, 3, 7, 4)])
    neg = ds.build_after_fix_example(positive, after, diff)
    assert [fe.name for fe in neg.functions] == ["use"]


def test_after_fix_deleted_file_yields_nothing(tmp_path):
    positive, after, _ = _positive(tmp_path)
    pair = _pair()
    gone = FileChange(before_path="lib/a.c", after_path=None, hunks=[Hunk(1, 11, 0, 0)])
    with pytest.raises(NothingExtractable):
        ds.build_after_fix_example(positive, after, CommitDiff(commit=pair.meta, files=(gone,)))


def test_after_fix_requires_positive_input(tmp_path):
    positive, after, diff = _positive(tmp_path)
    neg = ds.build_after_fix_example(positive, after, diff)
    with pytest.raises(ValueError):
        ds.build_after_fix_example(neg, after, diff)


def test_after_fix_follows_renames(tmp_path):
    positive, after, _ = _positive(tmp_path)
    moved = after / "lib" / "moved.c"
    (after / "lib" / "a.c").rename(moved)
    pair = _pair()
    fc = FileChange(before_path="lib/a.c", after_path="lib/moved.c", hunks=[FIX_HUNK])
    neg = ds.build_after_fix_example(positive, after, CommitDiff(commit=pair.meta, files=(fc,)))
    assert neg.functions[0].file == "lib/moved.c"


# --- splits ----------------------------------------------------------------


def test_largest_remainder_hand_cases():
    assert ds.largest_remainder_counts(10, (0.8, 0.1, 0.1)) == [8, 1, 1]
    assert ds.largest_remainder_counts(9, (0.8, 0.1, 0.1)) == [7, 1, 1]
    assert ds.largest_remainder_counts(1, (0.8, 0.1, 0.1)) == [1, 0, 0]
    assert ds.largest_remainder_counts(0, (0.8, 0.1, 0.1)) == [0, 0, 0]
    assert ds.largest_remainder_counts(5, (0.5, 0.5, 0.0)) == [3, 2, 0]


def test_largest_remainder_is_within_one_of_quota():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randrange(0, 500)
        raw = [rng.random() for _ in range(3)]
        ratios = [r / sum(raw) for r in raw]
        counts = ds.largest_remainder_counts(n, ratios)
        assert sum(counts) == n
        for count, ratio in zip(counts, ratios):
            assert abs(count - n * ratio) < 1.0


def _fake_examples(n_by_type):
    out = []
    for bug_type, n in n_by_type.items():
        for i in range(n):
            out.append(
                ds.LabeledExample(
                    id=f"{bug_type.lower()}-{i:04d}", label=i % 2,
                    label_source=ds.AUTO_LABELER, project="p", bug_type=bug_type,
                    bug_info={}, versions={}, commit={}, trace=(), functions=(),
                )
            )
    return out


def test_split_is_stratified_disjoint_and_complete():
    examples = _fake_examples({"NULL_DEREFERENCE": 40, "MEMORY_LEAK": 10, "BUFFER_OVERRUN": 3})
    split = ds.split_dataset(examples, seed=5)
    train, dev, test = set(split.train), set(split.dev), set(split.test)
    assert not (train & dev or train & test or dev & test)
    assert train | dev | test == {e.id for e in examples}
    # per-stratum allocation follows the largest-remainder counts
    for prefix, n in (("null", 40), ("memory", 10), ("buffer", 3)):
        want = ds.largest_remainder_counts(n, ds.DEFAULT_RATIOS)
        got = [sum(i.startswith(prefix) for i in part) for part in (train, dev, test)]
        assert got == want, prefix


def test_split_ignores_input_order_and_respects_seed():
    examples = _fake_examples({"NULL_DEREFERENCE": 60, "MEMORY_LEAK": 25})
    base = ds.split_dataset(examples, seed=1)
    rng = random.Random(2)
    shuffled = examples[:]
    rng.shuffle(shuffled)
    assert ds.split_dataset(shuffled, seed=1) == base
    assert ds.split_dataset(examples, seed=2) != base
    assert ds.split_dataset(examples, seed=1).train == base.train


def test_split_rejects_bad_ratios():
    with pytest.raises(ValueError):
        ds.split_dataset(_fake_examples({"X": 4}), ratios=(0.5, 0.2, 0.2))


def test_split_files_round_trip(tmp_path):
    examples = _fake_examples({"NULL_DEREFERENCE": 12})
    split = ds.split_dataset(examples, seed=3)
    ds.write_split(tmp_path / "splits", split)
    for name in ds.SPLIT_NAMES:
        assert tuple(ds.read_split_ids(tmp_path / "splits", name)) == split.part(name)
    first = (tmp_path / "splits" / "train.txt").read_bytes()
    ds.write_split(tmp_path / "splits", split)
    assert (tmp_path / "splits" / "train.txt").read_bytes() == first
