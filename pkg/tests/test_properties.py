"""Hypothesis property tests for the total-function contracts."""

import base64
import json

from hypothesis import given, settings
from hypothesis import strategies as st

from walletscan.detectors import sensitive_match
from walletscan.jsast import ParseError, ParseUnsupported, member_path, parse_script, walk
from walletscan.loader import normalize_source
from walletscan.semantics import tokenize

text_st = st.text(max_size=200)


@given(text_st)
@settings(max_examples=200, deadline=None)
def test_normalize_is_total_and_idempotent(raw):
    once = normalize_source(raw)
    twice = normalize_source(once.text)
    assert twice.text == once.text


@given(text_st)
@settings(max_examples=200, deadline=None)
def test_parse_never_hangs_or_leaks_other_errors(source):
    try:
        root = parse_script(source)
    except (ParseError, ParseUnsupported):
        return
    for node in walk(root):
        result = member_path(node)
        assert result is None or isinstance(result, str)


@given(st.text(min_size=4, max_size=24), text_st)
@settings(max_examples=300, deadline=None)
def test_sensitive_match_evidence_rechecks(needle, haystack):
    evidence = sensitive_match(needle, haystack)
    if evidence is not None:
        assert evidence.recheck()


@given(st.text(min_size=4, max_size=16))
@settings(max_examples=200, deadline=None)
def test_sensitive_match_finds_planted_encodings(needle):
    for form, encoder in [
            ("raw", lambda s: s),
            ("base64", lambda s: base64.b64encode(s.encode()).decode()),
            ("hex", lambda s: s.encode().hex())]:
        haystack = "prefix " + encoder(needle) + " suffix"
        evidence = sensitive_match(needle, haystack)
        assert evidence is not None
        # an earlier normalization in the fixed order may match too
        order = ["raw", "hex", "base64", "json_embedded", "utf16"]
        assert order.index(evidence.normalization) <= order.index(form)


@given(st.text(max_size=120))
@settings(max_examples=200, deadline=None)
def test_tokenize_lowercase_and_stable(text):
    tokens = tokenize(text)
    assert tokens == tokenize(text)
    assert all(t == t.lower() for t in tokens)
    assert all(t for t in tokens)
