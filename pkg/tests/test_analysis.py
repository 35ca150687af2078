"""Static analyzer tests: matching, forward search, taint, plans."""

from collections import Counter
from pathlib import Path

import pytest

from walletscan.analysis import (
    ScopeModel, backtrack_taint, match_valuable_functions,
    plan_bindings_visible, plan_instrumentation,
)
from walletscan.jsast import parse_script
from walletscan.rules import default_rules

from taint_gen import expected_projections, generate, render

RULES = default_rules()
FIXDIR = Path(__file__).parent / "fixtures" / "js"


def analyze(source: str, path: str = "t.js"):
    root = parse_script(source, path)
    model = ScopeModel(root)
    matches = match_valuable_functions(root, RULES.db, model)
    return root, model, matches


# ------------------------------------------------------------- matching

def test_unlock_flow_match():
    source = (FIXDIR / "unlock_flow.js").read_text()
    root, model, matches = analyze(source, "unlock_flow.js")
    assert len(matches) == 1
    match = matches[0]
    assert match.role == "decrypt"
    assert match.callee_path == "CryptoJS.AES.decrypt"
    assert match.chain_names == ["UnlockExample", "unlock"]
    assert match.hardcoded_params == {}


def test_derive_key_match_params():
    source = (FIXDIR / "derive_key.js").read_text()
    root, model, matches = analyze(source, "derive_key.js")
    derive = [m for m in matches if m.callee_path.endswith("deriveKey")]
    assert len(derive) == 1
    match = derive[0]
    assert match.role == "derive_key"
    assert match.chain_names[0] == "a" and len(match.chain_names) == 2
    params = {k: (v.value, v.raw) for k, v in match.hardcoded_params.items()}
    assert params == {
        "name": ("PBKDF2", '"PBKDF2"'),
        "iterations": (5000, "5e3"),
        "hash": ("SHA-256", '"SHA-256"'),
    }


def test_no_crypto_no_matches():
    _, _, matches = analyze("var x = 1; function f() { return x; }")
    assert matches == []


def test_match_determinism_and_order():
    source = (FIXDIR / "derive_key.js").read_text()
    _, _, one = analyze(source)
    _, _, two = analyze(source)
    assert [m.node_id for m in one] == [m.node_id for m in two]
    assert [m.node_id for m in one] == sorted(m.node_id for m in one)


def test_top_level_call_chain_is_program():
    _, _, matches = analyze("CryptoJS.AES.decrypt(c, k);")
    assert matches[0].chain_names == ["<program>"]


def test_one_step_constant_propagation():
    src = """
    function kdf(pw, salt) {
        const iters = 100;
        return w.crypto.subtle.deriveKey({name: "PBKDF2", iterations: iters,
                                          hash: "SHA-256"}, pw, t, f, u);
    }
    """
    _, _, matches = analyze(src)
    params = matches[0].hardcoded_params
    assert params["iterations"].value == 100


def test_member_path_constant_for_mode():
    src = 'var enc = lib.AES.encrypt(data, key, { mode: lib.mode.CBC });'
    _, _, matches = analyze(src)
    assert matches[0].hardcoded_params["mode"].value == "lib.mode.CBC"


def test_assignment_sinks_matched():
    src = 'el.innerHTML = payload; window.location.href = target;'
    _, _, matches = analyze(src)
    kinds = {(m.callee_path, m.role) for m in matches}
    assert ("el.innerHTML", "html_write") in kinds
    assert ("window.location.href", "navigation") in kinds


def test_sink_on_complex_receiver():
    src = 'document.getElementById("x").innerHTML = v;'
    _, _, matches = analyze(src)
    assert matches and matches[0].callee_path == "<expr>.innerHTML"


# ---------------------------------------------------------------- taint

def test_hash_sink_trace():
    source = (FIXDIR / "hash_sink.js").read_text()
    root, model, matches = analyze(source, "hash_sink.js")
    sinks = [m for m in matches if m.is_sink]
    assert len(sinks) == 1
    traces = backtrack_taint(root, sinks[0], RULES.db, model)
    assert traces, "expected at least one trace"
    assert {t.source for t in traces} == {r"(window\.)?location\.hash"}
    assert all(t.externally_modifiable and not t.unresolved for t in traces)
    kinds = [k for _, k in traces[0].steps]
    assert kinds[0] == "assign"
    assert "return" in kinds and "member" in kinds


def test_constant_sink_no_traces():
    root, model, matches = analyze('el.innerHTML = "static";')
    traces = backtrack_taint(root, matches[0], RULES.db, model)
    assert traces == []


def test_cross_file_sink_unresolved():
    root, model, matches = analyze("el.innerHTML = importedValue;")
    traces = backtrack_taint(root, matches[0], RULES.db, model)
    assert len(traces) == 1
    trace = traces[0]
    assert trace.unresolved and not trace.externally_modifiable
    assert trace.source is None
    assert trace.steps[-1][1] == "call_arg"


def test_computed_member_kills_taint():
    root, model, matches = analyze(
        "var v = window.location.hash; el.innerHTML = table[v];")
    traces = backtrack_taint(root, matches[0], RULES.db, model)
    assert traces == []


def test_non_modifiable_source_flagged_false():
    root, model, matches = analyze(
        "var c = document.cookie; el.innerHTML = c;")
    traces = backtrack_taint(root, matches[0], RULES.db, model)
    assert len(traces) == 1
    assert traces[0].source == r"(document\.)?cookie"
    assert traces[0].externally_modifiable is False


def test_unresolved_never_externally_modifiable():
    for seed in range(60):
        prog = generate(seed)
        root = parse_script(render(prog), "g.js")
        model = ScopeModel(root)
        sinks = [m for m in match_valuable_functions(root, RULES.db, model)
                 if m.is_sink]
        for trace in backtrack_taint(root, sinks[0], RULES.db, model):
            if trace.unresolved:
                assert not trace.externally_modifiable


def project(traces):
    return Counter((t.source, t.unresolved, tuple(k for _, k in t.steps))
                   for t in traces)


@pytest.mark.parametrize("seed", range(60))
def test_taint_matches_bruteforce_oracle(seed):
    prog = generate(seed)
    source = render(prog)
    root = parse_script(source, f"gen{seed}.js")
    model = ScopeModel(root)
    sinks = [m for m in match_valuable_functions(root, RULES.db, model)
             if m.is_sink]
    assert len(sinks) == 1
    traces = backtrack_taint(root, sinks[0], RULES.db, model)
    assert project(traces) == expected_projections(prog)


# ---------------------------------------------------------------- plans

def test_unlock_flow_plan():
    source = (FIXDIR / "unlock_flow.js").read_text()
    root, model, matches = analyze(source, "unlock_flow.js")
    plan = plan_instrumentation(root, matches[0], model)
    assert plan.envelope_name == "unlock"
    assert plan.captured_bindings == ["a", "b"]
    assert plan.derived_args == ["c"]
    assert not plan.capture_may_fail
    insertion = model.by_id[plan.insertion_node_id]
    assert insertion.kind == "VariableDeclarator"
    assert insertion.children[0].name == "c"
    assert plan_bindings_visible(root, plan, model)


def test_literal_args_plan_is_empty_but_emitted():
    src = "function go() { w.crypto.subtle.deriveKey('a', 'b'); }"
    root, model, matches = analyze(src)
    plan = plan_instrumentation(root, matches[0], model)
    assert plan.captured_bindings == []
    assert not plan.capture_may_fail
    insertion = model.by_id[plan.insertion_node_id]
    assert insertion.kind == "CallExpression"


def test_closure_built_params_flagged():
    src = """
    function setup() {
        var opts;
        function prepare() { opts = { iterations: 100 }; }
        function run(key) {
            return w.crypto.subtle.deriveKey(opts, key, t, f, u);
        }
    }
    """
    root, model, matches = analyze(src)
    plan = plan_instrumentation(root, matches[0], model)
    assert plan.capture_may_fail
    assert plan.captured_bindings == ["key"]


def test_top_level_plan_synthetic_envelope():
    root, model, matches = analyze("CryptoJS.AES.decrypt(data, key);")
    plan = plan_instrumentation(root, matches[0], model)
    assert plan.envelope_name == "<program>"


def test_plan_bindings_visible_across_fixture_corpus():
    for path in sorted(FIXDIR.glob("*.js")):
        root = parse_script(path.read_text(), path.name)
        model = ScopeModel(root)
        for match in match_valuable_functions(root, RULES.db, model):
            if match.is_sink:
                continue
            plan = plan_instrumentation(root, match, model)
            assert plan_bindings_visible(root, plan, model), path.name
