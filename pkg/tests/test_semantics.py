"""TF-IDF, page classification, and semantics database tests."""

import json
import math
import random

import pytest

from walletscan.semantics import (
    EmptyCorpus, PageObservation, SchemaViolation, build_keyword_candidates,
    classify_page, default_semantics_db, load_semantics_db, observe_html,
    tokenize,
)


# --------------------------------------------------------------- TF-IDF

def tfidf_oracle(corpus: list[str]) -> list[dict[str, float]]:
    """Independent count-based scoring: tf * ln(N / df)."""
    docs = [tokenize(d) for d in corpus]
    out = []
    for tokens in docs:
        scores = {}
        for term in set(tokens):
            tf = tokens.count(term)
            df = sum(1 for other in docs if term in set(other))
            scores[term] = tf * math.log(len(docs) / df)
        out.append(scores)
    return out


def test_tfidf_hand_example():
    corpus = ["import mnemonic", "set password", "import seed"]
    per_doc = build_keyword_candidates(corpus, top_k=10)
    stats = {s.term: s for s in per_doc[0]}
    assert stats["import"].tf == 1
    assert stats["import"].idf == pytest.approx(math.log(3 / 2), abs=1e-15)
    assert stats["import"].tfidf == pytest.approx(math.log(1.5), abs=1e-15)


def test_tfidf_everywhere_term_scores_zero():
    corpus = ["wallet import", "wallet create", "wallet lock"]
    per_doc = build_keyword_candidates(corpus, top_k=10)
    for doc in per_doc:
        wallet = [s for s in doc if s.term == "wallet"][0]
        assert wallet.idf == 0.0
        assert wallet.tfidf == 0.0


def test_tfidf_top_k_zero():
    assert build_keyword_candidates(["a b"], top_k=0) == [[]]


def test_tfidf_empty_corpus():
    with pytest.raises(EmptyCorpus):
        build_keyword_candidates([], top_k=5)


def test_tfidf_ranking_ties_lexicographic():
    per_doc = build_keyword_candidates(["zeta alpha", "other"], top_k=2)
    assert [s.term for s in per_doc[0]] == ["alpha", "zeta"]


def test_tfidf_matches_oracle_on_random_corpora():
    rng = random.Random(42)
    vocabulary = [f"w{i}" for i in range(50)]
    for _ in range(25):
        corpus = [" ".join(rng.choices(vocabulary, k=rng.randint(1, 30)))
                  for _ in range(rng.randint(1, 10))]
        got = build_keyword_candidates(corpus, top_k=100)
        want = tfidf_oracle(corpus)
        for doc_stats, expected in zip(got, want):
            assert {s.term for s in doc_stats} == set(expected)
            for stat in doc_stats:
                assert stat.tfidf == pytest.approx(expected[stat.term],
                                                   abs=1e-12)


# -------------------------------------------------------- observation

def test_observe_html_tokens_and_elements():
    html = """
    <html><head><script>ignored()</script></head><body>
      <h1>Import your wallet</h1>
      <input type="password" placeholder="Enter password" id="pw">
      <textarea id="phrase">abandon ability</textarea>
      <button id="go">Continue</button>
    </body></html>
    """
    obs = observe_html(html, url="u")
    assert "import" in obs.visible_text and "wallet" in obs.visible_text
    assert "ignored" not in obs.visible_text
    tags = [(e.tag, e.type) for e in obs.elements]
    assert ("input", "password") in tags
    buttons = [e for e in obs.elements if e.tag == "button"]
    assert buttons[0].label.strip() == "Continue"
    areas = [e for e in obs.elements if e.tag == "textarea"]
    assert areas[0].value == "abandon ability"


# ------------------------------------------------------ classification

SETUP_HTML = """
<html><body>
  <h2>Import wallet</h2>
  <p>Enter your mnemonic below, then create a password and confirm it.</p>
  {boxes}
  <input type="password" placeholder="password">
  <input type="password" placeholder="confirm password">
  <button>Import</button>
</body></html>
""".format(boxes="\n".join('<input type="text" name="w{0}">'.format(i)
                           for i in range(12)))


def test_wallet_setup_vector_classifies():
    db = default_semantics_db()
    obs = observe_html(SETUP_HTML)
    result = classify_page(obs, db)
    assert result.page_id == "wallet_setup"
    assert len(result.matched_keywords) == 5


def test_blank_page_unknown():
    db = default_semantics_db()
    assert classify_page(observe_html("<html></html>"), db).page_id == "unknown"


MINIMAL_SETUP_HTML = (
    "<body><p>import mnemonic password enter confirm</p>"
    + "".join("<input type='text'>" for _ in range(12))
    + "<input type='password'><input type='password'></body>")


def test_minimal_setup_vector_classifies():
    db = default_semantics_db()
    assert classify_page(observe_html(MINIMAL_SETUP_HTML),
                         db).page_id == "wallet_setup"


def test_group_coverage_required():
    """Dropping every group-5 hit (repeat/confirm/verify) gives unknown."""
    db = default_semantics_db()
    stripped = MINIMAL_SETUP_HTML.replace(" confirm", "")
    assert classify_page(observe_html(stripped), db).page_id == "unknown"


def test_group_coverage_on_rich_page_flips_entry():
    db = default_semantics_db()
    stripped = SETUP_HTML.replace("and confirm it", "") \
        .replace("confirm password", "retype password")
    assert classify_page(observe_html(stripped), db).page_id != "wallet_setup"


def _delete_group_hits(obs: PageObservation, keywords: list[str]):
    drop_tokens = {t for kw in keywords for t in tokenize(kw)}
    kept = [t for t in obs.visible_text if t not in drop_tokens]
    return PageObservation(visible_text=kept, elements=obs.elements,
                           url=obs.url, timestamp=obs.timestamp)


ENTRY_VECTORS = {
    "start": "<body>Welcome to the demo wallet. Get started below."
             "<button>Get started</button></body>",
    "wallet_creation_preparations":
        "<body><h1>Set up your wallet</h1><button>Create a new wallet</button>"
        "<button>Import an existing wallet</button></body>",
    "password_setting":
        "<body>Create a password. Enter it and confirm below."
        "<input type='password'><input type='password'>"
        "<button>Continue</button></body>",
    "mnemonic_display":
        "<body>Your recovery phrase. Write down these words and keep them "
        "safe.<div>abandon ability able</div></body>",
    "import_method_selection":
        "<body>Choose an import method: recovery phrase or private key."
        "<button>Recovery phrase</button></body>",
    "mnemonic_import":
        "<body>Import wallet: enter your recovery phrase words in order."
        + "".join("<input type='text'>" for _ in range(12)) + "</body>",
    "wallet_setup": SETUP_HTML,
    "home": "<body>Account balance: 3 ETH <button>Send</button>"
            "<button>Receive</button></body>",
    "wallet_unlock":
        "<body>Welcome back! Unlock with your password."
        "<input type='password'><button>Unlock</button></body>",
}


@pytest.mark.parametrize("page_id", sorted(ENTRY_VECTORS))
def test_entry_vectors_classify(page_id):
    db = default_semantics_db()
    obs = observe_html(ENTRY_VECTORS[page_id])
    assert classify_page(obs, db).page_id == page_id


@pytest.mark.parametrize("page_id", sorted(ENTRY_VECTORS))
def test_group_deletion_flips_classification(page_id):
    db = default_semantics_db()
    obs = observe_html(ENTRY_VECTORS[page_id])
    entry = db.entry(page_id)
    for group in entry.keyword_groups:
        reduced = _delete_group_hits(obs, group)
        assert classify_page(reduced, db).page_id != page_id


@pytest.mark.parametrize("page_id", sorted(ENTRY_VECTORS))
def test_classification_monotone_under_neutral_text(page_id):
    db = default_semantics_db()
    obs = observe_html(ENTRY_VECTORS[page_id])
    padded = PageObservation(
        visible_text=obs.visible_text + tokenize(
            "lorem ipsum dolor sit amet consectetur adipiscing"),
        elements=obs.elements, url=obs.url, timestamp=obs.timestamp)
    assert classify_page(padded, db).page_id == page_id


def test_classification_deterministic():
    db = default_semantics_db()
    obs = observe_html(SETUP_HTML)
    results = {classify_page(obs, db).page_id for _ in range(5)}
    assert results == {"wallet_setup"}


def test_phrase_matching_requires_adjacency():
    db = default_semantics_db()
    joined = observe_html("<body>Your recovery phrase. Save these words."
                          "</body>")
    assert classify_page(joined, db).page_id == "mnemonic_display"
    gapped = observe_html("<body>recovery of the phrase. Save words.</body>")
    assert classify_page(gapped, db).page_id == "unknown"


# ------------------------------------------------------------- schema

def test_default_db_shape():
    db = default_semantics_db()
    assert len(db.entries) == 9
    setup = db.entry("wallet_setup")
    assert len(setup.keyword_groups) == 5


def test_schema_rejects_empty_group():
    raw = json.dumps({"entries": [
        {"page_id": "home", "keyword_groups": [[]]}]})
    with pytest.raises(SchemaViolation):
        load_semantics_db(raw)


def test_schema_rejects_unknown_page_id():
    raw = json.dumps({"entries": [
        {"page_id": "nonsense", "keyword_groups": [["x"]]}]})
    with pytest.raises(SchemaViolation):
        load_semantics_db(raw)


def test_schema_rejects_unknown_keys():
    raw = json.dumps({"entries": [], "surprise": 1})
    with pytest.raises(SchemaViolation):
        load_semantics_db(raw)


def test_schema_rejects_duplicate_page_ids():
    entry = {"page_id": "home", "keyword_groups": [["x"]]}
    raw = json.dumps({"entries": [entry, entry]})
    with pytest.raises(SchemaViolation):
        load_semantics_db(raw)
