"""Page-semantics: keyword mining, live-page classification, HTML observation.

A wallet UI page is identified by matching keyword groups (every group
of an entry must hit at least once) plus element predicates over the
page's interactive elements. Keyword candidates for new entries are
mined with TF-IDF over page-text corpora.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path

PAGE_IDS = (
    "start",
    "wallet_creation_preparations",
    "password_setting",
    "mnemonic_display",
    "import_method_selection",
    "mnemonic_import",
    "wallet_setup",
    "home",
    "wallet_unlock",
)

PREDICATE_KINDS = (
    "input_count", "password_input", "textarea", "button_labeled",
    "checkbox", "input_sequence",
)

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")


class SemanticsError(Exception):
    pass


class SchemaViolation(SemanticsError):
    pass


class EmptyCorpus(SemanticsError):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercased tokens split on whitespace/punctuation."""
    return _TOKEN_RE.findall(text.lower())


# ---------------------------------------------------------------- TF-IDF

@dataclass
class KeywordStat:
    term: str
    tf: int
    idf: float
    tfidf: float


def build_keyword_candidates(corpus: list[str], top_k: int) -> list[list[KeywordStat]]:
    """Rank terms of each document by tf * ln(N / df).

    Ties break lexicographically; only terms present in the document are
    scored, so df >= 1 always holds.
    """
    if not corpus:
        raise EmptyCorpus("corpus must contain at least one document")
    docs = [tokenize(doc) for doc in corpus]
    n_docs = len(docs)
    df: dict[str, int] = {}
    for tokens in docs:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    out: list[list[KeywordStat]] = []
    for tokens in docs:
        counts: dict[str, int] = {}
        for term in tokens:
            counts[term] = counts.get(term, 0) + 1
        stats = []
        for term, tf in counts.items():
            idf = math.log(n_docs / df[term])
            stats.append(KeywordStat(term=term, tf=tf, idf=idf, tfidf=tf * idf))
        stats.sort(key=lambda s: (-s.tfidf, s.term))
        out.append(stats[:max(top_k, 0)])
    return out


# ------------------------------------------------------------ observations

@dataclass
class PageElement:
    tag: str
    type: str = ""
    label: str = ""
    elem_id: str = ""
    name: str = ""
    value: str = ""
    checked: bool = False


@dataclass
class PageObservation:
    visible_text: list[str]          # lowercased token stream
    elements: list[PageElement]
    url: str = ""
    timestamp: float = 0.0

    def text(self) -> str:
        return " ".join(self.visible_text)


class _ObservationParser(HTMLParser):
    _SKIP = {"script", "style", "noscript"}
    _INTERACTIVE = {"input", "textarea", "button", "select", "a"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.tokens: list[str] = []
        self.elements: list[PageElement] = []
        self._skip_depth = 0
        self._open_interactive: list[PageElement] = []

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skip_depth += 1
            return
        amap = {k: (v or "") for k, v in attrs}
        for key in ("placeholder", "aria-label", "alt", "title"):
            if amap.get(key):
                self.tokens.extend(tokenize(amap[key]))
        if tag in self._INTERACTIVE:
            element = PageElement(
                tag=tag,
                type=amap.get("type", "").lower(),
                label=" ".join(filter(None, (
                    amap.get("placeholder", ""), amap.get("aria-label", "")))),
                elem_id=amap.get("id", ""),
                name=amap.get("name", ""),
                value=amap.get("value", ""),
                checked="checked" in amap,
            )
            self.elements.append(element)
            if tag in ("button", "textarea", "a"):
                self._open_interactive.append(element)
            if tag == "input" and element.type in ("button", "submit") \
                    and element.value:
                element.label = (element.label + " " + element.value).strip()
                self.tokens.extend(tokenize(element.value))

    def handle_endtag(self, tag):
        if tag in self._SKIP:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if self._open_interactive and self._open_interactive[-1].tag == tag:
            self._open_interactive.pop()

    def handle_data(self, data):
        if self._skip_depth:
            return
        words = tokenize(data)
        if not words:
            return
        self.tokens.extend(words)
        if self._open_interactive:
            element = self._open_interactive[-1]
            element.label = (element.label + " " + data.strip()).strip()
            if element.tag == "textarea":
                element.value = (element.value + data).strip()


def observe_html(html: str, url: str = "", timestamp: float = 0.0) -> PageObservation:
    """Extract the token stream and interactive-element inventory of a page."""
    parser = _ObservationParser()
    try:
        parser.feed(html)
        parser.close()
    except Exception:  # malformed markup degrades to whatever was gathered
        pass
    return PageObservation(visible_text=parser.tokens,
                           elements=parser.elements, url=url,
                           timestamp=timestamp)


# ---------------------------------------------------------------- database

@dataclass
class ElementPredicate:
    kind: str
    params: dict

    def holds(self, obs: PageObservation) -> bool:
        if self.kind == "input_count":
            count = sum(1 for e in obs.elements if e.tag == "input")
            lo = self.params.get("min", 0)
            hi = self.params.get("max")
            return count >= lo and (hi is None or count <= hi)
        if self.kind == "password_input":
            count = sum(1 for e in obs.elements
                        if e.tag == "input" and e.type == "password")
            return count >= self.params.get("min", 1)
        if self.kind == "textarea":
            present = any(e.tag == "textarea" for e in obs.elements)
            return present == self.params.get("present", True)
        if self.kind == "button_labeled":
            wanted = [w.lower() for w in self.params.get("label_any", [])]
            for e in obs.elements:
                if e.tag in ("button", "a") or (
                        e.tag == "input" and e.type in ("button", "submit")):
                    label = e.label.lower()
                    if any(w in label for w in wanted):
                        return True
            return False
        if self.kind == "checkbox":
            present = any(e.tag == "input" and e.type == "checkbox"
                          for e in obs.elements)
            return present == self.params.get("present", True)
        if self.kind == "input_sequence":
            counts = set(self.params.get("counts", [12, 15, 24]))
            types = set(self.params.get("types", ["text", "password", ""]))
            run = best = 0
            for e in obs.elements:
                if e.tag == "input" and e.type in types:
                    run += 1
                    best = max(best, run)
                else:
                    run = 0
            return best in counts
        raise SchemaViolation(f"unknown predicate kind {self.kind!r}")


@dataclass
class SemanticsEntry:
    page_id: str
    keyword_groups: list[list[str]]
    element_predicates: list[ElementPredicate] = field(default_factory=list)


@dataclass
class SemanticsDb:
    entries: list[SemanticsEntry]

    def entry(self, page_id: str) -> SemanticsEntry | None:
        for e in self.entries:
            if e.page_id == page_id:
                return e
        return None


@dataclass
class PageClassification:
    page_id: str                      # one of PAGE_IDS or "unknown"
    matched_keywords: dict[str, list[str]] = field(default_factory=dict)
    matched_predicates: list[str] = field(default_factory=list)
    total_hits: int = 0

    @property
    def known(self) -> bool:
        return self.page_id != "unknown"


def _count_phrase(tokens: list[str], phrase: list[str]) -> int:
    """Occurrences of consecutive phrase tokens in the stream."""
    if not phrase or len(phrase) > len(tokens):
        return 0
    hits = 0
    limit = len(tokens) - len(phrase) + 1
    for i in range(limit):
        if tokens[i:i + len(phrase)] == phrase:
            hits += 1
    return hits


def _match_entry(obs: PageObservation, entry: SemanticsEntry):
    matched: dict[str, list[str]] = {}
    total = 0
    for gi, group in enumerate(entry.keyword_groups):
        group_hits = []
        for keyword in group:
            hits = _count_phrase(obs.visible_text, tokenize(keyword))
            if hits:
                group_hits.append(keyword)
                total += hits
        if not group_hits:
            return None
        matched[f"group{gi + 1}"] = group_hits
    preds = []
    for pred in entry.element_predicates:
        if not pred.holds(obs):
            return None
        preds.append(pred.kind)
    return matched, preds, total


def classify_page(obs: PageObservation, db: SemanticsDb) -> PageClassification:
    """Pick the entry whose groups all hit and predicates all hold.

    Among several full matches the one with the most total keyword
    occurrences wins; remaining ties go to database order.
    """
    best: PageClassification | None = None
    for entry in db.entries:
        result = _match_entry(obs, entry)
        if result is None:
            continue
        matched, preds, total = result
        if best is None or total > best.total_hits:
            best = PageClassification(page_id=entry.page_id,
                                      matched_keywords=matched,
                                      matched_predicates=preds,
                                      total_hits=total)
    return best or PageClassification(page_id="unknown")


def load_semantics_db(raw: str) -> SemanticsDb:
    """Parse and validate a semantics database JSON document."""
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"semantics db is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "entries" not in data:
        raise SchemaViolation("semantics db must be an object with 'entries'")
    allowed_top = {"version", "entries", "notes"}
    unknown = set(data) - allowed_top
    if unknown:
        raise SchemaViolation(f"unknown top-level keys: {sorted(unknown)}")
    entries: list[SemanticsEntry] = []
    seen: set[str] = set()
    for item in data["entries"]:
        allowed = {"page_id", "keyword_groups", "element_predicates", "notes"}
        unknown = set(item) - allowed
        if unknown:
            raise SchemaViolation(f"unknown entry keys: {sorted(unknown)}")
        page_id = item.get("page_id")
        if page_id not in PAGE_IDS:
            raise SchemaViolation(f"unknown page_id {page_id!r}")
        if page_id in seen:
            raise SchemaViolation(f"duplicate page_id {page_id!r}")
        seen.add(page_id)
        groups = item.get("keyword_groups")
        if not isinstance(groups, list) or not groups:
            raise SchemaViolation(f"{page_id}: needs at least one keyword group")
        for group in groups:
            if not isinstance(group, list) or not group or \
                    not all(isinstance(k, str) and k.strip() for k in group):
                raise SchemaViolation(f"{page_id}: keyword groups must be "
                                      "nonempty lists of nonempty strings")
        preds = []
        for p in item.get("element_predicates", []):
            kind = p.get("kind")
            if kind not in PREDICATE_KINDS:
                raise SchemaViolation(f"{page_id}: unknown predicate {kind!r}")
            preds.append(ElementPredicate(kind=kind, params=p.get("params", {})))
        entries.append(SemanticsEntry(page_id=page_id, keyword_groups=groups,
                                      element_predicates=preds))
    return SemanticsDb(entries=entries)


_DEFAULT_DB_PATH = Path(__file__).parent / "data" / "semantics.json"


def default_semantics_db() -> SemanticsDb:
    return load_semantics_db(_DEFAULT_DB_PATH.read_text(encoding="utf-8"))
