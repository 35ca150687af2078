"""Source rewriting: insert runtime collector calls and repackage bundles.

Each instrumentation plan becomes one guarded statement of the form

    typeof __wr_capture === "function" && __wr_capture("<plan>", { a: a });

inserted immediately before the planned statement. The guard keeps the
rewritten script behavior-identical when the capture agent is absent.
Rewriting is copy-on-write: the original bundle is never touched.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from . import jsast
from .analysis import InstrumentationPlan, ScopeModel
from .jsast import AstNode, Span
from .loader import ExtensionPackage, ScriptFile

MARKER = "/* wr-instrumented v1 */"
CAPTURE_FN = "__wr_capture"
AGENT_BUFFER_KEY = "__wr_buf"


class InstrumentError(Exception):
    pass


class AlreadyInstrumented(InstrumentError):
    pass


class WriteFailure(InstrumentError):
    pass


@dataclass
class InstrumentedBundle:
    out_path: Path
    plan_index: dict[str, tuple[str, Span]] = field(default_factory=dict)
    agent_key: str = AGENT_BUFFER_KEY
    agent_paths: list[str] = field(default_factory=list)


def _syn(kind: str, **kw) -> AstNode:
    return AstNode(kind, Span(0, 0, 0, 0), **kw)


def _capture_statement(plan_ids: list[str], bindings: list[str]) -> AstNode:
    """`typeof __wr_capture === "function" && __wr_capture(ids, {a: a});`"""
    guard = _syn("BinaryExpression", operator="===", children=[
        _syn("UnaryExpression", operator="typeof", attrs={"prefix": True},
             children=[_syn("Identifier", name=CAPTURE_FN)]),
        _syn("Literal", value="function", raw='"function"'),
    ])
    ids = ",".join(plan_ids)
    props = [
        _syn("Property", attrs={"computed": False}, children=[
            _syn("Identifier", name=name),
            _syn("Identifier", name=name),
        ])
        for name in bindings
    ]
    call = _syn("CallExpression", children=[
        _syn("Identifier", name=CAPTURE_FN),
        _syn("Literal", value=ids, raw=json.dumps(ids)),
        _syn("ObjectLiteral", children=props),
    ])
    return _syn("BinaryExpression", operator="&&", children=[guard, call])


def apply_instrumentation(script: ScriptFile, plans: list[InstrumentationPlan],
                          notes: list[str] | None = None) -> str:
    """Rewrite one script with collector calls for all of its plans.

    Plans whose spans no longer match the current tree are skipped with
    a note; plans sharing an insertion point merge into a single call
    carrying all plan ids.
    """
    notes = notes if notes is not None else []
    if script.raw_source.lstrip().startswith(MARKER) or \
            script.normalized_source.lstrip().startswith(MARKER):
        raise AlreadyInstrumented(f"{script.path} already carries {MARKER!r}")
    root = jsast.parse_script(script.normalized_source, script.path)
    if not plans:
        return jsast.print_canonical(root)
    model = ScopeModel(root)

    grouped: dict[int, list[InstrumentationPlan]] = {}
    for plan in plans:
        if plan.file != script.path:
            raise InstrumentError(
                f"plan {plan.plan_id} targets {plan.file}, not {script.path}")
        node = model.by_id.get(plan.insertion_node_id)
        if node is None or node.span != plan.insertion_span:
            notes.append(f"StaleSpan: plan {plan.plan_id} skipped "
                         f"(tree changed since planning)")
            continue
        grouped.setdefault(plan.insertion_node_id, []).append(plan)

    inserted = 0
    for node_id, group in sorted(grouped.items()):
        target = model.by_id[node_id]
        parent = model.parent.get(node_id)
        container = parent if parent is not None else root.program
        if container.kind not in ("Program", "BlockStatement"):
            notes.append(f"StaleSpan: plan {group[0].plan_id} skipped "
                         f"(insertion point is not a statement)")
            continue
        bindings = sorted({b for plan in group for b in plan.captured_bindings})
        stmt = _capture_statement([p.plan_id for p in group], bindings)
        index = container.children.index(target)
        container.children.insert(index, stmt)
        inserted += 1

    text = jsast.print_canonical(root)
    if inserted:
        text = MARKER + "\n" + text
    return text


def package_instrumented(pkg: ExtensionPackage, rewritten: dict[str, str],
                         agent_scripts: dict[str, str], out_dir: str | Path,
                         plans: list[InstrumentationPlan] | None = None,
                         ) -> InstrumentedBundle:
    """Emit a loadable bundle: original + rewrites + injected agent runtime.

    The agent becomes the first content-script entry (and the first v2
    background script); the manifest is otherwise unchanged.
    """
    if not agent_scripts:
        raise WriteFailure(
            "agent scripts missing: supply the built agent (see README, "
            "frontend/dist) or run with --mode static")
    out = Path(out_dir)
    try:
        if out.exists():
            raise WriteFailure(f"output path already exists: {out}")
        shutil.copytree(pkg.root_path, out)
        for rel, text in rewritten.items():
            dest = out / rel
            dest.parent.mkdir(parents=True, exist_ok=True)
            dest.write_text(text, encoding="utf-8")
        agent_paths = []
        for rel, text in agent_scripts.items():
            dest = out / rel
            dest.parent.mkdir(parents=True, exist_ok=True)
            dest.write_text(text, encoding="utf-8")
            agent_paths.append(rel)

        manifest_path = out / "manifest.json"
        data = json.loads(manifest_path.read_text(encoding="utf-8-sig"))
        entry = {"matches": ["<all_urls>"], "js": agent_paths,
                 "run_at": "document_start", "all_frames": True}
        data["content_scripts"] = [entry] + list(data.get("content_scripts", []))
        bg = data.get("background")
        if isinstance(bg, dict) and isinstance(bg.get("scripts"), list):
            bg["scripts"] = agent_paths + bg["scripts"]
        manifest_path.write_text(json.dumps(data, indent=2) + "\n",
                                 encoding="utf-8")
        # extension pages load their own scripts, so give each bundled
        # HTML page the agent as its first script
        for html in pkg.html_pages:
            page_path = out / html.path
            if not page_path.is_file():
                continue
            depth = len(Path(html.path).parts) - 1
            prefix = "../" * depth
            tags = "".join(f'<script src="{prefix}{a}"></script>'
                           for a in agent_paths)
            text = page_path.read_text(encoding="utf-8", errors="replace")
            lowered = text.lower()
            anchor = lowered.find("<head>")
            if anchor != -1:
                cut = anchor + len("<head>")
                text = text[:cut] + tags + text[cut:]
            else:
                text = tags + text
            page_path.write_text(text, encoding="utf-8")
    except WriteFailure:
        raise
    except OSError as exc:
        raise WriteFailure(f"could not write bundle: {exc}") from exc

    index = {}
    for plan in plans or []:
        index[plan.plan_id] = (plan.file, plan.insertion_span)
    return InstrumentedBundle(out_path=out, plan_index=index,
                              agent_paths=agent_paths)
