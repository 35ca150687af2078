"""Static analysis over parsed scripts.

Four passes share one scope model built per file:

* match_valuable_functions finds crypto / DOM-sink uses by member-path
  regex over calls and property-write assignments;
* forward_search records the enclosing-function chain of a match and
  harvests hard-coded parameters (with one-step constant propagation);
* backtrack_taint enumerates intra-file def-use chains from a DOM sink
  argument back to a source, a dead end, or a file boundary;
* plan_instrumentation computes where a runtime collector call must be
  inserted to observe a crypto call's inputs.

Everything here is a pure function of (tree, rules); analyses for
different files can run concurrently without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import PurePosixPath

from .jsast import AstNode, AstRoot, FUNCTION_KINDS, Span, member_path, walk
from .rules import ValuableFunctionDb

# Identifiers treated as well-known platform globals: reads rooted here
# are not "data leaving the file", they are just API surface.
PLATFORM_GLOBALS = frozenset({
    "window", "document", "location", "navigator", "console", "history",
    "screen", "globalThis", "self", "chrome", "browser", "crypto",
    "localStorage", "sessionStorage", "indexedDB", "performance",
    "Math", "JSON", "Object", "Array", "String", "Number", "Boolean",
    "Date", "RegExp", "Promise", "Symbol", "Reflect", "Proxy", "Error",
    "TypeError", "RangeError", "Map", "Set", "WeakMap", "WeakSet",
    "Uint8Array", "Int8Array", "Uint16Array", "Uint32Array", "Float64Array",
    "ArrayBuffer", "DataView", "TextEncoder", "TextDecoder", "URL",
    "URLSearchParams", "XMLHttpRequest", "fetch", "setTimeout",
    "setInterval", "clearTimeout", "clearInterval", "requestAnimationFrame",
    "parseInt", "parseFloat", "isNaN", "isFinite", "encodeURIComponent",
    "decodeURIComponent", "encodeURI", "decodeURI", "escape", "unescape",
    "btoa", "atob", "alert", "confirm", "prompt", "undefined", "NaN",
    "Infinity", "arguments", "event",
})

MAX_TRACE_DEPTH = 100
MAX_TRACES_PER_SINK = 2000


@dataclass
class HardcodedParam:
    value: object
    raw: str


@dataclass
class ChainEntry:
    name: str
    span: Span


@dataclass
class FunctionMatch:
    file: str
    node_id: int
    matched_pattern: str
    role: str                      # crypto role or sink kind
    span: Span
    callee_path: str
    is_sink: bool = False
    via: str = "call"              # sinks: "call" or "assign"
    taint_arg: int = 0
    enclosing_chain: list[ChainEntry] = field(default_factory=list)
    hardcoded_params: dict[str, HardcodedParam] = field(default_factory=dict)

    @property
    def chain_names(self) -> list[str]:
        return [c.name for c in self.enclosing_chain]


@dataclass
class TaintTrace:
    sink: FunctionMatch
    steps: list[tuple[int, str]]   # (node_id, transfer_kind)
    source: str | None             # matched dom_source pattern
    externally_modifiable: bool
    unresolved: bool = False


@dataclass
class InstrumentationPlan:
    plan_id: str
    file: str
    envelope_name: str
    envelope_span: Span
    insertion_node_id: int
    insertion_span: Span
    captured_bindings: list[str]
    target_match: FunctionMatch
    capture_may_fail: bool = False
    derived_args: list[str] = field(default_factory=list)


# ------------------------------------------------------------- scope model

@dataclass
class _Binding:
    name: str
    kind: str                      # "param" | "var" | "func"
    defs: list[tuple[AstNode, str]] = field(default_factory=list)
    param_index: int = -1
    func_node: AstNode | None = None


class _Scope:
    def __init__(self, node: AstNode, parent: "_Scope | None"):
        self.node = node
        self.parent = parent
        self.bindings: dict[str, _Binding] = {}

    def declare(self, name: str, kind: str, **kw) -> _Binding:
        binding = self.bindings.get(name)
        if binding is None:
            binding = _Binding(name=name, kind=kind, **kw)
            self.bindings[name] = binding
        return binding

    def resolve(self, name: str) -> "_Binding | None":
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.bindings:
                return scope.bindings[name]
            scope = scope.parent
        return None


class ScopeModel:
    """Bindings, parents, and call-site indexes for one file's tree."""

    def __init__(self, root: AstRoot):
        self.root = root
        self.parent: dict[int, AstNode] = {}
        self.by_id: dict[int, AstNode] = {}
        self.scope_of_node: dict[int, _Scope] = {}
        self.scopes: dict[int, _Scope] = {}
        self.call_sites: dict[int, list[AstNode]] = {}
        self._build()

    def _build(self) -> None:
        program = self.root.program
        top = _Scope(program, None)
        self.scopes[program.node_id] = top
        # (node, scope the node appears in)
        stack: list[tuple[AstNode, _Scope]] = [(program, top)]
        while stack:
            node, scope = stack.pop()
            self.by_id[node.node_id] = node
            self.scope_of_node[node.node_id] = scope
            content_scope = scope
            if node.kind in FUNCTION_KINDS:
                fn_scope = self.scopes.get(node.node_id)
                if fn_scope is None:
                    fn_scope = _Scope(node, scope)
                    self.scopes[node.node_id] = fn_scope
                content_scope = fn_scope
                if node.kind == "FunctionDeclaration" and node.name:
                    scope.declare(node.name, "func", func_node=node)
                for index, param in enumerate(node.children[:-1]):
                    for name in _pattern_names(param):
                        fn_scope.declare(name, "param", param_index=index)
            if node.kind == "VariableDeclarator":
                target = node.children[0]
                init = node.children[1] if len(node.children) > 1 else None
                if target.kind == "Identifier":
                    binding = scope.declare(target.name, "var")
                    if init is not None:
                        binding.defs.append((init, "assign"))
                        if init.kind in ("FunctionExpression", "ArrowFunction"):
                            binding.func_node = init
                else:
                    for name in _pattern_names(target):
                        binding = scope.declare(name, "var")
                        if init is not None:
                            binding.defs.append((init, "member"))
            for child in node.children:
                self.parent[child.node_id] = node
                stack.append((child, content_scope))
        # second pass: assignments attach defs to already-declared bindings
        for node in walk(program):
            if node.kind != "AssignmentExpression":
                continue
            target = node.children[0]
            if target.kind != "Identifier":
                continue
            scope = self.scope_of_node[node.node_id]
            binding = scope.resolve(target.name) or \
                self.scopes[program.node_id].declare(target.name, "var")
            binding.defs.append((node.children[1], "assign"))
            if node.children[1].kind in ("FunctionExpression", "ArrowFunction"):
                binding.func_node = node.children[1]
        # call-site index for locally resolvable callees
        for node in walk(program):
            if node.kind != "CallExpression":
                continue
            callee = node.children[0]
            fn = self.resolve_local_function(callee)
            if fn is not None:
                self.call_sites.setdefault(fn.node_id, []).append(node)

    def scope_at(self, node: AstNode) -> _Scope:
        return self.scope_of_node[node.node_id]

    def resolve_local_function(self, callee: AstNode) -> AstNode | None:
        if callee.kind in ("FunctionExpression", "ArrowFunction"):
            return callee
        if callee.kind != "Identifier":
            return None
        binding = self.scope_at(callee).resolve(callee.name)
        if binding is None:
            return None
        if binding.kind == "func":
            return binding.func_node
        return binding.func_node

    def enclosing_functions(self, node: AstNode) -> list[AstNode]:
        """Function ancestors, outermost first."""
        chain: list[AstNode] = []
        cur = self.parent.get(node.node_id)
        while cur is not None:
            if cur.kind in FUNCTION_KINDS:
                chain.append(cur)
            cur = self.parent.get(cur.node_id)
        chain.reverse()
        return chain

    def returns_of(self, fn: AstNode) -> list[AstNode]:
        """Return-expression nodes of fn itself (nested functions excluded)."""
        out: list[AstNode] = []
        body = fn.children[-1]
        if fn.kind == "ArrowFunction" and fn.attrs.get("expression_body"):
            return [body]
        stack = list(body.children)
        while stack:
            node = stack.pop()
            if node.kind in FUNCTION_KINDS:
                continue
            if node.kind == "ReturnStatement":
                out.extend(node.children)
                continue
            stack.extend(node.children)
        return out

    def statement_of(self, node: AstNode, container: AstNode) -> AstNode | None:
        """Ancestor of node that is a direct child of container's body."""
        body = container.children[-1] if container.kind in FUNCTION_KINDS \
            else container
        direct = {c.node_id for c in body.children}
        cur: AstNode | None = node
        while cur is not None:
            if cur.node_id in direct:
                return cur
            cur = self.parent.get(cur.node_id)
        return None


def _pattern_names(node: AstNode) -> list[str]:
    """Identifier names bound by a binding target/pattern."""
    if node.kind == "Identifier":
        return [node.name]
    if node.kind == "AssignmentExpression":  # param default
        return _pattern_names(node.children[0])
    if node.kind == "SpreadElement":
        return _pattern_names(node.children[0])
    if node.kind == "ObjectLiteral":
        names: list[str] = []
        for prop in node.children:
            if prop.kind == "Property":
                names.extend(_pattern_names(prop.children[1]))
            elif prop.kind == "SpreadElement":
                names.extend(_pattern_names(prop.children[0]))
        return names
    if node.kind == "ArrayLiteral":
        names = []
        for element in node.children:
            names.extend(_pattern_names(element))
        return names
    return []


def function_label(model: ScopeModel, fn: AstNode) -> str:
    """Readable name for a function: declared, bound, or callback-derived."""
    if fn.name:
        return fn.name
    parent = model.parent.get(fn.node_id)
    if parent is not None:
        if parent.kind == "VariableDeclarator" and \
                parent.children[0].kind == "Identifier":
            return parent.children[0].name
        if parent.kind == "AssignmentExpression" and \
                parent.children[0].kind == "Identifier":
            return parent.children[0].name
        if parent.kind == "AssignmentExpression":
            path = member_path(parent.children[0])
            if path:
                return path.split(".")[-1]
        if parent.kind == "Property" and parent.children[0].kind == "Identifier":
            return parent.children[0].name
        if parent.kind == "CallExpression" and fn in parent.children[1:]:
            callee = parent.children[0]
            if callee.kind == "MemberExpression" and \
                    callee.children[1].kind == "Identifier":
                return f"<{callee.children[1].name}-callback>"
            if callee.kind == "Identifier":
                return f"<{callee.name}-callback>"
    return "<anonymous>"


# ------------------------------------------------------------ match pass

def match_path(node: AstNode) -> str | None:
    """Member path for pattern matching, tolerant of complex receivers.

    A fully static chain gives its dotted path. When the chain bottoms
    out in a call or computed access, the trailing static segments are
    kept under an opaque root: `getEl(x).parent.innerHTML` gives
    `<expr>.parent.innerHTML`. Patterns anchored at a concrete root
    (e.g. `document\\.write`) can then never match fabricated suffixes.
    """
    full = member_path(node)
    if full is not None:
        return full
    suffix: list[str] = []
    cur = node
    while cur.kind == "MemberExpression" and not cur.attrs.get("computed") \
            and cur.children[1].kind == "Identifier":
        suffix.append(cur.children[1].name)
        cur = cur.children[0]
    if not suffix:
        return None
    suffix.reverse()
    return "<expr>." + ".".join(suffix)


def _callee_path(node: AstNode) -> str | None:
    callee = node.children[0]
    path = match_path(callee)
    if path is None and callee.kind == "Identifier":
        path = callee.name
    return path


def match_valuable_functions(root: AstRoot, db: ValuableFunctionDb,
                             model: ScopeModel | None = None) -> list[FunctionMatch]:
    """One enriched FunctionMatch per matching call or property write."""
    model = model or ScopeModel(root)
    file = root.file_path
    matches: list[FunctionMatch] = []
    for node in walk(root):
        if node.kind == "CallExpression":
            path = _callee_path(node)
            if not path:
                continue
            for crypto in db.crypto:
                if crypto.regex.fullmatch(path):
                    matches.append(FunctionMatch(
                        file=file, node_id=node.node_id,
                        matched_pattern=crypto.pattern, role=crypto.role,
                        span=node.span, callee_path=path))
                    break
            else:
                for sink in db.dom_sinks:
                    if sink.via == "call" and sink.regex.fullmatch(path):
                        matches.append(FunctionMatch(
                            file=file, node_id=node.node_id,
                            matched_pattern=sink.pattern, role=sink.sink_kind,
                            span=node.span, callee_path=path, is_sink=True,
                            via="call", taint_arg=sink.taint_arg))
                        break
        elif node.kind == "AssignmentExpression":
            path = match_path(node.children[0])
            if not path:
                continue
            for sink in db.dom_sinks:
                if sink.via == "assign" and sink.regex.fullmatch(path):
                    matches.append(FunctionMatch(
                        file=file, node_id=node.node_id,
                        matched_pattern=sink.pattern, role=sink.sink_kind,
                        span=node.span, callee_path=path, is_sink=True,
                        via="assign"))
                    break
    for match in matches:
        forward_search(root, match, db, model)
    matches.sort(key=lambda m: m.node_id)
    return matches


# ------------------------------------------------------- forward search

def forward_search(root: AstRoot, match: FunctionMatch,
                   db: ValuableFunctionDb,
                   model: ScopeModel | None = None) -> FunctionMatch:
    """Record the outermost-to-innermost chain and hard-coded parameters."""
    model = model or ScopeModel(root)
    node = model.by_id[match.node_id]
    chain = [ChainEntry(function_label(model, fn), fn.span)
             for fn in model.enclosing_functions(node)]
    if not chain:
        chain = [ChainEntry("<program>", root.program.span)]
    match.enclosing_chain = chain
    if match.is_sink:
        return match

    schema = option_keys = []
    for crypto in db.crypto:
        if crypto.pattern == match.matched_pattern:
            schema, option_keys = crypto.param_schema, crypto.option_keys
            break
    params: dict[str, HardcodedParam] = {}

    def put(slot: str, value: object, raw: str) -> None:
        if slot not in params:
            params[slot] = HardcodedParam(value=value, raw=raw)

    def constant_of(expr: AstNode) -> tuple[object, str] | None:
        if expr.kind == "Literal" and not expr.attrs.get("regex"):
            return expr.value, expr.raw or ""
        if expr.kind == "UnaryExpression" and expr.operator == "-" and \
                expr.children[0].kind == "Literal" and \
                isinstance(expr.children[0].value, (int, float)):
            inner = expr.children[0]
            return -inner.value, f"-{inner.raw}"
        if expr.kind == "Identifier":
            binding = model.scope_at(expr).resolve(expr.name)
            if binding is not None and len(binding.defs) == 1:
                def_expr, _ = binding.defs[0]
                if def_expr.kind == "Literal" and not def_expr.attrs.get("regex"):
                    return def_expr.value, def_expr.raw or ""
        path = member_path(expr)
        if path is not None and expr.kind == "MemberExpression":
            return path, path
        return None

    for index, arg in enumerate(node.children[1:]):
        if arg.kind == "ObjectLiteral":
            for prop in arg.children:
                if prop.kind != "Property" or prop.attrs.get("computed") \
                        or prop.attrs.get("method"):
                    continue
                key_node = prop.children[0]
                key = key_node.name if key_node.kind == "Identifier" \
                    else (key_node.value if isinstance(key_node.value, str) else None)
                if key is None or key not in option_keys:
                    continue
                const = constant_of(prop.children[1])
                if const is not None:
                    put(key, const[0], const[1])
        else:
            const = constant_of(arg)
            if const is not None and arg.kind != "MemberExpression":
                slot = schema[index] if index < len(schema) else f"arg{index}"
                put(slot, const[0], const[1])
    match.hardcoded_params = params
    return match


# ------------------------------------------------------ taint backtracking

def _source_of(expr: AstNode, db: ValuableFunctionDb):
    """Innermost static member prefix of expr matching a source pattern."""
    cur = expr
    while cur is not None:
        path = member_path(cur)
        if path:
            for source in db.dom_sources:
                if source.regex.fullmatch(path):
                    return source, cur
        if cur.kind == "MemberExpression" and not cur.attrs.get("computed"):
            cur = cur.children[0]
        else:
            return None
    return None


def _root_identifier(expr: AstNode) -> AstNode | None:
    cur = expr
    while cur.kind == "MemberExpression":
        cur = cur.children[0]
    return cur if cur.kind == "Identifier" else None


def backtrack_taint(root: AstRoot, sink: FunctionMatch,
                    db: ValuableFunctionDb,
                    model: ScopeModel | None = None) -> list[TaintTrace]:
    """All def-use chains from the sink argument back to a source.

    Chains that reach a db source produce resolved traces; chains that
    leave the file (free identifiers, calls into unknown functions with
    no local arguments) produce traces marked unresolved, which never
    carry externally_modifiable. Dead ends at constants produce nothing.
    Computed property reads kill taint.
    """
    model = model or ScopeModel(root)
    sink_node = model.by_id[sink.node_id]
    if sink.via == "assign":
        start, start_kind = sink_node.children[1], "assign"
    else:
        args = sink_node.children[1:]
        if sink.taint_arg >= len(args):
            return []
        start, start_kind = args[sink.taint_arg], "call_arg"

    traces: list[TaintTrace] = []
    seen: set[tuple] = set()

    def emit(steps: list[tuple[int, str]], source: str | None,
             modifiable: bool, unresolved: bool) -> None:
        if len(traces) >= MAX_TRACES_PER_SINK:
            return
        if unresolved:
            steps = steps[:-1] + [(steps[-1][0], "call_arg")]
        key = (tuple(steps), source, unresolved)
        if key in seen:
            return
        seen.add(key)
        traces.append(TaintTrace(
            sink=sink, steps=steps, source=source,
            externally_modifiable=modifiable and not unresolved,
            unresolved=unresolved))

    def visit(expr: AstNode, kind: str, steps: list[tuple[int, str]],
              on_path: frozenset[int]) -> None:
        if expr.node_id in on_path or len(steps) >= MAX_TRACE_DEPTH:
            return
        steps = steps + [(expr.node_id, kind)]
        on_path = on_path | {expr.node_id}
        k = expr.kind

        if k == "Identifier":
            binding = model.scope_at(expr).resolve(expr.name)
            if binding is None:
                if expr.name in PLATFORM_GLOBALS:
                    return
                emit(steps, None, False, unresolved=True)
                return
            if binding.kind == "param":
                fn = _enclosing_fn_with_param(model, expr, binding)
                sites = model.call_sites.get(fn.node_id, []) if fn is not None else []
                forwarded = False
                for site in sites:
                    args = site.children[1:]
                    if binding.param_index < len(args):
                        forwarded = True
                        visit(args[binding.param_index], "call_arg", steps, on_path)
                if not forwarded:
                    emit(steps, None, False, unresolved=True)
                return
            if not binding.defs:
                return
            for def_expr, hint in binding.defs:
                visit(def_expr, hint, steps, on_path)
            return

        if k == "MemberExpression":
            found = _source_of(expr, db)
            if found is not None:
                source, at = found
                if at is not expr:
                    steps = steps + [(at.node_id, "member")]
                emit(steps, source.pattern, source.externally_modifiable, False)
                return
            if expr.attrs.get("computed"):
                return  # opaque: kills taint
            obj = expr.children[0]
            root_ident = _root_identifier(obj)
            if root_ident is not None and \
                    model.scope_at(root_ident).resolve(root_ident.name) is None:
                if root_ident.name in PLATFORM_GLOBALS:
                    return
                emit(steps + [(obj.node_id, "member")], None, False,
                     unresolved=True)
                return
            visit(obj, "member", steps, on_path)
            return

        if k == "CallExpression":
            callee = expr.children[0]
            args = expr.children[1:]
            fn = model.resolve_local_function(callee)
            if fn is not None:
                for ret in model.returns_of(fn):
                    visit(ret, "return", steps, on_path)
                return
            if callee.kind == "MemberExpression":
                found = _source_of(callee.children[0], db)
                if found is not None:
                    source, at = found
                    emit(steps + [(at.node_id, "member")], source.pattern,
                         source.externally_modifiable, False)
                    return
                for arg in args:
                    visit(arg, "call_arg", steps, on_path)
                obj = callee.children[0]
                root_ident = _root_identifier(obj)
                if root_ident is None or \
                        model.scope_at(root_ident).resolve(root_ident.name) is not None:
                    # method receiver carries the data: s.substring(1);
                    # unknown namespace receivers (o.parse) stay silent
                    visit(obj, "member", steps, on_path)
                return
            # unknown free callee: data can only come from the arguments
            if args:
                for arg in args:
                    visit(arg, "call_arg", steps, on_path)
            else:
                emit(steps, None, False, unresolved=True)
            return

        if k == "BinaryExpression":
            if expr.operator == "+":
                visit(expr.children[0], "concat", steps, on_path)
                visit(expr.children[1], "concat", steps, on_path)
            elif expr.operator in ("||", "&&", "??"):
                visit(expr.children[0], "assign", steps, on_path)
                visit(expr.children[1], "assign", steps, on_path)
            elif expr.operator == ",":
                visit(expr.children[1], "assign", steps, on_path)
            return

        if k == "TemplateLiteral":
            for i, child in enumerate(expr.children):
                if i % 2 == 1:
                    visit(child, "concat", steps, on_path)
            return

        if k == "ConditionalExpression":
            visit(expr.children[1], "assign", steps, on_path)
            visit(expr.children[2], "assign", steps, on_path)
            return

        if k == "AssignmentExpression":
            visit(expr.children[1], "assign", steps, on_path)
            return

        if k == "AwaitExpression":
            visit(expr.children[0], "assign", steps, on_path)
            return
        # literals, object/array literals, functions, unary: dead ends

    visit(start, start_kind, [], frozenset())
    return traces


def _enclosing_fn_with_param(model: ScopeModel, use: AstNode,
                             binding: _Binding) -> AstNode | None:
    for fn in reversed(model.enclosing_functions(use)):
        fn_scope = model.scopes.get(fn.node_id)
        if fn_scope is not None and \
                fn_scope.bindings.get(binding.name) is binding:
            return fn
    return None


# ----------------------------------------------------- instrumentation plan

def _data_identifiers(expr: AstNode) -> list[AstNode]:
    """Identifiers an expression's value is derived from (callees excluded)."""
    out: list[AstNode] = []

    def go(node: AstNode) -> None:
        k = node.kind
        if k == "Identifier":
            out.append(node)
        elif k == "CallExpression":
            callee = node.children[0]
            if callee.kind == "MemberExpression":
                go(callee.children[0])
            for arg in node.children[1:]:
                go(arg)
        elif k == "MemberExpression":
            if not node.attrs.get("computed"):
                go(node.children[0])
        elif k in FUNCTION_KINDS:
            return
        else:
            for child in node.children:
                go(child)

    go(expr)
    return out


def plan_instrumentation(root: AstRoot, match: FunctionMatch,
                         model: ScopeModel | None = None) -> InstrumentationPlan:
    """Locate the envelope function and the collector insertion point.

    Captured bindings are the call's argument identifiers that are
    already live at the insertion point plus the envelope parameters
    that derived arguments trace back to. Arguments whose values are
    produced outside the envelope flag the plan capture_may_fail.
    """
    model = model or ScopeModel(root)
    call = model.by_id[match.node_id]
    enclosing = model.enclosing_functions(call)
    if enclosing:
        envelope = enclosing[-1]
        env_name = function_label(model, envelope)
        params = {name for p in envelope.children[:-1]
                  for name in _pattern_names(p)}
    else:
        envelope = root.program
        env_name = "<program>"
        params = set()

    body = envelope.children[-1] if envelope.kind in FUNCTION_KINDS else envelope
    body_stmt_ids = [c.node_id for c in body.children]

    def def_statements(name: str) -> list[AstNode]:
        stmts = []
        for stmt in body.children:
            stack = [stmt]
            hit = False
            while stack and not hit:
                node = stack.pop()
                if node.kind in FUNCTION_KINDS:
                    continue  # closures do not define here-and-now values
                if node.kind in ("VariableDeclarator", "AssignmentExpression") \
                        and node.children[0].kind == "Identifier" \
                        and node.children[0].name == name:
                    hit = True
                    break
                stack.extend(node.children)
            if hit:
                stmts.append(stmt)
        return stmts

    captured: set[str] = set()
    derived_args: list[str] = []
    may_fail = False
    insertion_candidates: list[AstNode] = []

    arg_idents: list[AstNode] = []
    for arg in call.children[1:]:
        if arg.kind == "Identifier":
            arg_idents.append(arg)
        elif arg.kind == "MemberExpression":
            root_ident = _root_identifier(arg)
            if root_ident is not None:
                arg_idents.append(root_ident)

    def trace_to_params(name: str, depth: int = 0) -> None:
        nonlocal may_fail
        if depth > 8:
            return
        if name in params:
            captured.add(name)
            return
        stmts = def_statements(name)
        if not stmts:
            may_fail = True
            return
        insertion_candidates.extend(stmts)
        for stmt in stmts:
            init = None
            if stmt.kind == "VariableDeclarator" and len(stmt.children) > 1:
                init = stmt.children[1]
            elif stmt.kind == "AssignmentExpression":
                init = stmt.children[1]
            if init is None:
                continue
            for ident in _data_identifiers(init):
                if ident.name in params:
                    captured.add(ident.name)
                elif model.scope_at(ident).resolve(ident.name) is not None:
                    trace_to_params(ident.name, depth + 1)

    for ident in arg_idents:
        name = ident.name
        if name in params:
            captured.add(name)
            continue
        stmts = def_statements(name)
        if stmts:
            derived_args.append(name)
            trace_to_params(name)
        else:
            binding = model.scope_at(ident).resolve(name)
            if binding is not None and binding.kind in ("var", "func"):
                # bound, but not produced inside the envelope
                may_fail = True
            elif binding is None:
                may_fail = True

    call_stmt = model.statement_of(call, envelope)
    if insertion_candidates:
        insertion = min(insertion_candidates,
                        key=lambda s: body_stmt_ids.index(s.node_id))
    else:
        insertion = call_stmt
    if insertion is None:  # call nested oddly; fall back to first statement
        insertion = body.children[0] if body.children else body

    stem = PurePosixPath(match.file).stem or "script"
    return InstrumentationPlan(
        plan_id=f"{stem}:{match.node_id}",
        file=match.file,
        envelope_name=env_name,
        envelope_span=envelope.span,
        insertion_node_id=insertion.node_id,
        insertion_span=insertion.span,
        captured_bindings=sorted(captured),
        target_match=match,
        capture_may_fail=may_fail,
        derived_args=sorted(set(derived_args)),
    )


def plan_bindings_visible(root: AstRoot, plan: InstrumentationPlan,
                          model: ScopeModel | None = None) -> bool:
    """Scope check: every captured binding is live at the insertion point."""
    model = model or ScopeModel(root)
    call = model.by_id[plan.target_match.node_id]
    enclosing = model.enclosing_functions(call)
    envelope = enclosing[-1] if enclosing else root.program
    params = {name for p in (envelope.children[:-1]
                             if envelope.kind in FUNCTION_KINDS else [])
              for name in _pattern_names(p)}
    body = envelope.children[-1] if envelope.kind in FUNCTION_KINDS else envelope
    visible = set(params)
    for stmt in body.children:
        if stmt.node_id == plan.insertion_node_id:
            break
        for node in walk(stmt):
            if node.kind == "VariableDeclarator" and \
                    node.children[0].kind == "Identifier":
                visible.add(node.children[0].name)
    return all(name in visible for name in plan.captured_bindings)
