"""Random taint-program generator with a built-in ground-truth oracle.

Generates small scripts (assignments, concatenations, template strings,
conditionals, locally-defined function calls, unknown calls, source
reads) while tracking the def-use structure it creates. The oracle
enumerates every taint path over that known structure by brute force,
producing (source, unresolved, transfer-kind-sequence) projections that
the production backtracker must reproduce exactly.

The oracle never looks at the AST: it replays the documented transfer
relation over the generator's own records, so agreement means the
analyzer correctly recovered the def-use reality from source text.
"""

from __future__ import annotations

import random
from collections import Counter

SOURCES = {
    "hash": ("window.location.hash", "(window\\.)?location\\.hash", True),
    "search": ("window.location.search", "(window\\.)?location\\.search", True),
    "referrer": ("document.referrer", "document\\.referrer", True),
    "winname": ("window.name", "window\\.name", True),
    "cookie": ("document.cookie", "(document\\.)?cookie", False),
}

# IR node shapes (tuples):
#   ("lit",)                     constant
#   ("var", name)                identifier read
#   ("free", name)               unbound identifier read
#   ("concat", a, b)             a + b
#   ("tmpl", [e...])             `..${e}..`
#   ("cond", a, b)               1 ? a : b
#   ("calllocal", fname, [args]) f(args)
#   ("callunknown", [args])      extFn(args), len(args) >= 1
#   ("callnoargs",)              extProducer()
#   ("srcread", key)             direct source member read
#   ("methodsrc", key)           source.substring(1)
#   ("methodvar", name)          name.trim()


class Func:
    def __init__(self, name: str, params: list[str]):
        self.name = name
        self.params = params
        self.ret: tuple = ("lit",)


class Program:
    def __init__(self):
        self.defs: dict[str, list[tuple[tuple, str]]] = {}  # var -> [(ir, hint)]
        self.order: list[tuple[str, tuple, str]] = []       # top-level var defs
        self.funcs: dict[str, Func] = {}
        self.call_sites: dict[str, list[list[tuple]]] = {}  # fname -> [args IRs]
        self.sink_ir: tuple = ("lit",)
        self.sink_kind = "call_arg"
        self.sink_style = "write"


def generate(seed: int) -> Program:
    rng = random.Random(seed)
    prog = Program()
    n_funcs = rng.randint(0, 2)
    for fi in range(n_funcs):
        func = Func(f"f{fi}", [f"p{fi}_{k}" for k in range(rng.randint(1, 2))])
        prog.funcs[func.name] = func
        prog.call_sites[func.name] = []

    n_vars = rng.randint(2, 7)
    for vi in range(n_vars):
        name = f"v{vi}"
        ir = _gen_expr(rng, prog, avail=[f"v{k}" for k in range(vi)], depth=0)
        hint = "member" if rng.random() < 0.15 else "assign"
        prog.order.append((name, ir, hint))
        prog.defs[name] = [(ir, hint)]

    for func in prog.funcs.values():
        func.ret = _gen_expr(rng, prog, avail=list(func.params), depth=0,
                             in_func=True)

    avail = [name for name, _, _ in prog.order]
    prog.sink_ir = ("var", rng.choice(avail)) if avail and rng.random() < 0.8 \
        else _gen_expr(rng, prog, avail, depth=0)
    if rng.random() < 0.5:
        prog.sink_style, prog.sink_kind = "write", "call_arg"
    else:
        prog.sink_style, prog.sink_kind = "innerhtml", "assign"
    return prog


def _gen_expr(rng: random.Random, prog: Program, avail: list[str],
              depth: int, in_func: bool = False) -> tuple:
    choices = ["lit", "lit", "srcread", "methodsrc", "free", "callnoargs"]
    if avail:
        choices += ["var", "var", "concat", "tmpl", "cond", "methodvar",
                    "callunknown"]
    if prog.funcs and not in_func and depth < 2:
        choices.append("calllocal")
    if depth >= 3:
        choices = ["lit", "var"] if avail else ["lit"]
    kind = rng.choice(choices)
    if kind == "lit":
        return ("lit",)
    if kind == "var":
        return ("var", rng.choice(avail))
    if kind == "free":
        return ("free", f"ext{rng.randint(0, 3)}")
    if kind == "srcread":
        return ("srcread", rng.choice(list(SOURCES)))
    if kind == "methodsrc":
        return ("methodsrc", rng.choice(list(SOURCES)))
    if kind == "methodvar":
        return ("methodvar", rng.choice(avail))
    if kind == "concat":
        return ("concat", _gen_expr(rng, prog, avail, depth + 1, in_func),
                _gen_expr(rng, prog, avail, depth + 1, in_func))
    if kind == "tmpl":
        return ("tmpl", [_gen_expr(rng, prog, avail, depth + 1, in_func)
                         for _ in range(rng.randint(1, 2))])
    if kind == "cond":
        return ("cond", _gen_expr(rng, prog, avail, depth + 1, in_func),
                _gen_expr(rng, prog, avail, depth + 1, in_func))
    if kind == "callunknown":
        return ("callunknown", [_gen_expr(rng, prog, avail, depth + 1, in_func)
                                for _ in range(rng.randint(1, 2))])
    if kind == "callnoargs":
        return ("callnoargs",)
    if kind == "calllocal":
        fname = rng.choice(list(prog.funcs))
        func = prog.funcs[fname]
        args = [_gen_expr(rng, prog, avail, depth + 1, in_func)
                for _ in func.params]
        prog.call_sites[fname].append(args)
        return ("calllocal", fname, args)
    raise AssertionError(kind)


# -------------------------------------------------------------- rendering

def render(prog: Program) -> str:
    lines: list[str] = []
    for func in prog.funcs.values():
        lines.append(f"function {func.name}({', '.join(func.params)}) {{")
        lines.append(f"    return {_render_expr(func.ret)};")
        lines.append("}")
    for name, ir, hint in prog.order:
        if hint == "member":
            lines.append(f"var {{ m: {name} }} = {_render_expr(ir)};")
        else:
            lines.append(f"var {name} = {_render_expr(ir)};")
    if prog.sink_style == "write":
        lines.append(f"document.write({_render_expr(prog.sink_ir)});")
    else:
        lines.append(f"el.innerHTML = {_render_expr(prog.sink_ir)};")
    return "\n".join(lines) + "\n"


def _render_expr(ir: tuple) -> str:
    kind = ir[0]
    if kind == "lit":
        return '"k"'
    if kind == "var":
        return ir[1]
    if kind == "free":
        return ir[1]
    if kind == "srcread":
        return SOURCES[ir[1]][0]
    if kind == "methodsrc":
        return f"{SOURCES[ir[1]][0]}.substring(1)"
    if kind == "methodvar":
        return f"{ir[1]}.trim()"
    if kind == "concat":
        return f"({_render_expr(ir[1])} + {_render_expr(ir[2])})"
    if kind == "tmpl":
        inner = "".join("${" + _render_expr(e) + "}x" for e in ir[1])
        return "`y" + inner + "`"
    if kind == "cond":
        return f"(1 ? {_render_expr(ir[1])} : {_render_expr(ir[2])})"
    if kind == "callunknown":
        args = ", ".join(_render_expr(a) for a in ir[1])
        return f"extFn({args})"
    if kind == "callnoargs":
        return "extProducer()"
    if kind == "calllocal":
        args = ", ".join(_render_expr(a) for a in ir[2])
        return f"{ir[1]}({args})"
    raise AssertionError(kind)


# ----------------------------------------------------------------- oracle

Projection = tuple  # (source_pattern | None, unresolved, kinds tuple)


def expected_projections(prog: Program) -> Counter:
    """Brute-force path enumeration over the generator's own records.

    Mirrors the production relation exactly, including its node-revisit
    guard: IR tuples correspond one-to-one with syntax-tree nodes, so a
    path never visits the same IR object twice (function bodies are
    paramized once up front to keep object identity stable).
    """
    results: Counter = Counter()
    paramized = {name: _paramize(func, func.ret)
                 for name, func in prog.funcs.items()}
    # stable synthetic nodes for bindings not materialized as IR objects
    param_nodes = {(name, i): ("param", name, i)
                   for name, func in prog.funcs.items()
                   for i in range(len(func.params))}

    def emit(source: str | None, unresolved: bool, kinds: tuple) -> None:
        if unresolved:
            kinds = kinds[:-1] + ("call_arg",)
        results[(source, unresolved, kinds)] += 1

    def visit(ir: tuple, kind: str, kinds: tuple, on_path: frozenset) -> None:
        # both guards mirror the production backtracker exactly
        if id(ir) in on_path or len(kinds) >= 100:
            return
        kinds = kinds + (kind,)
        on_path = on_path | {id(ir)}
        shape = ir[0]
        if shape == "lit":
            return
        if shape == "var":
            for def_ir, hint in prog.defs.get(ir[1], []):
                visit(def_ir, hint, kinds, on_path)
            return
        if shape == "free":
            emit(None, True, kinds)
            return
        if shape == "param":
            _, fname, index = ir
            sites = prog.call_sites.get(fname, [])
            if not sites:
                emit(None, True, kinds)
                return
            for args in sites:
                visit(args[index], "call_arg", kinds, on_path)
            return
        if shape == "srcread":
            emit(SOURCES[ir[1]][1], False, kinds)
            return
        if shape == "methodsrc":
            emit(SOURCES[ir[1]][1], False, kinds + ("member",))
            return
        if shape == "methodvar":
            visit(("var", ir[1]), "member", kinds, on_path)
            return
        if shape == "methodparam":
            visit(param_nodes[(ir[1], ir[2])], "member", kinds, on_path)
            return
        if shape == "concat":
            visit(ir[1], "concat", kinds, on_path)
            visit(ir[2], "concat", kinds, on_path)
            return
        if shape == "tmpl":
            for e in ir[1]:
                visit(e, "concat", kinds, on_path)
            return
        if shape == "cond":
            visit(ir[1], "assign", kinds, on_path)
            visit(ir[2], "assign", kinds, on_path)
            return
        if shape == "callunknown":
            for a in ir[1]:
                visit(a, "call_arg", kinds, on_path)
            return
        if shape == "callnoargs":
            emit(None, True, kinds)
            return
        if shape == "calllocal":
            visit(paramized[ir[1]], "return", kinds, on_path)
            return
        raise AssertionError(shape)

    visit(prog.sink_ir, prog.sink_kind, (), frozenset())
    return results


def _paramize(func: Func, ir: tuple) -> tuple:
    """Rewrite var reads of function params into param IR nodes."""
    shape = ir[0]
    if shape == "var" and ir[1] in func.params:
        return ("param", func.name, func.params.index(ir[1]))
    if shape == "methodvar" and ir[1] in func.params:
        return ("methodparam", func.name, func.params.index(ir[1]))
    if shape in ("concat", "cond"):
        return (shape, _paramize(func, ir[1]), _paramize(func, ir[2]))
    if shape == "tmpl":
        return ("tmpl", [_paramize(func, e) for e in ir[1]])
    if shape == "callunknown":
        return ("callunknown", [_paramize(func, a) for a in ir[1]])
    if shape == "calllocal":
        return ("calllocal", ir[1], [_paramize(func, a) for a in ir[2]])
    return ir
