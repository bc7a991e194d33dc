"""Parse, validate and render ``.task`` files.

Grammar (whitespace separated, ``;`` starts a line comment)::

    task       := (task NAME section*)
    section    := (objects featureset|term)
                | (operators (operator NAME (pre PATTERN) [(when GUARD*)] (post TEMPLATE))*)
                | (differences (difference NAME RANK DETECTOR)*)
                | (table (DIFFNAME OPNAME*)*)
                | (initial OBJECT)
                | (desired PATTERN)
    DETECTOR   := (attr NAME) | (contains PATTERN+) | (mismatch)
    GUARD      := (CMP EXPR EXPR)          CMP  in < <= > >= = !=
    EXPR       := INT | ?VAR | SYMBOL | (ARITH EXPR+)   ARITH in + - * min max

Objects in a ``featureset`` task are lists of ``(attribute value)`` pairs;
in a ``term`` task they are atoms, integers or ``(head arg ...)``.  Patterns
may use ``?name`` variables; effect templates may also use ``(calc EXPR)``.
Every section is required exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..gps.objects import (
    ARITHMETIC,
    COMPARISONS,
    Calc,
    FeatureSet,
    GpsObject,
    Term,
    Var,
    render,
)
from ..gps.solver import (
    AttrDetector,
    ContainsDetector,
    Difference,
    MismatchDetector,
    Operator,
)
from .sexpr import Atom, SExpr, SList, SourceSpan, TaskSyntaxError, read

GRAMMARS = ("featureset", "term")
SECTIONS = ("objects", "operators", "differences", "table", "initial", "desired")
BUILTIN_DIR = Path(__file__).parent / "builtins"
BUILTINS = ("arith", "logic", "jugs", "hanoi3")


@dataclass(frozen=True)
class TaskDefinition:
    name: str
    grammar: str
    operators: Tuple[Operator, ...]
    differences: Tuple[Difference, ...]
    table: Tuple[Tuple[str, Tuple[str, ...]], ...]
    initial: GpsObject
    desired: GpsObject

    def operator(self, name: str) -> Operator:
        for op in self.operators:
            if op.name == name:
                return op
        raise KeyError(name)

    def difference(self, name: str) -> Difference:
        for d in self.differences:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def table_map(self) -> Dict[str, Tuple[str, ...]]:
        return dict(self.table)


class _Parser:
    def __init__(self, filename: str):
        self.filename = filename
        self.grammar = "term"

    def error(self, msg: str, span: SourceSpan):
        raise TaskSyntaxError(msg, span, self.filename)

    # -- small helpers -------------------------------------------------

    def symbol(self, sx: SExpr, what: str) -> str:
        if not isinstance(sx, Atom) or not isinstance(sx.value, str) or sx.is_var:
            self.error(f"expected {what} name", sx.span)
        return sx.value

    def form(self, sx: SExpr, what: str) -> Tuple[str, List[SExpr]]:
        if not isinstance(sx, SList) or not sx.items:
            self.error(f"expected ({what} ...) form", sx.span)
        head = sx.items[0]
        if not isinstance(head, Atom) or not isinstance(head.value, str) or head.is_var:
            self.error(f"expected ({what} ...) form", sx.span)
        return head.value, sx.items[1:]

    def arity(self, sx: SList, args: List[SExpr], n: int, what: str):
        if len(args) != n:
            self.error(f"{what} takes {n} argument{'s' * (n != 1)}, got {len(args)}", sx.span)

    # -- objects -------------------------------------------------------

    def obj(self, sx: SExpr, mode: str) -> GpsObject:
        """mode: literal (no variables), pattern, or template (calc allowed)."""
        if self.grammar == "featureset":
            return self.featureset(sx, mode)
        return self.term(sx, mode)

    def featureset(self, sx: SExpr, mode: str) -> FeatureSet:
        if not isinstance(sx, SList):
            self.error("feature-set object must be a list of (attribute value) pairs", sx.span)
        items, seen = [], set()
        for pair in sx.items:
            if not isinstance(pair, SList) or len(pair.items) != 2:
                self.error("feature must be an (attribute value) pair", pair.span)
            key = self.symbol(pair.items[0], "attribute")
            if key in seen:
                self.error(f"duplicate attribute {key!r}", pair.items[0].span)
            seen.add(key)
            items.append((key, self.term(pair.items[1], mode)))
        return FeatureSet(tuple(items))

    def term(self, sx: SExpr, mode: str) -> GpsObject:
        if isinstance(sx, Atom):
            if sx.is_var:
                if mode == "literal":
                    self.error(f"variable {sx.value} not allowed in a concrete object", sx.span)
                return Var(sx.value[1:])
            return Term(sx.value)
        if not sx.items:
            self.error("empty term", sx.span)
        head = sx.items[0]
        if not isinstance(head, Atom) or not isinstance(head.value, str) or head.is_var:
            self.error("term head must be a symbol", head.span)
        if head.value == "calc":
            if mode != "template":
                self.error("calc is only allowed in operator effects", head.span)
            self.arity(sx, sx.items[1:], 1, "calc")
            return Calc(self.expr(sx.items[1]))
        return Term(head.value, tuple(self.term(a, mode) for a in sx.items[1:]))

    def expr(self, sx: SExpr) -> GpsObject:
        if isinstance(sx, Atom):
            return Var(sx.value[1:]) if sx.is_var else Term(sx.value)
        head, args = self.form(sx, "arithmetic")
        if head not in ARITHMETIC:
            self.error(f"unknown arithmetic operator {head!r}", sx.items[0].span)
        if not args:
            self.error(f"{head} needs at least one argument", sx.span)
        return Term(head, tuple(self.expr(a) for a in args))

    def guard(self, sx: SExpr) -> Term:
        head, args = self.form(sx, "comparison")
        if head not in COMPARISONS:
            self.error(f"unknown comparison {head!r}", sx.items[0].span)
        self.arity(sx, args, 2, head)
        return Term(head, tuple(self.expr(a) for a in args))

    # -- sections ------------------------------------------------------

    def operator(self, sx: SExpr) -> Operator:
        head, args = self.form(sx, "operator")
        if head != "operator":
            self.error(f"expected (operator ...), found ({head} ...)", sx.span)
        if not args:
            self.error("operator needs a name", sx.span)
        name = self.symbol(args[0], "operator")
        parts: Dict[str, SList] = {}
        for part in args[1:]:
            key, _ = self.form(part, "pre/when/post")
            if key not in ("pre", "when", "post"):
                self.error(f"unknown operator clause {key!r}", part.items[0].span)
            if key in parts:
                self.error(f"duplicate {key} clause in operator {name}", part.span)
            parts[key] = part
        for key in ("pre", "post"):
            if key not in parts:
                self.error(f"operator {name} lacks a ({key} ...) clause", sx.span)
        self.arity(parts["pre"], parts["pre"].items[1:], 1, "pre")
        self.arity(parts["post"], parts["post"].items[1:], 1, "post")
        pre_sx = parts["pre"].items[1]
        pre = self.obj(pre_sx, "pattern")
        guards = tuple(self.guard(g) for g in parts["when"].items[1:]) if "when" in parts else ()
        post = self.obj(parts["post"].items[1], "template")
        bound = {a.value for a in _atoms(pre_sx) if a.is_var}
        for clause in ("when", "post"):
            if clause in parts:
                for a in _atoms(parts[clause]):
                    if a.is_var and a.value not in bound:
                        self.error(
                            f"variable {a.value} in operator {name} is not bound by its precondition",
                            a.span,
                        )
        return Operator(name, pre, post, guards)

    def detector(self, sx: SExpr):
        kind, args = self.form(sx, "detector")
        if kind == "attr":
            self.arity(sx, args, 1, "attr")
            if self.grammar != "featureset":
                self.error("attr detectors need a featureset task", sx.span)
            return AttrDetector(self.symbol(args[0], "attribute"))
        if kind == "contains":
            if not args:
                self.error("contains needs at least one pattern", sx.span)
            saved, self.grammar = self.grammar, "term"
            try:
                pats = tuple(self.term(a, "pattern") for a in args)
            finally:
                self.grammar = saved
            return ContainsDetector(pats)
        if kind == "mismatch":
            self.arity(sx, args, 0, "mismatch")
            return MismatchDetector()
        self.error(f"unknown detector {kind!r}", sx.items[0].span)

    def difference(self, sx: SExpr) -> Difference:
        head, args = self.form(sx, "difference")
        if head != "difference":
            self.error(f"expected (difference ...), found ({head} ...)", sx.span)
        self.arity(sx, args, 3, "difference")
        name = self.symbol(args[0], "difference")
        rank = args[1]
        if not isinstance(rank, Atom) or not isinstance(rank.value, int):
            self.error("difference rank must be an integer", rank.span)
        return Difference(name, rank.value, self.detector(args[2]))

    def task(self, text: str) -> TaskDefinition:
        forms = read_with_name(text, self.filename)
        if not forms:
            self.error("missing (task ...) form", SourceSpan(1, 1))
        top = forms[0]
        head, args = self.form(top, "task")
        if head != "task":
            self.error("missing (task ...) form", top.span)
        if len(forms) > 1:
            self.error("unexpected form after (task ...)", forms[1].span)
        if not args:
            self.error("task needs a name", top.span)
        name = self.symbol(args[0], "task")
        sections: Dict[str, SList] = {}
        for sec in args[1:]:
            key, _ = self.form(sec, "section")
            if key not in SECTIONS:
                self.error(f"unknown section {key!r}", sec.items[0].span)
            if key in sections:
                self.error(f"duplicate section {key!r}", sec.items[0].span)
            sections[key] = sec
        for key in SECTIONS:
            if key not in sections:
                self.error(f"missing ({key} ...) section", top.span)

        objs = sections["objects"]
        self.arity(objs, objs.items[1:], 1, "objects")
        grammar = self.symbol(objs.items[1], "object grammar")
        if grammar not in GRAMMARS:
            self.error(f"object grammar must be featureset or term, not {grammar!r}", objs.items[1].span)
        self.grammar = grammar

        operators, op_names = [], set()
        for o in sections["operators"].items[1:]:
            op = self.operator(o)
            if op.name in op_names:
                self.error(f"duplicate operator {op.name!r}", o.items[1].span)
            op_names.add(op.name)
            operators.append(op)

        diffs, diff_names = [], set()
        for d in sections["differences"].items[1:]:
            diff = self.difference(d)
            if diff.name in diff_names:
                self.error(f"duplicate difference {diff.name!r}", d.items[1].span)
            diff_names.add(diff.name)
            diffs.append(diff)

        table, rows = [], set()
        for row in sections["table"].items[1:]:
            if not isinstance(row, SList) or not row.items:
                self.error("table row must be (difference operator ...)", row.span)
            dname = self.symbol(row.items[0], "difference")
            if dname not in diff_names:
                self.error(f"table row names undeclared difference {dname!r}", row.items[0].span)
            if dname in rows:
                self.error(f"duplicate table row for {dname!r}", row.items[0].span)
            rows.add(dname)
            names = []
            for a in row.items[1:]:
                oname = self.symbol(a, "operator")
                if oname not in op_names:
                    self.error(f"table row {dname!r} names undeclared operator {oname!r}", a.span)
                names.append(oname)
            table.append((dname, tuple(names)))

        init = sections["initial"]
        self.arity(init, init.items[1:], 1, "initial")
        desired = sections["desired"]
        self.arity(desired, desired.items[1:], 1, "desired")
        return TaskDefinition(
            name=name,
            grammar=grammar,
            operators=tuple(operators),
            differences=tuple(diffs),
            table=tuple(table),
            initial=self.obj(init.items[1], "literal"),
            desired=self.obj(desired.items[1], "pattern"),
        )


def _atoms(sx: SExpr):
    if isinstance(sx, Atom):
        yield sx
    else:
        for item in sx.items:
            yield from _atoms(item)


def read_with_name(text: str, filename: str) -> List[SExpr]:
    try:
        return read(text)
    except TaskSyntaxError as e:
        e.filename = filename
        raise


def parse_task(text: str, filename: str = "<input>") -> TaskDefinition:
    return _Parser(filename).task(text)


def load_task(path) -> TaskDefinition:
    path = Path(path)
    return parse_task(path.read_text(encoding="utf-8"), str(path))


def builtin_path(name: str) -> Path:
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin task {name!r}; available: {', '.join(BUILTINS)}")
    return BUILTIN_DIR / f"{name}.task"


def builtin(name: str) -> TaskDefinition:
    return load_task(builtin_path(name))


# -- rendering ------------------------------------------------------------


def _render_detector(det) -> str:
    if isinstance(det, AttrDetector):
        return f"(attr {det.attr})"
    if isinstance(det, ContainsDetector):
        return "(contains " + " ".join(render(p) for p in det.patterns) + ")"
    if isinstance(det, MismatchDetector):
        return "(mismatch)"
    raise TypeError(f"cannot render detector {det!r}")


def render_task(task: TaskDefinition) -> str:
    lines = [f"(task {task.name}", f"  (objects {task.grammar})", "  (operators"]
    for op in task.operators:
        parts = [f"(operator {op.name}", f"(pre {render(op.pre)})"]
        if op.guards:
            parts.append("(when " + " ".join(render(g) for g in op.guards) + ")")
        parts.append(f"(post {render(op.post)}))")
        lines.append("    " + " ".join(parts))
    lines[-1] += ")"
    lines.append("  (differences")
    for d in task.differences:
        lines.append(f"    (difference {d.name} {d.rank} {_render_detector(d.detector)})")
    lines[-1] += ")"
    lines.append("  (table")
    for dname, ops in task.table:
        lines.append("    (" + " ".join((dname,) + ops) + ")")
    lines[-1] += ")"
    lines.append(f"  (initial {render(task.initial)})")
    lines.append(f"  (desired {render(task.desired)}))")
    return "\n".join(lines) + "\n"
