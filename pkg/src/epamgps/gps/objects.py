"""GPS objects, patterns and first-order rewriting.

Objects are either :class:`Term` (a head with ordered arguments; atoms and
integers are zero-argument terms) or :class:`FeatureSet` (attribute/value
pairs with unique attributes).  Patterns are objects that may contain
:class:`Var`; operator effects may also contain :class:`Calc` arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple, Union

Bindings = Dict[str, "GpsObject"]


@dataclass(frozen=True)
class Term:
    head: Union[str, int]
    args: Tuple["GpsObject", ...] = ()

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class FeatureSet:
    items: Tuple[Tuple[str, "GpsObject"], ...] = ()

    def __post_init__(self):
        items = tuple(sorted(self.items, key=lambda kv: kv[0]))
        keys = [k for k, _ in items]
        if len(set(keys)) != len(keys):
            raise ValueError(f"duplicate attribute in feature set: {keys}")
        object.__setattr__(self, "items", items)

    def get(self, key: str):
        for k, v in self.items:
            if k == key:
                return v
        return None

    def keys(self) -> List[str]:
        return [k for k, _ in self.items]

    def updated(self, changes: "FeatureSet") -> "FeatureSet":
        merged = dict(self.items)
        merged.update(changes.items)
        return FeatureSet(tuple(merged.items()))

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return "?" + self.name


@dataclass(frozen=True)
class Calc:
    """Arithmetic evaluated when an effect template is instantiated."""

    expr: "GpsObject"

    def __str__(self):
        return f"(calc {render(self.expr)})"


GpsObject = Union[Term, FeatureSet, Var, Calc]

ARITHMETIC = {
    "+": lambda xs: sum(xs),
    "-": lambda xs: xs[0] - sum(xs[1:]) if len(xs) > 1 else -xs[0],
    "*": lambda xs: _product(xs),
    "min": min,
    "max": max,
}
COMPARISONS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _product(xs):
    out = 1
    for x in xs:
        out *= x
    return out


def atom(value: Union[str, int]) -> Term:
    return Term(value)


def render(obj: GpsObject) -> str:
    if isinstance(obj, Var):
        return str(obj)
    if isinstance(obj, Calc):
        return str(obj)
    if isinstance(obj, FeatureSet):
        return "(" + " ".join(f"({k} {render(v)})" for k, v in obj.items) + ")"
    if not obj.args:
        return str(obj.head)
    return "(" + " ".join([str(obj.head)] + [render(a) for a in obj.args]) + ")"


def variables(pattern: GpsObject) -> List[str]:
    """Variable names in first-occurrence order."""
    out: List[str] = []

    def walk(p):
        if isinstance(p, Var):
            if p.name not in out:
                out.append(p.name)
        elif isinstance(p, Calc):
            walk(p.expr)
        elif isinstance(p, FeatureSet):
            for _, v in p.items:
                walk(v)
        else:
            for a in p.args:
                walk(a)

    walk(pattern)
    return out


def match(pattern: GpsObject, obj: GpsObject, bindings: Optional[Bindings] = None) -> Optional[Bindings]:
    """Match ``pattern`` against the whole of ``obj``; return extended bindings or None.

    A feature-set pattern matches any feature set holding at least its attributes.
    """
    b = {} if bindings is None else dict(bindings)
    return b if _match(pattern, obj, b) else None


def _match(p, o, b) -> bool:
    if isinstance(p, Var):
        if p.name in b:
            return b[p.name] == o
        b[p.name] = o
        return True
    if isinstance(p, Term):
        if not isinstance(o, Term) or p.head != o.head or len(p.args) != len(o.args):
            return False
        return all(_match(pa, oa, b) for pa, oa in zip(p.args, o.args))
    if isinstance(p, FeatureSet):
        if not isinstance(o, FeatureSet):
            return False
        for k, pv in p.items:
            ov = o.get(k)
            if ov is None or not _match(pv, ov, b):
                return False
        return True
    raise TypeError(f"cannot match against {p!r}")


def evaluate(expr: GpsObject, bindings: Bindings) -> Union[int, GpsObject]:
    """Evaluate an arithmetic expression; non-numeric leaves evaluate to themselves."""
    if isinstance(expr, Var):
        return evaluate(bindings[expr.name], bindings)
    if isinstance(expr, Term):
        if not expr.args:
            return expr.head if isinstance(expr.head, int) else expr
        if expr.head in ARITHMETIC:
            xs = [evaluate(a, bindings) for a in expr.args]
            if not all(isinstance(x, int) for x in xs):
                raise TypeError(f"non-integer argument in {render(expr)}")
            return ARITHMETIC[expr.head](xs)
    return expr


def guard_holds(guard: Term, bindings: Bindings) -> bool:
    a, b = (evaluate(x, bindings) for x in guard.args)
    if guard.head in ("=", "!="):
        return COMPARISONS[guard.head](a, b)
    if not isinstance(a, int) or not isinstance(b, int):
        return False
    return COMPARISONS[guard.head](a, b)


def guards_hold(guards: Tuple[Term, ...], bindings: Bindings) -> bool:
    return all(guard_holds(g, bindings) for g in guards)


def instantiate(template: GpsObject, bindings: Bindings) -> GpsObject:
    if isinstance(template, Var):
        return bindings[template.name]
    if isinstance(template, Calc):
        value = evaluate(template.expr, bindings)
        return Term(value) if isinstance(value, int) else value
    if isinstance(template, FeatureSet):
        return FeatureSet(tuple((k, instantiate(v, bindings)) for k, v in template.items))
    return Term(template.head, tuple(instantiate(a, bindings) for a in template.args))


def subterms(obj: GpsObject) -> Iterator[Tuple[Tuple[int, ...], GpsObject]]:
    """Pre-order (outermost first, left to right) walk yielding (path, subterm)."""
    stack: List[Tuple[Tuple[int, ...], GpsObject]] = [((), obj)]
    while stack:
        path, node = stack.pop()
        yield path, node
        if isinstance(node, Term):
            for i in range(len(node.args) - 1, -1, -1):
                stack.append((path + (i,), node.args[i]))


def replace_at(obj: GpsObject, path: Tuple[int, ...], new: GpsObject) -> GpsObject:
    if not path:
        return new
    i = path[0]
    args = list(obj.args)
    args[i] = replace_at(args[i], path[1:], new)
    return Term(obj.head, tuple(args))


def contains(obj: GpsObject, pattern: GpsObject) -> bool:
    return any(match(pattern, sub) is not None for _, sub in subterms(obj))
